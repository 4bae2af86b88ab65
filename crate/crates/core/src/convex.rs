//! Geometry of the bounded convex constraint set `C` with `0` in its interior.
//!
//! Membership in scaled copies of `C` is driven entirely by the Minkowski
//! gauge: `xi` lies in `t * closure(C)` iff `gauge(xi) <= t`, and in the
//! interior iff `gauge(xi) < 1`. All types are immutable after construction
//! and every operation is pure.

use crate::error::{HomError, Result};
use crate::math::{self, Rng};
use crate::matrix::Matrix;
use alloc::vec::Vec;

/// Tolerance for the polytope distance iteration.
const PROJECTION_TOL: f64 = 1e-10;
/// Iteration cap for the polytope distance iteration.
const PROJECTION_CAP: usize = 10_000;

/// Closed half-space `normal : xi <= offset` (Frobenius pairing), `offset > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    pub normal: Matrix,
    pub offset: f64,
}

/// Bounded convex constraint set, centered so that `0` is interior.
#[derive(Clone, Debug, PartialEq)]
pub enum ConstraintSet {
    /// Frobenius ball of the given radius.
    Ball { rows: usize, cols: usize, radius: f64 },
    /// Axis-aligned box with per-entry half-widths (all positive).
    Box { half_widths: Matrix },
    /// Intersection of finitely many half-spaces, each with positive offset.
    Polytope {
        rows: usize,
        cols: usize,
        halfspaces: Vec<Halfspace>,
    },
}

impl ConstraintSet {
    pub fn ball(rows: usize, cols: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(HomError::InvalidParameter("ball radius must be positive"));
        }
        Ok(ConstraintSet::Ball { rows, cols, radius })
    }

    pub fn boxed(half_widths: Matrix) -> Result<Self> {
        for i in 0..half_widths.rows() {
            for j in 0..half_widths.cols() {
                if !(half_widths.get(i, j) > 0.0) {
                    return Err(HomError::InvalidParameter(
                        "box half-widths must be positive",
                    ));
                }
            }
        }
        Ok(ConstraintSet::Box { half_widths })
    }

    pub fn polytope(rows: usize, cols: usize, halfspaces: Vec<Halfspace>) -> Result<Self> {
        if halfspaces.is_empty() {
            return Err(HomError::InvalidParameter(
                "polytope needs at least one half-space",
            ));
        }
        for hs in &halfspaces {
            if hs.normal.shape() != (rows, cols) {
                return Err(HomError::DimensionMismatch {
                    expected: (rows, cols),
                    got: hs.normal.shape(),
                });
            }
            if !(hs.offset > 0.0) {
                return Err(HomError::InvalidParameter(
                    "polytope offsets must be positive so that 0 is interior",
                ));
            }
            if hs.normal.norm() == 0.0 {
                return Err(HomError::InvalidParameter("zero half-space normal"));
            }
        }
        let set = ConstraintSet::Polytope {
            rows,
            cols,
            halfspaces,
        };
        // Boundedness sanity check on a deterministic direction sample: a
        // direction with zero gauge escapes to infinity inside the set.
        for u in set.direction_sample() {
            if set.gauge_unchecked(&u) <= 0.0 {
                return Err(HomError::InvalidParameter(
                    "polytope appears unbounded along a sampled direction",
                ));
            }
        }
        Ok(set)
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            ConstraintSet::Ball { rows, cols, .. } => (*rows, *cols),
            ConstraintSet::Box { half_widths } => half_widths.shape(),
            ConstraintSet::Polytope { rows, cols, .. } => (*rows, *cols),
        }
    }

    fn check_shape(&self, xi: &Matrix) -> Result<()> {
        if self.shape() != xi.shape() {
            return Err(HomError::DimensionMismatch {
                expected: self.shape(),
                got: xi.shape(),
            });
        }
        Ok(())
    }

    /// Minkowski gauge `inf { l > 0 : xi in l * closure(C) }`.
    pub fn gauge(&self, xi: &Matrix) -> Result<f64> {
        self.check_shape(xi)?;
        Ok(self.gauge_unchecked(xi))
    }

    /// Gauge without the shape check (debug-asserted); shapes are validated
    /// once at the boundary of each computation.
    #[inline]
    pub fn gauge_unchecked(&self, xi: &Matrix) -> f64 {
        debug_assert_eq!(self.shape(), xi.shape());
        match self {
            ConstraintSet::Ball { radius, .. } => xi.norm() / radius,
            ConstraintSet::Box { half_widths } => {
                let mut g: f64 = 0.0;
                for i in 0..half_widths.rows() {
                    for j in 0..half_widths.cols() {
                        g = g.max(math::abs(xi.get(i, j)) / half_widths.get(i, j));
                    }
                }
                g
            }
            ConstraintSet::Polytope { halfspaces, .. } => {
                let mut g: f64 = 0.0;
                for hs in halfspaces {
                    g = g.max((hs.normal.dot(xi)).max(0.0) / hs.offset);
                }
                g
            }
        }
    }

    /// Euclidean (Frobenius) distance to the closure of `C`.
    pub fn dist_to_closure(&self, xi: &Matrix) -> Result<f64> {
        self.check_shape(xi)?;
        Ok(self.project_to_closure(xi)?.1)
    }

    /// Nearest point of `closure(C)` and the distance to it. Exact for balls
    /// and boxes; cyclic corrected projections for polytopes.
    pub fn project_to_closure(&self, xi: &Matrix) -> Result<(Matrix, f64)> {
        self.check_shape(xi)?;
        match self {
            ConstraintSet::Ball { radius, .. } => {
                let n = xi.norm();
                if n <= *radius {
                    Ok((*xi, 0.0))
                } else {
                    Ok((xi.scale(radius / n), n - radius))
                }
            }
            ConstraintSet::Box { half_widths } => {
                let mut p = *xi;
                for i in 0..half_widths.rows() {
                    for j in 0..half_widths.cols() {
                        let w = half_widths.get(i, j);
                        let v = xi.get(i, j).clamp(-w, w);
                        p.set(i, j, v);
                    }
                }
                Ok((p, (*xi - p).norm()))
            }
            ConstraintSet::Polytope { halfspaces, .. } => {
                if self.gauge_unchecked(xi) <= 1.0 {
                    return Ok((*xi, 0.0));
                }
                let mut x = *xi;
                let mut corrections: Vec<Matrix> =
                    halfspaces.iter().map(|_| Matrix::zeros(xi.rows(), xi.cols())).collect();
                for sweep in 0..PROJECTION_CAP {
                    let mut moved: f64 = 0.0;
                    for (hs, corr) in halfspaces.iter().zip(corrections.iter_mut()) {
                        let y = x + *corr;
                        let viol = hs.normal.dot(&y) - hs.offset;
                        let x_new = if viol > 0.0 {
                            let nn = hs.normal.dot(&hs.normal);
                            y - hs.normal.scale(viol / nn)
                        } else {
                            y
                        };
                        *corr = y - x_new;
                        moved = moved.max((x_new - x).norm());
                        x = x_new;
                    }
                    if moved <= PROJECTION_TOL {
                        return Ok((x, (*xi - x).norm()));
                    }
                    let _ = sweep;
                }
                Err(HomError::ProjectionDiverged {
                    iterations: PROJECTION_CAP,
                    residual: PROJECTION_TOL,
                })
            }
        }
    }

    /// Smallest `t* < 1` with every sample inside `t * int C` for `t > t*`,
    /// i.e. the maximal gauge over the sample list.
    pub fn minimal_scale_containing(&self, samples: &[Matrix]) -> Result<f64> {
        if samples.is_empty() {
            return Err(HomError::EmptySamples);
        }
        let mut t = 0.0f64;
        for xi in samples {
            let g = self.gauge(xi)?;
            if g >= 1.0 {
                return Err(HomError::NotCompactlyContained { gauge: g });
            }
            t = t.max(g);
        }
        Ok(t)
    }

    /// Checks on samples that the `rho * r / 2` outer neighborhood of
    /// `closure(C)` stays inside `(1 + r) int C`. Requires the closed
    /// Frobenius ball of radius `rho` to sit inside `int C`.
    pub fn neighborhood_inclusion_check(
        &self,
        rho: f64,
        r: f64,
        samples: &[Matrix],
    ) -> Result<bool> {
        if !(rho > 0.0) || !(r > 0.0) {
            return Err(HomError::InvalidParameter("rho and r must be positive"));
        }
        if rho >= self.inradius() {
            return Err(HomError::InvalidParameter(
                "rho ball is not contained in the interior of C",
            ));
        }
        if samples.is_empty() {
            return Err(HomError::EmptySamples);
        }
        for xi in samples {
            let d = self.dist_to_closure(xi)?;
            if d <= rho * r / 2.0 && self.gauge_unchecked(xi) >= 1.0 + r {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Radius of the largest Frobenius ball centered at 0 inside `C`; exact
    /// for the three supported shapes.
    pub fn inradius(&self) -> f64 {
        match self {
            ConstraintSet::Ball { radius, .. } => *radius,
            ConstraintSet::Box { half_widths } => {
                let mut r = f64::INFINITY;
                for i in 0..half_widths.rows() {
                    for j in 0..half_widths.cols() {
                        r = r.min(half_widths.get(i, j));
                    }
                }
                r
            }
            ConstraintSet::Polytope { halfspaces, .. } => {
                let mut r = f64::INFINITY;
                for hs in halfspaces {
                    r = r.min(hs.offset / hs.normal.norm());
                }
                r
            }
        }
    }

    /// Radius of the smallest centered Frobenius ball containing `closure(C)`.
    /// Exact for balls and boxes; for polytopes a sampled estimate over a
    /// deterministic direction set, inflated by a fixed margin.
    pub fn circumradius(&self) -> f64 {
        match self {
            ConstraintSet::Ball { radius, .. } => *radius,
            ConstraintSet::Box { half_widths } => half_widths.norm(),
            ConstraintSet::Polytope { .. } => {
                let mut r: f64 = 0.0;
                for u in self.direction_sample() {
                    let g = self.gauge_unchecked(&u);
                    if g > 0.0 {
                        r = r.max(1.0 / g);
                    }
                }
                1.5 * r
            }
        }
    }

    /// Upper bound for the diameter of `closure(C)`.
    pub fn diameter(&self) -> f64 {
        2.0 * self.circumradius()
    }

    /// Distance to `closure(C)` as a total function: on the (never observed
    /// in practice) event that the polytope iteration hits its cap, the last
    /// iterate's distance is returned instead of a diagnostic error.
    #[inline]
    pub(crate) fn dist_estimate_unchecked(&self, xi: &Matrix) -> f64 {
        match self.project_to_closure(xi) {
            Ok((_, dist)) => dist,
            Err(_) => self.gauge_unchecked(xi).max(1.0) - 1.0,
        }
    }

    /// A subgradient of the gauge at `xi` (any maximizing face; zero at the
    /// origin kink).
    pub fn gauge_subgradient_unchecked(&self, xi: &Matrix) -> Matrix {
        debug_assert_eq!(self.shape(), xi.shape());
        let (m, d) = self.shape();
        match self {
            ConstraintSet::Ball { radius, .. } => {
                let n = xi.norm();
                if n == 0.0 {
                    Matrix::zeros(m, d)
                } else {
                    xi.scale(1.0 / (radius * n))
                }
            }
            ConstraintSet::Box { half_widths } => {
                let mut best = (0usize, 0usize, 0.0f64);
                for i in 0..m {
                    for j in 0..d {
                        let v = math::abs(xi.get(i, j)) / half_widths.get(i, j);
                        if v > best.2 {
                            best = (i, j, v);
                        }
                    }
                }
                let mut g = Matrix::zeros(m, d);
                if best.2 > 0.0 {
                    let (i, j, _) = best;
                    let sgn = if xi.get(i, j) >= 0.0 { 1.0 } else { -1.0 };
                    g.set(i, j, sgn / half_widths.get(i, j));
                }
                g
            }
            ConstraintSet::Polytope { halfspaces, .. } => {
                let mut g = Matrix::zeros(m, d);
                let mut best = 0.0f64;
                for hs in halfspaces {
                    let v = hs.normal.dot(xi).max(0.0) / hs.offset;
                    if v > best {
                        best = v;
                        g = hs.normal.scale(1.0 / hs.offset);
                    }
                }
                g
            }
        }
    }

    /// Boundary point in the direction of `xi`: `xi / gauge(xi)`.
    pub fn to_boundary(&self, xi: &Matrix) -> Result<Matrix> {
        let g = self.gauge(xi)?;
        if g <= 0.0 {
            return Err(HomError::InvalidParameter(
                "cannot normalize the zero direction to the boundary",
            ));
        }
        Ok(xi.scale(1.0 / g))
    }

    /// Deterministic unit-norm direction sample: signed axes, sign patterns,
    /// half-space normals, and a seeded pseudo-random batch.
    fn direction_sample(&self) -> Vec<Matrix> {
        let (m, d) = self.shape();
        let dims = m * d;
        let mut dirs = Vec::new();
        for k in 0..dims {
            for sgn in [1.0, -1.0] {
                let mut u = Matrix::zeros(m, d);
                u.set(k / d, k % d, sgn);
                dirs.push(u);
            }
        }
        let corners = 1usize << dims;
        if corners <= 512 {
            let scale = 1.0 / math::sqrt(dims as f64);
            for mask in 0..corners {
                let mut u = Matrix::zeros(m, d);
                for k in 0..dims {
                    let sgn = if mask >> k & 1 == 1 { -1.0 } else { 1.0 };
                    u.set(k / d, k % d, sgn * scale);
                }
                dirs.push(u);
            }
        }
        if let ConstraintSet::Polytope { halfspaces, .. } = self {
            for hs in halfspaces {
                let n = hs.normal.norm();
                dirs.push(hs.normal.scale(1.0 / n));
                dirs.push(hs.normal.scale(-1.0 / n));
            }
        }
        let mut rng = Rng::seed_from(0x636f6e76);
        for _ in 0..1024 {
            let mut u = Matrix::zeros(m, d);
            for k in 0..dims {
                u.set(k / d, k % d, rng.symmetric());
            }
            let n = u.norm();
            if n > 1e-9 {
                dirs.push(u.scale(1.0 / n));
            }
        }
        dirs
    }
}
