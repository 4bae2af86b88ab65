//! Uniform meshes on intervals and squares with piecewise-affine fields.
//!
//! `d = 1`: subdivided intervals. `d = 2`: squares cut into two triangles
//! (diagonal from the lower-left to the upper-right corner), so every element
//! carries a constant gradient and one barycenter quadrature point integrates
//! piecewise-constant-coefficient energies exactly.

use crate::error::{HomError, Result};
use crate::matrix::Matrix;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mesh {
    d: usize,
    divisions: usize,
    side: f64,
}

/// Geometry of one element: node ids, shape-function gradients, barycenter.
#[derive(Clone, Copy, Debug)]
pub struct ElementGeom {
    pub nodes: [usize; 3],
    pub nnodes: usize,
    pub grads: [[f64; 2]; 3],
    pub barycenter: [f64; 2],
    pub volume: f64,
}

impl Mesh {
    pub fn new(d: usize, divisions: usize, side: f64) -> Result<Self> {
        if !(1..=2).contains(&d) {
            return Err(HomError::InvalidParameter("mesh dimension must be 1 or 2"));
        }
        if divisions == 0 || !(side > 0.0) {
            return Err(HomError::InvalidParameter(
                "mesh needs positive divisions and side length",
            ));
        }
        Ok(Mesh { d, divisions, side })
    }

    /// Mesh over the `n`-fold cell `(0, n)^d` with `resolution` subdivisions
    /// per unit cell.
    pub fn cell(d: usize, n: usize, resolution: usize) -> Result<Self> {
        Mesh::new(d, n * resolution, n as f64)
    }

    /// Mesh over the unit domain `(0, 1)^d`.
    pub fn unit(d: usize, divisions: usize) -> Result<Self> {
        Mesh::new(d, divisions, 1.0)
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn divisions(&self) -> usize {
        self.divisions
    }

    #[inline]
    pub fn side(&self) -> f64 {
        self.side
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.side / self.divisions as f64
    }

    pub fn node_count(&self) -> usize {
        match self.d {
            1 => self.divisions + 1,
            _ => (self.divisions + 1) * (self.divisions + 1),
        }
    }

    pub fn element_count(&self) -> usize {
        match self.d {
            1 => self.divisions,
            _ => 2 * self.divisions * self.divisions,
        }
    }

    pub fn node_coord(&self, a: usize) -> [f64; 2] {
        let h = self.spacing();
        match self.d {
            1 => [a as f64 * h, 0.0],
            _ => {
                let w = self.divisions + 1;
                [(a % w) as f64 * h, (a / w) as f64 * h]
            }
        }
    }

    pub fn is_boundary(&self, a: usize) -> bool {
        match self.d {
            1 => a == 0 || a == self.divisions,
            _ => {
                let w = self.divisions + 1;
                let (i, j) = (a % w, a / w);
                i == 0 || j == 0 || i == self.divisions || j == self.divisions
            }
        }
    }

    pub fn element(&self, e: usize) -> ElementGeom {
        let h = self.spacing();
        match self.d {
            1 => ElementGeom {
                nodes: [e, e + 1, 0],
                nnodes: 2,
                grads: [[-1.0 / h, 0.0], [1.0 / h, 0.0], [0.0, 0.0]],
                barycenter: [(e as f64 + 0.5) * h, 0.0],
                volume: h,
            },
            _ => {
                let s = e / 2;
                let lower = e % 2 == 0;
                let (i, j) = (s % self.divisions, s / self.divisions);
                let w = self.divisions + 1;
                let a = j * w + i;
                let (x0, y0) = (i as f64 * h, j as f64 * h);
                if lower {
                    ElementGeom {
                        nodes: [a, a + 1, a + 1 + w],
                        nnodes: 3,
                        grads: [[-1.0 / h, 0.0], [1.0 / h, -1.0 / h], [0.0, 1.0 / h]],
                        barycenter: [x0 + 2.0 * h / 3.0, y0 + h / 3.0],
                        volume: h * h / 2.0,
                    }
                } else {
                    ElementGeom {
                        nodes: [a, a + 1 + w, a + w],
                        nnodes: 3,
                        grads: [[0.0, -1.0 / h], [1.0 / h, 0.0], [-1.0 / h, 1.0 / h]],
                        barycenter: [x0 + h / 3.0, y0 + 2.0 * h / 3.0],
                        volume: h * h / 2.0,
                    }
                }
            }
        }
    }

    /// All element geometries, precomputed once per solve.
    pub fn elements(&self) -> Vec<ElementGeom> {
        (0..self.element_count()).map(|e| self.element(e)).collect()
    }
}

/// Nodal values of an `R^m`-valued piecewise-affine field.
#[derive(Clone, Debug, PartialEq)]
pub struct TestField {
    m: usize,
    values: Vec<f64>,
}

impl TestField {
    pub fn zeros(mesh: &Mesh, m: usize) -> Self {
        TestField {
            m,
            values: vec![0.0; m * mesh.node_count()],
        }
    }

    #[inline]
    pub fn components(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, node: usize, comp: usize) -> f64 {
        self.values[node * self.m + comp]
    }

    #[inline]
    pub fn set(&mut self, node: usize, comp: usize, v: f64) {
        self.values[node * self.m + comp] = v;
    }

    /// Constant per-element gradient `sum_a u_a (x) grad(lambda_a)`.
    pub fn gradient(&self, d: usize, elem: &ElementGeom) -> Matrix {
        let mut g = Matrix::zeros(self.m, d);
        for (slot, &node) in elem.nodes[..elem.nnodes].iter().enumerate() {
            for comp in 0..self.m {
                let u = self.values[node * self.m + comp];
                for k in 0..d {
                    g.set(comp, k, g.get(comp, k) + u * elem.grads[slot][k]);
                }
            }
        }
        g
    }

    /// Piecewise-affine evaluation at an arbitrary point of the mesh domain
    /// (clamped to it).
    pub fn eval_at(&self, mesh: &Mesh, y: &[f64], out: &mut [f64]) {
        let h = mesh.spacing();
        let div = mesh.divisions();
        match mesh.dimension() {
            1 => {
                let t = (y[0] / h).clamp(0.0, div as f64);
                let i = (t as usize).min(div - 1);
                let loc = t - i as f64;
                for c in 0..self.m {
                    out[c] = (1.0 - loc) * self.get(i, c) + loc * self.get(i + 1, c);
                }
            }
            _ => {
                let tx = (y[0] / h).clamp(0.0, div as f64);
                let ty = (y[1] / h).clamp(0.0, div as f64);
                let i = (tx as usize).min(div - 1);
                let j = (ty as usize).min(div - 1);
                let (lx, ly) = (tx - i as f64, ty - j as f64);
                let w = div + 1;
                let a = j * w + i;
                if ly <= lx {
                    // Lower triangle: vertices a, a+1, a+1+w.
                    let l = [1.0 - lx, lx - ly, ly];
                    for c in 0..self.m {
                        out[c] = l[0] * self.get(a, c)
                            + l[1] * self.get(a + 1, c)
                            + l[2] * self.get(a + 1 + w, c);
                    }
                } else {
                    // Upper triangle: vertices a, a+1+w, a+w.
                    let l = [1.0 - ly, lx, ly - lx];
                    for c in 0..self.m {
                        out[c] = l[0] * self.get(a, c)
                            + l[1] * self.get(a + 1 + w, c)
                            + l[2] * self.get(a + w, c);
                    }
                }
            }
        }
    }
}

/// Periodically tiles a zero-boundary field from its mesh onto a larger mesh
/// whose side is an integer multiple; nodes of the target that fall on source
/// nodes copy exactly, and the extension keeps a zero trace on the target
/// boundary because the source vanishes on cell faces.
pub fn tile_field(src_mesh: &Mesh, src: &TestField, dst_mesh: &Mesh) -> Result<TestField> {
    if src_mesh.dimension() != dst_mesh.dimension() {
        return Err(HomError::IncompatibleMesh("dimension mismatch in tiling"));
    }
    let period = src_mesh.side();
    let ratio = dst_mesh.side() / period;
    if crate::math::abs(ratio - libm::round(ratio)) > 1e-9 || ratio < 1.0 {
        return Err(HomError::IncompatibleMesh(
            "target side must be an integer multiple of the source side",
        ));
    }
    let m = src.components();
    let mut out = TestField::zeros(dst_mesh, m);
    let mut buf = [0.0; crate::matrix::MAX_DIM];
    for a in 0..dst_mesh.node_count() {
        let xy = dst_mesh.node_coord(a);
        let mut y = [0.0; 2];
        for k in 0..dst_mesh.dimension() {
            let mut v = xy[k] % period;
            if v < 0.0 {
                v += period;
            }
            y[k] = v;
        }
        src.eval_at(src_mesh, &y[..dst_mesh.dimension()], &mut buf);
        for c in 0..m {
            out.set(a, c, buf[c]);
        }
    }
    Ok(out)
}
