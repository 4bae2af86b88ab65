//! Independent oracles for the acceptance suite. Nothing here touches the
//! field solver or the conjugate-duality pipeline it validates.

/// Brute-force minimization over two-slope periodic correctors for the
/// half-half laminate `a(x) (xi + phi')^2`: one kink at `theta`, slope `s1`
/// before it and the zero-mean complement after it.
pub fn two_slope_laminate(a1: f64, a2: f64, xi: f64) -> f64 {
    let mut best = f64::INFINITY;
    let thetas = 1..400;
    for ti in thetas {
        let theta = ti as f64 / 400.0;
        for si in -2000..=2000 {
            let s1 = si as f64 / 1000.0;
            let s2 = -theta * s1 / (1.0 - theta);
            // Overlap of the slope pieces with the two coefficient cells.
            let energy = if theta <= 0.5 {
                theta * a1 * (xi + s1) * (xi + s1)
                    + (0.5 - theta) * a1 * (xi + s2) * (xi + s2)
                    + 0.5 * a2 * (xi + s2) * (xi + s2)
            } else {
                0.5 * a1 * (xi + s1) * (xi + s1)
                    + (theta - 0.5) * a2 * (xi + s1) * (xi + s1)
                    + (1.0 - theta) * a2 * (xi + s2) * (xi + s2)
            };
            if energy < best {
                best = energy;
            }
        }
    }
    best
}

/// Grid convex envelope by a lower-hull (monotone chain) pass over the graph
/// points, evaluated at `x` by linear interpolation between hull vertices.
pub struct GridConvexEnvelope {
    hull: Vec<(f64, f64)>,
}

impl GridConvexEnvelope {
    pub fn build(xs: &[f64], fs: &[f64]) -> Self {
        assert_eq!(xs.len(), fs.len());
        let mut hull: Vec<(f64, f64)> = Vec::new();
        for (&x, &f) in xs.iter().zip(fs) {
            if !f.is_finite() {
                continue;
            }
            while hull.len() >= 2 {
                let (x1, f1) = hull[hull.len() - 2];
                let (x2, f2) = hull[hull.len() - 1];
                // Drop the middle point when it sits above the chord.
                let cross = (x2 - x1) * (f - f1) - (f2 - f1) * (x - x1);
                if cross <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push((x, f));
        }
        GridConvexEnvelope { hull }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let h = &self.hull;
        if x <= h[0].0 {
            return h[0].1;
        }
        if x >= h[h.len() - 1].0 {
            return h[h.len() - 1].1;
        }
        let mut lo = 0;
        let mut hi = h.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if h[mid].0 <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (x1, f1) = h[lo];
        let (x2, f2) = h[hi];
        f1 + (f2 - f1) * (x - x1) / (x2 - x1)
    }
}

#[cfg(test)]
mod self_checks {
    use super::*;

    #[test]
    fn two_slope_matches_harmonic_mean() {
        // Closed form: harmonic mean of {1, 2} is 4/3.
        let v = two_slope_laminate(1.0, 2.0, 0.5);
        assert!((v - 1.0 / 3.0).abs() < 1e-4, "{v}");
    }

    #[test]
    fn hull_of_double_well_is_zero_between_wells() {
        let xs: Vec<f64> = (0..=400).map(|k| -2.0 + k as f64 / 100.0).collect();
        let fs: Vec<f64> = xs.iter().map(|x| (x * x - 1.0) * (x * x - 1.0)).collect();
        let env = GridConvexEnvelope::build(&xs, &fs);
        assert!(env.eval(0.0).abs() < 1e-12);
        assert!(env.eval(0.7).abs() < 1e-12);
        assert!((env.eval(1.5) - 1.5625).abs() < 1e-3);
    }
}
