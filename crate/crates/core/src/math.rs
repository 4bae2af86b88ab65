//! Float helpers routed through `libm` (the crate builds without `std`) and a
//! small deterministic RNG wrapper used by the multistart solvers.

use rand_core::{RngCore, SeedableRng};

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// `x^n` by repeated multiplication; exact branch-free schedule for the small
/// integer exponents used here.
#[inline]
pub fn powi(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    let mut base = x;
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        base *= base;
        k >>= 1;
    }
    acc
}

/// `1 - 2^{-n}`, the default truncation ladder.
#[inline]
pub fn one_minus_pow2_neg(n: u32) -> f64 {
    1.0 - powi(0.5, n)
}

/// Fractional part folded into `[0, 1)`.
#[inline]
pub fn fract_unit(x: f64) -> f64 {
    let f = x - floor(x);
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Deterministic stream of uniform f64 samples; seeded explicitly everywhere
/// so reruns are bit-identical.
pub struct Rng(rand_chacha::ChaCha8Rng);

impl Rng {
    pub fn seed_from(seed: u64) -> Self {
        Rng(rand_chacha::ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[-1, 1)`.
    #[inline]
    pub fn symmetric(&mut self) -> f64 {
        2.0 * self.unit() - 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powi_matches_libm_pow() {
        for n in 0..20u32 {
            let a = powi(1.5, n);
            let b = pow(1.5, n as f64);
            assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }

    #[test]
    fn fract_unit_is_periodic() {
        assert_eq!(fract_unit(2.25), 0.25);
        assert_eq!(fract_unit(-0.75), 0.25);
        assert_eq!(fract_unit(3.0), 0.0);
    }

    #[test]
    fn rng_reproducible() {
        let mut a = Rng::seed_from(7);
        let mut b = Rng::seed_from(7);
        for _ in 0..100 {
            assert_eq!(a.unit().to_bits(), b.unit().to_bits());
        }
    }
}
