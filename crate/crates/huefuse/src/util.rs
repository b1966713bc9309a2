//! Small numeric helpers shared across modules.

/// Floor used wherever a luminance value divides or enters a logarithm.
pub const LUMA_FLOOR: f64 = 1e-6;

/// Sum that does not depend on the order of its inputs.
///
/// Sorts the scratch slice into a canonical order before accumulating, so
/// callers that gather per-image contributions get bit-identical results
/// under any permutation of the image stack.
pub fn order_invariant_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum()
}

/// Log-average ("geometric mean") of `values`, ignoring entries `<= floor`.
/// Returns `None` when nothing survives the floor.
pub fn geometric_mean(values: impl Iterator<Item = f64>, floor: f64) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        if v > floor {
            sum += v.ln();
            n += 1;
        }
    }
    if n == 0 {
        None
    } else {
        Some((sum / n as f64).exp())
    }
}

/// Reinhard-style log-average with an additive floor inside the logarithm:
/// exp(mean(ln(floor + v))). Defined for any non-negative input.
pub fn log_average(values: impl Iterator<Item = f64>, floor: f64) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += (floor + v).ln();
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).exp()
    }
}

/// Minimal PCG32 generator; deterministic across platforms and versions,
/// which the seeded sampling paths rely on.
#[derive(Debug, Clone)]
pub struct Pcg32 {
    state: u64,
    inc: u64,
}

impl Pcg32 {
    pub fn new(seed: u64) -> Self {
        let mut rng = Self {
            state: 0,
            inc: (seed << 1) | 1,
        };
        rng.next_u32();
        rng.state = rng.state.wrapping_add(seed);
        rng.next_u32();
        rng
    }

    pub fn next_u32(&mut self) -> u32 {
        let old = self.state;
        self.state = old
            .wrapping_mul(6364136223846793005)
            .wrapping_add(self.inc);
        let xorshifted = (((old >> 18) ^ old) >> 27) as u32;
        let rot = (old >> 59) as u32;
        xorshifted.rotate_right(rot)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u32() as f64) / (u32::MAX as f64 + 1.0)
    }

    /// Uniform in [0, n).
    pub fn next_below(&mut self, n: usize) -> usize {
        (self.next_f64() * n as f64) as usize
    }
}

/// Error function, Abramowitz & Stegun 7.1.26 (|error| < 1.5e-7).
pub fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let y = 1.0
        - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t
            + 0.254829592)
            * t
            * (-x * x).exp();
    sign * y
}

/// Gaussian CDF with mean `mu` and standard deviation `sigma`.
pub fn normal_cdf(x: f64, mu: f64, sigma: f64) -> f64 {
    0.5 * (1.0 + erf((x - mu) / (sigma * std::f64::consts::SQRT_2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_invariance() {
        let mut a = [0.1, 1e-12, 7.3, 0.30000000000000004, 2.5e-7];
        let mut b = [7.3, 0.30000000000000004, 0.1, 2.5e-7, 1e-12];
        assert_eq!(
            order_invariant_sum(&mut a).to_bits(),
            order_invariant_sum(&mut b).to_bits()
        );
    }

    #[test]
    fn geometric_mean_basics() {
        let g = geometric_mean([2.0, 8.0].into_iter(), 0.0).unwrap();
        assert!((g - 4.0).abs() < 1e-12);
        assert!(geometric_mean([0.0, 0.0].into_iter(), 1e-6).is_none());
    }

    #[test]
    fn pcg_deterministic() {
        let mut a = Pcg32::new(0);
        let mut b = Pcg32::new(0);
        for _ in 0..100 {
            assert_eq!(a.next_u32(), b.next_u32());
        }
        let mut c = Pcg32::new(1);
        assert_ne!(a.next_u32(), c.next_u32());
    }

    #[test]
    fn erf_reference_points() {
        // The rational approximation has absolute error below 1.5e-7.
        assert!(erf(0.0).abs() < 1.5e-7);
        assert!((erf(1.0) - 0.8427007929).abs() < 1e-6);
        assert!((erf(-1.0) + 0.8427007929).abs() < 1e-6);
        assert!((erf(3.0) - 0.9999779095).abs() < 1e-6);
    }
}
