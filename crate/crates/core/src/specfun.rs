//! Modified Bessel functions of order 0 and 1 on small arguments.
//!
//! The model only evaluates them at `√2·r` with `r ≤ 1/√π`, so plain power
//! series are accurate to machine precision over the supported range
//! `0 < x ≤ 2`. `K1` is derived from the Wronskian
//! `K0·I1 + K1·I0 = 1/x` instead of its own series.

use thiserror::Error;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577215664901533;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum BesselError {
    #[error("Bessel argument {0} outside the function's domain")]
    Domain(f64),
}

/// Exact series evaluation or the leading-order small-argument forms
/// `I0 ≈ 1 + x²/4`, `I1 ≈ x/2`, `K0 ≈ ln(2/x) − γ`, `K1 ≈ 1/x`.
///
/// The approximate forms are only meaningful for `x < 1`; that is not
/// enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BesselMode {
    #[default]
    Exact,
    PaperApprox,
}

const SERIES_TOL: f64 = 1e-16;
const SERIES_MAX_TERMS: usize = 200;

/// Σ (x/2)^{2k} / (k!)², together with Σ (x/2)^{2k} / (k!)² · H_k.
fn order_zero_sums(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut i0 = 1.0;
    let mut harmonic = 0.0;
    let mut k0_tail = 0.0;
    for k in 1..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        k0_tail += term * harmonic;
        if term < SERIES_TOL * i0 {
            break;
        }
    }
    (i0, k0_tail)
}

fn i1_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 0.5 * x;
    let mut sum = term;
    for k in 1..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= q / (kf * (kf + 1.0));
        sum += term;
        if term <= SERIES_TOL * sum {
            break;
        }
    }
    sum
}

pub fn bessel_i0(x: f64, mode: BesselMode) -> Result<f64, BesselError> {
    match mode {
        BesselMode::Exact if x >= 0.0 => Ok(order_zero_sums(x).0),
        BesselMode::PaperApprox if x > 0.0 => Ok(1.0 + 0.25 * x * x),
        _ => Err(BesselError::Domain(x)),
    }
}

pub fn bessel_i1(x: f64, mode: BesselMode) -> Result<f64, BesselError> {
    match mode {
        BesselMode::Exact if x >= 0.0 => Ok(i1_series(x)),
        BesselMode::PaperApprox if x > 0.0 => Ok(0.5 * x),
        _ => Err(BesselError::Domain(x)),
    }
}

pub fn bessel_k0(x: f64, mode: BesselMode) -> Result<f64, BesselError> {
    if !(x > 0.0) {
        return Err(BesselError::Domain(x));
    }
    Ok(match mode {
        BesselMode::Exact => {
            let (i0, tail) = order_zero_sums(x);
            -((0.5 * x).ln() + EULER_GAMMA) * i0 + tail
        }
        BesselMode::PaperApprox => (2.0 / x).ln() - EULER_GAMMA,
    })
}

pub fn bessel_k1(x: f64, mode: BesselMode) -> Result<f64, BesselError> {
    if !(x > 0.0) {
        return Err(BesselError::Domain(x));
    }
    Ok(match mode {
        BesselMode::Exact => {
            let (i0, tail) = order_zero_sums(x);
            let k0 = -((0.5 * x).ln() + EULER_GAMMA) * i0 + tail;
            (1.0 / x - k0 * i1_series(x)) / i0
        }
        BesselMode::PaperApprox => 1.0 / x,
    })
}

/// `(I0'(x), K0'(x)) = (I1(x), −K1(x))`.
pub fn bessel_derivatives(x: f64, mode: BesselMode) -> Result<(f64, f64), BesselError> {
    if !(x > 0.0) {
        return Err(BesselError::Domain(x));
    }
    Ok((bessel_i1(x, mode)?, -bessel_k1(x, mode)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use BesselMode::{Exact, PaperApprox};

    /// Thirty-term partial sums built from explicit powers and factorials,
    /// with `K1` from its own series rather than the Wronskian.
    mod oracle {
        use super::EULER_GAMMA;

        fn factorial(k: usize) -> f64 {
            (1..=k).map(|j| j as f64).product()
        }

        fn harmonic(k: usize) -> f64 {
            (1..=k).map(|j| 1.0 / j as f64).sum()
        }

        pub fn i0(x: f64) -> f64 {
            (0..30)
                .map(|k| (x / 2.0).powi(2 * k as i32) / factorial(k).powi(2))
                .sum()
        }

        pub fn i1(x: f64) -> f64 {
            (0..30)
                .map(|k| (x / 2.0).powi(2 * k as i32 + 1) / (factorial(k) * factorial(k + 1)))
                .sum()
        }

        pub fn k0(x: f64) -> f64 {
            let tail: f64 = (1..30)
                .map(|k| (x / 2.0).powi(2 * k as i32) / factorial(k).powi(2) * harmonic(k))
                .sum();
            -((x / 2.0).ln() + EULER_GAMMA) * i0(x) + tail
        }

        /// K1(x) = 1/x + ln(x/2)·I1(x) − (x/4) Σ [ψ(k+1) + ψ(k+2)] (x²/4)^k / (k!(k+1)!)
        pub fn k1(x: f64) -> f64 {
            let psi = |m: usize| -EULER_GAMMA + harmonic(m - 1);
            let sum: f64 = (0..30)
                .map(|k| {
                    (psi(k + 1) + psi(k + 2)) * (x * x / 4.0).powi(k as i32)
                        / (factorial(k) * factorial(k + 1))
                })
                .sum();
            1.0 / x + (x / 2.0).ln() * i1(x) - x / 4.0 * sum
        }
    }

    fn log_grid(count: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..count)
            .map(|k| lo * (hi / lo).powf(k as f64 / (count - 1) as f64))
            .collect()
    }

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel_i0(0.0, Exact).unwrap(), 1.0);
        assert_eq!(bessel_i1(0.0, Exact).unwrap(), 0.0);
    }

    #[test]
    fn oracle_matches_reference_values() {
        // Frozen from the oracle; they agree with tabulated values
        // I0(1) = 1.2660658777520082, K0(1) = 0.42102443824070834.
        assert!((oracle::i0(1.0) - 1.266_065_877_752_008_2).abs() < 1e-15);
        assert!((oracle::k0(1.0) - 0.421_024_438_240_708_3).abs() < 1e-15);
        assert!((oracle::k1(1.0) - 0.601_907_230_197_234_6).abs() < 1e-14);
    }

    #[test]
    fn reference_points() {
        assert!((bessel_i0(1.0, Exact).unwrap() - 1.266066).abs() < 1e-6);
        assert!((bessel_k0(1.0, Exact).unwrap() - 0.421024).abs() < 1e-6);
        let k1 = bessel_k1(1e-3, Exact).unwrap();
        assert!((k1 - 1000.0).abs() < 1.0);
        assert_eq!(bessel_i1(0.06, PaperApprox).unwrap(), 0.03);
    }

    #[test]
    fn exact_series_match_oracle() {
        for x in log_grid(100, 1e-3, 2.0) {
            let pairs = [
                (bessel_i0(x, Exact).unwrap(), oracle::i0(x)),
                (bessel_i1(x, Exact).unwrap(), oracle::i1(x)),
                (bessel_k0(x, Exact).unwrap(), oracle::k0(x)),
                (bessel_k1(x, Exact).unwrap(), oracle::k1(x)),
            ];
            for (got, want) in pairs {
                assert!(
                    (got - want).abs() <= 1e-10 * want.abs().max(1.0),
                    "x = {x}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn wronskian_residual() {
        let x = 0.5;
        let r = bessel_k0(x, Exact).unwrap() * bessel_i1(x, Exact).unwrap()
            + bessel_k1(x, Exact).unwrap() * bessel_i0(x, Exact).unwrap()
            - 1.0 / x;
        assert!(r.abs() < 1e-14);
        for x in log_grid(100, 1e-3, 2.0) {
            let r = bessel_k0(x, Exact).unwrap() * bessel_i1(x, Exact).unwrap()
                + bessel_k1(x, Exact).unwrap() * bessel_i0(x, Exact).unwrap()
                - 1.0 / x;
            assert!(r.abs() < 1e-10, "x = {x}: residual {r}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_i0(-0.1, Exact).is_err());
        assert!(bessel_i1(-0.1, Exact).is_err());
        assert!(bessel_k0(0.0, Exact).is_err());
        assert!(bessel_k1(-1.0, PaperApprox).is_err());
        assert!(bessel_derivatives(0.0, Exact).is_err());
        assert!(bessel_k0(f64::NAN, Exact).is_err());
    }

    #[test]
    fn approximation_gap_small_arguments() {
        // The regular functions stay within 2% over all of (0, 0.3].
        for x in log_grid(50, 1e-3, 0.3) {
            for f in [bessel_i0, bessel_i1] {
                let e = f(x, Exact).unwrap();
                let a = f(x, PaperApprox).unwrap();
                assert!(((a - e) / e).abs() < 0.02, "x = {x}");
            }
        }
        // The singular functions carry an x²·ln x correction that the
        // leading forms drop; they meet 2% only up to x = 0.1.
        for x in log_grid(50, 1e-3, 0.1) {
            for f in [bessel_k0, bessel_k1] {
                let e = f(x, Exact).unwrap();
                let a = f(x, PaperApprox).unwrap();
                assert!(((a - e) / e).abs() < 0.02, "x = {x}");
            }
        }
        let k1_gap = (bessel_k1(0.3, PaperApprox).unwrap() / bessel_k1(0.3, Exact).unwrap()) - 1.0;
        assert!(k1_gap > 0.05, "K1 leading form is ~9% high at x = 0.3");
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        let x = 0.7;
        let (di0, _) = bessel_derivatives(x, Exact).unwrap();
        let fd = (bessel_i0(x + h, Exact).unwrap() - bessel_i0(x - h, Exact).unwrap()) / (2.0 * h);
        assert!((di0 - fd).abs() < 1e-6);

        for k in 0..=100 {
            let x = 0.1 + 1.9 * k as f64 / 100.0;
            let (di0, dk0) = bessel_derivatives(x, Exact).unwrap();
            let fd_i0 =
                (bessel_i0(x + h, Exact).unwrap() - bessel_i0(x - h, Exact).unwrap()) / (2.0 * h);
            let fd_k0 =
                (bessel_k0(x + h, Exact).unwrap() - bessel_k0(x - h, Exact).unwrap()) / (2.0 * h);
            assert!((di0 - fd_i0).abs() < 1e-6, "x = {x}");
            assert!((dk0 - fd_k0).abs() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn derivative_signs() {
        let (di0, _) = bessel_derivatives(1e-300, Exact).unwrap();
        assert!(di0.abs() < 1e-299);
        for k in 1..=200 {
            let x = 2.0 * k as f64 / 200.0;
            assert!(bessel_derivatives(x, Exact).unwrap().1 < 0.0);
        }
    }

    #[test]
    fn monotonicity() {
        let xs: Vec<f64> = (1..=1000).map(|k| 2.0 * k as f64 / 1000.0).collect();
        let eval = |f: fn(f64, BesselMode) -> Result<f64, BesselError>| -> Vec<f64> {
            xs.iter().map(|&x| f(x, Exact).unwrap()).collect()
        };
        for w in eval(bessel_i0).windows(2) {
            assert!(w[1] > w[0]);
        }
        for w in eval(bessel_i1).windows(2) {
            assert!(w[1] > w[0]);
        }
        for w in eval(bessel_k0).windows(2) {
            assert!(w[1] < w[0]);
        }
        for w in eval(bessel_k1).windows(2) {
            assert!(w[1] < w[0]);
        }
    }
}
