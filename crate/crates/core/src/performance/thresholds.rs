//! Analytic false-alarm and detection probabilities for the GLR and AMF
//! detectors under Swerling I fluctuation, threshold inversion, and output
//! SDR of the clairvoyant filter.
//!
//! With `Q = K - n + 1` and the central Beta density `f_b(rho; Q+1, n-1)`:
//!
//! * GLR:  `P_FA = (1 + a)^-Q`, threshold `lambda_GLR = K a / (1 + a)`;
//! * AMF:  `P_FA = integral f_b(rho) / (1 + a rho)^Q drho`, threshold
//!   `lambda_AMF = K a` found by numerically inverting that integral;
//! * detection follows from the same loss-factor average with the output
//!   SDR `gamma` folded into the kernel.
//!
//! The AMF false-alarm integrand carries `rho` inside the power term; the
//! factored form would admit a closed inverse and contradict the need for
//! numerical iterations. Thresholds compare inclusively downstream.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::{CVector, HpdSolve};
use crate::performance::quadrature::integrate;

/// Absolute quadrature tolerance for false-alarm integrals (tail-sensitive).
const PFA_EPS_ABS: f64 = 1e-13;
/// Absolute quadrature tolerance for detection integrals.
const PD_EPS_ABS: f64 = 1e-12;
/// Relative tolerance applied alongside both, tightening tiny integrals.
const EPS_REL: f64 = 1e-12;

/// Central Beta density with integer parameters,
/// `f(x; a, b) = (a+b-1)! / ((a-1)!(b-1)!) x^(a-1) (1-x)^(b-1)`.
///
/// The normalization is an exact factorial-ratio product; when that
/// overflows, a log-gamma evaluation takes over.
pub fn beta_pdf(x: f64, a: u64, b: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidProbability(x));
    }
    if a < 1 || b < 1 {
        return Err(Error::InvalidOrder {
            n: a as usize,
            k: b as usize,
            n_min: 1,
        });
    }
    let norm = beta_norm(a, b);
    let xa = if a > 1 {
        if x == 0.0 {
            return Ok(0.0);
        }
        ((a - 1) as f64 * x.ln()).exp()
    } else {
        1.0
    };
    let xb = if b > 1 {
        if x == 1.0 {
            return Ok(0.0);
        }
        ((b - 1) as f64 * (-x).ln_1p()).exp()
    } else {
        1.0
    };
    Ok(norm * xa * xb)
}

/// `(a+b-1)! / ((a-1)!(b-1)!)` as an interleaved product, with a log-gamma
/// fallback for overflow safety.
fn beta_norm(a: u64, b: u64) -> f64 {
    let mut norm = a as f64;
    for i in 1..b {
        norm *= (a + i) as f64;
        norm /= i as f64;
    }
    if norm.is_finite() {
        norm
    } else {
        (ln_gamma((a + b) as f64) - ln_gamma(a as f64) - ln_gamma(b as f64)).exp()
    }
}

fn check_pfa(pfa: f64) -> Result<()> {
    if !(pfa > 0.0 && pfa < 1.0) {
        return Err(Error::InvalidProbability(pfa));
    }
    Ok(())
}

fn check_order(k: usize, n: usize) -> Result<u64> {
    if n < 2 || k <= n {
        return Err(Error::InvalidOrder { n, k, n_min: 2 });
    }
    Ok((k - n + 1) as u64)
}

/// GLR threshold factor `a = P_FA^(-1/Q) - 1`.
pub fn glr_alpha(pfa: f64, k: usize, n: usize) -> Result<f64> {
    check_pfa(pfa)?;
    let q = check_order(k, n)?;
    Ok(pfa.powf(-1.0 / q as f64) - 1.0)
}

/// GLR detection threshold `lambda_GLR = K xi` with `xi = a / (1 + a)`.
///
/// `P_FA = 1` maps to a zero (always-fire) threshold; smaller `P_FA` gives a
/// strictly larger threshold.
pub fn glr_threshold(pfa: f64, k: usize, n: usize) -> Result<f64> {
    let alpha = glr_alpha(pfa, k, n)?;
    Ok(k as f64 * alpha / (1.0 + alpha))
}

/// AMF false-alarm probability at threshold factor `a`:
/// `integral_0^1 f_b(rho; Q+1, n-1) (1 + a rho)^-Q drho`.
pub fn amf_pfa(alpha: f64, k: usize, n: usize) -> Result<f64> {
    if alpha < 0.0 {
        return Err(Error::InvalidProbability(alpha));
    }
    let q = check_order(k, n)?;
    let qf = q as f64;
    let r = integrate(
        |rho| {
            let beta = beta_pdf(rho, q + 1, (n - 1) as u64).unwrap_or(0.0);
            beta * (-qf * (alpha * rho).ln_1p()).exp()
        },
        0.0,
        1.0,
        PFA_EPS_ABS,
        EPS_REL,
    )?;
    Ok(r.value)
}

/// AMF threshold factor: inverts [`amf_pfa`] by bracketed root-finding
/// (Illinois regula falsi) to relative tolerance 1e-10 in `a`.
pub fn amf_alpha(pfa: f64, k: usize, n: usize) -> Result<f64> {
    check_pfa(pfa)?;
    // the GLR closed form bounds the AMF factor from below; expand upward
    let lo0 = glr_alpha(pfa, k, n)?;
    let mut lo = lo0;
    let mut hi = lo0 * 2.0;
    let mut f_lo = amf_pfa(lo, k, n)? - pfa;
    let mut f_hi = amf_pfa(hi, k, n)? - pfa;
    let mut guard = 0;
    while f_hi > 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = amf_pfa(hi, k, n)? - pfa;
        guard += 1;
        if guard > 60 {
            return Err(Error::BracketFailure { lo, hi, f_lo, f_hi });
        }
    }
    if f_lo < 0.0 {
        return Err(Error::BracketFailure { lo, hi, f_lo, f_hi });
    }
    // bisection on the monotone map: f_lo >= 0 >= f_hi throughout; the
    // guaranteed halving is immune to quadrature noise near the root
    for _ in 0..80 {
        if (hi - lo).abs() <= 1e-12 * hi.abs() {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if amf_pfa(mid, k, n)? - pfa > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// AMF detection threshold `lambda_AMF = K a`.
pub fn amf_threshold(pfa: f64, k: usize, n: usize) -> Result<f64> {
    Ok(k as f64 * amf_alpha(pfa, k, n)?)
}

/// Optimum (clairvoyant) detector: `P_D = P_FA^(1 / (1 + gamma))` for
/// Swerling I.
pub fn pd_optimum(pfa: f64, gamma: f64) -> Result<f64> {
    check_pfa(pfa)?;
    if gamma < 0.0 {
        return Err(Error::InvalidProbability(gamma));
    }
    Ok(pfa.powf(1.0 / (1.0 + gamma)))
}

/// Output SDR of the clairvoyant filter: `gamma_in * (t^H P0^{-1} t)` with
/// `P0` the normalized (unit-diagonal source) disturbance covariance. Works
/// for the order-N time-domain filter and any DDL extraction alike.
pub fn output_sdr(steering: &CVector, cov0: &HpdSolve, gamma_in: f64) -> Result<f64> {
    if steering.len() != cov0.order() {
        return Err(Error::DimensionMismatch {
            expected: cov0.order(),
            got: steering.len(),
        });
    }
    let q = cov0.quad_form_self(steering);
    if !(q > 0.0) {
        return Err(Error::ZeroSteering);
    }
    Ok(gamma_in * q)
}

/// Output SDR of a filter built for `assumed` steering against an `actual`
/// signal vector: `gamma_in |assumed^H P0^{-1} actual|^2 / (assumed^H P0^{-1}
/// assumed)`. Collapses to [`output_sdr`] when the two align.
pub fn output_sdr_mismatched(
    assumed: &CVector,
    actual: &CVector,
    cov0: &HpdSolve,
    gamma_in: f64,
) -> Result<f64> {
    let den = cov0.quad_form_self(assumed);
    if !(den > 0.0) {
        return Err(Error::ZeroSteering);
    }
    Ok(gamma_in * cov0.quad_form(assumed, actual).norm_sqr() / den)
}

/// GLR detection probability under Swerling I at output SDR `gamma`:
/// `integral ((1 + g rho) / (1 + a + g rho))^Q f_b(rho; Q+1, n-1) drho`
/// with `a` from the GLR closed form.
pub fn pd_glr(pfa: f64, gamma: f64, k: usize, n: usize) -> Result<f64> {
    let alpha = glr_alpha(pfa, k, n)?;
    let q = check_order(k, n)?;
    pd_kernel(gamma, alpha, q, n, false)
}

/// AMF detection probability under Swerling I at output SDR `gamma`:
/// `integral ((1 + g rho) / (1 + (a + g) rho))^Q f_b(rho; Q+1, n-1) drho`
/// with `a` from the numerical inversion of the AMF false-alarm integral.
pub fn pd_amf(pfa: f64, gamma: f64, k: usize, n: usize) -> Result<f64> {
    let alpha = amf_alpha(pfa, k, n)?;
    let q = check_order(k, n)?;
    pd_kernel(gamma, alpha, q, n, true)
}

/// AMF detection probability when the threshold factor is already known.
pub fn pd_amf_with_alpha(alpha: f64, gamma: f64, k: usize, n: usize) -> Result<f64> {
    let q = check_order(k, n)?;
    pd_kernel(gamma, alpha, q, n, true)
}

fn pd_kernel(gamma: f64, alpha: f64, q: u64, n: usize, amf_form: bool) -> Result<f64> {
    if gamma < 0.0 {
        return Err(Error::InvalidProbability(gamma));
    }
    let qf = q as f64;
    let r = integrate(
        |rho| {
            let beta = beta_pdf(rho, q + 1, (n - 1) as u64).unwrap_or(0.0);
            let num = (gamma * rho).ln_1p();
            let den = if amf_form {
                ((alpha + gamma) * rho).ln_1p()
            } else {
                (alpha + gamma * rho).ln_1p()
            };
            beta * (qf * (num - den)).exp()
        },
        0.0,
        1.0,
        PD_EPS_ABS,
        EPS_REL,
    )?;
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::HermitianMatrix;
    use crate::signal_model::steering_vector;
    use approx::assert_relative_eq;

    #[test]
    fn beta_pdf_uniform_case() {
        for &x in &[0.0, 0.3, 0.99, 1.0] {
            assert_relative_eq!(beta_pdf(x, 1, 1).unwrap(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn beta_pdf_integrates_to_one() {
        let r = integrate(|x| beta_pdf(x, 18, 3).unwrap(), 0.0, 1.0, 1e-13, 1e-13).unwrap();
        assert_relative_eq!(r.value, 1.0, epsilon = 1e-12);
        // and at a large first parameter exercising the concentration
        let r2 = integrate(|x| beta_pdf(x, 9998, 3).unwrap(), 0.0, 1.0, 0.0, 1e-12).unwrap();
        assert_relative_eq!(r2.value, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn beta_pdf_mode_location() {
        let (a, b) = (6u64, 4u64);
        let mode = (a as f64 - 1.0) / ((a + b) as f64 - 2.0);
        let at_mode = beta_pdf(mode, a, b).unwrap();
        for &dx in &[-0.05, 0.05] {
            assert!(beta_pdf(mode + dx, a, b).unwrap() < at_mode);
        }
    }

    #[test]
    fn beta_pdf_rejects_outside_unit_interval() {
        assert!(beta_pdf(-0.1, 2, 2).is_err());
        assert!(beta_pdf(1.1, 2, 2).is_err());
    }

    #[test]
    fn glr_threshold_closed_form() {
        // Q = 17, alpha = 1e9^(1/17) - 1
        let alpha = glr_alpha(1e-9, 20, 4).unwrap();
        assert_relative_eq!(alpha, 10f64.powf(9.0 / 17.0) - 1.0, max_relative = 1e-14);
        let lam = glr_threshold(1e-9, 20, 4).unwrap();
        assert_relative_eq!(lam, 20.0 * alpha / (1.0 + alpha), max_relative = 1e-14);
    }

    #[test]
    fn glr_threshold_monotone_and_limit() {
        let l1 = glr_threshold(1e-3, 20, 4).unwrap();
        let l2 = glr_threshold(1e-6, 20, 4).unwrap();
        assert!(l2 > l1);
        // P_FA -> 1 drives the threshold to zero
        let l3 = glr_threshold(1.0 - 1e-12, 20, 4).unwrap();
        assert!(l3 < 1e-9);
    }

    #[test]
    fn amf_pfa_at_zero_alpha_is_one() {
        assert_relative_eq!(amf_pfa(0.0, 20, 4).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn amf_pfa_strictly_decreasing() {
        let mut prev = 1.0;
        for i in 1..20 {
            let alpha = 0.3 * i as f64;
            let p = amf_pfa(alpha, 20, 4).unwrap();
            assert!(p < prev);
            prev = p;
        }
    }

    #[test]
    fn amf_threshold_round_trip() {
        for &pfa in &[1e-3, 1e-6, 1e-9, 1e-12, 1e-16] {
            let alpha = amf_alpha(pfa, 20, 4).unwrap();
            let back = amf_pfa(alpha, 20, 4).unwrap();
            assert_relative_eq!(back, pfa, max_relative = 1e-9);
        }
    }

    #[test]
    fn amf_threshold_exceeds_glr_threshold() {
        for &pfa in &[1e-3, 1e-6, 1e-9] {
            let amf = amf_threshold(pfa, 20, 4).unwrap();
            let glr = glr_threshold(pfa, 20, 4).unwrap();
            assert!(amf > glr);
        }
    }

    #[test]
    fn pd_optimum_limits() {
        assert_relative_eq!(pd_optimum(1e-4, 0.0).unwrap(), 1e-4, max_relative = 1e-12);
        assert!(pd_optimum(1e-9, 1e9).unwrap() > 0.999_99);
    }

    #[test]
    fn output_sdr_white_gain() {
        let s = steering_vector(0.2, 16).unwrap();
        let eye = HermitianMatrix::identity(16).hpd_solve().unwrap();
        assert_relative_eq!(output_sdr(&s, &eye, 0.5).unwrap(), 8.0, max_relative = 1e-12);
    }

    #[test]
    fn output_sdr_mismatched_collapses_when_aligned() {
        let s = steering_vector(0.1, 8).unwrap();
        let eye = HermitianMatrix::identity(8).hpd_solve().unwrap();
        let a = output_sdr(&s, &eye, 2.0).unwrap();
        let b = output_sdr_mismatched(&s, &s, &eye, 2.0).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn pd_glr_null_signal_recovers_pfa() {
        for &pfa in &[1e-3, 1e-6, 1e-9] {
            assert_relative_eq!(pd_glr(pfa, 0.0, 24, 4).unwrap(), pfa, max_relative = 1e-9);
        }
    }

    #[test]
    fn pd_amf_null_signal_recovers_pfa() {
        for &pfa in &[1e-3, 1e-6, 1e-9] {
            assert_relative_eq!(pd_amf(pfa, 0.0, 24, 4).unwrap(), pfa, max_relative = 1e-8);
        }
    }

    #[test]
    fn pd_results_within_bounds() {
        for &gamma in &[0.5, 5.0, 50.0, 500.0] {
            for (k, n) in [(20usize, 4usize), (24, 4), (40, 8)] {
                let pfa = 1e-6;
                let g = pd_glr(pfa, gamma, k, n).unwrap();
                let a = pd_amf(pfa, gamma, k, n).unwrap();
                assert!(g >= pfa && g <= 1.0);
                assert!(a >= pfa && a <= 1.0);
            }
        }
    }

    #[test]
    fn large_k_limit_approaches_optimum() {
        // both adaptive laws converge to the clairvoyant order-n value at
        // O(1/K); the gap must shrink accordingly and land below 1e-4 at
        // K = 1e4
        let (pfa, gamma, n) = (1e-9, 1000.0, 4);
        let opt = pd_optimum(pfa, gamma).unwrap();
        let mut prev_gap = f64::INFINITY;
        for k in [100usize, 1000, 10_000] {
            let gap_glr = (pd_glr(pfa, gamma, k, n).unwrap() - opt).abs();
            let gap_amf = (pd_amf(pfa, gamma, k, n).unwrap() - opt).abs();
            let gap = gap_glr.max(gap_amf);
            assert!(gap < 0.2 * prev_gap, "K={k}: gap {gap} prev {prev_gap}");
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-4, "gap at K=1e4: {prev_gap}");
    }
}
