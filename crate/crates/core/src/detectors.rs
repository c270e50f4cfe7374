//! Test statistics and decision rules: sample covariances, clairvoyant
//! (optimum) filters, AMF and GLR statistics in time and Doppler domains,
//! and the RODI-based DDL-GLR statistic bank.
//!
//! All adaptive statistics share the same numerics contract: the sample
//! covariance is factored once per test and reused through a solve operator;
//! no explicit inverse is formed. Threshold comparison is inclusive
//! (`statistic >= threshold` declares H1).

use crate::doppler::{ddl_extract_vector, BinSet, Dft};
use crate::error::{Error, Result};
use crate::linalg::{C64, CVector, HermitianMatrix, HpdSolve};
use crate::rptd::RptdSet;
use crate::signal_model::{steering_unchecked, steering_vector};

/// Identity of the rule that produced an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorId {
    /// Clairvoyant filter of order N in the time domain.
    OptimumN,
    /// Clairvoyant DDL filter of order n.
    OptimumDdl,
    TdAmf,
    TdGlr,
    DdlAmf,
    DdlGlr,
    RodiGlr,
    CaCfar,
}

impl DetectorId {
    pub fn as_str(&self) -> &'static str {
        match self {
            DetectorId::OptimumN => "optimum_n",
            DetectorId::OptimumDdl => "optimum_ddl",
            DetectorId::TdAmf => "td_amf",
            DetectorId::TdGlr => "td_glr",
            DetectorId::DdlAmf => "ddl_amf",
            DetectorId::DdlGlr => "ddl_glr",
            DetectorId::RodiGlr => "rodi_glr",
            DetectorId::CaCfar => "ca_cfar",
        }
    }
}

/// Statistic value, threshold, and the resulting binary decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorOutcome {
    pub detector: DetectorId,
    pub statistic: f64,
    pub threshold: f64,
    /// H1 iff `statistic >= threshold`.
    pub decision: bool,
    /// Order of the statistic (N for time-domain rules, n for DDL rules).
    pub order: usize,
}

impl DetectorOutcome {
    pub fn new(detector: DetectorId, statistic: f64, threshold: f64, order: usize) -> Self {
        Self {
            detector,
            statistic,
            threshold,
            decision: statistic >= threshold,
            order,
        }
    }
}

/// Sample covariance `(1/K) sum v v^H` of same-length vectors.
///
/// Requires strictly more vectors than the dimension so the estimate is
/// nonsingular with probability one.
pub fn sample_covariance(vectors: &[CVector]) -> Result<HermitianMatrix> {
    let count = vectors.len();
    let dim = vectors.first().map(|v| v.len()).unwrap_or(0);
    if count <= dim || dim == 0 {
        return Err(Error::SingularSampleCovariance { count, dim });
    }
    for v in vectors {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
    }
    let mut acc = nalgebra::DMatrix::<C64>::zeros(dim, dim);
    for v in vectors {
        // accumulate the lower triangle only; the constructor mirrors it
        for i in 0..dim {
            for j in 0..=i {
                acc[(i, j)] += v[i] * v[j].conj();
            }
        }
    }
    let k = C64::new(count as f64, 0.0);
    Ok(HermitianMatrix::from_lower_fn(dim, |i, j| acc[(i, j)] / k))
}

/// Clairvoyant matched-filter statistic `|s^H Sigma0^{-1} x|^2`.
pub fn optimum_statistic(x: &CVector, s: &CVector, sigma0: &HpdSolve) -> Result<f64> {
    check_dims(x, s, sigma0)?;
    Ok(sigma0.quad_form(s, x).norm_sqr())
}

/// AMF statistic `|t^H P^{-1} y|^2 / (t^H P^{-1} t)`.
///
/// Scale-invariant in `t` and in any overall scaling of the covariance.
pub fn amf_statistic(y: &CVector, t: &CVector, phi: &HpdSolve) -> Result<f64> {
    check_dims(y, t, phi)?;
    let den = phi.quad_form_self(t);
    if !(den > 0.0) {
        return Err(Error::ZeroSteering);
    }
    Ok(phi.quad_form(t, y).norm_sqr() / den)
}

/// GLR statistic: the AMF ratio divided by `1 + (y^H P^{-1} y) / K`.
/// Strictly below the AMF statistic for any nonzero `y`.
pub fn glr_statistic(y: &CVector, t: &CVector, phi: &HpdSolve, k: usize) -> Result<f64> {
    let amf = amf_statistic(y, t, phi)?;
    Ok(amf / (1.0 + phi.quad_form_self(y) / k as f64))
}

fn check_dims(a: &CVector, b: &CVector, phi: &HpdSolve) -> Result<()> {
    if a.len() != phi.order() {
        return Err(Error::DimensionMismatch {
            expected: phi.order(),
            got: a.len(),
        });
    }
    if b.len() != phi.order() {
        return Err(Error::DimensionMismatch {
            expected: phi.order(),
            got: b.len(),
        });
    }
    Ok(())
}

/// DDL steering vector: the RPTD extraction of the centered DFT image of the
/// time-domain steering vector for `freq`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringEstimate {
    pub freq: f64,
    pub ddl_vector: CVector,
}

impl SteeringEstimate {
    pub fn new(freq: f64, bins: &BinSet, dft: &Dft) -> Result<Self> {
        let s = steering_unchecked(freq, bins.domain());
        let image = dft.image(&s)?;
        Ok(Self {
            freq,
            ddl_vector: ddl_extract_vector(&image.values, bins)?,
        })
    }
}

/// Shared DDL preparation: transforms the CUT row and training rows onto the
/// RPTD bins and factors the sample DDL covariance.
struct DdlPrepared {
    y: CVector,
    steering: CVector,
    phi: HpdSolve,
    k: usize,
}

fn ddl_prepare(
    cut_row: &CVector,
    training_rows: &[CVector],
    rptd: &RptdSet,
    freq_est: f64,
) -> Result<DdlPrepared> {
    let bins = rptd.bins();
    let dft = Dft::new(bins.domain());
    let y = ddl_extract_vector(&dft.image(cut_row)?.values, bins)?;
    let mut training_ddl = Vec::with_capacity(training_rows.len());
    for row in training_rows {
        training_ddl.push(ddl_extract_vector(&dft.image(row)?.values, bins)?);
    }
    let phi_hat = sample_covariance(&training_ddl)?;
    let steering = SteeringEstimate::new(freq_est, bins, &dft)?;
    Ok(DdlPrepared {
        y,
        steering: steering.ddl_vector,
        phi: phi_hat.hpd_solve()?,
        k: training_rows.len(),
    })
}

/// RPTD-based DDL-AMF detection of one cell under test.
pub fn ddl_amf_detect(
    cut_row: &CVector,
    training_rows: &[CVector],
    rptd: &RptdSet,
    freq_est: f64,
    threshold: f64,
) -> Result<DetectorOutcome> {
    let p = ddl_prepare(cut_row, training_rows, rptd, freq_est)?;
    let stat = amf_statistic(&p.y, &p.steering, &p.phi)?;
    Ok(DetectorOutcome::new(
        DetectorId::DdlAmf,
        stat,
        threshold,
        rptd.order(),
    ))
}

/// RPTD-based DDL-GLR detection of one cell under test.
pub fn ddl_glr_detect(
    cut_row: &CVector,
    training_rows: &[CVector],
    rptd: &RptdSet,
    freq_est: f64,
    threshold: f64,
) -> Result<DetectorOutcome> {
    let p = ddl_prepare(cut_row, training_rows, rptd, freq_est)?;
    let stat = glr_statistic(&p.y, &p.steering, &p.phi, p.k)?;
    Ok(DetectorOutcome::new(
        DetectorId::DdlGlr,
        stat,
        threshold,
        rptd.order(),
    ))
}

/// Time-domain AMF over the full order N with a known-Doppler steering vector.
pub fn td_amf_detect(
    cut: &CVector,
    training: &[CVector],
    freq: f64,
    threshold: f64,
) -> Result<DetectorOutcome> {
    let s = steering_vector(freq, cut.len())?;
    let phi = sample_covariance(training)?.hpd_solve()?;
    let stat = amf_statistic(cut, &s, &phi)?;
    Ok(DetectorOutcome::new(
        DetectorId::TdAmf,
        stat,
        threshold,
        cut.len(),
    ))
}

/// Time-domain GLR over the full order N with a known-Doppler steering vector.
pub fn td_glr_detect(
    cut: &CVector,
    training: &[CVector],
    freq: f64,
    threshold: f64,
) -> Result<DetectorOutcome> {
    let s = steering_vector(freq, cut.len())?;
    let phi = sample_covariance(training)?.hpd_solve()?;
    let stat = glr_statistic(cut, &s, &phi, training.len())?;
    Ok(DetectorOutcome::new(
        DetectorId::TdGlr,
        stat,
        threshold,
        cut.len(),
    ))
}

/// RODI-based DDL-GLR statistic bank.
///
/// For each bin of a contiguous RODI the steering vector is one-hot at that
/// bin (the DFT image of an on-grid tone), so the bank computes `n_l` GLR
/// statistics from the same CUT vector and sample covariance, to be compared
/// against a common threshold.
pub fn rodi_glr_bank(
    cut_ddl: &CVector,
    training_ddl: &[CVector],
    rodi_bins: &BinSet,
) -> Result<Vec<f64>> {
    let n_l = rodi_bins.len();
    if cut_ddl.len() != n_l {
        return Err(Error::DimensionMismatch {
            expected: n_l,
            got: cut_ddl.len(),
        });
    }
    for (pos, w) in rodi_bins.indices().windows(2).enumerate() {
        if w[1] != w[0] + 1 {
            return Err(Error::BinsNotContiguous(pos + 1));
        }
    }
    let phi = sample_covariance(training_ddl)?.hpd_solve()?;
    let k = training_ddl.len();
    (0..n_l)
        .map(|m| {
            let mut t = CVector::zeros(n_l);
            t[m] = C64::new(1.0, 0.0);
            glr_statistic(cut_ddl, &t, &phi, k)
        })
        .collect()
}
