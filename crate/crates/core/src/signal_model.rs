//! Scenario definitions and time-domain CPI synthesis.
//!
//! Builds steering vectors, Gaussian-shaped clutter-plus-noise covariances
//! (single component or mixture), colored disturbance draws, Swerling I
//! target injection, and target-free training sets. Thermal noise power is
//! the unit of every power quantity, so `P_n = 1`, `P_c = 10^(CNR/10)` and
//! `P_s = 10^(SNR/10)`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, CMatrix, CVector, HermitianMatrix, PSD_EPS, SQRT_FACTOR_FLOOR};

/// One Gaussian-shaped component of the clutter power spectral density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClutterComponent {
    /// Spectrum peak location, normalized Doppler in cycles/pulse, |F_cp| < 0.5.
    pub center_freq: f64,
    /// Spectral-width parameter sigma_c (dimensionless), > 0.
    pub spread: f64,
    /// Fraction of the total clutter power carried by this component, in (0, 1].
    pub power_fraction: f64,
}

impl ClutterComponent {
    pub fn validate(&self) -> Result<()> {
        if !(self.center_freq.abs() < 0.5) {
            return Err(Error::InvalidClutterComponent(format!(
                "center_freq {} must satisfy |F_cp| < 0.5",
                self.center_freq
            )));
        }
        if !(self.spread > 0.0) {
            return Err(Error::InvalidClutterComponent(format!(
                "spread {} must be > 0",
                self.spread
            )));
        }
        if !(self.power_fraction > 0.0 && self.power_fraction <= 1.0) {
            return Err(Error::InvalidClutterComponent(format!(
                "power_fraction {} must be in (0, 1]",
                self.power_fraction
            )));
        }
        Ok(())
    }
}

/// Target Doppler as seen by the detector. The true frequency is always
/// carried (synthesis needs it); the variant records whether the detector
/// may use it or must estimate it from the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "knowledge", content = "freq", rename_all = "snake_case")]
pub enum TargetDoppler {
    /// Detector knows the true Doppler.
    Known(f64),
    /// Detector must estimate the Doppler; the value is the synthesis truth.
    Unknown(f64),
}

impl TargetDoppler {
    pub fn true_freq(&self) -> f64 {
        match *self {
            TargetDoppler::Known(f) | TargetDoppler::Unknown(f) => f,
        }
    }

    pub fn is_known(&self) -> bool {
        matches!(self, TargetDoppler::Known(_))
    }

    pub fn with_freq(&self, f: f64) -> Self {
        match self {
            TargetDoppler::Known(_) => TargetDoppler::Known(f),
            TargetDoppler::Unknown(_) => TargetDoppler::Unknown(f),
        }
    }
}

/// Full experiment description for one detection setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Pulses per CPI (N).
    #[serde(rename = "N")]
    pub pulses: usize,
    /// Range cells in the CPI data matrix (M).
    #[serde(rename = "M")]
    pub range_cells: usize,
    /// DDL detector order (n), 2 <= n <= N.
    #[serde(rename = "n")]
    pub ddl_order: usize,
    /// Time-domain training count (K_T), > N.
    #[serde(rename = "K_T")]
    pub training_time: usize,
    /// DDL training count (K), > n.
    #[serde(rename = "K")]
    pub training_ddl: usize,
    /// Clutter-to-noise ratio in dB; `-inf` means noise-only.
    pub cnr_db: f64,
    /// Signal-to-noise ratio in dB.
    pub snr_db: f64,
    /// Required false-alarm probability, in (0, 1).
    pub pfa: f64,
    /// Clutter PSD mixture; fractions must sum to 1.
    pub clutter: Vec<ClutterComponent>,
    /// Target Doppler and whether the detector knows it.
    pub target: TargetDoppler,
    /// Oversampling factor q with N_fft = q * N, q >= 1.
    pub fft_factor: usize,
    /// Range cell carrying the target under H1 (1-based, in 1..=M).
    pub target_range_cell: usize,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let err = |field: &'static str, message: String| Err(Error::InvalidScenario { field, message });
        if self.pulses < 2 || !self.pulses.is_multiple_of(2) {
            return err("N", format!("pulse count {} must be even and >= 2", self.pulses));
        }
        if self.range_cells == 0 {
            return err("M", "range cell count must be positive".into());
        }
        if self.ddl_order < 2 || self.ddl_order > self.pulses {
            return err("n", format!("DDL order {} must satisfy 2 <= n <= N", self.ddl_order));
        }
        if self.training_time <= self.pulses {
            return err("K_T", format!("K_T = {} must exceed N = {}", self.training_time, self.pulses));
        }
        if self.training_ddl <= self.ddl_order {
            return err("K", format!("K = {} must exceed n = {}", self.training_ddl, self.ddl_order));
        }
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return err("pfa", format!("{} outside (0, 1)", self.pfa));
        }
        if self.clutter.is_empty() {
            return err("clutter", "mixture must have at least one component".into());
        }
        for c in &self.clutter {
            c.validate()?;
        }
        let total: f64 = self.clutter.iter().map(|c| c.power_fraction).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::PowerFractionsNotNormalized(total));
        }
        let f = self.target.true_freq();
        if !(f.abs() < 0.5) {
            return err("target_freq", format!("{} must satisfy |F| < 0.5", f));
        }
        if self.fft_factor < 1 {
            return err("fft_factor", "q must be >= 1".into());
        }
        if self.target_range_cell < 1 || self.target_range_cell > self.range_cells {
            return err(
                "target_range_cell",
                format!("{} outside 1..={}", self.target_range_cell, self.range_cells),
            );
        }
        Ok(())
    }

    /// Thermal noise power (the power unit).
    pub fn noise_power(&self) -> f64 {
        1.0
    }

    /// Clutter power `P_c = 10^(CNR/10)`; zero for `cnr_db = -inf`.
    pub fn clutter_power(&self) -> f64 {
        if self.cnr_db == f64::NEG_INFINITY {
            0.0
        } else {
            10f64.powf(self.cnr_db / 10.0)
        }
    }

    /// Average signal power `P_s = 10^(SNR/10)`.
    pub fn signal_power(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    /// Input signal-to-disturbance ratio `gamma_in = P_s / (P_c + P_n)`.
    pub fn input_sdr(&self) -> f64 {
        self.signal_power() / (self.clutter_power() + self.noise_power())
    }

    pub fn input_sdr_db(&self) -> f64 {
        10.0 * self.input_sdr().log10()
    }

    /// SNR in dB that realizes a desired input SDR in dB for this clutter.
    pub fn snr_db_for_sdr_db(&self, sdr_db: f64) -> f64 {
        sdr_db + 10.0 * (1.0 + self.clutter_power()).log10()
    }

    pub fn n_fft(&self) -> usize {
        self.fft_factor * self.pulses
    }

    /// Normalized disturbance covariance `Sigma0` (unit diagonal).
    pub fn sigma0(&self) -> Result<HermitianMatrix> {
        clutter_covariance(&self.clutter, self.cnr_db, self.pulses)
    }

    /// Unnormalized disturbance covariance `Sigma = P_c C0 + P_n I`.
    pub fn sigma(&self) -> Result<HermitianMatrix> {
        Ok(self
            .sigma0()?
            .scaled(self.clutter_power() + self.noise_power()))
    }
}

/// Target steering vector `s_k = exp(j 2 pi k F)`, `k = 0..N-1`.
pub fn steering_vector(freq: f64, pulses: usize) -> Result<CVector> {
    if !(freq.abs() < 0.5) {
        return Err(Error::DopplerOutOfRange { freq, limit: 0.5 });
    }
    if pulses < 1 {
        return Err(Error::PulseCountTooSmall { got: pulses, min: 1 });
    }
    Ok(steering_unchecked(freq, pulses))
}

/// Steering construction without the |F| < 0.5 guard. Used internally where
/// boundary estimates F = +-0.5 are legitimate (identification, not detection).
pub(crate) fn steering_unchecked(freq: f64, pulses: usize) -> CVector {
    CVector::from_fn(pulses, |k, _| {
        C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 * freq)
    })
}

/// Normalized clutter-plus-noise covariance `Sigma0 = (P_c C0 + P_n I) / (P_c + P_n)`.
///
/// Each mixture component contributes a Toeplitz block
/// `c_mn = exp(-2 (pi sigma_c (m - n))^2 + j 2 pi F_cp (m - n))`, the
/// Gaussian-shaped PSD pair with the decaying (negative) real exponent.
/// The mixture is the fraction-weighted sum, so the diagonal stays at one.
pub fn clutter_covariance(
    components: &[ClutterComponent],
    cnr_db: f64,
    pulses: usize,
) -> Result<HermitianMatrix> {
    if components.is_empty() {
        return Err(Error::EmptyClutterMixture);
    }
    for c in components {
        c.validate()?;
    }
    let total: f64 = components.iter().map(|c| c.power_fraction).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::PowerFractionsNotNormalized(total));
    }
    if pulses < 1 {
        return Err(Error::PulseCountTooSmall { got: pulses, min: 1 });
    }
    let p_c = if cnr_db == f64::NEG_INFINITY {
        0.0
    } else {
        10f64.powf(cnr_db / 10.0)
    };
    let p_n = 1.0;
    let denom = p_c + p_n;
    let sigma0 = HermitianMatrix::from_lower_fn(pulses, |i, j| {
        let lag = (i - j) as f64; // i >= j on the lower triangle
        let c0: C64 = components
            .iter()
            .map(|c| {
                let damp = (-2.0 * (std::f64::consts::PI * c.spread * lag).powi(2)).exp();
                C64::from_polar(
                    c.power_fraction * damp,
                    2.0 * std::f64::consts::PI * c.center_freq * lag,
                )
            })
            .sum();
        let noise = if i == j { p_n } else { 0.0 };
        (c0 * p_c + noise) / denom
    });
    sigma0.check_psd(PSD_EPS)?;
    Ok(sigma0)
}

/// Deterministic per-trial random stream: one base seed, one stream id.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard circular complex Gaussian vector: each entry `CN(0, 1)`.
pub fn complex_gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    CVector::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Swerling I amplitude: circular complex Gaussian with `E|a|^2 = p_s`,
/// constant within a CPI and redrawn per trial.
pub fn swerling_amplitude<R: Rng + ?Sized>(p_s: f64, rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * (0.5 * p_s).sqrt()
}

/// Colored-disturbance sampler: caches the square-root factor of a covariance.
#[derive(Debug, Clone)]
pub struct DisturbanceSampler {
    factor: CMatrix,
}

impl DisturbanceSampler {
    pub fn new(cov: &HermitianMatrix) -> Result<Self> {
        Ok(Self {
            factor: cov.sqrt_factor(SQRT_FACTOR_FLOOR)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    /// One draw `L g` with `g ~ CN(0, I)`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> CVector {
        &self.factor * complex_gaussian_vector(self.dim(), rng)
    }
}

/// Hypothesis under which a CPI is synthesized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    H0,
    H1,
}

/// Synthesizes one `M x N` range-pulse CPI matrix. Rows are mutually
/// independent draws from the unnormalized disturbance covariance; under H1
/// the target row additionally receives `a * s(F, N)` with a Swerling I
/// amplitude. Deterministic for a fixed seed.
pub fn synthesize_cpi(scenario: &Scenario, hypothesis: Hypothesis, seed: u64) -> Result<CMatrix> {
    scenario.validate()?;
    let sampler = DisturbanceSampler::new(&scenario.sigma()?)?;
    let mut rng = stream_rng(seed, 0);
    Ok(synthesize_cpi_with(scenario, hypothesis, &sampler, &mut rng))
}

/// Synthesis core reusing a prepared sampler and caller-owned RNG; the hot
/// path for Monte Carlo trials.
pub fn synthesize_cpi_with<R: Rng + ?Sized>(
    scenario: &Scenario,
    hypothesis: Hypothesis,
    sampler: &DisturbanceSampler,
    rng: &mut R,
) -> CMatrix {
    let m = scenario.range_cells;
    let n = scenario.pulses;
    let mut cpi = CMatrix::zeros(m, n);
    for i in 0..m {
        let row = sampler.draw(rng);
        for j in 0..n {
            cpi[(i, j)] = row[j];
        }
    }
    if hypothesis == Hypothesis::H1 {
        let a = swerling_amplitude(scenario.signal_power(), rng);
        let s = steering_unchecked(scenario.target.true_freq(), n);
        let i = scenario.target_range_cell - 1;
        for j in 0..n {
            cpi[(i, j)] += a * s[j];
        }
    }
    cpi
}

/// `count` i.i.d. target-free training vectors with the given (unnormalized)
/// covariance. Deterministic for a fixed seed and independent of any CPI draw
/// made from a different stream.
pub fn draw_training(cov: &HermitianMatrix, count: usize, seed: u64) -> Result<Vec<CVector>> {
    if count < 1 {
        return Err(Error::LengthTooSmall { got: count, min: 1 });
    }
    let sampler = DisturbanceSampler::new(cov)?;
    let mut rng = stream_rng(seed, 1);
    Ok(draw_training_with(&sampler, count, &mut rng))
}

pub fn draw_training_with<R: Rng + ?Sized>(
    sampler: &DisturbanceSampler,
    count: usize,
    rng: &mut R,
) -> Vec<CVector> {
    (0..count).map(|_| sampler.draw(rng)).collect()
}
