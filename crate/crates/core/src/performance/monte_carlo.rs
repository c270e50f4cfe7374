//! Monte Carlo detection-curve estimation and false-alarm validation.
//!
//! Trials are independent work items keyed by `(seed, stream)` through a
//! counter-based ChaCha stream, so results are bit-reproducible regardless
//! of thread scheduling. Known-Doppler trials test the RPTD of the true
//! frequency directly; unknown-Doppler trials run the full pipeline of
//! detection-matrix formation, representative-cell selection, profile peak
//! identification, fine Doppler estimation, and RPTD extraction from each
//! candidate estimate.

use rayon::prelude::*;

use crate::detectors::{amf_statistic, sample_covariance, DetectorId};
use crate::doppler::{ddl_extract_matrix, ddl_extract_vector, Dft};
use crate::error::Result;
use crate::linalg::{CVector, HermitianMatrix};
use crate::performance::thresholds::{amf_threshold, glr_threshold};
use crate::rptd::{mld_grid, rptd_set, RptdSet};
use crate::signal_model::{
    draw_training_with, steering_unchecked, stream_rng, synthesize_cpi_with, DisturbanceSampler,
    Hypothesis, Scenario,
};

/// How an unknown-Doppler trial maps MLD-grid entries to a detection claim.
///
/// At strong clutter-to-noise ratios the dominant profile peak of the
/// target's own range cell is the clutter ridge, not the target, so
/// restricting the test to that single entry starves the detector of the
/// target's peak group. Testing every entry matches testing each local-peak
/// data group; with deep thresholds the false contribution is negligible and
/// the detection stays attributable to the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DetectionProtocol {
    /// A trial detects when any MLD entry's statistic meets the threshold.
    #[default]
    AnyEntry,
    /// Only the entry at the profile's global-maximum peak is tested.
    DominantPeak,
}

impl DetectionProtocol {
    pub fn as_str(&self) -> &'static str {
        match self {
            DetectionProtocol::AnyEntry => "any_entry",
            DetectionProtocol::DominantPeak => "dominant_peak",
        }
    }
}

/// Trial-count, seeding, and protocol options for Monte Carlo runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloOptions {
    pub trials: usize,
    pub seed: u64,
    pub protocol: DetectionProtocol,
}

impl MonteCarloOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            protocol: DetectionProtocol::default(),
        }
    }

    pub fn with_protocol(mut self, protocol: DetectionProtocol) -> Self {
        self.protocol = protocol;
        self
    }
}

/// A detection-probability estimate with its binomial confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdEstimate {
    pub p_d: f64,
    pub ci_halfwidth: f64,
    pub trials: usize,
}

/// Normal-approximation binomial 95% half-width `1.96 sqrt(p(1-p)/trials)`.
pub fn binomial_ci_halfwidth(p: f64, trials: usize) -> f64 {
    1.96 * (p * (1.0 - p) / trials as f64).sqrt()
}

impl PdEstimate {
    fn from_counts(detections: usize, trials: usize) -> Self {
        let p = detections as f64 / trials as f64;
        Self {
            p_d: p,
            ci_halfwidth: binomial_ci_halfwidth(p, trials),
            trials,
        }
    }
}

/// One curve of `(abscissa, P_D, ci)` rows for a single detector, carrying
/// its provenance: the base scenario, trial count, and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionCurve {
    pub detector: DetectorId,
    /// Abscissa name: "freq", "order", or "sdr_db".
    pub abscissa: &'static str,
    pub rows: Vec<CurveRow>,
    pub scenario: Scenario,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub x: f64,
    pub p_d: f64,
    pub ci_halfwidth: f64,
}

/// Abscissa specification for a detection curve.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepSpec {
    /// Target Doppler frequencies.
    Freq(Vec<f64>),
    /// DDL orders; the training count tracks the order as `K = k_factor n`.
    Order { values: Vec<usize>, k_factor: usize },
    /// Input SDR values in dB (adjusts SNR for the scenario's clutter).
    SdrDb(Vec<f64>),
}

impl SweepSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SweepSpec::Freq(_) => "freq",
            SweepSpec::Order { .. } => "order",
            SweepSpec::SdrDb(_) => "sdr_db",
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            SweepSpec::Freq(v) => v.clone(),
            SweepSpec::Order { values, .. } => values.iter().map(|&n| n as f64).collect(),
            SweepSpec::SdrDb(v) => v.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SweepSpec::Freq(v) => v.len(),
            SweepSpec::Order { values, .. } => values.len(),
            SweepSpec::SdrDb(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Scenario at sweep position `idx`.
    pub fn scenario_at(&self, base: &Scenario, idx: usize) -> Scenario {
        let mut scn = base.clone();
        match self {
            SweepSpec::Freq(v) => {
                scn.target = scn.target.with_freq(v[idx]);
            }
            SweepSpec::Order { values, k_factor } => {
                scn.ddl_order = values[idx];
                scn.training_ddl = k_factor * values[idx];
            }
            SweepSpec::SdrDb(v) => {
                scn.snr_db = base.snr_db_for_sdr_db(v[idx]);
            }
        }
        scn
    }
}

/// Prepared context for detection trials of one scenario point.
struct TrialContext {
    scenario: Scenario,
    protocol: DetectionProtocol,
    sampler: DisturbanceSampler,
    dft_n: Dft,
    dft_fft: Dft,
    lambda_amf: f64,
    lambda_glr: f64,
    /// RPTD and DDL steering for the true frequency (known-Doppler path).
    known: Option<(RptdSet, CVector)>,
}

impl TrialContext {
    fn new(scenario: &Scenario, protocol: DetectionProtocol) -> Result<Self> {
        scenario.validate()?;
        let n = scenario.pulses;
        let dft_n = Dft::new(n);
        let dft_fft = Dft::new(scenario.n_fft());
        let sampler = DisturbanceSampler::new(&scenario.sigma()?)?;
        let lambda_amf = amf_threshold(scenario.pfa, scenario.training_ddl, scenario.ddl_order)?;
        let lambda_glr = glr_threshold(scenario.pfa, scenario.training_ddl, scenario.ddl_order)?;
        let known = if scenario.target.is_known() {
            let freq = scenario.target.true_freq();
            let rptd = rptd_set(freq, n, scenario.ddl_order)?;
            let image = dft_n.image(&steering_unchecked(freq, n))?;
            let steering = ddl_extract_vector(&image.values, rptd.bins())?;
            Some((rptd, steering))
        } else {
            None
        };
        Ok(Self {
            scenario: scenario.clone(),
            protocol,
            sampler,
            dft_n,
            dft_fft,
            lambda_amf,
            lambda_glr,
            known,
        })
    }

    /// AMF and GLR statistics for one candidate frequency against shared
    /// CUT and training images.
    fn statistics_at(
        &self,
        freq: f64,
        cut_image: &CVector,
        training_images: &[CVector],
    ) -> Option<(f64, f64)> {
        let n = self.scenario.pulses;
        let k = training_images.len();
        let rptd = rptd_set(freq, n, self.scenario.ddl_order).ok()?;
        let y = ddl_extract_vector(cut_image, rptd.bins()).ok()?;
        let steering_image = self.dft_n.image(&steering_unchecked(freq, n)).ok()?;
        let t = ddl_extract_vector(&steering_image.values, rptd.bins()).ok()?;
        let training_ddl: Vec<CVector> = training_images
            .iter()
            .map(|img| ddl_extract_vector(img, rptd.bins()).expect("bins from same grid"))
            .collect();
        let phi = sample_covariance(&training_ddl).ok()?.hpd_solve().ok()?;
        let amf = amf_statistic(&y, &t, &phi).ok()?;
        let glr = amf / (1.0 + phi.quad_form_self(&y) / k as f64);
        Some((amf, glr))
    }

    /// Runs one H1 trial; returns (AMF detected, GLR detected).
    fn run_trial(&self, seed: u64, stream: u64) -> (bool, bool) {
        let mut rng = stream_rng(seed, stream);
        let scn = &self.scenario;
        let k = scn.training_ddl;
        let n = scn.pulses;

        if let Some((rptd, steering)) = &self.known {
            // known Doppler: only the CUT row and training are needed
            let mut row = self.sampler.draw(&mut rng);
            let a = crate::signal_model::swerling_amplitude(scn.signal_power(), &mut rng);
            let s = steering_unchecked(scn.target.true_freq(), n);
            row += &s * a;
            let y = ddl_extract_vector(
                &self.dft_n.image(&row).expect("plan length matches").values,
                rptd.bins(),
            )
            .expect("bins from same grid");
            let mut training_ddl = Vec::with_capacity(k);
            for _ in 0..k {
                let t = self.sampler.draw(&mut rng);
                let img = self.dft_n.image(&t).expect("plan length matches");
                training_ddl.push(
                    ddl_extract_vector(&img.values, rptd.bins()).expect("bins from same grid"),
                );
            }
            let Ok(phi) = sample_covariance(&training_ddl).and_then(|m| m.hpd_solve()) else {
                return (false, false);
            };
            let Ok(amf) = amf_statistic(&y, steering, &phi) else {
                return (false, false);
            };
            let glr = amf / (1.0 + phi.quad_form_self(&y) / k as f64);
            return (amf >= self.lambda_amf, glr >= self.lambda_glr);
        }

        // unknown Doppler: full pipeline on the cell under test. The
        // representative-cell reduction is a scene-level data selector, not
        // part of the per-trial statistic: at deeply negative input SDR the
        // target row's range-peak membership is an independent coin flip
        // that would cap every detector's P_D identically, so detection
        // trials always evaluate the CUT row.
        let cpi = synthesize_cpi_with(scn, Hypothesis::H1, &self.sampler, &mut rng);
        let i = scn.target_range_cell - 1;
        let target_row = CVector::from_fn(n, |j, _| cpi[(i, j)]);
        let profile = self
            .dft_fft
            .image_zero_padded(&target_row)
            .expect("plan length checked")
            .power();
        let grid = mld_grid(&profile);
        if grid.is_empty() {
            return (false, false);
        }

        // training drawn once per trial; every candidate entry shares it
        let training_rows = draw_training_with(&self.sampler, k, &mut rng);
        let training_images: Vec<CVector> = training_rows
            .iter()
            .map(|r| self.dft_n.image(r).expect("plan length matches").values)
            .collect();
        let cut_image = self
            .dft_n
            .image(&target_row)
            .expect("plan length matches")
            .values;

        let mut candidates: Vec<&crate::rptd::MldEntry> = match self.protocol {
            DetectionProtocol::DominantPeak => grid.dominant(&profile).into_iter().collect(),
            DetectionProtocol::AnyEntry => grid.entries.iter().collect(),
        };
        // strongest peaks first so detections short-circuit early
        candidates.sort_by(|a, b| profile[b.peak_index - 1].total_cmp(&profile[a.peak_index - 1]));

        let (mut amf_fired, mut glr_fired) = (false, false);
        for entry in candidates {
            if let Some((amf, glr)) = self.statistics_at(entry.freq, &cut_image, &training_images)
            {
                amf_fired |= amf >= self.lambda_amf;
                glr_fired |= glr >= self.lambda_glr;
            }
            if amf_fired && glr_fired {
                break;
            }
        }
        (amf_fired, glr_fired)
    }
}

/// Detection-probability estimates for DDL-AMF and DDL-GLR at one scenario
/// point, under the default (any-entry) protocol. Both detectors share each
/// trial's data and covariance estimates.
pub fn monte_carlo_point(
    scenario: &Scenario,
    trials: usize,
    seed: u64,
) -> Result<(PdEstimate, PdEstimate)> {
    monte_carlo_point_with(scenario, &MonteCarloOptions::new(trials, seed))
}

/// Detection-probability estimates with explicit options.
pub fn monte_carlo_point_with(
    scenario: &Scenario,
    opts: &MonteCarloOptions,
) -> Result<(PdEstimate, PdEstimate)> {
    point_streamed(scenario, opts, 0)
}

fn point_streamed(
    scenario: &Scenario,
    opts: &MonteCarloOptions,
    stream_base: u64,
) -> Result<(PdEstimate, PdEstimate)> {
    let ctx = TrialContext::new(scenario, opts.protocol)?;
    let (amf_hits, glr_hits) = (0..opts.trials)
        .into_par_iter()
        .map(|t| {
            let (a, g) = ctx.run_trial(opts.seed, stream_base + t as u64);
            (a as usize, g as usize)
        })
        .reduce(|| (0, 0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    Ok((
        PdEstimate::from_counts(amf_hits, opts.trials),
        PdEstimate::from_counts(glr_hits, opts.trials),
    ))
}

/// Full detection curves over an abscissa sweep; returns one curve for
/// DDL-AMF and one for DDL-GLR. Deterministic per `(scenario, sweep, opts)`.
pub fn monte_carlo_curve(
    scenario: &Scenario,
    sweep: &SweepSpec,
    opts: &MonteCarloOptions,
) -> Result<Vec<DetectionCurve>> {
    let xs = sweep.values();
    let mut amf_rows = Vec::with_capacity(xs.len());
    let mut glr_rows = Vec::with_capacity(xs.len());
    for (idx, &x) in xs.iter().enumerate() {
        let scn = sweep.scenario_at(scenario, idx);
        let (amf, glr) = point_streamed(&scn, opts, (idx as u64) << 32)?;
        amf_rows.push(CurveRow {
            x,
            p_d: amf.p_d,
            ci_halfwidth: amf.ci_halfwidth,
        });
        glr_rows.push(CurveRow {
            x,
            p_d: glr.p_d,
            ci_halfwidth: glr.ci_halfwidth,
        });
    }
    Ok(vec![
        DetectionCurve {
            detector: DetectorId::DdlAmf,
            abscissa: sweep.name(),
            rows: amf_rows,
            scenario: scenario.clone(),
            trials: opts.trials,
            seed: opts.seed,
        },
        DetectionCurve {
            detector: DetectorId::DdlGlr,
            abscissa: sweep.name(),
            rows: glr_rows,
            scenario: scenario.clone(),
            trials: opts.trials,
            seed: opts.seed,
        },
    ])
}

/// Empirical false-alarm rates of DDL-AMF and DDL-GLR under H0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaRates {
    pub amf_rate: f64,
    pub glr_rate: f64,
    pub trials: usize,
    /// The false-alarm probability the thresholds were computed for.
    pub pfa: f64,
}

impl FaRates {
    /// Binomial standard deviation of an empirical rate at the target pfa.
    pub fn sigma(&self) -> f64 {
        (self.pfa * (1.0 - self.pfa) / self.trials as f64).sqrt()
    }

    pub fn amf_within_3_sigma(&self) -> bool {
        (self.amf_rate - self.pfa).abs() <= 3.0 * self.sigma()
    }

    pub fn glr_within_3_sigma(&self) -> bool {
        (self.glr_rate - self.pfa).abs() <= 3.0 * self.sigma()
    }
}

/// Estimates H0 threshold-exceedance rates against the analytic thresholds.
///
/// Draws the DDL cell-under-test and training vectors directly from the
/// exact DDL covariance of the scenario's RPTD bins. Under H0 those draws
/// have exactly the distribution the time-domain pipeline produces after the
/// DFT and extraction, so the statistics see the same law at a fraction of
/// the cost; the end-to-end time-domain path is exercised by the detection
/// trials and the integration suite.
pub fn empirical_fa_rates(scenario: &Scenario, trials: usize, seed: u64) -> Result<FaRates> {
    scenario.validate()?;
    let n = scenario.pulses;
    let order = scenario.ddl_order;
    let k = scenario.training_ddl;
    let rptd = rptd_set(scenario.target.true_freq(), n, order)?;
    let phi = exact_ddl_covariance(scenario, &rptd)?;
    let sampler = DisturbanceSampler::new(&phi)?;
    let dft_n = Dft::new(n);
    let image = dft_n.image(&steering_unchecked(scenario.target.true_freq(), n))?;
    let steering = ddl_extract_vector(&image.values, rptd.bins())?;
    let lambda_amf = amf_threshold(scenario.pfa, k, order)?;
    let lambda_glr = glr_threshold(scenario.pfa, k, order)?;

    let (amf_hits, glr_hits) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64);
            let y = sampler.draw(&mut rng);
            let training = draw_training_with(&sampler, k, &mut rng);
            let phi_hat = sample_covariance(&training).expect("K > n validated");
            let solve = match phi_hat.hpd_solve() {
                Ok(s) => s,
                Err(_) => return (0usize, 0usize),
            };
            let amf = amf_statistic(&y, &steering, &solve).expect("nonzero steering");
            let glr = amf / (1.0 + solve.quad_form_self(&y) / k as f64);
            ((amf >= lambda_amf) as usize, (glr >= lambda_glr) as usize)
        })
        .reduce(|| (0, 0), |acc, x| (acc.0 + x.0, acc.1 + x.1));

    Ok(FaRates {
        amf_rate: amf_hits as f64 / trials as f64,
        glr_rate: glr_hits as f64 / trials as f64,
        trials,
        pfa: scenario.pfa,
    })
}

/// Exact DDL covariance of a scenario's RPTD bins (the extraction of the
/// normalized-covariance Doppler image).
pub fn exact_ddl_covariance(scenario: &Scenario, rptd: &RptdSet) -> Result<HermitianMatrix> {
    let sigma0_image = crate::doppler::dft_image_covariance(&scenario.sigma0()?)?;
    ddl_extract_matrix(&sigma0_image, rptd.bins())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_model::{ClutterComponent, TargetDoppler};

    fn fast_scenario() -> Scenario {
        Scenario {
            pulses: 16,
            range_cells: 12,
            ddl_order: 3,
            training_time: 80,
            training_ddl: 12,
            cnr_db: 30.0,
            snr_db: 20.0,
            pfa: 1e-2,
            clutter: vec![ClutterComponent {
                center_freq: 0.0,
                spread: 0.01,
                power_fraction: 1.0,
            }],
            target: TargetDoppler::Known(0.25),
            fft_factor: 4,
            target_range_cell: 6,
        }
    }

    #[test]
    fn strong_signal_saturates_pd() {
        let mut scn = fast_scenario();
        scn.snr_db = 45.0;
        let (amf, glr) = monte_carlo_point(&scn, 300, 5).unwrap();
        assert!(amf.p_d >= 0.99, "amf {}", amf.p_d);
        assert!(glr.p_d >= 0.99, "glr {}", glr.p_d);
    }

    #[test]
    fn point_estimates_are_deterministic() {
        let scn = fast_scenario();
        let a = monte_carlo_point(&scn, 200, 9).unwrap();
        let b = monte_carlo_point(&scn, 200, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_doppler_pipeline_detects_strong_target() {
        let mut scn = fast_scenario();
        scn.target = TargetDoppler::Unknown(0.23);
        scn.snr_db = 35.0;
        let (amf, _glr) = monte_carlo_point(&scn, 200, 13).unwrap();
        assert!(amf.p_d > 0.9, "amf {}", amf.p_d);
    }

    #[test]
    fn dominant_peak_protocol_is_stricter() {
        let mut scn = fast_scenario();
        scn.target = TargetDoppler::Unknown(0.23);
        scn.snr_db = 35.0;
        let opts_any = MonteCarloOptions::new(200, 13);
        let opts_dom = opts_any.with_protocol(DetectionProtocol::DominantPeak);
        let (any, _) = monte_carlo_point_with(&scn, &opts_any).unwrap();
        let (dom, _) = monte_carlo_point_with(&scn, &opts_dom).unwrap();
        assert!(dom.p_d <= any.p_d + 1e-12);
    }

    #[test]
    fn curve_shapes_and_metadata() {
        let scn = fast_scenario();
        let sweep = SweepSpec::Freq(vec![0.2, 0.3]);
        let curves = monte_carlo_curve(&scn, &sweep, &MonteCarloOptions::new(100, 3)).unwrap();
        assert_eq!(curves.len(), 2);
        assert_eq!(curves[0].detector, DetectorId::DdlAmf);
        assert_eq!(curves[0].rows.len(), 2);
        assert_eq!(curves[0].abscissa, "freq");
        for row in &curves[0].rows {
            assert!(row.p_d >= 0.0 && row.p_d <= 1.0);
        }
    }

    #[test]
    fn order_sweep_scales_training() {
        let scn = fast_scenario();
        let sweep = SweepSpec::Order {
            values: vec![3, 5],
            k_factor: 5,
        };
        let at1 = sweep.scenario_at(&scn, 1);
        assert_eq!(at1.ddl_order, 5);
        assert_eq!(at1.training_ddl, 25);
    }

    #[test]
    fn fa_rates_match_pfa_at_desk_scale() {
        let mut scn = fast_scenario();
        scn.pfa = 1e-2;
        let rates = empirical_fa_rates(&scn, 40_000, 17).unwrap();
        assert!(
            rates.amf_within_3_sigma(),
            "amf rate {} vs pfa {}",
            rates.amf_rate,
            rates.pfa
        );
        assert!(
            rates.glr_within_3_sigma(),
            "glr rate {} vs pfa {}",
            rates.glr_rate,
            rates.pfa
        );
    }
}
