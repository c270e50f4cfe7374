//! Named experiment runners and CSV emission.
//!
//! Every experiment writes one UTF-8 CSV with LF line endings: `#`-prefixed
//! metadata comment rows (scenario echo, seed, trials, version), a header
//! row, then data rows. Output bytes are a pure function of the config and
//! seed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ddl_radar_core::detectors::DetectorId;
use ddl_radar_core::doppler::BinSet;
use ddl_radar_core::performance::{
    amf_threshold, binomial_ci_halfwidth, empirical_fa_rates, fit_threshold_approx, glr_threshold,
    load_gain, monte_carlo_curve, reference_pfa_grid, reference_table_params,
    MonteCarloOptions, PdEstimate, ScenarioAnalysis,
};
use ddl_radar_core::rptd::peak_bin;
use ddl_radar_core::signal_model::{
    stream_rng, synthesize_cpi_with, ClutterComponent, DisturbanceSampler, Hypothesis, Scenario,
};
use ddl_radar_core::CVector;
use rayon::prelude::*;

use crate::cfar::{ca_cfar_baseline, reference_row_indices, CaCfarConfig};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{CliError, Result};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Runs the configured experiment and writes its CSV under `out_dir`.
/// Returns the output path.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<PathBuf> {
    cfg.validate()?;
    let body = match cfg.experiment {
        ExperimentKind::PdVsF | ExperimentKind::PdVsN | ExperimentKind::PdVsSdr => curves_csv(cfg)?,
        ExperimentKind::Thresholds => thresholds_csv(cfg)?,
        ExperimentKind::FitThresholds => fits_csv(cfg)?,
        ExperimentKind::LoadGain => load_csv(cfg)?,
        ExperimentKind::FaValidate => fa_csv(cfg)?,
        ExperimentKind::RodiCompare => rodi_csv(cfg)?,
    };
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(&cfg.output);
    fs::write(&path, body)?;
    Ok(path)
}

fn header(cfg: &ExperimentConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# ddl-radar v{VERSION}");
    let _ = writeln!(s, "# experiment: {}", cfg.experiment.as_str());
    let _ = writeln!(s, "# seed: {}", cfg.seed);
    let _ = writeln!(s, "# trials: {}", cfg.trials);
    if let Some(scn) = &cfg.scenario {
        let clutter: Vec<String> = scn
            .clutter
            .iter()
            .map(|c| format!("({},{},{})", c.center_freq, c.spread, c.power_fraction))
            .collect();
        let _ = writeln!(
            s,
            "# scenario: N={} M={} n={} K_T={} K={} cnr_db={} snr_db={} pfa={} target_freq={} doppler_known={} q={} cell={} clutter=[{}]",
            scn.pulses,
            scn.range_cells,
            scn.ddl_order,
            scn.training_time.unwrap_or(5 * scn.pulses),
            scn.training_ddl.unwrap_or(5 * scn.ddl_order),
            scn.cnr_db,
            scn.snr_db,
            scn.pfa,
            scn.target_freq,
            scn.doppler_known,
            scn.fft_factor,
            scn.target_range_cell,
            clutter.join(",")
        );
    }
    s
}

fn push_curve_row(s: &mut String, x: f64, detector: &str, p_d: f64, ci: f64) {
    let _ = writeln!(s, "{x},{detector},{p_d:.6},{ci:.6}");
}

/// Monte Carlo curves plus analytic reference rows for the P_D experiments.
fn curves_csv(cfg: &ExperimentConfig) -> Result<String> {
    let scn = cfg.require_scenario()?.to_scenario()?;
    let sweep = cfg
        .sweep
        .as_ref()
        .expect("validated")
        .to_spec()?;
    let opts = MonteCarloOptions::new(cfg.trials, cfg.seed).with_protocol(cfg.protocol()?);
    let curves = monte_carlo_curve(&scn, &sweep, &opts)?;

    let mut s = header(cfg);
    let _ = writeln!(s, "abscissa,detector,p_d,ci_halfwidth");
    for curve in &curves {
        for row in &curve.rows {
            push_curve_row(&mut s, row.x, curve.detector.as_str(), row.p_d, row.ci_halfwidth);
        }
    }

    // analytic references: clairvoyant order-N always; adaptive closed forms
    // when the detector knows the Doppler
    let analysis = ScenarioAnalysis::new(&scn)?;
    let xs = sweep.values();
    for (idx, &x) in xs.iter().enumerate() {
        let point = sweep.scenario_at(&scn, idx);
        let freq = point.target.true_freq();
        let pd_opt = analysis.pd_optimum_n(&point, freq)?;
        push_curve_row(&mut s, x, DetectorId::OptimumN.as_str(), pd_opt, 0.0);
        if point.target.is_known() {
            let (n, k) = (point.ddl_order, point.training_ddl);
            let pd_a = analysis.pd_ddl_amf(&point, freq, n, k)?;
            let pd_g = analysis.pd_ddl_glr(&point, freq, n, k)?;
            push_curve_row(&mut s, x, "ddl_amf_analytic", pd_a, 0.0);
            push_curve_row(&mut s, x, "ddl_glr_analytic", pd_g, 0.0);
        }
    }

    // optional conventional baseline, estimated per sweep point
    if let (Some(cfar), ExperimentKind::PdVsF) = (&cfg.cfar, cfg.experiment) {
        for (idx, &x) in xs.iter().enumerate() {
            let point = sweep.scenario_at(&scn, idx);
            let est = cfar_pd_point(&point, cfar, cfg.trials, cfg.seed ^ 0x5f5f_5f5f, idx as u64)?;
            push_curve_row(&mut s, x, DetectorId::CaCfar.as_str(), est.p_d, est.ci_halfwidth);
        }
    }
    Ok(s)
}

/// Monte Carlo P_D of the CA-CFAR baseline at one scenario point: detection
/// scored at the target's peak bin, references taken along range outside the
/// guard band.
pub fn cfar_pd_point(
    scenario: &Scenario,
    cfar: &CaCfarConfig,
    trials: usize,
    seed: u64,
    stream_hi: u64,
) -> Result<PdEstimate> {
    scenario.validate()?;
    cfar.validate()?;
    let needed = cfar.n_ref + 2 * cfar.guard + 1;
    if scenario.range_cells < needed {
        return Err(CliError::Config(format!(
            "range_cells = {} too small for n_ref = {} with guard = {} (need >= {needed})",
            scenario.range_cells, cfar.n_ref, cfar.guard
        )));
    }
    let sampler = DisturbanceSampler::new(&scenario.sigma()?)?;
    let cut = scenario.target_range_cell - 1;
    let refs = reference_row_indices(scenario.range_cells, cut, cfar.guard, cfar.n_ref);
    let bin = peak_bin(scenario.target.true_freq(), scenario.pulses)?;
    let n = scenario.pulses;

    let hits: usize = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, (stream_hi << 32) | t as u64);
            let cpi = synthesize_cpi_with(scenario, Hypothesis::H1, &sampler, &mut rng);
            let cut_row = CVector::from_fn(n, |j, _| cpi[(cut, j)]);
            let reference: Vec<CVector> = refs
                .iter()
                .map(|&i| CVector::from_fn(n, |j, _| cpi[(i, j)]))
                .collect();
            let outcomes = ca_cfar_baseline(&cut_row, &reference, cfar, scenario.pfa)
                .expect("validated dimensions");
            outcomes[bin - 1].decision as usize
        })
        .sum();
    let p = hits as f64 / trials as f64;
    Ok(PdEstimate {
        p_d: p,
        ci_halfwidth: binomial_ci_halfwidth(p, trials),
        trials,
    })
}

fn thresholds_csv(cfg: &ExperimentConfig) -> Result<String> {
    let scn = cfg.require_scenario()?.to_scenario()?;
    let (n, k, pfa) = (scn.ddl_order, scn.training_ddl, scn.pfa);
    let mut s = header(cfg);
    let _ = writeln!(s, "n,K,pfa,lambda_glr,lambda_amf");
    let _ = writeln!(
        s,
        "{n},{k},{pfa:e},{:.15e},{:.15e}",
        glr_threshold(pfa, k, n)?,
        amf_threshold(pfa, k, n)?
    );
    Ok(s)
}

fn fits_csv(cfg: &ExperimentConfig) -> Result<String> {
    let grid = reference_pfa_grid();
    let mut s = header(cfg);
    let _ = writeln!(s, "n,K,c1,c2,c3,minimax_err_pct,max_pfa_err_pct");
    for row in cfg.fit_rows() {
        let fit = fit_threshold_approx(row.n, row.k, &grid)?;
        let _ = writeln!(
            s,
            "{},{},{:.15},{:.15},{:.15},{:.5},{:.5}",
            row.n,
            row.k,
            fit.c[0],
            fit.c[1],
            fit.c[2],
            100.0 * fit.minimax_rel_err,
            100.0 * fit.max_pfa_rel_err
        );
    }
    Ok(s)
}

fn load_csv(cfg: &ExperimentConfig) -> Result<String> {
    let mut s = header(cfg);
    let _ = writeln!(s, "n,N,cl_td,cl_ddl,gain_exact,gain_floor");
    for p in reference_table_params(cfg.load_range_cells, cfg.load_gamma_percent) {
        let g = load_gain(&p)?;
        let _ = writeln!(
            s,
            "{},{},{:.6e},{:.6e},{:.6},{}",
            p.ddl_order, p.pulses, g.cl_td, g.cl_ddl, g.gain, g.gain_floor
        );
    }
    Ok(s)
}

fn fa_csv(cfg: &ExperimentConfig) -> Result<String> {
    let base = cfg.require_scenario()?.to_scenario()?;
    let mut settings: Vec<(f64, Vec<ClutterComponent>)> = vec![(base.cnr_db, base.clutter.clone())];
    if let Some(extra) = &cfg.fa_settings {
        for fs in extra {
            settings.push((fs.cnr_db.unwrap_or(base.cnr_db), fs.clutter.clone()));
        }
    }
    let mut s = header(cfg);
    let _ = writeln!(s, "setting,detector,pfa,empirical_rate,sigma,within_3sigma");
    for (i, (cnr_db, clutter)) in settings.iter().enumerate() {
        let mut scn = base.clone();
        scn.cnr_db = *cnr_db;
        scn.clutter = clutter.clone();
        let rates = empirical_fa_rates(&scn, cfg.trials, cfg.seed.wrapping_add(i as u64))?;
        let sigma = rates.sigma();
        let _ = writeln!(
            s,
            "{i},ddl_amf,{:e},{:.8e},{sigma:.3e},{}",
            rates.pfa,
            rates.amf_rate,
            rates.amf_within_3_sigma()
        );
        let _ = writeln!(
            s,
            "{i},ddl_glr,{:e},{:.8e},{sigma:.3e},{}",
            rates.pfa,
            rates.glr_rate,
            rates.glr_within_3_sigma()
        );
    }
    Ok(s)
}

/// Two adjacent RODI windows of the scenario's DDL order placed against the
/// clutter-spectrum peak, mirroring the prior-art configuration.
pub fn adjacent_rodis(scenario: &Scenario) -> Result<(BinSet, BinSet)> {
    let n = scenario.pulses;
    let order = scenario.ddl_order;
    let f_cp = scenario
        .clutter
        .first()
        .map(|c| c.center_freq)
        .unwrap_or(0.0);
    let d_cp = peak_bin(f_cp, n)?;
    let first: Vec<usize> = (0..order).map(|i| d_cp + i).collect();
    let second: Vec<usize> = (0..order).map(|i| d_cp + order + i).collect();
    Ok((
        BinSet::new(first, n).map_err(CliError::from)?,
        BinSet::new(second, n).map_err(CliError::from)?,
    ))
}

/// Analytic frequency response: the RODI-bank DDL-GLR against the RPTD-based
/// DDL detectors and the clairvoyant reference, evaluated per sweep point
/// (sweep defaults to the on-grid frequencies of the two RODIs plus the
/// quarter-offset off-grid points between them).
fn rodi_csv(cfg: &ExperimentConfig) -> Result<String> {
    let scn = cfg.require_scenario()?.to_scenario()?;
    let analysis = ScenarioAnalysis::new(&scn)?;
    let (rodi1, rodi2) = adjacent_rodis(&scn)?;
    let n = scn.pulses;
    let k = scn.training_ddl;
    let order = scn.ddl_order;

    let freqs: Vec<f64> = match &cfg.sweep {
        Some(sweep) => sweep.values.clone(),
        None => {
            // on-grid points of both RODIs plus off-grid quarter offsets
            let mut f = Vec::new();
            for &b in rodi1.indices().iter().chain(rodi2.indices()) {
                let on = ddl_radar_core::doppler::centered_bin_freq(b, n);
                f.push(on);
                f.push(on + 0.25 / n as f64);
                f.push(on + 0.5056 / n as f64);
                f.push(on + 0.75 / n as f64);
            }
            f.sort_by(f64::total_cmp);
            f
        }
    };

    let mut s = header(cfg);
    let _ = writeln!(s, "abscissa,detector,p_d,ci_halfwidth");
    for &f in &freqs {
        let d_m = peak_bin(f, n)?;
        let rodi = if rodi1.contains(d_m) {
            Some(&rodi1)
        } else if rodi2.contains(d_m) {
            Some(&rodi2)
        } else {
            None
        };
        if let Some(rodi) = rodi {
            let pd = analysis.pd_rodi_glr(&scn, rodi, f, k)?;
            push_curve_row(&mut s, f, DetectorId::RodiGlr.as_str(), pd, 0.0);
        }
        push_curve_row(
            &mut s,
            f,
            "ddl_glr_analytic",
            analysis.pd_ddl_glr(&scn, f, order, k)?,
            0.0,
        );
        push_curve_row(
            &mut s,
            f,
            "ddl_amf_analytic",
            analysis.pd_ddl_amf(&scn, f, order, k)?,
            0.0,
        );
        push_curve_row(
            &mut s,
            f,
            DetectorId::OptimumN.as_str(),
            analysis.pd_optimum_n(&scn, f)?,
            0.0,
        );
    }
    Ok(s)
}
