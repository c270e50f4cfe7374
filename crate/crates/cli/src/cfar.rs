//! Taylor-windowed DFT filter bank followed by a cell-averaging CFAR: the
//! conventional baseline detector.
//!
//! Each range cell is windowed and transformed onto the centered Doppler
//! grid; the per-bin statistic is the output power, and the threshold is a
//! scaled average of the same bin's power in reference range cells. The
//! scale realizes the configured false-alarm probability exactly under the
//! exponential (complex Gaussian) per-bin hypothesis.

use ddl_radar_core::detectors::{DetectorId, DetectorOutcome};
use ddl_radar_core::doppler::Dft;
use ddl_radar_core::error::{Error, Result};
use ddl_radar_core::linalg::{C64, CVector};
use serde::{Deserialize, Serialize};

/// Doppler filter-bank weighting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "window", rename_all = "snake_case")]
pub enum CfarWindow {
    Rectangular,
    Taylor { nbar: usize, sll_db: f64 },
}

impl Default for CfarWindow {
    fn default() -> Self {
        // the baseline's named window; parameters are conventional defaults
        CfarWindow::Taylor {
            nbar: 5,
            sll_db: 35.0,
        }
    }
}

/// Cell-averaging CFAR configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaCfarConfig {
    #[serde(flatten)]
    pub window: CfarWindow,
    /// Reference cells averaged per bin.
    pub n_ref: usize,
    /// Guard cells per side, excluded between the CUT and the references.
    pub guard: usize,
}

impl Default for CaCfarConfig {
    fn default() -> Self {
        Self {
            window: CfarWindow::default(),
            n_ref: 20,
            guard: 1,
        }
    }
}

impl CaCfarConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_ref < 2 {
            return Err(Error::LengthTooSmall {
                got: self.n_ref,
                min: 2,
            });
        }
        if let CfarWindow::Taylor { nbar, sll_db } = self.window {
            if nbar < 2 || sll_db <= 0.0 {
                return Err(Error::InvalidClutterComponent(format!(
                    "taylor window nbar={nbar} sll_db={sll_db} invalid"
                )));
            }
        }
        Ok(())
    }
}

/// Taylor window coefficients (unnormalized), peak sidelobe `sll_db` below
/// the mainlobe with `nbar` nearly constant-level sidelobes.
pub fn taylor_window(n: usize, nbar: usize, sll_db: f64) -> Vec<f64> {
    let b = 10f64.powf(sll_db / 20.0);
    let a = (b + (b * b - 1.0).sqrt()).ln() / std::f64::consts::PI; // acosh(b)/pi
    let nb = nbar as f64;
    let s2 = nb * nb / (a * a + (nb - 0.5) * (nb - 0.5));

    let coef = |m: usize| -> f64 {
        let mf = m as f64;
        let mut num = if m % 2 == 1 { 0.5 } else { -0.5 };
        for i in 1..nbar {
            let i_f = i as f64;
            num *= 1.0 - mf * mf / (s2 * (a * a + (i_f - 0.5) * (i_f - 0.5)));
        }
        let mut den = 1.0;
        for i in 1..nbar {
            if i != m {
                let i_f = i as f64;
                den *= 1.0 - mf * mf / (i_f * i_f);
            }
        }
        num / den
    };
    let fm: Vec<f64> = (1..nbar).map(coef).collect();

    (0..n)
        .map(|k| {
            let x = (k as f64 - (n as f64 - 1.0) / 2.0) / n as f64;
            1.0 + 2.0
                * fm.iter()
                    .enumerate()
                    .map(|(i, f)| f * (2.0 * std::f64::consts::PI * (i + 1) as f64 * x).cos())
                    .sum::<f64>()
        })
        .collect()
}

fn window_coefficients(window: CfarWindow, n: usize) -> Vec<f64> {
    match window {
        CfarWindow::Rectangular => vec![1.0; n],
        CfarWindow::Taylor { nbar, sll_db } => taylor_window(n, nbar, sll_db),
    }
}

/// CFAR threshold scale for an `n_ref`-cell average at false-alarm
/// probability `pfa`: `n_ref (pfa^(-1/n_ref) - 1)` applied to the reference
/// mean.
pub fn ca_cfar_scale(pfa: f64, n_ref: usize) -> f64 {
    n_ref as f64 * (pfa.powf(-1.0 / n_ref as f64) - 1.0)
}

/// Windowed-DFT power profile of one range cell on the centered N-point grid.
pub fn windowed_power(row: &CVector, window: &[f64], dft: &Dft) -> Result<Vec<f64>> {
    if row.len() != window.len() {
        return Err(Error::DimensionMismatch {
            expected: window.len(),
            got: row.len(),
        });
    }
    let tapered = CVector::from_fn(row.len(), |t, _| row[t] * C64::new(window[t], 0.0));
    Ok(dft.image(&tapered)?.power())
}

/// Runs the CA-CFAR baseline over every Doppler bin of a cell under test.
///
/// `reference_rows` are target-free range cells outside the guard region,
/// each the same length as `cut_row`; the first `n_ref` are averaged.
pub fn ca_cfar_baseline(
    cut_row: &CVector,
    reference_rows: &[CVector],
    config: &CaCfarConfig,
    pfa: f64,
) -> Result<Vec<DetectorOutcome>> {
    config.validate()?;
    if reference_rows.len() < config.n_ref {
        return Err(Error::LengthTooSmall {
            got: reference_rows.len(),
            min: config.n_ref,
        });
    }
    let n = cut_row.len();
    let window = window_coefficients(config.window, n);
    let dft = Dft::new(n);
    let cut_power = windowed_power(cut_row, &window, &dft)?;
    let mut ref_mean = vec![0.0f64; n];
    for row in reference_rows.iter().take(config.n_ref) {
        let p = windowed_power(row, &window, &dft)?;
        for (acc, v) in ref_mean.iter_mut().zip(p) {
            *acc += v;
        }
    }
    for v in ref_mean.iter_mut() {
        *v /= config.n_ref as f64;
    }
    let scale = ca_cfar_scale(pfa, config.n_ref);
    Ok(cut_power
        .into_iter()
        .zip(ref_mean)
        .map(|(stat, mean)| DetectorOutcome::new(DetectorId::CaCfar, stat, scale * mean, n))
        .collect())
}

/// Reference-row indices (0-based) for a CUT at `cut` in an `m`-row matrix:
/// nearest rows outside the guard band, alternating sides.
pub fn reference_row_indices(m: usize, cut: usize, guard: usize, n_ref: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n_ref);
    let mut dist = guard + 1;
    while out.len() < n_ref && dist < m {
        if cut >= dist {
            out.push(cut - dist);
        }
        if out.len() < n_ref && cut + dist < m {
            out.push(cut + dist);
        }
        dist += 1;
    }
    out
}
