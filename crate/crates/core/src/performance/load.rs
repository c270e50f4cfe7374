//! Computational-load model: dominant per-CPI flop counts of the
//! time-domain AMF and the DDL-AMF, and their ratio.

use crate::error::{Error, Result};

/// Inputs of the load model. Training sizes follow the costing convention
/// `K_T = 4N` and `K = 4n`; the representative-cell count is a percentage of
/// the range extent and each representative cell carries `N_D` local
/// range-Doppler peaks on average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadParams {
    /// Pulses per CPI (N).
    pub pulses: usize,
    /// DDL order (n).
    pub ddl_order: usize,
    /// Range cells per CPI (M).
    pub range_cells: usize,
    /// Doppler-profile FFT length, a multiple of N.
    pub n_fft: usize,
    /// Average local peaks per representative range cell (N_D).
    pub peaks_per_cell: usize,
    /// Representative cells as a percentage of M (gamma).
    pub gamma_percent: f64,
}

impl LoadParams {
    pub fn validate(&self) -> Result<()> {
        if self.pulses == 0
            || self.ddl_order == 0
            || self.range_cells == 0
            || self.n_fft == 0
            || self.peaks_per_cell == 0
        {
            return Err(Error::LengthTooSmall { got: 0, min: 1 });
        }
        if !self.n_fft.is_multiple_of(self.pulses) {
            return Err(Error::FftTooShort {
                n_fft: self.n_fft,
                n: self.pulses,
            });
        }
        if !(self.gamma_percent > 0.0 && self.gamma_percent <= 100.0) {
            return Err(Error::InvalidProbability(self.gamma_percent));
        }
        Ok(())
    }

    /// Representative range cells `M_R = round(gamma/100 * M)`.
    pub fn representative_cells(&self) -> f64 {
        (self.gamma_percent / 100.0 * self.range_cells as f64).round()
    }

    /// Local range-Doppler peaks per CPI `N_p = N_D * M_R`.
    pub fn peaks_total(&self) -> f64 {
        self.peaks_per_cell as f64 * self.representative_cells()
    }
}

/// Per-CPI loads and the DDL gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadGain {
    pub cl_td: f64,
    pub cl_ddl: f64,
    pub gain: f64,
    pub gain_floor: u64,
}

/// Evaluates the load model.
///
/// Time domain: `6 N^3 M_R` for covariance estimation and inversion per
/// tested cell, `2 N^2 N_p` for the statistics, and one `N_fft`-point FFT
/// per representative cell for Doppler estimation. DDL: `(6 n^3 + 2 n^2)`
/// per peak, the `M`-row detection-matrix FFT, the same estimation FFTs,
/// and one `N`-point FFT per peak for the steering image.
pub fn load_gain(p: &LoadParams) -> Result<LoadGain> {
    p.validate()?;
    let n = p.pulses as f64;
    let nd = p.ddl_order as f64;
    let m = p.range_cells as f64;
    let n_fft = p.n_fft as f64;
    let m_r = p.representative_cells();
    let n_p = p.peaks_total();

    let fft_full = 1.5 * n_fft * n_fft.log2();
    let fft_n = 1.5 * n * n.log2();

    let cl_td = 6.0 * n.powi(3) * m_r + 2.0 * n * n * n_p + m_r * fft_full;
    let cl_ddl = n_p * (6.0 * nd.powi(3) + 2.0 * nd * nd) + m * fft_n + m_r * fft_full + n_p * fft_n;
    let gain = cl_td / cl_ddl;
    Ok(LoadGain {
        cl_td,
        cl_ddl,
        gain,
        gain_floor: gain.floor() as u64,
    })
}

/// The nine (n, N) pairs evaluated in the reference table.
pub fn reference_table_params(range_cells: usize, gamma_percent: f64) -> Vec<LoadParams> {
    let mut out = Vec::new();
    for &ddl_order in &[4usize, 5, 6] {
        for &pulses in &[64usize, 128, 256] {
            out.push(LoadParams {
                pulses,
                ddl_order,
                range_cells,
                n_fft: 4 * pulses,
                peaks_per_cell: pulses,
                gamma_percent,
            });
        }
    }
    out
}
