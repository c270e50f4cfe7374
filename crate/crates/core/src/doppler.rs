//! Zero-Doppler-centered DFT images, DDL extraction, power profiles, and
//! peak identification.
//!
//! Convention: unnormalized forward DFT followed by a half-length circular
//! rotation that puts the zero-frequency component at 1-based index
//! `N/2 + 1`. Centered 1-based bin `d` carries normalized frequency
//! `(d - 1 - N/2) / N`. All bin indices in this module are 1-based to match
//! that layout; range-cell (row) indices are 1-based as well.

use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::linalg::{C64, CMatrix, CVector, HermitianMatrix};

/// A zero-Doppler-centered DFT image. Construction goes through
/// [`dft_image`] or [`Dft::image`], so the centering invariant always holds.
#[derive(Debug, Clone, PartialEq)]
pub struct DopplerImage {
    pub values: CVector,
}

impl DopplerImage {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.len() == 0
    }

    /// Normalized frequency of 1-based centered bin `d`.
    pub fn bin_freq(&self, bin: usize) -> f64 {
        centered_bin_freq(bin, self.len())
    }

    /// Elementwise magnitude-squared profile.
    pub fn power(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Normalized frequency of 1-based centered bin `d` on an `n`-point grid.
pub fn centered_bin_freq(bin: usize, n: usize) -> f64 {
    (bin as f64 - 1.0 - n as f64 / 2.0) / n as f64
}

/// Cached FFT plan for one transform length.
#[derive(Clone)]
pub struct Dft {
    fft: Arc<dyn Fft<f64>>,
    len: usize,
}

impl std::fmt::Debug for Dft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("len", &self.len).finish()
    }
}

impl Dft {
    pub fn new(len: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(len);
        Self { fft, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Centered DFT image of `x` (length must equal the plan length).
    pub fn image(&self, x: &CVector) -> Result<DopplerImage> {
        if x.len() != self.len {
            return Err(Error::DimensionMismatch {
                expected: self.len,
                got: x.len(),
            });
        }
        if self.len < 2 {
            return Err(Error::LengthTooSmall { got: self.len, min: 2 });
        }
        if !self.len.is_multiple_of(2) {
            return Err(Error::OddLength(self.len));
        }
        let mut buf: Vec<C64> = x.iter().copied().collect();
        self.fft.process(&mut buf);
        Ok(DopplerImage {
            values: fftshift(&buf),
        })
    }

    /// Centered image of `x` zero-padded to the plan length.
    pub fn image_zero_padded(&self, x: &CVector) -> Result<DopplerImage> {
        if self.len < x.len() {
            return Err(Error::FftTooShort {
                n_fft: self.len,
                n: x.len(),
            });
        }
        if !self.len.is_multiple_of(2) {
            return Err(Error::OddLength(self.len));
        }
        let mut buf = vec![C64::new(0.0, 0.0); self.len];
        for (i, v) in x.iter().enumerate() {
            buf[i] = *v;
        }
        self.fft.process(&mut buf);
        Ok(DopplerImage {
            values: fftshift(&buf),
        })
    }
}

fn fftshift(buf: &[C64]) -> CVector {
    let n = buf.len();
    CVector::from_fn(n, |i, _| buf[(i + n / 2) % n])
}

/// Centered DFT image of a vector (one-off planning; use [`Dft`] in loops).
pub fn dft_image(x: &CVector) -> Result<DopplerImage> {
    if x.len() < 2 {
        return Err(Error::LengthTooSmall { got: x.len(), min: 2 });
    }
    if !x.len().is_multiple_of(2) {
        return Err(Error::OddLength(x.len()));
    }
    Dft::new(x.len()).image(x)
}

/// Dense centered DFT matrix `F_c` with `F_c[i, t] = exp(-j 2 pi (i - N/2) t / N)`
/// (0-based rows), so `F_c x` equals the centered image of `x`.
pub fn centered_dft_matrix(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, t| {
        let k = i as f64 - n as f64 / 2.0;
        C64::from_polar(1.0, -2.0 * std::f64::consts::PI * k * t as f64 / n as f64)
    })
}

/// Covariance image `Sigma~ = F_c Sigma F_c^H`. The two-sided congruence is
/// the form that preserves Hermitian covariance semantics.
pub fn dft_image_covariance(sigma: &HermitianMatrix) -> Result<HermitianMatrix> {
    let n = sigma.order();
    if !n.is_multiple_of(2) {
        return Err(Error::OddOrder(n));
    }
    let f = centered_dft_matrix(n);
    let img = &f * sigma.matrix() * f.adjoint();
    Ok(HermitianMatrix::symmetrized(img))
}

/// Ordered set of distinct 1-based Doppler bin indices over a fixed grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinSet {
    indices: Vec<usize>,
    domain: usize,
}

impl BinSet {
    pub fn new(indices: Vec<usize>, domain: usize) -> Result<Self> {
        let mut seen = vec![false; domain + 1];
        for &b in &indices {
            if b < 1 || b > domain {
                return Err(Error::BinOutOfRange { bin: b, domain });
            }
            if seen[b] {
                return Err(Error::DuplicateBin(b));
            }
            seen[b] = true;
        }
        Ok(Self { indices, domain })
    }

    /// All bins of the domain in natural order (identity extraction).
    pub fn full(domain: usize) -> Self {
        Self {
            indices: (1..=domain).collect(),
            domain,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, bin: usize) -> bool {
        self.indices.contains(&bin)
    }

    /// 0-based positions for matrix/vector extraction.
    pub(crate) fn zero_based(&self) -> Vec<usize> {
        self.indices.iter().map(|&b| b - 1).collect()
    }
}

/// DDL extraction of a vector: element `k` of the result is `source[d_k]`.
pub fn ddl_extract_vector(source: &CVector, bins: &BinSet) -> Result<CVector> {
    if source.len() != bins.domain() {
        return Err(Error::DimensionMismatch {
            expected: bins.domain(),
            got: source.len(),
        });
    }
    Ok(CVector::from_fn(bins.len(), |k, _| {
        source[bins.indices()[k] - 1]
    }))
}

/// DDL extraction of a covariance image: entry `(k, l)` is `source[d_k, d_l]`.
/// Principal submatrices of Hermitian PSD matrices stay Hermitian PSD.
pub fn ddl_extract_matrix(source: &HermitianMatrix, bins: &BinSet) -> Result<HermitianMatrix> {
    if source.order() != bins.domain() {
        return Err(Error::DimensionMismatch {
            expected: bins.domain(),
            got: source.order(),
        });
    }
    Ok(source.principal_submatrix(&bins.zero_based()))
}

/// Power Doppler profile: zero-pad to `n_fft`, centered DFT, magnitude square.
pub fn power_profile(x: &CVector, n_fft: usize) -> Result<Vec<f64>> {
    power_profile_with(&Dft::new(n_fft), x)
}

/// Profile computation reusing a prepared `n_fft` plan.
pub fn power_profile_with(dft: &Dft, x: &CVector) -> Result<Vec<f64>> {
    if dft.len() < x.len() {
        return Err(Error::FftTooShort {
            n_fft: dft.len(),
            n: x.len(),
        });
    }
    Ok(dft.image_zero_padded(x)?.power())
}

/// Strict local peaks of a profile under circular topology.
///
/// The profile is padded with its last element on the left and its first on
/// the right; 1-based index `i` is a peak when the padded sequence rises into
/// and falls out of it strictly. Flat-topped plateaus yield no peak, so a
/// constant profile returns the empty list.
pub fn find_circular_peaks(profile: &[f64]) -> Vec<usize> {
    let l = profile.len();
    if l < 3 {
        return Vec::new();
    }
    let mut peaks = Vec::new();
    for i in 0..l {
        let left = profile[(i + l - 1) % l];
        let right = profile[(i + 1) % l];
        if profile[i] > left && profile[i] > right {
            peaks.push(i + 1);
        }
    }
    peaks
}

/// Representative range cells of a power matrix `Z` (`M x N`): the sorted,
/// deduplicated union over Doppler columns of local range peaks.
///
/// The range axis is physical distance, not periodic, so peak finding here is
/// non-circular: the first and last rows compare one-sided against their
/// single neighbor, strictly.
pub fn representative_cells(z: &DMatrix<f64>) -> Vec<usize> {
    let m = z.nrows();
    let n = z.ncols();
    let mut is_rep = vec![false; m];
    if m < 2 {
        return Vec::new();
    }
    for j in 0..n {
        for i in 0..m {
            let up = if i == 0 { true } else { z[(i, j)] > z[(i - 1, j)] };
            let down = if i == m - 1 { true } else { z[(i, j)] > z[(i + 1, j)] };
            if up && down {
                is_rep[i] = true;
            }
        }
    }
    (0..m).filter(|&i| is_rep[i]).map(|i| i + 1).collect()
}
