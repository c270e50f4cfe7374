//! Region-of-possible-target-detection identification and the
//! maximum-likelihood Doppler grid.
//!
//! The RPTD of order `n` for a Doppler frequency `F` is the circularly
//! contiguous run of `n` bins, grown from the peak bin of the steering
//! profile, that captures the maximal signal power among windows grown that
//! way. Unknown-Doppler operation substitutes the fine estimate `F^` for `F`
//! verbatim.

use crate::doppler::{dft_image, find_circular_peaks, BinSet};
use crate::error::{Error, Result};
use crate::signal_model::steering_unchecked;

/// Profile `p~_i = |s~_i|^2` of the steering vector for `freq` on the
/// `n`-point centered grid.
fn steering_profile(freq: f64, n: usize) -> Vec<f64> {
    let s = steering_unchecked(freq, n);
    dft_image(&s)
        .expect("even pulse count is validated by callers")
        .power()
}

/// Centered 1-based Doppler bin holding the profile maximum for `freq`:
/// `d_o = round(F N) + N/2 + 1`, wrapped into `1..=N` by DFT periodicity.
pub fn peak_bin(freq: f64, n: usize) -> Result<usize> {
    if !(freq.abs() <= 0.5) {
        return Err(Error::DopplerOutOfRange {
            freq,
            limit: 0.5 + f64::EPSILON,
        });
    }
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::OddLength(n));
    }
    let d_o = (freq * n as f64).round() as i64 + n as i64 / 2 + 1;
    let d_m = if d_o < 1 {
        d_o + n as i64
    } else if d_o > n as i64 {
        d_o - n as i64
    } else {
        d_o
    };
    Ok(d_m as usize)
}

/// An RPTD: `n` circularly contiguous bins, the originating peak bin, and
/// the Doppler frequency (true or estimated) that generated them.
#[derive(Debug, Clone, PartialEq)]
pub struct RptdSet {
    bins: BinSet,
    peak_bin: usize,
    freq: f64,
}

impl RptdSet {
    pub fn bins(&self) -> &BinSet {
        &self.bins
    }

    pub fn peak_bin(&self) -> usize {
        self.peak_bin
    }

    pub fn freq(&self) -> f64 {
        self.freq
    }

    pub fn order(&self) -> usize {
        self.bins.len()
    }
}

/// Computes the RPTD of order `order` for frequency `freq` on an `n`-point
/// grid.
///
/// Starting from the peak bin, the window grows one bin per step, annexing
/// whichever of its two circular boundary neighbors carries the larger
/// steering-profile value; ties annex the lower-index (left) neighbor. The
/// result is returned in circular order from the window's left edge.
pub fn rptd_set(freq: f64, n: usize, order: usize) -> Result<RptdSet> {
    if order < 1 || order > n {
        return Err(Error::InvalidOrder {
            n: order,
            k: n,
            n_min: 1,
        });
    }
    let d_m = peak_bin(freq, n)?;
    let profile = steering_profile(freq, n);
    // 0-based circular window [lo, lo + len)
    let mut lo = d_m - 1;
    let mut len = 1usize;
    for _ in 1..order {
        let left = (lo + n - 1) % n;
        let right = (lo + len) % n;
        if profile[left] >= profile[right] {
            lo = left;
        }
        len += 1;
    }
    let indices: Vec<usize> = (0..len).map(|k| (lo + k) % n + 1).collect();
    Ok(RptdSet {
        bins: BinSet::new(indices, n)?,
        peak_bin: d_m,
        freq,
    })
}

/// Fraction of the total steering power captured by a bin set.
pub fn captured_power_fraction(freq: f64, n: usize, bins: &BinSet) -> f64 {
    let profile = steering_profile(freq, n);
    let total: f64 = profile.iter().sum();
    let captured: f64 = bins.indices().iter().map(|&b| profile[b - 1]).sum();
    captured / total
}

/// Result of the three-point quadratic (parabolic) Doppler interpolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FineEstimate {
    /// Normalized Doppler estimate in [-0.5, 0.5).
    pub freq: f64,
    /// Set when the curvature guard fired and the offset was forced to zero.
    pub degenerate: bool,
}

/// Fine Doppler estimate at a circular local peak of an `N_fft`-point power
/// profile.
///
/// With `p-`, `p0`, `p+` the peak and its circular neighbors, the parabola
/// vertex offset is `delta = 0.5 (p- - p+) / (p- - 2 p0 + p+)`, `|delta| <=
/// 0.5`; the estimate is `(peak_index + delta - (N_fft/2 + 1)) / N_fft`,
/// wrapped into [-0.5, 0.5). A non-concave sample triple cannot occur at a
/// strict peak; the guard returns `delta = 0` flagged.
pub fn fine_doppler_estimate(profile: &[f64], peak_index: usize) -> Result<FineEstimate> {
    let l = profile.len();
    if l < 3 {
        return Err(Error::LengthTooSmall { got: l, min: 3 });
    }
    if peak_index < 1 || peak_index > l {
        return Err(Error::BinOutOfRange {
            bin: peak_index,
            domain: l,
        });
    }
    let i = peak_index - 1;
    let p0 = profile[i];
    let pm = profile[(i + l - 1) % l];
    let pp = profile[(i + 1) % l];
    if !(p0 > pm && p0 > pp) {
        return Err(Error::NotALocalPeak { index: peak_index });
    }
    let curvature = pm - 2.0 * p0 + pp;
    let (delta, degenerate) = if curvature >= 0.0 {
        (0.0, true)
    } else {
        (0.5 * (pm - pp) / curvature, false)
    };
    let fractional_bin = peak_index as f64 + delta;
    let mut freq = (fractional_bin - (l as f64 / 2.0 + 1.0)) / l as f64;
    // wrap into [-0.5, 0.5): estimates from edge peaks alias modulo 1
    freq -= freq.round();
    if freq >= 0.5 {
        freq -= 1.0;
    }
    if freq < -0.5 {
        freq += 1.0;
    }
    Ok(FineEstimate { freq, degenerate })
}

/// One MLD-grid entry: a profile peak position and its fine Doppler estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MldEntry {
    /// 1-based peak index on the `N_fft` profile grid.
    pub peak_index: usize,
    /// Fine Doppler estimate at that peak.
    pub freq: f64,
}

/// The maximum-likelihood Doppler grid: one entry per circular local peak of
/// the profile. An empty peak list (constant profile) yields an empty grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MldGrid {
    pub entries: Vec<MldEntry>,
}

impl MldGrid {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry located at the profile's global maximum, if any peak exists.
    pub fn dominant<'a>(&'a self, profile: &[f64]) -> Option<&'a MldEntry> {
        self.entries
            .iter()
            .max_by(|a, b| profile[a.peak_index - 1].total_cmp(&profile[b.peak_index - 1]))
    }
}

pub fn mld_grid(profile: &[f64]) -> MldGrid {
    let entries = find_circular_peaks(profile)
        .into_iter()
        .filter_map(|peak| {
            fine_doppler_estimate(profile, peak)
                .ok()
                .map(|est| MldEntry {
                    peak_index: peak,
                    freq: est.freq,
                })
        })
        .collect();
    MldGrid { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doppler::power_profile;
    use crate::signal_model::steering_vector;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn peak_bin_formula_cases() {
        assert_eq!(peak_bin(0.0, 64).unwrap(), 33);
        assert_eq!(peak_bin(0.25, 64).unwrap(), 49);
        assert_eq!(peak_bin(-0.5, 8).unwrap(), 1);
        assert_eq!(peak_bin(0.5, 8).unwrap(), 1); // aliases to -0.5
    }

    #[test]
    fn peak_bin_agrees_with_profile_argmax() {
        // exhaustive sweep: d_m must attain the profile maximum, no tolerance
        let n = 64;
        let sweep = 10_000;
        for i in 0..sweep {
            let f = -0.5 + (i as f64 + 0.5) / sweep as f64;
            let d = peak_bin(f, n).unwrap();
            let p = super::steering_profile(f, n);
            let max = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(
                p[d - 1] >= max,
                "f={f}: bin {d} carries {} < max {max}",
                p[d - 1]
            );
        }
    }

    #[test]
    fn on_grid_rptd_of_order_one_captures_everything() {
        let n = 64;
        let f = 5.0 / n as f64;
        let r = rptd_set(f, n, 1).unwrap();
        assert_eq!(r.bins().indices(), &[r.peak_bin()]);
        assert_relative_eq!(captured_power_fraction(f, n, r.bins()), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rptd_contains_peak_and_is_circularly_contiguous() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(31);
        for _ in 0..100 {
            let n = 64;
            let f = rng.gen_range(-0.5..0.5);
            let order = rng.gen_range(1..=n);
            let r = rptd_set(f, n, order).unwrap();
            assert!(r.bins().contains(r.peak_bin()));
            let idx = r.bins().indices();
            for w in idx.windows(2) {
                assert_eq!(w[1], w[0] % n + 1, "not contiguous: {idx:?}");
            }
        }
    }

    #[test]
    fn fig4_off_grid_window_captures_dominant_power() {
        // F = 0.2070 with n = 4 must capture more than 0.8 of the power
        let r = rptd_set(0.2070, 64, 4).unwrap();
        let frac = captured_power_fraction(0.2070, 64, r.bins());
        assert!(frac > 0.8, "captured {frac}");
    }

    #[test]
    fn rptd_beats_any_fixed_window_containing_peak() {
        // exhaustive comparison against all contiguous 4-windows through d_m
        let n = 64;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(37);
        for _ in 0..50 {
            let f = rng.gen_range(-0.5..0.5);
            let r = rptd_set(f, n, 4).unwrap();
            let ours = captured_power_fraction(f, n, r.bins());
            let d0 = r.peak_bin() - 1;
            for shift in 0..4usize {
                let start = (d0 + n - shift) % n;
                let win: Vec<usize> = (0..4).map(|k| (start + k) % n + 1).collect();
                let frac = captured_power_fraction(f, n, &BinSet::new(win, n).unwrap());
                assert!(ours >= frac - 1e-12);
            }
        }
    }

    #[test]
    fn captured_power_monotone_in_order() {
        let n = 32;
        let f = 0.137;
        let mut prev = 0.0;
        for order in 1..=n {
            let r = rptd_set(f, n, order).unwrap();
            let frac = captured_power_fraction(f, n, r.bins());
            assert!(frac + 1e-12 >= prev);
            prev = frac;
        }
        assert_relative_eq!(prev, 1.0, epsilon = 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn rptd_invariants_hold_for_arbitrary_inputs(
            freq in -0.5f64..0.5,
            order in 1usize..=32,
        ) {
            let n = 32;
            let r = rptd_set(freq, n, order).unwrap();
            proptest::prop_assert_eq!(r.order(), order);
            proptest::prop_assert!(r.bins().contains(r.peak_bin()));
            let idx = r.bins().indices();
            for w in idx.windows(2) {
                proptest::prop_assert_eq!(w[1], w[0] % n + 1);
            }
            // captured power never decreases when the window grows
            if order < n {
                let bigger = rptd_set(freq, n, order + 1).unwrap();
                let a = captured_power_fraction(freq, n, r.bins());
                let b = captured_power_fraction(freq, n, bigger.bins());
                proptest::prop_assert!(b + 1e-12 >= a);
            }
        }
    }

    #[test]
    fn fine_estimate_exact_on_parabola() {
        // samples of p(x) = 5 - (x - 7.3)^2 around index 7
        let profile: Vec<f64> = (1..=16)
            .map(|i| 5.0 - (i as f64 - 7.3).powi(2))
            .collect();
        let est = fine_doppler_estimate(&profile, 7).unwrap();
        let expect = (7.3 - 9.0) / 16.0;
        assert_relative_eq!(est.freq, expect, epsilon = 1e-12);
        assert!(!est.degenerate);
    }

    #[test]
    fn fine_estimate_exact_for_on_grid_tone() {
        let n = 64;
        let f = 12.0 / n as f64;
        let s = steering_vector(f, n).unwrap();
        let p = power_profile(&s, 4 * n).unwrap();
        let peaks = find_circular_peaks(&p);
        let peak = *peaks
            .iter()
            .max_by(|&&a, &&b| p[a - 1].total_cmp(&p[b - 1]))
            .unwrap();
        let est = fine_doppler_estimate(&p, peak).unwrap();
        assert_relative_eq!(est.freq, f, epsilon = 1e-12);
    }

    #[test]
    fn fine_estimate_sweep_within_half_oversampled_bin() {
        let n = 64;
        let n_fft = 4 * n;
        let dft = crate::doppler::Dft::new(n_fft);
        let mut worst = 0.0f64;
        for i in 0..1000 {
            let f = -0.49 + 0.98 * (i as f64 + 0.5) / 1000.0;
            let s = steering_vector(f, n).unwrap();
            let p = crate::doppler::power_profile_with(&dft, &s).unwrap();
            let peaks = find_circular_peaks(&p);
            let peak = *peaks
                .iter()
                .max_by(|&&a, &&b| p[a - 1].total_cmp(&p[b - 1]))
                .unwrap();
            let est = fine_doppler_estimate(&p, peak).unwrap();
            let mut err = (est.freq - f).abs();
            err = err.min((err - 1.0).abs());
            worst = worst.max(err);
        }
        assert!(
            worst < 1.0 / (2.0 * n_fft as f64),
            "worst sweep error {worst}"
        );
    }

    #[test]
    fn fine_estimate_rejects_non_peak() {
        let profile = [1.0, 2.0, 3.0, 2.0, 1.0, 0.5];
        assert!(fine_doppler_estimate(&profile, 2).is_err());
        assert!(fine_doppler_estimate(&profile, 3).is_ok());
    }

    #[test]
    fn mld_grid_single_tone_dominant_entry() {
        let n = 64;
        let f = 0.1837;
        let s = steering_vector(f, n).unwrap();
        let p = power_profile(&s, 4 * n).unwrap();
        let grid = mld_grid(&p);
        assert!(!grid.is_empty());
        let dom = grid.dominant(&p).unwrap();
        assert!((dom.freq - f).abs() < 1e-3, "dominant {} vs {f}", dom.freq);
    }

    #[test]
    fn mld_grid_two_tone_separation() {
        // two well-separated tones (> 4/N apart): the two strongest entries
        // land near the true frequencies
        let n = 64;
        let (f1, f2) = (-0.21, 0.246);
        let s1 = steering_vector(f1, n).unwrap();
        let s2 = steering_vector(f2, n).unwrap();
        let x = s1 + s2 * crate::linalg::C64::new(0.9, 0.3);
        let p = power_profile(&x, 4 * n).unwrap();
        let grid = mld_grid(&p);
        assert!(grid.len() >= 2);
        let mut order: Vec<&MldEntry> = grid.entries.iter().collect();
        order.sort_by(|a, b| p[b.peak_index - 1].total_cmp(&p[a.peak_index - 1]));
        let mut top: Vec<f64> = order[..2].iter().map(|e| e.freq).collect();
        top.sort_by(f64::total_cmp);
        assert!((top[0] - f1).abs() < 2e-3);
        assert!((top[1] - f2).abs() < 2e-3);
    }

    #[test]
    fn mld_grid_constant_profile_is_empty() {
        let p = vec![1.0; 32];
        assert!(mld_grid(&p).is_empty());
    }
}
