//! Analytic and empirical detection-performance evaluation: false-alarm and
//! detection probabilities, threshold inversion and approximation, the
//! computational-load model, and Monte Carlo curve estimation.

pub mod analysis;
pub mod fit;
pub mod load;
pub mod monte_carlo;
pub mod quadrature;
pub mod thresholds;

pub use analysis::ScenarioAnalysis;
pub use fit::{
    approx_threshold, approx_threshold_checked, fit_threshold_approx, reference_pfa_grid,
    ApproxThreshold, ThresholdFit,
};
pub use load::{load_gain, reference_table_params, LoadGain, LoadParams};
pub use monte_carlo::{
    DetectionProtocol, MonteCarloOptions,
    binomial_ci_halfwidth, empirical_fa_rates, exact_ddl_covariance, monte_carlo_curve,
    monte_carlo_point, monte_carlo_point_with, CurveRow, DetectionCurve, FaRates, PdEstimate, SweepSpec,
};
pub use quadrature::{integrate, QuadResult};
pub use thresholds::{
    amf_alpha, amf_pfa, amf_threshold, beta_pdf, glr_alpha, glr_threshold, output_sdr,
    output_sdr_mismatched, pd_amf, pd_amf_with_alpha, pd_glr, pd_optimum,
};
