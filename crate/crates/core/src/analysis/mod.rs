//! Inversion of the detection model: correlation maps, peak values, effective
//! gains and exponential fits to gated traces.

mod correlation;
mod fit;
mod gains;
mod peaks;
mod stream;
mod sweep;

pub use correlation::{correlation_map, pair_correlation, CorrelationMap, RegionSpec};
pub use fit::{fit_exponential, read_trace_csv, write_trace_csv, ExpFit, Window};
pub use gains::{effective_gains, estimate_gains, read_noise_variance, GainEstimate, BOOTSTRAP_RESAMPLES};
pub use peaks::{peak_correlations, PeakPixels, Peaks, PEAK_WINDOW};
pub use stream::{AnalysisOptions, AnalysisReport, StackAnalyzer};
pub use sweep::{sweep_analysis, write_sweep_table, SweepAnalysisConfig, SweepPoint};
