//! Sweeps, reports and file outputs built on the numerical kernels.

pub mod config;
pub mod linear;
pub mod output;
pub mod suite;
pub mod sweep;

pub use config::{ExperimentConfig, ExperimentKind, Rule};
pub use linear::{run_linear_part_report, LinearPartReport, LinearPartRow};
pub use output::{emit_outputs, git_describe, ExperimentResult, ResultsFile, Summary};
pub use suite::{run_lambda_experiment, run_verification_suite, LambdaReport, SuiteReport};
pub use sweep::{run_rate_sweep, run_tail_sweep, RateRecord, SlopeFit, SweepResult, TailFit, TailRow};
