//! Metrics, run aggregation and the benchmark suite.

mod method;
mod metrics;
mod report;
mod suite;

pub use method::Method;
pub use metrics::{mape, mse, Mape, MAPE_EPS};
pub use report::{aggregate, Cell, Metric, MetricsReport, ReportRow, SeedCell, SeedResult};
pub use suite::{
    kernel_models, lstm_direct_models, mi_selection, mlp_models, prepare_seed, run_seed, run_suite, score_horizon, KernelSettings, ModelSettings, PreparedSeed, SuiteConfig,
};
