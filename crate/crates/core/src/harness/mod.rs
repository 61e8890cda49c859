//! Scenarios, Monte Carlo ensembles, output bundles and figure data.

mod bundle;
mod ensemble;
mod figures;
mod scenario;

pub use bundle::{path_file_name, run_scenario, sha256_hex, BundleWriter, ManifestEntry, ScenarioRun};
pub use ensemble::{run_ensemble, EnsembleStats, PathRun, PathVerdict, Prepared, Quantiles};
pub use figures::{emit_figure_data, emit_scenario_figure, Figure, FIG2A_SWEEP};
pub use scenario::{AutoHorizon, EnsembleConfig, Horizon, InitialRule, Scenario, BUILTINS, HORIZON_CAP};
