//! Learning in the measurement domain: synthetic sparse tasks, sensing
//! operators, isometry estimates, and the compression sweep.

mod bounds;
mod excess;
mod inner;
mod rip;
mod sensing;
mod sweep;
mod task;

pub use bounds::{dg_learning_gap_term, dg_learning_measurement_bound, GapTermInputs};
pub use excess::{excess_risk_check, ExcessRiskConfig, ExcessRiskReport};
pub use inner::{
    combination_inner_product_check, inner_product_preservation_check, Combination,
    CombinationCheck, InnerProductCheck,
};
pub use rip::{
    estimate_rip_delta, rip_deviation_on_support, rip_deviation_on_supports, RipEstimate, RipMode,
};
pub use sensing::{SensingOperator, SensingSource};
pub use sweep::{
    run_compress_sweep, scaled_planted, spearman, write_plot_csv, write_runs_csv, SensingFamily,
    Summary, SweepConfig, SweepPoint, SweepReport, SweepRun,
};
pub use task::{draw_training_set, generate_task, SyntheticTask, TaskConfig};
