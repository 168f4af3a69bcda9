//! Convergence-rate experiments: named test families, log-log slope fits,
//! graded rate tables and the on-disk report format.

mod experiments;
mod families;
mod fit;
mod report;

pub use experiments::{
    check_projections, default_directions, high_dim_experiment, overall_verdict, powers_of_two, run_experiment,
    thm1_experiment, thm2_experiment, thm3_experiment, thm4_experiment, thm5_experiment, ExperimentConfig,
    ExperimentOverrides, RunOptions, DEFAULT_SEED, DEFAULT_TOL, EXPERIMENTS,
};
pub use families::{bernoulli_loss, family, Family, FAMILY_NAMES};
pub use fit::{fit_slope, SlopeFit};
pub use report::{
    emit_report, read_report_tables, render_svg, write_reports, Band, Check, DistanceMode, ExperimentReport,
    RateTable, TableEntry, Verdict, MAX_ZERO_FRACTION,
};
