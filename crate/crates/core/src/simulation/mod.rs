//! Scenario generators, accuracy measures and replication studies.

pub mod metrics;
pub mod scenario;
pub mod study;

pub use metrics::{hits_false_positives, mse, relative_mse, RelativeMse};
pub use scenario::{
    gen_correlated_normals, gen_replication, gen_scenario, gen_scenario_with_rng, GeneratedData,
    PollutionMode, ScenarioSpec,
};
pub use study::{
    run_replication, run_study, run_study_with_plan, summarize, MetricSummary, ReplicationFailure,
    ReplicationRecord, StudyReport, METRICS,
};
