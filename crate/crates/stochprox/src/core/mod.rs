//! Problem model: vectors, component oracles, finite sampling distributions,
//! step-size schedules, and the seeded-randomness contract.

mod oracle;
mod rng;
mod schedule;
mod vector;

pub use oracle::{
    make_finite_distribution, sample_component, ComponentDistribution, ComponentPair, DomainTag,
    GradFn, ProxFn, ProxOracle, SmoothOracle, ValueFn,
};
pub use rng::RngStream;
pub use schedule::{validate_schedule, ScheduleClass, StepSchedule};
pub use vector::Vector;
