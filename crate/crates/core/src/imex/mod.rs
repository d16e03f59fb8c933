//! Linear IMEX time stepping, trajectories and their interpolants.

mod initial;
mod run;
mod snapshot;
mod step;

pub use initial::{make_initial, random_smooth, InitialCondition};
pub use run::{
    interpolants, run, run_observed, steps_for, Interpolants, Snapshot, SolverConfig, StepView,
    Trajectory, OVERFLOW_GUARD,
};
pub use snapshot::{
    decode_snapshot, encode_snapshot, read_sidecar, read_snapshot, sidecar_path, write_snapshot,
    SnapshotMeta,
};
pub use step::{imex_step, ImexStepper};
