//! Experiment harness: regret, stability probes, scaling fits and
//! online-to-batch conversion.

pub mod batch;
pub mod regret;
pub mod scaling;
pub mod stability;

pub use batch::{online_to_batch, BatchOutcome};
pub use regret::{compute_regret, ftl_btl_check, FtlBtlCheck, RegretReport};
pub use scaling::{default_horizons, fit_power_law, scaling_fit, ScalingFit, ScalingPoint};
pub use stability::{stability_probe_1d, stability_probe_kd, trajectory_step_gaps, ProbeConfig, StabilityReport};
