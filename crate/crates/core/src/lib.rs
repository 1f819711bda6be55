//! Follow-the-Perturbed-Leader for non-convex online learning with an offline
//! optimization oracle.
//!
//! The crate provides:
//!
//! * box decision sets, Lipschitz/bounded loss functions and oracle-call
//!   accounting ([`domain`], [`losses`]);
//! * grid-search offline oracles with certified error bounds and
//!   deterministic tie-breaking ([`oracles`]);
//! * FTPL with exponential perturbations and an FTRL baseline
//!   ([`learners`], [`noise`], [`adversary`]);
//! * regret, stability and scaling experiments plus online-to-batch
//!   conversion ([`harness`]);
//! * self-play in zero-sum games and the experts embedding ([`games`]).
//!
//! Grid evaluation and independent trials run on rayon when the `parallel`
//! feature is enabled (the default); [`Execution`] selects the mode at run
//! time and both modes produce bit-identical results.
//!
//! ```
//! use nonconvex_ftpl::{adversary::ReluCycle, BoxDomain, CallCounter, FtplConfig, GridOracle};
//!
//! let counter = CallCounter::new();
//! let mut adversary = ReluCycle::new(BoxDomain::symmetric_interval(), 0.5);
//! let config = FtplConfig::new(0.1, 42);
//! let run = nonconvex_ftpl::ftpl_run(&mut adversary, 16, &config, &GridOracle::new(0.01), &counter).unwrap();
//! assert_eq!(run.counts.offline_calls, 16);
//! ```

pub mod adversary;
pub mod domain;
pub mod error;
pub mod games;
pub mod grid;
pub mod harness;
pub mod learners;
pub mod losses;
pub mod noise;
pub mod oracles;
pub mod par;
pub mod stats;

pub use domain::{evaluate, BoxDomain, CallCounter, CallCounts, LossFunction, NoiseVector};
pub use error::{Error, Result};
pub use learners::{
    ftpl_run, ftpl_run_with_noise, ftpl_step, ftrl_run, schedule_params, FtplConfig, FtrlConfig, NoiseMode,
    OnlineLearner, Schedule, Trajectory,
};
pub use oracles::{oracle_report, GridOracle, OfflineOracle, OracleAnswer, OracleReport, OracleRequest, ScanOracle};
pub use par::Execution;
