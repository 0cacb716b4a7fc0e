//! Simulation and optimization toolkit for UAV-mounted fluid-antenna
//! multi-target sensing.
//!
//! The UAV flies at a fixed altitude over `K` ground targets and, in each of
//! `N` slots, transmits a sensing waveform with covariance `R[n]` from `M_t`
//! movable transmit antennas and listens with `M_r` movable receive antennas.
//! The quality metric is the Cramér–Rao bound (CRB) on each target's vertical
//! angle of departure. The library minimizes the average CRB by alternating
//! between three blocks:
//!
//! - the trajectory ([`trajectory`]), via successive concave minorization and
//!   projected gradient ascent,
//! - the per-slot transmit covariance ([`beamform`]), solved in closed form,
//! - the per-slot antenna positions ([`fa_pso`]), via penalty-based particle
//!   swarm optimization.
//!
//! [`ao::run_ao`] orchestrates the loop and [`baselines`] provides the
//! fixed-array comparison schemes. [`experiments`] reproduces the convergence,
//! beampattern, per-target and sweep studies, and [`oracle`] holds brute-force
//! certificates that are independent of the solvers.
//!
//! ```no_run
//! use fluidsense::{baselines::{run_scheme, SchemeId}, scenario::default_scenario};
//!
//! let scenario = default_scenario();
//! let solution = run_scheme(SchemeId::Proposed, &scenario).unwrap();
//! println!("average CRB: {:e} rad^2", solution.report.avg_crb);
//! ```

pub mod ao;
pub mod baselines;
pub mod beamform;
pub mod crb;
pub mod error;
pub mod experiments;
pub mod fa_pso;
pub mod geometry;
pub mod linalg;
pub mod oracle;
pub mod output;
pub mod plot;
pub mod rng;
pub mod scenario;
pub mod signal;
pub mod trajectory;

pub use error::{Error, Result};
pub use num_complex::Complex64;
