//! Simulator and analysis toolkit for imperfect 1-out-of-2 quantum oblivious
//! transfer built on unambiguous state elimination.
//!
//! The toolkit covers four layers:
//!
//! - [`linalg`] / [`rng`]: dense complex matrices, states, eigensolves and
//!   seeded randomness — the substrate for everything else.
//! - [`states`] / [`bounds`]: the protocol's symmetric encoding set, the
//!   measurements acting on it (USE, square-root, Helstrom), and the analytic
//!   cheating-probability bounds in terms of the output-state fidelity.
//! - [`protocol`] / [`cheating`]: Monte Carlo execution of the semi-random OT
//!   protocol (honest and under either party's optimal attack), the generic
//!   framework with its superposition attack, the reduction chain to standard
//!   1-2 OT, and the probabilistic mix with a trivial protocol.
//! - [`circuit`] / [`experiment`]: gate-level preparation of the sender's
//!   entangled cheating state with local-unitary-equivalence verification, and
//!   reanalysis of the bundled experimental count tables with Poisson error
//!   propagation.
//!
//! All randomness flows through named [`rng::SeedStream`]s, so every
//! simulation is reproducible from a single 64-bit seed.

pub mod bounds;
pub mod cheating;
pub mod circuit;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod optim;
pub mod parallel;
pub mod protocol;
pub mod rng;
pub mod states;

pub use error::{Error, Result};

/// The receiver's optimal cheating probability in the example protocol,
/// `(1/4)(1 + 1/sqrt(2))^2 = (3 + 2 sqrt(2))/8`.
pub fn bob_optimal_cheat() -> f64 {
    (3.0 + 2.0 * std::f64::consts::SQRT_2) / 8.0
}

/// The sender's optimal cheating probability in the example protocol.
pub fn alice_optimal_cheat() -> f64 {
    0.75
}
