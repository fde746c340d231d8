//! Ground state of the quantum Rabi model in the ultrastrong-coupling regime.
//!
//! * [`gvm`]: displaced-frame variational method with second-order
//!   corrections, closed forms for energy and photon number.
//! * [`baselines`]: generalized rotating-wave approximation values.
//! * [`ed`]: exact diagonalization reference in a truncated Fock space.
//! * [`sweep`]: parameter sweeps, figure datasets and CSV/JSON output.
//! * [`checks`]: the acceptance checks, shared by the test suite and the CLI.

pub mod baselines;
pub mod checks;
pub mod ed;
pub mod error;
pub mod gvm;
pub mod model;
pub mod roots;
pub mod specfun;
pub mod sweep;

pub use error::{RabiError, Result};
pub use model::{BasisLabel, Branch, ModelParams};
