//! Small dense semidefinite programming.

mod problem;
mod solver;
mod verify;

pub use problem::{embed_hermitian, HermitianLmi, LmiBlock, LmiEntry, SdpProblem};
pub use solver::{solve, Residuals, SdpOptions, SdpSolution, SdpStatus};
pub use verify::{verify, Verification};
