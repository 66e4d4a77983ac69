//! The drive and response images as one network of `2N` two-species
//! oscillators: Laplacians, linearization about synchronization, transverse
//! stability, and a check that the network form reproduces the field solvers.

mod equivalence;
mod expected;
mod jacobian;
mod laplacian;
mod operator;
mod trajectory;
mod transverse;

pub use equivalence::{verify_network_equivalence, MAX_EQUIVALENCE_NODES};
pub use expected::{expected_laplacian, ExpectedLaplacian};
pub use jacobian::{reaction_jacobian, JacobianMode, Mat2};
pub use laplacian::{build_l1, build_l2, Role, SparseLaplacian};
pub use operator::{assemble_linearized, mat2_mul, CouplingMatrices, LinearOperator, NetOperator};
pub use trajectory::trajectory_exponent;
pub use transverse::{transverse_stability, StabilityOptions, TransverseBasis};
