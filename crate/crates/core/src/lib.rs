//! Numerical laboratory for ring Hamiltonians compiled from reversible
//! Turing machines.
//!
//! The crate turns a reversible Turing machine into a nearest-neighbor
//! Hamiltonian on a ring of qudits, computes exact infinite- and finite-time
//! observable averages over the machine's orbit, builds microcanonical and
//! Gibbs ensembles on the relevant invariant subspaces, and simulates the
//! quantum subroutines (block encodings, polynomial transforms, phase
//! estimation, filtered state preparation) at desk scale, where every result
//! can be checked against a brute-force oracle.
//!
//! Modules follow the pipeline order:
//!
//! * [`tm`]: pair-rule machines, the compiler, layouts, orbits.
//! * [`hamiltonian`]: local terms, orbit-restricted matrices, exact spectra.
//! * [`observables`]: site observables and time averages (four methods).
//! * [`ensembles`]: microcanonical / Gibbs weights, inverse-temperature
//!   solving, the tuned doubled-system expectation.
//! * [`polyapprox`]: certified Chebyshev approximations used by the
//!   simulated algorithms.
//! * [`qsim`]: operator-level simulation of the quantum algorithms.
//! * [`harness`]: decision-problem instances, verdicts, and the corpus.
//! * [`io`]: text formats (machine files, exports, CSV).

pub mod scalar;
pub mod tm;
pub mod hamiltonian;
pub mod observables;
pub mod ensembles;
pub mod polyapprox;
pub mod qsim;
pub mod harness;
pub mod io;

/// Default real scalar used by the CLI and tests.
pub type F = f64;
/// Default complex scalar.
pub type C = num_complex::Complex<F>;

pub use scalar::Real;
