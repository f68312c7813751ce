//! Polynomial loop invariant generation.
//!
//! A loop whose body is a solvable polynomial map is linearized over the
//! monomials of bounded degree; the eigenvectors of the dual transition
//! matrix are semi-invariants, and their eigenspaces give every polynomial
//! invariant of that degree whose associated eigenvalue is rational.

pub mod algext;
pub mod bench;
pub mod error;
pub mod exactla;
pub mod frontend;
pub mod graph;
pub mod invgen;
pub mod linearize;
pub mod oracle;
pub mod poly;
pub mod report;
pub mod solvability;

pub use error::{Error, Result};
pub use frontend::{parse, pretty_print, run, Program, State};
pub use invgen::{ConcreteInvariant, InvariantFamily, SymbolicInvariant};
pub use linearize::{linearize, linearize_bodies, LinearLoop};
pub use poly::{Monomial, PolyMap, Polynomial, Rational};
pub use report::{analyze, Analysis, Config, Elevation};
