//! Exact velocity-moment arithmetic over `Q(√3, √5)`.

mod poly;
mod q35;
mod tables;

pub use poly::{limit, monomial_moment, poly_moment, VPolynomial};
pub use q35::{rat, Q35};
pub use tables::{verify_closure_tables, ClosureReport, ClosureRow, ACCEPTANCE_SYMBOLS};
