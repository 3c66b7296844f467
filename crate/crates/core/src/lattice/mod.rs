//! Lattice and Monte Carlo cubature rules and their exact worst-case errors.

pub(crate) mod dual;
mod korobov;
mod quality;
mod rule;
mod serial;

pub use dual::{dual_lattice, in_dual, rule_dual_lattice, DualLatticeSet};
pub use korobov::{is_prime, korobov_generator, korobov_search, KorobovChoice, TIE_TOLERANCE};
pub use quality::{closed_form_sum, enumerated_sum, worst_case_error, Precision, MAX_CLOSED_FORM_EXPONENT};
pub use rule::{fibonacci_number, CubatureRule, Nodes, Rank1Generator, RuleTag, Weights};
pub use serial::RuleJson;
