//! Exact arithmetic in truncated power-series rings over `Z/p^N`.

pub mod hom;
pub mod linsolve;
pub mod series;
pub mod spec;

pub use hom::SeriesHom;
pub use linsolve::{all_quotients, divide_exact, solve, SolutionSet};
pub use series::{mod_inverse, TruncatedSeries};
pub use spec::{Monomial, RingSpec};
