//! Quantale-valued behavioural distances for coalgebras.
//!
//! The crate is organised bottom-up:
//!
//! * [`quantale`]: commutative unital quantales with exact rational values;
//! * [`enriched`]: quantale-enriched categories and relations, with the residuation
//!   calculus (Kan extensions, initial structures);
//! * [`functor`]: the finitary set functors coalgebras range over;
//! * [`transport`]: exact LP machinery (general simplex and a transportation-problem
//!   solver, kept as two independent routes);
//! * [`lifting`]: predicate liftings, lax extensions of set functors to quantale-valued
//!   relations, and Kantorovich liftings/extensions;
//! * [`behaviour`]: coalgebras, the greatest-fixpoint behavioural distance, simulations
//!   and classical two-valued oracles;
//! * [`logic`]: the quantitative modal logic, its parser and logical distances;
//! * [`propcheck`]: law checkers producing machine-readable reports;
//! * [`sysspec`] / [`cli`]: file formats and the `qk` command-line tool.

pub mod behaviour;
pub mod cli;
pub mod enriched;
pub mod error;
pub mod functor;
pub mod lifting;
pub mod logic;
pub mod propcheck;
pub mod quantale;
pub mod sysspec;
pub mod transport;

pub use error::{Error, Result};
pub use quantale::{QValue, Quantale, QuantaleKind, Rat};
