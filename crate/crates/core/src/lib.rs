//! Price estimation for constrained multiple-exercise American options.
//!
//! Two complementary estimators work on a mathematical-programming
//! formulation of the option:
//!
//! * a lower estimate from a single-pass lookahead search over
//!   nearest-neighbor step-function strategies ([`spls`]),
//! * an upper estimate from a Frank-Wolfe minimization over conditionally
//!   zero-mean nearest-neighbor martingales ([`nnm`]).
//!
//! Supporting machinery: risk-neutral path simulation ([`models`]), an
//! algebraic option-program layer with builders for the four reference
//! contracts ([`program`]), a self-contained bounded-variable simplex and
//! branch-and-bound solver ([`milp`]), nearest-neighbor bases ([`basis`]),
//! energy-distance and ambiguity diagnostics ([`diagnostics`]), independent
//! reference pricers ([`oracles`]), and hyperparameter search ([`tuner`]).

pub mod basis;
pub mod diagnostics;
pub mod error;
pub mod milp;
pub mod models;
pub mod nnm;
pub mod oracles;
pub mod program;
pub mod report;
pub mod rng;
pub mod spls;
pub mod tuner;

pub use error::{Error, Result};
