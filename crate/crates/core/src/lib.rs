//! Entanglement detection for two-mode continuous-variable states from
//! slices of the joint Wigner function.
//!
//! The crate is `no_std` (with `alloc`) so the numerical core can be embedded
//! anywhere; file formats and the command-line driver live in `wigent-cli`.
//!
//! Conventions: quadratures obey `[x, p] = 2i`, so the vacuum has unit
//! variance and its single-mode Wigner function peaks at `1/(2π)`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod prelude;

pub mod criteria;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod optimize;
pub mod oracle;
pub mod phase;
pub mod quadrature;
pub mod states;
pub mod wigner;

pub use criteria::{CriterionId, CriterionReport};
pub use error::{Error, Result};
pub use fock::FockDensityMatrix;
pub use phase::{PhasePoint, Rect, Region, SymplecticParam, Transform2};
pub use quadrature::{IntegralResult, QuadratureRule, QuadratureSpec};
pub use states::{BellState, CatParams, CatSign, GaussianTwoMode, StateSpec, TmstParams, WernerParams};
pub use wigner::{Envelope, WignerField};
