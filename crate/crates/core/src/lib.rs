//! Transmit filter design for the Gaussian MIMO wiretap channel under
//! mean-squared-error secrecy constraints, together with Monte Carlo
//! validation of the resulting designs.
//!
//! The legitimate receiver is always zero-forcing. Against a zero-forcing
//! eavesdropper the optimum comes from a one-dimensional concave dual
//! ([`design_zf`]); against a Wiener eavesdropper it follows one of three
//! regimes ([`design_wiener_eve`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod channel;
pub mod design_wiener_eve;
pub mod design_zf;
pub mod error;
pub mod filters;
pub mod linalg;
pub mod montecarlo;
pub mod uncertainty;

pub use channel::{ChannelStats, WiretapScenario, WishartConvention};
pub use design_zf::{DesignSolution, Regime};
pub use error::{Error, Result};
pub use filters::{ReceiverKind, TransmitFilter};
pub use linalg::{ComplexMatrix, HermitianPD, SimDiag};
