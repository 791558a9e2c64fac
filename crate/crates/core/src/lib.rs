//! BPS structures, wall-crossing automorphisms, canonical flat sections and
//! the Gopakumar-Vafa resummation identities they satisfy.

pub mod coeff;
pub mod error;
pub mod lattice;
pub mod twisted_series;
pub mod bps_automorphism;
pub mod maulik_toda;
pub mod quadrature;
pub mod flat_section;
pub mod gv_partition;
pub mod asymptotics;
pub mod uq_series;

pub use error::{Error, Result};
