//! Link transmission centrality on static networks.
//!
//! The crate builds and preprocesses graphs ([`graph`]), runs SI spreading
//! that records who infected whom ([`diffusion`]), turns the resulting
//! branching trees into per-link centrality ([`centrality`]), computes local
//! tie-strength metrics and link rankings ([`ties`]), and uses those rankings
//! to throttle links in SIR spreading experiments ([`sir`]).

pub mod centrality;
pub mod diffusion;
mod error;
pub mod graph;
pub mod rng;
pub mod sir;
pub mod ties;

pub use error::{Error, Result};
