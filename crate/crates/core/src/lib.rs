//! Road-weather aware personalized routing.
//!
//! Station readings are mapped to unit weights, fused into per-segment
//! weight vectors (length, traffic, weather, events) and routed over with
//! a driver's preference vector.

pub mod api;
pub mod error;
pub mod fusion;
pub mod geo;
pub mod graph;
pub mod ingest;
pub mod pipeline;
pub mod router;
pub mod weights;

pub use error::Error;
