//! Route-based detection of conflicting ATC clearances (CATC) on an airport
//! surface.
//!
//! The airport is a graph of atomic segments. Every mobile carries a route
//! (a segment sequence starting at its current position) and at most one
//! runway clearance. A clearance splits the route into a cleared prefix and
//! a planned suffix; two mobiles conflict when both are cleared for the same
//! runway segment, unless both hold "slow" clearances (line-up or crossing)
//! and approach that segment from the same side.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the streaming
//! gateway and the command line live in the `catc` crate.

#![no_std]

extern crate alloc;

pub mod airport;
pub mod clearance;
pub mod detection;
#[cfg(feature = "generate")]
pub mod generate;
mod ids;
pub mod oracle;
pub mod routing;
pub mod sim;
pub mod world;

pub use airport::{AirportDocument, AirportModel, Point, Runway, Segment, SegmentKind};
pub use clearance::{Clearance, ClearanceType, ClearedBoundary, Mobile, MobileKind};
pub use detection::{Conflict, ConflictType, Direction, ProbeResult, Verdict};
pub use ids::{MobileId, RunwayId, SegmentId};
pub use routing::{Polyline, Route};
pub use world::World;
