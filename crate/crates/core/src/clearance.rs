//! Runway clearances and the cleared/planned split of a route.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::airport::{AirportModel, ModelError};
use crate::ids::{MobileId, SegmentId};
use crate::routing::{takeoff_run_start, Route, RouteError, RoutingError};

/// Runway clearance kinds. The derived order puts `None` first and otherwise
/// follows the canonical pair naming order LUP < CRS < TOF < LND.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ClearanceType {
    None,
    Lup,
    Crs,
    Tof,
    Lnd,
}

impl ClearanceType {
    pub const ALL: [ClearanceType; 5] = [
        ClearanceType::None,
        ClearanceType::Lup,
        ClearanceType::Crs,
        ClearanceType::Tof,
        ClearanceType::Lnd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClearanceType::None => "NONE",
            ClearanceType::Lup => "LUP",
            ClearanceType::Crs => "CRS",
            ClearanceType::Tof => "TOF",
            ClearanceType::Lnd => "LND",
        }
    }

    /// LUP and CRS: clearances that do not release a take-off or landing roll.
    pub fn is_slow(self) -> bool {
        matches!(self, ClearanceType::Lup | ClearanceType::Crs)
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for ClearanceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clearance {
    #[serde(rename = "clearance")]
    pub ctype: ClearanceType,
    /// Mobile that must pass first ("behind ..."); the clearance is pending
    /// while this is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<MobileId>,
}

impl Clearance {
    pub const NONE: Clearance = Clearance {
        ctype: ClearanceType::None,
        condition: None,
    };

    pub fn new(ctype: ClearanceType) -> Self {
        Clearance { ctype, condition: None }
    }

    pub fn conditional(ctype: ClearanceType, behind: impl Into<MobileId>) -> Self {
        Clearance {
            ctype,
            condition: Some(behind.into()),
        }
    }

    pub fn is_pending(&self) -> bool {
        self.condition.is_some()
    }

    /// The clearance as seen by detection: a pending conditional counts as none.
    pub fn effective(&self) -> ClearanceType {
        if self.is_pending() {
            ClearanceType::None
        } else {
            self.ctype
        }
    }
}

impl Default for Clearance {
    fn default() -> Self {
        Clearance::NONE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MobileKind {
    Aircraft,
    Vehicle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mobile {
    pub id: MobileId,
    pub kind: MobileKind,
    /// Current segment; `None` while an arrival is still airborne.
    pub position: Option<SegmentId>,
    pub route: Route,
    #[serde(flatten)]
    pub clearance: Clearance,
}

/// Last route index the mobile is cleared for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClearedBoundary {
    NothingCleared,
    Through(usize),
}

impl ClearedBoundary {
    pub fn index(self) -> Option<usize> {
        match self {
            ClearedBoundary::NothingCleared => None,
            ClearedBoundary::Through(i) => Some(i),
        }
    }

    pub fn includes(self, index: usize) -> bool {
        self.index().is_some_and(|b| index <= b)
    }
}

impl Serialize for ClearedBoundary {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.index().serialize(s)
    }
}

/// Why a clearance was refused at entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvalidReason {
    VehicleLineUp,
    VehicleTakeOff,
    VehicleLanding,
    ConditionNotAllowed(ClearanceType),
    ConditionOnSelf,
    NotADeparture,
    NoCrossing,
    NotLanding,
    AirborneNotLanding,
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvalidReason::VehicleLineUp => f.write_str("vehicles cannot line up"),
            InvalidReason::VehicleTakeOff => f.write_str("vehicles cannot take off"),
            InvalidReason::VehicleLanding => f.write_str("vehicles cannot land"),
            InvalidReason::ConditionNotAllowed(c) => write!(f, "condition not allowed on {c}"),
            InvalidReason::ConditionOnSelf => f.write_str("condition names the mobile itself"),
            InvalidReason::NotADeparture => f.write_str("route is not a departure route"),
            InvalidReason::NoCrossing => f.write_str("route does not cross a runway"),
            InvalidReason::NotLanding => f.write_str("mobile is neither airborne nor on the runway"),
            InvalidReason::AirborneNotLanding => f.write_str("airborne mobiles can only be cleared to land"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClearanceError {
    #[error("route contains no runway segment")]
    NoRunwayOnRoute,
    #[error("invalid clearance: {0}")]
    InvalidClearance(InvalidReason),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Broken mobile record invariant.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MobileError {
    #[error("empty mobile id")]
    EmptyId,
    #[error("route: {0}")]
    Route(#[from] RouteError),
    #[error("position {position} is not the route head {head}")]
    PositionNotRouteHead { position: SegmentId, head: SegmentId },
    #[error("airborne route must start on a runway")]
    AirborneOffRunway,
    #[error(transparent)]
    Clearance(#[from] ClearanceError),
}

/// Cleared advisories that do not block the clearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClearanceWarning {
    /// A LUP or TOF whose route crosses another runway before the take-off
    /// run; the crossing segments become cleared too.
    UpstreamRunwayCrossing(Vec<SegmentId>),
}

impl fmt::Display for ClearanceWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClearanceWarning::UpstreamRunwayCrossing(segs) => {
                f.write_str("clearance also covers runway segments before the take-off run:")?;
                for s in segs {
                    write!(f, " {s}")?;
                }
                Ok(())
            }
        }
    }
}

fn runway_flags(model: &AirportModel, route: &Route) -> Result<Vec<bool>, ModelError> {
    route.segments().iter().map(|s| model.is_runway_segment(s)).collect()
}

/// Splits `route` into its cleared prefix and planned suffix for `clr`.
/// Pending conditional clearances clear nothing beyond what NONE clears.
pub fn cleared_boundary(
    model: &AirportModel,
    route: &Route,
    clr: &Clearance,
) -> Result<ClearedBoundary, ClearanceError> {
    let flags = runway_flags(model, route)?;
    let last = flags.len() - 1;
    let first_runway = flags.iter().position(|&r| r);
    let ctype = clr.effective();

    if ctype == ClearanceType::None {
        return Ok(match first_runway {
            None => ClearedBoundary::Through(last),
            Some(0) => ClearedBoundary::NothingCleared,
            Some(i) => ClearedBoundary::Through(i - 1),
        });
    }

    let i = first_runway.ok_or(ClearanceError::NoRunwayOnRoute)?;
    let boundary = match ctype {
        ClearanceType::None => unreachable!(),
        // Up to and onto the take-off runway.
        ClearanceType::Lup => match takeoff_run_start(model, route) {
            Ok(start) => start,
            Err(RoutingError::Model(e)) => return Err(e.into()),
            Err(_) => i,
        },
        ClearanceType::Crs => {
            let run_end = flags[i..].iter().position(|&r| !r).map_or(last, |off| i + off - 1);
            (run_end + 1).min(last)
        }
        ClearanceType::Tof => last,
        ClearanceType::Lnd => flags[i..].iter().position(|&r| !r).map_or(last, |off| i + off),
    };
    Ok(ClearedBoundary::Through(boundary))
}

/// Runway segments the mobile is cleared for.
pub fn cleared_runway_segments(model: &AirportModel, mobile: &Mobile) -> Result<BTreeSet<SegmentId>, ClearanceError> {
    let boundary = cleared_boundary(model, &mobile.route, &mobile.clearance)?;
    let Some(b) = boundary.index() else {
        return Ok(BTreeSet::new());
    };
    if mobile.clearance.effective() == ClearanceType::None {
        return Ok(BTreeSet::new());
    }
    let mut out = BTreeSet::new();
    for s in &mobile.route.segments()[..=b] {
        if model.is_runway_segment(s)? {
            out.insert(s.clone());
        }
    }
    Ok(out)
}

fn route_crosses_runway(flags: &[bool]) -> bool {
    match flags.iter().position(|&r| r) {
        Some(i) => flags[i..].iter().any(|&r| !r),
        None => false,
    }
}

/// Validates `new` against the mobile and returns the updated record.
pub fn apply_clearance(model: &AirportModel, mobile: &Mobile, new: Clearance) -> Result<Mobile, ClearanceError> {
    use ClearanceType::*;
    let invalid = |r| Err(ClearanceError::InvalidClearance(r));

    if let Some(subject) = &new.condition {
        if !new.ctype.is_slow() {
            return invalid(InvalidReason::ConditionNotAllowed(new.ctype));
        }
        if subject == &mobile.id {
            return invalid(InvalidReason::ConditionOnSelf);
        }
    }
    if mobile.kind == MobileKind::Vehicle {
        match new.ctype {
            Lup => return invalid(InvalidReason::VehicleLineUp),
            Tof => return invalid(InvalidReason::VehicleTakeOff),
            Lnd => return invalid(InvalidReason::VehicleLanding),
            None | Crs => {}
        }
    }
    if mobile.position.is_none() && !matches!(new.ctype, None | Lnd) {
        return invalid(InvalidReason::AirborneNotLanding);
    }

    let flags = runway_flags(model, &mobile.route)?;
    match new.ctype {
        None => {}
        Lup | Tof => {
            if !flags[flags.len() - 1] {
                return invalid(InvalidReason::NotADeparture);
            }
        }
        Crs => {
            if !route_crosses_runway(&flags) {
                return invalid(InvalidReason::NoCrossing);
            }
        }
        Lnd => {
            if !flags[0] {
                return invalid(InvalidReason::NotLanding);
            }
        }
    }
    // Conditional clearances must also make sense once the condition lifts.
    cleared_boundary(model, &mobile.route, &Clearance::new(new.ctype))?;

    let mut out = mobile.clone();
    out.clearance = new;
    Ok(out)
}

/// Non-blocking advisories for entering `clr` on `mobile`.
pub fn clearance_warnings(model: &AirportModel, mobile: &Mobile, clr: &Clearance) -> Vec<ClearanceWarning> {
    let mut out = Vec::new();
    if matches!(clr.ctype, ClearanceType::Lup | ClearanceType::Tof) {
        if let Ok(start) = takeoff_run_start(model, &mobile.route) {
            let upstream: Vec<SegmentId> = mobile.route.segments()[..start]
                .iter()
                .filter(|s| model.is_runway_segment(s).unwrap_or(false))
                .cloned()
                .collect();
            if !upstream.is_empty() {
                out.push(ClearanceWarning::UpstreamRunwayCrossing(upstream));
            }
        }
    }
    out
}

impl Mobile {
    pub fn new(id: impl Into<MobileId>, kind: MobileKind, position: Option<SegmentId>, route: Route) -> Self {
        Mobile {
            id: id.into(),
            kind,
            position,
            route,
            clearance: Clearance::NONE,
        }
    }

    pub fn is_airborne(&self) -> bool {
        self.position.is_none()
    }

    /// Checks the record invariants against the airport.
    pub fn validate(&self, model: &AirportModel) -> Result<(), MobileError> {
        if self.id.as_str().is_empty() {
            return Err(MobileError::EmptyId);
        }
        self.route.validate(model)?;
        match &self.position {
            Some(p) if p != self.route.head() => {
                return Err(MobileError::PositionNotRouteHead {
                    position: p.clone(),
                    head: self.route.head().clone(),
                })
            }
            Some(_) => {}
            None => {
                if !model
                    .is_runway_segment(self.route.head())
                    .map_err(ClearanceError::from)?
                {
                    return Err(MobileError::AirborneOffRunway);
                }
                if !matches!(self.clearance.ctype, ClearanceType::None | ClearanceType::Lnd) {
                    return Err(ClearanceError::InvalidClearance(InvalidReason::AirborneNotLanding).into());
                }
            }
        }
        if let Some(subject) = &self.clearance.condition {
            if !self.clearance.ctype.is_slow() {
                return Err(
                    ClearanceError::InvalidClearance(InvalidReason::ConditionNotAllowed(self.clearance.ctype)).into(),
                );
            }
            if subject == &self.id {
                return Err(ClearanceError::InvalidClearance(InvalidReason::ConditionOnSelf).into());
            }
        }
        if self.kind == MobileKind::Vehicle {
            let reason = match self.clearance.ctype {
                ClearanceType::Lup => Some(InvalidReason::VehicleLineUp),
                ClearanceType::Tof => Some(InvalidReason::VehicleTakeOff),
                ClearanceType::Lnd => Some(InvalidReason::VehicleLanding),
                _ => None,
            };
            if let Some(r) = reason {
                return Err(ClearanceError::InvalidClearance(r).into());
            }
        }
        cleared_boundary(model, &self.route, &self.clearance)?;
        Ok(())
    }
}
