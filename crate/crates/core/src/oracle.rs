//! Brute-force conflict definitions, evaluated pair by pair from clearances,
//! positions and runway ordering.
//!
//! This module deliberately avoids the cleared-part machinery used by
//! [`crate::detection`]. From each route it recovers only where the mobile
//! joins the runway, where it leaves it and which way it travels, then applies
//! the textual definition of each of the ten conflict types:
//!
//! * LUP/LUP: line-ups from opposing entries at the same runway point; or
//!   line-ups facing each other from opposite ends; or line-ups for the same
//!   take-off direction where multiple line-up is not authorised; or, across
//!   intersecting runways, one aircraft lined up on the other's take-off run.
//! * LUP/CRS, CRS/CRS: same runway point, opposing entries.
//! * LUP/TOF, CRS/TOF: the entry point lies in front of the aircraft taking
//!   off.
//! * LUP/LND, CRS/LND: the entry point lies in front of the landing aircraft
//!   and the lander is not expected to vacate before it.
//! * TOF/TOF, TOF/LND, LND/LND: on the same runway the stretches the two
//!   aircraft will use overlap; on intersecting runways both move towards the
//!   intersection.
//!
//! Still-airborne landers sit behind their threshold, so the whole runway up
//! to their exit is in front of them. An entry that cannot be recovered
//! (mobile already on the runway segment) counts as opposing.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::airport::AirportModel;
use crate::clearance::{ClearanceType, Mobile};
use crate::detection::ConflictType;
use crate::ids::{MobileId, RunwayId, SegmentId};
use crate::world::World;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{mobile}: outside the oracle domain: {reason}")]
pub struct OracleDomainError {
    pub mobile: MobileId,
    pub reason: String,
}

/// How one cleared mobile uses its runway.
#[derive(Debug, Clone)]
enum Usage {
    /// LUP or TOF. `at` is the line-up point or current runway position.
    Departure {
        runway: RunwayId,
        at: usize,
        end: usize,
        entry: Option<SegmentId>,
    },
    Landing {
        runway: RunwayId,
        at: usize,
        exit: usize,
    },
    Crossing {
        runway: RunwayId,
        at: usize,
        entry: Option<SegmentId>,
    },
}

impl Usage {
    fn runway(&self) -> &RunwayId {
        match self {
            Usage::Departure { runway, .. } | Usage::Landing { runway, .. } | Usage::Crossing { runway, .. } => runway,
        }
    }

    /// Runway index where the mobile joins (or currently is on) the runway.
    fn at(&self) -> usize {
        match self {
            Usage::Departure { at, .. } | Usage::Landing { at, .. } | Usage::Crossing { at, .. } => *at,
        }
    }

    /// Index where the mobile stops using the runway.
    fn until(&self) -> usize {
        match self {
            Usage::Departure { end, .. } => *end,
            Usage::Landing { exit, .. } => *exit,
            Usage::Crossing { at, .. } => *at,
        }
    }

    fn entry(&self) -> Option<&SegmentId> {
        match self {
            Usage::Departure { entry, .. } | Usage::Crossing { entry, .. } => entry.as_ref(),
            Usage::Landing { .. } => None,
        }
    }

    /// True when runway index `k` lies in front of the mobile, no further than
    /// the point where it leaves the runway.
    fn ahead(&self, k: usize) -> bool {
        let (from, to) = (self.at(), self.until());
        if from <= to {
            from <= k && k <= to
        } else {
            to <= k && k <= from
        }
    }

    /// +1 when travelling towards higher runway indices, -1 towards lower.
    fn heading(&self) -> Option<i8> {
        match self.until().cmp(&self.at()) {
            core::cmp::Ordering::Greater => Some(1),
            core::cmp::Ordering::Less => Some(-1),
            core::cmp::Ordering::Equal => None,
        }
    }
}

fn domain(mobile: &Mobile, reason: &str) -> OracleDomainError {
    OracleDomainError {
        mobile: mobile.id.clone(),
        reason: reason.into(),
    }
}

fn is_runway(model: &AirportModel, s: &SegmentId) -> bool {
    model.is_runway_segment(s).unwrap_or(false)
}

/// Runway uniquely shared by all given segments.
fn single_runway(model: &AirportModel, segs: &[SegmentId]) -> Option<RunwayId> {
    let mut common: Option<BTreeSet<&RunwayId>> = None;
    for s in segs {
        let here: BTreeSet<&RunwayId> = model.runways_of(s).collect();
        common = Some(match common {
            None => here,
            Some(c) => c.intersection(&here).copied().collect(),
        });
    }
    let common = common?;
    if common.len() == 1 {
        common.into_iter().next().cloned()
    } else {
        None
    }
}

fn usage(model: &AirportModel, mobile: &Mobile, ctype: ClearanceType) -> Result<Usage, OracleDomainError> {
    let segs = mobile.route.segments();
    let first = segs
        .iter()
        .position(|s| is_runway(model, s))
        .ok_or_else(|| domain(mobile, "runway clearance without a runway on the route"))?;
    let run_len = segs[first..].iter().take_while(|s| is_runway(model, s)).count();
    let run = &segs[first..first + run_len];
    let entry = first.checked_sub(1).map(|i| segs[i].clone());

    let runway = single_runway(model, run).ok_or_else(|| domain(mobile, "runway run is not on exactly one runway"))?;
    let index = |s: &SegmentId| model.runway_index(&runway, s).expect("segment is on this runway");

    match ctype {
        ClearanceType::Lup | ClearanceType::Tof => {
            if first + run_len != segs.len() {
                return Err(domain(mobile, "departure route does not end on the runway"));
            }
            let (at, end) = (index(&run[0]), index(&run[run.len() - 1]));
            if at == end {
                return Err(domain(mobile, "take-off run without a direction"));
            }
            Ok(Usage::Departure { runway, at, end, entry })
        }
        ClearanceType::Lnd => {
            if first != 0 {
                return Err(domain(mobile, "landing aircraft not on or above the runway"));
            }
            Ok(Usage::Landing {
                at: index(&run[0]),
                exit: index(&run[run.len() - 1]),
                runway,
            })
        }
        ClearanceType::Crs => {
            if run.len() != 1 || first + run_len == segs.len() {
                return Err(domain(mobile, "crossing must traverse exactly one runway segment"));
            }
            Ok(Usage::Crossing {
                at: index(&run[0]),
                runway,
                entry,
            })
        }
        ClearanceType::None => unreachable!("only cleared mobiles have a usage"),
    }
}

fn opposing(a: Option<&SegmentId>, b: Option<&SegmentId>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x != y,
        _ => true,
    }
}

fn span(u: &Usage) -> (usize, usize) {
    (u.at().min(u.until()), u.at().max(u.until()))
}

/// The runway stretches the two mobiles will use share an index.
fn stretches_overlap(a: &Usage, b: &Usage) -> bool {
    let ((a0, a1), (b0, b1)) = (span(a), span(b));
    a0 <= b1 && b0 <= a1
}

fn converging(model: &AirportModel, a: &Usage, b: &Usage) -> bool {
    let (Ok(ra), Ok(rb)) = (model.runway(a.runway()), model.runway(b.runway())) else {
        return false;
    };
    ra.segments
        .iter()
        .enumerate()
        .any(|(ia, s)| rb.index_of(s).is_some_and(|ib| a.ahead(ia) && b.ahead(ib)))
}

/// The segment where `a` joins its runway lies ahead of `b` (possibly on
/// another runway, through an intersection).
fn joins_ahead(model: &AirportModel, a: &Usage, b: &Usage) -> bool {
    let (Ok(ra), Ok(rb)) = (model.runway(a.runway()), model.runway(b.runway())) else {
        return false;
    };
    rb.index_of(&ra.segments[a.at()]).is_some_and(|ib| b.ahead(ib))
}

fn line_up_pair(model: &AirportModel, a: &Usage, b: &Usage) -> bool {
    if a.runway() != b.runway() {
        return joins_ahead(model, a, b) || joins_ahead(model, b, a);
    }
    if a.at() == b.at() && opposing(a.entry(), b.entry()) {
        return true;
    }
    match (a.heading(), b.heading()) {
        (Some(ha), Some(hb)) if ha != hb => a.ahead(b.at()) && b.ahead(a.at()),
        (Some(_), Some(_)) => !model
            .runway(a.runway())
            .map(|r| r.multiple_line_up_authorised)
            .unwrap_or(false),
        _ => true,
    }
}

fn pair_conflicts(
    model: &AirportModel,
    (ta, a): (ClearanceType, &Usage),
    (tb, b): (ClearanceType, &Usage),
) -> Option<ConflictType> {
    let ctype = ConflictType::classify(ta, tb)?;
    // Orient so that `x` holds the first clearance of the canonical pair.
    let (x, y) = if ta <= tb { (a, b) } else { (b, a) };
    let hit = match ctype {
        ConflictType::LupLup => line_up_pair(model, x, y),
        ConflictType::LupCrs | ConflictType::CrsCrs => {
            x.runway() == y.runway() && x.at() == y.at() && opposing(x.entry(), y.entry())
        }
        ConflictType::LupTof | ConflictType::LupLnd | ConflictType::CrsTof | ConflictType::CrsLnd => {
            joins_ahead(model, x, y)
        }
        ConflictType::TofTof | ConflictType::TofLnd | ConflictType::LndLnd => {
            if x.runway() == y.runway() {
                stretches_overlap(x, y)
            } else {
                converging(model, x, y)
            }
        }
    };
    hit.then_some(ctype)
}

/// Every conflicting pair with its type, sorted by pair.
pub fn oracle_detect(world: &World) -> Result<Vec<([MobileId; 2], ConflictType)>, OracleDomainError> {
    let model = world.model();
    let mut cleared = Vec::new();
    for m in world.mobiles() {
        let ctype = m.clearance.effective();
        if ctype == ClearanceType::None {
            continue;
        }
        cleared.push((m, ctype, usage(model, m, ctype)?));
    }
    let mut out = Vec::new();
    for (i, (ma, ta, ua)) in cleared.iter().enumerate() {
        for (mb, tb, ub) in &cleared[i + 1..] {
            if let Some(ctype) = pair_conflicts(model, (*ta, ua), (*tb, ub)) {
                let pair = if ma.id <= mb.id {
                    [ma.id.clone(), mb.id.clone()]
                } else {
                    [mb.id.clone(), ma.id.clone()]
                };
                out.push((pair, ctype));
            }
        }
    }
    out.sort();
    Ok(out)
}
