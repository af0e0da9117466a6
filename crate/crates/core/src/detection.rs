//! Route-based conflict detection.
//!
//! Two mobiles conflict when there is a runway segment both are cleared for,
//! unless both hold LUP or CRS clearances and approach that segment from the
//! same direction. A LUP clearance additionally checks the not-yet-cleared
//! take-off run against other lined-up aircraft. Conditional clearances are
//! not clearances until [`resolve_conditionals`] lifts the condition.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::airport::AirportModel;
use crate::clearance::{
    apply_clearance, cleared_runway_segments, Clearance, ClearanceError, ClearanceType, Mobile, MobileKind,
};
use crate::ids::{MobileId, RunwayId, SegmentId};
use crate::routing::{takeoff_run, takeoff_runway, Route};
use crate::world::{World, WorldError};

/// Unordered pair of runway clearance types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConflictType {
    LupLup,
    LupCrs,
    LupTof,
    LupLnd,
    CrsCrs,
    CrsTof,
    CrsLnd,
    TofTof,
    TofLnd,
    LndLnd,
}

impl ConflictType {
    pub const ALL: [ConflictType; 10] = [
        ConflictType::LupLup,
        ConflictType::LupCrs,
        ConflictType::LupTof,
        ConflictType::LupLnd,
        ConflictType::CrsCrs,
        ConflictType::CrsTof,
        ConflictType::CrsLnd,
        ConflictType::TofTof,
        ConflictType::TofLnd,
        ConflictType::LndLnd,
    ];

    /// Canonical pair for two runway clearances; `None` if either is NONE.
    pub fn classify(a: ClearanceType, b: ClearanceType) -> Option<ConflictType> {
        use ClearanceType::*;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Some(match (lo, hi) {
            (None, _) | (_, None) => return Option::None,
            (Lup, Lup) => ConflictType::LupLup,
            (Lup, Crs) => ConflictType::LupCrs,
            (Lup, Tof) => ConflictType::LupTof,
            (Lup, Lnd) => ConflictType::LupLnd,
            (Crs, Crs) => ConflictType::CrsCrs,
            (Crs, Tof) => ConflictType::CrsTof,
            (Crs, Lnd) => ConflictType::CrsLnd,
            (Tof, Tof) => ConflictType::TofTof,
            (Tof, Lnd) => ConflictType::TofLnd,
            (Lnd, Lnd) => ConflictType::LndLnd,
            _ => unreachable!("pair is ordered"),
        })
    }

    pub fn clearances(self) -> (ClearanceType, ClearanceType) {
        use ClearanceType::*;
        match self {
            ConflictType::LupLup => (Lup, Lup),
            ConflictType::LupCrs => (Lup, Crs),
            ConflictType::LupTof => (Lup, Tof),
            ConflictType::LupLnd => (Lup, Lnd),
            ConflictType::CrsCrs => (Crs, Crs),
            ConflictType::CrsTof => (Crs, Tof),
            ConflictType::CrsLnd => (Crs, Lnd),
            ConflictType::TofTof => (Tof, Tof),
            ConflictType::TofLnd => (Tof, Lnd),
            ConflictType::LndLnd => (Lnd, Lnd),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ConflictType::LupLup => "LUP/LUP",
            ConflictType::LupCrs => "LUP/CRS",
            ConflictType::LupTof => "LUP/TOF",
            ConflictType::LupLnd => "LUP/LND",
            ConflictType::CrsCrs => "CRS/CRS",
            ConflictType::CrsTof => "CRS/TOF",
            ConflictType::CrsLnd => "CRS/LND",
            ConflictType::TofTof => "TOF/TOF",
            ConflictType::TofLnd => "TOF/LND",
            ConflictType::LndLnd => "LND/LND",
        }
    }

    pub fn parse(s: &str) -> Option<ConflictType> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for ConflictType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ConflictType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ConflictType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        ConflictType::parse(&s).ok_or_else(|| serde::de::Error::custom("unknown conflict type"))
    }
}

/// A detected clearance conflict between two mobiles.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Conflict {
    /// Sorted member ids.
    pub pair: [MobileId; 2],
    #[serde(rename = "type")]
    pub ctype: ConflictType,
    /// Runway segments grounding the conflict.
    #[serde(rename = "segments")]
    pub shared: BTreeSet<SegmentId>,
}

impl Conflict {
    pub fn involves(&self, id: &MobileId) -> bool {
        self.pair.iter().any(|m| m == id)
    }

    pub fn other(&self, id: &MobileId) -> Option<&MobileId> {
        match &self.pair {
            [a, b] if a == id => Some(b),
            [a, b] if b == id => Some(a),
            _ => None,
        }
    }

    pub fn key(&self) -> ([MobileId; 2], ConflictType) {
        (self.pair.clone(), self.ctype)
    }
}

fn sorted_pair(a: &MobileId, b: &MobileId) -> [MobileId; 2] {
    if a <= b {
        [a.clone(), b.clone()]
    } else {
        [b.clone(), a.clone()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Same,
    Different,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Green,
    Red,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeResult {
    pub verdict: Verdict,
    pub conflicts: Vec<Conflict>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DetectionError {
    #[error("segment {0} is not on the route")]
    SegmentNotOnRoute(SegmentId),
    #[error("unknown mobile {0}")]
    UnknownMobile(MobileId),
    #[error("{mobile}: condition names unknown mobile {subject}")]
    UnknownConditionSubject { mobile: MobileId, subject: MobileId },
    #[error(transparent)]
    Clearance(#[from] ClearanceError),
    #[error(transparent)]
    World(#[from] WorldError),
}

/// Whether two routes approach `s` from the same side: equal predecessors.
/// A route that starts at `s` has no predecessor; then equal successors mean
/// opposite traversal and anything else is undetermined.
pub fn same_direction(a: &Route, b: &Route, s: &SegmentId) -> Result<Direction, DetectionError> {
    let ia = a
        .position_of(s)
        .ok_or_else(|| DetectionError::SegmentNotOnRoute(s.clone()))?;
    let ib = b
        .position_of(s)
        .ok_or_else(|| DetectionError::SegmentNotOnRoute(s.clone()))?;
    if ia > 0 && ib > 0 {
        return Ok(if a.segments()[ia - 1] == b.segments()[ib - 1] {
            Direction::Same
        } else {
            Direction::Different
        });
    }
    let next_a = a.segments().get(ia + 1);
    let next_b = b.segments().get(ib + 1);
    Ok(match (next_a, next_b) {
        (Some(x), Some(y)) if x == y => Direction::Different,
        _ => Direction::Undetermined,
    })
}

struct Cleared<'a> {
    mobile: &'a Mobile,
    ctype: ClearanceType,
    segments: BTreeSet<SegmentId>,
}

fn cleared_views(world: &World) -> Vec<Cleared<'_>> {
    world
        .mobiles()
        .map(|m| Cleared {
            mobile: m,
            ctype: m.clearance.effective(),
            // Worlds only hold validated mobiles, so this cannot fail.
            segments: cleared_runway_segments(world.model(), m).unwrap_or_default(),
        })
        .collect()
}

type Accumulator = BTreeMap<[MobileId; 2], (ConflictType, BTreeSet<SegmentId>)>;

fn record(acc: &mut Accumulator, a: &Cleared<'_>, b: &Cleared<'_>, shared: BTreeSet<SegmentId>) {
    let Some(ctype) = ConflictType::classify(a.ctype, b.ctype) else {
        return;
    };
    let entry = acc
        .entry(sorted_pair(&a.mobile.id, &b.mobile.id))
        .or_insert_with(|| (ctype, BTreeSet::new()));
    entry.1.extend(shared);
}

fn base_rule(a: &Cleared<'_>, b: &Cleared<'_>) -> BTreeSet<SegmentId> {
    let slow_pair = a.ctype.is_slow() && b.ctype.is_slow();
    a.segments
        .intersection(&b.segments)
        .filter(|s| {
            if !slow_pair {
                return true;
            }
            let dir = same_direction(&a.mobile.route, &b.mobile.route, s).unwrap_or(Direction::Undetermined);
            dir != Direction::Same
        })
        .cloned()
        .collect()
}

/// Take-off runway and heading along it (index order of the take-off run).
fn takeoff_heading(model: &AirportModel, route: &Route) -> Option<(RunwayId, Ordering)> {
    let runway = takeoff_runway(model, route).ok()?;
    let run = takeoff_run(model, route).ok()?;
    let first = model.runway_index(&runway, &run[0]).ok()?;
    let last = model.runway_index(&runway, &run[run.len() - 1]).ok()?;
    match last.cmp(&first) {
        Ordering::Equal => None,
        heading => Some((runway, heading)),
    }
}

fn lup_special_for(world: &World, views: &[Cleared<'_>], a: &Cleared<'_>, acc: &mut Accumulator) {
    if a.ctype != ClearanceType::Lup {
        return;
    }
    let model = world.model();
    let Ok(run) = takeoff_run(model, &a.mobile.route) else {
        return;
    };
    let a_heading = takeoff_heading(model, &a.mobile.route);
    let authorised = a_heading
        .as_ref()
        .and_then(|(r, _)| model.runway(r).ok())
        .is_some_and(|r| r.multiple_line_up_authorised);

    for b in views {
        if b.mobile.id == a.mobile.id || b.ctype != ClearanceType::Lup || b.mobile.kind != MobileKind::Aircraft {
            continue;
        }
        let shared: BTreeSet<SegmentId> = run.iter().filter(|s| b.segments.contains(*s)).cloned().collect();
        if shared.is_empty() {
            continue;
        }
        // Lined up one behind the other for the same take-off direction:
        // allowed where multiple line-up is authorised.
        let same_heading = a_heading.is_some() && a_heading == takeoff_heading(model, &b.mobile.route);
        if authorised && same_heading {
            continue;
        }
        record(acc, a, b, shared);
    }
}

fn finish(acc: Accumulator) -> Vec<Conflict> {
    acc.into_iter()
        .filter(|(_, (_, shared))| !shared.is_empty())
        .map(|(pair, (ctype, shared))| Conflict { pair, ctype, shared })
        .collect()
}

/// All current conflicts, one per pair, ordered by pair.
pub fn detect_conflicts(world: &World) -> Vec<Conflict> {
    let views = cleared_views(world);
    let mut acc = Accumulator::new();
    for (i, a) in views.iter().enumerate() {
        if a.segments.is_empty() {
            continue;
        }
        for b in &views[i + 1..] {
            let shared = base_rule(a, b);
            if !shared.is_empty() {
                record(&mut acc, a, b, shared);
            }
        }
    }
    for a in &views {
        lup_special_for(world, &views, a, &mut acc);
    }
    finish(acc)
}

/// Conflicts from the line-up special case for mobile `a` alone: other
/// lined-up aircraft cleared for any segment of `a`'s take-off run.
pub fn lup_special(world: &World, a: &MobileId) -> Vec<Conflict> {
    let views = cleared_views(world);
    let mut acc = Accumulator::new();
    if let Some(view) = views.iter().find(|v| &v.mobile.id == a) {
        lup_special_for(world, &views, view, &mut acc);
    }
    finish(acc)
}

#[derive(Debug, Clone)]
pub struct Resolution {
    pub world: World,
    /// Mobiles whose condition was lifted, in the order it happened.
    pub upgraded: Vec<MobileId>,
    pub errors: Vec<DetectionError>,
}

/// Lifts every pending condition whose removal creates no conflict with
/// the condition subject, repeating until nothing changes.
pub fn resolve_conditionals(world: &World) -> Resolution {
    let mut current = world.clone();
    let mut upgraded = Vec::new();
    let mut errors = Vec::new();
    let mut reported = BTreeSet::new();

    loop {
        let mut changed = false;
        let pending: Vec<(MobileId, MobileId)> = current
            .mobiles()
            .filter_map(|m| m.clearance.condition.clone().map(|c| (m.id.clone(), c)))
            .collect();
        for (id, subject) in pending {
            if !current.contains(&subject) {
                if reported.insert(id.clone()) {
                    errors.push(DetectionError::UnknownConditionSubject {
                        mobile: id.clone(),
                        subject: subject.clone(),
                    });
                }
                continue;
            }
            let ctype = current.get(&id).expect("listed above").clearance.ctype;
            let Ok(candidate) = current.with_clearance(&id, Clearance::new(ctype)) else {
                continue;
            };
            let pair = sorted_pair(&id, &subject);
            let blocked = detect_conflicts(&candidate).iter().any(|c| c.pair == pair);
            if !blocked {
                current = candidate;
                upgraded.push(id);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Resolution {
        world: current,
        upgraded,
        errors,
    }
}

/// What-if check: would giving `candidate` to `m` put it in a conflict?
/// The world is left untouched.
pub fn probe(world: &World, m: &MobileId, candidate: Clearance) -> Result<ProbeResult, DetectionError> {
    let mobile = world.get(m).ok_or_else(|| DetectionError::UnknownMobile(m.clone()))?;
    let updated = apply_clearance(world.model(), mobile, candidate)?;
    let mut hypothetical = world.clone();
    hypothetical.replace(updated)?;
    let conflicts: Vec<Conflict> = detect_conflicts(&hypothetical)
        .into_iter()
        .filter(|c| c.involves(m))
        .collect();
    let verdict = if conflicts.is_empty() {
        Verdict::Green
    } else {
        Verdict::Red
    };
    Ok(ProbeResult { verdict, conflicts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn route(list: &[&str]) -> Route {
        Route::new(list.iter().map(|s| SegmentId::from(*s)).collect()).unwrap()
    }

    #[test]
    fn classify_is_canonical() {
        use ClearanceType::*;
        assert_eq!(ConflictType::classify(Lnd, Lup), Some(ConflictType::LupLnd));
        assert_eq!(ConflictType::classify(Tof, Tof), Some(ConflictType::TofTof));
        assert_eq!(ConflictType::classify(Crs, Lup), Some(ConflictType::LupCrs));
        assert_eq!(ConflictType::classify(None, Lup), Option::None);
        assert_eq!(ConflictType::LupLnd.to_string(), "LUP/LND");
    }

    #[test]
    fn classify_covers_the_ten_pairs() {
        let runway = [
            ClearanceType::Lup,
            ClearanceType::Crs,
            ClearanceType::Tof,
            ClearanceType::Lnd,
        ];
        let mut seen = BTreeSet::new();
        for a in runway {
            for b in runway {
                let t = ConflictType::classify(a, b).unwrap();
                assert_eq!(t, ConflictType::classify(b, a).unwrap());
                let (x, y) = t.clearances();
                assert!((x, y) == (a, b) || (x, y) == (b, a));
                seen.insert(t);
            }
        }
        assert_eq!(seen.len(), 10);
    }

    #[test]
    fn direction_from_predecessors() {
        let s = SegmentId::from("S");
        let a = route(&["P", "X", "S", "Q"]);
        assert_eq!(same_direction(&a, &route(&["X", "S"]), &s), Ok(Direction::Same));
        assert_eq!(
            same_direction(&a, &route(&["Y", "S", "X"]), &s),
            Ok(Direction::Different)
        );
    }

    #[test]
    fn direction_fallback_on_route_head() {
        let s = SegmentId::from("S");
        assert_eq!(
            same_direction(&route(&["S", "X"]), &route(&["Y", "S", "X"]), &s),
            Ok(Direction::Different)
        );
        assert_eq!(
            same_direction(&route(&["S", "X"]), &route(&["Y", "S", "Z"]), &s),
            Ok(Direction::Undetermined)
        );
        assert_eq!(
            same_direction(&route(&["S"]), &route(&["S"]), &s),
            Ok(Direction::Undetermined)
        );
        assert_eq!(
            same_direction(&route(&["A"]), &route(&["S"]), &s),
            Err(DetectionError::SegmentNotOnRoute(s.clone()))
        );
    }
}
