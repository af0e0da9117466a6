//! Static airport description: segments, adjacency and runways.
//!
//! An [`AirportModel`] can only be obtained through validation, so every
//! model in circulation satisfies the structural invariants: references
//! resolve, adjacency is symmetric, runway membership agrees with segment
//! kind and every runway is a contiguous path through the graph.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::ids::{RunwayId, SegmentId};

/// A point in the airport-local plane, in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point(pub f64, pub f64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Runway,
    Taxiway,
    Apron,
    Stand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub id: SegmentId,
    pub kind: SegmentKind,
    #[serde(default)]
    pub neighbors: BTreeSet<SegmentId>,
    /// Runways this segment belongs to; two entries mark a runway intersection.
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub runways: BTreeSet<RunwayId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygon: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centerline: Option<Vec<Point>>,
}

impl Segment {
    pub fn new(id: impl Into<SegmentId>, kind: SegmentKind) -> Self {
        Segment {
            id: id.into(),
            kind,
            neighbors: BTreeSet::new(),
            runways: BTreeSet::new(),
            polygon: None,
            centerline: None,
        }
    }

    pub fn is_runway(&self) -> bool {
        self.kind == SegmentKind::Runway
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Runway {
    pub id: RunwayId,
    /// Segments in threshold-to-threshold order; `thresholds[0]` sits at index 0.
    pub segments: Vec<SegmentId>,
    pub thresholds: [String; 2],
    pub multiple_line_up_authorised: bool,
}

impl Runway {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn index_of(&self, seg: &SegmentId) -> Option<usize> {
        self.segments.iter().position(|s| s == seg)
    }

    /// Index of the runway end that carries the named threshold.
    pub fn threshold_end(&self, threshold: &str) -> Option<usize> {
        if self.thresholds[0] == threshold {
            Some(0)
        } else if self.thresholds[1] == threshold {
            Some(self.segments.len().saturating_sub(1))
        } else {
            None
        }
    }
}

/// Serialized shape of an airport: plain lists, as written in airport files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AirportDocument {
    #[serde(default)]
    pub segments: Vec<Segment>,
    #[serde(default)]
    pub runways: Vec<Runway>,
}

/// One broken invariant found while validating an airport.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptySegmentId,
    EmptyRunwayId,
    DuplicateSegment(SegmentId),
    DuplicateRunway(RunwayId),
    SelfNeighbor(SegmentId),
    DanglingNeighbor {
        segment: SegmentId,
        neighbor: SegmentId,
    },
    AsymmetricAdjacency {
        segment: SegmentId,
        neighbor: SegmentId,
    },
    RunwayKindMismatch(SegmentId),
    DanglingRunwayRef {
        segment: SegmentId,
        runway: RunwayId,
    },
    PolygonTooShort(SegmentId),
    CenterlineTooShort(SegmentId),
    EmptyRunway(RunwayId),
    EmptyThreshold(RunwayId),
    UnknownRunwaySegment {
        runway: RunwayId,
        segment: SegmentId,
    },
    RepeatedRunwaySegment {
        runway: RunwayId,
        segment: SegmentId,
    },
    RunwaySegmentNotMember {
        runway: RunwayId,
        segment: SegmentId,
    },
    RunwaySegmentNotListed {
        runway: RunwayId,
        segment: SegmentId,
    },
    NonContiguousRunway {
        runway: RunwayId,
        from: SegmentId,
        to: SegmentId,
    },
    NonContiguousIntersection {
        first: RunwayId,
        second: RunwayId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            EmptySegmentId => write!(f, "empty segment id"),
            EmptyRunwayId => write!(f, "empty runway id"),
            DuplicateSegment(s) => write!(f, "duplicate segment {s}"),
            DuplicateRunway(r) => write!(f, "duplicate runway {r}"),
            SelfNeighbor(s) => write!(f, "segment {s} lists itself as neighbor"),
            DanglingNeighbor { segment, neighbor } => {
                write!(f, "segment {segment} lists unknown neighbor {neighbor}")
            }
            AsymmetricAdjacency { segment, neighbor } => {
                write!(f, "asymmetric adjacency {segment}/{neighbor}")
            }
            RunwayKindMismatch(s) => {
                write!(f, "segment {s}: kind runway must match a non-empty runway list")
            }
            DanglingRunwayRef { segment, runway } => {
                write!(f, "segment {segment} references unknown runway {runway}")
            }
            PolygonTooShort(s) => write!(f, "segment {s}: polygon needs at least 3 points"),
            CenterlineTooShort(s) => write!(f, "segment {s}: centerline needs at least 2 points"),
            EmptyRunway(r) => write!(f, "runway {r} has no segments"),
            EmptyThreshold(r) => write!(f, "runway {r} has an empty threshold name"),
            UnknownRunwaySegment { runway, segment } => {
                write!(f, "runway {runway} lists unknown segment {segment}")
            }
            RepeatedRunwaySegment { runway, segment } => {
                write!(f, "runway {runway} lists segment {segment} twice")
            }
            RunwaySegmentNotMember { runway, segment } => {
                write!(
                    f,
                    "runway {runway} lists {segment}, which is not a runway segment of {runway}"
                )
            }
            RunwaySegmentNotListed { runway, segment } => {
                write!(
                    f,
                    "segment {segment} claims runway {runway} but is not in its segment list"
                )
            }
            NonContiguousRunway { runway, from, to } => {
                write!(f, "non-contiguous runway {runway}: {from} and {to} are not neighbors")
            }
            NonContiguousIntersection { first, second } => {
                write!(f, "runways {first} and {second} share a non-contiguous set of segments")
            }
        }
    }
}

/// Every invariant violation found in one airport document.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown segment {0}")]
    UnknownSegment(SegmentId),
    #[error("unknown runway {0}")]
    UnknownRunway(RunwayId),
    #[error("segment {segment} is not on runway {runway}")]
    NotOnRunway { runway: RunwayId, segment: SegmentId },
}

/// Validated, immutable airport.
#[derive(Debug, Clone, PartialEq)]
pub struct AirportModel {
    segments: BTreeMap<SegmentId, Segment>,
    runways: BTreeMap<RunwayId, Runway>,
}

impl AirportModel {
    pub fn new(segments: Vec<Segment>, runways: Vec<Runway>) -> Result<Self, ValidationError> {
        let mut violations = Vec::new();

        let mut seg_map = BTreeMap::new();
        for seg in segments {
            if seg.id.as_str().is_empty() {
                violations.push(Violation::EmptySegmentId);
            }
            if seg_map.contains_key(&seg.id) {
                violations.push(Violation::DuplicateSegment(seg.id.clone()));
                continue;
            }
            seg_map.insert(seg.id.clone(), seg);
        }
        let mut rwy_map = BTreeMap::new();
        for rwy in runways {
            if rwy.id.as_str().is_empty() {
                violations.push(Violation::EmptyRunwayId);
            }
            if rwy_map.contains_key(&rwy.id) {
                violations.push(Violation::DuplicateRunway(rwy.id.clone()));
                continue;
            }
            rwy_map.insert(rwy.id.clone(), rwy);
        }

        for seg in seg_map.values() {
            for n in &seg.neighbors {
                if n == &seg.id {
                    violations.push(Violation::SelfNeighbor(seg.id.clone()));
                    continue;
                }
                match seg_map.get(n) {
                    None => violations.push(Violation::DanglingNeighbor {
                        segment: seg.id.clone(),
                        neighbor: n.clone(),
                    }),
                    Some(other) if !other.neighbors.contains(&seg.id) => {
                        violations.push(Violation::AsymmetricAdjacency {
                            segment: seg.id.clone(),
                            neighbor: n.clone(),
                        })
                    }
                    Some(_) => {}
                }
            }
            if seg.is_runway() == seg.runways.is_empty() {
                violations.push(Violation::RunwayKindMismatch(seg.id.clone()));
            }
            for r in &seg.runways {
                match rwy_map.get(r) {
                    None => violations.push(Violation::DanglingRunwayRef {
                        segment: seg.id.clone(),
                        runway: r.clone(),
                    }),
                    Some(rwy) if !rwy.segments.contains(&seg.id) => {
                        violations.push(Violation::RunwaySegmentNotListed {
                            runway: r.clone(),
                            segment: seg.id.clone(),
                        })
                    }
                    Some(_) => {}
                }
            }
            if seg.polygon.as_ref().is_some_and(|p| p.len() < 3) {
                violations.push(Violation::PolygonTooShort(seg.id.clone()));
            }
            if seg.centerline.as_ref().is_some_and(|c| c.len() < 2) {
                violations.push(Violation::CenterlineTooShort(seg.id.clone()));
            }
        }

        for rwy in rwy_map.values() {
            if rwy.segments.is_empty() {
                violations.push(Violation::EmptyRunway(rwy.id.clone()));
            }
            if rwy.thresholds.iter().any(|t| t.is_empty()) {
                violations.push(Violation::EmptyThreshold(rwy.id.clone()));
            }
            let mut seen = BTreeSet::new();
            for s in &rwy.segments {
                if !seen.insert(s) {
                    violations.push(Violation::RepeatedRunwaySegment {
                        runway: rwy.id.clone(),
                        segment: s.clone(),
                    });
                }
                match seg_map.get(s) {
                    None => violations.push(Violation::UnknownRunwaySegment {
                        runway: rwy.id.clone(),
                        segment: s.clone(),
                    }),
                    Some(seg) if !seg.is_runway() || !seg.runways.contains(&rwy.id) => {
                        violations.push(Violation::RunwaySegmentNotMember {
                            runway: rwy.id.clone(),
                            segment: s.clone(),
                        })
                    }
                    Some(_) => {}
                }
            }
            for pair in rwy.segments.windows(2) {
                let adjacent = seg_map
                    .get(&pair[0])
                    .is_some_and(|seg| seg.neighbors.contains(&pair[1]));
                if !adjacent {
                    violations.push(Violation::NonContiguousRunway {
                        runway: rwy.id.clone(),
                        from: pair[0].clone(),
                        to: pair[1].clone(),
                    });
                }
            }
        }

        let rwys: Vec<&Runway> = rwy_map.values().collect();
        for (i, first) in rwys.iter().enumerate() {
            for second in &rwys[i + 1..] {
                if !shares_contiguous_run(first, second) || !shares_contiguous_run(second, first) {
                    violations.push(Violation::NonContiguousIntersection {
                        first: first.id.clone(),
                        second: second.id.clone(),
                    });
                }
            }
        }

        if violations.is_empty() {
            Ok(AirportModel {
                segments: seg_map,
                runways: rwy_map,
            })
        } else {
            Err(ValidationError { violations })
        }
    }

    pub fn from_document(doc: AirportDocument) -> Result<Self, ValidationError> {
        Self::new(doc.segments, doc.runways)
    }

    pub fn to_document(&self) -> AirportDocument {
        AirportDocument {
            segments: self.segments.values().cloned().collect(),
            runways: self.runways.values().cloned().collect(),
        }
    }

    pub fn segment(&self, id: &SegmentId) -> Result<&Segment, ModelError> {
        self.segments
            .get(id)
            .ok_or_else(|| ModelError::UnknownSegment(id.clone()))
    }

    pub fn runway(&self, id: &RunwayId) -> Result<&Runway, ModelError> {
        self.runways
            .get(id)
            .ok_or_else(|| ModelError::UnknownRunway(id.clone()))
    }

    pub fn contains_segment(&self, id: &SegmentId) -> bool {
        self.segments.contains_key(id)
    }

    pub fn segments(&self) -> impl Iterator<Item = &Segment> {
        self.segments.values()
    }

    pub fn runways(&self) -> impl Iterator<Item = &Runway> {
        self.runways.values()
    }

    pub fn neighbors(&self, id: &SegmentId) -> Result<&BTreeSet<SegmentId>, ModelError> {
        self.segment(id).map(|s| &s.neighbors)
    }

    pub fn is_runway_segment(&self, id: &SegmentId) -> Result<bool, ModelError> {
        self.segment(id).map(Segment::is_runway)
    }

    /// Runways a segment belongs to; empty for unknown or non-runway segments.
    pub fn runways_of(&self, id: &SegmentId) -> impl Iterator<Item = &RunwayId> {
        self.segments.get(id).into_iter().flat_map(|s| s.runways.iter())
    }

    /// 0-based position of `seg` in the threshold-to-threshold order of `rwy`.
    pub fn runway_index(&self, rwy: &RunwayId, seg: &SegmentId) -> Result<usize, ModelError> {
        self.runway(rwy)?.index_of(seg).ok_or_else(|| ModelError::NotOnRunway {
            runway: rwy.clone(),
            segment: seg.clone(),
        })
    }
}

/// True when the segments of `a` that also belong to `b` occupy consecutive
/// positions in `a`.
fn shares_contiguous_run(a: &Runway, b: &Runway) -> bool {
    let positions: Vec<usize> = a
        .segments
        .iter()
        .enumerate()
        .filter(|(_, s)| b.segments.contains(s))
        .map(|(i, _)| i)
        .collect();
    positions.windows(2).all(|w| w[1] == w[0] + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    pub(crate) fn seg(id: &str, kind: SegmentKind, neighbors: &[&str], runways: &[&str]) -> Segment {
        Segment {
            id: id.into(),
            kind,
            neighbors: neighbors.iter().map(|n| SegmentId::from(*n)).collect(),
            runways: runways.iter().map(|r| RunwayId::from(*r)).collect(),
            polygon: None,
            centerline: None,
        }
    }

    fn runway(id: &str, segs: &[&str]) -> Runway {
        Runway {
            id: id.into(),
            segments: segs.iter().map(|s| SegmentId::from(*s)).collect(),
            thresholds: ["05".into(), "23".into()],
            multiple_line_up_authorised: false,
        }
    }

    fn nine_segment_runway() -> AirportModel {
        let mut segs = Vec::new();
        let ids: Vec<String> = (1..=9).map(|i| alloc::format!("R{i}")).collect();
        for (i, id) in ids.iter().enumerate() {
            let mut n: Vec<&str> = Vec::new();
            if i > 0 {
                n.push(&ids[i - 1]);
            }
            if i + 1 < ids.len() {
                n.push(&ids[i + 1]);
            }
            if i == 3 {
                n.push("T1");
            }
            segs.push(seg(id, SegmentKind::Runway, &n, &["05/23"]));
        }
        segs.push(seg("T1", SegmentKind::Taxiway, &["R4"], &[]));
        let order: Vec<&str> = ids.iter().map(String::as_str).collect();
        AirportModel::new(segs, vec![runway("05/23", &order)]).unwrap()
    }

    #[test]
    fn minimal_single_taxiway_airport() {
        let model = AirportModel::new(vec![seg("T1", SegmentKind::Taxiway, &[], &[])], vec![]).unwrap();
        assert_eq!(model.segments().count(), 1);
        assert_eq!(model.runways().count(), 0);
    }

    #[test]
    fn asymmetric_adjacency_is_reported() {
        let err = AirportModel::new(
            vec![
                seg("R3", SegmentKind::Taxiway, &["T9"], &[]),
                seg("T9", SegmentKind::Taxiway, &[], &[]),
            ],
            vec![],
        )
        .unwrap_err();
        assert_eq!(err.violations.len(), 1);
        assert_eq!(err.to_string(), "asymmetric adjacency R3/T9");
    }

    #[test]
    fn all_violations_are_collected() {
        let err = AirportModel::new(
            vec![
                seg("A", SegmentKind::Runway, &["B", "Z"], &["09/27"]),
                seg("B", SegmentKind::Taxiway, &["A"], &["09/27"]),
                seg("C", SegmentKind::Runway, &[], &["09/27"]),
            ],
            vec![runway("09/27", &["A", "C"])],
        )
        .unwrap_err();
        let v = &err.violations;
        assert!(v.contains(&Violation::DanglingNeighbor {
            segment: "A".into(),
            neighbor: "Z".into()
        }));
        assert!(v.contains(&Violation::RunwayKindMismatch("B".into())));
        assert!(v.contains(&Violation::RunwaySegmentNotListed {
            runway: "09/27".into(),
            segment: "B".into()
        }));
        assert!(v.contains(&Violation::NonContiguousRunway {
            runway: "09/27".into(),
            from: "A".into(),
            to: "C".into()
        }));
    }

    #[test]
    fn runway_kind_requires_membership() {
        let err = AirportModel::new(vec![seg("R1", SegmentKind::Runway, &[], &[])], vec![]).unwrap_err();
        assert_eq!(err.violations, vec![Violation::RunwayKindMismatch("R1".into())]);
    }

    #[test]
    fn intersections_must_be_contiguous() {
        // Two runways sharing X and Y, which are apart on the first runway.
        let segs = vec![
            seg("X", SegmentKind::Runway, &["M"], &["A", "B"]),
            seg("M", SegmentKind::Runway, &["X", "Y"], &["A"]),
            seg("Y", SegmentKind::Runway, &["M"], &["A", "B"]),
        ];
        let mut b = runway("B", &["X", "Y"]);
        b.id = "B".into();
        let err = AirportModel::new(segs, vec![runway("A", &["X", "M", "Y"]), b]).unwrap_err();
        assert!(err
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NonContiguousIntersection { .. })));
    }

    #[test]
    fn geometry_lengths() {
        let mut t = seg("T1", SegmentKind::Taxiway, &[], &[]);
        t.polygon = Some(vec![Point(0.0, 0.0), Point(1.0, 0.0)]);
        t.centerline = Some(vec![Point(0.0, 0.0)]);
        let err = AirportModel::new(vec![t], vec![]).unwrap_err();
        assert_eq!(
            err.violations,
            vec![
                Violation::PolygonTooShort("T1".into()),
                Violation::CenterlineTooShort("T1".into())
            ]
        );
    }

    #[test]
    fn runway_index_queries() {
        let model = nine_segment_runway();
        let rwy = RunwayId::from("05/23");
        assert_eq!(model.runway_index(&rwy, &"R1".into()), Ok(0));
        assert_eq!(model.runway_index(&rwy, &"R9".into()), Ok(8));
        assert_eq!(
            model.runway_index(&rwy, &"T1".into()),
            Err(ModelError::NotOnRunway {
                runway: rwy.clone(),
                segment: "T1".into()
            })
        );
    }

    #[test]
    fn runway_segment_queries() {
        let model = nine_segment_runway();
        assert_eq!(model.is_runway_segment(&"R4".into()), Ok(true));
        assert_eq!(model.is_runway_segment(&"T1".into()), Ok(false));
        assert_eq!(
            model.is_runway_segment(&"nope".into()),
            Err(ModelError::UnknownSegment("nope".into()))
        );
    }

    #[test]
    fn intersection_segment_is_runway() {
        let segs = vec![
            seg("A1", SegmentKind::Runway, &["X"], &["A"]),
            seg("X", SegmentKind::Runway, &["A1", "B1"], &["A", "B"]),
            seg("B1", SegmentKind::Runway, &["X"], &["B"]),
        ];
        let model = AirportModel::new(segs, vec![runway("A", &["A1", "X"]), runway("B", &["X", "B1"])]).unwrap();
        assert_eq!(model.is_runway_segment(&"X".into()), Ok(true));
        assert_eq!(model.runways_of(&"X".into()).count(), 2);
    }

    #[test]
    fn document_round_trip() {
        let model = nine_segment_runway();
        let again = AirportModel::from_document(model.to_document()).unwrap();
        assert_eq!(model, again);
    }

    #[test]
    fn threshold_ends() {
        let model = nine_segment_runway();
        let rwy = model.runway(&"05/23".into()).unwrap();
        assert_eq!(rwy.threshold_end("05"), Some(0));
        assert_eq!(rwy.threshold_end("23"), Some(8));
        assert_eq!(rwy.threshold_end("17"), None);
    }
}
