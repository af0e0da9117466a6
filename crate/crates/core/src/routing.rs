//! Ground routes as segment sequences.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::airport::{AirportModel, ModelError, Point};
use crate::ids::{RunwayId, SegmentId};

/// Ordered sequence of segments a mobile is planned to follow. The first
/// element is the mobile's current position (or the landing threshold for a
/// still-airborne arrival).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Route(Vec<SegmentId>);

/// Display path composed from segment centerlines.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polyline(pub Vec<Point>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RouteError {
    #[error("route is empty")]
    Empty,
    #[error("route references unknown segment {0}")]
    UnknownSegment(SegmentId),
    #[error("route steps from {from} to {to}, which are not neighbors")]
    NotAdjacent { from: SegmentId, to: SegmentId },
    #[error("route repeats segment {0} immediately")]
    ImmediateRepeat(SegmentId),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RoutingError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error("no path from {from} to {to}")]
    NoPath { from: SegmentId, to: SegmentId },
    #[error("position {0} is not on the route")]
    OffRoute(SegmentId),
    #[error("route does not end on a runway")]
    NotADepartureRoute,
    #[error("segment {0} has no centerline")]
    MissingCenterline(SegmentId),
    #[error("runway {runway} has no threshold {threshold}")]
    UnknownThreshold {
        runway: RunwayId,
        threshold: alloc::string::String,
    },
    #[error("{entry} is not an entry of runway {runway}")]
    NotAnEntry { runway: RunwayId, entry: SegmentId },
}

impl Route {
    pub fn new(segments: Vec<SegmentId>) -> Result<Self, RouteError> {
        if segments.is_empty() {
            return Err(RouteError::Empty);
        }
        Ok(Route(segments))
    }

    /// Builds and validates a route against the airport graph.
    pub fn checked(model: &AirportModel, segments: Vec<SegmentId>) -> Result<Self, RouteError> {
        let route = Route::new(segments)?;
        route.validate(model)?;
        Ok(route)
    }

    pub fn single(seg: SegmentId) -> Self {
        Route(alloc::vec![seg])
    }

    pub fn validate(&self, model: &AirportModel) -> Result<(), RouteError> {
        for s in &self.0 {
            if !model.contains_segment(s) {
                return Err(RouteError::UnknownSegment(s.clone()));
            }
        }
        for w in self.0.windows(2) {
            if w[0] == w[1] {
                return Err(RouteError::ImmediateRepeat(w[0].clone()));
            }
            let adjacent = model.neighbors(&w[0]).is_ok_and(|n| n.contains(&w[1]));
            if !adjacent {
                return Err(RouteError::NotAdjacent {
                    from: w[0].clone(),
                    to: w[1].clone(),
                });
            }
        }
        Ok(())
    }

    pub fn segments(&self) -> &[SegmentId] {
        &self.0
    }

    pub fn head(&self) -> &SegmentId {
        &self.0[0]
    }

    pub fn last(&self) -> &SegmentId {
        &self.0[self.0.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the first occurrence of `seg`.
    pub fn position_of(&self, seg: &SegmentId) -> Option<usize> {
        self.0.iter().position(|s| s == seg)
    }

    pub fn contains(&self, seg: &SegmentId) -> bool {
        self.0.contains(seg)
    }

    pub fn into_segments(self) -> Vec<SegmentId> {
        self.0
    }
}

/// Minimum-hop path; among equal-length paths the lexicographically smallest
/// segment sequence wins.
pub fn compute_route(model: &AirportModel, from: &SegmentId, to: &SegmentId) -> Result<Route, RoutingError> {
    shortest_path(model, from, to, |_| true)
}

/// Shortest path restricted to segments accepted by `allow`. `from` and `to`
/// are always allowed.
pub(crate) fn shortest_path(
    model: &AirportModel,
    from: &SegmentId,
    to: &SegmentId,
    allow: impl Fn(&SegmentId) -> bool,
) -> Result<Route, RoutingError> {
    model.segment(from)?;
    model.segment(to)?;
    let usable = |s: &SegmentId| s == from || s == to || allow(s);

    // Hop distance to `to`, then a greedy walk from `from` that always takes
    // the smallest neighbor one hop closer.
    let mut dist: BTreeMap<&SegmentId, usize> = BTreeMap::new();
    let mut queue = VecDeque::new();
    dist.insert(to, 0);
    queue.push_back(to);
    while let Some(cur) = queue.pop_front() {
        let d = dist[cur];
        for n in model.neighbors(cur)? {
            if usable(n) && !dist.contains_key(n) {
                dist.insert(n, d + 1);
                queue.push_back(n);
            }
        }
    }
    let Some(&total) = dist.get(from) else {
        return Err(RoutingError::NoPath {
            from: from.clone(),
            to: to.clone(),
        });
    };

    let mut path = Vec::with_capacity(total + 1);
    let mut cur = from;
    path.push(cur.clone());
    while cur != to {
        let want = dist[cur] - 1;
        cur = model
            .neighbors(cur)?
            .iter()
            .find(|n| dist.get(n) == Some(&want))
            .expect("a neighbor one hop closer exists");
        path.push(cur.clone());
    }
    Ok(Route(path))
}

/// Suffix of `route` starting at the first occurrence of `pos`.
pub fn truncate_to_position(route: &Route, pos: &SegmentId) -> Result<Route, RoutingError> {
    let at = route
        .position_of(pos)
        .ok_or_else(|| RoutingError::OffRoute(pos.clone()))?;
    Ok(Route(route.0[at..].to_vec()))
}

/// Index where the take-off run begins: the maximal runway-only suffix whose
/// segments all share one runway.
pub(crate) fn takeoff_run_start(model: &AirportModel, route: &Route) -> Result<usize, RoutingError> {
    let segs = route.segments();
    let last = model.segment(route.last())?;
    if !last.is_runway() {
        return Err(RoutingError::NotADepartureRoute);
    }
    let mut common: BTreeSet<&RunwayId> = last.runways.iter().collect();
    let mut start = segs.len() - 1;
    while start > 0 {
        let prev = model.segment(&segs[start - 1])?;
        if !prev.is_runway() {
            break;
        }
        let narrowed: BTreeSet<&RunwayId> = common.iter().copied().filter(|r| prev.runways.contains(*r)).collect();
        if narrowed.is_empty() {
            break;
        }
        common = narrowed;
        start -= 1;
    }
    Ok(start)
}

/// The contiguous runway suffix of a departure route.
pub fn takeoff_run(model: &AirportModel, route: &Route) -> Result<Vec<SegmentId>, RoutingError> {
    let start = takeoff_run_start(model, route)?;
    Ok(route.segments()[start..].to_vec())
}

/// The runway a departure route takes off on. When the run lies entirely on an
/// intersection segment the smallest runway id is returned.
pub fn takeoff_runway(model: &AirportModel, route: &Route) -> Result<RunwayId, RoutingError> {
    let start = takeoff_run_start(model, route)?;
    let segs = &route.segments()[start..];
    let first = model.segment(&segs[0])?;
    first
        .runways
        .iter()
        .find(|r| segs.iter().all(|s| model.runways_of(s).any(|x| x == *r)))
        .cloned()
        .ok_or(RoutingError::NotADepartureRoute)
}

/// Concatenated centerlines along the route. Each piece is oriented so it
/// starts where the previous one ended; shared junction points appear once.
pub fn centerline_path(model: &AirportModel, route: &Route) -> Result<Polyline, RoutingError> {
    let mut pieces = Vec::with_capacity(route.len());
    for s in route.segments() {
        let line = model
            .segment(s)?
            .centerline
            .as_ref()
            .filter(|c| c.len() >= 2)
            .ok_or_else(|| RoutingError::MissingCenterline(s.clone()))?;
        pieces.push(line.as_slice());
    }

    let mut out: Vec<Point> = Vec::new();
    for (i, piece) in pieces.iter().enumerate() {
        let forward = if i == 0 {
            match pieces.get(1) {
                // Orient the first piece so that its end is nearest the next piece.
                Some(next) => {
                    let end = piece[piece.len() - 1];
                    let start = piece[0];
                    nearest_endpoint(end, next) <= nearest_endpoint(start, next)
                }
                None => true,
            }
        } else {
            let prev = out[out.len() - 1];
            dist2(prev, piece[0]) <= dist2(prev, piece[piece.len() - 1])
        };
        let mut oriented: Vec<Point> = piece.to_vec();
        if !forward {
            oriented.reverse();
        }
        if out.last() == oriented.first() {
            oriented.remove(0);
        }
        out.extend(oriented);
    }
    Ok(Polyline(out))
}

fn dist2(a: Point, b: Point) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    dx * dx + dy * dy
}

fn nearest_endpoint(p: Point, piece: &[Point]) -> f64 {
    let a = dist2(p, piece[0]);
    let b = dist2(p, piece[piece.len() - 1]);
    if a < b {
        a
    } else {
        b
    }
}

fn runway_direction(model: &AirportModel, runway: &RunwayId, threshold: &str) -> Result<Vec<SegmentId>, RoutingError> {
    let rwy = model.runway(runway)?;
    let end = rwy
        .threshold_end(threshold)
        .ok_or_else(|| RoutingError::UnknownThreshold {
            runway: runway.clone(),
            threshold: threshold.into(),
        })?;
    let mut segs = rwy.segments.clone();
    if end != 0 {
        segs.reverse();
    }
    Ok(segs)
}

/// Default departure route: from `from` along the shortest path to the
/// runway (through `entry` when given, else to the threshold segment) and
/// then down the runway to its far end.
pub fn departure_route(
    model: &AirportModel,
    from: &SegmentId,
    runway: &RunwayId,
    threshold: &str,
    entry: Option<&SegmentId>,
) -> Result<Route, RoutingError> {
    let ordered = runway_direction(model, runway, threshold)?;
    let off_runway = |s: &SegmentId| !ordered.contains(s);

    if let Some(i) = ordered.iter().position(|s| s == from) {
        return Ok(Route(ordered[i..].to_vec()));
    }

    let (mut path, join) = match entry {
        Some(entry) => {
            if ordered.contains(entry) {
                return Err(RoutingError::NotAnEntry {
                    runway: runway.clone(),
                    entry: entry.clone(),
                });
            }
            let neighbors = model.neighbors(entry)?;
            let join = ordered
                .iter()
                .position(|s| neighbors.contains(s))
                .ok_or_else(|| RoutingError::NotAnEntry {
                    runway: runway.clone(),
                    entry: entry.clone(),
                })?;
            let path = shortest_path(model, from, entry, off_runway)?;
            (path.0, join)
        }
        None => {
            let threshold_seg = ordered[0].clone();
            let mut path = shortest_path(model, from, &threshold_seg, off_runway)?.0;
            path.pop();
            (path, 0)
        }
    };
    path.extend(ordered[join..].iter().cloned());
    let route = Route(path);
    route.validate(model)?;
    Ok(route)
}

/// Default arrival route: threshold, down the runway to `exit` (or to the
/// last runway segment with a way off it), then the shortest path to `stand`.
pub fn arrival_route(
    model: &AirportModel,
    runway: &RunwayId,
    threshold: &str,
    exit: Option<&SegmentId>,
    stand: Option<&SegmentId>,
) -> Result<Route, RoutingError> {
    let ordered = runway_direction(model, runway, threshold)?;
    let leaves_runway = |s: &SegmentId| -> Result<Option<SegmentId>, RoutingError> {
        let n = model.neighbors(s)?;
        Ok(n.iter().find(|x| !model.is_runway_segment(x).unwrap_or(true)).cloned())
    };

    let (exit_at, exit_seg) = match exit {
        Some(exit) => {
            let neighbors = model.neighbors(exit)?;
            let at = ordered
                .iter()
                .rposition(|s| neighbors.contains(s))
                .filter(|_| !ordered.contains(exit))
                .ok_or_else(|| RoutingError::NotAnEntry {
                    runway: runway.clone(),
                    entry: exit.clone(),
                })?;
            (at, Some(exit.clone()))
        }
        None => {
            let mut found = (ordered.len() - 1, None);
            for (i, s) in ordered.iter().enumerate().rev() {
                if let Some(x) = leaves_runway(s)? {
                    found = (i, Some(x));
                    break;
                }
            }
            found
        }
    };

    let mut path: Vec<SegmentId> = ordered[..=exit_at].to_vec();
    if let Some(exit_seg) = exit_seg {
        match stand {
            Some(stand) => {
                let taxi = shortest_path(model, &exit_seg, stand, |s| !ordered.contains(s))?;
                path.extend(taxi.0);
            }
            None => path.push(exit_seg),
        }
    }
    let route = Route(path);
    route.validate(model)?;
    Ok(route)
}
