//! Seeded random airports and traffic for property and equivalence tests.
//!
//! Airports have one to three straight runways `RWY{i}` of segments
//! `R{i}_{j}`, optionally crossing once at an interior segment `X` shared by
//! runways 0 and 1. Each runway side has a parallel taxiway `P{i}{N|S}` with a
//! stand `S{i}{N|S}`, and entries `E{i}{N|S}{j}` link runway segment `j` to
//! that taxiway. Traffic is built with explicit routes: departures, arrivals,
//! single-segment crossings and idle mobiles, holding any clearance that is
//! valid for their route, including pending conditional ones.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::airport::{AirportModel, Runway, Segment, SegmentKind};
use crate::clearance::{apply_clearance, Clearance, ClearanceType, Mobile, MobileKind};
use crate::ids::{MobileId, SegmentId};
use crate::routing::Route;
use crate::world::World;

pub const SIDES: [char; 2] = ['N', 'S'];

fn rseg(i: usize, j: usize) -> String {
    format!("R{i}_{j}")
}

/// Generator-side description of one runway.
#[derive(Debug, Clone)]
struct Strip {
    segments: Vec<SegmentId>,
    /// (index, side) of each entry.
    entries: Vec<(usize, char)>,
}

impl Strip {
    fn entry_at(&self, index: usize, side: char) -> bool {
        self.entries.contains(&(index, side))
    }
}

/// A random airport plus the layout facts the traffic generator needs.
#[derive(Debug, Clone)]
pub struct Layout {
    pub model: Arc<AirportModel>,
    strips: Vec<Strip>,
}

fn link(segs: &mut [Segment], a: &str, b: &str) {
    for (x, y) in [(a, b), (b, a)] {
        if let Some(s) = segs.iter_mut().find(|s| s.id.as_str() == x) {
            s.neighbors.insert(SegmentId::from(y));
        }
    }
}

pub fn random_airport<R: Rng>(rng: &mut R) -> Layout {
    let n = rng.gen_range(1..=3);
    let lens: Vec<usize> = (0..n).map(|_| rng.gen_range(4..=8)).collect();
    // Interior indices of the shared segment on runways 0 and 1.
    let cross = (n >= 2 && rng.gen_bool(0.5)).then(|| (rng.gen_range(1..lens[0] - 1), rng.gen_range(1..lens[1] - 1)));

    let name = |i: usize, j: usize| -> String {
        match cross {
            Some((a, _)) if i == 0 && j == a => "X".into(),
            Some((_, b)) if i == 1 && j == b => "X".into(),
            _ => rseg(i, j),
        }
    };

    let mut segs: Vec<Segment> = Vec::new();
    let mut runways = Vec::new();
    let mut strips = Vec::new();
    for (i, &len) in lens.iter().enumerate() {
        let ids: Vec<SegmentId> = (0..len).map(|j| SegmentId::from(name(i, j))).collect();
        for id in &ids {
            if !segs.iter().any(|s| &s.id == id) {
                segs.push(Segment::new(id.clone(), SegmentKind::Runway));
            }
            let seg = segs.iter_mut().find(|s| &s.id == id).expect("just added");
            seg.runways.insert(format!("RWY{i}").into());
        }
        runways.push(Runway {
            id: format!("RWY{i}").into(),
            segments: ids.clone(),
            thresholds: [format!("{i}LO"), format!("{i}HI")],
            multiple_line_up_authorised: rng.gen_bool(0.5),
        });
        strips.push(Strip {
            segments: ids,
            entries: Vec::new(),
        });
    }
    for strip in &strips {
        for w in strip.segments.windows(2) {
            link(&mut segs, w[0].as_str(), w[1].as_str());
        }
    }

    let mut slots = Vec::new();
    for (i, strip) in strips.iter().enumerate() {
        for (j, s) in strip.segments.iter().enumerate() {
            if s.as_str() != "X" {
                for side in SIDES {
                    slots.push((i, j, side));
                }
            }
        }
    }
    slots.shuffle(rng);
    let count = rng.gen_range(4..=10).min(slots.len());
    slots.truncate(count);
    slots.sort();

    for i in 0..n {
        for side in SIDES {
            let p = format!("P{i}{side}");
            let stand = format!("S{i}{side}");
            segs.push(Segment::new(p.as_str(), SegmentKind::Taxiway));
            segs.push(Segment::new(stand.as_str(), SegmentKind::Stand));
            link(&mut segs, &p, &stand);
        }
    }
    for &(i, j, side) in &slots {
        let e = format!("E{i}{side}{j}");
        segs.push(Segment::new(e.as_str(), SegmentKind::Taxiway));
        link(&mut segs, &e, strips[i].segments[j].as_str());
        link(&mut segs, &e, &format!("P{i}{side}"));
        strips[i].entries.push((j, side));
    }

    let model = AirportModel::new(segs, runways).expect("generated airports are valid");
    Layout {
        model: Arc::new(model),
        strips,
    }
}

impl Layout {
    fn runway_count(&self) -> usize {
        self.strips.len()
    }

    /// Runway segments of runway `i` from index `from` towards `to`, inclusive.
    fn run(&self, i: usize, from: usize, to: usize) -> Vec<SegmentId> {
        let segs = &self.strips[i].segments;
        if from <= to {
            segs[from..=to].to_vec()
        } else {
            segs[to..=from].iter().rev().cloned().collect()
        }
    }

    fn far_end(&self, i: usize, forward: bool) -> usize {
        if forward {
            self.strips[i].segments.len() - 1
        } else {
            0
        }
    }
}

fn ids(list: Vec<String>) -> Vec<SegmentId> {
    list.into_iter().map(SegmentId::from).collect()
}

/// A departure: taxi to an entry (or start on the runway) and roll to the far end.
fn departure<R: Rng>(rng: &mut R, l: &Layout, id: &MobileId) -> Option<Mobile> {
    let i = rng.gen_range(0..l.runway_count());
    let forward = rng.gen_bool(0.5);
    let end = l.far_end(i, forward);
    let strip = &l.strips[i];
    if rng.gen_bool(0.8) {
        let usable: Vec<(usize, char)> = strip
            .entries
            .iter()
            .copied()
            .filter(|&(j, _)| j.abs_diff(end) >= 1)
            .collect();
        let &(j, side) = usable.choose(rng)?;
        let mut route = match rng.gen_range(0..3) {
            0 => ids(alloc::vec![
                format!("S{i}{side}"),
                format!("P{i}{side}"),
                format!("E{i}{side}{j}")
            ]),
            1 => ids(alloc::vec![format!("P{i}{side}"), format!("E{i}{side}{j}")]),
            _ => ids(alloc::vec![format!("E{i}{side}{j}")]),
        };
        route.extend(l.run(i, j, end));
        Some(on_route(id, MobileKind::Aircraft, route))
    } else {
        let len = strip.segments.len();
        let start = if forward {
            rng.gen_range(0..len - 1)
        } else {
            rng.gen_range(1..len)
        };
        Some(on_route(id, MobileKind::Aircraft, l.run(i, start, end)))
    }
}

/// An arrival: airborne over the threshold or already rolling, vacating at
/// an entry (optionally on to the stand) or at the runway end.
fn arrival<R: Rng>(rng: &mut R, l: &Layout, id: &MobileId) -> Mobile {
    let i = rng.gen_range(0..l.runway_count());
    let forward = rng.gen_bool(0.5);
    let len = l.strips[i].segments.len();
    let threshold = l.far_end(i, !forward);
    let end = l.far_end(i, forward);
    let airborne = rng.gen_bool(0.5);
    let at = if airborne { threshold } else { rng.gen_range(0..len) };
    let ahead = |j: usize| if forward { j >= at } else { j <= at };
    let exits: Vec<(usize, char)> = l.strips[i].entries.iter().copied().filter(|&(j, _)| ahead(j)).collect();

    let mut route;
    match exits.choose(rng).filter(|_| rng.gen_bool(0.7)) {
        Some(&(j, side)) => {
            route = l.run(i, at, j);
            route.push(format!("E{i}{side}{j}").into());
            if rng.gen_bool(0.5) {
                route.push(format!("P{i}{side}").into());
                route.push(format!("S{i}{side}").into());
            }
        }
        None => route = l.run(i, at, end),
    }
    let mut m = on_route(id, MobileKind::Aircraft, route);
    if airborne {
        m.position = None;
    }
    m
}

/// A crossing through a single runway segment between two facing entries.
fn crossing<R: Rng>(rng: &mut R, l: &Layout, id: &MobileId) -> Option<Mobile> {
    let mut options = Vec::new();
    for (i, strip) in l.strips.iter().enumerate() {
        for j in 0..strip.segments.len() {
            if strip.entry_at(j, 'N') && strip.entry_at(j, 'S') {
                options.push((i, j));
            }
        }
    }
    let &(i, j) = options.choose(rng)?;
    let (a, b) = if rng.gen_bool(0.5) { ('N', 'S') } else { ('S', 'N') };
    let mut route = Vec::new();
    if rng.gen_bool(0.5) {
        route.push(format!("P{i}{a}"));
    }
    route.push(format!("E{i}{a}{j}"));
    route.push(String::from(l.strips[i].segments[j].as_str()));
    route.push(format!("E{i}{b}{j}"));
    if rng.gen_bool(0.5) {
        route.push(format!("P{i}{b}"));
    }
    let kind = if rng.gen_bool(0.5) {
        MobileKind::Aircraft
    } else {
        MobileKind::Vehicle
    };
    Some(on_route(id, kind, ids(route)))
}

fn idle<R: Rng>(rng: &mut R, l: &Layout, id: &MobileId) -> Mobile {
    let i = rng.gen_range(0..l.runway_count());
    let side = *SIDES.choose(rng).expect("non-empty");
    let at = if rng.gen_bool(0.5) {
        format!("S{i}{side}")
    } else {
        format!("P{i}{side}")
    };
    on_route(id, MobileKind::Vehicle, ids(alloc::vec![at]))
}

fn on_route(id: &MobileId, kind: MobileKind, segments: Vec<SegmentId>) -> Mobile {
    let route = Route::new(segments).expect("generated routes are non-empty");
    Mobile::new(id.clone(), kind, Some(route.head().clone()), route)
}

/// Picks a clearance for `m` that `apply_clearance` accepts, biased towards
/// runway clearances. Slow clearances are sometimes made conditional on one
/// of `others`.
pub fn random_clearance<R: Rng>(rng: &mut R, model: &AirportModel, m: &Mobile, others: &[MobileId]) -> Clearance {
    let mut types: Vec<ClearanceType> = ClearanceType::ALL
        .iter()
        .copied()
        .filter(|&t| t != ClearanceType::None && apply_clearance(model, m, Clearance::new(t)).is_ok())
        .collect();
    if types.is_empty() || rng.gen_bool(0.2) {
        types.push(ClearanceType::None);
    }
    let ctype = *types.choose(rng).expect("non-empty");
    with_condition(rng, ctype, &m.id, others)
}

fn with_condition<R: Rng>(rng: &mut R, ctype: ClearanceType, id: &MobileId, others: &[MobileId]) -> Clearance {
    let candidates: Vec<&MobileId> = others.iter().filter(|o| *o != id).collect();
    if ctype.is_slow() && rng.gen_bool(0.25) {
        if let Some(subject) = candidates.choose(rng) {
            return Clearance::conditional(ctype, (*subject).clone());
        }
    }
    Clearance::new(ctype)
}

/// `mobiles` random mobiles `M0..` on `layout`, each with a random valid clearance.
pub fn random_traffic<R: Rng>(rng: &mut R, layout: &Layout, mobiles: usize) -> World {
    let names: Vec<MobileId> = (0..mobiles).map(|k| MobileId::from(format!("M{k}"))).collect();
    let mut world = World::new(layout.model.clone());
    for id in &names {
        use ClearanceType::*;
        let (m, allowed) = match rng.gen_range(0..10) {
            0..=3 => (departure(rng, layout, id), &[None, Lup, Tof][..]),
            4..=6 => (Some(arrival(rng, layout, id)), &[None, Lnd][..]),
            7..=8 => (crossing(rng, layout, id), &[None, Crs][..]),
            _ => (Option::None, &[None][..]),
        };
        let mut m = m.unwrap_or_else(|| idle(rng, layout, id));
        let ctype = if m.route.len() == 1 && m.kind == MobileKind::Vehicle {
            None
        } else {
            *allowed.choose(rng).expect("non-empty")
        };
        m.clearance = with_condition(rng, ctype, &m.id, &names);
        world.add(m).expect("generated mobiles are valid");
    }
    world
}

/// A random airport with 2 to 8 mobiles.
pub fn random_world<R: Rng>(rng: &mut R) -> World {
    let layout = random_airport(rng);
    let n = rng.gen_range(2..=8);
    random_traffic(rng, &layout, n)
}
