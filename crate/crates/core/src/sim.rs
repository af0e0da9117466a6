//! Deterministic tick-based surface traffic driven by scenario commands.
//!
//! Each tick `t > 0` first moves traffic (one segment per mobile, never past
//! its cleared boundary), truncates routes, lifts satisfied conditions and
//! re-runs detection. Commands scheduled for `t` are applied afterwards and,
//! if any ran, followed by another evaluation. Every state change is logged
//! as an [`Event`] stamped with the tick and a global sequence number.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::airport::AirportModel;
use crate::clearance::{
    apply_clearance, clearance_warnings, cleared_boundary, Clearance, ClearanceType, Mobile, MobileKind,
};
use crate::detection::{detect_conflicts, resolve_conditionals, Conflict, ConflictType};
use crate::ids::{MobileId, RunwayId, SegmentId};
use crate::routing::{arrival_route, compute_route, departure_route, truncate_to_position, Route, RoutingError};
use crate::world::World;

/// How a scenario names a route.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RouteSpec {
    /// Literal segment list.
    Explicit(Vec<SegmentId>),
    /// Shortest path from the current position.
    To(SegmentId),
    Departure {
        runway: RunwayId,
        threshold: String,
        #[serde(default)]
        entry: Option<SegmentId>,
    },
    Arrival {
        runway: RunwayId,
        threshold: String,
        #[serde(default)]
        exit: Option<SegmentId>,
        #[serde(default)]
        stand: Option<SegmentId>,
    },
}

fn default_true() -> bool {
    true
}

fn default_one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
pub enum Action {
    Spawn {
        mobile: MobileId,
        kind: MobileKind,
        /// Omitted for an airborne arrival.
        #[serde(default)]
        at: Option<SegmentId>,
        route: RouteSpec,
        /// Ticks an airborne arrival holding LND waits before touching down.
        #[serde(default)]
        approach_delay: u32,
        /// Whether the mobile moves on its own.
        #[serde(default = "default_true")]
        auto: bool,
    },
    SetRoute {
        mobile: MobileId,
        route: RouteSpec,
    },
    Clear {
        mobile: MobileId,
        clearance: ClearanceType,
        #[serde(default)]
        condition: Option<MobileId>,
    },
    /// Move regardless of the cleared boundary.
    Advance {
        mobile: MobileId,
        #[serde(default = "default_one")]
        segments: u32,
    },
    /// Surveillance position update to an arbitrary segment.
    Reposition {
        mobile: MobileId,
        at: SegmentId,
    },
    Hold {
        mobile: MobileId,
    },
    Resume {
        mobile: MobileId,
    },
    Touchdown {
        mobile: MobileId,
    },
    Despawn {
        mobile: MobileId,
    },
}

impl Action {
    pub fn mobile(&self) -> &MobileId {
        match self {
            Action::Spawn { mobile, .. }
            | Action::SetRoute { mobile, .. }
            | Action::Clear { mobile, .. }
            | Action::Advance { mobile, .. }
            | Action::Reposition { mobile, .. }
            | Action::Hold { mobile }
            | Action::Resume { mobile }
            | Action::Touchdown { mobile }
            | Action::Despawn { mobile } => mobile,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioCommand {
    pub t: u64,
    #[serde(flatten)]
    pub action: Action,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClearanceSource {
    /// Entered by the controller.
    Command,
    /// Reset to NONE after the mobile left the runway it was cleared for.
    Completed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    ConflictRaised {
        pair: [MobileId; 2],
        #[serde(rename = "type")]
        ctype: ConflictType,
        segments: Vec<SegmentId>,
    },
    ConflictResolved {
        pair: [MobileId; 2],
        #[serde(rename = "type")]
        ctype: ConflictType,
    },
    ConditionUpgraded {
        mobile: MobileId,
        clearance: ClearanceType,
        subject: MobileId,
    },
    /// `from = None` is a touchdown; `to = None` means the mobile left the
    /// surface (took off or despawned).
    MobileMoved {
        mobile: MobileId,
        from: Option<SegmentId>,
        to: Option<SegmentId>,
    },
    ClearanceSet {
        mobile: MobileId,
        clearance: ClearanceType,
        condition: Option<MobileId>,
        source: ClearanceSource,
        #[serde(skip_serializing_if = "Vec::is_empty")]
        warnings: Vec<String>,
    },
    OffRoute {
        mobile: MobileId,
        at: SegmentId,
    },
    Error {
        mobile: Option<MobileId>,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Event {
    pub t: u64,
    pub seq: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Traffic {
    auto: bool,
    held: bool,
    approach_delay: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CommandError {
    #[error("unknown mobile {0}")]
    UnknownMobile(MobileId),
    #[error("mobile {0} already exists")]
    DuplicateMobile(MobileId),
    #[error("{0}")]
    Routing(#[from] RoutingError),
    #[error("{0}")]
    Rejected(String),
}

/// Engine state: the world, per-mobile traffic behaviour, the current
/// conflict set and the queue of scheduled commands.
#[derive(Debug, Clone)]
pub struct Simulator {
    world: World,
    traffic: BTreeMap<MobileId, Traffic>,
    conflicts: Vec<Conflict>,
    scheduled: Vec<ScenarioCommand>,
    next_tick: u64,
    seq: u64,
    reported_subjects: BTreeSet<MobileId>,
}

impl Simulator {
    pub fn new(model: Arc<AirportModel>) -> Self {
        Simulator {
            world: World::new(model),
            traffic: BTreeMap::new(),
            conflicts: Vec::new(),
            scheduled: Vec::new(),
            next_tick: 0,
            seq: 0,
            reported_subjects: BTreeSet::new(),
        }
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn model(&self) -> &AirportModel {
        self.world.model()
    }

    pub fn conflicts(&self) -> &[Conflict] {
        &self.conflicts
    }

    /// Last processed tick (0 before the first).
    pub fn now(&self) -> u64 {
        self.next_tick.saturating_sub(1)
    }

    pub fn next_tick(&self) -> u64 {
        self.next_tick
    }

    /// Queues commands; they run at their tick, or at the next tick if that
    /// is already past. Order among equal ticks is preserved.
    pub fn schedule(&mut self, commands: impl IntoIterator<Item = ScenarioCommand>) {
        self.scheduled.extend(commands);
        self.scheduled.sort_by_key(|c| c.t);
    }

    pub fn pending_commands(&self) -> usize {
        self.scheduled.len()
    }

    fn emit(&mut self, out: &mut Vec<Event>, t: u64, kind: EventKind) {
        out.push(Event { t, seq: self.seq, kind });
        self.seq += 1;
    }

    /// Processes the next tick and returns its events.
    pub fn tick(&mut self) -> Vec<Event> {
        let t = self.next_tick;
        self.next_tick += 1;
        let mut out = Vec::new();
        if t > 0 {
            self.move_traffic(t, &mut out);
            self.evaluate(t, &mut out);
        }
        let due = self.scheduled.iter().take_while(|c| c.t <= t).count();
        if due > 0 {
            let commands: Vec<ScenarioCommand> = self.scheduled.drain(..due).collect();
            for cmd in commands {
                self.run_action(t, cmd.action, &mut out);
            }
            self.evaluate(t, &mut out);
        }
        out
    }

    /// Applies one command immediately, stamped with the current tick, and
    /// re-evaluates.
    pub fn execute(&mut self, action: Action) -> Vec<Event> {
        let t = self.now();
        let mut out = Vec::new();
        self.run_action(t, action, &mut out);
        self.evaluate(t, &mut out);
        out
    }

    fn run_action(&mut self, t: u64, action: Action, out: &mut Vec<Event>) {
        let mobile = action.mobile().clone();
        if let Err(e) = self.apply_action(t, action, out) {
            self.emit(
                out,
                t,
                EventKind::Error {
                    mobile: Some(mobile),
                    reason: e.to_string(),
                },
            );
        }
    }

    fn mobile(&self, id: &MobileId) -> Result<&Mobile, CommandError> {
        self.world
            .get(id)
            .ok_or_else(|| CommandError::UnknownMobile(id.clone()))
    }

    fn build_route(&self, start: Option<&SegmentId>, spec: &RouteSpec) -> Result<Route, CommandError> {
        let model = self.world.model();
        let route = match spec {
            RouteSpec::Explicit(segs) => Route::checked(model, segs.clone()).map_err(RoutingError::from)?,
            RouteSpec::To(to) => {
                let from = start.ok_or_else(|| {
                    CommandError::Rejected("an airborne mobile needs an explicit or arrival route".into())
                })?;
                compute_route(model, from, to)?
            }
            RouteSpec::Departure {
                runway,
                threshold,
                entry,
            } => {
                let from = start.ok_or_else(|| CommandError::Rejected("an airborne mobile cannot depart".into()))?;
                departure_route(model, from, runway, threshold, entry.as_ref())?
            }
            RouteSpec::Arrival {
                runway,
                threshold,
                exit,
                stand,
            } => {
                let route = arrival_route(model, runway, threshold, exit.as_ref(), stand.as_ref())?;
                match start {
                    Some(at) => truncate_to_position(&route, at)?,
                    None => route,
                }
            }
        };
        if let Some(at) = start {
            if route.head() != at {
                return Err(CommandError::Rejected(alloc::format!("route must start at {at}")));
            }
        }
        Ok(route)
    }

    fn replace(&mut self, mobile: Mobile) -> Result<(), CommandError> {
        self.world
            .replace(mobile)
            .map(|_| ())
            .map_err(|e| CommandError::Rejected(e.to_string()))
    }

    fn apply_action(&mut self, t: u64, action: Action, out: &mut Vec<Event>) -> Result<(), CommandError> {
        match action {
            Action::Spawn {
                mobile,
                kind,
                at,
                route,
                approach_delay,
                auto,
            } => {
                if self.world.contains(&mobile) {
                    return Err(CommandError::DuplicateMobile(mobile));
                }
                let route = self.build_route(at.as_ref(), &route)?;
                let m = Mobile::new(mobile.clone(), kind, at, route);
                self.world.add(m).map_err(|e| CommandError::Rejected(e.to_string()))?;
                self.traffic.insert(
                    mobile,
                    Traffic {
                        auto,
                        held: false,
                        approach_delay,
                    },
                );
            }
            Action::SetRoute { mobile, route } => {
                let mut m = self.mobile(&mobile)?.clone();
                let start = m.position.clone();
                m.route = self.build_route(start.as_ref(), &route)?;
                self.replace(m)?;
            }
            Action::Clear {
                mobile,
                clearance,
                condition,
            } => {
                let m = self.mobile(&mobile)?;
                let clr = Clearance {
                    ctype: clearance,
                    condition,
                };
                let updated = apply_clearance(self.world.model(), m, clr.clone())
                    .map_err(|e| CommandError::Rejected(e.to_string()))?;
                let warnings = clearance_warnings(self.world.model(), m, &clr)
                    .iter()
                    .map(ToString::to_string)
                    .collect();
                self.replace(updated)?;
                self.reported_subjects.remove(&mobile);
                self.emit(
                    out,
                    t,
                    EventKind::ClearanceSet {
                        mobile,
                        clearance: clr.ctype,
                        condition: clr.condition,
                        source: ClearanceSource::Command,
                        warnings,
                    },
                );
            }
            Action::Advance { mobile, segments } => {
                for _ in 0..segments {
                    let m = self.mobile(&mobile)?;
                    if m.is_airborne() {
                        self.touch_down(t, &mobile, out)?;
                    } else if m.route.len() > 1 {
                        let to = m.route.segments()[1].clone();
                        self.move_to(t, &mobile, to, out)?;
                    } else {
                        return Err(CommandError::Rejected("already at the end of its route".into()));
                    }
                }
            }
            Action::Reposition { mobile, at } => {
                let m = self.mobile(&mobile)?;
                if !m.route.contains(&at) {
                    if let Some(tr) = self.traffic.get_mut(&mobile) {
                        tr.held = true;
                    }
                    self.emit(out, t, EventKind::OffRoute { mobile, at });
                    return Ok(());
                }
                if m.position.as_ref() != Some(&at) {
                    self.move_to(t, &mobile, at, out)?;
                }
            }
            Action::Hold { mobile } => {
                self.mobile(&mobile)?;
                if let Some(tr) = self.traffic.get_mut(&mobile) {
                    tr.held = true;
                }
            }
            Action::Resume { mobile } => {
                self.mobile(&mobile)?;
                if let Some(tr) = self.traffic.get_mut(&mobile) {
                    tr.held = false;
                }
            }
            Action::Touchdown { mobile } => {
                if !self.mobile(&mobile)?.is_airborne() {
                    return Err(CommandError::Rejected("not airborne".into()));
                }
                self.touch_down(t, &mobile, out)?;
            }
            Action::Despawn { mobile } => {
                let m = self
                    .world
                    .remove(&mobile)
                    .ok_or_else(|| CommandError::UnknownMobile(mobile.clone()))?;
                self.traffic.remove(&mobile);
                self.emit(
                    out,
                    t,
                    EventKind::MobileMoved {
                        mobile,
                        from: m.position,
                        to: None,
                    },
                );
            }
        }
        Ok(())
    }

    fn touch_down(&mut self, t: u64, id: &MobileId, out: &mut Vec<Event>) -> Result<(), CommandError> {
        let mut m = self.mobile(id)?.clone();
        let head = m.route.head().clone();
        m.position = Some(head.clone());
        self.replace(m)?;
        self.emit(
            out,
            t,
            EventKind::MobileMoved {
                mobile: id.clone(),
                from: None,
                to: Some(head),
            },
        );
        Ok(())
    }

    /// Moves `id` to `to` and truncates its route. A runway clearance ends
    /// with the move that leaves no runway segment on the route.
    fn move_to(&mut self, t: u64, id: &MobileId, to: SegmentId, out: &mut Vec<Event>) -> Result<(), CommandError> {
        let mut m = self.mobile(id)?.clone();
        let from = m.position.clone();
        m.route = truncate_to_position(&m.route, &to)?;
        m.position = Some(to.clone());
        let model = self.world.model();
        let completed = m.clearance.ctype != ClearanceType::None
            && !m
                .route
                .segments()
                .iter()
                .any(|s| model.is_runway_segment(s).unwrap_or(false));
        if completed {
            m.clearance = Clearance::NONE;
        }
        self.replace(m)?;
        self.emit(
            out,
            t,
            EventKind::MobileMoved {
                mobile: id.clone(),
                from,
                to: Some(to),
            },
        );
        if completed {
            self.emit(
                out,
                t,
                EventKind::ClearanceSet {
                    mobile: id.clone(),
                    clearance: ClearanceType::None,
                    condition: None,
                    source: ClearanceSource::Completed,
                    warnings: Vec::new(),
                },
            );
        }
        Ok(())
    }

    fn move_traffic(&mut self, t: u64, out: &mut Vec<Event>) {
        let ids: Vec<MobileId> = self.world.ids().cloned().collect();
        for id in ids {
            let Some(tr) = self.traffic.get(&id).cloned() else {
                continue;
            };
            if !tr.auto || tr.held {
                continue;
            }
            let m = self.world.get(&id).expect("id listed above");
            let effective = m.clearance.effective();
            if m.is_airborne() {
                if effective != ClearanceType::Lnd {
                    continue;
                }
                if tr.approach_delay == 0 {
                    if let Err(e) = self.touch_down(t, &id, out) {
                        self.emit(
                            out,
                            t,
                            EventKind::Error {
                                mobile: Some(id),
                                reason: e.to_string(),
                            },
                        );
                    }
                } else if let Some(tr) = self.traffic.get_mut(&id) {
                    tr.approach_delay -= 1;
                }
                continue;
            }
            if m.route.len() == 1 {
                let on_runway = self.world.model().is_runway_segment(m.route.head()).unwrap_or(false);
                if effective == ClearanceType::Tof && on_runway {
                    let from = m.position.clone();
                    self.world.remove(&id);
                    self.traffic.remove(&id);
                    self.emit(
                        out,
                        t,
                        EventKind::MobileMoved {
                            mobile: id,
                            from,
                            to: None,
                        },
                    );
                }
                continue;
            }
            let Ok(boundary) = cleared_boundary(self.world.model(), &m.route, &m.clearance) else {
                continue;
            };
            if boundary.includes(1) {
                let to = m.route.segments()[1].clone();
                if let Err(e) = self.move_to(t, &id, to, out) {
                    self.emit(
                        out,
                        t,
                        EventKind::Error {
                            mobile: Some(id),
                            reason: e.to_string(),
                        },
                    );
                }
            }
        }
    }

    /// Lifts satisfied conditions, detects conflicts and logs the difference
    /// from the previous conflict set.
    fn evaluate(&mut self, t: u64, out: &mut Vec<Event>) {
        let resolution = resolve_conditionals(&self.world);
        for id in &resolution.upgraded {
            let before = self.world.get(id).expect("upgraded mobiles exist");
            let subject = before.clearance.condition.clone().expect("was pending");
            let clearance = before.clearance.ctype;
            self.emit(
                out,
                t,
                EventKind::ConditionUpgraded {
                    mobile: id.clone(),
                    clearance,
                    subject,
                },
            );
        }
        for err in &resolution.errors {
            if let crate::detection::DetectionError::UnknownConditionSubject { mobile, .. } = err {
                if !self.reported_subjects.insert(mobile.clone()) {
                    continue;
                }
                self.emit(
                    out,
                    t,
                    EventKind::Error {
                        mobile: Some(mobile.clone()),
                        reason: err.to_string(),
                    },
                );
            }
        }
        self.world = resolution.world;

        let now = detect_conflicts(&self.world);
        let old_keys: BTreeSet<_> = self.conflicts.iter().map(Conflict::key).collect();
        let new_keys: BTreeSet<_> = now.iter().map(Conflict::key).collect();
        for c in &self.conflicts.clone() {
            if !new_keys.contains(&c.key()) {
                self.emit(
                    out,
                    t,
                    EventKind::ConflictResolved {
                        pair: c.pair.clone(),
                        ctype: c.ctype,
                    },
                );
            }
        }
        for c in &now {
            if !old_keys.contains(&c.key()) {
                self.emit(
                    out,
                    t,
                    EventKind::ConflictRaised {
                        pair: c.pair.clone(),
                        ctype: c.ctype,
                        segments: c.shared.iter().cloned().collect(),
                    },
                );
            }
        }
        self.conflicts = now;
    }
}

/// Runs `scenario` for ticks `0..max_ticks` and returns the full event log.
pub fn run_scenario(model: Arc<AirportModel>, scenario: &[ScenarioCommand], max_ticks: u64) -> Vec<Event> {
    let mut sim = Simulator::new(model);
    sim.schedule(scenario.iter().cloned());
    let mut log = Vec::new();
    for _ in 0..max_ticks {
        log.extend(sim.tick());
    }
    log
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airport::{Runway, Segment, SegmentKind};
    use alloc::vec;

    // Runway R1-R2-R3 crossed at R2 by taxiways T1 and T2.
    fn model() -> Arc<AirportModel> {
        let mut segs = Vec::new();
        for (id, kind, nbrs) in [
            ("R1", SegmentKind::Runway, &["R2"][..]),
            ("R2", SegmentKind::Runway, &["R1", "R3", "T1", "T2"][..]),
            ("R3", SegmentKind::Runway, &["R2"][..]),
            ("T1", SegmentKind::Taxiway, &["R2"][..]),
            ("T2", SegmentKind::Taxiway, &["R2"][..]),
        ] {
            let mut s = Segment::new(id, kind);
            s.neighbors = nbrs.iter().map(|n| SegmentId::from(*n)).collect();
            if kind == SegmentKind::Runway {
                s.runways.insert("09/27".into());
            }
            segs.push(s);
        }
        let rwy = Runway {
            id: "09/27".into(),
            segments: vec!["R1".into(), "R2".into(), "R3".into()],
            thresholds: ["09".into(), "27".into()],
            multiple_line_up_authorised: false,
        };
        Arc::new(AirportModel::new(segs, vec![rwy]).unwrap())
    }

    fn cmd(t: u64, action: Action) -> ScenarioCommand {
        ScenarioCommand { t, action }
    }

    fn spawn_crosser() -> Action {
        Action::Spawn {
            mobile: "V1".into(),
            kind: MobileKind::Vehicle,
            at: Some("T1".into()),
            route: RouteSpec::To("T2".into()),
            approach_delay: 0,
            auto: true,
        }
    }

    fn clear(c: ClearanceType) -> Action {
        Action::Clear {
            mobile: "V1".into(),
            clearance: c,
            condition: None,
        }
    }

    fn position(sim: &Simulator) -> Option<SegmentId> {
        sim.world().get(&"V1".into()).unwrap().position.clone()
    }

    #[test]
    fn empty_scenario_logs_nothing() {
        assert!(run_scenario(model(), &[], 5).is_empty());
    }

    #[test]
    fn traffic_halts_at_the_cleared_boundary() {
        let mut sim = Simulator::new(model());
        sim.schedule([cmd(0, spawn_crosser())]);
        for _ in 0..4 {
            assert!(sim.tick().is_empty());
        }
        assert_eq!(position(&sim), Some("T1".into()));

        let events = sim.execute(Action::Advance {
            mobile: "V1".into(),
            segments: 1,
        });
        assert!(matches!(
            &events[..],
            [Event {
                kind: EventKind::MobileMoved { .. },
                ..
            }]
        ));
        assert_eq!(position(&sim), Some("R2".into()));
    }

    #[test]
    fn crossing_completes_back_to_none() {
        let log = run_scenario(
            model(),
            &[cmd(0, spawn_crosser()), cmd(0, clear(ClearanceType::Crs))],
            4,
        );
        let kinds: Vec<_> = log.iter().map(|e| (e.t, &e.kind)).collect();
        assert!(matches!(
            &kinds[..],
            [
                (
                    0,
                    EventKind::ClearanceSet {
                        clearance: ClearanceType::Crs,
                        source: ClearanceSource::Command,
                        ..
                    }
                ),
                (1, EventKind::MobileMoved { .. }),
                (2, EventKind::MobileMoved { .. }),
                (
                    2,
                    EventKind::ClearanceSet {
                        clearance: ClearanceType::None,
                        source: ClearanceSource::Completed,
                        ..
                    }
                ),
            ]
        ));
        assert_eq!(log.iter().map(|e| e.seq).collect::<Vec<_>>(), [0, 1, 2, 3]);
    }

    #[test]
    fn same_tick_commands_run_in_file_order() {
        let scenario = [
            cmd(2, clear(ClearanceType::None)),
            cmd(0, spawn_crosser()),
            cmd(2, clear(ClearanceType::Crs)),
        ];
        let mut sim = Simulator::new(model());
        sim.schedule(scenario);
        for _ in 0..3 {
            sim.tick();
        }
        assert_eq!(
            sim.world().get(&"V1".into()).unwrap().clearance.ctype,
            ClearanceType::Crs
        );
    }
}
