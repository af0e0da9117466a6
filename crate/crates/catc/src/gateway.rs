//! Message protocol shared by the streaming endpoint and its tests.
//!
//! Clients send one JSON object per frame, tagged by `type` and carrying a
//! correlation `id` that must be unique on its connection. Mutations are
//! applied to the single engine in arrival order and answered by a broadcast
//! of the resulting `events` and a fresh `snapshot`; probes and snapshot
//! requests are answered to the sender only.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use catc_core::clearance::cleared_boundary;
use catc_core::detection::{probe, Conflict, Verdict};
use catc_core::sim::{Action, Event, RouteSpec, Simulator};
use catc_core::{AirportModel, Clearance, ClearanceType, Mobile, MobileId, MobileKind, Route, SegmentId};
use serde::{Deserialize, Serialize};

use crate::format;

fn default_one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Request {
    /// Replace the airport; drops all traffic.
    LoadAirport {
        document: String,
    },
    /// Queue scenario commands (TOML) on the running engine.
    LoadScenario {
        document: String,
    },
    Step {
        #[serde(default = "default_one")]
        n: u32,
    },
    Clear {
        mobile: MobileId,
        clearance: ClearanceType,
        #[serde(default)]
        condition: Option<MobileId>,
    },
    SetRoute {
        mobile: MobileId,
        route: RouteSpec,
    },
    Probe {
        mobile: MobileId,
        clearance: ClearanceType,
        #[serde(default)]
        condition: Option<MobileId>,
    },
    Advance {
        mobile: MobileId,
        #[serde(default = "default_one")]
        segments: u32,
    },
    SnapshotRequest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientMessage {
    pub id: u64,
    #[serde(flatten)]
    pub request: Request,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MobileView {
    pub id: MobileId,
    pub kind: MobileKind,
    pub position: Option<SegmentId>,
    pub route: Route,
    /// Last cleared route index; absent when nothing is cleared.
    pub cleared_boundary: Option<usize>,
    pub clearance: ClearanceType,
    pub condition: Option<MobileId>,
    pub next_expected: ClearanceType,
    /// Verdict for `next_expected`; absent when it is NONE.
    pub probe: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub tick: u64,
    pub mobiles: Vec<MobileView>,
    pub conflicts: Vec<Conflict>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Snapshot {
        id: Option<u64>,
        #[serde(flatten)]
        snapshot: Snapshot,
    },
    Events {
        id: Option<u64>,
        tick: u64,
        events: Vec<Event>,
    },
    ProbeResult {
        id: u64,
        mobile: MobileId,
        clearance: ClearanceType,
        condition: Option<MobileId>,
        verdict: Verdict,
        conflicts: Vec<Conflict>,
    },
    Error {
        id: Option<u64>,
        reason: String,
    },
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}

/// Result of one client message.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Outcome {
    /// For the sender only.
    pub replies: Vec<ServerMessage>,
    /// For every session, the sender included.
    pub broadcast: Vec<ServerMessage>,
}

pub type SessionId = u64;

/// The clearance that typically comes next in the mobile's workflow.
pub fn next_expected_clearance(model: &AirportModel, mobile: &Mobile) -> ClearanceType {
    use ClearanceType::*;
    let flags: Vec<bool> = mobile
        .route
        .segments()
        .iter()
        .map(|s| model.is_runway_segment(s).unwrap_or(false))
        .collect();
    let aircraft = mobile.kind == MobileKind::Aircraft;
    let ctype = mobile.clearance.ctype;
    if mobile.is_airborne() {
        return if ctype == None { Lnd } else { None };
    }
    // Departure: the route ends on the take-off runway.
    if aircraft && flags[flags.len() - 1] {
        return match ctype {
            None => Lup,
            Lup => Tof,
            _ => None,
        };
    }
    // Landing roll: starts on the runway and vacates it.
    if aircraft && flags[0] {
        return if ctype == None { Lnd } else { None };
    }
    match flags.iter().position(|&r| r) {
        Some(i) if ctype == None && flags[i..].iter().any(|&r| !r) => Crs,
        _ => None,
    }
}

/// The engine plus per-connection bookkeeping.
pub struct Gateway {
    sim: Simulator,
    sessions: BTreeMap<SessionId, BTreeSet<u64>>,
    next_session: SessionId,
}

impl Gateway {
    pub fn new(model: Arc<AirportModel>) -> Self {
        Gateway {
            sim: Simulator::new(model),
            sessions: BTreeMap::new(),
            next_session: 0,
        }
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }

    pub fn simulator_mut(&mut self) -> &mut Simulator {
        &mut self.sim
    }

    pub fn open_session(&mut self) -> SessionId {
        let id = self.next_session;
        self.next_session += 1;
        self.sessions.insert(id, BTreeSet::new());
        id
    }

    pub fn close_session(&mut self, session: SessionId) {
        self.sessions.remove(&session);
    }

    pub fn snapshot(&self) -> Snapshot {
        let world = self.sim.world();
        let model = world.model();
        let mobiles = world
            .mobiles()
            .map(|m| {
                let next = next_expected_clearance(model, m);
                let verdict = (next != ClearanceType::None)
                    .then(|| probe(world, &m.id, Clearance::new(next)).ok().map(|p| p.verdict))
                    .flatten();
                MobileView {
                    id: m.id.clone(),
                    kind: m.kind,
                    position: m.position.clone(),
                    route: m.route.clone(),
                    cleared_boundary: cleared_boundary(model, &m.route, &m.clearance)
                        .ok()
                        .and_then(|b| b.index()),
                    clearance: m.clearance.ctype,
                    condition: m.clearance.condition.clone(),
                    next_expected: next,
                    probe: verdict,
                }
            })
            .collect();
        Snapshot {
            tick: self.sim.now(),
            mobiles,
            conflicts: self.sim.conflicts().to_vec(),
        }
    }

    /// Parses and handles one text frame from `session`.
    pub fn handle_text(&mut self, session: SessionId, text: &str) -> Outcome {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(msg) => self.handle_message(session, msg),
            Err(e) => {
                let id = serde_json::from_str::<serde_json::Value>(text)
                    .ok()
                    .and_then(|v| v.get("id").and_then(|i| i.as_u64()));
                error(id, format!("malformed message: {e}"))
            }
        }
    }

    pub fn handle_message(&mut self, session: SessionId, msg: ClientMessage) -> Outcome {
        let id = msg.id;
        let Some(seen) = self.sessions.get_mut(&session) else {
            return error(Some(id), format!("unknown session {session}"));
        };
        if !seen.insert(id) {
            return error(Some(id), format!("correlation id {id} already used"));
        }
        match msg.request {
            Request::SnapshotRequest => Outcome {
                replies: vec![ServerMessage::Snapshot {
                    id: Some(id),
                    snapshot: self.snapshot(),
                }],
                broadcast: Vec::new(),
            },
            Request::Probe {
                mobile,
                clearance,
                condition,
            } => {
                let clr = Clearance {
                    ctype: clearance,
                    condition,
                };
                match probe(self.sim.world(), &mobile, clr.clone()) {
                    Ok(result) => Outcome {
                        replies: vec![ServerMessage::ProbeResult {
                            id,
                            mobile,
                            clearance: clr.ctype,
                            condition: clr.condition,
                            verdict: result.verdict,
                            conflicts: result.conflicts,
                        }],
                        broadcast: Vec::new(),
                    },
                    Err(e) => error(Some(id), e.to_string()),
                }
            }
            Request::LoadAirport { document } => match format::parse_airport(&document) {
                Ok(model) => {
                    self.sim = Simulator::new(Arc::new(model));
                    self.mutation(id, vec![(self.sim.now(), Vec::new())])
                }
                Err(e) => error(Some(id), e.to_string()),
            },
            Request::LoadScenario { document } => match format::parse_scenario(&document) {
                Ok(commands) => {
                    self.sim.schedule(commands);
                    self.mutation(id, vec![(self.sim.now(), Vec::new())])
                }
                Err(e) => error(Some(id), e.to_string()),
            },
            Request::Step { n } => {
                let batches = (0..n)
                    .map(|_| {
                        let t = self.sim.next_tick();
                        (t, self.sim.tick())
                    })
                    .collect();
                self.mutation(id, batches)
            }
            Request::Clear {
                mobile,
                clearance,
                condition,
            } => self.command(
                id,
                Action::Clear {
                    mobile,
                    clearance,
                    condition,
                },
            ),
            Request::SetRoute { mobile, route } => self.command(id, Action::SetRoute { mobile, route }),
            Request::Advance { mobile, segments } => self.command(id, Action::Advance { mobile, segments }),
        }
    }

    /// Runs a controller command; a rejected command leaves the engine
    /// untouched and is reported to the sender only.
    fn command(&mut self, id: u64, action: Action) -> Outcome {
        let before = self.sim.clone();
        let events = self.sim.execute(action);
        if let Some(reason) = events.iter().find_map(|e| match &e.kind {
            catc_core::sim::EventKind::Error { reason, .. } => Some(reason.clone()),
            _ => None,
        }) {
            self.sim = before;
            return error(Some(id), reason);
        }
        self.mutation(id, vec![(self.sim.now(), events)])
    }

    fn mutation(&self, id: u64, batches: Vec<(u64, Vec<Event>)>) -> Outcome {
        let mut broadcast: Vec<ServerMessage> = batches
            .into_iter()
            .map(|(tick, events)| ServerMessage::Events {
                id: Some(id),
                tick,
                events,
            })
            .collect();
        broadcast.push(ServerMessage::Snapshot {
            id: Some(id),
            snapshot: self.snapshot(),
        });
        Outcome {
            replies: Vec::new(),
            broadcast,
        }
    }
}

fn error(id: Option<u64>, reason: String) -> Outcome {
    Outcome {
        replies: vec![ServerMessage::Error { id, reason }],
        broadcast: Vec::new(),
    }
}
