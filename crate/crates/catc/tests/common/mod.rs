#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use catc::format;
use catc_core::sim::{run_scenario, Event, ScenarioCommand};
use catc_core::AirportModel;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub airport: String,
    pub ticks: u64,
}

#[derive(Deserialize)]
struct Manifest {
    fixture: Vec<Fixture>,
}

pub fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn airport_path(name: &str) -> PathBuf {
    root().join("airports").join(format!("{name}.toml"))
}

pub fn scenario_path(name: &str) -> PathBuf {
    root().join("scenarios").join(format!("{name}.toml"))
}

pub fn golden_path(name: &str) -> PathBuf {
    root().join("golden").join(format!("{name}.jsonl"))
}

pub fn fixtures() -> Vec<Fixture> {
    let text = std::fs::read_to_string(root().join("manifest.toml")).unwrap();
    toml::from_str::<Manifest>(&text).unwrap().fixture
}

pub fn fixture(name: &str) -> Fixture {
    fixtures()
        .into_iter()
        .find(|f| f.name == name)
        .unwrap_or_else(|| panic!("no fixture {name}"))
}

pub fn airport(name: &str) -> Arc<AirportModel> {
    Arc::new(format::load_airport(&airport_path(name)).unwrap())
}

pub fn scenario(name: &str) -> Vec<ScenarioCommand> {
    format::load_scenario(&scenario_path(name)).unwrap()
}

pub fn run(f: &Fixture) -> Vec<Event> {
    run_scenario(airport(&f.airport), &scenario(&f.name), f.ticks)
}

pub fn run_log(f: &Fixture) -> String {
    format::event_log(&run(f))
}
