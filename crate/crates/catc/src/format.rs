//! On-disk formats: TOML airports and scenarios, JSON-lines event logs.

use std::path::Path;

use catc_core::airport::ValidationError;
use catc_core::sim::{Event, ScenarioCommand};
use catc_core::{AirportDocument, AirportModel};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid airport: {0}")]
    Invalid(#[from] ValidationError),
}

fn read(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn parse_airport(text: &str) -> Result<AirportModel, FormatError> {
    let doc: AirportDocument = toml::from_str(text)?;
    Ok(AirportModel::from_document(doc)?)
}

pub fn load_airport(path: &Path) -> Result<AirportModel, FormatError> {
    parse_airport(&read(path)?)
}

pub fn airport_to_toml(model: &AirportModel) -> String {
    toml::to_string(&model.to_document()).expect("airport documents serialize")
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    command: Vec<ScenarioCommand>,
}

/// Commands in file order; the simulator orders them by tick.
pub fn parse_scenario(text: &str) -> Result<Vec<ScenarioCommand>, FormatError> {
    Ok(toml::from_str::<ScenarioFile>(text)?.command)
}

pub fn load_scenario(path: &Path) -> Result<Vec<ScenarioCommand>, FormatError> {
    parse_scenario(&read(path)?)
}

pub fn scenario_to_toml(commands: &[ScenarioCommand]) -> String {
    toml::to_string(&ScenarioFile {
        command: commands.to_vec(),
    })
    .expect("scenarios serialize")
}

/// One JSON object per line, each line terminated by `\n`.
pub fn event_log(events: &[Event]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("events serialize"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use catc_core::sim::{Action, RouteSpec};
    use catc_core::{ClearanceType, MobileKind};

    const TINY: &str = r#"
[[segments]]
id = "R1"
kind = "runway"
neighbors = ["R2", "E1"]
runways = ["09/27"]
centerline = [[0, 0], [100.5, 0]]

[[segments]]
id = "R2"
kind = "runway"
neighbors = ["R1"]
runways = ["09/27"]

[[segments]]
id = "E1"
kind = "taxiway"
neighbors = ["R1"]

[[runways]]
id = "09/27"
segments = ["R1", "R2"]
thresholds = ["09", "27"]
multiple_line_up_authorised = false
"#;

    #[test]
    fn airport_from_toml() {
        let model = parse_airport(TINY).unwrap();
        let rwy = model.runway(&"09/27".into()).unwrap();
        assert_eq!(rwy.threshold_end("27"), Some(1));
        let r1 = model.segment(&"R1".into()).unwrap();
        assert_eq!(r1.centerline.as_ref().unwrap()[1].0, 100.5);
        assert_eq!(parse_airport(&airport_to_toml(&model)).unwrap(), model);
    }

    #[test]
    fn airport_errors() {
        let broken = TINY.replacen(r#"neighbors = ["R1"]"#, "neighbors = []", 1);
        let err = parse_airport(&broken).unwrap_err().to_string();
        assert_eq!(err, "invalid airport: asymmetric adjacency R1/R2");
        assert!(matches!(
            parse_airport("[[segments]]\nid = 3"),
            Err(FormatError::Parse(_))
        ));
        assert!(matches!(
            parse_airport(&TINY.replace("centerline", "center")),
            Err(FormatError::Parse(_))
        ));
    }

    #[test]
    fn scenario_from_toml() {
        let text = r#"
[[command]]
t = 0
cmd = "spawn"
mobile = "SAS638"
kind = "aircraft"
route = { arrival = { runway = "09/27", threshold = "09", exit = "E1" } }
approach_delay = 2

[[command]]
t = 0
cmd = "clear"
mobile = "SAS638"
clearance = "LND"

[[command]]
t = 4
cmd = "advance"
mobile = "SAS638"
"#;
        let cmds = parse_scenario(text).unwrap();
        assert_eq!(cmds.len(), 3);
        match &cmds[0].action {
            Action::Spawn {
                at,
                route,
                approach_delay,
                auto,
                kind,
                ..
            } => {
                assert_eq!(*at, None);
                assert_eq!(*kind, MobileKind::Aircraft);
                assert!(matches!(
                    route,
                    RouteSpec::Arrival {
                        exit: Some(_),
                        stand: None,
                        ..
                    }
                ));
                assert_eq!((*approach_delay, *auto), (2, true));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            &cmds[1].action,
            Action::Clear {
                clearance: ClearanceType::Lnd,
                condition: None,
                ..
            }
        ));
        assert!(matches!(&cmds[2].action, Action::Advance { segments: 1, .. }));
        assert_eq!(parse_scenario(&scenario_to_toml(&cmds)).unwrap(), cmds);
    }

    #[test]
    fn scenario_rejects_unknown_commands() {
        let err = parse_scenario("[[command]]\nt = 0\ncmd = \"teleport\"\nmobile = \"X\"\n").unwrap_err();
        assert!(err.to_string().contains("teleport"), "{err}");
    }
}
