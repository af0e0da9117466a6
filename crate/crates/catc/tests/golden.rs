//! Byte-exact event logs for every fixture. Set `CATC_BLESS=1` to rewrite
//! them after an intended change, then review the diff.

mod common;

#[test]
fn logs_match_golden_files() {
    let bless = std::env::var_os("CATC_BLESS").is_some();
    let mut mismatched = Vec::new();
    for f in common::fixtures() {
        let log = common::run_log(&f);
        let path = common::golden_path(&f.name);
        if bless {
            std::fs::write(&path, &log).unwrap();
            continue;
        }
        let golden = std::fs::read_to_string(&path).unwrap_or_default();
        if golden != log {
            mismatched.push(f.name);
        }
    }
    assert!(mismatched.is_empty(), "logs differ from golden files: {mismatched:?}");
}

#[test]
fn every_scenario_is_in_the_manifest() {
    let listed: Vec<String> = common::fixtures().into_iter().map(|f| f.name).collect();
    for entry in std::fs::read_dir(common::root().join("scenarios")).unwrap() {
        let name = entry
            .unwrap()
            .path()
            .file_stem()
            .unwrap()
            .to_string_lossy()
            .into_owned();
        assert!(listed.contains(&name), "{name} missing from manifest");
    }
}
