//! Acceptance run: one PASS/FAIL line per criterion. Reports go to
//! target/acceptance/criterion-<id>.json.

use std::path::PathBuf;
use std::process::ExitCode;

use dunkl::harness::DEFAULT_SEED;
use dunkl::rootsys::ReflectionSetup;
use dunkl::selftest::{criterion, standard_setups, CriterionReport, SuiteOptions};

fn setups_for(id: usize) -> Vec<ReflectionSetup> {
    let all = standard_setups();
    match id {
        // The classical reduction runs on k = 0 in one and two dimensions.
        1 => vec![all[0].clone(), all[3].clone()],
        2 => all[1..].to_vec(),
        _ => all,
    }
}

fn main() -> ExitCode {
    let filter: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let opts = SuiteOptions::full(DEFAULT_SEED);
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).expect("report directory");
    let mut reports: Vec<CriterionReport> = Vec::new();
    for id in 1..=9 {
        if filter.is_some_and(|f| f != id) {
            continue;
        }
        let report = criterion(id, &setups_for(id), &opts);
        println!("{}", report.line());
        let json = serde_json::to_string_pretty(&report).expect("serializable report");
        std::fs::write(dir.join(format!("criterion-{id}.json")), json).expect("write report");
        reports.push(report);
    }
    let failed: Vec<usize> = reports.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria pass", reports.len(), reports.len());
        ExitCode::SUCCESS
    } else {
        for r in reports.iter().filter(|r| !r.pass) {
            for m in r.measurements.iter().filter(|m| !m.pass) {
                println!("  criterion {} failing: {} [{}] = {:e} (limit {:e})", r.id, m.name, m.setup, m.value, m.limit);
            }
        }
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
