#![no_main]

use abox::simulation::SimulationReport;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(report) = SimulationReport::from_json(data) {
        let text = report.to_json().expect("serialize parsed report");
        assert_eq!(SimulationReport::from_json(&text).expect("reparse emitted report"), report);
        let _ = abox::io::simulation_table(&report);
    }
});
