#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(table) = eddy_mgrit::harness::parse_solution_csv(text) {
            assert_eq!(table.t.len(), table.i.len());
            assert!(table.probes.iter().all(|p| p.len() == table.t.len()));
        }
    }
});
