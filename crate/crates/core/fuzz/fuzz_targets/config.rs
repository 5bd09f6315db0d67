#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = eddy_mgrit::harness::parse_config_str(text, Path::new(".")) {
            assert!(cfg.time.nt > 0 && cfg.time.t_end > 0.0);
            assert!(eddy_mgrit::harness::check_divisible(cfg.time.nt, cfg.solver.m, cfg.solver.levels).is_ok());
        }
    }
});
