#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spline) = eddy_mgrit::model::parse_table(text) else {
        return;
    };
    // A table that parses must evaluate everywhere on [0, inf).
    let (b, _) = spline.knots();
    let top = b[b.len() - 1];
    for k in 0..=16 {
        let x = top * 1.5 * k as f64 / 16.0;
        assert!(spline.eval(x).is_ok());
    }
    assert!(spline.eval(-1.0).is_err());
});
