#![no_main]

use eddy_mgrit::parallel::Message;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(msg) = Message::decode(data, None) {
        assert_eq!(msg.encode(), data);
    }
});
