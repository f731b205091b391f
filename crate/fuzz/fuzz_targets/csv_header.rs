#![no_main]

use darkcav_cli::config::config_from_header;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = config_from_header(text);
    }
});
