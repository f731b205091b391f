#![no_main]

use darkcav_cli::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = ExperimentConfig::parse(text) {
        let resolved = config.resolved_toml();
        let again = ExperimentConfig::parse(&resolved).expect("resolved config must re-parse");
        assert_eq!(again, config);
        let _ = config.system_params();
    }
});
