#![no_main]

use acx::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = RunConfig::from_json(text) else { return };
    // Accepted configs survive a serialization round trip with the same hash.
    let again = RunConfig::from_json(&serde_json::to_string(&cfg).unwrap()).expect("round trip");
    assert_eq!(cfg.hash(), again.hash());
});
