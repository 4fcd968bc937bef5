#![no_main]

use libfuzzer_sys::fuzz_target;
use dyncolor::game::StrategyFile;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(file) = StrategyFile::parse(text) {
        assert_eq!(StrategyFile::parse(&file.to_json()).unwrap(), file);
        let _ = file.painter_table();
    }
});
