#![no_main]

use acx::custom::CoefficientGrid;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(grid) = CoefficientGrid::parse(text) else { return };
    let again = CoefficientGrid::parse(&grid.to_text()).expect("printed grid parses");
    assert_eq!(grid, again);
});
