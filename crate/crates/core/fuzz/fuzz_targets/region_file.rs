#![no_main]
use libfuzzer_sys::fuzz_target;

// Regions are resolved against a fixed 3×2 grid.
fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(spec) = gpvm::files::parse_region(s) {
            let _ = gpvm::joint::region_from_borel(&[-1.0, 0.0, 2.5], &[-1.0, 1.0], &spec);
        }
    }
});
