#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(spec) = gpvm::files::parse_partition(s) {
            let _ = spec.build(&[-1.0, 0.0, 2.5], &[-1.0, 1.0]);
        }
    }
});
