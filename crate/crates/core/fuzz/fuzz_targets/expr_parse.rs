#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(e) = gpvm::expr::parse(s, &["x", "y"]) {
            let printed = e.to_string();
            assert_eq!(gpvm::expr::parse(&printed, &["x", "y"]).as_ref(), Ok(&e), "{printed}");
            let _ = e.eval_xy(0.5, -2.0);
        }
    }
});
