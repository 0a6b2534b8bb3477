#![no_main]
use libfuzzer_sys::fuzz_target;

use gpvm::ValueTable;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(spec) = gpvm::files::parse_chain(s) {
            let table = ValueTable::build(&[-1.0, 1.0], &[0.0, 2.0], |x, y| x + y).expect("finite");
            let _ = spec.resolve(&table);
        }
    }
});
