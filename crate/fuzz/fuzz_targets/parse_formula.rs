#![no_main]

use il_decide::{parse, ClosureSets};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(f) = parse(text) else {
        return;
    };
    let printed = f.to_string();
    assert_eq!(parse(&printed).as_ref(), Ok(&f), "{printed}");
    if f.size() <= 64 {
        let _ = ClosureSets::new(&f);
    }
});
