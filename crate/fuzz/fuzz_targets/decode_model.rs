#![no_main]

use il_decide::VeltmanModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(model) = VeltmanModel::from_json(text) else {
        return;
    };
    let _ = model.frame_check();
    let again = VeltmanModel::from_json(&model.to_json()).expect("re-encoded model decodes");
    assert_eq!(again.to_json(), model.to_json());
});
