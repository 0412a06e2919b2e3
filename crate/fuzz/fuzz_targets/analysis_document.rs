#![no_main]

use abox::io::AnalysisDocument;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(doc) = AnalysisDocument::from_json(data) {
        let text = doc.to_json().expect("serialize parsed document");
        let again = AnalysisDocument::from_json(&text).expect("reparse emitted document");
        assert_eq!(again, doc);
    }
});
