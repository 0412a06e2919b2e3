#![no_main]

use abox::io::{parse_csv_column, ColumnSelector};
use abox::{analyze, MethodConfig, Procedure};
use libfuzzer_sys::fuzz_target;

// First byte picks the header flag and column; the rest is the CSV text.
fuzz_target!(|data: &[u8]| {
    let Some((&ctl, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let header = ctl & 1 == 1;
    let column = if ctl & 2 == 2 {
        ColumnSelector::Name(text.lines().next().unwrap_or("").split(',').next().unwrap_or("").trim().to_string())
    } else {
        ColumnSelector::Index((ctl >> 2) as usize % 4)
    };
    let Ok(sample) = parse_csv_column(text, &column, header) else { return };
    let values = sample.values();
    assert!(!values.is_empty());
    assert!(values.iter().all(|v| v.is_finite()));
    assert!(values.windows(2).all(|w| w[0] <= w[1]));
    // Whatever parses must analyze cleanly or fail with an error, never panic.
    let _ = analyze(&sample, MethodConfig::tukey());
    let _ = analyze(&sample, MethodConfig::normal(Procedure::Bh(0.01)));
});
