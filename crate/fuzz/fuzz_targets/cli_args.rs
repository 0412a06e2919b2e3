#![no_main]

use abox::cli::parse_args;
use libfuzzer_sys::fuzz_target;

// NUL-separated argv; anything that parses must survive format -> parse.
fuzz_target!(|data: &str| {
    let argv = std::iter::once("abox").chain(data.split('\0'));
    if let Ok(cmd) = parse_args(argv) {
        let again = parse_args(cmd.to_args()).expect("formatted command parses");
        assert_eq!(again, cmd);
    }
});
