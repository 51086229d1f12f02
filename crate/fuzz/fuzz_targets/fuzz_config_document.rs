//! The document layer must reject or accept any byte soup without panicking.

#![no_main]

use libfuzzer_sys::fuzz_target;

use arp_cli::configfile::ConfigDocument;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = ConfigDocument::parse(text);
    }
});
