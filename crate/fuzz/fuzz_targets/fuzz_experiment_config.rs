//! Parse plus typed resolution for every command: any input either resolves
//! or errors, never panics. Resolution only validates numbers, it never
//! integrates, so this stays fast.

#![no_main]

use libfuzzer_sys::fuzz_target;

use arp_cli::configfile::{
    resolve_compare_command, resolve_scan_command, resolve_sweep_command,
    resolve_tolerance_command, ConfigDocument,
};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(doc) = ConfigDocument::parse(text) else {
        return;
    };
    let _ = resolve_sweep_command(doc.clone());
    let _ = resolve_scan_command(doc.clone(), None);
    let _ = resolve_tolerance_command(doc.clone(), None);
    let _ = resolve_compare_command(doc);
});
