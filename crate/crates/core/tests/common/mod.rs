#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

/// Prints one verdict line and passes the condition through.
pub fn report(criterion: &str, ok: bool, detail: &str) -> bool {
    println!("{} criterion {criterion}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}
