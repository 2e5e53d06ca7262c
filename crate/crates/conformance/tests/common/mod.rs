#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use rflx_core::dsl::{elaborate_all, parse_spec, Model};

pub const SPECS: [&str; 4] = ["ethernet", "ipv4", "tls_heartbeat", "in_ethernet"];

pub fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn model() -> Model {
    let files: Vec<_> = SPECS
        .iter()
        .map(|s| parse_spec(&std::fs::read_to_string(repo().join(format!("specs/{s}.rflx"))).unwrap()).unwrap())
        .collect();
    elaborate_all(&files).unwrap()
}
