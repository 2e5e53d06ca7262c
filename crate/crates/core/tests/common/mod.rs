#![allow(dead_code)]

use std::path::PathBuf;

use rflx_core::dsl::{elaborate_all, parse_spec, Model, SpecFile};
use rflx_core::model::MessageGraph;
use rflx_core::runtime::{MessageBuffer, MessageParser};

pub const SPECS: [&str; 4] = ["ethernet", "ipv4", "tls_heartbeat", "in_ethernet"];

pub fn spec_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(format!("{name}.rflx"))
}

pub fn spec_text(name: &str) -> String {
    std::fs::read_to_string(spec_path(name)).expect("bundled spec")
}

pub fn parse(name: &str) -> SpecFile {
    parse_spec(&spec_text(name)).unwrap_or_else(|e| panic!("{name}: {e:?}"))
}

pub fn model() -> Model {
    let files: Vec<SpecFile> = SPECS.iter().map(|s| parse(s)).collect();
    elaborate_all(&files).expect("bundled specs elaborate")
}

pub fn graph(qualified: &str) -> MessageGraph {
    model().message(qualified).unwrap_or_else(|| panic!("no message {qualified}")).clone()
}

pub fn ethernet() -> MessageParser {
    MessageParser::from_graph(&graph("Ethernet.Frame"))
}

pub fn heartbeat() -> MessageParser {
    MessageParser::from_graph(&graph("TLS_Heartbeat.Heartbeat_Message"))
}

pub fn labeled<'a>(parser: &MessageParser, bytes: &'a [u8]) -> MessageBuffer<'a> {
    MessageBuffer::labeled(bytes, parser.message())
}

/// Ethernet II frame with the given type and payload size.
pub fn ethernet_ii(ether_type: u16, payload: usize) -> Vec<u8> {
    let mut v = vec![0xFF; 6];
    v.extend([0x00, 0x11, 0x22, 0x33, 0x44, 0x55]);
    v.extend(ether_type.to_be_bytes());
    v.extend((0..payload).map(|i| i as u8));
    v
}

/// 802.1Q tagged frame.
pub fn vlan(ether_type: u16, payload: usize) -> Vec<u8> {
    let mut v = ethernet_ii(0x8100, 0);
    v.extend([0x00, 0x2A]);
    v.extend(ether_type.to_be_bytes());
    v.extend((0..payload).map(|i| i as u8));
    v
}

/// IEEE 802.3 frame whose length field equals the payload size.
pub fn ieee_802_3(payload: usize) -> Vec<u8> {
    ethernet_ii(payload as u16, payload)
}

pub fn heartbeat_msg(ty: u8, payload_length: u16, payload: usize, padding: usize) -> Vec<u8> {
    let mut v = vec![ty];
    v.extend(payload_length.to_be_bytes());
    v.extend((0..payload).map(|i| i as u8));
    v.extend(std::iter::repeat_n(0xAB, padding));
    v
}
