//! Runs the generated parsers and the interpreter on the given message files
//! so a memory checker can watch every access. Prints one line per file.

use std::process::ExitCode;

use rflx_conformance::generated::tls_heartbeat_heartbeat_message as hb;
use rflx_conformance::Buffer;
use rflx_core::dsl::{elaborate, parse_spec};
use rflx_core::runtime::{MessageBuffer, MessageParser};

const SPEC: &str = include_str!("../../../../specs/tls_heartbeat.rflx");

fn main() -> ExitCode {
    let package = elaborate(&parse_spec(SPEC).expect("bundled spec parses")).expect("bundled spec elaborates");
    let parser = MessageParser::from_graph(package.message("Heartbeat_Message").expect("message exists"));
    for path in std::env::args().skip(1) {
        // Exact-size heap allocation so any read past the end is detected.
        let bytes: Box<[u8]> = match std::fs::read(&path) {
            Ok(b) => b.into_boxed_slice(),
            Err(e) => {
                eprintln!("{path}: {e}");
                return ExitCode::FAILURE;
            }
        };
        let mut generated = Buffer::new(&bytes);
        hb::label(&mut generated);
        let generated_valid = hb::is_valid(&generated).expect("labeled");
        let fields = [
            hb::get_message_type(&generated).is_ok(),
            hb::get_payload_length(&generated).is_ok(),
            hb::get_payload(&generated).is_ok(),
            hb::get_padding(&generated).is_ok(),
        ];
        let interpreted = MessageBuffer::labeled(&bytes, parser.message());
        let interpreted_valid = parser.is_valid(&interpreted).expect("labeled");
        let payload = parser.field_access("Payload", &interpreted).is_ok();
        println!(
            "{path}: generated={generated_valid} interpreter={interpreted_valid} fields={fields:?} payload_accessible={payload}"
        );
    }
    ExitCode::SUCCESS
}
