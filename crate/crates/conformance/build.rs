use std::fmt::Write;
use std::path::PathBuf;

use rflx_core::codegen::{generate_all, write_files, CodegenOptions};
use rflx_core::derive::derive_parser;
use rflx_core::dsl::{elaborate_all, parse_spec};
use rflx_core::model::FieldType;

const SPECS: [&str; 4] = ["ethernet", "ipv4", "tls_heartbeat", "in_ethernet"];

fn main() {
    let root = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").unwrap()).join("../../specs");
    println!("cargo:rerun-if-changed={}", root.display());
    let specs: Vec<_> = SPECS
        .iter()
        .map(|s| {
            let path = root.join(format!("{s}.rflx"));
            println!("cargo:rerun-if-changed={}", path.display());
            let text = std::fs::read_to_string(&path).unwrap();
            parse_spec(&text).unwrap_or_else(|e| panic!("{}: {e:?}", path.display()))
        })
        .collect();
    let model = elaborate_all(&specs).unwrap_or_else(|e| panic!("{e:?}"));
    let parsers: Vec<_> = model.messages().map(derive_parser).collect();
    let refinements: Vec<_> = parsers.iter().map(|p| model.refinements_of(p.graph.name())).collect();
    let inputs: Vec<_> = parsers.iter().zip(&refinements).map(|(p, r)| (p, r.as_slice())).collect();
    let out = PathBuf::from(std::env::var("OUT_DIR").unwrap());
    write_files(&out.join("generated"), &generate_all(&inputs, &CodegenOptions::default())).unwrap();

    // Uniform table over the generated modules for differential testing.
    let mut glue = String::from("pub static MESSAGES: &[Message] = &[\n");
    for p in &parsers {
        let module = p.graph.name().replace('.', "_").to_ascii_lowercase();
        writeln!(glue, "    Message {{\n        name: \"{}\",", p.graph.name()).unwrap();
        writeln!(glue, "        is_valid: generated::{module}::is_valid,\n        fields: &[").unwrap();
        for (field, spec) in p.graph.fields() {
            let f = field.to_ascii_lowercase();
            let get = match spec.ty {
                FieldType::Opaque => format!("|b| generated::{module}::get_{f}(b).map(|s| Value::Opaque {{ first: s.first, length: s.length }})"),
                FieldType::Enumeration { .. } => format!("|b| generated::{module}::get_{f}(b).map(|v| Value::Scalar(v.value()))"),
                _ => format!("|b| generated::{module}::get_{f}(b).map(Value::Scalar)"),
            };
            writeln!(glue, "            Field {{ name: \"{field}\", valid: generated::{module}::valid_{f}, get: {get} }},").unwrap();
        }
        writeln!(glue, "        ],\n    }},").unwrap();
    }
    glue.push_str("];\n");
    write_files(&out, &[rflx_core::codegen::GeneratedFile { path: "dispatch.rs".into(), text: glue }]).unwrap();
}
