use std::path::PathBuf;

use rflx_cli::{run, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};

fn spec(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name).display().to_string()
}

fn rflx(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("rflx").chain(args.iter().copied()), &mut out, &mut err, false);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &tempfile::TempDir, name: &str, bytes: &[u8]) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, bytes).unwrap();
    p.display().to_string()
}

fn heartbeat(ty: u8, len: u16, payload: usize, padding: usize) -> Vec<u8> {
    let mut v = vec![ty];
    v.extend(len.to_be_bytes());
    v.extend(std::iter::repeat_n(0x11, payload));
    v.extend(std::iter::repeat_n(0x22, padding));
    v
}

#[test]
fn check_bundled_specs() {
    let (code, out, err) = rflx(&["check", &spec("ethernet.rflx")]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.starts_with("ok"));
    let all = ["ethernet.rflx", "ipv4.rflx", "tls_heartbeat.rflx", "in_ethernet.rflx"].map(spec);
    let mut args = vec!["check"];
    args.extend(all.iter().map(String::as_str));
    assert_eq!(rflx(&args).0, EXIT_OK);
}

#[test]
fn check_reports_forward_reference() {
    let dir = tempfile::tempdir().unwrap();
    let text = "package Broken is\n   type B is mod 256;\n   type M is\n      message\n         A : B\n            then C\n               if D = 1;\n         C : B;\n         D : B;\n      end message;\nend Broken;\n";
    let path = write(&dir, "broken.rflx", text.as_bytes());
    let (code, _, err) = rflx(&["check", &path]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(err.contains("forward reference"), "{err}");
    assert!(err.starts_with(&format!("{path}:")), "{err}");
}

#[test]
fn check_sorts_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(&dir, "a.rflx", b"package A is\n type X is mod 3;\n type Y is mod 5;\nend A;\n");
    let (code, _, err) = rflx(&["check", &a]);
    assert_eq!(code, EXIT_FAILURE);
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 2, "{err}");
    assert!(lines[0].contains(":2:") && lines[1].contains(":3:"), "{err}");
    assert_eq!(rflx(&["check", &a]).2, err);
}

#[test]
fn check_syntax_error_has_position() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(&dir, "a.rflx", b"package A is\n type X is ;\nend A;\n");
    let (code, _, err) = rflx(&["check", &a]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(err.starts_with(&format!("{a}:2:")), "{err}");
}

#[test]
fn usage_errors() {
    assert_eq!(rflx(&["check"]).0, EXIT_USAGE);
    assert_eq!(rflx(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(rflx(&["--help"]).0, EXIT_OK);
}

#[test]
fn missing_file_fails() {
    let (code, _, err) = rflx(&["check", "/nonexistent/x.rflx"]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(err.contains("/nonexistent/x.rflx"));
}

fn dot_counts(dot: &str) -> (usize, usize) {
    let edges = dot.lines().filter(|l| l.contains(" -> ")).count();
    let nodes = dot.lines().filter(|l| l.contains("[label=") && !l.contains(" -> ")).count();
    (nodes, edges)
}

#[test]
fn graph_counts() {
    let (code, dot, _) = rflx(&["graph", &spec("ethernet.rflx"), "Frame"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(dot_counts(&dot), (9, 10));
    assert!(dot.contains('⊤') && dot.contains('∗'));
    let (_, dot, _) = rflx(&["graph", &spec("tls_heartbeat.rflx"), "TLS_Heartbeat.Heartbeat_Message"]);
    assert_eq!(dot_counts(&dot), (6, 5));
    assert_eq!(rflx(&["graph", &spec("ethernet.rflx"), "Frame"]).1, rflx(&["graph", &spec("ethernet.rflx"), "Frame"]).1);
}

#[test]
fn graph_of_empty_message_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(&dir, "e.rflx", b"package E is type M is null message; end E;");
    let out = dir.path().join("m.dot");
    assert_eq!(rflx(&["graph", &s, "M", "--dot", out.to_str().unwrap()]).0, EXIT_OK);
    assert_eq!(dot_counts(&std::fs::read_to_string(out).unwrap()), (2, 1));
    assert_eq!(rflx(&["graph", &s, "Nope"]).0, EXIT_FAILURE);
}

#[test]
fn generate_heartbeat() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gen");
    let (code, manifest, err) = rflx(&["generate", &spec("tls_heartbeat.rflx"), "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    let mut files: Vec<String> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    files.sort();
    assert_eq!(files, ["mod.rs", "rflx_support.rs", "tls_heartbeat_heartbeat_message.rs"]);
    assert_eq!(manifest.lines().count(), 3);
}

#[test]
fn generate_refinement_across_packages() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gen");
    let specs = ["ethernet.rflx", "ipv4.rflx", "in_ethernet.rflx"].map(spec);
    let (code, _, err) = rflx(&["generate", &specs[0], &specs[1], &specs[2], "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    let eth = std::fs::read_to_string(out.join("ethernet_frame.rs")).unwrap();
    assert!(eth.contains("pub fn contains_ipv4_in_ethernet"));
    let ip = std::fs::read_to_string(out.join("ipv4_packet.rs")).unwrap();
    assert!(!ip.contains("contains_"));
}

#[test]
fn generate_to_unwritable_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = write(&dir, "file", b"");
    let target = format!("{blocker}/sub");
    assert_eq!(rflx(&["generate", &spec("tls_heartbeat.rflx"), "--out", &target]).0, EXIT_FAILURE);
}

#[test]
fn validate_heartbeat_files() {
    let dir = tempfile::tempdir().unwrap();
    let hb = spec("tls_heartbeat.rflx");
    let request = write(&dir, "req.bin", &heartbeat(1, 4, 4, 16));
    let (code, out, _) = rflx(&["validate", &hb, "Heartbeat_Message", &request, "--field", "Message_Type", "--field", "Payload"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "valid\nMessage_Type: 1 (HEARTBEAT_REQUEST)\nPayload: first 24, length 32\n");
    let bleed = write(&dir, "bleed.bin", &heartbeat(1, 1000, 4, 16));
    let (code, out, _) = rflx(&["validate", &hb, "Heartbeat_Message", &bleed, "--field", "Payload"]);
    assert_eq!(code, EXIT_FAILURE);
    assert_eq!(out, "invalid\nPayload: invalid\n");
    assert_eq!(rflx(&["validate", &hb, "Heartbeat_Message", &request, "--field", "Nope"]).0, EXIT_FAILURE);
}

#[test]
fn validate_hex_ethernet() {
    let dir = tempfile::tempdir().unwrap();
    let mut frame = hex::encode([0xFFu8; 6]) + "\n# source\n001122334455\n0800\n";
    frame.push_str(&"00".repeat(46));
    let path = write(&dir, "ii.hex", frame.as_bytes());
    let (code, out, err) = rflx(&["validate", &spec("ethernet.rflx"), "Ethernet.Frame", &path, "--field", "Type_Length"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(out, "valid\nType_Length: 2048\n");
    let bad = write(&dir, "bad.hex", b"0g");
    assert_eq!(rflx(&["validate", &spec("ethernet.rflx"), "Frame", &bad]).0, EXIT_FAILURE);
}

#[test]
fn validate_with_included_packages() {
    let dir = tempfile::tempdir().unwrap();
    let header = [0x45, 0, 0, 20, 0, 0, 0x40, 0, 64, 6, 0, 0, 10, 0, 0, 1, 10, 0, 0, 2];
    let data = write(&dir, "x.bin", &header);
    let (code, out, err) = rflx(&["validate", &spec("in_ethernet.rflx"), "IPv4.Packet", &data, "-I", &spec("ethernet.rflx"), "-I", &spec("ipv4.rflx"), "--field", "TTL"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(out, "valid\nTTL: 64\n");
    assert_eq!(rflx(&["validate", &spec("in_ethernet.rflx"), "IPv4.Packet", &data]).0, EXIT_FAILURE);
}
