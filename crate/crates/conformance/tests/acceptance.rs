//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails.

mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rflx_conformance::generated::ethernet_frame;
use rflx_conformance::{Buffer, ContractViolation as GeneratedViolation, Message, Value};
use rflx_core::codegen::{generate_all, CodegenOptions};
use rflx_core::derive::derive_parser;
use rflx_core::dsl::Model;
use rflx_core::model::{FieldId, MessageGraph};
use rflx_core::runtime::vectors::load_vectors;
use rflx_core::runtime::{contains, ContractViolation, MessageBuffer, MessageParser};

use common::oracle;

const SEED: u64 = 0x5eed_2016;

const FIDELITY_BUDGET: Duration = Duration::from_secs(1);
const VECTOR_BUDGET: Duration = Duration::from_secs(1);
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const FUZZ_BUDGET: Duration = Duration::from_secs(300);
const PER_BUFFER_LIMIT: Duration = Duration::from_millis(100);

const MIN_VECTORS: usize = 12;
const RANDOM_BUFFERS: usize = 100_000;
const RANDOM_MAX_LEN: usize = 128;
const MUTATED_BUFFERS: usize = 10_000;
const FUZZ_BUFFERS: usize = 1_000_000;
const FUZZ_MAX_LEN: usize = 2048;
const INNER_LENGTH: usize = 46;

/// Expected (field functions, variant functions) per message.
const COUNTS: [(&str, usize, usize); 2] = [("Ethernet.Frame", 7, 15), ("TLS_Heartbeat.Heartbeat_Message", 4, 5)];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn check(pass: bool, detail: impl Into<String>) -> Outcome {
        Outcome { pass, detail: detail.into() }
    }
}

/// A message checked by the suite: interpreter, generated module and
/// reference validator.
struct Subject {
    name: &'static str,
    parser: MessageParser,
    generated: &'static Message,
    oracle: fn(&[u8]) -> bool,
    seeds: Vec<Vec<u8>>,
}

struct Fixture {
    model: Model,
    subjects: Vec<Subject>,
    corpora: Vec<Vec<Vec<u8>>>,
}

fn fixture() -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let model = common::model();
        let subject = |name: &'static str, oracle: fn(&[u8]) -> bool, seeds: Vec<Vec<u8>>| Subject {
            name,
            parser: MessageParser::from_graph(model.message(name).unwrap()),
            generated: rflx_conformance::message(name).unwrap(),
            oracle,
            seeds,
        };
        let ethernet_seeds = valid_vectors("ethernet");
        let ipv4_seeds = ipv4_seeds(&ethernet_seeds);
        let subjects = vec![
            subject("Ethernet.Frame", oracle::ethernet, ethernet_seeds),
            subject("TLS_Heartbeat.Heartbeat_Message", oracle::heartbeat, valid_vectors("tls_heartbeat")),
            subject("IPv4.Packet", oracle::ipv4, ipv4_seeds),
        ];
        let mut rng = StdRng::seed_from_u64(SEED);
        let corpora = subjects.iter().map(|s| corpus(s, &mut rng)).collect();
        Fixture { model, subjects, corpora }
    })
}

fn valid_vectors(dir: &str) -> Vec<Vec<u8>> {
    let vectors = load_vectors(&common::repo().join("vectors").join(dir)).unwrap();
    vectors.into_iter().filter(|v| v.expect.valid).map(|v| v.data).collect()
}

fn all_vectors(dir: &str) -> Vec<Vec<u8>> {
    load_vectors(&common::repo().join("vectors").join(dir)).unwrap().into_iter().map(|v| v.data).collect()
}

/// IPv4 packets carried by the Ethernet vectors plus headers built here with
/// every header length.
fn ipv4_seeds(ethernet: &[Vec<u8>]) -> Vec<Vec<u8>> {
    let mut seeds: Vec<Vec<u8>> = ethernet
        .iter()
        .filter(|f| f.len() >= 14 && f[12..14] == [0x08, 0x00])
        .map(|f| f[14..].to_vec())
        .collect();
    for ihl in 5..=15u8 {
        for payload in [0usize, 1, 8, 40] {
            let header = ihl as usize * 4;
            let total = header + payload;
            let mut p = vec![0u8; total];
            p[0] = 0x40 | ihl;
            p[2..4].copy_from_slice(&(total as u16).to_be_bytes());
            p[6] = 0x40;
            p[8] = 64;
            p[9] = 17;
            p[12..16].copy_from_slice(&[10, 0, 0, 1]);
            p[16..20].copy_from_slice(&[10, 0, 0, 2]);
            seeds.push(p);
        }
    }
    seeds
}

/// Values likely to sit on a range or condition boundary when written into
/// a 16-bit field.
const INTERESTING: [u16; 14] = [0, 1, 19, 20, 45, 46, 1500, 1501, 1535, 1536, 0x0800, 0x8100, 16364, 16365];

fn mutate(seed: &[u8], rng: &mut StdRng, max_len: usize) -> Vec<u8> {
    let mut b = seed.to_vec();
    for _ in 0..rng.gen_range(1..=3) {
        match rng.gen_range(0..5) {
            0 if !b.is_empty() => {
                let i = rng.gen_range(0..b.len());
                b[i] ^= 1 << rng.gen_range(0..8);
            }
            1 if !b.is_empty() => {
                let i = rng.gen_range(0..b.len());
                b[i] = rng.gen();
            }
            2 => b.truncate(rng.gen_range(0..=b.len())),
            3 => {
                let n = rng.gen_range(1..=64);
                b.extend((0..n).map(|_| rng.gen::<u8>()));
            }
            4 if b.len() >= 2 => {
                let i = rng.gen_range(0..b.len() - 1);
                let v = if rng.gen_bool(0.8) { INTERESTING[rng.gen_range(0..INTERESTING.len())] } else { rng.gen() };
                b[i..i + 2].copy_from_slice(&v.to_be_bytes());
            }
            _ => {}
        }
    }
    b.truncate(max_len);
    b
}

fn corpus(subject: &Subject, rng: &mut StdRng) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = (0..RANDOM_BUFFERS)
        .map(|_| {
            let mut b = vec![0u8; rng.gen_range(0..=RANDOM_MAX_LEN)];
            rng.fill(&mut b[..]);
            b
        })
        .collect();
    for i in 0..MUTATED_BUFFERS {
        let seed = &subject.seeds[i % subject.seeds.len()];
        out.push(mutate(seed, rng, usize::MAX));
    }
    out.extend(subject.seeds.iter().cloned());
    match subject.name {
        "Ethernet.Frame" => out.extend(all_vectors("ethernet")),
        "TLS_Heartbeat.Heartbeat_Message" => out.extend(all_vectors("tls_heartbeat")),
        _ => {}
    }
    out
}

fn timed(f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let outcome = f();
    (outcome, start.elapsed())
}

fn within(outcome: Outcome, elapsed: Duration, budget: Duration) -> Outcome {
    if elapsed > budget {
        Outcome::check(false, format!("{}; over budget of {budget:?}", outcome.detail))
    } else {
        outcome
    }
}

/// Tokens with `--` comments removed; words and single punctuation
/// characters.
fn tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split("--").next().unwrap_or_default();
        let mut word = String::new();
        for c in line.chars() {
            if c.is_alphanumeric() || c == '_' || c == '#' {
                word.push(c);
                continue;
            }
            if !word.is_empty() {
                out.push(std::mem::take(&mut word));
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        }
        if !word.is_empty() {
            out.push(word);
        }
    }
    out
}

fn fidelity() -> Outcome {
    let root = common::repo();
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut problems = Vec::new();
    for spec in ["ethernet", "tls_heartbeat"] {
        let path = root.join(format!("specs/{spec}.rflx"));
        let bundled = std::fs::read_to_string(&path).unwrap();
        let listing = std::fs::read_to_string(fixtures.join(format!("{spec}.listing"))).unwrap();
        if tokens(&bundled) != tokens(&listing) {
            problems.push(format!("{spec}.rflx differs from its listing"));
        }
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = rflx_cli::run(["rflx".into(), "check".into(), path.into_os_string()], &mut out, &mut err, false);
        if code != rflx_cli::EXIT_OK {
            problems.push(format!("check {spec}.rflx exited {code}: {}", String::from_utf8_lossy(&err).trim()));
        }
    }
    if problems.is_empty() {
        Outcome::check(true, "2 specs token-equal to their listings, check exit 0")
    } else {
        Outcome::check(false, problems.join("; "))
    }
}

/// Every non-empty path from the initial node by depth-first search over the
/// raw edge list.
fn enumerate_paths(g: &MessageGraph) -> Vec<(Vec<usize>, FieldId)> {
    fn go(g: &MessageGraph, at: &FieldId, prefix: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, FieldId)>) {
        for (i, e) in g.edges().iter().enumerate() {
            if &e.source == at {
                prefix.push(i);
                out.push((prefix.clone(), e.target.clone()));
                go(g, &e.target, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(g, &FieldId::Initial, &mut Vec::new(), &mut out);
    out
}

fn counts() -> Outcome {
    let model = &fixture().model;
    let mut details = Vec::new();
    let mut pass = true;
    for (name, fields, variants) in COUNTS {
        let g = model.message(name).unwrap();
        let derived = derive_parser(g);
        let paths = enumerate_paths(g);
        let targets: BTreeSet<&FieldId> = paths.iter().map(|(_, t)| t).filter(|t| !t.is_sentinel()).collect();
        let got = (derived.field_valid.len(), derived.field_access.len(), derived.variant_valid.len(), derived.variant_access.len());
        let ok = got == (fields, fields, variants, variants) && targets.len() == fields && paths.len() == variants;
        pass &= ok;
        details.push(format!(
            "{name}: {}/{} (expected {fields}/{variants}, enumerator {}/{})",
            got.0,
            got.2,
            targets.len(),
            paths.len()
        ));
    }
    Outcome::check(pass, details.join(", "))
}

fn generated_value(subject: &Subject, field: &str, buffer: &Buffer<'_>) -> Option<Value> {
    let f = subject.generated.fields.iter().find(|f| f.name == field)?;
    (f.get)(buffer).ok()
}

fn vectors() -> Outcome {
    let fx = fixture();
    let mut total = 0;
    let mut failures = Vec::new();
    for (dir, subject) in [("ethernet", &fx.subjects[0]), ("tls_heartbeat", &fx.subjects[1])] {
        for v in load_vectors(&common::repo().join("vectors").join(dir)).unwrap() {
            total += 1;
            let buffer = MessageBuffer::labeled(&v.data, subject.name);
            let session = subject.parser.session(&buffer).unwrap();
            let generated = Buffer::labeled(&v.data, subject.generated.name);
            let results = [session.is_valid(), (subject.generated.is_valid)(&generated).unwrap(), (subject.oracle)(&v.data)];
            if results.iter().any(|&r| r != v.expect.valid) {
                failures.push(format!("{}: expected {}, got {results:?}", v.name, v.expect.valid));
            }
            for (field, expected) in &v.expect.fields {
                let interpreted = session.field_access(field).ok().and_then(|s| s.value);
                let generated = generated_value(subject, field, &generated);
                if interpreted != Some(*expected) || generated != Some(Value::Scalar(*expected)) {
                    failures.push(format!("{}: {field} expected {expected}, got {interpreted:?}/{generated:?}", v.name));
                }
            }
        }
    }
    if total < MIN_VECTORS {
        failures.push(format!("only {total} vectors"));
    }
    if failures.is_empty() {
        Outcome::check(true, format!("{total} vectors match their sidecars"))
    } else {
        Outcome::check(false, failures.join("; "))
    }
}

fn heartbleed() -> Outcome {
    let probe = env!("CARGO_BIN_EXE_heartbleed_probe");
    let vector = common::repo().join("vectors/tls_heartbeat/heartbleed.bin");
    let run = Command::new("valgrind").args(["--error-exitcode=99", "--leak-check=no", "-q"]).arg(probe).arg(&vector).output();
    let output = match run {
        Ok(o) => o,
        Err(e) => return Outcome::check(false, format!("memory checker unavailable: {e}")),
    };
    let stdout = String::from_utf8_lossy(&output.stdout);
    let line = stdout.lines().next().unwrap_or_default();
    let clean = output.status.code() == Some(0);
    let rejected = line.contains("generated=false") && line.contains("interpreter=false") && line.contains("payload_accessible=false");
    let detail = format!("valgrind exit {:?}, {}", output.status.code(), line.split_once(": ").map_or(line, |(_, r)| r));
    Outcome::check(clean && rejected, detail)
}

fn oracle_equivalence() -> Outcome {
    let fx = fixture();
    let mut details = Vec::new();
    let mut pass = true;
    for (subject, corpus) in fx.subjects.iter().zip(&fx.corpora) {
        let mut disagreements = 0;
        let mut valid = 0;
        let mut first = None;
        for b in corpus {
            let interpreted = subject.parser.is_valid(&MessageBuffer::labeled(b, subject.name)).unwrap();
            valid += usize::from(interpreted);
            if interpreted != (subject.oracle)(b) {
                disagreements += 1;
                first.get_or_insert_with(|| format!(" first {:02x?}", &b[..b.len().min(32)]));
            }
        }
        pass &= disagreements == 0;
        details.push(format!(
            "{}: {} buffers, {valid} valid, {disagreements} disagreements{}",
            subject.name,
            corpus.len(),
            first.unwrap_or_default()
        ));
    }
    Outcome::check(pass, details.join(", "))
}

/// First difference between the interpreter and the generated module on
/// `bytes`.
fn differential(subject: &Subject, bytes: &[u8]) -> Option<String> {
    let buffer = MessageBuffer::labeled(bytes, subject.name);
    let session = subject.parser.session(&buffer).unwrap();
    let generated = Buffer::labeled(bytes, subject.generated.name);
    let valid = (subject.generated.is_valid)(&generated).unwrap();
    if session.is_valid() != valid {
        return Some(format!("is_valid {} vs {valid}", session.is_valid()));
    }
    for f in subject.generated.fields {
        let interpreted = session.field_valid(f.name).unwrap();
        let generated_valid = (f.valid)(&generated).unwrap();
        if interpreted != generated_valid {
            return Some(format!("valid {} {interpreted} vs {generated_valid}", f.name));
        }
        let agree = match (session.field_access(f.name), (f.get)(&generated)) {
            (Ok(s), Ok(Value::Scalar(v))) => s.value == Some(v),
            (Ok(s), Ok(Value::Opaque { first, length })) => s.value.is_none() && (s.first, s.length) == (first, length),
            (Err(ContractViolation::InvalidField { .. }), Err(GeneratedViolation::InvalidField { .. })) => true,
            _ => false,
        };
        if !agree {
            return Some(format!("access {}", f.name));
        }
    }
    None
}

fn refinement_differential(model: &Model, parser: &MessageParser, bytes: &[u8]) -> Option<String> {
    let refinement = model.refinements().find(|r| r.name.ends_with("IPv4_In_Ethernet")).unwrap();
    let interpreted = contains(refinement, parser, &MessageBuffer::labeled(bytes, parser.message()));
    let generated = ethernet_frame::contains_ipv4_in_ethernet(&Buffer::labeled(bytes, ethernet_frame::MESSAGE));
    let agree = match (&interpreted, &generated) {
        (Ok(None), Ok(None)) => true,
        (Ok(Some(i)), Ok(Some(g))) => i.bytes() == g.bytes() && i.label() == g.label(),
        (Err(ContractViolation::InvalidMessage { .. }), Err(GeneratedViolation::InvalidMessage { .. })) => true,
        _ => false,
    };
    (!agree).then(|| format!("contains {interpreted:?} vs {generated:?}"))
}

fn generation() -> Vec<rflx_core::codegen::GeneratedFile> {
    let model = common::model();
    let parsers: Vec<_> = model.messages().map(derive_parser).collect();
    let refinements: Vec<_> = parsers.iter().map(|p| model.refinements_of(p.graph.name())).collect();
    let inputs: Vec<_> = parsers.iter().zip(&refinements).map(|(p, r)| (p, r.as_slice())).collect();
    generate_all(&inputs, &CodegenOptions::default())
}

fn differential_codegen() -> Outcome {
    let fx = fixture();
    let mut details = Vec::new();
    let mut pass = true;
    for (subject, corpus) in fx.subjects.iter().zip(&fx.corpora) {
        let mut disagreements = 0;
        let mut first = None;
        for b in corpus {
            let mut found = differential(subject, b);
            if found.is_none() && subject.name == "Ethernet.Frame" {
                found = refinement_differential(&fx.model, &subject.parser, b);
            }
            if let Some(d) = found {
                disagreements += 1;
                first.get_or_insert(d);
            }
        }
        pass &= disagreements == 0;
        let first = first.map(|d| format!(" first {d}")).unwrap_or_default();
        details.push(format!("{}: {disagreements} disagreements{first}", subject.name));
    }
    let (a, b) = (generation(), generation());
    let deterministic = a == b;
    let built = option_env!("OUT_DIR").map(|dir| {
        a.iter().all(|f| std::fs::read_to_string(Path::new(dir).join("generated").join(&f.path)).is_ok_and(|t| t == f.text))
    });
    pass &= deterministic && built != Some(false);
    details.push(format!("{} files byte-identical across runs: {deterministic}", a.len()));
    if let Some(built) = built {
        details.push(format!("identical to build output: {built}"));
    }
    Outcome::check(pass, details.join(", "))
}

/// Accessor results are coherent with the validity predicates: a valid field
/// is accessible inside the buffer and an invalid one raises a violation.
fn coherent(subject: &Subject, bytes: &[u8]) -> Result<(), String> {
    let buffer = MessageBuffer::labeled(bytes, subject.name);
    let session = subject.parser.session(&buffer).unwrap();
    let total = bytes.len() as u128 * 8;
    let _ = session.is_valid();
    for f in subject.generated.fields {
        let valid = session.field_valid(f.name).unwrap();
        match (valid, session.field_access(f.name)) {
            (true, Ok(s)) if s.first + s.length <= total => {}
            (false, Err(ContractViolation::InvalidField { .. })) => {}
            (valid, r) => return Err(format!("interpreter {}: valid={valid} access={r:?}", f.name)),
        }
    }
    let generated = Buffer::labeled(bytes, subject.generated.name);
    let _ = (subject.generated.is_valid)(&generated).unwrap();
    for f in subject.generated.fields {
        let valid = (f.valid)(&generated).unwrap();
        match (valid, (f.get)(&generated)) {
            (true, Ok(Value::Opaque { first, length })) if first + length <= total => {}
            (true, Ok(Value::Scalar(_))) => {}
            (false, Err(GeneratedViolation::InvalidField { .. })) => {}
            (valid, r) => return Err(format!("generated {}: valid={valid} access={r:?}", f.name)),
        }
    }
    Ok(())
}

fn fuzz() -> Outcome {
    let fx = fixture();
    let mut rng = StdRng::seed_from_u64(SEED ^ 0xf022);
    let mut details = Vec::new();
    let mut pass = true;
    let mut scratch = vec![0u8; FUZZ_MAX_LEN];
    for subject in &fx.subjects {
        let mut worst = Duration::ZERO;
        let mut failures = 0;
        let mut first = None;
        for i in 0..FUZZ_BUFFERS {
            let mutated;
            let bytes: &[u8] = if i % 2 == 0 {
                let n = rng.gen_range(0..=FUZZ_MAX_LEN);
                rng.fill(&mut scratch[..n]);
                &scratch[..n]
            } else {
                let seed = &subject.seeds[rng.gen_range(0..subject.seeds.len())];
                mutated = mutate(seed, &mut rng, FUZZ_MAX_LEN);
                &mutated
            };
            let start = Instant::now();
            let result = std::panic::catch_unwind(|| coherent(subject, bytes));
            worst = worst.max(start.elapsed());
            let problem = match result {
                Ok(Ok(())) => continue,
                Ok(Err(e)) => e,
                Err(_) => "panic".to_string(),
            };
            failures += 1;
            first.get_or_insert(problem);
        }
        let ok = failures == 0 && worst <= PER_BUFFER_LIMIT;
        pass &= ok;
        let first = first.map(|d| format!(" first {d}")).unwrap_or_default();
        details.push(format!("{}: {FUZZ_BUFFERS} buffers, {failures} failures, max {worst:?}{first}", subject.name));
    }
    Outcome::check(pass, details.join(", "))
}

#[derive(Default)]
struct Tally {
    calls: usize,
    raised: usize,
}

impl Tally {
    fn record(&mut self, raised: bool) {
        self.calls += 1;
        self.raised += usize::from(raised);
    }
}

fn contracts() -> Outcome {
    let fx = fixture();
    let mut tally = Tally::default();
    let mut uncovered = Vec::new();
    let mut first_miss = None;
    for (subject, corpus) in fx.subjects.iter().zip(&fx.corpora) {
        // Every prefix of every valid seed, then the corpus.
        let mut candidates: Vec<&[u8]> = Vec::new();
        for seed in &subject.seeds {
            candidates.extend((0..seed.len()).map(|n| &seed[..n]));
        }
        candidates.extend(corpus.iter().map(Vec::as_slice));
        for f in subject.generated.fields {
            let before = tally.calls;
            for &bytes in &candidates {
                let buffer = MessageBuffer::labeled(bytes, subject.name);
                let generated = Buffer::labeled(bytes, subject.generated.name);
                // Each side's precondition is decided by the other side.
                if !(f.valid)(&generated).unwrap() {
                    let raised = matches!(subject.parser.field_access(f.name, &buffer), Err(ContractViolation::InvalidField { .. }));
                    tally.record(raised);
                    if !raised {
                        first_miss.get_or_insert(format!("interpreter {} {}", subject.name, f.name));
                    }
                }
                if !subject.parser.field_valid(f.name, &buffer).unwrap() {
                    let raised = matches!((f.get)(&generated), Err(GeneratedViolation::InvalidField { .. }));
                    tally.record(raised);
                    if !raised {
                        first_miss.get_or_insert(format!("generated {} {}", subject.name, f.name));
                    }
                }
            }
            // Unlabeled and mislabeled buffers, including valid messages.
            for bytes in subject.seeds.iter().take(4) {
                let unlabeled = MessageBuffer::new(bytes);
                let mislabeled = MessageBuffer::labeled(bytes, "Other.Message");
                for b in [&unlabeled, &mislabeled] {
                    tally.record(matches!(
                        subject.parser.field_access(f.name, b),
                        Err(ContractViolation::Unlabeled { .. } | ContractViolation::Mislabeled { .. })
                    ));
                }
                for b in [Buffer::new(bytes), Buffer::labeled(bytes, "Other.Message")] {
                    tally.record(matches!(
                        (f.get)(&b),
                        Err(GeneratedViolation::Unlabeled { .. } | GeneratedViolation::Mislabeled { .. })
                    ));
                    tally.record((f.valid)(&b).is_err());
                }
            }
            if tally.calls == before {
                uncovered.push(format!("{}.{}", subject.name, f.name));
            }
        }
    }
    // Refinements need a valid outer message.
    let refinement = fx.model.refinements().find(|r| r.name.ends_with("IPv4_In_Ethernet")).unwrap();
    let ethernet = &fx.subjects[0];
    for bytes in fx.corpora[0].iter().filter(|b| !(ethernet.oracle)(b)).take(1000) {
        tally.record(matches!(
            contains(refinement, &ethernet.parser, &MessageBuffer::labeled(bytes, ethernet.name)),
            Err(ContractViolation::InvalidMessage { .. })
        ));
        tally.record(matches!(
            ethernet_frame::contains_ipv4_in_ethernet(&Buffer::labeled(bytes, ethernet_frame::MESSAGE)),
            Err(GeneratedViolation::InvalidMessage { .. })
        ));
    }
    let pass = tally.calls > 0 && tally.raised == tally.calls && uncovered.is_empty();
    let mut detail = format!("{}/{} calls with unmet preconditions raised", tally.raised, tally.calls);
    if !uncovered.is_empty() {
        detail.push_str(&format!("; no unmet precondition for {}", uncovered.join(", ")));
    }
    if let Some(m) = first_miss {
        detail.push_str(&format!("; first miss {m}"));
    }
    Outcome::check(pass, detail)
}

fn vector(dir: &str, name: &str) -> Vec<u8> {
    std::fs::read(common::repo().join("vectors").join(dir).join(format!("{name}.bin"))).unwrap()
}

fn refinement() -> Outcome {
    let fx = fixture();
    let ethernet = &fx.subjects[0];
    let refinement = fx.model.refinements().find(|r| r.name.ends_with("IPv4_In_Ethernet")).unwrap();
    let ipv4 = vector("ethernet", "ethernet_ii_ipv4");
    let ipv6 = vector("ethernet", "ethernet_ii_ipv6");
    let interpret = |b: &[u8]| {
        contains(refinement, &ethernet.parser, &MessageBuffer::labeled(b, ethernet.name))
            .map(|inner| inner.map(|i| (i.bytes().len(), i.label().map(str::to_string))))
    };
    let generate = |b: &[u8]| {
        ethernet_frame::contains_ipv4_in_ethernet(&Buffer::labeled(b, ethernet_frame::MESSAGE))
            .map(|inner| inner.map(|i| (i.bytes().len(), i.label().map(str::to_string))))
    };
    let expected = Some((INNER_LENGTH, Some("IPv4.Packet".to_string())));
    let results = (interpret(&ipv4), generate(&ipv4), interpret(&ipv6), generate(&ipv6));
    let pass = results.0.as_ref().ok() == Some(&expected)
        && results.1.as_ref().ok() == Some(&expected)
        && results.2.as_ref().ok() == Some(&None)
        && results.3.as_ref().ok() == Some(&None);
    let inner_valid = ipv4
        .get(14..)
        .map(|p| fx.subjects[2].parser.is_valid(&MessageBuffer::labeled(p, "IPv4.Packet")).unwrap())
        .unwrap_or(false);
    Outcome::check(
        pass && inner_valid,
        format!(
            "0x0800: {:?} / {:?}, 0x86dd: {:?} / {:?}, inner valid: {inner_valid}",
            results.0, results.1, results.2, results.3
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("spec fidelity", fidelity, Some(FIDELITY_BUDGET)),
        ("structural counts", counts, None),
        ("curated vectors", vectors, Some(VECTOR_BUDGET)),
        ("heartbleed regression", heartbleed, None),
        ("oracle equivalence", oracle_equivalence, Some(ORACLE_BUDGET)),
        ("differential codegen", differential_codegen, None),
        ("totality fuzz", fuzz, Some(FUZZ_BUDGET)),
        ("contract enforcement", contracts, None),
        ("refinement", refinement, None),
    ];
    // Corpus construction is charged to the oracle criterion.
    let setup = Instant::now();
    fixture();
    let setup = setup.elapsed();
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.into_iter().enumerate() {
        let (outcome, mut elapsed) = timed(run);
        if i == 4 {
            elapsed += setup;
        }
        let outcome = match budget {
            Some(b) => within(outcome, elapsed, b),
            None => outcome,
        };
        failed += usize::from(!outcome.pass);
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {} ({name}): {verdict} ({}, {:.2?})", i + 1, outcome.detail, elapsed);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
