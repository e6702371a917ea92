//! Golden transcripts for `mrpp`: every subcommand in text and JSON form
//! over the shared fixtures, plus one case per exit code per subcommand.
//!
//! A transcript records the exit code, standard output and standard error
//! with machine-specific paths and URLs replaced by `{fixtures}`, `{tmp}` and
//! `{registry}`. Set `MRPP_BLESS=1` to rewrite the files after an intended
//! change.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use mrpp_store::{ServiceConfig, Store};

pub const SUBCOMMANDS: [&str; 9] = ["validate", "fmt", "scaffold", "diff", "audit", "badge", "gap", "rate", "watch"];

pub fn workspace() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
}

pub fn fixtures() -> PathBuf {
    workspace().join("fixtures")
}

pub fn golden_dir() -> PathBuf {
    workspace().join("crates/cli/tests/golden")
}

pub struct Case {
    pub name: &'static str,
    pub args: &'static [&'static str],
    /// Fixture files copied into the case's scratch directory first, as
    /// (source under fixtures, destination name).
    pub copies: &'static [(&'static str, &'static str)],
}

const fn case(name: &'static str, args: &'static [&'static str]) -> Case {
    Case { name, args, copies: &[] }
}

const PRETTY_V1: &[(&str, &str)] = &[("diff/app-v1.mrpp.json", "app.mrpp.json")];
const ALICE: &str = "{fixtures}/profiles/alice.profile.json";
const BOB: &str = "{fixtures}/profiles/bob.profile.json";
const UNREACHABLE: &str = "http://127.0.0.1:1";

pub fn cases() -> Vec<Case> {
    vec![
        case("help", &["--help"]),
        case("version", &["--version"]),
        case("no-subcommand", &[]),
        case("validate-valid", &["validate", "{fixtures}/chain/app.example.mrpp.json", "{fixtures}/chain/agg1.example.mrpp.json"]),
        case("validate-valid-json", &["validate", "--json", "{fixtures}/chain/app.example.mrpp.json"]),
        case(
            "validate-invalid",
            &[
                "validate",
                "{fixtures}/invalid/truncated.mrpp.json",
                "{fixtures}/invalid/undeclared-flow.mrpp.json",
                "{fixtures}/invalid/unknown-purpose.mrpp.json",
            ],
        ),
        case(
            "validate-invalid-json",
            &[
                "validate",
                "--json",
                "{fixtures}/invalid/truncated.mrpp.json",
                "{fixtures}/invalid/undeclared-flow.mrpp.json",
                "{fixtures}/invalid/unknown-purpose.mrpp.json",
            ],
        ),
        case("validate-usage", &["validate"]),
        case("validate-missing-file", &["validate", "{fixtures}/absent.mrpp.json"]),
        case("fmt-stdout", &["fmt", "{fixtures}/chain/agg1.example.mrpp.json"]),
        case("fmt-json", &["fmt", "--json", "{fixtures}/chain/agg1.example.mrpp.json"]),
        Case { name: "fmt-write", args: &["fmt", "--write", "{tmp}/app.mrpp.json"], copies: PRETTY_V1 },
        Case { name: "fmt-write-json", args: &["fmt", "--write", "--json", "{tmp}/app.mrpp.json"], copies: PRETTY_V1 },
        case("fmt-unreadable", &["fmt", "{fixtures}/invalid/truncated.mrpp.json"]),
        case("fmt-usage", &["fmt", "--write"]),
        case("fmt-missing-file", &["fmt", "{fixtures}/absent.mrpp.json"]),
        case("scaffold-navigation", &["scaffold", "{fixtures}/manifests/navigation.json", "nav.example"]),
        case("scaffold-organizer-json", &["scaffold", "--json", "{fixtures}/manifests/organizer.json", "org.example"]),
        case("scaffold-out", &["scaffold", "--out", "{tmp}/nav.mrpp.json", "{fixtures}/manifests/navigation.json", "nav.example"]),
        case("scaffold-bad-party", &["scaffold", "{fixtures}/manifests/navigation.json", "Not_A_Domain"]),
        case("scaffold-usage", &["scaffold", "{fixtures}/manifests/navigation.json"]),
        case("scaffold-missing-file", &["scaffold", "{fixtures}/manifests/absent.json", "nav.example"]),
        case("diff-text", &["diff", "{fixtures}/diff/app-v1.mrpp.json", "{fixtures}/diff/app-v2.mrpp.json"]),
        case("diff-json", &["diff", "--json", "{fixtures}/diff/app-v1.mrpp.json", "{fixtures}/diff/app-v2.mrpp.json"]),
        case("diff-same", &["diff", "{fixtures}/diff/app-v1.mrpp.json", "{fixtures}/diff/app-v1.mrpp.json"]),
        case("diff-other-party", &["diff", "{fixtures}/chain/app.example.mrpp.json", "{fixtures}/chain/agg1.example.mrpp.json"]),
        case("diff-usage", &["diff", "{fixtures}/diff/app-v1.mrpp.json"]),
        case("diff-missing-file", &["diff", "{fixtures}/diff/app-v1.mrpp.json", "{fixtures}/diff/absent.mrpp.json"]),
        case("audit-confirmed", &["audit", "--dir", "{fixtures}/confirmed"]),
        case("audit-oneway", &["audit", "--dir", "{fixtures}/oneway"]),
        case("audit-oneway-json", &["audit", "--json", "--dir", "{fixtures}/oneway"]),
        case("audit-table", &["audit", "--dir", "{fixtures}/table"]),
        case("audit-table-json", &["audit", "--json", "--dir", "{fixtures}/table"]),
        case("audit-registry", &["audit", "--registry", "{registry}"]),
        case("audit-usage", &["audit"]),
        case("audit-missing-dir", &["audit", "--dir", "{fixtures}/absent"]),
        case("audit-unreachable", &["audit", "--registry", UNREACHABLE]),
        case("badge-angrybirds", &["badge", "--dir", "{fixtures}/angrybirds", "rovio-fixture.example"]),
        case("badge-angrybirds-json", &["badge", "--json", "--dir", "{fixtures}/angrybirds", "rovio-fixture.example"]),
        case("badge-confirmed", &["badge", "--dir", "{fixtures}/confirmed", "shop.example"]),
        case("badge-below-min", &["badge", "--min", "gold", "--dir", "{fixtures}/angrybirds", "rovio-fixture.example"]),
        case("badge-unknown-party", &["badge", "--dir", "{fixtures}/angrybirds", "nobody.example"]),
        case("badge-registry", &["badge", "--registry", "{registry}", "app.example"]),
        case("badge-usage", &["badge", "--dir", "{fixtures}/angrybirds"]),
        case("badge-missing-dir", &["badge", "--dir", "{fixtures}/absent", "rovio-fixture.example"]),
        case("gap-angrybirds-gold", &["gap", "--target", "gold", "--dir", "{fixtures}/angrybirds", "rovio-fixture.example"]),
        case("gap-angrybirds-gold-json", &["gap", "--json", "--target", "gold", "--dir", "{fixtures}/angrybirds", "rovio-fixture.example"]),
        case("gap-meets-bronze", &["gap", "--target", "bronze", "--dir", "{fixtures}/angrybirds", "rovio-fixture.example"]),
        case("gap-chain-platinum", &["gap", "--target", "platinum", "--dir", "{fixtures}/chain", "app.example"]),
        case("gap-registry", &["gap", "--target", "platinum", "--registry", "{registry}", "app.example"]),
        case("gap-usage", &["gap", "--dir", "{fixtures}/angrybirds", "rovio-fixture.example"]),
        case("gap-bad-level", &["gap", "--target", "diamond", "--dir", "{fixtures}/angrybirds", "rovio-fixture.example"]),
        case("gap-unreachable", &["gap", "--target", "gold", "--registry", UNREACHABLE, "app.example"]),
        case("rate-alice", &["rate", "--profile", ALICE, "--dir", "{fixtures}/chain", "app.example"]),
        case("rate-alice-json", &["rate", "--json", "--profile", ALICE, "--dir", "{fixtures}/chain", "app.example"]),
        case("rate-bob", &["rate", "--profile", BOB, "--dir", "{fixtures}/chain", "app.example"]),
        case("rate-bob-json", &["rate", "--json", "--profile", BOB, "--dir", "{fixtures}/chain", "app.example"]),
        case("rate-registry", &["rate", "--profile", ALICE, "--registry", "{registry}", "app.example"]),
        case("rate-unknown-party", &["rate", "--profile", ALICE, "--dir", "{fixtures}/chain", "nobody.example"]),
        case("rate-not-a-profile", &["rate", "--profile", "{fixtures}/chain/app.example.mrpp.json", "--dir", "{fixtures}/chain", "app.example"]),
        case("rate-usage", &["rate", "--dir", "{fixtures}/chain", "app.example"]),
        case("rate-missing-profile", &["rate", "--profile", "{fixtures}/profiles/absent.json", "--dir", "{fixtures}/chain", "app.example"]),
        case(
            "watch-text",
            &["watch", "--registry", "{registry}", "--profile", ALICE, "--from-version", "1", "--max-polls", "2", "--interval", "0", "app.example"],
        ),
        case(
            "watch-json",
            &["watch", "--json", "--registry", "{registry}", "--profile", ALICE, "--from-version", "1", "--max-polls", "1", "--interval", "0", "app.example", "agg1.example"],
        ),
        case(
            "watch-quiet",
            &["watch", "--registry", "{registry}", "--profile", BOB, "--from-version", "1", "--max-polls", "1", "--interval", "0", "app.example"],
        ),
        case(
            "watch-no-such-version",
            &["watch", "--registry", "{registry}", "--profile", ALICE, "--from-version", "9", "--max-polls", "1", "app.example"],
        ),
        case("watch-usage", &["watch", "--dir", "{fixtures}/chain", "--profile", ALICE, "app.example"]),
        case("watch-unreachable", &["watch", "--registry", UNREACHABLE, "--profile", ALICE, "--max-polls", "1", "app.example"]),
    ]
}

/// A store serving the chain fixture (with a second app.example version)
/// and the Angry Birds fixture on a loopback port.
pub struct Server {
    pub url: String,
    _data: tempfile::TempDir,
    _runtime: tokio::runtime::Runtime,
}

impl Server {
    pub fn start() -> Self {
        let data = tempfile::tempdir().expect("temp dir");
        let store = Store::open(data.path(), ServiceConfig::default()).expect("open store");
        for (party, file) in [
            ("agg1.example", "chain/agg1.example.mrpp.json"),
            ("app.example", "chain/app.example.mrpp.json"),
            ("app.example", "store/app.example-v2.mrpp.json"),
            ("rovio-fixture.example", "angrybirds/rovio-fixture.example.mrpp.json"),
        ] {
            let body = std::fs::read_to_string(fixtures().join(file)).expect("fixture");
            store.put_policy(party, &body).expect("fixture policy accepted");
        }
        let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().expect("runtime");
        let listener = runtime.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).expect("bind loopback");
        let url = format!("http://{}", listener.local_addr().expect("local addr"));
        let router = mrpp_store::http::router(std::sync::Arc::new(store));
        runtime.spawn(async move { axum::serve(listener, router).await });
        Server { url, _data: data, _runtime: runtime }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub exit: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Run one case in a fresh scratch directory, with placeholders expanded in
/// the arguments and restored in the output.
pub fn run_case(case: &Case, registry: &str) -> Transcript {
    let tmp = tempfile::tempdir().expect("temp dir");
    for (src, dest) in case.copies {
        std::fs::copy(fixtures().join(src), tmp.path().join(dest)).expect("copy fixture");
    }
    let fixtures = fixtures().display().to_string();
    let tmp_path = tmp.path().display().to_string();
    let expand = |s: &str| s.replace("{fixtures}", &fixtures).replace("{tmp}", &tmp_path).replace("{registry}", registry);
    let args: Vec<String> = std::iter::once("mrpp".to_string()).chain(case.args.iter().map(|a| expand(a))).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let exit = mrpp_cli::run(args, &mut out, &mut err);
    let restore = |bytes: Vec<u8>| {
        String::from_utf8(bytes)
            .expect("utf-8 output")
            .replace(&tmp_path, "{tmp}")
            .replace(&fixtures, "{fixtures}")
            .replace(registry, "{registry}")
    };
    Transcript { exit, stdout: restore(out), stderr: restore(err) }
}

pub fn render(case: &Case, t: &Transcript) -> String {
    format!(
        "$ mrpp {}\nexit: {}\n--- stdout\n{}--- stderr\n{}",
        case.args.join(" "),
        t.exit,
        t.stdout,
        t.stderr
    )
}

fn subcommand(case: &Case) -> Option<&'static str> {
    case.args.first().copied().filter(|a| SUBCOMMANDS.contains(a))
}

fn is_json(case: &Case) -> bool {
    case.args.contains(&"--json")
}

/// Problems with `--json` output: each line must be one canonical JSON value.
fn json_problems(case: &Case, t: &Transcript) -> Vec<String> {
    if !is_json(case) || t.stdout.is_empty() {
        return Vec::new();
    }
    let mut problems = Vec::new();
    for line in t.stdout.lines() {
        match serde_json::from_str::<serde_json::Value>(line) {
            Ok(v) if mrpp_core::canonical::to_canonical_string(&v) == format!("{line}\n") => {}
            Ok(_) => problems.push(format!("{}: non-canonical JSON line {line}", case.name)),
            Err(e) => problems.push(format!("{}: invalid JSON line ({e}): {line}", case.name)),
        }
    }
    problems
}

#[derive(Debug, Default)]
pub struct GoldenReport {
    pub cases: usize,
    pub failures: Vec<String>,
    /// (subcommand, exit code) pairs with no case.
    pub matrix_gaps: Vec<(String, i32)>,
    /// Subcommands without both a text and a `--json` case that succeed or
    /// fail on domain grounds.
    pub format_gaps: Vec<String>,
}

impl GoldenReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.matrix_gaps.is_empty() && self.format_gaps.is_empty()
    }
}

/// Run every case twice, compare with the goldens (or rewrite them when
/// `bless`), and check the exit-code matrix and JSON form.
pub fn check_goldens(bless: bool) -> GoldenReport {
    let server = Server::start();
    let mut report = GoldenReport::default();
    let mut seen: BTreeMap<&str, BTreeSet<i32>> = BTreeMap::new();
    let mut formats: BTreeMap<&str, (bool, bool)> = BTreeMap::new();
    let all = cases();
    let names: BTreeSet<&str> = all.iter().map(|c| c.name).collect();
    assert_eq!(names.len(), all.len(), "case names must be unique");

    for case in &all {
        report.cases += 1;
        let first = run_case(case, &server.url);
        let second = run_case(case, &server.url);
        if first != second {
            report.failures.push(format!("{}: output differs between two runs", case.name));
        }
        report.failures.extend(json_problems(case, &first));
        if let Some(sub) = subcommand(case) {
            seen.entry(sub).or_default().insert(first.exit);
            if first.exit <= 1 {
                let entry = formats.entry(sub).or_default();
                if is_json(case) {
                    entry.1 = true;
                } else {
                    entry.0 = true;
                }
            }
        }
        let path = golden_dir().join(format!("{}.txt", case.name));
        let rendered = render(case, &first);
        if bless {
            std::fs::create_dir_all(golden_dir()).expect("golden dir");
            std::fs::write(&path, &rendered).expect("write golden");
            continue;
        }
        match std::fs::read_to_string(&path) {
            Ok(expected) if expected == rendered => {}
            Ok(expected) => report.failures.push(format!(
                "{}: transcript differs from {}\n--- expected\n{expected}--- actual\n{rendered}",
                case.name,
                path.display()
            )),
            Err(e) => report.failures.push(format!("{}: {}: {e}", case.name, path.display())),
        }
    }
    for sub in SUBCOMMANDS {
        for code in 0..=3 {
            if !seen.get(sub).is_some_and(|codes| codes.contains(&code)) {
                report.matrix_gaps.push((sub.to_string(), code));
            }
        }
        if formats.get(sub) != Some(&(true, true)) {
            report.format_gaps.push(sub.to_string());
        }
    }
    report
}

/// Paths of golden files that no case produces.
pub fn orphan_goldens() -> Vec<PathBuf> {
    let names: BTreeSet<String> = cases().iter().map(|c| format!("{}.txt", c.name)).collect();
    let Ok(entries) = std::fs::read_dir(golden_dir()) else { return Vec::new() };
    entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| !p.file_name().and_then(|n| n.to_str()).is_some_and(|n| names.contains(n)))
        .collect()
}
