use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use mrpp_core::alert::blacklist_hits;
use mrpp_core::canonical::{content_hash, to_canonical, to_canonical_string};
use mrpp_core::codec::policy_to_value;
use mrpp_core::diff::DeltaEntry;
use mrpp_core::{
    alerts_from_update, audit_references, badge_gap_report, compute_badge, diff_policies, evaluate_policy,
    parse_policy, scaffold_from_manifest, serialize_canonical, star_rating, validate_policy, AlertBody, AlertKind,
    Flow, PermissionManifest, Policy, PreferenceProfile, SharingGraph,
};
use serde_json::{json, Value};

use crate::source::{DirSource, Registry};
use crate::{usage_error, CliError, Command, SourceArgs, EXIT_FAILURE, EXIT_OK};

pub(crate) struct Output<'a> {
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
    pub json: bool,
}

impl Output<'_> {
    fn out(&mut self, text: &str) -> Result<(), CliError> {
        self.stdout
            .write_all(text.as_bytes())
            .and_then(|_| self.stdout.flush())
            .map_err(|e| CliError::Io(format!("standard output: {e}")))
    }

    fn line(&mut self, text: &str) -> Result<(), CliError> {
        self.out(&format!("{text}\n"))
    }

    fn value(&mut self, value: &Value) -> Result<(), CliError> {
        self.out(&to_canonical_string(value))
    }

    fn warn(&mut self, text: &str) {
        let _ = writeln!(self.stderr, "mrpp: {text}");
    }
}

pub(crate) fn execute(command: Command, out: &mut Output) -> Result<i32, CliError> {
    match command {
        Command::Validate { files } => validate(&files, out),
        Command::Fmt { write, files } => fmt(&files, write, out),
        Command::Scaffold { manifest, party, out: file } => scaffold(&manifest, &party, file.as_deref(), out),
        Command::Diff { old, new } => diff(&old, &new, out),
        Command::Audit { source } => audit(&source, out),
        Command::Badge { source, party, min } => badge(&source, &party, min, out),
        Command::Gap { source, party, target } => gap(&source, &party, target, out),
        Command::Rate { source, profile, party } => rate(&source, &profile, &party, out),
        Command::Watch { source, profile, app_id, from_version, interval, max_polls, parties } => {
            let Some(url) = source.registry.as_deref().filter(|_| source.dir.is_none()) else {
                return Err(usage_error("watch", "watch needs --registry <URL> (or MRPP_REGISTRY_URL) and no --dir"));
            };
            let settings = WatchSettings {
                app_id,
                from_version,
                interval: Duration::from_secs(interval),
                max_polls,
            };
            watch(&Registry::new(url), &profile, &parties, &settings, out)
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn code(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

fn plural(n: usize, one: &str, many: &str) -> String {
    format!("{n} {}", if n == 1 { one } else { many })
}

fn names<T: Copy>(set: &std::collections::BTreeSet<T>, f: fn(T) -> &'static str) -> String {
    set.iter().map(|x| f(*x)).collect::<Vec<_>>().join(", ")
}

fn validate(files: &[std::path::PathBuf], out: &mut Output) -> Result<i32, CliError> {
    let mut all_valid = true;
    let mut reports = Vec::new();
    for path in files {
        let text = read(path)?;
        let file = path.display().to_string();
        match parse_policy(&text) {
            Ok(policy) => {
                let report = validate_policy(&policy);
                all_valid &= report.is_valid();
                if out.json {
                    reports.push(json!({
                        "file": file,
                        "valid": report.is_valid(),
                        "errors": report.errors,
                        "warnings": report.warnings,
                        "parse_errors": [],
                    }));
                    continue;
                }
                let (e, w) = (report.errors.len(), report.warnings.len());
                match (e, w) {
                    (0, 0) => out.line(&format!("{file}: valid"))?,
                    (0, _) => out.line(&format!("{file}: valid ({})", plural(w, "warning", "warnings")))?,
                    _ => out.line(&format!(
                        "{file}: invalid ({}, {})",
                        plural(e, "error", "errors"),
                        plural(w, "warning", "warnings")
                    ))?,
                }
                for f in &report.errors {
                    out.line(&format!("  error {} at {}: {}", f.rule_id, f.locator, f.message))?;
                }
                for f in &report.warnings {
                    out.line(&format!("  warning {} at {}: {}", f.rule_id, f.locator, f.message))?;
                }
            }
            Err(errors) => {
                all_valid = false;
                if out.json {
                    reports.push(json!({
                        "file": file,
                        "valid": false,
                        "errors": [],
                        "warnings": [],
                        "parse_errors": errors.0,
                    }));
                    continue;
                }
                out.line(&format!("{file}: unreadable ({})", plural(errors.0.len(), "parse error", "parse errors")))?;
                for e in &errors.0 {
                    out.line(&format!("  {} at {}: {}", e.kind.as_str(), e.locator(), e.message))?;
                }
            }
        }
    }
    if out.json {
        out.value(&Value::Array(reports))?;
    }
    Ok(code(all_valid))
}

fn fmt(files: &[std::path::PathBuf], write: bool, out: &mut Output) -> Result<i32, CliError> {
    let mut ok = true;
    let mut reports = Vec::new();
    for path in files {
        let text = read(path)?;
        let policy = match parse_policy(&text) {
            Ok(p) => p,
            Err(e) => {
                ok = false;
                out.warn(&format!("{}: cannot format: {e}", path.display()));
                continue;
            }
        };
        let canonical = serialize_canonical(&policy);
        let changed = canonical != text;
        if write && changed {
            std::fs::write(path, &canonical).map_err(|e| CliError::io(path, e))?;
        }
        if out.json {
            reports.push(json!({
                "file": path.display().to_string(),
                "changed": changed,
                "written": write && changed,
                "hash": content_hash(canonical.as_bytes()),
            }));
        } else if write {
            let state = if changed { "formatted" } else { "unchanged" };
            out.line(&format!("{}: {state}", path.display()))?;
        } else {
            out.out(&canonical)?;
        }
    }
    if out.json {
        out.value(&Value::Array(reports))?;
    }
    Ok(code(ok))
}

fn scaffold(manifest: &Path, party: &str, file: Option<&Path>, out: &mut Output) -> Result<i32, CliError> {
    let manifest: PermissionManifest = serde_json::from_str(&read(manifest)?)
        .map_err(|e| CliError::Domain(format!("{}: not a permission manifest: {e}", manifest.display())))?;
    let draft = scaffold_from_manifest(&manifest, party).map_err(|e| CliError::Domain(e.to_string()))?;
    let document = serialize_canonical(&draft.policy);
    if let Some(path) = file {
        std::fs::write(path, &document).map_err(|e| CliError::io(path, e))?;
    }
    if out.json {
        return out
            .value(&json!({
                "draft": policy_to_value(&draft.policy),
                "todos": draft.todos.iter().map(|t| t.to_json()).collect::<Vec<_>>(),
                "unmapped": draft.unmapped,
            }))
            .map(|_| EXIT_OK);
    }
    match file {
        Some(path) => out.line(&format!("wrote {}", path.display()))?,
        None => out.out(&document)?,
    }
    let mut notes = format!("{} to resolve:\n", plural(draft.todos.len(), "TODO", "TODOs"));
    for todo in &draft.todos {
        notes.push_str(&format!("  {}: {}\n", todo.locator(), todo.note()));
    }
    for name in &draft.unmapped {
        notes.push_str(&format!("  permission {name} has no data category; add a practice by hand if it collects data\n"));
    }
    let _ = out.stderr.write_all(notes.as_bytes());
    Ok(EXIT_OK)
}

fn read_policy(path: &Path) -> Result<Policy, CliError> {
    parse_policy(&read(path)?).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

fn describe_flow(f: &Flow) -> String {
    let mut text = format!(
        "{} {} {} [{}]",
        f.direction.as_str(),
        f.partner.kind.as_str(),
        f.partner.domain,
        names(&f.categories, |c| c.as_str())
    );
    if !f.purposes.is_empty() {
        text.push_str(&format!(" for {}", names(&f.purposes, |p| p.as_str())));
    }
    text
}

fn compact(v: &Value) -> String {
    to_canonical_string(v).trim_end().to_string()
}

fn describe_entry(entry: &DeltaEntry) -> String {
    let detail = match entry {
        DeltaEntry::PracticeAdded(p) | DeltaEntry::PracticeRemoved(p) => p.category.as_str().to_string(),
        DeltaEntry::PracticeFieldChanged { category, .. } => {
            let j = entry.to_json();
            format!("{} {}: {} -> {}", category.as_str(), j["field"].as_str().unwrap_or(""), compact(&j["old"]), compact(&j["new"]))
        }
        DeltaEntry::FlowAdded(f) | DeltaEntry::FlowRemoved(f) => describe_flow(f),
        DeltaEntry::AppIdChanged { old, new } => {
            format!("{} -> {}", old.as_deref().unwrap_or("(none)"), new.as_deref().unwrap_or("(none)"))
        }
    };
    format!("{} {detail}", entry.kind())
}

fn diff(old: &Path, new: &Path, out: &mut Output) -> Result<i32, CliError> {
    let (a, b) = (read_policy(old)?, read_policy(new)?);
    let delta = diff_policies(&a, &b).map_err(|e| CliError::Domain(e.to_string()))?;
    if out.json {
        return out.value(&delta.to_json()).map(|_| EXIT_OK);
    }
    out.line(&format!(
        "{} v{} -> v{} (issued {})",
        delta.party,
        delta.from_version,
        delta.to_version,
        delta.issued_at.render()
    ))?;
    if delta.is_empty() {
        out.line("  no changes")?;
    }
    for entry in &delta.entries {
        out.line(&format!("  {}", describe_entry(entry)))?;
    }
    Ok(EXIT_OK)
}

enum Source {
    Dir(DirSource),
    Registry(Registry),
}

impl Source {
    fn open(subcommand: &str, args: &SourceArgs, out: &mut Output) -> Result<Self, CliError> {
        match (&args.dir, &args.registry) {
            (Some(dir), _) => {
                let loaded = DirSource::load(dir)?;
                for path in &loaded.skipped {
                    out.warn(&format!("skipping {}: not a readable policy", path.display()));
                }
                Ok(Source::Dir(loaded))
            }
            (None, Some(url)) => Ok(Source::Registry(Registry::new(url))),
            (None, None) => Err(usage_error(subcommand, "give --dir <DIR> or --registry <URL> (or set MRPP_REGISTRY_URL)")),
        }
    }

    fn graph(&self) -> Result<SharingGraph, CliError> {
        match self {
            Source::Dir(d) => d.graph(),
            Source::Registry(r) => r.graph(),
        }
    }

    fn policy(&self, party: &str) -> Result<Option<Policy>, CliError> {
        match self {
            Source::Dir(d) => Ok(d.policy(party).cloned()),
            Source::Registry(r) => r.policy(party, None),
        }
    }
}

fn domain<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Domain(e.to_string())
}

fn audit(args: &SourceArgs, out: &mut Output) -> Result<i32, CliError> {
    let graph = Source::open("audit", args, out)?.graph()?;
    let report = audit_references(&graph);
    if out.json {
        out.value(&serde_json::to_value(&report).expect("audit report serializes"))?;
    } else {
        for f in &report.findings {
            out.line(&format!(
                "{} {} -> {} [{}]: {}",
                f.status.as_str(),
                f.from,
                f.to,
                names(&f.categories, |c| c.as_str()),
                f.explanation
            ))?;
        }
        out.line(&format!(
            "{}, {}",
            plural(report.findings.len(), "one-way reference", "one-way references"),
            plural(report.unverifiable, "unverifiable edge", "unverifiable edges")
        ))?;
    }
    Ok(code(report.findings.is_empty()))
}

fn badge(args: &SourceArgs, party: &str, min: Option<mrpp_core::BadgeLevel>, out: &mut Output) -> Result<i32, CliError> {
    let graph = Source::open("badge", args, out)?.graph()?;
    let level = compute_badge(&graph, party).map_err(domain)?;
    if out.json {
        out.value(&json!({ "party": party, "badge": level }))?;
    } else {
        out.line(level.as_str())?;
    }
    match min {
        Some(min) if level < min => {
            out.warn(&format!("{party} is {level}, below {min}"));
            Ok(EXIT_FAILURE)
        }
        _ => Ok(EXIT_OK),
    }
}

fn gap(args: &SourceArgs, party: &str, target: mrpp_core::BadgeLevel, out: &mut Output) -> Result<i32, CliError> {
    let graph = Source::open("gap", args, out)?.graph()?;
    let level = compute_badge(&graph, party).map_err(domain)?;
    let report = badge_gap_report(&graph, party, target).map_err(domain)?;
    if out.json {
        let mut value = serde_json::to_value(&report).expect("gap report serializes");
        value["badge"] = json!(level);
        out.value(&value)?;
    } else if report.qualifies() {
        out.line(&format!("{party}: {level}; meets {target}"))?;
    } else {
        let missing = report.missing_parties.len();
        out.line(&format!("{party}: {level}; {target} is blocked by {}", plural(missing, "party", "parties")))?;
        out.line("missing a valid MRPP:")?;
        for d in &report.missing_parties {
            out.line(&format!("  {d}"))?;
        }
        out.line("to do:")?;
        for action in &report.self_actions {
            out.line(&format!("  {action}"))?;
        }
    }
    Ok(code(report.qualifies()))
}

fn load_profile(path: &Path) -> Result<PreferenceProfile, CliError> {
    PreferenceProfile::from_json_str(&read(path)?).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

fn stars(n: f64) -> String {
    format!("{n:.1}")
}

fn rate(args: &SourceArgs, profile: &Path, party: &str, out: &mut Output) -> Result<i32, CliError> {
    let profile = load_profile(profile)?;
    let source = Source::open("rate", args, out)?;
    let policy = source.policy(party)?.ok_or_else(|| CliError::Domain(format!("no valid policy for {party}")))?;
    let violations = evaluate_policy(&policy, &profile).map_err(domain)?;
    let graph = source.graph()?;
    let app_id = policy.app_id.clone().unwrap_or_else(|| party.to_string());
    let scans = mrpp_core::scan_blacklist(&graph, &profile, party, &app_id).map_err(domain)?;
    let rating = star_rating(&violations, &blacklist_hits(&scans));
    if out.json {
        let blacklisted: Vec<Value> = scans
            .iter()
            .filter_map(|a| match &a.kind {
                AlertKind::BlacklistReachable { party, path, distance } => {
                    Some(json!({ "party": party, "path": path, "distance": distance }))
                }
                AlertKind::PolicyConflict { .. } => None,
            })
            .collect();
        out.value(&json!({
            "party": party,
            "profile_id": profile.profile_id,
            "raw": rating.raw,
            "display": rating.display,
            "violations": violations,
            "blacklisted": blacklisted,
        }))?;
        return Ok(EXIT_OK);
    }
    out.line(&format!("{party}: {} stars (raw {})", stars(rating.display), stars(rating.raw)))?;
    for v in &violations {
        let category = v.category.map(|c| format!(" {}", c.as_str())).unwrap_or_default();
        out.line(&format!("  -{} {}{category}: {}", v.weight, v.kind, v.detail))?;
    }
    for a in &scans {
        if let AlertKind::BlacklistReachable { party, path, distance } = &a.kind {
            out.line(&format!("  blacklisted {party} at distance {distance}: {}", path.join(" > ")))?;
        }
    }
    Ok(EXIT_OK)
}

pub(crate) struct WatchSettings {
    pub app_id: Option<String>,
    pub from_version: Option<i64>,
    pub interval: Duration,
    pub max_polls: Option<u64>,
}

struct Watched {
    current: Option<Policy>,
    etag: Option<String>,
}

fn print_alert(alert: &AlertBody, out: &mut Output) -> Result<(), CliError> {
    if out.json {
        return out.out(&to_canonical(alert));
    }
    let AlertKind::PolicyConflict { party, from_version, to_version, violations } = &alert.kind else {
        return Ok(());
    };
    out.line(&format!(
        "{} ({party} v{from_version} -> v{to_version}): {}",
        alert.app_id,
        plural(violations.len(), "new violation", "new violations")
    ))?;
    for v in violations {
        let category = v.category.map(|c| format!(" {}", c.as_str())).unwrap_or_default();
        out.line(&format!("  {}{category}: {}", v.kind, v.detail))?;
    }
    Ok(())
}

fn watch(
    registry: &Registry,
    profile: &Path,
    parties: &[String],
    settings: &WatchSettings,
    out: &mut Output,
) -> Result<i32, CliError> {
    let profile = load_profile(profile)?;
    let mut watched: BTreeMap<&str, Watched> = BTreeMap::new();
    for party in parties {
        let current = match settings.from_version {
            Some(v) => Some(
                registry
                    .policy(party, Some(v))?
                    .ok_or_else(|| CliError::Domain(format!("{party} has no version {v}")))?,
            ),
            None => None,
        };
        watched.insert(party.as_str(), Watched { current, etag: None });
    }
    let mut polls = 0u64;
    loop {
        for (party, state) in watched.iter_mut() {
            let path = format!("/policies/{party}");
            let reply = registry.get(&path, state.etag.as_deref())?;
            match reply.status {
                304 | 404 => continue,
                200 => {}
                _ => return Err(registry.refusal(&path, &reply)),
            }
            let latest = registry.decode(&path, &reply.body)?;
            state.etag = reply.etag;
            let Some(mut previous) = state.current.take() else {
                state.current = Some(latest);
                continue;
            };
            // Walk every intermediate version so each change is judged once.
            while previous.version < latest.version {
                let next = if previous.version + 1 == latest.version {
                    latest.clone()
                } else {
                    registry
                        .policy(party, Some(previous.version + 1))?
                        .ok_or_else(|| CliError::Io(format!("{} lost version {}", registry.url(&path), previous.version + 1)))?
                };
                let app_id = settings.app_id.clone().or_else(|| next.app_id.clone()).unwrap_or_else(|| party.to_string());
                for alert in alerts_from_update(&previous, &next, &profile, &app_id).map_err(domain)? {
                    print_alert(&alert, out)?;
                }
                previous = next;
            }
            state.current = Some(previous);
        }
        polls += 1;
        if settings.max_polls.is_some_and(|max| polls >= max) {
            return Ok(EXIT_OK);
        }
        std::thread::sleep(settings.interval);
    }
}
