//! Scenario directories: a topology, per-AS configs, an ordered event list
//! and rubrics. Running one replays the events against a fresh network and
//! writes snapshots and grade reports.
//!
//! ```text
//! <dir>/topology.txt
//! <dir>/configs/<asn>/<device>.cfg
//! <dir>/events.txt
//! <dir>/rubrics/<name>.rubric
//! ```

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ipnet::Ipv4Net;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bgpsim::{
    converge, inject_hijack, originate_prefix, withdraw_prefix, BgpError, ConvergenceReport,
    DEFAULT_MAX_ROUNDS,
};
use crate::confcli::{load_config_script, DeviceKind, ScriptOutcome};
use crate::grader::{default_rubric, parse_rubric, run_rubric, GradeReport, Rubric};
use crate::monitor::{connectivity_matrix, diagnose, looking_glass, ConnectivityMatrix, LgView};
use crate::topo::{instantiate, parse_topology_spec, Asn, DeviceId, LinkError, Network, TopoError, TopologySpec};

/// Matrices kept in the history ring.
pub const MATRIX_HISTORY: usize = 32;

/// `<asn>.<device>`, e.g. `3.ROUTER1`.
pub fn parse_device_ref(s: &str) -> Result<DeviceId, String> {
    let (asn, name) = s
        .split_once('.')
        .ok_or_else(|| format!("expected <asn>.<device>, got `{s}`"))?;
    let asn = asn.parse::<Asn>().map_err(|_| format!("bad AS number in `{s}`"))?;
    if name.is_empty() {
        return Err(format!("missing device name in `{s}`"));
    }
    Ok(DeviceId::new(asn, name))
}

/// Which ASes an event addresses: one AS number or `all`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    One(Asn),
    All,
}

impl Serialize for Target {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Target::One(a) => s.serialize_u32(*a),
            Target::All => s.serialize_str("all"),
        }
    }
}

impl<'de> Deserialize<'de> for Target {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(Asn),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(a) => Ok(Target::One(a)),
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl Target {
    fn resolve(self, net: &Network) -> Vec<Asn> {
        match self {
            Target::One(a) => vec![a],
            Target::All => net.spec.ases.iter().map(|a| a.asn).collect(),
        }
    }
}

impl FromStr for Target {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "all" {
            Ok(Target::All)
        } else {
            s.parse().map(Target::One).map_err(|_| format!("bad AS number `{s}`"))
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::One(a) => write!(f, "{a}"),
            Target::All => f.write_str("all"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Event {
    Apply {
        asn: Asn,
        device: String,
        script: String,
    },
    /// Reference configuration; `phase` 1 is intra-domain only.
    Reference {
        target: Target,
        #[serde(default)]
        phase: Option<u8>,
    },
    Blank {
        asn: Asn,
    },
    FailLink {
        a: String,
        b: String,
    },
    RestoreLink {
        a: String,
        b: String,
    },
    FailRouter {
        router: String,
    },
    RestoreRouter {
        router: String,
    },
    Hijack {
        attacker: Asn,
        prefix: Ipv4Net,
        #[serde(default)]
        more_specific: bool,
    },
    Originate {
        asn: Asn,
        prefix: Ipv4Net,
    },
    Withdraw {
        asn: Asn,
        prefix: Ipv4Net,
    },
    Snapshot {
        tag: String,
    },
    Grade {
        target: Target,
        #[serde(default = "default_rubric_name")]
        rubric: String,
    },
}

fn default_rubric_name() -> String {
    "default".into()
}

impl Event {
    /// Does the event change the network (and so imply a converge)?
    pub fn mutates(&self) -> bool {
        !matches!(self, Event::Snapshot { .. } | Event::Grade { .. })
    }

    /// ASes whose devices the event writes to. `None` for topology-level
    /// events that only an instructor may issue.
    pub fn owner(&self) -> Option<Asn> {
        match self {
            Event::Apply { asn, .. } | Event::Blank { asn } | Event::Originate { asn, .. } | Event::Withdraw { asn, .. } => Some(*asn),
            Event::Reference { target: Target::One(a), .. } => Some(*a),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum EventError {
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    Bgp(#[from] BgpError),
    #[error(transparent)]
    Topo(#[from] TopoError),
    #[error("{0}")]
    Invalid(String),
}

/// Apply one mutating event. Snapshot and grade events are no-ops here.
/// Returns human-readable notes (config diagnostics, warnings).
pub fn apply_event(net: &mut Network, ev: &Event) -> Result<Vec<String>, EventError> {
    let mut notes = Vec::new();
    match ev {
        Event::Apply { asn, device, script } => {
            let out = load_config_script(net, *asn, device, script, false)
                .map_err(|e| EventError::Invalid(e.to_string()))?;
            notes.extend(script_notes(*asn, device, &out));
        }
        Event::Reference { target, phase } => {
            for asn in target.resolve(net) {
                match phase {
                    Some(p @ (1 | 2)) => net.apply_reference_phase(asn, *p)?,
                    Some(p) => return Err(EventError::Invalid(format!("no phase {p}"))),
                    None => {
                        net.apply_reference_phase(asn, 1)?;
                        net.apply_reference_phase(asn, 2)?;
                    }
                }
            }
        }
        Event::Blank { asn } => {
            if !net.spec.ases.iter().any(|a| a.asn == *asn) {
                return Err(TopoError::UnknownAsn(*asn).into());
            }
            net.blank_as(*asn);
        }
        Event::FailLink { a, b } | Event::RestoreLink { a, b } => {
            let a = parse_device_ref(a).map_err(EventError::Invalid)?;
            let b = parse_device_ref(b).map_err(EventError::Invalid)?;
            net.set_link_state(&a, &b, matches!(ev, Event::RestoreLink { .. }))?;
        }
        Event::FailRouter { router } | Event::RestoreRouter { router } => {
            let id = parse_device_ref(router).map_err(EventError::Invalid)?;
            net.set_device_failed(&id, matches!(ev, Event::FailRouter { .. }))?;
        }
        Event::Hijack { attacker, prefix, more_specific } => {
            inject_hijack(net, *attacker, *prefix, *more_specific)?;
        }
        Event::Originate { asn, prefix } => notes.extend(originate_prefix(net, *asn, *prefix)?),
        Event::Withdraw { asn, prefix } => withdraw_prefix(net, *asn, *prefix)?,
        Event::Snapshot { .. } | Event::Grade { .. } => {}
    }
    Ok(notes)
}

pub fn script_notes(asn: Asn, device: &str, out: &ScriptOutcome) -> Vec<String> {
    out.diagnostics
        .iter()
        .map(|d| format!("{asn}.{device} line {}: {:?}: {}", d.line, d.severity, d.message))
        .collect()
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{file} line {line}: {message}")]
    Malformed {
        file: String,
        line: usize,
        message: String,
    },
    #[error("topology: {0}")]
    Topology(#[from] TopoError),
    #[error("event {index} ({event}): {source}")]
    Event {
        index: usize,
        event: String,
        source: EventError,
    },
}

fn read(path: &Path) -> Result<String, ScenarioError> {
    fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), ScenarioError> {
    let io = |source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io)?;
    }
    fs::write(path, contents).map_err(io)
}

/// Parse `events.txt`. `apply` lines name a script file relative to `base`.
pub fn parse_events(text: &str, base: &Path) -> Result<Vec<Event>, ScenarioError> {
    let mut events = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| ScenarioError::Malformed {
            file: "events.txt".into(),
            line: i + 1,
            message,
        };
        let words: Vec<&str> = line.split_whitespace().collect();
        let arity = |n: usize| {
            if words.len() == n + 1 {
                Ok(())
            } else {
                Err(bad(format!("`{}` takes {n} arguments", words[0])))
            }
        };
        let asn = |s: &str| s.parse::<Asn>().map_err(|_| bad(format!("bad AS number `{s}`")));
        let prefix = |s: &str| s.parse::<Ipv4Net>().map_err(|_| bad(format!("bad prefix `{s}`")));
        let ev = match words[0] {
            "apply" => {
                arity(3)?;
                let script = read(&base.join(words[3])).map_err(|e| bad(e.to_string()))?;
                Event::Apply {
                    asn: asn(words[1])?,
                    device: words[2].into(),
                    script,
                }
            }
            "reference" => {
                if !(2..=3).contains(&words.len()) {
                    return Err(bad("usage: reference <asn|all> [phase=1|2]".into()));
                }
                let phase = match words.get(2) {
                    None => None,
                    Some(w) => Some(
                        w.strip_prefix("phase=")
                            .and_then(|p| p.parse::<u8>().ok())
                            .filter(|p| (1..=2).contains(p))
                            .ok_or_else(|| bad(format!("bad phase `{w}`")))?,
                    ),
                };
                Event::Reference {
                    target: words[1].parse().map_err(bad)?,
                    phase,
                }
            }
            "blank" => {
                arity(1)?;
                Event::Blank { asn: asn(words[1])? }
            }
            "fail-link" | "restore-link" => {
                arity(2)?;
                for w in &words[1..] {
                    parse_device_ref(w).map_err(bad)?;
                }
                let (a, b) = (words[1].to_string(), words[2].to_string());
                if words[0] == "fail-link" {
                    Event::FailLink { a, b }
                } else {
                    Event::RestoreLink { a, b }
                }
            }
            "fail-router" | "restore-router" => {
                arity(1)?;
                parse_device_ref(words[1]).map_err(bad)?;
                let router = words[1].to_string();
                if words[0] == "fail-router" {
                    Event::FailRouter { router }
                } else {
                    Event::RestoreRouter { router }
                }
            }
            "hijack" => {
                let more_specific = match words.get(3) {
                    None => false,
                    Some(&"more-specific") => true,
                    Some(w) => return Err(bad(format!("unexpected `{w}`"))),
                };
                if !(3..=4).contains(&words.len()) {
                    return Err(bad("usage: hijack <attacker> <prefix> [more-specific]".into()));
                }
                Event::Hijack {
                    attacker: asn(words[1])?,
                    prefix: prefix(words[2])?,
                    more_specific,
                }
            }
            "originate" | "withdraw" => {
                arity(2)?;
                let (a, p) = (asn(words[1])?, prefix(words[2])?);
                if words[0] == "originate" {
                    Event::Originate { asn: a, prefix: p }
                } else {
                    Event::Withdraw { asn: a, prefix: p }
                }
            }
            "snapshot" => {
                arity(1)?;
                let tag = words[1];
                if !tag.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                    return Err(bad(format!("bad snapshot tag `{tag}`")));
                }
                Event::Snapshot { tag: tag.into() }
            }
            "grade" => {
                arity(2)?;
                Event::Grade {
                    target: words[1].parse().map_err(bad)?,
                    rubric: words[2].into(),
                }
            }
            other => return Err(bad(format!("unknown event `{other}`"))),
        };
        events.push(ev);
    }
    Ok(events)
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub topology: TopologySpec,
    /// asn -> device -> script
    pub configs: BTreeMap<Asn, BTreeMap<String, String>>,
    pub events: Vec<Event>,
    pub rubrics: BTreeMap<String, Rubric>,
}

pub fn load_scenario(dir: &Path) -> Result<Scenario, ScenarioError> {
    let topology = parse_topology_spec(&read(&dir.join("topology.txt"))?)?;

    let mut configs: BTreeMap<Asn, BTreeMap<String, String>> = BTreeMap::new();
    let cfg_dir = dir.join("configs");
    if cfg_dir.is_dir() {
        for (asn_dir, name) in sorted_entries(&cfg_dir)? {
            let Ok(asn) = name.parse::<Asn>() else {
                return Err(ScenarioError::Malformed {
                    file: format!("configs/{name}"),
                    line: 0,
                    message: "directory name is not an AS number".into(),
                });
            };
            for (file, fname) in sorted_entries(&asn_dir)? {
                if let Some(dev) = fname.strip_suffix(".cfg") {
                    configs.entry(asn).or_default().insert(dev.to_string(), read(&file)?);
                }
            }
        }
    }

    let events_path = dir.join("events.txt");
    let events = if events_path.exists() {
        parse_events(&read(&events_path)?, dir)?
    } else {
        Vec::new()
    };

    let mut rubrics = BTreeMap::new();
    let rub_dir = dir.join("rubrics");
    if rub_dir.is_dir() {
        for (file, fname) in sorted_entries(&rub_dir)? {
            if let Some(name) = fname.strip_suffix(".rubric") {
                let r = parse_rubric(&read(&file)?).map_err(|e| ScenarioError::Malformed {
                    file: format!("rubrics/{fname}"),
                    line: e.line,
                    message: e.message,
                })?;
                rubrics.insert(name.to_string(), r);
            }
        }
    }

    Ok(Scenario {
        topology,
        configs,
        events,
        rubrics,
    })
}

fn sorted_entries(dir: &Path) -> Result<Vec<(PathBuf, String)>, ScenarioError> {
    let io = |source| ScenarioError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut out = Vec::new();
    for e in fs::read_dir(dir).map_err(io)? {
        let e = e.map_err(io)?;
        out.push((e.path(), e.file_name().to_string_lossy().into_owned()));
    }
    out.sort();
    Ok(out)
}

/// Write matrix, diagnosis and looking-glass dumps for the current state.
pub fn write_snapshot(net: &Network, dir: &Path) -> Result<(), ScenarioError> {
    let m = connectivity_matrix(net);
    write(&dir.join("matrix.json"), &(m.to_json() + "\n"))?;
    write(&dir.join("matrix.txt"), &m.render())?;
    let d = serde_json::to_string_pretty(&diagnose(&m)).unwrap();
    write(&dir.join("diagnosis.json"), &(d + "\n"))?;
    write(&dir.join("lg.txt"), &lg_dump(net))?;
    Ok(())
}

/// Every router's BGP and route views plus every switch's spanning tree,
/// concatenated in device order.
pub fn lg_dump(net: &Network) -> String {
    let mut out = String::new();
    for dev in net.devices.values() {
        let views: &[LgView] = match dev.kind() {
            DeviceKind::Router | DeviceKind::RouteServer => &[LgView::Bgp, LgView::Route],
            DeviceKind::Switch => &[LgView::SpanningTree],
            DeviceKind::Host => &[],
        };
        for v in views {
            if let Ok(text) = looking_glass(net, dev.id.asn, &dev.id.name, *v) {
                out.push_str(&format!("=== {} {}\n", dev.id, v.as_str()));
                out.push_str(&text);
                if !text.ends_with('\n') {
                    out.push('\n');
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct NonConvergence {
    /// Index into the event list, or `None` for the initial load.
    pub event: Option<usize>,
    pub report: ConvergenceReport,
}

#[derive(Debug, Clone, Default)]
pub struct ScenarioOutcome {
    pub grades: Vec<GradeReport>,
    pub snapshots: Vec<PathBuf>,
    pub failures: Vec<NonConvergence>,
    pub notes: Vec<String>,
    /// The last few matrices, oldest first.
    pub history: VecDeque<ConnectivityMatrix>,
}

impl ScenarioOutcome {
    /// Every grade passed and every converge reached a fixed point.
    pub fn success(&self) -> bool {
        self.failures.is_empty() && self.grades.iter().all(|g| g.all_passed())
    }

    pub fn last_matrix(&self) -> Option<&ConnectivityMatrix> {
        self.history.back()
    }

    fn record(&mut self, net: &Network, event: Option<usize>) {
        if !net.derived.report.converged {
            self.failures.push(NonConvergence {
                event,
                report: net.derived.report.clone(),
            });
        }
        if self.history.len() == MATRIX_HISTORY {
            self.history.pop_front();
        }
        self.history.push_back(connectivity_matrix(net));
    }
}

/// Load `dir` and replay it, writing outputs under `out`.
pub fn run_scenario(dir: &Path, out: &Path) -> Result<ScenarioOutcome, ScenarioError> {
    let sc = load_scenario(dir)?;
    run_loaded(&sc, out)
}

pub fn run_loaded(sc: &Scenario, out: &Path) -> Result<ScenarioOutcome, ScenarioError> {
    let mut net = instantiate(&sc.topology)?;
    let mut res = ScenarioOutcome::default();
    for (asn, scripts) in &sc.configs {
        for (dev, script) in scripts {
            let o = load_config_script(&mut net, *asn, dev, script, false).map_err(|e| {
                ScenarioError::Malformed {
                    file: format!("configs/{asn}/{dev}.cfg"),
                    line: 0,
                    message: e.to_string(),
                }
            })?;
            res.notes.extend(script_notes(*asn, dev, &o));
        }
    }
    converge(&mut net, DEFAULT_MAX_ROUNDS);
    res.record(&net, None);

    if sc.events.is_empty() {
        let path = out.join("snapshots").join("initial");
        write_snapshot(&net, &path)?;
        res.snapshots.push(path);
    }

    for (index, ev) in sc.events.iter().enumerate() {
        match ev {
            Event::Snapshot { tag } => {
                let path = out.join("snapshots").join(tag);
                write_snapshot(&net, &path)?;
                res.snapshots.push(path);
            }
            Event::Grade { target, rubric } => {
                for asn in target.resolve(&net) {
                    let r = match sc.rubrics.get(rubric) {
                        Some(r) => r.clone(),
                        None if rubric == "default" => default_rubric(asn),
                        None => {
                            return Err(ScenarioError::Malformed {
                                file: "events.txt".into(),
                                line: 0,
                                message: format!("no rubric `{rubric}`"),
                            })
                        }
                    };
                    let report = run_rubric(&net, asn, &r);
                    let stem = format!("grades/{asn}-{rubric}");
                    write(&out.join(format!("{stem}.json")), &(report.to_json() + "\n"))?;
                    write(&out.join(format!("{stem}.txt")), &report.render())?;
                    res.grades.push(report);
                }
            }
            _ => {
                let notes = apply_event(&mut net, ev).map_err(|source| ScenarioError::Event {
                    index,
                    event: format!("{ev:?}"),
                    source,
                })?;
                res.notes.extend(notes);
                converge(&mut net, DEFAULT_MAX_ROUNDS);
                res.record(&net, Some(index));
            }
        }
    }

    if let Some(m) = res.last_matrix() {
        write(&out.join("matrix.json"), &(m.to_json() + "\n"))?;
    }
    for (i, f) in res.failures.iter().enumerate() {
        let body = serde_json::to_string_pretty(f).unwrap();
        write(&out.join(format!("nonconvergence-{i}.json")), &(body + "\n"))?;
    }
    Ok(res)
}
