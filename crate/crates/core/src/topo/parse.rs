//! Line-oriented topology file format.
//!
//! ```text
//! # comment
//! region <name>
//! as <asn> role=<tier1|transit|stub> region=<name> [auto|manual]
//! l3template <asn> routers=<r1,...> links=<rA-rB:cost:delay_us,...> [hosts=<yes|no>]
//! l2template <asn> switches=<s1:prio,...> links=<sA-sB,...> hosts=<switch:host:vlan,...> gateway=<switch:router> [vlans=<v1,...>]
//! link <asnA>.<router> <asnB>.<router> rel=<prov|cust|peer> delay_us=<int> bw_bps=<int> [admin=<up|down>]
//! ixp <id> members=<asn>.<router>,... [delay_us=<int>]
//! ```
//!
//! `rel=prov` means the A side is the provider of the B side, `rel=cust` the
//! reverse. Without an explicit `auto`/`manual` flag, tier1 and stub ASes are
//! auto-configured. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::spec::*;
use super::validate::{validate, Violation};
use super::TopoError;

/// Parse a topology file and validate the result.
pub fn parse_topology_spec(text: &str) -> Result<TopologySpec, TopoError> {
    let (spec, lines) = parse_unvalidated(text)?;
    let violations = validate(&spec);
    if let Some(v) = violations.into_iter().next() {
        let line = lines.line_of(&v);
        return Err(TopoError::Invalid { line, violation: v });
    }
    Ok(spec)
}

/// Source lines of the parsed elements, used to point errors at the file.
#[derive(Debug, Default)]
struct LineIndex {
    ases: BTreeMap<Asn, usize>,
    links: Vec<usize>,
    ixps: BTreeMap<u32, usize>,
}

impl LineIndex {
    fn line_of(&self, v: &Violation) -> Option<usize> {
        match v {
            Violation::DuplicateAsn(a)
            | Violation::AsnOutOfRange(a)
            | Violation::UnknownRegion { asn: a, .. }
            | Violation::MissingL3Template(a)
            | Violation::DuplicateRouter { asn: a, .. }
            | Violation::TooManyRouters(a)
            | Violation::InvalidName { asn: a, .. }
            | Violation::IntraLinkEndpoint { asn: a, .. }
            | Violation::DuplicateIntraLink { asn: a, .. }
            | Violation::TooManyIntraLinks(a)
            | Violation::L3Disconnected(a)
            | Violation::L2Invalid { asn: a, .. }
            | Violation::L2Disconnected(a)
            | Violation::VlanUndeclared { asn: a, .. }
            | Violation::TooManyVlans(a) => self.ases.get(a).copied(),
            Violation::SelfLink { index }
            | Violation::DanglingLinkEndpoint { index, .. }
            | Violation::DuplicateInterAsLink { index } => self.links.get(*index).copied(),
            Violation::IxpTooFewMembers(id)
            | Violation::IxpUnknownMember { ixp: id, .. }
            | Violation::IxpDuplicateMember { ixp: id, .. }
            | Violation::IxpIdCollision(id)
            | Violation::IxpIdOutOfRange(id)
            | Violation::DuplicateIxp(id) => self.ixps.get(id).copied(),
            Violation::DisconnectedAsGraph { .. } => None,
        }
    }
}

fn parse_unvalidated(text: &str) -> Result<(TopologySpec, LineIndex), TopoError> {
    let mut spec = TopologySpec::default();
    let mut idx = LineIndex::default();
    let mut l3: BTreeMap<Asn, (usize, L3Template)> = BTreeMap::new();
    let mut l2: BTreeMap<Asn, (usize, L2Template)> = BTreeMap::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| TopoError::Syntax { line: lineno, message: msg };
        let mut words = line.split_whitespace();
        let keyword = words.next().unwrap_or_default();
        let rest: Vec<&str> = words.collect();
        match keyword {
            "region" => {
                let [name] = rest.as_slice() else {
                    return Err(err("expected `region <name>`".into()));
                };
                if spec.regions.iter().any(|r| r == name) {
                    return Err(err(format!("region `{name}` declared twice")));
                }
                spec.regions.push(name.to_string());
            }
            "as" => {
                let (asn, kv) = positional_then_kv(&rest, 1, &err)?;
                let asn = parse_num::<Asn, _>(asn[0], "asn", &err)?;
                let mut role = None;
                let mut region = None;
                let mut auto = None;
                for item in kv {
                    match item {
                        Item::Flag("auto") => auto = Some(true),
                        Item::Flag("manual") => auto = Some(false),
                        Item::Flag(f) => return Err(err(format!("unknown flag `{f}`"))),
                        Item::Kv("role", v) => {
                            role = Some(match v {
                                "tier1" => AsRole::Tier1,
                                "transit" => AsRole::Transit,
                                "stub" => AsRole::Stub,
                                _ => return Err(err(format!("unknown role `{v}`"))),
                            })
                        }
                        Item::Kv("region", v) => region = Some(v.to_string()),
                        Item::Kv(k, _) => return Err(err(format!("unknown key `{k}`"))),
                    }
                }
                let role = role.ok_or_else(|| err("missing `role=`".into()))?;
                let region = region.ok_or_else(|| err("missing `region=`".into()))?;
                idx.ases.entry(asn).or_insert(lineno);
                spec.ases.push(AsSpec {
                    asn,
                    role,
                    region,
                    l3: L3Template::default(),
                    l2: None,
                    auto_configured: auto.unwrap_or(role.auto_by_default()),
                });
            }
            "l3template" => {
                let (pos, kv) = positional_then_kv(&rest, 1, &err)?;
                let asn = parse_num::<Asn, _>(pos[0], "asn", &err)?;
                let mut t = L3Template {
                    hosts: true,
                    ..Default::default()
                };
                let mut seen_routers = false;
                for item in kv {
                    match item {
                        Item::Kv("routers", v) => {
                            seen_routers = true;
                            t.routers = list(v).map(str::to_string).collect();
                        }
                        Item::Kv("links", v) => {
                            for l in list(v) {
                                let (ends, rest) = l
                                    .split_once(':')
                                    .ok_or_else(|| err(format!("bad link `{l}`")))?;
                                let (a, b) = ends
                                    .split_once('-')
                                    .ok_or_else(|| err(format!("bad link `{l}`")))?;
                                let (cost, delay) = rest
                                    .split_once(':')
                                    .ok_or_else(|| err(format!("bad link `{l}`")))?;
                                t.links.push(IntraLink {
                                    a: a.to_string(),
                                    b: b.to_string(),
                                    cost: parse_num(cost, "cost", &err)?,
                                    delay_us: parse_num(delay, "delay", &err)?,
                                });
                            }
                        }
                        Item::Kv("hosts", v) => {
                            t.hosts = match v {
                                "yes" => true,
                                "no" => false,
                                _ => return Err(err(format!("hosts must be yes|no, got `{v}`"))),
                            }
                        }
                        Item::Kv(k, _) => return Err(err(format!("unknown key `{k}`"))),
                        Item::Flag(f) => return Err(err(format!("unknown flag `{f}`"))),
                    }
                }
                if !seen_routers {
                    return Err(err("missing `routers=`".into()));
                }
                if l3.insert(asn, (lineno, t)).is_some() {
                    return Err(err(format!("second l3template for AS {asn}")));
                }
            }
            "l2template" => {
                let (pos, kv) = positional_then_kv(&rest, 1, &err)?;
                let asn = parse_num::<Asn, _>(pos[0], "asn", &err)?;
                let mut switches = Vec::new();
                let mut links = Vec::new();
                let mut host_ports = Vec::new();
                let mut gateway = None;
                let mut vlans: Option<Vec<u16>> = None;
                for item in kv {
                    match item {
                        Item::Kv("switches", v) => {
                            for s in list(v) {
                                let (name, prio) = s
                                    .split_once(':')
                                    .ok_or_else(|| err(format!("bad switch `{s}`")))?;
                                switches.push(SwitchSpec {
                                    name: name.to_string(),
                                    priority: parse_num(prio, "priority", &err)?,
                                });
                            }
                        }
                        Item::Kv("links", v) => {
                            for l in list(v) {
                                let (a, b) = l
                                    .split_once('-')
                                    .ok_or_else(|| err(format!("bad switch link `{l}`")))?;
                                links.push((a.to_string(), b.to_string()));
                            }
                        }
                        Item::Kv("hosts", v) => {
                            for h in list(v) {
                                let parts: Vec<&str> = h.split(':').collect();
                                let [sw, host, vlan] = parts.as_slice() else {
                                    return Err(err(format!("bad host port `{h}`")));
                                };
                                host_ports.push(HostPort {
                                    switch: sw.to_string(),
                                    host: host.to_string(),
                                    vlan: parse_num(vlan, "vlan", &err)?,
                                });
                            }
                        }
                        Item::Kv("gateway", v) => {
                            let (sw, r) = v
                                .split_once(':')
                                .ok_or_else(|| err(format!("bad gateway `{v}`")))?;
                            gateway = Some((sw.to_string(), r.to_string()));
                        }
                        Item::Kv("vlans", v) => {
                            vlans = Some(
                                list(v)
                                    .map(|x| parse_num(x, "vlan", &err))
                                    .collect::<Result<_, _>>()?,
                            );
                        }
                        Item::Kv(k, _) => return Err(err(format!("unknown key `{k}`"))),
                        Item::Flag(f) => return Err(err(format!("unknown flag `{f}`"))),
                    }
                }
                let gateway = gateway.ok_or_else(|| err("missing `gateway=`".into()))?;
                let vlans = vlans.unwrap_or_else(|| {
                    let mut v: Vec<u16> = host_ports.iter().map(|h| h.vlan).collect();
                    v.sort_unstable();
                    v.dedup();
                    v
                });
                let t = L2Template {
                    switches,
                    links,
                    host_ports,
                    gateway,
                    vlans,
                };
                if l2.insert(asn, (lineno, t)).is_some() {
                    return Err(err(format!("second l2template for AS {asn}")));
                }
            }
            "link" => {
                let (pos, kv) = positional_then_kv(&rest, 2, &err)?;
                let a = parse_router_ref(pos[0], &err)?;
                let b = parse_router_ref(pos[1], &err)?;
                let mut rel = None;
                let mut delay = None;
                let mut bw = None;
                let mut admin_up = true;
                for item in kv {
                    match item {
                        Item::Kv("rel", v) => {
                            rel = Some(match v {
                                "prov" => Relationship::AProviderOfB,
                                "cust" => Relationship::BProviderOfA,
                                "peer" => Relationship::Peer,
                                _ => return Err(err(format!("unknown relationship `{v}`"))),
                            })
                        }
                        Item::Kv("delay_us", v) => delay = Some(parse_num(v, "delay_us", &err)?),
                        Item::Kv("bw_bps", v) => bw = Some(parse_num(v, "bw_bps", &err)?),
                        Item::Kv("admin", v) => {
                            admin_up = match v {
                                "up" => true,
                                "down" => false,
                                _ => return Err(err(format!("admin must be up|down, got `{v}`"))),
                            }
                        }
                        Item::Kv(k, _) => return Err(err(format!("unknown key `{k}`"))),
                        Item::Flag(f) => return Err(err(format!("unknown flag `{f}`"))),
                    }
                }
                idx.links.push(lineno);
                spec.inter_as_links.push(InterAsLink {
                    a,
                    b,
                    relationship: rel.ok_or_else(|| err("missing `rel=`".into()))?,
                    delay_us: delay.ok_or_else(|| err("missing `delay_us=`".into()))?,
                    bandwidth_bps: bw.ok_or_else(|| err("missing `bw_bps=`".into()))?,
                    admin_up,
                });
            }
            "ixp" => {
                let (pos, kv) = positional_then_kv(&rest, 1, &err)?;
                let id = parse_num::<u32, _>(pos[0], "ixp id", &err)?;
                let mut members = None;
                let mut delay_us = DEFAULT_IXP_DELAY_US;
                for item in kv {
                    match item {
                        Item::Kv("members", v) => {
                            members = Some(
                                list(v)
                                    .map(|m| parse_router_ref(m, &err))
                                    .collect::<Result<Vec<_>, _>>()?,
                            )
                        }
                        Item::Kv("delay_us", v) => delay_us = parse_num(v, "delay_us", &err)?,
                        Item::Kv(k, _) => return Err(err(format!("unknown key `{k}`"))),
                        Item::Flag(f) => return Err(err(format!("unknown flag `{f}`"))),
                    }
                }
                idx.ixps.entry(id).or_insert(lineno);
                spec.ixps.push(IxpSpec {
                    id,
                    members: members.ok_or_else(|| err("missing `members=`".into()))?,
                    delay_us,
                });
            }
            other => return Err(err(format!("unknown statement `{other}`"))),
        }
    }

    for (asn, (lineno, t)) in l3 {
        match spec.as_spec_mut(asn) {
            Some(a) => a.l3 = t,
            None => {
                return Err(TopoError::Syntax {
                    line: lineno,
                    message: format!("l3template for undeclared AS {asn}"),
                })
            }
        }
    }
    for (asn, (lineno, t)) in l2 {
        match spec.as_spec_mut(asn) {
            Some(a) => a.l2 = Some(t),
            None => {
                return Err(TopoError::Syntax {
                    line: lineno,
                    message: format!("l2template for undeclared AS {asn}"),
                })
            }
        }
    }
    Ok((spec, idx))
}

pub(crate) const DEFAULT_IXP_DELAY_US: u64 = 1000;

enum Item<'a> {
    Flag(&'a str),
    Kv(&'a str, &'a str),
}

fn positional_then_kv<'a, E>(
    words: &[&'a str],
    n: usize,
    err: &impl Fn(String) -> E,
) -> Result<(Vec<&'a str>, Vec<Item<'a>>), E> {
    if words.len() < n {
        return Err(err(format!("expected {n} positional argument(s)")));
    }
    let pos = words[..n].to_vec();
    let mut items = Vec::new();
    for w in &words[n..] {
        match w.split_once('=') {
            Some((k, v)) => items.push(Item::Kv(k, v)),
            None => items.push(Item::Flag(w)),
        }
    }
    Ok((pos, items))
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').filter(|s| !s.is_empty())
}

fn parse_num<T: std::str::FromStr, E>(
    s: &str,
    what: &str,
    err: &impl Fn(String) -> E,
) -> Result<T, E> {
    s.parse().map_err(|_| err(format!("invalid {what} `{s}`")))
}

fn parse_router_ref<E>(s: &str, err: &impl Fn(String) -> E) -> Result<RouterRef, E> {
    let (asn, router) = s
        .split_once('.')
        .ok_or_else(|| err(format!("expected <asn>.<router>, got `{s}`")))?;
    Ok(RouterRef {
        asn: parse_num(asn, "asn", err)?,
        router: router.to_string(),
    })
}

/// Render a spec in the canonical file format. `parse(render(s)) == s`.
pub fn render_topology_spec(spec: &TopologySpec) -> String {
    let mut out = String::new();
    for r in &spec.regions {
        let _ = writeln!(out, "region {r}");
    }
    for a in &spec.ases {
        let _ = writeln!(
            out,
            "as {} role={} region={} {}",
            a.asn,
            a.role,
            a.region,
            if a.auto_configured { "auto" } else { "manual" }
        );
        let links: Vec<String> = a
            .l3
            .links
            .iter()
            .map(|l| format!("{}-{}:{}:{}", l.a, l.b, l.cost, l.delay_us))
            .collect();
        let _ = writeln!(
            out,
            "l3template {} routers={} links={} hosts={}",
            a.asn,
            a.l3.routers.join(","),
            links.join(","),
            if a.l3.hosts { "yes" } else { "no" }
        );
        if let Some(t) = &a.l2 {
            let sw: Vec<String> = t
                .switches
                .iter()
                .map(|s| format!("{}:{}", s.name, s.priority))
                .collect();
            let ln: Vec<String> = t.links.iter().map(|(x, y)| format!("{x}-{y}")).collect();
            let hp: Vec<String> = t
                .host_ports
                .iter()
                .map(|h| format!("{}:{}:{}", h.switch, h.host, h.vlan))
                .collect();
            let vl: Vec<String> = t.vlans.iter().map(u16::to_string).collect();
            let _ = writeln!(
                out,
                "l2template {} switches={} links={} hosts={} gateway={}:{} vlans={}",
                a.asn,
                sw.join(","),
                ln.join(","),
                hp.join(","),
                t.gateway.0,
                t.gateway.1,
                vl.join(",")
            );
        }
    }
    for l in &spec.inter_as_links {
        let rel = match l.relationship {
            Relationship::AProviderOfB => "prov",
            Relationship::BProviderOfA => "cust",
            Relationship::Peer => "peer",
        };
        let _ = write!(
            out,
            "link {} {} rel={} delay_us={} bw_bps={}",
            l.a, l.b, rel, l.delay_us, l.bandwidth_bps
        );
        if !l.admin_up {
            out.push_str(" admin=down");
        }
        out.push('\n');
    }
    for x in &spec.ixps {
        let m: Vec<String> = x.members.iter().map(|m| m.to_string()).collect();
        let _ = writeln!(
            out,
            "ixp {} members={} delay_us={}",
            x.id,
            m.join(","),
            x.delay_us
        );
    }
    out
}
