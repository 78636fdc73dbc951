use std::collections::BTreeSet;
use std::fmt::Write;
use std::net::Ipv4Addr;

use ipnet::Ipv4Net;
use serde::Serialize;

use crate::bgpsim::{SessionKind, SessionState, IdleReason};
use crate::dataplane::ping;
use crate::l2sim::{L2Target, NotReachable};
use crate::monitor::{as_path_between, AsPathReport};
use crate::topo::{Asn, DeviceId, NeighborKind, Network};

use super::rubric::{Check, CheckKind, Rubric};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub kind: CheckKind,
    pub weight: u32,
    pub pass: bool,
    pub evidence: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GradeReport {
    pub asn: Asn,
    pub checks: Vec<CheckResult>,
    pub score: u32,
    pub max_score: u32,
}

impl GradeReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render(&self) -> String {
        let mut out = format!("Grade for AS {}: {}/{}\n", self.asn, self.score, self.max_score);
        for c in &self.checks {
            writeln!(
                out,
                "  [{}] {} ({}, weight {})",
                if c.pass { "PASS" } else { "FAIL" },
                c.id,
                c.kind,
                c.weight
            )
            .unwrap();
            for e in c.evidence.iter().take(10) {
                writeln!(out, "        {e}").unwrap();
            }
            if c.evidence.len() > 10 {
                writeln!(out, "        ... {} more", c.evidence.len() - 10).unwrap();
            }
        }
        out
    }
}

/// Evaluate every check of the rubric against one AS.
pub fn run_rubric(net: &Network, asn: Asn, rubric: &Rubric) -> GradeReport {
    let checks: Vec<CheckResult> = rubric
        .checks
        .iter()
        .map(|c| {
            let (pass, evidence) = evaluate(net, asn, c);
            CheckResult {
                id: c.id.clone(),
                kind: c.kind,
                weight: c.weight,
                pass,
                evidence,
            }
        })
        .collect();
    GradeReport {
        asn,
        score: checks.iter().filter(|c| c.pass).map(|c| c.weight).sum(),
        max_score: checks.iter().map(|c| c.weight).sum(),
        checks,
    }
}

type Outcome = (bool, Vec<String>);

fn verdict(evidence: Vec<String>) -> Outcome {
    (evidence.is_empty(), evidence)
}

fn evaluate(net: &Network, asn: Asn, c: &Check) -> Outcome {
    if net.spec.as_spec(asn).is_none() {
        return (false, vec![format!("unknown AS {asn}")]);
    }
    match c.kind {
        CheckKind::Addressing => addressing(net, asn),
        CheckKind::L2Isolation => l2_isolation(net, asn),
        CheckKind::StpPattern => stp_pattern(net, asn, c),
        CheckKind::IntraReach => intra_reach(net, asn),
        CheckKind::Ecmp => ecmp(net, asn, c),
        CheckKind::SessionsUp => sessions_up(net, asn),
        CheckKind::PolicyLocalPref => policy_local_pref(net, asn, c),
        CheckKind::PolicyExport => policy_export(net, asn),
        CheckKind::HijackReport => hijack_report(net, c),
    }
}

fn addressing(net: &Network, asn: Asn) -> Outcome {
    let mut ev = Vec::new();
    for (k, planned) in net.plan.interfaces.iter().filter(|(k, _)| k.asn == asn) {
        let got = net
            .device(asn, &k.device)
            .and_then(|d| d.config.interfaces.get(&k.iface))
            .and_then(|i| i.address);
        if got != Some(*planned) {
            let got = got.map(|a| a.to_string()).unwrap_or_else(|| "none".into());
            ev.push(format!("{asn}.{} {}: expected {planned}, found {got}", k.device, k.iface));
        }
    }
    verdict(ev)
}

fn l2_isolation(net: &Network, asn: Asn) -> Outcome {
    let Some(tpl) = net.spec.as_spec(asn).and_then(|a| a.l2.as_ref()) else {
        return (true, vec!["no L2 network".into()]);
    };
    let Some(l2) = net.derived.l2.get(&asn) else {
        return (false, vec!["L2 state missing; converge first".into()]);
    };
    let mut ev = Vec::new();
    for (i, a) in tpl.host_ports.iter().enumerate() {
        for b in &tpl.host_ports[i + 1..] {
            let r = l2.reach(net, &a.host, &L2Target::Host(&b.host));
            match (a.vlan == b.vlan, r) {
                (true, Err(e)) => ev.push(format!("{} -> {} (vlan {}): {e}", a.host, b.host, a.vlan)),
                (false, Ok(_)) => ev.push(format!(
                    "{} (vlan {}) reaches {} (vlan {}) at L2",
                    a.host, a.vlan, b.host, b.vlan
                )),
                (false, Err(NotReachable::VlanIsolation)) | (false, Err(_)) | (true, Ok(_)) => {}
            }
        }
        if let Err(e) = l2.reach(net, &a.host, &L2Target::Gateway { vlan: a.vlan }) {
            ev.push(format!("{} -> gateway (vlan {}): {e}", a.host, a.vlan));
        }
    }
    verdict(ev)
}

fn stp_pattern(net: &Network, asn: Asn, c: &Check) -> Outcome {
    let Some(spec) = c.params.get("edges") else {
        return (false, vec!["missing parameter edges=A-B,...".into()]);
    };
    let mut expected = BTreeSet::new();
    for e in spec.split(',').filter(|s| !s.is_empty()) {
        let Some((x, y)) = e.split_once('-') else {
            return (false, vec![format!("malformed edge `{e}`")]);
        };
        let (x, y) = (x.to_string(), y.to_string());
        expected.insert(if x <= y { (x, y) } else { (y, x) });
    }
    let Some(l2) = net.derived.l2.get(&asn) else {
        return (false, vec!["no L2 network".into()]);
    };
    let mut actual = BTreeSet::new();
    for t in &l2.trees {
        actual.extend(t.edge_names(&l2.graph));
    }
    let mut ev = Vec::new();
    for (x, y) in expected.difference(&actual) {
        ev.push(format!("expected active edge {x}-{y} is blocked"));
    }
    for (x, y) in actual.difference(&expected) {
        ev.push(format!("edge {x}-{y} is active but not expected"));
    }
    verdict(ev)
}

fn hosts_of(net: &Network, asn: Asn) -> Vec<DeviceId> {
    net.devices_of(asn)
        .filter(|d| d.kind() == crate::confcli::DeviceKind::Host)
        .map(|d| d.id.clone())
        .collect()
}

fn intra_reach(net: &Network, asn: Asn) -> Outcome {
    let hosts = hosts_of(net, asn);
    let mut ev = Vec::new();
    for a in &hosts {
        for b in &hosts {
            if a == b {
                continue;
            }
            let Some(addr) = net.plan.interfaces.iter().find_map(|(k, v)| {
                (k.asn == b.asn && k.device == b.name && k.iface == crate::topo::ifname::HOST_ETH)
                    .then(|| v.addr())
            }) else {
                continue;
            };
            let p = ping(net, a, addr);
            if !p.success {
                ev.push(format!("{a} -> {b} ({addr}): {:?}", p.failure.unwrap()));
            }
        }
    }
    verdict(ev)
}

fn ecmp(net: &Network, asn: Asn, c: &Check) -> Outcome {
    let (Some(router), Some(dst)) = (c.params.get("router"), c.params.get("dst")) else {
        return (false, vec!["missing parameters router=<name> dst=<address>".into()]);
    };
    let Ok(dst) = dst.parse::<Ipv4Addr>() else {
        return (false, vec![format!("malformed address `{dst}`")]);
    };
    let min: usize = c.params.get("min").and_then(|m| m.parse().ok()).unwrap_or(2);
    let id = DeviceId::new(asn, router.clone());
    let Some(e) = net.derived.fibs.get(&id).and_then(|f| f.longest_match(dst)) else {
        return (false, vec![format!("{id} has no route to {dst}")]);
    };
    if e.next_hops.len() >= min {
        (true, Vec::new())
    } else {
        (
            false,
            vec![format!(
                "{id} reaches {dst} via {} with {} next hop(s), need {min}",
                e.prefix,
                e.next_hops.len()
            )],
        )
    }
}

/// Sessions touching the AS. Sessions whose other end belongs to another AS
/// that has not configured its side are skipped.
fn sessions_up(net: &Network, asn: Asn) -> Outcome {
    let mut ev = Vec::new();
    let mut up = 0;
    for s in &net.derived.sessions {
        let a_ours = s.a.device.as_ref().is_some_and(|d| d.asn == asn);
        let b_ours = s.b.device.as_ref().is_some_and(|d| d.asn == asn);
        if !a_ours && !b_ours {
            continue;
        }
        match s.state {
            SessionState::Established => up += 1,
            SessionState::Idle(reason) => {
                let remote_missing = matches!(reason, IdleReason::OneSided | IdleReason::MissingRemoteAs)
                    && a_ours
                    && s.b.device.as_ref().is_some_and(|d| d.asn != asn);
                if remote_missing {
                    continue;
                }
                let from = s.a.device.as_ref().map(|d| d.to_string()).unwrap_or_default();
                let to = s.b.device.as_ref().map(|d| d.to_string()).unwrap_or_else(|| "?".into());
                ev.push(format!("{from} -> {} ({to}): idle, {reason:?}", s.b.addr));
            }
        }
    }
    if up == 0 && ev.is_empty() {
        ev.push("no BGP sessions configured".into());
    }
    verdict(ev)
}

fn policy_local_pref(net: &Network, asn: Asn, c: &Check) -> Outcome {
    let value = |k: &str, d: u32| c.params.get(k).and_then(|v| v.parse().ok()).unwrap_or(d);
    let (cust, peer, prov) = (value("customer", 300), value("peer", 200), value("provider", 100));
    let mut ev = Vec::new();
    for (id, rib) in net.derived.bgp.ribs.range(DeviceId::new(asn, "")..DeviceId::new(asn + 1, "")) {
        for entries in rib.adj_in.values() {
            for e in entries.values() {
                let Some(r) = &e.accepted else { continue };
                if r.learned_via != SessionKind::Ebgp {
                    continue;
                }
                let Some(kind) = net.spec.neighbor_kind(asn, e.peer.asn) else {
                    continue;
                };
                let want = match kind {
                    NeighborKind::Customer => cust,
                    NeighborKind::Peer | NeighborKind::Ixp => peer,
                    NeighborKind::Provider => prov,
                };
                if r.local_pref != want {
                    ev.push(format!(
                        "{id}: {} from {} ({}) has local-pref {}, expected {want}",
                        r.prefix,
                        e.peer,
                        kind.as_str(),
                        r.local_pref
                    ));
                }
            }
        }
    }
    verdict(ev)
}

/// No route learned from a peer or provider reaches another peer or provider.
fn policy_export(net: &Network, asn: Asn) -> Outcome {
    let mut ev = Vec::new();
    for (id, rib) in &net.derived.bgp.ribs {
        if id.asn == asn {
            continue;
        }
        let receiver_kind = if net.is_ixp(id.asn) {
            Some(NeighborKind::Ixp)
        } else {
            net.spec.neighbor_kind(asn, id.asn)
        };
        if !matches!(
            receiver_kind,
            Some(NeighborKind::Peer | NeighborKind::Provider | NeighborKind::Ixp)
        ) {
            continue;
        }
        for entries in rib.adj_in.values() {
            for e in entries.values() {
                if e.peer.asn != asn {
                    continue;
                }
                let learned_from = e.received.as_path.iter().copied().find(|&a| a != asn);
                let Some(from) = learned_from else { continue };
                let from_kind = net.spec.neighbor_kind(asn, from);
                if matches!(
                    from_kind,
                    Some(NeighborKind::Peer | NeighborKind::Provider | NeighborKind::Ixp)
                ) {
                    ev.push(format!(
                        "{} announced to {id} with path [{}] (learned from {} {from})",
                        e.received.prefix,
                        e.received.path_string(),
                        from_kind.unwrap().as_str()
                    ));
                }
            }
        }
    }
    verdict(ev)
}

fn hijack_report(net: &Network, c: &Check) -> Outcome {
    let (Some(attacker), Some(prefix)) = (c.params.get("attacker"), c.params.get("prefix")) else {
        return (false, vec!["missing parameters attacker=<asn> prefix=<prefix>".into()]);
    };
    let (Ok(attacker), Ok(prefix)) = (attacker.parse::<Asn>(), prefix.parse::<Ipv4Net>()) else {
        return (false, vec!["malformed hijack report".into()]);
    };
    let hit = net.hijacks.iter().any(|h| {
        h.attacker == attacker && (h.victim_prefix == prefix.trunc() || h.announced.contains(&prefix.trunc()))
    });
    if hit {
        (true, Vec::new())
    } else {
        (false, vec![format!("no hijack of {prefix} by AS {attacker} is active")])
    }
}

/// Forwarding AS paths of every ordered AS pair that break the valley-free rule.
pub fn check_valley_free(net: &Network) -> Vec<AsPathReport> {
    let asns = net.spec.asns();
    let mut out = Vec::new();
    for &s in &asns {
        for &d in &asns {
            if s == d {
                continue;
            }
            let p = as_path_between(net, s, d);
            if !p.valley_free {
                out.push(p);
            }
        }
    }
    out
}
