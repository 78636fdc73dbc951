//! Synchronous-round BGP propagation to a fixed point.
//!
//! Every round, each speaker (ascending ASN, then router-id) ingests the
//! updates sent to it during the previous round, re-runs the decision process
//! for the prefixes those updates touched, and queues updates for the next
//! round wherever its advertisement to a peer changes.

use std::collections::{BTreeMap, BTreeSet};
use std::net::Ipv4Addr;

use ipnet::Ipv4Net;
use serde::Serialize;

use crate::confcli::{DeviceState, Direction};
use crate::igp::IgpTable;
use crate::topo::{Asn, DeviceId, Network};

use super::decision::{best_route, DecisionStep};
use super::policy::evaluate_route_map;
use super::route::{BgpRoute, SessionKind, DEFAULT_LOCAL_PREF};
use super::session::BgpSession;

pub const DEFAULT_MAX_ROUNDS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdjInEntry {
    pub peer: DeviceId,
    /// Route as received on the wire.
    pub received: BgpRoute,
    /// After loop check and inbound policy; `None` if rejected.
    pub accepted: Option<BgpRoute>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocEntry {
    pub route: BgpRoute,
    pub step: DecisionStep,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct RouterRib {
    pub asn: Asn,
    pub router_id: Option<Ipv4Addr>,
    pub loc_rib: BTreeMap<Ipv4Net, LocEntry>,
    /// prefix -> peer address -> entry
    pub adj_in: BTreeMap<Ipv4Net, BTreeMap<Ipv4Addr, AdjInEntry>>,
}

impl RouterRib {
    pub fn adj_in_size(&self) -> usize {
        self.adj_in.values().map(|m| m.len()).sum()
    }

    /// Accepted candidates for a prefix, in peer-address order.
    pub fn candidates(&self, prefix: &Ipv4Net) -> Vec<&BgpRoute> {
        self.adj_in
            .get(prefix)
            .map(|m| m.values().filter_map(|e| e.accepted.as_ref()).collect())
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BgpState {
    pub ribs: BTreeMap<DeviceId, RouterRib>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ConvergenceReport {
    pub rounds: usize,
    pub converged: bool,
    /// Keyed `asn.device`.
    pub adj_rib_in_sizes: BTreeMap<String, usize>,
    /// Prefixes still changing in the last round when not converged.
    pub churning: Vec<Ipv4Net>,
    pub sessions_established: usize,
    pub sessions_idle: usize,
    pub diagnostics: Vec<String>,
}

struct End {
    peer: usize,
    local_addr: Ipv4Addr,
    peer_addr: Ipv4Addr,
    kind: SessionKind,
    peer_asn: Asn,
    map_in: Option<String>,
    map_out: Option<String>,
    rev: usize,
}

struct Speaker<'a> {
    id: DeviceId,
    config: &'a DeviceState,
    asn: Asn,
    router_id: Ipv4Addr,
    is_rs: bool,
    ends: Vec<usize>,
    local: BTreeSet<Ipv4Net>,
    rib: RouterRib,
    adj_out: BTreeMap<(usize, Ipv4Net), BgpRoute>,
}

type Msg = (usize, Ipv4Net, Option<BgpRoute>);

/// Run BGP over the established sessions. `igp` provides next-hop distances.
pub(crate) fn run_bgp(
    net: &Network,
    sessions: &[BgpSession],
    igp: &BTreeMap<DeviceId, IgpTable>,
    max_rounds: usize,
) -> (BgpState, ConvergenceReport) {
    let mut speakers: Vec<Speaker> = net
        .devices
        .values()
        .filter(|d| d.kind().is_l3_router() && !d.failed)
        .filter_map(|d| {
            let b = d.config.bgp.as_ref()?;
            Some(Speaker {
                id: d.id.clone(),
                config: &d.config,
                asn: b.asn,
                router_id: d.config.router_id().unwrap_or(Ipv4Addr::UNSPECIFIED),
                is_rs: d.kind() == crate::confcli::DeviceKind::RouteServer,
                ends: Vec::new(),
                local: b.networks.clone(),
                rib: RouterRib {
                    asn: b.asn,
                    router_id: d.config.router_id(),
                    ..Default::default()
                },
                adj_out: BTreeMap::new(),
            })
        })
        .collect();
    speakers.sort_by(|a, b| (a.asn, a.router_id, &a.id).cmp(&(b.asn, b.router_id, &b.id)));
    let index: BTreeMap<DeviceId, usize> = speakers
        .iter()
        .enumerate()
        .map(|(i, s)| (s.id.clone(), i))
        .collect();

    let mut ends: Vec<End> = Vec::new();
    for s in sessions.iter().filter(|s| s.is_up()) {
        let (Some(a), Some(b)) = (
            s.a.device.as_ref().and_then(|d| index.get(d)),
            s.b.device.as_ref().and_then(|d| index.get(d)),
        ) else {
            continue;
        };
        let (a, b) = (*a, *b);
        let mk = |me: usize, peer: usize, local_addr: Ipv4Addr, peer_addr: Ipv4Addr, rev: usize| {
            let n = &speakers[me].config.bgp.as_ref().unwrap().neighbors[&peer_addr];
            End {
                peer,
                local_addr,
                peer_addr,
                kind: s.kind,
                peer_asn: speakers[peer].asn,
                map_in: n.route_map_in.clone(),
                map_out: n.route_map_out.clone(),
                rev,
            }
        };
        let ia = ends.len();
        ends.push(mk(a, b, s.a.addr, s.b.addr, ia + 1));
        ends.push(mk(b, a, s.b.addr, s.a.addr, ia));
        speakers[a].ends.push(ia);
        speakers[b].ends.push(ia + 1);
    }

    let mut diagnostics: BTreeSet<String> = BTreeSet::new();
    let n = speakers.len();
    let mut inbox: Vec<Vec<Msg>> = vec![Vec::new(); n];
    let mut dirty: Vec<BTreeSet<Ipv4Net>> = speakers.iter().map(|s| s.local.clone()).collect();
    let mut rounds = 0;
    let mut converged = false;
    let mut last_changed: BTreeSet<Ipv4Net> = BTreeSet::new();
    let empty = IgpTable::default();

    while rounds < max_rounds {
        rounds += 1;
        let mut next: Vec<Vec<Msg>> = vec![Vec::new(); n];
        let mut changed: BTreeSet<Ipv4Net> = BTreeSet::new();
        let mut sent = 0usize;
        for si in 0..n {
            for (end, prefix, route) in std::mem::take(&mut inbox[si]) {
                ingest(&mut speakers, &ends, si, end, prefix, route, &mut diagnostics);
                dirty[si].insert(prefix);
            }
            let table = igp.get(&speakers[si].id).unwrap_or(&empty);
            for prefix in std::mem::take(&mut dirty[si]) {
                let s = &speakers[si];
                let mut cands: Vec<BgpRoute> = s.rib.candidates(&prefix).into_iter().cloned().collect();
                if s.local.contains(&prefix) {
                    cands.push(BgpRoute::local(prefix));
                }
                let best = best_route(&cands, |nh| table.distance_to(nh)).map(|(i, step)| LocEntry {
                    route: cands[i].clone(),
                    step,
                });
                if s.rib.loc_rib.get(&prefix) == best.as_ref() {
                    continue;
                }
                changed.insert(prefix);
                let s = &mut speakers[si];
                match &best {
                    Some(b) => s.rib.loc_rib.insert(prefix, b.clone()),
                    None => s.rib.loc_rib.remove(&prefix),
                };
                let s = &speakers[si];
                let mut out: Vec<(usize, Option<BgpRoute>)> = Vec::new();
                for &e in &s.ends {
                    let adv = best
                        .as_ref()
                        .and_then(|b| export(s, &ends[e], &b.route, &mut diagnostics));
                    if s.adj_out.get(&(e, prefix)) != adv.as_ref() {
                        out.push((e, adv));
                    }
                }
                let s = &mut speakers[si];
                for (e, adv) in out {
                    match &adv {
                        Some(r) => s.adj_out.insert((e, prefix), r.clone()),
                        None => s.adj_out.remove(&(e, prefix)),
                    };
                    next[ends[e].peer].push((ends[e].rev, prefix, adv));
                    sent += 1;
                }
            }
        }
        inbox = next;
        if changed.is_empty() && sent == 0 {
            converged = true;
            break;
        }
        last_changed = changed;
    }

    let mut state = BgpState::default();
    let mut report = ConvergenceReport {
        rounds,
        converged,
        churning: if converged {
            Vec::new()
        } else {
            last_changed.into_iter().collect()
        },
        sessions_established: sessions.iter().filter(|s| s.is_up()).count(),
        sessions_idle: sessions.iter().filter(|s| !s.is_up()).count(),
        ..Default::default()
    };
    for s in speakers {
        report
            .adj_rib_in_sizes
            .insert(s.id.to_string(), s.rib.adj_in_size());
        state.ribs.insert(s.id, s.rib);
    }
    report.diagnostics = diagnostics.into_iter().collect();
    (state, report)
}

fn apply_map(
    s: &Speaker,
    name: &Option<String>,
    route: BgpRoute,
    dir: Direction,
    diagnostics: &mut BTreeSet<String>,
) -> Option<BgpRoute> {
    let Some(name) = name else { return Some(route) };
    let Some(map) = s.config.route_maps.get(name) else {
        diagnostics.insert(format!("{}: route-map {name} is not defined", s.id));
        return None;
    };
    let res = evaluate_route_map(map, &route, s.config, dir);
    for d in res.diagnostics {
        diagnostics.insert(format!("{}: {d}", s.id));
    }
    res.route
}

fn ingest(
    speakers: &mut [Speaker],
    ends: &[End],
    si: usize,
    end: usize,
    prefix: Ipv4Net,
    route: Option<BgpRoute>,
    diagnostics: &mut BTreeSet<String>,
) {
    let e = &ends[end];
    let peer_id = speakers[e.peer].id.clone();
    let peer_rid = speakers[e.peer].router_id;
    let s = &speakers[si];
    let Some(received) = route else {
        let s = &mut speakers[si];
        if let Some(m) = s.rib.adj_in.get_mut(&prefix) {
            m.remove(&e.peer_addr);
            if m.is_empty() {
                s.rib.adj_in.remove(&prefix);
            }
        }
        return;
    };
    let accepted = if !s.is_rs && received.as_path.contains(&s.asn) {
        None
    } else {
        let mut r = received.clone();
        r.learned_via = e.kind;
        r.peer_addr = e.peer_addr;
        r.peer_router_id = peer_rid;
        if e.kind == SessionKind::Ebgp {
            r.local_pref = DEFAULT_LOCAL_PREF;
        }
        apply_map(s, &e.map_in, r, Direction::In, diagnostics)
    };
    speakers[si].rib.adj_in.entry(prefix).or_default().insert(
        e.peer_addr,
        AdjInEntry {
            peer: peer_id,
            received,
            accepted,
        },
    );
}

fn export(
    s: &Speaker,
    e: &End,
    best: &BgpRoute,
    diagnostics: &mut BTreeSet<String>,
) -> Option<BgpRoute> {
    if best.learned_via != SessionKind::Local && best.peer_addr == e.peer_addr {
        return None;
    }
    let mut r = best.clone();
    match e.kind {
        SessionKind::Ibgp => {
            if best.learned_via == SessionKind::Ibgp {
                return None;
            }
            if best.learned_via == SessionKind::Local {
                r.next_hop = e.local_addr;
            }
            apply_map(s, &e.map_out, r, Direction::Out, diagnostics)
        }
        _ if s.is_rs => {
            if r.as_path.contains(&e.peer_asn) {
                return None;
            }
            apply_map(s, &e.map_out, r, Direction::Out, diagnostics)
        }
        _ => {
            if r.as_path.contains(&e.peer_asn) {
                return None;
            }
            r.med = 0;
            let mut r = apply_map(s, &e.map_out, r, Direction::Out, diagnostics)?;
            r.as_path.insert(0, s.asn);
            r.next_hop = e.local_addr;
            r.local_pref = DEFAULT_LOCAL_PREF;
            Some(r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bgpsim::converge;
    use crate::topo::{generate_reference_topology, instantiate, parse_topology_spec};

    const TWO_AS: &str = "\
region EU
as 1 role=tier1 region=EU
as 2 role=stub region=EU
l3template 1 routers=R1 links=
l3template 2 routers=R1 links=
link 1.R1 2.R1 rel=prov delay_us=1000 bw_bps=1000000
";

    fn two_as() -> Network {
        let mut spec = parse_topology_spec(TWO_AS).unwrap();
        for a in &mut spec.ases {
            a.auto_configured = true;
        }
        instantiate(&spec).unwrap()
    }

    #[test]
    fn two_as_exchange_prefixes() {
        let mut net = two_as();
        let r = converge(&mut net, DEFAULT_MAX_ROUNDS);
        assert!(r.converged);
        assert!(r.rounds <= 3, "{}", r.rounds);
        for asn in [1, 2] {
            let rib = &net.derived.bgp.ribs[&DeviceId::new(asn, "R1")];
            let prefixes: Vec<String> = rib.loc_rib.keys().map(|p| p.to_string()).collect();
            assert_eq!(prefixes, ["1.0.0.0/8", "2.0.0.0/8"]);
        }
        let r1 = &net.derived.bgp.ribs[&DeviceId::new(2, "R1")];
        let e = &r1.loc_rib[&"1.0.0.0/8".parse().unwrap()];
        assert_eq!(e.route.as_path, [1]);
        assert_eq!(e.route.local_pref, 100);
    }

    #[test]
    fn reference_network_converges_with_full_tables() {
        let mut spec = generate_reference_topology(4, 5).unwrap();
        for a in &mut spec.ases {
            a.auto_configured = true;
        }
        let mut net = instantiate(&spec).unwrap();
        let r = converge(&mut net, DEFAULT_MAX_ROUNDS);
        assert!(r.converged, "{:?}", r.churning);
        assert!(r.diagnostics.is_empty(), "{:?}", r.diagnostics);
        for (id, rib) in &net.derived.bgp.ribs {
            if id.name == "RS" {
                continue;
            }
            let slash8 = rib.loc_rib.keys().filter(|p| p.prefix_len() == 8).count();
            assert!(slash8 >= 20, "{id} has {slash8}");
        }
        // loop freedom
        for rib in net.derived.bgp.ribs.values() {
            for e in rib.loc_rib.values() {
                assert!(!e.route.as_path.contains(&rib.asn));
            }
        }
    }

    #[test]
    fn deterministic_ribs() {
        let mut spec = generate_reference_topology(2, 5).unwrap();
        for a in &mut spec.ases {
            a.auto_configured = true;
        }
        let mut a = instantiate(&spec).unwrap();
        let mut b = instantiate(&spec).unwrap();
        converge(&mut a, DEFAULT_MAX_ROUNDS);
        converge(&mut b, DEFAULT_MAX_ROUNDS);
        assert_eq!(a.derived.bgp, b.derived.bgp);
    }

    const GADGET: &str = "\
region R
as 1 role=transit region=R
as 2 role=transit region=R
as 3 role=transit region=R
as 4 role=stub region=R
l3template 1 routers=R1 links=
l3template 2 routers=R1 links=
l3template 3 routers=R1 links=
l3template 4 routers=R1 links=
link 1.R1 2.R1 rel=peer delay_us=1000 bw_bps=1000000
link 2.R1 3.R1 rel=peer delay_us=1000 bw_bps=1000000
link 3.R1 1.R1 rel=peer delay_us=1000 bw_bps=1000000
link 4.R1 1.R1 rel=peer delay_us=1000 bw_bps=1000000
link 4.R1 2.R1 rel=peer delay_us=1000 bw_bps=1000000
link 4.R1 3.R1 rel=peer delay_us=1000 bw_bps=1000000
";

    /// Three ASes around an origin, each preferring the path through its
    /// clockwise neighbor over the direct one.
    pub(crate) fn bad_gadget() -> Network {
        let mut spec = parse_topology_spec(GADGET).unwrap();
        for a in &mut spec.ases {
            a.auto_configured = true;
        }
        let mut net = instantiate(&spec).unwrap();
        for i in 1..=3u32 {
            let next = i % 3 + 1;
            let script = format!(
                "bgp community-list DIRECT permit {next}:1\n\
                 route-map FROM_ORIGIN permit 10\n set local-preference 100\n set community {i}:1 additive\n\
                 route-map FROM_NEXT permit 10\n match community DIRECT\n set local-preference 200\n\
                 route-map FROM_NEXT deny 20\n\
                 route-map DENY_ALL deny 10\n\
                 route-map ANY permit 10\n"
            );
            let d = net.device_mut(i, "R1").unwrap();
            assert!(!crate::confcli::apply_script(&mut d.config, &script, true).has_errors());
            for n in d.config.bgp.as_mut().unwrap().neighbors.values_mut() {
                let ra = n.remote_as.unwrap();
                n.route_map_in = Some(
                    match ra {
                        4 => "FROM_ORIGIN",
                        r if r == next => "FROM_NEXT",
                        _ => "DENY_ALL",
                    }
                    .into(),
                );
                n.route_map_out = Some("ANY".into());
            }
        }
        net
    }

    #[test]
    fn dispute_gadget_never_settles() {
        let mut net = bad_gadget();
        let r = converge(&mut net, 200);
        assert!(!r.converged);
        assert_eq!(r.rounds, 200);
        assert!(r.churning.contains(&"4.0.0.0/8".parse().unwrap()), "{:?}", r.churning);
    }

    #[test]
    fn gadget_without_preference_settles() {
        let mut net = bad_gadget();
        for i in 1..=3 {
            let d = net.device_mut(i, "R1").unwrap();
            d.config.route_maps.get_mut("FROM_NEXT").unwrap().entries.get_mut(&10).unwrap().set_local_pref = Some(50);
        }
        let r = converge(&mut net, 200);
        assert!(r.converged);
    }
}
