//! Single-area OSPF computed from the converged configuration snapshot.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::net::Ipv4Addr;

use ipnet::Ipv4Net;
use serde::Serialize;

use crate::confcli::DeviceKind;
use crate::topo::{Asn, DeviceId, Medium, Network};

pub const MAX_ECMP: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct NextHop {
    pub iface: String,
    pub via: Ipv4Addr,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IgpEntry {
    pub cost: u32,
    pub next_hops: Vec<NextHop>,
}

/// OSPF view of one router: its connected prefixes and learned routes.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct IgpTable {
    /// Prefixes of up interfaces with an address (any protocol).
    pub connected: BTreeMap<Ipv4Net, String>,
    /// OSPF routes to prefixes advertised by other routers.
    pub routes: BTreeMap<Ipv4Net, IgpEntry>,
}

impl IgpTable {
    /// Cost to a prefix: 0 when connected, else the OSPF cost.
    pub fn distance(&self, prefix: &Ipv4Net) -> Option<u32> {
        if self.connected.contains_key(prefix) {
            return Some(0);
        }
        self.routes.get(prefix).map(|e| e.cost)
    }

    /// Cost to an address through the longest matching prefix.
    pub fn distance_to(&self, addr: Ipv4Addr) -> Option<u32> {
        for len in (0..=32u8).rev() {
            let p = Ipv4Net::new(addr, len).unwrap().trunc();
            if let Some(d) = self.distance(&p) {
                return Some(d);
            }
        }
        None
    }
}

/// Graph abstraction shared with tests: routers, directed weighted edges with
/// (interface, neighbor address), and advertised prefixes per router.
#[derive(Debug, Clone, Default)]
pub struct IgpGraph {
    pub routers: Vec<String>,
    /// (from, to, cost, from interface, neighbor address)
    pub edges: Vec<(usize, usize, u32, String, Ipv4Addr)>,
    pub prefixes: Vec<BTreeSet<Ipv4Net>>,
    pub connected: Vec<BTreeMap<Ipv4Net, String>>,
}

impl IgpGraph {
    /// Extract the OSPF graph of one AS.
    pub fn from_network(net: &Network, asn: Asn) -> IgpGraph {
        let mut g = IgpGraph::default();
        let routers: Vec<String> = net
            .devices_of(asn)
            .filter(|d| d.kind() == DeviceKind::Router)
            .map(|d| d.id.name.clone())
            .collect();
        let index: BTreeMap<&str, usize> = routers
            .iter()
            .enumerate()
            .map(|(i, r)| (r.as_str(), i))
            .collect();
        for r in &routers {
            let id = DeviceId::new(asn, r.clone());
            let dev = &net.devices[&id];
            let mut prefixes = BTreeSet::new();
            let mut connected = BTreeMap::new();
            for (name, st) in &dev.config.interfaces {
                let Some(addr) = st.address else { continue };
                if !net.iface_up(&id, name) {
                    continue;
                }
                connected.entry(addr.trunc()).or_insert_with(|| name.clone());
                if dev.config.ospf.as_ref().is_some_and(|o| o.enabled_on(&addr)) {
                    prefixes.insert(addr.trunc());
                }
            }
            g.prefixes.push(prefixes);
            g.connected.push(connected);
        }
        for s in &net.segments {
            if s.medium != Medium::Intra || !s.admin_up || s.ends[0].asn != asn {
                continue;
            }
            let (a, b) = (&s.ends[0], &s.ends[1]);
            let ends = [(a, b), (b, a)];
            let mut ok = true;
            let mut dirs = Vec::new();
            for (x, y) in ends {
                let id = x.device_id();
                let dev = &net.devices[&id];
                let addr = dev.config.interfaces.get(&x.iface).and_then(|i| i.address);
                let enabled = match (&dev.config.ospf, addr) {
                    (Some(o), Some(a)) => o.enabled_on(&a) && net.iface_up(&id, &x.iface),
                    _ => false,
                };
                if !enabled {
                    ok = false;
                    break;
                }
                let cost = dev.config.ospf.as_ref().unwrap().cost(&x.iface).max(1);
                dirs.push((x, y, cost));
            }
            if !ok {
                continue;
            }
            // neighbor address: the far end's interface address
            let far_addr = |e: &crate::topo::Endpoint| {
                net.devices[&e.device_id()].config.interfaces[&e.iface]
                    .address
                    .unwrap()
            };
            // both addresses must sit on a common subnet
            let (aa, ba) = (far_addr(a), far_addr(b));
            if aa.trunc() != ba.trunc() {
                continue;
            }
            for (x, y, cost) in dirs {
                g.edges.push((
                    index[x.device.as_str()],
                    index[y.device.as_str()],
                    cost,
                    x.iface.clone(),
                    far_addr(y).addr(),
                ));
            }
        }
        g.routers = routers;
        g
    }

    /// Dijkstra from every router with ECMP first-hop sets.
    pub fn compute(&self) -> Vec<IgpTable> {
        let n = self.routers.len();
        let mut out_edges = vec![Vec::new(); n];
        for (i, e) in self.edges.iter().enumerate() {
            out_edges[e.0].push(i);
        }
        (0..n)
            .map(|src| {
                let mut dist: Vec<Option<u32>> = vec![None; n];
                let mut first: Vec<BTreeSet<NextHop>> = vec![BTreeSet::new(); n];
                let mut heap = BinaryHeap::new();
                dist[src] = Some(0);
                heap.push(Reverse((0u32, src)));
                let mut done = vec![false; n];
                while let Some(Reverse((d, u))) = heap.pop() {
                    if done[u] {
                        continue;
                    }
                    done[u] = true;
                    for &ei in &out_edges[u] {
                        let (_, v, c, ref iface, via) = self.edges[ei];
                        let nd = d + c;
                        let hops: BTreeSet<NextHop> = if u == src {
                            BTreeSet::from([NextHop {
                                iface: iface.clone(),
                                via,
                            }])
                        } else {
                            first[u].clone()
                        };
                        match dist[v] {
                            Some(old) if nd > old => {}
                            Some(old) if nd == old => first[v].extend(hops),
                            _ => {
                                dist[v] = Some(nd);
                                first[v] = hops;
                                heap.push(Reverse((nd, v)));
                            }
                        }
                    }
                }
                let mut table = IgpTable {
                    connected: self.connected[src].clone(),
                    routes: BTreeMap::new(),
                };
                let mut best: BTreeMap<Ipv4Net, (u32, BTreeSet<NextHop>)> = BTreeMap::new();
                for v in 0..n {
                    let Some(d) = dist[v] else { continue };
                    if v == src {
                        continue;
                    }
                    for p in &self.prefixes[v] {
                        if self.connected[src].contains_key(p) {
                            continue;
                        }
                        let e = best.entry(*p).or_insert((d, BTreeSet::new()));
                        if d < e.0 {
                            *e = (d, BTreeSet::new());
                        }
                        if d == e.0 {
                            e.1.extend(first[v].iter().cloned());
                        }
                    }
                }
                for (p, (cost, hops)) in best {
                    if hops.is_empty() {
                        continue;
                    }
                    table.routes.insert(
                        p,
                        IgpEntry {
                            cost,
                            next_hops: hops.into_iter().take(MAX_ECMP).collect(),
                        },
                    );
                }
                table
            })
            .collect()
    }
}

/// IGP tables of every router of an AS.
pub fn compute_igp(net: &Network, asn: Asn) -> BTreeMap<String, IgpTable> {
    let g = IgpGraph::from_network(net, asn);
    g.routers.iter().cloned().zip(g.compute()).collect()
}

/// Connected-only table for devices that do not run OSPF (hosts, route servers).
pub fn connected_table(net: &Network, id: &DeviceId) -> IgpTable {
    let mut t = IgpTable::default();
    if let Some(d) = net.devices.get(id) {
        for (name, st) in &d.config.interfaces {
            if let Some(a) = st.address {
                if net.iface_up(id, name) {
                    t.connected.entry(a.trunc()).or_insert_with(|| name.clone());
                }
            }
        }
    }
    t
}

/// Distance from a router to a prefix; `None` is unreachable.
pub fn igp_distance(tables: &BTreeMap<String, IgpTable>, router: &str, prefix: &Ipv4Net) -> Option<u32> {
    tables.get(router)?.distance(prefix)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn addr(i: usize, j: usize) -> Ipv4Addr {
        Ipv4Addr::new(10, i as u8, j as u8, 1)
    }

    fn lo(i: usize) -> Ipv4Net {
        Ipv4Net::new(Ipv4Addr::new(10, 150, 0, i as u8), 32).unwrap()
    }

    /// Graph with loopback prefixes and symmetric or asymmetric costs.
    pub(crate) fn graph(n: usize, links: &[(usize, usize, u32, u32)]) -> IgpGraph {
        let mut g = IgpGraph {
            routers: (0..n).map(|i| format!("R{i}")).collect(),
            ..Default::default()
        };
        for &(a, b, ca, cb) in links {
            g.edges.push((a, b, ca, format!("port_R{b}"), addr(b, a)));
            g.edges.push((b, a, cb, format!("port_R{a}"), addr(a, b)));
        }
        for i in 0..n {
            g.prefixes.push(BTreeSet::from([lo(i)]));
            g.connected.push(BTreeMap::from([(lo(i), "lo".to_string())]));
        }
        g
    }

    #[test]
    fn line_costs() {
        let g = graph(3, &[(0, 1, 1, 1), (1, 2, 1, 1)]);
        let t = g.compute();
        let e = &t[0].routes[&lo(2)];
        assert_eq!(e.cost, 2);
        assert_eq!(e.next_hops[0].iface, "port_R1");
        assert_eq!(t[0].distance(&lo(0)), Some(0));
    }

    #[test]
    fn square_ecmp_and_weights() {
        // A=0, B=1, C=2, D=3
        let g = graph(4, &[(0, 1, 1, 1), (0, 2, 1, 1), (1, 3, 1, 1), (2, 3, 1, 1)]);
        assert_eq!(g.compute()[0].routes[&lo(3)].next_hops.len(), 2);
        let g = graph(4, &[(0, 1, 10, 10), (0, 2, 1, 1), (1, 3, 1, 1), (2, 3, 1, 1)]);
        let e = &g.compute()[0].routes[&lo(3)];
        assert_eq!(e.next_hops[0].iface, "port_R2");
    }

    #[test]
    fn cut_off_router_unreachable() {
        let g = graph(3, &[(0, 1, 1, 1)]);
        assert_eq!(g.compute()[0].distance(&lo(2)), None);
    }

    /// Exhaustive simple-path enumeration: minimal cost and all minimal first hops.
    pub(crate) fn brute_force(g: &IgpGraph, src: usize, dst: usize) -> Option<(u32, BTreeSet<String>)> {
        fn walk(
            g: &IgpGraph,
            u: usize,
            dst: usize,
            cost: u32,
            first: Option<&str>,
            seen: &mut Vec<bool>,
            best: &mut Option<(u32, BTreeSet<String>)>,
        ) {
            if u == dst {
                let f = first.unwrap().to_string();
                match best {
                    Some((c, set)) if *c == cost => {
                        set.insert(f);
                    }
                    Some((c, _)) if *c < cost => {}
                    _ => *best = Some((cost, BTreeSet::from([f]))),
                }
                return;
            }
            for e in g.edges.iter().filter(|e| e.0 == u) {
                if seen[e.1] {
                    continue;
                }
                seen[e.1] = true;
                walk(g, e.1, dst, cost + e.2, Some(first.unwrap_or(&e.3)), seen, best);
                seen[e.1] = false;
            }
        }
        let mut seen = vec![false; g.routers.len()];
        seen[src] = true;
        let mut best = None;
        walk(g, src, dst, 0, None, &mut seen, &mut best);
        best
    }

    pub(crate) fn random_graph(rng: &mut ChaCha8Rng) -> IgpGraph {
        let n = rng.gen_range(2..=8);
        let mut links = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(0.4) {
                    links.push((a, b, rng.gen_range(1..4), rng.gen_range(1..4)));
                }
            }
        }
        graph(n, &links)
    }

    #[test]
    fn matches_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let g = random_graph(&mut rng);
            let tables = g.compute();
            for s in 0..g.routers.len() {
                for d in 0..g.routers.len() {
                    if s == d {
                        continue;
                    }
                    let got = tables[s].routes.get(&lo(d)).map(|e| {
                        (e.cost, e.next_hops.iter().map(|h| h.iface.clone()).collect::<BTreeSet<_>>())
                    });
                    assert_eq!(got, brute_force(&g, s, d));
                }
            }
        }
    }

    #[test]
    fn removing_links_never_decreases_costs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let g = random_graph(&mut rng);
            if g.edges.is_empty() {
                continue;
            }
            let before = g.compute();
            let mut h = g.clone();
            let cut = rng.gen_range(0..g.edges.len() / 2) * 2;
            h.edges.drain(cut..cut + 2);
            let after = h.compute();
            for s in 0..g.routers.len() {
                for d in 0..g.routers.len() {
                    let (b, a) = (before[s].distance(&lo(d)), after[s].distance(&lo(d)));
                    match (b, a) {
                        (Some(b), Some(a)) => assert!(a >= b),
                        (None, Some(_)) => panic!("removal created a path"),
                        _ => {}
                    }
                }
            }
        }
    }

    #[test]
    fn reference_as_three_hop_loopback() {
        use crate::topo::{generate_reference_topology, instantiate};
        let spec = generate_reference_topology(1, 4).unwrap();
        let net = instantiate(&spec).unwrap();
        let t = compute_igp(&net, 1);
        let lo5: Ipv4Net = "1.150.0.5/32".parse().unwrap();
        // ring 1-2-3-4-5-6-7-8 with chords 2-7, 3-6: ROUTER1 -> ROUTER5 costs 4
        assert_eq!(igp_distance(&t, "ROUTER1", &lo5), Some(4));
        let sym: Ipv4Net = "1.150.0.1/32".parse().unwrap();
        assert_eq!(igp_distance(&t, "ROUTER5", &sym), Some(4));
    }

    #[test]
    fn next_hops_stay_inside_the_as() {
        use crate::topo::{generate_reference_topology, instantiate};
        let spec = generate_reference_topology(1, 4).unwrap();
        let net = instantiate(&spec).unwrap();
        for asn in [1, 2] {
            for t in compute_igp(&net, asn).values() {
                for e in t.routes.values() {
                    assert!(e.next_hops.iter().all(|nh| nh.via.octets()[0] == asn as u8));
                }
            }
        }
    }
}
