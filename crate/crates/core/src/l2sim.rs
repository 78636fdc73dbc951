//! Switched networks: one shared spanning tree per AS and VLAN-scoped reachability.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::confcli::{SwitchPortMode, DEFAULT_VLAN};
use crate::topo::{ifname, Asn, DeviceId, Network, UnionFind};

/// Switch graph of one segment. Links are undirected; a link's index doubles
/// as the port id on both of its ends.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct SwitchGraph {
    pub names: Vec<String>,
    pub priorities: Vec<u32>,
    pub links: Vec<(usize, usize)>,
}

impl SwitchGraph {
    /// Bridge id: (priority, position). Lower is better.
    pub fn bridge_id(&self, s: usize) -> (u32, usize) {
        (self.priorities[s], s)
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.names.len()];
        for (e, &(a, b)) in self.links.iter().enumerate() {
            adj[a].push((b, e));
            adj[b].push((a, e));
        }
        adj
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpanningTree {
    pub root: usize,
    /// Switches covered by this tree.
    pub members: Vec<usize>,
    /// Active link indices.
    pub active: BTreeSet<usize>,
    /// Root path cost per switch (only meaningful for members).
    pub cost: BTreeMap<usize, u32>,
    /// Root port (link index) of every non-root member.
    pub root_port: BTreeMap<usize, usize>,
    /// (switch, link) pairs whose port is blocked.
    pub blocked: BTreeSet<(usize, usize)>,
}

impl SpanningTree {
    /// Active edges as sorted name pairs.
    pub fn edge_names(&self, g: &SwitchGraph) -> BTreeSet<(String, String)> {
        self.active
            .iter()
            .map(|&e| {
                let (a, b) = g.links[e];
                let (x, y) = (g.names[a].clone(), g.names[b].clone());
                if x <= y {
                    (x, y)
                } else {
                    (y, x)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum L2Error {
    #[error("switch graph is not connected")]
    Disconnected,
    #[error("switch graph is empty")]
    Empty,
}

/// Elect the spanning tree of a connected switch graph.
pub fn compute_spanning_tree(g: &SwitchGraph) -> Result<SpanningTree, L2Error> {
    if g.names.is_empty() {
        return Err(L2Error::Empty);
    }
    let mut forest = spanning_forest(g);
    if forest.len() != 1 {
        return Err(L2Error::Disconnected);
    }
    Ok(forest.pop().unwrap())
}

/// One elected tree per connected component, ordered by root.
pub fn spanning_forest(g: &SwitchGraph) -> Vec<SpanningTree> {
    let n = g.names.len();
    let mut uf = UnionFind::new(n);
    for &(a, b) in &g.links {
        uf.union(a, b);
    }
    let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for s in 0..n {
        comps.entry(uf.find(s)).or_default().push(s);
    }
    let adj = g.adjacency();
    let mut trees: Vec<SpanningTree> = comps
        .into_values()
        .map(|members| elect(g, &adj, members))
        .collect();
    trees.sort_by_key(|t| t.root);
    trees
}

fn elect(g: &SwitchGraph, adj: &[Vec<(usize, usize)>], members: Vec<usize>) -> SpanningTree {
    let root = *members
        .iter()
        .min_by_key(|&&s| g.bridge_id(s))
        .expect("non-empty component");
    // unit port cost: root path cost is the BFS distance
    let mut cost: BTreeMap<usize, u32> = BTreeMap::new();
    cost.insert(root, 0);
    let mut q = VecDeque::from([root]);
    while let Some(u) = q.pop_front() {
        let d = cost[&u];
        for &(v, _) in &adj[u] {
            if !cost.contains_key(&v) {
                cost.insert(v, d + 1);
                q.push_back(v);
            }
        }
    }
    let mut root_port = BTreeMap::new();
    let mut active = BTreeSet::new();
    for &s in &members {
        if s == root {
            continue;
        }
        // neighbors one step closer to the root offer the best BPDUs
        let best = adj[s]
            .iter()
            .filter(|&&(v, _)| cost[&v] + 1 == cost[&s])
            .min_by_key(|&&(v, e)| (g.bridge_id(v), e))
            .expect("connected");
        root_port.insert(s, best.1);
        active.insert(best.1);
    }
    // on every other link the end with the worse (cost, bridge id) is blocked
    let mut blocked = BTreeSet::new();
    for &s in &members {
        for &(v, e) in &adj[s] {
            if active.contains(&e) {
                continue;
            }
            let mine = (cost[&s], g.bridge_id(s));
            let theirs = (cost[&v], g.bridge_id(v));
            if mine > theirs || (mine == theirs && s > v) {
                blocked.insert((s, e));
            }
        }
    }
    SpanningTree {
        root,
        members,
        active,
        cost,
        root_port,
        blocked,
    }
}

/// Why two L2 ports cannot talk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
pub enum NotReachable {
    #[error("VLAN isolation")]
    VlanIsolation,
    #[error("no active path")]
    NoPath,
    #[error("port down")]
    PortDown,
    #[error("unknown port {0}")]
    UnknownPort(String),
}

/// Switch port a host or the gateway router is attached to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Attachment {
    pub switch: usize,
    /// Port name on the switch.
    pub port: String,
}

/// Target of an L2 reachability query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum L2Target<'a> {
    Host(&'a str),
    /// The gateway router port; `vlan` selects the sub-interface.
    Gateway { vlan: u16 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct L2Path {
    pub vlan: u16,
    /// (switch name, ingress port, egress port)
    pub hops: Vec<(String, String, String)>,
}

/// Derived L2 state of one AS.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct L2State {
    pub asn: Asn,
    pub graph: SwitchGraph,
    pub trees: Vec<SpanningTree>,
    /// Port name of every link end: (switch, link) -> port.
    pub port_names: BTreeMap<(usize, usize), String>,
    /// VLANs carried per (switch, port name).
    pub port_vlans: BTreeMap<(usize, String), BTreeSet<u16>>,
    /// Host name -> switch attachment.
    pub hosts: BTreeMap<String, Attachment>,
    pub gateway: Option<(Attachment, String)>,
    /// Switches down or isolated do not take part.
    pub alive: Vec<bool>,
}

impl L2State {
    /// Build the L2 state of an AS from its template and switch configurations.
    pub fn from_network(net: &Network, asn: Asn) -> Option<L2State> {
        let l2 = net.spec.as_spec(asn)?.l2.as_ref()?;
        let mut st = L2State {
            asn,
            ..Default::default()
        };
        let index: BTreeMap<&str, usize> = l2
            .switches
            .iter()
            .enumerate()
            .map(|(i, s)| (s.name.as_str(), i))
            .collect();
        for s in &l2.switches {
            let dev = net.device(asn, &s.name);
            st.graph.names.push(s.name.clone());
            st.graph.priorities.push(
                dev.and_then(|d| d.config.stp_priority)
                    .unwrap_or(s.priority),
            );
            st.alive.push(dev.is_some_and(|d| !d.failed));
        }
        let port_up = |sw: &str, port: &str| net.iface_up(&DeviceId::new(asn, sw), port);
        let carried = |sw: &str, port: &str| -> BTreeSet<u16> {
            let Some(d) = net.device(asn, sw) else {
                return BTreeSet::new();
            };
            match d.config.interfaces.get(port).and_then(|i| i.switchport) {
                Some(SwitchPortMode::Access(v)) => BTreeSet::from([v]),
                Some(SwitchPortMode::Trunk) => d.config.vlans.clone(),
                None => BTreeSet::from([DEFAULT_VLAN]),
            }
        };
        for (x, y) in &l2.links {
            let (a, b) = (index[x.as_str()], index[y.as_str()]);
            let (pa, pb) = (ifname::switch_port(y), ifname::switch_port(x));
            if !(st.alive[a] && st.alive[b] && port_up(x, &pa) && port_up(y, &pb)) {
                continue;
            }
            let e = st.graph.links.len();
            st.graph.links.push((a, b));
            st.port_vlans.insert((a, pa.clone()), carried(x, &pa));
            st.port_vlans.insert((b, pb.clone()), carried(y, &pb));
            st.port_names.insert((a, e), pa);
            st.port_names.insert((b, e), pb);
        }
        for h in &l2.host_ports {
            let sw = index[h.switch.as_str()];
            let port = ifname::switch_port(&h.host);
            st.port_vlans.insert((sw, port.clone()), carried(&h.switch, &port));
            st.hosts.insert(h.host.clone(), Attachment { switch: sw, port });
        }
        let (gsw, grouter) = &l2.gateway;
        let sw = index[gsw.as_str()];
        let port = ifname::switch_port(grouter);
        st.port_vlans.insert((sw, port.clone()), carried(gsw, &port));
        st.gateway = Some((Attachment { switch: sw, port }, grouter.clone()));
        // only alive switches take part in the election
        let alive_graph = st.graph.clone();
        st.trees = spanning_forest(&alive_graph)
            .into_iter()
            .filter(|t| st.alive[t.root])
            .collect();
        Some(st)
    }

    pub fn tree_of(&self, switch: usize) -> Option<&SpanningTree> {
        self.trees.iter().find(|t| t.members.contains(&switch))
    }

    fn attachment_up(&self, net: &Network, att: &Attachment) -> bool {
        self.alive[att.switch]
            && net.iface_up(&DeviceId::new(self.asn, &self.graph.names[att.switch]), &att.port)
    }

    /// Access VLAN a host port carries, if it is a single-VLAN port.
    pub fn host_vlan(&self, host: &str) -> Option<u16> {
        let att = self.hosts.get(host)?;
        let v = self.port_vlans.get(&(att.switch, att.port.clone()))?;
        (v.len() == 1).then(|| *v.iter().next().unwrap())
    }

    /// Structural reachability from a host port to another host or the gateway.
    pub fn reach(&self, net: &Network, src_host: &str, dst: &L2Target) -> Result<L2Path, NotReachable> {
        let src = self
            .hosts
            .get(src_host)
            .ok_or_else(|| NotReachable::UnknownPort(src_host.to_string()))?;
        let (dst_att, dst_vlans) = match dst {
            L2Target::Host(h) => {
                let a = self
                    .hosts
                    .get(*h)
                    .ok_or_else(|| NotReachable::UnknownPort(h.to_string()))?;
                (a, self.port_vlans[&(a.switch, a.port.clone())].clone())
            }
            L2Target::Gateway { .. } => {
                let (a, _) = self.gateway.as_ref().ok_or(NotReachable::NoPath)?;
                (a, self.port_vlans[&(a.switch, a.port.clone())].clone())
            }
        };
        let vlan = self.host_vlan(src_host).ok_or(NotReachable::VlanIsolation)?;
        let ok_vlan = match dst {
            L2Target::Host(_) => dst_vlans.len() == 1 && dst_vlans.contains(&vlan),
            L2Target::Gateway { vlan: v } => *v == vlan && dst_vlans.contains(&vlan),
        };
        if !ok_vlan {
            return Err(NotReachable::VlanIsolation);
        }
        if !self.attachment_up(net, src) || !self.attachment_up(net, dst_att) {
            return Err(NotReachable::PortDown);
        }
        let tree = self.tree_of(src.switch).ok_or(NotReachable::NoPath)?;
        // BFS over active links that carry the VLAN on both ends
        let adj = self.graph.adjacency();
        let mut prev: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        let mut seen = BTreeSet::from([src.switch]);
        let mut q = VecDeque::from([src.switch]);
        let carries = |s: usize, e: usize| {
            self.port_names
                .get(&(s, e))
                .and_then(|p| self.port_vlans.get(&(s, p.clone())))
                .is_some_and(|v| v.contains(&vlan))
        };
        while let Some(u) = q.pop_front() {
            if u == dst_att.switch {
                break;
            }
            for &(v, e) in &adj[u] {
                if tree.active.contains(&e) && !seen.contains(&v) && carries(u, e) && carries(v, e) {
                    seen.insert(v);
                    prev.insert(v, (u, e));
                    q.push_back(v);
                }
            }
        }
        if !seen.contains(&dst_att.switch) {
            return Err(NotReachable::NoPath);
        }
        let mut chain = vec![(dst_att.switch, None)];
        let mut cur = dst_att.switch;
        while let Some(&(p, e)) = prev.get(&cur) {
            chain.push((p, Some(e)));
            cur = p;
        }
        chain.reverse();
        // chain[i] = (switch, link towards chain[i+1])
        let mut hops = Vec::new();
        let mut ingress = src.port.clone();
        for (i, &(s, e)) in chain.iter().enumerate() {
            let egress = match e {
                Some(e) => self.port_names[&(s, e)].clone(),
                None => dst_att.port.clone(),
            };
            hops.push((self.graph.names[s].clone(), ingress.clone(), egress));
            if let Some(e) = e {
                let next = chain[i + 1].0;
                ingress = self.port_names[&(next, e)].clone();
            }
        }
        Ok(L2Path { vlan, hops })
    }

    /// `show spanning-tree` text for one switch.
    pub fn render_switch(&self, switch: &str) -> String {
        let mut out = String::from("Spanning tree\n");
        let Some(s) = self.graph.names.iter().position(|n| n == switch) else {
            return out;
        };
        let bid = self.graph.bridge_id(s);
        writeln!(out, "Bridge {} priority {}", switch, bid.0).unwrap();
        let Some(t) = self.tree_of(s) else {
            out.push_str("Switch down\n");
            return out;
        };
        writeln!(
            out,
            "Root {} priority {} cost {}",
            self.graph.names[t.root], self.graph.priorities[t.root], t.cost[&s]
        )
        .unwrap();
        let mut ports: Vec<(String, &str)> = Vec::new();
        for (&(sw, e), name) in &self.port_names {
            if sw != s {
                continue;
            }
            let role = if t.root_port.get(&s) == Some(&e) {
                "root"
            } else if t.blocked.contains(&(s, e)) {
                "blocked"
            } else {
                "designated"
            };
            ports.push((name.clone(), role));
        }
        ports.sort();
        for (name, role) in ports {
            writeln!(out, "  {name} {role}").unwrap();
        }
        out
    }
}
