use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use super::spec::*;

/// Maximum number of routers per AS: host LANs use `n.(100+r).0.0/24`
/// and must stay clear of the loopback block at `n.150.0.0`.
pub const MAX_ROUTERS_PER_AS: usize = 49;
/// Intra-AS /30s live at `n.0.k.0`, below the L2 block at `n.0.200.0`.
pub const MAX_INTRA_LINKS: usize = 199;
/// The L2 /23 holds four /25 VLAN subnets.
pub const MAX_VLANS: usize = 4;

/// One broken topology invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
#[serde(tag = "code")]
pub enum Violation {
    #[error("AS {0} declared more than once")]
    DuplicateAsn(Asn),
    #[error("AS number {0} outside 1..=126")]
    AsnOutOfRange(Asn),
    #[error("AS {asn} uses undeclared region `{region}`")]
    UnknownRegion { asn: Asn, region: String },
    #[error("AS {0} has no l3template")]
    MissingL3Template(Asn),
    #[error("AS {asn}: device name `{name}` used twice")]
    DuplicateRouter { asn: Asn, name: String },
    #[error("AS {0} has more than 49 routers")]
    TooManyRouters(Asn),
    #[error("AS {asn}: invalid device name `{name}`")]
    InvalidName { asn: Asn, name: String },
    #[error("AS {asn}: intra-AS link references unknown router `{router}`")]
    IntraLinkEndpoint { asn: Asn, router: String },
    #[error("AS {asn}: duplicate intra-AS link {a}-{b}")]
    DuplicateIntraLink { asn: Asn, a: String, b: String },
    #[error("AS {0} has more than 199 intra-AS links")]
    TooManyIntraLinks(Asn),
    #[error("AS {0}: router graph is not connected")]
    L3Disconnected(Asn),
    #[error("AS {asn}: invalid L2 template: {reason}")]
    L2Invalid { asn: Asn, reason: String },
    #[error("AS {0}: switch graph is not connected")]
    L2Disconnected(Asn),
    #[error("AS {asn}: host port uses undeclared VLAN {vlan}")]
    VlanUndeclared { asn: Asn, vlan: u16 },
    #[error("AS {0} declares more than 4 VLANs")]
    TooManyVlans(Asn),
    #[error("inter-AS link #{index} connects an AS to itself")]
    SelfLink { index: usize },
    #[error("inter-AS link #{index} references missing router {endpoint}")]
    DanglingLinkEndpoint { index: usize, endpoint: String },
    #[error("inter-AS link #{index} duplicates an earlier link between the same routers")]
    DuplicateInterAsLink { index: usize },
    #[error("IXP {0} has fewer than two distinct member ASes")]
    IxpTooFewMembers(u32),
    #[error("IXP {ixp} references missing router {member}")]
    IxpUnknownMember { ixp: u32, member: String },
    #[error("IXP {ixp} lists AS {asn} more than once")]
    IxpDuplicateMember { ixp: u32, asn: Asn },
    #[error("IXP id {0} collides with an AS number")]
    IxpIdCollision(u32),
    #[error("IXP id {0} outside 1..=255")]
    IxpIdOutOfRange(u32),
    #[error("IXP {0} declared more than once")]
    DuplicateIxp(u32),
    #[error("AS graph without IXPs is not connected ({components} components)")]
    DisconnectedAsGraph { components: usize },
}

impl Violation {
    /// Machine-readable code, the variant name.
    pub fn code(&self) -> &'static str {
        match self {
            Violation::DuplicateAsn(_) => "DuplicateAsn",
            Violation::AsnOutOfRange(_) => "AsnOutOfRange",
            Violation::UnknownRegion { .. } => "UnknownRegion",
            Violation::MissingL3Template(_) => "MissingL3Template",
            Violation::DuplicateRouter { .. } => "DuplicateRouter",
            Violation::TooManyRouters(_) => "TooManyRouters",
            Violation::InvalidName { .. } => "InvalidName",
            Violation::IntraLinkEndpoint { .. } => "IntraLinkEndpoint",
            Violation::DuplicateIntraLink { .. } => "DuplicateIntraLink",
            Violation::TooManyIntraLinks(_) => "TooManyIntraLinks",
            Violation::L3Disconnected(_) => "L3Disconnected",
            Violation::L2Invalid { .. } => "L2Invalid",
            Violation::L2Disconnected(_) => "L2Disconnected",
            Violation::VlanUndeclared { .. } => "VlanUndeclared",
            Violation::TooManyVlans(_) => "TooManyVlans",
            Violation::SelfLink { .. } => "SelfLink",
            Violation::DanglingLinkEndpoint { .. } => "DanglingLinkEndpoint",
            Violation::DuplicateInterAsLink { .. } => "DuplicateInterAsLink",
            Violation::IxpTooFewMembers(_) => "IxpTooFewMembers",
            Violation::IxpUnknownMember { .. } => "IxpUnknownMember",
            Violation::IxpDuplicateMember { .. } => "IxpDuplicateMember",
            Violation::IxpIdCollision(_) => "IxpIdCollision",
            Violation::IxpIdOutOfRange(_) => "IxpIdOutOfRange",
            Violation::DuplicateIxp(_) => "DuplicateIxp",
            Violation::DisconnectedAsGraph { .. } => "DisconnectedAsGraph",
        }
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Check every topology invariant. Empty result means the spec is valid.
pub fn validate(spec: &TopologySpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let regions: BTreeSet<&str> = spec.regions.iter().map(String::as_str).collect();
    let mut seen = BTreeSet::new();
    for a in &spec.ases {
        if !seen.insert(a.asn) {
            out.push(Violation::DuplicateAsn(a.asn));
        }
        if a.asn == 0 || a.asn > MAX_ASN {
            out.push(Violation::AsnOutOfRange(a.asn));
        }
        if !regions.contains(a.region.as_str()) {
            out.push(Violation::UnknownRegion {
                asn: a.asn,
                region: a.region.clone(),
            });
        }
        validate_l3(a, &mut out);
        if let Some(l2) = &a.l2 {
            validate_l2(a, l2, &mut out);
        }
    }

    let router_exists = |r: &RouterRef| {
        spec.as_spec(r.asn)
            .map(|a| a.l3.routers.iter().any(|x| x == &r.router))
            .unwrap_or(false)
    };

    let mut link_keys = BTreeSet::new();
    for (index, l) in spec.inter_as_links.iter().enumerate() {
        if l.a.asn == l.b.asn {
            out.push(Violation::SelfLink { index });
        }
        for end in [&l.a, &l.b] {
            if !router_exists(end) {
                out.push(Violation::DanglingLinkEndpoint {
                    index,
                    endpoint: end.to_string(),
                });
            }
        }
        let key = if l.a <= l.b {
            (l.a.clone(), l.b.clone())
        } else {
            (l.b.clone(), l.a.clone())
        };
        if !link_keys.insert(key) {
            out.push(Violation::DuplicateInterAsLink { index });
        }
    }

    let mut ixp_ids = BTreeSet::new();
    for x in &spec.ixps {
        if !ixp_ids.insert(x.id) {
            out.push(Violation::DuplicateIxp(x.id));
        }
        if x.id == 0 || x.id > 255 {
            out.push(Violation::IxpIdOutOfRange(x.id));
        }
        if seen.contains(&x.id) {
            out.push(Violation::IxpIdCollision(x.id));
        }
        let mut member_asns = BTreeSet::new();
        for m in &x.members {
            if !router_exists(m) {
                out.push(Violation::IxpUnknownMember {
                    ixp: x.id,
                    member: m.to_string(),
                });
            }
            if !member_asns.insert(m.asn) {
                out.push(Violation::IxpDuplicateMember { ixp: x.id, asn: m.asn });
            }
        }
        if member_asns.len() < 2 {
            out.push(Violation::IxpTooFewMembers(x.id));
        }
    }

    let components = as_graph_components(spec);
    if components > 1 {
        out.push(Violation::DisconnectedAsGraph { components });
    }
    out
}

fn validate_l3(a: &AsSpec, out: &mut Vec<Violation>) {
    if a.l3.routers.is_empty() {
        out.push(Violation::MissingL3Template(a.asn));
        return;
    }
    if a.l3.routers.len() > MAX_ROUTERS_PER_AS {
        out.push(Violation::TooManyRouters(a.asn));
    }
    let mut names = BTreeSet::new();
    for r in &a.l3.routers {
        if !valid_name(r) {
            out.push(Violation::InvalidName {
                asn: a.asn,
                name: r.clone(),
            });
        }
        if !names.insert(r.clone()) {
            out.push(Violation::DuplicateRouter {
                asn: a.asn,
                name: r.clone(),
            });
        }
        if a.l3.hosts {
            names.insert(AsSpec::router_host_name(r));
        }
    }
    if let Some(l2) = &a.l2 {
        for n in l2
            .switches
            .iter()
            .map(|s| &s.name)
            .chain(l2.host_ports.iter().map(|h| &h.host))
        {
            if !valid_name(n) {
                out.push(Violation::InvalidName {
                    asn: a.asn,
                    name: n.clone(),
                });
            }
            if !names.insert(n.clone()) {
                out.push(Violation::DuplicateRouter {
                    asn: a.asn,
                    name: n.clone(),
                });
            }
        }
    }
    if a.l3.links.len() > MAX_INTRA_LINKS {
        out.push(Violation::TooManyIntraLinks(a.asn));
    }
    let mut keys = BTreeSet::new();
    let idx: BTreeMap<&str, usize> = a
        .l3
        .routers
        .iter()
        .enumerate()
        .map(|(i, r)| (r.as_str(), i))
        .collect();
    let mut uf = UnionFind::new(a.l3.routers.len());
    for l in &a.l3.links {
        let (x, y) = l.sorted_key();
        if !keys.insert((x.to_string(), y.to_string())) || x == y {
            out.push(Violation::DuplicateIntraLink {
                asn: a.asn,
                a: x.to_string(),
                b: y.to_string(),
            });
        }
        let (ia, ib) = (idx.get(l.a.as_str()), idx.get(l.b.as_str()));
        for (name, i) in [(&l.a, ia), (&l.b, ib)] {
            if i.is_none() {
                out.push(Violation::IntraLinkEndpoint {
                    asn: a.asn,
                    router: name.clone(),
                });
            }
        }
        if let (Some(&ia), Some(&ib)) = (ia, ib) {
            uf.union(ia, ib);
        }
    }
    if uf.components() > 1 {
        out.push(Violation::L3Disconnected(a.asn));
    }
}

fn validate_l2(a: &AsSpec, l2: &L2Template, out: &mut Vec<Violation>) {
    let invalid = |reason: String| Violation::L2Invalid { asn: a.asn, reason };
    if l2.switches.is_empty() {
        out.push(invalid("no switches".into()));
        return;
    }
    let idx: BTreeMap<&str, usize> = l2
        .switches
        .iter()
        .enumerate()
        .map(|(i, s)| (s.name.as_str(), i))
        .collect();
    let mut uf = UnionFind::new(l2.switches.len());
    let mut keys = BTreeSet::new();
    for (x, y) in &l2.links {
        match (idx.get(x.as_str()), idx.get(y.as_str())) {
            (Some(&i), Some(&j)) if i != j => {
                uf.union(i, j);
                let k = if x <= y { (x, y) } else { (y, x) };
                if !keys.insert(k) {
                    out.push(invalid(format!("duplicate switch link {x}-{y}")));
                }
            }
            (Some(_), Some(_)) => out.push(invalid(format!("switch link {x}-{y} is a loop"))),
            _ => out.push(invalid(format!("switch link {x}-{y} references unknown switch"))),
        }
    }
    if uf.components() > 1 {
        out.push(Violation::L2Disconnected(a.asn));
    }
    let vlans: BTreeSet<u16> = l2.vlans.iter().copied().collect();
    if vlans.len() != l2.vlans.len() {
        out.push(invalid("duplicate VLAN id".into()));
    }
    if vlans.len() > MAX_VLANS {
        out.push(Violation::TooManyVlans(a.asn));
    }
    if vlans.iter().any(|&v| v == 0 || v > 4094) {
        out.push(invalid("VLAN id outside 1..=4094".into()));
    }
    for h in &l2.host_ports {
        if !idx.contains_key(h.switch.as_str()) {
            out.push(invalid(format!(
                "host {} attached to unknown switch {}",
                h.host, h.switch
            )));
        }
        if !vlans.contains(&h.vlan) {
            out.push(Violation::VlanUndeclared {
                asn: a.asn,
                vlan: h.vlan,
            });
        }
    }
    let (gsw, grouter) = &l2.gateway;
    if !idx.contains_key(gsw.as_str()) {
        out.push(invalid(format!("gateway switch {gsw} unknown")));
    }
    if !a.l3.routers.iter().any(|r| r == grouter) {
        out.push(invalid(format!("gateway router {grouter} unknown")));
    }
}

/// Number of connected components of the AS graph formed by direct links only.
fn as_graph_components(spec: &TopologySpec) -> usize {
    let idx: BTreeMap<Asn, usize> = spec
        .ases
        .iter()
        .enumerate()
        .map(|(i, a)| (a.asn, i))
        .collect();
    let mut uf = UnionFind::new(spec.ases.len());
    for l in &spec.inter_as_links {
        if let (Some(&i), Some(&j)) = (idx.get(&l.a.asn), idx.get(&l.b.asn)) {
            uf.union(i, j);
        }
    }
    uf.components()
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    pub(crate) fn components(&mut self) -> usize {
        (0..self.parent.len()).filter(|&i| self.find(i) == i).count()
    }
}
