//! Declarative topology description: ASes, their templates, inter-AS links and IXPs.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Autonomous system number. IXP route servers also carry one.
pub type Asn = u32;

/// Highest ASN that may own a /8 (127/8 is loopback).
pub const MAX_ASN: Asn = 126;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AsRole {
    Tier1,
    Transit,
    Stub,
}

impl AsRole {
    pub fn as_str(self) -> &'static str {
        match self {
            AsRole::Tier1 => "tier1",
            AsRole::Transit => "transit",
            AsRole::Stub => "stub",
        }
    }

    /// Tier1s and stubs are configured by the instructors.
    pub fn auto_by_default(self) -> bool {
        !matches!(self, AsRole::Transit)
    }
}

impl fmt::Display for AsRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A router inside a given AS, written `asn.router` in topology files.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RouterRef {
    pub asn: Asn,
    pub router: String,
}

impl RouterRef {
    pub fn new(asn: Asn, router: impl Into<String>) -> Self {
        Self {
            asn,
            router: router.into(),
        }
    }
}

impl fmt::Display for RouterRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.asn, self.router)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relationship {
    AProviderOfB,
    BProviderOfA,
    Peer,
}

/// Business relationship of one AS towards a neighbor, seen from the first AS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeighborKind {
    /// The neighbor is our customer.
    Customer,
    /// The neighbor is our peer (direct link).
    Peer,
    /// The neighbor is our provider.
    Provider,
    /// The neighbor is reached through an IXP route server.
    Ixp,
}

impl NeighborKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NeighborKind::Customer => "customer",
            NeighborKind::Peer => "peer",
            NeighborKind::Provider => "provider",
            NeighborKind::Ixp => "ixp",
        }
    }

    /// Peers and IXP members are treated alike by routing policy.
    pub fn is_peer_like(self) -> bool {
        matches!(self, NeighborKind::Peer | NeighborKind::Ixp)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterAsLink {
    pub a: RouterRef,
    pub b: RouterRef,
    pub relationship: Relationship,
    pub delay_us: u64,
    pub bandwidth_bps: u64,
    pub admin_up: bool,
}

impl InterAsLink {
    /// Relationship of `asn`'s neighbor on this link, from `asn`'s point of view.
    pub fn kind_from(&self, asn: Asn) -> Option<NeighborKind> {
        let a_side = if self.a.asn == asn {
            true
        } else if self.b.asn == asn {
            false
        } else {
            return None;
        };
        Some(match (self.relationship, a_side) {
            (Relationship::Peer, _) => NeighborKind::Peer,
            (Relationship::AProviderOfB, true) | (Relationship::BProviderOfA, false) => {
                NeighborKind::Customer
            }
            (Relationship::AProviderOfB, false) | (Relationship::BProviderOfA, true) => {
                NeighborKind::Provider
            }
        })
    }

    pub fn other(&self, asn: Asn) -> Option<&RouterRef> {
        if self.a.asn == asn {
            Some(&self.b)
        } else if self.b.asn == asn {
            Some(&self.a)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IxpSpec {
    /// Also the ASN of the IXP route server.
    pub id: u32,
    pub members: Vec<RouterRef>,
    pub delay_us: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntraLink {
    pub a: String,
    pub b: String,
    pub cost: u32,
    pub delay_us: u64,
}

impl IntraLink {
    /// Endpoints in lexicographic order; this is the key used for address allocation.
    pub fn sorted_key(&self) -> (&str, &str) {
        if self.a <= self.b {
            (&self.a, &self.b)
        } else {
            (&self.b, &self.a)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct L3Template {
    pub routers: Vec<String>,
    pub links: Vec<IntraLink>,
    /// One host attached to every router.
    pub hosts: bool,
}

impl L3Template {
    /// 1-based position of a router, used by the address plan.
    pub fn router_index(&self, name: &str) -> Option<usize> {
        self.routers.iter().position(|r| r == name).map(|i| i + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchSpec {
    pub name: String,
    pub priority: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HostPort {
    pub switch: String,
    pub host: String,
    pub vlan: u16,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct L2Template {
    pub switches: Vec<SwitchSpec>,
    pub links: Vec<(String, String)>,
    pub host_ports: Vec<HostPort>,
    /// (switch, router) pair where the router-on-a-stick gateway attaches.
    pub gateway: (String, String),
    pub vlans: Vec<u16>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsSpec {
    pub asn: Asn,
    pub role: AsRole,
    pub region: String,
    pub l3: L3Template,
    pub l2: Option<L2Template>,
    pub auto_configured: bool,
}

impl AsSpec {
    /// Name of the host hanging off `router`.
    pub fn router_host_name(router: &str) -> String {
        format!("{router}-host")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TopologySpec {
    pub regions: Vec<String>,
    pub ases: Vec<AsSpec>,
    pub inter_as_links: Vec<InterAsLink>,
    pub ixps: Vec<IxpSpec>,
}

impl TopologySpec {
    pub fn as_spec(&self, asn: Asn) -> Option<&AsSpec> {
        self.ases.iter().find(|a| a.asn == asn)
    }

    pub fn as_spec_mut(&mut self, asn: Asn) -> Option<&mut AsSpec> {
        self.ases.iter_mut().find(|a| a.asn == asn)
    }

    pub fn asns(&self) -> Vec<Asn> {
        let mut v: Vec<Asn> = self.ases.iter().map(|a| a.asn).collect();
        v.sort_unstable();
        v
    }

    pub fn ixp(&self, id: u32) -> Option<&IxpSpec> {
        self.ixps.iter().find(|x| x.id == id)
    }

    /// Relationship of `other` seen from `asn`. Direct links win over shared IXPs.
    pub fn neighbor_kind(&self, asn: Asn, other: Asn) -> Option<NeighborKind> {
        let direct = self
            .inter_as_links
            .iter()
            .filter(|l| l.other(asn).map(|r| r.asn) == Some(other))
            .filter_map(|l| l.kind_from(asn))
            .min();
        if direct.is_some() {
            return direct;
        }
        let shared_ixp = self.ixps.iter().any(|x| {
            x.members.iter().any(|m| m.asn == asn) && x.members.iter().any(|m| m.asn == other)
        });
        shared_ixp.then_some(NeighborKind::Ixp)
    }

    /// All neighbor ASes of `asn` with their relationship.
    pub fn neighbors(&self, asn: Asn) -> Vec<(Asn, NeighborKind)> {
        let mut out: Vec<(Asn, NeighborKind)> = Vec::new();
        let mut others: Vec<Asn> = self
            .inter_as_links
            .iter()
            .filter_map(|l| l.other(asn).map(|r| r.asn))
            .collect();
        for x in &self.ixps {
            if x.members.iter().any(|m| m.asn == asn) {
                others.extend(x.members.iter().map(|m| m.asn).filter(|&m| m != asn));
            }
        }
        others.sort_unstable();
        others.dedup();
        for o in others {
            if let Some(k) = self.neighbor_kind(asn, o) {
                out.push((o, k));
            }
        }
        out
    }
}
