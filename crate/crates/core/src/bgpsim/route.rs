use std::collections::BTreeSet;
use std::net::Ipv4Addr;

use ipnet::Ipv4Net;
use serde::Serialize;

use crate::confcli::Community;
use crate::topo::Asn;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Igp,
    Incomplete,
}

impl Origin {
    pub fn code(self) -> &'static str {
        match self {
            Origin::Igp => "i",
            Origin::Incomplete => "?",
        }
    }
}

/// How a route entered this router.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionKind {
    /// Originated by a `network` statement on this router.
    Local,
    Ebgp,
    Ibgp,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BgpRoute {
    pub prefix: Ipv4Net,
    pub as_path: Vec<Asn>,
    pub next_hop: Ipv4Addr,
    pub local_pref: u32,
    pub med: u32,
    pub communities: BTreeSet<Community>,
    pub origin: Origin,
    pub learned_via: SessionKind,
    /// Session peer address; unspecified for local routes.
    pub peer_addr: Ipv4Addr,
    pub peer_router_id: Ipv4Addr,
}

pub const DEFAULT_LOCAL_PREF: u32 = 100;

impl BgpRoute {
    /// Route originated locally by `network <prefix>`.
    pub fn local(prefix: Ipv4Net) -> Self {
        Self {
            prefix,
            as_path: Vec::new(),
            next_hop: Ipv4Addr::UNSPECIFIED,
            local_pref: DEFAULT_LOCAL_PREF,
            med: 0,
            communities: BTreeSet::new(),
            origin: Origin::Igp,
            learned_via: SessionKind::Local,
            peer_addr: Ipv4Addr::UNSPECIFIED,
            peer_router_id: Ipv4Addr::UNSPECIFIED,
        }
    }

    /// Neighboring AS the route was learned from (first path element).
    pub fn neighbor_as(&self) -> Option<Asn> {
        self.as_path.first().copied()
    }

    pub fn path_string(&self) -> String {
        self.as_path
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}
