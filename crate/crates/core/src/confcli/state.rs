use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use ipnet::Ipv4Net;
use serde::{Deserialize, Serialize};

use crate::topo::Asn;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceKind {
    Router,
    Switch,
    Host,
    RouteServer,
}

impl DeviceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DeviceKind::Router => "router",
            DeviceKind::Switch => "switch",
            DeviceKind::Host => "host",
            DeviceKind::RouteServer => "route-server",
        }
    }

    /// Routers and route servers speak BGP.
    pub fn is_l3_router(self) -> bool {
        matches!(self, DeviceKind::Router | DeviceKind::RouteServer)
    }
}

impl fmt::Display for DeviceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Permit,
    Deny,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::Permit => "permit",
            Action::Deny => "deny",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

/// Standard community `asn:tag`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Community {
    pub asn: u16,
    pub tag: u16,
}

impl Community {
    pub fn new(asn: u16, tag: u16) -> Self {
        Self { asn, tag }
    }
}

impl fmt::Display for Community {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.asn, self.tag)
    }
}

impl FromStr for Community {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        let (a, t) = s.split_once(':').ok_or(())?;
        Ok(Community {
            asn: a.parse().map_err(|_| ())?,
            tag: t.parse().map_err(|_| ())?,
        })
    }
}

/// Port role of a switch port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SwitchPortMode {
    Access(u16),
    Trunk,
}

/// VLAN of an unconfigured access port.
pub const DEFAULT_VLAN: u16 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterfaceState {
    pub address: Option<Ipv4Net>,
    pub admin_up: bool,
    pub switchport: Option<SwitchPortMode>,
}

impl Default for InterfaceState {
    fn default() -> Self {
        Self {
            address: None,
            admin_up: true,
            switchport: None,
        }
    }
}

impl InterfaceState {
    pub fn is_default(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OspfConfig {
    pub networks: BTreeSet<Ipv4Net>,
    pub costs: BTreeMap<String, u32>,
}

impl OspfConfig {
    /// An interface runs OSPF when its address falls inside a `network` statement.
    pub fn enabled_on(&self, addr: &Ipv4Net) -> bool {
        self.networks.iter().any(|n| n.contains(&addr.addr()))
    }

    pub fn cost(&self, iface: &str) -> u32 {
        self.costs.get(iface).copied().unwrap_or(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NeighborConfig {
    pub remote_as: Option<Asn>,
    pub route_map_in: Option<String>,
    pub route_map_out: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BgpConfig {
    pub asn: Asn,
    pub router_id: Option<Ipv4Addr>,
    pub neighbors: BTreeMap<Ipv4Addr, NeighborConfig>,
    pub networks: BTreeSet<Ipv4Net>,
}

impl BgpConfig {
    pub fn new(asn: Asn) -> Self {
        Self {
            asn,
            router_id: None,
            neighbors: BTreeMap::new(),
            networks: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteMapEntry {
    pub action: Action,
    pub match_prefix_list: Option<String>,
    pub match_community: Option<String>,
    pub set_local_pref: Option<u32>,
    pub set_med: Option<u32>,
    pub set_communities: BTreeSet<Community>,
    pub set_prepend: Option<u8>,
}

impl RouteMapEntry {
    pub fn new(action: Action) -> Self {
        Self {
            action,
            match_prefix_list: None,
            match_community: None,
            set_local_pref: None,
            set_med: None,
            set_communities: BTreeSet::new(),
            set_prepend: None,
        }
    }
}

/// Ordered route-map; the map key is the sequence number.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RouteMap {
    pub entries: BTreeMap<u32, RouteMapEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrefixListEntry {
    pub action: Action,
    pub prefix: Ipv4Net,
    pub ge: Option<u8>,
    pub le: Option<u8>,
}

impl PrefixListEntry {
    /// Without `ge`/`le` the length must match exactly.
    pub fn matches(&self, p: &Ipv4Net) -> bool {
        if p.prefix_len() < self.prefix.prefix_len() || !self.prefix.contains(&p.network()) {
            return false;
        }
        let len = p.prefix_len();
        match (self.ge, self.le) {
            (None, None) => len == self.prefix.prefix_len(),
            (ge, le) => {
                ge.map(|g| len >= g).unwrap_or(true)
                    && le.map(|l| len <= l).unwrap_or(true)
            }
        }
    }
}

/// First matching entry decides; no match denies.
pub fn prefix_list_permits(entries: &[PrefixListEntry], p: &Ipv4Net) -> bool {
    entries
        .iter()
        .find(|e| e.matches(p))
        .map(|e| e.action == Action::Permit)
        .unwrap_or(false)
}

/// Running configuration of one device. Interfaces are pre-populated with
/// the device's physical inventory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceState {
    pub kind: DeviceKind,
    pub interfaces: BTreeMap<String, InterfaceState>,
    pub ospf: Option<OspfConfig>,
    pub bgp: Option<BgpConfig>,
    pub route_maps: BTreeMap<String, RouteMap>,
    pub prefix_lists: BTreeMap<String, Vec<PrefixListEntry>>,
    pub community_lists: BTreeMap<String, BTreeSet<Community>>,
    pub vlans: BTreeSet<u16>,
    pub stp_priority: Option<u32>,
    pub static_routes: BTreeMap<Ipv4Net, Ipv4Addr>,
}

impl DeviceState {
    pub fn new<I, S>(kind: DeviceKind, interfaces: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            kind,
            interfaces: interfaces
                .into_iter()
                .map(|n| (n.into(), InterfaceState::default()))
                .collect(),
            ospf: None,
            bgp: None,
            route_maps: BTreeMap::new(),
            prefix_lists: BTreeMap::new(),
            community_lists: BTreeMap::new(),
            vlans: BTreeSet::new(),
            stp_priority: None,
            static_routes: BTreeMap::new(),
        }
    }

    /// Same kind and inventory, nothing configured.
    pub fn blank(&self) -> Self {
        Self::new(self.kind, self.interfaces.keys().cloned())
    }

    /// Router-id: configured, else loopback address, else highest interface address.
    pub fn router_id(&self) -> Option<Ipv4Addr> {
        if let Some(id) = self.bgp.as_ref().and_then(|b| b.router_id) {
            return Some(id);
        }
        if let Some(lo) = self
            .interfaces
            .get(crate::topo::ifname::LOOPBACK)
            .and_then(|i| i.address)
        {
            return Some(lo.addr());
        }
        self.interfaces
            .values()
            .filter_map(|i| i.address.map(|a| a.addr()))
            .max()
    }

    /// Interface carrying `addr` as its own address.
    pub fn interface_with_address(&self, addr: Ipv4Addr) -> Option<&str> {
        self.interfaces
            .iter()
            .find(|(_, i)| i.address.map(|a| a.addr()) == Some(addr))
            .map(|(n, _)| n.as_str())
    }

    pub fn owns(&self, addr: Ipv4Addr) -> bool {
        self.interface_with_address(addr).is_some()
    }
}
