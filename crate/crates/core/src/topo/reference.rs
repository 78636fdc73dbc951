//! Reference configurations: what the instructors deploy on auto-configured
//! ASes and IXP route servers, and the oracle the grader compares against.
//!
//! Phase 1 covers addressing, OSPF, switches and hosts; phase 2 covers BGP
//! and routing policy. Policy follows the usual business model: routes are
//! tagged by the relationship they were learned over, local preference is
//! customer > peer > provider, and only customer routes (and our own) are
//! exported to peers and providers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::net::Ipv4Addr;

use super::address::{ifname, AddressPlan};
use super::network::{Medium, Network};
use super::spec::*;
use super::{TopoError, ROUTE_SERVER_NAME};

/// Device name to configuration script.
pub type ConfigScripts = BTreeMap<String, String>;

/// Local preference and community tag per neighbor relationship.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferencePolicy {
    pub customer_lp: u32,
    pub peer_lp: u32,
    pub provider_lp: u32,
}

impl Default for ReferencePolicy {
    fn default() -> Self {
        Self {
            customer_lp: 300,
            peer_lp: 200,
            provider_lp: 100,
        }
    }
}

pub const CUSTOMER_TAG: u16 = 10;
pub const PEER_TAG: u16 = 20;
pub const PROVIDER_TAG: u16 = 30;

/// Inbound route-map name for a relationship.
pub fn inbound_map(kind: NeighborKind) -> &'static str {
    match kind {
        NeighborKind::Customer => "FROM_CUSTOMER",
        NeighborKind::Peer | NeighborKind::Ixp => "FROM_PEER",
        NeighborKind::Provider => "FROM_PROVIDER",
    }
}

/// Outbound route-map name, none towards customers.
pub fn outbound_map(kind: NeighborKind) -> Option<&'static str> {
    match kind {
        NeighborKind::Customer => None,
        NeighborKind::Peer | NeighborKind::Ixp => Some("TO_PEER"),
        NeighborKind::Provider => Some("TO_PROVIDER"),
    }
}

/// eBGP neighbor of a router as seen by the reference configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalNeighbor {
    pub local_iface: String,
    pub address: Ipv4Addr,
    pub asn: Asn,
    pub kind: NeighborKind,
}

/// eBGP neighbors of `router` in `asn`, in segment order.
pub fn external_neighbors(net: &Network, asn: Asn, router: &str) -> Vec<ExternalNeighbor> {
    let mut out = Vec::new();
    for s in &net.segments {
        let Some(me) = s.ends.iter().find(|e| e.asn == asn && e.device == router) else {
            continue;
        };
        match s.medium {
            Medium::InterAs { index } => {
                let link = &net.spec.inter_as_links[index];
                let other = s.ends.iter().find(|e| e.asn != asn).expect("two ASes");
                if let (Some(addr), Some(kind)) = (
                    net.plan.address_of(other.asn, &other.device, &other.iface),
                    link.kind_from(asn),
                ) {
                    out.push(ExternalNeighbor {
                        local_iface: me.iface.clone(),
                        address: addr.addr(),
                        asn: other.asn,
                        kind,
                    });
                }
            }
            Medium::Ixp { id } => {
                if let Some(addr) =
                    net.plan
                        .address_of(id, ROUTE_SERVER_NAME, ifname::ROUTE_SERVER)
                {
                    out.push(ExternalNeighbor {
                        local_iface: me.iface.clone(),
                        address: addr.addr(),
                        asn: id,
                        kind: NeighborKind::Ixp,
                    });
                }
            }
            _ => {}
        }
    }
    out
}

/// Reference scripts split into (phase 1, phase 2).
pub fn reference_config_phases(
    net: &Network,
    asn: Asn,
) -> Result<(ConfigScripts, ConfigScripts), TopoError> {
    if let Some(ixp) = net.spec.ixp(asn) {
        return Ok(route_server_phases(net, ixp));
    }
    let a = net.spec.as_spec(asn).ok_or(TopoError::UnknownAsn(asn))?;
    let policy = ReferencePolicy::default();
    let mut p1 = ConfigScripts::new();
    let mut p2 = ConfigScripts::new();
    let addr = |dev: &str, iface: &str| net.plan.address_of(asn, dev, iface);

    for r in &a.l3.routers {
        let dev = net.device(asn, r).expect("router exists");
        let mut s = String::new();
        let mut ospf_extra = Vec::new();
        for iface in dev.config.interfaces.keys() {
            if let Some(a) = addr(r, iface) {
                writeln!(s, "interface {iface}\n ip address {a}").unwrap();
                if iface.starts_with("ext_") || iface.starts_with("ixp_") {
                    ospf_extra.push(a.trunc());
                }
            }
        }
        if let Some(l2) = &a.l2 {
            if &l2.gateway.1 == r {
                let mut vlans = l2.vlans.clone();
                vlans.sort_unstable();
                for v in vlans {
                    let name = ifname::vlan(v);
                    if let Some(a) = addr(r, &name) {
                        writeln!(s, "interface {name}\n ip address {a}").unwrap();
                    }
                }
            }
        }
        writeln!(s, "router ospf\n network {} area 0", AddressPlan::as_prefix(asn)).unwrap();
        for p in ospf_extra {
            writeln!(s, " network {p} area 0").unwrap();
        }
        for l in a.l3.links.iter().filter(|l| l.cost != 1) {
            let peer = match (&l.a == r, &l.b == r) {
                (true, _) => &l.b,
                (_, true) => &l.a,
                _ => continue,
            };
            writeln!(s, "interface {} ospf cost {}", ifname::intra(peer), l.cost).unwrap();
        }
        p1.insert(r.clone(), s);

        let mut s = String::new();
        let lo = net.plan.address_of(asn, r, ifname::LOOPBACK).expect("loopback");
        writeln!(s, "router bgp {asn}\n bgp router-id {}", lo.addr()).unwrap();
        for other in a.l3.routers.iter().filter(|o| *o != r) {
            let olo = net.plan.address_of(asn, other, ifname::LOOPBACK).expect("loopback");
            writeln!(s, " neighbor {} remote-as {asn}", olo.addr()).unwrap();
        }
        let ext = external_neighbors(net, asn, r);
        let mut used_kinds = Vec::new();
        for n in &ext {
            writeln!(s, " neighbor {} remote-as {}", n.address, n.asn).unwrap();
            writeln!(s, " neighbor {} route-map {} in", n.address, inbound_map(n.kind)).unwrap();
            if let Some(m) = outbound_map(n.kind) {
                writeln!(s, " neighbor {} route-map {m} out", n.address).unwrap();
            }
            let k = if n.kind == NeighborKind::Ixp {
                NeighborKind::Peer
            } else {
                n.kind
            };
            if !used_kinds.contains(&k) {
                used_kinds.push(k);
            }
        }
        writeln!(s, " network {}", AddressPlan::as_prefix(asn)).unwrap();
        used_kinds.sort();
        for k in &used_kinds {
            let (lp, tag) = match k {
                NeighborKind::Customer => (policy.customer_lp, CUSTOMER_TAG),
                NeighborKind::Provider => (policy.provider_lp, PROVIDER_TAG),
                _ => (policy.peer_lp, PEER_TAG),
            };
            writeln!(
                s,
                "route-map {} permit 10\n set local-preference {lp}\n set community {asn}:{tag} additive",
                inbound_map(*k)
            )
            .unwrap();
            if let Some(m) = outbound_map(*k) {
                writeln!(
                    s,
                    "route-map {m} deny 10\n match community NOT_CUSTOMER\nroute-map {m} permit 20"
                )
                .unwrap();
            }
        }
        if used_kinds.iter().any(|k| *k != NeighborKind::Customer) {
            writeln!(
                s,
                "bgp community-list NOT_CUSTOMER permit {asn}:{PEER_TAG}\nbgp community-list NOT_CUSTOMER permit {asn}:{PROVIDER_TAG}"
            )
            .unwrap();
        }
        p2.insert(r.clone(), s);

        if a.l3.hosts {
            let host = AsSpec::router_host_name(r);
            p1.insert(host.clone(), host_script(net, asn, &host));
        }
    }
    if let Some(l2) = &a.l2 {
        let mut vlans = l2.vlans.clone();
        vlans.sort_unstable();
        for sw in &l2.switches {
            let mut s = String::new();
            for v in &vlans {
                writeln!(s, "vlan {v}").unwrap();
            }
            for (x, y) in &l2.links {
                if x == &sw.name {
                    writeln!(s, "interface {} trunk", ifname::switch_port(y)).unwrap();
                } else if y == &sw.name {
                    writeln!(s, "interface {} trunk", ifname::switch_port(x)).unwrap();
                }
            }
            if l2.gateway.0 == sw.name {
                writeln!(s, "interface {} trunk", ifname::switch_port(&l2.gateway.1)).unwrap();
            }
            for h in l2.host_ports.iter().filter(|h| h.switch == sw.name) {
                writeln!(
                    s,
                    "interface {} access vlan {}",
                    ifname::switch_port(&h.host),
                    h.vlan
                )
                .unwrap();
            }
            p1.insert(sw.name.clone(), s);
        }
        for h in &l2.host_ports {
            p1.insert(h.host.clone(), host_script(net, asn, &h.host));
        }
    }
    Ok((p1, p2))
}

fn host_script(net: &Network, asn: Asn, host: &str) -> String {
    let mut s = String::new();
    if let Some(a) = net.plan.address_of(asn, host, ifname::HOST_ETH) {
        writeln!(s, "interface {}\n ip address {a}", ifname::HOST_ETH).unwrap();
    }
    if let Some(gw) = net.plan.gateways.get(&(asn, host.to_string())) {
        writeln!(s, "ip route default via {gw}").unwrap();
    }
    s
}

fn route_server_phases(net: &Network, ixp: &IxpSpec) -> (ConfigScripts, ConfigScripts) {
    let mut p1 = ConfigScripts::new();
    let mut p2 = ConfigScripts::new();
    let own = net
        .plan
        .address_of(ixp.id, ROUTE_SERVER_NAME, ifname::ROUTE_SERVER)
        .expect("route server address");
    p1.insert(
        ROUTE_SERVER_NAME.to_string(),
        format!("interface {}\n ip address {own}\n", ifname::ROUTE_SERVER),
    );
    let mut s = format!("router bgp {}\n bgp router-id {}\n", ixp.id, own.addr());
    for m in &ixp.members {
        if let Some(a) = net.plan.address_of(m.asn, &m.router, &ifname::ixp(ixp.id)) {
            writeln!(s, " neighbor {} remote-as {}", a.addr(), m.asn).unwrap();
        }
    }
    p2.insert(ROUTE_SERVER_NAME.to_string(), s);
    (p1, p2)
}

/// Full reference configuration of an AS or IXP route server.
pub fn generate_reference_config(net: &Network, asn: Asn) -> Result<ConfigScripts, TopoError> {
    let (mut p1, p2) = reference_config_phases(net, asn)?;
    for (dev, s) in p2 {
        p1.entry(dev).or_default().push_str(&s);
    }
    Ok(p1)
}
