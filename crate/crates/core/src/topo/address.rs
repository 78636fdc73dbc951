//! Deterministic address plan.
//!
//! | what                           | subnet                        |
//! |--------------------------------|-------------------------------|
//! | AS `n`                         | `n.0.0.0/8`                   |
//! | L2 network                     | `n.0.200.0/23`                |
//! | VLAN, k-th in ascending order  | `n.0.200.0/23` split in /25s  |
//! | host LAN of router `r`         | `n.(100+r).0.0/24`, host .1, router .2 |
//! | loopback of router `r`         | `n.150.0.r/32`                |
//! | intra-AS link `k` (sorted)     | `n.0.k.0/30`, k >= 1          |
//! | k-th inter-AS link, ASes a < b | `179.a.b.(4k)/30`, a side .1  |
//! | IXP `i`                        | `180.i.0.0/24`, member `m` at .m, route server at .254 |
//!
//! Router indices are 1-based positions in the L3 template.

use std::collections::BTreeMap;
use std::net::Ipv4Addr;

use ipnet::Ipv4Net;
use serde::Serialize;

use super::spec::*;
use super::TopoError;

pub const INTER_AS_OCTET: u8 = 179;
pub const IXP_OCTET: u8 = 180;
pub const ROUTE_SERVER_HOST: u8 = 254;

/// Interface naming shared by the address plan and the instantiated network.
pub mod ifname {
    use super::Asn;

    pub const LOOPBACK: &str = "lo";
    pub const HOST_LAN: &str = "host";
    pub const HOST_ETH: &str = "eth0";
    pub const ROUTE_SERVER: &str = "ixp";
    pub const L2_PHYS: &str = "l2";

    pub fn intra(peer: &str) -> String {
        format!("port_{peer}")
    }
    pub fn inter_as(peer_asn: Asn, peer_router: &str) -> String {
        format!("ext_{peer_asn}_{peer_router}")
    }
    pub fn ixp(id: u32) -> String {
        format!("ixp_{id}")
    }
    pub fn vlan(v: u16) -> String {
        format!("{L2_PHYS}.{v}")
    }
    pub fn switch_port(peer: &str) -> String {
        format!("port_{peer}")
    }
    /// Physical port of a (possibly sub-) interface: `l2.10` -> `l2`.
    pub fn physical(name: &str) -> &str {
        name.split_once('.').map(|(p, _)| p).unwrap_or(name)
    }
}

/// Key of one planned interface address.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct IfaceKey {
    pub asn: Asn,
    pub device: String,
    pub iface: String,
}

impl IfaceKey {
    pub fn new(asn: Asn, device: &str, iface: &str) -> Self {
        Self {
            asn,
            device: device.to_string(),
            iface: iface.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct AsAddresses {
    pub as_prefix: Ipv4Net,
    pub l2_subnet: Option<Ipv4Net>,
    pub vlan_subnets: BTreeMap<u16, Ipv4Net>,
    pub host_lans: BTreeMap<String, Ipv4Net>,
    pub loopbacks: BTreeMap<String, Ipv4Net>,
    pub intra_links: BTreeMap<(String, String), Ipv4Net>,
}

impl AsAddresses {
    /// Every leaf subnet (everything except the /8 and the /23 container).
    pub fn leaf_subnets(&self) -> Vec<Ipv4Net> {
        self.vlan_subnets
            .values()
            .chain(self.host_lans.values())
            .chain(self.loopbacks.values())
            .chain(self.intra_links.values())
            .copied()
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct AddressPlan {
    pub per_as: BTreeMap<Asn, AsAddresses>,
    /// Indexed like `TopologySpec::inter_as_links`.
    pub inter_as: Vec<Ipv4Net>,
    pub ixps: BTreeMap<u32, Ipv4Net>,
    /// Planned address of every addressable interface.
    pub interfaces: BTreeMap<IfaceKey, Ipv4Net>,
    /// Default gateway of every host.
    pub gateways: BTreeMap<(Asn, String), Ipv4Addr>,
}

fn net(a: u8, b: u8, c: u8, d: u8, len: u8) -> Ipv4Net {
    Ipv4Net::new(Ipv4Addr::new(a, b, c, d), len).expect("valid prefix length")
}

fn host_in(subnet: Ipv4Net, offset: u32) -> Ipv4Net {
    let base = u32::from(subnet.network());
    Ipv4Net::new(Ipv4Addr::from(base + offset), subnet.prefix_len()).expect("valid length")
}

impl AddressPlan {
    pub fn as_prefix(asn: Asn) -> Ipv4Net {
        net(asn as u8, 0, 0, 0, 8)
    }

    pub fn loopback(asn: Asn, router_index: usize) -> Ipv4Addr {
        Ipv4Addr::new(asn as u8, 150, 0, router_index as u8)
    }

    /// Planned address of an interface, if the plan assigns one.
    pub fn address_of(&self, asn: Asn, device: &str, iface: &str) -> Option<Ipv4Net> {
        self.interfaces
            .get(&IfaceKey::new(asn, device, iface))
            .copied()
    }

    /// Every allocated subnet: per-AS leaves, inter-AS /30s and IXP LANs.
    pub fn all_subnets(&self) -> Vec<Ipv4Net> {
        let mut v: Vec<Ipv4Net> = self.per_as.values().flat_map(|a| a.leaf_subnets()).collect();
        v.extend(self.inter_as.iter().copied());
        v.extend(self.ixps.values().copied());
        v
    }
}

/// Allocate addresses for a valid spec.
pub fn allocate_addresses(spec: &TopologySpec) -> Result<AddressPlan, TopoError> {
    let mut plan = AddressPlan::default();
    for a in &spec.ases {
        if a.asn == 0 || a.asn > MAX_ASN {
            return Err(TopoError::AsnOutOfRange(a.asn));
        }
        let n = a.asn as u8;
        let mut aa = AsAddresses {
            as_prefix: AddressPlan::as_prefix(a.asn),
            ..Default::default()
        };
        for (i, r) in a.l3.routers.iter().enumerate() {
            let idx = (i + 1) as u8;
            let lo = net(n, 150, 0, idx, 32);
            aa.loopbacks.insert(r.clone(), lo);
            plan.interfaces
                .insert(IfaceKey::new(a.asn, r, ifname::LOOPBACK), lo);
            if a.l3.hosts {
                let lan = net(n, 100 + idx, 0, 0, 24);
                aa.host_lans.insert(r.clone(), lan);
                let host = AsSpec::router_host_name(r);
                plan.interfaces
                    .insert(IfaceKey::new(a.asn, &host, ifname::HOST_ETH), host_in(lan, 1));
                plan.interfaces
                    .insert(IfaceKey::new(a.asn, r, ifname::HOST_LAN), host_in(lan, 2));
                plan.gateways
                    .insert((a.asn, host), host_in(lan, 2).addr());
            }
        }
        let mut links: Vec<(&str, &str)> = a.l3.links.iter().map(|l| l.sorted_key()).collect();
        links.sort_unstable();
        for (k, (x, y)) in links.into_iter().enumerate() {
            let subnet = net(n, 0, (k + 1) as u8, 0, 30);
            aa.intra_links
                .insert((x.to_string(), y.to_string()), subnet);
            plan.interfaces
                .insert(IfaceKey::new(a.asn, x, &ifname::intra(y)), host_in(subnet, 1));
            plan.interfaces
                .insert(IfaceKey::new(a.asn, y, &ifname::intra(x)), host_in(subnet, 2));
        }
        if let Some(l2) = &a.l2 {
            aa.l2_subnet = Some(net(n, 0, 200, 0, 23));
            let mut vlans = l2.vlans.clone();
            vlans.sort_unstable();
            for (k, v) in vlans.iter().enumerate() {
                let block = (200u32 << 8) + 128 * k as u32;
                let subnet = net(n, 0, (block >> 8) as u8, (block & 0xff) as u8, 25);
                aa.vlan_subnets.insert(*v, subnet);
                plan.interfaces.insert(
                    IfaceKey::new(a.asn, &l2.gateway.1, &ifname::vlan(*v)),
                    host_in(subnet, 1),
                );
                let mut next = 2;
                for h in l2.host_ports.iter().filter(|h| h.vlan == *v) {
                    plan.interfaces.insert(
                        IfaceKey::new(a.asn, &h.host, ifname::HOST_ETH),
                        host_in(subnet, next),
                    );
                    plan.gateways
                        .insert((a.asn, h.host.clone()), host_in(subnet, 1).addr());
                    next += 1;
                }
            }
        }
        plan.per_as.insert(a.asn, aa);
    }

    let mut per_pair: BTreeMap<(Asn, Asn), u32> = BTreeMap::new();
    for l in &spec.inter_as_links {
        let (lo, hi) = if l.a.asn <= l.b.asn {
            (&l.a, &l.b)
        } else {
            (&l.b, &l.a)
        };
        let k = per_pair.entry((lo.asn, hi.asn)).or_insert(0);
        let subnet = net(INTER_AS_OCTET, lo.asn as u8, hi.asn as u8, (4 * *k) as u8, 30);
        *k += 1;
        plan.inter_as.push(subnet);
        plan.interfaces.insert(
            IfaceKey::new(lo.asn, &lo.router, &ifname::inter_as(hi.asn, &hi.router)),
            host_in(subnet, 1),
        );
        plan.interfaces.insert(
            IfaceKey::new(hi.asn, &hi.router, &ifname::inter_as(lo.asn, &lo.router)),
            host_in(subnet, 2),
        );
    }

    for x in &spec.ixps {
        let subnet = net(IXP_OCTET, x.id as u8, 0, 0, 24);
        plan.ixps.insert(x.id, subnet);
        for m in &x.members {
            plan.interfaces.insert(
                IfaceKey::new(m.asn, &m.router, &ifname::ixp(x.id)),
                host_in(subnet, m.asn),
            );
        }
        plan.interfaces.insert(
            IfaceKey::new(x.id, crate::topo::ROUTE_SERVER_NAME, ifname::ROUTE_SERVER),
            host_in(subnet, ROUTE_SERVER_HOST as u32),
        );
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topo::generate_reference_topology;

    fn overlaps(a: &Ipv4Net, b: &Ipv4Net) -> bool {
        a.contains(&b.network()) || b.contains(&a.network())
    }

    #[test]
    fn as3_prefixes() {
        let spec = generate_reference_topology(1, 4).unwrap();
        let plan = allocate_addresses(&spec).unwrap();
        let a3 = &plan.per_as[&3];
        assert_eq!(a3.as_prefix.to_string(), "3.0.0.0/8");
        assert_eq!(a3.l2_subnet.unwrap().to_string(), "3.0.200.0/23");
        assert_eq!(a3.host_lans["ROUTER2"].to_string(), "3.102.0.0/24");
        assert_eq!(
            plan.address_of(3, "ROUTER2-host", "eth0").unwrap().to_string(),
            "3.102.0.1/24"
        );
        assert_eq!(
            plan.address_of(3, "ROUTER2", "host").unwrap().to_string(),
            "3.102.0.2/24"
        );
        assert_eq!(a3.loopbacks["ROUTER2"].to_string(), "3.150.0.2/32");
        assert_eq!(a3.vlan_subnets[&10].to_string(), "3.0.200.0/25");
        assert_eq!(a3.vlan_subnets[&20].to_string(), "3.0.200.128/25");
        assert_eq!(a3.vlan_subnets[&30].to_string(), "3.0.201.0/25");
    }

    #[test]
    fn intra_links_sorted_lexicographically() {
        let spec = generate_reference_topology(1, 4).unwrap();
        let plan = allocate_addresses(&spec).unwrap();
        let a1 = &plan.per_as[&1];
        // ROUTER1-ROUTER2 sorts first, ROUTER1-ROUTER8 second
        assert_eq!(
            a1.intra_links[&("ROUTER1".into(), "ROUTER2".into())].to_string(),
            "1.0.1.0/30"
        );
        assert_eq!(
            a1.intra_links[&("ROUTER1".into(), "ROUTER8".into())].to_string(),
            "1.0.2.0/30"
        );
    }

    #[test]
    fn all_subnets_pairwise_disjoint() {
        let spec = generate_reference_topology(2, 10).unwrap();
        let plan = allocate_addresses(&spec).unwrap();
        let all = plan.all_subnets();
        assert!(all.len() > 20 * 20);
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                assert!(!overlaps(a, b), "{a} overlaps {b}");
            }
        }
        // infrastructure subnets stay out of every AS /8
        for s in plan.inter_as.iter().chain(plan.ixps.values()) {
            for a in plan.per_as.values() {
                assert!(!overlaps(s, &a.as_prefix));
            }
        }
    }

    #[test]
    fn asn_over_cap_rejected() {
        let mut spec = generate_reference_topology(1, 4).unwrap();
        spec.ases[0].asn = 127;
        assert!(matches!(
            allocate_addresses(&spec),
            Err(TopoError::AsnOutOfRange(127))
        ));
    }
}
