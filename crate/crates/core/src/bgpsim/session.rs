use std::collections::{BTreeMap, BTreeSet};
use std::net::Ipv4Addr;

use serde::Serialize;

use crate::igp::IgpTable;
use crate::topo::{Asn, DeviceId, Network};

use super::route::SessionKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdleReason {
    /// The peer runs a different ASN than configured (either side).
    AsnMismatch,
    /// Only one side has a neighbor statement for the other.
    OneSided,
    /// No device owns the neighbor address.
    NoSuchPeer,
    /// No shared up subnet (eBGP) or no IGP route (iBGP).
    Unreachable,
    /// Neighbor statement without `remote-as`.
    MissingRemoteAs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "state", content = "reason", rename_all = "snake_case")]
pub enum SessionState {
    Established,
    Idle(IdleReason),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SessionSide {
    pub device: Option<DeviceId>,
    pub addr: Ipv4Addr,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BgpSession {
    /// Configuring side for idle sessions, lower device for established ones.
    pub a: SessionSide,
    pub b: SessionSide,
    pub kind: SessionKind,
    pub state: SessionState,
}

impl BgpSession {
    pub fn is_up(&self) -> bool {
        self.state == SessionState::Established
    }

    pub fn involves(&self, id: &DeviceId) -> bool {
        self.a.device.as_ref() == Some(id) || self.b.device.as_ref() == Some(id)
    }
}

/// Address -> owning (device, interface), over configured addresses.
pub fn address_index(net: &Network) -> BTreeMap<Ipv4Addr, (DeviceId, String)> {
    let mut idx = BTreeMap::new();
    for d in net.devices.values() {
        for (name, i) in &d.config.interfaces {
            if let Some(a) = i.address {
                idx.entry(a.addr()).or_insert_with(|| (d.id.clone(), name.clone()));
            }
        }
    }
    idx
}

/// Derive every configured session and its state.
pub fn derive_sessions(net: &Network, igp: &BTreeMap<DeviceId, IgpTable>) -> Vec<BgpSession> {
    let owners = address_index(net);
    let mut out = Vec::new();
    let mut seen: BTreeSet<(DeviceId, Ipv4Addr, DeviceId, Ipv4Addr)> = BTreeSet::new();
    for x in net.devices.values() {
        if !x.kind().is_l3_router() {
            continue;
        }
        let Some(xb) = &x.config.bgp else { continue };
        for (&a, n) in &xb.neighbors {
            let idle = |reason, dev: Option<DeviceId>| BgpSession {
                a: SessionSide {
                    device: Some(x.id.clone()),
                    addr: x.config.router_id().unwrap_or(Ipv4Addr::UNSPECIFIED),
                },
                b: SessionSide { device: dev, addr: a },
                kind: if n.remote_as == Some(xb.asn) {
                    SessionKind::Ibgp
                } else {
                    SessionKind::Ebgp
                },
                state: SessionState::Idle(reason),
            };
            let Some(ra) = n.remote_as else {
                out.push(idle(IdleReason::MissingRemoteAs, None));
                continue;
            };
            let Some((yid, _)) = owners.get(&a) else {
                out.push(idle(IdleReason::NoSuchPeer, None));
                continue;
            };
            let y = &net.devices[yid];
            let Some(yb) = y.config.bgp.as_ref().filter(|_| y.kind().is_l3_router()) else {
                out.push(idle(IdleReason::OneSided, Some(yid.clone())));
                continue;
            };
            if yb.asn != ra {
                out.push(idle(IdleReason::AsnMismatch, Some(yid.clone())));
                continue;
            }
            // the peer's statement pointing back at us
            let back = yb
                .neighbors
                .iter()
                .find(|(b, _)| owners.get(b).map(|o| &o.0) == Some(&x.id));
            let Some((&b, bn)) = back else {
                out.push(idle(IdleReason::OneSided, Some(yid.clone())));
                continue;
            };
            match bn.remote_as {
                None => {
                    out.push(idle(IdleReason::MissingRemoteAs, Some(yid.clone())));
                    continue;
                }
                Some(r) if r != xb.asn => {
                    out.push(idle(IdleReason::AsnMismatch, Some(yid.clone())));
                    continue;
                }
                _ => {}
            }
            let kind = if xb.asn == yb.asn {
                SessionKind::Ibgp
            } else {
                SessionKind::Ebgp
            };
            let reachable = match kind {
                SessionKind::Ebgp => directly_connected(net, &x.id, b, yid, a),
                _ => {
                    let reaches = |id: &DeviceId, addr| {
                        igp.get(id).and_then(|t| t.distance_to(addr)).is_some()
                    };
                    net.iface_up(&x.id, &owners[&b].1)
                        && net.iface_up(yid, &owners[&a].1)
                        && reaches(&x.id, a)
                        && reaches(yid, b)
                }
            };
            if !reachable {
                out.push(idle(IdleReason::Unreachable, Some(yid.clone())));
                continue;
            }
            let key = if x.id <= *yid {
                (x.id.clone(), b, yid.clone(), a)
            } else {
                (yid.clone(), a, x.id.clone(), b)
            };
            if seen.insert(key.clone()) {
                out.push(BgpSession {
                    a: SessionSide {
                        device: Some(key.0),
                        addr: key.1,
                    },
                    b: SessionSide {
                        device: Some(key.2),
                        addr: key.3,
                    },
                    kind,
                    state: SessionState::Established,
                });
            }
        }
    }
    out
}

/// Both addresses are on up interfaces of one up segment, in one subnet.
fn directly_connected(net: &Network, x: &DeviceId, xa: Ipv4Addr, y: &DeviceId, ya: Ipv4Addr) -> bool {
    let iface_of = |id: &DeviceId, addr: Ipv4Addr| {
        net.devices[id]
            .config
            .interfaces
            .iter()
            .find(|(_, i)| i.address.is_some_and(|a| a.addr() == addr))
            .map(|(n, i)| (n.clone(), i.address.unwrap()))
    };
    let (Some((xi, xnet)), Some((yi, ynet))) = (iface_of(x, xa), iface_of(y, ya)) else {
        return false;
    };
    if xnet.trunc() != ynet.trunc() || !net.iface_up(x, &xi) || !net.iface_up(y, &yi) {
        return false;
    }
    match (net.segment_of(x, &xi), net.segment_of(y, &yi)) {
        (Some(s), Some(t)) => s == t,
        _ => false,
    }
}

/// Established sessions per ASN pair, for reports.
pub fn established_between(sessions: &[BgpSession], a: Asn, b: Asn) -> usize {
    sessions
        .iter()
        .filter(|s| s.is_up())
        .filter(|s| {
            let (x, y) = (s.a.device.as_ref().unwrap().asn, s.b.device.as_ref().unwrap().asn);
            (x, y) == (a, b) || (x, y) == (b, a)
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bgpsim::{converge, DEFAULT_MAX_ROUNDS};
    use crate::topo::{generate_reference_topology, instantiate};

    fn reference() -> Network {
        let mut spec = generate_reference_topology(1, 4).unwrap();
        for a in &mut spec.ases {
            a.auto_configured = true;
        }
        instantiate(&spec).unwrap()
    }

    #[test]
    fn ibgp_full_mesh_has_28_sessions() {
        let mut net = reference();
        converge(&mut net, DEFAULT_MAX_ROUNDS);
        let ibgp = net
            .derived
            .sessions
            .iter()
            .filter(|s| s.is_up() && s.kind == SessionKind::Ibgp && s.a.device.as_ref().unwrap().asn == 1)
            .count();
        assert_eq!(ibgp, 28);
        for s in net.derived.sessions.iter().filter(|s| s.is_up()) {
            let (a, b) = (s.a.device.as_ref().unwrap().asn, s.b.device.as_ref().unwrap().asn);
            assert_eq!(a == b, s.kind == SessionKind::Ibgp);
        }
    }

    #[test]
    fn ixp_members_peer_with_route_server() {
        let mut net = reference();
        converge(&mut net, DEFAULT_MAX_ROUNDS);
        let ixp = net.spec.ixps[0].id;
        let rs = DeviceId::new(ixp, "RS");
        let up = net
            .derived
            .sessions
            .iter()
            .filter(|s| s.is_up() && s.involves(&rs))
            .count();
        assert_eq!(up, net.spec.ixps[0].members.len());
    }

    #[test]
    fn wrong_remote_as_is_idle() {
        let mut net = reference();
        let l = net.spec.inter_as_links[0].clone();
        let d = net.device_mut(l.a.asn, &l.a.router).unwrap();
        let n = d
            .config
            .bgp
            .as_mut()
            .unwrap()
            .neighbors
            .values_mut()
            .find(|n| n.remote_as == Some(l.b.asn))
            .unwrap();
        n.remote_as = Some(99);
        converge(&mut net, DEFAULT_MAX_ROUNDS);
        let a = DeviceId::new(l.a.asn, l.a.router.clone());
        assert!(net
            .derived
            .sessions
            .iter()
            .any(|s| s.a.device.as_ref() == Some(&a) && s.state == SessionState::Idle(IdleReason::AsnMismatch)));
    }

    #[test]
    fn one_sided_statement_is_idle() {
        let mut net = reference();
        let l = net.spec.inter_as_links[0].clone();
        let d = net.device_mut(l.b.asn, &l.b.router).unwrap();
        let bgp = d.config.bgp.as_mut().unwrap();
        let addr = *bgp
            .neighbors
            .iter()
            .find(|(_, n)| n.remote_as == Some(l.a.asn))
            .unwrap()
            .0;
        bgp.neighbors.remove(&addr);
        converge(&mut net, DEFAULT_MAX_ROUNDS);
        assert!(net
            .derived
            .sessions
            .iter()
            .any(|s| s.state == SessionState::Idle(IdleReason::OneSided)));
    }
}
