use ipnet::Ipv4Net;
use serde::Serialize;
use thiserror::Error;

use super::command::{Command, Mode, Op};
use super::state::*;
use crate::topo::{ifname, Asn};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
pub enum ApplyError {
    #[error("unknown interface `{0}`")]
    UnknownInterface(String),
    #[error("{address} overlaps {other} on interface {iface}")]
    AddressOverlap {
        address: Ipv4Net,
        iface: String,
        other: Ipv4Net,
    },
    #[error("vlan {0} is not declared")]
    VlanNotDeclared(u16),
    #[error("bgp is already running as AS {configured}, not {given}")]
    BgpAsnMismatch { configured: Asn, given: Asn },
    #[error("router bgp is not configured")]
    NoBgp,
    #[error("router ospf is not configured")]
    NoOspf,
    #[error("no route-map entry {0}")]
    NoRouteMapEntry(String),
    #[error("command needs {0} context")]
    WrongContext(&'static str),
    #[error("not valid on a {0}")]
    WrongDevice(DeviceKind),
}

fn overlaps(a: &Ipv4Net, b: &Ipv4Net) -> bool {
    a.contains(&b.network()) || b.contains(&a.network())
}

/// Does `name` exist on the device? VLAN sub-interfaces of the router's
/// switch-facing port are created on first use.
fn resolve_interface(state: &mut DeviceState, name: &str) -> Result<(), ApplyError> {
    if state.interfaces.contains_key(name) {
        return Ok(());
    }
    let phys = ifname::physical(name);
    let is_vlan_sub = phys != name
        && phys == ifname::L2_PHYS
        && state.kind == DeviceKind::Router
        && state.interfaces.contains_key(phys)
        && name[phys.len() + 1..]
            .parse::<u16>()
            .is_ok_and(|v| (1..=4094).contains(&v));
    if is_vlan_sub {
        state
            .interfaces
            .insert(name.to_string(), InterfaceState::default());
        Ok(())
    } else {
        Err(ApplyError::UnknownInterface(name.to_string()))
    }
}

fn iface_name(mode: &Mode) -> Result<&str, ApplyError> {
    match mode {
        Mode::Interface(n) => Ok(n),
        _ => Err(ApplyError::WrongContext("interface")),
    }
}

fn entry_mut<'a>(state: &'a mut DeviceState, mode: &Mode) -> Result<&'a mut RouteMapEntry, ApplyError> {
    let Mode::RouteMap { name, seq } = mode else {
        return Err(ApplyError::WrongContext("route-map"));
    };
    state
        .route_maps
        .get_mut(name)
        .and_then(|m| m.entries.get_mut(seq))
        .ok_or_else(|| ApplyError::NoRouteMapEntry(format!("{name} {seq}")))
}

fn bgp_mut(state: &mut DeviceState) -> Result<&mut BgpConfig, ApplyError> {
    state.bgp.as_mut().ok_or(ApplyError::NoBgp)
}

/// Apply one command. On error the state is left unchanged.
pub fn apply_command(state: &mut DeviceState, cmd: &Command) -> Result<(), ApplyError> {
    match &cmd.op {
        Op::Interface(name) => resolve_interface(state, name)?,
        Op::IpAddress(addr) => {
            if state.kind == DeviceKind::Switch {
                return Err(ApplyError::WrongDevice(state.kind));
            }
            let name = iface_name(&cmd.context)?;
            resolve_interface(state, name)?;
            for (other_name, other) in &state.interfaces {
                if other_name == name {
                    continue;
                }
                if let Some(o) = other.address {
                    if overlaps(&o.trunc(), &addr.trunc()) {
                        return Err(ApplyError::AddressOverlap {
                            address: *addr,
                            iface: other_name.clone(),
                            other: o,
                        });
                    }
                }
            }
            state.interfaces.get_mut(name).unwrap().address = Some(*addr);
        }
        Op::NoIpAddress => {
            let name = iface_name(&cmd.context)?;
            resolve_interface(state, name)?;
            state.interfaces.get_mut(name).unwrap().address = None;
        }
        Op::Shutdown | Op::NoShutdown => {
            let name = iface_name(&cmd.context)?;
            resolve_interface(state, name)?;
            state.interfaces.get_mut(name).unwrap().admin_up = cmd.op == Op::NoShutdown;
        }
        Op::RouterOspf => {
            state.ospf.get_or_insert_with(OspfConfig::default);
        }
        Op::OspfNetwork(p) => {
            if cmd.context != Mode::RouterOspf {
                return Err(ApplyError::WrongContext("router ospf"));
            }
            state.ospf.as_mut().ok_or(ApplyError::NoOspf)?.networks.insert(*p);
        }
        Op::OspfCost { iface, cost } => {
            if !state.interfaces.contains_key(iface) {
                return Err(ApplyError::UnknownInterface(iface.clone()));
            }
            let ospf = state.ospf.as_mut().ok_or(ApplyError::NoOspf)?;
            if *cost == 1 {
                ospf.costs.remove(iface);
            } else {
                ospf.costs.insert(iface.clone(), *cost);
            }
        }
        Op::RouterBgp(asn) => match &state.bgp {
            Some(b) if b.asn != *asn => {
                return Err(ApplyError::BgpAsnMismatch {
                    configured: b.asn,
                    given: *asn,
                })
            }
            Some(_) => {}
            None => state.bgp = Some(BgpConfig::new(*asn)),
        },
        Op::BgpRouterId(id) => bgp_mut(state)?.router_id = Some(*id),
        Op::NeighborRemoteAs { addr, asn } => {
            bgp_mut(state)?.neighbors.entry(*addr).or_default().remote_as = Some(*asn);
        }
        Op::NeighborRouteMap { addr, map, dir } => {
            let n = bgp_mut(state)?.neighbors.entry(*addr).or_default();
            match dir {
                Direction::In => n.route_map_in = Some(map.clone()),
                Direction::Out => n.route_map_out = Some(map.clone()),
            }
        }
        Op::NoNeighbor(addr) => {
            bgp_mut(state)?.neighbors.remove(addr);
        }
        Op::BgpNetwork(p) => {
            bgp_mut(state)?.networks.insert(*p);
        }
        Op::NoBgpNetwork(p) => {
            bgp_mut(state)?.networks.remove(p);
        }
        Op::RouteMap { name, action, seq } => {
            let entry = state
                .route_maps
                .entry(name.clone())
                .or_default()
                .entries
                .entry(*seq)
                .or_insert_with(|| RouteMapEntry::new(*action));
            entry.action = *action;
        }
        Op::MatchPrefixList(n) => entry_mut(state, &cmd.context)?.match_prefix_list = Some(n.clone()),
        Op::MatchCommunity(n) => entry_mut(state, &cmd.context)?.match_community = Some(n.clone()),
        Op::SetLocalPref(v) => entry_mut(state, &cmd.context)?.set_local_pref = Some(*v),
        Op::SetMetric(v) => entry_mut(state, &cmd.context)?.set_med = Some(*v),
        Op::SetCommunity(c) => {
            entry_mut(state, &cmd.context)?.set_communities.insert(*c);
        }
        Op::SetPrepend(n) => entry_mut(state, &cmd.context)?.set_prepend = Some(*n),
        Op::PrefixList { name, entry } => {
            let list = state.prefix_lists.entry(name.clone()).or_default();
            if !list.contains(entry) {
                list.push(entry.clone());
            }
        }
        Op::CommunityList { name, community } => {
            state
                .community_lists
                .entry(name.clone())
                .or_default()
                .insert(*community);
        }
        Op::Vlan(v) => {
            state.vlans.insert(*v);
        }
        Op::AccessVlan { port, vlan } => {
            if !state.vlans.contains(vlan) && *vlan != DEFAULT_VLAN {
                return Err(ApplyError::VlanNotDeclared(*vlan));
            }
            let i = state
                .interfaces
                .get_mut(port)
                .ok_or_else(|| ApplyError::UnknownInterface(port.clone()))?;
            i.switchport = Some(SwitchPortMode::Access(*vlan));
        }
        Op::Trunk { port } => {
            let i = state
                .interfaces
                .get_mut(port)
                .ok_or_else(|| ApplyError::UnknownInterface(port.clone()))?;
            i.switchport = Some(SwitchPortMode::Trunk);
        }
        Op::StpPriority(p) => state.stp_priority = Some(*p),
        Op::StaticRoute { prefix, via } => {
            state.static_routes.insert(*prefix, *via);
        }
        Op::Exit => {}
    }
    Ok(())
}
