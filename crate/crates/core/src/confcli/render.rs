use std::fmt::Write;

use super::command::Op;
use super::state::*;

/// Canonical running configuration. Sub-mode lines are indented by one space.
pub fn render_running_config(state: &DeviceState) -> String {
    let mut out = String::new();
    let mut line = |indent: bool, op: Op| {
        if indent {
            out.push(' ');
        }
        writeln!(out, "{op}").unwrap();
    };
    // header is emitted separately below to keep `line` the only writer
    let header = format!("!\n! {} running-config\n!\n", state.kind);

    for v in &state.vlans {
        line(false, Op::Vlan(*v));
    }
    for (name, i) in &state.interfaces {
        if i.address.is_some() || !i.admin_up {
            line(false, Op::Interface(name.clone()));
            if let Some(a) = i.address {
                line(true, Op::IpAddress(a));
            }
            if !i.admin_up {
                line(true, Op::Shutdown);
            }
        }
        match i.switchport {
            Some(SwitchPortMode::Access(vlan)) => line(
                false,
                Op::AccessVlan {
                    port: name.clone(),
                    vlan,
                },
            ),
            Some(SwitchPortMode::Trunk) => line(false, Op::Trunk { port: name.clone() }),
            None => {}
        }
    }
    if let Some(ospf) = &state.ospf {
        line(false, Op::RouterOspf);
        for n in &ospf.networks {
            line(true, Op::OspfNetwork(*n));
        }
        for (iface, cost) in &ospf.costs {
            line(
                false,
                Op::OspfCost {
                    iface: iface.clone(),
                    cost: *cost,
                },
            );
        }
    }
    if let Some(bgp) = &state.bgp {
        line(false, Op::RouterBgp(bgp.asn));
        if let Some(id) = bgp.router_id {
            line(true, Op::BgpRouterId(id));
        }
        for (addr, n) in &bgp.neighbors {
            if let Some(asn) = n.remote_as {
                line(true, Op::NeighborRemoteAs { addr: *addr, asn });
            }
            for (map, dir) in [
                (&n.route_map_in, Direction::In),
                (&n.route_map_out, Direction::Out),
            ] {
                if let Some(map) = map {
                    line(
                        true,
                        Op::NeighborRouteMap {
                            addr: *addr,
                            map: map.clone(),
                            dir,
                        },
                    );
                }
            }
        }
        for p in &bgp.networks {
            line(true, Op::BgpNetwork(*p));
        }
    }
    for (name, map) in &state.route_maps {
        for (seq, e) in &map.entries {
            line(
                false,
                Op::RouteMap {
                    name: name.clone(),
                    action: e.action,
                    seq: *seq,
                },
            );
            if let Some(p) = &e.match_prefix_list {
                line(true, Op::MatchPrefixList(p.clone()));
            }
            if let Some(c) = &e.match_community {
                line(true, Op::MatchCommunity(c.clone()));
            }
            if let Some(v) = e.set_local_pref {
                line(true, Op::SetLocalPref(v));
            }
            if let Some(v) = e.set_med {
                line(true, Op::SetMetric(v));
            }
            for c in &e.set_communities {
                line(true, Op::SetCommunity(*c));
            }
            if let Some(n) = e.set_prepend {
                line(true, Op::SetPrepend(n));
            }
        }
    }
    for (name, entries) in &state.prefix_lists {
        for entry in entries {
            line(
                false,
                Op::PrefixList {
                    name: name.clone(),
                    entry: entry.clone(),
                },
            );
        }
    }
    for (name, set) in &state.community_lists {
        for c in set {
            line(
                false,
                Op::CommunityList {
                    name: name.clone(),
                    community: *c,
                },
            );
        }
    }
    if let Some(p) = state.stp_priority {
        line(false, Op::StpPriority(p));
    }
    for (prefix, via) in &state.static_routes {
        line(
            false,
            Op::StaticRoute {
                prefix: *prefix,
                via: *via,
            },
        );
    }
    header + &out
}
