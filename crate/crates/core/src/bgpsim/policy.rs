use crate::confcli::{prefix_list_permits, Action, DeviceState, Direction, RouteMap, RouteMapEntry};

use super::route::BgpRoute;

/// Outcome of running a route through a route-map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyResult {
    /// `None` when the route is denied.
    pub route: Option<BgpRoute>,
    pub diagnostics: Vec<String>,
}

fn entry_matches(
    entry: &RouteMapEntry,
    route: &BgpRoute,
    device: &DeviceState,
    diags: &mut Vec<String>,
) -> bool {
    if let Some(name) = &entry.match_prefix_list {
        match device.prefix_lists.get(name) {
            Some(list) => {
                if !prefix_list_permits(list, &route.prefix) {
                    return false;
                }
            }
            None => {
                diags.push(format!("prefix-list {name} is not defined"));
                return false;
            }
        }
    }
    if let Some(name) = &entry.match_community {
        match device.community_lists.get(name) {
            Some(set) => {
                if set.is_disjoint(&route.communities) {
                    return false;
                }
            }
            None => {
                diags.push(format!("community-list {name} is not defined"));
                return false;
            }
        }
    }
    true
}

/// Apply `map` to `route` on `device`. The first matching entry decides;
/// no match denies. Prepending uses the device's ASN on export and the
/// neighbor's ASN (first path element) on import.
pub fn evaluate_route_map(
    map: &RouteMap,
    route: &BgpRoute,
    device: &DeviceState,
    direction: Direction,
) -> PolicyResult {
    let mut diagnostics = Vec::new();
    for entry in map.entries.values() {
        if !entry_matches(entry, route, device, &mut diagnostics) {
            continue;
        }
        if entry.action == Action::Deny {
            return PolicyResult {
                route: None,
                diagnostics,
            };
        }
        let mut r = route.clone();
        if let Some(lp) = entry.set_local_pref {
            r.local_pref = lp;
        }
        if let Some(m) = entry.set_med {
            r.med = m;
        }
        r.communities.extend(entry.set_communities.iter().copied());
        if let Some(n) = entry.set_prepend {
            let asn = match direction {
                Direction::Out => device.bgp.as_ref().map(|b| b.asn),
                Direction::In => r.neighbor_as().or(device.bgp.as_ref().map(|b| b.asn)),
            };
            if let Some(asn) = asn {
                let mut path = vec![asn; n as usize];
                path.extend_from_slice(&r.as_path);
                r.as_path = path;
            }
        }
        return PolicyResult {
            route: Some(r),
            diagnostics,
        };
    }
    PolicyResult {
        route: None,
        diagnostics,
    }
}
