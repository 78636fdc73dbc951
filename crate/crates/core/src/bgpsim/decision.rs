use std::collections::BTreeMap;
use std::net::Ipv4Addr;

use serde::Serialize;

use super::route::{BgpRoute, SessionKind};

/// Step of the decision process that singled out the best route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionStep {
    OnlyCandidate,
    /// A locally originated route always wins.
    LocalOrigin,
    LocalPref,
    AsPathLength,
    Origin,
    Med,
    EbgpOverIbgp,
    IgpDistance,
    RouterId,
    PeerAddress,
}

/// Pick the best route. `igp` returns the IGP distance to a next hop, `None`
/// when it cannot be resolved; such candidates are skipped. Returns the index
/// into `candidates` and the deciding step, or `None` if nothing resolves.
pub fn best_route<F>(candidates: &[BgpRoute], igp: F) -> Option<(usize, DecisionStep)>
where
    F: Fn(Ipv4Addr) -> Option<u32>,
{
    let mut live: Vec<(usize, u32)> = candidates
        .iter()
        .enumerate()
        .filter_map(|(i, r)| {
            if r.learned_via == SessionKind::Local {
                Some((i, 0))
            } else {
                igp(r.next_hop).map(|d| (i, d))
            }
        })
        .collect();
    match live.len() {
        0 => return None,
        1 => return Some((live[0].0, DecisionStep::OnlyCandidate)),
        _ => {}
    }
    if let Some(&(i, _)) = live
        .iter()
        .find(|(i, _)| candidates[*i].learned_via == SessionKind::Local)
    {
        return Some((i, DecisionStep::LocalOrigin));
    }

    fn keep_min<K: Ord + Copy>(live: &mut Vec<(usize, u32)>, key: impl Fn(&(usize, u32)) -> K) {
        let best = live.iter().map(&key).min().unwrap();
        live.retain(|c| key(c) == best);
    }

    let r = |i: usize| &candidates[i];
    let steps: [(DecisionStep, &dyn Fn(&mut Vec<(usize, u32)>)); 8] = [
        (DecisionStep::LocalPref, &|l| {
            keep_min(l, |c| std::cmp::Reverse(r(c.0).local_pref))
        }),
        (DecisionStep::AsPathLength, &|l| keep_min(l, |c| r(c.0).as_path.len())),
        (DecisionStep::Origin, &|l| keep_min(l, |c| r(c.0).origin)),
        (DecisionStep::Med, &|l| {
            // lowest MED within each neighbor-AS group
            let mut group_min: BTreeMap<Option<u32>, u32> = BTreeMap::new();
            for c in l.iter() {
                let e = group_min.entry(r(c.0).neighbor_as()).or_insert(u32::MAX);
                *e = (*e).min(r(c.0).med);
            }
            l.retain(|c| r(c.0).med == group_min[&r(c.0).neighbor_as()]);
        }),
        (DecisionStep::EbgpOverIbgp, &|l| {
            keep_min(l, |c| r(c.0).learned_via != SessionKind::Ebgp)
        }),
        (DecisionStep::IgpDistance, &|l| keep_min(l, |c| c.1)),
        (DecisionStep::RouterId, &|l| keep_min(l, |c| r(c.0).peer_router_id)),
        (DecisionStep::PeerAddress, &|l| keep_min(l, |c| r(c.0).peer_addr)),
    ];
    for (step, f) in steps {
        f(&mut live);
        if live.len() == 1 {
            return Some((live[0].0, step));
        }
    }
    Some((live[0].0, DecisionStep::PeerAddress))
}
