//! Inter-domain routing: sessions, policy, decision process and propagation.

mod converge;
mod decision;
mod hijack;
mod policy;
mod route;
mod session;

pub use converge::{
    AdjInEntry, BgpState, ConvergenceReport, LocEntry, RouterRib, DEFAULT_MAX_ROUNDS,
};
pub(crate) use converge::run_bgp;
pub use decision::{best_route, DecisionStep};
pub use hijack::{inject_hijack, originate_prefix, withdraw_prefix, BgpError, Hijack};
pub use policy::{evaluate_route_map, PolicyResult};
pub use route::{BgpRoute, Origin, SessionKind, DEFAULT_LOCAL_PREF};
pub use session::{
    address_index, derive_sessions, established_between, BgpSession, IdleReason, SessionSide,
    SessionState,
};

use crate::topo::Network;

/// Recompute every derived layer and run BGP to a fixed point.
pub fn converge(net: &mut Network, max_rounds: usize) -> ConvergenceReport {
    crate::sim::recompute(net, max_rounds)
}
