//! Derived state of the last converge: L2 trees, IGP tables, BGP sessions
//! and RIBs, and forwarding tables.

use std::collections::BTreeMap;

use crate::bgpsim::{derive_sessions, run_bgp, BgpSession, BgpState, ConvergenceReport};
use crate::confcli::DeviceKind;
use crate::dataplane::{build_fib, Fib};
use crate::igp::{compute_igp, connected_table, IgpTable};
use crate::l2sim::L2State;
use crate::topo::{Asn, DeviceId, Network};

#[derive(Debug, Clone, Default)]
pub struct Derived {
    /// Bumped on every converge.
    pub epoch: u64,
    pub l2: BTreeMap<Asn, L2State>,
    pub igp: BTreeMap<DeviceId, IgpTable>,
    pub sessions: Vec<BgpSession>,
    pub bgp: BgpState,
    pub fibs: BTreeMap<DeviceId, Fib>,
    pub report: ConvergenceReport,
    pub fib_diagnostics: Vec<String>,
}

pub(crate) fn recompute(net: &mut Network, max_rounds: usize) -> ConvergenceReport {
    let mut d = Derived {
        epoch: net.derived.epoch + 1,
        ..Default::default()
    };
    for asn in net.spec.asns() {
        if let Some(l2) = L2State::from_network(net, asn) {
            d.l2.insert(asn, l2);
        }
        for (r, t) in compute_igp(net, asn) {
            d.igp.insert(DeviceId::new(asn, r), t);
        }
    }
    for dev in net.devices.values() {
        if dev.kind() != DeviceKind::Switch && !d.igp.contains_key(&dev.id) {
            d.igp.insert(dev.id.clone(), connected_table(net, &dev.id));
        }
    }
    d.sessions = derive_sessions(net, &d.igp);
    let (bgp, report) = run_bgp(net, &d.sessions, &d.igp, max_rounds);
    d.bgp = bgp;
    for dev in net.devices.values() {
        let Some(table) = d.igp.get(&dev.id) else { continue };
        let (fib, diags) = build_fib(dev, table, d.bgp.ribs.get(&dev.id));
        d.fib_diagnostics.extend(diags);
        d.fibs.insert(dev.id.clone(), fib);
    }
    d.report = report.clone();
    net.derived = d;
    report
}
