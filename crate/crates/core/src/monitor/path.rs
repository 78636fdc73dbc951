use serde::Serialize;

use crate::dataplane::{trace, TraceOutcome};
use crate::topo::{Asn, Medium, NeighborKind, Network};

use super::matrix::{host_address, probe_host};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeLabel {
    CustomerToProvider,
    ProviderToCustomer,
    Peer,
    Ixp,
}

/// Gao-Rexford shape: uphill, at most one peer or IXP edge, then downhill.
pub fn is_valley_free(labels: &[EdgeLabel]) -> bool {
    let mut descending = false;
    for l in labels {
        match l {
            EdgeLabel::CustomerToProvider if descending => return false,
            EdgeLabel::CustomerToProvider => {}
            EdgeLabel::Peer | EdgeLabel::Ixp if descending => return false,
            EdgeLabel::Peer | EdgeLabel::Ixp | EdgeLabel::ProviderToCustomer => descending = true,
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AsPathReport {
    pub src: Asn,
    pub dst: Asn,
    /// AS sequence of the forwarding path, empty if the probe never left.
    pub path: Vec<Asn>,
    /// One label per adjacent pair of `path`.
    pub labels: Vec<EdgeLabel>,
    pub valley_free: bool,
    pub outcome: Option<TraceOutcome>,
    /// The path ended in an AS other than `dst`.
    pub diverted: bool,
}

/// Forwarding AS path from `src`'s probe host to `dst`'s probe host.
pub fn as_path_between(net: &Network, src: Asn, dst: Asn) -> AsPathReport {
    let mut rep = AsPathReport {
        src,
        dst,
        path: Vec::new(),
        labels: Vec::new(),
        valley_free: true,
        outcome: None,
        diverted: false,
    };
    let (Some(s), Some(addr)) = (
        probe_host(net, src).filter(|s| net.devices.contains_key(s)),
        probe_host(net, dst).and_then(|d| host_address(net, &d)),
    ) else {
        return rep;
    };
    let t = trace(net, &s, addr, 0);
    rep.path.push(src);
    for h in &t.hops {
        if h.device.asn == *rep.path.last().unwrap() {
            continue;
        }
        let prev = *rep.path.last().unwrap();
        let label = match net.segment_of(&h.device, &h.ingress).map(|i| net.segments[i].medium) {
            Some(Medium::Ixp { .. }) => EdgeLabel::Ixp,
            Some(Medium::InterAs { index }) => {
                match net.spec.inter_as_links[index].kind_from(prev) {
                    Some(NeighborKind::Customer) => EdgeLabel::ProviderToCustomer,
                    Some(NeighborKind::Provider) => EdgeLabel::CustomerToProvider,
                    _ => EdgeLabel::Peer,
                }
            }
            _ => EdgeLabel::Peer,
        };
        rep.path.push(h.device.asn);
        rep.labels.push(label);
    }
    rep.valley_free = is_valley_free(&rep.labels);
    rep.diverted = *rep.path.last().unwrap() != dst;
    rep.outcome = Some(t.outcome);
    rep
}
