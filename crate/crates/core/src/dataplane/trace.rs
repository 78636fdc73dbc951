use std::collections::BTreeSet;
use std::fmt::Write;
use std::net::Ipv4Addr;

use serde::Serialize;

use crate::confcli::{DeviceKind, DEFAULT_VLAN};
use crate::l2sim::L2Target;
use crate::topo::{ifname, DeviceId, Medium, Network};

pub const MAX_TTL: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceHop {
    pub device: DeviceId,
    pub ingress: String,
    /// Address of the ingress interface.
    pub address: Option<Ipv4Addr>,
    /// Set when the device forwarded the packet on.
    pub egress: Option<String>,
    /// Cumulative delay on arrival.
    pub delay_us: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceOutcome {
    Delivered,
    Loop,
    NoRoute { device: DeviceId },
    LinkDown { device: DeviceId, iface: String },
    TtlExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ForwardingTrace {
    pub src: DeviceId,
    pub dst: Ipv4Addr,
    pub flow_id: u64,
    /// Egress interface at the source, if the packet left it.
    pub src_egress: Option<String>,
    /// Devices after the source.
    pub hops: Vec<TraceHop>,
    pub outcome: TraceOutcome,
    pub delay_us: u64,
}

impl ForwardingTrace {
    pub fn delivered(&self) -> bool {
        self.outcome == TraceOutcome::Delivered
    }

    /// Device the trace ended at.
    pub fn terminal(&self) -> &DeviceId {
        self.hops.last().map(|h| &h.device).unwrap_or(&self.src)
    }

    /// AS sequence of the path, source included, consecutive duplicates removed.
    pub fn as_path(&self) -> Vec<u32> {
        let mut out = vec![self.src.asn];
        for h in &self.hops {
            if out.last() != Some(&h.device.asn) {
                out.push(h.device.asn);
            }
        }
        out
    }

    /// traceroute-style text.
    pub fn render(&self) -> String {
        let mut out = format!("traceroute to {} from {}\n", self.dst, self.src);
        for (i, h) in self.hops.iter().enumerate() {
            let addr = h.address.map(|a| a.to_string()).unwrap_or_else(|| "*".into());
            writeln!(
                out,
                "{:>2}  {}  {}  {:.3} ms",
                i + 1,
                h.device,
                addr,
                h.delay_us as f64 / 1000.0
            )
            .unwrap();
        }
        match &self.outcome {
            TraceOutcome::Delivered => {}
            TraceOutcome::Loop => out.push_str(" !L forwarding loop\n"),
            TraceOutcome::NoRoute { device } => writeln!(out, " !N no route at {device}").unwrap(),
            TraceOutcome::LinkDown { device, iface } => {
                writeln!(out, " !H link down at {device} {iface}").unwrap()
            }
            TraceOutcome::TtlExceeded => out.push_str(" !T ttl exceeded\n"),
        }
        out
    }
}

fn owns(net: &Network, id: &DeviceId, addr: Ipv4Addr) -> bool {
    net.devices[id]
        .config
        .interfaces
        .values()
        .any(|i| i.address.is_some_and(|a| a.addr() == addr))
}

fn iface_addr(net: &Network, id: &DeviceId, iface: &str) -> Option<Ipv4Addr> {
    net.devices[id]
        .config
        .interfaces
        .get(iface)
        .and_then(|i| i.address)
        .map(|a| a.addr())
}

fn vlan_of(iface: &str) -> u16 {
    iface
        .rsplit_once('.')
        .and_then(|(_, v)| v.parse().ok())
        .unwrap_or(DEFAULT_VLAN)
}

enum Step {
    Next(DeviceId, String, u64),
    Fail(TraceOutcome),
}

/// Resolve the neighbor owning `target` across the segment behind `egress`.
fn next_device(net: &Network, cur: &DeviceId, egress: &str, target: Ipv4Addr) -> Step {
    let no_route = || Step::Fail(TraceOutcome::NoRoute { device: cur.clone() });
    let Some(si) = net.segment_of(cur, egress) else {
        return no_route();
    };
    let seg = &net.segments[si];
    let phys = ifname::physical(egress);
    let mut found = None;
    for e in &seg.ends {
        let id = e.device_id();
        if id == *cur && e.iface == phys {
            continue;
        }
        let d = &net.devices[&id];
        if let Some((name, _)) = d.config.interfaces.iter().find(|(n, i)| {
            ifname::physical(n) == e.iface && i.address.is_some_and(|a| a.addr() == target)
        }) {
            found = Some((id, name.clone()));
            break;
        }
    }
    let Some((nid, niface)) = found else {
        return no_route();
    };
    if !net.iface_up(&nid, &niface) {
        return Step::Fail(TraceOutcome::LinkDown {
            device: cur.clone(),
            iface: egress.to_string(),
        });
    }
    if seg.medium == Medium::L2 {
        let Some(l2) = net.derived.l2.get(&cur.asn) else {
            return no_route();
        };
        let cur_router = net.devices[cur].kind() == DeviceKind::Router;
        let next_router = net.devices[&nid].kind() == DeviceKind::Router;
        let res = match (cur_router, next_router) {
            (true, false) => l2.reach(net, &nid.name, &L2Target::Gateway { vlan: vlan_of(egress) }),
            (false, true) => l2.reach(net, &cur.name, &L2Target::Gateway { vlan: vlan_of(&niface) }),
            (false, false) => l2.reach(net, &cur.name, &L2Target::Host(&nid.name)),
            (true, true) => return no_route(),
        };
        if res.is_err() {
            return no_route();
        }
    }
    Step::Next(nid, niface, seg.delay_us)
}

/// Forward a packet from `src` toward `dst` using the converged FIBs.
pub fn trace(net: &Network, src: &DeviceId, dst: Ipv4Addr, flow_id: u64) -> ForwardingTrace {
    let mut t = ForwardingTrace {
        src: src.clone(),
        dst,
        flow_id,
        src_egress: None,
        hops: Vec::new(),
        outcome: TraceOutcome::Delivered,
        delay_us: 0,
    };
    let mut cur = src.clone();
    let mut seen: BTreeSet<(DeviceId, String)> = BTreeSet::new();
    loop {
        if owns(net, &cur, dst) {
            return t;
        }
        let no_route = TraceOutcome::NoRoute { device: cur.clone() };
        if net.devices[&cur].failed {
            t.outcome = no_route;
            return t;
        }
        let Some((_, Some(nh))) = net.derived.fibs.get(&cur).and_then(|f| f.lookup(dst, flow_id)) else {
            t.outcome = no_route;
            return t;
        };
        let egress = nh.iface.clone();
        if !seen.insert((cur.clone(), egress.clone())) {
            t.outcome = TraceOutcome::Loop;
            return t;
        }
        if t.hops.len() >= MAX_TTL {
            t.outcome = TraceOutcome::TtlExceeded;
            return t;
        }
        match t.hops.last_mut() {
            Some(h) => h.egress = Some(egress.clone()),
            None => t.src_egress = Some(egress.clone()),
        }
        if !net.iface_up(&cur, &egress) {
            t.outcome = TraceOutcome::LinkDown {
                device: cur.clone(),
                iface: egress,
            };
            return t;
        }
        match next_device(net, &cur, &egress, nh.via.unwrap_or(dst)) {
            Step::Fail(o) => {
                t.outcome = o;
                return t;
            }
            Step::Next(nid, niface, delay) => {
                t.delay_us += delay;
                t.hops.push(TraceHop {
                    address: iface_addr(net, &nid, &niface),
                    device: nid.clone(),
                    ingress: niface,
                    egress: None,
                    delay_us: t.delay_us,
                });
                cur = nid;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PingFailure {
    NoSuchDestination,
    ForwardUnreachable,
    ReverseUnreachable,
    NoSourceAddress,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PingResult {
    pub success: bool,
    pub rtt_us: u64,
    pub failure: Option<PingFailure>,
    pub forward: Option<ForwardingTrace>,
    pub reverse: Option<ForwardingTrace>,
}

impl PingResult {
    fn fail(f: PingFailure, forward: Option<ForwardingTrace>, reverse: Option<ForwardingTrace>) -> Self {
        PingResult {
            success: false,
            rtt_us: 0,
            failure: Some(f),
            forward,
            reverse,
        }
    }

    pub fn render(&self) -> String {
        let dst = self.forward.as_ref().map(|t| t.dst.to_string()).unwrap_or_default();
        if self.success {
            format!(
                "PING {dst}: 1 packets transmitted, 1 received, time={:.3} ms\n",
                self.rtt_us as f64 / 1000.0
            )
        } else {
            let why = match &self.failure {
                Some(PingFailure::NoSuchDestination) => "no such destination",
                Some(PingFailure::ForwardUnreachable) => "destination unreachable",
                Some(PingFailure::ReverseUnreachable) => "no reply (reverse path)",
                Some(PingFailure::NoSourceAddress) => "no source address",
                None => "",
            };
            format!("PING {dst}: 1 packets transmitted, 0 received, {why}\n")
        }
    }
}

/// Device owning an address.
pub fn owner_of(net: &Network, addr: Ipv4Addr) -> Option<DeviceId> {
    net.devices
        .values()
        .find(|d| {
            d.config
                .interfaces
                .values()
                .any(|i| i.address.is_some_and(|a| a.addr() == addr))
        })
        .map(|d| d.id.clone())
}

/// Round trip: the forward trace and the reply from the owner both deliver.
pub fn ping(net: &Network, src: &DeviceId, dst: Ipv4Addr) -> PingResult {
    let Some(owner) = owner_of(net, dst) else {
        return PingResult::fail(PingFailure::NoSuchDestination, None, None);
    };
    let fwd = trace(net, src, dst, 0);
    if !fwd.delivered() {
        return PingResult::fail(PingFailure::ForwardUnreachable, Some(fwd), None);
    }
    let Some(egress) = &fwd.src_egress else {
        // local address
        return PingResult {
            success: true,
            rtt_us: 0,
            failure: None,
            forward: Some(fwd),
            reverse: None,
        };
    };
    let Some(src_addr) = iface_addr(net, src, egress) else {
        return PingResult::fail(PingFailure::NoSourceAddress, Some(fwd), None);
    };
    let rev = trace(net, &owner, src_addr, 0);
    if !rev.delivered() {
        return PingResult::fail(PingFailure::ReverseUnreachable, Some(fwd), Some(rev));
    }
    PingResult {
        success: true,
        rtt_us: fwd.delay_us + rev.delay_us,
        failure: None,
        forward: Some(fwd),
        reverse: Some(rev),
    }
}
