//! The instantiated network: devices with their running configuration and
//! the L3 segments wiring them together.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::address::{allocate_addresses, ifname, AddressPlan};
use super::reference::{generate_reference_config, reference_config_phases};
use super::spec::*;
use super::validate::validate;
use super::{TopoError, ROUTE_SERVER_NAME};
use crate::bgpsim::Hijack;
use crate::confcli::{apply_script, DeviceKind, DeviceState};
use crate::sim::Derived;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DeviceId {
    pub asn: Asn,
    pub name: String,
}

impl DeviceId {
    pub fn new(asn: Asn, name: impl Into<String>) -> Self {
        Self {
            asn,
            name: name.into(),
        }
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.asn, self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Device {
    pub id: DeviceId,
    pub config: DeviceState,
    /// Set by router-failure events; a failed device has every interface down.
    pub failed: bool,
}

impl Device {
    pub fn kind(&self) -> DeviceKind {
        self.config.kind
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Medium {
    Intra,
    InterAs { index: usize },
    Ixp { id: u32 },
    HostLan,
    /// The switched network of an AS: gateway router plus L2 hosts.
    L2,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Endpoint {
    pub asn: Asn,
    pub device: String,
    pub iface: String,
}

impl Endpoint {
    pub fn new(asn: Asn, device: &str, iface: &str) -> Self {
        Self {
            asn,
            device: device.to_string(),
            iface: iface.to_string(),
        }
    }

    pub fn device_id(&self) -> DeviceId {
        DeviceId::new(self.asn, self.device.clone())
    }
}

/// A broadcast domain or point-to-point link between device interfaces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub medium: Medium,
    pub ends: Vec<Endpoint>,
    pub delay_us: u64,
    pub admin_up: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinkError {
    #[error("no link between {0} and {1}")]
    NoSuchLink(DeviceId, DeviceId),
    #[error("unknown device {0}")]
    UnknownDevice(DeviceId),
}

#[derive(Debug, Clone)]
pub struct Network {
    pub spec: TopologySpec,
    pub plan: AddressPlan,
    pub devices: BTreeMap<DeviceId, Device>,
    pub segments: Vec<Segment>,
    /// Active hijacks, kept as ground truth for grading.
    pub hijacks: Vec<Hijack>,
    /// Results of the last converge.
    pub derived: Derived,
    iface_segment: BTreeMap<(DeviceId, String), usize>,
}

/// Build the network for a valid spec. Auto-configured ASes and every IXP
/// route server receive their reference configuration.
pub fn instantiate(spec: &TopologySpec) -> Result<Network, TopoError> {
    if let Some(v) = validate(spec).into_iter().next() {
        return Err(TopoError::Invalid {
            line: None,
            violation: v,
        });
    }
    let plan = allocate_addresses(spec)?;
    let mut b = Builder::default();

    for a in &spec.ases {
        let asn = a.asn;
        for r in &a.l3.routers {
            b.iface(asn, r, DeviceKind::Router, ifname::LOOPBACK);
            if a.l3.hosts {
                let host = AsSpec::router_host_name(r);
                b.iface(asn, r, DeviceKind::Router, ifname::HOST_LAN);
                b.iface(asn, &host, DeviceKind::Host, ifname::HOST_ETH);
                b.segment(
                    Medium::HostLan,
                    vec![
                        Endpoint::new(asn, r, ifname::HOST_LAN),
                        Endpoint::new(asn, &host, ifname::HOST_ETH),
                    ],
                    0,
                );
            }
        }
        for l in &a.l3.links {
            let ea = Endpoint::new(asn, &l.a, &ifname::intra(&l.b));
            let eb = Endpoint::new(asn, &l.b, &ifname::intra(&l.a));
            b.iface(asn, &l.a, DeviceKind::Router, &ea.iface);
            b.iface(asn, &l.b, DeviceKind::Router, &eb.iface);
            b.segment(Medium::Intra, vec![ea, eb], l.delay_us);
        }
        if let Some(l2) = &a.l2 {
            for s in &l2.switches {
                b.device(asn, &s.name, DeviceKind::Switch);
            }
            for (x, y) in &l2.links {
                b.iface(asn, x, DeviceKind::Switch, &ifname::switch_port(y));
                b.iface(asn, y, DeviceKind::Switch, &ifname::switch_port(x));
            }
            let (gw_sw, gw_router) = &l2.gateway;
            b.iface(asn, gw_sw, DeviceKind::Switch, &ifname::switch_port(gw_router));
            b.iface(asn, gw_router, DeviceKind::Router, ifname::L2_PHYS);
            let mut ends = vec![Endpoint::new(asn, gw_router, ifname::L2_PHYS)];
            for h in &l2.host_ports {
                b.iface(asn, &h.switch, DeviceKind::Switch, &ifname::switch_port(&h.host));
                b.iface(asn, &h.host, DeviceKind::Host, ifname::HOST_ETH);
                ends.push(Endpoint::new(asn, &h.host, ifname::HOST_ETH));
            }
            b.segment(Medium::L2, ends, 0);
        }
    }
    for (index, l) in spec.inter_as_links.iter().enumerate() {
        let ea = Endpoint::new(l.a.asn, &l.a.router, &ifname::inter_as(l.b.asn, &l.b.router));
        let eb = Endpoint::new(l.b.asn, &l.b.router, &ifname::inter_as(l.a.asn, &l.a.router));
        b.iface(ea.asn, &ea.device, DeviceKind::Router, &ea.iface);
        b.iface(eb.asn, &eb.device, DeviceKind::Router, &eb.iface);
        let seg = b.segment(Medium::InterAs { index }, vec![ea, eb], l.delay_us);
        b.segments[seg].admin_up = l.admin_up;
    }
    for x in &spec.ixps {
        let mut ends = vec![Endpoint::new(x.id, ROUTE_SERVER_NAME, ifname::ROUTE_SERVER)];
        b.iface(x.id, ROUTE_SERVER_NAME, DeviceKind::RouteServer, ifname::ROUTE_SERVER);
        for m in &x.members {
            let iface = ifname::ixp(x.id);
            b.iface(m.asn, &m.router, DeviceKind::Router, &iface);
            ends.push(Endpoint::new(m.asn, &m.router, &iface));
        }
        b.segment(Medium::Ixp { id: x.id }, ends, x.delay_us);
    }

    let devices = b
        .inventory
        .into_iter()
        .map(|(id, (kind, ifaces))| {
            let dev = Device {
                id: id.clone(),
                config: DeviceState::new(kind, ifaces),
                failed: false,
            };
            (id, dev)
        })
        .collect();
    let mut iface_segment = BTreeMap::new();
    for (i, s) in b.segments.iter().enumerate() {
        for e in &s.ends {
            iface_segment.insert((e.device_id(), e.iface.clone()), i);
        }
    }
    let mut net = Network {
        spec: spec.clone(),
        plan,
        devices,
        segments: b.segments,
        hijacks: Vec::new(),
        derived: Derived::default(),
        iface_segment,
    };
    let auto: Vec<Asn> = spec
        .ases
        .iter()
        .filter(|a| a.auto_configured)
        .map(|a| a.asn)
        .chain(spec.ixps.iter().map(|x| x.id))
        .collect();
    for asn in auto {
        net.apply_scripts(asn, &generate_reference_config(&net, asn)?);
    }
    Ok(net)
}

#[derive(Default)]
struct Builder {
    inventory: BTreeMap<DeviceId, (DeviceKind, Vec<String>)>,
    segments: Vec<Segment>,
}

impl Builder {
    fn device(&mut self, asn: Asn, name: &str, kind: DeviceKind) -> &mut Vec<String> {
        &mut self
            .inventory
            .entry(DeviceId::new(asn, name))
            .or_insert_with(|| (kind, Vec::new()))
            .1
    }

    fn iface(&mut self, asn: Asn, name: &str, kind: DeviceKind, iface: &str) {
        let ifaces = self.device(asn, name, kind);
        if !ifaces.iter().any(|i| i == iface) {
            ifaces.push(iface.to_string());
        }
    }

    fn segment(&mut self, medium: Medium, ends: Vec<Endpoint>, delay_us: u64) -> usize {
        self.segments.push(Segment {
            medium,
            ends,
            delay_us,
            admin_up: true,
        });
        self.segments.len() - 1
    }
}

impl Network {
    pub fn device(&self, asn: Asn, name: &str) -> Option<&Device> {
        self.devices.get(&DeviceId::new(asn, name))
    }

    pub fn device_mut(&mut self, asn: Asn, name: &str) -> Option<&mut Device> {
        self.devices.get_mut(&DeviceId::new(asn, name))
    }

    /// Devices of one AS (or IXP), in name order.
    pub fn devices_of(&self, asn: Asn) -> impl Iterator<Item = &Device> {
        self.devices
            .range(DeviceId::new(asn, "")..DeviceId::new(asn + 1, ""))
            .map(|(_, d)| d)
    }

    /// Routers of an AS in template order.
    pub fn routers_of(&self, asn: Asn) -> &[String] {
        self.spec
            .as_spec(asn)
            .map(|a| a.l3.routers.as_slice())
            .unwrap_or(&[])
    }

    /// All ASNs followed by all IXP ids.
    pub fn all_asns(&self) -> Vec<Asn> {
        let mut v = self.spec.asns();
        v.extend(self.spec.ixps.iter().map(|x| x.id));
        v
    }

    pub fn is_ixp(&self, asn: Asn) -> bool {
        self.spec.ixp(asn).is_some()
    }

    /// Segment attached to an interface (sub-interfaces resolve to their port).
    pub fn segment_of(&self, id: &DeviceId, iface: &str) -> Option<usize> {
        self.iface_segment
            .get(&(id.clone(), ifname::physical(iface).to_string()))
            .copied()
    }

    /// Operational state: device alive, interface and its port admin up,
    /// attached segment up.
    pub fn iface_up(&self, id: &DeviceId, iface: &str) -> bool {
        let Some(d) = self.devices.get(id) else {
            return false;
        };
        if d.failed {
            return false;
        }
        let phys = ifname::physical(iface);
        for name in [iface, phys] {
            match d.config.interfaces.get(name) {
                Some(i) if i.admin_up => {}
                _ => return false,
            }
        }
        self.segment_of(id, iface)
            .map(|s| self.segments[s].admin_up)
            .unwrap_or(true)
    }

    /// Apply per-device scripts (lenient), returning the number of error diagnostics.
    pub fn apply_scripts(&mut self, asn: Asn, scripts: &BTreeMap<String, String>) -> usize {
        let mut errors = 0;
        for (dev, script) in scripts {
            if let Some(d) = self.device_mut(asn, dev) {
                let out = apply_script(&mut d.config, script, false);
                for diag in out.diagnostics.iter() {
                    log::warn!("{asn}.{dev} line {}: {}", diag.line, diag.message);
                }
                if out.has_errors() {
                    errors += 1;
                }
            } else {
                errors += 1;
            }
        }
        errors
    }

    /// Apply only one phase of the reference configuration (1 = intra-domain, 2 = BGP).
    pub fn apply_reference_phase(&mut self, asn: Asn, phase: u8) -> Result<(), TopoError> {
        let (p1, p2) = reference_config_phases(self, asn)?;
        self.apply_scripts(asn, if phase == 1 { &p1 } else { &p2 });
        Ok(())
    }

    /// Erase every device configuration of an AS.
    pub fn blank_as(&mut self, asn: Asn) {
        for d in self.devices.values_mut().filter(|d| d.id.asn == asn) {
            d.config = d.config.blank();
        }
    }

    /// Point-to-point segment between two devices.
    pub fn find_link(&self, a: &DeviceId, b: &DeviceId) -> Result<usize, LinkError> {
        for id in [a, b] {
            if !self.devices.contains_key(id) {
                return Err(LinkError::UnknownDevice(id.clone()));
            }
        }
        self.segments
            .iter()
            .position(|s| {
                s.ends.len() == 2
                    && s.ends.iter().any(|e| e.asn == a.asn && e.device == a.name)
                    && s.ends.iter().any(|e| e.asn == b.asn && e.device == b.name)
            })
            .ok_or_else(|| LinkError::NoSuchLink(a.clone(), b.clone()))
    }

    pub fn set_link_state(&mut self, a: &DeviceId, b: &DeviceId, up: bool) -> Result<(), LinkError> {
        let i = self.find_link(a, b)?;
        self.segments[i].admin_up = up;
        Ok(())
    }

    pub fn set_device_failed(&mut self, id: &DeviceId, failed: bool) -> Result<(), LinkError> {
        let d = self
            .devices
            .get_mut(id)
            .ok_or_else(|| LinkError::UnknownDevice(id.clone()))?;
        d.failed = failed;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topo::generate_reference_topology;

    fn manual(spec: &mut TopologySpec) {
        for a in &mut spec.ases {
            a.auto_configured = false;
        }
    }

    #[test]
    fn device_counts_per_as() {
        let mut spec = generate_reference_topology(1, 4).unwrap();
        manual(&mut spec);
        let net = instantiate(&spec).unwrap();
        assert_eq!(net.devices_of(1).count(), 28);
        let kinds = |k| net.devices_of(1).filter(|d| d.kind() == k).count();
        assert_eq!(kinds(DeviceKind::Router), 8);
        assert_eq!(kinds(DeviceKind::Switch), 4);
        assert_eq!(kinds(DeviceKind::Host), 16);
    }

    #[test]
    fn no_ixps_no_route_servers() {
        let mut spec = generate_reference_topology(1, 4).unwrap();
        spec.ixps.clear();
        let net = instantiate(&spec).unwrap();
        assert!(net
            .devices
            .values()
            .all(|d| d.kind() != DeviceKind::RouteServer));
    }

    #[test]
    fn route_server_per_ixp() {
        let spec = generate_reference_topology(2, 6).unwrap();
        let net = instantiate(&spec).unwrap();
        let rs = net
            .devices
            .values()
            .filter(|d| d.kind() == DeviceKind::RouteServer)
            .count();
        assert_eq!(rs, spec.ixps.len());
    }

    #[test]
    fn manual_ases_start_empty_auto_ones_configured() {
        let spec = generate_reference_topology(1, 6).unwrap();
        let net = instantiate(&spec).unwrap();
        for a in &spec.ases {
            let r1 = &net.device(a.asn, "ROUTER1").unwrap().config;
            assert_eq!(r1.bgp.is_some(), a.auto_configured, "AS {}", a.asn);
        }
    }

    #[test]
    fn every_segment_end_resolves() {
        let spec = generate_reference_topology(2, 10).unwrap();
        let net = instantiate(&spec).unwrap();
        for s in &net.segments {
            for e in &s.ends {
                let d = net.device(e.asn, &e.device).expect("device");
                assert!(d.config.interfaces.contains_key(&e.iface), "{e:?}");
            }
        }
    }

    #[test]
    fn link_failure_takes_interfaces_down() {
        let spec = generate_reference_topology(1, 4).unwrap();
        let mut net = instantiate(&spec).unwrap();
        let a = DeviceId::new(1, "ROUTER1");
        let b = DeviceId::new(1, "ROUTER2");
        assert!(net.iface_up(&a, "port_ROUTER2"));
        net.set_link_state(&a, &b, false).unwrap();
        assert!(!net.iface_up(&a, "port_ROUTER2"));
        assert!(net.find_link(&a, &DeviceId::new(1, "ROUTER5")).is_err());
    }
}
