use std::collections::BTreeMap;
use std::fmt::Write;
use std::net::Ipv4Addr;

use ipnet::Ipv4Net;
use serde::Serialize;

use crate::bgpsim::{RouterRib, SessionKind};
use crate::igp::IgpTable;
use crate::topo::Device;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteSource {
    Connected,
    Static,
    Ospf,
    Ebgp,
    Ibgp,
    /// Locally originated BGP prefix: a discard route below more specifics.
    Originated,
}

impl RouteSource {
    pub fn admin_distance(self) -> u8 {
        match self {
            RouteSource::Connected => 0,
            RouteSource::Static => 1,
            RouteSource::Ebgp | RouteSource::Originated => 20,
            RouteSource::Ospf => 110,
            RouteSource::Ibgp => 200,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            RouteSource::Connected => "C",
            RouteSource::Static => "S",
            RouteSource::Ospf => "O",
            RouteSource::Ebgp | RouteSource::Ibgp | RouteSource::Originated => "B",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FibNextHop {
    pub iface: String,
    /// Gateway address; `None` when the destination is on the attached subnet.
    pub via: Option<Ipv4Addr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FibEntry {
    pub prefix: Ipv4Net,
    /// Empty for discard routes.
    pub next_hops: Vec<FibNextHop>,
    pub source: RouteSource,
    /// OSPF cost or BGP MED.
    pub metric: u32,
}

impl FibEntry {
    pub fn admin_distance(&self) -> u8 {
        self.source.admin_distance()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Fib {
    pub entries: BTreeMap<Ipv4Net, FibEntry>,
}

impl Fib {
    /// Install unless a route with lower or equal admin distance is present.
    pub fn offer(&mut self, entry: FibEntry) {
        if entry.next_hops.is_empty() && entry.source != RouteSource::Originated {
            return;
        }
        match self.entries.get(&entry.prefix) {
            Some(e) if e.admin_distance() <= entry.admin_distance() => {}
            _ => {
                self.entries.insert(entry.prefix, entry);
            }
        }
    }

    /// Longest-prefix match.
    pub fn longest_match(&self, dst: Ipv4Addr) -> Option<&FibEntry> {
        (0..=32u8).rev().find_map(|len| {
            let p = Ipv4Net::new(dst, len).unwrap().trunc();
            self.entries.get(&p)
        })
    }

    /// Longest-prefix match, then next hop `flow_id mod |set|`. A discard
    /// route matches with no next hop.
    pub fn lookup(&self, dst: Ipv4Addr, flow_id: u64) -> Option<(&FibEntry, Option<&FibNextHop>)> {
        let e = self.longest_match(dst)?;
        if e.next_hops.is_empty() {
            return Some((e, None));
        }
        let nh = &e.next_hops[(flow_id % e.next_hops.len() as u64) as usize];
        Some((e, Some(nh)))
    }

    /// `show ip route` text.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in self.entries.values() {
            if e.next_hops.is_empty() {
                writeln!(
                    out,
                    "{:<2} {:<18} [{}/{}] via Null0",
                    e.source.code(),
                    e.prefix.to_string(),
                    e.admin_distance(),
                    e.metric
                )
                .unwrap();
            }
            for (i, nh) in e.next_hops.iter().enumerate() {
                let head = if i == 0 {
                    format!("{:<2} {:<18}", e.source.code(), e.prefix.to_string())
                } else {
                    format!("{:<2} {:<18}", "", "")
                };
                match nh.via {
                    Some(v) => writeln!(
                        out,
                        "{head} [{}/{}] via {v}, {}",
                        e.admin_distance(),
                        e.metric,
                        nh.iface
                    ),
                    None => writeln!(out, "{head} is directly connected, {}", nh.iface),
                }
                .unwrap();
            }
        }
        out
    }
}

/// Resolve an address through connected and OSPF routes only.
fn resolve(fib: &Fib, addr: Ipv4Addr) -> Option<Vec<FibNextHop>> {
    let e = (0..=32u8).rev().find_map(|len| {
        let p = Ipv4Net::new(addr, len).unwrap().trunc();
        fib.entries
            .get(&p)
            .filter(|e| matches!(e.source, RouteSource::Connected | RouteSource::Ospf))
    })?;
    Some(
        e.next_hops
            .iter()
            .map(|nh| FibNextHop {
                iface: nh.iface.clone(),
                via: Some(nh.via.unwrap_or(addr)),
            })
            .collect(),
    )
}

/// Build the FIB of one device.
pub fn build_fib(dev: &Device, igp: &IgpTable, rib: Option<&RouterRib>) -> (Fib, Vec<String>) {
    let mut fib = Fib::default();
    let mut diags = Vec::new();
    for (p, iface) in &igp.connected {
        fib.offer(FibEntry {
            prefix: *p,
            next_hops: vec![FibNextHop {
                iface: iface.clone(),
                via: None,
            }],
            source: RouteSource::Connected,
            metric: 0,
        });
    }
    for (p, e) in &igp.routes {
        fib.offer(FibEntry {
            prefix: *p,
            next_hops: e
                .next_hops
                .iter()
                .map(|nh| FibNextHop {
                    iface: nh.iface.clone(),
                    via: Some(nh.via),
                })
                .collect(),
            source: RouteSource::Ospf,
            metric: e.cost,
        });
    }
    for (p, via) in &dev.config.static_routes {
        match resolve(&fib, *via) {
            Some(nhs) => fib.offer(FibEntry {
                prefix: *p,
                next_hops: nhs,
                source: RouteSource::Static,
                metric: 0,
            }),
            None => diags.push(format!("{}: static route {p} via {via} unresolvable", dev.id)),
        }
    }
    if let Some(rib) = rib {
        for (p, le) in &rib.loc_rib {
            let source = match le.route.learned_via {
                SessionKind::Local => {
                    fib.offer(FibEntry {
                        prefix: *p,
                        next_hops: Vec::new(),
                        source: RouteSource::Originated,
                        metric: 0,
                    });
                    continue;
                }
                SessionKind::Ebgp => RouteSource::Ebgp,
                SessionKind::Ibgp => RouteSource::Ibgp,
            };
            match resolve(&fib, le.route.next_hop) {
                Some(nhs) => fib.offer(FibEntry {
                    prefix: *p,
                    next_hops: nhs,
                    source,
                    metric: le.route.med,
                }),
                None => diags.push(format!(
                    "{}: next hop {} of {p} unresolvable",
                    dev.id, le.route.next_hop
                )),
            }
        }
    }
    (fib, diags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn entry(p: &str, hops: &[&str], source: RouteSource) -> FibEntry {
        FibEntry {
            prefix: p.parse().unwrap(),
            next_hops: hops
                .iter()
                .map(|h| FibNextHop {
                    iface: h.to_string(),
                    via: None,
                })
                .collect(),
            source,
            metric: 0,
        }
    }

    #[test]
    fn admin_distance_order() {
        let mut f = Fib::default();
        f.offer(entry("3.101.0.0/24", &["ospf"], RouteSource::Ospf));
        f.offer(entry("3.101.0.0/24", &["conn"], RouteSource::Connected));
        f.offer(entry("5.0.0.0/8", &["ibgp"], RouteSource::Ibgp));
        f.offer(entry("5.0.0.0/8", &["ebgp"], RouteSource::Ebgp));
        assert_eq!(f.entries[&"3.101.0.0/24".parse().unwrap()].next_hops[0].iface, "conn");
        assert_eq!(f.entries[&"5.0.0.0/8".parse().unwrap()].next_hops[0].iface, "ebgp");
    }

    #[test]
    fn longest_prefix_and_ecmp() {
        let mut f = Fib::default();
        f.offer(entry("5.0.0.0/8", &["a"], RouteSource::Ebgp));
        f.offer(entry("5.0.0.0/9", &["b", "c"], RouteSource::Ebgp));
        let dst = "5.1.2.3".parse().unwrap();
        assert_eq!(f.lookup(dst, 0).unwrap().1.unwrap().iface, "b");
        assert_eq!(f.lookup(dst, 1).unwrap().1.unwrap().iface, "c");
        assert_eq!(f.lookup("5.200.0.1".parse().unwrap(), 0).unwrap().1.unwrap().iface, "a");
        assert!(Fib::default().lookup(dst, 0).is_none());
    }

    fn brute(f: &Fib, dst: Ipv4Addr) -> Option<Ipv4Net> {
        f.entries
            .keys()
            .filter(|p| p.contains(&dst))
            .max_by_key(|p| p.prefix_len())
            .copied()
    }

    proptest! {
        #[test]
        fn lpm_matches_brute_force(
            prefixes in prop::collection::vec((any::<u32>(), 0u8..=32), 1..40),
            probes in prop::collection::vec(any::<u32>(), 1..40),
        ) {
            let mut f = Fib::default();
            for (a, len) in &prefixes {
                let p = Ipv4Net::new(Ipv4Addr::from(*a), *len).unwrap().trunc();
                f.offer(FibEntry { prefix: p, next_hops: vec![FibNextHop { iface: "x".into(), via: None }], source: RouteSource::Static, metric: 0 });
            }
            // probe inside the installed prefixes too
            let inside = prefixes.iter().map(|(a, _)| *a);
            for a in probes.into_iter().chain(inside) {
                let dst = Ipv4Addr::from(a);
                prop_assert_eq!(f.longest_match(dst).map(|e| e.prefix), brute(&f, dst));
            }
        }
    }
}
