use std::net::Ipv4Addr;

use serde::Serialize;

use crate::dataplane::{trace, TraceOutcome};
use crate::topo::{ifname, AsSpec, Asn, DeviceId, Network};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Cell {
    Green,
    /// `None` when a probe host or its address is missing.
    Red(Option<TraceOutcome>),
}

impl Cell {
    pub fn is_green(&self) -> bool {
        *self == Cell::Green
    }

    pub fn code(&self) -> &'static str {
        if self.is_green() {
            "g"
        } else {
            "r"
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityMatrix {
    pub asns: Vec<Asn>,
    /// `cells[i][j]`: one-way delivery from AS i's probe to AS j's probe.
    pub cells: Vec<Vec<Cell>>,
    pub round: u64,
}

#[derive(Serialize)]
struct MatrixJson<'a> {
    asns: &'a [Asn],
    cells: Vec<Vec<&'static str>>,
    round: u64,
}

impl ConnectivityMatrix {
    pub fn index_of(&self, asn: Asn) -> Option<usize> {
        self.asns.iter().position(|&a| a == asn)
    }

    pub fn cell(&self, src: Asn, dst: Asn) -> Option<&Cell> {
        Some(&self.cells[self.index_of(src)?][self.index_of(dst)?])
    }

    pub fn all_green(&self) -> bool {
        self.cells.iter().flatten().all(Cell::is_green)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MatrixJson {
            asns: &self.asns,
            cells: self
                .cells
                .iter()
                .map(|r| r.iter().map(Cell::code).collect())
                .collect(),
            round: self.round,
        })
        .expect("matrix serializes")
    }

    /// Grid text: `#` green, `.` red.
    pub fn render(&self) -> String {
        let mut out = String::from("     ");
        for a in &self.asns {
            out.push_str(&format!("{a:>4}"));
        }
        out.push('\n');
        for (i, row) in self.cells.iter().enumerate() {
            out.push_str(&format!("{:>4} ", self.asns[i]));
            for c in row {
                out.push_str(if c.is_green() { "   #" } else { "   ." });
            }
            out.push('\n');
        }
        out
    }
}

/// Host on router 1 of an AS: the source of every probe of that AS.
pub fn probe_host(net: &Network, asn: Asn) -> Option<DeviceId> {
    let r = net.routers_of(asn).first()?;
    Some(DeviceId::new(asn, AsSpec::router_host_name(r)))
}

/// Host on the last router: the target of the diagonal cell.
pub fn diagonal_target(net: &Network, asn: Asn) -> Option<DeviceId> {
    let r = net.routers_of(asn).last()?;
    Some(DeviceId::new(asn, AsSpec::router_host_name(r)))
}

pub fn host_address(net: &Network, id: &DeviceId) -> Option<Ipv4Addr> {
    net.devices
        .get(id)?
        .config
        .interfaces
        .get(ifname::HOST_ETH)?
        .address
        .map(|a| a.addr())
}

/// One-way probe between two hosts.
fn probe(net: &Network, src: Option<DeviceId>, dst: Option<DeviceId>) -> Cell {
    let (Some(src), Some(addr)) = (src, dst.and_then(|d| host_address(net, &d))) else {
        return Cell::Red(None);
    };
    if !net.devices.contains_key(&src) {
        return Cell::Red(None);
    }
    let t = trace(net, &src, addr, 0);
    if t.delivered() {
        Cell::Green
    } else {
        Cell::Red(Some(t.outcome))
    }
}

/// The AS-by-AS matrix over the last converged state.
pub fn connectivity_matrix(net: &Network) -> ConnectivityMatrix {
    let asns = net.spec.asns();
    let cells = asns
        .iter()
        .map(|&i| {
            asns.iter()
                .map(|&j| {
                    let dst = if i == j {
                        diagonal_target(net, j)
                    } else {
                        probe_host(net, j)
                    };
                    probe(net, probe_host(net, i), dst)
                })
                .collect()
        })
        .collect();
    ConnectivityMatrix {
        asns,
        cells,
        round: net.derived.epoch,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum FindingCode {
    IntraDomainFault,
    MissingEbgp,
    PolicyAsymmetry,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub asn: Asn,
    pub code: FindingCode,
    /// Other AS of an asymmetric pair.
    pub peer: Option<Asn>,
    /// Red cells as (src, dst).
    pub evidence: Vec<(Asn, Asn)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Diagnosis {
    pub findings: Vec<Finding>,
}

/// Read the matrix the way an instructor would.
///
/// A red diagonal cell points at the AS itself. A column that is red
/// everywhere off the diagonal means nobody reaches the AS. A green (i,j)
/// with a red (j,i) is attributed to j, whose traffic cannot get back.
pub fn diagnose(m: &ConnectivityMatrix) -> Diagnosis {
    let n = m.asns.len();
    let mut findings = Vec::new();
    let mut covered = vec![false; n];
    for i in 0..n {
        if !m.cells[i][i].is_green() {
            findings.push(Finding {
                asn: m.asns[i],
                code: FindingCode::IntraDomainFault,
                peer: None,
                evidence: vec![(m.asns[i], m.asns[i])],
            });
            covered[i] = true;
        }
    }
    if n > 1 {
        for j in 0..n {
            if (0..n).filter(|&i| i != j).all(|i| !m.cells[i][j].is_green()) {
                findings.push(Finding {
                    asn: m.asns[j],
                    code: FindingCode::MissingEbgp,
                    peer: None,
                    evidence: (0..n).filter(|&i| i != j).map(|i| (m.asns[i], m.asns[j])).collect(),
                });
                covered[j] = true;
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j || covered[i] || covered[j] {
                continue;
            }
            if m.cells[i][j].is_green() && !m.cells[j][i].is_green() {
                findings.push(Finding {
                    asn: m.asns[j],
                    code: FindingCode::PolicyAsymmetry,
                    peer: Some(m.asns[i]),
                    evidence: vec![(m.asns[j], m.asns[i])],
                });
            }
        }
    }
    findings.sort_by_key(|f| (f.asn, f.code, f.peer));
    Diagnosis { findings }
}
