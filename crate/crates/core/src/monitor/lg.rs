use std::fmt::Write;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::bgpsim::SessionKind;
use crate::confcli::{render_running_config, DeviceKind};
use crate::topo::{Asn, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LgView {
    Route,
    Bgp,
    SpanningTree,
    RunningConfig,
}

impl LgView {
    pub const ALL: [LgView; 4] = [LgView::Route, LgView::Bgp, LgView::SpanningTree, LgView::RunningConfig];

    pub fn as_str(self) -> &'static str {
        match self {
            LgView::Route => "route",
            LgView::Bgp => "bgp",
            LgView::SpanningTree => "spanning-tree",
            LgView::RunningConfig => "running-config",
        }
    }
}

impl FromStr for LgView {
    type Err = LgError;
    fn from_str(s: &str) -> Result<Self, LgError> {
        LgView::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| LgError::UnknownView(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LgError {
    #[error("unknown device {0}.{1}")]
    UnknownDevice(Asn, String),
    #[error("unknown view `{0}` (route, bgp, spanning-tree, running-config)")]
    UnknownView(String),
}

/// Looking-glass text of one device.
pub fn looking_glass(net: &Network, asn: Asn, device: &str, view: LgView) -> Result<String, LgError> {
    let dev = net
        .device(asn, device)
        .ok_or_else(|| LgError::UnknownDevice(asn, device.to_string()))?;
    Ok(match view {
        LgView::RunningConfig => render_running_config(&dev.config),
        LgView::Route => {
            let mut out = format!(
                "Routing table of {}\nCodes: C connected, S static, O ospf, B bgp\n\n",
                dev.id
            );
            if let Some(f) = net.derived.fibs.get(&dev.id) {
                out.push_str(&f.render());
            }
            out
        }
        LgView::Bgp => render_bgp(net, asn, device),
        LgView::SpanningTree => match (dev.kind(), net.derived.l2.get(&asn)) {
            (DeviceKind::Switch, Some(l2)) => l2.render_switch(device),
            _ => format!("% {} is not a switch\n", dev.id),
        },
    })
}

fn render_bgp(net: &Network, asn: Asn, device: &str) -> String {
    let id = crate::topo::DeviceId::new(asn, device);
    let rib = net.derived.bgp.ribs.get(&id);
    let mut out = String::new();
    let (rid, las) = match rib {
        Some(r) => (
            r.router_id.map(|a| a.to_string()).unwrap_or_else(|| "0.0.0.0".into()),
            r.asn.to_string(),
        ),
        None => ("0.0.0.0".into(), "-".into()),
    };
    writeln!(out, "BGP table of {id}, local router ID is {rid}, local AS {las}").unwrap();
    writeln!(out, "Status codes: > best, i internal").unwrap();
    writeln!(
        out,
        "   {:<18} {:<15} {:>6} {:>6}  Path",
        "Network", "Next Hop", "LP", "MED"
    )
    .unwrap();
    let Some(rib) = rib else { return out };
    let mut prefixes: Vec<_> = rib.loc_rib.keys().chain(rib.adj_in.keys()).copied().collect();
    prefixes.sort();
    prefixes.dedup();
    for p in prefixes {
        let best = rib.loc_rib.get(&p).map(|e| &e.route);
        let mut routes = Vec::new();
        if let Some(b) = best {
            routes.push((true, b));
        }
        for r in rib.candidates(&p) {
            if Some(r) != best {
                routes.push((false, r));
            }
        }
        for (is_best, r) in routes {
            let mark = format!(
                "{}{}",
                if is_best { ">" } else { " " },
                if r.learned_via == SessionKind::Ibgp { "i" } else { " " }
            );
            let path = if r.as_path.is_empty() {
                r.origin.code().to_string()
            } else {
                format!("{} {}", r.path_string(), r.origin.code())
            };
            writeln!(
                out,
                "{mark} {:<18} {:<15} {:>6} {:>6}  {path}",
                p.to_string(),
                r.next_hop.to_string(),
                r.local_pref,
                r.med
            )
            .unwrap();
        }
    }
    out
}
