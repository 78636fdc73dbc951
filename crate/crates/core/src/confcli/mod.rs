//! Device configuration language: parse, apply and render.

mod apply;
mod command;
mod render;
mod state;

pub use apply::{apply_command, ApplyError};
pub use command::{parse_command_line, Command, Mode, Op, ParseError, ParseErrorKind};
pub use render::render_running_config;
pub use state::*;

use serde::Serialize;
use thiserror::Error;

use crate::topo::{Asn, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    /// 1-based line of the script.
    pub line: usize,
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ScriptOutcome {
    pub applied: usize,
    pub diagnostics: Vec<Diagnostic>,
    /// Set when strict mode stopped early.
    pub stopped_at: Option<usize>,
}

impl ScriptOutcome {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(|d| d.severity == Severity::Error)
    }
}

/// Apply a multi-line script to one device.
///
/// Lenient mode skips bad lines and keeps going; strict mode stops at the
/// first error. Warnings (well-formed but unsupported commands) never stop.
pub fn apply_script(state: &mut DeviceState, script: &str, strict: bool) -> ScriptOutcome {
    let mut out = ScriptOutcome::default();
    let mut mode = Mode::Top;
    for (i, text) in script.lines().enumerate() {
        let line = i + 1;
        let result = parse_command_line(state.kind, text, &mode)
            .map_err(|e| (e.is_warning(), e.to_string()))
            .and_then(|cmd| match cmd {
                None => Ok(None),
                Some(cmd) => apply_command(state, &cmd)
                    .map(|_| Some(cmd))
                    .map_err(|e| (false, e.to_string())),
            });
        match result {
            Ok(None) => {}
            Ok(Some(cmd)) => {
                out.applied += 1;
                mode = cmd.next_mode();
            }
            Err((warning, message)) => {
                out.diagnostics.push(Diagnostic {
                    line,
                    severity: if warning {
                        Severity::Warning
                    } else {
                        Severity::Error
                    },
                    message,
                });
                if strict && !warning {
                    out.stopped_at = Some(line);
                    break;
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown device {asn}/{device}")]
pub struct UnknownDevice {
    pub asn: Asn,
    pub device: String,
}

/// Apply a script to a device of the network.
pub fn load_config_script(
    network: &mut Network,
    asn: Asn,
    device: &str,
    script: &str,
    strict: bool,
) -> Result<ScriptOutcome, UnknownDevice> {
    let state = network
        .device_mut(asn, device)
        .ok_or_else(|| UnknownDevice {
            asn,
            device: device.to_string(),
        })?;
    Ok(apply_script(&mut state.config, script, strict))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SCRIPT: &str = "\
interface lo
 ip address 3.150.0.1/32
interface port_ROUTER2
 ip address 3.0.1.1/30
router ospf
 network 3.0.0.0/8 area 0
router bgp 3
 neighbor 3.150.0.2 remote-as 3
 network 3.0.0.0/8
";

    fn router() -> DeviceState {
        DeviceState::new(DeviceKind::Router, ["lo", "host", "port_ROUTER2"])
    }

    #[test]
    fn clean_script_applies_every_line() {
        let mut s = router();
        let out = apply_script(&mut s, SCRIPT, false);
        assert_eq!(out.applied, 9);
        assert!(out.diagnostics.is_empty());
    }

    #[test]
    fn lenient_collects_typo() {
        let mut s = router();
        let typo = SCRIPT.replace("router ospf", "router ospff");
        let out = apply_script(&mut s, &typo, false);
        assert_eq!(out.diagnostics.len(), 2);
        assert_eq!(out.diagnostics[0].line, 5);
        let mut s = router();
        let typo = SCRIPT.replace(" ip address 3.0.1.1/30", " ip adress 3.0.1.1/30");
        let out = apply_script(&mut s, &typo, false);
        assert_eq!(out.applied, 8);
        assert_eq!(out.diagnostics.len(), 1);
        assert_eq!(out.diagnostics[0].line, 4);
    }

    #[test]
    fn strict_stops_at_typo() {
        let mut s = router();
        let typo = SCRIPT.replace(" ip address 3.0.1.1/30", " ip adress 3.0.1.1/30");
        let out = apply_script(&mut s, &typo, true);
        assert_eq!(out.applied, 3);
        assert_eq!(out.stopped_at, Some(4));
        assert!(s.bgp.is_none());
    }

    #[test]
    fn unsupported_is_warning_only() {
        let mut s = router();
        let out = apply_script(&mut s, "hostname r1\nrouter ospf\n", true);
        assert_eq!(out.applied, 1);
        assert_eq!(out.diagnostics[0].severity, Severity::Warning);
        assert!(!out.has_errors());
    }

    fn arb_line() -> impl Strategy<Value = String> {
        let iface = prop_oneof![Just("lo"), Just("host"), Just("port_ROUTER2"), Just("l2.10")];
        let name = prop_oneof![Just("A"), Just("B"), Just("C")];
        prop_oneof![
            (iface.clone(), 1u8..30, 0u8..4, 8u8..=32).prop_map(|(i, a, b, l)| format!(
                "interface {i}\n ip address {a}.{b}.0.1/{l}"
            )),
            iface.clone().prop_map(|i| format!("interface {i}\n shutdown")),
            iface.clone().prop_map(|i| format!("interface {i}\n no shutdown")),
            (1u8..30).prop_map(|a| format!("router ospf\n network {a}.0.0.0/8 area 0")),
            (iface, 1u32..20).prop_map(|(i, c)| format!("router ospf\ninterface {i} ospf cost {c}")),
            (1u8..5, 1u8..5, name.clone()).prop_map(|(a, b, m)| format!(
                "router bgp 3\n neighbor {a}.0.0.{b} remote-as {a}\n neighbor {a}.0.0.{b} route-map {m} in"
            )),
            (1u8..5).prop_map(|a| format!("router bgp 3\n bgp router-id 9.9.9.{a}\n network {a}.0.0.0/8")),
            (name.clone(), 0u8..2, 1u32..4, 1u32..500, 1u8..=10).prop_map(|(m, d, s, v, p)| format!(
                "route-map {m} {} {}\n set local-preference {v}\n set metric {v}\n set as-path prepend {p}\n set community 3:{v} additive\n match community {m}\n match ip address prefix-list {m}",
                if d == 0 { "permit" } else { "deny" },
                s * 10
            )),
            (name.clone(), 8u8..24).prop_map(|(m, l)| format!(
                "ip prefix-list {m} permit 3.0.0.0/8 le {l}"
            ).replace("le 8", "ge 8")),
            (name, 1u16..40).prop_map(|(m, t)| format!("bgp community-list {m} permit 3:{t}")),
            (1u8..30, 1u8..9).prop_map(|(a, b)| format!("ip route {a}.0.0.0/8 via 3.0.0.{b}")),
            Just("ip route default via 3.101.0.2".to_string()),
        ]
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(lines in prop::collection::vec(arb_line(), 0..25)) {
            let mut s = DeviceState::new(DeviceKind::Router, ["lo", "host", "port_ROUTER2", "l2"]);
            apply_script(&mut s, &lines.join("\n"), false);
            let text = render_running_config(&s);
            let mut again = s.blank();
            let out = apply_script(&mut again, &text, true);
            prop_assert!(out.diagnostics.is_empty(), "{:?}\n{}", out.diagnostics, text);
            prop_assert_eq!(&again, &s);
            prop_assert_eq!(render_running_config(&again), text.clone());
            // applying twice equals applying once
            apply_script(&mut again, &text, true);
            prop_assert_eq!(&again, &s);
        }
    }

    proptest! {
        #[test]
        fn switch_round_trip(
            vlans in prop::collection::btree_set(2u16..50, 0..4),
            modes in prop::collection::vec(0u16..60, 3),
            prio in prop::option::of(0u32..65536),
        ) {
            let mut s = DeviceState::new(DeviceKind::Switch, ["port_S1", "port_S2", "port_HOST1"]);
            let mut script = String::new();
            for v in &vlans { script += &format!("vlan {v}\n"); }
            for (p, m) in ["port_S1", "port_S2", "port_HOST1"].iter().zip(&modes) {
                if *m == 0 { script += &format!("interface {p} trunk\n"); }
                else { script += &format!("interface {p} access vlan {m}\n"); }
            }
            if let Some(p) = prio { script += &format!("spanning-tree priority {p}\n"); }
            apply_script(&mut s, &script, false);
            let text = render_running_config(&s);
            let mut again = s.blank();
            prop_assert!(apply_script(&mut again, &text, true).diagnostics.is_empty());
            prop_assert_eq!(again, s);
        }
    }
}
