//! Command grammar: a small dialect of the usual router/switch CLI.

use std::fmt;
use std::net::Ipv4Addr;

use ipnet::Ipv4Net;
use serde::Serialize;
use thiserror::Error;

use super::state::*;
use crate::topo::Asn;

/// Configuration mode the parser is in; also the context a command applies to.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub enum Mode {
    #[default]
    Top,
    Interface(String),
    RouterOspf,
    RouterBgp,
    RouteMap { name: String, seq: u32 },
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Top => f.write_str("config"),
            Mode::Interface(i) => write!(f, "config-if {i}"),
            Mode::RouterOspf => f.write_str("config-router-ospf"),
            Mode::RouterBgp => f.write_str("config-router-bgp"),
            Mode::RouteMap { name, seq } => write!(f, "config-route-map {name} {seq}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Op {
    Interface(String),
    IpAddress(Ipv4Net),
    NoIpAddress,
    Shutdown,
    NoShutdown,
    RouterOspf,
    OspfNetwork(Ipv4Net),
    OspfCost { iface: String, cost: u32 },
    RouterBgp(Asn),
    BgpRouterId(Ipv4Addr),
    NeighborRemoteAs { addr: Ipv4Addr, asn: Asn },
    NeighborRouteMap { addr: Ipv4Addr, map: String, dir: Direction },
    NoNeighbor(Ipv4Addr),
    BgpNetwork(Ipv4Net),
    NoBgpNetwork(Ipv4Net),
    RouteMap { name: String, action: Action, seq: u32 },
    MatchPrefixList(String),
    MatchCommunity(String),
    SetLocalPref(u32),
    SetMetric(u32),
    SetCommunity(Community),
    SetPrepend(u8),
    PrefixList { name: String, entry: PrefixListEntry },
    CommunityList { name: String, community: Community },
    Vlan(u16),
    AccessVlan { port: String, vlan: u16 },
    Trunk { port: String },
    StpPriority(u32),
    StaticRoute { prefix: Ipv4Net, via: Ipv4Addr },
    Exit,
}

/// A parsed instruction together with the context it applies to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Command {
    pub context: Mode,
    pub op: Op,
}

impl Command {
    /// Mode the parser is in after this command.
    pub fn next_mode(&self) -> Mode {
        match &self.op {
            Op::Interface(n) => Mode::Interface(n.clone()),
            Op::RouterOspf => Mode::RouterOspf,
            Op::RouterBgp(_) => Mode::RouterBgp,
            Op::RouteMap { name, seq, .. } => Mode::RouteMap {
                name: name.clone(),
                seq: *seq,
            },
            Op::IpAddress(_)
            | Op::NoIpAddress
            | Op::Shutdown
            | Op::NoShutdown
            | Op::OspfNetwork(_)
            | Op::OspfCost { .. }
            | Op::BgpRouterId(_)
            | Op::NeighborRemoteAs { .. }
            | Op::NeighborRouteMap { .. }
            | Op::NoNeighbor(_)
            | Op::BgpNetwork(_)
            | Op::NoBgpNetwork(_)
            | Op::MatchPrefixList(_)
            | Op::MatchCommunity(_)
            | Op::SetLocalPref(_)
            | Op::SetMetric(_)
            | Op::SetCommunity(_)
            | Op::SetPrepend(_) => self.context.clone(),
            _ => Mode::Top,
        }
    }
}

fn fmt_prefix(p: &Ipv4Net) -> String {
    if p.prefix_len() == 0 {
        "default".to_string()
    } else {
        p.to_string()
    }
}

/// Canonical text of the command, without indentation.
impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Interface(n) => write!(f, "interface {n}"),
            Op::IpAddress(a) => write!(f, "ip address {a}"),
            Op::NoIpAddress => f.write_str("no ip address"),
            Op::Shutdown => f.write_str("shutdown"),
            Op::NoShutdown => f.write_str("no shutdown"),
            Op::RouterOspf => f.write_str("router ospf"),
            Op::OspfNetwork(p) => write!(f, "network {p} area 0"),
            Op::OspfCost { iface, cost } => write!(f, "interface {iface} ospf cost {cost}"),
            Op::RouterBgp(a) => write!(f, "router bgp {a}"),
            Op::BgpRouterId(id) => write!(f, "bgp router-id {id}"),
            Op::NeighborRemoteAs { addr, asn } => write!(f, "neighbor {addr} remote-as {asn}"),
            Op::NeighborRouteMap { addr, map, dir } => write!(
                f,
                "neighbor {addr} route-map {map} {}",
                match dir {
                    Direction::In => "in",
                    Direction::Out => "out",
                }
            ),
            Op::NoNeighbor(a) => write!(f, "no neighbor {a}"),
            Op::BgpNetwork(p) => write!(f, "network {p}"),
            Op::NoBgpNetwork(p) => write!(f, "no network {p}"),
            Op::RouteMap { name, action, seq } => {
                write!(f, "route-map {name} {} {seq}", action.as_str())
            }
            Op::MatchPrefixList(n) => write!(f, "match ip address prefix-list {n}"),
            Op::MatchCommunity(n) => write!(f, "match community {n}"),
            Op::SetLocalPref(v) => write!(f, "set local-preference {v}"),
            Op::SetMetric(v) => write!(f, "set metric {v}"),
            Op::SetCommunity(c) => write!(f, "set community {c} additive"),
            Op::SetPrepend(n) => write!(f, "set as-path prepend {n}"),
            Op::PrefixList { name, entry } => {
                write!(
                    f,
                    "ip prefix-list {name} {} {}",
                    entry.action.as_str(),
                    entry.prefix
                )?;
                if let Some(le) = entry.le {
                    write!(f, " le {le}")?;
                }
                if let Some(ge) = entry.ge {
                    write!(f, " ge {ge}")?;
                }
                Ok(())
            }
            Op::CommunityList { name, community } => {
                write!(f, "bgp community-list {name} permit {community}")
            }
            Op::Vlan(v) => write!(f, "vlan {v}"),
            Op::AccessVlan { port, vlan } => write!(f, "interface {port} access vlan {vlan}"),
            Op::Trunk { port } => write!(f, "interface {port} trunk"),
            Op::StpPriority(p) => write!(f, "spanning-tree priority {p}"),
            Op::StaticRoute { prefix, via } => {
                write!(f, "ip route {} via {via}", fmt_prefix(prefix))
            }
            Op::Exit => f.write_str("exit"),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.op.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
pub enum ParseErrorKind {
    #[error("unknown command")]
    UnknownVerb,
    #[error("unsupported command (ignored)")]
    Unsupported,
    #[error("wrong number of arguments")]
    Arity,
    #[error("malformed address `{0}`")]
    MalformedAddress(String),
    #[error("invalid number `{0}`")]
    InvalidNumber(String),
    #[error("invalid value `{0}`")]
    InvalidValue(String),
    #[error("command not valid on a {0}")]
    WrongDevice(DeviceKind),
    #[error("command not valid in {0} mode")]
    WrongMode(String),
}

/// Parse failure with the 1-based column of the offending token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
#[error("column {column}: {kind}")]
pub struct ParseError {
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    /// Well-formed but outside the supported grammar.
    pub fn is_warning(&self) -> bool {
        self.kind == ParseErrorKind::Unsupported
    }
}

/// Verbs accepted syntactically but not modeled.
const UNSUPPORTED: &[&str] = &[
    "hostname",
    "log",
    "line",
    "service",
    "password",
    "enable",
    "description",
    "write",
    "banner",
    "frr",
    "ipv6",
    "debug",
];

struct Tokens<'a> {
    toks: Vec<(usize, &'a str)>,
    end_col: usize,
}

impl<'a> Tokens<'a> {
    fn new(line: &'a str) -> Self {
        let mut toks = Vec::new();
        let mut start = None;
        for (i, c) in line.char_indices() {
            if c.is_whitespace() {
                if let Some(s) = start.take() {
                    toks.push((s + 1, &line[s..i]));
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
        if let Some(s) = start {
            toks.push((s + 1, &line[s..]));
        }
        Tokens {
            toks,
            end_col: line.len() + 1,
        }
    }

    fn words(&self) -> Vec<&'a str> {
        self.toks.iter().map(|t| t.1).collect()
    }

    fn col(&self, i: usize) -> usize {
        self.toks.get(i).map(|t| t.0).unwrap_or(self.end_col)
    }

    fn err(&self, i: usize, kind: ParseErrorKind) -> ParseError {
        ParseError {
            column: self.col(i),
            kind,
        }
    }

    fn arity(&self, expected: usize) -> Result<(), ParseError> {
        if self.toks.len() == expected {
            Ok(())
        } else {
            Err(self.err(expected.min(self.toks.len()), ParseErrorKind::Arity))
        }
    }

    fn num<T: std::str::FromStr>(&self, i: usize) -> Result<T, ParseError> {
        let w = self.toks.get(i).map(|t| t.1).unwrap_or("");
        w.parse()
            .map_err(|_| self.err(i, ParseErrorKind::InvalidNumber(w.to_string())))
    }

    fn prefix(&self, i: usize) -> Result<Ipv4Net, ParseError> {
        let w = self.toks.get(i).map(|t| t.1).unwrap_or("");
        w.parse::<Ipv4Net>()
            .map_err(|_| self.err(i, ParseErrorKind::MalformedAddress(w.to_string())))
    }

    /// Prefix in canonical (host bits cleared) form.
    fn network(&self, i: usize) -> Result<Ipv4Net, ParseError> {
        Ok(self.prefix(i)?.trunc())
    }

    fn addr(&self, i: usize) -> Result<Ipv4Addr, ParseError> {
        let w = self.toks.get(i).map(|t| t.1).unwrap_or("");
        w.parse()
            .map_err(|_| self.err(i, ParseErrorKind::MalformedAddress(w.to_string())))
    }

    fn community(&self, i: usize) -> Result<Community, ParseError> {
        let w = self.toks.get(i).map(|t| t.1).unwrap_or("");
        w.parse()
            .map_err(|_| self.err(i, ParseErrorKind::InvalidValue(w.to_string())))
    }
}

fn action(t: &Tokens, i: usize) -> Result<Action, ParseError> {
    match t.toks.get(i).map(|x| x.1) {
        Some("permit") => Ok(Action::Permit),
        Some("deny") => Ok(Action::Deny),
        Some(w) => Err(t.err(i, ParseErrorKind::InvalidValue(w.to_string()))),
        None => Err(t.err(i, ParseErrorKind::Arity)),
    }
}

/// Parse one line typed on a device of `kind` while in `mode`.
///
/// Comments (`!`) and blank lines yield `Ok(None)`.
pub fn parse_command_line(
    kind: DeviceKind,
    text: &str,
    mode: &Mode,
) -> Result<Option<Command>, ParseError> {
    let t = Tokens::new(text);
    let w = t.words();
    if w.is_empty() || w[0].starts_with('!') || w[0].starts_with('#') {
        return Ok(None);
    }
    // Sub-mode commands first; anything else falls through to global commands.
    if let Some(op) = parse_in_mode(kind, &t, &w, mode)? {
        return Ok(Some(Command {
            context: mode.clone(),
            op,
        }));
    }
    let op = parse_global(kind, &t, &w, mode)?;
    Ok(Some(Command {
        context: mode.clone(),
        op,
    }))
}

fn parse_in_mode(
    kind: DeviceKind,
    t: &Tokens,
    w: &[&str],
    mode: &Mode,
) -> Result<Option<Op>, ParseError> {
    let op = match (mode, w) {
        (Mode::Interface(_), ["ip", "address", ..]) if kind != DeviceKind::Switch => {
            t.arity(3)?;
            Op::IpAddress(t.prefix(2)?)
        }
        (Mode::Interface(_), ["no", "ip", "address", ..]) => {
            t.arity(3)?;
            Op::NoIpAddress
        }
        (Mode::Interface(_), ["shutdown", ..]) => {
            t.arity(1)?;
            Op::Shutdown
        }
        (Mode::Interface(_), ["no", "shutdown", ..]) => {
            t.arity(2)?;
            Op::NoShutdown
        }
        (Mode::RouterOspf, ["network", ..]) => {
            t.arity(4)?;
            if w[2] != "area" {
                return Err(t.err(2, ParseErrorKind::InvalidValue(w[2].to_string())));
            }
            if w[3] != "0" && w[3] != "0.0.0.0" {
                return Err(t.err(3, ParseErrorKind::InvalidValue(w[3].to_string())));
            }
            Op::OspfNetwork(t.network(1)?)
        }
        (Mode::RouterBgp, ["bgp", "router-id", ..]) => {
            t.arity(3)?;
            Op::BgpRouterId(t.addr(2)?)
        }
        (Mode::RouterBgp, ["neighbor", _, "remote-as", ..]) => {
            t.arity(4)?;
            Op::NeighborRemoteAs {
                addr: t.addr(1)?,
                asn: t.num(3)?,
            }
        }
        (Mode::RouterBgp, ["neighbor", _, "route-map", ..]) => {
            t.arity(5)?;
            let dir = match w[4] {
                "in" => Direction::In,
                "out" => Direction::Out,
                other => return Err(t.err(4, ParseErrorKind::InvalidValue(other.to_string()))),
            };
            Op::NeighborRouteMap {
                addr: t.addr(1)?,
                map: w[3].to_string(),
                dir,
            }
        }
        (Mode::RouterBgp, ["neighbor", ..]) => {
            return Err(t.err(2.min(w.len()), ParseErrorKind::UnknownVerb))
        }
        (Mode::RouterBgp, ["no", "neighbor", ..]) => {
            t.arity(3)?;
            Op::NoNeighbor(t.addr(2)?)
        }
        (Mode::RouterBgp, ["network", ..]) => {
            t.arity(2)?;
            Op::BgpNetwork(t.network(1)?)
        }
        (Mode::RouterBgp, ["no", "network", ..]) => {
            t.arity(3)?;
            Op::NoBgpNetwork(t.network(2)?)
        }
        (Mode::RouteMap { .. }, ["match", "ip", "address", "prefix-list", ..]) => {
            t.arity(5)?;
            Op::MatchPrefixList(w[4].to_string())
        }
        (Mode::RouteMap { .. }, ["match", "community", ..]) => {
            t.arity(3)?;
            Op::MatchCommunity(w[2].to_string())
        }
        (Mode::RouteMap { .. }, ["match", ..]) => {
            return Err(t.err(1.min(w.len()), ParseErrorKind::UnknownVerb))
        }
        (Mode::RouteMap { .. }, ["set", "local-preference", ..]) => {
            t.arity(3)?;
            Op::SetLocalPref(t.num(2)?)
        }
        (Mode::RouteMap { .. }, ["set", "metric", ..]) => {
            t.arity(3)?;
            Op::SetMetric(t.num(2)?)
        }
        (Mode::RouteMap { .. }, ["set", "community", ..]) => {
            t.arity(4)?;
            if w[3] != "additive" {
                return Err(t.err(3, ParseErrorKind::InvalidValue(w[3].to_string())));
            }
            Op::SetCommunity(t.community(2)?)
        }
        (Mode::RouteMap { .. }, ["set", "as-path", "prepend", ..]) => {
            t.arity(4)?;
            let n: u8 = t.num(3)?;
            if !(1..=10).contains(&n) {
                return Err(t.err(3, ParseErrorKind::InvalidValue(w[3].to_string())));
            }
            Op::SetPrepend(n)
        }
        (Mode::RouteMap { .. }, ["set", ..]) => {
            return Err(t.err(1.min(w.len()), ParseErrorKind::UnknownVerb))
        }
        _ => return Ok(None),
    };
    Ok(Some(op))
}

fn parse_global(
    kind: DeviceKind,
    t: &Tokens,
    w: &[&str],
    mode: &Mode,
) -> Result<Op, ParseError> {
    use DeviceKind::*;
    let require = |ok: bool| -> Result<(), ParseError> {
        if ok {
            Ok(())
        } else {
            Err(t.err(0, ParseErrorKind::WrongDevice(kind)))
        }
    };
    let op = match w {
        ["exit", ..] | ["end", ..] => {
            t.arity(1)?;
            Op::Exit
        }
        ["interface", _, "ospf", "cost", ..] => {
            require(kind.is_l3_router())?;
            t.arity(5)?;
            Op::OspfCost {
                iface: w[1].to_string(),
                cost: t.num(4)?,
            }
        }
        ["interface", _, "access", "vlan", ..] => {
            require(kind == Switch)?;
            t.arity(5)?;
            Op::AccessVlan {
                port: w[1].to_string(),
                vlan: t.num(4)?,
            }
        }
        ["interface", _, "trunk", ..] => {
            require(kind == Switch)?;
            t.arity(3)?;
            Op::Trunk {
                port: w[1].to_string(),
            }
        }
        ["interface", ..] => {
            t.arity(2)?;
            Op::Interface(w[1].to_string())
        }
        ["router", "ospf", ..] => {
            require(kind.is_l3_router())?;
            t.arity(2)?;
            Op::RouterOspf
        }
        ["router", "bgp", ..] => {
            require(kind.is_l3_router())?;
            t.arity(3)?;
            Op::RouterBgp(t.num(2)?)
        }
        ["route-map", ..] => {
            require(kind.is_l3_router())?;
            t.arity(4)?;
            Op::RouteMap {
                name: w[1].to_string(),
                action: action(t, 2)?,
                seq: t.num(3)?,
            }
        }
        ["ip", "prefix-list", ..] => {
            require(kind.is_l3_router())?;
            if !(w.len() == 5 || w.len() == 7 || w.len() == 9) {
                return Err(t.err(w.len().min(9), ParseErrorKind::Arity));
            }
            let mut entry = PrefixListEntry {
                action: action(t, 3)?,
                prefix: t.network(4)?,
                ge: None,
                le: None,
            };
            let mut i = 5;
            while i < w.len() {
                let v: u8 = t.num(i + 1)?;
                if v > 32 || v < entry.prefix.prefix_len() {
                    return Err(t.err(i + 1, ParseErrorKind::InvalidValue(w[i + 1].into())));
                }
                match w[i] {
                    "le" if entry.le.is_none() => entry.le = Some(v),
                    "ge" if entry.ge.is_none() => entry.ge = Some(v),
                    other => return Err(t.err(i, ParseErrorKind::InvalidValue(other.into()))),
                }
                i += 2;
            }
            Op::PrefixList {
                name: w[2].to_string(),
                entry,
            }
        }
        ["bgp", "community-list", ..] => {
            require(kind.is_l3_router())?;
            t.arity(5)?;
            if w[3] != "permit" {
                return Err(t.err(3, ParseErrorKind::InvalidValue(w[3].to_string())));
            }
            Op::CommunityList {
                name: w[2].to_string(),
                community: t.community(4)?,
            }
        }
        ["ip", "route", ..] => {
            require(kind == Router || kind == Host)?;
            t.arity(5)?;
            if w[3] != "via" {
                return Err(t.err(3, ParseErrorKind::InvalidValue(w[3].to_string())));
            }
            let prefix = if w[2] == "default" {
                Ipv4Net::default()
            } else {
                t.network(2)?
            };
            Op::StaticRoute {
                prefix,
                via: t.addr(4)?,
            }
        }
        ["vlan", ..] => {
            require(kind == Switch)?;
            t.arity(2)?;
            let v: u16 = t.num(1)?;
            if v == 0 || v > 4094 {
                return Err(t.err(1, ParseErrorKind::InvalidValue(w[1].to_string())));
            }
            Op::Vlan(v)
        }
        ["spanning-tree", "priority", ..] => {
            require(kind == Switch)?;
            t.arity(3)?;
            Op::StpPriority(t.num(2)?)
        }
        // sub-mode commands typed in the wrong mode
        ["ip", "address", ..]
        | ["shutdown", ..]
        | ["no", "shutdown", ..]
        | ["network", ..]
        | ["neighbor", ..]
        | ["bgp", "router-id", ..]
        | ["match", ..]
        | ["set", ..] => {
            return Err(t.err(0, ParseErrorKind::WrongMode(mode.to_string())));
        }
        [verb, ..] if UNSUPPORTED.contains(verb) => {
            return Err(t.err(0, ParseErrorKind::Unsupported));
        }
        _ => return Err(t.err(0, ParseErrorKind::UnknownVerb)),
    };
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(kind: DeviceKind, line: &str, mode: &Mode) -> Op {
        parse_command_line(kind, line, mode).unwrap().unwrap().op
    }

    #[test]
    fn interface_then_address() {
        let c = parse_command_line(DeviceKind::Router, "interface lo", &Mode::Top)
            .unwrap()
            .unwrap();
        assert_eq!(c.op, Op::Interface("lo".into()));
        let m = c.next_mode();
        let c2 = parse_command_line(DeviceKind::Router, "ip address 3.150.0.1/32", &m)
            .unwrap()
            .unwrap();
        assert_eq!(c2.context, Mode::Interface("lo".into()));
        assert_eq!(c2.op, Op::IpAddress("3.150.0.1/32".parse().unwrap()));
    }

    #[test]
    fn neighbor_route_map() {
        let op = parse(
            DeviceKind::Router,
            "neighbor 179.3.4.2 route-map LP_IN in",
            &Mode::RouterBgp,
        );
        assert_eq!(
            op,
            Op::NeighborRouteMap {
                addr: "179.3.4.2".parse().unwrap(),
                map: "LP_IN".into(),
                dir: Direction::In
            }
        );
    }

    #[test]
    fn switch_priority() {
        let op = parse(DeviceKind::Switch, "spanning-tree priority 4096", &Mode::Top);
        assert_eq!(op, Op::StpPriority(4096));
    }

    #[test]
    fn error_columns() {
        let e = parse_command_line(DeviceKind::Router, "ip address 1.2.3/24", &Mode::Interface("x".into()))
            .unwrap_err();
        assert_eq!(e.column, 12);
        assert!(matches!(e.kind, ParseErrorKind::MalformedAddress(_)));

        let e = parse_command_line(DeviceKind::Router, "  frobnicate now", &Mode::Top).unwrap_err();
        assert_eq!(e, ParseError { column: 3, kind: ParseErrorKind::UnknownVerb });

        let e = parse_command_line(DeviceKind::Router, "router bgp", &Mode::Top).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Arity);
        assert_eq!(e.column, 11);
    }

    #[test]
    fn wrong_device_and_mode() {
        let e = parse_command_line(DeviceKind::Switch, "router bgp 3", &Mode::Top).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::WrongDevice(DeviceKind::Switch));
        let e = parse_command_line(DeviceKind::Router, "set metric 5", &Mode::Top).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::WrongMode(_)));
    }

    #[test]
    fn unsupported_is_warning() {
        let e = parse_command_line(DeviceKind::Router, "hostname foo", &Mode::Top).unwrap_err();
        assert!(e.is_warning());
    }

    #[test]
    fn global_command_leaves_sub_mode() {
        let c = parse_command_line(
            DeviceKind::Router,
            "ip prefix-list OWN permit 3.0.0.0/8 le 24",
            &Mode::RouterBgp,
        )
        .unwrap()
        .unwrap();
        assert_eq!(c.next_mode(), Mode::Top);
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(
            parse_command_line(DeviceKind::Router, " ! note", &Mode::Top).unwrap(),
            None
        );
    }

    #[test]
    fn canonical_text() {
        for line in [
            "ip prefix-list P permit 3.0.0.0/8 le 24 ge 16",
            "set community 3:10 additive",
            "ip route default via 3.101.0.2",
            "network 3.0.0.0/8 area 0",
        ] {
            let mode = if line.starts_with("set") {
                Mode::RouteMap { name: "M".into(), seq: 10 }
            } else if line.starts_with("network") {
                Mode::RouterOspf
            } else {
                Mode::Top
            };
            let kind = if line.starts_with("ip route") {
                DeviceKind::Host
            } else {
                DeviceKind::Router
            };
            assert_eq!(parse(kind, line, &mode).to_string(), line);
        }
    }
}
