//! Interactive per-group session: `goto` a device of the bound AS, type
//! configuration lines, inspect with `show`, and recompute with `converge`.

use std::fmt::Write;

use thiserror::Error;

use crate::bgpsim::{converge, DEFAULT_MAX_ROUNDS};
use crate::confcli::{apply_command, parse_command_line, Mode, Op};
use crate::dataplane::{ping, trace};
use crate::monitor::{connectivity_matrix, looking_glass, LgView};
use crate::topo::{Asn, DeviceId, Network};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShellError {
    #[error("permission denied: {0} belongs to another AS")]
    PermissionDenied(String),
    #[error("no device {0} in this AS")]
    UnknownDevice(String),
    #[error("no device selected, use `goto <device>`")]
    NoDevice,
    #[error("{0}")]
    Config(String),
    #[error("usage: {0}")]
    Usage(&'static str),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Reply {
    pub output: String,
    /// The session ended.
    pub exit: bool,
}

impl Reply {
    fn text(output: impl Into<String>) -> Self {
        Self {
            output: output.into(),
            exit: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Session {
    pub asn: Asn,
    pub device: Option<String>,
    /// Configuration contexts entered on the current device, innermost last.
    pub modes: Vec<Mode>,
    /// Every mutation, as `<asn>.<device>: <line>` or `converge`.
    pub log: Vec<String>,
}

const HELP: &str = "\
goto <device>            enter a device of this AS
show ip bgp|ip route|spanning-tree|running-config
ping <addr> / traceroute <addr>
converge                 recompute routing
matrix                   this AS's row and column
exit                     leave the current context
<config line>            applied to the current device
";

impl Session {
    pub fn new(asn: Asn) -> Self {
        Self {
            asn,
            device: None,
            modes: Vec::new(),
            log: Vec::new(),
        }
    }

    pub fn prompt(&self) -> String {
        match (&self.device, self.modes.last()) {
            (None, _) => format!("as{}> ", self.asn),
            (Some(d), None) => format!("as{}:{d}# ", self.asn),
            (Some(d), Some(m)) => format!("as{}:{d}({m})# ", self.asn),
        }
    }

    fn mode(&self) -> Mode {
        self.modes.last().cloned().unwrap_or_default()
    }

    fn current(&self) -> Result<DeviceId, ShellError> {
        self.device
            .as_ref()
            .map(|d| DeviceId::new(self.asn, d.clone()))
            .ok_or(ShellError::NoDevice)
    }

    /// Resolve a device argument, refusing anything outside the bound AS.
    fn resolve(&self, net: &Network, words: &[&str]) -> Result<String, ShellError> {
        let (asn, name) = match words {
            [asn, name] => (asn.parse::<Asn>().map_err(|_| ShellError::Usage("goto [<asn>] <device>"))?, *name),
            [one] => match one.split_once('.') {
                Some((a, n)) if a.parse::<Asn>().is_ok() => (a.parse().unwrap(), n),
                _ => (self.asn, *one),
            },
            _ => return Err(ShellError::Usage("goto [<asn>] <device>")),
        };
        if asn != self.asn {
            return Err(ShellError::PermissionDenied(format!("{asn}.{name}")));
        }
        if net.device(asn, name).is_none() {
            return Err(ShellError::UnknownDevice(name.to_string()));
        }
        Ok(name.to_string())
    }

    /// Handle one input line.
    pub fn handle(&mut self, net: &mut Network, line: &str) -> Result<Reply, ShellError> {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            [] => Ok(Reply::default()),
            ["help"] | ["?"] => Ok(Reply::text(HELP)),
            ["goto", rest @ ..] => {
                let name = self.resolve(net, rest)?;
                self.device = Some(name);
                self.modes.clear();
                Ok(Reply::default())
            }
            ["exit"] | ["end"] => {
                if words[0] == "end" || self.modes.pop().is_none() {
                    if words[0] == "end" {
                        self.modes.clear();
                    } else if self.device.take().is_none() {
                        return Ok(Reply {
                            output: String::new(),
                            exit: true,
                        });
                    }
                }
                Ok(Reply::default())
            }
            ["show", rest @ ..] => {
                let view = match rest {
                    ["ip", "bgp"] => LgView::Bgp,
                    ["ip", "route"] => LgView::Route,
                    ["spanning-tree"] => LgView::SpanningTree,
                    ["running-config"] => LgView::RunningConfig,
                    _ => return Err(ShellError::Usage("show ip bgp|ip route|spanning-tree|running-config")),
                };
                let id = self.current()?;
                looking_glass(net, id.asn, &id.name, view)
                    .map(Reply::text)
                    .map_err(|e| ShellError::Config(e.to_string()))
            }
            ["ping", addr] | ["traceroute", addr] => {
                let id = self.current()?;
                let dst = addr
                    .parse()
                    .map_err(|_| ShellError::Usage("ping|traceroute <ipv4 address>"))?;
                Ok(Reply::text(if words[0] == "ping" {
                    ping(net, &id, dst).render()
                } else {
                    trace(net, &id, dst, 0).render()
                }))
            }
            ["converge"] => {
                let r = converge(net, DEFAULT_MAX_ROUNDS);
                self.log.push("converge".into());
                Ok(Reply::text(format!(
                    "{} after {} rounds, {} sessions established, {} idle\n",
                    if r.converged { "converged" } else { "NOT converged" },
                    r.rounds,
                    r.sessions_established,
                    r.sessions_idle
                )))
            }
            ["matrix"] => Ok(Reply::text(self.local_matrix(net))),
            _ => self.configure(net, line),
        }
    }

    fn configure(&mut self, net: &mut Network, line: &str) -> Result<Reply, ShellError> {
        let id = self.current()?;
        let dev = net.devices.get_mut(&id).ok_or(ShellError::NoDevice)?;
        let mode = self.mode();
        let cmd = match parse_command_line(dev.config.kind, line, &mode) {
            Ok(Some(c)) => c,
            Ok(None) => return Ok(Reply::default()),
            Err(e) if e.is_warning() => return Ok(Reply::text(format!("% warning: {e}\n"))),
            Err(e) => return Err(ShellError::Config(e.to_string())),
        };
        apply_command(&mut dev.config, &cmd).map_err(|e| ShellError::Config(e.to_string()))?;
        self.log.push(format!("{id}: {}", line.trim()));
        // Commands that open a context replace the current one; others keep it.
        let next = cmd.next_mode();
        if cmd.op == Op::Exit {
            self.modes.pop();
        } else if next != Mode::Top {
            self.modes.clear();
            self.modes.push(next);
        } else if cmd.context == Mode::Top {
            self.modes.clear();
        }
        Ok(Reply::default())
    }

    /// Outgoing row and incoming column of the bound AS.
    pub fn local_matrix(&self, net: &Network) -> String {
        let m = connectivity_matrix(net);
        let mut out = format!("round {}\n", m.round);
        let mark = |src, dst| match m.cell(src, dst) {
            Some(c) if c.is_green() => '#',
            Some(_) => '.',
            None => '?',
        };
        let _ = write!(out, "from {:>3}:", self.asn);
        for &d in &m.asns {
            let _ = write!(out, " {d}{}", mark(self.asn, d));
        }
        let _ = write!(out, "\nto   {:>3}:", self.asn);
        for &s in &m.asns {
            let _ = write!(out, " {s}{}", mark(s, self.asn));
        }
        out.push('\n');
        out
    }
}
