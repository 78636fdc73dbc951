//! Forwarding tables and packet walks (ping, traceroute).

mod fib;
mod trace;

pub use fib::{build_fib, Fib, FibEntry, FibNextHop, RouteSource};
pub use trace::{
    owner_of, ping, trace, ForwardingTrace, PingFailure, PingResult, TraceHop, TraceOutcome,
    MAX_TTL,
};
