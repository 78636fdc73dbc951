//! A simulated mini-Internet for teaching inter-domain routing.
//!
//! Topologies are instantiated into devices with CLI-style configurations.
//! Converging the network derives spanning trees, OSPF tables, BGP RIBs and
//! forwarding tables, which ping, traceroute, the connectivity matrix and
//! the grader read.

pub mod bgpsim;
pub mod confcli;
pub mod dataplane;
pub mod grader;
pub mod igp;
pub mod l2sim;
pub mod monitor;
pub mod scenario;
pub mod shell;
pub mod sim;
pub mod topo;
