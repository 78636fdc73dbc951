//! Topologies: file format, validation, generation, addressing and the
//! instantiated network of devices.

mod address;
mod generate;
mod network;
mod parse;
mod reference;
mod spec;
mod validate;

pub use address::{
    allocate_addresses, ifname, AddressPlan, AsAddresses, IfaceKey, INTER_AS_OCTET, IXP_OCTET,
    ROUTE_SERVER_HOST,
};
pub use generate::{
    default_l2_template, default_l3_template, generate_reference_topology,
    DEFAULT_BANDWIDTH_BPS, DEFAULT_BRIDGE_PRIORITY, DEFAULT_INTER_AS_DELAY_US,
    DEFAULT_INTRA_DELAY_US, DEFAULT_IXP_DELAY_US, DEFAULT_VLANS,
};
pub use network::{
    instantiate, Device, DeviceId, Endpoint, LinkError, Medium, Network, Segment,
};
pub use parse::{parse_topology_spec, render_topology_spec};
pub use reference::{
    generate_reference_config, reference_config_phases, ConfigScripts, ReferencePolicy,
};
pub use spec::*;
pub use validate::{validate, Violation, MAX_INTRA_LINKS, MAX_ROUTERS_PER_AS, MAX_VLANS};

pub(crate) use validate::UnionFind;

use thiserror::Error;

/// The 20-AS, two-region topology shipped with the crate.
pub const DEFAULT_TOPOLOGY: &str = include_str!("../../data/default-20as.topo");

/// Device name of the route server inside an IXP.
pub const ROUTE_SERVER_NAME: &str = "RS";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopoError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{}{violation}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Invalid {
        line: Option<usize>,
        violation: Violation,
    },
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error("AS number {0} outside the address plan (1..=126)")]
    AsnOutOfRange(Asn),
    #[error("unknown AS or IXP {0}")]
    UnknownAsn(Asn),
}
