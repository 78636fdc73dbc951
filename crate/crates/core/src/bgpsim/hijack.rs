use ipnet::Ipv4Net;
use serde::Serialize;
use thiserror::Error;

use crate::topo::{AddressPlan, Asn, Network};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BgpError {
    #[error("unknown AS {0}")]
    UnknownAs(Asn),
    #[error("AS {0} has no router running BGP")]
    NoBgp(Asn),
}

/// Ground truth of an injected hijack.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hijack {
    pub attacker: Asn,
    pub victim_prefix: Ipv4Net,
    pub announced: Vec<Ipv4Net>,
    pub more_specific: bool,
}

fn bgp_routers(net: &Network, asn: Asn) -> Result<Vec<String>, BgpError> {
    if net.spec.as_spec(asn).is_none() {
        return Err(BgpError::UnknownAs(asn));
    }
    let routers: Vec<String> = net
        .routers_of(asn)
        .iter()
        .filter(|r| net.device(asn, r).is_some_and(|d| d.config.bgp.is_some()))
        .cloned()
        .collect();
    if routers.is_empty() {
        return Err(BgpError::NoBgp(asn));
    }
    Ok(routers)
}

/// Add `network <prefix>` on every BGP router of the AS. Returns warnings.
pub fn originate_prefix(net: &mut Network, asn: Asn, prefix: Ipv4Net) -> Result<Vec<String>, BgpError> {
    let routers = bgp_routers(net, asn)?;
    let prefix = prefix.trunc();
    let mut warnings = Vec::new();
    if !AddressPlan::as_prefix(asn).contains(&prefix) {
        warnings.push(format!("AS {asn} originates {prefix} outside its own {}", AddressPlan::as_prefix(asn)));
    }
    for r in routers {
        let d = net.device_mut(asn, &r).unwrap();
        d.config.bgp.as_mut().unwrap().networks.insert(prefix);
    }
    Ok(warnings)
}

/// Remove `network <prefix>` from every router of the AS.
pub fn withdraw_prefix(net: &mut Network, asn: Asn, prefix: Ipv4Net) -> Result<(), BgpError> {
    let routers = bgp_routers(net, asn)?;
    for r in routers {
        let d = net.device_mut(asn, &r).unwrap();
        d.config.bgp.as_mut().unwrap().networks.remove(&prefix.trunc());
    }
    net.hijacks
        .retain(|h| !(h.attacker == asn && h.announced.contains(&prefix.trunc())));
    Ok(())
}

/// The attacker originates the victim prefix, or its two halves.
pub fn inject_hijack(
    net: &mut Network,
    attacker: Asn,
    victim_prefix: Ipv4Net,
    more_specific: bool,
) -> Result<Hijack, BgpError> {
    let victim_prefix = victim_prefix.trunc();
    let announced: Vec<Ipv4Net> = if more_specific && victim_prefix.prefix_len() < 32 {
        victim_prefix
            .subnets(victim_prefix.prefix_len() + 1)
            .unwrap()
            .collect()
    } else {
        vec![victim_prefix]
    };
    bgp_routers(net, attacker)?;
    for p in &announced {
        originate_prefix(net, attacker, *p)?;
    }
    let h = Hijack {
        attacker,
        victim_prefix,
        announced,
        more_specific,
    };
    net.hijacks.push(h.clone());
    Ok(h)
}
