//! Reference topology generator.
//!
//! Every region holds two Tier1s (three when needed to keep the transit count
//! even), layers of two transit ASes, and two stubs:
//!
//! ```text
//!        T1 ===== T2            Tier1s, full mesh across all regions
//!        | \    / |
//!        A1 -- B1               layer 1: providers are the Tier1s
//!        | \    / |
//!        A2 -- B2               layer k+1: providers are layer k
//!          ...
//!        | \    / |
//!        S1     S2              stubs: providers are the last layer
//! ```
//!
//! `A_k -- B_k` is a peer link. Every transit therefore has two providers, two
//! customers and one peer. Regional IXP `r` joins the A-side transits of region
//! `r` with the B-side transits of region `r+1` (wrapping), and one central IXP
//! joins all Tier1s, so `regions` regions yield `regions + 1` IXPs.

use super::spec::*;
use super::TopoError;

pub const DEFAULT_INTRA_DELAY_US: u64 = 1000;
pub const DEFAULT_INTER_AS_DELAY_US: u64 = 5000;
pub const DEFAULT_IXP_DELAY_US: u64 = 2000;
pub const DEFAULT_BANDWIDTH_BPS: u64 = 1_000_000_000;
pub const DEFAULT_BRIDGE_PRIORITY: u32 = 32768;
pub const DEFAULT_VLANS: [u16; 3] = [10, 20, 30];

/// Eight routers in a ring with two chords.
pub fn default_l3_template() -> L3Template {
    let routers: Vec<String> = (1..=8).map(|i| format!("ROUTER{i}")).collect();
    let mut pairs: Vec<(usize, usize)> = (1..=8).map(|i| (i, i % 8 + 1)).collect();
    pairs.push((2, 7));
    pairs.push((3, 6));
    let links = pairs
        .into_iter()
        .map(|(a, b)| IntraLink {
            a: format!("ROUTER{a}"),
            b: format!("ROUTER{b}"),
            cost: 1,
            delay_us: DEFAULT_INTRA_DELAY_US,
        })
        .collect();
    L3Template {
        routers,
        links,
        hosts: true,
    }
}

/// Four switches in a ring, two hosts per switch spread over VLANs 10/20/30,
/// gateway on ROUTER1.
pub fn default_l2_template() -> L2Template {
    let switches: Vec<SwitchSpec> = (1..=4)
        .map(|i| SwitchSpec {
            name: format!("S{i}"),
            priority: DEFAULT_BRIDGE_PRIORITY,
        })
        .collect();
    let links = vec![
        ("S1".to_string(), "S2".to_string()),
        ("S2".to_string(), "S3".to_string()),
        ("S3".to_string(), "S4".to_string()),
        ("S4".to_string(), "S1".to_string()),
    ];
    let host_ports = (0..8)
        .map(|h| HostPort {
            switch: format!("S{}", h / 2 + 1),
            host: format!("HOST{}", h + 1),
            vlan: DEFAULT_VLANS[h % DEFAULT_VLANS.len()],
        })
        .collect();
    L2Template {
        switches,
        links,
        host_ports,
        gateway: ("S1".to_string(), "ROUTER1".to_string()),
        vlans: DEFAULT_VLANS.to_vec(),
    }
}

/// Per-AS counter spreading external connections over the routers.
struct RouterPicker {
    next: Vec<usize>,
    base: Asn,
    nrouters: usize,
}

impl RouterPicker {
    fn pick(&mut self, asn: Asn) -> String {
        let slot = &mut self.next[(asn - self.base) as usize];
        let r = *slot % self.nrouters + 1;
        *slot += 1;
        format!("ROUTER{r}")
    }
}

struct RegionLayout {
    tier1: Vec<Asn>,
    /// (A side, B side) per layer.
    layers: Vec<(Asn, Asn)>,
    stubs: Vec<Asn>,
}

fn layout(region: u32, per_region: u32) -> RegionLayout {
    let base = region * per_region;
    let n_tier1 = 2 + (per_region - 4) % 2;
    let n_transit = per_region - n_tier1 - 2;
    let tier1 = (1..=n_tier1).map(|i| base + i).collect();
    let layers = (0..n_transit / 2)
        .map(|k| (base + n_tier1 + 1 + 2 * k, base + n_tier1 + 2 + 2 * k))
        .collect();
    let stubs = (1..=2).map(|i| base + n_tier1 + n_transit + i).collect();
    RegionLayout {
        tier1,
        layers,
        stubs,
    }
}

/// Build the reference topology for `regions` regions of `ases_per_region` ASes.
pub fn generate_reference_topology(
    regions: u32,
    ases_per_region: u32,
) -> Result<TopologySpec, TopoError> {
    if regions < 1 || ases_per_region < 4 {
        return Err(TopoError::Parameters(format!(
            "need regions >= 1 and ases_per_region >= 4, got {regions} and {ases_per_region}"
        )));
    }
    let total = regions
        .checked_mul(ases_per_region)
        .filter(|&t| t <= MAX_ASN)
        .ok_or_else(|| {
            TopoError::Parameters(format!(
                "{regions} x {ases_per_region} ASes exceed the {MAX_ASN}-AS address plan"
            ))
        })?;

    let layouts: Vec<RegionLayout> = (0..regions).map(|r| layout(r, ases_per_region)).collect();
    let l3 = default_l3_template();
    let mut picker = RouterPicker {
        next: vec![0; total as usize],
        base: 1,
        nrouters: l3.routers.len(),
    };

    let mut spec = TopologySpec {
        regions: (1..=regions).map(|r| format!("REGION{r}")).collect(),
        ..Default::default()
    };
    for (r, lay) in layouts.iter().enumerate() {
        let region = format!("REGION{}", r + 1);
        let roles = lay
            .tier1
            .iter()
            .map(|&a| (a, AsRole::Tier1))
            .chain(
                lay.layers
                    .iter()
                    .flat_map(|&(a, b)| [(a, AsRole::Transit), (b, AsRole::Transit)]),
            )
            .chain(lay.stubs.iter().map(|&a| (a, AsRole::Stub)));
        for (asn, role) in roles {
            spec.ases.push(AsSpec {
                asn,
                role,
                region: region.clone(),
                l3: l3.clone(),
                l2: Some(default_l2_template()),
                auto_configured: role.auto_by_default(),
            });
        }
    }

    let link = |picker: &mut RouterPicker, a: Asn, b: Asn, rel: Relationship| InterAsLink {
        a: RouterRef::new(a, picker.pick(a)),
        b: RouterRef::new(b, picker.pick(b)),
        relationship: rel,
        delay_us: DEFAULT_INTER_AS_DELAY_US,
        bandwidth_bps: DEFAULT_BANDWIDTH_BPS,
        admin_up: true,
    };

    // provider -> customer links, top down
    for lay in &layouts {
        let mut above: (Asn, Asn) = (lay.tier1[0], lay.tier1[1]);
        let last_t1 = *lay.tier1.last().unwrap();
        for (k, &(a, b)) in lay.layers.iter().enumerate() {
            let b_providers = if k == 0 {
                (lay.tier1[lay.tier1.len() - 2], last_t1)
            } else {
                above
            };
            for p in [above.0, above.1] {
                spec.inter_as_links
                    .push(link(&mut picker, p, a, Relationship::AProviderOfB));
            }
            for p in [b_providers.0, b_providers.1] {
                spec.inter_as_links
                    .push(link(&mut picker, p, b, Relationship::AProviderOfB));
            }
            above = (a, b);
        }
        for &s in &lay.stubs {
            for p in [above.0, above.1] {
                spec.inter_as_links
                    .push(link(&mut picker, p, s, Relationship::AProviderOfB));
            }
        }
    }
    // peers inside each layer
    for lay in &layouts {
        for &(a, b) in &lay.layers {
            spec.inter_as_links
                .push(link(&mut picker, a, b, Relationship::Peer));
        }
    }
    // Tier1 full mesh, across regions as well
    let tier1s: Vec<Asn> = layouts.iter().flat_map(|l| l.tier1.iter().copied()).collect();
    for (i, &x) in tier1s.iter().enumerate() {
        for &y in &tier1s[i + 1..] {
            spec.inter_as_links
                .push(link(&mut picker, x, y, Relationship::Peer));
        }
    }

    // IXPs: central first, then one per region boundary
    let mut next_id = total + 1;
    spec.ixps.push(IxpSpec {
        id: next_id,
        members: tier1s
            .iter()
            .map(|&t| RouterRef::new(t, picker.pick(t)))
            .collect(),
        delay_us: DEFAULT_IXP_DELAY_US,
    });
    next_id += 1;
    let nreg = layouts.len();
    for r in 0..nreg {
        let next = &layouts[(r + 1) % nreg];
        let mut asns: Vec<Asn> = layouts[r].layers.iter().map(|&(a, _)| a).collect();
        for &(_, b) in &next.layers {
            if !asns.contains(&b) {
                asns.push(b);
            }
        }
        if asns.len() < 2 {
            continue;
        }
        spec.ixps.push(IxpSpec {
            id: next_id,
            members: asns
                .iter()
                .map(|&t| RouterRef::new(t, picker.pick(t)))
                .collect(),
            delay_us: DEFAULT_IXP_DELAY_US,
        });
        next_id += 1;
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topo::validate;

    #[test]
    fn sixty_as_counts() {
        let spec = generate_reference_topology(6, 10).unwrap();
        assert_eq!(spec.ases.len(), 60);
        assert_eq!(spec.ixps.len(), 7);
        assert!(validate(&spec).is_empty());
    }

    #[test]
    fn smallest_region_validates() {
        let spec = generate_reference_topology(1, 4).unwrap();
        assert_eq!(spec.ases.len(), 4);
        assert_eq!(validate(&spec), vec![]);
    }

    #[test]
    fn odd_region_size_uses_three_tier1s() {
        let spec = generate_reference_topology(1, 7).unwrap();
        let t1 = spec.ases.iter().filter(|a| a.role == AsRole::Tier1).count();
        assert_eq!(t1, 3);
        assert!(validate(&spec).is_empty());
    }

    #[test]
    fn shipped_default_matches_generator() {
        let rendered = crate::topo::render_topology_spec(&generate_reference_topology(2, 10).unwrap());
        if std::env::var_os("UPDATE_GOLDENS").is_some() {
            let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/default-20as.topo");
            std::fs::write(path, &rendered).unwrap();
        }
        assert_eq!(crate::topo::DEFAULT_TOPOLOGY, rendered);
        let spec = crate::topo::parse_topology_spec(crate::topo::DEFAULT_TOPOLOGY).unwrap();
        assert_eq!(spec.ases.len(), 20);
        let regions: std::collections::BTreeSet<_> = spec.ases.iter().map(|a| &a.region).collect();
        assert_eq!(regions.len(), 2);
    }

    #[test]
    fn below_minimum_rejected() {
        assert!(generate_reference_topology(0, 10).is_err());
        assert!(generate_reference_topology(2, 3).is_err());
        assert!(generate_reference_topology(13, 10).is_err());
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            generate_reference_topology(2, 10).unwrap(),
            generate_reference_topology(2, 10).unwrap()
        );
    }
}
