//! Link state and routing for transfers.
//!
//! Routes follow the hierarchy: up the parent chain from the source, across a
//! direct inter-RAC link when one exists (otherwise through the CAC), then
//! down to the destination. Each link serializes transfers FIFO.

use std::collections::BTreeMap;

use crate::model::{LinkClass, Topology};

#[derive(Debug, Clone)]
pub struct LinkState {
    pub class: LinkClass,
    pub bandwidth: f64,
    pub latency: f64,
    /// When the link finishes serializing everything queued so far.
    pub busy_until: f64,
    /// Bytes of completed transfers that crossed this link.
    pub bytes: u64,
    pub transfers: u64,
}

#[derive(Debug)]
pub struct Network {
    links: Vec<LinkState>,
    by_pair: BTreeMap<(u32, u32), u32>,
    /// Station index → parent station index (None for the CAC).
    parent: Vec<Option<u32>>,
}

impl Network {
    /// Build from a validated topology and its station-id → index mapping.
    pub fn build(topology: &Topology, station_index: &BTreeMap<String, u32>) -> Self {
        let mut links = Vec::new();
        let mut by_pair = BTreeMap::new();
        for link in &topology.links {
            let a = station_index[&link.endpoint_a];
            let b = station_index[&link.endpoint_b];
            let key = (a.min(b), a.max(b));
            by_pair.insert(key, links.len() as u32);
            links.push(LinkState {
                class: link.class,
                bandwidth: link.bandwidth as f64,
                latency: link.latency,
                busy_until: 0.0,
                bytes: 0,
                transfers: 0,
            });
        }
        let mut parent = vec![None; topology.stations.len()];
        for s in &topology.stations {
            if let Some(pid) = &s.parent_id {
                parent[station_index[&s.station_id] as usize] = Some(station_index[pid]);
            }
        }
        Network {
            links,
            by_pair,
            parent,
        }
    }

    pub fn link(&self, idx: u32) -> &LinkState {
        &self.links[idx as usize]
    }

    pub fn link_mut(&mut self, idx: u32) -> &mut LinkState {
        &mut self.links[idx as usize]
    }

    pub fn links(&self) -> &[LinkState] {
        &self.links
    }

    fn link_between(&self, a: u32, b: u32) -> Option<u32> {
        self.by_pair.get(&(a.min(b), a.max(b))).copied()
    }

    /// Station itself followed by its ancestors up to the root.
    fn chain(&self, mut station: u32) -> Vec<u32> {
        let mut chain = vec![station];
        while let Some(p) = self.parent[station as usize] {
            chain.push(p);
            station = p;
        }
        chain
    }

    /// Link sequence from `source` to `dest`; empty for a self transfer.
    ///
    /// Tree path through the lowest common ancestor, except that cross-region
    /// routes take a direct inter-RAC link when the topology has one.
    pub fn route(&self, source: u32, dest: u32) -> Option<Vec<u32>> {
        if source == dest {
            return Some(Vec::new());
        }
        let up = self.chain(source);
        let down = self.chain(dest);

        // Direct inter-RAC shortcut: the last station below the root on each
        // chain is the home RAC (when the chain reaches the CAC through one).
        if up.len() >= 2 && down.len() >= 2 {
            let rac_s = up[up.len() - 2];
            let rac_d = down[down.len() - 2];
            if rac_s != rac_d {
                if let Some(direct) = self.link_between(rac_s, rac_d) {
                    let mut path = Vec::new();
                    let up_rac = up.iter().position(|&s| s == rac_s).expect("on chain");
                    for w in up[..=up_rac].windows(2) {
                        path.push(self.link_between(w[0], w[1])?);
                    }
                    path.push(direct);
                    let down_rac = down.iter().position(|&s| s == rac_d).expect("on chain");
                    for w in down[..=down_rac].windows(2) {
                        path.push(self.link_between(w[0], w[1])?);
                    }
                    // The downward half was collected bottom-up.
                    let upward_len = up_rac + 1;
                    path[upward_len..].reverse();
                    return Some(path);
                }
            }
        }

        // Tree path via the lowest common ancestor.
        let lca = *up.iter().find(|s| down.contains(s))?;
        let mut path = Vec::new();
        for w in up
            .iter()
            .take_while(|&&s| s != lca)
            .copied()
            .chain([lca])
            .collect::<Vec<_>>()
            .windows(2)
        {
            path.push(self.link_between(w[0], w[1])?);
        }
        let down_to_lca: Vec<u32> = down
            .iter()
            .take_while(|&&s| s != lca)
            .copied()
            .chain([lca])
            .collect();
        let upward_len = path.len();
        for w in down_to_lca.windows(2) {
            path.push(self.link_between(w[0], w[1])?);
        }
        path[upward_len..].reverse();
        Some(path)
    }

    /// Send `size` bytes along `path` starting at `now`: advances each link's
    /// FIFO queue and returns the arrival time.
    pub fn schedule_transfer(&mut self, path: &[u32], size: u64, now: f64) -> f64 {
        let mut t = now;
        for &idx in path {
            let link = &mut self.links[idx as usize];
            if link.busy_until > t {
                t = link.busy_until; // queue drain
            }
            let serialize = size as f64 / link.bandwidth;
            link.busy_until = t + serialize;
            t += serialize + link.latency;
        }
        t
    }

    /// Account a completed transfer's bytes on every link it crossed.
    pub fn record_completion(&mut self, path: &[u32], size: u64) -> [u32; 3] {
        let mut crossings = [0u32; 3];
        for &idx in path {
            let link = &mut self.links[idx as usize];
            link.bytes += size;
            link.transfers += 1;
            crossings[link.class as usize] += 1;
        }
        crossings
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Station, StationKind, Topology};

    fn station(id: &str, kind: StationKind, region: &str, parent: Option<&str>) -> Station {
        Station {
            station_id: id.to_string(),
            kind,
            region_id: region.to_string(),
            disk_capacity: 0,
            tape_capacity: 0,
            cpu_power: 0.0,
            parent_id: parent.map(str::to_string),
        }
    }

    /// cac; region a: rac-a → iac-a1 → das-a1; region b: rac-b; direct rac-a ↔ rac-b.
    fn build() -> (Network, BTreeMap<String, u32>) {
        let stations = vec![
            station("cac", StationKind::Cac, "hub", None),
            station("rac-a", StationKind::Rac, "a", Some("cac")),
            station("rac-b", StationKind::Rac, "b", Some("cac")),
            station("iac-a1", StationKind::Iac, "a", Some("rac-a")),
            station("das-a1", StationKind::Das, "a", Some("iac-a1")),
        ];
        let links = vec![
            ("cac".into(), "rac-a".into(), 100_000_000, 0.0),
            ("cac".into(), "rac-b".into(), 100_000_000, 0.0),
            ("rac-a".into(), "rac-b".into(), 50_000_000, 0.0),
            ("rac-a".into(), "iac-a1".into(), 100_000_000, 0.0),
            ("iac-a1".into(), "das-a1".into(), 100_000_000, 0.0),
        ];
        let topo = Topology::assemble(stations, links);
        let index: BTreeMap<String, u32> = topo
            .stations
            .iter()
            .enumerate()
            .map(|(i, s)| (s.station_id.clone(), i as u32))
            .collect();
        let net = Network::build(&topo, &index);
        (net, index)
    }

    #[test]
    fn routes_within_region_follow_tree() {
        let (net, ix) = build();
        let path = net.route(ix["rac-a"], ix["das-a1"]).unwrap();
        assert_eq!(path.len(), 2);
        assert!(path
            .iter()
            .all(|&l| net.link(l).class == LinkClass::IntraRegion));
    }

    #[test]
    fn cross_region_takes_direct_inter_rac_link() {
        let (net, ix) = build();
        let path = net.route(ix["das-a1"], ix["rac-b"]).unwrap();
        let classes: Vec<LinkClass> = path.iter().map(|&l| net.link(l).class).collect();
        assert_eq!(
            classes,
            vec![
                LinkClass::IntraRegion,
                LinkClass::IntraRegion,
                LinkClass::InterRac
            ]
        );
    }

    #[test]
    fn cac_routes_down_the_chain() {
        let (net, ix) = build();
        let path = net.route(ix["cac"], ix["das-a1"]).unwrap();
        let classes: Vec<LinkClass> = path.iter().map(|&l| net.link(l).class).collect();
        assert_eq!(
            classes,
            vec![
                LinkClass::CacToRac,
                LinkClass::IntraRegion,
                LinkClass::IntraRegion
            ]
        );
    }

    #[test]
    fn self_route_is_empty() {
        let (net, ix) = build();
        assert_eq!(
            net.route(ix["rac-a"], ix["rac-a"]).unwrap(),
            Vec::<u32>::new()
        );
    }

    #[test]
    fn single_link_transfer_time() {
        let (mut net, ix) = build();
        let path = net.route(ix["cac"], ix["rac-a"]).unwrap();
        // 1 GB over 100 MB/s, idle, zero latency → 10 s.
        let eta = net.schedule_transfer(&path, 1_000_000_000, 0.0);
        assert_eq!(eta, 10.0);
    }

    #[test]
    fn fifo_serialization_on_shared_link() {
        let (mut net, ix) = build();
        let path = net.route(ix["cac"], ix["rac-a"]).unwrap();
        let first = net.schedule_transfer(&path, 1_000_000_000, 0.0);
        let second = net.schedule_transfer(&path, 1_000_000_000, 0.0);
        assert_eq!((first, second), (10.0, 20.0));
    }

    #[test]
    fn completion_accounting_counts_each_crossing() {
        let (mut net, ix) = build();
        let path = net.route(ix["cac"], ix["das-a1"]).unwrap();
        let crossings = net.record_completion(&path, 500);
        assert_eq!(crossings[LinkClass::CacToRac as usize], 1);
        assert_eq!(crossings[LinkClass::IntraRegion as usize], 2);
        let total: u64 = net.links().iter().map(|l| l.bytes).sum();
        assert_eq!(total, 1500);
    }
}
