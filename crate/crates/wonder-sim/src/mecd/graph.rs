//! Shared routing primitives over a topology snapshot.
//!
//! The element graph is undirected: every explicit link joins two elements
//! in both directions, and all elements of one EDC form an implicit full
//! mesh with the intra-EDC hop delay. Forwarding follows minimum-delay
//! next hops with the lowest element id breaking equal-cost ties; path
//! computation and anycast resolution reuse the same distances so the
//! controller and the data plane never disagree.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use crate::mecd::Topology;
use crate::time::Micros;

/// Which links participate in the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkFilter {
    /// Administratively-up links only: the live forwarding graph.
    AdminUp,
    /// Live links plus standby backups: the graph available to protection.
    WithStandbyBackups,
}

/// One usable adjacency out of an element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    pub to: String,
    pub delay_us: Micros,
    /// Explicit link id; `None` for intra-EDC mesh hops.
    pub link_id: Option<String>,
}

pub struct GraphView<'a> {
    topo: &'a Topology,
    filter: LinkFilter,
}

impl<'a> GraphView<'a> {
    pub fn admin_up(topo: &'a Topology) -> Self {
        GraphView { topo, filter: LinkFilter::AdminUp }
    }

    pub fn with_standby_backups(topo: &'a Topology) -> Self {
        GraphView { topo, filter: LinkFilter::WithStandbyBackups }
    }

    pub fn topology(&self) -> &Topology {
        self.topo
    }

    fn link_usable(&self, link: &crate::mecd::Link) -> bool {
        match self.filter {
            LinkFilter::AdminUp => link.admin_up,
            LinkFilter::WithStandbyBackups => link.admin_up || link.backup_of.is_some(),
        }
    }

    /// Neighbors of an element, sorted by element id. When both a mesh hop
    /// and an explicit link join the same pair the cheaper one wins (the
    /// mesh on ties, so intra-EDC hops cannot be failed away).
    pub fn neighbors(&self, element_id: &str) -> Vec<Adjacency> {
        let mut best: BTreeMap<String, Adjacency> = BTreeMap::new();
        let mut consider = |adj: Adjacency| match best.get(&adj.to) {
            Some(existing) if existing.delay_us <= adj.delay_us => {}
            _ => {
                best.insert(adj.to.clone(), adj);
            }
        };

        if let Some(edc_id) = self.topo.edc_of(element_id) {
            let edc = self.topo.edcs.iter().find(|e| e.edc_id == edc_id).unwrap();
            for el in &edc.elements {
                if el.element_id != element_id {
                    consider(Adjacency {
                        to: el.element_id.clone(),
                        delay_us: self.topo.intra_edc_delay_us,
                        link_id: None,
                    });
                }
            }
        }
        for link in &self.topo.links {
            if !self.link_usable(link) {
                continue;
            }
            let other = if link.from == element_id {
                Some(&link.to)
            } else if link.to == element_id {
                Some(&link.from)
            } else {
                None
            };
            if let Some(other) = other {
                consider(Adjacency {
                    to: other.clone(),
                    delay_us: link.delay_us,
                    link_id: Some(link.id.clone()),
                });
            }
        }
        best.into_values().collect()
    }

    /// Minimum one-way delay from every element to `target` (Dijkstra; the
    /// graph is undirected so this doubles as distance from `target`).
    pub fn dist_to(&self, target: &str) -> BTreeMap<String, Micros> {
        let mut dist: BTreeMap<String, Micros> = BTreeMap::new();
        let mut heap: BinaryHeap<std::cmp::Reverse<(Micros, String)>> = BinaryHeap::new();
        dist.insert(target.to_string(), 0);
        heap.push(std::cmp::Reverse((0, target.to_string())));
        while let Some(std::cmp::Reverse((d, node))) = heap.pop() {
            if dist.get(&node).copied() != Some(d) {
                continue;
            }
            for adj in self.neighbors(&node) {
                let nd = d + adj.delay_us;
                if dist.get(&adj.to).map_or(true, |&old| nd < old) {
                    dist.insert(adj.to.clone(), nd);
                    heap.push(std::cmp::Reverse((nd, adj.to)));
                }
            }
        }
        dist
    }

    /// Next hop from `from` toward `target` under min-delay forwarding with
    /// the lowest-element-id tie break.
    pub fn greedy_next(
        &self,
        from: &str,
        dist: &BTreeMap<String, Micros>,
    ) -> Option<Adjacency> {
        let mut best: Option<(Micros, Adjacency)> = None;
        for adj in self.neighbors(from) {
            let Some(&rest) = dist.get(&adj.to) else { continue };
            let total = adj.delay_us + rest;
            match &best {
                Some((bt, badj)) if (*bt, badj.to.as_str()) <= (total, adj.to.as_str()) => {}
                _ => best = Some((total, adj)),
            }
        }
        best.map(|(_, adj)| adj)
    }

    /// The element sequence realized by per-hop min-delay forwarding from
    /// `from` to `to`, with the accumulated one-way delay. `None` when
    /// unreachable.
    pub fn greedy_route(&self, from: &str, to: &str) -> Option<(Vec<String>, Micros)> {
        if from == to {
            return Some((vec![from.to_string()], 0));
        }
        let dist = self.dist_to(to);
        dist.get(from)?;
        let mut route = vec![from.to_string()];
        let mut total = 0;
        let mut here = from.to_string();
        // Bounded by the element count: distances strictly decrease except
        // on zero-delay plateaus, which the visited check breaks.
        let mut visited: BTreeSet<String> = BTreeSet::new();
        visited.insert(here.clone());
        while here != to {
            let next = self.greedy_next(&here, &dist)?;
            if !visited.insert(next.to.clone()) {
                return None;
            }
            total += next.delay_us;
            route.push(next.to.clone());
            here = next.to;
        }
        Some((route, total))
    }

    /// Every element reachable from `from`, including itself.
    pub fn reachable_set(&self, from: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from.to_string()];
        while let Some(node) = stack.pop() {
            if !seen.insert(node.clone()) {
                continue;
            }
            for adj in self.neighbors(&node) {
                if !seen.contains(&adj.to) {
                    stack.push(adj.to);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::reference_topology;

    #[test]
    fn intra_edc_hops_are_direct() {
        let topo = reference_topology();
        let g = GraphView::admin_up(&topo);
        let (route, delay) = g.greedy_route("cu-1", "ec-1").unwrap();
        assert_eq!(route, vec!["cu-1", "ec-1"]);
        assert_eq!(delay, 50);
    }

    #[test]
    fn cross_edc_route_uses_fabric_routers() {
        let topo = reference_topology();
        let g = GraphView::admin_up(&topo);
        let (route, delay) = g.greedy_route("upf-2", "ec-5").unwrap();
        assert_eq!(route, vec!["upf-2", "fr-100", "fr-102", "ec-5"]);
        assert_eq!(delay, 50 + 2550 + 50);
    }

    #[test]
    fn down_links_are_invisible() {
        let mut topo = reference_topology();
        topo.set_link_admin("l-100-102", false).unwrap();
        let g = GraphView::admin_up(&topo);
        let (route, _) = g.greedy_route("upf-2", "ec-5").unwrap();
        assert_ne!(route[1..route.len() - 1], ["fr-100", "fr-102"]);
    }
}
