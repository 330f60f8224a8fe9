//! Segment identifier registry: the controller-side inventory built from
//! element registration, indexed by EDC, element type, SID and hosted
//! application SIDs.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::mecd::graph::GraphView;
use crate::mecd::{ElementRecord, ElementType, MecdError, SegmentId, SidKind, Topology};

/// Registry of every registered element, with lookup indexes.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SidRegistry {
    elements: BTreeMap<String, ElementRecord>,
    by_sid: BTreeMap<SegmentId, BTreeSet<String>>,
    by_edc: BTreeMap<String, BTreeSet<String>>,
    by_app: BTreeMap<SegmentId, BTreeSet<String>>,
}

impl SidRegistry {
    /// Builds a registry by registering every element of the topology.
    pub fn from_topology(topo: &Topology) -> Result<SidRegistry, MecdError> {
        let mut reg = SidRegistry::default();
        let edcs = topo.edc_ids();
        for el in topo.elements() {
            reg.register(&edcs, el.clone())?;
        }
        Ok(reg)
    }

    /// Registers one element. Idempotent for identical records; a non-anycast
    /// SID already bound to a different element is rejected.
    pub fn register(
        &mut self,
        known_edcs: &BTreeSet<String>,
        record: ElementRecord,
    ) -> Result<(), MecdError> {
        if !known_edcs.contains(&record.edc_id) {
            return Err(MecdError::UnknownEdc(record.edc_id.clone()));
        }
        if let Some(existing) = self.elements.get(&record.element_id) {
            if *existing == record {
                return Ok(()); // identical re-registration
            }
        }
        if record.sid.kind != SidKind::AnycastSid {
            if let Some(holders) = self.by_sid.get(&record.sid) {
                if holders.iter().any(|h| h != &record.element_id) {
                    let holder = holders.iter().next().unwrap().clone();
                    return Err(MecdError::DuplicateSid(record.sid.value, holder));
                }
            }
        }
        for app in &record.app_ids {
            if app.kind != SidKind::AnycastSid {
                if let Some(holders) = self.by_app.get(app) {
                    if holders.iter().any(|h| h != &record.element_id) {
                        let holder = holders.iter().next().unwrap().clone();
                        return Err(MecdError::DuplicateSid(app.value, holder));
                    }
                }
            }
        }

        // Replacing a record re-homes its index entries.
        if let Some(old) = self.elements.remove(&record.element_id) {
            self.unindex(&old);
        }
        self.index(&record);
        self.elements.insert(record.element_id.clone(), record);
        Ok(())
    }

    fn index(&mut self, record: &ElementRecord) {
        self.by_sid
            .entry(record.sid)
            .or_default()
            .insert(record.element_id.clone());
        self.by_edc
            .entry(record.edc_id.clone())
            .or_default()
            .insert(record.element_id.clone());
        for app in &record.app_ids {
            self.by_app.entry(*app).or_default().insert(record.element_id.clone());
        }
    }

    fn unindex(&mut self, record: &ElementRecord) {
        if let Some(set) = self.by_sid.get_mut(&record.sid) {
            set.remove(&record.element_id);
        }
        if let Some(set) = self.by_edc.get_mut(&record.edc_id) {
            set.remove(&record.element_id);
        }
        for app in &record.app_ids {
            if let Some(set) = self.by_app.get_mut(app) {
                set.remove(&record.element_id);
            }
        }
    }

    /// Binds an application SID to an edge-compute element at activation
    /// time, so later requests naming the SID resolve to the workload host.
    pub fn bind_app(&mut self, element_id: &str, app: SegmentId) -> Result<(), MecdError> {
        let record = self
            .elements
            .get_mut(element_id)
            .ok_or_else(|| MecdError::UnknownElement(element_id.to_string()))?;
        record.app_ids.insert(app);
        self.by_app.entry(app).or_default().insert(element_id.to_string());
        Ok(())
    }

    pub fn element(&self, id: &str) -> Option<&ElementRecord> {
        self.elements.get(id)
    }

    pub fn elements(&self) -> impl Iterator<Item = &ElementRecord> {
        self.elements.values()
    }

    pub fn elements_in_edc(&self, edc_id: &str) -> Vec<&ElementRecord> {
        self.by_edc
            .get(edc_id)
            .map(|set| set.iter().filter_map(|id| self.elements.get(id)).collect())
            .unwrap_or_default()
    }

    pub fn elements_of_type(&self, t: ElementType) -> Vec<&ElementRecord> {
        self.elements.values().filter(|e| e.element_type == t).collect()
    }

    /// All elements bound to a SID, either as their node/prefix identity or
    /// as a hosted application SID.
    pub fn holders(&self, sid: SegmentId) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        if let Some(set) = self.by_sid.get(&sid) {
            out.extend(set.iter().cloned());
        }
        if let Some(set) = self.by_app.get(&sid) {
            out.extend(set.iter().cloned());
        }
        out
    }

    /// Resolves a SID to the element it identifies. Unique kinds resolve to
    /// their single binding; anycast resolves to the live instance with the
    /// minimal path delay from `from_element`, ties broken by the smallest
    /// element id.
    pub fn resolve_sid(
        &self,
        topo: &Topology,
        sid: SegmentId,
        from_element: &str,
    ) -> Result<String, MecdError> {
        let holders = self.holders(sid);
        if holders.is_empty() {
            return Err(MecdError::UnknownSid(sid.value));
        }
        if sid.kind != SidKind::AnycastSid {
            return Ok(holders.iter().next().unwrap().clone());
        }
        let g = GraphView::admin_up(topo);
        let dist = g.dist_to(from_element);
        let mut best: Option<(u64, &String)> = None;
        for h in &holders {
            let Some(&d) = dist.get(h) else { continue };
            match best {
                Some((bd, bh)) if (bd, bh.as_str()) <= (d, h.as_str()) => {}
                _ => best = Some((d, h)),
            }
        }
        match best {
            Some((_, h)) => Ok(h.clone()),
            None => Err(MecdError::NoLiveInstance(sid.value)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{anycast_topology, element, reference_topology};

    #[test]
    fn register_then_resolve_round_trips() {
        let topo = reference_topology();
        let reg = SidRegistry::from_topology(&topo).unwrap();
        let resolved = reg
            .resolve_sid(&topo, SegmentId::node(1210), "ec-5")
            .unwrap();
        assert_eq!(resolved, "cu-1");
        let rec = reg.element("cu-1").unwrap();
        assert_eq!(rec.element_type, ElementType::Cu);
        assert_eq!(rec.edc_id, "edc-1");
    }

    #[test]
    fn registration_is_idempotent() {
        let topo = reference_topology();
        let mut reg = SidRegistry::from_topology(&topo).unwrap();
        let snapshot = format!("{reg:?}");
        let rec = reg.element("cu-1").unwrap().clone();
        reg.register(&topo.edc_ids(), rec).unwrap();
        assert_eq!(snapshot, format!("{reg:?}"));
    }

    #[test]
    fn duplicate_non_anycast_sid_is_rejected() {
        let topo = reference_topology();
        let mut reg = SidRegistry::from_topology(&topo).unwrap();
        let clash = element("cu-x", ElementType::Cu, 1210, "edc-2");
        let err = reg.register(&topo.edc_ids(), clash).unwrap_err();
        assert!(matches!(err, MecdError::DuplicateSid(1210, _)));
    }

    #[test]
    fn unknown_edc_is_rejected() {
        let topo = reference_topology();
        let mut reg = SidRegistry::from_topology(&topo).unwrap();
        let rec = element("cu-x", ElementType::Cu, 1290, "edc-9");
        let err = reg.register(&topo.edc_ids(), rec).unwrap_err();
        assert!(matches!(err, MecdError::UnknownEdc(_)));
    }

    #[test]
    fn anycast_sid_may_be_shared() {
        let topo = anycast_topology();
        let reg = SidRegistry::from_topology(&topo).unwrap();
        let holders = reg.holders(SegmentId::anycast(9000));
        assert_eq!(
            holders.into_iter().collect::<Vec<_>>(),
            vec!["ec-5a".to_string(), "ec-5b".to_string()]
        );
    }

    #[test]
    fn anycast_resolution_picks_nearest_live_instance() {
        let mut topo = anycast_topology();
        let reg = SidRegistry::from_topology(&topo).unwrap();
        // delay(cu-1 -> ec-5a) = 1.0 ms, delay(cu-1 -> ec-5b) = 2.5 ms
        let near = reg.resolve_sid(&topo, SegmentId::anycast(9000), "cu-1").unwrap();
        assert_eq!(near, "ec-5a");

        // With the only link to ec-5a down, the other instance wins.
        topo.set_link_admin("l-a", false).unwrap();
        let fallback = reg.resolve_sid(&topo, SegmentId::anycast(9000), "cu-1").unwrap();
        assert_eq!(fallback, "ec-5b");

        topo.set_link_admin("l-b", false).unwrap();
        let err = reg.resolve_sid(&topo, SegmentId::anycast(9000), "cu-1").unwrap_err();
        assert!(matches!(err, MecdError::NoLiveInstance(9000)));
    }
}
