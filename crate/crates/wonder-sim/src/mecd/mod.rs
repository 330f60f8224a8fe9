//! Mobile Edge Computing Domain model: segment identifiers, edge data
//! centers and their elements, optical links, and the domain topology.
//!
//! A domain is a set of edge data centers (EDCs) stitched together by an
//! optical/packet fabric. Elements inside one EDC are implicitly connected
//! in a full mesh with a fixed per-hop delay; everything between EDCs is an
//! explicit [`Link`] carrying optical-derived delay, capacity and
//! protection attributes.

pub mod config;
pub mod graph;
pub mod registry;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::Micros;

pub use config::{load_topology, LoadMode};
pub use registry::SidRegistry;

/// Kind of a segment identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SidKind {
    /// Identifies a single forwarding element.
    NodeSid,
    /// Identifies a service prefix bound to one element.
    PrefixSid,
    /// Identifies a replicated service; may be bound to several elements.
    AnycastSid,
    /// Identifies an application workload hosted on edge compute.
    AppSid,
}

/// A routable segment identifier: the unit of all path expression.
///
/// The canonical form is a 32-bit value. When a scenario selects the SRv6
/// representation, the 128-bit form is derived deterministically from the
/// scenario prefix tag and the value (see [`SegmentId::v6_form`]), so two
/// identifiers with equal value and kind always share it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SegmentId {
    pub value: u32,
    pub kind: SidKind,
}

/// Default 32-bit prefix tag for the derived 128-bit form.
pub const DEFAULT_V6_PREFIX: u32 = 0xfd00_0000;

impl SegmentId {
    pub fn node(value: u32) -> Self {
        SegmentId { value, kind: SidKind::NodeSid }
    }

    pub fn app(value: u32) -> Self {
        SegmentId { value, kind: SidKind::AppSid }
    }

    pub fn anycast(value: u32) -> Self {
        SegmentId { value, kind: SidKind::AnycastSid }
    }

    /// Derived 128-bit form: prefix tag in the top 32 bits, the canonical
    /// value in the bottom 32, zero padding in between. Invertible.
    pub fn v6_form(&self, prefix_tag: u32) -> u128 {
        ((prefix_tag as u128) << 96) | self.value as u128
    }
}

/// Functional role of an element inside an EDC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementType {
    Cu,
    Upf,
    Ec,
    FabricRouter,
    OpticalNode,
}

impl ElementType {
    /// CU, UPF and fabric routers are the forwarding-capable elements and
    /// must carry a node SID.
    pub fn requires_node_sid(&self) -> bool {
        matches!(self, ElementType::Cu | ElementType::Upf | ElementType::FabricRouter)
    }
}

/// Registration record for one EDC element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementRecord {
    pub element_id: String,
    pub element_type: ElementType,
    pub sid: SegmentId,
    pub edc_id: String,
    /// Mobile network provider owning the element; "shared" when unscoped.
    pub provider_id: String,
    /// Application SIDs hosted on this element (edge compute only).
    pub app_ids: BTreeSet<SegmentId>,
    /// Workload slots available (edge compute only).
    pub ec_slots: u32,
}

/// One edge data center and its registered elements.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdcRecord {
    pub edc_id: String,
    pub elements: Vec<ElementRecord>,
}

impl EdcRecord {
    pub fn has_ec(&self) -> bool {
        self.elements.iter().any(|e| e.element_type == ElementType::Ec)
    }
}

/// An explicit (inter-EDC) link with optical-derived attributes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Link {
    pub id: String,
    pub from: String,
    pub to: String,
    pub delay_us: Micros,
    pub capacity_gbps: f64,
    pub protected: bool,
    /// Identifier of the primary link this one protects. Backup links start
    /// administratively down and are activated when restoration completes.
    pub backup_of: Option<String>,
    pub admin_up: bool,
    /// Residual bit error fraction of the span, in [0, 1].
    pub error_rate: f64,
}

impl Link {
    /// True when the link joins the given unordered element pair.
    pub fn joins(&self, a: &str, b: &str) -> bool {
        (self.from == a && self.to == b) || (self.from == b && self.to == a)
    }
}

/// The two-layer domain graph: EDCs with their elements plus fabric links.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Topology {
    pub edcs: Vec<EdcRecord>,
    pub links: Vec<Link>,
    /// One-way delay of any hop between two elements of the same EDC.
    pub intra_edc_delay_us: Micros,
}

/// Errors from topology and registry operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MecdError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid topology:\n{}", .0.join("\n"))]
    Validation(Vec<String>),
    #[error("sid {0} is already bound to element {1}")]
    DuplicateSid(u32, String),
    #[error("unknown edc {0}")]
    UnknownEdc(String),
    #[error("unknown sid {0}")]
    UnknownSid(u32),
    #[error("no live instance for anycast sid {0}")]
    NoLiveInstance(u32),
    #[error("unknown element {0}")]
    UnknownElement(String),
    #[error("unknown link {0}")]
    UnknownLink(String),
    #[error("protected link {0} has no provisioned backup")]
    NoBackup(String),
}

impl Topology {
    /// Looks up an element by id.
    pub fn element(&self, id: &str) -> Option<&ElementRecord> {
        self.edcs.iter().flat_map(|e| e.elements.iter()).find(|e| e.element_id == id)
    }

    pub fn element_or_err(&self, id: &str) -> Result<&ElementRecord, MecdError> {
        self.element(id).ok_or_else(|| MecdError::UnknownElement(id.to_string()))
    }

    /// EDC that hosts the given element.
    pub fn edc_of(&self, element_id: &str) -> Option<&str> {
        self.element(element_id).map(|e| e.edc_id.as_str())
    }

    pub fn edc_ids(&self) -> BTreeSet<String> {
        self.edcs.iter().map(|e| e.edc_id.clone()).collect()
    }

    /// All elements across all EDCs, in declaration order.
    pub fn elements(&self) -> impl Iterator<Item = &ElementRecord> {
        self.edcs.iter().flat_map(|e| e.elements.iter())
    }

    pub fn elements_of_type(&self, t: ElementType) -> Vec<&ElementRecord> {
        let mut v: Vec<&ElementRecord> = self.elements().filter(|e| e.element_type == t).collect();
        v.sort_by(|a, b| a.element_id.cmp(&b.element_id));
        v
    }

    pub fn link(&self, id: &str) -> Option<&Link> {
        self.links.iter().find(|l| l.id == id)
    }

    pub fn link_mut(&mut self, id: &str) -> Option<&mut Link> {
        self.links.iter_mut().find(|l| l.id == id)
    }

    /// Backup link provisioned for the given primary, if any.
    pub fn backup_for(&self, primary_id: &str) -> Option<&Link> {
        self.links.iter().find(|l| l.backup_of.as_deref() == Some(primary_id))
    }

    /// Marks a link down. Returns the previous state.
    pub fn set_link_admin(&mut self, id: &str, up: bool) -> Result<bool, MecdError> {
        let link = self.link_mut(id).ok_or_else(|| MecdError::UnknownLink(id.to_string()))?;
        let was = link.admin_up;
        link.admin_up = up;
        Ok(was)
    }

    /// Fails a protected link and activates its provisioned backup: primary
    /// goes down immediately, the backup comes up once restoration
    /// completes (the caller owns the timing). Errors when the link is
    /// protected but no backup was provisioned.
    pub fn restore(&mut self, failed_link: &str) -> Result<String, MecdError> {
        let (protected, down) = {
            let l = self
                .link(failed_link)
                .ok_or_else(|| MecdError::UnknownLink(failed_link.to_string()))?;
            (l.protected, !l.admin_up)
        };
        if !protected {
            return Err(MecdError::NoBackup(failed_link.to_string()));
        }
        let backup_id = self
            .backup_for(failed_link)
            .map(|b| b.id.clone())
            .ok_or_else(|| MecdError::NoBackup(failed_link.to_string()))?;
        if down {
            // Already failed and switched over; nothing to do.
            return Ok(backup_id);
        }
        self.set_link_admin(failed_link, false)?;
        Ok(backup_id)
    }

    /// Validates every structural invariant, reporting all violations.
    pub fn validate(&self) -> Result<(), MecdError> {
        let mut errs = Vec::new();

        if self.edcs.is_empty() {
            errs.push("edcs: a domain needs at least one EDC".to_string());
        }
        if !self.edcs.iter().any(|e| e.has_ec()) {
            errs.push("edcs: at least one EDC must host edge compute".to_string());
        }

        let mut seen_elements: BTreeMap<&str, &str> = BTreeMap::new();
        let mut node_sids: BTreeMap<u32, &str> = BTreeMap::new();
        for (ei, edc) in self.edcs.iter().enumerate() {
            for (xi, el) in edc.elements.iter().enumerate() {
                let path = format!("edcs[{ei}].elements[{xi}]");
                if let Some(prev) = seen_elements.insert(&el.element_id, &edc.edc_id) {
                    errs.push(format!(
                        "{path}: element id {} already declared in edc {prev}",
                        el.element_id
                    ));
                }
                if el.edc_id != edc.edc_id {
                    errs.push(format!(
                        "{path}: element {} carries edc_id {} but is declared under {}",
                        el.element_id, el.edc_id, edc.edc_id
                    ));
                }
                if el.element_type.requires_node_sid() && el.sid.kind != SidKind::NodeSid {
                    errs.push(format!(
                        "{path}: forwarding element {} must carry a node sid",
                        el.element_id
                    ));
                }
                if el.sid.kind == SidKind::NodeSid {
                    if let Some(prev) = node_sids.insert(el.sid.value, &el.element_id) {
                        errs.push(format!(
                            "{path}: node sid {} already bound to {prev}",
                            el.sid.value
                        ));
                    }
                }
                if !el.app_ids.is_empty() && el.element_type != ElementType::Ec {
                    errs.push(format!(
                        "{path}: only edge compute may host application sids ({})",
                        el.element_id
                    ));
                }
            }
        }

        let mut link_ids = BTreeSet::new();
        for (li, link) in self.links.iter().enumerate() {
            let path = format!("links[{li}] ({})", link.id);
            if !link_ids.insert(link.id.clone()) {
                errs.push(format!("{path}: duplicate link id"));
            }
            if link.capacity_gbps <= 0.0 {
                errs.push(format!("{path}: capacity_gbps must be positive"));
            }
            if !(0.0..=1.0).contains(&link.error_rate) {
                errs.push(format!("{path}: error_rate must lie in [0, 1]"));
            }
            for end in [&link.from, &link.to] {
                if seen_elements.get(end.as_str()).is_none() {
                    errs.push(format!("{path}: endpoint {end} is not a declared element"));
                }
            }
            if link.from == link.to {
                errs.push(format!("{path}: link endpoints must differ"));
            }
            if let Some(primary_id) = &link.backup_of {
                match self.link(primary_id) {
                    None => errs.push(format!("{path}: backup_of references unknown link {primary_id}")),
                    Some(primary) => {
                        if !primary.joins(&link.from, &link.to) {
                            errs.push(format!(
                                "{path}: backup must join the same endpoints as primary {primary_id}"
                            ));
                        }
                        if primary.id == link.id {
                            errs.push(format!("{path}: a link cannot back itself up"));
                        }
                    }
                }
                if link.admin_up {
                    errs.push(format!("{path}: backup links start administratively down"));
                }
            }
        }
        for link in &self.links {
            if link.protected && self.backup_for(&link.id).is_none() {
                errs.push(format!(
                    "links ({}): protected link has no provisioned backup",
                    link.id
                ));
            }
        }

        // Connectivity over administratively-up links (backups are standby).
        if errs.is_empty() && self.elements().count() > 1 {
            let g = graph::GraphView::admin_up(self);
            let ids: Vec<&str> = self.elements().map(|e| e.element_id.as_str()).collect();
            let reach = g.reachable_set(ids[0]);
            for id in &ids {
                if !reach.contains(*id) {
                    errs.push(format!(
                        "links: element {id} is unreachable over administratively-up links"
                    ));
                }
            }
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(MecdError::Validation(errs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::reference_topology;

    #[test]
    fn v6_form_is_deterministic_and_invertible() {
        let a = SegmentId::node(1210);
        let b = SegmentId::node(1210);
        assert_eq!(a.v6_form(DEFAULT_V6_PREFIX), b.v6_form(DEFAULT_V6_PREFIX));
        let v6 = a.v6_form(DEFAULT_V6_PREFIX);
        assert_eq!((v6 >> 96) as u32, DEFAULT_V6_PREFIX);
        assert_eq!((v6 & u32::MAX as u128) as u32, 1210);
    }

    #[test]
    fn reference_topology_validates() {
        let topo = reference_topology();
        topo.validate().expect("reference topology must be valid");
        assert_eq!(topo.edcs.len(), 5);
        assert!(topo.edcs.iter().filter(|e| e.has_ec()).count() >= 1);
    }

    #[test]
    fn restore_without_backup_is_an_error() {
        let mut topo = reference_topology();
        let err = topo.restore("l-101-100").unwrap_err();
        assert!(matches!(err, MecdError::NoBackup(_)));
    }
}
