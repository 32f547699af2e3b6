// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::Serialize;

use crate::gatelib::{GateTemplate, TemplateBody, TemplateSet};
use crate::netlist::{CrosstalkNetlist, InstanceKind};

/// Transistor accounting for crosstalk cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CostModel {
    /// Discharge transistor on each victim.
    pub victim: u32,
    pub inverter: u32,
    /// Pass transistor per switched load or coupling branch in polymorphic cells.
    pub switched_branch: u32,
    /// Two cascaded inverters, multiplied by drive.
    pub buffer: u32,
}

impl Default for CostModel {
    fn default() -> Self {
        Self { victim: 1, inverter: 2, switched_branch: 1, buffer: 4 }
    }
}

impl CostModel {
    /// Cost from the structure alone, ignoring any declared cost.
    pub fn formula_cost(&self, template: &GateTemplate) -> u32 {
        match &template.body {
            TemplateBody::Single { modes, output_inverted } => {
                let mut cost = self.victim + self.inverter;
                if !output_inverted {
                    cost += self.inverter;
                }
                if let Some(first) = modes.first() {
                    let aux_switched = modes.iter().any(|m| m.aux_load != first.aux_load);
                    let weights_switched = (0..first.data_weights.len())
                        .filter(|&i| modes.iter().any(|m| m.data_weights[i] != first.data_weights[i]))
                        .count() as u32;
                    cost += self.switched_branch * (aux_switched as u32 + weights_switched);
                }
                cost
            }
            TemplateBody::Composite(body) => {
                let nodes: u32 = body
                    .nodes
                    .iter()
                    .map(|n| self.victim + self.inverter + if n.output_inverted { 0 } else { self.inverter })
                    .sum();
                nodes + self.inverter * body.inverted_taps().len() as u32
            }
        }
    }

    pub fn template_cost(&self, template: &GateTemplate) -> u32 {
        template.declared_cost.unwrap_or_else(|| self.formula_cost(template))
    }

    pub fn buffer_cost(&self, drive: u32) -> u32 {
        self.buffer * drive
    }
}

/// Per-kind counts and transistors.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct KindCount {
    pub instances: usize,
    pub transistors: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Breakdown {
    pub total: u32,
    /// Template name, `INV` or `BUF`.
    pub by_kind: BTreeMap<String, KindCount>,
}

impl Breakdown {
    fn add(&mut self, kind: &str, transistors: u32) {
        let entry = self.by_kind.entry(kind.to_string()).or_default();
        entry.instances += 1;
        entry.transistors += transistors;
        self.total += transistors;
    }
}

/// Sums instance costs. Gates referring to templates missing from `library`
/// are skipped; validation reports those.
pub fn transistor_count(netlist: &CrosstalkNetlist, library: &TemplateSet, model: &CostModel) -> Breakdown {
    let mut b = Breakdown::default();
    for inst in &netlist.instances {
        match &inst.kind {
            InstanceKind::Gate { template, .. } => {
                if let Some(t) = library.get(template) {
                    b.add(template, model.template_cost(t));
                }
            }
            InstanceKind::Inverter { .. } => b.add("INV", model.inverter),
            InstanceKind::Buffer { drive, .. } => b.add("BUF", model.buffer_cost(*drive)),
        }
    }
    b
}

/// Templates whose declared cost differs from the structural formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostDiscrepancy {
    pub template: String,
    pub formula: u32,
    pub declared: u32,
}

pub fn declared_cost_discrepancies(library: &TemplateSet, model: &CostModel) -> Vec<CostDiscrepancy> {
    library
        .templates
        .iter()
        .filter_map(|t| {
            let declared = t.declared_cost?;
            let formula = model.formula_cost(t);
            (declared != formula).then(|| CostDiscrepancy { template: t.name.clone(), formula, declared })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gatelib::builtin_library;

    #[test]
    fn builtin_costs() {
        let lib = builtin_library();
        let m = CostModel::default();
        let cost = |n: &str| m.template_cost(lib.get(n).unwrap());
        assert_eq!(cost("NAND2"), 3);
        assert_eq!(cost("AND2"), 5);
        assert_eq!(cost("FA"), 13);
        assert_eq!(m.formula_cost(lib.get("FA").unwrap()), 10);
        assert_eq!(cost("XOR2"), 8);
        assert_eq!(cost("XNOR2"), 6);
        assert_eq!(cost("AND2-OR2"), 6);
        // OR3 -> OA21 switches the aux load and the C branch
        assert_eq!(cost("OR3-OA21"), 7);
        assert_eq!(
            declared_cost_discrepancies(&lib, &m),
            vec![CostDiscrepancy { template: "FA".into(), formula: 10, declared: 13 }]
        );
    }
}
