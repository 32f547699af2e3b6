// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use num_traits::One;
use serde::Serialize;

use super::cost::{declared_cost_discrepancies, transistor_count, Breakdown, CostDiscrepancy, CostModel, KindCount};
use crate::gatelib::TemplateSet;
use crate::mapper::{map_network, MapError, MapOptions, REPEATER};
use crate::netlist::{CrosstalkNetlist, InstanceKind, LogicNetwork};
use crate::rational::{format_fixed, Rational};

/// Deviation from a reference figure, in percentage points, that triggers a warning.
pub const DEVIATION_WARNING_PP: i64 = 20;

/// Static CMOS transistor counts per cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CmosRefLibrary {
    pub counts: BTreeMap<String, u32>,
}

impl Default for CmosRefLibrary {
    fn default() -> Self {
        let counts = [
            ("INV", 2),
            ("NAND2", 4),
            ("NOR2", 4),
            ("NAND3", 6),
            ("NOR3", 6),
            ("AND2", 6),
            ("OR2", 6),
            ("AOI21", 6),
            ("OAI21", 6),
            ("XOR2", 12),
            ("FA", 40),
            // gate plus output inverter
            ("AND3", 8),
            ("OR3", 8),
            ("AO21", 8),
            ("OA21", 8),
            ("XNOR2", 12),
            ("MAJ3", 12),
        ];
        Self { counts: counts.into_iter().map(|(k, v)| (k.to_string(), v)).collect() }
    }
}

impl CmosRefLibrary {
    pub fn get(&self, cell: &str) -> Option<u32> {
        self.counts.get(cell).copied()
    }
}

/// Published density figure for a benchmark, shown next to the measured one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReferenceAnnotation {
    pub paper_ref_pct: String,
    /// Measured minus reference, one decimal.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation_pp: Option<String>,
}

/// Reference reduction for the named benchmark designs.
pub fn published_reference(design: &str) -> Option<Rational> {
    match design {
        "mux" => Some(Rational::from_integer(62)),
        "cm85a" => Some(Rational::from_integer(59)),
        "pcle" => Some(Rational::from_integer(23)),
        "full_adder" => Some(Rational::new(135, 2)),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostReport {
    pub design: String,
    pub crosstalk_total: u32,
    pub crosstalk: Breakdown,
    pub cmos_total: u32,
    pub cmos: BTreeMap<String, KindCount>,
    /// `1 - crosstalk/cmos` in percent, one decimal, half-even; `None` when the CMOS total is 0.
    pub reduction_pct: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annotation: Option<ReferenceAnnotation>,
    /// Templates used by the design whose declared cost overrides a
    /// different structural count.
    pub declared_costs: Vec<CostDiscrepancy>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    reduction: Option<Rational>,
}

impl CostReport {
    pub fn reduction(&self) -> Option<Rational> {
        self.reduction
    }
}

type Baseline = (BTreeMap<String, KindCount>, u32, Vec<String>);

/// Costs `network` in static CMOS. The network is decomposed by the same
/// NAND-NAND mapper with composite matching on, then each cell is priced from
/// `reference`. Repeaters and fan-out buffers have no CMOS counterpart.
fn cmos_baseline(
    network: &LogicNetwork,
    library: &TemplateSet,
    reference: &CmosRefLibrary,
) -> Result<Baseline, MapError> {
    let mut kinds: BTreeMap<String, KindCount> = BTreeMap::new();
    let mut unpriced = Vec::new();
    if network.nodes.is_empty() {
        return Ok((kinds, 0, unpriced));
    }
    let options = MapOptions { fanout_limit: usize::MAX, ..MapOptions::default() };
    let (netlist, _, _) = map_network(network, library, &options)?;
    let mut total = 0;
    for inst in &netlist.instances {
        let kind = match &inst.kind {
            InstanceKind::Gate { template, .. } if template == REPEATER => continue,
            InstanceKind::Gate { template, .. } => template.as_str(),
            InstanceKind::Inverter { .. } => "INV",
            InstanceKind::Buffer { .. } => continue,
        };
        let Some(t) = reference.get(kind) else {
            if !unpriced.iter().any(|u| u == kind) {
                unpriced.push(kind.to_string());
            }
            continue;
        };
        let e = kinds.entry(kind.to_string()).or_default();
        e.instances += 1;
        e.transistors += t;
        total += t;
    }
    Ok((kinds, total, unpriced))
}

/// Compares a mapped design with its CMOS baseline. `design` selects the
/// reference annotation when it names one of the published benchmarks.
pub fn compare_cmos(
    design: &str,
    network: &LogicNetwork,
    mapped: &CrosstalkNetlist,
    library: &TemplateSet,
    reference: &CmosRefLibrary,
) -> Result<CostReport, MapError> {
    let model = CostModel::default();
    let crosstalk = transistor_count(mapped, library, &model);
    let (cmos, cmos_total, unpriced) = cmos_baseline(network, library, reference)?;
    let reduction = (cmos_total > 0).then(|| {
        Rational::one() - Rational::new(crosstalk.total as i64, cmos_total as i64)
    });
    let hundred = Rational::from_integer(100);
    let reduction_pct = reduction.map(|r| format_fixed(&(r * hundred), 1));
    let mut warnings: Vec<String> =
        unpriced.iter().map(|u| format!("cell {u} has no CMOS reference count and is left out")).collect();
    let annotation = published_reference(design).map(|p| {
        let deviation = reduction.map(|r| r * hundred - p);
        if let Some(d) = deviation {
            let limit = Rational::from_integer(DEVIATION_WARNING_PP);
            if d > limit || -d > limit {
                warnings.push(format!(
                    "reduction {}% is {} points from the reference {}%",
                    format_fixed(&(reduction.expect("deviation implies reduction") * hundred), 1),
                    format_fixed(&d, 1),
                    format_fixed(&p, 1)
                ));
            }
        }
        let whole = p.is_integer();
        ReferenceAnnotation {
            paper_ref_pct: if whole { p.to_integer().to_string() } else { format_fixed(&p, 1) },
            deviation_pp: deviation.map(|d| format_fixed(&d, 1)),
        }
    });
    let declared_costs = declared_cost_discrepancies(library, &model)
        .into_iter()
        .filter(|d| crosstalk.by_kind.contains_key(&d.template))
        .collect();
    Ok(CostReport {
        design: design.to_string(),
        crosstalk_total: crosstalk.total,
        crosstalk,
        cmos_total,
        cmos,
        reduction_pct,
        annotation,
        declared_costs,
        warnings,
        reduction,
    })
}
