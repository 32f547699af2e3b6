// SPDX-License-Identifier: Apache-2.0

//! Transistor counts, the static CMOS baseline and density reports.

mod cmos;
mod cost;
mod report;

pub use cmos::{compare_cmos, published_reference, CmosRefLibrary, CostReport, ReferenceAnnotation, DEVIATION_WARNING_PP};
pub use cost::{declared_cost_discrepancies, transistor_count, Breakdown, CostDiscrepancy, CostModel, KindCount};
pub use report::{emit_report, ReportFormat};
