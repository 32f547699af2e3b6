// SPDX-License-Identifier: Apache-2.0

//! Crosstalk gate templates and the two models that describe them.
//!
//! The *behavioral* model says a victim node flips when the summed coupling
//! weight of its logic-1 aggressors reaches the mode's margin. The *analytical*
//! model computes the victim voltage from a lumped capacitive divider:
//!
//! ```text
//! V = sum(weights of high inputs) / (sum(all data weights) + aux_load + c_load)
//! ```
//!
//! and flips when `V >= vm`. A mode is consistent when both models agree on
//! every input vector and every voltage stays at least `delta_min` away from
//! `vm`. Capacitances are integers in tenths of the unit coupling capacitance
//! (deci-C_u), so all comparisons are exact.

mod calibrate;
mod lemma;
mod library;
mod lp;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{abs_diff, format_rational, parse_rational, Rational};

pub use calibrate::{calibrate, is_positive_threshold, CalibrationBounds, Infeasible};
pub use lemma::{prove_injection_infeasible, InjectionCase, InjectionReport, ThresholdScanPoint};
pub use library::{builtin_library, LibraryError, TemplateSet, POLYMORPHIC_PAIRS};

/// Largest data fan-in handled by the exhaustive checks (2^6 vectors).
pub const MAX_NODE_INPUTS: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GateError {
    #[error("template {template}: mode {mode_id} not found")]
    ModeNotFound { template: String, mode_id: u8 },
    #[error("template {template}: expected {expected} data inputs, got {got}")]
    ArityMismatch { template: String, expected: usize, got: usize },
    #[error("template {0} is composite; it has no single victim node")]
    Composite(String),
    #[error("template {template}: mode {mode_id} is inconsistent ({violations} violating vectors)")]
    InconsistentMode { template: String, mode_id: u8, violations: usize },
    #[error("no mode of {template} matches control assignment {assignment:?}")]
    NoModeForControls { template: String, assignment: Vec<bool> },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamError {
    #[error("vm must lie strictly between 0 and 1")]
    VmOutOfRange,
    #[error("delta_min must be non-negative")]
    NegativeDelta,
    #[error("vm - delta_min must be positive and vm + delta_min below 1")]
    DeltaTooWide,
}

/// Global electrical parameters. Voltages are fractions of VDD.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimParams {
    vm: Rational,
    delta_min: Rational,
    c_load: u32,
}

impl SimParams {
    pub fn new(vm: Rational, delta_min: Rational, c_load: u32) -> Result<Self, ParamError> {
        let zero = Rational::from_integer(0);
        let one = Rational::from_integer(1);
        if vm <= zero || vm >= one {
            return Err(ParamError::VmOutOfRange);
        }
        if delta_min < zero {
            return Err(ParamError::NegativeDelta);
        }
        if vm - delta_min <= zero || vm + delta_min >= one {
            return Err(ParamError::DeltaTooWide);
        }
        Ok(Self { vm, delta_min, c_load })
    }

    /// Inverter switching threshold.
    pub fn vm(&self) -> Rational {
        self.vm
    }

    pub fn delta_min(&self) -> Rational {
        self.delta_min
    }

    /// Victim parasitic plus inverter input load, deci-C_u.
    pub fn c_load(&self) -> u32 {
        self.c_load
    }
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            vm: Rational::new(3, 10),
            delta_min: Rational::new(1, 50),
            c_load: 1,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SimParamsRepr {
    vm: String,
    delta_min: String,
    c_load: u32,
}

impl Serialize for SimParams {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SimParamsRepr {
            vm: format_rational(&self.vm),
            delta_min: format_rational(&self.delta_min),
            c_load: self.c_load,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SimParams {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = SimParamsRepr::deserialize(deserializer)?;
        let vm = parse_rational(&repr.vm).ok_or_else(|| D::Error::custom("bad vm"))?;
        let delta = parse_rational(&repr.delta_min).ok_or_else(|| D::Error::custom("bad delta_min"))?;
        SimParams::new(vm, delta, repr.c_load).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortKind {
    Data,
    Control,
}

/// An aggressor line coupling onto the victim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggressorPort {
    pub name: String,
    pub kind: PortKind,
    /// Nominal coupling capacitance, deci-C_u.
    pub weight: u32,
}

impl AggressorPort {
    pub fn data(name: &str, weight: u32) -> Self {
        Self { name: name.to_string(), kind: PortKind::Data, weight }
    }

    pub fn control(name: &str, weight: u32) -> Self {
        Self { name: name.to_string(), kind: PortKind::Control, weight }
    }
}

/// One operating point of a victim node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateMode {
    pub mode_id: u8,
    /// Control-port values selecting this mode, in control-port order.
    #[serde(default)]
    pub control_assignment: Vec<bool>,
    pub data_weights: Vec<u32>,
    /// Switched grounded capacitance loading the victim.
    #[serde(default)]
    pub aux_load: u32,
    /// Minimum transitioned weight that flips the node.
    pub margin: u32,
}

impl GateMode {
    pub fn single(data_weights: Vec<u32>, aux_load: u32, margin: u32) -> Self {
        Self { mode_id: 0, control_assignment: Vec::new(), data_weights, aux_load, margin }
    }

    pub fn arity(&self) -> usize {
        self.data_weights.len()
    }

    pub fn transitioned_weight(&self, inputs: &[bool]) -> u32 {
        self.data_weights
            .iter()
            .zip(inputs)
            .filter(|(_, &high)| high)
            .map(|(w, _)| *w)
            .sum()
    }

    /// Behavioral decision: flip iff transitioned weight reaches the margin.
    pub fn flips(&self, inputs: &[bool]) -> bool {
        self.transitioned_weight(inputs) >= self.margin
    }

    /// Total capacitance seen by the victim in this mode.
    pub fn total_load(&self, params: &SimParams) -> u32 {
        self.data_weights.iter().sum::<u32>() + self.aux_load + params.c_load()
    }

    /// Charge-sharing voltage on the victim.
    pub fn voltage(&self, inputs: &[bool], params: &SimParams) -> Rational {
        let high = self.transitioned_weight(inputs) as i64;
        let total = self.total_load(params) as i64;
        if high == 0 {
            return Rational::from_integer(0);
        }
        Rational::new(high, total)
    }

    /// Flip set as a truth table (bit `v` set iff vector `v` flips).
    pub fn flip_table(&self) -> TruthTable {
        TruthTable::from_fn(self.arity(), |x| self.flips(x))
    }
}

/// Truth table over at most six inputs. Input `i` of vector `v` is bit `i` of `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TruthTable {
    pub inputs: u8,
    pub bits: u64,
}

impl TruthTable {
    pub fn new(inputs: usize, bits: u64) -> Self {
        assert!(inputs <= MAX_NODE_INPUTS, "truth tables cover at most six inputs");
        let mask = Self::mask_for(inputs);
        Self { inputs: inputs as u8, bits: bits & mask }
    }

    pub fn from_fn(inputs: usize, mut f: impl FnMut(&[bool]) -> bool) -> Self {
        let mut bits = 0u64;
        let mut vector = vec![false; inputs];
        for v in 0..(1u64 << inputs) {
            for (i, slot) in vector.iter_mut().enumerate() {
                *slot = (v >> i) & 1 == 1;
            }
            if f(&vector) {
                bits |= 1 << v;
            }
        }
        Self::new(inputs, bits)
    }

    fn mask_for(inputs: usize) -> u64 {
        if inputs == 6 {
            u64::MAX
        } else {
            (1u64 << (1u64 << inputs)) - 1
        }
    }

    pub fn arity(&self) -> usize {
        self.inputs as usize
    }

    pub fn rows(&self) -> u64 {
        1u64 << self.inputs
    }

    pub fn get(&self, vector: u64) -> bool {
        (self.bits >> vector) & 1 == 1
    }

    pub fn complement(&self) -> Self {
        Self::new(self.arity(), !self.bits)
    }

    /// Positive unate in every input.
    pub fn is_monotone(&self) -> bool {
        (0..self.rows()).all(|v| {
            !self.get(v) || (0..self.arity()).all(|i| self.get(v | (1 << i)))
        })
    }

    /// Apply an input permutation: input `i` of `self` becomes input `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.arity();
        let mut bits = 0u64;
        for v in 0..self.rows() {
            if self.get(v) {
                let mut w = 0u64;
                for (i, &p) in perm.iter().enumerate().take(n) {
                    if (v >> i) & 1 == 1 {
                        w |= 1 << p;
                    }
                }
                bits |= 1 << w;
            }
        }
        Self::new(n, bits)
    }
}

pub(crate) fn bits_of(vector: u64, width: usize) -> Vec<bool> {
    (0..width).map(|i| (vector >> i) & 1 == 1).collect()
}

/// Reference to a signal inside a composite template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    /// Data port by index.
    Port(usize),
    /// Output of an internal victim node.
    Node(usize),
    /// Output of an internal victim node through a static inverter.
    NodeInv(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositeNode {
    pub inputs: Vec<Signal>,
    pub mode: GateMode,
    pub output_inverted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositeOutput {
    pub port: String,
    pub source: Signal,
}

/// Multi-node cell (XOR2, full adder). Nodes are listed in dependency order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositeBody {
    pub nodes: Vec<CompositeNode>,
    pub outputs: Vec<CompositeOutput>,
}

impl CompositeBody {
    /// Longest internal path length to each node (entry nodes have depth 0).
    pub fn node_depths(&self) -> Vec<u32> {
        let mut depths = vec![0u32; self.nodes.len()];
        for (idx, node) in self.nodes.iter().enumerate() {
            depths[idx] = node
                .inputs
                .iter()
                .filter_map(|s| match s {
                    Signal::Node(j) | Signal::NodeInv(j) => Some(depths[*j] + 1),
                    Signal::Port(_) => None,
                })
                .max()
                .unwrap_or(0);
        }
        depths
    }

    /// Nodes whose complement is taken through a static inverter.
    pub fn inverted_taps(&self) -> Vec<usize> {
        let mut taps: Vec<usize> = self
            .nodes
            .iter()
            .flat_map(|n| n.inputs.iter())
            .chain(self.outputs.iter().map(|o| &o.source))
            .filter_map(|s| match s {
                Signal::NodeInv(j) => Some(*j),
                _ => None,
            })
            .collect();
        taps.sort_unstable();
        taps.dedup();
        taps
    }

    fn evaluate(&self, data: &[bool]) -> Vec<bool> {
        let mut outs: Vec<bool> = Vec::with_capacity(self.nodes.len());
        let resolve = |s: &Signal, outs: &[bool]| match *s {
            Signal::Port(i) => data[i],
            Signal::Node(j) => outs[j],
            Signal::NodeInv(j) => !outs[j],
        };
        for node in &self.nodes {
            let ins: Vec<bool> = node.inputs.iter().map(|s| resolve(s, &outs)).collect();
            let flip = node.mode.flips(&ins);
            outs.push(flip != node.output_inverted);
        }
        self.outputs.iter().map(|o| resolve(&o.source, &outs)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateBody {
    /// One victim node; one mode per control assignment.
    Single {
        modes: Vec<GateMode>,
        /// Native output is the inverter output NOT(flip); otherwise a second
        /// inverter restores `flip`.
        output_inverted: bool,
    },
    Composite(CompositeBody),
}

/// A crosstalk cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateTemplate {
    pub name: String,
    pub data_ports: Vec<AggressorPort>,
    #[serde(default)]
    pub control_ports: Vec<AggressorPort>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_cost: Option<u32>,
    pub body: TemplateBody,
}

pub const SINGLE_OUTPUT_PORT: &str = "Y";

impl GateTemplate {
    pub fn is_composite(&self) -> bool {
        matches!(self.body, TemplateBody::Composite(_))
    }

    pub fn is_polymorphic(&self) -> bool {
        !self.control_ports.is_empty()
    }

    pub fn modes(&self) -> &[GateMode] {
        match &self.body {
            TemplateBody::Single { modes, .. } => modes,
            TemplateBody::Composite(_) => &[],
        }
    }

    pub fn output_ports(&self) -> Vec<&str> {
        match &self.body {
            TemplateBody::Single { .. } => vec![SINGLE_OUTPUT_PORT],
            TemplateBody::Composite(c) => c.outputs.iter().map(|o| o.port.as_str()).collect(),
        }
    }

    pub fn mode(&self, mode_id: u8) -> Result<&GateMode, GateError> {
        self.modes()
            .iter()
            .find(|m| m.mode_id == mode_id)
            .ok_or_else(|| GateError::ModeNotFound { template: self.name.clone(), mode_id })
    }

    pub fn mode_for_controls(&self, controls: &[bool]) -> Result<&GateMode, GateError> {
        self.modes()
            .iter()
            .find(|m| m.control_assignment == controls)
            .ok_or_else(|| GateError::NoModeForControls {
                template: self.name.clone(),
                assignment: controls.to_vec(),
            })
    }

    fn single_mode(&self, mode_id: u8, inputs: &[bool]) -> Result<&GateMode, GateError> {
        if self.is_composite() {
            return Err(GateError::Composite(self.name.clone()));
        }
        let mode = self.mode(mode_id)?;
        if inputs.len() != self.data_ports.len() {
            return Err(GateError::ArityMismatch {
                template: self.name.clone(),
                expected: self.data_ports.len(),
                got: inputs.len(),
            });
        }
        Ok(mode)
    }

    /// Logic outputs for data and control values.
    pub fn evaluate(&self, data: &[bool], controls: &[bool]) -> Result<Vec<bool>, GateError> {
        if data.len() != self.data_ports.len() {
            return Err(GateError::ArityMismatch {
                template: self.name.clone(),
                expected: self.data_ports.len(),
                got: data.len(),
            });
        }
        match &self.body {
            TemplateBody::Single { output_inverted, .. } => {
                let mode = self.mode_for_controls(controls)?;
                Ok(vec![mode.flips(data) != *output_inverted])
            }
            TemplateBody::Composite(body) => Ok(body.evaluate(data)),
        }
    }

    /// Truth table of output `output` under control assignment `controls`.
    pub fn function(&self, controls: &[bool], output: usize) -> Result<TruthTable, GateError> {
        let n = self.data_ports.len();
        let mut err = None;
        let tt = TruthTable::from_fn(n, |x| match self.evaluate(x, controls) {
            Ok(v) => v[output],
            Err(e) => {
                err = Some(e);
                false
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(tt),
        }
    }

    /// Every (mode, victim node) pair; composites contribute their internal nodes.
    pub fn victim_modes(&self) -> Vec<&GateMode> {
        match &self.body {
            TemplateBody::Single { modes, .. } => modes.iter().collect(),
            TemplateBody::Composite(c) => c.nodes.iter().map(|n| &n.mode).collect(),
        }
    }
}

/// Behavioral flip of a single-node template.
pub fn margin_eval(template: &GateTemplate, mode_id: u8, inputs: &[bool]) -> Result<bool, GateError> {
    Ok(template.single_mode(mode_id, inputs)?.flips(inputs))
}

/// Post-inverter output of a single-node template.
pub fn node_output(template: &GateTemplate, mode_id: u8, inputs: &[bool]) -> Result<bool, GateError> {
    let flip = margin_eval(template, mode_id, inputs)?;
    match &template.body {
        TemplateBody::Single { output_inverted, .. } => Ok(flip != *output_inverted),
        TemplateBody::Composite(_) => Err(GateError::Composite(template.name.clone())),
    }
}

pub fn victim_voltage(
    template: &GateTemplate,
    mode_id: u8,
    inputs: &[bool],
    params: &SimParams,
) -> Result<Rational, GateError> {
    Ok(template.single_mode(mode_id, inputs)?.voltage(inputs, params))
}

/// A vector where the two models disagree or the voltage sits too close to vm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub vector: Vec<bool>,
    pub voltage: Rational,
    pub behavioral_flip: bool,
    pub analytical_flip: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub violations: Vec<Violation>,
    /// Smallest |V - vm| over all vectors.
    pub worst_slack: Rational,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exhaustive agreement check between the margin and the divider models.
pub fn check_mode(mode: &GateMode, params: &SimParams) -> ConsistencyReport {
    let n = mode.arity();
    assert!(n <= MAX_NODE_INPUTS, "victim nodes have at most six data inputs");
    let mut violations = Vec::new();
    let mut worst: Option<Rational> = None;
    for v in 0..(1u64 << n) {
        let x = bits_of(v, n);
        let voltage = mode.voltage(&x, params);
        let behavioral = mode.flips(&x);
        let analytical = voltage >= params.vm();
        let slack = abs_diff(&voltage, &params.vm());
        worst = Some(match worst {
            Some(w) if w <= slack => w,
            _ => slack,
        });
        if behavioral != analytical || slack < params.delta_min() {
            violations.push(Violation {
                vector: x,
                voltage,
                behavioral_flip: behavioral,
                analytical_flip: analytical,
            });
        }
    }
    ConsistencyReport { violations, worst_slack: worst.unwrap_or_else(|| params.vm()) }
}

pub fn check_consistency(
    template: &GateTemplate,
    mode_id: u8,
    params: &SimParams,
) -> Result<ConsistencyReport, GateError> {
    if template.is_composite() {
        return Err(GateError::Composite(template.name.clone()));
    }
    Ok(check_mode(template.mode(mode_id)?, params))
}

pub fn noise_margin(template: &GateTemplate, mode_id: u8, params: &SimParams) -> Result<Rational, GateError> {
    let report = check_consistency(template, mode_id, params)?;
    if !report.passed() {
        return Err(GateError::InconsistentMode {
            template: template.name.clone(),
            mode_id,
            violations: report.violations.len(),
        });
    }
    Ok(report.worst_slack)
}
