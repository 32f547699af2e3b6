// SPDX-License-Identifier: Apache-2.0

//! Two-phase clocked simulation.
//!
//! Half-cycle `t` evaluates phase group `t % 2` while the other group
//! discharges. Each crosstalk output sits behind an ideal sample-and-hold:
//! evaluating gates latch their new value at the end of the half-cycle and
//! discharging gates keep the last one. Inverters and buffers settle with zero
//! delay. Stimulus rows change only at period boundaries.

mod trace;
mod verify;

use std::collections::{BTreeSet, HashMap};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::gatelib::{SimParams, TemplateSet};
use crate::netlist::{flatten, levels_of, serialize_xtn, CrosstalkNetlist, CtrlSource, Driver, Flat, LevelizeError};
use crate::rational::Rational;

pub use trace::{write_csv, write_vcd, SimTrace, TraceStep};
pub(crate) use verify::random_vectors;
pub use verify::{verify_equivalence, EquivalenceReport, Mismatch, Strategy, DEFAULT_RANDOM_VECTORS, DEFAULT_SEED};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error(transparent)]
    Netlist(#[from] LevelizeError),
    #[error("template {template} has no mode for control assignment {assignment:?}")]
    MissingMode { template: String, assignment: Vec<bool> },
    #[error("stimulus row {row} has {got} bits, expected {expected}")]
    StimulusWidthMismatch { row: usize, expected: usize, got: usize },
    #[error("stimulus nets do not match the design: {0}")]
    StimulusNets(String),
    #[error("stimulus line {line}: {reason}")]
    StimulusParse { line: usize, reason: String },
    #[error("interface mismatch: {0}")]
    InterfaceMismatch(String),
    #[error("net {0} is undriven")]
    UndrivenNet(String),
}

/// Input rows applied one per clock period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stimulus {
    pub inputs: Vec<String>,
    pub rows: Vec<Vec<bool>>,
}

impl Stimulus {
    pub fn new(inputs: Vec<String>, rows: Vec<Vec<bool>>) -> Result<Self, SimError> {
        for (row, bits) in rows.iter().enumerate() {
            if bits.len() != inputs.len() {
                return Err(SimError::StimulusWidthMismatch { row, expected: inputs.len(), got: bits.len() });
            }
        }
        Ok(Self { inputs, rows })
    }

    /// All 2^n rows, first input as the most significant bit.
    pub fn exhaustive(inputs: Vec<String>) -> Self {
        let n = inputs.len();
        let rows = (0..1u64 << n).map(|v| (0..n).map(|i| (v >> (n - 1 - i)) & 1 == 1).collect()).collect();
        Self { inputs, rows }
    }

    /// `inputs a b c` followed by one row of `0`/`1` characters per period.
    pub fn parse(text: &str) -> Result<Self, SimError> {
        let mut inputs: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            match &inputs {
                None => {
                    let mut tokens = body.split_whitespace();
                    if tokens.next() != Some("inputs") {
                        return Err(SimError::StimulusParse { line, reason: "expected \"inputs <net>...\"".into() });
                    }
                    inputs = Some(tokens.map(str::to_string).collect());
                }
                Some(names) => {
                    let row: Vec<bool> = body
                        .chars()
                        .filter(|c| !c.is_whitespace())
                        .map(|c| match c {
                            '0' => Ok(false),
                            '1' => Ok(true),
                            other => Err(SimError::StimulusParse { line, reason: format!("bad bit {other:?}") }),
                        })
                        .collect::<Result<_, _>>()?;
                    if row.len() != names.len() {
                        return Err(SimError::StimulusWidthMismatch { row: rows.len(), expected: names.len(), got: row.len() });
                    }
                    rows.push(row);
                }
            }
        }
        let inputs = inputs.ok_or(SimError::StimulusParse { line: 1, reason: "missing inputs line".into() })?;
        Ok(Self { inputs, rows })
    }
}

/// Integer form of a mode for fast flip decisions.
#[derive(Debug, Clone)]
struct CompiledMode {
    weights: Vec<u32>,
    margin: u32,
    denominator: i64,
}

#[derive(Debug, Clone)]
struct CompiledNode {
    /// Indexed by the control assignment read as a little-endian integer.
    modes: Vec<CompiledMode>,
    output_inverted: bool,
}

/// A netlist prepared for repeated simulation.
#[derive(Debug, Clone)]
pub struct Simulator {
    flat: Flat,
    nodes: Vec<CompiledNode>,
    params: SimParams,
    max_level: u32,
    hash: String,
    name: String,
    /// Nets that must be driven by a stimulus: primary inputs then free controls.
    stimulus_nets: Vec<usize>,
    outputs: Vec<usize>,
    constants: Vec<(usize, bool)>,
}

pub fn netlist_hash(netlist: &CrosstalkNetlist) -> String {
    let digest = Sha256::digest(serialize_xtn(netlist).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Default settle time in periods for a given deepest level.
pub fn settle_periods_for(max_level: u32) -> usize {
    (max_level as usize + 2) / 2
}

impl Simulator {
    pub fn new(netlist: &CrosstalkNetlist, library: &TemplateSet) -> Result<Self, SimError> {
        let flat = flatten(netlist, library)?;
        let levels = levels_of(netlist, &flat);
        let params = netlist.params.clone();
        let mut nodes = Vec::with_capacity(flat.nodes.len());
        for node in &flat.nodes {
            let c = node.controls.len();
            let mut modes = Vec::with_capacity(1 << c);
            for assignment in 0..(1usize << c) {
                let bits: Vec<bool> = (0..c).map(|i| (assignment >> i) & 1 == 1).collect();
                let mode = node.modes.iter().find(|m| c == 0 || m.control_assignment == bits).ok_or_else(|| {
                    SimError::MissingMode { template: node.label.clone(), assignment: bits.clone() }
                })?;
                modes.push(CompiledMode {
                    weights: mode.data_weights.clone(),
                    margin: mode.margin,
                    denominator: mode.total_load(&params) as i64,
                });
            }
            nodes.push(CompiledNode { modes, output_inverted: node.output_inverted });
        }
        let mut stimulus_nets: Vec<usize> = flat.inputs.clone();
        let mut constants = Vec::new();
        for c in &netlist.controls {
            let n = flat.index[&c.name];
            match c.value {
                crate::netlist::ControlValue::Free => stimulus_nets.push(n),
                crate::netlist::ControlValue::Zero => constants.push((n, false)),
                crate::netlist::ControlValue::One => constants.push((n, true)),
            }
        }
        for (n, d) in flat.drivers.iter().enumerate() {
            if d.is_none() {
                return Err(SimError::UndrivenNet(flat.nets[n].clone()));
            }
        }
        let outputs = flat.outputs.clone();
        Ok(Self {
            flat,
            nodes,
            params,
            max_level: levels.max_level,
            hash: netlist_hash(netlist),
            name: netlist.name.clone(),
            stimulus_nets,
            outputs,
            constants,
        })
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn default_settle(&self) -> usize {
        settle_periods_for(self.max_level)
    }

    /// Primary inputs followed by free control nets.
    pub fn stimulus_nets(&self) -> Vec<&str> {
        self.stimulus_nets.iter().map(|&n| self.flat.nets[n].as_str()).collect()
    }

    pub fn output_nets(&self) -> Vec<&str> {
        self.outputs.iter().map(|&n| self.flat.nets[n].as_str()).collect()
    }

    /// Position in the stimulus of each design stimulus net.
    fn stimulus_map(&self, stimulus: &Stimulus) -> Result<Vec<usize>, SimError> {
        let by_name: HashMap<&str, usize> = stimulus.inputs.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        if by_name.len() != stimulus.inputs.len() {
            return Err(SimError::StimulusNets("a net is listed twice".into()));
        }
        let wanted: BTreeSet<&str> = self.stimulus_nets().into_iter().collect();
        let given: BTreeSet<&str> = by_name.keys().copied().collect();
        if wanted != given {
            let missing: Vec<&str> = wanted.difference(&given).copied().collect();
            let extra: Vec<&str> = given.difference(&wanted).copied().collect();
            return Err(SimError::StimulusNets(format!("missing [{}], unknown [{}]", missing.join(" "), extra.join(" "))));
        }
        Ok(self.stimulus_nets().iter().map(|n| by_name[n]).collect())
    }

    fn reset(&self) -> Vec<bool> {
        let mut values = vec![false; self.flat.nets.len()];
        for &(n, v) in &self.constants {
            values[n] = v;
        }
        // victims start discharged: every latch holds its no-flip output
        for (k, node) in self.flat.nodes.iter().enumerate() {
            values[node.output] = self.nodes[k].output_inverted;
        }
        self.propagate(&mut values);
        values
    }

    fn propagate(&self, values: &mut [bool]) {
        for &s in &self.flat.static_order {
            let st = &self.flat.statics[s];
            values[st.output] = values[st.input] != st.invert;
        }
    }

    fn mode_of(&self, k: usize, values: &[bool]) -> &CompiledMode {
        let node = &self.flat.nodes[k];
        let mut assignment = 0usize;
        for (i, c) in node.controls.iter().enumerate() {
            let bit = match *c {
                CtrlSource::Net(n) => values[n],
                CtrlSource::Const(b) => b,
            };
            assignment |= (bit as usize) << i;
        }
        &self.nodes[k].modes[assignment]
    }

    fn transitioned(&self, k: usize, mode: &CompiledMode, values: &[bool]) -> u32 {
        self.flat.nodes[k].inputs.iter().zip(&mode.weights).filter(|(n, _)| values[**n]).map(|(_, w)| *w).sum()
    }

    /// One half-cycle; returns victim voltages when `record` is set.
    fn half_cycle(&self, values: &mut [bool], index: u64, record: bool) -> Vec<Rational> {
        let group = (index % 2) as u8;
        let mut latched = Vec::new();
        let mut victims = if record { vec![Rational::from_integer(0); self.flat.nodes.len()] } else { Vec::new() };
        for (k, node) in self.flat.nodes.iter().enumerate() {
            if node.phase != group {
                continue;
            }
            let mode = self.mode_of(k, values);
            let sum = self.transitioned(k, mode, values);
            let flip = sum >= mode.margin;
            if record {
                victims[k] = Rational::new(sum as i64, mode.denominator);
            }
            latched.push((node.output, flip != self.nodes[k].output_inverted));
        }
        for (net, v) in latched {
            values[net] = v;
        }
        self.propagate(values);
        victims
    }

    fn apply(&self, values: &mut [bool], map: &[usize], row: &[bool]) {
        for (slot, &net) in self.stimulus_nets.iter().enumerate() {
            values[net] = row[map[slot]];
        }
        self.propagate(values);
    }

    /// Runs every stimulus row for `settle_periods` periods, recording each half-cycle.
    pub fn run(&self, stimulus: &Stimulus, settle_periods: usize) -> Result<SimTrace, SimError> {
        let map = self.stimulus_map(stimulus)?;
        for (row, bits) in stimulus.rows.iter().enumerate() {
            if bits.len() != stimulus.inputs.len() {
                return Err(SimError::StimulusWidthMismatch { row, expected: stimulus.inputs.len(), got: bits.len() });
            }
        }
        let visible = self.visible_nets();
        let mut values = self.reset();
        let mut steps = Vec::with_capacity(stimulus.rows.len() * 2 * settle_periods);
        let mut index = 0u64;
        for (period, row) in stimulus.rows.iter().enumerate() {
            self.apply(&mut values, &map, row);
            for _ in 0..2 * settle_periods {
                let victims = self.half_cycle(&mut values, index, true);
                let group = (index % 2) as u8;
                steps.push(TraceStep {
                    half_cycle: index,
                    row: period,
                    values: visible.iter().map(|&n| values[n]).collect(),
                    victims,
                    discharge: [group != 0, group != 1],
                });
                index += 1;
            }
        }
        Ok(SimTrace {
            design: self.name.clone(),
            params: self.params.clone(),
            netlist_hash: self.hash.clone(),
            nets: visible.iter().map(|&n| self.flat.nets[n].clone()).collect(),
            outputs: self.output_nets().iter().map(|s| s.to_string()).collect(),
            victims: self.flat.nodes.iter().map(|n| n.label.clone()).collect(),
            settle_periods,
            steps,
        })
    }

    /// Output values after holding one assignment of the stimulus nets (in
    /// `stimulus_nets` order) for `settle_periods` periods from reset.
    pub fn settle(&self, assignment: &[bool], settle_periods: usize) -> Vec<bool> {
        let mut values = self.reset();
        for (&net, &v) in self.stimulus_nets.iter().zip(assignment) {
            values[net] = v;
        }
        self.propagate(&mut values);
        for index in 0..(2 * settle_periods) as u64 {
            self.half_cycle(&mut values, index, false);
        }
        self.outputs.iter().map(|&n| values[n]).collect()
    }

    /// Inputs, controls, outputs, then every other named net alphabetically.
    fn visible_nets(&self) -> Vec<usize> {
        let mut order: Vec<usize> = Vec::new();
        let mut seen = vec![false; self.flat.nets.len()];
        let mut push = |n: usize, order: &mut Vec<usize>| {
            if !seen[n] {
                seen[n] = true;
                order.push(n);
            }
        };
        for &n in &self.flat.inputs {
            push(n, &mut order);
        }
        for (n, d) in self.flat.drivers.iter().enumerate() {
            if matches!(d, Some(Driver::Control(_))) {
                push(n, &mut order);
            }
        }
        for &n in &self.outputs {
            push(n, &mut order);
        }
        let mut rest: Vec<usize> = (0..self.flat.nets.len()).filter(|&n| !self.flat.hidden[n]).collect();
        rest.sort_by(|a, b| self.flat.nets[*a].cmp(&self.flat.nets[*b]));
        for n in rest {
            push(n, &mut order);
        }
        order
    }
}

/// Builds a simulator and runs it with the default settle time.
pub fn run(
    netlist: &CrosstalkNetlist,
    library: &TemplateSet,
    stimulus: &Stimulus,
    settle_periods: Option<usize>,
) -> Result<SimTrace, SimError> {
    let sim = Simulator::new(netlist, library)?;
    let settle = settle_periods.unwrap_or_else(|| sim.default_settle());
    sim.run(stimulus, settle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gatelib::builtin_library;
    use crate::netlist::parse_xtn;

    fn design(body: &str) -> CrosstalkNetlist {
        parse_xtn(&format!("xtn 1\nparams vm=3/10 delta=1/50 cl=1\n{body}"), &builtin_library()).unwrap()
    }

    #[test]
    fn and2_latches_and_holds() {
        let n = design("input a b\noutput f\ngate g template=AND2 phase=0 A=a B=b Y=f\n");
        let sim = Simulator::new(&n, &builtin_library()).unwrap();
        let st = Stimulus::new(vec!["a".into(), "b".into()], vec![vec![true, true]]).unwrap();
        let trace = sim.run(&st, 1).unwrap();
        assert_eq!(trace.steps.len(), 2);
        assert_eq!(trace.steps[0].victims[0], Rational::new(20, 41));
        assert_eq!(trace.value(0, "f"), Some(true));
        // discharge half-cycle: victim reads 0, output holds
        assert_eq!(trace.steps[1].victims[0], Rational::from_integer(0));
        assert_eq!(trace.value(1, "f"), Some(true));
    }

    #[test]
    fn inverter_chain_settles_in_one_half_cycle() {
        let n = design("input a\noutput y\ninv i1 in=a out=x1\ninv i2 in=x1 out=x2\ninv i3 in=x2 out=y\n");
        let sim = Simulator::new(&n, &builtin_library()).unwrap();
        let st = Stimulus::new(vec!["a".into()], vec![vec![true]]).unwrap();
        let trace = sim.run(&st, 1).unwrap();
        assert_eq!(trace.value(0, "y"), Some(false));
    }

    #[test]
    fn fa_row() {
        let n = design("input a b c\noutput s co\ngate u template=FA phase=0 A=a B=b CI=c S=s CO=co\n");
        let sim = Simulator::new(&n, &builtin_library()).unwrap();
        assert_eq!(sim.default_settle(), 1);
        assert_eq!(sim.settle(&[true, true, false], 1), vec![false, true]);
    }

    #[test]
    fn empty_stimulus_empty_trace() {
        let n = design("input a b\noutput f\ngate g template=AND2 phase=0 A=a B=b Y=f\n");
        let st = Stimulus::new(vec!["a".into(), "b".into()], vec![]).unwrap();
        assert!(run(&n, &builtin_library(), &st, None).unwrap().steps.is_empty());
    }

    #[test]
    fn stimulus_errors() {
        assert!(matches!(
            Stimulus::new(vec!["a".into()], vec![vec![true, false]]),
            Err(SimError::StimulusWidthMismatch { .. })
        ));
        assert!(matches!(Stimulus::parse("inputs a b\n10\n1\n"), Err(SimError::StimulusWidthMismatch { .. })));
        let st = Stimulus::parse("inputs a b\n10\n11\n").unwrap();
        assert_eq!(st.rows, vec![vec![true, false], vec![true, true]]);
        let n = design("input a b\noutput f\ngate g template=AND2 phase=0 A=a B=b Y=f\n");
        let bad = Stimulus::new(vec!["a".into(), "z".into()], vec![]).unwrap();
        assert!(matches!(run(&n, &builtin_library(), &bad, None), Err(SimError::StimulusNets(_))));
    }
}
