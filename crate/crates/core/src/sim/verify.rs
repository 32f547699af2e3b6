// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{SimError, Simulator};
use crate::gatelib::TemplateSet;
use crate::netlist::{xtn_name, CrosstalkNetlist, LogicNetwork};

pub const DEFAULT_RANDOM_VECTORS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 0xC0FFEE;
const EXHAUSTIVE_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Exhaustive up to 16 inputs, otherwise random with the given count and seed.
    Auto { count: usize, seed: u64 },
    Exhaustive,
    Random { count: usize, seed: u64 },
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy::Auto { count: DEFAULT_RANDOM_VECTORS, seed: DEFAULT_SEED }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    /// In reference input order.
    pub vector: Vec<bool>,
    pub expected: Vec<bool>,
    pub got: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    /// Strategy actually used (`Auto` resolved).
    pub strategy: Strategy,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub vectors: usize,
    pub mismatches: Vec<Mismatch>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn summary(&self) -> String {
        let how = match self.strategy {
            Strategy::Exhaustive => "exhaustive".to_string(),
            Strategy::Random { count, seed } => format!("random n={count} seed={seed:#x}"),
            Strategy::Auto { .. } => unreachable!("resolved before reporting"),
        };
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        format!("{verdict} {}/{} vectors ({how})", self.vectors - self.mismatches.len(), self.vectors)
    }
}

fn set(v: &[String]) -> BTreeSet<&str> {
    v.iter().map(String::as_str).collect()
}

fn bits(v: &[bool]) -> String {
    v.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

impl Mismatch {
    pub fn describe(&self, report: &EquivalenceReport) -> String {
        format!(
            "inputs {} = {} expected {} = {} got {}",
            report.inputs.join(" "),
            bits(&self.vector),
            report.outputs.join(" "),
            bits(&self.expected),
            bits(&self.got)
        )
    }
}

/// Random vectors: one draw per 64 inputs per vector, low bit first.
pub(crate) fn random_vectors(width: usize, count: usize, seed: u64) -> Vec<Vec<bool>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut v = Vec::with_capacity(width);
            while v.len() < width {
                let word = rng.next_u64();
                let take = (width - v.len()).min(64);
                v.extend((0..take).map(|i| (word >> i) & 1 == 1));
            }
            v
        })
        .collect()
}

/// Exhaustive vector `k`: first input is the most significant bit.
fn exhaustive_vector(k: u64, width: usize) -> Vec<bool> {
    (0..width).map(|i| (k >> (width - 1 - i)) & 1 == 1).collect()
}

/// Checks the settled outputs of `netlist` against cover evaluation of `reference`.
pub fn verify_equivalence(
    netlist: &CrosstalkNetlist,
    library: &TemplateSet,
    reference: &LogicNetwork,
    strategy: Strategy,
) -> Result<EquivalenceReport, SimError> {
    let sim = Simulator::new(netlist, library)?;
    let free = netlist.free_controls();
    if !free.is_empty() {
        return Err(SimError::InterfaceMismatch(format!(
            "free control nets {} must be bound by a key first",
            free.join(" ")
        )));
    }
    // BLIF names are compared in their sanitized form
    let ref_inputs: Vec<String> = reference.inputs.iter().map(|n| xtn_name(n)).collect();
    let ref_outputs: Vec<String> = reference.outputs.iter().map(|n| xtn_name(n)).collect();
    let (ni, ri) = (set(&netlist.inputs), set(&ref_inputs));
    let (no, ro) = (set(&netlist.outputs), set(&ref_outputs));
    if ni != ri || no != ro {
        let mut missing: Vec<&str> = ri.difference(&ni).chain(ro.difference(&no)).copied().collect();
        missing.extend(ni.difference(&ri).chain(no.difference(&ro)).copied());
        return Err(SimError::InterfaceMismatch(format!("nets not shared by both sides: {}", missing.join(" "))));
    }
    // reference order -> simulator stimulus order
    let sim_inputs = sim.stimulus_nets();
    let input_map: Vec<usize> =
        sim_inputs.iter().map(|n| ref_inputs.iter().position(|r| r == n).expect("same sets")).collect();
    let sim_outputs = sim.output_nets();
    let output_map: Vec<usize> =
        ref_outputs.iter().map(|r| sim_outputs.iter().position(|n| n == r).expect("same sets")).collect();

    let width = reference.inputs.len();
    let strategy = match strategy {
        Strategy::Auto { count, seed } if width > EXHAUSTIVE_LIMIT => Strategy::Random { count, seed },
        Strategy::Auto { .. } => Strategy::Exhaustive,
        s => s,
    };
    let vectors: Vec<Vec<bool>> = match strategy {
        Strategy::Exhaustive => (0..1u64 << width).map(|k| exhaustive_vector(k, width)).collect(),
        Strategy::Random { count, seed } => random_vectors(width, count, seed),
        Strategy::Auto { .. } => unreachable!(),
    };
    let settle = sim.default_settle();
    let mismatches: Vec<Mismatch> = vectors
        .par_iter()
        .with_min_len(256)
        .filter_map(|v| {
            let assignment: Vec<bool> = input_map.iter().map(|&i| v[i]).collect();
            let raw = sim.settle(&assignment, settle);
            let got: Vec<bool> = output_map.iter().map(|&i| raw[i]).collect();
            let expected = reference.evaluate(v);
            (got != expected).then(|| Mismatch { vector: v.clone(), expected, got })
        })
        .collect();
    Ok(EquivalenceReport {
        strategy,
        inputs: reference.inputs.clone(),
        outputs: reference.outputs.clone(),
        vectors: vectors.len(),
        mismatches,
    })
}
