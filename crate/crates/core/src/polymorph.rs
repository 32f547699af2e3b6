// SPDX-License-Identifier: Apache-2.0

//! Key configuration of polymorphic cells, function enumeration over keys and
//! a black-box key search.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gatelib::TemplateSet;
use crate::netlist::{ControlValue, CrosstalkNetlist};
use crate::sim::{SimError, Simulator, DEFAULT_SEED};

pub const DEFAULT_KEY_LIMIT: usize = 16;
/// Designs with more inputs than this get sampled signatures.
pub const TABLE_INPUT_LIMIT: usize = 12;
pub const SAMPLED_VECTORS: usize = 1024;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("key has {got} bit(s) but the design has {expected} free control net(s)")]
    KeyWidthMismatch { expected: usize, got: usize },
    #[error("key names control {0}, which is not a free control net of the design")]
    UnknownControl(String),
    #[error("invalid key {0:?}")]
    BadKey(String),
    #[error("{width} key bits exceed the enumeration limit of {limit}")]
    TooManyKeys { width: usize, limit: usize },
    #[error("oracle returned {got} output(s), expected {expected}")]
    OracleWidth { expected: usize, got: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Control bits in control-net order; the first net is the least significant hex bit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Key {
    pub controls: Vec<String>,
    pub bits: Vec<bool>,
}

/// JSON form: `{"controls": [...], "key": "<hex>"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyManifest {
    pub controls: Vec<String>,
    pub key: String,
}

impl Key {
    pub fn new(controls: Vec<String>, bits: Vec<bool>) -> Result<Self, PolyError> {
        if controls.len() != bits.len() {
            return Err(PolyError::KeyWidthMismatch { expected: controls.len(), got: bits.len() });
        }
        Ok(Self { controls, bits })
    }

    /// Key `value` over `controls`; bit `i` of `value` drives control `i`.
    pub fn from_value(controls: Vec<String>, value: u64) -> Self {
        let bits = (0..controls.len()).map(|i| i < 64 && (value >> i) & 1 == 1).collect();
        Self { controls, bits }
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    /// Numeric value; only meaningful up to 64 bits.
    pub fn value(&self) -> u64 {
        self.bits.iter().take(64).enumerate().fold(0, |acc, (i, b)| acc | ((*b as u64) << i))
    }

    pub fn to_hex(&self) -> String {
        if self.bits.is_empty() {
            return "0".to_string();
        }
        let digits = self.bits.len().div_ceil(4);
        (0..digits)
            .rev()
            .map(|d| {
                let nibble = (0..4).fold(0u32, |acc, b| {
                    let i = 4 * d + b;
                    acc | ((self.bits.get(i).copied().unwrap_or(false) as u32) << b)
                });
                char::from_digit(nibble, 16).expect("nibble")
            })
            .collect()
    }

    pub fn from_hex(controls: Vec<String>, hex: &str) -> Result<Self, PolyError> {
        let digits = hex.trim().trim_start_matches("0x").trim_start_matches("0X");
        if digits.is_empty() {
            return Err(PolyError::BadKey(hex.to_string()));
        }
        let mut bits = vec![false; controls.len()];
        for (d, c) in digits.chars().rev().enumerate() {
            let nibble = c.to_digit(16).ok_or_else(|| PolyError::BadKey(hex.to_string()))?;
            for b in 0..4 {
                if (nibble >> b) & 1 == 1 {
                    let i = 4 * d + b;
                    if i >= bits.len() {
                        return Err(PolyError::BadKey(format!("{hex} is wider than {} bit(s)", bits.len())));
                    }
                    bits[i] = true;
                }
            }
        }
        Ok(Self { controls, bits })
    }

    pub fn manifest(&self) -> KeyManifest {
        KeyManifest { controls: self.controls.clone(), key: self.to_hex() }
    }

    pub fn from_manifest(m: &KeyManifest) -> Result<Self, PolyError> {
        Self::from_hex(m.controls.clone(), &m.key)
    }
}

fn free_controls(netlist: &CrosstalkNetlist) -> Vec<String> {
    netlist.free_controls().into_iter().map(String::from).collect()
}

/// Ties every free control net to its key bit.
pub fn apply_key(netlist: &CrosstalkNetlist, key: &Key) -> Result<CrosstalkNetlist, PolyError> {
    let free = free_controls(netlist);
    if free.len() != key.width() {
        return Err(PolyError::KeyWidthMismatch { expected: free.len(), got: key.width() });
    }
    let mut out = netlist.clone();
    for (name, bit) in key.controls.iter().zip(&key.bits) {
        let c = out
            .controls
            .iter_mut()
            .find(|c| &c.name == name && c.value == ControlValue::Free)
            .ok_or_else(|| PolyError::UnknownControl(name.clone()))?;
        c.value = if *bit { ControlValue::One } else { ControlValue::Zero };
    }
    Ok(out)
}

/// How atlas signatures were sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Every input vector, first input most significant.
    Exhaustive,
    Random { count: usize, seed: u64 },
}

/// Output behavior for every key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionAtlas {
    pub controls: Vec<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub sampling: Sampling,
    /// Indexed by key value; packed bits, vector-major then output.
    pub signatures: Vec<Vec<u64>>,
}

impl FunctionAtlas {
    pub fn keys(&self) -> usize {
        self.signatures.len()
    }

    /// Keys grouped by identical signature, groups ordered by smallest key.
    pub fn classes(&self) -> Vec<Vec<u64>> {
        let mut groups: BTreeMap<&[u64], Vec<u64>> = BTreeMap::new();
        for (k, s) in self.signatures.iter().enumerate() {
            groups.entry(s.as_slice()).or_default().push(k as u64);
        }
        let mut classes: Vec<Vec<u64>> = groups.into_values().collect();
        classes.sort();
        classes
    }

    pub fn distinct_functions(&self) -> usize {
        self.classes().len()
    }

    /// Output bits for `key` on the atlas vector `vector`.
    pub fn outputs_at(&self, key: u64, vector: usize) -> Vec<bool> {
        let sig = &self.signatures[key as usize];
        let w = self.outputs.len();
        (0..w)
            .map(|o| {
                let bit = vector * w + o;
                (sig[bit / 64] >> (bit % 64)) & 1 == 1
            })
            .collect()
    }
}

fn pack(rows: impl Iterator<Item = Vec<bool>>) -> Vec<u64> {
    let mut words = Vec::new();
    let mut n = 0usize;
    for row in rows {
        for b in row {
            if n.is_multiple_of(64) {
                words.push(0u64);
            }
            if b {
                *words.last_mut().expect("pushed") |= 1 << (n % 64);
            }
            n += 1;
        }
    }
    words
}

/// Input vector `k` of `width` inputs, first input most significant.
fn vector(k: u64, width: usize) -> Vec<bool> {
    (0..width).map(|i| (k >> (width - 1 - i)) & 1 == 1).collect()
}

struct Keyed {
    sim: Simulator,
    settle: usize,
    inputs: Vec<String>,
    controls: Vec<String>,
    outputs: Vec<String>,
}

impl Keyed {
    fn new(netlist: &CrosstalkNetlist, library: &TemplateSet) -> Result<Self, PolyError> {
        let sim = Simulator::new(netlist, library)?;
        let settle = sim.default_settle();
        let outputs = sim.output_nets().into_iter().map(String::from).collect();
        Ok(Self { sim, settle, inputs: netlist.inputs.clone(), controls: free_controls(netlist), outputs })
    }

    fn eval(&self, inputs: &[bool], key: u64) -> Vec<bool> {
        let mut assignment = inputs.to_vec();
        assignment.extend((0..self.controls.len()).map(|i| (key >> i) & 1 == 1));
        self.sim.settle(&assignment, self.settle)
    }

    fn check_width(&self, limit: usize) -> Result<(), PolyError> {
        let width = self.controls.len();
        if width > limit {
            return Err(PolyError::TooManyKeys { width, limit });
        }
        Ok(())
    }
}

/// Simulates every key. Designs with up to 12 inputs get full truth tables,
/// larger ones a signature over `SAMPLED_VECTORS` seeded random vectors.
pub fn enumerate_functions(
    netlist: &CrosstalkNetlist,
    library: &TemplateSet,
    limit: usize,
    seed: u64,
) -> Result<FunctionAtlas, PolyError> {
    let keyed = Keyed::new(netlist, library)?;
    keyed.check_width(limit)?;
    let n = keyed.inputs.len();
    let (sampling, vectors): (Sampling, Vec<Vec<bool>>) = if n <= TABLE_INPUT_LIMIT {
        (Sampling::Exhaustive, (0..1u64 << n).map(|k| vector(k, n)).collect())
    } else {
        let count = SAMPLED_VECTORS;
        (Sampling::Random { count, seed }, crate::sim::random_vectors(n, count, seed))
    };
    let keys = 1u64 << keyed.controls.len();
    let signatures: Vec<Vec<u64>> =
        (0..keys).into_par_iter().map(|k| pack(vectors.iter().map(|v| keyed.eval(v, k)))).collect();
    Ok(FunctionAtlas {
        controls: keyed.controls,
        inputs: keyed.inputs,
        outputs: keyed.outputs,
        sampling,
        signatures,
    })
}

/// Default enumeration seed, shared with the verifier.
pub const DEFAULT_ATLAS_SEED: u64 = DEFAULT_SEED;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttackOutcome {
    Recovered(Key),
    /// Keys that agree with the oracle on every queried vector.
    Ambiguous(Vec<Key>),
    NotFound,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackReport {
    pub outcome: AttackOutcome,
    pub queries: u64,
    /// Whether every input vector was queried before stopping.
    pub complete: bool,
}

/// Sequential elimination: queries input vectors in Gray-code order and drops
/// every key that disagrees with the oracle. Stops when no key survives, the
/// vector space is exhausted or `max_queries` is reached.
pub fn brute_force_key(
    netlist: &CrosstalkNetlist,
    library: &TemplateSet,
    oracle: &mut dyn FnMut(&[bool]) -> Vec<bool>,
    max_queries: u64,
) -> Result<AttackReport, PolyError> {
    let keyed = Keyed::new(netlist, library)?;
    keyed.check_width(DEFAULT_KEY_LIMIT)?;
    let n = keyed.inputs.len();
    let space = if n >= 64 { u64::MAX } else { 1u64 << n };
    let mut survivors: Vec<u64> = (0..1u64 << keyed.controls.len()).collect();
    let mut queries = 0u64;
    let mut i = 0u64;
    while !survivors.is_empty() && i < space && queries < max_queries {
        let gray = i ^ (i >> 1);
        let v = vector(gray, n);
        let observed = oracle(&v);
        queries += 1;
        if observed.len() != keyed.outputs.len() {
            return Err(PolyError::OracleWidth { expected: keyed.outputs.len(), got: observed.len() });
        }
        survivors.retain(|&k| keyed.eval(&v, k) == observed);
        i += 1;
    }
    let complete = i >= space;
    let key = |k: u64| Key::from_value(keyed.controls.clone(), k);
    let outcome = match survivors.len() {
        0 => AttackOutcome::NotFound,
        1 => AttackOutcome::Recovered(key(survivors[0])),
        _ => AttackOutcome::Ambiguous(survivors.into_iter().map(key).collect()),
    };
    Ok(AttackReport { outcome, queries, complete })
}

/// Oracle answering with the design itself configured by `key`.
pub fn keyed_oracle(
    netlist: &CrosstalkNetlist,
    library: &TemplateSet,
    key: &Key,
) -> Result<impl FnMut(&[bool]) -> Vec<bool>, PolyError> {
    let configured = apply_key(netlist, key)?;
    let sim = Simulator::new(&configured, library)?;
    let settle = sim.default_settle();
    Ok(move |v: &[bool]| sim.settle(v, settle))
}
