// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use crate::gatelib::SimParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlValue {
    Zero,
    One,
    /// Runtime key input.
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlNet {
    pub name: String,
    pub value: ControlValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceKind {
    /// Pins map template port names to nets. A control pin may instead carry
    /// the literal `0` or `1` (direct mode binding).
    Gate { template: String, phase: u8, pins: BTreeMap<String, String> },
    Inverter { input: String, output: String },
    Buffer { input: String, output: String, drive: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub id: String,
    pub kind: InstanceKind,
}

impl Instance {
    pub fn is_gate(&self) -> bool {
        matches!(self.kind, InstanceKind::Gate { .. })
    }

    pub fn template(&self) -> Option<&str> {
        match &self.kind {
            InstanceKind::Gate { template, .. } => Some(template),
            _ => None,
        }
    }
}

/// Mapped crosstalk design.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrosstalkNetlist {
    pub name: String,
    pub params: SimParams,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub controls: Vec<ControlNet>,
    pub instances: Vec<Instance>,
}

impl CrosstalkNetlist {
    pub fn new(name: impl Into<String>, params: SimParams) -> Self {
        Self {
            name: name.into(),
            params,
            inputs: Vec::new(),
            outputs: Vec::new(),
            controls: Vec::new(),
            instances: Vec::new(),
        }
    }

    pub fn free_controls(&self) -> Vec<&str> {
        self.controls
            .iter()
            .filter(|c| c.value == ControlValue::Free)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn instance(&self, id: &str) -> Option<&Instance> {
        self.instances.iter().find(|i| i.id == id)
    }

    /// Every net name mentioned anywhere in the design.
    pub fn net_names(&self) -> BTreeSet<String> {
        let mut nets: BTreeSet<String> = self.inputs.iter().chain(&self.outputs).cloned().collect();
        nets.extend(self.controls.iter().map(|c| c.name.clone()));
        for inst in &self.instances {
            match &inst.kind {
                InstanceKind::Gate { pins, .. } => {
                    nets.extend(pins.values().filter(|n| !is_const_literal(n)).cloned())
                }
                InstanceKind::Inverter { input, output } | InstanceKind::Buffer { input, output, .. } => {
                    nets.insert(input.clone());
                    nets.insert(output.clone());
                }
            }
        }
        nets
    }

    /// Instance ids and nets not yet used, for generated names.
    pub fn fresh_name(&self, taken: &BTreeSet<String>, base: &str) -> String {
        let ids: BTreeSet<&str> = self.instances.iter().map(|i| i.id.as_str()).collect();
        if !taken.contains(base) && !ids.contains(base) {
            return base.to_string();
        }
        (1..)
            .map(|k| format!("{base}_{k}"))
            .find(|c| !taken.contains(c) && !ids.contains(c.as_str()))
            .expect("unbounded suffixes")
    }
}

pub(crate) fn is_const_literal(s: &str) -> bool {
    s == "0" || s == "1"
}

/// Net and instance identifiers: `[A-Za-z_][A-Za-z0-9_.]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

/// Rewrites a BLIF name into an identifier: other characters become `_` and
/// names not starting with a letter or `_` get an `n_` prefix.
pub fn xtn_name(s: &str) -> String {
    let body: String = s
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' { c } else { '_' })
        .collect();
    match body.chars().next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => body,
        _ => format!("n_{body}"),
    }
}
