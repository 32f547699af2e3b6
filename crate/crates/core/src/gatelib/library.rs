// SPDX-License-Identifier: Apache-2.0

//! Template sets: the compiled-in library and user libraries loaded from JSON.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    check_mode, AggressorPort, CompositeBody, CompositeNode, CompositeOutput, GateMode, GateTemplate,
    SimParams, Signal, TemplateBody, MAX_NODE_INPUTS,
};

/// Polymorphic pairs; mode 0 realizes the first function, mode 1 the second.
pub const POLYMORPHIC_PAIRS: [&str; 7] = [
    "AND2-OR2", "AND3-OR3", "AO21-OA21", "AND-AO21", "AND3-OA21", "OR3-AO21", "OR3-OA21",
];

#[derive(Debug, Error)]
pub enum LibraryError {
    #[error("invalid library JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("template {template}: {reason}")]
    Structure { template: String, reason: String },
    #[error("duplicate template name {0}")]
    Duplicate(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateSet {
    #[serde(default)]
    pub params: SimParams,
    pub templates: Vec<GateTemplate>,
}

impl TemplateSet {
    pub fn get(&self, name: &str) -> Option<&GateTemplate> {
        self.templates.iter().find(|t| t.name == name)
    }

    pub fn from_json(text: &str) -> Result<Self, LibraryError> {
        let set: TemplateSet = serde_json::from_str(text)?;
        set.check_structure()?;
        Ok(set)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("template set serializes");
        s.push('\n');
        s
    }

    /// Structural invariants; electrical consistency is reported separately
    /// so that deliberately broken libraries can still be loaded and probed.
    pub fn check_structure(&self) -> Result<(), LibraryError> {
        let mut names = BTreeSet::new();
        for t in &self.templates {
            if !names.insert(t.name.as_str()) {
                return Err(LibraryError::Duplicate(t.name.clone()));
            }
            check_template(t)?;
        }
        Ok(())
    }

    /// (template, mode id or internal node index, passed) for every victim node.
    pub fn consistency_failures(&self) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        for t in &self.templates {
            for (i, m) in t.victim_modes().into_iter().enumerate() {
                if !check_mode(m, &self.params).passed() {
                    out.push((t.name.clone(), i));
                }
            }
        }
        out
    }
}

fn fail(t: &GateTemplate, reason: impl Into<String>) -> LibraryError {
    LibraryError::Structure { template: t.name.clone(), reason: reason.into() }
}

fn check_mode_shape(t: &GateTemplate, m: &GateMode, arity: usize) -> Result<(), LibraryError> {
    if m.data_weights.len() != arity {
        return Err(fail(t, format!("mode {} has {} weights for {} inputs", m.mode_id, m.data_weights.len(), arity)));
    }
    if arity > MAX_NODE_INPUTS {
        return Err(fail(t, "more than six inputs on one victim node"));
    }
    if m.data_weights.contains(&0) {
        return Err(fail(t, "coupling weights must be at least 1"));
    }
    if m.margin == 0 || m.margin > m.data_weights.iter().sum::<u32>() {
        return Err(fail(t, format!("mode {} margin outside 1..=sum(weights)", m.mode_id)));
    }
    Ok(())
}

fn check_template(t: &GateTemplate) -> Result<(), LibraryError> {
    let mut ports = BTreeSet::new();
    for p in t.data_ports.iter().chain(&t.control_ports) {
        if p.weight == 0 {
            return Err(fail(t, format!("port {} has zero weight", p.name)));
        }
        if !ports.insert(p.name.as_str()) {
            return Err(fail(t, format!("duplicate port {}", p.name)));
        }
    }
    if t.data_ports.is_empty() {
        return Err(fail(t, "no data ports"));
    }
    match &t.body {
        TemplateBody::Single { modes, .. } => {
            if modes.is_empty() {
                return Err(fail(t, "no modes"));
            }
            let mut seen = BTreeSet::new();
            let mut ids = BTreeSet::new();
            for m in modes {
                check_mode_shape(t, m, t.data_ports.len())?;
                if m.control_assignment.len() != t.control_ports.len() {
                    return Err(fail(t, format!("mode {} control assignment width", m.mode_id)));
                }
                if !seen.insert(m.control_assignment.clone()) || !ids.insert(m.mode_id) {
                    return Err(fail(t, "two modes share a control assignment or id"));
                }
            }
            if seen.len() != 1usize << t.control_ports.len() {
                return Err(fail(t, "modes do not cover every control assignment"));
            }
            if t.output_ports().iter().any(|o| ports.contains(o)) {
                return Err(fail(t, "port name collides with output Y"));
            }
        }
        TemplateBody::Composite(body) => {
            if !t.control_ports.is_empty() {
                return Err(fail(t, "composite templates cannot be polymorphic"));
            }
            if body.nodes.is_empty() || body.outputs.is_empty() {
                return Err(fail(t, "composite needs nodes and outputs"));
            }
            let valid = |s: &Signal, limit: usize| match *s {
                Signal::Port(i) => i < t.data_ports.len(),
                Signal::Node(j) | Signal::NodeInv(j) => j < limit,
            };
            for (idx, node) in body.nodes.iter().enumerate() {
                check_mode_shape(t, &node.mode, node.inputs.len())?;
                if !node.inputs.iter().all(|s| valid(s, idx)) {
                    return Err(fail(t, format!("node {idx} references a later node or missing port")));
                }
            }
            for o in &body.outputs {
                if !valid(&o.source, body.nodes.len()) {
                    return Err(fail(t, format!("output {} has a dangling source", o.port)));
                }
                if !ports.insert(o.port.as_str()) {
                    return Err(fail(t, format!("duplicate port {}", o.port)));
                }
            }
        }
    }
    Ok(())
}

fn ports(names: &[&str], weights: &[u32]) -> Vec<AggressorPort> {
    names.iter().zip(weights).map(|(n, w)| AggressorPort::data(n, *w)).collect()
}

fn single(name: &str, port_names: &[&str], mode: GateMode, inverted: bool) -> GateTemplate {
    GateTemplate {
        name: name.to_string(),
        data_ports: ports(port_names, &mode.data_weights),
        control_ports: Vec::new(),
        declared_cost: None,
        body: TemplateBody::Single { modes: vec![mode], output_inverted: inverted },
    }
}

fn pair(name: &str, first: GateMode, second: GateMode) -> GateTemplate {
    let names = ["A", "B", "C"];
    let arity = first.data_weights.len();
    let nominal: Vec<u32> = (0..arity).map(|i| first.data_weights[i].max(second.data_weights[i])).collect();
    let mut m0 = first;
    m0.mode_id = 0;
    m0.control_assignment = vec![false];
    let mut m1 = second;
    m1.mode_id = 1;
    m1.control_assignment = vec![true];
    GateTemplate {
        name: name.to_string(),
        data_ports: ports(&names[..arity], &nominal),
        // control coupling kept at twice the unit data coupling
        control_ports: vec![AggressorPort::control("CT", 20)],
        declared_cost: None,
        body: TemplateBody::Single { modes: vec![m0, m1], output_inverted: false },
    }
}

fn m(weights: &[u32], aux: u32, margin: u32) -> GateMode {
    GateMode::single(weights.to_vec(), aux, margin)
}

fn xor_like(name: &str, inverted: bool) -> GateTemplate {
    GateTemplate {
        name: name.to_string(),
        data_ports: ports(&["A", "B"], &[10, 10]),
        control_ports: Vec::new(),
        declared_cost: None,
        body: TemplateBody::Composite(CompositeBody {
            nodes: vec![
                CompositeNode {
                    inputs: vec![Signal::Port(0), Signal::Port(1)],
                    mode: m(&[10, 10], 20, 20),
                    output_inverted: true,
                },
                CompositeNode {
                    inputs: vec![Signal::Port(0), Signal::Port(1), Signal::Node(0)],
                    mode: m(&[10, 10, 20], 40, 30),
                    output_inverted: inverted,
                },
            ],
            outputs: vec![CompositeOutput { port: "Y".into(), source: Signal::Node(1) }],
        }),
    }
}

fn full_adder() -> GateTemplate {
    GateTemplate {
        name: "FA".to_string(),
        data_ports: ports(&["A", "B", "CI"], &[10, 10, 10]),
        control_ports: Vec::new(),
        declared_cost: Some(13),
        body: TemplateBody::Composite(CompositeBody {
            nodes: vec![
                // inverted majority: carry complement
                CompositeNode {
                    inputs: vec![Signal::Port(0), Signal::Port(1), Signal::Port(2)],
                    mode: m(&[10, 10, 10], 10, 20),
                    output_inverted: true,
                },
                // sum flips iff A + B + CI + 2*~CO >= 3
                CompositeNode {
                    inputs: vec![Signal::Port(0), Signal::Port(1), Signal::Port(2), Signal::Node(0)],
                    mode: m(&[10, 10, 10, 20], 30, 30),
                    output_inverted: false,
                },
            ],
            outputs: vec![
                CompositeOutput { port: "S".into(), source: Signal::Node(1) },
                CompositeOutput { port: "CO".into(), source: Signal::NodeInv(0) },
            ],
        }),
    }
}

/// The compiled-in crosstalk library, calibrated for the default parameters.
pub fn builtin_library() -> TemplateSet {
    let ab = ["A", "B"];
    let abc = ["A", "B", "C"];
    let and2 = m(&[10, 10], 20, 20);
    let or2 = m(&[10, 10], 0, 10);
    let and3 = m(&[10, 10, 10], 50, 30);
    let or3 = m(&[10, 10, 10], 0, 10);
    let maj3 = m(&[10, 10, 10], 10, 20);
    let ao21 = m(&[10, 10, 20], 0, 20);
    let oa21 = m(&[10, 10, 20], 40, 30);
    // AND3 on the AO21 port weights so only the load branch switches
    let and3_wide = m(&[10, 10, 20], 70, 40);

    let templates = vec![
        single("NAND2", &ab, and2.clone(), true),
        single("NOR2", &ab, or2.clone(), true),
        single("AND2", &ab, and2.clone(), false),
        single("OR2", &ab, or2.clone(), false),
        single("NAND3", &abc, and3.clone(), true),
        single("NOR3", &abc, or3.clone(), true),
        single("AND3", &abc, and3.clone(), false),
        single("OR3", &abc, or3.clone(), false),
        single("MAJ3", &abc, maj3, false),
        single("AO21", &abc, ao21.clone(), false),
        single("OA21", &abc, oa21.clone(), false),
        single("XBUF", &["A"], m(&[10], 0, 10), false),
        xor_like("XOR2", false),
        xor_like("XNOR2", true),
        full_adder(),
        pair("AND2-OR2", and2, or2),
        pair("AND3-OR3", and3, or3.clone()),
        pair("AO21-OA21", ao21.clone(), oa21.clone()),
        pair("AND-AO21", and3_wide.clone(), ao21.clone()),
        pair("AND3-OA21", and3_wide, oa21.clone()),
        pair("OR3-AO21", or3.clone(), ao21),
        pair("OR3-OA21", or3, oa21),
    ];
    TemplateSet { params: SimParams::default(), templates }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gatelib::{calibrate, CalibrationBounds, TruthTable};

    #[test]
    fn builtin_is_structurally_sound_and_consistent() {
        let lib = builtin_library();
        lib.check_structure().unwrap();
        assert!(lib.consistency_failures().is_empty(), "{:?}", lib.consistency_failures());
    }

    #[test]
    fn json_round_trip() {
        let lib = builtin_library();
        let back = TemplateSet::from_json(&lib.to_json()).unwrap();
        assert_eq!(back, lib);
    }

    #[test]
    fn static_gates_are_calibration_minimal() {
        let lib = builtin_library();
        let p = SimParams::default();
        let b = CalibrationBounds::default();
        for name in ["AND2", "OR2", "AND3", "OR3", "MAJ3", "AO21", "OA21", "XBUF"] {
            let t = lib.get(name).unwrap();
            let mode = &t.modes()[0];
            let cal = calibrate(&mode.flip_table(), &p, &b).unwrap();
            assert_eq!(&cal, mode, "{name}");
        }
    }

    #[test]
    fn pairs_realize_named_functions() {
        let lib = builtin_library();
        let and3 = TruthTable::from_fn(3, |x| x[0] && x[1] && x[2]);
        let or3 = TruthTable::from_fn(3, |x| x[0] || x[1] || x[2]);
        let ao21 = TruthTable::from_fn(3, |x| (x[0] && x[1]) || x[2]);
        let oa21 = TruthTable::from_fn(3, |x| (x[0] || x[1]) && x[2]);
        let expect = [
            ("AND3-OR3", and3, or3),
            ("AO21-OA21", ao21, oa21),
            ("AND-AO21", and3, ao21),
            ("AND3-OA21", and3, oa21),
            ("OR3-AO21", or3, ao21),
            ("OR3-OA21", or3, oa21),
        ];
        for (name, f0, f1) in expect {
            let t = lib.get(name).unwrap();
            assert_eq!(t.function(&[false], 0).unwrap(), f0, "{name} mode 0");
            assert_eq!(t.function(&[true], 0).unwrap(), f1, "{name} mode 1");
        }
    }

    #[test]
    fn rejects_bad_structure() {
        let mut lib = builtin_library();
        if let TemplateBody::Single { modes, .. } = &mut lib.templates[0].body {
            modes[0].margin = 50;
        }
        assert!(matches!(lib.check_structure(), Err(LibraryError::Structure { .. })));
        let mut lib = builtin_library();
        let dup = lib.templates[0].clone();
        lib.templates.push(dup);
        assert!(matches!(lib.check_structure(), Err(LibraryError::Duplicate(_))));
    }
}
