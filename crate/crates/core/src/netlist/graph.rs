// SPDX-License-Identifier: Apache-2.0

//! Flattened view of a crosstalk netlist: every victim node (composite cells
//! expanded) and every static stage, with nets resolved to indices.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::ir::{is_const_literal, ControlValue, CrosstalkNetlist, InstanceKind};
use super::validate::{Diagnostic, Severity};
use crate::gatelib::{GateMode, Signal, TemplateBody, TemplateSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Driver {
    Input,
    Control(ControlValue),
    Node(usize),
    Static(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CtrlSource {
    Net(usize),
    Const(bool),
}

#[derive(Debug, Clone)]
pub(crate) struct FlatNode {
    pub inst: usize,
    pub depth: u32,
    pub label: String,
    pub inputs: Vec<usize>,
    pub controls: Vec<CtrlSource>,
    pub modes: Vec<GateMode>,
    pub output_inverted: bool,
    pub output: usize,
    pub phase: u8,
}

#[derive(Debug, Clone)]
pub(crate) struct FlatStatic {
    pub invert: bool,
    pub input: usize,
    pub output: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Flat {
    pub nets: Vec<String>,
    pub index: HashMap<String, usize>,
    /// Nets internal to composite cells.
    pub hidden: Vec<bool>,
    pub drivers: Vec<Option<Driver>>,
    pub nodes: Vec<FlatNode>,
    pub statics: Vec<FlatStatic>,
    /// Statics in dependency order.
    pub static_order: Vec<usize>,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("combinational cycle through nets {}", nets.join(" -> "))]
pub struct CycleDetected {
    pub nets: Vec<String>,
}

/// Result of levelization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Levels {
    /// Crosstalk-gate instances by id. Composite cells report the level of
    /// their entry nodes.
    pub gates: BTreeMap<String, u32>,
    /// Inverters and buffers inherit the level of the gate driving them
    /// (0 when fed by primary inputs).
    pub statics: BTreeMap<String, u32>,
    /// Highest victim-node level, composite internals included.
    pub max_level: u32,
}

impl Levels {
    pub fn phase(&self, gate: &str) -> Option<u8> {
        self.gates.get(gate).map(|l| (l % 2) as u8)
    }
}

impl Flat {
    fn net(&mut self, name: &str, hidden: bool) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.nets.push(name.to_string());
        self.hidden.push(hidden);
        self.drivers.push(None);
        self.index.insert(name.to_string(), self.nets.len() - 1);
        self.nets.len() - 1
    }

    /// Builds the flat graph, collecting structural problems. Returns the graph
    /// only when none were found.
    pub fn build(netlist: &CrosstalkNetlist, library: &TemplateSet, diags: &mut Vec<Diagnostic>) -> Option<Flat> {
        let mut flat = Flat {
            nets: Vec::new(),
            index: HashMap::new(),
            hidden: Vec::new(),
            drivers: Vec::new(),
            nodes: Vec::new(),
            statics: Vec::new(),
            static_order: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        };
        let before = diags.len();
        let mut error = |location: &str, message: String| {
            diags.push(Diagnostic { severity: Severity::Error, location: location.to_string(), message })
        };

        let drive = |flat: &mut Flat, net: usize, d: Driver, location: &str, error: &mut dyn FnMut(&str, String)| {
            if flat.drivers[net].is_some() {
                error(location, format!("net {} has more than one driver", flat.nets[net]));
            } else {
                flat.drivers[net] = Some(d);
            }
        };

        for name in &netlist.inputs {
            let n = flat.net(name, false);
            drive(&mut flat, n, Driver::Input, name, &mut error);
            flat.inputs.push(n);
        }
        for c in &netlist.controls {
            let n = flat.net(&c.name, false);
            drive(&mut flat, n, Driver::Control(c.value), &c.name, &mut error);
        }
        let is_control = |flat: &Flat, net: usize| matches!(flat.drivers[net], Some(Driver::Control(_)));

        let mut seen_ids: HashMap<&str, usize> = HashMap::new();
        for (k, inst) in netlist.instances.iter().enumerate() {
            if seen_ids.insert(inst.id.as_str(), k).is_some() {
                error(&inst.id, format!("duplicate instance id {}", inst.id));
            }
            match &inst.kind {
                InstanceKind::Inverter { input, output } | InstanceKind::Buffer { input, output, .. } => {
                    if let InstanceKind::Buffer { drive: 0, .. } = inst.kind {
                        error(&inst.id, "buffer drive must be positive".into());
                    }
                    let i = flat.net(input, false);
                    let o = flat.net(output, false);
                    let s = flat.statics.len();
                    flat.statics.push(FlatStatic {
                        invert: matches!(inst.kind, InstanceKind::Inverter { .. }),
                        input: i,
                        output: o,
                    });
                    drive(&mut flat, o, Driver::Static(s), &inst.id, &mut error);
                }
                InstanceKind::Gate { template, phase, pins } => {
                    let Some(t) = library.get(template) else {
                        error(&inst.id, format!("unknown template {template}"));
                        continue;
                    };
                    if *phase > 1 {
                        error(&inst.id, format!("phase {phase} is not 0 or 1"));
                    }
                    let outputs = t.output_ports();
                    let mut expected: Vec<&str> = t
                        .data_ports
                        .iter()
                        .chain(&t.control_ports)
                        .map(|p| p.name.as_str())
                        .chain(outputs.iter().copied())
                        .collect();
                    expected.sort_unstable();
                    let given: Vec<&str> = pins.keys().map(String::as_str).collect();
                    if expected != given {
                        error(
                            &inst.id,
                            format!("template {template} has ports {} but pins {}", expected.join(","), given.join(",")),
                        );
                        continue;
                    }
                    let mut data = Vec::new();
                    for p in &t.data_ports {
                        let net = &pins[&p.name];
                        if is_const_literal(net) {
                            error(&inst.id, format!("data port {} bound to a constant", p.name));
                            continue;
                        }
                        let n = flat.net(net, false);
                        data.push(n);
                    }
                    let mut controls = Vec::new();
                    for p in &t.control_ports {
                        let net = &pins[&p.name];
                        controls.push(match net.as_str() {
                            "0" => CtrlSource::Const(false),
                            "1" => CtrlSource::Const(true),
                            _ => {
                                let n = flat.net(net, false);
                                if !is_control(&flat, n) {
                                    error(&inst.id, format!("control port {} bound to non-control net {net}", p.name));
                                }
                                CtrlSource::Net(n)
                            }
                        });
                    }
                    if data.len() != t.data_ports.len() {
                        continue;
                    }
                    match &t.body {
                        TemplateBody::Single { modes, output_inverted } => {
                            let o = flat.net(&pins[outputs[0]], false);
                            let idx = flat.nodes.len();
                            flat.nodes.push(FlatNode {
                                inst: k,
                                depth: 0,
                                label: inst.id.clone(),
                                inputs: data,
                                controls,
                                modes: modes.clone(),
                                output_inverted: *output_inverted,
                                output: o,
                                phase: *phase % 2,
                            });
                            drive(&mut flat, o, Driver::Node(idx), &inst.id, &mut error);
                        }
                        TemplateBody::Composite(body) => {
                            let depths = body.node_depths();
                            let node_nets: Vec<usize> =
                                (0..body.nodes.len()).map(|j| flat.net(&format!("{}$n{j}", inst.id), true)).collect();
                            let mut inv_nets: HashMap<usize, usize> = HashMap::new();
                            for j in body.inverted_taps() {
                                let o = flat.net(&format!("{}$n{j}~", inst.id), true);
                                let s = flat.statics.len();
                                flat.statics.push(FlatStatic { invert: true, input: node_nets[j], output: o });
                                drive(&mut flat, o, Driver::Static(s), &inst.id, &mut error);
                                inv_nets.insert(j, o);
                            }
                            let resolve = |s: &Signal| match *s {
                                Signal::Port(i) => data[i],
                                Signal::Node(j) => node_nets[j],
                                Signal::NodeInv(j) => inv_nets[&j],
                            };
                            for (j, node) in body.nodes.iter().enumerate() {
                                let idx = flat.nodes.len();
                                flat.nodes.push(FlatNode {
                                    inst: k,
                                    depth: depths[j],
                                    label: format!("{}.n{j}", inst.id),
                                    inputs: node.inputs.iter().map(resolve).collect(),
                                    controls: Vec::new(),
                                    modes: vec![node.mode.clone()],
                                    output_inverted: node.output_inverted,
                                    output: node_nets[j],
                                    phase: ((*phase as u32 + depths[j]) % 2) as u8,
                                });
                                drive(&mut flat, node_nets[j], Driver::Node(idx), &inst.id, &mut error);
                            }
                            for out in &body.outputs {
                                let o = flat.net(&pins[&out.port], false);
                                let s = flat.statics.len();
                                flat.statics.push(FlatStatic { invert: false, input: resolve(&out.source), output: o });
                                drive(&mut flat, o, Driver::Static(s), &inst.id, &mut error);
                            }
                        }
                    }
                }
            }
        }
        for name in &netlist.outputs {
            let n = flat.net(name, false);
            flat.outputs.push(n);
        }
        for (n, d) in flat.drivers.iter().enumerate() {
            if d.is_none() {
                error(&flat.nets[n], format!("net {} is never driven", flat.nets[n]));
            }
        }
        for node in &flat.nodes {
            for &i in &node.inputs {
                if is_control(&flat, i) {
                    error(&netlist.instances[node.inst].id, format!("control net {} bound to a data port", flat.nets[i]));
                }
            }
        }
        for s in &flat.statics {
            if is_control(&flat, s.input) {
                error(&flat.nets[s.output], format!("control net {} drives a static stage", flat.nets[s.input]));
            }
        }
        for &o in &flat.outputs {
            if is_control(&flat, o) {
                error(&flat.nets[o], format!("control net {} listed as a primary output", flat.nets[o]));
            }
        }
        if diags.len() > before {
            return None;
        }
        Some(flat)
    }

    fn net_deps(&self, net: usize) -> Vec<usize> {
        match self.drivers[net] {
            Some(Driver::Node(k)) => {
                let node = &self.nodes[k];
                let mut deps = node.inputs.clone();
                deps.extend(node.controls.iter().filter_map(|c| match c {
                    CtrlSource::Net(n) => Some(*n),
                    CtrlSource::Const(_) => None,
                }));
                deps
            }
            Some(Driver::Static(s)) => vec![self.statics[s].input],
            _ => Vec::new(),
        }
    }

    /// Depth-first search for a cycle; also fixes the static evaluation order.
    pub fn order(&mut self) -> Result<(), CycleDetected> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Open,
            Done,
        }
        let n = self.nets.len();
        let mut mark = vec![Mark::New; n];
        let mut order = Vec::new();
        for root in 0..n {
            if mark[root] != Mark::New {
                continue;
            }
            // explicit stack of (net, next dependency index)
            let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(root, self.net_deps(root), 0)];
            mark[root] = Mark::Open;
            while let Some((net, deps, next)) = stack.last_mut() {
                if *next < deps.len() {
                    let d = deps[*next];
                    *next += 1;
                    match mark[d] {
                        Mark::New => {
                            mark[d] = Mark::Open;
                            let dd = self.net_deps(d);
                            stack.push((d, dd, 0));
                        }
                        Mark::Open => {
                            let start = stack.iter().position(|(s, _, _)| *s == d).expect("open net on stack");
                            let mut nets: Vec<String> =
                                stack[start..].iter().map(|(s, _, _)| self.nets[*s].clone()).collect();
                            nets.reverse();
                            nets.push(nets[0].clone());
                            return Err(CycleDetected { nets });
                        }
                        Mark::Done => {}
                    }
                } else {
                    let net = *net;
                    mark[net] = Mark::Done;
                    order.push(net);
                    stack.pop();
                }
            }
        }
        self.static_order = order
            .into_iter()
            .filter_map(|net| match self.drivers[net] {
                Some(Driver::Static(s)) => Some(s),
                _ => None,
            })
            .collect();
        Ok(())
    }

    /// Victim node producing `net` through any chain of statics.
    pub fn producer(&self, mut net: usize) -> Option<usize> {
        loop {
            match self.drivers[net] {
                Some(Driver::Node(k)) => return Some(k),
                Some(Driver::Static(s)) => net = self.statics[s].input,
                _ => return None,
            }
        }
    }

    /// Instance base levels and per-node levels. Requires `order` to have succeeded.
    pub fn node_levels(&self, instance_count: usize) -> (Vec<Option<u32>>, Vec<u32>) {
        let mut base: Vec<Option<u32>> = vec![None; instance_count];
        let mut by_inst: Vec<Vec<usize>> = vec![Vec::new(); instance_count];
        for (k, node) in self.nodes.iter().enumerate() {
            by_inst[node.inst].push(k);
        }
        fn visit(flat: &Flat, inst: usize, by_inst: &[Vec<usize>], base: &mut Vec<Option<u32>>) -> u32 {
            if let Some(b) = base[inst] {
                return b;
            }
            let mut level = 0;
            for &k in &by_inst[inst] {
                for &i in &flat.nodes[k].inputs {
                    if let Some(p) = flat.producer(i) {
                        let pn = &flat.nodes[p];
                        if pn.inst != inst {
                            let pb = visit(flat, pn.inst, by_inst, base);
                            level = level.max(pb + pn.depth + 1);
                        }
                    }
                }
            }
            base[inst] = Some(level);
            level
        }
        for inst in 0..instance_count {
            if !by_inst[inst].is_empty() {
                visit(self, inst, &by_inst, &mut base);
            }
        }
        let levels = self.nodes.iter().map(|n| base[n.inst].expect("visited") + n.depth).collect();
        (base, levels)
    }
}

fn structural_error(diags: Vec<Diagnostic>) -> String {
    diags.into_iter().map(|d| format!("{}: {}", d.location, d.message)).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LevelizeError {
    #[error(transparent)]
    Cycle(#[from] CycleDetected),
    #[error("malformed netlist: {0}")]
    Structure(String),
}

pub(crate) fn flatten(netlist: &CrosstalkNetlist, library: &TemplateSet) -> Result<Flat, LevelizeError> {
    let mut diags = Vec::new();
    let mut flat = Flat::build(netlist, library, &mut diags).ok_or_else(|| LevelizeError::Structure(structural_error(diags)))?;
    flat.order()?;
    Ok(flat)
}

/// Level of each crosstalk gate: 0 when fed only by primary inputs or
/// controls, else one more than the deepest gate feeding it through statics.
pub fn levelize(netlist: &CrosstalkNetlist, library: &TemplateSet) -> Result<Levels, LevelizeError> {
    let flat = flatten(netlist, library)?;
    Ok(levels_of(netlist, &flat))
}

pub(crate) fn levels_of(netlist: &CrosstalkNetlist, flat: &Flat) -> Levels {
    let (base, node_levels) = flat.node_levels(netlist.instances.len());
    let mut gates = BTreeMap::new();
    let mut statics = BTreeMap::new();
    for (k, inst) in netlist.instances.iter().enumerate() {
        match &inst.kind {
            InstanceKind::Gate { .. } => {
                if let Some(b) = base[k] {
                    gates.insert(inst.id.clone(), b);
                }
            }
            InstanceKind::Inverter { input, .. } | InstanceKind::Buffer { input, .. } => {
                let level = flat.producer(flat.index[input]).map_or(0, |p| node_levels[p]);
                statics.insert(inst.id.clone(), level);
            }
        }
    }
    Levels { gates, statics, max_level: node_levels.iter().copied().max().unwrap_or(0) }
}
