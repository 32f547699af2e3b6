// SPDX-License-Identifier: Apache-2.0

//! Incremental netlist construction with rollback for trial mappings.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::cover::Lit;
use super::MapError;
use super::passes::REPEATER;
use crate::gatelib::{Signal, TemplateBody, TemplateSet};
use crate::metrics::CostModel;
use crate::netlist::{CrosstalkNetlist, Instance, InstanceKind};

enum Undo {
    Net(String),
    Id(String),
    Comp(String),
    PositiveAdded(String),
    PositiveTaken(String, String),
    Level(String),
    Repeat(String),
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Mark {
    instances: usize,
    log: usize,
    pub cost: u32,
}

pub(crate) struct Builder<'a> {
    pub lib: &'a TemplateSet,
    pub model: CostModel,
    pub netlist: CrosstalkNetlist,
    nets: BTreeSet<String>,
    ids: BTreeSet<String>,
    /// Net and its complement, both directions.
    comp: HashMap<String, String>,
    /// Negated roots whose complement should carry the node's own name.
    positive_name: HashMap<String, String>,
    /// Level of the victim node driving each net; statics are transparent.
    levels: HashMap<String, u32>,
    /// Nets already charged for a phase repeater.
    repeats: HashSet<String>,
    repeater_cost: u32,
    /// Transistors, counting the repeaters phase scheduling will add.
    pub cost: u32,
    log: Vec<Undo>,
}

impl<'a> Builder<'a> {
    pub fn new(lib: &'a TemplateSet, netlist: CrosstalkNetlist, reserved: impl IntoIterator<Item = String>) -> Self {
        let model = CostModel::default();
        let repeater_cost = lib.get(REPEATER).map_or(0, |t| model.template_cost(t));
        Self {
            lib,
            model,
            netlist,
            nets: reserved.into_iter().collect(),
            ids: BTreeSet::new(),
            comp: HashMap::new(),
            positive_name: HashMap::new(),
            levels: HashMap::new(),
            repeats: HashSet::new(),
            repeater_cost,
            cost: 0,
            log: Vec::new(),
        }
    }

    pub fn mark(&self) -> Mark {
        Mark { instances: self.netlist.instances.len(), log: self.log.len(), cost: self.cost }
    }

    pub fn rollback(&mut self, mark: Mark) {
        self.netlist.instances.truncate(mark.instances);
        self.cost = mark.cost;
        while self.log.len() > mark.log {
            match self.log.pop().expect("length checked") {
                Undo::Net(n) => {
                    self.nets.remove(&n);
                }
                Undo::Id(n) => {
                    self.ids.remove(&n);
                }
                Undo::Comp(n) => {
                    self.comp.remove(&n);
                }
                Undo::PositiveAdded(n) => {
                    self.positive_name.remove(&n);
                }
                Undo::PositiveTaken(k, v) => {
                    self.positive_name.insert(k, v);
                }
                Undo::Level(n) => {
                    self.levels.remove(&n);
                }
                Undo::Repeat(n) => {
                    self.repeats.remove(&n);
                }
            }
        }
    }

    fn fresh(taken: &mut BTreeSet<String>, base: &str) -> String {
        let name = if taken.contains(base) {
            (1..).map(|k| format!("{base}_{k}")).find(|c| !taken.contains(c)).expect("unbounded suffixes")
        } else {
            base.to_string()
        };
        taken.insert(name.clone());
        name
    }

    pub fn fresh_net(&mut self, base: &str) -> String {
        let n = Self::fresh(&mut self.nets, base);
        self.log.push(Undo::Net(n.clone()));
        n
    }

    pub fn fresh_id(&mut self, base: &str) -> String {
        let n = Self::fresh(&mut self.ids, base);
        self.log.push(Undo::Id(n.clone()));
        n
    }

    pub fn template_cost(&self, name: &str) -> Result<u32, MapError> {
        let t = self.lib.get(name).ok_or_else(|| MapError::MissingTemplate(name.to_string()))?;
        Ok(self.model.template_cost(t))
    }

    /// Transistors needed to make `lit` available.
    pub fn need(&self, lit: &Lit) -> u32 {
        if !lit.neg || self.comp.contains_key(&lit.net) {
            0
        } else {
            self.model.inverter
        }
    }

    pub fn complement(&self, net: &str) -> Option<&str> {
        self.comp.get(net).map(String::as_str)
    }

    /// Level of the node driving `net`; `None` for primary inputs.
    pub fn level(&self, net: &str) -> Option<u32> {
        self.levels.get(net).copied()
    }

    fn set_level(&mut self, net: &str, level: Option<u32>) {
        if let Some(l) = level {
            self.levels.insert(net.to_string(), l);
            self.log.push(Undo::Level(net.to_string()));
        }
    }

    /// Level a cell reading `nets` would get.
    fn base_level(&self, nets: &[&str]) -> u32 {
        nets.iter().filter_map(|n| self.level(n)).map(|l| l + 1).max().unwrap_or(0)
    }

    /// Input nets whose driver shares the parity of a cell reading `nets`.
    fn conflicts<'n>(&self, nets: &[&'n str]) -> Vec<&'n str> {
        let base = self.base_level(nets);
        let mut out: Vec<&str> = nets
            .iter()
            .copied()
            .filter(|n| self.level(n).is_some_and(|l| l % 2 == base % 2) && !self.repeats.contains(*n))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Repeater transistors a cell reading `lits` would cost.
    pub fn repeat_need(&self, lits: &[Lit]) -> u32 {
        let nets: Vec<&str> = lits
            .iter()
            .map(|l| if l.neg { self.comp.get(&l.net).map_or(l.net.as_str(), String::as_str) } else { l.net.as_str() })
            .collect();
        self.repeater_cost * self.conflicts(&nets).len() as u32
    }

    /// Net carrying `lit`, adding a shared inverter when needed.
    pub fn net_of(&mut self, lit: &Lit) -> String {
        if !lit.neg {
            return lit.net.clone();
        }
        if let Some(c) = self.comp.get(&lit.net) {
            return c.clone();
        }
        let out = match self.positive_name.remove(&lit.net) {
            Some(name) => {
                self.log.push(Undo::PositiveTaken(lit.net.clone(), name.clone()));
                name
            }
            None => self.fresh_net(&format!("{}_n", lit.net)),
        };
        self.inverter(&lit.net, &out);
        out
    }

    /// Complement of `net` under the claimed name `name`.
    pub fn complement_as(&mut self, net: &str, name: &str) {
        if let Some(p) = self.positive_name.remove(net) {
            self.log.push(Undo::PositiveTaken(net.to_string(), p));
        }
        self.inverter(net, name);
    }

    /// Inverter `input -> output`; `output` must already be claimed.
    pub fn inverter(&mut self, input: &str, output: &str) {
        let id = self.fresh_id(output);
        self.netlist.instances.push(Instance {
            id,
            kind: InstanceKind::Inverter { input: input.to_string(), output: output.to_string() },
        });
        self.set_level(output, self.level(input));
        self.comp.insert(input.to_string(), output.to_string());
        self.comp.insert(output.to_string(), input.to_string());
        self.log.push(Undo::Comp(input.to_string()));
        self.log.push(Undo::Comp(output.to_string()));
        self.cost += self.model.inverter;
    }

    pub fn buffer(&mut self, input: &str, output: &str) {
        let id = self.fresh_id(output);
        self.netlist.instances.push(Instance {
            id,
            kind: InstanceKind::Buffer { input: input.to_string(), output: output.to_string(), drive: 1 },
        });
        self.set_level(output, self.level(input));
        self.cost += self.model.buffer_cost(1);
    }

    /// Instantiates `template` with data ports bound in order; returns its output nets.
    pub fn cell(&mut self, template: &str, inputs: &[Lit], owner: &str) -> Result<Vec<String>, MapError> {
        let t = self.lib.get(template).ok_or_else(|| MapError::MissingTemplate(template.to_string()))?;
        let cost = self.model.template_cost(t);
        let ports: Vec<String> = t.data_ports.iter().map(|p| p.name.clone()).collect();
        let outs: Vec<String> = t.output_ports().iter().map(|s| s.to_string()).collect();
        debug_assert_eq!(ports.len(), inputs.len());
        let mut pins = BTreeMap::new();
        let mut in_nets = Vec::with_capacity(inputs.len());
        for (port, lit) in ports.iter().zip(inputs) {
            let net = self.net_of(lit);
            pins.insert(port.clone(), net.clone());
            in_nets.push(net);
        }
        let refs: Vec<&str> = in_nets.iter().map(String::as_str).collect();
        let base = self.base_level(&refs);
        let repeated: Vec<String> = self.conflicts(&refs).into_iter().map(String::from).collect();
        for n in repeated {
            self.repeats.insert(n.clone());
            self.log.push(Undo::Repeat(n));
            self.cost += self.repeater_cost;
        }
        let out_levels: Vec<Option<u32>> = match &t.body {
            TemplateBody::Single { .. } => vec![Some(base)],
            TemplateBody::Composite(body) => {
                let depths = body.node_depths();
                body.outputs
                    .iter()
                    .map(|o| match o.source {
                        Signal::Node(j) | Signal::NodeInv(j) => Some(base + depths[j]),
                        Signal::Port(i) => self.level(&in_nets[i]),
                    })
                    .collect()
            }
        };
        let mut nets = Vec::with_capacity(outs.len());
        for (port, level) in outs.into_iter().zip(out_levels) {
            let net = self.fresh_net(owner);
            pins.insert(port, net.clone());
            self.set_level(&net, level);
            nets.push(net);
        }
        let id = self.fresh_id(&nets[0]);
        self.netlist.instances.push(Instance {
            id,
            kind: InstanceKind::Gate { template: template.to_string(), phase: 0, pins },
        });
        self.cost += cost;
        Ok(nets)
    }

    /// Whether `net` was created after `mark`.
    pub fn created_since(&self, mark: Mark, net: &str) -> bool {
        self.log[mark.log..].iter().any(|u| matches!(u, Undo::Net(n) if n == net))
    }

    /// Gives a root net created after `mark` its final name: the node name
    /// when positive, `<node>_n` otherwise. With `with_id` the driving
    /// instance takes the node name as its id.
    pub fn name_root(&mut self, mark: Mark, net: &str, node: &str, neg: bool, with_id: bool) -> String {
        let new = if neg {
            let n = self.fresh_net(&format!("{node}_n"));
            self.positive_name.insert(n.clone(), node.to_string());
            self.log.push(Undo::PositiveAdded(n.clone()));
            n
        } else {
            node.to_string()
        };
        self.rename_from(mark.instances, net, &new);
        if !with_id {
            return new;
        }
        let lib = self.lib;
        let drives = |inst: &Instance| match &inst.kind {
            InstanceKind::Gate { pins, template, .. } => lib
                .get(template)
                .is_some_and(|t| t.output_ports().iter().any(|p| pins.get(*p).is_some_and(|v| *v == new))),
            InstanceKind::Inverter { output, .. } | InstanceKind::Buffer { output, .. } => *output == new,
        };
        let driver = self.netlist.instances[mark.instances..].iter().position(drives);
        if let Some(k) = driver {
            let at = mark.instances + k;
            let id = self.fresh_id(node);
            self.netlist.instances[at].id = id;
        }
        new
    }

    /// Renames a net in instances from index `start` on.
    pub fn rename_from(&mut self, start: usize, old: &str, new: &str) {
        for inst in &mut self.netlist.instances[start..] {
            match &mut inst.kind {
                InstanceKind::Gate { pins, .. } => {
                    for v in pins.values_mut() {
                        if v == old {
                            *v = new.to_string();
                        }
                    }
                }
                InstanceKind::Inverter { input, output } | InstanceKind::Buffer { input, output, .. } => {
                    for v in [input, output] {
                        if v == old {
                            *v = new.to_string();
                        }
                    }
                }
            }
        }
        if let Some(l) = self.levels.remove(old) {
            self.levels.insert(new.to_string(), l);
        }
        if self.repeats.remove(old) {
            self.repeats.insert(new.to_string());
        }
        if let Some(c) = self.comp.remove(old) {
            self.comp.insert(c.clone(), new.to_string());
            self.comp.insert(new.to_string(), c);
        }
        self.nets.insert(new.to_string());
    }
}
