// SPDX-License-Identifier: Apache-2.0

//! Technology mapping of BLIF networks onto the crosstalk library.
//!
//! Nodes are visited in topological order. Each one is reduced against the
//! signals already mapped for its fan-ins, then realized as the cheapest of a
//! direct cell match (inputs permuted and complemented), a parity tree, or a
//! two-level NAND-NAND / AND-OR decomposition with fan-in split to three.
//! With composites enabled, sum/carry node pairs become FA cells first.
//! Complemented signals share one inverter per net.

mod builder;
mod cover;
mod map;
mod passes;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use builder::Builder;
use cover::{find_adders, Lit, Sig};
use map::{Ctx, Realization};
pub use passes::{insert_buffers, make_polymorphic, schedule_phases, REPEATER};

use crate::gatelib::TemplateSet;
use crate::metrics::{transistor_count, Breakdown, CostModel};
use crate::netlist::{levelize, xtn_name, CrosstalkNetlist, InstanceKind, LevelizeError, LogicNetwork};
use crate::polymorph::{Key, KeyManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Style {
    #[default]
    NandNand,
    AndOr,
}

impl FromStr for Style {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nand-nand" | "nand_nand" => Ok(Style::NandNand),
            "and-or" | "and_or" => Ok(Style::AndOr),
            _ => Err(format!("unknown style {s:?} (expected nand-nand or and-or)")),
        }
    }
}

impl fmt::Display for Style {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Style::NandNand => "nand-nand",
            Style::AndOr => "and-or",
        })
    }
}

/// A node to realize as a polymorphic cell, optionally with a named pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolySpec {
    pub node: String,
    pub pair: Option<String>,
}

impl FromStr for PolySpec {
    type Err = String;

    /// `node` or `node:PAIR`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (node, pair) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p.to_string())),
            None => (s, None),
        };
        if node.is_empty() || pair.as_deref() == Some("") {
            return Err(format!("bad polymorphic cell spec {s:?}"));
        }
        Ok(PolySpec { node: node.to_string(), pair })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapOptions {
    pub style: Style,
    pub fanout_limit: usize,
    pub use_composites: bool,
    pub polymorphic_cells: Vec<PolySpec>,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self { style: Style::NandNand, fanout_limit: 4, use_composites: true, polymorphic_cells: Vec::new() }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("node {node} cannot be mapped: {reason}")]
    UnmappableNode { node: String, reason: String },
    #[error("library has no template {0}")]
    MissingTemplate(String),
    #[error("pair mismatch at {node}: {reason}")]
    PairMismatch { node: String, reason: String },
    #[error("no node named {0}")]
    UnknownNode(String),
    #[error("names {first} and {second} both become {name}")]
    NameCollision { first: String, second: String, name: String },
    #[error("invalid network: {0}")]
    Network(String),
    #[error("invalid options: {0}")]
    Options(String),
    #[error(transparent)]
    Levelize(#[from] LevelizeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeChoice {
    pub node: String,
    /// `direct`, `decomposed`, `parity`, `adder`, `polymorphic`, `alias`,
    /// `constant` or `unused`.
    pub realization: String,
    /// Cells created for the node, in creation order (`INV` for inverters).
    pub cells: Vec<String>,
    pub cost: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MapReport {
    pub design: String,
    pub style: Style,
    pub fanout_limit: usize,
    /// Whether the returned mapping used composite matching.
    pub composites: bool,
    pub nodes: Vec<NodeChoice>,
    /// Crosstalk gate instances per template, repeaters included.
    pub cells: BTreeMap<String, usize>,
    pub inverters: usize,
    pub buffers: usize,
    pub repeaters: usize,
    pub max_level: u32,
    pub total: u32,
    pub breakdown: Breakdown,
    /// Free control nets and the key reproducing the source network.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<KeyManifest>,
}

/// Maps `network` onto `library`. With composites on, the result is never
/// costlier than mapping with them off.
pub fn map_network(
    network: &LogicNetwork,
    library: &TemplateSet,
    options: &MapOptions,
) -> Result<(CrosstalkNetlist, MapReport, Key), MapError> {
    if options.fanout_limit == 0 {
        return Err(MapError::Options("fan-out limit must be at least 1".into()));
    }
    let network = network.clone().normalize().map_err(|e| MapError::Network(e.to_string()))?;
    let first = map_once(&network, library, options, options.use_composites)?;
    if options.use_composites {
        let plain = map_once(&network, library, options, false)?;
        if plain.1.total < first.1.total {
            return Ok(plain);
        }
    }
    Ok(first)
}

fn sanitized_names(network: &LogicNetwork) -> Result<HashMap<String, String>, MapError> {
    let mut names = HashMap::new();
    let mut owner: BTreeMap<String, String> = BTreeMap::new();
    let all = network.inputs.iter().chain(&network.outputs).chain(network.nodes.iter().map(|n| &n.output));
    for n in all {
        let s = xtn_name(n);
        if let Some(prev) = owner.get(&s) {
            if prev != n {
                return Err(MapError::NameCollision { first: prev.clone(), second: n.clone(), name: s });
            }
        }
        owner.insert(s.clone(), n.clone());
        names.insert(n.clone(), s);
    }
    Ok(names)
}

fn live_nodes(network: &LogicNetwork) -> Vec<bool> {
    let index: HashMap<&str, usize> = network.nodes.iter().enumerate().map(|(i, n)| (n.output.as_str(), i)).collect();
    let mut live = vec![false; network.nodes.len()];
    let mut stack: Vec<usize> = network.outputs.iter().filter_map(|o| index.get(o.as_str()).copied()).collect();
    while let Some(i) = stack.pop() {
        if std::mem::replace(&mut live[i], true) {
            continue;
        }
        stack.extend(network.nodes[i].inputs.iter().filter_map(|f| index.get(f.as_str()).copied()));
    }
    live
}

fn cells_of(b: &Builder, from: usize) -> Vec<String> {
    b.netlist.instances[from..]
        .iter()
        .map(|i| match &i.kind {
            InstanceKind::Gate { template, .. } => template.clone(),
            InstanceKind::Inverter { .. } => "INV".to_string(),
            InstanceKind::Buffer { .. } => "BUF".to_string(),
        })
        .collect()
}

fn map_once(
    network: &LogicNetwork,
    library: &TemplateSet,
    options: &MapOptions,
    composites: bool,
) -> Result<(CrosstalkNetlist, MapReport, Key), MapError> {
    let names = sanitized_names(network)?;
    let live = live_nodes(network);
    let mut netlist = CrosstalkNetlist::new(network.name.clone(), library.params.clone());
    netlist.inputs = network.inputs.iter().map(|n| names[n].clone()).collect();
    let mut seen = BTreeSet::new();
    netlist.outputs = network.outputs.iter().map(|n| names[n].clone()).filter(|n| seen.insert(n.clone())).collect();
    let reserved: BTreeSet<String> = names.values().cloned().collect();
    let mut b = Builder::new(library, netlist, reserved.iter().cloned());
    let ctx = Ctx::new(library, options.style, composites);

    let mut poly: HashMap<usize, Option<String>> = HashMap::new();
    for spec in &options.polymorphic_cells {
        let k = network
            .nodes
            .iter()
            .position(|n| n.output == spec.node || names[&n.output] == spec.node)
            .ok_or_else(|| MapError::UnknownNode(spec.node.clone()))?;
        poly.insert(k, spec.pair.clone());
    }

    let mut adders: HashMap<usize, usize> = HashMap::new();
    let pairs = if composites { find_adders(network) } else { Vec::new() };
    let pairs: Vec<_> = pairs
        .into_iter()
        .filter(|p| live[p.sum] && live[p.carry] && !poly.contains_key(&p.sum) && !poly.contains_key(&p.carry))
        .collect();
    for (k, p) in pairs.iter().enumerate() {
        adders.insert(p.sum, k);
        adders.insert(p.carry, k);
    }
    let mut adder_done: Vec<Option<bool>> = vec![None; pairs.len()];

    let mut sigs: HashMap<String, Sig> =
        network.inputs.iter().map(|n| (n.clone(), Sig::Lit(Lit::new(names[n].clone(), false)))).collect();
    let mut choices = Vec::with_capacity(network.nodes.len());
    let mut poly_cells: Vec<(String, Option<String>)> = Vec::new();

    for (k, node) in network.nodes.iter().enumerate() {
        let name = names[&node.output].clone();
        if !live[k] {
            choices.push(NodeChoice { node: node.output.clone(), realization: "unused".into(), cells: vec![], cost: 0 });
            continue;
        }
        let mark = b.mark();
        let start = b.netlist.instances.len();
        let (sig, how, partner) = {
            let fanin = |n: &str| sigs[n].clone();
            match adders.get(&k).map(|&p| (p, adder_done[p])) {
                Some((_, Some(true))) => {
                    choices.push(NodeChoice { node: node.output.clone(), realization: "adder".into(), cells: vec![], cost: 0 });
                    continue;
                }
                Some((p, None)) => {
                    let pair = &pairs[p];
                    let sum = &network.nodes[pair.sum].output;
                    let carry = &network.nodes[pair.carry].output;
                    match ctx.map_adder(&mut b, pair, [&names[sum], &names[carry]], &fanin)? {
                        Some((s, co)) => {
                            adder_done[p] = Some(true);
                            if k == pair.sum {
                                (Sig::Lit(s), "adder", Some((carry.clone(), Sig::Lit(co))))
                            } else {
                                (Sig::Lit(co), "adder", Some((sum.clone(), Sig::Lit(s))))
                            }
                        }
                        None => {
                            adder_done[p] = Some(false);
                            let (sig, how) = realize(&ctx, &mut b, node, &name, &fanin)?;
                            (sig, how, None)
                        }
                    }
                }
                _ => {
                    if let Some(pair) = poly.get(&k) {
                        let lit = ctx.map_poly(&mut b, node, &name, &fanin)?;
                        let id = b.netlist.instances.last().expect("poly cell emitted").id.clone();
                        poly_cells.push((id, pair.clone()));
                        (Sig::Lit(lit), "polymorphic", None)
                    } else {
                        let (sig, how) = realize(&ctx, &mut b, node, &name, &fanin)?;
                        (sig, how, None)
                    }
                }
            }
        };
        if let Some((n, s)) = partner {
            sigs.insert(n, s);
        }
        sigs.insert(node.output.clone(), sig);
        choices.push(NodeChoice {
            node: node.output.clone(),
            realization: how.into(),
            cells: cells_of(&b, start),
            cost: b.cost - mark.cost,
        });
    }

    // primary outputs carry their own names
    let mut done = BTreeSet::new();
    for o in &network.outputs {
        let so = names[o].clone();
        if !done.insert(so.clone()) {
            continue;
        }
        match sigs[o].clone() {
            Sig::Const(v) => {
                return Err(MapError::UnmappableNode {
                    node: o.clone(),
                    reason: format!("output is constant {}", u8::from(v)),
                })
            }
            Sig::Lit(l) if !l.neg => {
                if l.net != so {
                    b.buffer(&l.net, &so);
                }
            }
            Sig::Lit(l) => match b.complement(&l.net).map(String::from) {
                Some(c) if c == so => {}
                Some(c) if !reserved.contains(&c) => b.rename_from(0, &c, &so),
                Some(c) => b.buffer(&c, &so),
                None => b.complement_as(&l.net, &so),
            },
        }
    }

    let netlist = b.netlist;
    let (netlist, key) = make_polymorphic(&netlist, library, &poly_cells)?;
    let netlist = schedule_phases(&netlist, library)?;
    let netlist = insert_buffers(&netlist, library, options.fanout_limit);
    let report = report(&netlist, library, options, composites, choices, &key)?;
    Ok((netlist, report, key))
}

fn realize(
    ctx: &Ctx,
    b: &mut Builder,
    node: &crate::netlist::LogicNode,
    name: &str,
    fanin: &dyn Fn(&str) -> Sig,
) -> Result<(Sig, &'static str), MapError> {
    Ok(match ctx.map_node(b, node, name, fanin)? {
        Realization::Constant(v) => (Sig::Const(v), "constant"),
        Realization::Alias(l) => (Sig::Lit(l), "alias"),
        Realization::Mapped { root, how } => (Sig::Lit(root), how),
    })
}

fn report(
    netlist: &CrosstalkNetlist,
    library: &TemplateSet,
    options: &MapOptions,
    composites: bool,
    nodes: Vec<NodeChoice>,
    key: &Key,
) -> Result<MapReport, MapError> {
    let breakdown = transistor_count(netlist, library, &CostModel::default());
    let mut cells = BTreeMap::new();
    let (mut inverters, mut buffers, mut repeaters) = (0, 0, 0);
    for inst in &netlist.instances {
        match &inst.kind {
            InstanceKind::Gate { template, .. } => {
                *cells.entry(template.clone()).or_insert(0) += 1;
                if template == REPEATER {
                    repeaters += 1;
                }
            }
            InstanceKind::Inverter { .. } => inverters += 1,
            InstanceKind::Buffer { .. } => buffers += 1,
        }
    }
    let max_level = levelize(netlist, library)?.max_level;
    Ok(MapReport {
        design: netlist.name.clone(),
        style: options.style,
        fanout_limit: options.fanout_limit,
        composites,
        nodes,
        cells,
        inverters,
        buffers,
        repeaters,
        max_level,
        total: breakdown.total,
        breakdown,
        key: (key.width() > 0).then(|| key.manifest()),
    })
}
