// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use super::MapError;
use crate::gatelib::{TemplateSet, POLYMORPHIC_PAIRS, SINGLE_OUTPUT_PORT};
use crate::netlist::{flatten, levels_of, ControlNet, ControlValue, CrosstalkNetlist, Instance, InstanceKind};
use crate::polymorph::Key;

/// Single-input crosstalk repeater used to restore phase alternation.
pub const REPEATER: &str = "XBUF";

fn taken_names(netlist: &CrosstalkNetlist) -> (BTreeSet<String>, BTreeSet<String>) {
    let ids = netlist.instances.iter().map(|i| i.id.clone()).collect();
    (netlist.net_names(), ids)
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

/// Sets every gate's phase to its level mod 2. A gate whose entry node is fed
/// by another gate of the same parity gets an `XBUF` repeater on that net.
pub fn schedule_phases(netlist: &CrosstalkNetlist, library: &TemplateSet) -> Result<CrosstalkNetlist, MapError> {
    let mut out = netlist.clone();
    let flat = flatten(&out, library)?;
    let (_, node_levels) = flat.node_levels(out.instances.len());

    // net -> consumer instances that need a repeater on it
    let mut violations: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (k, node) in flat.nodes.iter().enumerate() {
        if node.depth != 0 {
            continue;
        }
        for &net in &node.inputs {
            let Some(p) = flat.producer(net) else { continue };
            if flat.nodes[p].inst != node.inst && node_levels[p] % 2 == node_levels[k] % 2 {
                violations.entry(net).or_default().insert(node.inst);
            }
        }
    }
    if !violations.is_empty() {
        if library.get(REPEATER).is_none() {
            return Err(MapError::MissingTemplate(REPEATER.to_string()));
        }
        let (mut nets, mut ids) = taken_names(&out);
        let mut repeaters = Vec::new();
        for (net, consumers) in violations {
            let name = flat.nets[net].clone();
            let delayed = fresh(&mut nets, &format!("{name}_r"));
            for &c in &consumers {
                if let InstanceKind::Gate { pins, template, .. } = &mut out.instances[c].kind {
                    let t = library.get(template).expect("flattened");
                    for p in &t.data_ports {
                        let v = pins.get_mut(&p.name).expect("flattened");
                        if *v == name {
                            *v = delayed.clone();
                        }
                    }
                }
            }
            let pins = BTreeMap::from([("A".to_string(), name.clone()), (SINGLE_OUTPUT_PORT.to_string(), delayed.clone())]);
            repeaters.push(Instance {
                id: fresh(&mut ids, &format!("{name}_r")),
                kind: InstanceKind::Gate { template: REPEATER.to_string(), phase: 0, pins },
            });
        }
        out.instances.extend(repeaters);
    }

    let flat = flatten(&out, library)?;
    let levels = levels_of(&out, &flat);
    for inst in &mut out.instances {
        if let InstanceKind::Gate { phase, .. } = &mut inst.kind {
            *phase = levels.phase(&inst.id).expect("every gate is levelized");
        }
    }
    Ok(out)
}

/// Sinks per net: data pins, static inputs and primary-output listings.
pub(crate) fn fanout(netlist: &CrosstalkNetlist, library: &TemplateSet) -> BTreeMap<String, usize> {
    let mut sinks: BTreeMap<String, usize> = BTreeMap::new();
    for inst in &netlist.instances {
        match &inst.kind {
            InstanceKind::Gate { template, pins, .. } => {
                let Some(t) = library.get(template) else { continue };
                for p in &t.data_ports {
                    if let Some(n) = pins.get(&p.name) {
                        *sinks.entry(n.clone()).or_default() += 1;
                    }
                }
            }
            InstanceKind::Inverter { input, .. } | InstanceKind::Buffer { input, .. } => {
                *sinks.entry(input.clone()).or_default() += 1;
            }
        }
    }
    for o in &netlist.outputs {
        *sinks.entry(o.clone()).or_default() += 1;
    }
    sinks
}

/// Puts a buffer of drive `ceil(k / limit)` behind every crosstalk-gate output
/// with fan-out `k` above `limit`.
pub fn insert_buffers(netlist: &CrosstalkNetlist, library: &TemplateSet, fanout_limit: usize) -> CrosstalkNetlist {
    let limit = fanout_limit.max(1);
    let sinks = fanout(netlist, library);
    let (mut nets, mut ids) = taken_names(netlist);
    let mut out = netlist.clone();
    out.instances.clear();
    for inst in &netlist.instances {
        let mut inst = inst.clone();
        let mut buffers = Vec::new();
        if let InstanceKind::Gate { template, pins, .. } = &mut inst.kind {
            if let Some(t) = library.get(template) {
                for port in t.output_ports() {
                    let net = pins[port].clone();
                    let k = sinks.get(&net).copied().unwrap_or(0);
                    if k > limit {
                        let inner = fresh(&mut nets, &format!("{net}_u"));
                        pins.insert(port.to_string(), inner.clone());
                        buffers.push(Instance {
                            id: fresh(&mut ids, &format!("{net}_buf")),
                            kind: InstanceKind::Buffer { input: inner, output: net, drive: k.div_ceil(limit) as u32 },
                        });
                    }
                }
            }
        }
        out.instances.push(inst);
        out.instances.extend(buffers);
    }
    out
}

/// Replaces static cells by polymorphic pairs. Each entry names an instance
/// and optionally the pair; without one the first pair containing the cell's
/// function is used. Every cell gets a free control `ctrl_<id>`; the returned
/// key selects the original functions.
pub fn make_polymorphic(
    netlist: &CrosstalkNetlist,
    library: &TemplateSet,
    cells: &[(String, Option<String>)],
) -> Result<(CrosstalkNetlist, Key), MapError> {
    let mut out = netlist.clone();
    let (mut nets, _) = taken_names(&out);
    let mut controls = Vec::new();
    let mut bits = Vec::new();
    for (id, requested) in cells {
        let k = out.instances.iter().position(|i| &i.id == id).ok_or_else(|| MapError::UnknownNode(id.clone()))?;
        let mismatch = |reason: String| MapError::PairMismatch { node: id.clone(), reason };
        let InstanceKind::Gate { template, pins, phase } = &out.instances[k].kind else {
            return Err(mismatch("instance is not a crosstalk gate".into()));
        };
        let t = library.get(template).ok_or_else(|| MapError::MissingTemplate(template.clone()))?;
        if t.is_composite() || t.is_polymorphic() {
            return Err(mismatch(format!("{template} has no polymorphic pair")));
        }
        let f = t.function(&[], 0).map_err(|e| mismatch(e.to_string()))?;
        let n = t.data_ports.len();
        let candidates: Vec<&str> = match requested {
            Some(p) => vec![p.as_str()],
            None => POLYMORPHIC_PAIRS.to_vec(),
        };
        let mut found = None;
        'pairs: for name in candidates {
            let pair = match library.get(name) {
                Some(p) => p,
                None if requested.is_some() => return Err(MapError::MissingTemplate(name.to_string())),
                None => continue,
            };
            if pair.data_ports.len() != n || pair.control_ports.len() != 1 || pair.is_composite() {
                continue;
            }
            for bit in [false, true] {
                let Ok(g) = pair.function(&[bit], 0) else { continue };
                // pair port j reads original port sigma[j]
                for sigma in super::map::permutations(n) {
                    let same = (0..f.rows()).all(|v| {
                        let w = (0..n).fold(0u64, |acc, j| acc | (((v >> sigma[j]) & 1) << j));
                        g.get(w) == f.get(v)
                    });
                    if same {
                        found = Some((pair, bit, sigma));
                        break 'pairs;
                    }
                }
            }
        }
        let Some((pair, bit, sigma)) = found else {
            let which = requested.as_deref().map_or("any polymorphic pair".to_string(), |p| format!("either mode of {p}"));
            return Err(mismatch(format!("the {template} function is not in {which}")));
        };
        let ctrl = fresh(&mut nets, &format!("ctrl_{id}"));
        let mut new_pins = BTreeMap::new();
        for (j, port) in pair.data_ports.iter().enumerate() {
            new_pins.insert(port.name.clone(), pins[&t.data_ports[sigma[j]].name].clone());
        }
        new_pins.insert(pair.control_ports[0].name.clone(), ctrl.clone());
        new_pins.insert(SINGLE_OUTPUT_PORT.to_string(), pins[SINGLE_OUTPUT_PORT].clone());
        let phase = *phase;
        out.instances[k].kind = InstanceKind::Gate { template: pair.name.clone(), phase, pins: new_pins };
        out.controls.push(ControlNet { name: ctrl.clone(), value: ControlValue::Free });
        controls.push(ctrl);
        bits.push(bit);
    }
    let key = Key::new(controls, bits).expect("one bit per control");
    Ok((out, key))
}
