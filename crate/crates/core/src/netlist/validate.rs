// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::graph::Flat;
use super::ir::{CrosstalkNetlist, InstanceKind};
use crate::gatelib::{check_mode, TemplateSet};

pub const DEFAULT_FANOUT_LIMIT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub location: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}: {}", self.location, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter().filter(|d| d.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter().filter(|d| d.severity == Severity::Warning)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

pub fn validate(netlist: &CrosstalkNetlist, library: &TemplateSet) -> Diagnostics {
    validate_with(netlist, library, DEFAULT_FANOUT_LIMIT)
}

pub fn validate_with(netlist: &CrosstalkNetlist, library: &TemplateSet, fanout_limit: usize) -> Diagnostics {
    let mut diags = Vec::new();
    let error = |location: &str, message: String| Diagnostic { severity: Severity::Error, location: location.into(), message };

    // template self-consistency under this netlist's parameters
    let used: BTreeSet<&str> = netlist.instances.iter().filter_map(|i| i.template()).collect();
    for name in used {
        let Some(t) = library.get(name) else { continue };
        for (k, mode) in t.victim_modes().into_iter().enumerate() {
            let report = check_mode(mode, &netlist.params);
            if !report.passed() {
                diags.push(error(
                    name,
                    format!("mode {k} fails the consistency check at {} vector(s)", report.violations.len()),
                ));
            }
        }
    }

    let Some(mut flat) = Flat::build(netlist, library, &mut diags) else {
        return finish(diags);
    };
    if let Err(cycle) = flat.order() {
        diags.push(error(&cycle.nets[0], cycle.to_string()));
        return finish(diags);
    }

    // alternation between a gate and any gate feeding its entry nodes
    let mut reported = BTreeSet::new();
    for node in &flat.nodes {
        if node.depth != 0 {
            continue;
        }
        for &i in &node.inputs {
            let Some(p) = flat.producer(i) else { continue };
            let prod = &flat.nodes[p];
            if prod.inst != node.inst && prod.phase == node.phase {
                let consumer = &netlist.instances[node.inst].id;
                let producer = &netlist.instances[prod.inst].id;
                if reported.insert((producer.clone(), consumer.clone())) {
                    diags.push(error(
                        consumer,
                        format!(
                            "phase alternation violated: {producer} and {consumer} both evaluate in phase {} (net {})",
                            node.phase, flat.nets[i]
                        ),
                    ));
                }
            }
        }
    }

    // fan-out of crosstalk-gate output nets
    let mut sinks: BTreeMap<&str, usize> = BTreeMap::new();
    for inst in &netlist.instances {
        match &inst.kind {
            InstanceKind::Gate { template, pins, .. } => {
                let Some(t) = library.get(template) else { continue };
                for p in &t.data_ports {
                    *sinks.entry(pins[&p.name].as_str()).or_default() += 1;
                }
            }
            InstanceKind::Inverter { input, .. } | InstanceKind::Buffer { input, .. } => {
                *sinks.entry(input.as_str()).or_default() += 1;
            }
        }
    }
    for o in &netlist.outputs {
        *sinks.entry(o.as_str()).or_default() += 1;
    }
    for inst in &netlist.instances {
        let InstanceKind::Gate { template, pins, .. } = &inst.kind else { continue };
        let Some(t) = library.get(template) else { continue };
        for port in t.output_ports() {
            let net = pins[port].as_str();
            let k = sinks.get(net).copied().unwrap_or(0);
            if k > fanout_limit {
                diags.push(Diagnostic {
                    severity: Severity::Warning,
                    location: inst.id.clone(),
                    message: format!("net {net} has fan-out {k} above limit {fanout_limit} without a buffer"),
                });
            }
        }
    }
    finish(diags)
}

fn finish(mut diags: Vec<Diagnostic>) -> Diagnostics {
    diags.sort_by(|a, b| (a.severity, &a.location, &a.message).cmp(&(b.severity, &b.location, &b.message)));
    diags.dedup();
    Diagnostics(diags)
}
