// SPDX-License-Identifier: Apache-2.0

//! Technology-independent Boolean networks and the BLIF subset reader.

use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::gatelib::{TruthTable, MAX_NODE_INPUTS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlifError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: unsupported construct {directive}")]
    Unsupported { line: usize, directive: String },
    #[error("network structure: {0}")]
    Structure(String),
}

/// One `.names` block: `output = OR(rows)` when `onset`, else its complement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicNode {
    pub output: String,
    pub inputs: Vec<String>,
    /// Cover rows; `None` is a don't-care literal.
    pub rows: Vec<Vec<Option<bool>>>,
    pub onset: bool,
}

impl LogicNode {
    pub fn eval(&self, values: &[bool]) -> bool {
        let hit = self
            .rows
            .iter()
            .any(|row| row.iter().zip(values).all(|(lit, v)| lit.is_none_or(|l| l == *v)));
        hit == self.onset
    }

    pub fn truth_table(&self) -> Option<TruthTable> {
        (self.inputs.len() <= MAX_NODE_INPUTS).then(|| TruthTable::from_fn(self.inputs.len(), |x| self.eval(x)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LogicNetwork {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// Topologically ordered: inputs of a node are primary inputs or earlier nodes.
    pub nodes: Vec<LogicNode>,
}

impl LogicNetwork {
    /// Reference evaluation by direct cover semantics; outputs in `outputs` order.
    pub fn evaluate(&self, inputs: &[bool]) -> Vec<bool> {
        let mut values: HashMap<&str, bool> = self.inputs.iter().map(String::as_str).zip(inputs.iter().copied()).collect();
        for node in &self.nodes {
            let ins: Vec<bool> = node.inputs.iter().map(|n| values[n.as_str()]).collect();
            values.insert(node.output.as_str(), node.eval(&ins));
        }
        self.outputs.iter().map(|o| values[o.as_str()]).collect()
    }

    pub fn node(&self, output: &str) -> Option<&LogicNode> {
        self.nodes.iter().find(|n| n.output == output)
    }

    /// Checks single drivers and defined fan-ins, then orders nodes
    /// topologically, keeping declaration order wherever it is already valid.
    pub fn normalize(mut self) -> Result<Self, BlifError> {
        let inputs: HashSet<&str> = self.inputs.iter().map(String::as_str).collect();
        if inputs.len() != self.inputs.len() {
            return Err(BlifError::Structure("duplicate primary input".into()));
        }
        let mut driver: HashMap<String, usize> = HashMap::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if inputs.contains(node.output.as_str()) {
                return Err(BlifError::Structure(format!("net {} is both an input and a node output", node.output)));
            }
            if driver.insert(node.output.clone(), i).is_some() {
                return Err(BlifError::Structure(format!("net {} has more than one driver", node.output)));
            }
        }
        for node in &self.nodes {
            for fanin in &node.inputs {
                if !inputs.contains(fanin.as_str()) && !driver.contains_key(fanin) {
                    return Err(BlifError::Structure(format!("net {fanin} used by {} is never driven", node.output)));
                }
            }
        }
        for out in &self.outputs {
            if !inputs.contains(out.as_str()) && !driver.contains_key(out) {
                return Err(BlifError::Structure(format!("output {out} is never driven")));
            }
        }
        let n = self.nodes.len();
        let mut pending: Vec<usize> = vec![0; n];
        let mut users: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, node) in self.nodes.iter().enumerate() {
            for fanin in &node.inputs {
                if let Some(&d) = driver.get(fanin) {
                    pending[i] += 1;
                    users[d].push(i);
                }
            }
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &u in &users[i] {
                pending[u] -= 1;
                if pending[u] == 0 {
                    ready.insert(u);
                }
            }
        }
        if order.len() != n {
            let stuck: Vec<&str> = (0..n).filter(|i| pending[*i] > 0).map(|i| self.nodes[i].output.as_str()).collect();
            return Err(BlifError::Structure(format!("combinational cycle through {}", stuck.join(" "))));
        }
        let mut slots: Vec<Option<LogicNode>> = self.nodes.drain(..).map(Some).collect();
        self.nodes = order.into_iter().map(|i| slots[i].take().expect("each node once")).collect();
        Ok(self)
    }
}

fn is_identifier(s: &str) -> bool {
    // BLIF names are looser than .xtn names; anything without whitespace goes
    !s.is_empty() && !s.contains(char::is_whitespace)
}

struct LogicalLine {
    number: usize,
    text: String,
}

fn logical_lines(text: &str) -> Vec<LogicalLine> {
    let mut out = Vec::new();
    let mut buffer = String::new();
    let mut start = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if buffer.is_empty() {
            start = idx + 1;
        }
        let trimmed = line.trim_end();
        if let Some(body) = trimmed.strip_suffix('\\') {
            buffer.push_str(body);
            buffer.push(' ');
            continue;
        }
        buffer.push_str(trimmed);
        if !buffer.trim().is_empty() {
            out.push(LogicalLine { number: start, text: buffer.trim().to_string() });
        }
        buffer.clear();
    }
    if !buffer.trim().is_empty() {
        out.push(LogicalLine { number: start, text: buffer.trim().to_string() });
    }
    out
}

/// Reads the combinational BLIF subset: `.model .inputs .outputs .names .end`.
pub fn parse_blif(text: &str) -> Result<LogicNetwork, BlifError> {
    let mut net = LogicNetwork::default();
    let mut current: Option<(usize, LogicNode, Option<bool>)> = None;
    let mut ended = false;

    let finish = |current: &mut Option<(usize, LogicNode, Option<bool>)>, net: &mut LogicNetwork| {
        if let Some((_, mut node, value)) = current.take() {
            node.onset = value.unwrap_or(true);
            net.nodes.push(node);
        }
    };

    for line in logical_lines(text) {
        if ended {
            break;
        }
        let mut tokens = line.text.split_whitespace();
        let head = tokens.next().expect("non-empty logical line");
        if head.starts_with('.') {
            finish(&mut current, &mut net);
            let rest: Vec<String> = tokens.map(str::to_string).collect();
            match head {
                ".model" => {
                    net.name = rest.first().cloned().unwrap_or_default();
                }
                ".inputs" => net.inputs.extend(rest),
                ".outputs" => net.outputs.extend(rest),
                ".names" => {
                    let Some((output, inputs)) = rest.split_last() else {
                        return Err(BlifError::Parse { line: line.number, reason: ".names needs an output".into() });
                    };
                    if let Some(bad) = rest.iter().find(|s| !is_identifier(s)) {
                        return Err(BlifError::Parse { line: line.number, reason: format!("bad net name {bad}") });
                    }
                    current = Some((
                        line.number,
                        LogicNode { output: output.clone(), inputs: inputs.to_vec(), rows: Vec::new(), onset: true },
                        None,
                    ));
                }
                ".end" => ended = true,
                other => {
                    return Err(BlifError::Unsupported { line: line.number, directive: other.to_string() });
                }
            }
            continue;
        }
        let Some((_, node, value)) = current.as_mut() else {
            return Err(BlifError::Parse { line: line.number, reason: format!("cover row outside .names: {}", line.text) });
        };
        let fields: Vec<&str> = line.text.split_whitespace().collect();
        let (pattern, out) = match (node.inputs.len(), fields.as_slice()) {
            (0, [o]) => ("", *o),
            (k, [p, o]) if k > 0 => (*p, *o),
            _ => {
                return Err(BlifError::Parse { line: line.number, reason: format!("malformed cover row {:?}", line.text) });
            }
        };
        if pattern.chars().count() != node.inputs.len() {
            return Err(BlifError::Parse {
                line: line.number,
                reason: format!("cover row has {} literals for {} inputs", pattern.chars().count(), node.inputs.len()),
            });
        }
        let row: Result<Vec<Option<bool>>, _> = pattern
            .chars()
            .map(|c| match c {
                '0' => Ok(Some(false)),
                '1' => Ok(Some(true)),
                '-' => Ok(None),
                _ => Err(BlifError::Parse { line: line.number, reason: format!("bad literal {c:?}") }),
            })
            .collect();
        let bit = match out {
            "1" => true,
            "0" => false,
            _ => return Err(BlifError::Parse { line: line.number, reason: format!("bad output value {out:?}") }),
        };
        if value.is_some_and(|v| v != bit) {
            return Err(BlifError::Parse { line: line.number, reason: "mixed on-set and off-set rows".into() });
        }
        *value = Some(bit);
        node.rows.push(row?);
    }
    finish(&mut current, &mut net);
    net.normalize()
}
