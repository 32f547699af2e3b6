// SPDX-License-Identifier: Apache-2.0

//! Node covers rewritten over mapped signals.

use std::collections::BTreeSet;

use crate::gatelib::{TruthTable, MAX_NODE_INPUTS};
use crate::netlist::{LogicNetwork, LogicNode};

/// A mapped signal: a constant or a netlist net, possibly complemented.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Sig {
    Const(bool),
    Lit(Lit),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Lit {
    pub net: String,
    pub neg: bool,
}

impl Lit {
    pub fn new(net: impl Into<String>, neg: bool) -> Self {
        Self { net: net.into(), neg }
    }

    pub fn not(&self) -> Self {
        Self { net: self.net.clone(), neg: !self.neg }
    }
}

/// `f = OR(cubes)` when `onset`, else its complement; literals index `vars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Cover {
    pub vars: Vec<String>,
    pub cubes: Vec<Vec<(usize, bool)>>,
    pub onset: bool,
}

impl Cover {
    pub fn eval(&self, x: &[bool]) -> bool {
        let hit = self.cubes.iter().any(|c| c.iter().all(|&(v, val)| x[v] == val));
        hit == self.onset
    }

    pub fn truth_table(&self) -> Option<TruthTable> {
        (self.vars.len() <= MAX_NODE_INPUTS).then(|| TruthTable::from_fn(self.vars.len(), |x| self.eval(x)))
    }
}

pub(crate) enum Reduced {
    Const(bool),
    Cover(Cover),
}

/// Substitutes mapped fan-in signals into the node's cover, removing dead
/// cubes, vacuous variables and contained cubes.
pub(crate) fn reduce(node: &LogicNode, fanin: &dyn Fn(&str) -> Sig) -> Reduced {
    let mut vars: Vec<String> = Vec::new();
    let mut cubes: Vec<Vec<(usize, bool)>> = Vec::new();
    'rows: for row in &node.rows {
        let mut cube: Vec<(usize, bool)> = Vec::new();
        for (col, lit) in row.iter().enumerate() {
            let Some(want) = *lit else { continue };
            match fanin(&node.inputs[col]) {
                Sig::Const(b) => {
                    if b != want {
                        continue 'rows;
                    }
                }
                Sig::Lit(l) => {
                    let value = want != l.neg;
                    let v = match vars.iter().position(|n| *n == l.net) {
                        Some(v) => v,
                        None => {
                            vars.push(l.net.clone());
                            vars.len() - 1
                        }
                    };
                    match cube.iter().find(|(u, _)| *u == v) {
                        Some(&(_, existing)) if existing != value => continue 'rows,
                        Some(_) => {}
                        None => cube.push((v, value)),
                    }
                }
            }
        }
        cubes.push(cube);
    }
    finish(Cover { vars, cubes, onset: node.onset })
}

fn finish(mut cover: Cover) -> Reduced {
    if cover.cubes.is_empty() {
        return Reduced::Const(!cover.onset);
    }
    if cover.cubes.iter().any(Vec::is_empty) {
        return Reduced::Const(cover.onset);
    }
    if let Some(tt) = cover.truth_table() {
        let n = cover.vars.len();
        let rows = tt.rows();
        if tt.bits == 0 {
            return Reduced::Const(false);
        }
        if tt.bits.count_ones() as u64 == rows {
            return Reduced::Const(true);
        }
        let vacuous: Vec<bool> =
            (0..n).map(|i| (0..rows).all(|x| tt.get(x) == tt.get(x ^ (1 << i)))).collect();
        if vacuous.iter().any(|v| *v) {
            let keep: Vec<usize> = (0..n).filter(|&i| !vacuous[i]).collect();
            let remap = |v: usize| keep.iter().position(|&k| k == v);
            cover.cubes = cover
                .cubes
                .iter()
                .map(|c| c.iter().filter_map(|&(v, val)| remap(v).map(|nv| (nv, val))).collect())
                .collect();
            cover.vars = keep.iter().map(|&i| cover.vars[i].clone()).collect();
        }
    }
    for c in &mut cover.cubes {
        c.sort_unstable();
    }
    // single-cube containment: drop cubes implied by a smaller one
    let sets: Vec<BTreeSet<(usize, bool)>> = cover.cubes.iter().map(|c| c.iter().copied().collect()).collect();
    let mut keep = vec![true; sets.len()];
    for i in 0..sets.len() {
        for j in 0..sets.len() {
            if i != j && keep[j] && keep[i] && sets[j].is_subset(&sets[i]) && (sets[j] != sets[i] || j < i) {
                keep[i] = false;
            }
        }
    }
    cover.cubes = cover.cubes.into_iter().zip(keep).filter(|(_, k)| *k).map(|(c, _)| c).collect();
    if cover.cubes.iter().any(Vec::is_empty) {
        return Reduced::Const(cover.onset);
    }
    // x + !x among single-literal cubes
    let singles: BTreeSet<(usize, bool)> = cover.cubes.iter().filter(|c| c.len() == 1).map(|c| c[0]).collect();
    if singles.iter().any(|&(v, val)| singles.contains(&(v, !val))) {
        return Reduced::Const(cover.onset);
    }
    Reduced::Cover(cover)
}

/// Sum and carry nodes over the same three fan-ins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct AdderPair {
    pub sum: usize,
    pub carry: usize,
    /// Fan-in names in port order A, B, CI.
    pub inputs: [String; 3],
    /// Complement applied to each input before it reaches the cell.
    pub mask: [bool; 3],
    pub sum_neg: bool,
    pub carry_neg: bool,
}

fn maj(x: [bool; 3]) -> bool {
    (x[0] as u8 + x[1] as u8 + x[2] as u8) >= 2
}

fn table3(node: &LogicNode, order: &[String; 3]) -> Option<[bool; 8]> {
    if node.inputs.len() != 3 {
        return None;
    }
    let pos: Vec<usize> = order.iter().map(|n| node.inputs.iter().position(|i| i == n)).collect::<Option<_>>()?;
    let mut t = [false; 8];
    for (v, slot) in t.iter_mut().enumerate() {
        let x = [v & 1 == 1, v & 2 == 2, v & 4 == 4];
        let mut vals = [false; 3];
        for (k, &p) in pos.iter().enumerate() {
            vals[p] = x[k];
        }
        *slot = node.eval(&vals);
    }
    Some(t)
}

/// Greedy pairing of 3-input XOR/XNOR nodes with majority nodes (up to input
/// complements) on the same fan-ins, in node order.
pub(crate) fn find_adders(network: &LogicNetwork) -> Vec<AdderPair> {
    let mut used = vec![false; network.nodes.len()];
    let mut pairs = Vec::new();
    for (s, sn) in network.nodes.iter().enumerate() {
        if used[s] || sn.inputs.len() != 3 {
            continue;
        }
        let mut order = [sn.inputs[0].clone(), sn.inputs[1].clone(), sn.inputs[2].clone()];
        order.sort();
        if order[0] == order[1] || order[1] == order[2] {
            continue;
        }
        let Some(st) = table3(sn, &order) else { continue };
        let xor: Vec<bool> = (0..8).map(|v: usize| v.count_ones() % 2 == 1).collect();
        let sum_neg = if st.iter().zip(&xor).all(|(a, b)| a == b) {
            false
        } else if st.iter().zip(&xor).all(|(a, b)| a != b) {
            true
        } else {
            continue;
        };
        for (c, cn) in network.nodes.iter().enumerate() {
            if c == s || used[c] {
                continue;
            }
            let Some(ct) = table3(cn, &order) else { continue };
            // fewest complemented inputs, then positive carry
            let mut best: Option<(u32, bool, u8)> = None;
            for m in 0..8u8 {
                for neg in [false, true] {
                    let ok = (0..8).all(|v| {
                        let x = [(v & 1 == 1) != (m & 1 == 1), (v & 2 == 2) != (m & 2 == 2), (v & 4 == 4) != (m & 4 == 4)];
                        ct[v] == (maj(x) != neg)
                    });
                    if ok {
                        let key = (m.count_ones(), neg, m);
                        if best.is_none_or(|b| key < b) {
                            best = Some(key);
                        }
                    }
                }
            }
            if let Some((_, carry_neg, m)) = best {
                let mask = [m & 1 == 1, m & 2 == 2, m & 4 == 4];
                // XOR3 of complemented inputs flips once per complement
                let parity = m.count_ones() % 2 == 1;
                used[s] = true;
                used[c] = true;
                pairs.push(AdderPair {
                    sum: s,
                    carry: c,
                    inputs: order.clone(),
                    mask,
                    sum_neg: sum_neg != parity,
                    carry_neg,
                });
                break;
            }
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_blif;

    fn node(rows: &[&str], inputs: &[&str], onset: bool) -> LogicNode {
        LogicNode {
            output: "f".into(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            rows: rows
                .iter()
                .map(|r| {
                    r.chars()
                        .map(|c| match c {
                            '1' => Some(true),
                            '0' => Some(false),
                            _ => None,
                        })
                        .collect()
                })
                .collect(),
            onset,
        }
    }

    fn lit(n: &str) -> Sig {
        Sig::Lit(Lit::new(n, false))
    }

    #[test]
    fn constants_and_vacuous_inputs() {
        let n = node(&["11", "10"], &["a", "b"], true);
        match reduce(&n, &|s| lit(s)) {
            Reduced::Cover(c) => {
                assert_eq!(c.vars, vec!["a".to_string()]);
                assert_eq!(c.cubes, vec![vec![(0, true)]]);
            }
            Reduced::Const(_) => panic!("a is not constant"),
        }
        let n = node(&["11"], &["a", "b"], true);
        assert!(matches!(reduce(&n, &|s| if s == "b" { Sig::Const(false) } else { lit(s) }), Reduced::Const(false)));
        // aliased complementary fan-ins kill the cube
        let n = node(&["11"], &["a", "b"], true);
        let alias = |s: &str| if s == "b" { Sig::Lit(Lit::new("a", true)) } else { lit(s) };
        assert!(matches!(reduce(&n, &alias), Reduced::Const(false)));
    }

    #[test]
    fn finds_full_adder() {
        let text = ".model fa\n.inputs a b c\n.outputs s co\n.names a b c s\n100 1\n010 1\n001 1\n111 1\n\
                    .names a b c co\n11- 1\n1-1 1\n-11 1\n.end\n";
        let net = parse_blif(text).unwrap();
        let pairs = find_adders(&net);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].mask, [false; 3]);
        assert!(!pairs[0].sum_neg && !pairs[0].carry_neg);
    }
}
