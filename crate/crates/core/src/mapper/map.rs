// SPDX-License-Identifier: Apache-2.0

//! Per-node realization: direct template matches, parity trees, full adders
//! and two-level decomposition with fan-in splitting.

use super::builder::Builder;
use super::cover::{reduce, AdderPair, Cover, Lit, Reduced, Sig};
use super::{MapError, Style};
use crate::gatelib::{TemplateSet, TruthTable};
use crate::netlist::LogicNode;

const BASIC: [&str; 8] = ["AND2", "OR2", "AND3", "OR3", "NAND2", "NOR2", "NAND3", "NOR3"];
const COMPOSITE: [&str; 5] = ["MAJ3", "AO21", "OA21", "XOR2", "XNOR2"];
/// Static functions that have a polymorphic pair.
pub(crate) const POLY_BASE: [&str; 6] = ["AND2", "OR2", "AND3", "OR3", "AO21", "OA21"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    And,
    Or,
}

struct Entry {
    name: String,
    table: TruthTable,
}

struct Matcher {
    entries: Vec<Entry>,
}

impl Matcher {
    fn new(lib: &TemplateSet, names: &[&str]) -> Self {
        let entries = names
            .iter()
            .filter_map(|n| {
                let t = lib.get(n)?;
                if t.is_polymorphic() || t.output_ports().len() != 1 {
                    return None;
                }
                Some(Entry { name: n.to_string(), table: t.function(&[], 0).ok()? })
            })
            .collect();
        Self { entries }
    }
}

struct Direct {
    template: String,
    inputs: Vec<Lit>,
    neg: bool,
    cost: u32,
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for at in 0..=p.len() {
            let mut q = p.clone();
            q.insert(at, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

fn index(bits: impl Iterator<Item = bool>) -> u64 {
    bits.enumerate().fold(0, |acc, (i, b)| acc | ((b as u64) << i))
}

fn is_parity(tt: &TruthTable) -> Option<bool> {
    let parity = TruthTable::from_fn(tt.arity(), |x| x.iter().filter(|b| **b).count() % 2 == 1);
    if *tt == parity {
        Some(false)
    } else if *tt == parity.complement() {
        Some(true)
    } else {
        None
    }
}

pub(crate) struct Ctx {
    style: Style,
    composites: bool,
    direct: Matcher,
    poly: Matcher,
}

pub(crate) enum Realization {
    Constant(bool),
    Alias(Lit),
    Mapped { root: Lit, how: &'static str },
}

impl Ctx {
    pub fn new(lib: &TemplateSet, style: Style, composites: bool) -> Self {
        let mut names: Vec<&str> = BASIC.to_vec();
        if composites {
            names.extend(COMPOSITE);
        }
        Self { style, composites, direct: Matcher::new(lib, &names), poly: Matcher::new(lib, &POLY_BASE) }
    }

    fn find_direct(&self, b: &Builder, m: &Matcher, cover: &Cover, tt: &TruthTable, positive_only: bool) -> Option<Direct> {
        let n = cover.vars.len();
        let complement = tt.complement();
        let mut best: Option<Direct> = None;
        for e in m.entries.iter().filter(|e| e.table.arity() == n) {
            let Ok(tcost) = b.template_cost(&e.name) else { continue };
            for perm in permutations(n) {
                for mask in 0..1u64 << n {
                    let flip = |j: usize| (mask >> j) & 1 == 1;
                    let g = TruthTable::from_fn(n, |x| e.table.get(index((0..n).map(|j| x[perm[j]] != flip(j)))));
                    let neg = if g == *tt {
                        false
                    } else if g == complement && !positive_only {
                        true
                    } else {
                        continue;
                    };
                    let inputs: Vec<Lit> = (0..n).map(|j| Lit::new(cover.vars[perm[j]].clone(), flip(j))).collect();
                    let cost = tcost
                        + inputs.iter().map(|l| b.need(l)).sum::<u32>()
                        + b.repeat_need(&inputs)
                        + if neg { b.model.inverter } else { 0 };
                    if best.as_ref().is_none_or(|d| cost < d.cost) {
                        best = Some(Direct { template: e.name.clone(), inputs, neg, cost });
                    }
                }
            }
        }
        best
    }

    fn emit_direct(&self, b: &mut Builder, d: &Direct, owner: &str) -> Result<Lit, MapError> {
        let outs = b.cell(&d.template, &d.inputs, owner)?;
        Ok(Lit::new(outs[0].clone(), d.neg))
    }

    fn penalty(b: &Builder, root: &Lit) -> u32 {
        if root.neg {
            b.model.inverter
        } else {
            0
        }
    }

    /// Maps one node; `name` is its sanitized output name.
    pub fn map_node(
        &self,
        b: &mut Builder,
        node: &LogicNode,
        name: &str,
        fanin: &dyn Fn(&str) -> Sig,
    ) -> Result<Realization, MapError> {
        let cover = match reduce(node, fanin) {
            Reduced::Const(v) => return Ok(Realization::Constant(v)),
            Reduced::Cover(c) => c,
        };
        if cover.vars.len() == 1 {
            let tt = cover.truth_table().expect("one variable");
            return Ok(Realization::Alias(Lit::new(cover.vars[0].clone(), !tt.get(1))));
        }
        let mark = b.mark();
        let tt = cover.truth_table();

        let direct = tt.as_ref().and_then(|tt| self.find_direct(b, &self.direct, &cover, tt, false));

        let root = self.decompose(b, &cover, name)?;
        let dec_cost = b.cost - mark.cost + Self::penalty(b, &root);
        b.rollback(mark);

        let parity = match tt.as_ref().and_then(is_parity) {
            Some(flip) if self.composites && b.lib.get("XOR2").is_some() && b.lib.get("XNOR2").is_some() => {
                self.parity(b, &cover.vars, flip, name)?;
                let cost = b.cost - mark.cost;
                b.rollback(mark);
                Some((cost, flip))
            }
            _ => None,
        };

        let (root, how) = match (direct, parity) {
            (Some(d), p) if d.cost <= dec_cost && p.is_none_or(|(c, _)| d.cost <= c) => {
                (self.emit_direct(b, &d, name)?, "direct")
            }
            (_, Some((c, flip))) if c <= dec_cost => (self.parity(b, &cover.vars, flip, name)?, "parity"),
            _ => (self.decompose(b, &cover, name)?, "decomposed"),
        };
        debug_assert!(b.created_since(mark, &root.net));
        let net = b.name_root(mark, &root.net, name, root.neg, true);
        Ok(Realization::Mapped { root: Lit::new(net, root.neg), how })
    }

    /// Static cell with a polymorphic pair, output positive.
    pub fn map_poly(
        &self,
        b: &mut Builder,
        node: &LogicNode,
        name: &str,
        fanin: &dyn Fn(&str) -> Sig,
    ) -> Result<Lit, MapError> {
        let mismatch = |reason: &str| MapError::PairMismatch { node: node.output.clone(), reason: reason.to_string() };
        let cover = match reduce(node, fanin) {
            Reduced::Const(_) => return Err(mismatch("node reduces to a constant")),
            Reduced::Cover(c) => c,
        };
        if cover.vars.len() < 2 {
            return Err(mismatch("node reduces to a wire"));
        }
        let tt = cover.truth_table().ok_or_else(|| mismatch("node has more inputs than any polymorphic cell"))?;
        let d = self
            .find_direct(b, &self.poly, &cover, &tt, true)
            .ok_or_else(|| mismatch("function is not AND2, OR2, AND3, OR3, AO21 or OA21, so no pair contains it"))?;
        let mark = b.mark();
        let root = self.emit_direct(b, &d, name)?;
        let net = b.name_root(mark, &root.net, name, false, true);
        Ok(Lit::new(net, false))
    }

    /// One FA cell for a sum/carry pair, or `None` when the fan-ins collapse.
    pub fn map_adder(
        &self,
        b: &mut Builder,
        pair: &AdderPair,
        names: [&str; 2],
        fanin: &dyn Fn(&str) -> Sig,
    ) -> Result<Option<(Lit, Lit)>, MapError> {
        if b.lib.get("FA").is_none() {
            return Ok(None);
        }
        let mut ports = Vec::with_capacity(3);
        for (name, mask) in pair.inputs.iter().zip(pair.mask) {
            match fanin(name) {
                Sig::Lit(l) if !ports.iter().any(|p: &Lit| p.net == l.net) => ports.push(Lit::new(l.net, l.neg != mask)),
                _ => return Ok(None),
            }
        }
        let mark = b.mark();
        let outs = b.cell("FA", &ports, names[0])?;
        let s = b.name_root(mark, &outs[0], names[0], pair.sum_neg, true);
        let co = b.name_root(mark, &outs[1], names[1], pair.carry_neg, false);
        Ok(Some((Lit::new(s, pair.sum_neg), Lit::new(co, pair.carry_neg))))
    }

    /// XNOR2 tree with an XOR2 or XNOR2 root chosen to make the output positive.
    fn parity(&self, b: &mut Builder, vars: &[String], flip: bool, owner: &str) -> Result<Lit, MapError> {
        let half = vars.len() / 2;
        let (l, fl) = self.xnor_tree(b, &vars[..half], owner)?;
        let (r, fr) = self.xnor_tree(b, &vars[half..], owner)?;
        // XOR2 yields parity ^ fl ^ fr; XNOR2 adds one more flip
        let template = if fl ^ fr ^ flip { "XNOR2" } else { "XOR2" };
        let outs = b.cell(template, &[Lit::new(l, false), Lit::new(r, false)], owner)?;
        Ok(Lit::new(outs[0].clone(), false))
    }

    /// Net carrying the parity of `vars` complemented when the flag is set.
    fn xnor_tree(&self, b: &mut Builder, vars: &[String], owner: &str) -> Result<(String, bool), MapError> {
        if vars.len() == 1 {
            return Ok((vars[0].clone(), false));
        }
        let half = vars.len() / 2;
        let (l, fl) = self.xnor_tree(b, &vars[..half], owner)?;
        let (r, fr) = self.xnor_tree(b, &vars[half..], owner)?;
        let outs = b.cell("XNOR2", &[Lit::new(l, false), Lit::new(r, false)], owner)?;
        Ok((outs[0].clone(), !(fl ^ fr)))
    }

    fn decompose(&self, b: &mut Builder, cover: &Cover, owner: &str) -> Result<Lit, MapError> {
        let lits = |cube: &[(usize, bool)]| -> Vec<Lit> {
            cube.iter().map(|&(v, val)| Lit::new(cover.vars[v].clone(), !val)).collect()
        };
        // inner polarity that makes the final output positive
        let prefer = Some(!cover.onset);
        let root = if cover.cubes.len() == 1 {
            self.tree(b, Kind::And, lits(&cover.cubes[0]), prefer, owner)?
        } else {
            let mut terms = Vec::with_capacity(cover.cubes.len());
            for cube in &cover.cubes {
                let l = lits(cube);
                terms.push(if l.len() == 1 { l[0].clone() } else { self.tree(b, Kind::And, l, None, owner)? });
            }
            self.tree(b, Kind::Or, terms, prefer, owner)?
        };
        Ok(if cover.onset { root } else { root.not() })
    }

    fn tree(&self, b: &mut Builder, kind: Kind, mut lits: Vec<Lit>, prefer: Option<bool>, owner: &str) -> Result<Lit, MapError> {
        // leaves of equal level share a gate, keeping phases aligned
        lits.sort_by(|x, y| (b.level(&x.net), x).cmp(&(b.level(&y.net), y)));
        lits.dedup();
        if lits.len() == 1 {
            return Ok(lits.pop().expect("one literal"));
        }
        if lits.len() <= 3 {
            return self.gate(b, kind, &lits, prefer, owner);
        }
        // balanced chunks or a level-driven merge, whichever is cheaper
        let mark = b.mark();
        let mut best: Option<(u32, bool)> = None;
        for merge in [false, true] {
            let root = self.split(b, kind, &lits, prefer, owner, merge)?;
            let cost = b.cost - mark.cost + if prefer.is_some_and(|p| p != root.neg) { b.model.inverter } else { 0 };
            b.rollback(mark);
            if best.is_none_or(|(c, _)| cost < c) {
                best = Some((cost, merge));
            }
        }
        let merge = best.expect("two candidates").1;
        self.split(b, kind, &lits, prefer, owner, merge)
    }

    fn split(
        &self,
        b: &mut Builder,
        kind: Kind,
        lits: &[Lit],
        prefer: Option<bool>,
        owner: &str,
        merge: bool,
    ) -> Result<Lit, MapError> {
        if !merge {
            let groups = lits.len().div_ceil(3);
            let mut sub = Vec::with_capacity(groups);
            let mut start = 0;
            for g in 0..groups {
                let size = lits.len() / groups + usize::from(g < lits.len() % groups);
                sub.push(self.tree(b, kind, lits[start..start + size].to_vec(), None, owner)?);
                start += size;
            }
            return self.tree(b, kind, sub, prefer, owner);
        }
        // repeatedly combine the earliest signals, equal levels together
        let mut items = lits.to_vec();
        while items.len() > 3 {
            items.sort_by(|x, y| (b.level(&x.net), x).cmp(&(b.level(&y.net), y)));
            let first = b.level(&items[0].net);
            let same = items.iter().take_while(|l| b.level(&l.net) == first).count();
            let group: Vec<Lit> = items.drain(..same.clamp(2, 3)).collect();
            items.push(self.gate(b, kind, &group, None, owner)?);
        }
        self.gate(b, kind, &items, prefer, owner)
    }

    fn gate(&self, b: &mut Builder, kind: Kind, lits: &[Lit], prefer: Option<bool>, owner: &str) -> Result<Lit, MapError> {
        let n = lits.len();
        let (template, inputs, neg) = match self.style {
            Style::AndOr => {
                let t = match kind {
                    Kind::And => format!("AND{n}"),
                    Kind::Or => format!("OR{n}"),
                };
                (t, lits.to_vec(), false)
            }
            Style::NandNand => {
                let negated: Vec<Lit> = lits.iter().map(Lit::not).collect();
                let (nand, nor) = (format!("NAND{n}"), format!("NOR{n}"));
                let options = match kind {
                    Kind::And => [(nand, lits.to_vec(), true), (nor, negated, false)],
                    Kind::Or => [(nand, negated, false), (nor, lits.to_vec(), true)],
                };
                let mut best: Option<(u32, usize)> = None;
                for (k, (t, ins, neg)) in options.iter().enumerate() {
                    let Ok(c) = b.template_cost(t) else { continue };
                    let pen = if prefer.is_some_and(|p| p != *neg) { b.model.inverter } else { 0 };
                    let cost = c + ins.iter().map(|l| b.need(l)).sum::<u32>() + b.repeat_need(ins) + pen;
                    if best.is_none_or(|(bc, _)| cost < bc) {
                        best = Some((cost, k));
                    }
                }
                let Some((_, k)) = best else { return Err(MapError::MissingTemplate(options[0].0.clone())) };
                let [a, c] = options;
                if k == 0 {
                    a
                } else {
                    c
                }
            }
        };
        let outs = b.cell(&template, &inputs, owner)?;
        Ok(Lit::new(outs[0].clone(), neg))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutations_are_complete() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(1), vec![vec![0]]);
    }

    #[test]
    fn parity_detection() {
        let x3 = TruthTable::from_fn(3, |x| x[0] ^ x[1] ^ x[2]);
        assert_eq!(is_parity(&x3), Some(false));
        assert_eq!(is_parity(&x3.complement()), Some(true));
        assert_eq!(is_parity(&TruthTable::from_fn(2, |x| x[0] && x[1])), None);
    }
}
