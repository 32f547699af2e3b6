// SPDX-License-Identifier: Apache-2.0

//! Why the control line cannot simply inject charge.
//!
//! If Ct were an ordinary aggressor of weight 20 next to A and B (weight 10
//! each) sharing one victim, then `(Ct=1, A=0, B=0)` and `(Ct=0, A=1, B=1)`
//! both inject 20 units onto the same denominator. They produce the same
//! voltage and therefore the same decision for every threshold, yet the
//! AND2/OR2 cell needs the first to stay low (OR2 of 0,0) and the second to
//! flip (AND2 of 1,1). Load modulation avoids this by switching the margin.

use std::fmt;

use super::{builtin_library, SimParams};
use crate::rational::{format_fixed, format_rational, Rational};

const WEIGHT_A: u32 = 10;
const WEIGHT_B: u32 = 10;
const WEIGHT_CT: u32 = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InjectionCase {
    pub ct: bool,
    pub a: bool,
    pub b: bool,
    pub injected_weight: u32,
    pub voltage: Rational,
    /// What the polymorphic cell must do: AND2(a,b) at Ct=0, OR2(a,b) at Ct=1.
    pub required_flip: bool,
    /// Behavior of the builtin load-modulated AND2-OR2 cell.
    pub load_modulated_flip: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdScanPoint {
    pub vm: Rational,
    /// Both colliding cases receive the same decision under the injection model.
    pub collision: bool,
    /// The injection model realizes all eight required decisions.
    pub injection_realizes: bool,
    /// The load-modulated cell realizes both truth tables.
    pub load_modulation_realizes: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InjectionReport {
    pub denominator: u32,
    pub cases: Vec<InjectionCase>,
    /// Indices into `cases` of the colliding pair.
    pub collision: (usize, usize),
    pub collision_weight: u32,
    pub scan: Vec<ThresholdScanPoint>,
}

impl InjectionReport {
    pub fn holds_everywhere(&self) -> bool {
        self.scan
            .iter()
            .all(|p| p.collision && !p.injection_realizes && p.load_modulation_realizes)
    }
}

/// Enumerates the eight (Ct, A, B) cases and scans thresholds 1/100..99/100.
pub fn prove_injection_infeasible() -> InjectionReport {
    let params = SimParams::default();
    let library = builtin_library();
    let cell = library.get("AND2-OR2").expect("builtin AND2-OR2");
    let denominator = WEIGHT_A + WEIGHT_B + WEIGHT_CT + params.c_load();

    let mut cases = Vec::with_capacity(8);
    for ct in [false, true] {
        for a in [false, true] {
            for b in [false, true] {
                let injected = WEIGHT_CT * ct as u32 + WEIGHT_A * a as u32 + WEIGHT_B * b as u32;
                let required = if ct { a || b } else { a && b };
                let mode = cell.mode_for_controls(&[ct]).expect("two modes");
                cases.push(InjectionCase {
                    ct,
                    a,
                    b,
                    injected_weight: injected,
                    voltage: Rational::new(injected as i64, denominator as i64),
                    required_flip: required,
                    load_modulated_flip: mode.flips(&[a, b]),
                });
            }
        }
    }
    let find = |ct, a, b| cases.iter().position(|c| c.ct == ct && c.a == a && c.b == b).unwrap();
    let collision = (find(false, true, true), find(true, false, false));
    let collision_weight = cases[collision.0].injected_weight;
    debug_assert_eq!(collision_weight, cases[collision.1].injected_weight);

    let load_ok = cases.iter().all(|c| c.load_modulated_flip == c.required_flip);
    let scan = (1..=99)
        .map(|k| {
            let vm = Rational::new(k, 100);
            let decide = |c: &InjectionCase| c.voltage >= vm;
            let first = decide(&cases[collision.0]);
            let second = decide(&cases[collision.1]);
            ThresholdScanPoint {
                vm,
                collision: first == second,
                injection_realizes: cases.iter().all(|c| decide(c) == c.required_flip),
                load_modulation_realizes: load_ok,
            }
        })
        .collect();
    InjectionReport { denominator, cases, collision, collision_weight, scan }
}

impl fmt::Display for InjectionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "injection model: w_A={WEIGHT_A} w_B={WEIGHT_B} w_Ct={WEIGHT_CT} denominator={}", self.denominator)?;
        writeln!(f, "Ct A B  injected  voltage   required  load-modulated")?;
        for c in &self.cases {
            writeln!(
                f,
                " {}  {} {}  {:>8}  {:>7}  {:>8}  {:>14}",
                c.ct as u8,
                c.a as u8,
                c.b as u8,
                c.injected_weight,
                format_rational(&c.voltage),
                c.required_flip as u8,
                c.load_modulated_flip as u8
            )?;
        }
        let (i, j) = self.collision;
        let ci = &self.cases[i];
        let cj = &self.cases[j];
        writeln!(
            f,
            "collision: (Ct={},A={},B={}) and (Ct={},A={},B={}) both inject {} -> identical voltage {}",
            ci.ct as u8,
            ci.a as u8,
            ci.b as u8,
            cj.ct as u8,
            cj.a as u8,
            cj.b as u8,
            self.collision_weight,
            format_fixed(&ci.voltage, 6)
        )?;
        let collided = self.scan.iter().filter(|p| p.collision).count();
        let realized = self.scan.iter().filter(|p| p.injection_realizes).count();
        let load = self.scan.iter().filter(|p| p.load_modulation_realizes).count();
        writeln!(f, "threshold scan: {} points", self.scan.len())?;
        writeln!(f, "  collision present:            {collided}/{}", self.scan.len())?;
        writeln!(f, "  injection realizes AND2/OR2:  {realized}/{}", self.scan.len())?;
        writeln!(f, "  load modulation realizes:     {load}/{}", self.scan.len())?;
        writeln!(
            f,
            "verdict: {}",
            if self.holds_everywhere() { "injection infeasible; load modulation required" } else { "UNEXPECTED" }
        )
    }
}
