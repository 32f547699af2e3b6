// SPDX-License-Identifier: Apache-2.0

//! Capacitance calibration: find integer coupling weights and an auxiliary
//! load realizing a flip set under both the margin and the divider models.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{check_mode, lp, GateMode, SimParams, TruthTable, MAX_NODE_INPUTS};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalibrationBounds {
    pub max_weight: u32,
    pub max_aux: u32,
    pub weight_granularity: u32,
}

impl Default for CalibrationBounds {
    fn default() -> Self {
        Self { max_weight: 80, max_aux: 80, weight_granularity: 10 }
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum Infeasible {
    #[error("flip set is not a positive threshold function")]
    NotThreshold,
    #[error("no weight/load assignment within the calibration bounds")]
    BoundsExhausted,
}

/// Exact test: exist integer weights `w_i >= 1` and margin `1 <= M <= sum(w)`
/// with `f(x) = [w.x >= M]`. Decided by an exact LP over the vertex set.
pub fn is_positive_threshold(table: &TruthTable) -> bool {
    if !table.is_monotone() {
        return false;
    }
    let n = table.arity();
    // variables: w_0..w_{n-1}, M
    let mut rows: Vec<Vec<i64>> = Vec::new();
    let mut rhs: Vec<i64> = Vec::new();
    for i in 0..n {
        let mut r = vec![0i64; n + 1];
        r[i] = -1;
        rows.push(r);
        rhs.push(-1);
    }
    let mut r = vec![0i64; n + 1];
    r[n] = -1;
    rows.push(r);
    rhs.push(-1);
    let mut r = vec![-1i64; n + 1];
    r[n] = 1;
    rows.push(r);
    rhs.push(0);
    for v in 0..table.rows() {
        let mut r = vec![0i64; n + 1];
        for (i, slot) in r.iter_mut().enumerate().take(n) {
            if (v >> i) & 1 == 1 {
                *slot = 1;
            }
        }
        if table.get(v) {
            // M - w.x <= 0
            for slot in r.iter_mut().take(n) {
                *slot = -*slot;
            }
            r[n] = 1;
            rhs.push(0);
        } else {
            // w.x - M <= -1  (rational scaling makes the unit gap free)
            r[n] = -1;
            rhs.push(-1);
        }
        rows.push(r);
    }
    lp::feasible(&rows, &rhs)
}

fn min_aux(
    s_min_flip: u32,
    s_max_rest: u32,
    weight_sum: u32,
    params: &SimParams,
    bounds: &CalibrationBounds,
) -> Option<u32> {
    let vm = params.vm();
    let delta = params.delta_min();
    let mut aux = 0;
    while aux <= bounds.max_aux {
        let total = (weight_sum + aux + params.c_load()) as i64;
        let high = Rational::new(s_min_flip as i64, total);
        let low = Rational::new(s_max_rest as i64, total);
        // the divider only decreases with more load, so once the flipping
        // side drops below vm + delta no larger aux can help
        if high < vm + delta {
            return None;
        }
        if low <= vm - delta && low < vm {
            return Some(aux);
        }
        aux += bounds.weight_granularity;
    }
    None
}

/// Minimum-capacitance single-node mode for `flip_set`.
///
/// Searches weights in `weight_granularity` steps up to `max_weight` and the
/// auxiliary load likewise; minimizes total capacitance, then picks the
/// lexicographically smallest weight vector.
pub fn calibrate(
    flip_set: &TruthTable,
    params: &SimParams,
    bounds: &CalibrationBounds,
) -> Result<GateMode, Infeasible> {
    let n = flip_set.arity();
    assert!(n <= MAX_NODE_INPUTS);
    if !is_positive_threshold(flip_set) {
        return Err(Infeasible::NotThreshold);
    }
    let step = bounds.weight_granularity.max(1);
    let levels: Vec<u32> = (1..).map(|k| k * step).take_while(|w| *w <= bounds.max_weight).collect();
    if levels.is_empty() {
        return Err(Infeasible::BoundsExhausted);
    }
    let rows = flip_set.rows() as usize;
    let mut best: Option<(u32, Vec<u32>, u32, u32)> = None;
    let base = levels.len();
    let combos = base.pow(n as u32);
    let mut sums = vec![0u32; rows];
    // enumeration in lexicographic order of the weight vector
    for code in 0..combos {
        let mut rest = code;
        let mut weights = vec![0u32; n];
        for slot in weights.iter_mut().rev() {
            *slot = levels[rest % base];
            rest /= base;
        }
        for (v, s) in sums.iter_mut().enumerate() {
            *s = (0..n).filter(|i| (v >> i) & 1 == 1).map(|i| weights[i]).sum();
        }
        let mut s_min_flip = u32::MAX;
        let mut s_max_rest = 0u32;
        for (v, &s) in sums.iter().enumerate() {
            if flip_set.get(v as u64) {
                s_min_flip = s_min_flip.min(s);
            } else {
                s_max_rest = s_max_rest.max(s);
            }
        }
        if s_min_flip == u32::MAX || s_max_rest >= s_min_flip {
            continue;
        }
        let weight_sum: u32 = weights.iter().sum();
        if best.as_ref().is_some_and(|b| weight_sum >= b.0) {
            continue;
        }
        if let Some(aux) = min_aux(s_min_flip, s_max_rest, weight_sum, params, bounds) {
            let total = weight_sum + aux;
            if best.as_ref().is_none_or(|b| total < b.0) {
                best = Some((total, weights, aux, s_min_flip));
            }
        }
    }
    let (_, weights, aux, margin) = best.ok_or(Infeasible::BoundsExhausted)?;
    let mode = GateMode::single(weights, aux, margin);
    debug_assert!(check_mode(&mode, params).passed());
    debug_assert_eq!(mode.flip_table(), *flip_set);
    Ok(mode)
}
