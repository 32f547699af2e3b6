// SPDX-License-Identifier: Apache-2.0

//! Exact phase-one simplex: decides whether `{ z >= 0 : A z <= b }` is nonempty.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Feasibility of `A z <= b, z >= 0` using Bland's rule over exact rationals.
pub(crate) fn feasible(rows: &[Vec<i64>], rhs: &[i64]) -> bool {
    assert_eq!(rows.len(), rhs.len());
    let m = rows.len();
    if m == 0 {
        return true;
    }
    let n = rows[0].len();
    let negative_rows: Vec<usize> = (0..m).filter(|&i| rhs[i] < 0).collect();
    let n_art = negative_rows.len();
    // columns: structural n, slack m, artificial n_art, rhs
    let cols = n + m + n_art;
    let big = |v: i64| BigRational::from_integer(v.into());
    let mut tab: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    let mut basis = vec![0usize; m];
    let mut art_iter = 0;
    for i in 0..m {
        let sign = if rhs[i] < 0 { -1 } else { 1 };
        let mut row = vec![BigRational::zero(); cols + 1];
        for j in 0..n {
            row[j] = big(sign * rows[i][j]);
        }
        row[n + i] = big(sign);
        row[cols] = big(sign * rhs[i]);
        if sign < 0 {
            row[n + m + art_iter] = BigRational::one();
            basis[i] = n + m + art_iter;
            art_iter += 1;
        } else {
            basis[i] = n + i;
        }
        tab.push(row);
    }
    if n_art == 0 {
        return true;
    }
    // objective: minimise sum of artificials; reduced costs kept in `obj`
    let mut obj = vec![BigRational::zero(); cols + 1];
    for &i in &negative_rows {
        for j in 0..=cols {
            if j < n + m || j == cols {
                obj[j] = &obj[j] - &tab[i][j];
            }
        }
    }
    loop {
        let entering = (0..cols).find(|&j| obj[j].is_negative());
        let Some(e) = entering else { break };
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..m {
            if tab[i][e].is_positive() {
                let ratio = &tab[i][cols] / &tab[i][e];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            // unbounded in phase one cannot happen (objective bounded below by 0)
            unreachable!("phase-one objective is bounded below");
        };
        let pivot = tab[r][e].clone();
        for x in tab[r].iter_mut().take(cols + 1) {
            *x = &*x / &pivot;
        }
        let pivot_row = tab[r].clone();
        for (i, row) in tab.iter_mut().enumerate().take(m) {
            if i != r && !row[e].is_zero() {
                let factor = row[e].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row).take(cols + 1) {
                    let delta = &factor * p;
                    *x = &*x - &delta;
                }
            }
        }
        if !obj[e].is_zero() {
            let factor = obj[e].clone();
            for j in 0..=cols {
                let delta = &factor * &tab[r][j];
                obj[j] = &obj[j] - &delta;
            }
        }
        basis[r] = e;
    }
    // obj[cols] holds minus the objective value
    obj[cols].is_zero()
}
