// SPDX-License-Identifier: Apache-2.0

use crosstalk::gatelib::{
    builtin_library, calibrate, check_mode, CalibrationBounds, GateMode, Infeasible, SimParams, TruthTable,
};
use crosstalk::rational::Rational;
use proptest::prelude::*;

fn mode() -> impl Strategy<Value = GateMode> {
    (1usize..=4)
        .prop_flat_map(|n| (prop::collection::vec(1u32..=40, n), 0u32..=60))
        .prop_flat_map(|(w, aux)| {
            let sum: u32 = w.iter().sum();
            (Just(w), Just(aux), 1..=sum)
        })
        .prop_map(|(w, aux, margin)| GateMode::single(w, aux, margin))
}

fn bits(v: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| (v >> i) & 1 == 1).collect()
}

/// Brute-force threshold check with weights 1..=n+1.
fn threshold_realizable(f: &TruthTable) -> bool {
    let n = f.arity();
    let max = n as u32 + 1;
    let combos = (max as u64).pow(n as u32);
    (0..combos).any(|mut c| {
        let w: Vec<u32> = (0..n)
            .map(|_| {
                let d = (c % max as u64) as u32 + 1;
                c /= max as u64;
                d
            })
            .collect();
        let sum: u32 = w.iter().sum();
        (1..=sum).any(|m| {
            (0..f.rows()).all(|v| {
                let s: u32 = (0..n).filter(|i| (v >> i) & 1 == 1).map(|i| w[i]).sum();
                (s >= m) == f.get(v)
            })
        })
    })
}

#[test]
fn builtin_modes_are_monotone() {
    let lib = builtin_library();
    for t in &lib.templates {
        for m in t.victim_modes() {
            let n = m.arity();
            for v in 0..1u64 << n {
                for i in 0..n {
                    let up = v | (1 << i);
                    assert!(!m.flips(&bits(v, n)) || m.flips(&bits(up, n)), "{} not monotone", t.name);
                }
            }
        }
    }
}

#[test]
fn polymorphic_modes_follow_controls() {
    let lib = builtin_library();
    for t in lib.templates.iter().filter(|t| t.is_polymorphic()) {
        for ct in [false, true] {
            let m = t.mode_for_controls(&[ct]).unwrap();
            let n = t.data_ports.len();
            for v in 0..1u64 << n {
                let x = bits(v, n);
                assert_eq!(t.evaluate(&x, &[ct]).unwrap(), vec![m.flips(&x)], "{} ct={ct}", t.name);
            }
        }
        assert_ne!(t.function(&[false], 0).unwrap(), t.function(&[true], 0).unwrap(), "{}", t.name);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn consistency_check_matches_recount(m in mode()) {
        let p = SimParams::default();
        let report = check_mode(&m, &p);
        let mut agree = true;
        for v in 0..1u64 << m.arity() {
            let x = bits(v, m.arity());
            let high: u32 = m.data_weights.iter().zip(&x).filter(|(_, &h)| h).map(|(w, _)| w).sum();
            let total: u32 = m.data_weights.iter().sum::<u32>() + m.aux_load + p.c_load();
            let voltage = Rational::new(high as i64, total as i64);
            prop_assert_eq!(m.voltage(&x, &p), voltage);
            let gap = if voltage >= p.vm() { voltage - p.vm() } else { p.vm() - voltage };
            if (high >= m.margin) != (voltage >= p.vm()) || gap < p.delta_min() {
                agree = false;
            }
        }
        prop_assert_eq!(report.passed(), agree);
    }

    #[test]
    fn voltage_stays_below_supply(m in mode(), v in any::<u64>()) {
        let p = SimParams::default();
        let x = bits(v, m.arity());
        let voltage = m.voltage(&x, &p);
        prop_assert!(voltage >= Rational::from_integer(0));
        prop_assert!(voltage < Rational::from_integer(1));
    }

    #[test]
    fn calibration_is_sound_and_complete(n in 1usize..=4, table in any::<u64>()) {
        let f = TruthTable::new(n, table);
        let p = SimParams::default();
        match calibrate(&f, &p, &CalibrationBounds::default()) {
            Ok(m) => {
                prop_assert_eq!(m.flip_table(), f);
                let report = check_mode(&m, &p);
                prop_assert!(report.passed());
                prop_assert!(report.worst_slack >= Rational::new(1, 50));
                prop_assert!(threshold_realizable(&f));
            }
            Err(Infeasible::NotThreshold) => prop_assert!(!threshold_realizable(&f)),
            Err(Infeasible::BoundsExhausted) => prop_assert!(threshold_realizable(&f)),
        }
    }
}
