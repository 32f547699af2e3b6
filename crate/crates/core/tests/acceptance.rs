// SPDX-License-Identifier: Apache-2.0

//! Acceptance checks. Runs without the libtest harness so that every
//! criterion prints one PASS/FAIL line; the process exits non-zero if any
//! criterion fails.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use crosstalk::gatelib::{
    calibrate, is_positive_threshold, margin_eval, noise_margin, prove_injection_infeasible, victim_voltage,
    CalibrationBounds, GateMode, Infeasible, SimParams, TemplateSet, TruthTable,
};
use crosstalk::mapper::{map_network, MapOptions, PolySpec};
use crosstalk::metrics::{compare_cmos, emit_report, CmosRefLibrary, ReportFormat};
use crosstalk::netlist::{parse_xtn, serialize_xtn, validate};
use crosstalk::polymorph::{brute_force_key, keyed_oracle, AttackOutcome, Key};
use crosstalk::rational::Rational;
use crosstalk::sim::{self, verify_equivalence, write_csv, write_vcd, Stimulus, Strategy};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Reference functions, written out by hand. Outputs in port order.
fn reference(name: &str, x: &[bool]) -> Option<Vec<bool>> {
    let (a, b) = (x[0], x.get(1).copied().unwrap_or(false));
    let c = x.get(2).copied().unwrap_or(false);
    Some(match name {
        "NAND2" => vec![!(a && b)],
        "NOR2" => vec![!(a || b)],
        "AND2" => vec![a && b],
        "OR2" => vec![a || b],
        "NAND3" => vec![!(a && b && c)],
        "NOR3" => vec![!(a || b || c)],
        "AND3" => vec![a && b && c],
        "OR3" => vec![a || b || c],
        "MAJ3" => vec![(a && b) || (a && c) || (b && c)],
        "AO21" => vec![(a && b) || c],
        "OA21" => vec![(a || b) && c],
        "XBUF" => vec![a],
        "XOR2" => vec![a != b],
        "XNOR2" => vec![a == b],
        "FA" => vec![a ^ b ^ c, (a && b) || (a && c) || (b && c)],
        _ => return None,
    })
}

/// A one-cell netlist: data port `P` is driven by input `p`, output port `O`
/// drives `o_O`.
fn single_cell(lib: &TemplateSet, name: &str) -> String {
    let t = lib.get(name).expect("template");
    let ins: Vec<String> = t.data_ports.iter().map(|p| p.name.to_lowercase()).collect();
    let outs: Vec<String> = t.output_ports().iter().map(|p| format!("o_{p}")).collect();
    let mut text = format!("xtn 1\ndesign cell\ninput {}\noutput {}\n", ins.join(" "), outs.join(" "));
    let mut pins: Vec<String> = t.data_ports.iter().zip(&ins).map(|(p, n)| format!("{}={n}", p.name)).collect();
    pins.extend(t.output_ports().iter().zip(&outs).map(|(p, n)| format!("{p}={n}")));
    text.push_str(&format!("gate u0 template={name} phase=0 {}\n", pins.join(" ")));
    text
}

fn c1_truth_tables(lib: &TemplateSet) -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    let mut vectors = 0;
    for t in lib.templates.iter().filter(|t| !t.is_polymorphic()) {
        let netlist = parse_xtn(&single_cell(lib, &t.name), lib).map_err(fail)?;
        let stim = Stimulus::exhaustive(netlist.inputs.clone());
        ensure!(stim.rows.len() <= 64, "{} has more than 2^6 vectors", t.name);
        let trace = sim::run(&netlist, lib, &stim, None).map_err(fail)?;
        for (row, got) in stim.rows.iter().zip(trace.sampled_outputs()) {
            let want = reference(&t.name, row).ok_or_else(|| format!("no reference for {}", t.name))?;
            ensure!(got == want, "{} on {:?}: got {:?}, want {:?}", t.name, row, got, want);
            vectors += 1;
        }
        checked += 1;
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("{checked} templates, {vectors} vectors, {elapsed:.2?}"))
}

fn c2_polymorphic_sweep(lib: &TemplateSet) -> Outcome {
    let text = "xtn 1\ndesign sweep\ninput a b\noutput f\nctrl ct=free\n\
                gate u0 template=AND2-OR2 phase=0 A=a B=b CT=ct Y=f\n";
    let netlist = parse_xtn(text, lib).map_err(fail)?;
    let stim = Stimulus::exhaustive(vec!["ct".into(), "a".into(), "b".into()]);
    let trace = sim::run(&netlist, lib, &stim, None).map_err(fail)?;
    let mut exact = 0;
    for (row, got) in stim.rows.iter().zip(trace.sampled_outputs()) {
        let (ct, a, b) = (row[0], row[1], row[2]);
        let want = if ct { a || b } else { a && b };
        if got == vec![want] {
            exact += 1;
        }
    }
    ensure!(exact == 8, "{exact}/8 rows exact");
    Ok("8/8 rows exact".into())
}

fn density(lib: &TemplateSet, stem: &str, crosstalk: u32, cmos: u32, pct: &str) -> Result<String, String> {
    let network = common::corpus(stem);
    let mapped = common::map_default(&network, lib);
    let report =
        compare_cmos(&network.name, &network, &mapped, lib, &CmosRefLibrary::default()).map_err(fail)?;
    ensure!(report.crosstalk_total == crosstalk, "crosstalk {} != {crosstalk}", report.crosstalk_total);
    ensure!(report.cmos_total == cmos, "cmos {} != {cmos}", report.cmos_total);
    let exact = Rational::new(100 * (cmos - crosstalk) as i64, cmos as i64);
    ensure!(report.reduction() == Some(exact / 100), "reduction {:?} != {exact}%", report.reduction());
    ensure!(report.reduction_pct.as_deref() == Some(pct), "reduction {:?} != {pct}", report.reduction_pct);
    Ok(format!("{crosstalk} vs {cmos}, {pct}%"))
}

fn c4_full_adder(lib: &TemplateSet) -> Outcome {
    let line = density(lib, "fa", 13, 40, "67.5")?;
    let network = common::corpus("fa");
    let mapped = common::map_default(&network, lib);
    let eq = verify_equivalence(&mapped, lib, &network, Strategy::Exhaustive).map_err(fail)?;
    ensure!(eq.passed() && eq.vectors == 8, "equivalence: {}", eq.summary());
    Ok(format!("{line}, equivalence 8/8"))
}

/// Divider voltage computed from scratch.
fn divider(mode: &GateMode, x: &[bool], params: &SimParams) -> Rational {
    let high: u32 = mode.data_weights.iter().zip(x).filter(|(_, &h)| h).map(|(w, _)| w).sum();
    let total: u32 = mode.data_weights.iter().sum::<u32>() + mode.aux_load + params.c_load();
    Rational::new(high as i64, total as i64)
}

fn c5_model_consistency(lib: &TemplateSet) -> Outcome {
    let params = &lib.params;
    let floor = Rational::new(1, 50);
    let mut modes = 0;
    let mut worst: Option<Rational> = None;
    for t in &lib.templates {
        for mode in t.victim_modes() {
            let n = mode.data_weights.len();
            let mut slack: Option<Rational> = None;
            for v in 0..1u64 << n {
                let x: Vec<bool> = (0..n).map(|i| (v >> i) & 1 == 1).collect();
                let weight: u32 = mode.data_weights.iter().zip(&x).filter(|(_, &h)| h).map(|(w, _)| w).sum();
                let behavioral = weight >= mode.margin;
                let voltage = divider(mode, &x, params);
                let analytical = voltage >= params.vm();
                ensure!(
                    behavioral == analytical,
                    "{} mode {} on {x:?}: margin says {behavioral}, voltage {voltage} says {analytical}",
                    t.name,
                    mode.mode_id
                );
                if !t.is_composite() {
                    ensure!(margin_eval(t, mode.mode_id, &x).map_err(fail)? == behavioral, "{} margin_eval", t.name);
                    ensure!(
                        victim_voltage(t, mode.mode_id, &x, params).map_err(fail)? == voltage,
                        "{} victim_voltage",
                        t.name
                    );
                }
                let d = if voltage >= params.vm() { voltage - params.vm() } else { params.vm() - voltage };
                slack = Some(slack.map_or(d, |s| s.min(d)));
            }
            let slack = slack.expect("at least one vector");
            ensure!(slack >= floor, "{} mode {}: noise margin {slack} < 1/50", t.name, mode.mode_id);
            if !t.is_composite() {
                let lib_margin = noise_margin(t, mode.mode_id, params).map_err(fail)?;
                ensure!(lib_margin == slack, "{} noise_margin {lib_margin} != {slack}", t.name);
            }
            worst = Some(worst.map_or(slack, |w| w.min(slack)));
            modes += 1;
        }
    }
    Ok(format!("{modes} victim modes, worst noise margin {}", worst.expect("modes exist")))
}

fn c6_injection_lemma() -> Outcome {
    let report = prove_injection_infeasible();
    ensure!(report.collision_weight == 20, "collision weight {}", report.collision_weight);
    ensure!(report.scan.len() == 99, "{} scan points", report.scan.len());
    let mut good = 0;
    for (k, p) in report.scan.iter().enumerate() {
        ensure!(p.vm == Rational::new(k as i64 + 1, 100), "scan point {k} at vm {}", p.vm);
        if p.collision && !p.injection_realizes && p.load_modulation_realizes {
            good += 1;
        }
    }
    ensure!(good == 99, "{good}/99 scan points");
    ensure!(report.holds_everywhere(), "holds_everywhere is false");
    Ok("99/99 scan points (100%)".into())
}

/// Brute force over weights 1..=n+1 and every margin up to their sum.
fn threshold_oracle(f: &TruthTable) -> bool {
    let n = f.arity();
    let max = n as u32 + 1;
    let mut w = vec![1u32; n];
    loop {
        let sum: u32 = w.iter().sum();
        for m in 1..=sum {
            let ok = (0..f.rows()).all(|v| {
                let s: u32 = (0..n).filter(|i| (v >> i) & 1 == 1).map(|i| w[i]).sum();
                (s >= m) == f.get(v)
            });
            if ok {
                return true;
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return false;
            }
            w[i] += 1;
            if w[i] <= max {
                break;
            }
            w[i] = 1;
            i += 1;
        }
    }
}

fn monotone(f: &TruthTable) -> bool {
    (0..f.rows()).all(|v| (0..f.arity()).all(|i| !f.get(v) || f.get(v | (1 << i))))
}

fn c7_calibration(lib: &TemplateSet) -> Outcome {
    let start = Instant::now();
    let bounds = CalibrationBounds::default();
    let mut functions: Vec<TruthTable> = (0..16).map(|b| TruthTable::new(2, b)).collect();
    let three: Vec<TruthTable> = (0..256).map(|b| TruthTable::new(3, b)).filter(monotone).collect();
    ensure!(three.len() == 20, "{} monotone three-input functions", three.len());
    functions.extend(three);
    let mut realized = 0;
    for f in &functions {
        let expect = threshold_oracle(f);
        ensure!(is_positive_threshold(f) == expect, "is_positive_threshold disagrees on {f:?}");
        match calibrate(f, &lib.params, &bounds) {
            Ok(mode) => {
                ensure!(expect, "calibrated non-threshold {f:?}");
                ensure!(mode.flip_table() == *f, "calibrated mode realizes {:?}, not {f:?}", mode.flip_table());
                realized += 1;
            }
            Err(Infeasible::NotThreshold) => ensure!(!expect, "rejected threshold function {f:?}"),
            Err(e) => return Err(format!("{f:?}: {e:?}")),
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("{} functions, {realized} calibrated, {elapsed:.2?}", functions.len()))
}

fn c8_semantic_preservation(lib: &TemplateSet) -> Outcome {
    let start = Instant::now();
    let names = common::corpus_names();
    ensure!(names.len() >= 10, "only {} corpus circuits", names.len());
    for must in ["adder8", "mux4"] {
        ensure!(names.iter().any(|n| n == must), "corpus lacks {must}");
    }
    let mut vectors = 0;
    for stem in &names {
        let network = common::corpus(stem);
        let mapped = common::map_default(&network, lib);
        let report = verify_equivalence(&mapped, lib, &network, Strategy::default()).map_err(fail)?;
        ensure!(report.passed(), "{stem}: {}", report.summary());
        let expected = if network.inputs.len() <= 16 { 1usize << network.inputs.len() } else { 10_000 };
        ensure!(report.vectors == expected, "{stem}: {} vectors, want {expected}", report.vectors);
        vectors += report.vectors;
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("{} circuits, {vectors} vectors, 0 mismatches, {elapsed:.2?}", names.len()))
}

fn c9_benchmarks(lib: &TemplateSet) -> Outcome {
    let mut parts = Vec::new();
    for (stem, reference) in [("mux", "62"), ("cm85a", "59"), ("pcle", "23")] {
        let network = common::corpus(stem);
        let mapped = common::map_default(&network, lib);
        let report =
            compare_cmos(&network.name, &network, &mapped, lib, &CmosRefLibrary::default()).map_err(fail)?;
        let reduction = report.reduction().ok_or_else(|| format!("{stem}: no reduction"))?;
        ensure!(reduction > Rational::from_integer(0), "{stem}: reduction {reduction} not positive");
        let note = report.annotation.as_ref().ok_or_else(|| format!("{stem}: no annotation"))?;
        ensure!(note.paper_ref_pct == reference, "{stem}: annotation {}", note.paper_ref_pct);
        let mut text = Vec::new();
        emit_report(std::slice::from_ref(&report), ReportFormat::Text, &mut text).map_err(fail)?;
        let text = String::from_utf8(text).map_err(fail)?;
        ensure!(text.contains(&format!("{reference}%")), "{stem}: text report lacks {reference}%");
        let dev = note.deviation_pp.clone().unwrap_or_default();
        let far = dev.trim_start_matches('-').parse::<f64>().map_err(fail)? > 20.0;
        ensure!(far == !report.warnings.is_empty(), "{stem}: warning state does not match deviation {dev}");
        parts.push(format!(
            "{stem} {}% (ref {reference}%{})",
            report.reduction_pct.as_deref().unwrap_or("n/a"),
            if far { ", warned" } else { "" }
        ));
    }
    Ok(parts.join("; "))
}

fn c10_key_recovery(lib: &TemplateSet) -> Outcome {
    let run = || -> Result<String, String> {
        let network = common::corpus("poly4");
        let options = MapOptions {
            polymorphic_cells: ["f1", "f2", "f3", "f4"]
                .iter()
                .map(|n| PolySpec { node: n.to_string(), pair: None })
                .collect(),
            ..MapOptions::default()
        };
        let (netlist, _, configured) = map_network(&network, lib, &options).map_err(fail)?;
        ensure!(configured.width() == 4, "key width {}", configured.width());
        let budget = (1u64 << 4) * (1u64 << netlist.inputs.len());
        let mut log = String::new();
        let mut max_queries = 0;
        for k in 0..16u64 {
            let key = Key::from_value(configured.controls.clone(), k);
            let mut oracle = keyed_oracle(&netlist, lib, &key).map_err(fail)?;
            let report = brute_force_key(&netlist, lib, &mut oracle, budget).map_err(fail)?;
            ensure!(report.queries <= budget, "key {k}: {} queries > {budget}", report.queries);
            match &report.outcome {
                AttackOutcome::Recovered(found) if found.value() == k => {}
                other => return Err(format!("key {k}: {other:?}")),
            }
            max_queries = max_queries.max(report.queries);
            log.push_str(&format!("{k} {:?}\n", report));
        }
        ensure!(
            matches!(
                brute_force_key(&netlist, lib, &mut keyed_oracle(&netlist, lib, &configured).map_err(fail)?, budget)
                    .map_err(fail)?
                    .outcome,
                AttackOutcome::Recovered(ref f) if *f == configured
            ),
            "configured key {} not recovered",
            configured.to_hex()
        );
        log.push_str(&format!("max {max_queries} budget {budget}\n"));
        Ok(log)
    };
    let first = run()?;
    let second = run()?;
    ensure!(first.as_bytes() == second.as_bytes(), "repeat run differs");
    let summary = first.lines().last().unwrap_or_default().to_string();
    Ok(format!("16/16 keys recovered, {summary} queries, repeat run identical"))
}

/// Golden artifacts for one design: mapped netlist, trace VCD and CSV, report JSON.
fn artifacts(lib: &TemplateSet, stem: &str) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let network = common::corpus(stem);
    let mapped = common::map_default(&network, lib);
    let mut out = BTreeMap::new();
    out.insert(format!("{stem}.xtn"), serialize_xtn(&mapped).into_bytes());
    let trace = sim::run(&mapped, lib, &common::golden_stimulus(&mapped.inputs), None).map_err(fail)?;
    let mut vcd = Vec::new();
    write_vcd(&trace, &mut vcd).map_err(fail)?;
    out.insert(format!("{stem}.vcd"), vcd);
    let mut csv = Vec::new();
    write_csv(&trace, &mut csv).map_err(fail)?;
    out.insert(format!("{stem}.csv"), csv);
    let report = compare_cmos(&network.name, &network, &mapped, lib, &CmosRefLibrary::default()).map_err(fail)?;
    let mut json = Vec::new();
    emit_report(&[report], ReportFormat::Json, &mut json).map_err(fail)?;
    out.insert(format!("{stem}.json"), json);
    Ok(out)
}

fn c11_format_stability(lib: &TemplateSet) -> Outcome {
    let bless = std::env::var_os("XT_BLESS").is_some();
    let dir = common::golden_dir();
    let names = common::corpus_names();
    let mut compared = 0;
    for stem in &names {
        let network = common::corpus(stem);
        let mapped = common::map_default(&network, lib);
        let text = serialize_xtn(&mapped);
        let back = parse_xtn(&text, lib).map_err(fail)?;
        ensure!(back == mapped, "{stem}: .xtn round trip changed the netlist");
        ensure!(serialize_xtn(&back) == text, "{stem}: .xtn re-serialization differs");
        ensure!(!validate(&back, lib).has_errors(), "{stem}: round-tripped netlist invalid");
        for (file, bytes) in artifacts(lib, stem)? {
            let path = dir.join(&file);
            if bless {
                std::fs::create_dir_all(&dir).map_err(fail)?;
                std::fs::write(&path, &bytes).map_err(fail)?;
            }
            let golden = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            ensure!(golden == bytes, "{file} differs from its golden");
            compared += 1;
        }
    }
    Ok(format!("{} designs round-trip, {compared} golden files byte-identical", names.len()))
}

fn main() -> ExitCode {
    let lib = common::lib();
    let criteria: Vec<Criterion> = vec![
        ("gate truth tables", Box::new(|| c1_truth_tables(&lib))),
        ("polymorphic switching", Box::new(|| c2_polymorphic_sweep(&lib))),
        ("density NAND2", Box::new(|| density(&lib, "nand2", 3, 4, "25.0"))),
        ("density full adder", Box::new(|| c4_full_adder(&lib))),
        ("model consistency", Box::new(|| c5_model_consistency(&lib))),
        ("injection infeasibility", Box::new(c6_injection_lemma)),
        ("calibration completeness", Box::new(|| c7_calibration(&lib))),
        ("mapper semantic preservation", Box::new(|| c8_semantic_preservation(&lib))),
        ("benchmark reporting", Box::new(|| c9_benchmarks(&lib))),
        ("key recovery", Box::new(|| c10_key_recovery(&lib))),
        ("format stability", Box::new(|| c11_format_stability(&lib))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
