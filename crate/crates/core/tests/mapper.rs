// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use crosstalk::gatelib::builtin_library;
use crosstalk::mapper::{map_network, MapError, MapOptions, PolySpec, Style};
use crosstalk::metrics::{transistor_count, CostModel};
use crosstalk::netlist::{levelize, parse_blif, CrosstalkNetlist, InstanceKind, LogicNetwork};
use crosstalk::polymorph::apply_key;
use crosstalk::sim::{verify_equivalence, Strategy};

fn corpus(name: &str) -> LogicNetwork {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    parse_blif(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn blif(text: &str) -> LogicNetwork {
    parse_blif(text).unwrap()
}

fn gates(n: &CrosstalkNetlist) -> Vec<(String, u8)> {
    n.instances
        .iter()
        .filter_map(|i| match &i.kind {
            InstanceKind::Gate { template, phase, .. } => Some((template.clone(), *phase)),
            _ => None,
        })
        .collect()
}

fn buffer_drives(n: &CrosstalkNetlist) -> Vec<u32> {
    n.instances
        .iter()
        .filter_map(|i| match &i.kind {
            InstanceKind::Buffer { drive, .. } => Some(*drive),
            _ => None,
        })
        .collect()
}

fn check(network: &LogicNetwork, mapped: &CrosstalkNetlist) {
    let lib = builtin_library();
    let report = verify_equivalence(mapped, &lib, network, Strategy::default()).unwrap();
    assert!(report.passed(), "{}: {}", network.name, report.summary());
}

#[test]
fn and2_is_one_cell() {
    let lib = builtin_library();
    let net = corpus("and2.blif");
    let (mapped, report, _) = map_network(&net, &lib, &MapOptions::default()).unwrap();
    assert_eq!(gates(&mapped), vec![("AND2".to_string(), 0)]);
    assert_eq!(report.total, 5);
    check(&net, &mapped);
}

#[test]
fn ao21_matches_directly() {
    let lib = builtin_library();
    let net = corpus("ao21.blif");
    let (mapped, report, _) = map_network(&net, &lib, &MapOptions::default()).unwrap();
    assert_eq!(gates(&mapped), vec![("AO21".to_string(), 0)]);
    assert_eq!(report.total, 5);
    check(&net, &mapped);
}

#[test]
fn full_adder_uses_composite() {
    let lib = builtin_library();
    let net = corpus("fa.blif");
    let (mapped, report, _) = map_network(&net, &lib, &MapOptions::default()).unwrap();
    assert_eq!(gates(&mapped), vec![("FA".to_string(), 0)]);
    assert_eq!(report.total, 13);
    assert_eq!(transistor_count(&mapped, &lib, &CostModel::default()).total, 13);
    check(&net, &mapped);
}

#[test]
fn no_composites_still_equivalent() {
    let lib = builtin_library();
    let net = corpus("fa.blif");
    let options = MapOptions { use_composites: false, ..MapOptions::default() };
    let (mapped, report, _) = map_network(&net, &lib, &options).unwrap();
    assert!(!report.composites);
    assert!(gates(&mapped).iter().all(|(t, _)| t != "FA" && t != "XOR2" && t != "XNOR2"));
    check(&net, &mapped);
}

#[test]
fn cascaded_gates_alternate_phase() {
    let lib = builtin_library();
    let net = blif(".model c\n.inputs a b c\n.outputs y\n.names a b x\n0- 1\n-0 1\n.names x c y\n0- 1\n-0 1\n.end\n");
    let (mapped, _, _) = map_network(&net, &lib, &MapOptions::default()).unwrap();
    let levels = levelize(&mapped, &lib).unwrap();
    for inst in &mapped.instances {
        if let InstanceKind::Gate { phase, .. } = &inst.kind {
            assert_eq!(Some(*phase), levels.phase(&inst.id));
        }
    }
    let phases: Vec<u8> = gates(&mapped).iter().map(|g| g.1).collect();
    assert_eq!(phases, vec![0, 1]);
    check(&net, &mapped);
}

#[test]
fn parallel_gates_share_phase() {
    let lib = builtin_library();
    let net = blif(".model p\n.inputs a b c d\n.outputs x y\n.names a b x\n11 1\n.names c d y\n11 1\n.end\n");
    let (mapped, _, _) = map_network(&net, &lib, &MapOptions::default()).unwrap();
    assert!(gates(&mapped).iter().all(|g| g.1 == 0));
}

fn fanout_net(k: usize) -> LogicNetwork {
    let mut text = String::from(".model fo\n.inputs a b");
    for i in 0..k {
        text += &format!(" c{i}");
    }
    text += "\n.outputs";
    for i in 0..k {
        text += &format!(" y{i}");
    }
    text += "\n.names a b x\n11 1\n";
    for i in 0..k {
        text += &format!(".names x c{i} y{i}\n11 1\n");
    }
    text += ".end\n";
    blif(&text)
}

#[test]
fn fanout_buffers() {
    let lib = builtin_library();
    for (k, drive) in [(4, None), (5, Some(2)), (9, Some(3))] {
        let net = fanout_net(k);
        let (mapped, _, _) = map_network(&net, &lib, &MapOptions::default()).unwrap();
        let drives = buffer_drives(&mapped);
        match drive {
            None => assert!(drives.is_empty(), "k={k}: {drives:?}"),
            Some(d) => assert_eq!(drives, vec![d], "k={k}"),
        }
        check(&net, &mapped);
    }
}

#[test]
fn buffer_insertion_is_idempotent() {
    let lib = builtin_library();
    let (mapped, _, _) = map_network(&fanout_net(9), &lib, &MapOptions::default()).unwrap();
    let again = crosstalk::mapper::insert_buffers(&mapped, &lib, 4);
    assert_eq!(again, mapped);
}

#[test]
fn and_or_style_is_equivalent() {
    let lib = builtin_library();
    let options = MapOptions { style: Style::AndOr, ..MapOptions::default() };
    for name in ["mux4.blif", "cm85a.blif", "wide.blif"] {
        let net = corpus(name);
        let (mapped, _, _) = map_network(&net, &lib, &options).unwrap();
        check(&net, &mapped);
    }
}

#[test]
fn polymorphic_and2_defaults_to_and() {
    let lib = builtin_library();
    let net = corpus("and2.blif");
    let options = MapOptions { polymorphic_cells: vec!["f".parse().unwrap()], ..MapOptions::default() };
    let (mapped, report, key) = map_network(&net, &lib, &options).unwrap();
    assert_eq!(gates(&mapped)[0].0, "AND2-OR2");
    assert_eq!(key.bits, vec![false]);
    assert!(report.key.is_some());
    check(&net, &apply_key(&mapped, &key).unwrap());
}

#[test]
fn polymorphic_or3_in_requested_pair() {
    let lib = builtin_library();
    let net = blif(".model o\n.inputs a b c\n.outputs f\n.names a b c f\n1-- 1\n-1- 1\n--1 1\n.end\n");
    let spec = PolySpec { node: "f".into(), pair: Some("OR3-AO21".into()) };
    let options = MapOptions { polymorphic_cells: vec![spec], ..MapOptions::default() };
    let (mapped, _, key) = map_network(&net, &lib, &options).unwrap();
    assert_eq!(gates(&mapped)[0].0, "OR3-AO21");
    check(&net, &apply_key(&mapped, &key).unwrap());
}

#[test]
fn polymorphic_xor_is_rejected() {
    let lib = builtin_library();
    let net = corpus("xor2.blif");
    let options = MapOptions { polymorphic_cells: vec!["f".parse().unwrap()], ..MapOptions::default() };
    let err = map_network(&net, &lib, &options).unwrap_err();
    assert!(matches!(err, MapError::PairMismatch { .. }), "{err}");
}

#[test]
fn whole_corpus_maps_equivalently() {
    let lib = builtin_library();
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut names: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    for name in names.iter().filter(|n| n.ends_with(".blif")) {
        let net = corpus(name);
        let (mapped, report, _) = map_network(&net, &lib, &MapOptions::default()).unwrap();
        assert!(report.total > 0, "{name}");
        check(&net, &mapped);
    }
}
