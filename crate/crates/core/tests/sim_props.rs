// SPDX-License-Identifier: Apache-2.0

mod common;

use std::collections::HashMap;

use common::gen::network;
use crosstalk::gatelib::TemplateSet;
use crosstalk::netlist::{parse_blif, ControlValue, CrosstalkNetlist, InstanceKind};
use crosstalk::sim::{self, Simulator, Stimulus};
use proptest::prelude::*;

/// Combinational value of every net, found by recursing from each net to its driver.
struct Recursive<'a> {
    netlist: &'a CrosstalkNetlist,
    lib: &'a TemplateSet,
    drivers: HashMap<&'a str, usize>,
    values: HashMap<String, bool>,
}

impl<'a> Recursive<'a> {
    fn new(netlist: &'a CrosstalkNetlist, lib: &'a TemplateSet, inputs: &[bool]) -> Self {
        let mut drivers = HashMap::new();
        for (i, inst) in netlist.instances.iter().enumerate() {
            match &inst.kind {
                InstanceKind::Gate { template, pins, .. } => {
                    for port in lib.get(template).unwrap().output_ports() {
                        drivers.insert(pins[port].as_str(), i);
                    }
                }
                InstanceKind::Inverter { output, .. } | InstanceKind::Buffer { output, .. } => {
                    drivers.insert(output.as_str(), i);
                }
            }
        }
        let mut values: HashMap<String, bool> = netlist.inputs.iter().cloned().zip(inputs.iter().copied()).collect();
        for c in &netlist.controls {
            match c.value {
                ControlValue::Zero => values.insert(c.name.clone(), false),
                ControlValue::One => values.insert(c.name.clone(), true),
                ControlValue::Free => panic!("free control {}", c.name),
            };
        }
        Self { netlist, lib, drivers, values }
    }

    fn net(&mut self, name: &str) -> bool {
        match name {
            "0" => return false,
            "1" => return true,
            _ => {}
        }
        if let Some(v) = self.values.get(name) {
            return *v;
        }
        let inst = &self.netlist.instances[self.drivers[name]];
        let v = match &inst.kind {
            InstanceKind::Inverter { input, .. } => !self.net(input),
            InstanceKind::Buffer { input, .. } => self.net(input),
            InstanceKind::Gate { template, pins, .. } => {
                let t = self.lib.get(template).unwrap();
                let data: Vec<bool> = t.data_ports.iter().map(|p| self.net(&pins[&p.name])).collect();
                let ctrl: Vec<bool> = t.control_ports.iter().map(|p| self.net(&pins[&p.name])).collect();
                let outs = t.evaluate(&data, &ctrl).unwrap();
                let port = t.output_ports().iter().position(|p| pins[*p] == name).unwrap();
                outs[port]
            }
        };
        self.values.insert(name.to_string(), v);
        v
    }
}

fn mapped(s: &common::gen::RandomNet) -> Option<CrosstalkNetlist> {
    (!s.has_constant_output()).then(|| common::map_default(&parse_blif(&s.blif()).unwrap(), &common::lib()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn settled_outputs_match_recursive_evaluation(s in network()) {
        let lib = common::lib();
        let Some(n) = mapped(&s) else { return Ok(()) };
        let sim = Simulator::new(&n, &lib).unwrap();
        let stim = Stimulus::exhaustive(n.inputs.clone());
        for row in &stim.rows {
            let mut r = Recursive::new(&n, &lib, row);
            let want: Vec<bool> = n.outputs.iter().map(|o| r.net(o)).collect();
            prop_assert_eq!(sim.settle(row, sim.default_settle()), want);
        }
        let trace = sim.run(&stim, sim.default_settle()).unwrap();
        prop_assert_eq!(trace.steps.len(), 2 * stim.rows.len() * sim.default_settle());
    }

    #[test]
    fn simulation_is_deterministic(s in network()) {
        let lib = common::lib();
        let Some(n) = mapped(&s) else { return Ok(()) };
        let stim = Stimulus::exhaustive(n.inputs.clone());
        let a = sim::run(&n, &lib, &stim, None).unwrap();
        let b = sim::run(&n, &lib, &stim, None).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn outputs_hold_while_discharging(s in network()) {
        let lib = common::lib();
        let Some(n) = mapped(&s) else { return Ok(()) };
        let trace = sim::run(&n, &lib, &Stimulus::exhaustive(n.inputs.clone()), None).unwrap();
        for inst in &n.instances {
            let InstanceKind::Gate { template, phase, pins } = &inst.kind else { continue };
            if lib.get(template).unwrap().is_composite() {
                continue;
            }
            let net = trace.nets.iter().position(|x| x == &pins["Y"]).unwrap();
            for w in trace.steps.windows(2) {
                if w[1].discharge[*phase as usize] {
                    prop_assert_eq!(w[1].values[net], w[0].values[net], "{} changed while discharging", inst.id);
                }
            }
        }
    }
}
