// SPDX-License-Identifier: Apache-2.0

//! The line-oriented `.xtn` design format.
//!
//! ```text
//! xtn 1
//! design full_adder
//! params vm=3/10 delta=1/50 cl=1
//! input a b cin
//! output s cout
//! ctrl key0=free
//! gate u0 template=FA phase=0 A=a B=b CI=cin S=s CO=cout
//! inv u1 in=a out=a_n
//! buf u2 in=x out=y drive=2
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use super::ir::{is_const_literal, is_identifier, ControlNet, ControlValue, CrosstalkNetlist, Instance, InstanceKind};
use crate::gatelib::{SimParams, TemplateSet};
use crate::rational::{format_rational, parse_rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum XtnError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: net {net} has more than one driver")]
    DuplicateDriver { line: usize, net: String },
    #[error("line {line}: unknown template {name}")]
    UnknownTemplate { line: usize, name: String },
}

fn err(line: usize, reason: impl Into<String>) -> XtnError {
    XtnError::Parse { line, reason: reason.into() }
}

fn key_values<'a>(line: usize, tokens: &[&'a str]) -> Result<Vec<(&'a str, &'a str)>, XtnError> {
    tokens
        .iter()
        .map(|t| t.split_once('=').ok_or_else(|| err(line, format!("expected key=value, got {t:?}"))))
        .collect()
}

fn check_net(line: usize, net: &str) -> Result<(), XtnError> {
    if is_identifier(net) {
        Ok(())
    } else {
        Err(err(line, format!("bad identifier {net:?}")))
    }
}

pub fn parse_xtn(text: &str, library: &TemplateSet) -> Result<CrosstalkNetlist, XtnError> {
    let mut netlist = CrosstalkNetlist::new("", library.params.clone());
    let mut saw_header = false;
    let mut drivers: BTreeSet<String> = BTreeSet::new();
    let mut ids: BTreeSet<String> = BTreeSet::new();

    let claim = |line: usize, net: &str, drivers: &mut BTreeSet<String>| -> Result<(), XtnError> {
        if !drivers.insert(net.to_string()) {
            return Err(XtnError::DuplicateDriver { line, net: net.to_string() });
        }
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if !saw_header {
            if tokens != ["xtn", "1"] {
                return Err(err(line, "missing header \"xtn 1\""));
            }
            saw_header = true;
            continue;
        }
        match tokens[0] {
            "design" => {
                let [_, name] = tokens.as_slice() else { return Err(err(line, "design takes one name")) };
                netlist.name = name.to_string();
            }
            "params" => {
                let mut vm = None;
                let mut delta = None;
                let mut cl = None;
                for (k, v) in key_values(line, &tokens[1..])? {
                    match k {
                        "vm" => vm = parse_rational(v),
                        "delta" => delta = parse_rational(v),
                        "cl" => cl = v.parse::<u32>().ok(),
                        _ => return Err(err(line, format!("unknown parameter {k}"))),
                    }
                }
                let (Some(vm), Some(delta), Some(cl)) = (vm, delta, cl) else {
                    return Err(err(line, "params needs vm=<rat> delta=<rat> cl=<int>"));
                };
                netlist.params = SimParams::new(vm, delta, cl).map_err(|e| err(line, e.to_string()))?;
            }
            "input" => {
                for net in &tokens[1..] {
                    check_net(line, net)?;
                    claim(line, net, &mut drivers)?;
                    netlist.inputs.push(net.to_string());
                }
            }
            "output" => {
                for net in &tokens[1..] {
                    check_net(line, net)?;
                    netlist.outputs.push(net.to_string());
                }
            }
            "ctrl" => {
                for (net, value) in key_values(line, &tokens[1..])? {
                    check_net(line, net)?;
                    claim(line, net, &mut drivers)?;
                    let value = match value {
                        "0" => ControlValue::Zero,
                        "1" => ControlValue::One,
                        "free" => ControlValue::Free,
                        other => return Err(err(line, format!("control value {other:?}"))),
                    };
                    netlist.controls.push(ControlNet { name: net.to_string(), value });
                }
            }
            kind @ ("gate" | "inv" | "buf") => {
                let Some(id) = tokens.get(1) else { return Err(err(line, "missing instance id")) };
                check_net(line, id)?;
                if !ids.insert(id.to_string()) {
                    return Err(err(line, format!("duplicate instance id {id}")));
                }
                let fields = key_values(line, &tokens[2..])?;
                let mut map: BTreeMap<&str, &str> = BTreeMap::new();
                for (k, v) in &fields {
                    if map.insert(k, v).is_some() {
                        return Err(err(line, format!("field {k} repeated")));
                    }
                }
                let instance = match kind {
                    "gate" => {
                        let name = map.remove("template").ok_or_else(|| err(line, "gate needs template="))?;
                        let phase = match map.remove("phase") {
                            Some("0") => 0,
                            Some("1") => 1,
                            _ => return Err(err(line, "gate needs phase=0|1")),
                        };
                        let template = library
                            .get(name)
                            .ok_or_else(|| XtnError::UnknownTemplate { line, name: name.to_string() })?;
                        let outputs = template.output_ports();
                        let expected: BTreeSet<&str> = template
                            .data_ports
                            .iter()
                            .chain(&template.control_ports)
                            .map(|p| p.name.as_str())
                            .chain(outputs.iter().copied())
                            .collect();
                        let given: BTreeSet<&str> = map.keys().copied().collect();
                        if expected != given {
                            return Err(err(
                                line,
                                format!("template {name} expects ports {expected:?}, got {given:?}"),
                            ));
                        }
                        for (port, net) in &map {
                            let is_control = template.control_ports.iter().any(|p| p.name == *port);
                            if !(is_control && is_const_literal(net)) {
                                check_net(line, net)?;
                            }
                        }
                        for out in &outputs {
                            claim(line, map[out], &mut drivers)?;
                        }
                        InstanceKind::Gate {
                            template: name.to_string(),
                            phase,
                            pins: map.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
                        }
                    }
                    _ => {
                        let input = map.remove("in").ok_or_else(|| err(line, "missing in="))?;
                        let output = map.remove("out").ok_or_else(|| err(line, "missing out="))?;
                        check_net(line, input)?;
                        check_net(line, output)?;
                        let drive = if kind == "buf" {
                            let d = map
                                .remove("drive")
                                .and_then(|d| d.parse::<u32>().ok())
                                .filter(|d| *d >= 1)
                                .ok_or_else(|| err(line, "buf needs drive=<positive int>"))?;
                            Some(d)
                        } else {
                            None
                        };
                        if let Some(extra) = map.keys().next() {
                            return Err(err(line, format!("unexpected field {extra}")));
                        }
                        claim(line, output, &mut drivers)?;
                        match drive {
                            Some(drive) => InstanceKind::Buffer { input: input.into(), output: output.into(), drive },
                            None => InstanceKind::Inverter { input: input.into(), output: output.into() },
                        }
                    }
                };
                netlist.instances.push(Instance { id: id.to_string(), kind: instance });
            }
            other => return Err(err(line, format!("unknown statement {other}"))),
        }
    }
    if !saw_header {
        return Err(err(1, "missing header \"xtn 1\""));
    }
    Ok(netlist)
}

pub fn serialize_xtn(netlist: &CrosstalkNetlist) -> String {
    let mut out = String::from("xtn 1\n");
    if !netlist.name.is_empty() {
        writeln!(out, "design {}", netlist.name).unwrap();
    }
    let p = &netlist.params;
    writeln!(
        out,
        "params vm={} delta={} cl={}",
        format_rational(&p.vm()),
        format_rational(&p.delta_min()),
        p.c_load()
    )
    .unwrap();
    if !netlist.inputs.is_empty() {
        writeln!(out, "input {}", netlist.inputs.join(" ")).unwrap();
    }
    if !netlist.outputs.is_empty() {
        writeln!(out, "output {}", netlist.outputs.join(" ")).unwrap();
    }
    for c in &netlist.controls {
        let v = match c.value {
            ControlValue::Zero => "0",
            ControlValue::One => "1",
            ControlValue::Free => "free",
        };
        writeln!(out, "ctrl {}={v}", c.name).unwrap();
    }
    for inst in &netlist.instances {
        match &inst.kind {
            InstanceKind::Gate { template, phase, pins } => {
                write!(out, "gate {} template={template} phase={phase}", inst.id).unwrap();
                for (port, net) in pins {
                    write!(out, " {port}={net}").unwrap();
                }
                out.push('\n');
            }
            InstanceKind::Inverter { input, output } => {
                writeln!(out, "inv {} in={input} out={output}", inst.id).unwrap();
            }
            InstanceKind::Buffer { input, output, drive } => {
                writeln!(out, "buf {} in={input} out={output} drive={drive}", inst.id).unwrap();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gatelib::builtin_library;

    const AND2: &str = "xtn 1\ndesign and2\nparams vm=3/10 delta=1/50 cl=1\ninput a b\noutput f\ngate g0 template=AND2 phase=0 A=a B=b Y=f\n";

    #[test]
    fn round_trip() {
        let lib = builtin_library();
        let n = parse_xtn(AND2, &lib).unwrap();
        assert_eq!(serialize_xtn(&n), AND2);
        assert_eq!(parse_xtn(&serialize_xtn(&n), &lib).unwrap(), n);
    }

    #[test]
    fn decimals_accepted() {
        let lib = builtin_library();
        let text = AND2.replace("vm=3/10 delta=1/50", "vm=0.3 delta=0.02");
        let n = parse_xtn(&text, &lib).unwrap();
        assert_eq!(n.params, SimParams::default());
    }

    #[test]
    fn unknown_template() {
        let text = AND2.replace("AND2", "AND9");
        assert_eq!(
            parse_xtn(&text, &builtin_library()),
            Err(XtnError::UnknownTemplate { line: 6, name: "AND9".into() })
        );
    }

    #[test]
    fn duplicate_driver() {
        let text = format!("{AND2}inv i0 in=a out=f\n");
        assert_eq!(
            parse_xtn(&text, &builtin_library()),
            Err(XtnError::DuplicateDriver { line: 7, net: "f".into() })
        );
    }

    #[test]
    fn port_mismatch_and_bad_names() {
        let lib = builtin_library();
        assert!(parse_xtn(&AND2.replace(" B=b", ""), &lib).is_err());
        assert!(parse_xtn(&AND2.replace("A=a", "A=9a"), &lib).is_err());
        assert!(parse_xtn("input a\n", &lib).is_err());
    }

    #[test]
    fn control_literals_and_free_nets() {
        let lib = builtin_library();
        let text = "xtn 1\nparams vm=3/10 delta=1/50 cl=1\ninput a b\noutput f g\nctrl k=free\n\
                    gate p0 template=AND2-OR2 phase=0 A=a B=b CT=k Y=f\n\
                    gate p1 template=AND2-OR2 phase=0 A=a B=b CT=1 Y=g\n";
        let n = parse_xtn(text, &lib).unwrap();
        assert_eq!(n.free_controls(), vec!["k"]);
        assert_eq!(parse_xtn(&serialize_xtn(&n), &lib).unwrap(), n);
    }
}
