// SPDX-License-Identifier: Apache-2.0

use std::io::{self, Write};

use crate::gatelib::SimParams;
use crate::rational::{format_fixed, format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub half_cycle: u64,
    /// Stimulus row being applied.
    pub row: usize,
    /// Values of `SimTrace::nets` after the half-cycle's latches.
    pub values: Vec<bool>,
    /// Victim voltages during the half-cycle; 0 for discharging victims.
    pub victims: Vec<Rational>,
    /// Discharge clock per phase group (high while the group is reset).
    pub discharge: [bool; 2],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimTrace {
    pub design: String,
    pub params: SimParams,
    pub netlist_hash: String,
    pub nets: Vec<String>,
    pub outputs: Vec<String>,
    pub victims: Vec<String>,
    pub settle_periods: usize,
    pub steps: Vec<TraceStep>,
}

impl SimTrace {
    pub fn value(&self, step: usize, net: &str) -> Option<bool> {
        let i = self.nets.iter().position(|n| n == net)?;
        self.steps.get(step).map(|s| s.values[i])
    }

    /// Output values at the end of each stimulus row.
    pub fn sampled_outputs(&self) -> Vec<Vec<bool>> {
        let idx: Vec<usize> =
            self.outputs.iter().map(|o| self.nets.iter().position(|n| n == o).expect("outputs are visible")).collect();
        let per_row = 2 * self.settle_periods;
        if per_row == 0 {
            return Vec::new();
        }
        self.steps
            .chunks(per_row)
            .map(|chunk| {
                let last = chunk.last().expect("non-empty chunk");
                idx.iter().map(|&i| last.values[i]).collect()
            })
            .collect()
    }
}

fn vcd_id(mut k: usize) -> String {
    // printable ASCII '!'..'~'
    let mut id = String::new();
    loop {
        id.push((33 + (k % 94)) as u8 as char);
        k /= 94;
        if k == 0 {
            break;
        }
        k -= 1;
    }
    id
}

fn bit(v: bool) -> char {
    if v {
        '1'
    } else {
        '0'
    }
}

/// Value change dump; one time unit per half-cycle.
pub fn write_vcd(trace: &SimTrace, sink: &mut dyn Write) -> io::Result<()> {
    let scope = if trace.design.is_empty() { "top" } else { trace.design.as_str() };
    writeln!(sink, "$comment")?;
    writeln!(sink, "  design {scope} netlist sha256 {}", trace.netlist_hash)?;
    writeln!(
        sink,
        "  vm {} delta {} cl {}",
        format_rational(&trace.params.vm()),
        format_rational(&trace.params.delta_min()),
        trace.params.c_load()
    )?;
    writeln!(sink, "  one time unit is one half-cycle")?;
    writeln!(sink, "$end")?;
    writeln!(sink, "$timescale 1 ns $end")?;
    writeln!(sink, "$scope module {scope} $end")?;
    let nets = trace.nets.len();
    for (i, n) in trace.nets.iter().enumerate() {
        writeln!(sink, "$var wire 1 {} {n} $end", vcd_id(i))?;
    }
    writeln!(sink, "$var wire 1 {} dis0 $end", vcd_id(nets))?;
    writeln!(sink, "$var wire 1 {} dis1 $end", vcd_id(nets + 1))?;
    for (j, v) in trace.victims.iter().enumerate() {
        writeln!(sink, "$var real 64 {} {v}.victim $end", vcd_id(nets + 2 + j))?;
    }
    writeln!(sink, "$upscope $end")?;
    writeln!(sink, "$enddefinitions $end")?;

    let mut prev: Option<&TraceStep> = None;
    for step in &trace.steps {
        writeln!(sink, "#{}", step.half_cycle)?;
        let first = prev.is_none();
        if first {
            writeln!(sink, "$dumpvars")?;
        }
        for (i, &v) in step.values.iter().enumerate() {
            if prev.is_none_or(|p| p.values[i] != v) {
                writeln!(sink, "{}{}", bit(v), vcd_id(i))?;
            }
        }
        for g in 0..2 {
            if prev.is_none_or(|p| p.discharge[g] != step.discharge[g]) {
                writeln!(sink, "{}{}", bit(step.discharge[g]), vcd_id(nets + g))?;
            }
        }
        for (j, v) in step.victims.iter().enumerate() {
            if prev.is_none_or(|p| &p.victims[j] != v) {
                writeln!(sink, "r{} {}", format_fixed(v, 6), vcd_id(nets + 2 + j))?;
            }
        }
        if first {
            writeln!(sink, "$end")?;
        }
        prev = Some(step);
    }
    Ok(())
}

/// `half_cycle,net,value` rows; victims appear as `<label>.victim` with six decimals.
pub fn write_csv(trace: &SimTrace, sink: &mut dyn Write) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["half_cycle", "net", "value"])?;
    for step in &trace.steps {
        let t = step.half_cycle.to_string();
        for (n, v) in trace.nets.iter().zip(&step.values) {
            w.write_record([t.as_str(), n.as_str(), if *v { "1" } else { "0" }])?;
        }
        for g in 0..2 {
            w.write_record([t.as_str(), if g == 0 { "dis0" } else { "dis1" }, if step.discharge[g] { "1" } else { "0" }])?;
        }
        for (label, v) in trace.victims.iter().zip(&step.victims) {
            w.write_record([t.clone(), format!("{label}.victim"), format_fixed(v, 6)])?;
        }
    }
    w.flush()?;
    Ok(())
}
