// SPDX-License-Identifier: Apache-2.0

//! Crosstalk computing workbench.
//!
//! A crosstalk gate is a floating victim line flanked by aggressor lines. When
//! aggressors switch high they couple charge onto the victim; if the induced
//! voltage crosses the threshold of the inverter hanging off the victim, the
//! node "flips". The crate models those gates exactly (integer capacitances,
//! rational voltages), simulates two-phase clocked netlists built from them,
//! maps BLIF networks onto the gate library, configures polymorphic cells with
//! key bits and costs the result in transistors against a static CMOS
//! reference.

pub mod cli;
pub mod gatelib;
pub mod mapper;
pub mod metrics;
pub mod netlist;
pub mod polymorph;
pub mod rational;
pub mod sim;

pub use gatelib::{GateMode, GateTemplate, SimParams, TemplateSet, TruthTable};
pub use netlist::{CrosstalkNetlist, LogicNetwork};
