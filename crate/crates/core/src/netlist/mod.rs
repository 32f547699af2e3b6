// SPDX-License-Identifier: Apache-2.0

//! Boolean networks, crosstalk netlists and their file formats.

mod graph;
mod ir;
mod logic;
mod validate;
mod xtn;

pub(crate) use graph::{flatten, levels_of, CtrlSource, Driver, Flat};
pub use graph::{levelize, CycleDetected, LevelizeError, Levels};
pub use ir::{is_identifier, xtn_name, ControlNet, ControlValue, CrosstalkNetlist, Instance, InstanceKind};
pub use logic::{parse_blif, BlifError, LogicNetwork, LogicNode};
pub use validate::{validate, validate_with, Diagnostic, Diagnostics, Severity, DEFAULT_FANOUT_LIMIT};
pub use xtn::{parse_xtn, serialize_xtn, XtnError};
