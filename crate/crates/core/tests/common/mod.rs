// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

use std::path::PathBuf;

use crosstalk::gatelib::{builtin_library, TemplateSet};
use crosstalk::mapper::{map_network, MapOptions};
use crosstalk::netlist::{parse_blif, CrosstalkNetlist, LogicNetwork};
use crosstalk::sim::Stimulus;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Corpus file stems, sorted.
pub fn corpus_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .filter_map(|e| {
            let p = e.ok()?.path();
            if p.extension()? != "blif" {
                return None;
            }
            Some(p.file_stem()?.to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names
}

pub fn corpus(stem: &str) -> LogicNetwork {
    let path = corpus_dir().join(format!("{stem}.blif"));
    parse_blif(&std::fs::read_to_string(path).expect("corpus file")).expect("corpus parses")
}

pub fn map_default(network: &LogicNetwork, lib: &TemplateSet) -> CrosstalkNetlist {
    map_network(network, lib, &MapOptions::default()).expect("maps").0
}

pub fn lib() -> TemplateSet {
    builtin_library()
}

/// Golden stimulus: every vector for up to four inputs, otherwise sixteen
/// fixed rows of shifted counter bits.
pub fn golden_stimulus(inputs: &[String]) -> Stimulus {
    if inputs.len() <= 4 {
        return Stimulus::exhaustive(inputs.to_vec());
    }
    let rows = (0..16u64)
        .map(|r| (0..inputs.len()).map(|i| ((r + i as u64) >> (i % 4)) & 1 == 1).collect())
        .collect();
    Stimulus::new(inputs.to_vec(), rows).expect("row width")
}

pub mod gen {
    use proptest::prelude::*;

    /// Fan-in signal indices (inputs first, then earlier nodes), cover rows, onset.
    pub type Node = (Vec<usize>, Vec<Vec<Option<bool>>>, bool);

    /// A random network description, kept alongside its BLIF rendering so
    /// tests can evaluate it without going through the parser.
    #[derive(Debug, Clone)]
    pub struct RandomNet {
        pub inputs: usize,
        pub nodes: Vec<Node>,
        /// Signal indices of the primary outputs.
        pub outputs: Vec<usize>,
    }

    impl RandomNet {
        pub fn name(&self, signal: usize) -> String {
            if signal < self.inputs {
                format!("i{signal}")
            } else {
                format!("n{}", signal - self.inputs)
            }
        }

        pub fn blif(&self) -> String {
            let mut s = String::from(".model rand\n.inputs");
            for i in 0..self.inputs {
                s.push_str(&format!(" {}", self.name(i)));
            }
            s.push_str("\n.outputs");
            for &o in &self.outputs {
                s.push_str(&format!(" {}", self.name(o)));
            }
            s.push('\n');
            for (k, (fanin, rows, onset)) in self.nodes.iter().enumerate() {
                s.push_str(".names");
                for &f in fanin {
                    s.push_str(&format!(" {}", self.name(f)));
                }
                s.push_str(&format!(" {}\n", self.name(self.inputs + k)));
                for row in rows {
                    let lits: String = row
                        .iter()
                        .map(|l| match l {
                            Some(true) => '1',
                            Some(false) => '0',
                            None => '-',
                        })
                        .collect();
                    s.push_str(&format!("{lits} {}\n", u8::from(*onset)));
                }
            }
            s.push_str(".end\n");
            s
        }

        /// Direct evaluation of the description.
        pub fn eval(&self, x: &[bool]) -> Vec<bool> {
            let mut values = x.to_vec();
            for (fanin, rows, onset) in &self.nodes {
                let hit = rows.iter().any(|row| {
                    row.iter().zip(fanin).all(|(lit, &f)| match lit {
                        None => true,
                        Some(l) => *l == values[f],
                    })
                });
                values.push(hit == *onset);
            }
            self.outputs.iter().map(|&o| values[o]).collect()
        }

        /// True when some output never changes over all input vectors.
        pub fn has_constant_output(&self) -> bool {
            let n = self.inputs;
            let rows: Vec<Vec<bool>> =
                (0..1u64 << n).map(|v| self.eval(&(0..n).map(|i| (v >> i) & 1 == 1).collect::<Vec<_>>())).collect();
            (0..self.outputs.len()).any(|o| rows.iter().all(|r| r[o] == rows[0][o]))
        }
    }

    fn node(signals: usize) -> impl Strategy<Value = Node> {
        let k = signals.min(4);
        proptest::sample::subsequence((0..signals).collect::<Vec<_>>(), 1..=k)
            .prop_flat_map(|fanin| {
                let w = fanin.len();
                let lit = prop_oneof![Just(None), Just(Some(false)), Just(Some(true))];
                (Just(fanin), prop::collection::vec(prop::collection::vec(lit, w), 1..=3), any::<bool>())
            })
    }

    /// Networks of 2 to 6 inputs and 1 to 7 nodes; the last node is always an output.
    pub fn network() -> impl Strategy<Value = RandomNet> {
        (2usize..=6, 1usize..=7)
            .prop_flat_map(|(inputs, count)| {
                let nodes: Vec<_> = (0..count).map(|k| node(inputs + k).boxed()).collect();
                (Just(inputs), nodes, prop::collection::vec(any::<prop::sample::Index>(), 0..3))
            })
            .prop_map(|(inputs, nodes, extra)| {
                let total = inputs + nodes.len();
                let mut outputs = vec![total - 1];
                for i in extra {
                    let s = inputs + i.index(nodes.len());
                    if !outputs.contains(&s) {
                        outputs.push(s);
                    }
                }
                RandomNet { inputs, nodes, outputs }
            })
    }
}
