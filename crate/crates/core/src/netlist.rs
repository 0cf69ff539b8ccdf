//! Versioned JSON netlists and Graphviz export.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neuron::{Injection, Leak, LeakMode, NetworkBuilder, NeuronConfig, NeuronId, Synapse};
use crate::scaffold::{InsertedDelay, LoweredNetwork, NeuronCount, PortSchedule};

pub const NETLIST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeuronRecord {
    pub id: u32,
    pub label: String,
    pub threshold: i64,
    pub leak_mode: LeakMode,
    pub leak_value: i64,
    pub reset: i64,
    pub initial: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Taps {
    pub inputs: BTreeMap<String, Vec<Injection>>,
    pub outputs: BTreeMap<String, NeuronId>,
}

/// On-disk form of a [`LoweredNetwork`]. Potentials are in units of
/// `2^-frac_bits`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetlistFile {
    pub format_version: u32,
    pub frac_bits: u32,
    pub neurons: Vec<NeuronRecord>,
    pub synapses: Vec<Synapse>,
    pub taps: Taps,
    pub schedule: BTreeMap<String, PortSchedule>,
    #[serde(default)]
    pub delays: Vec<InsertedDelay>,
    #[serde(default)]
    pub anchors: BTreeMap<String, i64>,
    #[serde(default)]
    pub counts: NeuronCount,
}

impl NetlistFile {
    pub fn from_lowered(net: &LoweredNetwork) -> Self {
        let n = &net.network;
        let neurons = n
            .neurons()
            .iter()
            .enumerate()
            .map(|(i, c)| NeuronRecord {
                id: i as u32,
                label: net.labels.get(i).cloned().unwrap_or_default(),
                threshold: c.threshold,
                leak_mode: c.leak.mode(),
                leak_value: c.leak.raw(),
                reset: c.reset,
                initial: c.initial,
            })
            .collect();
        NetlistFile {
            format_version: NETLIST_FORMAT_VERSION,
            frac_bits: n.frac_bits(),
            neurons,
            synapses: n.synapses().to_vec(),
            taps: Taps {
                inputs: n.inputs().clone(),
                outputs: n.outputs().clone(),
            },
            schedule: net.schedule.clone(),
            delays: net.delays.clone(),
            anchors: net.anchors.clone(),
            counts: net.counts.clone(),
        }
    }

    pub fn to_lowered(&self) -> Result<LoweredNetwork> {
        if self.format_version != NETLIST_FORMAT_VERSION {
            return Err(Error::Netlist(format!(
                "unsupported format_version {}",
                self.format_version
            )));
        }
        let mut b = NetworkBuilder::with_frac_bits(self.frac_bits);
        let mut labels = Vec::with_capacity(self.neurons.len());
        for (i, r) in self.neurons.iter().enumerate() {
            if r.id as usize != i {
                return Err(Error::Netlist(format!("neuron record {i} has id {}", r.id)));
            }
            let leak = match r.leak_mode {
                LeakMode::Additive => Leak::Additive(r.leak_value),
                LeakMode::Multiplicative => Leak::Multiplicative(r.leak_value),
            };
            b.add_neuron(NeuronConfig {
                threshold: r.threshold,
                leak,
                reset: r.reset,
                initial: r.initial,
            });
            labels.push(r.label.clone());
        }
        for s in &self.synapses {
            b.connect(s.pre, s.post, s.weight, s.delay);
        }
        for (name, targets) in &self.taps.inputs {
            b.add_input_targets(name.clone(), targets.clone());
        }
        for (name, id) in &self.taps.outputs {
            b.add_output(name.clone(), *id);
        }
        for port in self.schedule.keys() {
            if !self.taps.inputs.contains_key(port) && !self.taps.outputs.contains_key(port) {
                return Err(Error::Netlist(format!("schedule entry {port} has no tap")));
            }
        }
        Ok(LoweredNetwork {
            network: b.build()?,
            labels,
            schedule: self.schedule.clone(),
            delays: self.delays.clone(),
            anchors: self.anchors.clone(),
            counts: self.counts.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("netlist serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Netlist(e.to_string()))
    }
}

impl LoweredNetwork {
    pub fn to_netlist_json(&self) -> String {
        NetlistFile::from_lowered(self).to_json()
    }

    pub fn from_netlist_json(text: &str) -> Result<Self> {
        NetlistFile::from_json(text)?.to_lowered()
    }

    /// Graphviz description: one node per neuron, input and output tap;
    /// edges are labelled `w=<weight> d=<delay>`.
    pub fn to_dot(&self) -> String {
        let n = &self.network;
        let mut out = String::from("digraph netlist {\n  rankdir=LR;\n");
        for name in n.inputs().keys() {
            let _ = writeln!(out, "  \"in:{name}\" [shape=box];");
        }
        for (i, c) in n.neurons().iter().enumerate() {
            let label = self.labels.get(i).map_or("", String::as_str);
            let _ = writeln!(
                out,
                "  n{i} [label=\"{label}\\nth={} {}={}\"];",
                c.threshold,
                c.leak.mode(),
                c.leak.raw()
            );
        }
        for name in n.outputs().keys() {
            let _ = writeln!(out, "  \"out:{name}\" [shape=box];");
        }
        for (name, targets) in n.inputs() {
            for t in targets {
                let _ = writeln!(
                    out,
                    "  \"in:{name}\" -> n{} [label=\"w={} d={}\"];",
                    t.neuron.0, t.weight, t.delay
                );
            }
        }
        for s in n.synapses() {
            let _ = writeln!(
                out,
                "  n{} -> n{} [label=\"w={} d={}\"];",
                s.pre.0, s.post.0, s.weight, s.delay
            );
        }
        for (name, id) in n.outputs() {
            let _ = writeln!(out, "  n{} -> \"out:{name}\" [style=dashed];", id.0);
        }
        out.push_str("}\n");
        out
    }
}
