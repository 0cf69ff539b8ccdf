//! Reusable network fragments with named, timed ports.
//!
//! Port timing is relative to the brick's *anchor*: the step at which the
//! drivers of its stream inputs emit bit 0. An in-port with offset `o`
//! expects bit 0 from its driver at `anchor + o`; an out-port with offset `o`
//! emits its bit 0 at `anchor + o`. Latency is counted from a driver's spike
//! to the out-port neuron's spike, so the connecting synapse is included.

use serde::{Deserialize, Serialize};

use crate::neuron::{Injection, Leak, NeuronConfig, NeuronId, Synapse};
use crate::streams::Signedness;

/// Output width relative to the widest stream driving the brick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthRule {
    Fixed(u32),
    Grow(u32),
}

impl WidthRule {
    pub fn resolve(self, widest_input: u32) -> u32 {
        match self {
            WidthRule::Fixed(w) => w,
            WidthRule::Grow(n) => widest_input + n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortKind {
    /// A multi-bit value stream.
    Stream,
    /// A single spike (or silence) used as a control signal.
    Pulse,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InPort {
    pub name: String,
    pub kind: PortKind,
    pub offset: i64,
    /// Neurons the driving spike lands on. Empty bindings make the port
    /// timing-only: it constrains the anchor but carries no synapse.
    pub bindings: Vec<Injection>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutPort {
    pub name: String,
    pub neuron: NeuronId,
    pub offset: i64,
    pub width: WidthRule,
    pub signedness: Signedness,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Brick {
    pub(crate) kind: String,
    pub(crate) frac_bits: u32,
    pub(crate) neurons: Vec<NeuronConfig>,
    pub(crate) labels: Vec<String>,
    pub(crate) synapses: Vec<Synapse>,
    pub(crate) in_ports: Vec<InPort>,
    pub(crate) out_ports: Vec<OutPort>,
    // Self-charging neurons whose initial potential was chosen for anchor 0.
    pub(crate) anchored: Vec<NeuronId>,
}

impl Brick {
    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn neuron_count(&self) -> usize {
        self.neurons.len()
    }

    pub fn neurons(&self) -> &[NeuronConfig] {
        &self.neurons
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn synapses(&self) -> &[Synapse] {
        &self.synapses
    }

    pub fn in_ports(&self) -> &[InPort] {
        &self.in_ports
    }

    pub fn out_ports(&self) -> &[OutPort] {
        &self.out_ports
    }

    pub fn anchored(&self) -> &[NeuronId] {
        &self.anchored
    }

    pub fn in_port(&self, name: &str) -> Option<&InPort> {
        self.in_ports.iter().find(|p| p.name == name)
    }

    pub fn out_port(&self, name: &str) -> Option<&OutPort> {
        self.out_ports.iter().find(|p| p.name == name)
    }

    /// Neuron carrying `label`, if any.
    pub fn find(&self, label: &str) -> Option<NeuronId> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(NeuronId::from)
    }

    /// Latency of the first out-port.
    pub fn latency(&self) -> i64 {
        self.out_ports.first().map_or(0, |p| p.offset)
    }

    /// Neuron parameters with timers moved to fire relative to `anchor`.
    pub(crate) fn placed_neurons(&self, anchor: i64, shift: u32) -> Vec<NeuronConfig> {
        let mut out: Vec<NeuronConfig> = self.neurons.iter().map(|n| n.rescaled(shift)).collect();
        for id in &self.anchored {
            let n = &mut out[id.index()];
            if let Leak::Additive(l) = n.leak {
                n.initial -= anchor * l;
            }
        }
        out
    }
}

/// Incremental construction of a [`Brick`].
#[derive(Debug, Clone)]
pub struct BrickBuilder {
    brick: Brick,
}

impl BrickBuilder {
    pub fn new(kind: impl Into<String>) -> Self {
        Self::with_frac_bits(kind, 0)
    }

    pub fn with_frac_bits(kind: impl Into<String>, frac_bits: u32) -> Self {
        BrickBuilder {
            brick: Brick {
                kind: kind.into(),
                frac_bits,
                neurons: Vec::new(),
                labels: Vec::new(),
                synapses: Vec::new(),
                in_ports: Vec::new(),
                out_ports: Vec::new(),
                anchored: Vec::new(),
            },
        }
    }

    pub fn unit(&self) -> i64 {
        1 << self.brick.frac_bits
    }

    pub fn neuron(&mut self, label: impl Into<String>, cfg: NeuronConfig) -> NeuronId {
        self.brick.neurons.push(cfg);
        self.brick.labels.push(label.into());
        NeuronId::from(self.brick.neurons.len() - 1)
    }

    /// Self-charging neuron (additive leak of one unit) that first crosses
    /// threshold at `anchor + rel_time` when nothing else drives it.
    pub fn self_charging(&mut self, label: impl Into<String>, rel_time: i64) -> NeuronId {
        let u = self.unit();
        let cfg = NeuronConfig::new(u)
            .additive(u)
            .initial(u - (rel_time + 1) * u);
        let id = self.neuron(label, cfg);
        self.brick.anchored.push(id);
        id
    }

    /// One-shot timer firing exactly once at `anchor + rel_time`.
    pub fn timer(&mut self, label: impl Into<String>, rel_time: i64) -> NeuronId {
        let id = self.self_charging(label, rel_time);
        let w = -crate::bricks::LOCKOUT * self.unit();
        self.synapse(id, id, w, 1);
        id
    }

    pub fn synapse(&mut self, pre: NeuronId, post: NeuronId, weight: i64, delay: u32) -> &mut Self {
        self.brick.synapses.push(Synapse {
            pre,
            post,
            weight,
            delay,
        });
        self
    }

    pub fn in_port(
        &mut self,
        name: impl Into<String>,
        kind: PortKind,
        offset: i64,
        bindings: Vec<Injection>,
    ) -> &mut Self {
        self.brick.in_ports.push(InPort {
            name: name.into(),
            kind,
            offset,
            bindings,
        });
        self
    }

    pub fn out_port(
        &mut self,
        name: impl Into<String>,
        neuron: NeuronId,
        offset: i64,
        width: WidthRule,
    ) -> &mut Self {
        self.brick.out_ports.push(OutPort {
            name: name.into(),
            neuron,
            offset,
            width,
            signedness: Signedness::Unsigned,
        });
        self
    }

    pub fn build(self) -> Brick {
        self.brick
    }
}

/// Shorthand for a port binding.
pub fn bind(neuron: NeuronId, weight: i64, delay: u32) -> Injection {
    Injection {
        neuron,
        weight,
        delay,
    }
}
