//! Brick composition and lowering to a flat [`Network`].
//!
//! Bricks form a DAG; feedback only lives inside bricks. Lowering walks the
//! bricks in topological order, places each one at the earliest anchor where
//! all of its inputs are available (longest path), and pads every shorter
//! path with delay so bit `i` of every operand reaches a brick on the same
//! step. External inputs are always presented with bit 0 at step 0.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::brick::{Brick, InPort, OutPort, PortKind, WidthRule};
use crate::error::{Error, Result};
use crate::neuron::{
    run, Injection, Inputs, Network, NetworkBuilder, NeuronConfig, NeuronId, Raster, Synapse,
};
use crate::streams::{decode, encode, Signedness};

/// How lowering realizes the padding on a shorter path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayStrategy {
    /// Lengthen the connecting synapse; adds no neurons.
    #[default]
    Synapse,
    /// Insert one relay neuron per step of padding.
    RelayChain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Source {
    Input(usize),
    Brick(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Edge {
    from: Source,
    brick: usize,
    port: usize,
    shift: u32,
}

#[derive(Debug, Clone)]
struct ExternalInput {
    name: String,
    width: u32,
}

#[derive(Debug, Clone)]
struct ExternalOutput {
    name: String,
    brick: usize,
    port: usize,
    width: Option<u32>,
    signedness: Option<Signedness>,
}

/// A composition of named brick instances.
#[derive(Debug, Clone, Default)]
pub struct Scaffold {
    bricks: Vec<(String, Brick)>,
    index: HashMap<String, usize>,
    inputs: Vec<ExternalInput>,
    outputs: Vec<ExternalOutput>,
    edges: Vec<Edge>,
}

/// Padding inserted on one connection during lowering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InsertedDelay {
    pub from: String,
    pub to: String,
    pub steps: u32,
    pub strategy: DelayStrategy,
    pub neurons: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortSchedule {
    pub offset: u64,
    pub width: u32,
    pub signedness: Signedness,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NeuronCount {
    pub per_brick: BTreeMap<String, usize>,
    pub delay_neurons: usize,
    pub total: usize,
}

/// A scaffold flattened into a brick, plus what lowering decided.
#[derive(Debug, Clone)]
struct Packed {
    brick: Brick,
    anchors: BTreeMap<String, i64>,
    delays: Vec<InsertedDelay>,
    counts: NeuronCount,
    input_widths: Vec<u32>,
}

impl Scaffold {
    pub fn new() -> Self {
        Self::default()
    }

    /// Scaffold holding exactly one brick, with every port exposed under its
    /// own name. Stream inputs get `width`, pulse inputs width 1.
    pub fn single(brick: Brick, width: u32) -> Result<Self> {
        let mut s = Scaffold::new();
        let ins: Vec<(String, PortKind)> = brick
            .in_ports
            .iter()
            .map(|p| (p.name.clone(), p.kind))
            .collect();
        let outs: Vec<String> = brick.out_ports.iter().map(|p| p.name.clone()).collect();
        s.add_brick("brick", brick)?;
        for (name, kind) in ins {
            let w = if kind == PortKind::Pulse { 1 } else { width };
            s.input(&name, w)?;
            s.connect(&name, &format!("brick.{name}"))?;
        }
        for name in outs {
            s.output(&name, &format!("brick.{name}"))?;
        }
        Ok(s)
    }

    pub fn add_brick(&mut self, name: &str, brick: Brick) -> Result<&mut Self> {
        if self.index.contains_key(name) {
            return Err(Error::DuplicateBrick(name.to_string()));
        }
        self.index.insert(name.to_string(), self.bricks.len());
        self.bricks.push((name.to_string(), brick));
        Ok(self)
    }

    pub fn brick(&self, name: &str) -> Option<&Brick> {
        self.index.get(name).map(|&i| &self.bricks[i].1)
    }

    pub fn is_empty(&self) -> bool {
        self.bricks.is_empty()
    }

    fn external_taken(&self, name: &str) -> bool {
        self.inputs.iter().any(|i| i.name == name) || self.outputs.iter().any(|o| o.name == name)
    }

    /// Declare an external stream input of `width` bits.
    pub fn input(&mut self, name: &str, width: u32) -> Result<&mut Self> {
        if self.external_taken(name) {
            return Err(Error::DuplicateExternal(name.to_string()));
        }
        self.inputs.push(ExternalInput {
            name: name.to_string(),
            width,
        });
        Ok(self)
    }

    /// Expose `brick.port` as an external output.
    pub fn output(&mut self, name: &str, from: &str) -> Result<&mut Self> {
        self.output_with(name, from, None, None)
    }

    pub fn output_with(
        &mut self,
        name: &str,
        from: &str,
        width: Option<u32>,
        signedness: Option<Signedness>,
    ) -> Result<&mut Self> {
        if self.external_taken(name) {
            return Err(Error::DuplicateExternal(name.to_string()));
        }
        let (brick, port) = self.resolve_out(from)?;
        self.outputs.push(ExternalOutput {
            name: name.to_string(),
            brick,
            port,
            width,
            signedness,
        });
        Ok(self)
    }

    pub fn connect(&mut self, from: &str, to: &str) -> Result<&mut Self> {
        self.connect_shifted(from, to, 0)
    }

    /// Connect with the stream reinterpreted as `value * 2^shift`. Lowering
    /// realizes the shift as `shift` extra steps of delay on this path.
    pub fn connect_shifted(&mut self, from: &str, to: &str, shift: u32) -> Result<&mut Self> {
        let src = self.resolve_source(from)?;
        let (brick, port) = self.resolve_in(to)?;
        if self
            .edges
            .iter()
            .any(|e| e.brick == brick && e.port == port)
        {
            let (b, p) = split(to);
            return Err(Error::PortAlreadyDriven {
                brick: b.to_string(),
                port: p.unwrap_or_default().to_string(),
            });
        }
        if let Source::Brick(sb, _) = src {
            if sb == brick || self.reaches(brick, sb) {
                return Err(Error::Cycle {
                    from: from.to_string(),
                    to: to.to_string(),
                });
            }
        }
        self.edges.push(Edge {
            from: src,
            brick,
            port,
            shift,
        });
        Ok(self)
    }

    fn reaches(&self, from: usize, target: usize) -> bool {
        let mut stack = vec![from];
        let mut seen = vec![false; self.bricks.len()];
        while let Some(b) = stack.pop() {
            if b == target {
                return true;
            }
            if std::mem::replace(&mut seen[b], true) {
                continue;
            }
            for e in &self.edges {
                if e.source_brick() == Some(b) {
                    stack.push(e.brick);
                }
            }
        }
        false
    }

    fn resolve_source(&self, from: &str) -> Result<Source> {
        if let Some(i) = self.inputs.iter().position(|i| i.name == from) {
            return Ok(Source::Input(i));
        }
        let (b, p) = self.resolve_out(from)?;
        Ok(Source::Brick(b, p))
    }

    fn resolve_brick(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownBrick(name.to_string()))
    }

    fn resolve_out(&self, r: &str) -> Result<(usize, usize)> {
        let (b, p) = split(r);
        let bi = self.resolve_brick(b)?;
        let brick = &self.bricks[bi].1;
        let pi = match p {
            Some(p) => brick.out_ports.iter().position(|o| o.name == p),
            None if brick.out_ports.len() == 1 => Some(0),
            None => None,
        };
        pi.map(|pi| (bi, pi)).ok_or_else(|| Error::UnknownPort {
            brick: b.to_string(),
            port: p.unwrap_or_default().to_string(),
        })
    }

    fn resolve_in(&self, r: &str) -> Result<(usize, usize)> {
        let (b, p) = split(r);
        let bi = self.resolve_brick(b)?;
        let pi = p.and_then(|p| self.bricks[bi].1.in_ports.iter().position(|o| o.name == p));
        pi.map(|pi| (bi, pi)).ok_or_else(|| Error::UnknownPort {
            brick: b.to_string(),
            port: p.unwrap_or_default().to_string(),
        })
    }

    fn topo_order(&self) -> Result<Vec<usize>> {
        let n = self.bricks.len();
        let mut indeg = vec![0usize; n];
        for e in &self.edges {
            if e.source_brick().is_some() {
                indeg[e.brick] += 1;
            }
        }
        let mut order = Vec::with_capacity(n);
        let mut ready: std::collections::BTreeSet<usize> =
            (0..n).filter(|&i| indeg[i] == 0).collect();
        while let Some(b) = ready.pop_first() {
            order.push(b);
            for e in &self.edges {
                if e.source_brick() == Some(b) {
                    indeg[e.brick] -= 1;
                    if indeg[e.brick] == 0 {
                        ready.insert(e.brick);
                    }
                }
            }
        }
        if order.len() != n {
            return Err(Error::Cycle {
                from: "?".into(),
                to: "?".into(),
            });
        }
        Ok(order)
    }

    fn source_name(&self, src: Source) -> String {
        match src {
            Source::Input(i) => self.inputs[i].name.clone(),
            Source::Brick(b, p) => format!(
                "{}.{}",
                self.bricks[b].0, self.bricks[b].1.out_ports[p].name
            ),
        }
    }

    fn pack_inner(&self, kind: &str, strategy: DelayStrategy) -> Result<Packed> {
        let order = self.topo_order()?;
        let nb = self.bricks.len();
        let mut anchor = vec![0i64; nb];
        let mut out_width: Vec<Vec<u32>> = self
            .bricks
            .iter()
            .map(|(_, b)| vec![0; b.out_ports.len()])
            .collect();

        let src_time = |anchor: &[i64], src: Source| -> i64 {
            match src {
                Source::Input(_) => 0,
                Source::Brick(b, p) => anchor[b] + self.bricks[b].1.out_ports[p].offset,
            }
        };

        for &b in &order {
            let brick = &self.bricks[b].1;
            let mut a = 0i64;
            let mut widest = 0u32;
            for e in self.edges.iter().filter(|e| e.brick == b) {
                let t = src_time(&anchor, e.from) - e.shift as i64;
                a = a.max(t - brick.in_ports[e.port].offset);
                let w = match e.from {
                    Source::Input(i) => self.inputs[i].width,
                    Source::Brick(sb, sp) => out_width[sb][sp],
                };
                if brick.in_ports[e.port].kind == PortKind::Stream {
                    widest = widest.max(w + e.shift);
                }
            }
            anchor[b] = a;
            for (pi, p) in brick.out_ports.iter().enumerate() {
                out_width[b][pi] = p.width.resolve(widest);
            }
        }

        let frac_bits = self
            .bricks
            .iter()
            .map(|(_, b)| b.frac_bits)
            .max()
            .unwrap_or(0);
        let unit = 1i64 << frac_bits;
        let mut packed = Brick {
            kind: kind.to_string(),
            frac_bits,
            neurons: Vec::new(),
            labels: Vec::new(),
            synapses: Vec::new(),
            in_ports: self
                .inputs
                .iter()
                .map(|i| InPort {
                    name: i.name.clone(),
                    kind: if i.width == 1 {
                        PortKind::Pulse
                    } else {
                        PortKind::Stream
                    },
                    offset: 0,
                    bindings: Vec::new(),
                })
                .collect(),
            out_ports: Vec::new(),
            anchored: Vec::new(),
        };
        let mut counts = NeuronCount::default();
        let mut base = vec![0usize; nb];
        for (b, (name, brick)) in self.bricks.iter().enumerate() {
            base[b] = packed.neurons.len();
            let shift = frac_bits - brick.frac_bits;
            packed
                .neurons
                .extend(brick.placed_neurons(anchor[b], shift));
            packed
                .labels
                .extend(brick.labels.iter().map(|l| format!("{name}/{l}")));
            packed
                .synapses
                .extend(brick.synapses.iter().map(|s| Synapse {
                    pre: NeuronId::from(base[b] + s.pre.index()),
                    post: NeuronId::from(base[b] + s.post.index()),
                    weight: s.weight << shift,
                    delay: s.delay,
                }));
            packed.anchored.extend(
                brick
                    .anchored
                    .iter()
                    .map(|id| NeuronId::from(base[b] + id.index())),
            );
            counts.per_brick.insert(name.clone(), brick.neurons.len());
        }

        let mut delays = Vec::new();
        for e in &self.edges {
            let brick = &self.bricks[e.brick].1;
            let port = &brick.in_ports[e.port];
            let t = src_time(&anchor, e.from) - e.shift as i64;
            let pad = anchor[e.brick] + port.offset - t;
            debug_assert!(pad >= 0);
            let physical = pad as u32;
            let shift = frac_bits - brick.frac_bits;
            let targets: Vec<Injection> = port
                .bindings
                .iter()
                .map(|j| Injection {
                    neuron: NeuronId::from(base[e.brick] + j.neuron.index()),
                    weight: j.weight << shift,
                    delay: j.delay,
                })
                .collect();
            let mut inserted = 0;
            let driver = e.from;
            let mut extra = physical;
            let mut relay_src: Option<NeuronId> = None;
            if strategy == DelayStrategy::RelayChain && physical > 0 && !targets.is_empty() {
                for step in 0..physical {
                    let id = NeuronId::from(packed.neurons.len());
                    packed.neurons.push(NeuronConfig::new(unit));
                    packed.labels.push(format!(
                        "delay/{}->{}.{}#{}",
                        self.source_name(e.from),
                        self.bricks[e.brick].0,
                        port.name,
                        step
                    ));
                    let j = Injection {
                        neuron: id,
                        weight: unit,
                        delay: 1,
                    };
                    match relay_src {
                        Some(prev) => packed.synapses.push(Synapse {
                            pre: prev,
                            post: id,
                            weight: unit,
                            delay: 1,
                        }),
                        None => attach(&mut packed, driver, &base, &self.bricks, j),
                    }
                    relay_src = Some(id);
                }
                inserted = physical as usize;
                extra = 0;
            }
            for j in targets {
                let j = Injection {
                    delay: j.delay + extra,
                    ..j
                };
                match relay_src {
                    Some(r) => packed.synapses.push(Synapse {
                        pre: r,
                        post: j.neuron,
                        weight: j.weight,
                        delay: j.delay,
                    }),
                    None => attach(&mut packed, driver, &base, &self.bricks, j),
                }
            }
            if physical > 0 {
                counts.delay_neurons += inserted;
                delays.push(InsertedDelay {
                    from: self.source_name(e.from),
                    to: format!("{}.{}", self.bricks[e.brick].0, port.name),
                    steps: physical,
                    strategy,
                    neurons: inserted,
                });
            }
        }

        for o in &self.outputs {
            let p: &OutPort = &self.bricks[o.brick].1.out_ports[o.port];
            packed.out_ports.push(OutPort {
                name: o.name.clone(),
                neuron: NeuronId::from(base[o.brick] + p.neuron.index()),
                offset: anchor[o.brick] + p.offset,
                width: WidthRule::Fixed(o.width.unwrap_or(out_width[o.brick][o.port])),
                signedness: o.signedness.unwrap_or(p.signedness),
            });
        }
        counts.total = packed.neurons.len();
        let anchors = self
            .bricks
            .iter()
            .enumerate()
            .map(|(i, (n, _))| (n.clone(), anchor[i]))
            .collect();
        Ok(Packed {
            brick: packed,
            anchors,
            delays,
            counts,
            input_widths: self.inputs.iter().map(|i| i.width).collect(),
        })
    }

    /// Flatten into a reusable brick whose in-ports are the external inputs
    /// (offset 0) and whose out-ports are the external outputs.
    pub fn pack(&self, kind: &str) -> Result<Brick> {
        Ok(self.pack_inner(kind, DelayStrategy::Synapse)?.brick)
    }

    pub fn lower(&self) -> Result<LoweredNetwork> {
        self.lower_with(DelayStrategy::Synapse)
    }

    pub fn lower_with(&self, strategy: DelayStrategy) -> Result<LoweredNetwork> {
        let packed = self.pack_inner("lowered", strategy)?;
        let brick = packed.brick;
        let mut nb = NetworkBuilder::with_frac_bits(brick.frac_bits);
        for n in brick.placed_neurons(0, 0) {
            nb.add_neuron(n);
        }
        for s in &brick.synapses {
            nb.connect(s.pre, s.post, s.weight, s.delay);
        }
        let mut schedule = BTreeMap::new();
        for (p, &w) in brick.in_ports.iter().zip(&packed.input_widths) {
            nb.add_input_targets(p.name.clone(), p.bindings.clone());
            schedule.insert(
                p.name.clone(),
                PortSchedule {
                    offset: 0,
                    width: w,
                    signedness: Signedness::Unsigned,
                },
            );
        }
        for p in &brick.out_ports {
            nb.add_output(p.name.clone(), p.neuron);
            let width = p.width.resolve(0);
            schedule.insert(
                p.name.clone(),
                PortSchedule {
                    offset: p.offset.max(0) as u64,
                    width,
                    signedness: p.signedness,
                },
            );
        }
        Ok(LoweredNetwork {
            network: nb.build()?,
            labels: brick.labels,
            schedule,
            delays: packed.delays,
            anchors: packed.anchors,
            counts: packed.counts,
        })
    }

    pub fn neuron_count(&self) -> Result<NeuronCount> {
        self.neuron_count_with(DelayStrategy::Synapse)
    }

    pub fn neuron_count_with(&self, strategy: DelayStrategy) -> Result<NeuronCount> {
        Ok(self.pack_inner("count", strategy)?.counts)
    }

    /// Step at which `output` emits bit 0 when inputs start at step 0.
    pub fn latency(&self, output: &str) -> Result<i64> {
        let p = self.pack_inner("latency", DelayStrategy::Synapse)?;
        p.brick
            .out_ports
            .iter()
            .find(|o| o.name == output)
            .map(|o| o.offset)
            .ok_or_else(|| Error::UnknownOutput(output.to_string()))
    }
}

fn attach(
    packed: &mut Brick,
    src: Source,
    base: &[usize],
    bricks: &[(String, Brick)],
    j: Injection,
) {
    match src {
        Source::Input(i) => packed.in_ports[i].bindings.push(j),
        Source::Brick(b, p) => {
            let pre = NeuronId::from(base[b] + bricks[b].1.out_ports[p].neuron.index());
            packed.synapses.push(Synapse {
                pre,
                post: j.neuron,
                weight: j.weight,
                delay: j.delay,
            });
        }
    }
}

impl Edge {
    fn source_brick(&self) -> Option<usize> {
        match self.from {
            Source::Brick(b, _) => Some(b),
            Source::Input(_) => None,
        }
    }
}

fn split(r: &str) -> (&str, Option<&str>) {
    match r.split_once('.') {
        Some((b, p)) => (b, Some(p)),
        None => (r, None),
    }
}

/// A flat network plus the timing needed to drive and read it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoweredNetwork {
    pub network: Network,
    pub labels: Vec<String>,
    pub schedule: BTreeMap<String, PortSchedule>,
    pub delays: Vec<InsertedDelay>,
    pub anchors: BTreeMap<String, i64>,
    pub counts: NeuronCount,
}

impl LoweredNetwork {
    /// Enough steps to read every scheduled port.
    pub fn horizon(&self) -> u64 {
        self.schedule
            .values()
            .map(|s| s.offset + s.width as u64)
            .max()
            .unwrap_or(0)
            .max(1)
    }

    pub fn is_input(&self, port: &str) -> bool {
        self.network.inputs().contains_key(port)
    }

    /// Encode `operands` on the input ports and simulate.
    pub fn simulate(&self, operands: &BTreeMap<String, i64>) -> Result<Raster> {
        let mut inputs = Inputs::new();
        for (name, &v) in operands {
            let s = self
                .schedule
                .get(name)
                .filter(|_| self.is_input(name))
                .ok_or_else(|| Error::UnknownInput(name.clone()))?;
            inputs.insert(name.clone(), encode(v, s.width, s.offset, s.signedness)?);
        }
        run(&self.network, &inputs, self.horizon())
    }

    pub fn read(&self, raster: &Raster, output: &str) -> Result<i64> {
        let id = self.network.output(output)?;
        let s = &self.schedule[output];
        Ok(decode(raster, id, s.offset, s.width, s.signedness))
    }

    /// Simulate and decode every output.
    pub fn evaluate(&self, operands: &BTreeMap<String, i64>) -> Result<BTreeMap<String, i64>> {
        let raster = self.simulate(operands)?;
        self.network
            .outputs()
            .keys()
            .map(|name| Ok((name.clone(), self.read(&raster, name)?)))
            .collect()
    }
}

impl Brick {
    /// Lower this brick alone; stream ports carry `width` bits.
    pub fn lower(&self, width: u32) -> Result<LoweredNetwork> {
        Scaffold::single(self.clone(), width)?.lower()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bricks::{build_adder, build_carry_check, build_delay, build_mux};

    #[test]
    fn rejects_second_driver() {
        let mut s = Scaffold::new();
        s.input("X", 3).unwrap().input("Y", 3).unwrap();
        s.add_brick("add", build_adder()).unwrap();
        s.connect("X", "add.A").unwrap();
        assert!(matches!(
            s.connect("Y", "add.A"),
            Err(Error::PortAlreadyDriven { .. })
        ));
    }

    #[test]
    fn rejects_brick_cycles() {
        let mut s = Scaffold::new();
        s.add_brick("a", build_delay(1).unwrap()).unwrap();
        s.add_brick("b", build_delay(1).unwrap()).unwrap();
        s.connect("a.Y", "b.X").unwrap();
        assert!(matches!(s.connect("b.Y", "a.X"), Err(Error::Cycle { .. })));
        assert!(matches!(s.connect("a.Y", "a.X"), Err(Error::Cycle { .. })));
    }

    #[test]
    fn rejects_bad_names() {
        let mut s = Scaffold::new();
        s.add_brick("add", build_adder()).unwrap();
        assert_eq!(
            s.add_brick("add", build_adder()).err(),
            Some(Error::DuplicateBrick("add".into()))
        );
        assert!(matches!(
            s.connect("add.S", "add.Q"),
            Err(Error::UnknownPort { .. })
        ));
        assert!(matches!(
            s.connect("nope.S", "add.A"),
            Err(Error::UnknownBrick(_))
        ));
        s.input("X", 2).unwrap();
        assert_eq!(
            s.input("X", 2).err(),
            Some(Error::DuplicateExternal("X".into()))
        );
    }

    #[test]
    fn adder_feeds_carry_check() {
        let mut s = Scaffold::new();
        s.input("A", 3).unwrap().input("B", 3).unwrap();
        s.add_brick("add", build_adder()).unwrap();
        s.add_brick("check", build_carry_check(3)).unwrap();
        s.connect("A", "add.A")
            .unwrap()
            .connect("B", "add.B")
            .unwrap();
        s.connect("add.S", "check.S").unwrap();
        s.output("gt", "check.gt").unwrap();
        let net = s.lower().unwrap();
        assert_eq!(net.counts.total, 8);
        assert!(net.delays.is_empty());
    }

    #[test]
    fn counts() {
        assert_eq!(Scaffold::new().neuron_count().unwrap().total, 0);
        let s = Scaffold::single(build_mux(4), 4).unwrap();
        let c = s.neuron_count().unwrap();
        assert_eq!((c.total, c.per_brick["brick"], c.delay_neurons), (4, 4, 0));
    }

    #[test]
    fn single_brick_schedule_is_brick_latency() {
        let b = build_adder();
        let net = b.lower(4).unwrap();
        assert_eq!(net.schedule["A"].offset, 0);
        assert_eq!(net.schedule["S"].offset as i64, b.latency());
        assert_eq!(net.schedule["S"].width, 5);
    }
}
