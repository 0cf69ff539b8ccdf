//! Discrete-time leaky integrate-and-fire neurons.
//!
//! Every quantity is an exact signed integer in units of `2^-frac_bits` of the
//! owning [`Network`]. One timestep of a neuron runs, in order:
//!
//! 1. sum the weights `I` of every spike scheduled to arrive now,
//! 2. leak and integrate: additive `V <- V + leak + I`, multiplicative
//!    `V <- floor(V * decay) + I`,
//! 3. threshold: if `V >= threshold` the neuron spikes and `V <- reset`.
//!
//! A spike emitted at `t` arrives at `t + delay` on every outgoing synapse,
//! with `delay >= 1`, so all neurons update from the same pre-step state.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported number of fractional bits.
pub const MAX_FRAC_BITS: u32 = 30;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct NeuronId(pub u32);

impl NeuronId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NeuronId {
    fn from(i: usize) -> Self {
        NeuronId(i as u32)
    }
}

impl fmt::Display for NeuronId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeakMode {
    Additive,
    Multiplicative,
}

impl fmt::Display for LeakMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeakMode::Additive => f.write_str("additive"),
            LeakMode::Multiplicative => f.write_str("multiplicative"),
        }
    }
}

impl std::str::FromStr for LeakMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "additive" => Ok(LeakMode::Additive),
            "multiplicative" => Ok(LeakMode::Multiplicative),
            other => Err(Error::UnknownLeakModel(other.to_string())),
        }
    }
}

/// Leak applied to the stored potential once per timestep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Leak {
    /// Constant added every step (may be positive).
    Additive(i64),
    /// Decay factor `raw / 2^frac_bits`, in `[0, 1]`.
    Multiplicative(i64),
}

impl Leak {
    pub fn mode(self) -> LeakMode {
        match self {
            Leak::Additive(_) => LeakMode::Additive,
            Leak::Multiplicative(_) => LeakMode::Multiplicative,
        }
    }

    pub fn raw(self) -> i64 {
        match self {
            Leak::Additive(v) | Leak::Multiplicative(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NeuronConfig {
    pub threshold: i64,
    pub leak: Leak,
    pub reset: i64,
    pub initial: i64,
}

impl NeuronConfig {
    /// Non-leaking neuron with the given threshold, reset and initial potential 0.
    pub fn new(threshold: i64) -> Self {
        NeuronConfig {
            threshold,
            leak: Leak::Additive(0),
            reset: 0,
            initial: 0,
        }
    }

    pub fn additive(mut self, leak: i64) -> Self {
        self.leak = Leak::Additive(leak);
        self
    }

    pub fn multiplicative(mut self, decay_raw: i64) -> Self {
        self.leak = Leak::Multiplicative(decay_raw);
        self
    }

    pub fn reset(mut self, reset: i64) -> Self {
        self.reset = reset;
        self
    }

    pub fn initial(mut self, initial: i64) -> Self {
        self.initial = initial;
        self
    }

    /// Multiply every potential-valued field by `2^shift`.
    ///
    /// A multiplicative decay keeps its real value because its raw numerator
    /// is scaled along with the denominator.
    pub fn rescaled(self, shift: u32) -> Self {
        let s = |v: i64| v << shift;
        NeuronConfig {
            threshold: s(self.threshold),
            leak: match self.leak {
                Leak::Additive(l) => Leak::Additive(s(l)),
                Leak::Multiplicative(d) => Leak::Multiplicative(s(d)),
            },
            reset: s(self.reset),
            initial: s(self.initial),
        }
    }

    #[inline]
    fn integrate(&self, v: i64, input: i64, frac_bits: u32) -> i64 {
        match self.leak {
            Leak::Additive(l) => v + l + input,
            Leak::Multiplicative(d) => (((v as i128) * (d as i128)) >> frac_bits) as i64 + input,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Synapse {
    pub pre: NeuronId,
    pub post: NeuronId,
    pub weight: i64,
    pub delay: u32,
}

/// Where an externally injected spike lands.
///
/// A spike injected at `t` is integrated by `neuron` at `t + delay`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Injection {
    pub neuron: NeuronId,
    pub weight: i64,
    pub delay: u32,
}

/// Immutable network blueprint. Construct through [`NetworkBuilder`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    frac_bits: u32,
    neurons: Vec<NeuronConfig>,
    synapses: Vec<Synapse>,
    inputs: BTreeMap<String, Vec<Injection>>,
    outputs: BTreeMap<String, NeuronId>,
    fanout: Vec<Vec<u32>>,
    max_delay: u32,
}

impl Network {
    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    /// One unit of potential in raw fixed-point.
    pub fn unit(&self) -> i64 {
        1 << self.frac_bits
    }

    pub fn neurons(&self) -> &[NeuronConfig] {
        &self.neurons
    }

    pub fn neuron(&self, id: NeuronId) -> &NeuronConfig {
        &self.neurons[id.index()]
    }

    pub fn len(&self) -> usize {
        self.neurons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neurons.is_empty()
    }

    pub fn synapses(&self) -> &[Synapse] {
        &self.synapses
    }

    pub fn inputs(&self) -> &BTreeMap<String, Vec<Injection>> {
        &self.inputs
    }

    pub fn outputs(&self) -> &BTreeMap<String, NeuronId> {
        &self.outputs
    }

    pub fn output(&self, name: &str) -> Result<NeuronId> {
        self.outputs
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownOutput(name.to_string()))
    }

    pub fn max_delay(&self) -> u32 {
        self.max_delay
    }

    /// Relabel neuron `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Network> {
        assert_eq!(perm.len(), self.neurons.len(), "permutation length");
        let map = |id: NeuronId| NeuronId::from(perm[id.index()]);
        let mut neurons = self.neurons.clone();
        for (i, cfg) in self.neurons.iter().enumerate() {
            neurons[perm[i]] = *cfg;
        }
        let mut b = NetworkBuilder::with_frac_bits(self.frac_bits);
        b.neurons = neurons;
        b.synapses = self
            .synapses
            .iter()
            .map(|s| Synapse {
                pre: map(s.pre),
                post: map(s.post),
                ..*s
            })
            .collect();
        for (name, targets) in &self.inputs {
            let t = targets
                .iter()
                .map(|j| Injection {
                    neuron: map(j.neuron),
                    ..*j
                })
                .collect();
            b.inputs.insert(name.clone(), t);
        }
        for (name, id) in &self.outputs {
            b.outputs.insert(name.clone(), map(*id));
        }
        b.build()
    }
}

/// Mutable staging area for a [`Network`]; `build` validates it.
#[derive(Debug, Clone, Default)]
pub struct NetworkBuilder {
    frac_bits: u32,
    neurons: Vec<NeuronConfig>,
    synapses: Vec<Synapse>,
    inputs: BTreeMap<String, Vec<Injection>>,
    outputs: BTreeMap<String, NeuronId>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_frac_bits(frac_bits: u32) -> Self {
        NetworkBuilder {
            frac_bits,
            ..Default::default()
        }
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn add_neuron(&mut self, cfg: NeuronConfig) -> NeuronId {
        self.neurons.push(cfg);
        NeuronId::from(self.neurons.len() - 1)
    }

    pub fn connect(&mut self, pre: NeuronId, post: NeuronId, weight: i64, delay: u32) -> &mut Self {
        self.synapses.push(Synapse {
            pre,
            post,
            weight,
            delay,
        });
        self
    }

    /// Input tap with the default injection: weight equal to the target's
    /// threshold and delay 1, so one injected spike makes the target spike.
    pub fn add_input(&mut self, name: impl Into<String>, neuron: NeuronId) -> &mut Self {
        let weight = self.neurons.get(neuron.index()).map_or(1, |n| n.threshold);
        self.add_input_targets(
            name,
            vec![Injection {
                neuron,
                weight,
                delay: 1,
            }],
        )
    }

    pub fn add_input_targets(
        &mut self,
        name: impl Into<String>,
        targets: Vec<Injection>,
    ) -> &mut Self {
        self.inputs.insert(name.into(), targets);
        self
    }

    pub fn add_output(&mut self, name: impl Into<String>, neuron: NeuronId) -> &mut Self {
        self.outputs.insert(name.into(), neuron);
        self
    }

    pub fn build(self) -> Result<Network> {
        if self.frac_bits > MAX_FRAC_BITS {
            return Err(Error::UnsupportedScale(self.frac_bits));
        }
        let n = self.neurons.len();
        let one = 1i64 << self.frac_bits;
        for cfg in &self.neurons {
            if let Leak::Multiplicative(d) = cfg.leak {
                if !(0..=one).contains(&d) {
                    return Err(Error::DecayOutOfRange {
                        raw: d,
                        frac_bits: self.frac_bits,
                    });
                }
            }
        }
        let mut fanout = vec![Vec::new(); n];
        let mut max_delay = 1;
        for (i, s) in self.synapses.iter().enumerate() {
            if s.pre.index() >= n || s.post.index() >= n {
                return Err(Error::DanglingSynapse {
                    pre: s.pre,
                    post: s.post,
                    len: n,
                });
            }
            if s.delay == 0 {
                return Err(Error::ZeroDelay);
            }
            max_delay = max_delay.max(s.delay);
            fanout[s.pre.index()].push(i as u32);
        }
        for (name, targets) in &self.inputs {
            for t in targets {
                if t.neuron.index() >= n {
                    return Err(Error::DanglingTap {
                        name: name.clone(),
                        neuron: t.neuron,
                    });
                }
                if t.delay == 0 {
                    return Err(Error::ZeroDelay);
                }
            }
        }
        for (name, id) in &self.outputs {
            if id.index() >= n {
                return Err(Error::DanglingTap {
                    name: name.clone(),
                    neuron: *id,
                });
            }
        }
        Ok(Network {
            frac_bits: self.frac_bits,
            neurons: self.neurons,
            synapses: self.synapses,
            inputs: self.inputs,
            outputs: self.outputs,
            fanout,
            max_delay,
        })
    }
}

/// Mutable per-run state: potentials plus the ring of pending arrivals.
#[derive(Debug, Clone)]
pub struct Simulation<'n> {
    net: &'n Network,
    potential: Vec<i64>,
    // pending[t % len][neuron] = summed weight arriving at t
    pending: Vec<Vec<i64>>,
    time: u64,
}

impl<'n> Simulation<'n> {
    pub fn new(net: &'n Network) -> Self {
        let slots = net.max_delay as usize + 1;
        Simulation {
            net,
            potential: net.neurons.iter().map(|c| c.initial).collect(),
            pending: vec![vec![0; net.len()]; slots],
            time: 0,
        }
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn potential(&self, id: NeuronId) -> i64 {
        self.potential[id.index()]
    }

    pub fn potentials(&self) -> &[i64] {
        &self.potential
    }

    /// Advance one timestep. `external` holds extra arrivals integrated at the
    /// current step. Returns the neurons that spiked, in id order.
    pub fn step(&mut self, external: &[(NeuronId, i64)]) -> Vec<NeuronId> {
        let slots = self.pending.len();
        let slot = (self.time % slots as u64) as usize;
        let mut arriving = std::mem::take(&mut self.pending[slot]);
        for &(id, w) in external {
            arriving[id.index()] += w;
        }
        let frac = self.net.frac_bits;
        let mut fired = Vec::new();
        for (i, cfg) in self.net.neurons.iter().enumerate() {
            let v = cfg.integrate(self.potential[i], arriving[i], frac);
            if v >= cfg.threshold {
                self.potential[i] = cfg.reset;
                fired.push(NeuronId::from(i));
            } else {
                self.potential[i] = v;
            }
        }
        arriving.iter_mut().for_each(|x| *x = 0);
        self.pending[slot] = arriving;
        for id in &fired {
            for &si in &self.net.fanout[id.index()] {
                let s = &self.net.synapses[si as usize];
                let at = ((self.time + s.delay as u64) % slots as u64) as usize;
                self.pending[at][s.post.index()] += s.weight;
            }
        }
        self.time += 1;
        fired
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Spike {
    pub time: u64,
    pub neuron: NeuronId,
}

/// Every spike of a run, ordered by time then neuron id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Raster {
    pub events: Vec<Spike>,
    pub horizon: u64,
}

impl Raster {
    pub fn spike_times(&self, neuron: NeuronId) -> Vec<u64> {
        self.events
            .iter()
            .filter(|s| s.neuron == neuron)
            .map(|s| s.time)
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    /// `time,neuron_id` rows after a version line and header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# spikearith-raster v1\ntime,neuron_id\n");
        for s in &self.events {
            out.push_str(&format!("{},{}\n", s.time, s.neuron.0));
        }
        out
    }
}

/// External spike times keyed by input name.
pub type Inputs = BTreeMap<String, Vec<u64>>;

/// Simulate `net` for `horizon` steps with spikes injected on its input taps.
pub fn run(net: &Network, inputs: &Inputs, horizon: u64) -> Result<Raster> {
    if horizon == 0 {
        return Err(Error::InvalidHorizon);
    }
    let mut schedule: BTreeMap<u64, Vec<(NeuronId, i64)>> = BTreeMap::new();
    for (name, times) in inputs {
        let targets = net
            .inputs
            .get(name)
            .ok_or_else(|| Error::UnknownInput(name.clone()))?;
        for &t in times {
            if t >= horizon {
                return Err(Error::SpikeBeyondHorizon {
                    name: name.clone(),
                    time: t,
                    horizon,
                });
            }
            for j in targets {
                let at = t + j.delay as u64;
                if at < horizon {
                    schedule.entry(at).or_default().push((j.neuron, j.weight));
                }
            }
        }
    }
    let mut sim = Simulation::new(net);
    let mut events = Vec::new();
    let none = Vec::new();
    for t in 0..horizon {
        let ext = schedule.get(&t).unwrap_or(&none);
        for neuron in sim.step(ext) {
            events.push(Spike { time: t, neuron });
        }
    }
    Ok(Raster { events, horizon })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn not_gate() -> (Network, NeuronId) {
        let mut b = NetworkBuilder::new();
        let n = b.add_neuron(NeuronConfig::new(1).additive(1));
        b.add_input_targets(
            "x",
            vec![Injection {
                neuron: n,
                weight: -1,
                delay: 1,
            }],
        );
        (b.build().unwrap(), n)
    }

    #[test]
    fn not_neuron_fires_without_input() {
        let (net, n) = not_gate();
        let mut sim = Simulation::new(&net);
        assert_eq!(sim.step(&[]), vec![n]);
        assert_eq!(sim.potential(n), 0);
    }

    #[test]
    fn not_neuron_held_by_inhibition() {
        let (net, n) = not_gate();
        let mut sim = Simulation::new(&net);
        assert!(sim.step(&[(n, -1)]).is_empty());
        assert_eq!(sim.potential(n), 0);
    }

    #[test]
    fn multiplicative_decay_halves() {
        let mut b = NetworkBuilder::with_frac_bits(1);
        // threshold 100, decay 0.5, V = 4 (all in halves)
        let n = b.add_neuron(NeuronConfig::new(200).multiplicative(1).initial(8));
        let net = b.build().unwrap();
        let mut sim = Simulation::new(&net);
        sim.step(&[]);
        assert_eq!(sim.potential(n), 4);
        sim.step(&[]);
        assert_eq!(sim.potential(n), 2);
    }

    #[test]
    fn empty_network_runs_silent() {
        let net = NetworkBuilder::new().build().unwrap();
        let r = run(&net, &Inputs::new(), 5).unwrap();
        assert!(r.is_empty());
        assert_eq!(r.horizon, 5);
    }

    #[test]
    fn relay_delays_by_one() {
        let mut b = NetworkBuilder::new();
        let n = b.add_neuron(NeuronConfig::new(1));
        b.add_input("in", n);
        let net = b.build().unwrap();
        let inputs = Inputs::from([("in".to_string(), vec![0, 2])]);
        let r = run(&net, &inputs, 5).unwrap();
        assert_eq!(r.spike_times(n), vec![1, 3]);
    }

    #[test]
    fn not_network_complements_window() {
        // Hand-executed: V starts 0, leak +1, inputs at 1 and 3 (weight -1).
        // t0: 1 -> spike; t1: 0+1-1=0; t2: 1 -> spike; t3: 0; t4: spike
        let (net, n) = not_gate();
        let inputs = Inputs::from([("x".to_string(), vec![0, 2])]);
        let r = run(&net, &inputs, 5).unwrap();
        assert_eq!(r.spike_times(n), vec![0, 2, 4]);
    }

    #[test]
    fn run_rejects_bad_arguments() {
        let (net, _) = not_gate();
        assert_eq!(run(&net, &Inputs::new(), 0), Err(Error::InvalidHorizon));
        let bad = Inputs::from([("y".to_string(), vec![0])]);
        assert_eq!(run(&net, &bad, 3), Err(Error::UnknownInput("y".into())));
        let late = Inputs::from([("x".to_string(), vec![3])]);
        assert!(matches!(
            run(&net, &late, 3),
            Err(Error::SpikeBeyondHorizon { .. })
        ));
    }

    #[test]
    fn construction_rejects_malformed() {
        let mut b = NetworkBuilder::new();
        let a = b.add_neuron(NeuronConfig::new(1));
        b.connect(a, a, 1, 0);
        assert_eq!(b.build(), Err(Error::ZeroDelay));

        let mut b = NetworkBuilder::new();
        let a = b.add_neuron(NeuronConfig::new(1));
        b.connect(a, NeuronId(7), 1, 1);
        assert!(matches!(b.build(), Err(Error::DanglingSynapse { .. })));

        let mut b = NetworkBuilder::new();
        b.add_neuron(NeuronConfig::new(1).multiplicative(2));
        assert!(matches!(b.build(), Err(Error::DecayOutOfRange { .. })));

        let mut b = NetworkBuilder::new();
        b.add_output("o", NeuronId(0));
        assert!(matches!(b.build(), Err(Error::DanglingTap { .. })));
    }

    #[test]
    fn self_synapse_allowed() {
        let mut b = NetworkBuilder::new();
        let a = b.add_neuron(NeuronConfig::new(1).initial(1));
        b.connect(a, a, 1, 1);
        let net = b.build().unwrap();
        let r = run(&net, &Inputs::new(), 4).unwrap();
        assert_eq!(r.spike_times(a), vec![0, 1, 2, 3]);
    }

    #[test]
    fn long_delays_wrap_ring() {
        let mut b = NetworkBuilder::new();
        let a = b.add_neuron(NeuronConfig::new(1));
        let c = b.add_neuron(NeuronConfig::new(1));
        b.connect(a, c, 1, 7);
        b.add_input("in", a);
        let net = b.build().unwrap();
        let inputs = Inputs::from([("in".to_string(), vec![0, 1, 5])]);
        let r = run(&net, &inputs, 20).unwrap();
        assert_eq!(r.spike_times(c), vec![8, 9, 13]);
    }
}
