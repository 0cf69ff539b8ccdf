//! Builders for the streaming arithmetic bricks.
//!
//! Neurons described as *memoryless* use a multiplicative decay of 0, so
//! their potential is just the input summed on the current step.

use serde::{Deserialize, Serialize};

use crate::brick::{bind, Brick, BrickBuilder, PortKind, WidthRule};
use crate::error::{Error, Result};
use crate::neuron::{LeakMode, NeuronConfig};
use crate::scaffold::{DelayStrategy, Scaffold};
use crate::streams::Signedness;

/// Inhibition (in potential units) that silences a one-shot neuron for the
/// rest of any practical run.
pub const LOCKOUT: i64 = 1 << 32;

fn memoryless(threshold: i64) -> NeuronConfig {
    NeuronConfig::new(threshold).multiplicative(0)
}

fn relay() -> NeuronConfig {
    NeuronConfig::new(1)
}

/// Adder parameters; the defaults are the working design. Other values exist
/// to build deliberately broken adders for mutation testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AdderParams {
    pub thresholds: [i64; 3],
    pub out_weights: [i64; 3],
    pub carry_weight: i64,
}

impl Default for AdderParams {
    fn default() -> Self {
        AdderParams {
            thresholds: [1, 2, 3],
            out_weights: [1, -1, 1],
            carry_weight: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MuxParams {
    /// Weight from select onto the A input neuron.
    pub a_select_weight: i64,
    /// Weight from select onto the B input neuron.
    pub b_select_weight: i64,
    pub b_threshold: i64,
    pub select_self_weight: i64,
    pub out_threshold: i64,
}

impl Default for MuxParams {
    fn default() -> Self {
        MuxParams {
            a_select_weight: -1,
            b_select_weight: 1,
            b_threshold: 2,
            select_self_weight: 1,
            out_threshold: 1,
        }
    }
}

/// Parameters threaded through composite builders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BuildOptions {
    pub adder: AdderParams,
    pub mux: MuxParams,
}

pub fn build_adder() -> Brick {
    build_adder_with(AdderParams::default())
}

/// Streaming adder: ports `A`, `B` -> `S`, latency 3, output one bit wider.
///
/// Hidden neurons count the active inputs (A, B, previous carry) each step;
/// T2 (count >= 2) is the carry and feeds back into all three.
pub fn build_adder_with(p: AdderParams) -> Brick {
    let mut b = BrickBuilder::new("adder");
    let a = b.neuron("A", relay());
    let bb = b.neuron("B", relay());
    let t: Vec<_> = (0..3)
        .map(|i| b.neuron(format!("T{}", i + 1), memoryless(p.thresholds[i])))
        .collect();
    let s = b.neuron("S", memoryless(1));
    for &h in &t {
        b.synapse(a, h, 1, 1);
        b.synapse(bb, h, 1, 1);
        b.synapse(t[1], h, p.carry_weight, 1);
    }
    for (i, &h) in t.iter().enumerate() {
        b.synapse(h, s, p.out_weights[i], 1);
    }
    b.in_port("A", PortKind::Stream, 0, vec![bind(a, 1, 1)]);
    b.in_port("B", PortKind::Stream, 0, vec![bind(bb, 1, 1)]);
    b.out_port("S", s, 3, WidthRule::Grow(1));
    b.build()
}

/// Bitwise inverter: `X` -> `notX`, latency 1.
///
/// Additive: one neuron with leak +1 and threshold 1 that fires every step
/// unless an input spike (weight -1) cancels the leak. Multiplicative: a
/// constant spiker drives a memoryless output which the input inhibits.
/// Outside the input window the output is all ones.
pub fn build_not(leak: LeakMode) -> Brick {
    let mut b = BrickBuilder::new("not");
    let out = match leak {
        LeakMode::Additive => {
            let n = b.neuron("not", NeuronConfig::new(1).additive(1));
            b.in_port("X", PortKind::Stream, 0, vec![bind(n, -1, 1)]);
            n
        }
        LeakMode::Multiplicative => {
            let c = b.neuron("const", NeuronConfig::new(1).multiplicative(1).initial(1));
            b.synapse(c, c, 1, 1);
            let n = b.neuron("not", memoryless(1));
            b.synapse(c, n, 1, 1);
            b.in_port("X", PortKind::Stream, 0, vec![bind(n, -1, 1)]);
            n
        }
    };
    b.out_port("notX", out, 1, WidthRule::Grow(0));
    b.build()
}

/// Parse a leak model name for [`build_not`].
pub fn build_not_named(leak: &str) -> Result<Brick> {
    Ok(build_not(leak.parse()?))
}

/// Additive inverter that is silent outside a `width`-bit window: it starts
/// charging so its first spike is output bit 0, and a timer locks it out
/// after bit `width - 1`. Two neurons.
pub fn build_not_windowed(width: u32) -> Brick {
    let k = width as i64;
    let mut b = BrickBuilder::new("not_windowed");
    let n = b.self_charging("not", 1);
    let stop = b.timer("stop", k);
    b.synapse(stop, n, -LOCKOUT, 1);
    b.in_port("X", PortKind::Stream, 0, vec![bind(n, -1, 1)]);
    b.out_port("notX", n, 1, WidthRule::Fixed(width));
    b.build()
}

/// Single spike at the anchor, i.e. the constant 1 aligned with whatever
/// drives `sync`. `sync` carries no synapse.
pub fn build_pulse() -> Brick {
    let mut b = BrickBuilder::new("pulse");
    let t = b.timer("one", 0);
    b.in_port("sync", PortKind::Pulse, 0, Vec::new());
    b.out_port("P", t, 0, WidthRule::Fixed(1));
    b.build()
}

/// Carry-bit check on a `width`-bit sum stream `S` -> `gt`.
///
/// A memoryless check neuron (threshold 2) sees the stream and a timer that
/// fires exactly when bit `width` arrives, so it spikes only if that bit is 1.
pub fn build_carry_check(width: u32) -> Brick {
    let k = width as i64;
    let mut b = BrickBuilder::new("carry_check");
    let check = b.neuron("check", memoryless(2));
    let timer = b.timer("timer", k);
    b.synapse(timer, check, 1, 1);
    b.in_port("S", PortKind::Stream, 0, vec![bind(check, 1, 1)]);
    b.out_port("gt", check, k + 1, WidthRule::Fixed(1));
    b.build()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityVariant {
    /// Inverter, adder and carry check.
    Arithmetic,
    /// One check neuron with 0.5 multiplicative decay.
    Decay,
}

impl std::str::FromStr for InequalityVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arithmetic" => Ok(InequalityVariant::Arithmetic),
            "decay" => Ok(InequalityVariant::Decay),
            other => Err(Error::UnknownCircuit(format!("inequality variant {other}"))),
        }
    }
}

pub fn build_inequality(width: u32, variant: InequalityVariant) -> Result<Brick> {
    build_inequality_with(width, variant, &BuildOptions::default())
}

/// `A > B` on unsigned `width`-bit streams; `gt` is one spike or silence.
pub fn build_inequality_with(
    width: u32,
    variant: InequalityVariant,
    opts: &BuildOptions,
) -> Result<Brick> {
    check_width(width)?;
    match variant {
        InequalityVariant::Arithmetic => {
            // A + inv(B) carries out of bit k exactly when A > B
            let mut s = Scaffold::new();
            s.input("A", width)?.input("B", width)?;
            s.add_brick("not", build_not_windowed(width))?;
            s.add_brick("adder", build_adder_with(opts.adder))?;
            s.add_brick("check", build_carry_check(width))?;
            s.connect("B", "not.X")?;
            s.connect("A", "adder.A")?;
            s.connect("not.notX", "adder.B")?;
            s.connect("adder.S", "check.S")?;
            s.output("gt", "check.gt")?;
            s.pack("inequality")
        }
        InequalityVariant::Decay => Ok(build_decay_inequality(width)),
    }
}

/// Decaying comparator. With decay 0.5 and bits arriving LSB first, a
/// constant per-spike weight `w` leaves bit `t` contributing `w * 2^(t-k+1)`
/// once all `k` bits are in, so the potential tracks `A - B` exactly. A probe
/// one quantum below threshold then fires the neuron only if `A - B >= 1`.
fn build_decay_inequality(width: u32) -> Brick {
    let k = width as i64;
    let frac = width + 1;
    let mut b = BrickBuilder::with_frac_bits("inequality_decay", frac);
    let unit = b.unit();
    let w = 1i64 << width;
    let check = b.neuron("check", NeuronConfig::new(unit).multiplicative(unit / 2));
    let probe = b.timer("probe", k);
    b.synapse(probe, check, unit - 1, 1);
    b.in_port("A", PortKind::Stream, 0, vec![bind(check, w, 1)]);
    b.in_port("B", PortKind::Stream, 0, vec![bind(check, -w, 1)]);
    b.out_port("gt", check, k + 1, WidthRule::Fixed(1));
    b.build()
}

pub fn build_mux(width: u32) -> Brick {
    build_mux_with(width, MuxParams::default())
}

/// 2-to-1 mux: `A`, `B`, `select`, `stop` -> `out`, latency 2. Four neurons.
///
/// A silent select passes `A`. A select spike one step before bit 0 starts
/// the self-exciting select neuron, which inhibits the A input neuron and
/// enables the B input neuron (threshold 2) each step until `stop`, due
/// `width` steps after `select`, cancels its self-excitation.
pub fn build_mux_with(width: u32, p: MuxParams) -> Brick {
    let k = width as i64;
    let mut b = BrickBuilder::new("mux");
    let a_in = b.neuron("A_in", memoryless(1));
    let b_in = b.neuron("B_in", memoryless(p.b_threshold));
    let sel = b.neuron("select", NeuronConfig::new(1));
    let out = b.neuron("out", NeuronConfig::new(p.out_threshold));
    b.synapse(sel, sel, p.select_self_weight, 1);
    b.synapse(sel, a_in, p.a_select_weight, 1);
    b.synapse(sel, b_in, p.b_select_weight, 1);
    b.synapse(a_in, out, 1, 1);
    b.synapse(b_in, out, 1, 1);
    b.in_port("A", PortKind::Stream, 0, vec![bind(a_in, 1, 1)]);
    b.in_port("B", PortKind::Stream, 0, vec![bind(b_in, 1, 1)]);
    b.in_port("select", PortKind::Pulse, -1, vec![bind(sel, 1, 1)]);
    b.in_port("stop", PortKind::Pulse, k - 1, vec![bind(sel, -1, 1)]);
    b.out_port("out", out, 2, WidthRule::Fixed(width));
    b.build()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinMaxMode {
    Min,
    Max,
}

impl std::str::FromStr for MinMaxMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(MinMaxMode::Min),
            "max" => Ok(MinMaxMode::Max),
            other => Err(Error::UnknownCircuit(format!("minmax mode {other}"))),
        }
    }
}

pub fn build_minmax(width: u32, mode: MinMaxMode) -> Result<Brick> {
    build_minmax_with(width, mode, &BuildOptions::default())
}

pub fn minmax_scaffold(width: u32, mode: MinMaxMode, opts: &BuildOptions) -> Result<Scaffold> {
    check_width(width)?;
    let mut s = Scaffold::new();
    s.input("A", width)?.input("B", width)?;
    s.add_brick(
        "inequality",
        build_inequality_with(width, InequalityVariant::Arithmetic, opts)?,
    )?;
    s.add_brick("mux", build_mux_with(width, opts.mux))?;
    s.connect("A", "inequality.A")?;
    s.connect("B", "inequality.B")?;
    s.connect("inequality.gt", "mux.select")?;
    s.connect("inequality.gt", "mux.stop")?;
    // gt spikes iff A > B and switches the mux to its B port
    let (on_silent, on_gt) = match mode {
        MinMaxMode::Max => ("B", "A"),
        MinMaxMode::Min => ("A", "B"),
    };
    s.connect(on_silent, "mux.A")?;
    s.connect(on_gt, "mux.B")?;
    s.output("out", "mux.out")?;
    Ok(s)
}

/// `min(A, B)` or `max(A, B)`; ties take the silent-select path.
pub fn build_minmax_with(width: u32, mode: MinMaxMode, opts: &BuildOptions) -> Result<Brick> {
    let kind = match mode {
        MinMaxMode::Min => "min",
        MinMaxMode::Max => "max",
    };
    minmax_scaffold(width, mode, opts)?.pack(kind)
}

pub fn build_subtractor(width: u32) -> Result<Brick> {
    build_subtractor_with(width, &BuildOptions::default())
}

pub fn subtractor_scaffold(width: u32, opts: &BuildOptions) -> Result<Scaffold> {
    check_width(width)?;
    let mut s = Scaffold::new();
    s.input("A", width)?.input("B", width)?;
    s.add_brick("not", build_not_windowed(width + 1))?;
    s.add_brick("one", build_pulse())?;
    s.add_brick("negate", build_adder_with(opts.adder))?;
    s.add_brick("sum", build_adder_with(opts.adder))?;
    s.connect("B", "not.X")?;
    s.connect("B", "one.sync")?;
    s.connect("not.notX", "negate.A")?;
    s.connect("one.P", "negate.B")?;
    s.connect("A", "sum.A")?;
    s.connect("negate.S", "sum.B")?;
    s.output_with(
        "D",
        "sum.S",
        Some(width + 1),
        Some(Signedness::TwosComplement),
    )?;
    Ok(s)
}

/// `A - B` as a `(width + 1)`-bit two's-complement stream: `A + (inv(B) + 1)`
/// with `B` zero-extended by one bit.
pub fn build_subtractor_with(width: u32, opts: &BuildOptions) -> Result<Brick> {
    subtractor_scaffold(width, opts)?.pack("subtractor")
}

pub fn build_delay(d: u32) -> Result<Brick> {
    build_delay_with(d, DelayStrategy::Synapse)
}

/// Pass `X` through unchanged `d` steps later.
pub fn build_delay_with(d: u32, strategy: DelayStrategy) -> Result<Brick> {
    if d == 0 {
        return Err(Error::InvalidDelay);
    }
    let mut b = BrickBuilder::new("delay");
    let out = match strategy {
        DelayStrategy::Synapse => {
            let r = b.neuron("relay", relay());
            b.in_port("X", PortKind::Stream, 0, vec![bind(r, 1, d)]);
            r
        }
        DelayStrategy::RelayChain => {
            let first = b.neuron("relay0", relay());
            let mut last = first;
            for i in 1..d {
                let r = b.neuron(format!("relay{i}"), relay());
                b.synapse(last, r, 1, 1);
                last = r;
            }
            b.in_port("X", PortKind::Stream, 0, vec![bind(first, 1, 1)]);
            last
        }
    };
    b.out_port("Y", out, d as i64, WidthRule::Grow(0));
    Ok(b.build())
}

fn bit_length(a: u64) -> u32 {
    64 - a.leading_zeros()
}

pub fn build_scalar_mult(a: u64, width: u32) -> Result<Brick> {
    build_scalar_mult_with(a, width, &BuildOptions::default())
}

/// Scaffold summing `X * 2^p` over the set bits `p` of `a`; `None` when `a`
/// has fewer than two set bits and needs no adders.
pub fn scalar_mult_scaffold(a: u64, width: u32, opts: &BuildOptions) -> Result<Option<Scaffold>> {
    check_width(width)?;
    let bits: Vec<u32> = (0..64).filter(|p| a >> p & 1 == 1).collect();
    if bits.len() < 2 {
        return Ok(None);
    }
    let mut s = Scaffold::new();
    s.input("X", width)?;
    for i in 1..bits.len() {
        let name = format!("add{i}");
        s.add_brick(&name, build_adder_with(opts.adder))?;
        if i == 1 {
            s.connect_shifted("X", "add1.A", bits[0])?;
        } else {
            s.connect(&format!("add{}.S", i - 1), &format!("{name}.A"))?;
        }
        s.connect_shifted("X", &format!("{name}.B"), bits[i])?;
    }
    s.output_with(
        "Y",
        &format!("add{}.S", bits.len() - 1),
        Some(width + bit_length(a)),
        None,
    )?;
    Ok(Some(s))
}

/// `Y = a * X` for a constant `a >= 0`.
///
/// Powers of two are a single delay relay; zero is a silent neuron.
pub fn build_scalar_mult_with(a: u64, width: u32, opts: &BuildOptions) -> Result<Brick> {
    let out_width = width + bit_length(a);
    if let Some(s) = scalar_mult_scaffold(a, width, opts)? {
        return s.pack("scalar_mult");
    }
    let mut b = BrickBuilder::new("scalar_mult");
    if a == 0 {
        let z = b.neuron("zero", relay());
        b.in_port("X", PortKind::Stream, 0, Vec::new());
        b.out_port("Y", z, 0, WidthRule::Fixed(width));
    } else {
        let p = a.trailing_zeros() as i64;
        let d = p.max(1);
        let r = b.neuron("shift", relay());
        b.in_port("X", PortKind::Stream, 0, vec![bind(r, 1, d as u32)]);
        b.out_port("Y", r, d - p, WidthRule::Fixed(out_width));
    }
    Ok(b.build())
}

/// Partial products `X * y_i * 2^i` for `i < width`.
///
/// A shared timer samples every bit of `Y` at once: latch `i` sees `Y` on a
/// delay of `width - i`, so only bit `i` coincides with the sample. A set
/// latch re-excites itself until the clear timer, and gate `i` (threshold 2)
/// passes a delayed copy of `X` only while latch `i` is firing.
pub fn build_gate_bank(width: u32) -> Brick {
    let k = width as i64;
    let mut b = BrickBuilder::new("gate_bank");
    let sample = b.timer("sample", k - 1);
    let clear = b.timer("clear", 2 * k + 1);
    let mut y_bind = Vec::new();
    let mut x_bind = Vec::new();
    let mut gates = Vec::new();
    for i in 0..width {
        let latch = b.neuron(format!("latch{i}"), memoryless(2));
        b.synapse(sample, latch, 1, 1);
        b.synapse(latch, latch, 2, 1);
        b.synapse(clear, latch, -2, 1);
        y_bind.push(bind(latch, 1, width - i));
        let gate = b.neuron(format!("gate{i}"), memoryless(2));
        b.synapse(latch, gate, 1, 1);
        x_bind.push(bind(gate, 1, width + 1));
        gates.push(gate);
    }
    b.in_port("X", PortKind::Stream, 0, x_bind);
    b.in_port("Y", PortKind::Stream, 0, y_bind);
    for (i, g) in gates.into_iter().enumerate() {
        b.out_port(
            format!("P{i}"),
            g,
            k + 1 - i as i64,
            WidthRule::Fixed(width + i as u32),
        );
    }
    b.build()
}

pub fn build_variable_mult(width: u32) -> Result<Brick> {
    build_variable_mult_with(width, &BuildOptions::default())
}

pub fn variable_mult_scaffold(width: u32, opts: &BuildOptions) -> Result<Scaffold> {
    check_width(width)?;
    let mut s = Scaffold::new();
    s.input("X", width)?.input("Y", width)?;
    s.add_brick("gates", build_gate_bank(width))?;
    s.connect("X", "gates.X")?;
    s.connect("Y", "gates.Y")?;
    let mut acc = "gates.P0".to_string();
    for i in 1..width {
        let name = format!("add{i}");
        s.add_brick(&name, build_adder_with(opts.adder))?;
        s.connect(&acc, &format!("{name}.A"))?;
        s.connect(&format!("gates.P{i}"), &format!("{name}.B"))?;
        acc = format!("{name}.S");
    }
    s.output_with("P", &acc, Some(2 * width), None)?;
    Ok(s)
}

/// `P = X * Y` over `2 * width` bits: gated partial products summed by a
/// chain of `width - 1` adders.
pub fn build_variable_mult_with(width: u32, opts: &BuildOptions) -> Result<Brick> {
    variable_mult_scaffold(width, opts)?.pack("variable_mult")
}

fn check_width(width: u32) -> Result<()> {
    if width == 0 || width > 30 {
        return Err(Error::InvalidWidth(width));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::neuron::{Inputs, LeakMode};
    use crate::scaffold::LoweredNetwork;
    use crate::streams::{decode, encode, Signedness};

    fn ops(pairs: &[(&str, i64)]) -> BTreeMap<String, i64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn eval(net: &LoweredNetwork, pairs: &[(&str, i64)], out: &str) -> i64 {
        net.evaluate(&ops(pairs)).unwrap()[out]
    }

    #[test]
    fn adder_examples() {
        let net = build_adder().lower(3).unwrap();
        assert_eq!(net.schedule["S"].width, 4);
        assert_eq!(eval(&net, &[("A", 3), ("B", 1)], "S"), 4);
        assert_eq!(eval(&net, &[("A", 0), ("B", 0)], "S"), 0);
        assert_eq!(eval(&net, &[("A", 7), ("B", 1)], "S"), 8);
        assert_eq!(net.schedule["S"].offset, 3);
    }

    #[test]
    fn adder_budget() {
        let b = build_adder();
        assert_eq!(b.neuron_count(), 6);
        let hidden: Vec<_> = b.labels().iter().filter(|l| l.starts_with('T')).collect();
        assert_eq!(hidden.len(), 3);
        let th: Vec<i64> = ["T1", "T2", "T3"]
            .iter()
            .map(|l| b.neurons()[b.find(l).unwrap().index()].threshold)
            .collect();
        assert_eq!(th, vec![1, 2, 3]);
    }

    #[test]
    fn adder_overflow_needs_extra_step() {
        let net = build_adder().lower(3).unwrap();
        let raster = net.simulate(&ops(&[("A", 7), ("B", 1)])).unwrap();
        let s = net.network.output("S").unwrap();
        let off = net.schedule["S"].offset;
        assert_eq!(decode(&raster, s, off, 3, Signedness::Unsigned), 0);
        assert_eq!(decode(&raster, s, off, 4, Signedness::Unsigned), 8);
    }

    #[test]
    fn not_examples_both_leaks() {
        for leak in [LeakMode::Additive, LeakMode::Multiplicative] {
            let net = build_not(leak).lower(4).unwrap();
            assert_eq!(eval(&net, &[("X", 0b0101)], "notX"), 0b1010);
            assert_eq!(eval(&net, &[("X", 0)], "notX"), 0b1111);
            assert_eq!(eval(&net, &[("X", 0b1111)], "notX"), 0);
        }
        assert_eq!(build_not(LeakMode::Additive).neuron_count(), 1);
        assert_eq!(build_not(LeakMode::Multiplicative).neuron_count(), 2);
        assert!(build_not_named("quadratic").is_err());
    }

    #[test]
    fn windowed_not_is_silent_outside_window() {
        let net = build_not_windowed(3).lower(3).unwrap();
        let raster = net.simulate(&ops(&[("X", 0b010)])).unwrap();
        let n = net.network.output("notX").unwrap();
        assert_eq!(raster.spike_times(n), vec![1, 3]);
    }

    #[test]
    fn carry_check_examples() {
        let k = 3;
        let brick = build_carry_check(k);
        assert_eq!(brick.neuron_count(), 2);
        let net = brick.lower(k + 1).unwrap();
        let gt = |s: i64| eval(&net, &[("S", s)], "gt");
        assert_eq!(gt(0b1000), 1);
        assert_eq!(gt(0b1101), 1);
        assert_eq!(gt(0b0110), 0);
        assert_eq!(gt(0b0111), 0);
    }

    #[test]
    fn carry_check_timer_fires_once() {
        let net = build_carry_check(4).lower(5).unwrap();
        let raster = net.simulate(&ops(&[("S", 0)])).unwrap();
        let timer = NeuronId::from(
            net.labels
                .iter()
                .position(|l| l.ends_with("timer"))
                .unwrap(),
        );
        let mut long = Inputs::new();
        long.insert("S".into(), vec![]);
        let r2 = crate::neuron::run(&net.network, &long, 60).unwrap();
        assert_eq!(raster.spike_times(timer), vec![4]);
        assert_eq!(r2.spike_times(timer), vec![4]);
    }

    use crate::neuron::NeuronId;

    #[test]
    fn inequality_examples_both_variants() {
        for v in [InequalityVariant::Arithmetic, InequalityVariant::Decay] {
            let net = build_inequality(3, v).unwrap().lower(3).unwrap();
            assert_eq!(eval(&net, &[("A", 5), ("B", 3)], "gt"), 1, "{v:?}");
            assert_eq!(eval(&net, &[("A", 3), ("B", 3)], "gt"), 0, "{v:?}");
            assert_eq!(eval(&net, &[("A", 0), ("B", 7)], "gt"), 0, "{v:?}");
        }
        assert_eq!(
            build_inequality(5, InequalityVariant::Decay)
                .unwrap()
                .neuron_count(),
            2
        );
    }

    #[test]
    fn mux_examples() {
        let net = build_mux(4).lower(4).unwrap();
        let m = |a, b, sel| {
            eval(
                &net,
                &[("A", a), ("B", b), ("select", sel), ("stop", sel)],
                "out",
            )
        };
        assert_eq!(m(0b1011, 0b0100, 0), 0b1011);
        assert_eq!(m(0b1011, 0b0100, 1), 0b0100);
        assert_eq!(m(0b0110, 0b0110, 0), 0b0110);
        assert_eq!(m(0b0110, 0b0110, 1), 0b0110);
        assert_eq!(build_mux(4).neuron_count(), 4);
    }

    #[test]
    fn minmax_examples() {
        let max = build_minmax(4, MinMaxMode::Max).unwrap().lower(4).unwrap();
        let min = build_minmax(4, MinMaxMode::Min).unwrap().lower(4).unwrap();
        assert_eq!(eval(&max, &[("A", 5), ("B", 3)], "out"), 5);
        assert_eq!(eval(&min, &[("A", 5), ("B", 3)], "out"), 3);
        assert_eq!(eval(&max, &[("A", 4), ("B", 4)], "out"), 4);
        assert_eq!(eval(&max, &[("A", 0), ("B", 0)], "out"), 0);
    }

    #[test]
    fn subtractor_examples() {
        let net = build_subtractor(3).unwrap().lower(3).unwrap();
        assert_eq!(net.schedule["D"].signedness, Signedness::TwosComplement);
        assert_eq!(eval(&net, &[("A", 5), ("B", 3)], "D"), 2);
        assert_eq!(eval(&net, &[("A", 3), ("B", 5)], "D"), -2);
        assert_eq!(eval(&net, &[("A", 0), ("B", 7)], "D"), -7);
    }

    #[test]
    fn scalar_mult_examples() {
        let net = build_scalar_mult(5, 4).unwrap().lower(4).unwrap();
        assert_eq!(eval(&net, &[("X", 3)], "Y"), 15);
        let id = build_scalar_mult(1, 4).unwrap().lower(4).unwrap();
        assert_eq!(eval(&id, &[("X", 9)], "Y"), 9);
        let two = build_scalar_mult(2, 4).unwrap().lower(4).unwrap();
        assert_eq!(eval(&two, &[("X", 6)], "Y"), 12);
        let zero = build_scalar_mult(0, 4).unwrap().lower(4).unwrap();
        assert_eq!(eval(&zero, &[("X", 13)], "Y"), 0);
    }

    #[test]
    fn variable_mult_examples() {
        let net = build_variable_mult(3).unwrap().lower(3).unwrap();
        assert_eq!(eval(&net, &[("X", 3), ("Y", 5)], "P"), 15);
        for x in 0..8 {
            assert_eq!(eval(&net, &[("X", x), ("Y", 0)], "P"), 0);
            assert_eq!(eval(&net, &[("X", x), ("Y", 1)], "P"), x);
        }
    }

    #[test]
    fn delay_examples() {
        assert_eq!(build_delay(0), Err(Error::InvalidDelay));
        let net = build_delay(1).unwrap().lower(4).unwrap();
        let raster = net.simulate(&ops(&[("X", 6)])).unwrap();
        let y = net.network.output("Y").unwrap();
        assert_eq!(decode(&raster, y, 1, 4, Signedness::Unsigned), 6);
        assert_eq!(decode(&raster, y, 0, 5, Signedness::Unsigned), 12);
        for s in [DelayStrategy::Synapse, DelayStrategy::RelayChain] {
            assert_eq!(build_delay_with(3, s).unwrap().latency(), 3);
        }
        assert_eq!(
            build_delay_with(3, DelayStrategy::RelayChain)
                .unwrap()
                .neuron_count(),
            3
        );
    }

    #[test]
    fn delays_compose_additively() {
        for v in 0..16 {
            let input = Inputs::from([(
                "X".to_string(),
                encode(v, 4, 0, Signedness::Unsigned).unwrap(),
            )]);
            let mut s = Scaffold::new();
            s.input("X", 4).unwrap();
            s.add_brick("d1", build_delay(2).unwrap()).unwrap();
            s.add_brick("d2", build_delay(3).unwrap()).unwrap();
            s.connect("X", "d1.X").unwrap();
            s.connect("d1.Y", "d2.X").unwrap();
            s.output("Y", "d2.Y").unwrap();
            let chained = s.lower().unwrap();
            let single = build_delay(5).unwrap().lower(4).unwrap();
            let a = crate::neuron::run(&chained.network, &input, 12).unwrap();
            let b = crate::neuron::run(&single.network, &input, 12).unwrap();
            let ya = chained.network.output("Y").unwrap();
            let yb = single.network.output("Y").unwrap();
            assert_eq!(a.spike_times(ya), b.spike_times(yb));
        }
    }
}
