use thiserror::Error;

use crate::neuron::NeuronId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("synapse {pre} -> {post} references a missing neuron (network has {len})")]
    DanglingSynapse {
        pre: NeuronId,
        post: NeuronId,
        len: usize,
    },
    #[error("tap `{name}` references missing neuron {neuron}")]
    DanglingTap { name: String, neuron: NeuronId },
    #[error("synapse or injection delay must be at least 1")]
    ZeroDelay,
    #[error("multiplicative leak {raw}/2^{frac_bits} is outside [0, 1]")]
    DecayOutOfRange { raw: i64, frac_bits: u32 },
    #[error("fixed-point scale of {0} fractional bits is not supported")]
    UnsupportedScale(u32),
    #[error("unknown input `{0}`")]
    UnknownInput(String),
    #[error("unknown output `{0}`")]
    UnknownOutput(String),
    #[error("horizon must be positive")]
    InvalidHorizon,
    #[error("input spike at t={time} on `{name}` is not before the horizon {horizon}")]
    SpikeBeyondHorizon {
        name: String,
        time: u64,
        horizon: u64,
    },
    #[error("value {value} does not fit in {width} bits ({signedness})")]
    ValueOutOfRange {
        value: i64,
        width: u32,
        signedness: &'static str,
    },
    #[error("bit width {0} is not supported")]
    InvalidWidth(u32),
    #[error("unknown leak model `{0}`")]
    UnknownLeakModel(String),
    #[error("delay must be at least 1 timestep")]
    InvalidDelay,
    #[error("brick `{0}` already exists")]
    DuplicateBrick(String),
    #[error("unknown brick `{0}`")]
    UnknownBrick(String),
    #[error("brick `{brick}` has no port `{port}`")]
    UnknownPort { brick: String, port: String },
    #[error("port `{brick}.{port}` is already driven")]
    PortAlreadyDriven { brick: String, port: String },
    #[error("connection `{from}` -> `{to}` would create a brick-level cycle")]
    Cycle { from: String, to: String },
    #[error("external port `{0}` is declared twice")]
    DuplicateExternal(String),
    #[error("unknown circuit `{0}`")]
    UnknownCircuit(String),
    #[error("exhaustive sweep of {circuit} at width {width} exceeds the exhaustive bound (width 8, 2^20 cases)")]
    ExhaustiveBound { circuit: String, width: u32 },
    #[error("missing value for `{0}`")]
    MissingValue(String),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("netlist: {0}")]
    Netlist(String),
}
