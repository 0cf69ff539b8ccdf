//! Deterministic discrete-time spiking neurons and streaming binary
//! arithmetic circuits built from them.
//!
//! Values travel as little-endian temporal binary spike trains (see
//! [`streams`]). Circuits are assembled from [`bricks`], composed in a
//! [`scaffold::Scaffold`] and lowered to a flat [`neuron::Network`].

pub mod brick;
pub mod bricks;
pub mod error;
pub mod netlist;
pub mod neuron;
pub mod scaffold;
pub mod streams;
pub mod verify;

pub use brick::{Brick, BrickBuilder, InPort, OutPort, PortKind, WidthRule};
pub use bricks::{AdderParams, BuildOptions, InequalityVariant, MinMaxMode, MuxParams};
pub use error::{Error, Result};
pub use netlist::{NetlistFile, NETLIST_FORMAT_VERSION};
pub use neuron::{
    run, Injection, Inputs, Leak, LeakMode, Network, NetworkBuilder, NeuronConfig, NeuronId,
    Raster, Simulation, Spike, Synapse,
};
pub use scaffold::{DelayStrategy, LoweredNetwork, NeuronCount, PortSchedule, Scaffold};
pub use streams::{decode, encode, BitStream, Signedness};
pub use verify::{sweep, Circuit, CircuitOptions, Mutation, Report, SweepMode, SweepSpec};
