//! Little-endian temporal binary: bit `t` of a `k`-bit value is a spike (1) or
//! silence (0) at timestep `offset + t`, least significant bit first.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neuron::{NeuronId, Raster};

/// Widest stream the encoder accepts.
pub const MAX_WIDTH: u32 = 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signedness {
    #[default]
    Unsigned,
    TwosComplement,
}

impl Signedness {
    fn label(self) -> &'static str {
        match self {
            Signedness::Unsigned => "unsigned",
            Signedness::TwosComplement => "twos_complement",
        }
    }

    /// Inclusive value range for `width` bits.
    pub fn range(self, width: u32) -> (i64, i64) {
        match self {
            Signedness::Unsigned => (0, (1i64 << width) - 1),
            Signedness::TwosComplement => (-(1i64 << (width - 1)), (1i64 << (width - 1)) - 1),
        }
    }
}

impl fmt::Display for Signedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// An integer tied to the window of timesteps that carries it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitStream {
    pub value: i64,
    pub width: u32,
    pub offset: u64,
    pub signedness: Signedness,
}

impl BitStream {
    pub fn new(value: i64, width: u32, offset: u64, signedness: Signedness) -> Result<Self> {
        check_range(value, width, signedness)?;
        Ok(BitStream {
            value,
            width,
            offset,
            signedness,
        })
    }

    pub fn unsigned(value: i64, width: u32) -> Result<Self> {
        Self::new(value, width, 0, Signedness::Unsigned)
    }

    pub fn spikes(&self) -> Vec<u64> {
        pattern_times(self.value, self.width, self.offset)
    }
}

fn check_range(value: i64, width: u32, signedness: Signedness) -> Result<()> {
    if width == 0 || width > MAX_WIDTH {
        return Err(Error::InvalidWidth(width));
    }
    let (lo, hi) = signedness.range(width);
    if value < lo || value > hi {
        return Err(Error::ValueOutOfRange {
            value,
            width,
            signedness: signedness.label(),
        });
    }
    Ok(())
}

fn pattern_times(value: i64, width: u32, offset: u64) -> Vec<u64> {
    let bits = (value as u64) & ((1u64 << width) - 1);
    (0..width)
        .filter(|t| bits >> t & 1 == 1)
        .map(|t| offset + t as u64)
        .collect()
}

/// Spike times carrying `value` over `width` steps starting at `offset`.
pub fn encode(value: i64, width: u32, offset: u64, signedness: Signedness) -> Result<Vec<u64>> {
    check_range(value, width, signedness)?;
    Ok(pattern_times(value, width, offset))
}

/// Read `width` bits from spike times; anything outside the window is ignored.
pub fn decode_times(times: &[u64], offset: u64, width: u32, signedness: Signedness) -> i64 {
    assert!(
        (1..=MAX_WIDTH).contains(&width),
        "width {width} unsupported"
    );
    let mut bits = 0u64;
    for &t in times {
        if t >= offset && t < offset + width as u64 {
            bits |= 1 << (t - offset);
        }
    }
    match signedness {
        Signedness::Unsigned => bits as i64,
        Signedness::TwosComplement => {
            let shift = 64 - width;
            ((bits << shift) as i64) >> shift
        }
    }
}

pub fn decode(
    raster: &Raster,
    neuron: NeuronId,
    offset: u64,
    width: u32,
    signedness: Signedness,
) -> i64 {
    decode_times(&raster.spike_times(neuron), offset, width, signedness)
}

/// Overflow room: one more timestep holds the carry.
pub fn extend(width: u32) -> u32 {
    width + 1
}
