//! Integer reference semantics for every library circuit.
//!
//! Plain integer arithmetic only; nothing here touches the simulator.

fn mask(width: u32) -> i64 {
    (1i64 << width) - 1
}

pub fn add(a: i64, b: i64) -> i64 {
    a + b
}

/// Bitwise complement within a `width`-bit window.
pub fn not(x: i64, width: u32) -> i64 {
    !x & mask(width)
}

/// Carry out of bit `width` in the ones'-complement difference `A + inv(B)`.
pub fn ones_complement_carry(a: i64, b: i64, width: u32) -> bool {
    (a + not(b, width)) >> width & 1 == 1
}

pub fn greater(a: i64, b: i64) -> bool {
    a > b
}

pub fn mux(a: i64, b: i64, select: bool) -> i64 {
    if select {
        b
    } else {
        a
    }
}

pub fn min(a: i64, b: i64) -> i64 {
    a.min(b)
}

pub fn max(a: i64, b: i64) -> i64 {
    a.max(b)
}

/// `A + (inv(B) + 1)` over `width + 1` bits, read back as two's complement.
pub fn twos_complement_difference(a: i64, b: i64, width: u32) -> i64 {
    let w = width + 1;
    let raw = (a + not(b, w) + 1) & mask(w);
    if raw >> width & 1 == 1 {
        raw - (1i64 << w)
    } else {
        raw
    }
}

pub fn sub(a: i64, b: i64) -> i64 {
    a - b
}

pub fn mul(a: i64, b: i64) -> i64 {
    a * b
}
