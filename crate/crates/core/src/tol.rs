//! Global comparison tolerances.
//!
//! Equality checks on O(1) quantities use an absolute tolerance, everything
//! else a relative one. Both can be overridden process-wide.

use std::sync::atomic::{AtomicU64, Ordering};

pub const DEFAULT_ABS: f64 = 1e-10;
pub const DEFAULT_REL: f64 = 1e-9;

static ABS_BITS: AtomicU64 = AtomicU64::new(0x3DDB_7CDF_D9D7_BDBB); // 1e-10
static REL_BITS: AtomicU64 = AtomicU64::new(0x3E11_2E0B_E826_D695); // 1e-9

pub fn abs() -> f64 {
    f64::from_bits(ABS_BITS.load(Ordering::Relaxed))
}

pub fn rel() -> f64 {
    f64::from_bits(REL_BITS.load(Ordering::Relaxed))
}

pub fn set_abs(value: f64) {
    ABS_BITS.store(value.to_bits(), Ordering::Relaxed);
}

pub fn set_rel(value: f64) {
    REL_BITS.store(value.to_bits(), Ordering::Relaxed);
}

/// `|a - b| <= abs` for O(1) quantities.
pub fn close_abs(a: f64, b: f64) -> bool {
    (a - b).abs() <= abs()
}

/// `|a - b| <= rel * max(|a|, |b|)`, falling back to the absolute tolerance near zero.
pub fn close_rel(a: f64, b: f64) -> bool {
    let scale = a.abs().max(b.abs());
    (a - b).abs() <= (rel() * scale).max(abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_bits_decode() {
        assert_eq!(abs(), DEFAULT_ABS);
        assert_eq!(rel(), DEFAULT_REL);
    }
}
