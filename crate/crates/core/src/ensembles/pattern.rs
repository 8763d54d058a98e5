use std::fmt;

use crate::error::{invalid, Result};

/// 4x4 binary sampling mask, tiled across a square patch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SamplingPattern {
    mask: [[bool; 4]; 4],
}

const TABLE: [(usize, [[u8; 4]; 4]); 7] = [
    (2, [[0, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1]]),
    (4, [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]),
    (6, [[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 0, 0], [0, 0, 1, 0]]),
    (8, [[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1]]),
    (10, [[0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 1, 1], [1, 1, 0, 1]]),
    (12, [[1, 1, 0, 1], [0, 1, 1, 1], [1, 1, 1, 0], [1, 0, 1, 1]]),
    (14, [[1, 1, 1, 1], [1, 1, 0, 1], [1, 1, 1, 1], [0, 1, 1, 1]]),
];

impl SamplingPattern {
    /// Sampling rates (in sixteenths) with a built-in pattern.
    pub const TABULATED: [usize; 7] = [2, 4, 6, 8, 10, 12, 14];

    pub fn new(mask: [[bool; 4]; 4]) -> Result<Self> {
        let p = Self { mask };
        if p.ones() == 0 {
            return invalid("sampling mask has no ones");
        }
        Ok(p)
    }

    /// Built-in pattern for a rate of `sixteenths / 16`.
    pub fn tabulated(sixteenths: usize) -> Result<Self> {
        let Some((_, bits)) = TABLE.iter().find(|(s, _)| *s == sixteenths) else {
            return invalid(format!(
                "no tabulated sampling pattern for delta = {sixteenths}/16 (use 2, 4, .., 14)"
            ));
        };
        Ok(Self {
            mask: bits.map(|row| row.map(|b| b == 1)),
        })
    }

    /// Built-in pattern whose rate is closest to `delta`, if it matches one exactly.
    pub fn for_delta(delta: f64) -> Result<Self> {
        let sixteenths = (delta * 16.0).round();
        if (delta * 16.0 - sixteenths).abs() > 1e-9 {
            return invalid(format!("delta = {delta} is not a multiple of 1/16"));
        }
        Self::tabulated(sixteenths as usize)
    }

    /// Parses 16 comma-separated bits in row-major order.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let parsed: Vec<&str> = bits.split(',').map(str::trim).collect();
        if parsed.len() != 16 {
            return invalid(format!("mask needs 16 bits, got {}", parsed.len()));
        }
        let mut mask = [[false; 4]; 4];
        for (i, b) in parsed.iter().enumerate() {
            mask[i / 4][i % 4] = match *b {
                "0" => false,
                "1" => true,
                other => return invalid(format!("mask bit must be 0 or 1, got {other:?}")),
            };
        }
        Self::new(mask)
    }

    pub fn mask(&self) -> &[[bool; 4]; 4] {
        &self.mask
    }

    pub fn ones(&self) -> usize {
        self.mask.iter().flatten().filter(|b| **b).count()
    }

    /// Nominal sampling rate `ones / 16`.
    pub fn delta(&self) -> f64 {
        self.ones() as f64 / 16.0
    }

    /// Row-major `size x size` mask built by repeating the pattern.
    pub fn tiled(&self, size: usize) -> Vec<bool> {
        (0..size * size)
            .map(|p| self.mask[(p / size) % 4][(p % size) % 4])
            .collect()
    }
}

impl fmt::Display for SamplingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/16", self.ones())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_counts_match_rates() {
        for s in SamplingPattern::TABULATED {
            let p = SamplingPattern::tabulated(s).unwrap();
            assert_eq!(p.ones(), s);
            let tiled = p.tiled(32);
            assert_eq!(tiled.iter().filter(|b| **b).count(), 64 * s);
        }
        assert!(SamplingPattern::tabulated(3).is_err());
    }

    #[test]
    fn checkerboard_at_half_rate() {
        let p = SamplingPattern::for_delta(0.5).unwrap();
        let tiled = p.tiled(32);
        for r in 0..32 {
            for c in 0..32 {
                assert_eq!(tiled[r * 32 + c], (r + c) % 2 == 0);
            }
        }
    }

    #[test]
    fn parses_user_masks() {
        let p = SamplingPattern::from_bits("1,1,1,1, 1,1,0,1, 1,1,1,1, 0,1,1,1").unwrap();
        assert_eq!(p, SamplingPattern::tabulated(14).unwrap());
        assert!(SamplingPattern::from_bits("1,0,1").is_err());
        assert!(SamplingPattern::from_bits(&["0"; 16].join(",")).is_err());
        assert!(SamplingPattern::from_bits(&["2"; 16].join(",")).is_err());
        assert!(SamplingPattern::for_delta(0.3).is_err());
    }
}
