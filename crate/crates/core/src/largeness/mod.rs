//! Largeness relative to a binary function, the splitting step that keeps
//! both halves large, and the layered hard coloring built by iterating it.
//!
//! Everything is evaluated on a finite window `[0, W)`: "for all
//! sufficiently large `s`" becomes "for every audited `s` past the point
//! where all later stages are acceptable and `s + E` still fits".

mod gfn;
mod hard;
mod split;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lll::{AuditVerdict, LllError};
use crate::oracle::OracleError;

pub use gfn::{g_inequality, make_g, GFunction, Pairing};
pub use hard::{
    immunity_audit, iterate, iterate_with_g, HardInstance, ImmunityOutcome, ImmunityVerdict,
    LayerExport, LayerStack, LevelReport, StackExport,
};
pub use split::{
    acceptable, acceptable_stages, blocks, split, BlockFamily, BlockTag, CellAudit, LargenessAudit,
    LargenessCounterexample, SplitOutcome,
};

#[derive(Debug, Error)]
pub enum LargenessError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Lll(#[from] LllError),
    #[error("family horizon {horizon} does not cover the window up to stage {needed}")]
    HorizonTooShort { horizon: u64, needed: u64 },
    #[error("stage {s} is not acceptable for (e = {e}, k = {k})")]
    NotAcceptable { s: u64, e: usize, k: u64 },
    #[error("block family fails its occurrence audit")]
    AuditFailed(Box<AuditVerdict>),
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("g minimum {g_min} is below the LLL size bound {m}")]
    GBelowM { g_min: u64, m: usize },
    #[error("malformed layer bitmap: {0}")]
    BadBitmap(String),
    #[error("color {color} is outside 0..={depth}")]
    ColorOutOfRange { color: u64, depth: usize },
    #[error("element {element} lies outside the window [0, {window})")]
    OutsideWindow { element: u64, window: u64 },
    #[error("unsupported export format {0}")]
    Format(u32),
}

/// `f(e, k)`, either the base `f_0(e, k) = k` or a hat
/// `f_hat(e, k) = f(e, k * g(e, k))`.
///
/// Arithmetic saturates; a saturated value is larger than any window, so
/// the sets it sizes never fit and are never audited.
#[derive(Clone, Debug)]
pub enum BinaryFn {
    Identity,
    Hat {
        base: Arc<BinaryFn>,
        g: Arc<GFunction>,
    },
}

impl BinaryFn {
    pub fn eval(&self, e: u64, k: u64) -> u64 {
        match self {
            BinaryFn::Identity => k,
            BinaryFn::Hat { base, g } => base.eval(e, k.saturating_mul(g.eval(e, k))),
        }
    }

    pub fn hat(self: &Arc<Self>, g: &Arc<GFunction>) -> BinaryFn {
        BinaryFn::Hat {
            base: Arc::clone(self),
            g: Arc::clone(g),
        }
    }

    /// Number of hats over the base.
    pub fn level(&self) -> usize {
        match self {
            BinaryFn::Identity => 0,
            BinaryFn::Hat { base, .. } => 1 + base.level(),
        }
    }

    pub fn description(&self) -> String {
        match self {
            BinaryFn::Identity => "f0(e,k) = k".to_string(),
            BinaryFn::Hat { .. } => format!(
                "f{}(e,k) = f{}(e, k*g(e,k))",
                self.level(),
                self.level() - 1
            ),
        }
    }
}

impl fmt::Display for BinaryFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.description())
    }
}

/// A set of naturals: all of `N`, or a membership bitmap over `[0, W)`.
/// Outside its bitmap a windowed set reads as empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LargeSet {
    Naturals,
    Window(Vec<bool>),
}

impl LargeSet {
    pub fn contains(&self, n: u64) -> bool {
        match self {
            LargeSet::Naturals => true,
            LargeSet::Window(bits) => bits.get(n as usize).copied().unwrap_or(false),
        }
    }

    pub fn enumerate_up_to(&self, bound: u64) -> Vec<u64> {
        (0..=bound).filter(|&n| self.contains(n)).collect()
    }

    /// Membership bitmap over `[0, window)`.
    pub fn bitmap(&self, window: u64) -> Vec<bool> {
        (0..window).map(|n| self.contains(n)).collect()
    }
}

/// Hex encoding of a bitmap: byte `j` holds elements `8j..8j+8`, least
/// significant bit first.
pub fn bitmap_to_hex(bits: &[bool]) -> String {
    let bytes: Vec<u8> = bits
        .chunks(8)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u8, |b, (i, &on)| b | ((on as u8) << i))
        })
        .collect();
    hex::encode(bytes)
}

pub fn bitmap_from_hex(s: &str, len: usize) -> Result<Vec<bool>, LargenessError> {
    let bytes = hex::decode(s).map_err(|e| LargenessError::BadBitmap(e.to_string()))?;
    if bytes.len() != len.div_ceil(8) {
        return Err(LargenessError::BadBitmap(format!(
            "expected {} bytes, found {}",
            len.div_ceil(8),
            bytes.len()
        )));
    }
    Ok((0..len).map(|n| bytes[n / 8] >> (n % 8) & 1 == 1).collect())
}

/// `f` tabulated on `e < e_count`, `1 <= k <= k_max`, as `[e, k, f(e,k)]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FnTable {
    pub level: usize,
    pub grid: Vec<[u64; 3]>,
}

impl FnTable {
    pub fn of(f: &BinaryFn, e_count: usize, k_max: u64) -> Self {
        let grid = (0..e_count as u64)
            .flat_map(|e| (1..=k_max).map(move |k| [e, k, f.eval(e, k)]))
            .collect();
        FnTable {
            level: f.level(),
            grid,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hats_compose() {
        let g = Arc::new(make_g(13, Pairing::Cantor));
        let f0 = Arc::new(BinaryFn::Identity);
        let f1 = Arc::new(f0.hat(&g));
        let f2 = f1.hat(&g);
        assert_eq!(f0.eval(3, 7), 7);
        assert_eq!(f1.eval(0, 1), 15);
        assert_eq!(f1.eval(0, 2), 2 * 18);
        assert_eq!(f2.eval(0, 1), 15 * 148);
        assert_eq!(f2.level(), 2);
    }

    #[test]
    fn bitmap_hex_round_trip() {
        let bits: Vec<bool> = (0..21).map(|i| i % 3 == 0).collect();
        let h = bitmap_to_hex(&bits);
        assert_eq!(&h[..2], "49");
        assert_eq!(bitmap_from_hex(&h, 21).unwrap(), bits);
        assert!(bitmap_from_hex(&h, 40).is_err());
        assert!(bitmap_from_hex("zz", 8).is_err());
    }

    #[test]
    fn windowed_sets() {
        let d = LargeSet::Window(vec![true, false, true]);
        assert!(d.contains(2));
        assert!(!d.contains(7));
        assert_eq!(d.enumerate_up_to(10), vec![0, 2]);
        assert!(LargeSet::Naturals.contains(u64::MAX));
    }
}
