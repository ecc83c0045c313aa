//! Finite staged enumerations standing in for the halting set, its stage
//! approximations, and indexed families of sets c.e. in it.
//!
//! Traces are monotone: once an element enters it never leaves, so the time
//! an element has spent in the set at stage `s` is fixed by its entry stage.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("stage beyond trace horizon (stage {stage}, horizon {horizon})")]
    BeyondHorizon { stage: u64, horizon: u64 },
    #[error("element {0} entered twice")]
    DuplicateElement(u64),
    #[error("entry ({element}, {stage}) lies past the horizon {horizon}")]
    EntryPastHorizon {
        element: u64,
        stage: u64,
        horizon: u64,
    },
    #[error("no trace with index {0}")]
    NoSuchIndex(usize),
}

/// A staged enumeration of a finite set, defined through `horizon`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleTrace {
    horizon: u64,
    // element -> entry stage
    entries: BTreeMap<u64, u64>,
}

impl OracleTrace {
    pub fn new(
        horizon: u64,
        entries: impl IntoIterator<Item = (u64, u64)>,
    ) -> Result<Self, OracleError> {
        let mut map = BTreeMap::new();
        for (element, stage) in entries {
            if stage > horizon {
                return Err(OracleError::EntryPastHorizon {
                    element,
                    stage,
                    horizon,
                });
            }
            if map.insert(element, stage).is_some() {
                return Err(OracleError::DuplicateElement(element));
            }
        }
        Ok(OracleTrace {
            horizon,
            entries: map,
        })
    }

    pub fn empty(horizon: u64) -> Self {
        OracleTrace {
            horizon,
            entries: BTreeMap::new(),
        }
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// `(element, stage)` pairs in element order.
    pub fn entries(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.entries.iter().map(|(&m, &s)| (m, s))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry_stage(&self, m: u64) -> Option<u64> {
        self.entries.get(&m).copied()
    }

    /// Final membership.
    pub fn contains(&self, m: u64) -> bool {
        self.entries.contains_key(&m)
    }

    /// Membership at stage `s`.
    pub fn member_at(&self, m: u64, s: u64) -> Result<bool, OracleError> {
        self.check_stage(s)?;
        Ok(self.entries.get(&m).is_some_and(|&t| t <= s))
    }

    /// Membership at stage `s`, reading final membership past the horizon.
    ///
    /// A trace records every entry of its set, so past the horizon (which is
    /// at least the settle stage) the stage-`s` set equals the final one.
    pub fn member_settled(&self, m: u64, s: u64) -> bool {
        self.entries.get(&m).is_some_and(|&t| t <= s)
    }

    /// The largest entry stage, 0 for an empty trace.
    pub fn settle_stage(&self) -> u64 {
        self.entries.values().copied().max().unwrap_or(0)
    }

    /// The same entries declared through a later horizon. Never shrinks.
    pub fn with_horizon(&self, horizon: u64) -> Self {
        OracleTrace {
            horizon: horizon.max(self.horizon),
            entries: self.entries.clone(),
        }
    }

    fn check_stage(&self, s: u64) -> Result<(), OracleError> {
        if s > self.horizon {
            return Err(OracleError::BeyondHorizon {
                stage: s,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    /// Elements present at stage `s`, sorted by (entry stage, value).
    fn ranked_at(&self, s: u64) -> Vec<u64> {
        let mut v: Vec<(u64, u64)> = self
            .entries
            .iter()
            .filter(|(_, &t)| t <= s)
            .map(|(&m, &t)| (t, m))
            .collect();
        v.sort_unstable();
        v.into_iter().map(|(_, m)| m).collect()
    }

    /// Distinct entry stages, ascending.
    fn change_stages(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.entries.values().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Wire form: `{"horizon": H, "entries": [[m, s], ...]}`.
#[derive(Serialize, Deserialize)]
struct TraceWire {
    horizon: u64,
    entries: Vec<(u64, u64)>,
}

impl Serialize for OracleTrace {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        TraceWire {
            horizon: self.horizon,
            entries: self.entries().collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for OracleTrace {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let w = TraceWire::deserialize(de)?;
        OracleTrace::new(w.horizon, w.entries).map_err(serde::de::Error::custom)
    }
}

/// Traces indexed contiguously from 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EnumFamily {
    traces: Vec<OracleTrace>,
}

impl EnumFamily {
    pub fn new(traces: Vec<OracleTrace>) -> Self {
        EnumFamily { traces }
    }

    pub fn traces(&self) -> &[OracleTrace] {
        &self.traces
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn trace(&self, e: usize) -> Result<&OracleTrace, OracleError> {
        self.traces.get(e).ok_or(OracleError::NoSuchIndex(e))
    }

    /// Smallest horizon over the family (`u64::MAX` when empty).
    pub fn min_horizon(&self) -> u64 {
        self.traces
            .iter()
            .map(|t| t.horizon)
            .min()
            .unwrap_or(u64::MAX)
    }

    /// Every trace extended to at least `horizon`.
    pub fn with_horizon(&self, horizon: u64) -> Self {
        EnumFamily {
            traces: self
                .traces
                .iter()
                .map(|t| t.with_horizon(horizon))
                .collect(),
        }
    }
}

/// The `n` first elements of `W_e[s]` under the entry-stage order, or
/// `[0, n)` when fewer than `n` are present.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Approximant {
    pub e: usize,
    pub n: usize,
    pub s: u64,
    /// In rank order (entry stage, then value).
    pub elements: Vec<u64>,
    pub fallback: bool,
}

impl Approximant {
    /// Elements in ascending numeric order.
    pub fn sorted(&self) -> Vec<u64> {
        let mut v = self.elements.clone();
        v.sort_unstable();
        v
    }

    pub fn same_set(&self, other: &Approximant) -> bool {
        self.sorted() == other.sorted()
    }
}

fn build_approximant(trace: &OracleTrace, e: usize, n: usize, s: u64) -> Approximant {
    let ranked = trace.ranked_at(s);
    if ranked.len() < n {
        Approximant {
            e,
            n,
            s,
            elements: (0..n as u64).collect(),
            fallback: true,
        }
    } else {
        Approximant {
            e,
            n,
            s,
            elements: ranked[..n].to_vec(),
            fallback: false,
        }
    }
}

pub fn member_at(trace: &OracleTrace, m: u64, s: u64) -> Result<bool, OracleError> {
    trace.member_at(m, s)
}

pub fn settle_stage(trace: &OracleTrace) -> u64 {
    trace.settle_stage()
}

/// `E_e^n[s]`.
pub fn approximant(
    fam: &EnumFamily,
    e: usize,
    n: usize,
    s: u64,
) -> Result<Approximant, OracleError> {
    let trace = fam.trace(e)?;
    trace.check_stage(s)?;
    Ok(build_approximant(trace, e, n, s))
}

/// The limit `E_e^n` and the least stage from which it holds through the
/// horizon.
pub fn stable_approximant(
    fam: &EnumFamily,
    e: usize,
    n: usize,
) -> Result<(Approximant, u64), OracleError> {
    let runs = approximant_runs(fam, e, n)?;
    let (start, last) = runs.into_iter().last().expect("at least one run");
    Ok((last, start))
}

/// `E_e^n[s]` as a piecewise-constant function of `s` over `[0, horizon]`:
/// `(first stage, value)` pairs, first stage ascending, adjacent values
/// distinct as sets. The value only changes at entry stages.
pub fn approximant_runs(
    fam: &EnumFamily,
    e: usize,
    n: usize,
) -> Result<Vec<(u64, Approximant)>, OracleError> {
    let trace = fam.trace(e)?;
    let mut stages = vec![0];
    stages.extend(trace.change_stages().into_iter().filter(|&s| s > 0));
    let mut runs: Vec<(u64, Approximant)> = Vec::new();
    for s in stages {
        let a = build_approximant(trace, e, n, s);
        match runs.last() {
            Some((_, prev)) if prev.same_set(&a) => {}
            _ => runs.push((s, a)),
        }
    }
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(entries: &[(u64, u64)], horizon: u64) -> EnumFamily {
        EnumFamily::new(vec![
            OracleTrace::new(horizon, entries.iter().copied()).unwrap()
        ])
    }

    #[test]
    fn member_at_examples() {
        let t = OracleTrace::new(10, [(0, 3)]).unwrap();
        assert!(!t.member_at(0, 2).unwrap());
        assert!(t.member_at(0, 3).unwrap());
        let t = OracleTrace::new(10, [(0, 3), (4, 1)]).unwrap();
        assert!(t.member_at(4, 5).unwrap());
        assert_eq!(
            t.member_at(4, 11),
            Err(OracleError::BeyondHorizon {
                stage: 11,
                horizon: 10
            })
        );
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            OracleTrace::new(5, [(1, 2), (1, 3)]),
            Err(OracleError::DuplicateElement(1))
        );
        assert!(matches!(
            OracleTrace::new(5, [(1, 6)]),
            Err(OracleError::EntryPastHorizon { .. })
        ));
    }

    #[test]
    fn settle_stage_examples() {
        assert_eq!(OracleTrace::new(9, [(0, 3)]).unwrap().settle_stage(), 3);
        assert_eq!(OracleTrace::empty(9).settle_stage(), 0);
        assert_eq!(
            OracleTrace::new(9, [(0, 3), (4, 7)])
                .unwrap()
                .settle_stage(),
            7
        );
    }

    #[test]
    fn approximant_examples() {
        let f = fam(&[(9, 1), (4, 2), (7, 2)], 5);
        let a = approximant(&f, 0, 2, 3).unwrap();
        assert_eq!(a.elements, vec![9, 4]);
        assert!(!a.fallback);

        let f = fam(&[], 5);
        let a = approximant(&f, 0, 3, 5).unwrap();
        assert_eq!(a.elements, vec![0, 1, 2]);
        assert!(a.fallback);

        let a = approximant(&f, 0, 0, 5).unwrap();
        assert!(a.elements.is_empty());
        assert!(!a.fallback);

        assert_eq!(approximant(&f, 1, 1, 0), Err(OracleError::NoSuchIndex(1)));
        assert!(matches!(
            approximant(&f, 0, 1, 6),
            Err(OracleError::BeyondHorizon { .. })
        ));
    }

    #[test]
    fn stable_approximant_examples() {
        let (a, s) = stable_approximant(&fam(&[(9, 1)], 4), 0, 1).unwrap();
        assert_eq!(a.elements, vec![9]);
        assert!(s <= 1);

        let (a, s) = stable_approximant(&fam(&[(9, 1), (4, 2)], 4), 0, 2).unwrap();
        assert_eq!(a.elements, vec![9, 4]);
        assert_eq!(s, 2);

        let (a, s) = stable_approximant(&fam(&[], 4), 0, 2).unwrap();
        assert_eq!(a.elements, vec![0, 1]);
        assert!(a.fallback);
        assert_eq!(s, 0);
    }

    #[test]
    fn runs_ignore_entries_outside_the_prefix() {
        // A late small element ranks after the earlier ones, so E^1 never moves.
        let f = fam(&[(9, 1), (0, 4)], 6);
        let runs = approximant_runs(&f, 0, 1).unwrap();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].0, 0);
        assert!(runs[0].1.fallback);
        assert_eq!(runs[1].0, 1);
        assert_eq!(runs[1].1.elements, vec![9]);
    }

    #[test]
    fn trace_wire_format() {
        let t: OracleTrace = serde_json::from_str(r#"{"horizon":16,"entries":[[0,3]]}"#).unwrap();
        assert_eq!(t.settle_stage(), 3);
        assert_eq!(
            serde_json::to_string(&t).unwrap(),
            r#"{"horizon":16,"entries":[[0,3]]}"#
        );
        assert!(serde_json::from_str::<OracleTrace>(r#"{"horizon":2,"entries":[[0,3]]}"#).is_err());
    }
}
