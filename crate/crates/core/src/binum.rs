//! Positive naturals stored as their sets of binary exponents.
//!
//! A [`BinNum`] never materializes its magnitude: 2-apart sets push bit
//! positions far past machine words, so everything here works on the
//! strictly increasing exponent list `n_0 < ... < n_k` of
//! `x = 2^{n_0} + ... + 2^{n_k}`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BinumError {
    #[error("exponent list is empty")]
    Empty,
    #[error("exponents must be strictly increasing")]
    NotIncreasing,
    #[error("zero has no exponent representation")]
    Zero,
    #[error("empty ground set")]
    EmptyGroundSet,
    #[error("insufficient input")]
    InsufficientInput,
    #[error("max_terms must be at least 1")]
    ZeroTerms,
}

/// A positive natural given by its binary exponents.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct BinNum {
    exponents: Vec<u64>,
}

impl BinNum {
    pub fn from_exponents(exponents: Vec<u64>) -> Result<Self, BinumError> {
        if exponents.is_empty() {
            return Err(BinumError::Empty);
        }
        if exponents.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BinumError::NotIncreasing);
        }
        Ok(BinNum { exponents })
    }

    /// `2^e`.
    pub fn power_of_two(e: u64) -> Self {
        BinNum { exponents: vec![e] }
    }

    pub fn from_value(value: u128) -> Result<Self, BinumError> {
        if value == 0 {
            return Err(BinumError::Zero);
        }
        let exponents = (0..128u64).filter(|&i| (value >> i) & 1 == 1).collect();
        Ok(BinNum { exponents })
    }

    /// The magnitude, when it fits in a `u128`.
    pub fn to_value(&self) -> Option<u128> {
        if self.mu() >= 128 {
            return None;
        }
        Some(self.exponents.iter().map(|&e| 1u128 << e).sum())
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    /// Least exponent.
    pub fn lambda(&self) -> u64 {
        self.exponents[0]
    }

    /// Greatest exponent.
    pub fn mu(&self) -> u64 {
        *self.exponents.last().expect("nonempty by construction")
    }

    pub fn lambda_mu(&self) -> (u64, u64) {
        (self.lambda(), self.mu())
    }

    pub fn is_power_of_two(&self) -> bool {
        self.exponents.len() == 1
    }

    /// Exact sum with carry propagation.
    pub fn add(&self, other: &BinNum) -> BinNum {
        let mut counts: BTreeMap<u64, u8> = BTreeMap::new();
        for &e in self.exponents.iter().chain(other.exponents.iter()) {
            *counts.entry(e).or_insert(0) += 1;
        }
        let mut out = Vec::with_capacity(counts.len());
        while let Some((e, c)) = counts.pop_first() {
            if c % 2 == 1 {
                out.push(e);
            }
            if c >= 2 {
                *counts.entry(e + 1).or_insert(0) += c / 2;
            }
        }
        BinNum { exponents: out }
    }

    /// The residue modulo `2^{bits}`, as the list of exponents below `bits`.
    pub fn low_bits(&self, bits: u64) -> &[u64] {
        let end = self.exponents.partition_point(|&e| e < bits);
        &self.exponents[..end]
    }
}

impl TryFrom<Vec<u64>> for BinNum {
    type Error = BinumError;
    fn try_from(v: Vec<u64>) -> Result<Self, Self::Error> {
        BinNum::from_exponents(v)
    }
}

impl From<BinNum> for Vec<u64> {
    fn from(b: BinNum) -> Self {
        b.exponents
    }
}

impl Ord for BinNum {
    fn cmp(&self, other: &Self) -> Ordering {
        // Compare from the top bit down; a list that runs out first is smaller.
        let mut a = self.exponents.iter().rev();
        let mut b = other.exponents.iter().rev();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(x), Some(y)) => match x.cmp(y) {
                    Ordering::Equal => continue,
                    o => return o,
                },
            }
        }
    }
}

impl PartialOrd for BinNum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for BinNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_value() {
            Some(v) => write!(f, "{v}{:?}", self.exponents),
            None => write!(f, "2^{:?}", self.exponents),
        }
    }
}

/// A finite, strictly increasing set of [`BinNum`]s.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<BinNum>", into = "Vec<BinNum>")]
pub struct NumSet {
    elements: Vec<BinNum>,
}

impl NumSet {
    pub fn new(mut elements: Vec<BinNum>) -> Self {
        elements.sort();
        elements.dedup();
        NumSet { elements }
    }

    pub fn from_values(values: &[u128]) -> Result<Self, BinumError> {
        let elements = values
            .iter()
            .map(|&v| BinNum::from_value(v))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(NumSet::new(elements))
    }

    pub fn elements(&self) -> &[BinNum] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: &BinNum) -> bool {
        self.elements.binary_search(x).is_ok()
    }

    /// Drops the first `n` elements.
    pub fn without_prefix(&self, n: usize) -> NumSet {
        NumSet {
            elements: self.elements.iter().skip(n).cloned().collect(),
        }
    }

    /// Magnitudes, when every element fits in a `u128`.
    pub fn to_values(&self) -> Option<Vec<u128>> {
        self.elements.iter().map(BinNum::to_value).collect()
    }
}

impl From<Vec<BinNum>> for NumSet {
    fn from(v: Vec<BinNum>) -> Self {
        NumSet::new(v)
    }
}

impl From<NumSet> for Vec<BinNum> {
    fn from(s: NumSet) -> Self {
        s.elements
    }
}

/// Caps for a finite-sums window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsQuery {
    max_terms: usize,
    value_bound: Option<BinNum>,
}

impl FsQuery {
    pub fn new(max_terms: usize) -> Result<Self, BinumError> {
        if max_terms == 0 {
            return Err(BinumError::ZeroTerms);
        }
        Ok(FsQuery {
            max_terms,
            value_bound: None,
        })
    }

    /// Keeps only sums `<= bound`.
    pub fn with_bound(mut self, bound: BinNum) -> Self {
        self.value_bound = Some(bound);
        self
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn value_bound(&self) -> Option<&BinNum> {
        self.value_bound.as_ref()
    }
}

/// All sums of between 1 and `q.max_terms` distinct elements of `s`.
pub fn fs_enumerate(s: &NumSet, q: &FsQuery) -> Result<NumSet, BinumError> {
    if s.is_empty() {
        return Err(BinumError::EmptyGroundSet);
    }
    let mut sums = BTreeSet::new();
    let elems = s.elements();
    // Depth-first over index-increasing subsets, carrying the running sum.
    let mut stack: Vec<(usize, usize, BinNum)> = elems
        .iter()
        .enumerate()
        .map(|(i, x)| (i, 1, x.clone()))
        .collect();
    while let Some((last, terms, sum)) = stack.pop() {
        if let Some(b) = q.value_bound() {
            // Elements are positive, so extending a sum only grows it.
            if &sum > b {
                continue;
            }
        }
        if terms < q.max_terms() {
            for (j, y) in elems.iter().enumerate().skip(last + 1) {
                stack.push((j, terms + 1, sum.add(y)));
            }
        }
        sums.insert(sum);
    }
    Ok(NumSet {
        elements: sums.into_iter().collect(),
    })
}

/// `mu(x) < lambda(y)` for every consecutive pair `x < y`.
pub fn is_two_apart(s: &NumSet) -> bool {
    s.elements().windows(2).all(|w| w[0].mu() < w[1].lambda())
}

/// Extracts `count` 2-apart elements from an increasing stream, each a sum
/// of distinct stream elements no other output uses.
///
/// The first output is the first stream element. For each later output with
/// `b = mu(previous)`, fresh elements are drawn and their partial sums
/// (starting from the empty sum) are reduced modulo `2^{b+1}`; the first
/// repeated residue in scan order yields a block sum with `lambda > b`. At
/// most `2^{b+1}` draws are needed, so the stream is consumed lazily.
pub fn thin_to_apart<I>(stream: I, count: usize) -> Result<NumSet, BinumError>
where
    I: IntoIterator<Item = BinNum>,
{
    let mut stream = stream.into_iter();
    let mut out: Vec<BinNum> = Vec::with_capacity(count);
    if count == 0 {
        return Ok(NumSet::default());
    }
    out.push(stream.next().ok_or(BinumError::InsufficientInput)?);
    while out.len() < count {
        let bits = out.last().unwrap().mu() + 1;
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        seen.insert(Vec::new(), 0);
        let mut drawn: Vec<BinNum> = Vec::new();
        let mut partial: Option<BinNum> = None;
        let start = loop {
            let x = stream.next().ok_or(BinumError::InsufficientInput)?;
            let p = match &partial {
                None => x.clone(),
                Some(p) => p.add(&x),
            };
            drawn.push(x);
            let residue = p.low_bits(bits).to_vec();
            partial = Some(p);
            if let Some(&i) = seen.get(&residue) {
                break i;
            }
            seen.insert(residue, drawn.len());
        };
        let block = drawn[start..]
            .iter()
            .skip(1)
            .fold(drawn[start].clone(), |acc, y| acc.add(y));
        debug_assert!(block.lambda() >= bits);
        out.push(block);
    }
    Ok(NumSet { elements: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: u128) -> BinNum {
        BinNum::from_value(v).unwrap()
    }

    fn e(x: &[u64]) -> BinNum {
        BinNum::from_exponents(x.to_vec()).unwrap()
    }

    #[test]
    fn lambda_mu_examples() {
        assert_eq!(e(&[1, 3, 6]).lambda_mu(), (1, 6));
        assert_eq!(e(&[0]).lambda_mu(), (0, 0));
        assert_eq!(b(74).lambda_mu(), (1, 6));
        assert!(e(&[9]).is_power_of_two());
    }

    #[test]
    fn rejects_bad_exponents() {
        assert_eq!(BinNum::from_exponents(vec![]), Err(BinumError::Empty));
        assert_eq!(
            BinNum::from_exponents(vec![3, 3]),
            Err(BinumError::NotIncreasing)
        );
        assert_eq!(BinNum::from_value(0), Err(BinumError::Zero));
    }

    #[test]
    fn add_examples() {
        assert_eq!(e(&[1, 3]).add(&e(&[5])), e(&[1, 3, 5]));
        assert_eq!(e(&[1]).add(&e(&[1])), e(&[2]));
        assert_eq!(e(&[0, 1]).add(&e(&[1])), e(&[0, 2]));
        assert_eq!(b(u64::MAX as u128).add(&b(1)), e(&[64]));
    }

    #[test]
    fn ordering_by_value() {
        assert!(b(8) < b(18));
        assert!(b(7) < b(8));
        assert!(e(&[1, 200]) > e(&[199]));
    }

    #[test]
    fn fs_examples() {
        let s = NumSet::from_values(&[2, 4]).unwrap();
        let q2 = FsQuery::new(2).unwrap();
        let q1 = FsQuery::new(1).unwrap();
        assert_eq!(
            fs_enumerate(&s, &q2).unwrap().to_values().unwrap(),
            vec![2, 4, 6]
        );
        assert_eq!(
            fs_enumerate(&s, &q1).unwrap().to_values().unwrap(),
            vec![2, 4]
        );
        let s = NumSet::from_values(&[4, 16, 64]).unwrap();
        assert_eq!(
            fs_enumerate(&s, &q2).unwrap().to_values().unwrap(),
            vec![4, 16, 20, 64, 68, 80]
        );
        let bounded = FsQuery::new(3).unwrap().with_bound(b(68));
        assert_eq!(
            fs_enumerate(&s, &bounded).unwrap().to_values().unwrap(),
            vec![4, 16, 20, 64, 68]
        );
        assert_eq!(
            fs_enumerate(&NumSet::default(), &q1),
            Err(BinumError::EmptyGroundSet)
        );
    }

    #[test]
    fn fs_dedups_colliding_sums() {
        let s = NumSet::from_values(&[1, 2, 3]).unwrap();
        let all = fs_enumerate(&s, &FsQuery::new(3).unwrap()).unwrap();
        assert_eq!(all.to_values().unwrap(), vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn two_apart_examples() {
        assert!(is_two_apart(&NumSet::from_values(&[2, 32, 512]).unwrap()));
        assert!(!is_two_apart(&NumSet::from_values(&[18, 8]).unwrap()));
        assert!(is_two_apart(&NumSet::default()));
        assert!(is_two_apart(&NumSet::from_values(&[7]).unwrap()));
    }

    #[test]
    fn thin_to_apart_examples() {
        let powers = (0..).map(BinNum::power_of_two);
        let t = thin_to_apart(powers, 3).unwrap();
        assert_eq!(t.to_values().unwrap(), vec![1, 2, 4]);

        assert!(thin_to_apart(std::iter::empty(), 0).unwrap().is_empty());

        let stream = [3u128, 5, 6, 7, 9, 10, 11].map(b);
        let t = thin_to_apart(stream, 2).unwrap();
        assert_eq!(t.to_values().unwrap(), vec![3, 16]);
        assert!(is_two_apart(&t));

        let short = [3u128, 5].map(b);
        assert_eq!(thin_to_apart(short, 2), Err(BinumError::InsufficientInput));
    }

    #[test]
    fn serde_uses_exponent_arrays() {
        let s = NumSet::from_values(&[10, 256]).unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), "[[1,3],[8]]");
        let back: NumSet = serde_json::from_str("[[8],[1,3]]").unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<BinNum>("[3,1]").is_err());
    }
}
