//! Integer partitions (Young diagrams) and the invariants used throughout
//! the amplitude formulas.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A partition stored as its nonzero parts in weakly decreasing order.
///
/// Indexing with [`Partition::part`] is 1-based and returns 0 past the
/// stored length, matching the convention `λ = (λ_i)_{i≥1}` with an
/// infinite tail of zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    /// Builds a partition, dropping trailing zeros. Fails if the parts are
    /// not weakly decreasing.
    pub fn new(mut parts: Vec<usize>) -> Result<Self, Error> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(format!("{parts:?} is not weakly decreasing")));
        }
        Ok(Self { parts })
    }

    /// Panicking constructor for literals in tests and internal code.
    pub fn from_slice(parts: &[usize]) -> Self {
        Self::new(parts.to_vec()).expect("invalid partition literal")
    }

    /// The single column `(1^k)`.
    pub fn column(k: usize) -> Self {
        Self { parts: vec![1; k] }
    }

    /// The single row `(k)`.
    pub fn row(k: usize) -> Self {
        if k == 0 {
            Self::empty()
        } else {
            Self { parts: vec![k] }
        }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Number of nonzero parts, ℓ(λ).
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    /// Total number of boxes |λ|.
    pub fn size(&self) -> usize {
        self.parts.iter().sum()
    }

    /// `λ_i` with 1-based `i`; zero beyond the length.
    pub fn part(&self, i: usize) -> usize {
        debug_assert!(i >= 1);
        self.parts.get(i - 1).copied().unwrap_or(0)
    }

    pub fn conjugate(&self) -> Self {
        let first = self.parts.first().copied().unwrap_or(0);
        let parts = (1..=first).map(|i| self.parts.iter().take_while(|&&p| p >= i).count()).collect();
        Self { parts }
    }

    /// Second Casimir invariant `κ(λ) = Σ λ_i (λ_i − 2i + 1)`.
    pub fn kappa(&self) -> i64 {
        self.parts
            .iter()
            .enumerate()
            .map(|(idx, &p)| {
                let (p, i) = (p as i64, idx as i64 + 1);
                p * (p - 2 * i + 1)
            })
            .sum()
    }

    /// Young-diagram containment `μ ⊆ λ`.
    pub fn contains(&self, mu: &Partition) -> bool {
        mu.len() <= self.len() && mu.parts.iter().zip(&self.parts).all(|(m, l)| m <= l)
    }

    /// All sub-diagrams `η ⊆ λ`, in enumeration order.
    pub fn subpartitions(&self) -> Vec<Partition> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(self.len());
        sub_rec(&self.parts, 0, usize::MAX, &mut cur, &mut out);
        out.sort_by(enumeration_order);
        out
    }

    /// Occupied Maya positions `{λ_i − i + 1 : 1 ≤ i ≤ n}`.
    pub fn maya_head(&self, n: usize) -> Vec<i64> {
        (1..=n).map(|i| self.part(i) as i64 - i as i64 + 1).collect()
    }
}

fn sub_rec(bound: &[usize], i: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
    out.push(Partition { parts: cur.clone() });
    if i == bound.len() {
        return;
    }
    for p in 1..=bound[i].min(cap) {
        cur.push(p);
        sub_rec(bound, i + 1, p, cur, out);
        cur.pop();
    }
}

/// Size first, then lexicographically descending parts.
pub fn enumeration_order(a: &Partition, b: &Partition) -> std::cmp::Ordering {
    a.size().cmp(&b.size()).then_with(|| b.parts.cmp(&a.parts))
}

/// Partitions of exactly `n`, lexicographically descending.
pub fn partitions_of(n: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    of_rec(n, n, &mut cur, &mut out);
    out
}

fn of_rec(rest: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
    if rest == 0 {
        out.push(Partition { parts: cur.clone() });
        return;
    }
    for p in (1..=rest.min(cap)).rev() {
        cur.push(p);
        of_rec(rest - p, p, cur, out);
        cur.pop();
    }
}

/// Every partition with `|λ| ≤ max_size`, each once, ordered by size and
/// then lexicographically descending.
pub fn enumerate_partitions(max_size: usize) -> Vec<Partition> {
    (0..=max_size).flat_map(partitions_of).collect()
}

/// Splits `{i ≤ n}` into `{ᵗλ_i − i + 1 : i ≥ 1} ∩ ℤ_{≤n}` and
/// `{−λ_i + i : 1 ≤ i ≤ n}`.
///
/// The first set is infinite below; it is returned as its finitely many
/// elements `≥ floor` together with `floor`, where every integer `< floor`
/// belongs to it. The two returned pieces are disjoint and cover `(−∞, n]`.
pub fn boundary_decomposition(lambda: &Partition, n: usize) -> Result<(BTreeSet<i64>, BTreeSet<i64>, i64), Error> {
    if n < lambda.len() {
        return Err(Error::InvalidArgument(format!(
            "boundary decomposition needs n ≥ ℓ(λ) = {}, got {n}",
            lambda.len()
        )));
    }
    let conj = lambda.conjugate();
    let second: BTreeSet<i64> = (1..=n).map(|i| i as i64 - lambda.part(i) as i64).collect();
    // ᵗλ_i − i + 1 for i > ᵗλ_1 ... is −i + 1, covering everything below 1 − ᵗλ.len().
    let floor = 1 - (conj.len() as i64 + n as i64);
    let first: BTreeSet<i64> =
        (1..=(conj.len() + n)).map(|i| conj.part(i) as i64 - i as i64 + 1).filter(|&v| v <= n as i64).collect();
    Ok((first, second, floor))
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "{}", s.join(","))
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses `"3,1"`; the empty string (or `"∅"`) is the empty partition.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "∅" {
            return Ok(Self::empty());
        }
        let parts = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| Error::InvalidPartition(format!("{s:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(parts)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.parts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let parts = Vec::<usize>::deserialize(d)?;
        Partition::new(parts).map_err(serde::de::Error::custom)
    }
}
