//! The nested correlated heavy-hitter sketch.
//!
//! The outer table maps each retained primary key `d` to an estimated count
//! `f̂_d` and an inner Misra-Gries table of secondary keys seen with `d`. The
//! outer table holds at most `s1` entries, each inner table at most `s2`.
//!
//! On an outer overflow every primary count drops by one and, to keep the
//! inner counts summing to at most `f̂_d`, one inner count drops with it. The
//! inner key chosen is always the byte-lexicographically smallest one.

use std::collections::HashMap;

use num_rational::BigRational;

use crate::error::{ChhError, Result};
use crate::mg::{FrequencyTable, MgSummary};
use crate::params::ChhParams;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimaryEntry<T = MgSummary> {
    pub est_count: u64,
    pub inner: T,
}

/// Which branch of the update rule a tuple took.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    /// Primary and secondary both already tracked.
    BothPresent,
    /// Primary tracked, secondary inserted into its inner table.
    SecondaryInserted,
    /// New primary entry created.
    PrimaryInserted,
}

/// Work done by a single update, in entry operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UpdateTrace {
    pub scenario: Scenario,
    /// Primary entries decremented by an outer overflow (0 or `s1 + 1`).
    pub primary_decrements: usize,
    /// Inner entries decremented by an inner overflow (0 or `s2 + 1`).
    pub secondary_decrements: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportedPair {
    pub key: Vec<u8>,
    pub est_count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportedPrimary {
    pub key: Vec<u8>,
    pub est_count: u64,
    pub pairs: Vec<ReportedPair>,
}

/// Reported primaries, sorted by key, each with its reported secondaries
/// sorted by key.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChhReport {
    pub n: u64,
    pub primaries: Vec<ReportedPrimary>,
}

impl ChhReport {
    pub fn is_empty(&self) -> bool {
        self.primaries.is_empty()
    }

    pub fn pair_count(&self) -> usize {
        self.primaries.iter().map(|p| p.pairs.len()).sum()
    }

    pub fn contains_primary(&self, d: &[u8]) -> bool {
        self.primaries.binary_search_by(|p| p.key.as_slice().cmp(d)).is_ok()
    }

    pub fn contains_pair(&self, d: &[u8], s: &[u8]) -> bool {
        match self.primaries.binary_search_by(|p| p.key.as_slice().cmp(d)) {
            Ok(i) => self.primaries[i]
                .pairs
                .binary_search_by(|p| p.key.as_slice().cmp(s))
                .is_ok(),
            Err(_) => false,
        }
    }

    /// `(d, s, f̂_{d,s})` for every reported pair, in report order.
    pub fn pairs(&self) -> impl Iterator<Item = (&[u8], &[u8], u64)> {
        self.primaries.iter().flat_map(|p| {
            p.pairs
                .iter()
                .map(move |q| (p.key.as_slice(), q.key.as_slice(), q.est_count))
        })
    }
}

#[derive(Clone, Debug)]
pub struct ChhSketch<T: FrequencyTable = MgSummary> {
    params: ChhParams,
    n: u64,
    table: HashMap<Vec<u8>, PrimaryEntry<T>>,
}

fn capacity(s: u64) -> Result<usize> {
    usize::try_from(s).map_err(|_| ChhError::invalid(format!("table size {s} exceeds the address space")))
}

impl<T: FrequencyTable> ChhSketch<T> {
    pub fn new(params: ChhParams) -> Result<Self> {
        if params.s1 == 0 || params.s2 == 0 {
            return Err(ChhError::invalid("s1 and s2 must be at least 1"));
        }
        capacity(params.s1)?;
        capacity(params.s2)?;
        Ok(ChhSketch {
            params,
            n: 0,
            table: HashMap::new(),
        })
    }

    /// Reassembles a sketch from exported state, checking every structural
    /// invariant.
    pub fn from_parts(params: ChhParams, n: u64, entries: Vec<(Vec<u8>, PrimaryEntry<T>)>) -> Result<Self> {
        let mut sketch = Self::new(params)?;
        if entries.len() as u64 > sketch.params.s1 {
            return Err(ChhError::invalid("more primary entries than s1"));
        }
        for (d, e) in entries {
            if e.est_count == 0 {
                return Err(ChhError::invalid("primary counts must be positive"));
            }
            if e.inner.capacity() as u64 != sketch.params.s2 {
                return Err(ChhError::invalid("inner table capacity differs from s2"));
            }
            if e.inner.total() > e.est_count {
                return Err(ChhError::invalid("inner counts exceed the primary count"));
            }
            if e.est_count > n {
                return Err(ChhError::invalid("primary count exceeds stream length"));
            }
            if sketch.table.insert(d, e).is_some() {
                return Err(ChhError::invalid("duplicate primary key"));
            }
        }
        sketch.n = n;
        Ok(sketch)
    }

    pub fn params(&self) -> &ChhParams {
        &self.params
    }

    /// Stream length so far.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn update(&mut self, x: &[u8], y: &[u8]) -> UpdateTrace {
        self.n += 1;
        if let Some(entry) = self.table.get_mut(x) {
            entry.est_count += 1;
            let scenario = if entry.inner.estimate(y) > 0 {
                Scenario::BothPresent
            } else {
                Scenario::SecondaryInserted
            };
            let secondary_decrements = entry.inner.update(y);
            return UpdateTrace {
                scenario,
                primary_decrements: 0,
                secondary_decrements,
            };
        }

        let mut inner = T::with_capacity(self.params.s2 as usize).expect("s2 validated at construction");
        inner.update(y);
        self.table.insert(x.to_vec(), PrimaryEntry { est_count: 1, inner });

        let mut primary_decrements = 0;
        if self.table.len() as u64 > self.params.s1 {
            primary_decrements = self.table.len();
            self.table.retain(|_, e| {
                e.est_count -= 1;
                e.inner.decrement_smallest();
                e.est_count > 0
            });
        }
        UpdateTrace {
            scenario: Scenario::PrimaryInserted,
            primary_decrements,
            secondary_decrements: 0,
        }
    }

    /// `f̂_d`, zero when `d` is not retained.
    pub fn estimate_primary(&self, d: &[u8]) -> u64 {
        self.table.get(d).map_or(0, |e| e.est_count)
    }

    /// `f̂_{d,s}`, zero when either key is not retained.
    pub fn estimate_pair(&self, d: &[u8], s: &[u8]) -> u64 {
        self.table.get(d).map_or(0, |e| e.inner.estimate(s))
    }

    pub fn entry(&self, d: &[u8]) -> Option<&PrimaryEntry<T>> {
        self.table.get(d)
    }

    /// Retained entries sorted by primary key.
    pub fn entries(&self) -> Vec<(&[u8], &PrimaryEntry<T>)> {
        let mut out: Vec<_> = self.table.iter().map(|(k, e)| (k.as_slice(), e)).collect();
        out.sort_unstable_by(|a, b| a.0.cmp(b.0));
        out
    }

    /// Total number of stored counters, outer plus inner.
    pub fn stored_counters(&self) -> usize {
        self.table.values().map(|e| 1 + e.inner.len()).sum()
    }

    /// Every primary with `f̂_d ≥ (φ₁ − 1/s1)·N`, each with every secondary
    /// having `f̂_{d,s} ≥ (φ₂ − 1/s2)·f̂_d − N/s1`.
    ///
    /// Comparisons are exact; the current stream length serves as `N`.
    pub fn report(&self) -> ChhReport {
        let p = &self.params;
        let n = BigRational::from_integer(self.n.into());
        let inv_s1 = BigRational::from_integer(p.s1.into()).recip();
        let inv_s2 = BigRational::from_integer(p.s2.into()).recip();
        let primary_threshold = (p.phi1.as_ratio() - &inv_s1) * &n;
        let secondary_slope = p.phi2.as_ratio() - &inv_s2;
        let secondary_offset = &n * &inv_s1;

        let mut primaries = Vec::new();
        for (d, entry) in self.entries() {
            let est = BigRational::from_integer(entry.est_count.into());
            if est < primary_threshold {
                continue;
            }
            let threshold = &secondary_slope * &est - &secondary_offset;
            let pairs = entry
                .inner
                .entries()
                .into_iter()
                .filter(|(_, c)| BigRational::from_integer((*c).into()) >= threshold)
                .map(|(key, est_count)| ReportedPair { key, est_count })
                .collect();
            primaries.push(ReportedPrimary {
                key: d.to_vec(),
                est_count: entry.est_count,
                pairs,
            });
        }
        ChhReport { n: self.n, primaries }
    }
}
