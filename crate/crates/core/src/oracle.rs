//! Exact ground truth for correlated heavy-hitters.
//!
//! Two independent routes:
//!
//! * [`exact_chh_multipass`] makes four passes over a replayable source using
//!   Misra-Gries candidate generation followed by exact counting of the
//!   candidates, so its memory is bounded by the thresholds rather than the
//!   stream.
//! * [`exact_counts_naive`] counts every primary and every pair in memory;
//!   [`ExactCounts::chh_set`] then applies the definitions directly.
//!
//! Both use strict thresholds: `f_d > φ₁N` and `f_{d,s} > φ₂f_d`.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;

use crate::error::{ChhError, Result};
use crate::fraction::{ceil_u64, Fraction};
use crate::mg::{FrequencyTable, MgSummary};
use crate::source::TupleSource;

pub const DEFAULT_TUPLE_CAP: u64 = 100_000_000;

/// `count > frac · base`, exactly.
pub(crate) fn exceeds(count: u64, frac: &Fraction, base: u64) -> bool {
    BigInt::from(count) * frac.denom() > frac.numer() * BigInt::from(base)
}

/// An exact correlated heavy-hitter with its true counts.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExactChh {
    pub d: Vec<u8>,
    pub s: Vec<u8>,
    pub f_d: u64,
    pub f_ds: u64,
}

/// True primary counts `f_d` and pair counts `f_{d,s}`.
///
/// The naive route fills both maps completely. The multipass route stores
/// primaries that survived candidate generation and pairs whose primary is
/// an exact heavy-hitter and whose secondary survived candidate generation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExactCounts {
    pub n: u64,
    pub primary: HashMap<Vec<u8>, u64>,
    pub pairs: HashMap<(Vec<u8>, Vec<u8>), u64>,
}

impl ExactCounts {
    pub fn f_primary(&self, d: &[u8]) -> Option<u64> {
        self.primary.get(d).copied()
    }

    pub fn f_pair(&self, d: &[u8], s: &[u8]) -> Option<u64> {
        self.pairs.get(&(d.to_vec(), s.to_vec())).copied()
    }

    /// Stored primaries with `f_d > φ₁N`, sorted by key.
    pub fn heavy_primaries(&self, phi1: &Fraction) -> Vec<(Vec<u8>, u64)> {
        let mut out: Vec<_> = self
            .primary
            .iter()
            .filter(|(_, f)| exceeds(**f, phi1, self.n))
            .map(|(d, f)| (d.clone(), *f))
            .collect();
        out.sort_unstable();
        out
    }

    /// Stored pairs meeting both strict thresholds, sorted by `(d, s)`.
    pub fn chh_set(&self, phi1: &Fraction, phi2: &Fraction) -> Vec<ExactChh> {
        let mut out: Vec<_> = self
            .pairs
            .iter()
            .filter_map(|((d, s), f_ds)| {
                let f_d = *self.primary.get(d)?;
                (exceeds(f_d, phi1, self.n) && exceeds(*f_ds, phi2, f_d)).then(|| ExactChh {
                    d: d.clone(),
                    s: s.clone(),
                    f_d,
                    f_ds: *f_ds,
                })
            })
            .collect();
        out.sort_unstable();
        out
    }
}

/// Result of the four-pass oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultipassResult {
    /// Exact primary heavy-hitters with `f_d`, sorted by key.
    pub heavy: Vec<(Vec<u8>, u64)>,
    /// Exact correlated heavy-hitters, sorted by `(d, s)`.
    pub chh: Vec<ExactChh>,
    pub counts: ExactCounts,
}

fn mg_capacity(phi: &Fraction) -> Result<usize> {
    let cap = ceil_u64(&phi.as_ratio().recip()).ok_or_else(|| ChhError::invalid("threshold too small"))?;
    usize::try_from(cap).map_err(|_| ChhError::invalid("threshold too small"))
}

fn check_pass(pass: u32, expected: u64, got: u64) -> Result<()> {
    if expected != got {
        return Err(ChhError::InconsistentInput(format!(
            "pass {pass} saw {got} tuples, pass 1 saw {expected}"
        )));
    }
    Ok(())
}

/// Exact correlated heavy-hitters in four passes over `source`.
///
/// 1. Misra-Gries with capacity `⌈1/φ₁⌉` over primaries yields candidates.
/// 2. Exact counts of the candidates give the primary heavy-hitters.
/// 3. One Misra-Gries summary of capacity `⌈1/φ₂⌉` per heavy-hitter, over its
///    substream, yields secondary candidates.
/// 4. Exact pair counts of those candidates give the final set.
pub fn exact_chh_multipass(source: &dyn TupleSource, phi1: &Fraction, phi2: &Fraction) -> Result<MultipassResult> {
    if !phi1.is_proper() || !phi2.is_proper() {
        return Err(ChhError::invalid("phi1 and phi2 must lie in (0, 1)"));
    }

    let mut primary_mg = MgSummary::new(mg_capacity(phi1)?)?;
    let mut n = 0u64;
    for t in source.open()? {
        primary_mg.update(&t?.x);
        n += 1;
    }

    let mut primary: HashMap<Vec<u8>, u64> = primary_mg.entries().into_iter().map(|(k, _)| (k, 0)).collect();
    let mut seen = 0u64;
    for t in source.open()? {
        let t = t?;
        if let Some(c) = primary.get_mut(&t.x) {
            *c += 1;
        }
        seen += 1;
    }
    check_pass(2, n, seen)?;
    let heavy: HashSet<Vec<u8>> = primary
        .iter()
        .filter(|(_, f)| exceeds(**f, phi1, n))
        .map(|(d, _)| d.clone())
        .collect();

    let cap2 = mg_capacity(phi2)?;
    let mut substreams: HashMap<Vec<u8>, MgSummary> = heavy
        .iter()
        .map(|d| Ok((d.clone(), MgSummary::new(cap2)?)))
        .collect::<Result<_>>()?;
    seen = 0;
    for t in source.open()? {
        let t = t?;
        if let Some(mg) = substreams.get_mut(&t.x) {
            mg.update(&t.y);
        }
        seen += 1;
    }
    check_pass(3, n, seen)?;

    let mut pairs: HashMap<(Vec<u8>, Vec<u8>), u64> = substreams
        .iter()
        .flat_map(|(d, mg)| mg.entries().into_iter().map(move |(s, _)| ((d.clone(), s), 0)))
        .collect();
    seen = 0;
    for t in source.open()? {
        let t = t?;
        if let Some(c) = pairs.get_mut(&(t.x, t.y)) {
            *c += 1;
        }
        seen += 1;
    }
    check_pass(4, n, seen)?;

    let counts = ExactCounts { n, primary, pairs };
    let heavy = counts.heavy_primaries(phi1);
    let chh = counts.chh_set(phi1, phi2);
    Ok(MultipassResult { heavy, chh, counts })
}

/// Full in-memory counts of every primary and pair.
///
/// Fails with [`ChhError::ResourceLimit`] once more than `max_tuples` tuples
/// arrive.
pub fn exact_counts_naive(source: &dyn TupleSource, max_tuples: u64) -> Result<ExactCounts> {
    let mut counts = ExactCounts::default();
    for t in source.open()? {
        let t = t?;
        if counts.n >= max_tuples {
            return Err(ChhError::ResourceLimit(format!(
                "stream exceeds the {max_tuples}-tuple cap for full counting"
            )));
        }
        counts.n += 1;
        *counts.primary.entry(t.x.clone()).or_default() += 1;
        *counts.pairs.entry((t.x, t.y)).or_default() += 1;
    }
    Ok(counts)
}
