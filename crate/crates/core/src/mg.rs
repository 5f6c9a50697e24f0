//! One-dimensional Misra-Gries summaries.
//!
//! [`MgSummary`] is the reference implementation: it decrements every entry
//! eagerly when the table overflows. [`OffsetMgSummary`] produces identical
//! entries but replaces the per-entry decrement with a shared offset, so an
//! overflow costs only the entries it evicts. Both implement
//! [`FrequencyTable`], which is what the correlated sketch embeds per primary
//! key.
//!
//! Keys are opaque byte strings. Counts are `u64`.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{ChhError, Result};

/// A bounded key → count table with Misra-Gries overflow semantics.
///
/// Implementations must agree bit-for-bit on [`entries`](Self::entries) after
/// any sequence of `update` / `decrement_smallest` calls.
pub trait FrequencyTable: Clone + std::fmt::Debug + Send + Sync {
    fn with_capacity(capacity: usize) -> Result<Self>;

    /// Rebuilds a table from previously exported state.
    fn from_parts(capacity: usize, items_seen: u64, entries: Vec<(Vec<u8>, u64)>) -> Result<Self>;

    fn capacity(&self) -> usize;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of `update` calls applied.
    fn items_seen(&self) -> u64;

    /// Counts `key` once. If the table then holds more than `capacity`
    /// entries every count drops by one and zeros are evicted.
    ///
    /// Returns the number of entries the decrement round touched (0 when no
    /// overflow happened).
    fn update(&mut self, key: &[u8]) -> usize;

    fn estimate(&self, key: &[u8]) -> u64;

    /// Decrements the byte-lexicographically smallest key, evicting it at
    /// zero. Returns false on an empty table.
    fn decrement_smallest(&mut self) -> bool;

    /// Sum of all stored counts.
    fn total(&self) -> u64;

    /// All entries sorted by key.
    fn entries(&self) -> Vec<(Vec<u8>, u64)>;
}

fn check_parts(capacity: usize, entries: &[(Vec<u8>, u64)]) -> Result<()> {
    if capacity == 0 {
        return Err(ChhError::invalid("capacity must be at least 1"));
    }
    if entries.len() > capacity {
        return Err(ChhError::invalid(format!(
            "{} entries exceed capacity {capacity}",
            entries.len()
        )));
    }
    if entries.iter().any(|(_, c)| *c == 0) {
        return Err(ChhError::invalid("stored counts must be positive"));
    }
    if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(ChhError::invalid("entries must be strictly sorted by key"));
    }
    Ok(())
}

/// Misra-Gries summary with eager per-entry decrement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MgSummary {
    capacity: usize,
    counts: BTreeMap<Vec<u8>, u64>,
    items_seen: u64,
}

impl MgSummary {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(ChhError::invalid("capacity must be at least 1"));
        }
        Ok(MgSummary {
            capacity,
            counts: BTreeMap::new(),
            items_seen: 0,
        })
    }
}

impl FrequencyTable for MgSummary {
    fn with_capacity(capacity: usize) -> Result<Self> {
        Self::new(capacity)
    }

    fn from_parts(capacity: usize, items_seen: u64, entries: Vec<(Vec<u8>, u64)>) -> Result<Self> {
        check_parts(capacity, &entries)?;
        Ok(MgSummary {
            capacity,
            counts: entries.into_iter().collect(),
            items_seen,
        })
    }

    fn capacity(&self) -> usize {
        self.capacity
    }

    fn len(&self) -> usize {
        self.counts.len()
    }

    fn items_seen(&self) -> u64 {
        self.items_seen
    }

    fn update(&mut self, key: &[u8]) -> usize {
        self.items_seen += 1;
        if let Some(c) = self.counts.get_mut(key) {
            *c += 1;
            return 0;
        }
        self.counts.insert(key.to_vec(), 1);
        if self.counts.len() <= self.capacity {
            return 0;
        }
        let touched = self.counts.len();
        self.counts.retain(|_, c| {
            *c -= 1;
            *c > 0
        });
        touched
    }

    fn estimate(&self, key: &[u8]) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    fn decrement_smallest(&mut self) -> bool {
        let Some(mut first) = self.counts.first_entry() else {
            return false;
        };
        *first.get_mut() -= 1;
        if *first.get() == 0 {
            first.remove();
        }
        true
    }

    fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    fn entries(&self) -> Vec<(Vec<u8>, u64)> {
        self.counts.iter().map(|(k, c)| (k.clone(), *c)).collect()
    }
}

/// Misra-Gries summary that decrements lazily through a shared offset.
///
/// Each key stores `count + offset`; a decrement round bumps `offset` and
/// evicts the keys whose stored value now equals it, found through an index
/// ordered by stored value.
#[derive(Clone, Debug)]
pub struct OffsetMgSummary {
    capacity: usize,
    offset: u64,
    raw: BTreeMap<Vec<u8>, u64>,
    by_raw: BTreeSet<(u64, Vec<u8>)>,
    items_seen: u64,
}

impl OffsetMgSummary {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(ChhError::invalid("capacity must be at least 1"));
        }
        Ok(OffsetMgSummary {
            capacity,
            offset: 0,
            raw: BTreeMap::new(),
            by_raw: BTreeSet::new(),
            items_seen: 0,
        })
    }

    fn evict_zeros(&mut self) {
        while let Some((raw, _)) = self.by_raw.first() {
            if *raw > self.offset {
                break;
            }
            let (_, key) = self.by_raw.pop_first().expect("non-empty");
            self.raw.remove(&key);
        }
    }
}

impl FrequencyTable for OffsetMgSummary {
    fn with_capacity(capacity: usize) -> Result<Self> {
        Self::new(capacity)
    }

    fn from_parts(capacity: usize, items_seen: u64, entries: Vec<(Vec<u8>, u64)>) -> Result<Self> {
        check_parts(capacity, &entries)?;
        let by_raw = entries.iter().map(|(k, c)| (*c, k.clone())).collect();
        Ok(OffsetMgSummary {
            capacity,
            offset: 0,
            raw: entries.into_iter().collect(),
            by_raw,
            items_seen,
        })
    }

    fn capacity(&self) -> usize {
        self.capacity
    }

    fn len(&self) -> usize {
        self.raw.len()
    }

    fn items_seen(&self) -> u64 {
        self.items_seen
    }

    fn update(&mut self, key: &[u8]) -> usize {
        self.items_seen += 1;
        if let Some(raw) = self.raw.get_mut(key) {
            let old = *raw;
            *raw += 1;
            let k = self.by_raw.take(&(old, key.to_vec())).expect("index in sync").1;
            self.by_raw.insert((old + 1, k));
            return 0;
        }
        let raw = self.offset + 1;
        self.raw.insert(key.to_vec(), raw);
        self.by_raw.insert((raw, key.to_vec()));
        if self.raw.len() <= self.capacity {
            return 0;
        }
        // Logically every entry is touched; physically only the evicted ones.
        let touched = self.raw.len();
        self.offset += 1;
        self.evict_zeros();
        touched
    }

    fn estimate(&self, key: &[u8]) -> u64 {
        self.raw.get(key).map_or(0, |raw| raw - self.offset)
    }

    fn decrement_smallest(&mut self) -> bool {
        let Some((key, raw)) = self.raw.first_key_value() else {
            return false;
        };
        let (key, old) = (key.clone(), *raw);
        let k = self.by_raw.take(&(old, key)).expect("index in sync").1;
        if old - 1 == self.offset {
            self.raw.remove(&k);
        } else {
            *self.raw.get_mut(&k).expect("present") = old - 1;
            self.by_raw.insert((old - 1, k));
        }
        true
    }

    fn total(&self) -> u64 {
        self.raw.values().map(|raw| raw - self.offset).sum()
    }

    fn entries(&self) -> Vec<(Vec<u8>, u64)> {
        self.raw
            .iter()
            .map(|(k, raw)| (k.clone(), raw - self.offset))
            .collect()
    }
}
