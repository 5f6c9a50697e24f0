//! Seeded synthetic two-dimensional workloads with Zipf-distributed keys.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Zipf;

use crate::error::{ChhError, Result};
use crate::source::{TupleIter, TupleRecord, TupleSource};

#[derive(Clone, Debug, PartialEq)]
pub struct ZipfWorkloadSpec {
    pub tuple_count: u64,
    pub primary_domain: u64,
    pub secondary_domain: u64,
    pub primary_skew: f64,
    pub secondary_skew: f64,
    pub seed: u64,
}

impl Default for ZipfWorkloadSpec {
    fn default() -> Self {
        ZipfWorkloadSpec {
            tuple_count: 100_000,
            primary_domain: 10_000,
            secondary_domain: 1_000,
            primary_skew: 1.1,
            secondary_skew: 1.0,
            seed: 0,
        }
    }
}

/// A replayable Zipf workload. Every pass regenerates the same tuples from
/// the seed.
#[derive(Clone, Debug)]
pub struct ZipfWorkload {
    spec: ZipfWorkloadSpec,
    primary: Zipf<f64>,
    secondary: Zipf<f64>,
}

pub fn generate_zipf(spec: ZipfWorkloadSpec) -> Result<ZipfWorkload> {
    if spec.primary_domain == 0 || spec.secondary_domain == 0 {
        return Err(ChhError::invalid("domains must hold at least one value"));
    }
    let zipf = |n: u64, s: f64, which: &str| {
        if !(s.is_finite() && s >= 0.0) {
            return Err(ChhError::invalid(format!("{which} skew must be a finite non-negative number")));
        }
        Zipf::new(n as f64, s).map_err(|e| ChhError::invalid(format!("{which} distribution: {e}")))
    };
    let primary = zipf(spec.primary_domain, spec.primary_skew, "primary")?;
    let secondary = zipf(spec.secondary_domain, spec.secondary_skew, "secondary")?;
    Ok(ZipfWorkload {
        spec,
        primary,
        secondary,
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl ZipfWorkload {
    pub fn spec(&self) -> &ZipfWorkloadSpec {
        &self.spec
    }

    /// Key for primary rank `rank` (1 = most popular).
    pub fn primary_key(rank: u64) -> Vec<u8> {
        format!("d{rank}").into_bytes()
    }

    /// Key for the secondary drawn at `rank` alongside primary rank
    /// `primary_rank`. Each primary rotates the secondary ranks by its own
    /// seeded offset, so different primaries favour different secondaries.
    pub fn secondary_key(&self, primary_rank: u64, rank: u64) -> Vec<u8> {
        let m = self.spec.secondary_domain;
        let shift = splitmix64(self.spec.seed ^ primary_rank.wrapping_mul(0xd6e8_feb8_6659_fd93)) % m;
        format!("s{}", (rank - 1 + shift) % m).into_bytes()
    }

    pub fn iter(&self) -> ZipfIter<'_> {
        ZipfIter {
            workload: self,
            rng: ChaCha8Rng::seed_from_u64(self.spec.seed),
            remaining: self.spec.tuple_count,
        }
    }
}

pub struct ZipfIter<'a> {
    workload: &'a ZipfWorkload,
    rng: ChaCha8Rng,
    remaining: u64,
}

impl Iterator for ZipfIter<'_> {
    type Item = TupleRecord;

    fn next(&mut self) -> Option<TupleRecord> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let w = self.workload;
        let x_rank = self.rng.sample(w.primary) as u64;
        let y_rank = self.rng.sample(w.secondary) as u64;
        Some(TupleRecord {
            x: ZipfWorkload::primary_key(x_rank),
            y: w.secondary_key(x_rank, y_rank),
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (n, Some(n))
    }
}

impl TupleSource for ZipfWorkload {
    fn open(&self) -> Result<TupleIter<'_>> {
        Ok(Box::new(self.iter().map(Ok)))
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;

    fn spec(n: u64, pd: u64, sd: u64, s1: f64, s2: f64, seed: u64) -> ZipfWorkloadSpec {
        ZipfWorkloadSpec {
            tuple_count: n,
            primary_domain: pd,
            secondary_domain: sd,
            primary_skew: s1,
            secondary_skew: s2,
            seed,
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let w = generate_zipf(spec(2000, 100, 50, 1.1, 1.0, 42)).unwrap();
        let a: Vec<_> = w.iter().collect();
        let b: Vec<_> = generate_zipf(spec(2000, 100, 50, 1.1, 1.0, 42)).unwrap().iter().collect();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2000);
        let c: Vec<_> = generate_zipf(spec(2000, 100, 50, 1.1, 1.0, 43)).unwrap().iter().collect();
        assert_ne!(a, c);
        // Replays through the source interface match too.
        let replay: Vec<_> = w.open().unwrap().map(|t| t.unwrap()).collect();
        assert_eq!(a, replay);
    }

    #[test]
    fn zero_domain_is_rejected() {
        assert!(generate_zipf(spec(10, 0, 5, 1.0, 1.0, 0)).is_err());
        assert!(generate_zipf(spec(10, 5, 0, 1.0, 1.0, 0)).is_err());
        assert!(generate_zipf(spec(10, 5, 5, -1.0, 1.0, 0)).is_err());
        assert_eq!(generate_zipf(spec(0, 5, 5, 1.0, 1.0, 0)).unwrap().iter().count(), 0);
    }

    #[test]
    fn zero_skew_is_uniform() {
        let n = 100_000u64;
        let w = generate_zipf(spec(n, 10, 1, 0.0, 0.0, 9)).unwrap();
        let mut counts: HashMap<Vec<u8>, u64> = HashMap::new();
        for t in w.iter() {
            *counts.entry(t.x).or_default() += 1;
        }
        assert_eq!(counts.len(), 10);
        // Expected 10_000 per key, sd ≈ 95; allow about 5 sd.
        for c in counts.values() {
            assert!((9_500..=10_500).contains(c), "{c}");
        }
    }

    #[test]
    fn head_frequency_matches_zipf_normalization() {
        let n = 100_000u64;
        let domain = 10_000u64;
        let skew = 1.2;
        let w = generate_zipf(spec(n, domain, 10, skew, 1.0, 5)).unwrap();
        let head = ZipfWorkload::primary_key(1);
        let got = w.iter().filter(|t| t.x == head).count() as f64 / n as f64;
        let h: f64 = (1..=domain).map(|r| (r as f64).powf(-skew)).sum();
        let expected = 1.0 / h;
        assert!((got - expected).abs() <= 0.2 * expected, "got {got}, expected {expected}");
    }

    #[test]
    fn primaries_prefer_different_secondaries() {
        let w = generate_zipf(spec(10, 10, 1000, 1.0, 1.0, 3)).unwrap();
        let tops: std::collections::HashSet<_> = (1..=10).map(|r| w.secondary_key(r, 1)).collect();
        assert!(tops.len() > 5);
    }
}
