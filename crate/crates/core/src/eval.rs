//! Error statistics against ground truth, and table-size sweeps.
//!
//! Primary error of a heavy-hitter `d` is `(f_d − f̂_d)/N`, bounded by
//! `1/s1`. Secondary error of a correlated heavy-hitter `(d, s)` is
//! `(f_{d,s} − f̂_{d,s})/f_d`, bounded by `1/s2 + 1/(φ·s1)` where `φ` is
//! `φ₁ − ε₁` by default (see [`TheoryDenominator`]). Errors are measured only
//! over exact heavy-hitters, never over extra items the sketch reports.

use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{ChhError, Result};
use crate::fraction::Fraction;
use crate::mg::FrequencyTable;
use crate::oracle::{exact_chh_multipass, ExactCounts};
use crate::params::{ChhParams, ConstraintCheck};
use crate::sketch::ChhSketch;
use crate::source::{TupleRecord, TupleSource};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ErrorKey {
    Primary(Vec<u8>),
    Pair(Vec<u8>, Vec<u8>),
}

/// One measured item: error is `undercount / denominator`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ItemError {
    pub key: ErrorKey,
    pub undercount: u64,
    pub denominator: u64,
}

impl ItemError {
    pub fn error(&self) -> f64 {
        if self.denominator == 0 {
            return 0.0;
        }
        self.undercount as f64 / self.denominator as f64
    }

    fn within(&self, bound: &BigRational) -> bool {
        BigRational::from_integer(self.undercount.into())
            <= bound * BigRational::from_integer(self.denominator.into())
    }
}

/// Which `φ` divides `1/s1` in the secondary theoretical maximum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TheoryDenominator {
    Phi1,
    #[default]
    Phi1MinusEps1,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorStats {
    pub per_item_errors: Vec<ItemError>,
    pub max_error: f64,
    pub avg_error: f64,
    /// `f64::INFINITY` when no bound applies.
    pub theoretical_max: f64,
    /// No items were measured; `max_error` and `avg_error` are then 0.
    pub empty: bool,
    theory: Option<BigRational>,
}

impl ErrorStats {
    fn new(mut items: Vec<ItemError>, theory: Option<BigRational>) -> Self {
        items.sort_unstable_by(|a, b| a.key.cmp(&b.key));
        let errors: Vec<f64> = items.iter().map(ItemError::error).collect();
        let max_error = errors.iter().copied().fold(0.0, f64::max);
        let avg_error = if errors.is_empty() {
            0.0
        } else {
            errors.iter().sum::<f64>() / errors.len() as f64
        };
        ErrorStats {
            empty: items.is_empty(),
            per_item_errors: items,
            max_error,
            avg_error,
            theoretical_max: theory.as_ref().and_then(|t| t.to_f64()).unwrap_or(f64::INFINITY),
            theory,
        }
    }

    /// Exact bound as a rational, if one applies.
    pub fn theory(&self) -> Option<&BigRational> {
        self.theory.as_ref()
    }

    /// Items whose error exceeds the theoretical maximum, compared exactly.
    pub fn violations(&self) -> Vec<&ItemError> {
        match &self.theory {
            Some(bound) => self.per_item_errors.iter().filter(|i| !i.within(bound)).collect(),
            None => Vec::new(),
        }
    }

    pub fn within_theory(&self) -> bool {
        self.violations().is_empty()
    }
}

fn same_stream<T: FrequencyTable>(exact: &ExactCounts, sketch: &ChhSketch<T>) -> Result<()> {
    if exact.n != sketch.n() {
        return Err(ChhError::InconsistentInput(format!(
            "ground truth covers {} tuples, sketch covers {}",
            exact.n,
            sketch.n()
        )));
    }
    Ok(())
}

fn undercount(truth: u64, estimate: u64, what: impl FnOnce() -> String) -> Result<u64> {
    truth
        .checked_sub(estimate)
        .ok_or_else(|| ChhError::InconsistentInput(format!("estimate exceeds true count for {}", what())))
}

/// Primary error statistic over `{d : f_d > φ₁N}`; theoretical max `1/s1`.
pub fn primary_error_stats<T: FrequencyTable>(
    exact: &ExactCounts,
    sketch: &ChhSketch<T>,
    phi1: &Fraction,
) -> Result<ErrorStats> {
    same_stream(exact, sketch)?;
    let items = exact
        .heavy_primaries(phi1)
        .into_iter()
        .map(|(d, f_d)| {
            let est = sketch.estimate_primary(&d);
            Ok(ItemError {
                undercount: undercount(f_d, est, || String::from_utf8_lossy(&d).into_owned())?,
                denominator: exact.n,
                key: ErrorKey::Primary(d),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let theory = BigRational::new(BigInt::from(1u8), BigInt::from(sketch.params().s1));
    Ok(ErrorStats::new(items, Some(theory)))
}

/// `1/s2 + 1/(φ·s1)`, or `None` when `φ ≤ 0`.
pub fn secondary_theory(params: &ChhParams, denominator: TheoryDenominator) -> Option<BigRational> {
    let phi = match denominator {
        TheoryDenominator::Phi1 => params.phi1.as_ratio().clone(),
        TheoryDenominator::Phi1MinusEps1 => params.phi1.as_ratio() - params.eps1.as_ratio(),
    };
    if phi <= BigRational::zero() {
        return None;
    }
    let s1 = BigRational::from_integer(params.s1.into());
    let s2 = BigRational::from_integer(params.s2.into());
    Some(s2.recip() + (phi * s1).recip())
}

/// Secondary error statistic over the exact correlated heavy-hitters, with
/// the default `φ₁ − ε₁` theory denominator.
pub fn secondary_error_stats<T: FrequencyTable>(
    exact: &ExactCounts,
    sketch: &ChhSketch<T>,
    phi1: &Fraction,
    phi2: &Fraction,
) -> Result<ErrorStats> {
    secondary_error_stats_with(exact, sketch, phi1, phi2, TheoryDenominator::default())
}

pub fn secondary_error_stats_with<T: FrequencyTable>(
    exact: &ExactCounts,
    sketch: &ChhSketch<T>,
    phi1: &Fraction,
    phi2: &Fraction,
    denominator: TheoryDenominator,
) -> Result<ErrorStats> {
    same_stream(exact, sketch)?;
    let items = exact
        .chh_set(phi1, phi2)
        .into_iter()
        .map(|c| {
            let est = sketch.estimate_pair(&c.d, &c.s);
            Ok(ItemError {
                undercount: undercount(c.f_ds, est, || {
                    format!("({}, {})", String::from_utf8_lossy(&c.d), String::from_utf8_lossy(&c.s))
                })?,
                denominator: c.f_d,
                key: ErrorKey::Pair(c.d, c.s),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorStats::new(items, secondary_theory(sketch.params(), denominator)))
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub phi1: Fraction,
    pub phi2: Fraction,
    /// Tolerances to judge each row against; `None` uses the tightest the
    /// row's sizes support.
    pub tolerances: Option<(Fraction, Fraction)>,
    pub denominator: TheoryDenominator,
}

impl SweepConfig {
    pub fn new(phi1: Fraction, phi2: Fraction) -> Self {
        SweepConfig {
            phi1,
            phi2,
            tolerances: None,
            denominator: TheoryDenominator::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub s1: u64,
    pub s2: u64,
    pub n: u64,
    pub primary: ErrorStats,
    pub secondary: ErrorStats,
    pub reported_primaries: usize,
    pub reported_pairs: usize,
    pub constraints: ConstraintCheck,
}

const SWEEP_BATCH: usize = 1 << 14;

/// One row per `(s1, s2)` in the Cartesian product of the lists, in list
/// order. The ground truth comes from one multipass oracle run; all sketches
/// are then fed in a single shared pass, rows in parallel.
pub fn sweep(source: &dyn TupleSource, config: &SweepConfig, s1_list: &[u64], s2_list: &[u64]) -> Result<Vec<SweepRow>> {
    if s1_list.is_empty() || s2_list.is_empty() {
        return Err(ChhError::invalid("s1 and s2 lists must be non-empty"));
    }
    let mut sketches: Vec<ChhSketch> = s1_list
        .iter()
        .flat_map(|&s1| s2_list.iter().map(move |&s2| (s1, s2)))
        .map(|(s1, s2)| {
            let params = ChhParams::with_sizes(&config.phi1, &config.phi2, s1, s2, config.tolerances.clone())?;
            ChhSketch::new(params)
        })
        .collect::<Result<_>>()?;

    let truth = exact_chh_multipass(source, &config.phi1, &config.phi2)?;

    let mut batch: Vec<TupleRecord> = Vec::with_capacity(SWEEP_BATCH);
    let mut tuples = source.open()?;
    loop {
        batch.clear();
        for t in tuples.by_ref().take(SWEEP_BATCH) {
            batch.push(t?);
        }
        if batch.is_empty() {
            break;
        }
        sketches.par_iter_mut().for_each(|sk| {
            for t in &batch {
                sk.update(&t.x, &t.y);
            }
        });
    }

    sketches
        .par_iter()
        .map(|sk| {
            let primary = primary_error_stats(&truth.counts, sk, &config.phi1)?;
            let secondary = secondary_error_stats_with(&truth.counts, sk, &config.phi1, &config.phi2, config.denominator)?;
            let report = sk.report();
            Ok(SweepRow {
                s1: sk.params().s1,
                s2: sk.params().s2,
                n: sk.n(),
                primary,
                secondary,
                reported_primaries: report.primaries.len(),
                reported_pairs: report.pair_count(),
                constraints: sk.params().constraints(),
            })
        })
        .collect()
}

pub const SWEEP_CSV_HEADER: [&str; 11] = [
    "s1",
    "s2",
    "n",
    "primary_max",
    "primary_avg",
    "primary_theory",
    "secondary_max",
    "secondary_avg",
    "secondary_theory",
    "reported_primaries",
    "reported_pairs",
];

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| ChhError::Io(e.into());
    w.write_record(SWEEP_CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.s1.to_string(),
            r.s2.to_string(),
            r.n.to_string(),
            r.primary.max_error.to_string(),
            r.primary.avg_error.to_string(),
            r.primary.theoretical_max.to_string(),
            r.secondary.max_error.to_string(),
            r.secondary.avg_error.to_string(),
            r.secondary.theoretical_max.to_string(),
            r.reported_primaries.to_string(),
            r.reported_pairs.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
