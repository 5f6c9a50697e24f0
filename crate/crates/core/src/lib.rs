//! Correlated heavy-hitters over two-dimensional streams.
//!
//! A stream of `(x, y)` tuples is summarized in one pass by [`ChhSketch`], a
//! Misra-Gries table over primaries `x` whose entries each embed a
//! Misra-Gries table over the secondaries `y` seen with that primary. The
//! sketch reports every primary `d` with `f_d > φ₁N` and, with it, every
//! secondary `s` with `f_{d,s} > φ₂f_d`, while keeping false positives within
//! the tolerances `ε₁`, `ε₂`.
//!
//! ```
//! use chh_core::{solve_params, ChhSketch, Fraction};
//!
//! let f = |s: &str| s.parse::<Fraction>().unwrap();
//! let params = solve_params(&f("0.1"), &f("0.1"), &f("0.05"), &f("0.1")).unwrap();
//! assert_eq!((params.s1, params.s2), (440, 20));
//!
//! let mut sketch: ChhSketch = ChhSketch::new(params).unwrap();
//! for _ in 0..10 {
//!     sketch.update(b"10.0.0.1", b"192.168.1.5");
//! }
//! let report = sketch.report();
//! assert!(report.contains_pair(b"10.0.0.1", b"192.168.1.5"));
//! ```

pub mod error;
pub mod eval;
pub mod fraction;
pub mod mg;
pub mod oracle;
pub mod params;
pub mod sketch;
pub mod snapshot;
pub mod source;
pub mod zipf;

pub use error::{ChhError, Result};
pub use eval::{
    primary_error_stats, secondary_error_stats, sweep, write_sweep_csv, ErrorStats, SweepConfig, SweepRow,
    TheoryDenominator,
};
pub use fraction::Fraction;
pub use mg::{FrequencyTable, MgSummary, OffsetMgSummary};
pub use oracle::{exact_chh_multipass, exact_counts_naive, ExactChh, ExactCounts, MultipassResult};
pub use params::{solve_params, ChhParams, ConstraintCheck, Sizing, SolverCase};
pub use sketch::{ChhReport, ChhSketch, PrimaryEntry, ReportedPair, ReportedPrimary, Scenario, UpdateTrace};
pub use source::{parse_tuple_line, OneShot, TsvFile, TsvReader, TupleRecord, TupleSource};
pub use zipf::{generate_zipf, ZipfWorkload, ZipfWorkloadSpec};
