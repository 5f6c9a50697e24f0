//! Text snapshots of a [`ChhSketch`].
//!
//! ```text
//! chh-snapshot 1
//! phi1 1/10
//! phi2 1/10
//! eps1 1/20
//! eps2 1/10
//! s1 440
//! s2 20
//! sizing solved-I
//! n 1234
//! primaries 2
//! p 61 17 17 1
//! s 70 16
//! ...
//! end
//! ```
//!
//! A `p` line carries the hex-encoded primary key, `f̂_d`, the inner table's
//! update count and its number of entries, followed by that many `s` lines
//! (hex key, count). Keys appear in ascending byte order, so serializing the
//! same state always yields the same bytes.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{ChhError, Result};
use crate::fraction::Fraction;
use crate::mg::FrequencyTable;
use crate::params::{ChhParams, SolverCase, Sizing};
use crate::sketch::{ChhSketch, PrimaryEntry};

const MAGIC: &str = "chh-snapshot";
const VERSION: u32 = 1;

fn sizing_tag(sizing: Sizing) -> &'static str {
    match sizing {
        Sizing::Solved(SolverCase::CaseI) => "solved-I",
        Sizing::Solved(SolverCase::CaseII) => "solved-II",
        Sizing::Raw => "raw",
        Sizing::RawImplied => "raw-implied",
    }
}

fn parse_sizing(tag: &str) -> Result<Sizing> {
    Ok(match tag {
        "solved-I" => Sizing::Solved(SolverCase::CaseI),
        "solved-II" => Sizing::Solved(SolverCase::CaseII),
        "raw" => Sizing::Raw,
        "raw-implied" => Sizing::RawImplied,
        other => return Err(ChhError::Snapshot(format!("unknown sizing {other:?}"))),
    })
}

pub fn to_string<T: FrequencyTable>(sketch: &ChhSketch<T>) -> String {
    let p = sketch.params();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(out, "phi1 {}", p.phi1.to_ratio_string());
    let _ = writeln!(out, "phi2 {}", p.phi2.to_ratio_string());
    let _ = writeln!(out, "eps1 {}", p.eps1.to_ratio_string());
    let _ = writeln!(out, "eps2 {}", p.eps2.to_ratio_string());
    let _ = writeln!(out, "s1 {}", p.s1);
    let _ = writeln!(out, "s2 {}", p.s2);
    let _ = writeln!(out, "sizing {}", sizing_tag(p.sizing));
    let _ = writeln!(out, "n {}", sketch.n());
    let entries = sketch.entries();
    let _ = writeln!(out, "primaries {}", entries.len());
    for (d, e) in entries {
        let inner = e.inner.entries();
        let _ = writeln!(
            out,
            "p {} {} {} {}",
            hex::encode(d),
            e.est_count,
            e.inner.items_seen(),
            inner.len()
        );
        for (s, c) in inner {
            let _ = writeln!(out, "s {} {c}", hex::encode(s));
        }
    }
    out.push_str("end\n");
    out
}

pub fn write<T: FrequencyTable, W: Write>(sketch: &ChhSketch<T>, mut out: W) -> Result<()> {
    out.write_all(to_string(sketch).as_bytes())?;
    out.flush()?;
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<String> {
        self.line_no += 1;
        match self.inner.next() {
            Some(line) => Ok(line?),
            None => Err(ChhError::Snapshot(format!("unexpected end of snapshot at line {}", self.line_no))),
        }
    }

    fn err(&self, what: impl std::fmt::Display) -> ChhError {
        ChhError::Snapshot(format!("line {}: {what}", self.line_no))
    }

    fn field(&mut self, name: &str) -> Result<String> {
        let line = self.next_line()?;
        match line.split_once(' ') {
            Some((k, v)) if k == name => Ok(v.to_string()),
            _ => Err(self.err(format_args!("expected `{name} ...`, found {line:?}"))),
        }
    }

    fn number<N: std::str::FromStr>(&self, text: &str) -> Result<N> {
        text.parse().map_err(|_| self.err(format_args!("bad number {text:?}")))
    }

    fn fraction(&mut self, name: &str) -> Result<Fraction> {
        let v = self.field(name)?;
        v.parse().map_err(|_| self.err(format_args!("bad fraction {v:?}")))
    }
}

pub fn read<T: FrequencyTable, R: BufRead>(input: R) -> Result<ChhSketch<T>> {
    let mut lines = Lines {
        inner: input.lines(),
        line_no: 0,
    };
    let version = lines.field(MAGIC)?;
    if version != VERSION.to_string() {
        return Err(lines.err(format_args!("unsupported version {version}")));
    }
    let phi1 = lines.fraction("phi1")?;
    let phi2 = lines.fraction("phi2")?;
    let eps1 = lines.fraction("eps1")?;
    let eps2 = lines.fraction("eps2")?;
    let s1 = lines.field("s1")?;
    let s1: u64 = lines.number(&s1)?;
    let s2 = lines.field("s2")?;
    let s2: u64 = lines.number(&s2)?;
    let sizing = parse_sizing(&lines.field("sizing")?)?;
    let n = lines.field("n")?;
    let n: u64 = lines.number(&n)?;
    let count = lines.field("primaries")?;
    let count: u64 = lines.number(&count)?;
    if count > s1 {
        return Err(lines.err("more primaries than s1"));
    }
    let params = ChhParams {
        phi1,
        phi2,
        eps1,
        eps2,
        s1,
        s2,
        sizing,
    };
    let s2_cap = usize::try_from(s2).map_err(|_| lines.err("s2 too large"))?;

    let mut entries: Vec<(Vec<u8>, PrimaryEntry<T>)> = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let line = lines.next_line()?;
        let parts: Vec<&str> = line.split(' ').collect();
        let ["p", key, est, seen, len] = parts[..] else {
            return Err(lines.err(format_args!("expected primary line, found {line:?}")));
        };
        let key = hex::decode(key).map_err(|e| lines.err(e))?;
        if let Some((prev, _)) = entries.last() {
            if *prev >= key {
                return Err(lines.err("primary keys out of order"));
            }
        }
        let est: u64 = lines.number(est)?;
        let seen: u64 = lines.number(seen)?;
        let len: u64 = lines.number(len)?;
        if len > s2 {
            return Err(lines.err("more inner entries than s2"));
        }
        let mut inner = Vec::with_capacity(len as usize);
        for _ in 0..len {
            let line = lines.next_line()?;
            let parts: Vec<&str> = line.split(' ').collect();
            let ["s", skey, c] = parts[..] else {
                return Err(lines.err(format_args!("expected secondary line, found {line:?}")));
            };
            let skey = hex::decode(skey).map_err(|e| lines.err(e))?;
            let c: u64 = lines.number(c)?;
            inner.push((skey, c));
        }
        let inner = T::from_parts(s2_cap, seen, inner).map_err(|e| lines.err(e))?;
        entries.push((key, PrimaryEntry { est_count: est, inner }));
    }
    let end = lines.next_line()?;
    if end != "end" {
        return Err(lines.err(format_args!("expected `end`, found {end:?}")));
    }
    if let Some(extra) = lines.inner.next() {
        let extra = extra?;
        return Err(ChhError::Snapshot(format!("trailing data after `end`: {extra:?}")));
    }
    ChhSketch::from_parts(params, n, entries).map_err(|e| ChhError::Snapshot(e.to_string()))
}

pub fn from_str<T: FrequencyTable>(text: &str) -> Result<ChhSketch<T>> {
    read(text.as_bytes())
}
