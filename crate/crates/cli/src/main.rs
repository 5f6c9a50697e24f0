//! `chh` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 resource limit.

mod args;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::process::ExitCode;
use std::time::Instant;

use chh_core::eval::TheoryDenominator;
use chh_core::{
    exact_chh_multipass, exact_counts_naive, generate_zipf, snapshot, solve_params, sweep, write_sweep_csv,
    ChhError, ChhParams, ChhReport, ChhSketch, Fraction, SweepConfig, TsvFile, TsvReader, TupleSource,
    ZipfWorkloadSpec,
};
use clap::Parser;

use args::{Cli, Command, Denominator, ExactMethod, ReportFormat};

enum Failure {
    Usage(String),
    Data(String),
    Resource(String),
}

impl From<ChhError> for Failure {
    fn from(e: ChhError) -> Self {
        match e {
            ChhError::InvalidParameter(_) => Failure::Usage(e.to_string()),
            ChhError::ResourceLimit(_) => Failure::Resource(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::SolveParams { phi1, phi2, eps1, eps2 } => {
            let p = solve_params(&phi1, &phi2, &eps1, &eps2)?;
            let case = p.case().expect("solved params carry a case");
            let alpha = p.alpha().expect("solved params carry alpha");
            println!("s1={} s2={} case={case} alpha={alpha}", p.s1, p.s2);
            Ok(())
        }
        Command::Generate {
            n,
            primary_domain,
            secondary_domain,
            skew1,
            skew2,
            seed,
            out,
        } => {
            let workload = generate_zipf(ZipfWorkloadSpec {
                tuple_count: n,
                primary_domain,
                secondary_domain,
                primary_skew: skew1,
                secondary_skew: skew2,
                seed,
            })?;
            let mut w = BufWriter::new(File::create(&out)?);
            for t in workload.iter() {
                w.write_all(&t.x)?;
                w.write_all(b"\t")?;
                w.write_all(&t.y)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
            Ok(())
        }
        Command::Build {
            input,
            phi1,
            phi2,
            eps1,
            eps2,
            s1,
            s2,
            out,
            strict,
        } => {
            let params = build_params(phi1, phi2, eps1, eps2, s1.zip(s2))?;
            let mut sketch: ChhSketch = ChhSketch::new(params)?;
            let skipped = match input {
                Some(path) => feed(&mut sketch, TsvReader::new(BufReader::new(File::open(path)?), strict))?,
                None => feed(&mut sketch, TsvReader::new(io::stdin().lock(), strict))?,
            };
            if skipped > 0 {
                eprintln!("warning: skipped {skipped} malformed line(s)");
            }
            warn_constraints(sketch.params());
            let mut w = BufWriter::new(File::create(&out)?);
            snapshot::write(&sketch, &mut w)?;
            Ok(())
        }
        Command::Report { sketch, format } => {
            let sketch: ChhSketch = snapshot::read(BufReader::new(File::open(&sketch)?))?;
            warn_constraints(sketch.params());
            let report = sketch.report();
            let stdout = io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            match format {
                ReportFormat::Text => write_report_text(&report, &mut out)?,
                ReportFormat::Csv => write_report_csv(&report, &mut out)?,
            }
            out.flush()?;
            Ok(())
        }
        Command::Exact {
            input,
            phi1,
            phi2,
            method,
            max_tuples,
            strict,
        } => {
            let source = TsvFile::new(&input, strict);
            let chh = match method {
                ExactMethod::Multipass => exact_chh_multipass(&source, &phi1, &phi2)?.chh,
                ExactMethod::Naive => exact_counts_naive(&source, max_tuples)?.chh_set(&phi1, &phi2),
            };
            let stdout = io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            for c in chh {
                out.write_all(b"(")?;
                out.write_all(&c.d)?;
                out.write_all(b",")?;
                out.write_all(&c.s)?;
                writeln!(out, ") {}", c.f_ds)?;
            }
            out.flush()?;
            Ok(())
        }
        Command::Evaluate {
            input,
            phi1,
            phi2,
            eps1,
            eps2,
            s1_list,
            s2_list,
            out,
            theory_denominator,
            timing,
            strict,
        } => {
            let source = TsvFile::new(&input, strict);
            let config = SweepConfig {
                phi1,
                phi2,
                tolerances: eps1.zip(eps2),
                denominator: match theory_denominator {
                    Denominator::Phi1 => TheoryDenominator::Phi1,
                    Denominator::Phi1MinusEps1 => TheoryDenominator::Phi1MinusEps1,
                },
            };
            let rows = sweep(&source, &config, &s1_list, &s2_list)?;
            for r in &rows {
                if !r.constraints.holds() {
                    eprintln!(
                        "note: s1={} s2={} do not satisfy the sizing conditions; bounds are informational",
                        r.s1, r.s2
                    );
                }
                let (pv, sv) = (r.primary.violations().len(), r.secondary.violations().len());
                if pv + sv > 0 {
                    eprintln!("warning: s1={} s2={}: {pv} primary and {sv} secondary item(s) exceed the theoretical maximum", r.s1, r.s2);
                }
            }
            write_sweep_csv(&rows, BufWriter::new(File::create(&out)?))?;
            if timing {
                let s1 = *s1_list.iter().max().expect("non-empty");
                let s2 = *s2_list.iter().max().expect("non-empty");
                time_naive_vs_sketch(&source, &config, s1, s2)?;
            }
            Ok(())
        }
    }
}

fn build_params(
    phi1: Fraction,
    phi2: Fraction,
    eps1: Option<Fraction>,
    eps2: Option<Fraction>,
    sizes: Option<(u64, u64)>,
) -> Result<ChhParams, Failure> {
    if let Some((s1, s2)) = sizes {
        let tolerances = match (eps1, eps2) {
            (Some(e1), Some(e2)) => Some((e1, e2)),
            (None, None) => None,
            _ => return Err(Failure::Usage("--eps1 and --eps2 must be given together".into())),
        };
        return Ok(ChhParams::with_sizes(&phi1, &phi2, s1, s2, tolerances)?);
    }
    let tenth = Fraction::new(1, 10).expect("non-zero denominator");
    let default_eps = |phi: &Fraction| phi * &tenth;
    let eps1 = eps1.unwrap_or_else(|| default_eps(&phi1));
    let eps2 = eps2.unwrap_or_else(|| default_eps(&phi2));
    Ok(solve_params(&phi1, &phi2, &eps1, &eps2)?)
}

fn feed<R: io::BufRead>(sketch: &mut ChhSketch, mut reader: TsvReader<R>) -> Result<u64, Failure> {
    for t in reader.by_ref() {
        let t = t?;
        sketch.update(&t.x, &t.y);
    }
    Ok(reader.skipped())
}

fn warn_constraints(params: &ChhParams) {
    let check = params.constraints();
    if !check.holds() {
        eprintln!(
            "warning: parameters do not satisfy the sizing conditions (constraint1={}, constraint2={}, tolerances_valid={}); \
             the report may miss heavy-hitters or include items beyond the tolerances",
            check.constraint1, check.constraint2, check.tolerances_valid
        );
    }
}

fn write_report_text<W: Write>(report: &ChhReport, out: &mut W) -> io::Result<()> {
    for p in &report.primaries {
        out.write_all(&p.key)?;
        writeln!(out, " {}", p.est_count)?;
        for q in &p.pairs {
            out.write_all(b"  ")?;
            out.write_all(&p.key)?;
            out.write_all(b" ")?;
            out.write_all(&q.key)?;
            writeln!(out, " {}", q.est_count)?;
        }
    }
    Ok(())
}

fn write_report_csv<W: Write>(report: &ChhReport, out: &mut W) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| Failure::Data(e.to_string());
    w.write_record(["kind", "d", "s", "est_count"]).map_err(fail)?;
    for p in &report.primaries {
        let count = p.est_count.to_string();
        w.write_record([&b"primary"[..], &p.key, b"", count.as_bytes()]).map_err(fail)?;
        for q in &p.pairs {
            let count = q.est_count.to_string();
            w.write_record([&b"pair"[..], &p.key, &q.key, count.as_bytes()]).map_err(fail)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn time_naive_vs_sketch(source: &TsvFile, config: &SweepConfig, s1: u64, s2: u64) -> CmdResult {
    let started = Instant::now();
    let counts = exact_counts_naive(source, u64::MAX)?;
    let naive_time = started.elapsed();

    let params = ChhParams::with_sizes(&config.phi1, &config.phi2, s1, s2, config.tolerances.clone())?;
    let mut sketch: ChhSketch = ChhSketch::new(params)?;
    let started = Instant::now();
    for t in source.open()? {
        let t = t?;
        sketch.update(&t.x, &t.y);
    }
    let sketch_time = started.elapsed();

    eprintln!(
        "timing: naive {:.3}s, {} stored pairs; sketch (s1={s1}, s2={s2}) {:.3}s, {} stored counters",
        naive_time.as_secs_f64(),
        counts.pairs.len(),
        sketch_time.as_secs_f64(),
        sketch.stored_counters()
    );
    Ok(())
}
