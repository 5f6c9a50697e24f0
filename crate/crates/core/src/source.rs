//! Tuple streams: parsing tab-separated lines and replayable sources.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::error::{ChhError, Result};

/// A `(primary, secondary)` pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TupleRecord {
    pub x: Vec<u8>,
    pub y: Vec<u8>,
}

impl TupleRecord {
    pub fn new(x: impl Into<Vec<u8>>, y: impl Into<Vec<u8>>) -> Self {
        TupleRecord { x: x.into(), y: y.into() }
    }
}

pub type TupleIter<'a> = Box<dyn Iterator<Item = Result<TupleRecord>> + 'a>;

/// A stream of tuples that may be replayable.
pub trait TupleSource {
    /// Starts a pass from the beginning of the stream. Sources that cannot
    /// rewind fail with [`ChhError::UnsupportedSource`] on the second call.
    fn open(&self) -> Result<TupleIter<'_>>;
}

/// Splits `line` at its first tab after removing one trailing `\n` or `\r\n`.
pub fn parse_tuple_line(line: &[u8], line_no: u64) -> Result<TupleRecord> {
    let line = line.strip_suffix(b"\n").unwrap_or(line);
    let line = line.strip_suffix(b"\r").unwrap_or(line);
    match line.iter().position(|&b| b == b'\t') {
        Some(i) => Ok(TupleRecord::new(&line[..i], &line[i + 1..])),
        None => Err(ChhError::MalformedLine {
            line: line_no,
            reason: "no tab separator".into(),
        }),
    }
}

/// Incremental TSV reader. In strict mode the first malformed line ends the
/// stream with an error; otherwise such lines are skipped and counted.
pub struct TsvReader<R> {
    reader: R,
    strict: bool,
    line_no: u64,
    skipped: u64,
    buf: Vec<u8>,
    failed: bool,
}

impl<R: BufRead> TsvReader<R> {
    pub fn new(reader: R, strict: bool) -> Self {
        TsvReader {
            reader,
            strict,
            line_no: 0,
            skipped: 0,
            buf: Vec::new(),
            failed: false,
        }
    }

    /// Malformed lines skipped so far (always 0 in strict mode).
    pub fn skipped(&self) -> u64 {
        self.skipped
    }
}

impl<R: BufRead> Iterator for TsvReader<R> {
    type Item = Result<TupleRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.buf.clear();
            match self.reader.read_until(b'\n', &mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e.into()));
                }
            }
            self.line_no += 1;
            match parse_tuple_line(&self.buf, self.line_no) {
                Ok(t) => return Some(Ok(t)),
                Err(e) if self.strict => {
                    self.failed = true;
                    return Some(Err(e));
                }
                Err(_) => self.skipped += 1,
            }
        }
    }
}

/// A TSV file, re-opened for every pass.
#[derive(Clone, Debug)]
pub struct TsvFile {
    path: PathBuf,
    strict: bool,
}

impl TsvFile {
    pub fn new(path: impl AsRef<Path>, strict: bool) -> Self {
        TsvFile {
            path: path.as_ref().to_path_buf(),
            strict,
        }
    }

    pub fn reader(&self) -> Result<TsvReader<BufReader<File>>> {
        Ok(TsvReader::new(BufReader::new(File::open(&self.path)?), self.strict))
    }
}

impl TupleSource for TsvFile {
    fn open(&self) -> Result<TupleIter<'_>> {
        Ok(Box::new(self.reader()?))
    }
}

impl TupleSource for [TupleRecord] {
    fn open(&self) -> Result<TupleIter<'_>> {
        Ok(Box::new(self.iter().cloned().map(Ok)))
    }
}

impl TupleSource for Vec<TupleRecord> {
    fn open(&self) -> Result<TupleIter<'_>> {
        self.as_slice().open()
    }
}

/// Wraps a one-shot iterator (such as stdin). Only the first pass succeeds.
pub struct OneShot<I> {
    iter: Mutex<Option<I>>,
}

impl<I> OneShot<I> {
    pub fn new(iter: I) -> Self {
        OneShot {
            iter: Mutex::new(Some(iter)),
        }
    }
}

impl<I> TupleSource for OneShot<I>
where
    I: Iterator<Item = Result<TupleRecord>>,
{
    fn open(&self) -> Result<TupleIter<'_>> {
        let iter = self.iter.lock().expect("poisoned").take();
        match iter {
            Some(iter) => Ok(Box::new(iter)),
            None => Err(ChhError::UnsupportedSource("stream cannot be replayed".into())),
        }
    }
}
