//! Text format for mappings and JSON format for type measures. The grammar lives in
//! `docs/grammar.md`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::structure::{FiniteMapping, Signature};
use crate::types::{TypeMeasure, TypeSession};

pub const MAP_HEADER: &str = "mapprox-map 1";
pub const MEASURE_FORMAT: &str = "mapprox-measure";

/// Canonical text: header, size, function name, predicate line, then one record per
/// element in id order with marks in declaration order.
pub fn write_map_string(f: &FiniteMapping) -> String {
    let sig = f.signature();
    let mut out = String::new();
    let _ = writeln!(out, "{MAP_HEADER}");
    let _ = writeln!(out, "n {}", f.len());
    let _ = writeln!(out, "function {}", sig.function());
    out.push_str("predicates");
    for p in sig.predicates() {
        out.push(' ');
        out.push_str(p);
    }
    out.push('\n');
    for v in 0..f.len() {
        let _ = write!(out, "{v} -> {}", f.f(v));
        for p in f.marks_of(v) {
            out.push(' ');
            out.push_str(&sig.predicates()[p]);
        }
        out.push('\n');
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parses the text format. Blank lines and lines starting with `#` are skipped;
/// records may come in any order but each id exactly once.
pub fn read_map_str(text: &str) -> Result<FiniteMapping> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut header = |what: &str| -> Result<(usize, Vec<&str>)> {
        let (no, l) = lines.next().ok_or_else(|| parse_err(0, format!("missing `{what}` line")))?;
        let mut words = l.split_whitespace();
        if words.next() != Some(what) {
            return Err(parse_err(no, format!("expected `{what}`")));
        }
        Ok((no, words.collect()))
    };
    let (no, version) = header("mapprox-map")?;
    if version != ["1"] {
        return Err(parse_err(no, "unsupported format version"));
    }
    let (no, size) = header("n")?;
    let n: usize = match size.as_slice() {
        [s] => s.parse().map_err(|_| parse_err(no, "bad size"))?,
        _ => return Err(parse_err(no, "expected `n <size>`")),
    };
    if n == 0 {
        return Err(parse_err(no, "empty domain"));
    }
    let (no, function) = header("function")?;
    let function = match function.as_slice() {
        [name] => name.to_string(),
        _ => return Err(parse_err(no, "expected `function <name>`")),
    };
    let (no, names) = header("predicates")?;
    let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    let sig = Signature::new(function, names).map_err(|e| parse_err(no, e.to_string()))?;

    let mut image = vec![usize::MAX; n];
    let mut marks = vec![Vec::new(); sig.len()];
    for (no, l) in lines {
        let words: Vec<&str> = l.split_whitespace().collect();
        if words.len() < 3 || words[1] != "->" {
            return Err(parse_err(no, "expected `<id> -> <image> [marks]`"));
        }
        let id: usize = words[0].parse().map_err(|_| parse_err(no, "bad id"))?;
        let img: usize = words[2].parse().map_err(|_| parse_err(no, "bad image"))?;
        if id >= n {
            return Err(parse_err(no, format!("id {id} outside 0..{n}")));
        }
        if img >= n {
            return Err(parse_err(no, format!("image {img} outside 0..{n}")));
        }
        if image[id] != usize::MAX {
            return Err(parse_err(no, format!("duplicate id {id}")));
        }
        image[id] = img;
        for w in &words[3..] {
            let p = sig.index_of(w).ok_or_else(|| parse_err(no, format!("undeclared predicate `{w}`")))?;
            if marks[p].last() == Some(&id) {
                return Err(parse_err(no, format!("repeated mark `{w}`")));
            }
            marks[p].push(id);
        }
    }
    if let Some(v) = image.iter().position(|&w| w == usize::MAX) {
        return Err(parse_err(0, format!("no record for id {v}")));
    }
    FiniteMapping::new(sig, image, marks)
}

pub fn read_map(path: impl AsRef<Path>) -> Result<FiniteMapping> {
    read_map_str(&std::fs::read_to_string(path)?)
}

pub fn write_map(f: &FiniteMapping, path: impl AsRef<Path>) -> Result<()> {
    Ok(std::fs::write(path, write_map_string(f))?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureEntry {
    #[serde(with = "rational::text")]
    pub mass: Rational,
    pub root: usize,
    pub image: Vec<usize>,
    /// Marked elements, one list per declared predicate.
    pub marks: Vec<Vec<usize>>,
}

/// A type measure with a witness ball per type, enough to rebuild it without the
/// source structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub format: String,
    pub version: u32,
    pub rank: usize,
    pub function: String,
    pub predicates: Vec<String>,
    pub entries: Vec<MeasureEntry>,
}

impl MeasureFile {
    pub fn from_measure(mu: &TypeMeasure) -> Self {
        let sig = mu.entries()[0].0.witness().signature().clone();
        let entries = mu
            .entries()
            .iter()
            .map(|(t, q)| {
                let (ball, root) = t.witness_ball();
                MeasureEntry { mass: q.clone(), root, image: ball.image().to_vec(), marks: ball.mark_sets() }
            })
            .collect();
        MeasureFile {
            format: MEASURE_FORMAT.into(),
            version: 1,
            rank: mu.rank(),
            function: sig.function().to_string(),
            predicates: sig.predicates().to_vec(),
            entries,
        }
    }

    pub fn to_measure(&self, session: &TypeSession) -> Result<TypeMeasure> {
        if self.format != MEASURE_FORMAT || self.version != 1 {
            return Err(Error::InvalidArgument(format!("not a {MEASURE_FORMAT} version 1 file")));
        }
        let sig = Signature::new(self.function.clone(), self.predicates.clone())?;
        let mut entries = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            let ball = FiniteMapping::new(sig.clone(), e.image.clone(), e.marks.clone())?;
            entries.push((session.local_type(&ball, e.root, self.rank)?, e.mass.clone()));
        }
        TypeMeasure::new(self.rank, entries)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))
    }
}
