//! Output streams, the pairwise strong-stream validator, and the
//! byte-stable JSON-lines dump format
//! `{"n":1,"dim":2,"values":["1/2","3/4"]}`.

use std::fmt;

use super::AbortReason;
use crate::exact::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamMode {
    Bss,
    Strong,
    Weak,
}

impl StreamMode {
    pub fn name(self) -> &'static str {
        match self {
            StreamMode::Bss => "bss",
            StreamMode::Strong => "strong",
            StreamMode::Weak => "weak",
        }
    }
}

/// A tagged sequence of output vectors. Entry `vectors[k]` is the output of
/// index `n = k + 1`; under strong semantics it claims error at most `2^-n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputStream {
    pub mode: StreamMode,
    pub vectors: Vec<Vec<Rational>>,
    /// Set when collection stopped because the step budget ran out before
    /// the requested number of vectors appeared.
    pub exhausted_budget: bool,
    /// Set when the run ended in a singular step.
    pub abort: Option<AbortReason>,
}

impl OutputStream {
    pub fn from_vectors(mode: StreamMode, vectors: Vec<Vec<Rational>>) -> Self {
        OutputStream { mode, vectors, exhausted_budget: false, abort: None }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Scalar view of a 1-dimensional stream entry.
    pub fn scalar(&self, k: usize) -> Option<&Rational> {
        match self.vectors.get(k)?.as_slice() {
            [v] => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrongValidation {
    Valid,
    /// Lexicographically first violating pair, 1-based.
    Violation { n: usize, m: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidateError {
    PrefixTooShort { have: usize, want: usize },
}

impl fmt::Display for ValidateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidateError::PrefixTooShort { have, want } => {
                write!(f, "stream has {have} entries, validation needs {want}")
            }
        }
    }
}

impl std::error::Error for ValidateError {}

fn norm1_diff(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        acc = &acc + &(x - y).abs();
    }
    acc
}

pub(super) fn validate_strong_impl(
    stream: &OutputStream,
    upto: usize,
) -> Result<StrongValidation, ValidateError> {
    if stream.vectors.len() < upto {
        return Err(ValidateError::PrefixTooShort { have: stream.vectors.len(), want: upto });
    }
    for n in 1..=upto {
        for m in (n + 1)..=upto {
            let yn = &stream.vectors[n - 1];
            let ym = &stream.vectors[m - 1];
            if yn.len() != ym.len() {
                return Ok(StrongValidation::Violation { n, m });
            }
            let bound = &Rational::pow2(-(n as i64)) + &Rational::pow2(-(m as i64));
            if norm1_diff(yn, ym) > bound {
                return Ok(StrongValidation::Violation { n, m });
            }
        }
    }
    Ok(StrongValidation::Valid)
}

/// Serializes a stream as one JSON object per line. The rendering is fully
/// deterministic (fixed key order, no whitespace), so identical runs dump
/// byte-identical files on every platform.
pub fn stream_to_jsonl(stream: &OutputStream) -> String {
    let mut out = String::new();
    for (k, vec) in stream.vectors.iter().enumerate() {
        out.push_str(&format!("{{\"n\":{},\"dim\":{},\"values\":[", k + 1, vec.len()));
        for (i, v) in vec.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push('"');
            out.push_str(&v.to_string());
            out.push('"');
        }
        out.push_str("]}\n");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StreamParseError {
    BadJson { line: usize, msg: String },
    MissingField { line: usize, field: &'static str },
    BadRational { line: usize, value: String },
    WrongIndex { line: usize, expected: usize },
    DimMismatch { line: usize },
}

impl fmt::Display for StreamParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StreamParseError::BadJson { line, msg } => write!(f, "line {line}: bad JSON: {msg}"),
            StreamParseError::MissingField { line, field } => {
                write!(f, "line {line}: missing field `{field}`")
            }
            StreamParseError::BadRational { line, value } => {
                write!(f, "line {line}: bad rational `{value}`")
            }
            StreamParseError::WrongIndex { line, expected } => {
                write!(f, "line {line}: expected index n={expected}")
            }
            StreamParseError::DimMismatch { line } => {
                write!(f, "line {line}: dim does not match number of values")
            }
        }
    }
}

impl std::error::Error for StreamParseError {}

/// Parses a JSON-lines stream dump; entries must be numbered 1, 2, ... in
/// order and internally consistent.
pub fn parse_jsonl_stream(text: &str, mode: StreamMode) -> Result<OutputStream, StreamParseError> {
    let mut vectors = Vec::new();
    let mut expected = 1usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(raw)
            .map_err(|e| StreamParseError::BadJson { line, msg: e.to_string() })?;
        let n = value
            .get("n")
            .and_then(|v| v.as_u64())
            .ok_or(StreamParseError::MissingField { line, field: "n" })?;
        if n as usize != expected {
            return Err(StreamParseError::WrongIndex { line, expected });
        }
        let dim = value
            .get("dim")
            .and_then(|v| v.as_u64())
            .ok_or(StreamParseError::MissingField { line, field: "dim" })?;
        let values = value
            .get("values")
            .and_then(|v| v.as_array())
            .ok_or(StreamParseError::MissingField { line, field: "values" })?;
        if values.len() as u64 != dim {
            return Err(StreamParseError::DimMismatch { line });
        }
        let mut vec = Vec::with_capacity(values.len());
        for v in values {
            let s = v.as_str().ok_or(StreamParseError::MissingField { line, field: "values" })?;
            let q: Rational = s.parse().map_err(|_| StreamParseError::BadRational {
                line,
                value: s.to_string(),
            })?;
            vec.push(q);
        }
        vectors.push(vec);
        expected += 1;
    }
    Ok(OutputStream::from_vectors(mode, vectors))
}
