//! Halting-oracle machinery behind the `QRY` instruction: membership
//! queries against the halting set, answered at desk scale by bounded
//! simulation or a curated ground-truth table.
//!
//! The true halting set is undecidable; [`OraclePolicy::Budgeted`] is the
//! executable approximation (sound for "halts", incomplete for "does not
//! halt") and [`OraclePolicy::Table`] is the verification ground truth.
//! Tests that depend on oracle answers state which policy they use.

use std::collections::BTreeMap;
use std::fmt;

use crate::exact::Rational;
use crate::exec::{run_bss, QueryAnswerer, RunOutcome};
use crate::machine::{decode_machine, GoedelCode, Program};

/// A membership question: does the coded machine halt on this input?
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OracleQuery {
    pub machine_code: GoedelCode,
    pub input: Vec<Rational>,
}

impl fmt::Display for OracleQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.machine_code, format_input(&self.input))
    }
}

fn format_input(input: &[Rational]) -> String {
    if input.is_empty() {
        "-".to_string()
    } else {
        input.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// How queries are answered.
#[derive(Debug, Clone)]
pub enum OraclePolicy {
    /// "Halts" iff the decoded machine terminates within this many steps.
    /// A code that decodes to no valid program is a definite non-member.
    Budgeted(u64),
    /// Curated ground truth for a declared set of queries.
    Table(BTreeMap<OracleQuery, bool>),
    /// Budgeted with the budget equal to the current level, re-answerable as
    /// the level grows; made for simulation-level algorithms.
    Layered { level: u64 },
}

/// The basis an answer was produced under, as recorded in the log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnswerBasis {
    Budget(u64),
    Table,
}

impl fmt::Display for AnswerBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnswerBasis::Budget(b) => write!(f, "budget={b}"),
            AnswerBasis::Table => write!(f, "table"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LogEntry {
    pub query: OracleQuery,
    pub basis: AnswerBasis,
    pub answer: bool,
}

/// Append-only record of every answered query; replayable.
#[derive(Debug, Clone, Default)]
pub struct OracleAnswerLog {
    pub entries: Vec<LogEntry>,
}

impl OracleAnswerLog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    /// Table policy: the query was not declared.
    UnknownQuery(String),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::UnknownQuery(q) => write!(f, "undeclared oracle query: {q}"),
        }
    }
}

impl std::error::Error for OracleError {}

/// A policy plus its answer log and a per-(query, budget) cache.
pub struct OracleSession {
    policy: OraclePolicy,
    log: OracleAnswerLog,
    cache: BTreeMap<(OracleQuery, u64), bool>,
}

impl OracleSession {
    pub fn new(policy: OraclePolicy) -> Self {
        OracleSession { policy, log: OracleAnswerLog::default(), cache: BTreeMap::new() }
    }

    pub fn budgeted(steps: u64) -> Self {
        OracleSession::new(OraclePolicy::Budgeted(steps))
    }

    pub fn table(map: BTreeMap<OracleQuery, bool>) -> Self {
        OracleSession::new(OraclePolicy::Table(map))
    }

    pub fn layered(level: u64) -> Self {
        OracleSession::new(OraclePolicy::Layered { level })
    }

    pub fn log(&self) -> &OracleAnswerLog {
        &self.log
    }

    pub fn level(&self) -> Option<u64> {
        match self.policy {
            OraclePolicy::Layered { level } => Some(level),
            _ => None,
        }
    }

    /// Raises the layered level; answers may flip from "does not halt" to
    /// "halts", never back.
    pub fn raise_level(&mut self) {
        if let OraclePolicy::Layered { level } = &mut self.policy {
            *level += 1;
        }
    }

    pub fn set_level(&mut self, new_level: u64) {
        if let OraclePolicy::Layered { level } = &mut self.policy {
            *level = new_level;
        }
    }

    fn answer_budgeted(&mut self, query: &OracleQuery, budget: u64) -> bool {
        if let Some(&hit) = self.cache.get(&(query.clone(), budget)) {
            self.log.entries.push(LogEntry {
                query: query.clone(),
                basis: AnswerBasis::Budget(budget),
                answer: hit,
            });
            return hit;
        }
        let answer = match decode_machine(&query.machine_code) {
            // Not a code at all: a definite non-member of the halting set.
            Err(_) => false,
            Ok(program) => {
                matches!(run_bss(&program, &query.input, budget.max(1)), RunOutcome::Terminated(_))
            }
        };
        self.cache.insert((query.clone(), budget), answer);
        self.log.entries.push(LogEntry {
            query: query.clone(),
            basis: AnswerBasis::Budget(budget),
            answer,
        });
        answer
    }

    /// Answers one query under the session policy, appending to the log.
    pub fn answer(&mut self, query: &OracleQuery) -> Result<bool, OracleError> {
        match &self.policy {
            OraclePolicy::Budgeted(steps) => {
                let b = *steps;
                Ok(self.answer_budgeted(query, b))
            }
            OraclePolicy::Layered { level } => {
                let b = *level;
                Ok(self.answer_budgeted(query, b))
            }
            OraclePolicy::Table(map) => match map.get(query) {
                Some(&answer) => {
                    self.log.entries.push(LogEntry {
                        query: query.clone(),
                        basis: AnswerBasis::Table,
                        answer,
                    });
                    Ok(answer)
                }
                None => Err(OracleError::UnknownQuery(query.to_string())),
            },
        }
    }
}

impl QueryAnswerer for OracleSession {
    fn answer(&mut self, query: &OracleQuery) -> Result<bool, String> {
        OracleSession::answer(self, query).map_err(|e| e.to_string())
    }
}

/// Membership query against the halting set under the session's policy.
pub fn halting_query(query: &OracleQuery, session: &mut OracleSession) -> Result<bool, OracleError> {
    session.answer(query)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableParseError {
    BadLine { line: usize, msg: String },
}

impl fmt::Display for TableParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableParseError::BadLine { line, msg } => write!(f, "line {line}: {msg}"),
        }
    }
}

impl std::error::Error for TableParseError {}

/// Parses a table policy file: one `code_hex input_rationals answer` triple
/// per line, inputs comma-separated (`-` for none), answer `0` or `1`.
pub fn parse_table(text: &str) -> Result<BTreeMap<OracleQuery, bool>, TableParseError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let body = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 3 {
            return Err(TableParseError::BadLine {
                line,
                msg: format!("expected `code_hex inputs answer`, found {} fields", fields.len()),
            });
        }
        let code: GoedelCode = fields[0].parse().map_err(|e| TableParseError::BadLine {
            line,
            msg: format!("bad code: {e}"),
        })?;
        let input =
            parse_input_list(fields[1]).map_err(|msg| TableParseError::BadLine { line, msg })?;
        let answer = match fields[2] {
            "0" | "false" => false,
            "1" | "true" => true,
            other => {
                return Err(TableParseError::BadLine {
                    line,
                    msg: format!("bad answer `{other}`"),
                })
            }
        };
        map.insert(OracleQuery { machine_code: code, input }, answer);
    }
    Ok(map)
}

fn parse_input_list(s: &str) -> Result<Vec<Rational>, String> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|part| part.parse::<Rational>().map_err(|e| format!("bad rational `{part}`: {e}")))
        .collect()
}

/// Dumps an answer log in the table file format (one `code inputs answer`
/// line per answer, in order).
pub fn dump_log(log: &OracleAnswerLog) -> String {
    let mut out = String::new();
    for e in &log.entries {
        out.push_str(&format!(
            "{} {} {}\n",
            e.query.machine_code,
            format_input(&e.query.input),
            e.answer as u8
        ));
    }
    out
}

/// Outcome of the iterated-bounds semidecision procedure for output
/// boundedness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundednessAnswer {
    /// Some bound `n` was certified: the oracle reported no output ever
    /// exceeds norm `n`.
    Accept { bound: u64 },
    /// Every bound up to the cap was exceeded; a desk-scale stand-in for
    /// running forever.
    NoAnswer,
}

/// Semidecision of "the output sequence of the coded machine on `input` is
/// bounded": iteratively tries the bounds `n = 1, 2, ...`, asking the oracle
/// whether a searcher machine (which halts exactly when it sees an output of
/// 1-norm strictly exceeding `n`) halts on `(n, input..)`. Finite output
/// sequences count as bounded.
pub fn semidecide_bounded(
    code: &GoedelCode,
    input: &[Rational],
    session: &mut OracleSession,
    bound_cap: u64,
) -> Result<BoundednessAnswer, OracleError> {
    assert!(bound_cap >= 1, "bound_cap must be at least 1");
    let searcher = norm_exceedance_searcher(code);
    let searcher_code = crate::machine::encode_machine(&searcher);
    for n in 1..=bound_cap {
        let mut query_input = Vec::with_capacity(input.len() + 1);
        query_input.push(Rational::from_int(n as i64));
        query_input.extend_from_slice(input);
        let exceeded = session.answer(&OracleQuery {
            machine_code: searcher_code.clone(),
            input: query_input,
        })?;
        if !exceeded {
            return Ok(BoundednessAnswer::Accept { bound: n });
        }
    }
    Ok(BoundednessAnswer::NoAnswer)
}

/// The auxiliary searcher: simulates the coded machine on `(r1, ..)` and
/// halts exactly when it sees an output vector of 1-norm strictly exceeding
/// the bound given in `r0`; runs forever otherwise (including when the
/// simulated machine halts).
pub fn norm_exceedance_searcher(code: &GoedelCode) -> Program {
    crate::transforms::unisim::norm_exceedance_searcher(code)
}
