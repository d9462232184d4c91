//! Potential JSON and sample text formats.
//!
//! A potential file gives the alphabet size, the range `r`, the metric
//! parameter `θ` (default 0.5) and either a `values` table keyed by every
//! `(r+1)`-block, or a row-stochastic `transition` matrix:
//!
//! ```json
//! {"alphabet": 2, "range": 1, "theta": 0.5,
//!  "values": {"00": -0.105, "01": -2.303, "10": -1.609, "11": -0.223}}
//! ```
//!
//! Samples are text: `#` starts a comment line, and a comment containing
//! `alphabet=N` fixes the alphabet. Over at most ten symbols the body is a
//! run of digits (whitespace ignored); larger alphabets separate symbols by
//! commas or whitespace.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use gibbs_entropy_core::gibbs::Potential;
use gibbs_entropy_core::shift::Symbol;
use gibbs_entropy_core::{Alphabet, BlockFunction, MetricParams, SymbolSequence};
use serde::{Deserialize, Serialize};

/// A malformed input file.
#[derive(Debug, thiserror::Error)]
#[error("{source_name}{}: {message}", location(*.line, *.column))]
pub struct ParseError {
    pub source_name: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

fn location(line: Option<usize>, column: Option<usize>) -> String {
    match (line, column) {
        (Some(l), Some(c)) => format!(":{l}:{c}"),
        (Some(l), None) => format!(":{l}"),
        _ => String::new(),
    }
}

impl ParseError {
    pub fn new(source_name: &str, message: impl Into<String>) -> Self {
        Self { source_name: source_name.to_string(), line: None, column: None, message: message.into() }
    }

    fn at_line(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Self { line: Some(line), ..Self::new(source_name, message) }
    }

    fn from_json(source_name: &str, e: &serde_json::Error) -> Self {
        let mut msg = e.to_string();
        // serde_json appends " at line L column C"; it is carried separately.
        if let Some(i) = msg.find(" at line ") {
            msg.truncate(i);
        }
        Self { line: Some(e.line()), column: Some(e.column()), ..Self::new(source_name, msg) }
    }
}

/// On-disk form of a potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialFile {
    pub alphabet: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition: Option<Vec<Vec<f64>>>,
}

impl PotentialFile {
    pub fn parse(text: &str, source_name: &str) -> Result<Self, ParseError> {
        serde_json::from_str(text).map_err(|e| ParseError::from_json(source_name, &e))
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        Ok(Self::parse(&text, &path.display().to_string())?)
    }

    /// The table form of `p`.
    pub fn from_potential(p: &Potential) -> Self {
        let a = p.alphabet();
        let len = p.range() + 1;
        let values = p
            .table()
            .values()
            .iter()
            .enumerate()
            .map(|(code, &v)| (a.format_block(&a.decode(code, len)), v))
            .collect();
        Self { alphabet: a.size(), range: Some(p.range()), theta: Some(p.theta()), values: Some(values), transition: None }
    }

    pub fn to_potential(&self, source_name: &str) -> anyhow::Result<Potential> {
        let err = |m: String| ParseError::new(source_name, m);
        let alphabet = Alphabet::new(self.alphabet).map_err(|e| err(e.to_string()))?;
        let metric = MetricParams::new(self.theta.unwrap_or(0.5)).map_err(|e| err(e.to_string()))?;
        match (&self.values, &self.transition) {
            (Some(_), Some(_)) => Err(err("give either \"values\" or \"transition\", not both".into()).into()),
            (None, None) => Err(err("missing \"values\" (or \"transition\")".into()).into()),
            (None, Some(rows)) => {
                if self.range.is_some_and(|r| r != 1) {
                    return Err(err("a transition matrix defines a range-1 potential".into()).into());
                }
                if rows.len() != self.alphabet {
                    return Err(err(format!("transition matrix has {} rows, expected {}", rows.len(), self.alphabet)).into());
                }
                Ok(Potential::from_transition_matrix(rows, metric).map_err(|e| err(e.to_string()))?)
            }
            (Some(values), None) => {
                let range = self.range.ok_or_else(|| err("missing \"range\"".into()))?;
                let len = range + 1;
                let count = alphabet
                    .block_count(len)
                    .filter(|&c| c <= 1 << 20)
                    .ok_or_else(|| err(format!("|A|^(r+1) is too large for range {range}")))?;
                let mut table = vec![None; count];
                for (key, &v) in values {
                    let block = alphabet
                        .parse_block(key, len)
                        .map_err(|e| err(format!("bad block {key:?}: {e}")))?;
                    table[alphabet.encode(&block)] = Some(v);
                }
                let table = table
                    .into_iter()
                    .enumerate()
                    .map(|(code, v)| {
                        v.ok_or_else(|| {
                            err(format!("missing value for block \"{}\"", alphabet.format_block(&alphabet.decode(code, len))))
                        })
                    })
                    .collect::<Result<Vec<f64>, _>>()?;
                let table = BlockFunction::new(alphabet, range, table).map_err(|e| err(e.to_string()))?;
                Ok(Potential::from_table(table, metric))
            }
        }
    }
}

/// Read a potential file and build the potential.
pub fn load_potential(path: &Path) -> anyhow::Result<Potential> {
    PotentialFile::load(path)?.to_potential(&path.display().to_string())
}

/// Parse sample text. `alphabet` is used when the text has no header.
pub fn parse_sequence(text: &str, alphabet: Option<Alphabet>, source_name: &str) -> Result<SymbolSequence, ParseError> {
    let mut header: Option<Alphabet> = None;
    for (i, line) in text.lines().enumerate() {
        if let Some(comment) = line.trim_start().strip_prefix('#') {
            for tok in comment.split_whitespace() {
                if let Some(v) = tok.strip_prefix("alphabet=") {
                    let size: usize = v
                        .parse()
                        .map_err(|_| ParseError::at_line(source_name, i + 1, format!("bad alphabet size {v:?}")))?;
                    header = Some(
                        Alphabet::new(size).map_err(|e| ParseError::at_line(source_name, i + 1, e.to_string()))?,
                    );
                }
            }
        }
    }
    let alphabet = header.or(alphabet).unwrap_or_else(Alphabet::binary);
    let mut symbols: Vec<Symbol> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim_start().starts_with('#') {
            continue;
        }
        let bad = |tok: &str| {
            ParseError::at_line(source_name, i + 1, format!("symbol {tok:?} is not in an alphabet of size {}", alphabet.size()))
        };
        if alphabet.size() <= 10 {
            for c in line.chars().filter(|c| !c.is_whitespace()) {
                let s = c.to_digit(10).map(|d| d as Symbol).filter(|&d| alphabet.contains(d));
                symbols.push(s.ok_or_else(|| bad(&c.to_string()))?);
            }
        } else {
            for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
                let s = tok.parse::<Symbol>().ok().filter(|&d| alphabet.contains(d));
                symbols.push(s.ok_or_else(|| bad(tok))?);
            }
        }
    }
    SymbolSequence::new(alphabet, symbols).map_err(|e| ParseError::new(source_name, e.to_string()))
}

pub fn load_sequence(path: &Path, alphabet: Option<Alphabet>) -> anyhow::Result<SymbolSequence> {
    let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    Ok(parse_sequence(&text, alphabet, &path.display().to_string())?)
}

/// Sample text with an `alphabet=` header, 80 symbols per line when digits.
pub fn format_sequence(x: &SymbolSequence, comment: &str) -> String {
    let a = x.alphabet();
    let mut out = format!("# alphabet={}", a.size());
    if !comment.is_empty() {
        write!(out, " {comment}").unwrap();
    }
    out.push('\n');
    if a.size() <= 10 {
        for chunk in x.symbols().chunks(80) {
            out.extend(chunk.iter().map(|&s| char::from(b'0' + s)));
            out.push('\n');
        }
    } else {
        for chunk in x.symbols().chunks(32) {
            let line: Vec<String> = chunk.iter().map(|s| s.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
    }
    out
}
