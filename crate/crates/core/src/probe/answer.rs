//! Yes/no parsing of raw oracle generations.

use serde::{Deserialize, Serialize};

/// Ternary reading of a generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParsedAnswer {
    Yes,
    No,
    Unparseable,
}

impl ParsedAnswer {
    pub fn as_str(self) -> &'static str {
        match self {
            ParsedAnswer::Yes => "yes",
            ParsedAnswer::No => "no",
            ParsedAnswer::Unparseable => "unparseable",
        }
    }
}

/// Classifies a raw generation. The text is trimmed and lowercased; its
/// leading whitespace-delimited token (with trailing punctuation
/// stripped) decides: `true`/`yes` affirm, `false`/`no` deny, anything
/// else is unparseable. Total over all inputs.
pub fn parse_answer(raw: &str) -> ParsedAnswer {
    let normalized = raw.trim().to_lowercase();
    let token = normalized
        .split_whitespace()
        .next()
        .unwrap_or("")
        .trim_end_matches(['.', ',', '!', '?', ';', ':']);
    match token {
        "true" | "yes" => ParsedAnswer::Yes,
        "false" | "no" => ParsedAnswer::No,
        _ => ParsedAnswer::Unparseable,
    }
}

/// One answered probe, as it travels between the cache, the oracle
/// driver, and matrix assembly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleAnswer {
    /// Cache key of the probe (see [`crate::probe::cache_key`]).
    pub key: String,
    pub raw_text: String,
    pub parsed: ParsedAnswer,
    pub from_cache: bool,
    /// Seconds since the Unix epoch when the answer was produced.
    pub timestamp: u64,
}
