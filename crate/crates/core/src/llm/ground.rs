//! Locating generated strings in the source text.

use serde::{Deserialize, Serialize};

use crate::ingest::align_char_span;
use crate::model::{Instance, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundedSpan {
    pub span: Span,
    /// The match starts and ends on token boundaries, so the span's text is the match itself.
    pub exact: bool,
    /// Found only by the case-insensitive search.
    pub case_folded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Grounding {
    Grounded(GroundedSpan),
    Hallucination,
}

impl Grounding {
    pub fn span(&self) -> Option<Span> {
        match self {
            Grounding::Grounded(g) => Some(g.span),
            Grounding::Hallucination => None,
        }
    }
}

fn chars_equal(a: char, b: char, fold: bool) -> bool {
    a == b || (fold && a.to_lowercase().eq(b.to_lowercase()))
}

/// Char-index start positions where `needle` occurs in `hay`.
fn occurrences(hay: &[char], needle: &[char], fold: bool) -> Vec<usize> {
    if needle.len() > hay.len() {
        return Vec::new();
    }
    (0..=hay.len() - needle.len())
        .filter(|&i| hay[i..i + needle.len()].iter().zip(needle).all(|(&a, &b)| chars_equal(a, b, fold)))
        .collect()
}

/// Maps a candidate string onto the instance's tokens.
///
/// Search order: case-sensitive token-aligned match, case-insensitive token-aligned match,
/// then matches cutting through tokens (snapped to the covering tokens), case-sensitive before
/// case-insensitive. The leftmost match wins within each tier. No match at all is a
/// hallucination.
pub fn ground_span(instance: &Instance, candidate: &str) -> Grounding {
    let candidate = candidate.trim();
    if candidate.is_empty() || instance.is_empty() {
        return Grounding::Hallucination;
    }
    let hay: Vec<char> = instance.text().chars().collect();
    let needle: Vec<char> = candidate.chars().collect();

    let mut snapped: [Option<GroundedSpan>; 2] = [None, None];
    for (tier, fold) in [false, true].into_iter().enumerate() {
        for start in occurrences(&hay, &needle, fold) {
            let Ok(outcome) = align_char_span(instance, start, start + needle.len()) else {
                continue;
            };
            let grounded = GroundedSpan { span: outcome.span, exact: outcome.exact, case_folded: fold };
            if outcome.exact {
                return Grounding::Grounded(grounded);
            }
            snapped[tier].get_or_insert(grounded);
        }
    }
    snapped.into_iter().flatten().next().map_or(Grounding::Hallucination, Grounding::Grounded)
}
