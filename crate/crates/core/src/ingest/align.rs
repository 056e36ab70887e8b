//! Mapping character-level annotations onto token spans.

use thiserror::Error;

use crate::model::{Instance, Span};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlignError {
    #[error("char span ({start}, {end}) is invalid for text of {len} chars")]
    InvalidCharSpan { start: usize, end: usize, len: usize },
    #[error("char span ({start}, {end}) touches no token")]
    NoCoveringToken { start: usize, end: usize },
}

/// Token span chosen for a character span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignmentOutcome {
    pub span: Span,
    /// True iff both char boundaries coincide with token boundaries.
    pub exact: bool,
}

/// Minimal token span covering every tokenized character of `[char_start, char_end)`.
///
/// Characters that belong to no token (inter-token whitespace) cannot be covered and are
/// ignored; when the request starts or ends on such characters the outcome is inexact.
pub fn align_char_span(
    instance: &Instance,
    char_start: usize,
    char_end: usize,
) -> Result<AlignmentOutcome, AlignError> {
    if char_start >= char_end || char_end > instance.char_len() {
        return Err(AlignError::InvalidCharSpan {
            start: char_start,
            end: char_end,
            len: instance.char_len(),
        });
    }
    let offsets = instance.char_offsets();
    // offsets are sorted and disjoint: first token ending after char_start
    let first = offsets.partition_point(|&(_, e)| e <= char_start);
    // one past the last token starting before char_end
    let last = offsets.partition_point(|&(s, _)| s < char_end);
    if first >= last {
        return Err(AlignError::NoCoveringToken { start: char_start, end: char_end });
    }
    let span = Span::new(first, last).expect("first < last");
    let exact = offsets[first].0 == char_start && offsets[last - 1].1 == char_end;
    Ok(AlignmentOutcome { span, exact })
}
