use crate::model::{Instance, ModelError};

/// Splits on Unicode whitespace, returning tokens with char offsets.
///
/// Only meant for building fixtures; real corpora arrive pre-tokenized.
pub fn whitespace_tokenize(text: &str) -> (Vec<String>, Vec<(usize, usize)>) {
    let mut tokens = Vec::new();
    let mut offsets = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    let mut n = 0;
    for (i, c) in text.chars().enumerate() {
        if c.is_whitespace() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
                offsets.push((start, i));
            }
        } else {
            if current.is_empty() {
                start = i;
            }
            current.push(c);
        }
        n = i + 1;
    }
    if !current.is_empty() {
        tokens.push(current);
        offsets.push((start, n));
    }
    (tokens, offsets)
}

/// Builds an [`Instance`] from raw text with the whitespace tokenizer.
pub fn instance_from_text(
    instance_id: impl Into<String>,
    doc_id: impl Into<String>,
    window_index: usize,
    text: &str,
) -> Result<Instance, ModelError> {
    let (tokens, offsets) = whitespace_tokenize(text);
    Instance::new(instance_id, doc_id, window_index, tokens, text, offsets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizes_with_offsets() {
        let (t, o) = whitespace_tokenize("  I love\tNY ");
        assert_eq!(t, vec!["I", "love", "NY"]);
        assert_eq!(o, vec![(2, 3), (4, 8), (9, 11)]);
    }

    #[test]
    fn empty_text() {
        let (t, o) = whitespace_tokenize("");
        assert!(t.is_empty() && o.is_empty());
        assert!(instance_from_text("i", "d", 0, "").unwrap().is_empty());
    }
}
