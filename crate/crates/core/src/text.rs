//! Low-level word tokenization shared by the embedder, the keyword pipeline
//! and the lexicon scorers.

/// Word characters are Unicode alphanumerics and `_`.
#[inline]
pub fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Lowercased runs of word characters. Every other character (including the
/// `#` of a hashtag) acts as a separator.
pub fn word_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !is_word_char(c))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_non_word_and_folds_case() {
        assert_eq!(word_tokens("Running #AI models!"), vec!["running", "ai", "models"]);
        assert_eq!(word_tokens("  "), Vec::<String>::new());
        assert_eq!(word_tokens("snake_case x-y"), vec!["snake_case", "x", "y"]);
    }
}
