/// Counts tokens in a piece of text.
pub trait Tokenizer: Send + Sync {
    fn count(&self, text: &str) -> usize;
}

/// The default tokenizer: one token per four characters, rounded up.
#[derive(Debug, Clone, Copy, Default)]
pub struct CharApproxTokenizer;

impl Tokenizer for CharApproxTokenizer {
    fn count(&self, text: &str) -> usize {
        count_tokens(text)
    }
}

/// `ceil(chars / 4)`, counting Unicode scalar values.
pub fn count_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}
