use crate::parse::count_tokens;
use crate::resolver::{Chunk, ChunkMethod};

use super::BaselineError;

pub const DEFAULT_FIXED_SIZE: usize = 512;
pub const DEFAULT_FIXED_OVERLAP: usize = 64;

/// Sliding windows of `size_tokens` with stride `size_tokens - overlap_tokens`.
///
/// Token positions map to characters at four characters per token. Window
/// edges are moved to the nearest word start within half a stride, so words
/// are not cut; with zero overlap consecutive windows share their edge and
/// the bodies concatenate back to `text`.
pub fn fixed_size_chunk(
    doc_id: &str,
    text: &str,
    size_tokens: usize,
    overlap_tokens: usize,
) -> Result<Vec<Chunk>, BaselineError> {
    if size_tokens <= overlap_tokens {
        return Err(BaselineError::Config {
            size: size_tokens,
            overlap: overlap_tokens,
        });
    }
    let offsets: Vec<usize> = text.char_indices().map(|(i, _)| i).collect();
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let stride = size_tokens - overlap_tokens;
    let radius = (stride * 4).saturating_sub(1) / 2;
    let is_word_start = |q: usize| !chars[q].is_whitespace() && chars[q - 1].is_whitespace();
    let snap = |p: usize| -> usize {
        if p == 0 || p >= n {
            return p.min(n);
        }
        for d in 0..=radius {
            if d <= p && p - d > 0 && is_word_start(p - d) {
                return p - d;
            }
            if p + d < n && is_word_start(p + d) {
                return p + d;
            }
        }
        p
    };
    let byte = |c: usize| offsets.get(c).copied().unwrap_or(text.len());

    let total_tokens = n.div_ceil(4);
    let mut chunks = Vec::new();
    let mut start_token = 0;
    while start_token < total_tokens {
        let start = snap(start_token * 4);
        let end = snap(((start_token + size_tokens) * 4).min(n));
        if end > start {
            let body = &text[byte(start)..byte(end)];
            chunks.push(Chunk {
                chunk_id: format!("{doc_id}#{}", chunks.len() + 1),
                doc_id: doc_id.to_string(),
                heading_trail: Vec::new(),
                unit_ids: Vec::new(),
                token_count: count_tokens(body),
                body: body.to_string(),
                method: ChunkMethod::Fixed,
            });
        }
        start_token += stride;
    }
    Ok(chunks)
}
