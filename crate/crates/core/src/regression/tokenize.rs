//! Subword tokenization and word/piece alignment.
//!
//! Encoders see subword pieces while gaze targets exist per word. Each word
//! is represented by its first piece; later pieces of the same word are left
//! out of both the loss and prediction gathering.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const CLS_ID: usize = 0;
pub const SEP_ID: usize = 1;
pub const UNK_ID: usize = 2;
pub const CONTINUATION: &str = "##";

/// One subword piece of an encoded sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub text: String,
    pub id: usize,
    /// Owning word, `None` for special tokens.
    pub word: Option<usize>,
    /// Character length of the owning word, 0 for special tokens.
    pub word_chars: usize,
}

pub trait SubwordTokenizer {
    /// Pieces of a single word as `(text, vocabulary id)`.
    fn split_word(&self, word: &str) -> Vec<(String, usize)>;

    fn vocab_size(&self) -> usize;

    /// `[CLS] pieces... [SEP]` with word ownership attached.
    fn encode(&self, words: &[&str]) -> Vec<Piece> {
        let mut pieces = Vec::with_capacity(words.len() + 2);
        pieces.push(special("[CLS]", CLS_ID));
        for (w, word) in words.iter().enumerate() {
            let chars = word.chars().count();
            for (text, id) in self.split_word(word) {
                pieces.push(Piece {
                    text,
                    id,
                    word: Some(w),
                    word_chars: chars,
                });
            }
        }
        pieces.push(special("[SEP]", SEP_ID));
        pieces
    }
}

fn special(text: &str, id: usize) -> Piece {
    Piece {
        text: String::from(text),
        id,
        word: None,
        word_chars: 0,
    }
}

/// Greedy longest-match-first tokenizer over a fixed vocabulary. A word that
/// cannot be fully covered becomes a single `[UNK]` piece.
#[derive(Debug, Clone)]
pub struct WordPiece {
    vocab: BTreeMap<String, usize>,
    lowercase: bool,
    max_word_chars: usize,
}

impl WordPiece {
    /// Ids 0–2 are reserved for `[CLS]`, `[SEP]` and `[UNK]`; vocabulary
    /// entries are numbered from 3 in the given order.
    pub fn new<S: AsRef<str>>(entries: &[S], lowercase: bool) -> Self {
        let vocab = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (String::from(e.as_ref()), i + 3))
            .collect();
        Self {
            vocab,
            lowercase,
            max_word_chars: 100,
        }
    }
}

impl SubwordTokenizer for WordPiece {
    fn split_word(&self, word: &str) -> Vec<(String, usize)> {
        let word: String = if self.lowercase {
            word.to_lowercase()
        } else {
            String::from(word)
        };
        let chars: Vec<char> = word.chars().collect();
        let unk = || alloc::vec![(String::from("[UNK]"), UNK_ID)];
        if chars.len() > self.max_word_chars {
            return unk();
        }
        let mut out = Vec::new();
        let mut start = 0;
        while start < chars.len() {
            let mut end = chars.len();
            let mut found = None;
            while end > start {
                let mut candidate = String::new();
                if start > 0 {
                    candidate.push_str(CONTINUATION);
                }
                candidate.extend(&chars[start..end]);
                if let Some(&id) = self.vocab.get(&candidate) {
                    found = Some((candidate, id));
                    break;
                }
                end -= 1;
            }
            match found {
                Some(piece) => out.push(piece),
                None => return unk(),
            }
            start = end;
        }
        out
    }

    fn vocab_size(&self) -> usize {
        self.vocab.len() + 3
    }
}

/// Vocabulary-free tokenizer for the desk-scale encoder: lowercases, cuts
/// each word into chunks of `chunk` characters (continuations prefixed with
/// `##`) and hashes every chunk into a fixed number of buckets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashedChunks {
    pub vocab_size: usize,
    pub chunk: usize,
}

impl HashedChunks {
    fn bucket(&self, piece: &str) -> usize {
        // FNV-1a
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in piece.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        3 + (h % (self.vocab_size as u64 - 3)) as usize
    }
}

impl SubwordTokenizer for HashedChunks {
    fn split_word(&self, word: &str) -> Vec<(String, usize)> {
        let chars: Vec<char> = word.to_lowercase().chars().collect();
        chars
            .chunks(self.chunk.max(1))
            .enumerate()
            .map(|(i, c)| {
                let mut text = String::new();
                if i > 0 {
                    text.push_str(CONTINUATION);
                }
                text.extend(c);
                let id = self.bucket(&text);
                (text, id)
            })
            .collect()
    }

    fn vocab_size(&self) -> usize {
        self.vocab_size
    }
}

/// Word/piece correspondence of one encoded sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubwordAlignment {
    /// Position of each word's first piece; strictly increasing.
    pub first_piece: Vec<usize>,
    /// Owning word of each piece.
    pub owner: Vec<Option<usize>>,
}

impl SubwordAlignment {
    /// Whether piece `p` carries a word's prediction and loss.
    pub fn is_first(&self, p: usize) -> bool {
        match self.owner[p] {
            Some(w) => self.first_piece[w] == p,
            None => false,
        }
    }

    pub fn n_words(&self) -> usize {
        self.first_piece.len()
    }

    /// Picks the first-piece rows of a `pieces × width` matrix.
    pub fn gather<T: Copy>(&self, rows: &[T], width: usize) -> Vec<T> {
        self.first_piece
            .iter()
            .flat_map(|&p| rows[p * width..(p + 1) * width].iter().copied())
            .collect()
    }
}

/// Locates the first piece of each of `n_words` words.
pub fn align_subwords(n_words: usize, pieces: &[Piece]) -> Result<SubwordAlignment> {
    let mut first_piece: Vec<Option<usize>> = alloc::vec![None; n_words];
    let mut last_word: Option<usize> = None;
    for (p, piece) in pieces.iter().enumerate() {
        let Some(w) = piece.word else { continue };
        if w >= n_words || last_word.is_some_and(|lw| w < lw) {
            return Err(Error::PieceOrder { piece: p });
        }
        if last_word != Some(w) && first_piece[w].is_some() {
            // word resumed after another word's pieces
            return Err(Error::PieceOrder { piece: p });
        }
        if first_piece[w].is_none() {
            first_piece[w] = Some(p);
        }
        last_word = Some(w);
    }
    let first_piece = first_piece
        .into_iter()
        .enumerate()
        .map(|(w, p)| p.ok_or(Error::UnalignedWord { word: w }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SubwordAlignment {
        first_piece,
        owner: pieces.iter().map(|p| p.word).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn philammon_first_piece() {
        let wp = WordPiece::new(&["phil", "##am", "##mon", "the", "hero"], true);
        let pieces = wp.encode(&["the", "hero", "Philammon"]);
        let texts: Vec<&str> = pieces.iter().map(|p| p.text.as_str()).collect();
        assert_eq!(texts, ["[CLS]", "the", "hero", "phil", "##am", "##mon", "[SEP]"]);
        let a = align_subwords(3, &pieces).unwrap();
        assert_eq!(a.first_piece, [1, 2, 3]);
        assert!(a.is_first(3) && !a.is_first(4) && !a.is_first(5) && !a.is_first(0));
    }

    #[test]
    fn one_piece_per_word_is_identity() {
        let wp = WordPiece::new(&["a", "b", "c"], false);
        let pieces = wp.encode(&["a", "b", "c"]);
        let a = align_subwords(3, &pieces).unwrap();
        assert_eq!(a.first_piece, [1, 2, 3]);
    }

    #[test]
    fn uncoverable_word_is_unk() {
        let wp = WordPiece::new(&["ab"], false);
        assert_eq!(wp.split_word("abz"), vec![(String::from("[UNK]"), UNK_ID)]);
    }

    #[test]
    fn word_without_pieces_errors() {
        let pieces = vec![
            special("[CLS]", CLS_ID),
            Piece {
                text: "x".into(),
                id: 5,
                word: Some(0),
                word_chars: 1,
            },
        ];
        assert_eq!(align_subwords(2, &pieces), Err(Error::UnalignedWord { word: 1 }));
    }

    #[test]
    fn out_of_order_pieces_error() {
        let p = |w| Piece {
            text: "x".into(),
            id: 5,
            word: Some(w),
            word_chars: 1,
        };
        assert!(matches!(
            align_subwords(2, &[p(1), p(0)]),
            Err(Error::PieceOrder { .. })
        ));
        assert!(matches!(
            align_subwords(2, &[p(0), p(1), p(0)]),
            Err(Error::PieceOrder { .. })
        ));
    }

    #[test]
    fn hashed_chunks_are_stable() {
        let t = HashedChunks {
            vocab_size: 512,
            chunk: 3,
        };
        let a = t.split_word("Reading");
        let texts: Vec<&str> = a.iter().map(|(s, _)| s.as_str()).collect();
        assert_eq!(texts, ["rea", "##din", "##g"]);
        assert_eq!(a, t.split_word("reading"));
        assert!(a.iter().all(|(_, id)| (3..512).contains(id)));
    }
}
