//! Vowel-group syllable heuristics.
//!
//! * `en`: groups of `a e i o u y`; a final silent `e` is dropped unless it
//!   is the only group or the word ends in consonant + `le`.
//! * `nl`: groups of `a e i o u y` and their accented forms (`ij` counts
//!   once since `j` is a consonant).
//! * `de`: groups of `a e i o u y ä ö ü`, so diphthongs (`ei`, `au`, `eu`,
//!   `äu`, `ie`) count once.
//! * `ru`: every vowel letter (`а е ё и о у ы э ю я`) is one syllable.
//!
//! Words with at least one letter get at least one syllable; tokens without
//! letters (numbers, punctuation) get zero.

use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

fn is_vowel(c: char, language: &str) -> bool {
    match language {
        "en" => matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y'),
        "nl" => matches!(
            c,
            'a' | 'e'
                | 'i'
                | 'o'
                | 'u'
                | 'y'
                | 'à'
                | 'á'
                | 'â'
                | 'ä'
                | 'è'
                | 'é'
                | 'ê'
                | 'ë'
                | 'ì'
                | 'í'
                | 'î'
                | 'ï'
                | 'ò'
                | 'ó'
                | 'ô'
                | 'ö'
                | 'ù'
                | 'ú'
                | 'û'
                | 'ü'
        ),
        "de" => matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y' | 'ä' | 'ö' | 'ü' | 'é'),
        _ => matches!(c, 'а' | 'е' | 'ё' | 'и' | 'о' | 'у' | 'ы' | 'э' | 'ю' | 'я'),
    }
}

/// Whether a token counts as a word for readability purposes.
pub fn is_word(token: &str) -> bool {
    token.chars().any(char::is_alphabetic)
}

pub fn count_syllables(word: &str, language: &str) -> Result<usize> {
    if !matches!(language, "en" | "nl" | "de" | "ru") {
        return Err(Error::UnsupportedLanguage(String::from(language)));
    }
    let letters: Vec<char> = word.to_lowercase().chars().filter(|c| c.is_alphabetic()).collect();
    if letters.is_empty() {
        return Ok(0);
    }
    if language == "ru" {
        let n = letters.iter().filter(|c| is_vowel(**c, "ru")).count();
        return Ok(n.max(1));
    }

    let mut groups = 0usize;
    let mut in_group = false;
    for &c in &letters {
        let v = is_vowel(c, language);
        if v && !in_group {
            groups += 1;
        }
        in_group = v;
    }
    if language == "en" && groups > 1 && silent_final_e(&letters) {
        groups -= 1;
    }
    Ok(groups.max(1))
}

fn silent_final_e(letters: &[char]) -> bool {
    let n = letters.len();
    if n < 2 || letters[n - 1] != 'e' || is_vowel(letters[n - 2], "en") {
        return false;
    }
    // "table", "little": the e is voiced
    let consonant_le = n >= 3 && letters[n - 2] == 'l' && !is_vowel(letters[n - 3], "en");
    !consonant_le
}
