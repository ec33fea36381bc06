//! Heuristic retokenization of detokenized system output into
//! reference-style tokens.
//!
//! Rules, tried in order on each whitespace token:
//!
//! 1. clitics (`'s`, `n't`, ...), ellipses and single characters stay whole;
//! 2. a leading quote or opening bracket is split off;
//! 3. a trailing ellipsis, closing quote/bracket or `. , ! ? ; :` is split
//!    off, except the final period of an abbreviation;
//! 4. an inner `, ; : ! ?`, quote or bracket is isolated, except `, ; :`
//!    between two digits;
//! 5. English contractions are split (`don't` -> `do n't`, `It's` -> `It 's`).
//!
//! Every rule recurses on the pieces, so each emitted token is one on which
//! no rule fires. That makes the whole transform idempotent.

use std::collections::HashSet;

use crate::corpus_io::DEFAULT_ABBREVIATIONS;

const OPENERS: &[char] = &['"', '\'', '(', '[', '{', '\u{201C}', '\u{2018}', '\u{00AB}'];
const CLOSERS: &[char] = &['"', '\'', ')', ']', '}', '\u{201D}', '\u{2019}', '\u{00BB}'];
const TERMINAL: &[char] = &['.', ',', '!', '?', ';', ':'];
const INNER: &[char] = &[',', ';', ':', '!', '?', '"', '(', ')', '[', ']', '{', '}', '\u{201C}', '\u{201D}', '\u{00AB}', '\u{00BB}'];
const ELLIPSES: &[&str] = &["...", "\u{2026}"];
const CLITICS: &[&str] = &["n't", "'s", "'re", "'ve", "'ll", "'d", "'m"];

#[derive(Debug, Clone)]
pub struct Retokenizer {
    abbreviations: HashSet<String>,
    split_contractions: bool,
}

impl Default for Retokenizer {
    fn default() -> Self {
        Self::with_abbreviations(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

fn normalize_apostrophe(s: &str) -> String {
    s.replace('\u{2019}', "'").to_lowercase()
}

fn is_clitic(word: &str) -> bool {
    CLITICS.contains(&normalize_apostrophe(word).as_str())
}

fn last_char(word: &str) -> (usize, char) {
    word.char_indices().next_back().expect("non-empty word")
}

impl Retokenizer {
    pub fn with_abbreviations<I, S>(abbreviations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let abbreviations = abbreviations.into_iter().map(|a| a.as_ref().to_lowercase()).collect();
        Self { abbreviations, split_contractions: true }
    }

    pub fn split_contractions(mut self, on: bool) -> Self {
        self.split_contractions = on;
        self
    }

    pub fn retokenize(&self, text: &str) -> Vec<String> {
        let mut out = Vec::new();
        for word in text.split_whitespace() {
            self.word(word, &mut out);
        }
        out
    }

    /// `U.S.`-style dotted initials or a listed abbreviation.
    fn is_abbreviation(&self, word: &str) -> bool {
        if !word.ends_with('.') {
            return false;
        }
        if self.abbreviations.contains(&word.to_lowercase()) {
            return true;
        }
        let parts: Vec<&str> = word[..word.len() - 1].split('.').collect();
        parts.len() >= 2 && parts.iter().all(|p| !p.is_empty() && p.chars().all(char::is_alphabetic))
    }

    fn word(&self, word: &str, out: &mut Vec<String>) {
        if word.is_empty() {
            return;
        }
        if word.chars().nth(1).is_none() || is_clitic(word) || ELLIPSES.contains(&word) {
            out.push(word.to_owned());
            return;
        }

        let first = word.chars().next().expect("non-empty word");
        if OPENERS.contains(&first) {
            out.push(first.to_string());
            self.word(&word[first.len_utf8()..], out);
            return;
        }

        for ellipsis in ELLIPSES {
            if let Some(rest) = word.strip_suffix(ellipsis) {
                self.word(rest, out);
                out.push((*ellipsis).to_owned());
                return;
            }
        }
        let (at, last) = last_char(word);
        if CLOSERS.contains(&last) || (TERMINAL.contains(&last) && !(last == '.' && self.is_abbreviation(word))) {
            self.word(&word[..at], out);
            out.push(last.to_string());
            return;
        }

        let chars: Vec<(usize, char)> = word.char_indices().collect();
        for i in 1..chars.len() - 1 {
            let (at, c) = chars[i];
            if !INNER.contains(&c) {
                continue;
            }
            let numeric = matches!(c, ',' | ';' | ':') && chars[i - 1].1.is_ascii_digit() && chars[i + 1].1.is_ascii_digit();
            if numeric {
                continue;
            }
            self.word(&word[..at], out);
            out.push(c.to_string());
            self.word(&word[at + c.len_utf8()..], out);
            return;
        }

        if self.split_contractions {
            if let Some(split) = contraction_split(word) {
                self.word(&word[..split], out);
                out.push(word[split..].to_owned());
                return;
            }
        }
        out.push(word.to_owned());
    }
}

/// Byte offset where a trailing clitic starts, if the word has one after a
/// non-empty stem.
fn contraction_split(word: &str) -> Option<usize> {
    let normalized = normalize_apostrophe(word);
    if normalized.len() != word.len() {
        // lowercasing or apostrophe folding changed byte lengths; match on the
        // original characters instead
        return CLITICS.iter().find_map(|clitic| {
            let n = clitic.chars().count();
            let start = word.char_indices().rev().nth(n - 1)?.0;
            (start > 0 && normalize_apostrophe(&word[start..]) == *clitic).then_some(start)
        });
    }
    CLITICS
        .iter()
        .find(|clitic| normalized.len() > clitic.len() && normalized.ends_with(*clitic))
        .map(|clitic| word.len() - clitic.len())
}

/// Retokenizes with the default rules.
pub fn retokenize(text: &str) -> Vec<String> {
    Retokenizer::default().retokenize(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn documented_examples() {
        assert_eq!(retokenize("It's been cloudy, right?"), ["It", "'s", "been", "cloudy", ",", "right", "?"]);
        assert_eq!(retokenize("a dog ."), ["a", "dog", "."]);
        assert_eq!(retokenize("3.14 is pi"), ["3.14", "is", "pi"]);
    }

    #[test]
    fn contractions() {
        assert_eq!(retokenize("I don't know"), ["I", "do", "n't", "know"]);
        assert_eq!(retokenize("they're here, we've left"), ["they", "'re", "here", ",", "we", "'ve", "left"]);
        assert_eq!(retokenize("I\u{2019}m fine"), ["I", "\u{2019}m", "fine"]);
        assert_eq!(retokenize("I'll"), ["I", "'ll"]);
        assert_eq!(Retokenizer::default().split_contractions(false).retokenize("don't"), ["don't"]);
    }

    #[test]
    fn quotes_and_brackets() {
        assert_eq!(retokenize("\"Hello (world)!\""), ["\"", "Hello", "(", "world", ")", "!", "\""]);
        assert_eq!(retokenize("say \u{201C}yes\u{201D}."), ["say", "\u{201C}", "yes", "\u{201D}", "."]);
    }

    #[test]
    fn number_and_abbreviation_guards() {
        assert_eq!(retokenize("1,000 people at 10:30."), ["1,000", "people", "at", "10:30", "."]);
        assert_eq!(retokenize("e.g. the U.S. and Mr. Smith"), ["e.g.", "the", "U.S.", "and", "Mr.", "Smith"]);
        assert_eq!(retokenize("wait... what?!"), ["wait", "...", "what", "?", "!"]);
        assert_eq!(retokenize("cloudy,right"), ["cloudy", ",", "right"]);
    }

    proptest! {
        #[test]
        fn idempotent(text in "[a-zA-Z0-9 .,!?;:'\"()\u{2019}]{0,40}") {
            let once = retokenize(&text);
            let twice = retokenize(&once.join(" "));
            prop_assert_eq!(&once, &twice);
            // no characters are lost or invented
            let before: String = text.chars().filter(|c| !c.is_whitespace()).collect();
            prop_assert_eq!(once.concat(), before);
        }
    }
}
