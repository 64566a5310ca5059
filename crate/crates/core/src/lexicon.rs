//! Small shipped English word lists: part-of-speech tags and sentiment valence.

use std::collections::HashMap;
use std::sync::OnceLock;

const POS_TSV: &str = include_str!("../data/lexicon.tsv");
const VALENCE_TSV: &str = include_str!("../data/valence.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartOfSpeech {
    Noun,
    Verb,
    Adjective,
}

#[derive(Debug)]
pub struct Lexicon {
    pos: HashMap<&'static str, PartOfSpeech>,
    valence: HashMap<&'static str, f64>,
    content: Vec<&'static str>,
    positive: Vec<&'static str>,
    negative: Vec<&'static str>,
}

fn rows(tsv: &'static str) -> impl Iterator<Item = (&'static str, &'static str)> {
    tsv.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once('\t'))
        .map(|(a, b)| (a.trim(), b.trim()))
}

impl Lexicon {
    fn load() -> Self {
        let mut pos = HashMap::new();
        let mut content = Vec::new();
        for (word, tag) in rows(POS_TSV) {
            let tag = match tag {
                "noun" => PartOfSpeech::Noun,
                "verb" => PartOfSpeech::Verb,
                "adj" => PartOfSpeech::Adjective,
                other => panic!("bad part-of-speech tag {other:?} in shipped lexicon"),
            };
            pos.insert(word, tag);
            content.push(word);
        }
        let mut valence = HashMap::new();
        let (mut positive, mut negative) = (Vec::new(), Vec::new());
        for (word, v) in rows(VALENCE_TSV) {
            let v: f64 = v.parse().expect("numeric valence in shipped lexicon");
            valence.insert(word, v);
            if v > 0.0 {
                positive.push(word);
            } else if v < 0.0 {
                negative.push(word);
            }
        }
        Lexicon {
            pos,
            valence,
            content,
            positive,
            negative,
        }
    }

    pub fn part_of_speech(&self, word: &str) -> Option<PartOfSpeech> {
        self.pos.get(word).copied()
    }

    pub fn valence(&self, word: &str) -> Option<f64> {
        self.valence.get(word).copied()
    }

    pub fn content_words(&self) -> &[&'static str] {
        &self.content
    }

    pub fn positive_words(&self) -> &[&'static str] {
        &self.positive
    }

    pub fn negative_words(&self) -> &[&'static str] {
        &self.negative
    }
}

pub fn lexicon() -> &'static Lexicon {
    static LEXICON: OnceLock<Lexicon> = OnceLock::new();
    LEXICON.get_or_init(Lexicon::load)
}

/// Lowercases and strips surrounding punctuation; returns `None` for entity
/// tokens (hashtags, mentions, cashtags, links) and empty leftovers.
pub fn normalize_token(token: &str) -> Option<String> {
    if token.starts_with(['#', '@', '$']) || token.starts_with("http") {
        return None;
    }
    let word: String = token
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase();
    (!word.is_empty()).then_some(word)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_shipped_lists() {
        let lex = lexicon();
        assert_eq!(lex.part_of_speech("market"), Some(PartOfSpeech::Noun));
        assert_eq!(lex.part_of_speech("buy"), Some(PartOfSpeech::Verb));
        assert_eq!(lex.part_of_speech("happy"), Some(PartOfSpeech::Adjective));
        assert_eq!(lex.part_of_speech("the"), None);
        assert_eq!(lex.valence("happy"), Some(3.0));
        assert!(!lex.positive_words().is_empty());
        assert!(!lex.negative_words().is_empty());
    }

    #[test]
    fn token_normalization() {
        assert_eq!(normalize_token("Happy!"), Some("happy".into()));
        assert_eq!(normalize_token("#crypto"), None);
        assert_eq!(normalize_token("https://t.co/x"), None);
        assert_eq!(normalize_token("..."), None);
    }
}
