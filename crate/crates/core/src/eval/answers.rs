//! Free-text answer parsers.
//!
//! Every parser is total: any string yields exactly one [`ParsedAnswer`],
//! which records the rule that fired.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::schema::{OptionChoice, QAPair, TaskKind, YesNo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnparseableReason {
    NoToken,
    NoMatch,
    Ambiguous,
    NoNumber,
    EmptyResponse,
    EndpointError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Answer {
    Number(u32),
    YesNo(YesNo),
    Letter(char),
    Text(String),
    Unparseable(UnparseableReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseRule {
    YesNoInitial,
    YesNoToken,
    LetterWhole,
    LetterLeading,
    LetterStandalone,
    LetterPhrase,
    OptionText,
    AgeRange,
    AgeInteger,
    FreeText,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedAnswer {
    pub answer: Answer,
    pub raw_excerpt: String,
    pub rule: Option<ParseRule>,
}

impl ParsedAnswer {
    fn hit(answer: Answer, excerpt: &str, rule: ParseRule) -> Self {
        Self {
            answer,
            raw_excerpt: excerpt.to_string(),
            rule: Some(rule),
        }
    }

    pub fn unparseable(reason: UnparseableReason) -> Self {
        Self {
            answer: Answer::Unparseable(reason),
            raw_excerpt: String::new(),
            rule: None,
        }
    }

    pub fn is_parsed(&self) -> bool {
        !matches!(self.answer, Answer::Unparseable(_))
    }
}

static FILLER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r#"(?i)^(?:[\s*_"'`>#:\-]+|assistant\s*:|response\s*:|output\s*:|(?:the\s+|my\s+)?(?:final\s+|correct\s+)?answer(?:\s+is)?\s*[:\-]?)"#,
    )
    .unwrap()
});
static YES_NO_INITIAL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)^(yes|no)\b").unwrap());
static YES_NO_TOKEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\b(yes|no)\b").unwrap());
static LETTER_WHOLE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[\(\[]?([A-Za-z])[\)\]]?[.:)]?$").unwrap());
static LETTER_LEADING: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?:[\(\[]([A-Z])[\)\]]|([A-Z])(?:[.:)]|\s+-)(?:\s|$))").unwrap());
static LETTER_PHRASE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(?:option|choice|answer\s+is|answer)\s*[:\-]?\s*[\(\[]?([a-z])(?:[\)\]]|[^a-z0-9']|$)").unwrap()
});
static AGE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)([0-9]+)(?:\s*(?:-|–|—|~|to)\s*([0-9]+))?").unwrap()
});

/// Leading fillers such as "Answer:" or "The answer is" removed.
fn strip_fillers(text: &str) -> &str {
    let mut rest = text;
    while let Some(m) = FILLER.find(rest) {
        if m.end() == 0 {
            break;
        }
        rest = &rest[m.end()..];
    }
    rest
}

pub fn parse_yes_no(text: &str) -> ParsedAnswer {
    let body = strip_fillers(text);
    let pick = |m: regex::Match<'_>, rule| {
        let v = YesNo::from_bool(m.as_str().eq_ignore_ascii_case("yes"));
        ParsedAnswer::hit(Answer::YesNo(v), m.as_str(), rule)
    };
    if let Some(m) = YES_NO_INITIAL.find(body) {
        return pick(m, ParseRule::YesNoInitial);
    }
    if let Some(m) = YES_NO_TOKEN.find(text) {
        return pick(m, ParseRule::YesNoToken);
    }
    if text.trim().is_empty() {
        return ParsedAnswer::unparseable(UnparseableReason::EmptyResponse);
    }
    ParsedAnswer::unparseable(UnparseableReason::NoToken)
}

/// Single uppercase letters standing alone, skipping the article "A" and
/// pronoun "I" before a lowercase word other than "or"/"and".
fn standalone_letters(text: &str) -> Vec<char> {
    let chars: Vec<char> = text.chars().collect();
    let word_char = |c: char| c.is_alphanumeric() || c == '\'' || c == '’';
    let mut out = Vec::new();
    for i in 0..chars.len() {
        let c = chars[i];
        if !c.is_ascii_uppercase() {
            continue;
        }
        let prev = i.checked_sub(1).map(|j| chars[j]);
        let next = chars.get(i + 1).copied();
        if prev.is_some_and(word_char) || next.is_some_and(word_char) {
            continue;
        }
        if prev == Some('.') && i >= 2 && chars[i - 2].is_alphabetic() {
            continue;
        }
        if next == Some('.') && chars.get(i + 2).is_some_and(|c| c.is_alphabetic()) {
            continue;
        }
        if c == 'A' || c == 'I' {
            let rest: String = chars[i + 1..].iter().collect();
            let word: String = rest
                .trim_start_matches([' ', '\t'])
                .chars()
                .take_while(|c| c.is_alphabetic())
                .collect();
            if next.is_some_and(|n| n == ' ' || n == '\t')
                && word.chars().next().is_some_and(char::is_lowercase)
                && word != "or"
                && word != "and"
            {
                continue;
            }
        }
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

fn is_word(c: Option<char>) -> bool {
    c.is_some_and(|c| c.is_alphanumeric() || c == '_')
}

/// Occurrences of `needle` with a word boundary at both ends, as `\b` means it.
fn bounded_matches(hay: &str, needle: &str) -> Vec<(usize, usize)> {
    let boundary = |at: usize| is_word(hay[..at].chars().next_back()) != is_word(hay[at..].chars().next());
    let mut out = Vec::new();
    let mut from = 0;
    while let Some(i) = hay[from..].find(needle) {
        let (s, e) = (from + i, from + i + needle.len());
        if boundary(s) && boundary(e) {
            out.push((s, e));
            from = e;
        } else {
            from = s + hay[s..].chars().next().map_or(1, char::len_utf8);
        }
    }
    out
}

pub fn parse_option_letter(text: &str, options: &[OptionChoice]) -> ParsedAnswer {
    if text.trim().is_empty() {
        return ParsedAnswer::unparseable(UnparseableReason::EmptyResponse);
    }
    let valid = |c: char| options.iter().any(|o| o.letter == c);
    let body = strip_fillers(text).trim_end_matches(|c: char| c.is_whitespace() || "*_\"'`".contains(c));

    if let Some(c) = LETTER_WHOLE.captures(body).map(|cap| cap[1].chars().next().unwrap().to_ascii_uppercase()) {
        if valid(c) {
            return ParsedAnswer::hit(Answer::Letter(c), body, ParseRule::LetterWhole);
        }
    }
    if let Some(cap) = LETTER_LEADING.captures(body) {
        let m = cap.get(1).or_else(|| cap.get(2)).unwrap();
        let c = m.as_str().chars().next().unwrap();
        if valid(c) {
            return ParsedAnswer::hit(Answer::Letter(c), cap.get(0).unwrap().as_str().trim(), ParseRule::LetterLeading);
        }
    }
    let found: Vec<char> = standalone_letters(text).into_iter().filter(|c| valid(*c)).collect();
    match found.len() {
        0 => {}
        1 => return ParsedAnswer::hit(Answer::Letter(found[0]), &found[0].to_string(), ParseRule::LetterStandalone),
        _ => return ParsedAnswer::unparseable(UnparseableReason::Ambiguous),
    }
    let mut phrase: Vec<(char, &str)> = Vec::new();
    for cap in LETTER_PHRASE.captures_iter(text) {
        let c = cap[1].chars().next().unwrap().to_ascii_uppercase();
        if valid(c) && !phrase.iter().any(|(p, _)| *p == c) {
            phrase.push((c, cap.get(0).unwrap().as_str()));
        }
    }
    match phrase.len() {
        0 => {}
        1 => {
            let (c, excerpt) = phrase[0];
            return ParsedAnswer::hit(Answer::Letter(c), excerpt.trim(), ParseRule::LetterPhrase);
        }
        _ => return ParsedAnswer::unparseable(UnparseableReason::Ambiguous),
    }

    let lower = text.to_lowercase();
    let mut spans: Vec<(char, usize, usize)> = Vec::new();
    for o in options {
        let needle = o.text.trim().to_lowercase();
        if needle.is_empty() {
            continue;
        }
        for (start, end) in bounded_matches(&lower, &needle) {
            spans.push((o.letter, start, end));
        }
    }
    let covered = |&(l, s, e): &(char, usize, usize)| {
        spans
            .iter()
            .any(|&(l2, s2, e2)| l2 != l && s2 <= s && e <= e2 && (e2 - s2) > (e - s))
    };
    let mut letters: Vec<(char, usize, usize)> = Vec::new();
    for span in spans.iter().filter(|s| !covered(s)) {
        if !letters.iter().any(|(l, _, _)| *l == span.0) {
            letters.push(*span);
        }
    }
    match letters.as_slice() {
        [] => ParsedAnswer::unparseable(UnparseableReason::NoMatch),
        [(l, s, e)] => {
            let excerpt = lower.get(*s..*e).unwrap_or_default();
            ParsedAnswer::hit(Answer::Letter(*l), excerpt, ParseRule::OptionText)
        }
        _ => ParsedAnswer::unparseable(UnparseableReason::Ambiguous),
    }
}

pub fn parse_age(text: &str) -> ParsedAnswer {
    if text.trim().is_empty() {
        return ParsedAnswer::unparseable(UnparseableReason::EmptyResponse);
    }
    let in_range = |s: &str| s.parse::<u64>().ok().filter(|n| (1..=100).contains(n)).map(|n| n as u32);
    for cap in AGE.captures_iter(text) {
        let first = cap.get(1).unwrap();
        let a = in_range(first.as_str());
        if let Some(second) = cap.get(2) {
            let b = in_range(second.as_str());
            match (a, b) {
                (Some(lo), Some(hi)) if lo <= hi => {
                    return ParsedAnswer::hit(Answer::Number((lo + hi) / 2), cap.get(0).unwrap().as_str(), ParseRule::AgeRange)
                }
                (Some(n), _) => return ParsedAnswer::hit(Answer::Number(n), first.as_str(), ParseRule::AgeInteger),
                (None, Some(n)) => return ParsedAnswer::hit(Answer::Number(n), second.as_str(), ParseRule::AgeInteger),
                (None, None) => continue,
            }
        }
        if let Some(n) = a {
            return ParsedAnswer::hit(Answer::Number(n), first.as_str(), ParseRule::AgeInteger);
        }
    }
    ParsedAnswer::unparseable(UnparseableReason::NoNumber)
}

/// Parser chosen by the question's task.
pub fn parse_answer(qa: &QAPair, text: &str) -> ParsedAnswer {
    match qa.task {
        TaskKind::YesNo => parse_yes_no(text),
        TaskKind::MultipleChoice => parse_option_letter(text, qa.options.as_deref().unwrap_or(&[])),
        TaskKind::Age => parse_age(text),
        TaskKind::Description => {
            let t = text.trim();
            if t.is_empty() {
                ParsedAnswer::unparseable(UnparseableReason::EmptyResponse)
            } else {
                ParsedAnswer::hit(Answer::Text(t.to_string()), t, ParseRule::FreeText)
            }
        }
    }
}
