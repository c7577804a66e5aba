//! Text preprocessing with a reversible offset map.
//!
//! Each output character remembers the raw character range it came from, so
//! spans found in normalized text can always be traced back to the raw input.

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::Path;

use unicode_normalization::char::canonical_combining_class;
use unicode_normalization::UnicodeNormalization;

use super::TextSpan;

/// Preprocessing steps. They always run in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NormalizeStep {
    Nfc,
    Lowercase,
    Acronyms,
    Punctuation,
    Spelling,
    Whitespace,
}

impl NormalizeStep {
    pub const ORDER: [NormalizeStep; 6] = [
        NormalizeStep::Nfc,
        NormalizeStep::Lowercase,
        NormalizeStep::Acronyms,
        NormalizeStep::Punctuation,
        NormalizeStep::Spelling,
        NormalizeStep::Whitespace,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NormalizeStep::Nfc => "nfc",
            NormalizeStep::Lowercase => "lowercase",
            NormalizeStep::Acronyms => "acronyms",
            NormalizeStep::Punctuation => "punctuation",
            NormalizeStep::Spelling => "spelling",
            NormalizeStep::Whitespace => "whitespace",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ORDER.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    pub steps: HashSet<NormalizeStep>,
    /// Acronym → expansion. Keys match whole tokens case-insensitively.
    pub acronyms: Vec<(String, String)>,
    /// Spelling lexicon in priority order.
    pub lexicon: Vec<String>,
}

impl Default for PreprocessConfig {
    /// Everything except spelling correction.
    fn default() -> Self {
        PreprocessConfig {
            steps: NormalizeStep::ORDER.into_iter().filter(|s| *s != NormalizeStep::Spelling).collect(),
            acronyms: Vec::new(),
            lexicon: Vec::new(),
        }
    }
}

impl PreprocessConfig {
    pub fn with_steps(steps: &[NormalizeStep]) -> Self {
        PreprocessConfig { steps: steps.iter().copied().collect(), acronyms: Vec::new(), lexicon: Vec::new() }
    }

    pub fn enabled(&self, step: NormalizeStep) -> bool {
        self.steps.contains(&step)
    }

    /// Parses a `key = value` file with keys `steps` (comma separated),
    /// `acronyms` and `lexicon` (paths relative to `base_dir`).
    pub fn from_key_values(text: &str, base_dir: &Path) -> io::Result<Self> {
        let invalid = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
        let mut config = PreprocessConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('[') {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| invalid(format!("line {}: expected key = value", i + 1)))?;
            let value = value.trim().trim_matches('"');
            match key.trim() {
                "steps" => {
                    config.steps = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| {
                            NormalizeStep::parse(s)
                                .ok_or_else(|| invalid(format!("line {}: unknown step {s:?}", i + 1)))
                        })
                        .collect::<io::Result<_>>()?;
                }
                "acronyms" => config.acronyms = load_acronym_map(&base_dir.join(value))?,
                "lexicon" => config.lexicon = load_lexicon(&base_dir.join(value))?,
                other => return Err(invalid(format!("line {}: unknown key {other:?}", i + 1))),
            }
        }
        Ok(config)
    }
}

/// Tab-separated `acronym<TAB>expansion` lines; `#` starts a comment.
pub fn load_acronym_map(path: &Path) -> io::Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            l.split_once('\t').map(|(k, v)| (k.trim().to_string(), v.trim().to_string())).ok_or_else(|| {
                io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("{}:{}: expected acronym<TAB>expansion", path.display(), i + 1),
                )
            })
        })
        .collect()
}

/// One word per line, kept in file order.
pub fn load_lexicon(path: &Path) -> io::Result<Vec<String>> {
    Ok(fs::read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

/// Normalized text plus, per character, the raw character range it derives from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedText {
    pub text: String,
    offset_map: Vec<usize>,
    raw_ends: Vec<usize>,
}

impl NormalizedText {
    /// Raw start offset of every normalized character.
    pub fn offset_map(&self) -> &[usize] {
        &self.offset_map
    }

    /// Raw span covering the normalized span, if it lies within the text.
    pub fn to_raw_span(&self, span: TextSpan) -> Option<TextSpan> {
        if span.end > self.offset_map.len() {
            return None;
        }
        let begin = self.offset_map[span.begin];
        let end = self.raw_ends[span.begin..span.end].iter().copied().max()?;
        TextSpan::new(begin, end)
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    ch: char,
    start: usize,
    end: usize,
}

fn merged(pieces: &[Piece]) -> (usize, usize) {
    let start = pieces.iter().map(|p| p.start).min().unwrap_or(0);
    let end = pieces.iter().map(|p| p.end).max().unwrap_or(0);
    (start, end)
}

/// Applies the enabled steps of `config` to `raw`.
pub fn normalize_text(raw: &str, config: &PreprocessConfig) -> NormalizedText {
    let mut pieces: Vec<Piece> = raw.chars().enumerate().map(|(i, ch)| Piece { ch, start: i, end: i + 1 }).collect();
    for step in NormalizeStep::ORDER {
        if !config.enabled(step) {
            continue;
        }
        pieces = match step {
            NormalizeStep::Nfc => nfc(&pieces),
            NormalizeStep::Lowercase => lowercase(&pieces),
            NormalizeStep::Acronyms => expand_acronyms(&pieces, &config.acronyms),
            NormalizeStep::Punctuation => punctuation(&pieces),
            NormalizeStep::Spelling => correct_spelling(&pieces, &config.lexicon),
            NormalizeStep::Whitespace => collapse_whitespace(&pieces),
        };
    }
    NormalizedText {
        text: pieces.iter().map(|p| p.ch).collect(),
        offset_map: pieces.iter().map(|p| p.start).collect(),
        raw_ends: pieces.iter().map(|p| p.end).collect(),
    }
}

fn nfc(pieces: &[Piece]) -> Vec<Piece> {
    // Group characters that interact under composition, normalize each group.
    let mut out = Vec::with_capacity(pieces.len());
    let mut group: Vec<Piece> = Vec::new();
    let flush = |group: &mut Vec<Piece>, out: &mut Vec<Piece>| {
        if group.is_empty() {
            return;
        }
        let (start, end) = merged(group);
        let s: String = group.iter().map(|p| p.ch).collect();
        let composed: Vec<char> = s.nfc().collect();
        if composed.len() == group.len() && composed.iter().zip(group.iter()).all(|(c, p)| *c == p.ch) {
            out.append(group);
        } else {
            out.extend(composed.into_iter().map(|ch| Piece { ch, start, end }));
            group.clear();
        }
    };
    for &p in pieces {
        if !group.is_empty() && canonical_combining_class(p.ch) == 0 {
            let current: String = group.iter().map(|g| g.ch).collect();
            let joined: String = current.chars().chain(std::iter::once(p.ch)).nfc().collect();
            let separate: String = current.nfc().chain(std::iter::once(p.ch).nfc()).collect();
            if joined == separate {
                flush(&mut group, &mut out);
            }
        }
        group.push(p);
    }
    flush(&mut group, &mut out);
    out
}

fn lowercase(pieces: &[Piece]) -> Vec<Piece> {
    pieces.iter().flat_map(|p| p.ch.to_lowercase().map(move |ch| Piece { ch, ..*p })).collect()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn chars_eq_ignore_case(a: char, b: char) -> bool {
    a == b || a.to_lowercase().eq(b.to_lowercase())
}

fn expand_acronyms(pieces: &[Piece], acronyms: &[(String, String)]) -> Vec<Piece> {
    if acronyms.is_empty() {
        return pieces.to_vec();
    }
    let mut keys: Vec<(Vec<char>, &str)> =
        acronyms.iter().filter(|(k, _)| !k.is_empty()).map(|(k, v)| (k.chars().collect(), v.as_str())).collect();
    // Longest key first; equal lengths keep configuration order.
    keys.sort_by_key(|k| std::cmp::Reverse(k.0.len()));

    let mut out = Vec::with_capacity(pieces.len());
    let mut i = 0;
    while i < pieces.len() {
        let at_token_start = is_word_char(pieces[i].ch) && (i == 0 || !is_word_char(pieces[i - 1].ch));
        let hit = at_token_start.then(|| {
            keys.iter().find(|(key, _)| {
                let end = i + key.len();
                end <= pieces.len()
                    && key.iter().zip(&pieces[i..end]).all(|(k, p)| chars_eq_ignore_case(*k, p.ch))
                    && (end == pieces.len() || !is_word_char(pieces[end].ch))
            })
        });
        match hit.flatten() {
            Some((key, expansion)) => {
                let (start, end) = merged(&pieces[i..i + key.len()]);
                out.extend(expansion.chars().map(|ch| Piece { ch, start, end }));
                i += key.len();
            }
            None => {
                out.push(pieces[i]);
                i += 1;
            }
        }
    }
    out
}

fn canonical_punctuation(c: char) -> Option<&'static str> {
    Some(match c {
        '\u{2018}' | '\u{2019}' | '\u{201A}' | '\u{201B}' | '\u{2032}' | '`' => "'",
        '\u{201C}' | '\u{201D}' | '\u{201E}' | '\u{201F}' | '\u{2033}' | '\u{00AB}' | '\u{00BB}' => "\"",
        '\u{2010}' | '\u{2011}' | '\u{2012}' | '\u{2013}' | '\u{2014}' | '\u{2015}' | '\u{2212}' => "-",
        '\u{2026}' => "...",
        '\u{FF0C}' => ",",
        '\u{FF1F}' => "?",
        '\u{FF01}' => "!",
        _ => return None,
    })
}

/// Canonical ASCII punctuation, then runs of `! ? , ; :` collapse to one.
fn punctuation(pieces: &[Piece]) -> Vec<Piece> {
    let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
    for p in pieces {
        let replaced: Vec<Piece> = match canonical_punctuation(p.ch) {
            Some(s) => s.chars().map(|ch| Piece { ch, ..*p }).collect(),
            None => vec![*p],
        };
        for r in replaced {
            match out.last_mut() {
                Some(last) if last.ch == r.ch && matches!(r.ch, '!' | '?' | ',' | ';' | ':') => {
                    last.end = last.end.max(r.end);
                }
                _ => out.push(r),
            }
        }
    }
    out
}

fn within_one_edit(a: &[char], b: &[char]) -> bool {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    match long.len() - short.len() {
        0 => short.iter().zip(long).filter(|(x, y)| !chars_eq_ignore_case(**x, **y)).count() <= 1,
        1 => {
            let split = short.iter().zip(long).take_while(|(x, y)| chars_eq_ignore_case(**x, **y)).count();
            short[split..].iter().zip(&long[split + 1..]).all(|(x, y)| chars_eq_ignore_case(*x, *y))
        }
        _ => false,
    }
}

/// Replaces out-of-lexicon alphabetic tokens (3+ chars) with the first
/// lexicon entry within edit distance 1.
fn correct_spelling(pieces: &[Piece], lexicon: &[String]) -> Vec<Piece> {
    if lexicon.is_empty() {
        return pieces.to_vec();
    }
    let known: HashSet<String> = lexicon.iter().map(|w| w.to_lowercase()).collect();
    let words: Vec<Vec<char>> = lexicon.iter().map(|w| w.chars().collect()).collect();
    let mut out = Vec::with_capacity(pieces.len());
    let mut i = 0;
    while i < pieces.len() {
        if !is_word_char(pieces[i].ch) {
            out.push(pieces[i]);
            i += 1;
            continue;
        }
        let j = i + pieces[i..].iter().take_while(|p| is_word_char(p.ch)).count();
        let token: Vec<char> = pieces[i..j].iter().map(|p| p.ch).collect();
        let lowered: String = token.iter().collect::<String>().to_lowercase();
        let candidate = (token.len() >= 3 && token.iter().all(|c| c.is_alphabetic()) && !known.contains(&lowered))
            .then(|| words.iter().find(|w| within_one_edit(w, &token)))
            .flatten();
        match candidate {
            Some(word) if word.len() == token.len() => {
                out.extend(word.iter().zip(&pieces[i..j]).map(|(ch, p)| Piece { ch: *ch, ..*p }));
            }
            Some(word) => {
                let (start, end) = merged(&pieces[i..j]);
                out.extend(word.iter().map(|&ch| Piece { ch, start, end }));
            }
            None => out.extend_from_slice(&pieces[i..j]),
        }
        i = j;
    }
    out
}

fn collapse_whitespace(pieces: &[Piece]) -> Vec<Piece> {
    let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
    let mut pending: Option<Piece> = None;
    for p in pieces {
        if p.ch.is_whitespace() {
            pending = Some(match pending {
                Some(ws) => Piece { ch: ' ', start: ws.start, end: p.end },
                None => Piece { ch: ' ', ..*p },
            });
        } else {
            if let Some(ws) = pending.take() {
                if !out.is_empty() {
                    out.push(ws);
                }
            }
            out.push(*p);
        }
    }
    out
}
