use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::options::{vocabulary, Plan};

pub const MAX_PLAN_LEN: usize = 3;

fn phrases() -> &'static [(String, crate::options::OptionSpec)] {
    static PHRASES: OnceLock<Vec<(String, crate::options::OptionSpec)>> = OnceLock::new();
    PHRASES.get_or_init(|| {
        let mut v: Vec<_> = vocabulary().into_iter().map(|o| (o.text(), o)).collect();
        v.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));
        v
    })
}

fn is_word_char(c: Option<char>) -> bool {
    c.is_some_and(|c| c.is_alphanumeric() || c == '_')
}

/// Scan free text for canonical option phrases, left to right, longest
/// match first, case-insensitive, on word boundaries. Keeps the first
/// [`MAX_PLAN_LEN`] matches.
pub fn parse_plan(raw: &str) -> Result<Plan> {
    let text: String = raw
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ");
    let mut options = vec![];
    let mut i = 0;
    while i < text.len() && options.len() < MAX_PLAN_LEN {
        if !text.is_char_boundary(i) || is_word_char(text[..i].chars().next_back()) {
            i += 1;
            continue;
        }
        let rest = &text[i..];
        let hit = phrases()
            .iter()
            .find(|(p, _)| rest.starts_with(p.as_str()) && !is_word_char(rest[p.len()..].chars().next()));
        match hit {
            Some((p, o)) => {
                options.push(*o);
                i += p.len();
            }
            None => i += 1,
        }
    }
    if options.is_empty() {
        return Err(Error::Parse(raw.chars().take(200).collect()));
    }
    Ok(Plan::new(options))
}
