use std::sync::OnceLock;

use regex::Regex;

pub const URL: &str = "<URL>";
pub const MENTION: &str = "<MENTION>";
pub const EMOTICON: &str = "<EMOTICON>";
pub const NUMBER: &str = "<NUMBER>";
pub const PHONE: &str = "<PHONE>";
pub const DATE: &str = "<DATE>";

/// Western-style emoticons recognized as `<EMOTICON>`. Pictographic emoji are
/// matched by Unicode property in addition to this list.
pub const EMOTICONS: &[&str] = &[
    ":-)", ":)", ":-(", ":(", ";-)", ";)", ":-D", ":D", ":-P", ":P", ":-p", ":p", ":'(", ":-/", ":/", ":-o",
    ":o", ":-O", ":O", ":-*", ":*", ":-|", ":|", "<3", "</3", "^_^", "^^", "-_-", "T_T",
];

/// Token sequence of a tweet after normalization.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NormalizedTweet {
    pub tokens: Vec<String>,
    /// Set when nothing but tags, mentions or punctuation was left; such tweets
    /// have no tokens and are dropped from topic tagging.
    pub dropped: bool,
}

impl NormalizedTweet {
    pub fn is_marker(token: &str) -> bool {
        token.starts_with('<') && token.ends_with('>') && token.len() > 2
    }

    /// Plain word tokens, markers excluded.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str).filter(|t| !Self::is_marker(t))
    }

    /// Space-joined tokens; normalizing this string gives back `self`.
    pub fn detokenize(&self) -> String {
        self.tokens.join(" ")
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Normalizer {
    /// Emit `<HASHTAG:word>` before the bare hashtag word.
    pub mark_hashtags: bool,
}

fn pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        let emoticons = EMOTICONS.iter().map(|e| regex::escape(e)).collect::<Vec<_>>().join("|");
        // Alternation order is priority order: at a given position the first
        // branch that matches wins.
        let src = format!(
            r"(?x)
            (?P<marker><(?:URL|MENTION|EMOTICON|NUMBER|PHONE|DATE|HASHTAG:[\p{{L}}\p{{M}}\p{{N}}_]+)>)
          | (?P<url>(?i:https?://|www\.)\S+)
          | (?P<mention>@[\p{{L}}\p{{M}}\p{{N}}_]+)
          | \#(?P<hashtag>[\p{{L}}\p{{M}}\p{{N}}_]+)
          | (?P<date>\d{{1,2}}[/.-]\d{{1,2}}[/.-]\d{{2,4}}|\d{{4}}-\d{{2}}-\d{{2}})
          | (?P<phone>(?:\+\d{{1,3}}[\ -]?)?\d{{3}}[\ -]?\d{{3,4}}[\ -]?\d{{3,4}})
          | (?P<number>\d+(?:[.,]\d+)*)
          | (?P<emoticon>{emoticons}|\p{{Extended_Pictographic}})
          | (?P<word>[\p{{L}}\p{{M}}\p{{N}}_]+)
            "
        );
        Regex::new(&src).expect("normalizer pattern compiles")
    })
}

impl Normalizer {
    pub fn normalize(&self, text: &str) -> NormalizedTweet {
        let mut tokens = Vec::new();
        for caps in pattern().captures_iter(text) {
            if let Some(m) = caps.name("marker") {
                tokens.push(m.as_str().to_string());
            } else if caps.name("url").is_some() {
                tokens.push(URL.into());
            } else if caps.name("mention").is_some() {
                tokens.push(MENTION.into());
            } else if let Some(h) = caps.name("hashtag") {
                let word = h.as_str().to_lowercase();
                if self.mark_hashtags {
                    tokens.push(format!("<HASHTAG:{word}>"));
                }
                tokens.push(word);
            } else if caps.name("date").is_some() {
                tokens.push(DATE.into());
            } else if caps.name("phone").is_some() {
                tokens.push(PHONE.into());
            } else if caps.name("number").is_some() {
                tokens.push(NUMBER.into());
            } else if caps.name("emoticon").is_some() {
                tokens.push(EMOTICON.into());
            } else if let Some(w) = caps.name("word") {
                tokens.push(w.as_str().to_lowercase());
            }
        }
        if !tokens.iter().any(|t| !NormalizedTweet::is_marker(t)) {
            return NormalizedTweet { tokens: Vec::new(), dropped: true };
        }
        NormalizedTweet { tokens, dropped: false }
    }
}

/// Normalizes with default options (hashtags reduced to their bare word).
pub fn normalize(text: &str) -> NormalizedTweet {
    Normalizer::default().normalize(text)
}
