use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read};

use super::NormalizedTweet;
use crate::error::{Error, Result};

/// Term list for one topic. Multi-word terms are stored as token sequences
/// and match consecutive tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicDictionary {
    topic: String,
    terms: BTreeSet<Vec<String>>,
}

impl TopicDictionary {
    /// Terms are lowercased and split on whitespace; repeated terms collapse.
    pub fn new<I, S>(topic: impl Into<String>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let topic = topic.into();
        let terms: BTreeSet<Vec<String>> = terms
            .into_iter()
            .map(|t| t.as_ref().split_whitespace().map(str::to_lowercase).collect::<Vec<_>>())
            .filter(|t| !t.is_empty())
            .collect();
        if terms.is_empty() {
            return Err(Error::Validation(format!("dictionary for topic {topic:?} has no terms")));
        }
        Ok(Self { topic, terms })
    }

    /// One term per line; blank lines and lines starting with `#` are skipped.
    pub fn from_reader<R: Read>(topic: impl Into<String>, source: R) -> Result<Self> {
        let mut terms = Vec::new();
        for line in BufReader::new(source).lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            terms.push(line.to_string());
        }
        Self::new(topic, terms)
    }

    pub fn topic(&self) -> &str {
        &self.topic
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = String> + '_ {
        self.terms.iter().map(|t| t.join(" "))
    }

    /// Number of term occurrences in `tokens` (overlapping phrase matches count
    /// separately).
    pub fn count_matches(&self, tokens: &[String]) -> usize {
        self.terms
            .iter()
            .map(|term| tokens.windows(term.len()).filter(|w| *w == term.as_slice()).count())
            .sum()
    }

    pub fn matches(&self, tokens: &[String]) -> bool {
        self.terms.iter().any(|term| tokens.windows(term.len()).any(|w| w == term.as_slice()))
    }
}

/// Binary topic flags: 1 when the tweet contains at least one term of the
/// topic's dictionary. Topics may overlap.
pub fn tag_topics(tweet: &NormalizedTweet, dicts: &[TopicDictionary]) -> BTreeMap<String, u8> {
    dicts.iter().map(|d| (d.topic.clone(), u8::from(d.matches(&tweet.tokens)))).collect()
}
