use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Output of an emotion classifier for one tweet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedTweet {
    pub tweet_id: String,
    pub emotion: String,
    pub label: u8,
    /// Probability that `label == 1`.
    pub confidence: f64,
}

/// Source of per-tweet emotion labels. The bundled implementation reads
/// precomputed labels; a model-backed classifier can implement the same
/// trait.
pub trait EmotionClassifier {
    fn emotions(&self) -> Vec<String>;
    fn classify(&self, tweet_id: &str, text: Option<&str>, emotion: &str) -> Option<ClassifiedTweet>;
}

/// Precomputed labels keyed by `(tweet_id, emotion)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelFile {
    labels: BTreeMap<(String, String), ClassifiedTweet>,
}

impl LabelFile {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ClassifiedTweet> {
        self.labels.values()
    }
}

impl EmotionClassifier for LabelFile {
    fn emotions(&self) -> Vec<String> {
        let set: std::collections::BTreeSet<&str> = self.labels.keys().map(|(_, e)| e.as_str()).collect();
        set.into_iter().map(str::to_string).collect()
    }

    fn classify(&self, tweet_id: &str, _text: Option<&str>, emotion: &str) -> Option<ClassifiedTweet> {
        self.labels.get(&(tweet_id.to_string(), emotion.to_string())).cloned()
    }
}

/// Reads `tweet_id,emotion,label,confidence` records.
pub fn load_labels<R: Read>(source: R) -> Result<LabelFile> {
    let mut reader = csv::Reader::from_reader(source);
    let mut labels = BTreeMap::new();
    for (i, rec) in reader.deserialize::<ClassifiedTweet>().enumerate() {
        let row = i + 2;
        let c = rec.map_err(|e| Error::Parse { row, message: e.to_string() })?;
        if c.label > 1 {
            return Err(Error::Parse { row, message: format!("label {} is not binary", c.label) });
        }
        if !(0.0..=1.0).contains(&c.confidence) {
            return Err(Error::Parse { row, message: format!("confidence {} outside [0, 1]", c.confidence) });
        }
        let key = (c.tweet_id.clone(), c.emotion.clone());
        if labels.insert(key, c).is_some() {
            return Err(Error::Parse { row, message: "duplicate (tweet_id, emotion) pair".into() });
        }
    }
    Ok(LabelFile { labels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_and_serves_labels() {
        let src = "tweet_id,emotion,label,confidence\nt1,uncertainty,1,0.8\nt1,negative,0,0.3\nt2,uncertainty,0,0.1\n";
        let lf = load_labels(src.as_bytes()).unwrap();
        assert_eq!(lf.len(), 3);
        assert_eq!(lf.emotions(), ["negative", "uncertainty"]);
        assert_eq!(lf.classify("t1", None, "uncertainty").unwrap().confidence, 0.8);
        assert!(lf.classify("t2", None, "negative").is_none());
    }

    #[test]
    fn rejects_invalid_rows() {
        let bad = "tweet_id,emotion,label,confidence\nt1,uncertainty,1,1.5\n";
        assert!(matches!(load_labels(bad.as_bytes()), Err(Error::Parse { row: 2, .. })));
        let dup = "tweet_id,emotion,label,confidence\nt1,u,1,0.5\nt1,u,0,0.5\n";
        assert!(matches!(load_labels(dup.as_bytes()), Err(Error::Parse { row: 3, .. })));
    }
}
