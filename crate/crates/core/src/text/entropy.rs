use std::collections::BTreeMap;

use serde::Serialize;

use super::ClassifiedTweet;
use crate::error::{Error, Result};

/// Shannon entropy in bits of a Bernoulli(p) variable, with `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedTweet {
    pub tweet_id: String,
    pub emotion: String,
    pub confidence: f64,
    pub entropy: f64,
}

/// The `k` most uncertain classifications: descending entropy, ties broken by
/// ascending tweet id. `k` larger than the input returns everything.
pub fn top_k_by_entropy(items: &[ClassifiedTweet], k: usize) -> Result<Vec<RankedTweet>> {
    if k == 0 {
        return Err(Error::Argument("k must be positive".into()));
    }
    let mut ranked = items
        .iter()
        .map(|c| {
            Ok(RankedTweet {
                tweet_id: c.tweet_id.clone(),
                emotion: c.emotion.clone(),
                confidence: c.confidence,
                entropy: binary_entropy(c.confidence)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| b.entropy.total_cmp(&a.entropy).then_with(|| a.tweet_id.cmp(&b.tweet_id)));
    ranked.truncate(k);
    Ok(ranked)
}

/// Ranks classifications per `(emotion, topic)` group. `topics_of` lists the
/// topics each tweet is tagged with; a tweet in several topics is ranked in
/// each of them.
pub fn rank_by_entropy(
    classified: &[ClassifiedTweet],
    topics_of: &BTreeMap<String, Vec<String>>,
    k: usize,
) -> Result<BTreeMap<(String, String), Vec<RankedTweet>>> {
    if k == 0 {
        return Err(Error::Argument("k must be positive".into()));
    }
    let mut groups: BTreeMap<(String, String), Vec<ClassifiedTweet>> = BTreeMap::new();
    for c in classified {
        for topic in topics_of.get(&c.tweet_id).into_iter().flatten() {
            groups.entry((c.emotion.clone(), topic.clone())).or_default().push(c.clone());
        }
    }
    groups.into_iter().map(|(key, items)| Ok((key, top_k_by_entropy(&items, k)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ct(id: &str, p: f64) -> ClassifiedTweet {
        ClassifiedTweet { tweet_id: id.into(), emotion: "uncertainty".into(), label: u8::from(p >= 0.5), confidence: p }
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        // -0.25*log2(0.25) - 0.75*log2(0.75), evaluated with mpmath at 50 digits.
        assert_abs_diff_eq!(binary_entropy(0.25).unwrap(), 0.811_278_124_459_132_9, epsilon = 1e-15);
        assert!(matches!(binary_entropy(1.01), Err(Error::Domain(_))));
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn ranks_by_entropy_then_id() {
        let items = [ct("c", 0.99), ct("a", 0.5), ct("b", 0.9)];
        let top: Vec<_> = top_k_by_entropy(&items, 2).unwrap().into_iter().map(|r| r.tweet_id).collect();
        assert_eq!(top, ["a", "b"]);

        let ties = [ct("z", 0.7), ct("m", 0.7), ct("a", 0.7)];
        let top: Vec<_> = top_k_by_entropy(&ties, 2).unwrap().into_iter().map(|r| r.tweet_id).collect();
        assert_eq!(top, ["a", "m"]);

        assert_eq!(top_k_by_entropy(&items, 10).unwrap().len(), 3);
        assert!(matches!(top_k_by_entropy(&items, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn groups_by_emotion_and_topic() {
        let items = [ct("1", 0.5), ct("2", 0.6), ct("3", 0.95)];
        let topics = BTreeMap::from([
            ("1".to_string(), vec!["health".to_string(), "politics".to_string()]),
            ("2".to_string(), vec!["health".to_string()]),
        ]);
        let groups = rank_by_entropy(&items, &topics, 5).unwrap();
        assert_eq!(groups.len(), 2);
        let health = &groups[&("uncertainty".to_string(), "health".to_string())];
        assert_eq!(health.iter().map(|r| r.tweet_id.as_str()).collect::<Vec<_>>(), ["1", "2"]);
    }

    #[test]
    fn symmetric_on_grid() {
        for i in 0..=1000 {
            let p = i as f64 / 1000.0;
            let d = binary_entropy(p).unwrap() - binary_entropy(1.0 - p).unwrap();
            assert!(d.abs() <= 1e-12, "p = {p}: {d}");
        }
    }

    proptest! {
        #[test]
        fn ranking_ignores_input_order(
            ps in proptest::collection::vec(0.0f64..=1.0, 1..20),
            k in 1usize..25,
            seed in any::<u64>(),
        ) {
            let items: Vec<_> = ps.iter().enumerate().map(|(i, p)| ct(&format!("{i:03}"), *p)).collect();
            let mut shuffled = items.clone();
            let n = shuffled.len();
            for i in 0..n {
                let j = (seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) % n as u64) as usize;
                shuffled.swap(i, j);
            }
            prop_assert_eq!(top_k_by_entropy(&items, k).unwrap(), top_k_by_entropy(&shuffled, k).unwrap());
        }
    }
}
