//! Normalisation, dictionary topic flags and entropy ranking of classifier
//! confidence.

use std::collections::BTreeMap;

use didkit::text::{binary_entropy, normalize, rank_by_entropy, tag_topics, ClassifiedTweet, TopicDictionary};

fn main() -> didkit::Result<()> {
    let dicts = [
        TopicDictionary::new("economics", ["borsa", "pil", "cassa integrazione"])?,
        TopicDictionary::new("health", ["ospedale", "virus", "terapia intensiva"])?,
    ];
    let tweets = [
        ("t1", "La BORSA crolla per il virus :( https://x.it @mario", 0.91),
        ("t2", "Chiesta la cassa integrazione per 300 lavoratori", 0.55),
        ("t3", "Reparti di terapia intensiva pieni a Lodi", 0.49),
        ("t4", "Bella giornata al parco", 0.08),
    ];
    let mut classified = Vec::new();
    let mut topics_of = BTreeMap::new();
    for (id, text, conf) in tweets {
        let n = normalize(text);
        let flags = tag_topics(&n, &dicts);
        println!("{id}: {:?} -> {flags:?} (H = {:.3})", n.detokenize(), binary_entropy(conf)?);
        let mut topics = vec!["all".to_string()];
        topics.extend(flags.iter().filter(|(_, v)| **v == 1).map(|(k, _)| k.clone()));
        topics_of.insert(id.to_string(), topics);
        classified.push(ClassifiedTweet {
            tweet_id: id.into(),
            emotion: "uncertainty".into(),
            label: u8::from(conf >= 0.5),
            confidence: conf,
        });
    }
    for ((emotion, topic), ranked) in rank_by_entropy(&classified, &topics_of, 2)? {
        let ids: Vec<&str> = ranked.iter().map(|r| r.tweet_id.as_str()).collect();
        println!("{emotion}/{topic}: {ids:?}");
    }
    Ok(())
}
