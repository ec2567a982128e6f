//! Tweet normalization, dictionary topic tagging and entropy ranking of
//! classifier output.

mod dictionary;
mod entropy;
mod labels;
mod normalize;

pub use dictionary::{tag_topics, TopicDictionary};
pub use entropy::{binary_entropy, rank_by_entropy, top_k_by_entropy, RankedTweet};
pub use labels::{load_labels, ClassifiedTweet, EmotionClassifier, LabelFile};
pub use normalize::{normalize, NormalizedTweet, Normalizer, EMOTICONS};
