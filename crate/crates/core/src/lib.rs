//! Corpus analytics for anticipatory discourse on short social-media posts.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`corpus`]: parsing, cleaning and deduplication of tweet-like records
//! * [`embedding`]: document vectors (feature hashing or imported)
//! * [`topics`]: incremental PCA, mini-batch k-means, class-based TF-IDF,
//!   topic hierarchy, NPMI coherence, temporal dynamics, intertopic map
//! * [`keywords`]: lemma/stopword token pipeline and frequency rankings
//! * [`affect`]: sentiment labels, emotion vectors and anticipatory dyads
//! * [`stats`]: Wilcoxon signed-rank, Spearman, Bonferroni, median deltas
//! * [`kol`]: author volumes, topic shares and dominance
//! * [`pipeline`]: config-driven orchestration and report emission

pub mod affect;
pub mod corpus;
pub mod embedding;
pub mod keywords;
pub mod kol;
pub mod pipeline;
pub mod stats;
pub mod synth;
pub mod text;
pub mod topics;

pub use affect::{DyadScores, Emotion, EmotionVector, SentimentCounts, SentimentLabel, TopicAffect};
pub use corpus::{Corpus, DedupKey, DedupReport, TweetRecord};
pub use embedding::EmbeddingMatrix;
pub use keywords::{KeywordRanking, TokenPipeline};
pub use stats::{TestMethod, TestResult};
pub use topics::{PcaModel, TopicAssignment, TopicModel, TopicSummary};
