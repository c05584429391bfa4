use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use chrono::TimeDelta;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::artifacts::{self as art, Table};
use super::report::{emit_reports, ReportInputs};
use super::{PipelineConfig, StageError};
use crate::affect::{
    aggregate_topic_affect, compose_dyads, dominant_emotion_shares, read_emotion_scores, read_sentiment_labels,
    score_emotions, score_sentiment_labels, DyadStats, Emotion, EmotionLexicon, EmotionProvider, SentimentLexicon,
    SentimentProvider, TopicAffect,
};
use crate::corpus::{dedup, parse_corpus, Corpus, DedupReport, FieldSchema, ParseReport};
use crate::embedding::{hash_embed, import_embeddings, EmbeddingError};
use crate::keywords::{
    bundled_lemmas, bundled_stopwords, global_keywords, parse_lemma_map, parse_stopwords, topic_keywords,
    TokenPipeline,
};
use crate::kol::{concentration, cumulative_dominance_census, dominance_census, topic_shares_with_min};
use crate::stats::{
    bonferroni, median_percent_diff, spearman_rho, wilcoxon_signed_rank, Alternative, StatsError, TestResult,
};
use crate::text::word_tokens;
use crate::topics::{
    assign_topics, ctfidf_terms, fit_incremental_pca, fit_minibatch_kmeans, intertopic_map, mean_coherence_of_largest,
    topic_dynamics, topic_hierarchy, DenseMatrix, KMeansParams, NpmiScorer, PcaModel, TopicAssignment, TopicError,
    TopicModel, TopicSummary,
};

#[derive(Debug, Serialize, Deserialize)]
struct IngestReport {
    parse: ParseReport,
    dedup: DedupReport,
    /// Records with no word tokens, which no embedding could represent.
    tokenless_dropped: usize,
    documents: usize,
}

#[derive(Debug, Serialize)]
struct ModelArtifact<'a> {
    pca: &'a PcaModel,
    kmeans: &'a TopicModel,
    /// Original centroid indices removed because no document chose them.
    pruned: &'a [usize],
}

/// Contents of `topics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicsReport {
    pub k_requested: usize,
    pub k_effective: usize,
    pub pruned: Vec<usize>,
    pub n_clusters: usize,
    pub coherence_window: usize,
    pub coherence_top_m: usize,
    pub coherence_topics: usize,
    pub mean_coherence_largest: Option<f64>,
    pub topics: Vec<TopicSummary>,
}

fn load_corpus(out: &Path) -> Result<Corpus, StageError> {
    let (corpus, _) = parse_corpus(art::open(&out.join(art::CORPUS))?, &FieldSchema::default())?;
    Ok(corpus)
}

fn token_pipeline(cfg: &PipelineConfig) -> Result<TokenPipeline, StageError> {
    let stop = match &cfg.stopwords {
        Some(p) => parse_stopwords(art::open(&cfg.resolve(p))?)?,
        None => bundled_stopwords(),
    };
    let lemmas = match &cfg.lemmas {
        Some(p) => parse_lemma_map(art::open(&cfg.resolve(p))?)?,
        None => bundled_lemmas(),
    };
    Ok(TokenPipeline::new(stop, lemmas)?)
}

/// Topic and cluster labels from `assignments.csv`, checked against the
/// corpus order.
fn load_assignments(out: &Path, corpus: &Corpus) -> Result<(TopicAssignment, TopicAssignment), StageError> {
    let report: TopicsReport = art::read_json(&out.join(art::TOPICS))?;
    let t = Table::read(&out.join(art::ASSIGNMENTS))?;
    let id_col = t.col("id")?;
    if t.rows.len() != corpus.len() || t.rows.iter().zip(corpus.ids()).any(|(r, id)| r[id_col] != id) {
        return Err(StageError::Malformed(format!(
            "{} does not match {}; rerun the topics stage",
            art::ASSIGNMENTS,
            art::CORPUS
        )));
    }
    let topics = TopicAssignment::new(t.column("topic")?, report.k_effective)?;
    let clusters = TopicAssignment::new(t.column("cluster")?, report.n_clusters)?;
    Ok((topics, clusters))
}

fn fmt_f(v: f64) -> String {
    v.to_string()
}

pub fn ingest(cfg: &PipelineConfig, out: &Path) -> Result<(), StageError> {
    let (corpus, parse) = parse_corpus(art::open(&cfg.resolve(&cfg.corpus))?, &cfg.schema)?;
    let (deduped, dedup_report) = dedup(&corpus, cfg.dedup_key);
    let kept = deduped.retain(|r| !word_tokens(&r.clean_text).is_empty())?;
    let tokenless = deduped.len() - kept.len();
    if tokenless > 0 {
        log::warn!("dropped {tokenless} records without word tokens");
    }
    log::info!(
        "ingest: {} lines, {} records after dedup ({} dropped)",
        parse.lines,
        kept.len(),
        dedup_report.dropped
    );
    let mut w = BufWriter::new(File::create(out.join(art::CORPUS))?);
    kept.write_jsonl(&mut w)?;
    std::io::Write::flush(&mut w)?;
    art::write_json(
        &out.join(art::DEDUP_REPORT),
        &IngestReport {
            parse,
            dedup: dedup_report,
            tokenless_dropped: tokenless,
            documents: kept.len(),
        },
    )
}

pub fn embed(cfg: &PipelineConfig, out: &Path) -> Result<(), StageError> {
    let corpus = load_corpus(out)?;
    let matrix = match &cfg.embeddings {
        Some(p) => import_embeddings(&cfg.resolve(p), &corpus)?,
        None => {
            let (m, dropped) = hash_embed(&corpus, cfg.embed_dim, cfg.seed)?;
            if let Some(id) = dropped.first() {
                // Ingest removes tokenless records, so this means a corrupt corpus artifact.
                return Err(EmbeddingError::MissingEmbedding(id.clone()).into());
            }
            m
        }
    };
    log::info!("embed: {} x {}", matrix.n_rows(), matrix.dim());
    let mut w = BufWriter::new(File::create(out.join(art::EMBEDDINGS))?);
    matrix.write_binary(&mut w)?;
    std::io::Write::flush(&mut w)?;
    Ok(())
}

/// Consecutive row blocks of `batch_size`; a short tail is merged into the
/// previous block so no batch has fewer rows than components.
fn batches(x: &DenseMatrix, batch_size: usize, min_rows: usize) -> Result<Vec<DenseMatrix>, TopicError> {
    let mut bounds = Vec::new();
    let mut start = 0;
    while start < x.rows {
        let end = (start + batch_size).min(x.rows);
        bounds.push((start, end));
        start = end;
    }
    if bounds.len() > 1 {
        let (s, e) = bounds[bounds.len() - 1];
        if e - s < min_rows.max(batch_size / 2) {
            bounds.pop();
            let last = bounds.len() - 1;
            bounds[last].1 = e;
        }
    }
    bounds
        .into_iter()
        .map(|(s, e)| DenseMatrix::new(e - s, x.cols, x.data[s * x.cols..e * x.cols].to_vec()))
        .collect()
}

pub fn topics(cfg: &PipelineConfig, out: &Path) -> Result<(), StageError> {
    let corpus = load_corpus(out)?;
    let emb = import_embeddings(&out.join(art::EMBEDDINGS), &corpus)?;
    let x = DenseMatrix::new(emb.n_rows(), emb.dim(), emb.data().to_vec())?;
    let pca = fit_incremental_pca(&batches(&x, cfg.batch_size, cfg.out_dim)?, cfg.out_dim)?;
    let reduced = pca.project(&x)?;
    let fitted = fit_minibatch_kmeans(
        &reduced,
        KMeansParams {
            k: cfg.k,
            seed: cfg.seed,
            batch_size: cfg.batch_size,
            epochs: cfg.epochs,
            n_init: cfg.n_init,
        },
    )?;
    let raw = assign_topics(&fitted, &reduced)?;

    // Centroids no document is nearest to carry no topic; drop them so every
    // topic downstream is non-empty. Nearest-centroid labels are unchanged.
    let sizes = raw.sizes();
    let keep: Vec<bool> = sizes.iter().map(|&s| s > 0).collect();
    let pruned: Vec<usize> = (0..fitted.k).filter(|&j| !keep[j]).collect();
    let (model, assignment) = if pruned.is_empty() {
        (fitted, raw)
    } else {
        log::warn!("{} of {} topics received no documents and were pruned", pruned.len(), fitted.k);
        let (model, map) = fitted.retain(&keep);
        let map: Vec<usize> = map.into_iter().map(|m| m.unwrap_or(0)).collect();
        let assignment = raw.remap(&map, model.k)?;
        (model, assignment)
    };
    let k_eff = model.k;
    if k_eff < 2 {
        return Err(TopicError::InvalidK(k_eff).into());
    }

    let pipeline = token_pipeline(cfg)?;
    let mut summaries = ctfidf_terms(&corpus, &assignment, &pipeline, cfg.top_n_terms)?;
    let docs: Vec<Vec<String>> = corpus.records().iter().map(|r| pipeline.tokenize(&r.clean_text)).collect();
    let vocab = summaries
        .iter()
        .flat_map(|s| s.top_terms.iter().take(cfg.coherence_top_m).map(|(t, _)| t.as_str()));
    let scorer = NpmiScorer::new(docs.iter().map(Vec::as_slice), vocab, cfg.coherence_window)?;
    for s in &mut summaries {
        let terms: Vec<&str> = s.top_terms.iter().take(cfg.coherence_top_m).map(|(t, _)| t.as_str()).collect();
        s.coherence = scorer.topic_score(s.topic_id, &terms).ok();
    }
    let mean_largest = mean_coherence_of_largest(&summaries, cfg.coherence_topics);

    let cut = cfg.cut_k.min(k_eff);
    if cut < cfg.cut_k {
        log::warn!("cut_k {} exceeds the {} effective topics; using {}", cfg.cut_k, k_eff, cut);
    }
    let dendrogram = topic_hierarchy(&model, cfg.linkage, cut)?;
    let series = topic_dynamics(&assignment, &corpus, TimeDelta::days(cfg.bin_days))?;
    let map = intertopic_map(&model)?;

    art::write_json(
        &out.join(art::MODEL),
        &ModelArtifact {
            pca: &pca,
            kmeans: &model,
            pruned: &pruned,
        },
    )?;

    let mut t = Table::new(["id", "topic", "cluster"]);
    for (r, &l) in corpus.records().iter().zip(&assignment.labels) {
        t.push(vec![r.id.clone(), l.to_string(), dendrogram.flat_labels[l].to_string()]);
    }
    t.write(&out.join(art::ASSIGNMENTS))?;

    art::write_json(
        &out.join(art::TOPICS),
        &TopicsReport {
            k_requested: cfg.k,
            k_effective: k_eff,
            pruned,
            n_clusters: cut,
            coherence_window: cfg.coherence_window,
            coherence_top_m: cfg.coherence_top_m,
            coherence_topics: cfg.coherence_topics,
            mean_coherence_largest: mean_largest,
            topics: summaries,
        },
    )?;
    art::write_json(&out.join(art::DENDROGRAM), &dendrogram)?;

    let mut t = Table::new(["topic", "bin", "bin_start", "count", "peak"]);
    for (topic, counts) in series.counts.iter().enumerate() {
        for (bin, c) in counts.iter().enumerate() {
            t.push(vec![
                topic.to_string(),
                bin.to_string(),
                series.bin_edges[bin].to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                c.to_string(),
                series.peaks[topic].contains(&bin).to_string(),
            ]);
        }
    }
    t.write(&out.join(art::DYNAMICS))?;

    let sizes = assignment.sizes();
    let mut t = Table::new(["topic", "x", "y", "size"]);
    for topic in 0..k_eff {
        let row = map.row(topic);
        t.push(vec![topic.to_string(), fmt_f(row[0]), fmt_f(row[1]), sizes[topic].to_string()]);
    }
    t.write(&out.join(art::MAP))?;
    log::info!("topics: {k_eff} topics, {cut} clusters, mean coherence {mean_largest:?}");
    Ok(())
}

pub fn keywords(cfg: &PipelineConfig, out: &Path) -> Result<(), StageError> {
    let corpus = load_corpus(out)?;
    let (topics, _) = load_assignments(out, &corpus)?;
    let pipeline = token_pipeline(cfg)?;
    let mut t = Table::new(["rank", "keyword", "count"]);
    for (i, (w, c)) in global_keywords(&corpus, &pipeline, cfg.top_n_keywords).entries.into_iter().enumerate() {
        t.push(vec![(i + 1).to_string(), w, c.to_string()]);
    }
    t.write(&out.join(art::KEYWORDS))?;
    let mut t = Table::new(["topic", "rank", "keyword", "count"]);
    for topic in 0..topics.k {
        let ranking = topic_keywords(&corpus, &topics, topic, &pipeline, cfg.top_n_terms)?;
        for (i, (w, c)) in ranking.entries.into_iter().enumerate() {
            t.push(vec![topic.to_string(), (i + 1).to_string(), w, c.to_string()]);
        }
    }
    t.write(&out.join(art::TOPIC_KEYWORDS))
}

fn affect_table(first: &str, rows: &[TopicAffect]) -> Table {
    let mut headers: Vec<String> = [first, "size", "n_pos", "n_neu", "n_neg", "sentiment_score"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for stat in ["mean", "median"] {
        headers.extend(Emotion::ALL.iter().map(|e| format!("{stat}_{}", e.name())));
    }
    for stat in ["mean", "median"] {
        headers.extend(DyadStats::NAMES.iter().map(|d| format!("{stat}_{d}")));
    }
    headers.push("dominant_emotion".into());
    headers.push("dominant_emotion_median".into());
    let mut t = Table::new(headers);
    for a in rows {
        let mut row = vec![
            a.topic_id.to_string(),
            a.size.to_string(),
            a.counts.n_pos.to_string(),
            a.counts.n_neu.to_string(),
            a.counts.n_neg.to_string(),
            fmt_f(a.sentiment_score),
        ];
        row.extend(a.emotion_mean.scores().iter().map(|&v| fmt_f(v)));
        row.extend(a.emotion_median.scores().iter().map(|&v| fmt_f(v)));
        row.extend(a.dyad_mean.as_array().iter().map(|&v| fmt_f(v)));
        row.extend(a.dyad_median.as_array().iter().map(|&v| fmt_f(v)));
        row.push(a.dominant_emotion.name().into());
        row.push(a.dominant_emotion_median.name().into());
        t.push(row);
    }
    t
}

pub fn affect(cfg: &PipelineConfig, out: &Path) -> Result<(), StageError> {
    let corpus = load_corpus(out)?;
    let (topics, clusters) = load_assignments(out, &corpus)?;
    let sentiment = match (&cfg.sentiment_labels, &cfg.sentiment_lexicon) {
        (Some(p), _) => SentimentProvider::Imported(read_sentiment_labels(art::open(&cfg.resolve(p))?)?),
        (None, Some(p)) => SentimentProvider::Lexicon(SentimentLexicon::parse(art::open(&cfg.resolve(p))?)?),
        (None, None) => SentimentProvider::Lexicon(SentimentLexicon::bundled()),
    };
    let emotion = match (&cfg.emotion_scores, &cfg.emotion_lexicon) {
        (Some(p), _) => EmotionProvider::Imported(read_emotion_scores(art::open(&cfg.resolve(p))?)?),
        (None, Some(p)) => EmotionProvider::Lexicon(EmotionLexicon::parse(art::open(&cfg.resolve(p))?)?),
        (None, None) => EmotionProvider::Lexicon(EmotionLexicon::bundled()),
    };
    let labels = score_sentiment_labels(&corpus, &sentiment)?;
    let emotions = score_emotions(&corpus, &emotion)?;

    let mut headers: Vec<String> = ["id", "topic", "cluster", "label"].iter().map(|s| s.to_string()).collect();
    headers.extend(Emotion::ALL.iter().map(|e| e.name().to_string()));
    headers.extend(DyadStats::NAMES.iter().map(|d| d.to_string()));
    let mut t = Table::new(headers);
    for (i, r) in corpus.records().iter().enumerate() {
        let mut row = vec![
            r.id.clone(),
            topics.labels[i].to_string(),
            clusters.labels[i].to_string(),
            labels[i].as_str().into(),
        ];
        row.extend(emotions[i].scores().iter().map(|&v| fmt_f(v)));
        row.extend(compose_dyads(&emotions[i]).as_array().iter().map(|&v| fmt_f(v)));
        t.push(row);
    }
    t.write(&out.join(art::DOCUMENT_AFFECT))?;

    let topic_affect = aggregate_topic_affect(&labels, &emotions, &topics)?;
    let cluster_affect = aggregate_topic_affect(&labels, &emotions, &clusters)?;
    affect_table("topic", &topic_affect).write(&out.join(art::TOPIC_AFFECT))?;
    affect_table("cluster", &cluster_affect).write(&out.join(art::CLUSTER_AFFECT))?;

    // Shares by median-dominant emotion use the same rule on the median vector.
    let by_mean = dominant_emotion_shares(&topic_affect);
    let median_view: Vec<TopicAffect> = topic_affect
        .iter()
        .map(|a| TopicAffect {
            dominant_emotion: a.dominant_emotion_median,
            ..a.clone()
        })
        .collect();
    let by_median = dominant_emotion_shares(&median_view);
    let lookup = |v: &[(Emotion, f64)], e: Emotion| v.iter().find(|x| x.0 == e).map_or(0.0, |x| x.1);
    let mut t = Table::new(["emotion", "share_mean", "share_median"]);
    for e in Emotion::ALL {
        t.push(vec![e.name().into(), fmt_f(lookup(&by_mean, e)), fmt_f(lookup(&by_median, e))]);
    }
    t.write(&out.join(art::EMOTION_DOMINANCE))
}

fn test_entry(name: &str, inputs: &str, res: Result<TestResult, StatsError>) -> Value {
    match res {
        Ok(r) => json!({
            "test": name, "inputs": inputs, "statistic": r.statistic, "p": r.p_value,
            "n_eff": r.n_eff, "method": r.method, "error": null,
        }),
        Err(e) => json!({
            "test": name, "inputs": inputs, "statistic": null, "p": null,
            "n_eff": null, "method": null, "error": e.to_string(),
        }),
    }
}

fn diff_entry(comparison: &str, level: &str, a: &[f64], b: &[f64]) -> Value {
    let ma = crate::stats::median(a);
    let mb = crate::stats::median(b);
    let (pct, err) = match median_percent_diff(a, b) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    json!({
        "comparison": comparison, "level": level, "median_a": ma, "median_b": mb,
        "percent_diff": pct, "error": err,
    })
}

pub fn stats(_cfg: &PipelineConfig, out: &Path) -> Result<(), StageError> {
    let topics = Table::read(&out.join(art::TOPIC_AFFECT))?;
    let clusters = Table::read(&out.join(art::CLUSTER_AFFECT))?;
    let docs = Table::read(&out.join(art::DOCUMENT_AFFECT))?;

    let col = |t: &Table, name: &str| t.column::<f64>(name);
    let size = col(&topics, "size")?;
    let share = |name: &str| -> Result<Vec<f64>, StageError> {
        Ok(col(&topics, name)?.iter().zip(&size).map(|(c, s)| c / s).collect())
    };

    let tests = vec![
        test_entry(
            "hope_gt_anxiety",
            "topic mean hope vs topic mean anxiety",
            wilcoxon_signed_rank(&col(&topics, "mean_hope")?, &col(&topics, "mean_anxiety")?, Alternative::Greater),
        ),
        test_entry(
            "optimism_gt_pessimism",
            "topic mean optimism vs topic mean pessimism",
            wilcoxon_signed_rank(
                &col(&topics, "mean_optimism")?,
                &col(&topics, "mean_pessimism")?,
                Alternative::Greater,
            ),
        ),
        test_entry(
            "positive_gt_negative",
            "topic positive share vs topic negative share",
            wilcoxon_signed_rank(&share("n_pos")?, &share("n_neg")?, Alternative::Greater),
        ),
    ];

    let emo: Vec<Vec<f64>> = Emotion::ALL.iter().map(|e| col(&docs, e.name())).collect::<Result<_, _>>()?;
    let mut pairs = Vec::new();
    for i in 0..9 {
        for j in (i + 1)..9 {
            pairs.push((i, j, spearman_rho(&emo[i], &emo[j])));
        }
    }
    let ok_p: Vec<f64> = pairs.iter().filter_map(|p| p.2.as_ref().ok().map(|r| r.p_value)).collect();
    let adjusted = bonferroni(&ok_p, pairs.len())?;
    let mut adj = adjusted.into_iter();
    let correlations: Vec<Value> = pairs
        .into_iter()
        .map(|(i, j, res)| {
            let ok = res.is_ok();
            let mut v = test_entry(
                &format!("spearman_{}_{}", Emotion::ALL[i].name(), Emotion::ALL[j].name()),
                "document emotion scores",
                res,
            );
            v["p_bonferroni"] = if ok { json!(adj.next()) } else { Value::Null };
            v
        })
        .collect();

    let mut diffs = Vec::new();
    for (name, a, b) in [("hope_vs_anxiety", "hope", "anxiety"), ("optimism_vs_pessimism", "optimism", "pessimism")] {
        diffs.push(diff_entry(name, "document", &col(&docs, a)?, &col(&docs, b)?));
        for (level, t) in [("topic", &topics), ("cluster", &clusters)] {
            diffs.push(diff_entry(
                name,
                level,
                &col(t, &format!("mean_{a}"))?,
                &col(t, &format!("mean_{b}"))?,
            ));
        }
    }

    art::write_json(
        &out.join(art::STATS),
        &json!({
            "wilcoxon": tests,
            "spearman": { "pairs": correlations, "bonferroni_m": 36 },
            "median_differences": diffs,
        }),
    )
}

pub fn kols(cfg: &PipelineConfig, out: &Path) -> Result<(), StageError> {
    let corpus = load_corpus(out)?;
    let (topics, _) = load_assignments(out, &corpus)?;
    let stats = topic_shares_with_min(&corpus, &topics, cfg.active_min_count)?;

    let mut t = Table::new(["rank", "author", "count", "breadth"]);
    for (i, (a, c)) in stats.volumes.iter().enumerate() {
        let breadth = stats.breadth.get(a).copied().unwrap_or(0);
        t.push(vec![(i + 1).to_string(), a.clone(), c.to_string(), breadth.to_string()]);
    }
    t.write(&out.join(art::AUTHORS))?;

    let mut t = Table::new(["topic", "author", "count", "share"]);
    for r in stats.share_rows() {
        t.push(vec![r.topic.to_string(), r.author, r.count.to_string(), fmt_f(r.share)]);
    }
    t.write(&out.join(art::SHARES))?;

    let mut t = Table::new(["topic", "author", "count", "share"]);
    for (topic, l) in stats.leaders.iter().enumerate() {
        if let Some(l) = l {
            t.push(vec![topic.to_string(), l.author.clone(), l.count.to_string(), fmt_f(l.share)]);
        }
    }
    t.write(&out.join(art::LEADERS))?;

    let volumes: Vec<u64> = stats.volumes.iter().map(|v| v.1).collect();
    art::write_json(
        &out.join(art::CENSUS),
        &json!({
            "n_authors": volumes.len(),
            "n_documents": corpus.len(),
            "concentration": { "top_k": cfg.kol_top_k, "share": concentration(&volumes, cfg.kol_top_k)? },
            "single_leader": dominance_census(&stats, cfg.dominance_threshold)?,
            "cumulative_top_k": cumulative_dominance_census(&stats, cfg.kol_top_k, cfg.dominance_threshold)?,
        }),
    )
}

fn triples(t: &Table, a: &str, b: &str) -> Result<Vec<(usize, f64, f64)>, StageError> {
    let ids: Vec<usize> = t.column(&t.headers[0].clone())?;
    Ok(ids.into_iter().zip(t.column::<f64>(a)?).zip(t.column::<f64>(b)?).map(|((i, x), y)| (i, x, y)).collect())
}

pub fn report(cfg: &PipelineConfig, out: &Path) -> Result<(), StageError> {
    let dynamics = Table::read(&out.join(art::DYNAMICS))?;
    let topic_affect = Table::read(&out.join(art::TOPIC_AFFECT))?;
    let cluster_affect = Table::read(&out.join(art::CLUSTER_AFFECT))?;
    let docs = Table::read(&out.join(art::DOCUMENT_AFFECT))?;
    let dominance = Table::read(&out.join(art::EMOTION_DOMINANCE))?;
    let map = Table::read(&out.join(art::MAP))?;
    let topics: TopicsReport = art::read_json(&out.join(art::TOPICS))?;
    let ingest: IngestReport = art::read_json(&out.join(art::DEDUP_REPORT))?;

    let mut series: Vec<(usize, Vec<u64>)> = (0..topics.k_effective).map(|t| (t, Vec::new())).collect();
    let mut bin_labels = Vec::new();
    let (tc, bc, sc, cc) = (dynamics.col("topic")?, dynamics.col("bin")?, dynamics.col("bin_start")?, dynamics.col("count")?);
    for r in 0..dynamics.rows.len() {
        let topic: usize = dynamics.parse(r, tc)?;
        let bin: usize = dynamics.parse(r, bc)?;
        let entry = series
            .get_mut(topic)
            .ok_or_else(|| StageError::Malformed(format!("{}: unknown topic {topic}", art::DYNAMICS)))?;
        if entry.1.len() != bin {
            return Err(StageError::Malformed(format!("{}: bins out of order", art::DYNAMICS)));
        }
        entry.1.push(dynamics.parse(r, cc)?);
        if topic == 0 {
            bin_labels.push(dynamics.rows[r][sc].chars().take(10).collect());
        }
    }

    let emotion_names: Vec<&str> = Emotion::ALL.iter().map(|e| e.name()).collect();
    let emotion_scores = emotion_names.iter().map(|e| docs.column::<f64>(e)).collect::<Result<_, _>>()?;
    let mut dom = Vec::new();
    let (ec, shc) = (dominance.col("emotion")?, dominance.col("share_mean")?);
    for r in 0..dominance.rows.len() {
        let e: Emotion = dominance.rows[r][ec]
            .parse()
            .map_err(|_| StageError::Malformed(format!("{}: unknown emotion", art::EMOTION_DOMINANCE)))?;
        let s: f64 = dominance.parse(r, shc)?;
        if s > 0.0 {
            dom.push((e, s));
        }
    }
    let points = map
        .column::<usize>("topic")?
        .into_iter()
        .zip(map.column::<f64>("x")?)
        .zip(map.column::<f64>("y")?)
        .zip(map.column::<usize>("size")?)
        .map(|(((t, x), y), s)| (t, x, y, s))
        .collect();

    let inputs = ReportInputs {
        bin_labels,
        dynamics: series,
        topic_sentiment: topic_affect
            .column::<usize>("topic")?
            .into_iter()
            .zip(topic_affect.column::<f64>("sentiment_score")?)
            .collect(),
        topic_optimism: triples(&topic_affect, "mean_optimism", "mean_pessimism")?,
        cluster_optimism: triples(&cluster_affect, "mean_optimism", "mean_pessimism")?,
        emotion_scores,
        dominance: dom,
        map: points,
    };
    let charts = emit_reports(&inputs, out)?;

    let mut artifacts: Vec<String> = std::fs::read_dir(out)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n != art::MANIFEST && n != art::TIMINGS && n != art::RUN_SUMMARY)
        .collect();
    artifacts.push(art::RUN_SUMMARY.into());
    artifacts.sort();
    art::write_json(
        &out.join(art::RUN_SUMMARY),
        &json!({
            "seed": cfg.seed,
            "config": cfg.echo(),
            "documents": ingest.documents,
            "parse": ingest.parse,
            "dedup": ingest.dedup,
            "tokenless_dropped": ingest.tokenless_dropped,
            "k_requested": topics.k_requested,
            "k_effective": topics.k_effective,
            "n_clusters": topics.n_clusters,
            "mean_coherence_largest": topics.mean_coherence_largest,
            "topic_sizes": topics.topics.iter().map(|t| t.size).collect::<Vec<_>>(),
            "charts": charts.len(),
            "artifacts": artifacts,
        }),
    )
}
