//! End-to-end stages: mine, train, detect and report.
//!
//! Stages share a work directory:
//!
//! ```text
//! dataset.jsonl          mined records, one JSON object per line
//! model/embedding.bin    word vectors
//! model/forest.bin       trees, feature names and kept mask
//! model/bundle.json      feature settings and standardization statistics
//! model/train.csv        standardized training features
//! model/test.csv         standardized held-out features
//! model/metrics.json     held-out scores, baseline, calibration, importance
//! model/run.conf         the configuration that produced the bundle
//! report/                importance, subset retrain and calibration tables
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{load_dataset, mine_commit, persist_dataset, scan_commits, DatasetRecord, MineOptions};
use crate::embed::{derive_seed, io as embed_io, pair_documents, train_skipgram, EmbeddingModel, SkipgramConfig};
use crate::error::{Error, Result};
use crate::features::{
    extract_features, feature_kinds, feature_names, filter_correlated, read_matrix, write_matrix, FeatureConfig,
    FeatureMatrix, Standardizer,
};
use crate::linker::PairKind;
use crate::model::{
    calibration, evaluate, feature_importance, grid_search, importance_ranking, load_forest, rule_baseline,
    save_forest, train_forest_with, CalibrationPoint, Criterion, FeatureSubset, Forest, Hyperparams, Metrics,
    ParamGrid, DEFAULT_RULE_THRESHOLD,
};

const STREAM_EMBEDDING: u64 = 1;
const STREAM_FOREST: u64 = 2;
const STREAM_SPLIT: u64 = 3;
const STREAM_DOCUMENTS: u64 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub repos: Vec<PathBuf>,
    pub extensions: Vec<String>,
    pub seed: u64,
    /// The seed field is replaced by one derived from `seed`.
    pub embedding: SkipgramConfig,
    /// The seed field is replaced by one derived from `seed`.
    pub hyperparams: Hyperparams,
    pub correlation_threshold: f64,
    /// Training share of the record-level split.
    pub split: f64,
    pub out: PathBuf,
    pub features: FeatureConfig,
    /// Similarity-shift threshold of the rule baseline.
    pub rule_threshold: f64,
    pub calibration_bins: usize,
    pub mine: MineOptions,
    pub grid_search: bool,
    pub folds: usize,
    /// Size of the reduced feature set retrained by `report`.
    pub subset_size: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            repos: Vec::new(),
            extensions: vec!["java".into()],
            seed: 1,
            embedding: SkipgramConfig::default(),
            hyperparams: Hyperparams::default(),
            correlation_threshold: 0.8,
            split: 0.7,
            out: PathBuf::from("ccdrift-out"),
            features: FeatureConfig::default(),
            rule_threshold: DEFAULT_RULE_THRESHOLD,
            calibration_bins: 10,
            mine: MineOptions::default(),
            grid_search: false,
            folds: 10,
            subset_size: 15,
        }
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

impl RunConfig {
    /// Applies `key = value` lines over the current values. `#` starts a
    /// comment; `repo` may repeat.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("config line {}: expected key = value", i + 1)))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| Error::invalid(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::invalid(format!("bad value {value:?} for {key}"));
        let num = |v: &str| v.parse::<usize>().map_err(|_| bad());
        let real = |v: &str| v.parse::<f64>().map_err(|_| bad());
        let flag = |v: &str| parse_bool(v).ok_or_else(bad);
        match key {
            "repo" => self.repos.push(PathBuf::from(value)),
            "ext" => {
                self.extensions = value
                    .split(',')
                    .map(|e| e.trim().trim_start_matches('.').to_string())
                    .filter(|e| !e.is_empty())
                    .collect()
            }
            "seed" => self.seed = value.parse().map_err(|_| bad())?,
            "split" => self.split = real(value)?,
            "out" => self.out = PathBuf::from(value),
            "correlation_threshold" => self.correlation_threshold = real(value)?,
            "threshold" | "rule_threshold" => self.rule_threshold = real(value)?,
            "calibration_bins" => self.calibration_bins = num(value)?,
            "window_radius" => self.embedding.window_radius = num(value)?,
            "embedding_dim" => self.embedding.embedding_dim = num(value)?,
            "negative_samples" => self.embedding.negative_samples = num(value)?,
            "epochs" => self.embedding.epochs = num(value)?,
            "learning_rate" => self.embedding.learning_rate = real(value)?,
            "n_trees" => self.hyperparams.n_trees = num(value)?,
            "criterion" => {
                self.hyperparams.criterion = match value {
                    "gini" => Criterion::Gini,
                    "entropy" => Criterion::Entropy,
                    _ => return Err(bad()),
                }
            }
            "max_depth" => {
                self.hyperparams.max_depth = match value {
                    "none" => None,
                    v => Some(num(v)?),
                }
            }
            "min_samples_split" => self.hyperparams.min_samples_split = num(value)?,
            "min_samples_leaf" => self.hyperparams.min_samples_leaf = num(value)?,
            "max_features" => {
                self.hyperparams.feature_subset = match value {
                    "sqrt" => FeatureSubset::Sqrt,
                    "log2" => FeatureSubset::Log2,
                    "all" | "none" => FeatureSubset::All,
                    _ => return Err(bad()),
                }
            }
            "bootstrap" => self.hyperparams.bootstrap = flag(value)?,
            "binarize_counts" => self.features.binarize_counts = flag(value)?,
            "return_from_comment_tag" => self.features.return_from_comment_tag = flag(value)?,
            "include_comment_only" => self.mine.include_comment_only = flag(value)?,
            "grid_search" => self.grid_search = flag(value)?,
            "folds" => self.folds = num(value)?,
            "subset_size" => self.subset_size = num(value)?,
            _ => return Err(Error::invalid(format!("unknown key {key}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::invalid("split must lie strictly between 0 and 1"));
        }
        if !(0.0..=1.0).contains(&self.correlation_threshold) {
            return Err(Error::invalid("correlation_threshold must lie in [0, 1]"));
        }
        if self.calibration_bins == 0 || self.subset_size == 0 {
            return Err(Error::invalid("calibration_bins and subset_size must be positive"));
        }
        self.embedding.validate()?;
        self.hyperparams.validate()
    }

    pub fn embedding_config(&self) -> SkipgramConfig {
        SkipgramConfig {
            seed: derive_seed(self.seed, STREAM_EMBEDDING),
            ..self.embedding
        }
    }

    pub fn forest_params(&self) -> Hyperparams {
        Hyperparams {
            seed: derive_seed(self.seed, STREAM_FOREST),
            ..self.hyperparams
        }
    }

    pub fn dataset_path(&self) -> PathBuf {
        self.out.join("dataset.jsonl")
    }

    pub fn bundle_dir(&self) -> PathBuf {
        self.out.join("model")
    }

    pub fn report_dir(&self) -> PathBuf {
        self.out.join("report")
    }

    /// The configuration as `key = value` text that [`apply_text`] reads back.
    ///
    /// [`apply_text`]: RunConfig::apply_text
    pub fn to_text(&self) -> String {
        let e = &self.embedding;
        let h = &self.hyperparams;
        let mut s = String::new();
        for r in &self.repos {
            let _ = writeln!(s, "repo = {}", r.display());
        }
        let crit = match h.criterion {
            Criterion::Gini => "gini",
            Criterion::Entropy => "entropy",
        };
        let depth = h.max_depth.map_or("none".to_string(), |d| d.to_string());
        let pairs: [(&str, String); 24] = [
            ("ext", self.extensions.join(",")),
            ("seed", self.seed.to_string()),
            ("split", self.split.to_string()),
            ("out", self.out.display().to_string()),
            ("correlation_threshold", self.correlation_threshold.to_string()),
            ("rule_threshold", self.rule_threshold.to_string()),
            ("calibration_bins", self.calibration_bins.to_string()),
            ("window_radius", e.window_radius.to_string()),
            ("embedding_dim", e.embedding_dim.to_string()),
            ("negative_samples", e.negative_samples.to_string()),
            ("epochs", e.epochs.to_string()),
            ("learning_rate", e.learning_rate.to_string()),
            ("n_trees", h.n_trees.to_string()),
            ("criterion", crit.to_string()),
            ("max_depth", depth),
            ("min_samples_split", h.min_samples_split.to_string()),
            ("min_samples_leaf", h.min_samples_leaf.to_string()),
            ("max_features", h.feature_subset.name().to_string()),
            ("bootstrap", h.bootstrap.to_string()),
            ("binarize_counts", self.features.binarize_counts.to_string()),
            ("return_from_comment_tag", self.features.return_from_comment_tag.to_string()),
            ("include_comment_only", self.mine.include_comment_only.to_string()),
            ("grid_search", self.grid_search.to_string()),
            ("folds", self.folds.to_string()),
        ];
        for (k, v) in pairs {
            let _ = writeln!(s, "{k} = {v}");
        }
        let _ = writeln!(s, "subset_size = {}", self.subset_size);
        s
    }
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn project_name(repo: &Path) -> String {
    let canonical = repo.canonicalize().unwrap_or_else(|_| repo.to_path_buf());
    canonical
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("repo")
        .to_string()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MineSummary {
    pub commits: usize,
    pub skipped_commits: usize,
    pub unparsed_files: usize,
}

/// Mines every commit of `repo` (or only `range`) into dataset records.
pub fn mine_repository(
    repo: &Path,
    config: &RunConfig,
    range: Option<&str>,
) -> Result<(Vec<DatasetRecord>, MineSummary)> {
    let scan = scan_commits(repo, &config.extensions, range)?;
    let project = project_name(repo);
    let mut records = Vec::new();
    let mut summary = MineSummary {
        commits: scan.commits.len(),
        skipped_commits: scan.skipped,
        unparsed_files: 0,
    };
    for commit in &scan.commits {
        let mined = mine_commit(commit, &project, &config.mine);
        summary.unparsed_files += mined.unparsed_files;
        records.extend(mined.records);
    }
    Ok((records, summary))
}

/// Counts by pair kind and label, as a small text table.
pub fn dataset_counts(records: &[DatasetRecord]) -> String {
    let mut table: BTreeMap<&str, [usize; 2]> = BTreeMap::new();
    for r in records {
        let kind = match r.pair_change.old_pair.kind {
            PairKind::Block => "block",
            PairKind::Method => "method",
        };
        table.entry(kind).or_default()[usize::from(r.label)] += 1;
    }
    let mut s = format!("{:<8}{:>10}{:>10}{:>10}\n", "kind", "positive", "negative", "total");
    let mut total = [0, 0];
    for (kind, [neg, pos]) in &table {
        let _ = writeln!(s, "{kind:<8}{pos:>10}{neg:>10}{:>10}", pos + neg);
        total[0] += neg;
        total[1] += pos;
    }
    let _ = writeln!(s, "{:<8}{:>10}{:>10}{:>10}", "all", total[1], total[0], total[0] + total[1]);
    s
}

/// Mines all configured repositories and writes the dataset file.
pub fn cmd_mine(config: &RunConfig) -> Result<(Vec<DatasetRecord>, MineSummary)> {
    if config.repos.is_empty() {
        return Err(Error::invalid("no repository given"));
    }
    let mut all = Vec::new();
    let mut total = MineSummary::default();
    for repo in &config.repos {
        let (records, s) = mine_repository(repo, config, None)?;
        total.commits += s.commits;
        total.skipped_commits += s.skipped_commits;
        total.unparsed_files += s.unparsed_files;
        all.extend(records);
    }
    if all.is_empty() {
        return Err(Error::invalid("no code-comment pair changes found"));
    }
    let path = config.dataset_path();
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    persist_dataset(&all, &path)?;
    Ok((all, total))
}

/// Seeded record-level split; returns (train, test) indices, each in
/// ascending order. Both parts are non-empty.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::invalid("need at least two records to split"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_SPLIT)));
    let cut = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
    let mut train = idx[..cut].to_vec();
    let mut test = idx[cut..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Skip-gram model over the blended documents of both revisions of every
/// record.
pub fn train_embedding(records: &[&DatasetRecord], config: &RunConfig) -> Result<EmbeddingModel> {
    let base = derive_seed(config.seed, STREAM_DOCUMENTS);
    let mut corpus = Vec::new();
    for (i, r) in records.iter().enumerate() {
        let pc = &r.pair_change;
        for (j, pair) in [&pc.old_pair, &pc.new_pair].into_iter().enumerate() {
            let docs = pair_documents(pair, derive_seed(base, (2 * i + j) as u64));
            corpus.extend(docs.into_corpus().into_iter().filter(|d| !d.is_empty()));
        }
    }
    train_skipgram(&corpus, &config.embedding_config())
}

pub fn featurize(records: &[&DatasetRecord], model: &EmbeddingModel, config: &FeatureConfig) -> Vec<Vec<f64>> {
    records
        .iter()
        .map(|r| extract_features(&r.pair_change, model, config).values)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub feature_names: Vec<String>,
    pub features: FeatureConfig,
    pub standardizer: Standardizer,
    pub rule_threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub meta: BundleMeta,
    pub embedding: EmbeddingModel,
    pub forest: Forest,
}

impl Bundle {
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        embed_io::save(&self.embedding, &dir.join("embedding.bin"))?;
        save_forest(&self.forest, &dir.join("forest.bin"))?;
        write_file(&dir.join("bundle.json"), serde_json::to_string_pretty(&self.meta)?)
    }

    /// Loads a bundle and checks it against this build's feature layout.
    pub fn load(dir: &Path) -> Result<Self> {
        let meta_path = dir.join("bundle.json");
        let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let meta: BundleMeta = serde_json::from_str(&text)?;
        let names = feature_names();
        if meta.feature_names != names {
            return Err(Error::LayoutMismatch {
                expected: names.len(),
                actual: meta.feature_names.len(),
            });
        }
        let forest = load_forest(&dir.join("forest.bin"))?;
        if forest.feature_names != names || meta.standardizer.width() != names.len() {
            return Err(Error::LayoutMismatch {
                expected: names.len(),
                actual: forest.width(),
            });
        }
        Ok(Bundle {
            embedding: embed_io::load(&dir.join("embedding.bin"))?,
            forest,
            meta,
        })
    }

    /// Standardized feature row of a pair change.
    pub fn features(&self, record: &DatasetRecord) -> Result<Vec<f64>> {
        let raw = extract_features(&record.pair_change, &self.embedding, &self.meta.features).values;
        self.meta.standardizer.transform(&raw)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub train_size: usize,
    pub test_size: usize,
    pub kept_features: usize,
    pub hyperparams: Hyperparams,
    pub forest: Metrics,
    pub baseline: Metrics,
    pub calibration: Vec<CalibrationPoint>,
    /// Feature names with scores, highest first.
    pub importance: Vec<(String, f64)>,
}

impl TrainSummary {
    pub fn render(&self) -> String {
        let line = |name: &str, m: &Metrics| {
            format!(
                "{name:<9} precision {:.4}  recall {:.4}  f1 {:.4}  (tp {} fp {} tn {} fn {})\n",
                m.precision, m.recall, m.f1, m.true_positives, m.false_positives, m.true_negatives, m.false_negatives
            )
        };
        let mut s = format!(
            "train {} / test {} records, {} features kept\n",
            self.train_size, self.test_size, self.kept_features
        );
        s += &line("forest", &self.forest);
        s += &line("baseline", &self.baseline);
        s
    }
}

/// Everything `train` produces, before it is written out.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub bundle: Bundle,
    pub summary: TrainSummary,
    pub train: FeatureMatrix,
    pub test: FeatureMatrix,
}

pub fn ranked_importance(forest: &Forest) -> Vec<(String, f64)> {
    let imp = feature_importance(forest);
    importance_ranking(&imp)
        .into_iter()
        .map(|i| (forest.feature_names[i].clone(), imp[i]))
        .collect()
}

pub fn train_records(records: &[DatasetRecord], config: &RunConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let positives = records.iter().filter(|r| r.label == 1).count();
    if positives == 0 || positives == records.len() {
        return Err(Error::invalid("dataset contains a single class"));
    }
    let (train_idx, test_idx) = split_indices(records.len(), config.split, config.seed)?;
    let train_recs: Vec<&DatasetRecord> = train_idx.iter().map(|&i| &records[i]).collect();
    let test_recs: Vec<&DatasetRecord> = test_idx.iter().map(|&i| &records[i]).collect();

    let embedding = train_embedding(&train_recs, config)?;
    let raw_train = featurize(&train_recs, &embedding, &config.features);
    let raw_test = featurize(&test_recs, &embedding, &config.features);
    let standardizer = Standardizer::fit(&raw_train, &feature_kinds())?;
    let x_train = standardizer.transform_all(&raw_train)?;
    let x_test = standardizer.transform_all(&raw_test)?;
    let y_train: Vec<u8> = train_recs.iter().map(|r| r.label).collect();
    let y_test: Vec<u8> = test_recs.iter().map(|r| r.label).collect();

    let names = feature_names();
    let kept = filter_correlated(&x_train, config.correlation_threshold)?;
    let mut mask = vec![false; names.len()];
    for &j in &kept {
        mask[j] = true;
    }
    let mut hp = config.forest_params();
    if config.grid_search {
        let result = grid_search(&x_train, &y_train, &names, &mask, &ParamGrid::default(), &hp, config.folds)?;
        log::info!("grid search: best mean F1 {:.4}", result.best_f1);
        hp = result.best;
    }
    let forest = train_forest_with(&x_train, &y_train, &names, &mask, &hp)?;

    let predictions = forest.predict_all(&x_test)?;
    let labels: Vec<u8> = predictions.iter().map(|p| p.1).collect();
    let probs: Vec<f64> = predictions.iter().map(|p| p.0).collect();
    let baseline: Vec<u8> = test_recs
        .iter()
        .map(|r| rule_baseline(&r.pair_change, &embedding, config.rule_threshold))
        .collect();
    let summary = TrainSummary {
        train_size: train_recs.len(),
        test_size: test_recs.len(),
        kept_features: kept.len(),
        hyperparams: hp,
        forest: evaluate(&labels, &y_test)?,
        baseline: evaluate(&baseline, &y_test)?,
        calibration: calibration(&probs, &y_test, config.calibration_bins)?,
        importance: ranked_importance(&forest),
    };
    Ok(TrainOutcome {
        bundle: Bundle {
            meta: BundleMeta {
                feature_names: names.clone(),
                features: config.features,
                standardizer,
                rule_threshold: config.rule_threshold,
            },
            embedding,
            forest,
        },
        summary,
        train: FeatureMatrix {
            names: names.clone(),
            rows: x_train,
            labels: y_train,
        },
        test: FeatureMatrix {
            names,
            rows: x_test,
            labels: y_test,
        },
    })
}

fn save_matrix(m: &FeatureMatrix, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_matrix(m, &mut buf).map_err(|e| Error::io(path, e))?;
    write_file(path, buf)
}

fn load_matrix(path: &Path) -> Result<FeatureMatrix> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_matrix(std::io::BufReader::new(file), path)
}

/// Trains from the dataset file and writes the bundle.
pub fn cmd_train(config: &RunConfig, dataset: &Path) -> Result<TrainSummary> {
    let records = load_dataset(dataset)?;
    let outcome = train_records(&records, config)?;
    let dir = config.bundle_dir();
    outcome.bundle.save(&dir)?;
    save_matrix(&outcome.train, &dir.join("train.csv"))?;
    save_matrix(&outcome.test, &dir.join("test.csv"))?;
    write_file(&dir.join("metrics.json"), serde_json::to_string_pretty(&outcome.summary)?)?;
    write_file(&dir.join("run.conf"), config.to_text())?;
    Ok(outcome.summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionEntry {
    pub project: String,
    pub commit: String,
    pub path: String,
    pub comment_line: usize,
    pub comment_excerpt: String,
    pub probability: f64,
    pub label: u8,
    /// Importance-weighted feature values with the largest magnitude.
    pub top_features: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub pairs_examined: usize,
    /// Flagged pairs, most probable first.
    pub entries: Vec<DetectionEntry>,
    /// Held-out scores recorded when the bundle was trained.
    pub training: Option<TrainSummary>,
}

impl DetectionReport {
    pub fn render(&self) -> String {
        let mut s = format!("{} pair changes examined, {} flagged\n", self.pairs_examined, self.entries.len());
        for e in &self.entries {
            let short = &e.commit[..e.commit.len().min(10)];
            let _ = writeln!(s, "{:.3}  {short}  {}:{}  {}", e.probability, e.path, e.comment_line, e.comment_excerpt);
            for (name, v) in &e.top_features {
                let _ = writeln!(s, "         {name} {v:+.4}");
            }
        }
        if let Some(t) = &self.training {
            s += "bundle held-out scores:\n";
            s += &t.render();
        }
        s
    }
}

fn excerpt(comment: &str) -> String {
    let body = crate::linker::comment_body(comment);
    let mut out: String = body.chars().take(80).collect();
    if body.chars().count() > 80 {
        out.push_str("...");
    }
    out
}

/// Largest `importance × value` products among kept features.
pub fn top_contributions(forest: &Forest, importance: &[f64], row: &[f64], k: usize) -> Vec<(String, f64)> {
    let mut c: Vec<(usize, f64)> = (0..row.len())
        .filter(|&j| forest.kept_mask[j] && importance[j] > 0.0)
        .map(|j| (j, importance[j] * row[j]))
        .filter(|(_, v)| *v != 0.0)
        .collect();
    c.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
    c.into_iter()
        .take(k)
        .map(|(j, v)| (forest.feature_names[j].clone(), v))
        .collect()
}

/// Scores the pair changes of `range` in `repo` with a trained bundle.
/// The bundle directory is only read.
pub fn cmd_detect(bundle_dir: &Path, repo: &Path, range: Option<&str>, config: &RunConfig) -> Result<DetectionReport> {
    let bundle = Bundle::load(bundle_dir)?;
    let (records, _) = mine_repository(repo, config, range)?;
    let importance = feature_importance(&bundle.forest);
    let mut entries = Vec::new();
    for r in &records {
        let row = bundle.features(r)?;
        let (probability, label) = bundle.forest.predict(&row)?;
        if label == 0 {
            continue;
        }
        let old = &r.pair_change.old_pair;
        entries.push(DetectionEntry {
            project: r.project.clone(),
            commit: r.commit_id.clone(),
            path: r.path.clone(),
            comment_line: old.comment_span.start,
            comment_excerpt: excerpt(&old.comment_text),
            probability,
            label,
            top_features: top_contributions(&bundle.forest, &importance, &row, 5),
        });
    }
    // Stable: equal probabilities keep mining order.
    entries.sort_by(|a, b| b.probability.total_cmp(&a.probability));
    let metrics_path = bundle_dir.join("metrics.json");
    let training = match fs::read_to_string(&metrics_path) {
        Ok(text) => Some(serde_json::from_str(&text)?),
        Err(_) => None,
    };
    Ok(DetectionReport {
        pairs_examined: records.len(),
        entries,
        training,
    })
}

pub fn report_json(report: &DetectionReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetComparison {
    pub subset: Vec<String>,
    pub full_f1: f64,
    pub subset_f1: f64,
}

/// Retrains on the `k` most important kept features and compares held-out
/// F1 with the full forest.
pub fn subset_retrain(forest: &Forest, train: &FeatureMatrix, test: &FeatureMatrix, k: usize) -> Result<SubsetComparison> {
    let imp = feature_importance(forest);
    let top: Vec<usize> = importance_ranking(&imp)
        .into_iter()
        .filter(|&j| forest.kept_mask[j])
        .take(k)
        .collect();
    let mut mask = vec![false; forest.width()];
    for &j in &top {
        mask[j] = true;
    }
    let reduced = train_forest_with(&train.rows, &train.labels, &forest.feature_names, &mask, &forest.hyperparams)?;
    Ok(SubsetComparison {
        subset: top.iter().map(|&j| forest.feature_names[j].clone()).collect(),
        full_f1: evaluate(&forest.labels(&test.rows)?, &test.labels)?.f1,
        subset_f1: evaluate(&reduced.labels(&test.rows)?, &test.labels)?.f1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportArtifacts {
    pub importance: Vec<(String, f64)>,
    pub subset: SubsetComparison,
    pub calibration: Vec<CalibrationPoint>,
}

impl ReportArtifacts {
    pub fn importance_table(&self) -> String {
        let mut s = String::from("rank\tfeature\timportance\n");
        for (i, (name, v)) in self.importance.iter().enumerate() {
            let _ = writeln!(s, "{}\t{name}\t{v:.6}", i + 1);
        }
        s
    }

    pub fn calibration_table(&self) -> String {
        let mut s = String::from("mean_predicted\tobserved\tcount\n");
        for p in &self.calibration {
            let _ = writeln!(s, "{:.6}\t{:.6}\t{}", p.mean_predicted, p.observed, p.count);
        }
        s
    }

    pub fn subset_text(&self) -> String {
        format!(
            "features\tf1\nall\t{:.4}\ntop {}\t{:.4}\nsubset: {}\n",
            self.subset.full_f1,
            self.subset.subset.len(),
            self.subset.subset_f1,
            self.subset.subset.join(", ")
        )
    }
}

/// Importance ranking, reduced-set retrain and calibration points of a
/// bundle; tables go to the report directory.
pub fn cmd_report(bundle_dir: &Path, config: &RunConfig) -> Result<ReportArtifacts> {
    let forest = load_forest(&bundle_dir.join("forest.bin"))?;
    let train = load_matrix(&bundle_dir.join("train.csv"))?;
    let test = load_matrix(&bundle_dir.join("test.csv"))?;
    let probs: Vec<f64> = forest.predict_all(&test.rows)?.into_iter().map(|p| p.0).collect();
    let artifacts = ReportArtifacts {
        importance: ranked_importance(&forest),
        subset: subset_retrain(&forest, &train, &test, config.subset_size)?,
        calibration: calibration(&probs, &test.labels, config.calibration_bins)?,
    };
    let dir = config.report_dir();
    write_file(&dir.join("importance.tsv"), artifacts.importance_table())?;
    write_file(&dir.join("calibration.tsv"), artifacts.calibration_table())?;
    write_file(&dir.join("subset.tsv"), artifacts.subset_text())?;
    Ok(artifacts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_round_trip() {
        let mut c = RunConfig::default();
        c.apply_text("# comment\nrepo = a\nrepo = b\nseed = 9\nmax_depth = 5\ncriterion = entropy\next = .java, .kt\n")
            .unwrap();
        assert_eq!(c.repos, [PathBuf::from("a"), PathBuf::from("b")]);
        assert_eq!(c.extensions, ["java", "kt"]);
        assert_eq!(c.hyperparams.max_depth, Some(5));
        let mut d = RunConfig::default();
        d.apply_text(&c.to_text()).unwrap();
        assert_eq!(c, d);
        assert!(RunConfig::default().apply_text("bogus = 1").is_err());
        assert!(RunConfig::default().apply_text("seed").is_err());
    }

    #[test]
    fn seed_reaches_every_stage() {
        let a = RunConfig::default();
        let b = RunConfig { seed: 2, ..RunConfig::default() };
        assert_ne!(a.embedding_config().seed, b.embedding_config().seed);
        assert_ne!(a.forest_params().seed, b.forest_params().seed);
        assert_ne!(split_indices(20, 0.7, 1).unwrap(), split_indices(20, 0.7, 2).unwrap());
    }

    #[test]
    fn split_sizes() {
        let (tr, te) = split_indices(10, 0.7, 5).unwrap();
        assert_eq!((tr.len(), te.len()), (7, 3));
        let (tr, te) = split_indices(2, 0.99, 5).unwrap();
        assert_eq!((tr.len(), te.len()), (1, 1));
        assert!(split_indices(1, 0.5, 5).is_err());
        let mut c = RunConfig::default();
        c.split = 1.0;
        assert!(c.validate().is_err());
    }
}
