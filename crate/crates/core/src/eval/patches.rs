use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::auc::roc_auc;
use crate::baselines::Baseline;
use crate::dtm::{total_score, DtmConfig};
use crate::{Error, GrayImage, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub category: String,
    pub image: GrayImage,
}

/// Similarity between a query patch and a candidate; higher is more alike.
pub trait PatchScorer: Sync {
    fn name(&self) -> String;
    fn score(&self, query: &Patch, candidate: &Patch) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Dtm(DtmConfig),
    Baseline(Baseline, DtmConfig),
}

impl Method {
    pub const NAMES: [&'static str; 5] = ["dtm", "sad1", "sad2", "hog1", "hog2"];

    /// Case-insensitive lookup; the error lists the valid names.
    pub fn parse(name: &str, config: DtmConfig) -> Result<Method> {
        if name.eq_ignore_ascii_case("dtm") {
            return Ok(Method::Dtm(config));
        }
        name.parse::<Baseline>()
            .map(|b| Method::Baseline(b, config))
            .map_err(|_| {
                Error::InvalidParameter(format!("unknown method {name:?}; valid methods: {}", Method::NAMES.join(", ")))
            })
    }

    pub fn score_images(&self, a: &GrayImage, b: &GrayImage) -> Result<f64> {
        match self {
            Method::Dtm(cfg) => Ok(total_score(a, b, cfg)?.similarity_total),
            Method::Baseline(baseline, cfg) => Ok(baseline.score(a, b, cfg)?.score),
        }
    }
}

impl PatchScorer for Method {
    fn name(&self) -> String {
        match self {
            Method::Dtm(cfg) => format!("dtm{}x{}", cfg.n, cfg.m),
            Method::Baseline(b, _) => b.name().to_string(),
        }
    }

    fn score(&self, query: &Patch, candidate: &Patch) -> Result<f64> {
        self.score_images(&query.image, &candidate.image)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchmarkConfig {
    pub iterations: usize,
    pub positives: usize,
    pub negatives: usize,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            iterations: 100,
            positives: 100,
            negatives: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRun {
    pub method: String,
    pub aucs: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation; zero for a single iteration.
    pub std: f64,
}

impl BenchmarkRun {
    pub fn from_aucs(method: String, aucs: Vec<f64>) -> Self {
        let (mean, std) = mean_std(&aucs);
        BenchmarkRun { method, aucs, mean, std }
    }

    /// `method,iteration,auc` rows, then `mean` and `std` rows.
    pub fn to_table(&self) -> String {
        let mut out = String::from("method,iteration,auc\n");
        for (i, a) in self.aucs.iter().enumerate() {
            out.push_str(&format!("{},{},{:.9}\n", self.method, i, a));
        }
        out.push_str(&format!("{},mean,{:.9}\n", self.method, self.mean));
        out.push_str(&format!("{},std,{:.9}\n", self.method, self.std));
        out
    }
}

/// Mean and sample (n - 1) standard deviation; the deviation of fewer than
/// two values is zero.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn check_sample_sizes(corpus: &[Patch], config: &BenchmarkConfig) -> Result<()> {
    if config.iterations == 0 || config.positives == 0 || config.negatives == 0 {
        return Err(Error::InvalidParameter("iterations, positives and negatives must be positive".into()));
    }
    let mut counts: Vec<(&str, usize)> = Vec::new();
    for p in corpus {
        match counts.iter_mut().find(|(c, _)| *c == p.category) {
            Some((_, n)) => *n += 1,
            None => counts.push((&p.category, 1)),
        }
    }
    if counts.len() < 2 {
        return Err(Error::InsufficientPatches(format!(
            "need at least 2 categories, corpus has {}",
            counts.len()
        )));
    }
    for &(cat, n) in &counts {
        if n - 1 < config.positives {
            return Err(Error::InsufficientPatches(format!(
                "category {cat:?} has {} positives per query, {} requested",
                n - 1,
                config.positives
            )));
        }
        let others = corpus.len() - n;
        if others < config.negatives {
            return Err(Error::InsufficientPatches(format!(
                "category {cat:?} has {others} negatives available, {} requested",
                config.negatives
            )));
        }
    }
    Ok(())
}

fn run_iteration(corpus: &[Patch], scorer: &dyn PatchScorer, config: &BenchmarkConfig, seed: u64, iteration: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(iteration as u64);
    let q = rng.gen_range(0..corpus.len());
    let query = &corpus[q];
    let same: Vec<usize> = (0..corpus.len())
        .filter(|&i| i != q && corpus[i].category == query.category)
        .collect();
    let other: Vec<usize> = (0..corpus.len()).filter(|&i| corpus[i].category != query.category).collect();
    let pos_idx = sample(&mut rng, same.len(), config.positives);
    let neg_idx = sample(&mut rng, other.len(), config.negatives);
    let pos = pos_idx
        .iter()
        .map(|k| scorer.score(query, &corpus[same[k]]))
        .collect::<Result<Vec<_>>>()?;
    let neg = neg_idx
        .iter()
        .map(|k| scorer.score(query, &corpus[other[k]]))
        .collect::<Result<Vec<_>>>()?;
    roc_auc(&pos, &neg)
}

/// Retrieval benchmark: each iteration draws a query, `positives` other
/// patches of its category and `negatives` patches pooled from all other
/// categories, all without replacement, and records the AUC of the scores.
///
/// Iteration `i` draws from stream `i` of a generator seeded with `seed`, so
/// results do not depend on scheduling.
pub fn voc_benchmark(corpus: &[Patch], scorer: &dyn PatchScorer, config: &BenchmarkConfig, seed: u64) -> Result<BenchmarkRun> {
    check_sample_sizes(corpus, config)?;
    let aucs = (0..config.iterations)
        .into_par_iter()
        .map(|i| run_iteration(corpus, scorer, config, seed, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchmarkRun::from_aucs(scorer.name(), aucs))
}
