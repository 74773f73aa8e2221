use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dtm_core::dtm::{total_score, DtmConfig};
use dtm_core::eval::synth::{synthetic_corpus, textured_image, write_corpus};
use dtm_core::eval::{
    correspondence_points, extract_features, load_annotations, load_corpus, sift_benchmark, sift_table,
    voc_benchmark, BenchmarkConfig, Method, PatchScorer, SiftBenchConfig,
};
use dtm_core::features::SiftParams;
use dtm_core::imageio::{load_pgm, save_pgm};
use dtm_core::matching::{match_descriptors, ransac_homography, MatchMode, RansacConfig};
use dtm_core::GrayImage;

type CliResult<T> = Result<T, String>;

#[derive(Parser)]
#[command(name = "dtm", version, about = "Deformable template matching toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Match two PGM images and print the score report.
    Match {
        img1: PathBuf,
        img2: PathBuf,
        #[command(flatten)]
        dtm: DtmArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Patch retrieval AUC benchmark over an annotation file.
    BenchPatches {
        annotations: PathBuf,
        #[arg(long, default_value = "dtm")]
        method: String,
        #[arg(long, default_value_t = 100)]
        iterations: usize,
        #[arg(long, default_value_t = 100)]
        positives: usize,
        #[arg(long, default_value_t = 100)]
        negatives: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        dtm: DtmArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inlier benchmark on randomly rotated and scaled copies of an image.
    BenchSift {
        image: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Replace every drawn transform with the identity.
        #[arg(long)]
        identity: bool,
        /// Strongest keypoints kept per image; 0 keeps all.
        #[arg(long, default_value_t = 600)]
        max_keypoints: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export SIFT correspondences between two images with RANSAC inlier flags.
    SiftMatch {
        img1: PathBuf,
        img2: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Deformable)]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 600)]
        max_keypoints: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the synthetic scene corpus and texture image.
    GenCorpus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 24)]
        per_category: usize,
        #[arg(long, default_value_t = 320)]
        texture_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Conventional,
    Deformable,
}

impl From<Mode> for MatchMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Conventional => MatchMode::Conventional,
            Mode::Deformable => MatchMode::Deformable,
        }
    }
}

#[derive(Args)]
struct DtmArgs {
    /// Sub-patch grid as rows x columns.
    #[arg(long, default_value = "2x2", value_parser = parse_pair)]
    grid: (usize, usize),
    /// Canonical template size as width x height.
    #[arg(long, default_value = "128x128", value_parser = parse_pair)]
    canon: (usize, usize),
    #[arg(long, default_value_t = 8)]
    cell_size: usize,
    #[arg(long, default_value_t = 9)]
    bins: usize,
}

impl DtmArgs {
    fn config(&self) -> CliResult<DtmConfig> {
        let cfg = DtmConfig {
            n: self.grid.0,
            m: self.grid.1,
            canonical_w: self.canon.0,
            canonical_h: self.canon.1,
            cell_size: self.cell_size,
            bins: self.bins,
            ..DtmConfig::default()
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected AxB, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("invalid number {v:?} in {s:?}"));
    Ok((parse(a)?, parse(b)?))
}

fn load(path: &Path) -> CliResult<GrayImage> {
    load_pgm(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn keypoint_cap(n: usize) -> Option<usize> {
    (n > 0).then_some(n)
}

fn cmd_match(img1: &Path, img2: &Path, dtm: &DtmArgs, out: Option<&Path>) -> CliResult<()> {
    let cfg = dtm.config()?;
    let (a, b) = (load(img1)?, load(img2)?);
    let r = total_score(&a, &b, &cfg).map_err(|e| e.to_string())?;
    let mut text = String::new();
    let _ = writeln!(text, "similarity_total={}", r.similarity_total);
    let _ = writeln!(text, "similarity_forward={}", r.similarity_forward);
    let _ = writeln!(text, "similarity_backward={}", r.similarity_backward);
    let _ = writeln!(text, "sweeps_forward={}", r.sweeps_forward);
    let _ = writeln!(text, "sweeps_backward={}", r.sweeps_backward);
    let _ = writeln!(text, "converged={}", r.converged);
    for (tag, placement) in [("forward", &r.placement_forward), ("backward", &r.placement_backward)] {
        for i in 0..placement.n {
            for j in 0..placement.m {
                let a = placement.anchor(i, j);
                let _ = writeln!(text, "anchor_{tag}[{i},{j}]={},{}", a.x, a.y);
            }
        }
    }
    emit(out, &text)
}

fn cmd_bench_patches(
    annotations: &Path,
    method: &str,
    config: BenchmarkConfig,
    seed: u64,
    dtm: &DtmArgs,
    out: Option<&Path>,
) -> CliResult<()> {
    let method = Method::parse(method, dtm.config()?).map_err(|e| e.to_string())?;
    let records = load_annotations(annotations).map_err(|e| format!("{}: {e}", annotations.display()))?;
    let corpus = load_corpus(&records).map_err(|e| format!("{}: {e}", annotations.display()))?;
    let run = voc_benchmark(&corpus, &method, &config, seed).map_err(|e| e.to_string())?;
    let table = run.to_table();
    if out.is_some() {
        println!("{} mean={:.6} std={:.6}", method.name(), run.mean, run.std);
    }
    emit(out, &table)
}

fn cmd_bench_sift(image: &Path, trials: usize, seed: u64, identity: bool, max_keypoints: usize, out: Option<&Path>) -> CliResult<()> {
    if trials == 0 {
        return Err("--trials must be at least 1".into());
    }
    let img = load(image)?;
    let cfg = SiftBenchConfig {
        trials,
        identity,
        max_keypoints: keypoint_cap(max_keypoints),
        ..SiftBenchConfig::default()
    };
    let results = sift_benchmark(&img, &cfg, seed).map_err(|e| format!("{}: {e}", image.display()))?;
    let table = sift_table(&results);
    if out.is_some() {
        if let Some(summary) = table.lines().find(|l| l.starts_with("mean,")) {
            let f: Vec<&str> = summary.split(',').collect();
            println!("mean inliers conventional={} deformable={}", f[5], f[7]);
        }
    }
    emit(out, &table)
}

fn cmd_sift_match(img1: &Path, img2: &Path, mode: MatchMode, seed: u64, max_keypoints: usize, out: Option<&Path>) -> CliResult<()> {
    let (a, b) = (load(img1)?, load(img2)?);
    let params = SiftParams::default();
    let cap = keypoint_cap(max_keypoints);
    let fa = extract_features(&a, params, cap).map_err(|e| format!("{}: {e}", img1.display()))?;
    let fb = extract_features(&b, params, cap).map_err(|e| format!("{}: {e}", img2.display()))?;
    let (la, lb) = (fa.for_mode(mode), fb.for_mode(mode));
    let matches = match_descriptors(la, lb, mode);
    let pairs = correspondence_points(la, lb, &matches);
    let mut inlier = vec![false; matches.len()];
    match ransac_homography(&pairs, &RansacConfig::default(), seed) {
        Ok(r) => r.inliers.iter().for_each(|&i| inlier[i] = true),
        Err(e) => eprintln!("warning: no homography: {e}"),
    }
    let mut text = String::from("index_a,index_b,x_a,y_a,x_b,y_b,similarity,inlier\n");
    for ((c, ((xa, ya), (xb, yb))), flag) in matches.iter().zip(&pairs).zip(&inlier) {
        let _ = writeln!(
            text,
            "{},{},{:.3},{:.3},{:.3},{:.3},{:.6},{}",
            c.index_a, c.index_b, xa, ya, xb, yb, c.similarity, *flag as u8
        );
    }
    emit(out, &text)
}

fn cmd_gen_corpus(out: &Path, per_category: usize, texture_size: usize, seed: u64) -> CliResult<()> {
    let corpus = synthetic_corpus(seed, per_category).map_err(|e| e.to_string())?;
    write_corpus(&corpus, out).map_err(|e| e.to_string())?;
    if texture_size < 32 {
        return Err("--texture-size must be at least 32".into());
    }
    let tex = textured_image(seed, texture_size, texture_size);
    let path = out.join("texture.pgm");
    save_pgm(&tex, &path).map_err(|e| e.to_string())?;
    println!("wrote {} scenes, {} patches and {}", corpus.scenes.len(), corpus.objects.len(), path.display());
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Match { img1, img2, dtm, out } => cmd_match(&img1, &img2, &dtm, out.as_deref()),
        Command::BenchPatches {
            annotations,
            method,
            iterations,
            positives,
            negatives,
            seed,
            dtm,
            out,
        } => cmd_bench_patches(
            &annotations,
            &method,
            BenchmarkConfig {
                iterations,
                positives,
                negatives,
            },
            seed,
            &dtm,
            out.as_deref(),
        ),
        Command::BenchSift {
            image,
            trials,
            seed,
            identity,
            max_keypoints,
            out,
        } => cmd_bench_sift(&image, trials, seed, identity, max_keypoints, out.as_deref()),
        Command::SiftMatch {
            img1,
            img2,
            mode,
            seed,
            max_keypoints,
            out,
        } => cmd_sift_match(&img1, &img2, mode.into(), seed, max_keypoints, out.as_deref()),
        Command::GenCorpus {
            out,
            per_category,
            texture_size,
            seed,
        } => cmd_gen_corpus(&out, per_category, texture_size, seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
