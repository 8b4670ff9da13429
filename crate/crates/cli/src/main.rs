use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use corpusforge::corpus::{load_corpus, save_corpus};
use corpusforge::dedup::{self, DedupParams, LshParams, RawVideo};
use corpusforge::eval::features::{read_features, FeatureSet};
use corpusforge::eval::{
    accuracy_topk, lr_schedule, mean_average_precision, train_probe, uniform_clip_starts, video_prediction,
    ClipSpacing, PredictionAverage, ProbeConfig, ProbeModel, ProbeTargets,
};
use corpusforge::labelspace::{build_label_space, load_seeds, verb_noun_seeds, BuildOptions, PosHint, WordOrders};
use corpusforge::manifest::{load_manifest, save_manifest};
use corpusforge::sampling::{sample, SamplingPlan, Strategy};
use corpusforge::temporal::{build_length_class, plan_budget, Budget, BudgetPlan, LengthClass};
use corpusforge::tensor::io::{read_weights, write_weights, WeightFile};
use corpusforge::tensor::{fcn_transform, inflate, inflate_net, inflation_equivalence, Layer};
use corpusforge::{label_histogram, synth, LabelKind, LabelSpace};

#[derive(Parser)]
#[command(name = "corpusforge", version, about = "Curation and evaluation tooling for hashtag-labelled video corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Manifest utilities.
    #[command(subcommand)]
    Manifest(ManifestCmd),
    /// Corpus utilities.
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Label-space construction.
    #[command(subcommand)]
    Labelspace(LabelspaceCmd),
    /// Sample a subset of the corpus into a manifest.
    Sample(SampleArgs),
    /// Build a length-class subset under a clip budget.
    Select(SelectArgs),
    /// Near-duplicate detection between sources and targets.
    Dedup(DedupArgs),
    /// Inflate 2D weights (a tensor or a network) to 3D.
    Inflate(InflateArgs),
    /// Check that an inflated network reproduces its 2D source on a static clip.
    VerifyInflation(VerifyArgs),
    /// Replace the classifier head with a 1x1 convolution.
    Fcn(FcnArgs),
    /// Linear probe on frozen features.
    #[command(subcommand)]
    Probe(ProbeCmd),
    /// Step learning-rate schedule with warmup.
    Schedule(ScheduleArgs),
    /// Evaluation helpers.
    #[command(subcommand)]
    Eval(EvalCmd),
    /// Synthetic demo data.
    #[command(subcommand)]
    Synth(SynthCmd),
}

#[derive(Subcommand)]
enum ManifestCmd {
    /// Parse and check a manifest, optionally against a corpus.
    Validate {
        path: PathBuf,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, requires = "corpus")]
        labelspace: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CorpusCmd {
    /// Per-label video counts.
    Stats {
        corpus: PathBuf,
        #[arg(long)]
        labelspace: PathBuf,
    },
}

#[derive(Subcommand)]
enum LabelspaceCmd {
    /// Expand seed labels into hashtags and keep labels with enough videos.
    Build(BuildArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Seed phrases, one per line. For `verbnoun` these are the verbs.
    #[arg(long)]
    seeds: PathBuf,
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 50)]
    min_count: usize,
    /// Noun phrases for `--kind verbnoun`.
    #[arg(long)]
    nouns: Option<PathBuf>,
    /// Generate every content-word order instead of forward and reverse.
    #[arg(long)]
    all_orders: bool,
    /// Label-space name; defaults to the output file stem.
    #[arg(long)]
    name: Option<String>,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Seed,
    Verb,
    Noun,
    Verbnoun,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    strategy: StrategyArg,
    #[arg(long)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    labelspace: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Sqrt,
    Random,
    Tail,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long, value_enum)]
    class: ClassArg,
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Number of videos (f1).
    #[arg(long, conflicts_with = "minutes")]
    count: Option<usize>,
    /// Total clip minutes (f2).
    #[arg(long)]
    minutes: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    labelspace: PathBuf,
    /// Restrict the candidates to the videos of an earlier manifest.
    #[arg(long)]
    from: Option<PathBuf>,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Short,
    Long,
    LongCenter,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    F1,
    F2,
}

#[derive(Args)]
struct DedupArgs {
    /// Directory of `.cfvd` files or a text file listing them.
    #[arg(long)]
    sources: PathBuf,
    #[arg(long)]
    targets: PathBuf,
    #[arg(long, default_value_t = dedup::report::DEFAULT_TAU)]
    tau: f64,
    #[arg(long, default_value_t = dedup::report::DEFAULT_THRESHOLD_PCT)]
    threshold: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = dedup::lsh::DEFAULT_BANDS)]
    bands: usize,
    #[arg(long, default_value_t = dedup::lsh::DEFAULT_BITS)]
    bits: usize,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct InflateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    /// Spatial side of the random probe input.
    #[arg(long, default_value_t = 16)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FcnArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum ProbeCmd {
    /// Fit an L2-regularized linear probe by full-batch gradient descent.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value_t = 1e-4)]
        lambda: f64,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Score a trained probe: top-1/top-5 accuracy or mAP.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// Consecutive rows per video whose logits are averaged first.
        #[arg(long, default_value_t = 1)]
        clips_per_video: usize,
    },
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long, default_value_t = corpusforge::eval::schedule::DEFAULT_BASE_LR)]
    base: f64,
    #[arg(long, default_value_t = corpusforge::eval::schedule::DEFAULT_REDUCTIONS)]
    reductions: usize,
    #[arg(long, default_value_t = corpusforge::eval::schedule::DEFAULT_FACTOR)]
    factor: f64,
    #[arg(long)]
    total: usize,
    #[arg(long, default_value_t = 0)]
    warmup: usize,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum EvalCmd {
    /// Start frames of the evenly spaced test clips.
    Clips {
        #[arg(long)]
        frames: usize,
        #[arg(long, default_value_t = 8)]
        clip_len: usize,
        #[arg(long, default_value_t = 10)]
        clips: usize,
        /// Place clips at segment centres instead of spanning the video.
        #[arg(long)]
        segment_center: bool,
    },
}

#[derive(Subcommand)]
enum SynthCmd {
    /// Single-label corpus with Zipf-distributed label counts.
    Corpus {
        #[arg(long, default_value_t = 20)]
        labels: usize,
        #[arg(long, default_value_t = 500)]
        head: usize,
        #[arg(long, default_value_t = 1.0)]
        exponent: f64,
        #[arg(long, default_value_t = 1.0)]
        min_duration: f64,
        #[arg(long, default_value_t = 60.0)]
        max_duration: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Corpus JSONL.
        #[arg(short, long)]
        out: PathBuf,
        /// Matching label space JSON.
        #[arg(long)]
        labelspace: Option<PathBuf>,
    },
    /// Raw-frame source and target videos with injected duplicates.
    Videos {
        #[arg(long, default_value_t = 20)]
        sources: usize,
        #[arg(long, default_value_t = 10)]
        targets: usize,
        #[arg(long, default_value_t = 2)]
        duplicates: usize,
        #[arg(long, default_value_t = 32)]
        frames: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Writes `sources/` and `targets/` below this directory.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Random 2D network saved as a WTNT weight file.
    Net {
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Input side the network is sized for.
        #[arg(long, default_value_t = 16)]
        side: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Manifest(ManifestCmd::Validate {
            path,
            corpus,
            labelspace,
        }) => {
            let m = load_manifest(&path)?;
            if let Some(c) = corpus {
                let corpus = load_corpus(&c)?;
                let space = labelspace.map(LabelSpace::load).transpose()?;
                m.validate_against(&corpus, space.as_ref())?;
            }
            println!("ok: {} rows", m.len());
        }
        Command::Corpus(CorpusCmd::Stats { corpus, labelspace }) => {
            let corpus = load_corpus(&corpus)?;
            let space = LabelSpace::load(&labelspace)?;
            let h = label_histogram(&corpus, &space);
            let matched = corpus.iter().filter(|v| !space.matched_labels(v).is_empty()).count();
            let counts: BTreeMap<&str, u64> = h.counts.iter().map(|(l, &c)| (l.as_str(), c)).collect();
            print_json(&json!({
                "videos": corpus.len(),
                "matched_videos": matched,
                "labels": space.len(),
                "label_assignments": h.total(),
                "counts": counts,
            }))?;
        }
        Command::Labelspace(LabelspaceCmd::Build(a)) => build_labelspace(a)?,
        Command::Sample(a) => {
            let corpus = load_corpus(&a.corpus)?;
            let space = LabelSpace::load(&a.labelspace)?;
            let strategy = match a.strategy {
                StrategyArg::Sqrt => Strategy::SquareRoot,
                StrategyArg::Random => Strategy::Random,
                StrategyArg::Tail => Strategy::TailPreserving,
            };
            let m = sample(&corpus, &space, &SamplingPlan::new(strategy, a.budget, a.seed))?;
            m.validate_against(&corpus, Some(&space))?;
    save_manifest(&m, &a.out)?;
            println!("wrote {} rows to {}", m.len(), a.out.display());
        }
        Command::Select(a) => select(a)?,
        Command::Dedup(a) => run_dedup(a)?,
        Command::Inflate(a) => {
            let out = match read_weights(&a.input)? {
                WeightFile::Tensor(t) => WeightFile::Tensor(inflate(&t, a.k)?),
                WeightFile::Net(n) => WeightFile::Net(inflate_net(&n, a.k)?),
            };
            write_weights(&out, &a.out)?;
        }
        Command::VerifyInflation(a) => return verify_inflation(a),
        Command::Fcn(a) => {
            let WeightFile::Net(net) = read_weights(&a.input)? else {
                bail!("{} holds a single tensor; the transform needs a network", a.input.display());
            };
            write_weights(&WeightFile::Net(fcn_transform(&net)?), &a.out)?;
        }
        Command::Probe(p) => probe(p)?,
        Command::Schedule(a) => {
            let s = lr_schedule(a.base, a.warmup, a.total, a.reductions, a.factor)?;
            let body = json!({
                "schedule": s,
                "plateau_lengths": s.plateau_lengths(),
                "final_lr": s.final_lr(),
            });
            fs::write(&a.out, serde_json::to_string_pretty(&body)? + "\n")
                .with_context(|| format!("writing {}", a.out.display()))?;
        }
        Command::Eval(EvalCmd::Clips {
            frames,
            clip_len,
            clips,
            segment_center,
        }) => {
            let spacing = if segment_center {
                ClipSpacing::SegmentCenter
            } else {
                ClipSpacing::EndpointInclusive
            };
            println!("{}", serde_json::to_string(&uniform_clip_starts(frames, clip_len, clips, spacing)?)?);
        }
        Command::Synth(s) => synth_cmd(s)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn build_labelspace(a: BuildArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let (kind, hint) = match a.kind {
        KindArg::Seed => (LabelKind::Seed, PosHint::Other),
        KindArg::Verb => (LabelKind::Verb, PosHint::Verb),
        KindArg::Noun => (LabelKind::Noun, PosHint::Noun),
        KindArg::Verbnoun => (LabelKind::VerbNoun, PosHint::Verb),
    };
    let mut seeds = load_seeds(&a.seeds, hint)?;
    if let KindArg::Verbnoun = a.kind {
        let Some(nouns) = &a.nouns else {
            bail!("--kind verbnoun needs --nouns");
        };
        seeds = verb_noun_seeds(&seeds, &load_seeds(nouns, PosHint::Noun)?);
    } else if a.nouns.is_some() {
        bail!("--nouns only applies to --kind verbnoun");
    }
    let name = a.name.unwrap_or_else(|| {
        a.out
            .file_stem()
            .map_or_else(|| "labelspace".into(), |s| s.to_string_lossy().into_owned())
    });
    let mut opts = BuildOptions::new(name, kind, a.min_count);
    if a.all_orders {
        opts.orders = WordOrders::All;
    }
    let space = build_label_space(&seeds, &corpus, &opts)?;
    space.save(&a.out)?;
    println!("kept {} of {} labels", space.len(), seeds.len());
    Ok(())
}

fn select(a: SelectArgs) -> Result<()> {
    let mut corpus = load_corpus(&a.corpus)?;
    let space = LabelSpace::load(&a.labelspace)?;
    let mut inherited = BTreeMap::new();
    if let Some(from) = &a.from {
        let m = load_manifest(from)?;
        m.validate_against(&corpus, Some(&space))?;
        corpus = m.select_videos(&corpus);
        inherited = m.provenance;
    }
    let class = match a.class {
        ClassArg::Short => LengthClass::Short,
        ClassArg::Long => LengthClass::Long,
        ClassArg::LongCenter => LengthClass::LongCenter,
    };
    let budget = match (a.mode, a.count, a.minutes) {
        (ModeArg::F1, Some(n), None) => Budget::FixedCount(n),
        (ModeArg::F2, None, Some(m)) => Budget::FixedDuration { total_minutes: m },
        (ModeArg::F1, _, _) => bail!("--mode f1 takes --count"),
        (ModeArg::F2, _, _) => bail!("--mode f2 takes --minutes"),
    };
    let subset = build_length_class(&corpus, class)?;
    let out = plan_budget(
        &subset,
        &BudgetPlan {
            budget,
            length_class: class,
        },
        &space,
        a.seed,
    )?;
    let mut m = out.manifest;
    for (k, v) in inherited {
        m.provenance.entry(k).or_insert(v);
    }
    m.validate_against(&corpus, Some(&space))?;
    save_manifest(&m, &a.out)?;
    println!(
        "wrote {} clips ({:.3} min) to {}",
        m.len(),
        out.achieved_minutes,
        a.out.display()
    );
    Ok(())
}

/// `.cfvd` paths from a directory or a list file, with ids from file stems.
fn video_paths(spec: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut paths: Vec<PathBuf> = if spec.is_dir() {
        fs::read_dir(spec)
            .with_context(|| format!("reading {}", spec.display()))?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .filter(|p| p.extension().is_some_and(|e| e == "cfvd"))
            .collect()
    } else {
        let base = spec.parent().unwrap_or(Path::new("."));
        fs::read_to_string(spec)
            .with_context(|| format!("reading {}", spec.display()))?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| base.join(l))
            .collect()
    };
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for p in paths {
        let id = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .with_context(|| format!("no file name in {}", p.display()))?;
        out.push((id, p));
    }
    if let Some(w) = out.windows(2).find(|w| w[0].0 == w[1].0) {
        bail!("duplicate video id {}", w[0].0);
    }
    Ok(out)
}

fn load_videos(spec: &Path) -> Result<Vec<(String, RawVideo)>> {
    video_paths(spec)?
        .into_iter()
        .map(|(id, p)| Ok((id, RawVideo::load(&p)?)))
        .collect()
}

fn run_dedup(a: DedupArgs) -> Result<()> {
    let params = DedupParams {
        tau: a.tau,
        threshold_pct: a.threshold,
        lsh: LshParams {
            bands: a.bands,
            bits: a.bits,
        },
        seed: a.seed,
    };
    let sources = load_videos(&a.sources)?;
    let targets = load_videos(&a.targets)?;
    let src = dedup::decode_all(&sources)?;
    let tgt = dedup::decode_all(&targets)?;
    let report = dedup::dedup_report(&src, &tgt, &params)?;
    let ids: Vec<String> = sources.into_iter().map(|(id, _)| id).collect();
    dedup::write_report(&a.out, &report, &params, &ids, tgt.len())?;
    println!(
        "{} pairs with overlap, {} flagged, {} of {} sources kept",
        report.pairs.len(),
        report.flagged.len(),
        ids.len() - report.flagged_sources().len(),
        ids.len()
    );
    Ok(())
}

fn verify_inflation(a: VerifyArgs) -> Result<ExitCode> {
    let WeightFile::Net(net) = read_weights(&a.net)? else {
        bail!("{} holds a single tensor; verification needs a network", a.net.display());
    };
    let channels = match net.layers().first() {
        Some(Layer::Conv2d(c)) => c.weight.dims()[1],
        _ => bail!("network must start with a 2D convolution"),
    };
    let x = synth::random_input(a.seed, &[channels, a.size, a.size]);
    let eq = inflation_equivalence(&net, a.k, &x, a.tol)?;
    print_json(&json!({
        "k": a.k,
        "frames": eq.frames,
        "max_deviation": eq.max_deviation,
        "tol": a.tol,
        "pass": eq.within_tolerance,
    }))?;
    Ok(if eq.within_tolerance {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn probe(cmd: ProbeCmd) -> Result<()> {
    match cmd {
        ProbeCmd::Train {
            features,
            lambda,
            iters,
            step,
            out,
        } => {
            let set = read_features(&features)?;
            let cfg = ProbeConfig {
                l2_lambda: lambda,
                iters,
                step,
            };
            let fit = train_probe(&set.features, &set.targets, &cfg)?;
            fs::write(&out, serde_json::to_string_pretty(&fit.model)? + "\n")
                .with_context(|| format!("writing {}", out.display()))?;
            print_json(&json!({
                "final_loss": fit.final_loss(),
                "train": score(&fit.model, &set, 1)?,
            }))?;
        }
        ProbeCmd::Eval {
            model,
            features,
            clips_per_video,
        } => {
            let text = fs::read_to_string(&model).with_context(|| format!("reading {}", model.display()))?;
            let model: ProbeModel = serde_json::from_str(&text).context("parsing probe model")?;
            print_json(&score(&model, &read_features(&features)?, clips_per_video)?)?;
        }
    }
    Ok(())
}

fn score(model: &ProbeModel, set: &FeatureSet, clips_per_video: usize) -> Result<serde_json::Value> {
    if clips_per_video == 0 || !set.features.len().is_multiple_of(clips_per_video) {
        bail!(
            "{} rows do not split into videos of {clips_per_video} clips",
            set.features.len()
        );
    }
    if set.features.first().is_some_and(|r| r.len() != model.dim) {
        bail!("feature dimension does not match the model ({})", model.dim);
    }
    let logits: Vec<Vec<f64>> = set.features.iter().map(|x| model.logits(x)).collect();
    let videos: Vec<Vec<f64>> = logits
        .chunks(clips_per_video)
        .map(|c| video_prediction(c, PredictionAverage::Logits))
        .collect::<Result<_, _>>()?;
    let first = |i: usize| i * clips_per_video;
    Ok(match &set.targets {
        ProbeTargets::Multiclass { labels, .. } => {
            let y: Vec<usize> = (0..videos.len()).map(|v| labels[first(v)]).collect();
            let k5 = 5.min(model.outputs);
            json!({
                "videos": videos.len(),
                "top1": accuracy_topk(&videos, &y, 1)?,
                "top5": accuracy_topk(&videos, &y, k5)?,
            })
        }
        ProbeTargets::Multilabel(truth) => {
            let y: Vec<Vec<bool>> = (0..videos.len()).map(|v| truth[first(v)].clone()).collect();
            let r = mean_average_precision(&videos, &y)?;
            json!({
                "videos": videos.len(),
                "map": r.map,
                "skipped_labels": r.skipped,
            })
        }
    })
}

fn synth_cmd(cmd: SynthCmd) -> Result<()> {
    match cmd {
        SynthCmd::Corpus {
            labels,
            head,
            exponent,
            min_duration,
            max_duration,
            seed,
            out,
            labelspace,
        } => {
            if !(min_duration > 0.0 && min_duration <= max_duration) {
                bail!("need 0 < --min-duration <= --max-duration");
            }
            let counts = synth::zipf_counts(labels, head, exponent)
                .into_iter()
                .enumerate()
                .map(|(i, n)| (synth::label_name(i), n))
                .collect();
            let (corpus, space) = synth::labelled_corpus(&counts, (min_duration, max_duration), seed);
            save_corpus(&corpus, &out)?;
            if let Some(p) = labelspace {
                space.save(p)?;
            }
            println!("wrote {} videos over {} labels", corpus.len(), space.len());
        }
        SynthCmd::Videos {
            sources,
            targets,
            duplicates,
            frames,
            seed,
            out,
        } => {
            if duplicates > sources.min(targets) {
                bail!("cannot inject {duplicates} duplicates into {sources} sources and {targets} targets");
            }
            let c = dedup::synthetic::injected_corpus(seed, sources, targets, duplicates, frames);
            for (dir, videos) in [("sources", &c.sources), ("targets", &c.targets)] {
                let d = out.join(dir);
                fs::create_dir_all(&d).with_context(|| format!("creating {}", d.display()))?;
                for (id, v) in videos {
                    RawVideo::from_source(v)?.save(d.join(format!("{id}.cfvd")))?;
                }
            }
            let truth: Vec<String> = c.duplicates.iter().map(|(s, t)| format!("{s}\t{t}")).collect();
            fs::write(out.join("duplicates.tsv"), truth.join("\n") + "\n")?;
            println!("wrote {sources} sources, {targets} targets, {duplicates} duplicates");
        }
        SynthCmd::Net { depth, side, seed, out } => {
            if depth == 0 || side == 0 {
                bail!("--depth and --side must be positive");
            }
            let rn = synth::random_net(seed, depth, side);
            write_weights(&WeightFile::Net(rn.net), &out)?;
            println!("input shape {:?}", rn.input);
        }
    }
    Ok(())
}
