use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use invkge::checkpoint::{encode_dump, load_checkpoint, read_vocab, save_checkpoint, write_vocab, EmbeddingDump};
use invkge::dataset::{load_splits, read_splits, SplitPaths};
use invkge::eval::{
    ablate, link_prediction, ratio_sweep, triplet_classification, tune_thresholds, AblationVariant, OokgEmbedder,
    Thresholds,
};
use invkge::synthetic::{generate_synthetic, SyntheticConfig};
use invkge::train::train_with;
use invkge::{BenchmarkSplits, EmbeddingTables, EvalConfig, EvalReport, RelationCorrelation, Task, TrainConfig, Weighting};

use crate::args::*;

/// Bad flag combinations found after parsing; reported like clap errors.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub struct RunContext {
    pub seed: Option<u64>,
    pub threads: usize,
}

/// Runs one command and returns the process exit code.
pub fn run(command: Command, ctx: &RunContext) -> Result<u8> {
    match command {
        Command::Pretrain(a) => pretrain(a, ctx),
        Command::Estimate(a) => estimate(a, ctx),
        Command::Eval(a) => eval(a, ctx),
        Command::Ablate(a) => ablation(a, ctx),
        Command::Validate(a) => validate(a),
        Command::Synth(a) => synth(a, ctx),
        Command::Replay(_) => bail!("replay cannot be nested"),
    }
}

fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_owned())
}

impl DataArgs {
    fn paths(&self) -> Result<SplitPaths> {
        let base = self.data.as_deref().map(SplitPaths::in_dir);
        let pick = |explicit: &Option<PathBuf>, from_dir: Option<&PathBuf>, name: &str| -> Result<PathBuf> {
            explicit
                .clone()
                .or_else(|| from_dir.cloned())
                .ok_or_else(|| usage(format!("no {name} file: pass --data DIR or --{name} FILE")))
        };
        Ok(SplitPaths {
            train: pick(&self.train, base.as_ref().map(|b| &b.train), "train")?,
            aux: pick(&self.aux, base.as_ref().map(|b| &b.aux), "aux")?,
            valid: pick(&self.valid, base.as_ref().map(|b| &b.valid), "valid")?,
            test: pick(&self.test, base.as_ref().map(|b| &b.test), "test")?,
        })
    }

    /// The same inputs as explicit absolute file paths.
    fn resolved(&self) -> Result<DataArgs> {
        let p = self.paths()?;
        Ok(DataArgs {
            data: None,
            train: Some(absolute(&p.train)),
            aux: Some(absolute(&p.aux)),
            valid: Some(absolute(&p.valid)),
            test: Some(absolute(&p.test)),
            task: self.task,
        })
    }

    fn load(&self) -> Result<BenchmarkSplits> {
        let paths = self.paths()?;
        load_splits(&paths, self.task.into()).with_context(|| format!("loading splits from {}", paths.train.display()))
    }
}

fn prepare_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

fn write(path: PathBuf, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn echo(out: &Path, seed: u64, threads: usize, command: Command) -> Result<()> {
    let text = toml::to_string(&Echo { seed, threads, command }).context("serializing config echo")?;
    write(out.join("config.toml"), text)
}

fn resolve_train_config(a: &PretrainArgs, seed: Option<u64>) -> Result<TrainConfig> {
    let mut cfg = match a.preset {
        Some(Preset::Fb15k) => TrainConfig::fb15k(),
        Some(Preset::Wn11) => TrainConfig::wn11(),
        None => TrainConfig::default(),
    };
    if let Some(path) = &a.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: toml::Table = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let mut merged = toml::Table::try_from(&cfg)?;
        for (k, v) in file {
            if !merged.contains_key(&k) {
                bail!("{}: unknown training option {k:?}", path.display());
            }
            merged.insert(k, v);
        }
        cfg = merged.try_into().with_context(|| format!("invalid training options in {}", path.display()))?;
    }
    a.flags.apply(&mut cfg)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn pretrain(a: PretrainArgs, ctx: &RunContext) -> Result<u8> {
    let cfg = resolve_train_config(&a, ctx.seed)?;
    let splits = a.data.load()?;
    prepare_out(&a.out)?;
    log::info!(
        "training {} d={} on {} triplets ({} entities, {} relations) for {} steps",
        cfg.model,
        cfg.dim,
        splits.train.len(),
        splits.ikg_entities().len(),
        splits.num_relations(),
        cfg.steps
    );
    let output = train_with(&splits, &cfg, |step, loss| log::info!("step {step}: loss {loss:.6}"))?;

    save_checkpoint(&output.tables, a.out.join("checkpoint.bin"))?;
    write_vocab(&splits.vocab, a.out.join("vocab.tsv"))?;
    let mut csv = String::from("step,loss\n");
    for (step, loss) in &output.loss_log {
        writeln!(csv, "{step},{loss}").unwrap();
    }
    write(a.out.join("loss.csv"), csv)?;

    let resolved = PretrainArgs {
        data: a.data.resolved()?,
        preset: None,
        config: None,
        flags: TrainFlags::pinning(&cfg),
        out: absolute(&a.out),
    };
    echo(&a.out, cfg.seed, ctx.threads, Command::Pretrain(resolved))?;
    match output.loss_log.last() {
        Some((step, loss)) => println!("trained {step} steps, final loss {loss:.6}; wrote {}", a.out.display()),
        None => println!("0 steps: wrote the initial tables to {}", a.out.display()),
    }
    Ok(0)
}

fn load_model(m: &ModelInput, splits: &BenchmarkSplits) -> Result<EmbeddingTables> {
    let tables = load_checkpoint(&m.checkpoint).with_context(|| format!("loading {}", m.checkpoint.display()))?;
    let vocab_path = m.vocab.clone().unwrap_or_else(|| m.checkpoint.with_file_name("vocab.tsv"));
    if vocab_path.exists() {
        let vocab = read_vocab(&vocab_path)?;
        if vocab != splits.vocab {
            bail!(
                "{} does not match the dataset vocabulary; was the checkpoint trained on these splits?",
                vocab_path.display()
            );
        }
    } else {
        log::warn!("no vocabulary sidecar at {}; only checking table sizes", vocab_path.display());
    }
    if tables.num_entities() != splits.num_entities() || tables.num_relations() != splits.num_relations() {
        bail!(
            "checkpoint has {} entities and {} relations, dataset has {} and {}",
            tables.num_entities(),
            tables.num_relations(),
            splits.num_entities(),
            splits.num_relations()
        );
    }
    Ok(tables)
}

fn names(splits: &BenchmarkSplits, ids: impl IntoIterator<Item = u32>) -> String {
    let mut s = String::new();
    for e in ids {
        writeln!(s, "{}", splits.vocab.entity_name(e)).unwrap();
    }
    s
}

fn estimate(a: EstimateArgs, ctx: &RunContext) -> Result<u8> {
    let task: Task = a.data.task.into();
    let weighting = a.weights.weighting(task);
    if weighting == Weighting::Correlation {
        return Err(usage(
            "correlation weights depend on the query relation, so there is no single embedding to dump; \
             use --scheme degree or --scheme uniform (eval applies correlation weights per query)",
        ));
    }
    let splits = a.data.load()?;
    let tables = load_model(&a.model, &splits)?;
    let seed = ctx.seed.unwrap_or(0);
    let config = EvalConfig {
        weighting,
        neighbor_cap: a.weights.cap,
        seed,
    };
    let embedder = OokgEmbedder::new(&tables, &splits, &config)?;
    let rows = embedder.reduced_embeddings()?;
    prepare_out(&a.out)?;

    let mut manifest = String::from("row\tid\tname\n");
    for (i, (e, _)) in rows.iter().enumerate() {
        writeln!(manifest, "{i}\t{e}\t{}", splits.vocab.entity_name(*e)).unwrap();
    }
    let present: HashSet<u32> = rows.iter().map(|r| r.0).collect();
    let dangling: Vec<u32> = splits.ookg_entities().iter().copied().filter(|e| !present.contains(e)).collect();
    let dump = EmbeddingDump {
        model: tables.model,
        norm: tables.norm,
        dim: tables.dim,
        rows: rows.into_iter().map(|r| r.1).collect(),
    };
    write(a.out.join("embeddings.bin"), encode_dump(&dump))?;
    write(a.out.join("embeddings.tsv"), manifest)?;
    write(a.out.join("dangling.txt"), names(&splits, dangling.iter().copied()))?;

    let resolved = EstimateArgs {
        data: a.data.resolved()?,
        model: ModelInput {
            checkpoint: absolute(&a.model.checkpoint),
            vocab: a.model.vocab.as_deref().map(absolute),
        },
        weights: a.weights.clone(),
        out: absolute(&a.out),
    };
    echo(&a.out, seed, ctx.threads, Command::Estimate(resolved))?;
    println!(
        "estimated {} OOKG entities ({} dangling) with {} weights; wrote {}",
        dump.rows.len(),
        dangling.len(),
        weighting.name(),
        a.out.display()
    );
    Ok(0)
}

fn thresholds_csv(th: &Thresholds, splits: &BenchmarkSplits) -> String {
    let mut s = String::from("relation,threshold,tuned\n");
    for r in 0..splits.num_relations() as u32 {
        writeln!(s, "{},{},{}", splits.vocab.relation_name(r), th.get(r), th.tuned(r).is_some()).unwrap();
    }
    writeln!(s, "*,{},false", th.global).unwrap();
    s
}

fn summary_line(r: &EvalReport) -> String {
    match r.task {
        Task::LinkPrediction => format!(
            "{}: MRR {:.4}  Hits@1 {:.4}  Hits@10 {:.4}  ({} queries, {} dangling, {} skipped)",
            r.name,
            r.mrr.unwrap_or(f64::NAN),
            r.hits1.unwrap_or(f64::NAN),
            r.hits10.unwrap_or(f64::NAN),
            r.count,
            r.dangling,
            r.skipped
        ),
        Task::Classification => format!(
            "{}: accuracy {:.4}  ({} triplets, {} dangling)",
            r.name,
            r.accuracy.unwrap_or(f64::NAN),
            r.count,
            r.dangling
        ),
    }
}

fn eval(a: EvalArgs, ctx: &RunContext) -> Result<u8> {
    let task: Task = a.data.task.into();
    let splits = a.data.load()?;
    let tables = load_model(&a.model, &splits)?;
    let seed = ctx.seed.unwrap_or(0);
    let config = EvalConfig {
        weighting: a.weights.weighting(task),
        neighbor_cap: a.weights.cap,
        seed,
    };
    prepare_out(&a.out)?;
    let report = match task {
        Task::LinkPrediction => link_prediction(&tables, &splits, &config)?,
        Task::Classification => {
            let th = tune_thresholds(&tables, &splits.valid)?;
            write(a.out.join("thresholds.csv"), thresholds_csv(&th, &splits))?;
            triplet_classification(&tables, &splits, &th, &config)?
        }
    };
    write(a.out.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    write(a.out.join("report.csv"), EvalReport::to_csv(std::slice::from_ref(&report)))?;
    let dangling = splits.dangling_entities();
    if !dangling.is_empty() {
        log::warn!("{} dangling OOKG entities; see dangling.txt", dangling.len());
    }
    write(a.out.join("dangling.txt"), names(&splits, dangling))?;
    if a.dump_correlation {
        let corr = RelationCorrelation::build(&splits.train_store());
        write(a.out.join("correlation.csv"), corr.to_csv(&splits.vocab))?;
    }

    let resolved = EvalArgs {
        data: a.data.resolved()?,
        model: ModelInput {
            checkpoint: absolute(&a.model.checkpoint),
            vocab: a.model.vocab.as_deref().map(absolute),
        },
        weights: a.weights.clone(),
        dump_correlation: a.dump_correlation,
        out: absolute(&a.out),
    };
    echo(&a.out, seed, ctx.threads, Command::Eval(resolved))?;
    println!("{}", summary_line(&report));
    Ok(0)
}

fn ablation(a: AblateArgs, ctx: &RunContext) -> Result<u8> {
    let task: Task = a.data.task.into();
    let names: Vec<String> = a
        .variants
        .iter()
        .map(|v| v.trim().to_ascii_lowercase())
        .filter(|v| !v.is_empty())
        .collect();
    if names.is_empty() {
        return Err(usage("--variants needs at least one of full, uniform, cap<k>, ratio"));
    }
    let mut variants = Vec::new();
    let mut sweep = false;
    for n in &names {
        if n == "ratio" {
            sweep = true;
        } else {
            variants.push(n.parse::<AblationVariant>().map_err(|e| usage(e.to_string()))?);
        }
    }
    let seed = ctx.seed.unwrap_or(0);
    let base = EvalConfig {
        weighting: a.weights.weighting(task),
        neighbor_cap: a.weights.cap,
        seed,
    };
    prepare_out(&a.out)?;
    let mut reports = Vec::new();

    if !variants.is_empty() {
        let checkpoint = a
            .checkpoint
            .clone()
            .ok_or_else(|| usage("--checkpoint is required for single-dataset variants"))?;
        let splits = a.data.load()?;
        let tables = load_model(&ModelInput { checkpoint, vocab: None }, &splits)?;
        reports.extend(ablate(&tables, &splits, &base, &variants)?);
    }
    if sweep {
        if a.datasets.is_empty() {
            return Err(usage("the ratio variant needs --datasets"));
        }
        if !a.checkpoints.is_empty() && a.checkpoints.len() != a.datasets.len() {
            return Err(usage("--checkpoints must list one checkpoint per dataset"));
        }
        let mut members = Vec::new();
        for (i, dir) in a.datasets.iter().enumerate() {
            let data = DataArgs {
                data: Some(dir.clone()),
                train: None,
                aux: None,
                valid: None,
                test: None,
                task: a.data.task,
            };
            let splits = data.load()?;
            let checkpoint = a.checkpoints.get(i).cloned().unwrap_or_else(|| dir.join("checkpoint.bin"));
            let tables = load_model(&ModelInput { checkpoint, vocab: None }, &splits)?;
            let name = dir
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| format!("dataset{i}"));
            members.push((name, tables, splits));
        }
        let refs: Vec<(&str, &EmbeddingTables, &BenchmarkSplits)> =
            members.iter().map(|(n, t, s)| (n.as_str(), t, s)).collect();
        for mut r in ratio_sweep(&refs, &base)? {
            r.name = format!("ratio-{}", r.name);
            reports.push(r);
        }
    }

    for r in &reports {
        write(a.out.join(format!("ablation-{}.csv", r.name)), EvalReport::to_csv(std::slice::from_ref(r)))?;
        println!("{}", summary_line(r));
    }
    write(a.out.join("summary.csv"), EvalReport::to_csv(&reports))?;

    let resolved = AblateArgs {
        data: if variants.is_empty() { a.data.clone() } else { a.data.resolved()? },
        checkpoint: a.checkpoint.as_deref().map(absolute),
        weights: a.weights.clone(),
        variants: names,
        datasets: a.datasets.iter().map(|d| absolute(d)).collect(),
        checkpoints: a.checkpoints.iter().map(|d| absolute(d)).collect(),
        out: absolute(&a.out),
    };
    echo(&a.out, seed, ctx.threads, Command::Ablate(resolved))?;
    Ok(0)
}

fn validate(a: ValidateArgs) -> Result<u8> {
    let splits = read_splits(&a.data.paths()?, a.data.task.into())?;
    let report = splits.validate();
    println!(
        "{} train, {} aux, {} valid, {} test triplets; {} IKG and {} OOKG entities",
        splits.train.len(),
        splits.aux.len(),
        splits.valid.len(),
        splits.test.len(),
        splits.ikg_entities().len(),
        splits.ookg_entities().len()
    );
    if !report.dangling.is_empty() {
        println!("warning: {} OOKG test entities have no aux neighbor", report.dangling.len());
    }
    if report.is_ok() {
        println!("ok");
        Ok(0)
    } else {
        println!("{}", report.summary(&splits.vocab));
        Ok(1)
    }
}

fn synth(a: SynthArgs, ctx: &RunContext) -> Result<u8> {
    let seed = ctx.seed.unwrap_or(0);
    let config = SyntheticConfig::new(seed, a.entities, a.relations, a.triplets, a.ookg_fraction).with_task(a.task.into());
    let splits = generate_synthetic(&config)?;
    prepare_out(&a.out)?;
    splits.write(&a.out)?;
    let resolved = SynthArgs {
        out: absolute(&a.out),
        ..a.clone()
    };
    echo(&a.out, seed, ctx.threads, Command::Synth(resolved))?;
    println!(
        "wrote {} train, {} aux, {} valid, {} test triplets to {}",
        splits.train.len(),
        splits.aux.len(),
        splits.valid.len(),
        splits.test.len(),
        a.out.display()
    );
    Ok(0)
}
