use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use log::warn;
use serde_json::json;
use syge::compose::PhraseType;
use syge::eval::{
    bootstrap_compare, composition_table, contextualise_words, eval_composition, eval_mrr, eval_wordsim, holm_correct,
    pca_csv, pca_project, predictions_csv, read_composition, read_ml10, read_wordsim, reports_csv, spearman,
    summary_json, EvalReport, PhrasePairItem,
};
use syge::ingest::{ingest_conllu_files, read_kg_tsv, ExtractOptions};
use syge::rng::mix_seed;
use syge::trainer::train_with_progress;
use syge::{count_params, Checkpoint, ModelKind, RelationMapping, Strategy, TrainConfig, Triple, TripleDataset};

use crate::args::{
    BenchFormat, Cli, Command, Common, CompareArgs, ComposeArgs, EvalCommand, ExportPcaArgs, IngestArgs, InputFormat,
    KgArgs, ParamsArgs, TableArgs, TrainArgs, WordsimArgs,
};
use crate::config::read_config;
use crate::manifest::RunManifest;
use crate::{CliError, CliResult};

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(EvalCommand::Wordsim(a)) => cmd_wordsim(a),
        Command::Eval(EvalCommand::Compose(a)) => cmd_compose(a),
        Command::Eval(EvalCommand::Kg(a)) => cmd_kg(a),
        Command::Compare(a) => cmd_compare(a),
        Command::ExportPca(a) => cmd_export_pca(a),
        Command::Params(a) => cmd_params(a),
        Command::Table(a) => cmd_table(a),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Rejects contradictory thread settings and sizes the evaluation pool.
fn setup_threads(c: &Common) -> CliResult<()> {
    if c.deterministic && c.threads.is_some_and(|t| t > 1) {
        return Err(usage("--deterministic requires a single thread"));
    }
    if c.threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    let n = if c.deterministic { Some(1) } else { c.threads };
    if let Some(n) = n {
        // Fails only if a pool already exists (e.g. repeated calls in tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn out_dir(c: &Common) -> CliResult<PathBuf> {
    let dir = c.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

type ConfigPairs = Vec<(String, String)>;

/// Config-file pairs and the raw text for the manifest.
fn load_config(c: &Common) -> CliResult<(Option<String>, ConfigPairs)> {
    match &c.config {
        Some(p) => {
            let (text, pairs) = read_config(p)?;
            Ok((Some(text), pairs))
        }
        None => Ok((None, Vec::new())),
    }
}

fn config_value<'a>(pairs: &'a [(String, String)], keys: &[&str]) -> Option<&'a str> {
    pairs
        .iter()
        .rev()
        .find(|(k, _)| keys.contains(&k.as_str()))
        .map(|(_, v)| v.as_str())
}

fn parse_bool(key: &str, v: &str) -> CliResult<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(usage(format!("bad boolean {v:?} for {key}"))),
    }
}

fn cmd_ingest(a: IngestArgs) -> CliResult<()> {
    let c = &a.common;
    setup_threads(c)?;
    let (config_text, pairs) = load_config(c)?;
    let format = match (a.format, config_value(&pairs, &["format"])) {
        (Some(f), _) => f,
        (None, Some("kgtsv")) => InputFormat::Kgtsv,
        (None, Some("conllu")) | (None, None) => InputFormat::Conllu,
        (None, Some(other)) => return Err(usage(format!("unknown format {other:?}"))),
    };
    let min_count = match (a.min_count, config_value(&pairs, &["min_count"])) {
        (Some(m), _) => m,
        (None, Some(v)) => v.parse().map_err(|_| usage(format!("bad min_count {v:?}")))?,
        (None, None) => 0,
    };
    let drop_punct = match (a.drop_punct, config_value(&pairs, &["drop_punct"])) {
        (Some(d), _) => d,
        (None, Some(v)) => parse_bool("drop_punct", v)?,
        (None, None) => true,
    };
    let dir = out_dir(c)?;
    let mut manifest = RunManifest::start(c.seed, c.deterministic, c.threads);
    manifest.config_file = config_text;
    for p in &a.inputs {
        manifest.input(p)?;
    }
    let ds = match format {
        InputFormat::Conllu => ingest_conllu_files(&a.inputs, &ExtractOptions { min_count, drop_punct })?,
        InputFormat::Kgtsv => {
            if a.inputs.len() != 1 {
                return Err(usage("kgtsv ingestion takes exactly one file"));
            }
            read_kg_tsv(&a.inputs[0])?.restrict_min_count(min_count)
        }
    };
    let path = dir.join(&a.name);
    ds.save(&path)?;
    let stats = serde_json::to_string_pretty(&ds.stats()).expect("stats serialise");
    let stats_path = dir.join(format!("{}.stats.json", a.name));
    write_file(&stats_path, &(stats.clone() + "\n"))?;
    println!("{stats}");
    manifest.config = json!({
        "format": format!("{format:?}").to_lowercase(),
        "min_count": min_count,
        "drop_punct": drop_punct,
    });
    manifest.output(&path)?;
    manifest.output(&stats_path)?;
    manifest.finish(&dir.join(format!("{}.manifest.json", a.name)))
}

/// Per-model text8 defaults, then config-file keys, then flags.
fn resolve_train_config(a: &TrainArgs, pairs: &[(String, String)]) -> CliResult<TrainConfig> {
    let c = &a.common;
    let model = a
        .model
        .as_deref()
        .or_else(|| config_value(pairs, &["model", "model_kind"]))
        .ok_or_else(|| usage("--model is required (dm|mure|rote|refe|atte)"))?;
    let kind: ModelKind = model.parse()?;
    let mut cfg = TrainConfig::defaults(kind);
    for (k, v) in pairs {
        if k != "model" && k != "model_kind" {
            cfg.set(k, v)?;
        }
    }
    macro_rules! flag {
        ($field:ident, $target:expr) => {
            if let Some(v) = a.$field.clone() {
                $target = v;
            }
        };
    }
    flag!(dim, cfg.dim);
    flag!(neg, cfg.neg_per_pos);
    flag!(epochs, cfg.epochs);
    flag!(lr, cfg.learning_rate);
    flag!(batch_size, cfg.batch_size);
    flag!(min_count, cfg.min_count);
    flag!(neg_power, cfg.neg_power);
    if let Some(o) = &a.opt {
        cfg.optimizer = o.parse()?;
    }
    if let Some(l) = &a.loss {
        cfg.loss_mode = l.parse()?;
    }
    cfg.full_ce |= a.full_ce;
    cfg.identity_rel_maps |= a.identity_rel_maps;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(t) = c.threads {
        cfg.threads = t;
    }
    if c.deterministic {
        cfg.threads = 1;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_train(a: TrainArgs) -> CliResult<()> {
    let c = &a.common;
    setup_threads(c)?;
    let (config_text, pairs) = load_config(c)?;
    let cfg = resolve_train_config(&a, &pairs)?;
    eprintln!("seed={}", cfg.seed);
    let dir = out_dir(c)?;
    let mut manifest = RunManifest::start(Some(cfg.seed), cfg.deterministic(), Some(cfg.threads));
    manifest.config_file = config_text;
    manifest.config = serde_json::to_value(&cfg).expect("config serialises");
    manifest.input(&a.data)?;
    let ds = TripleDataset::load(&a.data)?;
    let (ck, metrics) = train_with_progress(&ds, cfg.clone(), |st| {
        eprintln!("epoch={} loss={:.6} tps={:.1}", st.epoch, st.loss, st.triples_per_sec);
    })?;
    let name = a
        .name
        .clone()
        .unwrap_or_else(|| format!("{}-seed{}.ckpt", cfg.model_kind.name().to_lowercase(), cfg.seed));
    let path = dir.join(&name);
    ck.save(&path)?;
    let metrics_path = dir.join(format!("{name}.metrics.json"));
    let losses = json!({
        "epoch_losses": metrics.epoch_losses,
        "rows_skipped": metrics.rows_skipped,
    });
    write_file(
        &metrics_path,
        &(serde_json::to_string_pretty(&losses).expect("json") + "\n"),
    )?;
    manifest.timing = json!({
        "wall_time_secs": metrics.wall_time_secs,
        "triples_per_sec": metrics.triples_per_sec,
    });
    manifest.checkpoint = Some(path.clone());
    manifest.output(&path)?;
    manifest.output(&metrics_path)?;
    manifest.finish(&dir.join(format!("{name}.manifest.json")))
}

fn load_checkpoints(paths: &[PathBuf], manifest: &mut RunManifest) -> CliResult<Vec<Checkpoint>> {
    paths
        .iter()
        .map(|p| {
            manifest.input(p)?;
            Ok(Checkpoint::load(p)?)
        })
        .collect()
}

/// Merges single-seed reports that share benchmark, model, strategy and
/// phrase type, keeping first-seen order.
fn merge_reports(reports: Vec<EvalReport>) -> CliResult<Vec<EvalReport>> {
    let mut groups: Vec<Vec<EvalReport>> = Vec::new();
    for r in reports {
        let key = |x: &EvalReport| (x.label(), x.model.clone(), x.strategy.clone());
        match groups.iter_mut().find(|g| key(&g[0]) == key(&r)) {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    groups.into_iter().map(|g| Ok(EvalReport::merge_seeds(g)?)).collect()
}

fn write_reports(dir: &Path, prefix: &str, reports: &[EvalReport], manifest: &mut RunManifest) -> CliResult<()> {
    let files = [
        (format!("{prefix}.reports.csv"), reports_csv(reports)),
        (format!("{prefix}.predictions.csv"), predictions_csv(reports)),
        (format!("{prefix}.summary.json"), summary_json(reports) + "\n"),
        (
            format!("{prefix}.reports.json"),
            serde_json::to_string_pretty(reports).expect("reports serialise") + "\n",
        ),
    ];
    for (name, text) in files {
        let path = dir.join(name);
        write_file(&path, &text)?;
        manifest.output(&path)?;
    }
    print!("{}", reports_csv(reports));
    Ok(())
}

/// Undefined correlations are reported in the files, then surface as a
/// computation error.
fn check_defined(reports: &[EvalReport]) -> CliResult<()> {
    let undefined: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.per_seed
                .iter()
                .filter(|s| s.rho.is_none())
                .map(move |s| format!("{} {} {} seed {}", r.label(), r.model, r.strategy, s.seed))
        })
        .collect();
    if undefined.is_empty() {
        Ok(())
    } else {
        Err(CliError::Compute(format!(
            "correlation undefined (zero rank variance) for: {}",
            undefined.join("; ")
        )))
    }
}

fn bench_name(name: &Option<String>, bench: &Path) -> String {
    name.clone().unwrap_or_else(|| {
        bench
            .file_stem()
            .map(|s| s.to_string_lossy().split('.').next().unwrap_or("bench").to_string())
            .unwrap_or_else(|| "bench".into())
    })
}

fn cmd_wordsim(a: WordsimArgs) -> CliResult<()> {
    let c = &a.common;
    setup_threads(c)?;
    let dir = out_dir(c)?;
    let mut manifest = RunManifest::start(c.seed, c.deterministic, c.threads);
    let cks = load_checkpoints(&a.ckpts, &mut manifest)?;
    manifest.input(&a.bench)?;
    let items = read_wordsim(&a.bench)?;
    let name = bench_name(&a.name, &a.bench);
    let reports = cks
        .iter()
        .map(|ck| Ok(eval_wordsim(ck, &items, &name)?))
        .collect::<CliResult<Vec<_>>>()?;
    let reports = merge_reports(reports)?;
    let prefix = format!("wordsim-{name}");
    manifest.config = json!({ "benchmark": name, "items": items.len() });
    write_reports(&dir, &prefix, &reports, &mut manifest)?;
    manifest.finish(&dir.join(format!("{prefix}.manifest.json")))?;
    check_defined(&reports)
}

fn parse_strategies(raw: &[String]) -> CliResult<Vec<Strategy>> {
    let mut out = Vec::new();
    for s in raw {
        if s.eq_ignore_ascii_case("all") {
            out.extend(Strategy::ALL);
        } else {
            out.push(s.parse()?);
        }
    }
    out.dedup();
    Ok(out)
}

fn parse_mapping(raw: &[String]) -> CliResult<RelationMapping> {
    let mut m = RelationMapping::default();
    for entry in raw {
        let (pt, label) = entry
            .split_once('=')
            .ok_or_else(|| usage(format!("--map expects TYPE=label, got {entry:?}")))?;
        m.set(pt.trim().parse::<PhraseType>()?, label.trim());
    }
    Ok(m)
}

fn read_phrase_bench(path: &Path, format: BenchFormat, per_participant: bool) -> CliResult<Vec<PhrasePairItem>> {
    Ok(match format {
        BenchFormat::Tsv => read_composition(path)?,
        BenchFormat::Ml10 => read_ml10(path, per_participant)?,
    })
}

fn cmd_compose(a: ComposeArgs) -> CliResult<()> {
    let c = &a.common;
    setup_threads(c)?;
    let strategies = parse_strategies(&a.strategies)?;
    let mapping = parse_mapping(&a.mappings)?;
    let dir = out_dir(c)?;
    let mut manifest = RunManifest::start(c.seed, c.deterministic, c.threads);
    let cks = load_checkpoints(&a.ckpts, &mut manifest)?;
    manifest.input(&a.bench)?;
    let items = read_phrase_bench(&a.bench, a.format, a.per_participant)?;
    let name = bench_name(&a.name, &a.bench);
    let mut reports = Vec::new();
    for ck in &cks {
        for &s in &strategies {
            reports.extend(eval_composition(ck, &items, s, &mapping, &name)?);
        }
    }
    let reports = merge_reports(reports)?;
    let prefix = format!("compose-{name}");
    manifest.config = json!({
        "benchmark": name,
        "items": items.len(),
        "strategies": strategies.iter().map(|s| s.name()).collect::<Vec<_>>(),
        "mapping": mapping,
        "per_participant": a.per_participant,
    });
    write_reports(&dir, &prefix, &reports, &mut manifest)?;
    manifest.finish(&dir.join(format!("{prefix}.manifest.json")))?;
    check_defined(&reports)
}

/// Maps a string-keyed triple file onto checkpoint ids; unknown words or
/// labels are counted and skipped.
fn map_triples(ds: &TripleDataset, ck: &Checkpoint, base_only: bool) -> (Vec<Triple>, usize) {
    let mut out = Vec::new();
    let mut missing = 0;
    for tr in &ds.triples {
        if base_only && ds.relations.is_inverse(tr.r) {
            continue;
        }
        let h = ck.vocab.id(ds.vocab.word(tr.h));
        let r = ck.relations.id(ds.relations.label(tr.r));
        let t = ck.vocab.id(ds.vocab.word(tr.t));
        match (h, r, t) {
            (Some(h), Some(r), Some(t)) => out.push(Triple::new(h, r, t)),
            _ => missing += 1,
        }
    }
    (out, missing)
}

fn cmd_kg(a: KgArgs) -> CliResult<()> {
    let c = &a.common;
    setup_threads(c)?;
    let dir = out_dir(c)?;
    let mut manifest = RunManifest::start(c.seed, c.deterministic, c.threads);
    manifest.input(&a.ckpt)?;
    let ck = Checkpoint::load(&a.ckpt)?;
    manifest.input(&a.triples)?;
    let test_ds = read_kg_tsv(&a.triples)?;
    let (test, missing) = map_triples(&test_ds, &ck, true);
    let mut filter: HashSet<Triple> = map_triples(&test_ds, &ck, false).0.into_iter().collect();
    for f in &a.filters {
        manifest.input(f)?;
        filter.extend(map_triples(&read_kg_tsv(f)?, &ck, false).0);
    }
    let report = eval_mrr(&ck.params, &test, &filter)?;
    let summary = json!({
        "split": a.split,
        "model": ck.model_kind.name(),
        "mrr": report.mrr,
        "hits1": report.hits1,
        "hits3": report.hits3,
        "hits10": report.hits10,
        "ranked": test.len(),
        "dropped_oov": missing,
    });
    let text = serde_json::to_string_pretty(&summary).expect("json");
    let path = dir.join(format!("kg-{}.json", a.split));
    write_file(&path, &(text.clone() + "\n"))?;
    let mut ranks = String::from("head,relation,tail,rank\n");
    for (tr, rank) in test.iter().zip(&report.ranks) {
        ranks.push_str(&format!(
            "{},{},{},{rank}\n",
            ck.vocab.word(tr.h),
            ck.relations.label(tr.r),
            ck.vocab.word(tr.t)
        ));
    }
    let ranks_path = dir.join(format!("kg-{}.ranks.csv", a.split));
    write_file(&ranks_path, &ranks)?;
    println!("{text}");
    manifest.output(&path)?;
    manifest.output(&ranks_path)?;
    manifest.finish(&dir.join(format!("kg-{}.manifest.json", a.split)))
}

/// Predictions of one model and strategy on one benchmark label, by seed.
struct PredGroup {
    benchmark: String,
    model: String,
    strategy: String,
    seeds: BTreeMap<u64, Vec<(usize, f64, f64)>>,
}

fn read_predictions(path: &Path, strategy: Option<&str>) -> CliResult<Vec<PredGroup>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let mut out: Vec<PredGroup> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let bad = || usage(format!("{}: malformed row {}", path.display(), i + 2));
        if rec.len() != 7 {
            return Err(bad());
        }
        if strategy.is_some_and(|s| s != &rec[2]) {
            continue;
        }
        let seed: u64 = rec[3].parse().map_err(|_| bad())?;
        let item: usize = rec[4].parse().map_err(|_| bad())?;
        let gold: f64 = rec[5].parse().map_err(|_| bad())?;
        let pred: f64 = rec[6].parse().map_err(|_| bad())?;
        let idx = match out.iter().position(|g| g.benchmark == rec[0] && g.strategy == rec[2]) {
            Some(k) if out[k].model != rec[1] => {
                return Err(usage(format!(
                    "{}: {} {} holds several models; compare one model per file",
                    path.display(),
                    &rec[0],
                    &rec[2]
                )))
            }
            Some(k) => k,
            None => {
                out.push(PredGroup {
                    benchmark: rec[0].to_string(),
                    model: rec[1].to_string(),
                    strategy: rec[2].to_string(),
                    seeds: BTreeMap::new(),
                });
                out.len() - 1
            }
        };
        out[idx].seeds.entry(seed).or_default().push((item, gold, pred));
    }
    if out.is_empty() {
        return Err(usage(format!("{}: no predictions selected", path.display())));
    }
    Ok(out)
}

struct Comparison<'a> {
    a: &'a PredGroup,
    b: &'a PredGroup,
    seed_a: u64,
    seed_b: u64,
    items: usize,
    rho_a: f64,
    rho_b: f64,
    delta: f64,
    p: f64,
    skipped: usize,
}

/// Paired bootstrap of two seeds' predictions on the items both cover.
fn compare_seeds<'a>(
    a: &'a PredGroup,
    b: &'a PredGroup,
    (sa, sb): (u64, u64),
    replicates: usize,
    seed: u64,
) -> CliResult<Comparison<'a>> {
    let b_items: BTreeMap<usize, (f64, f64)> = b.seeds[&sb].iter().map(|&(i, g, p)| (i, (g, p))).collect();
    let (mut xa, mut xb, mut gold) = (Vec::new(), Vec::new(), Vec::new());
    for &(i, g, p) in &a.seeds[&sa] {
        if let Some(&(gb, q)) = b_items.get(&i) {
            if (g - gb).abs() > 1e-9 * g.abs().max(1.0) {
                return Err(usage(format!(
                    "{} item {i}: gold ratings differ ({g} vs {gb})",
                    a.benchmark
                )));
            }
            xa.push(p);
            xb.push(q);
            gold.push(g);
        }
    }
    let r = bootstrap_compare(&xa, &xb, &gold, replicates, seed)?;
    Ok(Comparison {
        a,
        b,
        seed_a: sa,
        seed_b: sb,
        items: gold.len(),
        rho_a: spearman(&xa, &gold)?,
        rho_b: spearman(&xb, &gold)?,
        delta: r.observed_delta,
        p: r.p_value,
        skipped: r.skipped,
    })
}

fn cmd_compare(a: CompareArgs) -> CliResult<()> {
    let c = &a.common;
    setup_threads(c)?;
    if a.strategy_a.is_some() != a.strategy_b.is_some() {
        return Err(usage("--strategy-a and --strategy-b go together"));
    }
    let by_strategy = a.strategy_a.is_none();
    let seed = c.seed.unwrap_or(0);
    eprintln!("seed={seed}");
    let dir = out_dir(c)?;
    let mut manifest = RunManifest::start(Some(seed), c.deterministic, c.threads);
    manifest.input(&a.a)?;
    manifest.input(&a.b)?;
    let pa = read_predictions(&a.a, a.strategy_a.as_deref())?;
    let pb = read_predictions(&a.b, a.strategy_b.as_deref())?;
    let mut results = Vec::new();
    for ga in &pa {
        let Some(gb) = pb
            .iter()
            .find(|g| g.benchmark == ga.benchmark && (!by_strategy || g.strategy == ga.strategy))
        else {
            warn!("{} {} only in {}", ga.benchmark, ga.strategy, a.a.display());
            continue;
        };
        let pairs: Vec<(u64, u64)> = if ga.seeds.keys().eq(gb.seeds.keys()) {
            ga.seeds.keys().map(|&s| (s, s)).collect()
        } else {
            warn!("{}: seed sets differ, pairing seeds by position", ga.benchmark);
            ga.seeds.keys().copied().zip(gb.seeds.keys().copied()).collect()
        };
        for pair in pairs {
            let k = results.len() as u64;
            results.push(compare_seeds(ga, gb, pair, a.bootstrap, mix_seed(seed, k))?);
        }
    }
    if results.is_empty() {
        return Err(usage("the prediction files share no benchmark"));
    }
    // Holm within each benchmark label (one phrase type) across all pairings.
    let mut adjusted = vec![0.0; results.len()];
    let mut labels: Vec<&str> = results.iter().map(|r| r.a.benchmark.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    for label in labels {
        let idx: Vec<usize> = (0..results.len())
            .filter(|&i| results[i].a.benchmark == label)
            .collect();
        let ps: Vec<f64> = idx.iter().map(|&i| results[i].p).collect();
        for (&i, q) in idx.iter().zip(holm_correct(&ps)) {
            adjusted[i] = q;
        }
    }
    let mut text = String::from(
        "# paired bootstrap per seed pairing; Holm correction within each benchmark/phrase type across pairings\n\
         benchmark,model_a,strategy_a,model_b,strategy_b,seed_a,seed_b,items,rho_a,rho_b,delta,p,p_holm,skipped\n",
    );
    for (r, q) in results.iter().zip(&adjusted) {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.a.benchmark,
            r.a.model,
            r.a.strategy,
            r.b.model,
            r.b.strategy,
            r.seed_a,
            r.seed_b,
            r.items,
            r.rho_a,
            r.rho_b,
            r.delta,
            r.p,
            q,
            r.skipped
        ));
    }
    let path = dir.join(format!("{}.csv", a.name));
    write_file(&path, &text)?;
    print!("{text}");
    manifest.config = json!({
        "bootstrap": a.bootstrap,
        "strategy_a": a.strategy_a,
        "strategy_b": a.strategy_b,
    });
    manifest.output(&path)?;
    manifest.finish(&dir.join(format!("{}.manifest.json", a.name)))
}

fn cmd_export_pca(a: ExportPcaArgs) -> CliResult<()> {
    let c = &a.common;
    setup_threads(c)?;
    let dir = out_dir(c)?;
    let mut manifest = RunManifest::start(c.seed, c.deterministic, c.threads);
    manifest.input(&a.ckpt)?;
    let ck = Checkpoint::load(&a.ckpt)?;
    let pt: PhraseType = a.phrase_type.parse()?;
    let label = match &a.relation {
        Some(l) => l.clone(),
        None => RelationMapping::default()
            .label(pt)
            .expect("default mapping covers every type")
            .to_string(),
    };
    let relation = ck
        .relations
        .id(&label)
        .ok_or_else(|| syge::Error::UnknownRelation(label.clone()))?;
    let words: Vec<String> = match (&a.words, &a.bench) {
        (Some(w), _) => {
            manifest.input(w)?;
            std::fs::read_to_string(w)
                .map_err(|e| usage(format!("cannot read {}: {e}", w.display())))?
                .lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty())
                .collect()
        }
        (None, Some(b)) => {
            manifest.input(b)?;
            read_phrase_bench(b, a.format, false)?
                .iter()
                .filter(|it| it.phrase_type == pt)
                .flat_map(|it| [it.left.root.clone(), it.right.root.clone()])
                .collect()
        }
        (None, None) => return Err(usage("export-pca needs --bench or --words")),
    };
    let mut seen = HashSet::new();
    let mut ids = Vec::new();
    let mut names = Vec::new();
    let mut missing = 0;
    for w in words {
        if !seen.insert(w.clone()) {
            continue;
        }
        match ck.vocab.id(&w) {
            Some(id) => {
                ids.push(id);
                names.push(w);
            }
            None => missing += 1,
        }
    }
    if missing > 0 {
        warn!("{missing} words not in the vocabulary");
    }
    let raw: Vec<Vec<f64>> = ids
        .iter()
        .map(|&w| ck.params.entity(w).iter().map(|&x| x as f64).collect())
        .collect();
    let ctx = contextualise_words(&ck, &ids, relation)?;
    let mut rows = Vec::new();
    for (group, vectors) in [("embedding", &raw), (label.as_str(), &ctx)] {
        let pca = pca_project(vectors, 2)?;
        for (w, xy) in names.iter().zip(&pca.coords) {
            rows.push((w.clone(), group.to_string(), xy[0], xy[1]));
        }
    }
    let path = dir.join(format!("pca-{pt}.csv"));
    write_file(&path, &pca_csv(&rows))?;
    manifest.config = json!({ "phrase_type": pt, "relation": label, "words": names.len(), "dropped_oov": missing });
    manifest.output(&path)?;
    manifest.finish(&dir.join(format!("pca-{pt}.manifest.json")))
}

fn cmd_params(a: ParamsArgs) -> CliResult<()> {
    let kind: ModelKind = a.model.parse()?;
    if kind.needs_even_dim() && !a.dim.is_multiple_of(2) {
        return Err(syge::Error::OddDim {
            kind: kind.name(),
            dim: a.dim,
        }
        .into());
    }
    println!("{}", count_params(kind, a.vocab, a.rels, a.dim));
    Ok(())
}

fn cmd_table(a: TableArgs) -> CliResult<()> {
    let mut reports: Vec<EvalReport> = Vec::new();
    for p in &a.reports {
        let text = std::fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
        let mut r: Vec<EvalReport> = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?;
        reports.append(&mut r);
    }
    let table = composition_table(&reports);
    print!("{table}");
    if let Some(dir) = &a.common.out {
        std::fs::create_dir_all(dir)?;
        write_file(&dir.join("table.md"), &table)?;
    }
    Ok(())
}
