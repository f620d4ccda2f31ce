//! The epoch loop: deterministic single-writer mode and lock-free parallel mode.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use super::config::{Optimizer, TrainConfig};
use super::loss::loss_and_grad;
use super::optim::{adam_row, apply_step, sgd_row, GradAccum, OptimizerState};
use super::sampler::sample_tails_into;
use crate::checkpoint::Checkpoint;
use crate::error::{Error, Result};
use crate::ingest::{NegTable, TripleDataset};
use crate::models::{kernel, GradSink, ModelParams, Routing, TripleGrad, TripleView, MAX_REL_SLOTS};
use crate::rng::Rng;
use crate::triple::{ModelKind, Triple};

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    /// Mean loss per positive triple.
    pub loss: f64,
    pub triples_per_sec: f64,
    pub seconds: f64,
    pub rows_skipped: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainMetrics {
    pub epoch_losses: Vec<f64>,
    pub triples_per_sec: Vec<f64>,
    pub wall_time_secs: f64,
    pub rows_skipped: u64,
}

/// Anything that can lend a [`TripleView`] for a triple.
trait RowSource {
    fn with_view<R>(&mut self, tr: Triple, f: impl FnOnce(&TripleView<'_, f32>) -> R) -> R;
}

struct Direct<'a>(&'a ModelParams<f32>);

impl RowSource for Direct<'_> {
    fn with_view<R>(&mut self, tr: Triple, f: impl FnOnce(&TripleView<'_, f32>) -> R) -> R {
        f(&self.0.view(tr))
    }
}

struct Scratch {
    g: TripleGrad<f32>,
    tails: Vec<u32>,
    scores: Vec<f64>,
    dscores: Vec<f64>,
}

impl Scratch {
    fn new(kind: ModelKind, dim: usize) -> Self {
        Self {
            g: TripleGrad::new(kind, dim),
            tails: Vec::new(),
            scores: Vec::new(),
            dscores: Vec::new(),
        }
    }
}

/// Per-run constants shared by the workers.
struct StepCtx<'a> {
    kind: ModelKind,
    cfg: &'a TrainConfig,
    neg: &'a NegTable,
    n_entities: u32,
    routing: &'a Routing,
}

/// Loss of one positive and its negatives; adds `scale * dLoss/dparam` to `sink`.
fn positive_step(
    ctx: &StepCtx<'_>,
    tr: Triple,
    scale: f64,
    rng: &mut Rng,
    src: &mut impl RowSource,
    sc: &mut Scratch,
    sink: &mut impl GradSink<f32>,
) -> f64 {
    if ctx.cfg.full_ce {
        sc.tails.clear();
        sc.tails.extend((0..ctx.n_entities).filter(|&t| t != tr.t));
    } else {
        sample_tails_into(tr.t, ctx.cfg.neg_per_pos, ctx.neg, rng, &mut sc.tails);
    }
    let kind = ctx.kind;
    let g = &mut sc.g;
    let pos = src.with_view(tr, |v| kernel::score(kind, v, g)) as f64;
    sc.scores.clear();
    for &t in &sc.tails {
        let s = src.with_view(Triple::new(tr.h, tr.r, t), |v| kernel::score(kind, v, g));
        sc.scores.push(s as f64);
    }
    sc.dscores.resize(sc.scores.len(), 0.0);
    let (loss, dpos) = loss_and_grad(ctx.cfg.loss_mode, pos, &sc.scores, &mut sc.dscores);
    src.with_view(tr, |v| kernel::score_and_grad(kind, v, (dpos * scale) as f32, g));
    ctx.routing.scatter(tr, g, sink);
    for (&t, &d) in sc.tails.iter().zip(&sc.dscores) {
        if d == 0.0 {
            continue;
        }
        let neg = Triple::new(tr.h, tr.r, t);
        src.with_view(neg, |v| kernel::score_and_grad(kind, v, (d * scale) as f32, g));
        ctx.routing.scatter(neg, g, sink);
    }
    loss
}

/// Stateful training run; [`train`] drives it to completion.
pub struct Trainer {
    cfg: TrainConfig,
    ds: TripleDataset,
    params: ModelParams<f32>,
    opt: OptimizerState,
    neg: NegTable,
    occurrences: Vec<Triple>,
    root: Rng,
    accum: GradAccum,
    epoch: usize,
    metrics: TrainMetrics,
}

impl Trainer {
    /// Validates `cfg`, applies its `min_count` to `ds`, and initialises
    /// parameters from `cfg.seed`.
    pub fn new(ds: &TripleDataset, cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        ds.validate()?;
        let ds = ds.restrict_min_count(cfg.min_count);
        if ds.triples.is_empty() {
            return Err(Error::Config(format!(
                "no training triples left after min_count={}",
                cfg.min_count
            )));
        }
        let root = Rng::new(cfg.seed);
        let params = ModelParams::init(
            cfg.model_kind,
            ds.vocab.len(),
            ds.relations.len(),
            cfg.dim,
            cfg.identity_rel_maps,
            &mut root.derive(0),
        )?;
        Self::with_params(ds, cfg, params)
    }

    /// Starts from given parameters (e.g. a hand-built instance). The dataset
    /// is used as-is.
    pub fn with_params(ds: TripleDataset, cfg: TrainConfig, params: ModelParams<f32>) -> Result<Self> {
        cfg.validate()?;
        if params.kind() != cfg.model_kind || params.dim() != cfg.dim {
            return Err(Error::Config("parameters do not match the configuration".into()));
        }
        if params.n_entities() != ds.vocab.len() || params.n_relations() != ds.relations.len() {
            return Err(Error::ShapeMismatch("parameters do not match the dataset".into()));
        }
        let neg = NegTable::new(&ds.entity_counts, cfg.neg_power)?;
        Ok(Self {
            opt: OptimizerState::new(cfg.optimizer, &params),
            accum: GradAccum::for_params(&params),
            occurrences: ds.occurrences(),
            root: Rng::new(cfg.seed),
            neg,
            params,
            ds,
            cfg,
            epoch: 0,
            metrics: TrainMetrics::default(),
        })
    }

    pub fn params(&self) -> &ModelParams<f32> {
        &self.params
    }

    pub fn dataset(&self) -> &TripleDataset {
        &self.ds
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn metrics(&self) -> &TrainMetrics {
        &self.metrics
    }

    pub fn run_epoch(&mut self) -> Result<EpochStats> {
        let start = Instant::now();
        let mut rng = self.root.derive(self.epoch as u64 + 1);
        let mut order = self.occurrences.clone();
        rng.shuffle(&mut order);
        let (total_loss, skipped) = if self.cfg.deterministic() {
            self.epoch_serial(&order, &mut rng)
        } else {
            self.epoch_parallel(&order, &rng)?
        };
        self.epoch += 1;
        let seconds = start.elapsed().as_secs_f64();
        let loss = total_loss / order.len() as f64;
        if !loss.is_finite() {
            return Err(Error::Diverged {
                epoch: self.epoch,
                msg: format!("mean loss is {loss}; try a smaller learning rate"),
            });
        }
        let stats = EpochStats {
            epoch: self.epoch,
            loss,
            triples_per_sec: order.len() as f64 / seconds.max(1e-12),
            seconds,
            rows_skipped: skipped,
        };
        self.metrics.epoch_losses.push(loss);
        self.metrics.triples_per_sec.push(stats.triples_per_sec);
        self.metrics.wall_time_secs += seconds;
        self.metrics.rows_skipped += skipped;
        Ok(stats)
    }

    fn epoch_serial(&mut self, order: &[Triple], rng: &mut Rng) -> (f64, u64) {
        let routing = self.params.routing();
        let ctx = StepCtx {
            kind: self.cfg.model_kind,
            cfg: &self.cfg,
            neg: &self.neg,
            n_entities: self.ds.vocab.len() as u32,
            routing: &routing,
        };
        let mut sc = Scratch::new(self.cfg.model_kind, self.cfg.dim);
        let mut total = 0.0;
        let mut skipped = 0;
        for batch in order.chunks(self.cfg.batch_size) {
            let scale = 1.0 / batch.len() as f64;
            let mut src = Direct(&self.params);
            for &tr in batch {
                total += positive_step(&ctx, tr, scale, rng, &mut src, &mut sc, &mut self.accum);
            }
            let st = apply_step(&mut self.params, &self.accum, &mut self.opt, self.cfg.learning_rate);
            skipped += st.rows_skipped;
            self.accum.clear();
        }
        (total, skipped)
    }

    fn epoch_parallel(&mut self, order: &[Triple], rng: &Rng) -> Result<(f64, u64)> {
        let routing = self.params.routing();
        let kind = self.cfg.model_kind;
        let dim = self.cfg.dim;
        let n_entities = self.ds.vocab.len() as u32;
        let cfg = &self.cfg;
        let neg = &self.neg;
        let threads = cfg.threads;
        let shared = SharedState::new(&mut self.params, &mut self.opt);
        let chunk = order.len().div_ceil(threads);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        let results: Vec<(f64, u64)> = pool.install(|| {
            order
                .par_chunks(chunk.max(1))
                .enumerate()
                .map(|(w, part)| {
                    let ctx = StepCtx {
                        kind,
                        cfg,
                        neg,
                        n_entities,
                        routing: &routing,
                    };
                    let mut wrng = rng.derive(w as u64 + 1);
                    let mut sc = Scratch::new(kind, dim);
                    let mut src = SharedRows::new(&shared, &routing, dim);
                    let mut acc = RowAccum::default();
                    let mut total = 0.0;
                    let mut skipped = 0;
                    for batch in part.chunks(cfg.batch_size) {
                        let scale = 1.0 / batch.len() as f64;
                        for &tr in batch {
                            total += positive_step(&ctx, tr, scale, &mut wrng, &mut src, &mut sc, &mut acc);
                        }
                        skipped += shared.apply(&acc, cfg.optimizer, cfg.learning_rate);
                        acc.rows.clear();
                    }
                    (total, skipped)
                })
                .collect()
        });
        Ok(results.into_iter().fold((0.0, 0), |(l, s), (a, b)| (l + a, s + b)))
    }

    pub fn into_checkpoint(self) -> Result<(Checkpoint, TrainMetrics)> {
        let ck = Checkpoint::new(self.ds.vocab, self.ds.relations, self.params, self.cfg)?;
        Ok((ck, self.metrics))
    }
}

/// Trains for `cfg.epochs` epochs.
pub fn train(ds: &TripleDataset, cfg: TrainConfig) -> Result<(Checkpoint, TrainMetrics)> {
    train_with_progress(ds, cfg, |_| {})
}

/// Like [`train`], calling `progress` after every epoch.
pub fn train_with_progress(
    ds: &TripleDataset,
    cfg: TrainConfig,
    mut progress: impl FnMut(&EpochStats),
) -> Result<(Checkpoint, TrainMetrics)> {
    let epochs = cfg.epochs;
    let mut trainer = Trainer::new(ds, cfg)?;
    for _ in 0..epochs {
        let st = trainer.run_epoch()?;
        progress(&st);
    }
    trainer.into_checkpoint()
}

/// Views `f32` storage as atomics so concurrent readers and writers never
/// observe a partially written float.
fn as_atomic(xs: &mut [f32]) -> &[AtomicU32] {
    // SAFETY: AtomicU32 has the size and alignment of u32, which match f32,
    // and the exclusive borrow guarantees no non-atomic access meanwhile.
    unsafe { &*(xs as *mut [f32] as *const [AtomicU32]) }
}

fn as_atomic_u32(xs: &mut [u32]) -> &[AtomicU32] {
    // SAFETY: as above.
    unsafe { &*(xs as *mut [u32] as *const [AtomicU32]) }
}

fn load_row(src: &[AtomicU32], row: usize, cols: usize, out: &mut Vec<f32>) {
    out.clear();
    out.extend(
        src[row * cols..(row + 1) * cols]
            .iter()
            .map(|a| f32::from_bits(a.load(Ordering::Relaxed))),
    );
}

fn store_row(dst: &[AtomicU32], row: usize, cols: usize, vals: &[f32]) {
    for (a, v) in dst[row * cols..(row + 1) * cols].iter().zip(vals) {
        a.store(v.to_bits(), Ordering::Relaxed);
    }
}

/// Parameters and optimizer state shared by parallel workers.
struct SharedState<'a> {
    tables: Vec<&'a [AtomicU32]>,
    cols: Vec<usize>,
    m: Vec<&'a [AtomicU32]>,
    v: Vec<&'a [AtomicU32]>,
    steps: Vec<&'a [AtomicU32]>,
}

impl<'a> SharedState<'a> {
    fn new(params: &'a mut ModelParams<f32>, opt: &'a mut OptimizerState) -> Self {
        let cols = params.tables().iter().map(|t| t.cols).collect();
        Self {
            tables: params.tables_mut().iter_mut().map(|t| as_atomic(&mut t.data)).collect(),
            cols,
            m: opt.m.iter_mut().map(|x| as_atomic(x)).collect(),
            v: opt.v.iter_mut().map(|x| as_atomic(x)).collect(),
            steps: opt.steps.iter_mut().map(|x| as_atomic_u32(x)).collect(),
        }
    }

    /// Applies a worker's accumulated rows; returns the number skipped.
    fn apply(&self, acc: &RowAccum, opt: Optimizer, lr: f64) -> u64 {
        let mut skipped = 0;
        let (mut p, mut m, mut v) = (Vec::new(), Vec::new(), Vec::new());
        for (&(t, r), g) in &acc.rows {
            if g.iter().any(|x| !x.is_finite()) {
                skipped += 1;
                continue;
            }
            let c = self.cols[t];
            load_row(self.tables[t], r, c, &mut p);
            match opt {
                Optimizer::Sgd => sgd_row(&mut p, g, lr),
                Optimizer::Adam => {
                    let step = self.steps[t][r].fetch_add(1, Ordering::Relaxed) + 1;
                    load_row(self.m[t], r, c, &mut m);
                    load_row(self.v[t], r, c, &mut v);
                    adam_row(&mut p, g, &mut m, &mut v, step, lr);
                    store_row(self.m[t], r, c, &m);
                    store_row(self.v[t], r, c, &v);
                }
            }
            store_row(self.tables[t], r, c, &p);
        }
        if skipped > 0 {
            log::warn!("skipped {skipped} rows with non-finite gradients");
        }
        skipped
    }
}

#[derive(Default)]
struct RowAccum {
    rows: HashMap<(usize, usize), Vec<f32>>,
}

impl GradSink<f32> for RowAccum {
    fn add(&mut self, table: usize, row: usize, values: &[f32]) {
        let e = self.rows.entry((table, row)).or_insert_with(|| vec![0.0; values.len()]);
        for (x, &v) in e.iter_mut().zip(values) {
            *x += v;
        }
    }
}

/// Worker-local copies of the rows one triple reads.
struct SharedRows<'s, 'a> {
    shared: &'s SharedState<'a>,
    routing: &'s Routing,
    head: Vec<f32>,
    tail: Vec<f32>,
    rel: [Vec<f32>; MAX_REL_SLOTS],
}

impl<'s, 'a> SharedRows<'s, 'a> {
    fn new(shared: &'s SharedState<'a>, routing: &'s Routing, dim: usize) -> Self {
        Self {
            shared,
            routing,
            head: Vec::with_capacity(dim),
            tail: Vec::with_capacity(dim),
            rel: Default::default(),
        }
    }
}

impl RowSource for SharedRows<'_, '_> {
    fn with_view<R>(&mut self, tr: Triple, f: impl FnOnce(&TripleView<'_, f32>) -> R) -> R {
        let s = self.shared;
        load_row(s.tables[0], tr.h as usize, s.cols[0], &mut self.head);
        let tt = self.routing.tail;
        load_row(s.tables[tt], tr.t as usize, s.cols[tt], &mut self.tail);
        for (slot, &table) in self.routing.rel.iter().enumerate() {
            load_row(s.tables[table], tr.r as usize, s.cols[table], &mut self.rel[slot]);
        }
        let (bias_h, bias_t) = match self.routing.bias {
            Some((bh, bt)) => (
                f32::from_bits(s.tables[bh][tr.h as usize].load(Ordering::Relaxed)),
                f32::from_bits(s.tables[bt][tr.t as usize].load(Ordering::Relaxed)),
            ),
            None => (0.0, 0.0),
        };
        let mut rel: [&[f32]; MAX_REL_SLOTS] = [&[]; MAX_REL_SLOTS];
        for (slot, r) in rel.iter_mut().zip(&self.rel).take(self.routing.rel.len()) {
            *slot = r;
        }
        f(&TripleView {
            head: &self.head,
            tail: &self.tail,
            rel,
            bias_h,
            bias_t,
        })
    }
}
