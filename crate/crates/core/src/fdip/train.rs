//! Offline training of the ten frequency-domain 4x4 intra predictors:
//! SATD classification against the current predictor set, per-mode ridge
//! least squares, iterative reclassification, and sparsification of each
//! output row down to a multiply budget.

use nalgebra::{DMatrix, DVector};

use crate::fdip::derive::derive_f_dct;
use crate::fdip::gains::{coding_gain_db, prediction_gain_db, GainReport};
use crate::fdip::modes::{vp8_modes, BLK_DIM, CTX_DIM, NUM_MODES};
use crate::transform::dct::dct2d_forward;
use crate::{Error, Result};

/// One training sample: the DCT'd causal context (up, left, up-left 4x4
/// blocks, each transformed independently) and the DCT'd target block.
#[derive(Debug, Clone)]
pub struct Sample {
    pub ctx: DVector<f64>,
    pub blk: DVector<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct TrainingCorpus {
    pub samples: Vec<Sample>,
}

impl TrainingCorpus {
    /// Extracts all 4x4 blocks with a complete causal neighborhood from a
    /// set of grayscale images `(pixels, width, height)`; border blocks
    /// (top row, left column) are skipped. Partial blocks at the right and
    /// bottom edges are ignored.
    pub fn from_images(images: &[(Vec<f64>, usize, usize)]) -> Result<Self> {
        let mut samples = Vec::new();
        for (img, w, h) in images {
            if img.len() != w * h {
                return Err(Error::DimensionMismatch(format!(
                    "image buffer has {} samples for {w}x{h}",
                    img.len()
                )));
            }
            let (bw, bh) = (w / 4, h / 4);
            for by in 1..bh {
                for bx in 1..bw {
                    let blk = block_freq(img, *w, by, bx);
                    let mut ctx = Vec::with_capacity(CTX_DIM);
                    ctx.extend_from_slice(&block_freq(img, *w, by - 1, bx));
                    ctx.extend_from_slice(&block_freq(img, *w, by, bx - 1));
                    ctx.extend_from_slice(&block_freq(img, *w, by - 1, bx - 1));
                    samples.push(Sample {
                        ctx: DVector::from_vec(ctx),
                        blk: DVector::from_vec(blk),
                    });
                }
            }
        }
        Ok(Self { samples })
    }
}

fn block_freq(img: &[f64], w: usize, by: usize, bx: usize) -> Vec<f64> {
    let mut b = [0.0; BLK_DIM];
    for r in 0..4 {
        for c in 0..4 {
            b[r * 4 + c] = img[(by * 4 + r) * w + bx * 4 + c];
        }
    }
    dct2d_forward(&b, 4).expect("4x4 DCT is always supported")
}

/// Assigns every sample to the predictor with the smallest frequency-domain
/// sum of absolute prediction errors; ties go to the lowest mode index.
pub fn classify(corpus: &TrainingCorpus, fs: &[DMatrix<f64>]) -> Vec<usize> {
    corpus
        .samples
        .iter()
        .map(|s| {
            // Near-ties (numerical noise in the derived matrices) go to the
            // lowest mode index.
            let tol = 1e-9 * (1.0 + s.blk.iter().map(|v| v.abs()).sum::<f64>());
            let mut best = 0usize;
            let mut best_satd = f64::INFINITY;
            for (m, f) in fs.iter().enumerate() {
                let satd: f64 = (&s.blk - f * &s.ctx).iter().map(|v| v.abs()).sum();
                if satd + tol < best_satd {
                    best = m;
                    best_satd = satd;
                }
            }
            best
        })
        .collect()
}

/// Sufficient statistics of one mode's sample set.
#[derive(Debug, Clone)]
pub struct ModeStats {
    pub n: usize,
    /// Sum of ctx . ctx^T (48x48).
    pub m: DMatrix<f64>,
    /// Sum of blk . ctx^T (16x48).
    pub c: DMatrix<f64>,
    /// Sum of blk_i^2 per output coefficient.
    pub yy: DVector<f64>,
}

impl Default for ModeStats {
    fn default() -> Self {
        Self::new()
    }
}

impl ModeStats {
    pub fn new() -> Self {
        Self {
            n: 0,
            m: DMatrix::zeros(CTX_DIM, CTX_DIM),
            c: DMatrix::zeros(BLK_DIM, CTX_DIM),
            yy: DVector::zeros(BLK_DIM),
        }
    }

    pub fn add(&mut self, s: &Sample) {
        self.n += 1;
        self.m += &s.ctx * s.ctx.transpose();
        self.c += &s.blk * s.ctx.transpose();
        for i in 0..BLK_DIM {
            self.yy[i] += s.blk[i] * s.blk[i];
        }
    }

    fn ridge(&self) -> f64 {
        1e-6 * self.m.trace() / CTX_DIM as f64 + 1e-12
    }
}

/// Gathers per-mode statistics under a fixed assignment.
pub fn mode_stats(corpus: &TrainingCorpus, assignment: &[usize]) -> Vec<ModeStats> {
    let mut stats = vec![ModeStats::new(); NUM_MODES];
    for (s, &m) in corpus.samples.iter().zip(assignment) {
        stats[m].add(s);
    }
    stats
}

/// Ridge least-squares fit of a dense 16x48 predictor from one mode's
/// statistics. Errors if the mode has no samples.
pub fn train_mode(stats: &ModeStats) -> Result<DMatrix<f64>> {
    if stats.n == 0 {
        return Err(Error::InvalidArgument("mode has no samples".into()));
    }
    let reg = &stats.m + DMatrix::identity(CTX_DIM, CTX_DIM) * stats.ridge();
    let ft = reg
        .lu()
        .solve(&stats.c.transpose())
        .ok_or_else(|| Error::InvalidArgument("degenerate mode statistics".into()))?;
    Ok(ft.transpose())
}

/// Re-solves one output row of a predictor restricted to its sparsity
/// support; masked-off entries stay exactly zero.
fn solve_row_masked(stats: &ModeStats, row: usize, mask: &[bool]) -> DVector<f64> {
    let support: Vec<usize> = (0..CTX_DIM).filter(|&j| mask[j]).collect();
    let mut out = DVector::zeros(CTX_DIM);
    if support.is_empty() {
        return out;
    }
    let s = support.len();
    let mut sub = DMatrix::zeros(s, s);
    let mut rhs = DVector::zeros(s);
    for (a, &ja) in support.iter().enumerate() {
        rhs[a] = stats.c[(row, ja)];
        for (b, &jb) in support.iter().enumerate() {
            sub[(a, b)] = stats.m[(ja, jb)];
        }
        sub[(a, a)] += stats.ridge();
    }
    if let Some(sol) = sub.lu().solve(&rhs) {
        for (a, &ja) in support.iter().enumerate() {
            out[ja] = sol[a];
        }
    }
    out
}

/// How sparsification ranks candidate coefficients for removal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparsifyStrategy {
    /// Smallest absolute value first.
    Magnitude,
    /// Smallest contribution to the predicted energy first: the drop in
    /// explained variance from zeroing F_ij alone is F_ij^2 E[ctx_j^2],
    /// normalized by the output coefficient's variance so rows are
    /// comparable.
    GainImpact,
}

impl SparsifyStrategy {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "magnitude" => Ok(Self::Magnitude),
            "gain_impact" => Ok(Self::GainImpact),
            other => Err(Error::InvalidArgument(format!(
                "unknown sparsification strategy '{other}' (magnitude|gain_impact)"
            ))),
        }
    }
}

/// A trained predictor with its sparsity mask (row-major, 16x48).
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePredictor {
    pub f: DMatrix<f64>,
    pub mask: Vec<bool>,
}

impl SparsePredictor {
    pub fn dense(f: DMatrix<f64>) -> Self {
        Self { f, mask: vec![true; BLK_DIM * CTX_DIM] }
    }

    pub fn nonzeros(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn max_row_nonzeros(&self) -> usize {
        (0..BLK_DIM)
            .map(|i| (0..CTX_DIM).filter(|&j| self.mask[i * CTX_DIM + j]).count())
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct TrainedPredictors {
    pub modes: Vec<SparsePredictor>,
}

impl TrainedPredictors {
    pub fn dense_fs(&self) -> Vec<DMatrix<f64>> {
        self.modes.iter().map(|p| p.f.clone()).collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrainOptions {
    /// Classify/train rounds before sparsification begins.
    pub iters: usize,
    /// Maximum nonzero weights per output coefficient.
    pub budget: usize,
    pub strategy: SparsifyStrategy,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self { iters: 30, budget: 4, strategy: SparsifyStrategy::GainImpact }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub predictors: TrainedPredictors,
    pub assignment: Vec<usize>,
    /// Prediction gain after each classify/train round.
    pub pg_trajectory: Vec<f64>,
    /// Prediction gain after each sparsification round.
    pub sparsify_pg: Vec<f64>,
    /// Total nonzero count after each sparsification round.
    pub sparsify_nnz: Vec<usize>,
    pub report: GainReport,
    /// Zero-variance coefficient positions excluded from the coding gain.
    pub excluded_coeffs: usize,
}

/// Corpus-wide coding and prediction gain under a fixed assignment. Input
/// variances are taken about the corpus mean; residuals are raw prediction
/// errors of each sample's assigned mode.
pub fn corpus_gains(
    corpus: &TrainingCorpus,
    fs: &[DMatrix<f64>],
    assignment: &[usize],
) -> (GainReport, usize) {
    let n = corpus.samples.len();
    assert!(n > 0 && assignment.len() == n);
    let mut mean = DVector::zeros(BLK_DIM);
    for s in &corpus.samples {
        mean += &s.blk;
    }
    mean /= n as f64;
    let mut in_var = vec![0.0; BLK_DIM];
    let mut res_var = vec![0.0; BLK_DIM];
    for (s, &m) in corpus.samples.iter().zip(assignment) {
        let r = &s.blk - &fs[m] * &s.ctx;
        for i in 0..BLK_DIM {
            let d = s.blk[i] - mean[i];
            in_var[i] += d * d / n as f64;
            res_var[i] += r[i] * r[i] / n as f64;
        }
    }
    let (cg, excluded) = coding_gain_db(&in_var);
    let pg = prediction_gain_db(&in_var, &res_var);
    (GainReport { coding_gain_db: cg, prediction_gain_db: pg }, excluded)
}

/// One sparsification round: of all coefficients in rows still over budget,
/// zero the lowest-scoring 10% (at least one), never taking a row below the
/// budget, then re-solve the affected rows on their reduced support.
/// Returns false once every row is within budget.
pub fn sparsify_round(
    predictors: &mut TrainedPredictors,
    stats: &[ModeStats],
    budget: usize,
    strategy: SparsifyStrategy,
) -> bool {
    // (score, mode, row, col) for every removable coefficient.
    let mut candidates: Vec<(f64, usize, usize, usize)> = Vec::new();
    let mut row_excess = vec![[0usize; BLK_DIM]; predictors.modes.len()];
    for (m, p) in predictors.modes.iter().enumerate() {
        if stats[m].n == 0 {
            continue;
        }
        for i in 0..BLK_DIM {
            let support: Vec<usize> =
                (0..CTX_DIM).filter(|&j| p.mask[i * CTX_DIM + j]).collect();
            if support.len() <= budget {
                continue;
            }
            row_excess[m][i] = support.len() - budget;
            let var_i = (stats[m].yy[i] / stats[m].n as f64).max(1e-12);
            for &j in &support {
                let w = p.f[(i, j)];
                let score = match strategy {
                    SparsifyStrategy::Magnitude => w.abs(),
                    SparsifyStrategy::GainImpact => {
                        w * w * (stats[m].m[(j, j)] / stats[m].n as f64) / var_i
                    }
                };
                candidates.push((score, m, i, j));
            }
        }
    }
    if candidates.is_empty() {
        return false;
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let quota = (candidates.len() + 9) / 10;
    let mut removed = 0usize;
    let mut touched: Vec<(usize, usize)> = Vec::new();
    for &(_, m, i, j) in &candidates {
        if removed >= quota {
            break;
        }
        if row_excess[m][i] == 0 {
            continue;
        }
        row_excess[m][i] -= 1;
        predictors.modes[m].mask[i * CTX_DIM + j] = false;
        touched.push((m, i));
        removed += 1;
    }
    touched.sort_unstable();
    touched.dedup();
    for (m, i) in touched {
        let mask = &predictors.modes[m].mask[i * CTX_DIM..(i + 1) * CTX_DIM];
        let row = solve_row_masked(&stats[m], i, mask);
        predictors.modes[m].f.row_mut(i).copy_from(&row.transpose());
    }
    true
}

/// Full training pipeline: seed with the spatial modes' frequency-domain
/// equivalents, alternate classification and least-squares refits, then
/// sparsify down to the multiply budget.
pub fn train_predictors(corpus: &TrainingCorpus, opts: TrainOptions) -> Result<TrainOutcome> {
    if corpus.samples.is_empty() {
        return Err(Error::InvalidArgument("training corpus is empty".into()));
    }
    if opts.budget == 0 {
        return Err(Error::InvalidArgument("multiply budget must be positive".into()));
    }
    let mut fs: Vec<DMatrix<f64>> = vp8_modes().iter().map(derive_f_dct).collect();
    let mut assignment = classify(corpus, &fs);
    let mut pg_trajectory = Vec::new();
    for _ in 0..opts.iters.max(1) {
        assignment = classify(corpus, &fs);
        let stats = mode_stats(corpus, &assignment);
        for (m, st) in stats.iter().enumerate() {
            if st.n > 0 {
                fs[m] = train_mode(st)?;
            }
        }
        let (report, _) = corpus_gains(corpus, &fs, &assignment);
        pg_trajectory.push(report.prediction_gain_db);
    }

    let stats = mode_stats(corpus, &assignment);
    let mut predictors = TrainedPredictors {
        modes: fs.into_iter().map(SparsePredictor::dense).collect(),
    };
    let mut sparsify_pg = Vec::new();
    let mut sparsify_nnz = Vec::new();
    while sparsify_round(&mut predictors, &stats, opts.budget, opts.strategy) {
        let dense = predictors.dense_fs();
        let (report, _) = corpus_gains(corpus, &dense, &assignment);
        sparsify_pg.push(report.prediction_gain_db);
        sparsify_nnz.push(predictors.modes.iter().map(|p| p.nonzeros()).sum());
    }

    let dense = predictors.dense_fs();
    let (report, excluded_coeffs) = corpus_gains(corpus, &dense, &assignment);
    Ok(TrainOutcome {
        predictors,
        assignment,
        pg_trajectory,
        sparsify_pg,
        sparsify_nnz,
        report,
        excluded_coeffs,
    })
}
