//! Output-layer training: Moore-Penrose linear regression, full-batch
//! logistic regression, and softmax regression with minibatch Adam, plus the
//! evaluation metrics (NMSE, accuracy).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reservoir::ObservableRecord;

/// Regression design matrix: a leading constant-bias column of ones followed
/// by the observable columns.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    matrix: DMatrix<f64>,
}

impl DesignMatrix {
    /// Builds `[1 | features]` from per-sample feature rows.
    pub fn from_feature_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid_argument("design matrix needs at least one sample"));
        }
        let width = rows[0].len();
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::invalid_argument("ragged feature rows"));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid_argument("non-finite feature value"));
        }
        let mut matrix = DMatrix::zeros(rows.len(), width + 1);
        for (i, row) in rows.iter().enumerate() {
            matrix[(i, 0)] = 1.0;
            for (j, v) in row.iter().enumerate() {
                matrix[(i, j + 1)] = *v;
            }
        }
        Ok(Self { matrix })
    }

    /// One row per reservoir record, in record order.
    pub fn from_records(records: &[ObservableRecord]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = records.iter().map(|r| r.values.clone()).collect();
        Self::from_feature_rows(&rows)
    }

    pub fn n_samples(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of columns including the bias column.
    pub fn n_columns(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// A design over a contiguous sample range (e.g. a train/test split).
    pub fn slice_rows(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.n_samples() || len == 0 {
            return Err(Error::invalid_argument(format!(
                "row slice {}..{} out of range for {} samples",
                start,
                start + len,
                self.n_samples()
            )));
        }
        Ok(Self { matrix: self.matrix.view((start, 0), (len, self.matrix.ncols())).into_owned() })
    }
}

/// Per-column affine normalization fitted on a training design: centers each
/// feature column and scales it to unit variance (constant columns map to
/// zeros). The bias column is left alone.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer {
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(design: &DesignMatrix) -> Self {
        let m = design.matrix();
        let l = m.nrows() as f64;
        let mut means = Vec::with_capacity(m.ncols() - 1);
        let mut stds = Vec::with_capacity(m.ncols() - 1);
        for j in 1..m.ncols() {
            let col = m.column(j);
            let mean = col.sum() / l;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / l;
            means.push(mean);
            stds.push(if var > 0.0 { var.sqrt() } else { 1.0 });
        }
        Self { means, stds }
    }

    pub fn transform(&self, design: &DesignMatrix) -> Result<DesignMatrix> {
        if design.n_columns() != self.means.len() + 1 {
            return Err(Error::invalid_argument(format!(
                "standardizer fitted on {} feature columns, design has {}",
                self.means.len(),
                design.n_columns() - 1
            )));
        }
        let mut m = design.matrix().clone();
        for j in 1..m.ncols() {
            let mean = self.means[j - 1];
            let std = self.stds[j - 1];
            for i in 0..m.nrows() {
                m[(i, j)] = (m[(i, j)] - mean) / std;
            }
        }
        Ok(DesignMatrix { matrix: m })
    }
}

/// Trained weights: one bias-plus-feature vector, or one per class.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSet {
    Single(DVector<f64>),
    /// `(D+1) × M`, one column per class.
    PerClass(DMatrix<f64>),
}

impl WeightSet {
    pub fn n_columns(&self) -> usize {
        match self {
            WeightSet::Single(w) => w.len(),
            WeightSet::PerClass(w) => w.nrows(),
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            WeightSet::Single(_) => 2,
            WeightSet::PerClass(w) => w.ncols(),
        }
    }

    /// JSON serialization with a header naming the feature ordering the
    /// weights were trained against.
    pub fn to_json(&self, observable_order: &str) -> String {
        let file = WeightFile {
            observable_order: observable_order.to_string(),
            kind: match self {
                WeightSet::Single(_) => "single".to_string(),
                WeightSet::PerClass(_) => "per-class".to_string(),
            },
            weights: match self {
                WeightSet::Single(w) => vec![w.iter().copied().collect()],
                WeightSet::PerClass(w) => w
                    .column_iter()
                    .map(|c| c.iter().copied().collect())
                    .collect(),
            },
        };
        serde_json::to_string_pretty(&file).expect("weight serialization")
    }

    pub fn from_json(text: &str) -> Result<(Self, String)> {
        let file: WeightFile =
            serde_json::from_str(text).map_err(|e| Error::parse(format!("weight file: {e}")))?;
        if file.weights.is_empty() || file.weights.iter().any(|w| w.is_empty()) {
            return Err(Error::parse("weight file holds no weights"));
        }
        let dim = file.weights[0].len();
        if file.weights.iter().any(|w| w.len() != dim) {
            return Err(Error::parse("weight file rows have inconsistent lengths"));
        }
        let ws = match file.kind.as_str() {
            "single" if file.weights.len() == 1 => {
                WeightSet::Single(DVector::from_row_slice(&file.weights[0]))
            }
            "per-class" => {
                let m = file.weights.len();
                WeightSet::PerClass(DMatrix::from_fn(dim, m, |r, c| file.weights[c][r]))
            }
            other => return Err(Error::parse(format!("unknown weight kind {other:?}"))),
        };
        Ok((ws, file.observable_order))
    }
}

#[derive(Serialize, Deserialize)]
struct WeightFile {
    observable_order: String,
    kind: String,
    weights: Vec<Vec<f64>>,
}

/// Summary of one training run.
#[derive(Clone, Debug, Default)]
pub struct TrainReport {
    pub final_loss: f64,
    pub loss_trace: Vec<f64>,
    pub best_epoch: usize,
    pub validation_metric: Option<f64>,
    pub warnings: Vec<String>,
}

/// Weight initialization for the iterative fits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightInit {
    Zero,
    /// Uniform in `(-scale, scale)` from a seeded stream.
    Seeded { seed: u64, scale: f64 },
}

#[derive(Clone, Debug)]
pub struct LogisticOptions {
    pub learn_rate: f64,
    pub max_epochs: usize,
    /// Stop once the epoch-to-epoch loss change falls below this.
    pub loss_tol: f64,
    pub init: WeightInit,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self { learn_rate: 0.1, max_epochs: 5000, loss_tol: 1e-10, init: WeightInit::Zero }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AdamParams {
    pub learn_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self { learn_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

#[derive(Clone, Debug)]
pub struct SoftmaxOptions {
    pub batch_size: usize,
    pub epochs: usize,
    pub adam: AdamParams,
    /// Seeds both the minibatch shuffling and the initialization.
    pub seed: u64,
    pub init_scale: f64,
}

impl Default for SoftmaxOptions {
    fn default() -> Self {
        Self { batch_size: 32, epochs: 50, adam: AdamParams::default(), seed: 0, init_scale: 0.01 }
    }
}

/// Least-squares fit. With `ridge = 0` this is the Moore-Penrose
/// pseudo-inverse solution (minimum-norm on rank-deficient designs); with
/// `ridge > 0` it solves `(VᵀV + rI) W = Vᵀȳ`.
pub fn fit_linear(design: &DesignMatrix, targets: &[f64], ridge: f64) -> Result<WeightSet> {
    check_targets(design, targets)?;
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::invalid_argument("ridge must be finite and nonnegative"));
    }
    let v = design.matrix();
    let y = DVector::from_row_slice(targets);
    let w = if ridge == 0.0 {
        let svd = v.clone().svd(true, true);
        let max_sv = svd.singular_values.iter().copied().fold(0.0f64, f64::max);
        svd.solve(&y, max_sv * 1e-12)
            .map_err(|e| Error::invalid_state(format!("SVD solve failed: {e}")))?
    } else {
        let mut gram = v.transpose() * v;
        for i in 0..gram.nrows() {
            gram[(i, i)] += ridge;
        }
        let rhs = v.transpose() * &y;
        gram.cholesky()
            .ok_or_else(|| Error::invalid_state("ridge normal equations not positive definite"))?
            .solve(&rhs)
    };
    Ok(WeightSet::Single(w))
}

/// Linear prediction `V·W`.
pub fn predict_linear(weights: &WeightSet, design: &DesignMatrix) -> Result<Vec<f64>> {
    let w = single_weights(weights, design)?;
    Ok((design.matrix() * w).iter().copied().collect())
}

/// Full-batch gradient descent on the binary cross-entropy. When a
/// validation split is supplied, per-epoch validation accuracy is tracked
/// and the weights of the best epoch are returned.
pub fn fit_logistic(
    design: &DesignMatrix,
    targets: &[f64],
    validation: Option<(&DesignMatrix, &[f64])>,
    opts: &LogisticOptions,
) -> Result<(WeightSet, TrainReport)> {
    check_targets(design, targets)?;
    if targets.iter().any(|y| *y != 0.0 && *y != 1.0) {
        return Err(Error::invalid_argument("logistic targets must be 0 or 1"));
    }
    if !(opts.learn_rate > 0.0 && opts.learn_rate.is_finite()) {
        return Err(Error::invalid_argument("learn_rate must be positive"));
    }
    if let Some((vd, vt)) = validation {
        if vt.len() != vd.n_samples() || vd.n_columns() != design.n_columns() {
            return Err(Error::invalid_argument("validation split does not match the design"));
        }
    }
    let mut report = TrainReport::default();
    let ones = targets.iter().filter(|y| **y == 1.0).count();
    if ones == 0 || ones == targets.len() {
        report.warnings.push(format!(
            "degenerate targets: all {} samples share one class",
            targets.len()
        ));
    }

    let v = design.matrix();
    let l = design.n_samples() as f64;
    let y = DVector::from_row_slice(targets);
    let mut w = init_vector(design.n_columns(), opts.init);

    let mut best_acc = f64::NEG_INFINITY;
    let mut best_w = w.clone();
    let mut best_epoch = 0usize;
    let mut validate = |w: &DVector<f64>, epoch: usize, best_acc: &mut f64,
                        best_w: &mut DVector<f64>, best_epoch: &mut usize| {
        if let Some((vd, vt)) = validation {
            let hits = (vd.matrix() * w)
                .iter()
                .zip(vt)
                .filter(|(z, t)| f64::from(**z > 0.0) == **t)
                .count();
            let acc = hits as f64 / vt.len() as f64;
            if acc > *best_acc {
                *best_acc = acc;
                *best_w = w.clone();
                *best_epoch = epoch;
            }
        }
    };

    let mut last_loss = f64::INFINITY;
    for epoch in 0..opts.max_epochs {
        let z = v * &w;
        let loss = z
            .iter()
            .zip(targets)
            .map(|(&zi, &yi)| softplus(zi) - yi * zi)
            .sum::<f64>()
            / l;
        report.loss_trace.push(loss);
        if (last_loss - loss).abs() < opts.loss_tol {
            break;
        }
        last_loss = loss;
        let residual = z.map(sigmoid) - &y;
        let grad = (v.transpose() * residual) / l;
        w -= grad * opts.learn_rate;
        validate(&w, epoch, &mut best_acc, &mut best_w, &mut best_epoch);
    }
    report.final_loss = *report.loss_trace.last().unwrap_or(&f64::NAN);
    let weights = if validation.is_some() {
        report.best_epoch = best_epoch;
        report.validation_metric = Some(best_acc);
        report
            .warnings
            .push("weights selected by best accuracy on the provided validation split".to_string());
        best_w
    } else {
        report.best_epoch = report
            .loss_trace
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        w
    };
    Ok((WeightSet::Single(weights), report))
}

/// Class probabilities `σ(V·W)`.
pub fn logistic_probabilities(weights: &WeightSet, design: &DesignMatrix) -> Result<Vec<f64>> {
    let w = single_weights(weights, design)?;
    Ok((design.matrix() * w).iter().map(|z| sigmoid(*z)).collect())
}

/// Thresholds at exactly 1/2; a tie (`𝒫 = 1/2`, i.e. zero logit) maps to 0.
pub fn predict_logistic(weights: &WeightSet, design: &DesignMatrix) -> Result<Vec<u8>> {
    let w = single_weights(weights, design)?;
    Ok((design.matrix() * w).iter().map(|z| u8::from(*z > 0.0)).collect())
}

/// Minibatch Adam on the categorical cross-entropy. When a validation split
/// is supplied, per-epoch validation accuracy is recorded and the weights of
/// the best epoch are returned (the paper's protocol selects on the test
/// set; the report carries a warning saying so).
pub fn fit_softmax(
    design: &DesignMatrix,
    labels: &[usize],
    n_classes: usize,
    validation: Option<(&DesignMatrix, &[usize])>,
    opts: &SoftmaxOptions,
) -> Result<(WeightSet, TrainReport)> {
    if n_classes < 2 {
        return Err(Error::invalid_argument("softmax needs at least 2 classes"));
    }
    if labels.len() != design.n_samples() {
        return Err(Error::invalid_argument(format!(
            "{} labels for {} samples",
            labels.len(),
            design.n_samples()
        )));
    }
    if let Some(bad) = labels.iter().find(|l| **l >= n_classes) {
        return Err(Error::invalid_argument(format!(
            "label {bad} out of range for {n_classes} classes"
        )));
    }
    if opts.batch_size == 0 {
        return Err(Error::invalid_argument("batch_size must be >= 1"));
    }
    if let Some((vd, vl)) = validation {
        if vl.len() != vd.n_samples() || vd.n_columns() != design.n_columns() {
            return Err(Error::invalid_argument("validation split does not match the design"));
        }
        if let Some(bad) = vl.iter().find(|l| **l >= n_classes) {
            return Err(Error::invalid_argument(format!(
                "validation label {bad} out of range for {n_classes} classes"
            )));
        }
    }

    let v = design.matrix();
    let l = design.n_samples();
    let cols = design.n_columns();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut w = DMatrix::from_fn(cols, n_classes, |_, _| {
        rng.gen_range(-opts.init_scale..opts.init_scale)
    });

    let mut adam_m = DMatrix::<f64>::zeros(cols, n_classes);
    let mut adam_v = DMatrix::<f64>::zeros(cols, n_classes);
    let mut adam_t = 0u32;

    let mut report = TrainReport::default();
    let mut best_acc = f64::NEG_INFINITY;
    let mut best_w = w.clone();
    let mut best_epoch = 0usize;
    let mut order: Vec<usize> = (0..l).collect();

    for epoch in 0..opts.epochs {
        shuffle(&mut order, &mut rng);
        for batch in order.chunks(opts.batch_size) {
            let x = v.select_rows(batch.iter());
            let mut probs = softmax_rows(&(&x * &w));
            for (row, &sample) in batch.iter().enumerate() {
                probs[(row, labels[sample])] -= 1.0;
            }
            let grad = (x.transpose() * probs) / batch.len() as f64;

            adam_t += 1;
            let b1t = 1.0 - opts.adam.beta1.powi(adam_t as i32);
            let b2t = 1.0 - opts.adam.beta2.powi(adam_t as i32);
            for idx in 0..cols * n_classes {
                let g = grad[idx];
                adam_m[idx] = opts.adam.beta1 * adam_m[idx] + (1.0 - opts.adam.beta1) * g;
                adam_v[idx] = opts.adam.beta2 * adam_v[idx] + (1.0 - opts.adam.beta2) * g * g;
                let m_hat = adam_m[idx] / b1t;
                let v_hat = adam_v[idx] / b2t;
                w[idx] -= opts.adam.learn_rate * m_hat / (v_hat.sqrt() + opts.adam.epsilon);
            }
        }

        report.loss_trace.push(cross_entropy(v, labels, &w));
        if let Some((vd, vl)) = validation {
            let predicted = argmax_rows(&(vd.matrix() * &w));
            let acc = predicted.iter().zip(vl).filter(|(a, b)| *a == *b).count() as f64
                / vl.len() as f64;
            if acc > best_acc {
                best_acc = acc;
                best_w = w.clone();
                best_epoch = epoch;
            }
        }
    }

    report.final_loss = *report.loss_trace.last().unwrap_or(&f64::NAN);
    let weights = if validation.is_some() {
        report.best_epoch = best_epoch;
        report.validation_metric = Some(best_acc);
        report
            .warnings
            .push("weights selected by best accuracy on the provided validation split".to_string());
        best_w
    } else {
        report.best_epoch = report
            .loss_trace
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        w
    };
    Ok((WeightSet::PerClass(weights), report))
}

/// Per-class probabilities, one row per sample.
pub fn softmax_probabilities(weights: &WeightSet, design: &DesignMatrix) -> Result<DMatrix<f64>> {
    let w = per_class_weights(weights, design)?;
    Ok(softmax_rows(&(design.matrix() * w)))
}

/// Argmax class per sample (lowest index wins ties).
pub fn predict_softmax(weights: &WeightSet, design: &DesignMatrix) -> Result<Vec<usize>> {
    let w = per_class_weights(weights, design)?;
    Ok(argmax_rows(&(design.matrix() * w)))
}

/// Normalized mean-square error `Σ(y−ȳ)² / Σȳ²`.
pub fn nmse(predicted: &[f64], target: &[f64]) -> Result<f64> {
    if predicted.len() != target.len() || predicted.is_empty() {
        return Err(Error::invalid_argument(format!(
            "length mismatch: {} predictions vs {} targets",
            predicted.len(),
            target.len()
        )));
    }
    let denom: f64 = target.iter().map(|y| y * y).sum();
    if denom <= 0.0 {
        return Err(Error::invalid_argument("target sequence has zero norm"));
    }
    let num: f64 = predicted.iter().zip(target).map(|(y, t)| (y - t) * (y - t)).sum();
    Ok(num / denom)
}

/// Fraction of matching entries.
pub fn accuracy<T: PartialEq>(predicted: &[T], truth: &[T]) -> Result<f64> {
    if predicted.len() != truth.len() || predicted.is_empty() {
        return Err(Error::invalid_argument(format!(
            "length mismatch: {} predictions vs {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

fn check_targets(design: &DesignMatrix, targets: &[f64]) -> Result<()> {
    if targets.len() != design.n_samples() {
        return Err(Error::invalid_argument(format!(
            "{} targets for {} samples",
            targets.len(),
            design.n_samples()
        )));
    }
    if targets.iter().any(|y| !y.is_finite()) {
        return Err(Error::invalid_argument("non-finite target"));
    }
    Ok(())
}

fn single_weights<'a>(weights: &'a WeightSet, design: &DesignMatrix) -> Result<&'a DVector<f64>> {
    match weights {
        WeightSet::Single(w) if w.len() == design.n_columns() => Ok(w),
        WeightSet::Single(w) => Err(Error::invalid_argument(format!(
            "weight length {} does not match design width {}",
            w.len(),
            design.n_columns()
        ))),
        WeightSet::PerClass(_) => {
            Err(Error::invalid_argument("expected a single weight vector, got per-class weights"))
        }
    }
}

fn per_class_weights<'a>(weights: &'a WeightSet, design: &DesignMatrix) -> Result<&'a DMatrix<f64>> {
    match weights {
        WeightSet::PerClass(w) if w.nrows() == design.n_columns() => Ok(w),
        WeightSet::PerClass(w) => Err(Error::invalid_argument(format!(
            "weight rows {} do not match design width {}",
            w.nrows(),
            design.n_columns()
        ))),
        WeightSet::Single(_) => {
            Err(Error::invalid_argument("expected per-class weights, got a single vector"))
        }
    }
}

fn init_vector(dim: usize, init: WeightInit) -> DVector<f64> {
    match init {
        WeightInit::Zero => DVector::zeros(dim),
        WeightInit::Seeded { seed, scale } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            DVector::from_fn(dim, |_, _| rng.gen_range(-scale..scale))
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// `ln(1 + eᶻ)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Row-wise softmax with log-sum-exp stabilization.
fn softmax_rows(logits: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = logits.clone();
    for mut row in out.row_iter_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

fn argmax_rows(logits: &DMatrix<f64>) -> Vec<usize> {
    logits
        .row_iter()
        .map(|row| {
            let mut best = 0usize;
            let mut best_v = f64::NEG_INFINITY;
            for (i, v) in row.iter().enumerate() {
                if *v > best_v {
                    best_v = *v;
                    best = i;
                }
            }
            best
        })
        .collect()
}

/// Mean categorical cross-entropy of the full dataset.
fn cross_entropy(v: &DMatrix<f64>, labels: &[usize], w: &DMatrix<f64>) -> f64 {
    let logits = v * w;
    let mut total = 0.0;
    for (row, &label) in logits.row_iter().zip(labels) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
        total += lse - row[label];
    }
    total / labels.len() as f64
}

fn shuffle<R: Rng>(order: &mut [usize], rng: &mut R) {
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn design_1d(xs: &[f64]) -> DesignMatrix {
        DesignMatrix::from_feature_rows(&xs.iter().map(|x| vec![*x]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn design_matrix_prepends_ones() {
        let d = design_1d(&[2.0, 3.0]);
        assert_eq!(d.n_samples(), 2);
        assert_eq!(d.n_columns(), 2);
        assert_eq!(d.matrix()[(0, 0)], 1.0);
        assert_eq!(d.matrix()[(1, 0)], 1.0);
        assert_eq!(d.matrix()[(1, 1)], 3.0);
    }

    #[test]
    fn design_matrix_rejects_bad_rows() {
        assert!(DesignMatrix::from_feature_rows(&[]).is_err());
        assert!(DesignMatrix::from_feature_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(DesignMatrix::from_feature_rows(&[vec![f64::NAN]]).is_err());
    }

    #[test]
    fn linear_fit_recovers_exact_line() {
        let d = design_1d(&[0.0, 1.0, 2.0, 3.0]);
        let w = fit_linear(&d, &[0.0, 2.0, 4.0, 6.0], 0.0).unwrap();
        let WeightSet::Single(w) = &w else { panic!() };
        assert_abs_diff_eq!(w[0], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(w[1], 2.0, epsilon = 1e-10);
    }

    #[test]
    fn linear_fit_constant_targets_go_to_bias() {
        let d = design_1d(&[0.0, 1.0, 2.0, 3.0]);
        let w = fit_linear(&d, &[5.0; 4], 0.0).unwrap();
        let WeightSet::Single(w) = &w else { panic!() };
        assert_abs_diff_eq!(w[0], 5.0, epsilon = 1e-10);
        assert_abs_diff_eq!(w[1], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn linear_fit_matches_normal_equations_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> =
            (0..50).map(|_| (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let d = DesignMatrix::from_feature_rows(&rows).unwrap();
        let targets: Vec<f64> = (0..50).map(|_| rng.gen_range(-2.0..2.0)).collect();

        let WeightSet::Single(w) = fit_linear(&d, &targets, 0.0).unwrap() else { panic!() };

        // Independent solve of VᵀV W = Vᵀy.
        let v = d.matrix();
        let y = DVector::from_row_slice(&targets);
        let oracle = (v.transpose() * v)
            .cholesky()
            .unwrap()
            .solve(&(v.transpose() * &y));
        assert_abs_diff_eq!(&w, &oracle, epsilon = 1e-8);
    }

    #[test]
    fn linear_fit_normal_equation_residual_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rows: Vec<Vec<f64>> =
            (0..40).map(|_| (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let d = DesignMatrix::from_feature_rows(&rows).unwrap();
        let targets: Vec<f64> = (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let WeightSet::Single(w) = fit_linear(&d, &targets, 0.0).unwrap() else { panic!() };
        let v = d.matrix();
        let y = DVector::from_row_slice(&targets);
        let residual = v.transpose() * (v * &w - &y);
        let rhs_norm = (v.transpose() * &y).amax();
        assert!(residual.amax() < 1e-8 * rhs_norm.max(1.0));
    }

    #[test]
    fn ridge_shrinks_coefficients() {
        let d = design_1d(&[0.0, 1.0, 2.0, 3.0]);
        let targets = [0.0, 2.0, 4.0, 6.0];
        let WeightSet::Single(w0) = fit_linear(&d, &targets, 0.0).unwrap() else { panic!() };
        let WeightSet::Single(w1) = fit_linear(&d, &targets, 10.0).unwrap() else { panic!() };
        assert!(w1.norm() < w0.norm());
    }

    #[test]
    fn linear_fit_rejects_non_finite_targets() {
        let d = design_1d(&[0.0, 1.0]);
        assert!(fit_linear(&d, &[1.0, f64::NAN], 0.0).is_err());
    }

    #[test]
    fn logistic_zero_weights_give_half_probability() {
        let d = design_1d(&[-3.0, 7.0]);
        let w = WeightSet::Single(DVector::zeros(2));
        let p = logistic_probabilities(&w, &d).unwrap();
        assert_eq!(p, vec![0.5, 0.5]);
        // Tie maps to 0.
        assert_eq!(predict_logistic(&w, &d).unwrap(), vec![0, 0]);
    }

    #[test]
    fn logistic_separable_data_trains_to_full_accuracy() {
        let d = design_1d(&[-2.0, -1.5, -1.0, 1.0, 1.5, 2.0]);
        let targets = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let opts = LogisticOptions { max_epochs: 2000, ..Default::default() };
        let (w, report) = fit_logistic(&d, &targets, None, &opts).unwrap();
        let predicted = predict_logistic(&w, &d).unwrap();
        let truth: Vec<u8> = targets.iter().map(|y| *y as u8).collect();
        assert_eq!(accuracy(&predicted, &truth).unwrap(), 1.0);
        assert!(report.final_loss < 0.3);
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        let rows = vec![
            vec![0.3, -1.2],
            vec![1.0, 0.4],
            vec![-0.7, 0.9],
            vec![0.2, 0.1],
        ];
        let d = DesignMatrix::from_feature_rows(&rows).unwrap();
        let targets = [1.0, 0.0, 1.0, 0.0];
        let v = d.matrix();
        let l = targets.len() as f64;

        let bce = |w: &DVector<f64>| -> f64 {
            (v * w)
                .iter()
                .zip(&targets)
                .map(|(&z, &y)| softplus(z) - y * z)
                .sum::<f64>()
                / l
        };

        // Analytic gradient at zero weights is Vᵀ(1/2 − ȳ)/L.
        let w0 = DVector::zeros(3);
        let residual = DVector::from_iterator(4, targets.iter().map(|y| 0.5 - y));
        let analytic = (v.transpose() * residual) / l;

        let h = 1e-6;
        for k in 0..3 {
            let mut wp = w0.clone();
            let mut wm = w0.clone();
            wp[k] += h;
            wm[k] -= h;
            let numeric = (bce(&wp) - bce(&wm)) / (2.0 * h);
            assert_abs_diff_eq!(-analytic[k], -numeric, epsilon = 1e-6);
        }
    }

    #[test]
    fn logistic_warns_on_single_class_targets() {
        let d = design_1d(&[0.0, 1.0, 2.0]);
        let (_, report) = fit_logistic(
            &d,
            &[1.0, 1.0, 1.0],
            None,
            &LogisticOptions { max_epochs: 10, ..Default::default() },
        )
        .unwrap();
        assert!(!report.warnings.is_empty());
    }

    #[test]
    fn logistic_validation_keeps_best_epoch_weights() {
        let d = design_1d(&[-2.0, -1.0, 1.0, 2.0]);
        let targets = [0.0, 0.0, 1.0, 1.0];
        let opts = LogisticOptions { max_epochs: 50, ..Default::default() };
        let (_, report) = fit_logistic(&d, &targets, Some((&d, &targets[..])), &opts).unwrap();
        assert_eq!(report.validation_metric, Some(1.0));
        assert!(report.warnings.iter().any(|w| w.contains("validation")));
    }

    #[test]
    fn logistic_prediction_follows_logit_sign() {
        let d = design_1d(&[1.0]);
        let pos = WeightSet::Single(DVector::from_row_slice(&[0.0, 10.0]));
        let neg = WeightSet::Single(DVector::from_row_slice(&[0.0, -10.0]));
        assert_eq!(predict_logistic(&pos, &d).unwrap(), vec![1]);
        assert_eq!(predict_logistic(&neg, &d).unwrap(), vec![0]);
    }

    #[test]
    fn bce_is_monotone_under_small_rate_descent() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![(i as f64 / 10.0).sin(), (i as f64 / 7.0).cos()])
            .collect();
        let d = DesignMatrix::from_feature_rows(&rows).unwrap();
        let targets: Vec<f64> = (0..20).map(|i| f64::from(i % 3 == 0)).collect();
        let opts = LogisticOptions {
            learn_rate: 1e-3,
            max_epochs: 100,
            loss_tol: 0.0,
            init: WeightInit::Seeded { seed: 2, scale: 0.5 },
        };
        let (_, report) = fit_logistic(&d, &targets, None, &opts).unwrap();
        for pair in report.loss_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12);
        }
    }

    #[test]
    fn softmax_zero_weights_give_uniform_probabilities() {
        let d = design_1d(&[0.7]);
        let w = WeightSet::PerClass(DMatrix::zeros(2, 4));
        let p = softmax_probabilities(&w, &d).unwrap();
        for j in 0..4 {
            assert_abs_diff_eq!(p[(0, j)], 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn softmax_probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows: Vec<Vec<f64>> =
            (0..30).map(|_| (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let d = DesignMatrix::from_feature_rows(&rows).unwrap();
        let w = WeightSet::PerClass(DMatrix::from_fn(5, 3, |_, _| rng.gen_range(-2.0..2.0)));
        let p = softmax_probabilities(&w, &d).unwrap();
        for row in p.row_iter() {
            let sum: f64 = row.iter().sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
            assert!(row.iter().all(|v| *v > 0.0 && *v < 1.0));
        }
    }

    #[test]
    fn two_class_softmax_matches_logistic_boundary() {
        let d = design_1d(&[-2.0, -0.5, 0.5, 2.0]);
        let w = DMatrix::from_row_slice(2, 2, &[0.1, -0.1, -0.8, 0.8]);
        let per_class = WeightSet::PerClass(w.clone());
        let predicted = predict_softmax(&per_class, &d).unwrap();
        // The equivalent logistic weight vector is the column difference.
        let diff = WeightSet::Single(DVector::from_row_slice(&[
            w[(0, 1)] - w[(0, 0)],
            w[(1, 1)] - w[(1, 0)],
        ]));
        let logit_pred = predict_logistic(&diff, &d).unwrap();
        let as_usize: Vec<usize> = logit_pred.iter().map(|p| *p as usize).collect();
        assert_eq!(predicted, as_usize);
    }

    #[test]
    fn softmax_gradient_matches_finite_differences() {
        let rows = vec![
            vec![0.5, -0.2],
            vec![-1.0, 0.3],
            vec![0.1, 0.9],
            vec![0.7, 0.7],
            vec![-0.4, -0.8],
        ];
        let d = DesignMatrix::from_feature_rows(&rows).unwrap();
        let labels = [0usize, 1, 2, 1, 0];
        let v = d.matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let w0 = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-0.5..0.5));

        // Analytic full-batch gradient Vᵀ(P − Y)/L.
        let mut probs = softmax_rows(&(v * &w0));
        for (row, &label) in labels.iter().enumerate() {
            probs[(row, label)] -= 1.0;
        }
        let analytic = (v.transpose() * probs) / labels.len() as f64;

        let h = 1e-6;
        let mut worst = 0.0f64;
        for idx in 0..9 {
            let mut wp = w0.clone();
            let mut wm = w0.clone();
            wp[idx] += h;
            wm[idx] -= h;
            let numeric =
                (cross_entropy(v, &labels, &wp) - cross_entropy(v, &labels, &wm)) / (2.0 * h);
            worst = worst.max((analytic[idx] - numeric).abs());
        }
        assert!(worst < 1e-6, "max gradient deviation {worst}");
    }

    #[test]
    fn softmax_trains_a_separable_three_class_toy() {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..30 {
            let t = i as f64 / 30.0;
            rows.push(vec![t + 2.0, 0.0]);
            labels.push(0usize);
            rows.push(vec![-t - 2.0, 0.0]);
            labels.push(1);
            rows.push(vec![0.0, t + 2.0]);
            labels.push(2);
        }
        let d = DesignMatrix::from_feature_rows(&rows).unwrap();
        let opts = SoftmaxOptions {
            epochs: 60,
            adam: AdamParams { learn_rate: 0.05, ..Default::default() },
            seed: 3,
            ..Default::default()
        };
        let (w, _) = fit_softmax(&d, &labels, 3, None, &opts).unwrap();
        let predicted = predict_softmax(&w, &d).unwrap();
        assert_eq!(accuracy(&predicted, &labels).unwrap(), 1.0);
    }

    #[test]
    fn softmax_validation_selects_best_epoch() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![f64::from(i % 2) * 2.0 - 1.0]).collect();
        let labels: Vec<usize> = (0..12).map(|i| i % 2).collect();
        let d = DesignMatrix::from_feature_rows(&rows).unwrap();
        let opts = SoftmaxOptions { epochs: 5, seed: 1, ..Default::default() };
        let (_, report) = fit_softmax(&d, &labels, 2, Some((&d, &labels)), &opts).unwrap();
        assert!(report.validation_metric.is_some());
        assert!(report.best_epoch < 5);
        assert!(report.warnings.iter().any(|w| w.contains("validation")));
    }

    #[test]
    fn softmax_rejects_bad_arguments() {
        let d = design_1d(&[1.0, 2.0]);
        assert!(fit_softmax(&d, &[0, 1], 1, None, &SoftmaxOptions::default()).is_err());
        assert!(fit_softmax(&d, &[0, 5], 3, None, &SoftmaxOptions::default()).is_err());
        assert!(fit_softmax(&d, &[0], 2, None, &SoftmaxOptions::default()).is_err());
    }

    #[test]
    fn softmax_is_deterministic_for_a_fixed_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let rows: Vec<Vec<f64>> =
            (0..40).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let labels: Vec<usize> = (0..40).map(|i| i % 3).collect();
        let d = DesignMatrix::from_feature_rows(&rows).unwrap();
        let opts = SoftmaxOptions { epochs: 8, seed: 77, ..Default::default() };
        let (WeightSet::PerClass(a), _) = fit_softmax(&d, &labels, 3, None, &opts).unwrap() else {
            panic!()
        };
        let (WeightSet::PerClass(b), _) = fit_softmax(&d, &labels, 3, None, &opts).unwrap() else {
            panic!()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn logit_shift_leaves_argmax_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rows: Vec<Vec<f64>> =
            (0..25).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let d = DesignMatrix::from_feature_rows(&rows).unwrap();
        let w = DMatrix::from_fn(4, 5, |_, _| rng.gen_range(-1.0..1.0));
        let mut shifted = w.clone();
        for r in 0..4 {
            for c in 0..5 {
                // Constant shift on the bias row moves every class logit equally.
                if r == 0 {
                    shifted[(r, c)] += 3.7;
                }
            }
        }
        let a = predict_softmax(&WeightSet::PerClass(w), &d).unwrap();
        let b = predict_softmax(&WeightSet::PerClass(shifted), &d).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nmse_identities() {
        let y = [1.0, -2.0, 3.0];
        assert_abs_diff_eq!(nmse(&y, &y).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(nmse(&[0.0, 0.0, 0.0], &y).unwrap(), 1.0, epsilon = 1e-15);
        let doubled: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
        assert_abs_diff_eq!(nmse(&doubled, &y).unwrap(), 1.0, epsilon = 1e-15);
        assert!(nmse(&y, &[0.0, 0.0, 0.0]).is_err());
        assert!(nmse(&y, &[1.0]).is_err());
    }

    #[test]
    fn accuracy_identities() {
        assert_eq!(accuracy(&[1u8, 0, 1], &[1, 0, 1]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1u8, 0, 1, 0], &[0, 1, 0, 1]).unwrap(), 0.0);
        assert_eq!(accuracy(&[1u8, 0, 1, 0], &[1, 0, 0, 1]).unwrap(), 0.5);
        assert!(accuracy(&[1u8], &[1, 0]).is_err());
    }

    #[test]
    fn standardizer_centers_and_scales() {
        let d = DesignMatrix::from_feature_rows(&[
            vec![1.0, 5.0, 3.0],
            vec![3.0, 5.0, 1.0],
        ])
        .unwrap();
        let s = Standardizer::fit(&d);
        let t = s.transform(&d).unwrap();
        // Bias column untouched.
        assert_eq!(t.matrix()[(0, 0)], 1.0);
        // First feature: mean 2, std 1 → ±1.
        assert_abs_diff_eq!(t.matrix()[(0, 1)], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.matrix()[(1, 1)], 1.0, epsilon = 1e-12);
        // Constant column maps to zeros.
        assert_eq!(t.matrix()[(0, 2)], 0.0);
        assert_eq!(t.matrix()[(1, 2)], 0.0);
    }

    #[test]
    fn standardizer_rejects_width_mismatch() {
        let a = design_1d(&[1.0, 2.0]);
        let b = DesignMatrix::from_feature_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(Standardizer::fit(&a).transform(&b).is_err());
    }

    #[test]
    fn weight_serialization_round_trips() {
        let single = WeightSet::Single(DVector::from_row_slice(&[0.5, -1.25, 3.0]));
        let json = single.to_json("bias,then upper-triangle row-major x-moments");
        let (back, order) = WeightSet::from_json(&json).unwrap();
        assert_eq!(back, single);
        assert!(order.contains("upper-triangle"));

        let per_class = WeightSet::PerClass(DMatrix::from_row_slice(2, 3, &[
            1.0, 2.0, 3.0, //
            4.0, 5.0, 6.0,
        ]));
        let json = per_class.to_json("bias,features");
        let (back, _) = WeightSet::from_json(&json).unwrap();
        assert_eq!(back, per_class);
    }

    #[test]
    fn weight_deserialization_rejects_garbage() {
        assert!(WeightSet::from_json("{}").is_err());
        assert!(WeightSet::from_json("{\"observable_order\":\"o\",\"kind\":\"single\",\"weights\":[]}").is_err());
        assert!(WeightSet::from_json(
            "{\"observable_order\":\"o\",\"kind\":\"weird\",\"weights\":[[1.0]]}"
        )
        .is_err());
    }
}
