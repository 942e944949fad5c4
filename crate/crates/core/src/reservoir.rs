//! The measurement-based reservoir step map.
//!
//! One step injects the input through the teleportation measurement basis
//! (an input-dependent shear), applies the cluster entangling gate and the
//! mode-wise Fourier byproduct, then splits the state on a beam splitter of
//! transmissivity `T` against vacuum. The unmeasured path continues as the
//! reservoir; the measured path's second-order x-moments form the readout
//! features.
//!
//! With the engineered gate `U(s) = C_Z(𝒢) · F · D(αs + β)` the kept path
//! evolves as
//!
//! ```text
//! Γ' = T · UΓUᵀ + (1−T)·I         R' = √T · U R
//! ```
//!
//! and the measured path yields
//!
//! ```text
//! Γ_meas = x_block[(1−T)·UΓUᵀ + T·I]    R_meas = −√(1−T) · x_part(U R)
//! O      = Γ_meas + R_meas R_measᵀ
//! ```
//!
//! Homodyne back-action averages out over the ensemble, so the main path
//! propagates exact moments; [`conditional_step_oracle`] samples individual
//! conditional trajectories and exists to verify that claim in tests.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::cluster::ClusterGraph;
use crate::error::{Error, Result};
use crate::gaussian::{
    cz_matrix, fourier_matrix, shear_matrix, spectral_radius, x_block_of, x_part_of,
    GaussianState, SymplecticGate,
};

/// Per-mode measurement-basis parameters `(αᵢ, βᵢ)`: the shear applied at a
/// step with input `s` on mode `i` is `αᵢ·sᵢ + βᵢ`.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodingConfig {
    pairs: Vec<(f64, f64)>,
}

impl EncodingConfig {
    pub fn from_pairs(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid_argument("encoding needs at least one mode"));
        }
        if !pairs.iter().all(|(a, b)| a.is_finite() && b.is_finite()) {
            return Err(Error::invalid_argument("non-finite encoding parameter"));
        }
        Ok(Self { pairs })
    }

    /// Same `(α, β)` on every mode.
    pub fn uniform(n_modes: usize, alpha: f64, beta: f64) -> Result<Self> {
        Self::from_pairs(vec![(alpha, beta); n_modes.max(1)])
    }

    pub fn n_modes(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    /// Shear coefficients `αᵢ·sᵢ + βᵢ` for a given input.
    pub fn shear_coefficients(&self, input: StepInput<'_>) -> Result<Vec<f64>> {
        let n = self.pairs.len();
        match input {
            StepInput::Scalar(s) => {
                if !s.is_finite() {
                    return Err(Error::invalid_argument("non-finite input"));
                }
                Ok(self.pairs.iter().map(|(a, b)| a * s + b).collect())
            }
            StepInput::Vector(v) => {
                if v.len() != n {
                    return Err(Error::invalid_argument(format!(
                        "input vector length {} does not match {} modes",
                        v.len(),
                        n
                    )));
                }
                if !v.iter().all(|s| s.is_finite()) {
                    return Err(Error::invalid_argument("non-finite input"));
                }
                Ok(self
                    .pairs
                    .iter()
                    .zip(v)
                    .map(|((a, b), s)| a * s + b)
                    .collect())
            }
        }
    }
}

/// A step input: a scalar broadcast to every mode through its own `(αᵢ, βᵢ)`,
/// or one value per mode.
#[derive(Clone, Copy, Debug)]
pub enum StepInput<'a> {
    Scalar(f64),
    Vector(&'a [f64]),
}

impl From<f64> for StepInput<'static> {
    fn from(s: f64) -> Self {
        StepInput::Scalar(s)
    }
}

impl<'a> From<&'a [f64]> for StepInput<'a> {
    fn from(v: &'a [f64]) -> Self {
        StepInput::Vector(v)
    }
}

/// Reservoir initial condition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialState {
    Vacuum,
    /// Product of coherent states with `⟨x̂ᵢ⟩ = amplitude`.
    CoherentX(f64),
}

/// Full reservoir hyperparameter set `(𝒢, T, α⃗, initial state)`.
#[derive(Clone, Debug)]
pub struct ReservoirConfig {
    pub graph: ClusterGraph,
    pub transmissivity: f64,
    pub encoding: EncodingConfig,
    pub initial_state: InitialState,
}

impl ReservoirConfig {
    pub fn new(
        graph: ClusterGraph,
        transmissivity: f64,
        encoding: EncodingConfig,
        initial_state: InitialState,
    ) -> Result<Self> {
        if !(transmissivity > 0.0 && transmissivity <= 1.0) {
            return Err(Error::invalid_argument(format!(
                "transmissivity must lie in (0, 1], got {transmissivity}"
            )));
        }
        if encoding.n_modes() != graph.n_modes() {
            return Err(Error::invalid_argument(format!(
                "encoding covers {} modes but graph has {}",
                encoding.n_modes(),
                graph.n_modes()
            )));
        }
        if let InitialState::CoherentX(a) = initial_state {
            if !a.is_finite() {
                return Err(Error::invalid_argument("coherent amplitude must be finite"));
            }
        }
        Ok(Self { graph, transmissivity, encoding, initial_state })
    }

    pub fn n_modes(&self) -> usize {
        self.graph.n_modes()
    }

    /// Number of second-order observables per step, `N(N+1)/2`.
    pub fn n_observables(&self) -> usize {
        let n = self.n_modes();
        n * (n + 1) / 2
    }

    pub fn initial_state(&self) -> GaussianState {
        match self.initial_state {
            InitialState::Vacuum => GaussianState::vacuum(self.n_modes()),
            InitialState::CoherentX(a) => GaussianState::coherent_x(self.n_modes(), a),
        }
        .expect("config was validated")
    }
}

/// The `N(N+1)/2` measured second-order x-moments of one time step: the upper
/// triangle of `O = Γ_meas + R_meas R_measᵀ`, row-major, diagonal first
/// within each row.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableRecord {
    pub step_index: usize,
    pub values: Vec<f64>,
}

impl ObservableRecord {
    /// Entry `⟨x̂ᵢx̂ⱼ⟩` for `i <= j` (0-based mode indices).
    pub fn moment(&self, n_modes: usize, i: usize, j: usize) -> f64 {
        assert!(i <= j && j < n_modes);
        // Offset of row i in the flattened upper triangle.
        let row_start = i * n_modes - i * (i + 1) / 2 + i;
        self.values[row_start + (j - i)]
    }
}

fn flatten_upper_triangle(o: &DMatrix<f64>) -> Vec<f64> {
    let n = o.nrows();
    let mut values = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            values.push(o[(i, j)]);
        }
    }
    values
}

/// The engineered multimode teleportation gate `U(s) = C_Z(𝒢) · F · D(αs+β)`.
pub fn build_step_gate(config: &ReservoirConfig, input: StepInput<'_>) -> Result<SymplecticGate> {
    let shear = shear_matrix(&config.encoding.shear_coefficients(input)?)?;
    let fourier = fourier_matrix(config.n_modes())?;
    cz_matrix(&config.graph).compose(&fourier)?.compose(&shear)
}

/// One reservoir step: returns the next (kept-path) state and the measured
/// second-order moments.
pub fn step(
    state: &GaussianState,
    config: &ReservoirConfig,
    input: StepInput<'_>,
) -> Result<(GaussianState, ObservableRecord)> {
    let n = config.n_modes();
    if state.n_modes() != n {
        return Err(Error::invalid_argument(format!(
            "state has {} modes but config expects {}",
            state.n_modes(),
            n
        )));
    }
    let t = config.transmissivity;
    let gate = build_step_gate(config, input)?;
    let u = gate.matrix();

    let transported_cov = u * state.cov() * u.transpose();
    let transported_mean = u * state.mean();

    // Kept path.
    let mut next_cov = &transported_cov * t;
    for i in 0..2 * n {
        next_cov[(i, i)] += 1.0 - t;
    }
    let next_mean = &transported_mean * t.sqrt();
    let next_state = GaussianState::from_parts_unchecked(next_cov, next_mean);

    // Measured path, x-quadratures only.
    let mut meas_cov = x_block_of(&transported_cov) * (1.0 - t);
    for i in 0..n {
        meas_cov[(i, i)] += t;
    }
    let meas_mean = x_part_of(&transported_mean) * (-(1.0 - t).sqrt());
    let second_moments = &meas_cov + &meas_mean * meas_mean.transpose();

    let values = flatten_upper_triangle(&second_moments);
    debug_assert!((0..n).all(|i| second_moments[(i, i)] >= 0.0));
    Ok((next_state, ObservableRecord { step_index: 0, values }))
}

/// Drives the reservoir through a scalar input sequence from the configured
/// initial state, discarding the first `washout` records.
pub fn run_sequence(
    config: &ReservoirConfig,
    inputs: &[f64],
    washout: usize,
) -> Result<Vec<ObservableRecord>> {
    if inputs.is_empty() {
        return Err(Error::invalid_argument("empty input sequence"));
    }
    if washout >= inputs.len() {
        return Err(Error::invalid_argument(format!(
            "washout {} must be smaller than the input length {}",
            washout,
            inputs.len()
        )));
    }
    let mut state = config.initial_state();
    let mut records = Vec::with_capacity(inputs.len() - washout);
    for (k, &s) in inputs.iter().enumerate() {
        let (next, mut record) = step(&state, config, StepInput::Scalar(s))?;
        state = next;
        if k >= washout {
            record.step_index = k;
            records.push(record);
        }
    }
    Ok(records)
}

/// One step from a fresh initial state (reset protocol for static tasks).
pub fn run_static(config: &ReservoirConfig, input_vector: &[f64]) -> Result<ObservableRecord> {
    let state = config.initial_state();
    let (_, record) = step(&state, config, StepInput::Vector(input_vector))?;
    Ok(record)
}

/// Runs a per-image column sequence from a fresh initial state, drops the
/// first `washout` step records and concatenates the rest into one flat
/// feature vector.
pub fn run_columns(
    config: &ReservoirConfig,
    column_sequence: &[Vec<f64>],
    washout: usize,
) -> Result<Vec<f64>> {
    if column_sequence.is_empty() {
        return Err(Error::invalid_argument("empty column sequence"));
    }
    if washout >= column_sequence.len() {
        return Err(Error::invalid_argument(format!(
            "washout {} must be smaller than the column count {}",
            washout,
            column_sequence.len()
        )));
    }
    let n = config.n_modes();
    if let Some(bad) = column_sequence.iter().find(|c| c.len() != n) {
        return Err(Error::invalid_argument(format!(
            "ragged column of length {} (expected {})",
            bad.len(),
            n
        )));
    }
    let mut state = config.initial_state();
    let mut features = Vec::with_capacity((column_sequence.len() - washout) * config.n_observables());
    for (k, column) in column_sequence.iter().enumerate() {
        let (next, record) = step(&state, config, StepInput::Vector(column))?;
        state = next;
        if k >= washout {
            features.extend_from_slice(&record.values);
        }
    }
    Ok(features)
}

/// How the worst-case shear entries of `A_max` are formed from `s_max`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LambdaMode {
    /// Entries `αᵢ·s_max + βᵢ`, the definition used throughout the tasks.
    #[default]
    Literal,
    /// Entries `max(|αᵢ·s_max + βᵢ|, |−αᵢ·s_max + βᵢ|)`; spectral radius is
    /// not monotone in entry sign, so the literal entry is not always the
    /// worst case.
    SignedWorstCase,
}

/// Spectral radius of `A_max = √T · C_Z · F · D_max`: the reservoir map is
/// contracting (fading memory and echo state property) iff this is below 1.
pub fn fading_memory_lambda(
    config: &ReservoirConfig,
    s_max: StepInput<'_>,
    mode: LambdaMode,
) -> Result<f64> {
    let nonneg = match s_max {
        StepInput::Scalar(s) => s >= 0.0,
        StepInput::Vector(v) => v.iter().all(|s| *s >= 0.0),
    };
    if !nonneg {
        return Err(Error::invalid_argument("s_max must be nonnegative"));
    }
    let mut coeffs = config.encoding.shear_coefficients(s_max)?;
    if mode == LambdaMode::SignedWorstCase {
        let flipped = match s_max {
            StepInput::Scalar(s) => config
                .encoding
                .shear_coefficients(StepInput::Scalar(-s))?,
            StepInput::Vector(v) => {
                let neg: Vec<f64> = v.iter().map(|s| -s).collect();
                config.encoding.shear_coefficients(StepInput::Vector(&neg))?
            }
        };
        for (c, f) in coeffs.iter_mut().zip(flipped) {
            *c = c.abs().max(f.abs());
        }
    }
    let gate = cz_matrix(&config.graph)
        .compose(&fourier_matrix(config.n_modes())?)?
        .compose(&shear_matrix(&coeffs)?)?;
    spectral_radius(&(gate.matrix() * config.transmissivity.sqrt()))
}

/// Test oracle: performs the same step but samples the x-homodyne outcome of
/// the measured beam-splitter path and returns the conditional kept-path
/// state. Ensemble-averaging many of these reproduces [`step`]'s mixed-state
/// update (law of total covariance).
pub fn conditional_step_oracle<R: Rng + ?Sized>(
    state: &GaussianState,
    config: &ReservoirConfig,
    input: StepInput<'_>,
    rng: &mut R,
) -> Result<GaussianState> {
    let n = config.n_modes();
    if state.n_modes() != n {
        return Err(Error::invalid_argument(format!(
            "state has {} modes but config expects {}",
            state.n_modes(),
            n
        )));
    }
    let dim = 2 * n;
    let t = config.transmissivity;
    let gate = build_step_gate(config, input)?;
    let u = gate.matrix();

    let gamma_u = u * state.cov() * u.transpose();
    let r_u = u * state.mean();

    // Joint (kept ⊕ measured) state after the beam splitter with vacuum:
    //   kept     = √T·reservoir + √(1−T)·vacuum
    //   measured = −√(1−T)·reservoir + √T·vacuum
    let st = t.sqrt();
    let sr = (1.0 - t).sqrt();
    let eye = DMatrix::<f64>::identity(dim, dim);

    let cov_kept = &gamma_u * t + &eye * (1.0 - t);
    let cov_meas = &gamma_u * (1.0 - t) + &eye * t;
    let cov_cross = (&eye - &gamma_u) * (st * sr);
    let mean_kept = &r_u * st;
    let mean_meas = &r_u * (-sr);

    // Measured x-quadrature marginal.
    let sigma = x_block_of(&cov_meas);
    let mu = x_part_of(&mean_meas);

    // Sample the homodyne outcome m ~ N(mu, sigma).
    let sqrt_sigma = match sigma.clone().cholesky() {
        Some(chol) => chol.l(),
        None => {
            // Near-singular marginal: eigen square root with clamped spectrum.
            let eig = sigma.clone().symmetric_eigen();
            let vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
            &eig.eigenvectors * DMatrix::from_diagonal(&vals)
        }
    };
    let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let outcome = &mu + &sqrt_sigma * z;

    // Columns of the kept-measured cross covariance against measured x rows.
    let cross_x = DMatrix::from_fn(dim, n, |r, k| cov_cross[(r, 2 * k)]);
    let sigma_pinv = sigma
        .clone()
        .pseudo_inverse(1e-12)
        .map_err(|e| Error::invalid_state(format!("measured x-block pseudo-inverse failed: {e}")))?;

    let gain = &cross_x * &sigma_pinv;
    let cond_cov = &cov_kept - &gain * cross_x.transpose();
    let cond_mean = &mean_kept + &gain * (&outcome - &mu);

    // Schur complements pick up tiny asymmetries; resymmetrize.
    let cond_cov = (&cond_cov + cond_cov.transpose()) * 0.5;
    Ok(GaussianState::from_parts_unchecked(cond_cov, cond_mean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::gaussian::{physicality_min_eigenvalue, PHYSICALITY_TOL};

    fn single_mode_free_config() -> ReservoirConfig {
        ReservoirConfig::new(
            ClusterGraph::custom(1, &[]).unwrap(),
            0.4,
            EncodingConfig::uniform(1, 0.0, 0.0).unwrap(),
            InitialState::Vacuum,
        )
        .unwrap()
    }

    fn two_mode_static_config(init: InitialState) -> ReservoirConfig {
        ReservoirConfig::new(
            ClusterGraph::chain(2).unwrap(),
            0.4,
            EncodingConfig::uniform(2, 1.0 / 3.0, 0.0).unwrap(),
            init,
        )
        .unwrap()
    }

    #[test]
    fn step_gate_reduces_to_fourier_without_couplings_or_encoding() {
        let config = single_mode_free_config();
        for s in [-2.0, 0.0, 5.5] {
            let gate = build_step_gate(&config, StepInput::Scalar(s)).unwrap();
            assert_eq!(*gate.matrix(), *fourier_matrix(1).unwrap().matrix());
        }
    }

    #[test]
    fn step_gate_single_mode_with_unit_encoding() {
        let config = ReservoirConfig::new(
            ClusterGraph::custom(1, &[]).unwrap(),
            0.4,
            EncodingConfig::uniform(1, 1.0, 0.0).unwrap(),
            InitialState::Vacuum,
        )
        .unwrap();
        let gate = build_step_gate(&config, StepInput::Scalar(1.0)).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[-1.0, -1.0, 1.0, 0.0]);
        assert_abs_diff_eq!(gate.matrix(), &expected, epsilon = 1e-15);
    }

    #[test]
    fn step_gate_two_mode_chain_at_zero_input() {
        let config = ReservoirConfig::new(
            ClusterGraph::chain(2).unwrap(),
            0.4,
            EncodingConfig::from_pairs(vec![(1.0 / 3.0, 0.0), (0.0, 0.0)]).unwrap(),
            InitialState::Vacuum,
        )
        .unwrap();
        let gate = build_step_gate(&config, StepInput::Scalar(0.0)).unwrap();
        let expected = cz_matrix(&config.graph)
            .compose(&fourier_matrix(2).unwrap())
            .unwrap();
        assert_eq!(*gate.matrix(), *expected.matrix());
    }

    #[test]
    fn step_gate_rejects_wrong_input_length() {
        let config = two_mode_static_config(InitialState::Vacuum);
        let v = [1.0, 2.0, 3.0];
        assert!(build_step_gate(&config, StepInput::Vector(&v)).is_err());
    }

    #[test]
    fn vacuum_is_a_fixed_point_of_the_free_step() {
        let config = single_mode_free_config();
        let vac = GaussianState::vacuum(1).unwrap();
        let (next, record) = step(&vac, &config, StepInput::Scalar(3.0)).unwrap();
        assert_abs_diff_eq!(next.cov(), vac.cov(), epsilon = 1e-15);
        assert_abs_diff_eq!(next.mean(), vac.mean(), epsilon = 1e-15);
        assert_eq!(record.values.len(), 1);
        assert_abs_diff_eq!(record.values[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn static_step_vacuum_matches_closed_form() {
        // Diagonal (1−T)α²sᵢ² + 1, no mode correlations.
        let config = two_mode_static_config(InitialState::Vacuum);
        let record = run_static(&config, &[1.0, 1.0]).unwrap();
        let diag = 0.6 / 9.0 + 1.0;
        assert_abs_diff_eq!(record.values[0], diag, epsilon = 1e-12);
        assert_abs_diff_eq!(record.values[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(record.values[2], diag, epsilon = 1e-12);
        assert_abs_diff_eq!(record.values[0], 1.0667, epsilon = 5e-5);
    }

    #[test]
    fn static_step_coherent_matches_closed_form() {
        // Diagonal 2(1−T)α²sᵢ² + 1 and cross term (1−T)α²s₁s₂.
        let config = two_mode_static_config(InitialState::CoherentX(1.0));
        let record = run_static(&config, &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(record.values[0], 2.0 * 0.6 / 9.0 + 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(record.values[1], 0.6 / 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(record.values[2], 2.0 * 0.6 / 9.0 + 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(record.values[0], 1.1333, epsilon = 5e-5);
        assert_abs_diff_eq!(record.values[1], 0.0667, epsilon = 5e-5);
    }

    #[test]
    fn static_step_zero_input_from_vacuum_gives_identity_moments() {
        let config = two_mode_static_config(InitialState::Vacuum);
        let record = run_static(&config, &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(record.values[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(record.values[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(record.values[2], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn static_step_zero_amplitude_coherent_equals_vacuum() {
        let a = run_static(&two_mode_static_config(InitialState::CoherentX(0.0)), &[1.0, 0.5]).unwrap();
        let b = run_static(&two_mode_static_config(InitialState::Vacuum), &[1.0, 0.5]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn step_rejects_dimension_mismatch() {
        let config = two_mode_static_config(InitialState::Vacuum);
        let state = GaussianState::vacuum(3).unwrap();
        assert!(step(&state, &config, StepInput::Scalar(0.0)).is_err());
    }

    #[test]
    fn records_match_independent_reimplementation() {
        // Straight elementwise evaluation of the measured-moment formulas.
        let config = ReservoirConfig::new(
            ClusterGraph::ring(4).unwrap(),
            0.3,
            EncodingConfig::from_pairs(vec![(0.1, 0.05), (-0.2, 0.0), (0.15, -0.1), (0.0, 0.2)])
                .unwrap(),
            InitialState::CoherentX(1.0),
        )
        .unwrap();
        let n = 4;
        let t = config.transmissivity;
        let mut state = config.initial_state();
        let inputs = [0.3, -0.9, 0.7, 0.0, 1.0];
        for &s in &inputs {
            let u = build_step_gate(&config, StepInput::Scalar(s)).unwrap();
            let um = u.matrix();
            let transported = um * state.cov() * um.transpose();
            let shifted = um * state.mean();
            let mut expected = Vec::new();
            for i in 0..n {
                for j in i..n {
                    let gamma = (1.0 - t) * transported[(2 * i, 2 * j)]
                        + if i == j { t } else { 0.0 };
                    let r = (1.0 - t) * shifted[2 * i] * shifted[2 * j];
                    expected.push(gamma + r);
                }
            }
            let (next, record) = step(&state, &config, StepInput::Scalar(s)).unwrap();
            for (got, want) in record.values.iter().zip(&expected) {
                assert_abs_diff_eq!(got, want, epsilon = 1e-12);
            }
            state = next;
        }
    }

    #[test]
    fn run_sequence_smoke_and_washout() {
        let config = two_mode_static_config(InitialState::Vacuum);
        let inputs = vec![0.0; 50];
        let records = run_sequence(&config, &inputs, 10).unwrap();
        assert_eq!(records.len(), 40);
        assert_eq!(records[0].step_index, 10);
        assert!(records.iter().all(|r| r.values.iter().all(|v| v.is_finite())));
    }

    #[test]
    fn run_sequence_free_single_mode_is_constant_one() {
        let config = single_mode_free_config();
        let records = run_sequence(&config, &[0.4, -1.0, 2.0, 0.0], 0).unwrap();
        for r in records {
            assert_abs_diff_eq!(r.values[0], 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn run_sequence_rejects_bad_arguments() {
        let config = single_mode_free_config();
        assert!(run_sequence(&config, &[], 0).is_err());
        assert!(run_sequence(&config, &[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn echo_state_trajectories_converge_when_contracting() {
        let config = ReservoirConfig::new(
            ClusterGraph::chain(3).unwrap(),
            0.4,
            EncodingConfig::from_pairs(vec![(0.15, -0.05), (-0.1, 0.1), (0.05, 0.0)]).unwrap(),
            InitialState::Vacuum,
        )
        .unwrap();
        let lambda =
            fading_memory_lambda(&config, StepInput::Scalar(1.0), LambdaMode::Literal).unwrap();
        assert!(lambda < 0.9, "test config must be contracting, got λ = {lambda}");

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let inputs: Vec<f64> = (0..300).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let mut a = GaussianState::vacuum(3).unwrap();
        let mut b = GaussianState::coherent_x(3, 1.0).unwrap();
        let mut converged = false;
        for (k, &s) in inputs.iter().enumerate() {
            a = step(&a, &config, StepInput::Scalar(s)).unwrap().0;
            b = step(&b, &config, StepInput::Scalar(s)).unwrap().0;
            let cov_gap = (a.cov() - b.cov())
                .iter()
                .fold(0.0f64, |acc, v| acc.max(v.abs()));
            let mean_gap = (a.mean() - b.mean())
                .iter()
                .fold(0.0f64, |acc, v| acc.max(v.abs()));
            if cov_gap < 1e-6 && mean_gap < 1e-6 {
                converged = true;
                assert!(k < 200, "converged only after {k} steps");
                break;
            }
        }
        assert!(converged, "trajectories never met below 1e-6");
    }

    #[test]
    fn vacuum_mean_stays_zero_so_moments_equal_measured_covariance() {
        let config = ReservoirConfig::new(
            ClusterGraph::chain(2).unwrap(),
            0.4,
            EncodingConfig::from_pairs(vec![(1.0 / 3.0, 0.0), (0.0, 0.0)]).unwrap(),
            InitialState::Vacuum,
        )
        .unwrap();
        let mut state = config.initial_state();
        for k in 0..100 {
            let s = if k % 3 == 0 { 1.0 } else { 0.0 };
            let (next, _) = step(&state, &config, StepInput::Scalar(s)).unwrap();
            state = next;
            assert_abs_diff_eq!(state.mean().norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn physicality_is_preserved_over_long_runs() {
        let config = ReservoirConfig::new(
            ClusterGraph::two_nn(5, 0.1).unwrap(),
            0.3,
            EncodingConfig::uniform(5, 0.1, 0.1).unwrap(),
            InitialState::CoherentX(1.0),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut state = config.initial_state();
        for k in 0..10_000 {
            let s: f64 = rng.gen_range(0.0..1.0);
            state = step(&state, &config, StepInput::Scalar(s)).unwrap().0;
            if k % 500 == 0 {
                assert!(physicality_min_eigenvalue(state.cov()) >= -PHYSICALITY_TOL);
            }
        }
        assert!(physicality_min_eigenvalue(state.cov()) >= -PHYSICALITY_TOL);
    }

    #[test]
    fn run_columns_feature_counts() {
        let config = ReservoirConfig::new(
            ClusterGraph::ring(14).unwrap(),
            0.3,
            EncodingConfig::uniform(14, 0.1, 0.1).unwrap(),
            InitialState::CoherentX(1.0),
        )
        .unwrap();
        let columns: Vec<Vec<f64>> = (0..14).map(|c| vec![c as f64 / 14.0; 14]).collect();
        assert_eq!(run_columns(&config, &columns, 1).unwrap().len(), 1365);
        assert_eq!(run_columns(&config, &columns, 0).unwrap().len(), 1470);
    }

    #[test]
    fn run_columns_rejects_ragged_input() {
        let config = ReservoirConfig::new(
            ClusterGraph::chain(3).unwrap(),
            0.4,
            EncodingConfig::uniform(3, 0.1, 0.0).unwrap(),
            InitialState::Vacuum,
        )
        .unwrap();
        let columns = vec![vec![0.0; 3], vec![0.0; 2]];
        assert!(run_columns(&config, &columns, 0).is_err());
    }

    #[test]
    fn lambda_of_free_single_mode_is_sqrt_t() {
        let config = single_mode_free_config();
        for s_max in [0.0, 1.0, 10.0] {
            let lambda =
                fading_memory_lambda(&config, StepInput::Scalar(s_max), LambdaMode::Literal)
                    .unwrap();
            assert_abs_diff_eq!(lambda, 0.4f64.sqrt(), epsilon = 1e-9);
            assert_abs_diff_eq!(lambda, 0.6325, epsilon = 5e-5);
        }
    }

    #[test]
    fn lambda_of_sheared_single_mode_matches_quadratic_roots() {
        let config = ReservoirConfig::new(
            ClusterGraph::custom(1, &[]).unwrap(),
            0.4,
            EncodingConfig::uniform(1, 1.0, 0.0).unwrap(),
            InitialState::Vacuum,
        )
        .unwrap();
        let lambda =
            fading_memory_lambda(&config, StepInput::Scalar(3.0), LambdaMode::Literal).unwrap();
        assert_abs_diff_eq!(lambda, 1.6557900792370613, epsilon = 1e-9);
        assert_abs_diff_eq!(lambda, 1.656, epsilon = 5e-4);
    }

    #[test]
    fn lambda_vanishes_with_transmissivity() {
        let mk = |t: f64| {
            ReservoirConfig::new(
                ClusterGraph::chain(3).unwrap(),
                t,
                EncodingConfig::uniform(3, 0.2, 0.1).unwrap(),
                InitialState::Vacuum,
            )
            .unwrap()
        };
        let mut last = f64::INFINITY;
        for t in [0.5, 0.1, 0.01, 1e-4] {
            let lambda =
                fading_memory_lambda(&mk(t), StepInput::Scalar(1.0), LambdaMode::Literal).unwrap();
            assert!(lambda < last);
            last = lambda;
        }
        assert!(last < 0.05);
    }

    #[test]
    fn strict_lambda_dominates_the_literal_entry_magnitudes() {
        // β < 0 makes the literal entry at +s_max smaller in magnitude than
        // the one at −s_max.
        let config = ReservoirConfig::new(
            ClusterGraph::custom(1, &[]).unwrap(),
            0.4,
            EncodingConfig::uniform(1, 1.0, -2.0).unwrap(),
            InitialState::Vacuum,
        )
        .unwrap();
        let literal =
            fading_memory_lambda(&config, StepInput::Scalar(1.0), LambdaMode::Literal).unwrap();
        let strict =
            fading_memory_lambda(&config, StepInput::Scalar(1.0), LambdaMode::SignedWorstCase)
                .unwrap();
        // Literal entry: 1·1 − 2 = −1; worst case |−1·1 − 2| = 3.
        assert!(strict > literal);
    }

    #[test]
    fn lambda_rejects_negative_s_max() {
        let config = single_mode_free_config();
        assert!(fading_memory_lambda(&config, StepInput::Scalar(-1.0), LambdaMode::Literal).is_err());
    }

    #[test]
    fn conditional_oracle_with_full_transmissivity_is_deterministic() {
        let config = ReservoirConfig::new(
            ClusterGraph::chain(2).unwrap(),
            1.0,
            EncodingConfig::uniform(2, 0.3, 0.1).unwrap(),
            InitialState::CoherentX(0.5),
        )
        .unwrap();
        let state = config.initial_state();
        let gate = build_step_gate(&config, StepInput::Scalar(0.7)).unwrap();
        let expected = state.apply_gate(&gate).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let got = conditional_step_oracle(&state, &config, StepInput::Scalar(0.7), &mut rng).unwrap();
        assert_abs_diff_eq!(got.cov(), expected.cov(), epsilon = 1e-10);
        assert_abs_diff_eq!(got.mean(), expected.mean(), epsilon = 1e-10);
    }

    #[test]
    fn conditional_oracle_ensemble_matches_mixed_state_update() {
        // Scaled-down version of the acceptance check: law of total
        // covariance over 20k conditional trajectories, 5% per entry.
        let config = ReservoirConfig::new(
            ClusterGraph::chain(2).unwrap(),
            0.4,
            EncodingConfig::uniform(2, 1.0 / 3.0, 0.0).unwrap(),
            InitialState::CoherentX(1.0),
        )
        .unwrap();
        let state = config.initial_state();
        let input = StepInput::Scalar(1.0);
        let (expected, _) = step(&state, &config, input).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let trials = 20_000;
        let dim = 4;
        let mut mean_acc = DVector::<f64>::zeros(dim);
        let mut cov_acc = DMatrix::<f64>::zeros(dim, dim);
        let mut outer_acc = DMatrix::<f64>::zeros(dim, dim);
        for _ in 0..trials {
            let cond = conditional_step_oracle(&state, &config, input, &mut rng).unwrap();
            mean_acc += cond.mean();
            cov_acc += cond.cov();
            outer_acc += cond.mean() * cond.mean().transpose();
        }
        let scale = 1.0 / trials as f64;
        let mean_hat = &mean_acc * scale;
        let total_cov = &cov_acc * scale + &outer_acc * scale - &mean_hat * mean_hat.transpose();

        for i in 0..dim {
            for j in 0..dim {
                let want = expected.cov()[(i, j)];
                let got = total_cov[(i, j)];
                let tol = 0.05 * want.abs().max(0.05);
                assert!(
                    (got - want).abs() < tol,
                    "cov entry ({i},{j}): got {got}, want {want}"
                );
            }
        }
        for i in 0..dim {
            let tol = 0.05 * expected.mean().norm().max(0.05);
            assert!((mean_hat[i] - expected.mean()[i]).abs() < tol);
        }
    }

    #[test]
    fn observable_record_moment_indexing() {
        let record = ObservableRecord { step_index: 0, values: vec![11.0, 12.0, 13.0, 22.0, 23.0, 33.0] };
        assert_eq!(record.moment(3, 0, 0), 11.0);
        assert_eq!(record.moment(3, 0, 2), 13.0);
        assert_eq!(record.moment(3, 1, 1), 22.0);
        assert_eq!(record.moment(3, 1, 2), 23.0);
        assert_eq!(record.moment(3, 2, 2), 33.0);
    }
}
