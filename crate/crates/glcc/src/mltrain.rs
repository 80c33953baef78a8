//! Coded training of `M` perceptrons at once.
//!
//! Each model predicts `y = 1` iff `(x.w)^2 > 1/2` and is trained on the
//! squared loss `((x.w)^2 - y)^2`, whose gradient is
//! `4 sum_rows x (x.w)^3 - x (x.w) y`. The sum is a degree-7 polynomial in
//! the quantized data and weights, so it can be computed by GLCC workers
//! without them learning the data.
//!
//! The data is encoded once. Because shares are coordinate-wise linear,
//! a worker builds the share of a mini-batch by picking the batch rows out
//! of its data share. Weights are encoded afresh every iteration.

use std::sync::Arc;

use glcc_core::glcc::{
    build_domain, Decoder, Dimensions, DomainLayout, Encoder, EvaluationDomain, GlccError, GlccParams, WorkerShare,
};
use glcc_core::program::{builtin_perceptron_gradient, ProgramInput};
use glcc_core::seed::{derive_seed, label};
use glcc_core::FieldElement;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::dataset::{mse_loss, predict_accuracy, ModelData, TrainingDataset};
use crate::quant::{dequantize, quantize, QuantConfig, QuantError};
use crate::sim::{self, SimConfig, SimError};

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error(transparent)]
    Quant(#[from] QuantError),
    #[error(transparent)]
    Glcc(#[from] GlccError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{0}")]
    Config(String),
    #[error("iteration {0}: not enough workers answered")]
    Stalled(usize),
}

/// Whether gradients go through the code or are evaluated directly on the
/// quantized batch. Both follow the same virtual clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrainMode {
    #[default]
    Coded,
    Plaintext,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub iterations: usize,
    pub batch: usize,
    pub learning_rate: f64,
    /// Heavy-ball coefficient; 0 gives plain mini-batch SGD.
    pub momentum: f64,
    /// Standard deviation of the initial weights.
    pub init_scale: f64,
    /// Declared `max |x|` of the features.
    pub feature_bound: f64,
    /// Weights must stay within this magnitude; part of the overflow guard.
    pub weight_bound: f64,
    pub quant: QuantConfig,
    pub mode: TrainMode,
}

impl TrainConfig {
    /// The settings the synthetic benchmark uses, over `2^61 - 1`.
    pub fn synthetic_default() -> Self {
        TrainConfig {
            iterations: 300,
            batch: 32,
            learning_rate: 0.2,
            momentum: 0.0,
            init_scale: 0.3,
            feature_bound: 1.0,
            weight_bound: 4.0,
            quant: QuantConfig {
                l_x: 5,
                l_w: 6,
                modulus: glcc_core::PrimeModulus::new((1 << 61) - 1).expect("Mersenne prime"),
            },
            mode: TrainMode::Coded,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryRow {
    pub iteration: usize,
    /// Mean over models of the training MSE after the update.
    pub loss: f64,
    /// Mean over models of the training accuracy after the update.
    pub accuracy: f64,
    /// Virtual time at which the master had the gradient.
    pub latency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub batch: Vec<usize>,
    /// Field gradients, one vector per model.
    pub gradients: Vec<Vec<FieldElement>>,
    pub latency: f64,
    /// Largest gap between the dequantized gradient and the exact real
    /// gradient at the same weights.
    pub quantization_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub weights: Vec<Vec<f64>>,
    pub history: Vec<HistoryRow>,
    pub max_quantization_gap: f64,
}

/// Per-model data in the field: `X` row-major, then `y`.
struct QuantizedModel {
    x: Vec<FieldElement>,
    y: Vec<FieldElement>,
}

pub struct Trainer<'a> {
    dataset: &'a TrainingDataset,
    cfg: TrainConfig,
    sim: SimConfig,
    params: GlccParams,
    domain: EvaluationDomain,
    encoder: Encoder,
    quantized: Vec<QuantizedModel>,
    data_shares: Vec<WorkerShare>,
    weights: Vec<Vec<f64>>,
    velocity: Vec<Vec<f64>>,
    iteration: usize,
    seed: u64,
    batch_rng: ChaCha20Rng,
    noise_rng: ChaCha20Rng,
    delay_rng: ChaCha20Rng,
}

/// Draws the initial weights, `N(0, init_scale^2)` per entry.
pub fn initial_weights(models: usize, features: usize, init_scale: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, label("init")));
    let normal = Normal::new(0.0, init_scale.abs()).expect("finite scale");
    (0..models).map(|_| (0..features).map(|_| normal.sample(&mut rng)).collect()).collect()
}

impl<'a> Trainer<'a> {
    /// `dims.inputs` must equal the number of models in `dataset`.
    pub fn new(
        dataset: &'a TrainingDataset,
        dims: Dimensions,
        layout: DomainLayout,
        cfg: TrainConfig,
        sim: SimConfig,
        seed: u64,
    ) -> Result<Self, TrainError> {
        let (m, s, d) = (dataset.models.len(), dataset.rows(), dataset.features());
        if dims.inputs != m {
            return Err(TrainError::Config(format!("M={} but the dataset holds {m} models", dims.inputs)));
        }
        if cfg.batch == 0 || cfg.batch > s {
            return Err(TrainError::Config(format!("batch size {} must be in 1..={s}", cfg.batch)));
        }
        if !(cfg.learning_rate.is_finite() && cfg.momentum.is_finite() && cfg.init_scale.is_finite()) {
            return Err(TrainError::Config("learning rate, momentum and init scale must be finite".into()));
        }
        for (row, &v) in dataset.models.iter().flat_map(|md| md.x.iter().flatten()).enumerate() {
            if v.abs() > cfg.feature_bound {
                return Err(QuantError::FeatureOutOfRange { row: row / d, value: v, bound: cfg.feature_bound }.into());
            }
        }
        cfg.quant.check_gradient_bound(cfg.batch, d, cfg.feature_bound, cfg.weight_bound)?;
        sim.straggler.validate()?;
        let program = Arc::new(builtin_perceptron_gradient(cfg.batch, d));
        let params = GlccParams::new(dims, cfg.quant.modulus, program)?;
        sim.adversary.validate(&params)?;
        let domain = build_domain(&params, layout)?;
        let encoder = Encoder::new(&params, &domain)?;

        let q = cfg.quant.modulus;
        let quantized = dataset
            .models
            .iter()
            .map(|md| {
                let x = md.x.iter().flatten().map(|&v| quantize(v, cfg.quant.l_x, q)).collect::<Result<_, _>>()?;
                let y = md.y.iter().map(|&v| quantize(v as f64, cfg.quant.l_y(), q)).collect::<Result<_, _>>()?;
                Ok(QuantizedModel { x, y })
            })
            .collect::<Result<Vec<_>, QuantError>>()?;

        let mut noise_rng = sim::noise_rng(seed);
        let data_shares = match cfg.mode {
            TrainMode::Coded => {
                let rows: Vec<Vec<FieldElement>> =
                    quantized.iter().map(|qm| qm.x.iter().chain(&qm.y).copied().collect()).collect();
                let refs: Vec<&[FieldElement]> = rows.iter().map(Vec::as_slice).collect();
                encoder.encode_values(&refs, &mut noise_rng)?
            }
            TrainMode::Plaintext => Vec::new(),
        };
        let weights = initial_weights(m, d, cfg.init_scale, seed);
        Ok(Trainer {
            dataset,
            velocity: vec![vec![0.0; d]; m],
            sim,
            params,
            domain,
            encoder,
            quantized,
            data_shares,
            weights,
            iteration: 0,
            batch_rng: ChaCha20Rng::seed_from_u64(derive_seed(seed, label("batch"))),
            delay_rng: sim::delay_rng(seed),
            noise_rng,
            seed,
            cfg,
        })
    }

    pub fn params(&self) -> &GlccParams {
        &self.params
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Replaces the current weights, e.g. to start from a given point.
    pub fn set_weights(&mut self, weights: Vec<Vec<f64>>) {
        assert_eq!(weights.len(), self.weights.len());
        self.weights = weights;
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// The program input of model `m` for a batch at the current weights.
    pub fn batch_input(&self, m: usize, batch: &[usize], w: &[FieldElement]) -> ProgramInput {
        let d = self.dataset.features();
        let qm = &self.quantized[m];
        let x = batch.iter().flat_map(|&i| qm.x[i * d..(i + 1) * d].iter().copied()).collect();
        let y = batch.iter().map(|&i| qm.y[i]).collect();
        self.params.program().input_from_tensors(&[x, y, w.to_vec()]).expect("shapes follow the program")
    }

    fn quantized_weights(&self) -> Result<Vec<Vec<FieldElement>>, QuantError> {
        let (bound, q, l_w) = (self.cfg.weight_bound, self.cfg.quant.modulus, self.cfg.quant.l_w);
        self.weights
            .iter()
            .enumerate()
            .map(|(m, w)| {
                w.iter()
                    .enumerate()
                    .map(|(index, &value)| {
                        if value.is_nan() || value.abs() > bound {
                            return Err(QuantError::WeightOutOfRange { model: m, index, value, bound });
                        }
                        quantize(value, l_w, q)
                    })
                    .collect()
            })
            .collect()
    }

    /// Share of worker `n` for the batch: the batch rows of its data share
    /// followed by its weight share.
    fn batch_share(&self, n: usize, batch: &[usize], w_share: &WorkerShare) -> WorkerShare {
        let (s, d) = (self.dataset.rows(), self.dataset.features());
        let data = &self.data_shares[n];
        let values = data
            .values
            .iter()
            .zip(&w_share.values)
            .map(|(v, w)| {
                let x = batch.iter().flat_map(|&i| v[i * d..(i + 1) * d].iter().copied());
                let y = batch.iter().map(|&i| v[s * d + i]);
                x.chain(y).chain(w.iter().copied()).collect()
            })
            .collect();
        WorkerShare { worker: n, groups: data.groups, values }
    }

    /// One iteration: quantize and share the weights, collect the fastest
    /// responses, decode the gradients and apply
    /// `w <- w - (4 eta / m) Q^-1(gradient)` with `m` the batch size.
    pub fn step(&mut self) -> Result<StepReport, TrainError> {
        let (s, b) = (self.dataset.rows(), self.cfg.batch);
        let batch = sample(&mut self.batch_rng, s, b).into_vec();
        let wq = self.quantized_weights()?;
        let delays = sim::sample_delays(&self.sim.straggler, self.params.workers(), &mut self.delay_rng);
        let tl = sim::timeline(&self.params, &delays, &self.sim.cost, self.sim.mode);
        let latency = tl.decode_time.ok_or(TrainError::Stalled(self.iteration + 1))?;

        let gradients = match self.cfg.mode {
            TrainMode::Plaintext => (0..wq.len())
                .map(|m| self.params.program().eval(&self.batch_input(m, &batch, &wq[m])))
                .collect::<Result<Vec<_>, _>>()
                .map_err(GlccError::from)?,
            TrainMode::Coded => self.coded_gradients(&batch, &wq, &tl)?,
        };

        let l_out = self.cfg.quant.l_out();
        let scale = 4.0 * self.cfg.learning_rate / b as f64;
        let mut gap: f64 = 0.0;
        for (m, grad) in gradients.iter().enumerate() {
            let real = real_gradient(&self.dataset.models[m], &batch, &self.weights[m]);
            for (j, g) in grad.iter().enumerate() {
                let g = dequantize(*g, l_out);
                gap = gap.max((g - real[j]).abs());
                self.velocity[m][j] = self.cfg.momentum * self.velocity[m][j] + g;
                self.weights[m][j] -= scale * self.velocity[m][j];
            }
        }
        self.iteration += 1;
        Ok(StepReport { batch, gradients, latency, quantization_gap: gap })
    }

    fn coded_gradients(
        &mut self,
        batch: &[usize],
        wq: &[Vec<FieldElement>],
        tl: &sim::Timeline,
    ) -> Result<Vec<Vec<FieldElement>>, TrainError> {
        let refs: Vec<&[FieldElement]> = wq.iter().map(Vec::as_slice).collect();
        let w_shares = self.encoder.encode_values(&refs, &mut self.noise_rng)?;
        let consumed = &tl.arrivals[..tl.consumed];
        let mut needed: Vec<usize> = consumed.iter().map(|&(w, _)| w).collect();
        needed.sort_unstable();
        needed.dedup();
        let mut shares: Vec<WorkerShare> = w_shares.clone();
        for &n in &needed {
            shares[n] = self.batch_share(n, batch, &w_shares[n]);
        }
        let mut received = sim::respond(&self.params, &self.domain, &shares, consumed)?;
        let corrupted = sim::corrupt_set(&self.sim.adversary, &tl.arrivals);
        let round_seed = derive_seed(self.seed, self.iteration as u64);
        let mut adv_rng = sim::adversary_rng(round_seed);
        sim::corrupt(&mut received, &corrupted, self.sim.adversary.strategy, &self.params, &mut adv_rng);
        let decoder = Decoder::new(&self.params, &self.domain, self.sim.mode)?;
        Ok(decoder.decode(&received)?.outputs)
    }

    /// Mean loss and accuracy over the models at the current weights.
    pub fn evaluate(&self) -> (f64, f64) {
        let m = self.weights.len() as f64;
        let (mut loss, mut acc) = (0.0, 0.0);
        for (w, data) in self.weights.iter().zip(&self.dataset.models) {
            loss += mse_loss(w, data);
            acc += predict_accuracy(w, data);
        }
        (loss / m, acc / m)
    }

    pub fn run(mut self) -> Result<TrainOutcome, TrainError> {
        let mut history = Vec::with_capacity(self.cfg.iterations);
        let mut max_gap: f64 = 0.0;
        for _ in 0..self.cfg.iterations {
            let report = self.step()?;
            max_gap = max_gap.max(report.quantization_gap);
            let (loss, accuracy) = self.evaluate();
            history.push(HistoryRow { iteration: self.iteration, loss, accuracy, latency: report.latency });
        }
        Ok(TrainOutcome { weights: self.weights, history, max_quantization_gap: max_gap })
    }
}

/// `sum_rows x (x.w)^3 - x (x.w) y` over the batch, in reals.
pub fn real_gradient(data: &ModelData, batch: &[usize], w: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; w.len()];
    for &i in batch {
        let x = &data.x[i];
        let z: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum();
        let c = z * z * z - z * data.y[i] as f64;
        g.iter_mut().zip(x).for_each(|(gj, xj)| *gj += c * xj);
    }
    g
}

/// Runs a full training job.
pub fn train(
    dataset: &TrainingDataset,
    dims: Dimensions,
    layout: DomainLayout,
    cfg: TrainConfig,
    sim: SimConfig,
    seed: u64,
) -> Result<TrainOutcome, TrainError> {
    Trainer::new(dataset, dims, layout, cfg, sim, seed)?.run()
}

/// Default GLCC shape for training `models` perceptrons: `G = M`, `L = 1`,
/// `T = 1`, `A = 0`, with three spare workers above the threshold.
pub fn default_training_dims(models: usize) -> Dimensions {
    let mut dims =
        Dimensions { workers: 0, inputs: models, collusion: 1, adversaries: 0, groups: models, sub_responses: 1 };
    dims.workers = dims.recovery_threshold(7) + 3;
    dims
}

pub fn write_history<W: std::io::Write>(rows: &[HistoryRow], writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic;
    use crate::sim::StragglerModel;

    fn small_cfg() -> TrainConfig {
        TrainConfig { iterations: 20, batch: 8, ..TrainConfig::synthetic_default() }
    }

    #[test]
    fn coded_matches_plaintext() {
        let (ds, _) = synthetic(2, 40, 4, 1);
        let sim = SimConfig { straggler: StragglerModel::Exponential { lambda: 2.0 }, ..SimConfig::default() };
        let dims = default_training_dims(2);
        let coded = train(&ds, dims, DomainLayout::Sequential, small_cfg(), sim.clone(), 5).unwrap();
        let plain_cfg = TrainConfig { mode: TrainMode::Plaintext, ..small_cfg() };
        let plain = train(&ds, dims, DomainLayout::Sequential, plain_cfg, sim, 5).unwrap();
        assert_eq!(coded, plain);
    }

    #[test]
    fn zero_weights_and_zero_rate_stay_put() {
        let (ds, _) = synthetic(2, 40, 4, 2);
        let dims = default_training_dims(2);
        let zero = TrainConfig { init_scale: 0.0, ..small_cfg() };
        let out = train(&ds, dims, DomainLayout::Sequential, zero, SimConfig::default(), 1).unwrap();
        assert!(out.weights.iter().flatten().all(|&w| w == 0.0));
        let frozen = TrainConfig { learning_rate: 0.0, ..small_cfg() };
        let out = train(&ds, dims, DomainLayout::Sequential, frozen, SimConfig::default(), 1).unwrap();
        assert_eq!(out.weights, initial_weights(2, 4, 0.3, 1));
    }

    #[test]
    fn one_step_by_hand() {
        // two points, one feature, one model, batch of both
        let ds = TrainingDataset {
            feature_names: vec!["a".into()],
            models: vec![ModelData { x: vec![vec![0.5], vec![-1.0]], y: vec![1, 0] }],
        };
        let dims = Dimensions { workers: 10, inputs: 1, collusion: 1, adversaries: 0, groups: 1, sub_responses: 1 };
        let cfg = TrainConfig { iterations: 1, batch: 2, learning_rate: 0.1, ..TrainConfig::synthetic_default() };
        let mut t = Trainer::new(&ds, dims, DomainLayout::Sequential, cfg, SimConfig::default(), 3).unwrap();
        t.set_weights(vec![vec![0.75]]);
        t.step().unwrap();
        // quantized values are exact here: x.w = 0.375 and -0.75
        let g = 0.5 * (0.375f64.powi(3) - 0.375) - (-0.75f64).powi(3);
        assert_eq!(t.weights()[0][0], 0.75 - 4.0 * 0.1 / 2.0 * g);
    }

    #[test]
    fn weight_bound_violation_reports_magnitude() {
        let (ds, _) = synthetic(2, 40, 4, 2);
        let mut t =
            Trainer::new(&ds, default_training_dims(2), DomainLayout::Sequential, small_cfg(), SimConfig::default(), 1)
                .unwrap();
        t.set_weights(vec![vec![0.0, 9.5, 0.0, 0.0], vec![0.0; 4]]);
        match t.step() {
            Err(TrainError::Quant(QuantError::WeightOutOfRange { value, model: 0, index: 1, .. })) => {
                assert_eq!(value, 9.5)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let (ds, _) = synthetic(2, 40, 4, 2);
        let dims = default_training_dims(2);
        let cfg = TrainConfig { batch: 41, ..small_cfg() };
        assert!(Trainer::new(&ds, dims, DomainLayout::Sequential, cfg, SimConfig::default(), 1).is_err());
        let cfg = TrainConfig { batch: 40, weight_bound: 100.0, ..small_cfg() };
        assert!(matches!(
            Trainer::new(&ds, dims, DomainLayout::Sequential, cfg, SimConfig::default(), 1),
            Err(TrainError::Quant(QuantError::GradientBound { .. }))
        ));
        let dims3 = default_training_dims(3);
        assert!(Trainer::new(&ds, dims3, DomainLayout::Sequential, small_cfg(), SimConfig::default(), 1).is_err());
        let cfg = TrainConfig { feature_bound: 0.5, ..small_cfg() };
        assert!(matches!(
            Trainer::new(&ds, dims, DomainLayout::Sequential, cfg, SimConfig::default(), 1),
            Err(TrainError::Quant(QuantError::FeatureOutOfRange { .. }))
        ));
    }

    #[test]
    fn default_dims_threshold() {
        let d = default_training_dims(2);
        // (6(M - G) + GM) / (GL) + 7T with M = G = 2
        assert_eq!(d.recovery_threshold(7), 9);
        assert_eq!(d.workers, 12);
    }
}
