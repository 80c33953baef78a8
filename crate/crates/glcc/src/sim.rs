//! Virtual-time master/worker simulation.
//!
//! Delays are plain numbers (seconds of simulated time). A round encodes a
//! dataset, lets every worker finish at `compute + delay`, hands the
//! master the sub-responses in arrival order, and decodes as soon as the
//! collection rule is met. Nothing sleeps; rounds are exact and
//! reproducible from their seed.

use std::cmp::Ordering;

use glcc_core::glcc::{
    build_domain, encode, CollectionMode, Decoder, DomainLayout, EvaluationDomain, GlccError, GlccParams, SubResponse,
    Worker, WorkerShare,
};
use glcc_core::program::ProgramInput;
use glcc_core::seed::{derive_seed, label};
use glcc_core::FieldElement;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Glcc(#[from] GlccError),
    #[error("invalid straggler model: {0}")]
    Straggler(String),
    #[error("{count} adversaries requested but the code tolerates A={budget}")]
    TooManyAdversaries { count: usize, budget: usize },
    #[error("adversary worker {0} does not exist")]
    UnknownWorker(usize),
    #[error("expected {expected} delays, got {got}")]
    DelayCount { expected: usize, got: usize },
    #[error("campaign needs at least one scenario")]
    NoScenarios,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum StragglerModel {
    #[default]
    None,
    /// Each worker independently stalls for `delay` with probability `p`.
    Fixed { p: f64, delay: f64 },
    /// I.i.d. exponential delays with rate `lambda`.
    Exponential { lambda: f64 },
}

impl StragglerModel {
    pub fn validate(&self) -> Result<(), SimError> {
        match *self {
            StragglerModel::None => Ok(()),
            StragglerModel::Fixed { p, delay } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(SimError::Straggler(format!("probability {p} outside [0, 1]")));
                }
                if delay.is_nan() || delay < 0.0 {
                    return Err(SimError::Straggler(format!("delay {delay} must be nonnegative")));
                }
                Ok(())
            }
            StragglerModel::Exponential { lambda } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(SimError::Straggler(format!("rate {lambda} must be positive")));
                }
                Ok(())
            }
        }
    }
}

/// One delay per worker. Every model consumes exactly one draw per worker,
/// and a draw maps monotonically to a delay, so runs with different delay
/// parameters but the same seed are coupled.
pub fn sample_delays<R: Rng + ?Sized>(model: &StragglerModel, workers: usize, rng: &mut R) -> Vec<f64> {
    (0..workers)
        .map(|_| match *model {
            StragglerModel::None => {
                let _: f64 = rng.random();
                0.0
            }
            StragglerModel::Fixed { p, delay } => {
                let u: f64 = rng.random();
                if u < p {
                    delay
                } else {
                    0.0
                }
            }
            StragglerModel::Exponential { lambda } => {
                let e: f64 = rng.sample(Exp1);
                e / lambda
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// The `count` workers that answer first.
    Fastest(usize),
    Workers(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Every coordinate replaced by a uniform field element.
    RandomValue,
    /// Every coordinate replaced by this constant (reduced mod q).
    FixedValue(u64),
    /// Lowest bit of one random coordinate flipped.
    BitflipOneCoordinate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdversaryModel {
    pub placement: Placement,
    pub strategy: Strategy,
}

impl AdversaryModel {
    pub fn none() -> Self {
        AdversaryModel { placement: Placement::Fastest(0), strategy: Strategy::RandomValue }
    }

    pub fn count(&self) -> usize {
        match &self.placement {
            Placement::Fastest(c) => *c,
            Placement::Workers(w) => w.len(),
        }
    }

    pub fn validate(&self, params: &GlccParams) -> Result<(), SimError> {
        if self.count() > params.adversaries() {
            return Err(SimError::TooManyAdversaries { count: self.count(), budget: params.adversaries() });
        }
        if let Placement::Workers(ws) = &self.placement {
            if let Some(&bad) = ws.iter().find(|&&w| w >= params.workers()) {
                return Err(SimError::UnknownWorker(bad));
            }
        }
        Ok(())
    }
}

impl Default for AdversaryModel {
    fn default() -> Self {
        Self::none()
    }
}

/// Each worker spends `unit_cost` per evaluation of `phi`, `GL` in total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostModel {
    pub unit_cost: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel { unit_cost: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SimConfig {
    pub straggler: StragglerModel,
    pub adversary: AdversaryModel,
    pub cost: CostModel,
    #[serde(serialize_with = "ser_mode")]
    pub mode: CollectionMode,
}

fn ser_mode<S: serde::Serializer>(m: &CollectionMode, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(mode_name(*m))
}

pub fn mode_name(m: CollectionMode) -> &'static str {
    match m {
        CollectionMode::AllOrNothing => "all-or-nothing",
        CollectionMode::Streaming => "streaming",
    }
}

/// When each sub-response reaches the master and when decoding can start.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub base_compute: Vec<f64>,
    pub delays: Vec<f64>,
    /// `[n][l]`
    pub completion: Vec<Vec<f64>>,
    /// `(worker, index)` sorted by completion time, then worker, then index.
    /// Sub-responses that never arrive are left out.
    pub arrivals: Vec<(usize, usize)>,
    /// How many leading arrivals the master consumes.
    pub consumed: usize,
    /// `None` when the collection rule is never met.
    pub decode_time: Option<f64>,
}

/// Lays out one round. In all-or-nothing mode a worker delivers all `L`
/// sub-responses after `GL` evaluations; in streaming mode the `l`-th one
/// leaves after `G(l+1)` evaluations.
pub fn timeline(params: &GlccParams, delays: &[f64], cost: &CostModel, mode: CollectionMode) -> Timeline {
    let (n, g, l_count) = (params.workers(), params.groups(), params.sub_responses());
    let base = (g * l_count) as f64 * cost.unit_cost;
    let completion: Vec<Vec<f64>> = delays
        .iter()
        .map(|&d| {
            (0..l_count)
                .map(|l| match mode {
                    CollectionMode::AllOrNothing => base + d,
                    CollectionMode::Streaming => (g * (l + 1)) as f64 * cost.unit_cost + d,
                })
                .collect()
        })
        .collect();
    let mut arrivals: Vec<(usize, usize)> =
        (0..n).flat_map(|w| (0..l_count).map(move |l| (w, l))).filter(|&(w, l)| completion[w][l].is_finite()).collect();
    arrivals.sort_by(|&(wa, la), &(wb, lb)| {
        completion[wa][la].partial_cmp(&completion[wb][lb]).unwrap_or(Ordering::Equal).then((wa, la).cmp(&(wb, lb)))
    });
    let consumed = match mode {
        CollectionMode::AllOrNothing => params.recovery_threshold() * l_count,
        CollectionMode::Streaming => params.sub_responses_needed(),
    };
    let decode_time = (consumed <= arrivals.len()).then(|| {
        let (w, l) = arrivals[consumed - 1];
        completion[w][l]
    });
    Timeline { base_compute: vec![base; n], delays: delays.to_vec(), completion, arrivals, consumed, decode_time }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundOutcome {
    /// Decoded and equal to the direct evaluation.
    Exact,
    /// Decoded to something else. Never happens within the adversary
    /// budget; kept so that a broken configuration is visible.
    Mismatch,
    /// More corruption than the decoder could fix.
    DecodeFailed,
    /// Not enough sub-responses ever arrived.
    Insufficient,
}

impl RoundOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            RoundOutcome::Exact => "exact",
            RoundOutcome::Mismatch => "mismatch",
            RoundOutcome::DecodeFailed => "decode-failed",
            RoundOutcome::Insufficient => "insufficient",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::Exact, Self::Mismatch, Self::DecodeFailed, Self::Insufficient].into_iter().find(|o| o.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundTranscript {
    pub seed: u64,
    pub threshold: usize,
    pub timeline: Timeline,
    pub outcome: RoundOutcome,
    pub corrupted_workers: Vec<usize>,
    pub flagged_workers: Vec<usize>,
    /// Field elements sent to workers.
    pub uploaded: usize,
    /// Field elements the master consumed.
    pub downloaded: usize,
    /// SHA-256 of each worker's share.
    pub share_digests: Vec<[u8; 32]>,
    /// The sub-responses the master consumed, as received.
    pub received: Vec<SubResponse>,
    pub outputs: Option<Vec<Vec<FieldElement>>>,
}

impl RoundTranscript {
    /// Virtual latency; infinite if the round never decoded.
    pub fn latency(&self) -> f64 {
        match self.outcome {
            RoundOutcome::Exact | RoundOutcome::Mismatch => self.timeline.decode_time.unwrap_or(f64::INFINITY),
            _ => f64::INFINITY,
        }
    }
}

/// SHA-256 over the little-endian share values in `(l, g, coordinate)`
/// order.
pub fn share_digest(share: &WorkerShare) -> [u8; 32] {
    let mut h = Sha256::new();
    for v in share.values.iter().flatten() {
        h.update(v.value().to_le_bytes());
    }
    h.finalize().into()
}

pub fn noise_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(derive_seed(seed, label("noise")))
}

pub fn delay_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(derive_seed(seed, label("delays")))
}

pub(crate) fn adversary_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(derive_seed(seed, label("adversary")))
}

/// Runs one round with delays drawn from the straggler model.
pub fn run_round(
    dataset: &[ProgramInput],
    params: &GlccParams,
    domain: &EvaluationDomain,
    sim: &SimConfig,
    seed: u64,
) -> Result<RoundTranscript, SimError> {
    sim.straggler.validate()?;
    let delays = sample_delays(&sim.straggler, params.workers(), &mut delay_rng(seed));
    run_round_with_delays(dataset, params, domain, sim, &delays, seed)
}

/// Runs one round with explicit per-worker delays; `f64::INFINITY` models a
/// worker that never answers.
pub fn run_round_with_delays(
    dataset: &[ProgramInput],
    params: &GlccParams,
    domain: &EvaluationDomain,
    sim: &SimConfig,
    delays: &[f64],
    seed: u64,
) -> Result<RoundTranscript, SimError> {
    sim.adversary.validate(params)?;
    if delays.len() != params.workers() {
        return Err(SimError::DelayCount { expected: params.workers(), got: delays.len() });
    }
    let shares = encode(dataset, params, domain, &mut noise_rng(seed))?;
    let share_digests = shares.iter().map(share_digest).collect();
    let uploaded = shares.iter().map(WorkerShare::element_count).sum();
    let timeline = timeline(params, delays, &sim.cost, sim.mode);
    let mut transcript = RoundTranscript {
        seed,
        threshold: params.recovery_threshold(),
        timeline,
        outcome: RoundOutcome::Insufficient,
        corrupted_workers: Vec::new(),
        flagged_workers: Vec::new(),
        uploaded,
        downloaded: 0,
        share_digests,
        received: Vec::new(),
        outputs: None,
    };
    if transcript.timeline.decode_time.is_none() {
        return Ok(transcript);
    }

    let consumed = &transcript.timeline.arrivals[..transcript.timeline.consumed];
    let corrupted = corrupt_set(&sim.adversary, &transcript.timeline.arrivals);
    let mut received = respond(params, domain, &shares, consumed)?;
    corrupt(&mut received, &corrupted, sim.adversary.strategy, params, &mut adversary_rng(seed));
    transcript.corrupted_workers = corrupted;
    transcript.downloaded = received.iter().map(|r| r.value.len()).sum();

    let decoder = Decoder::new(params, domain, sim.mode)?;
    match decoder.decode(&received) {
        Ok(outcome) => {
            let oracle = dataset
                .iter()
                .map(|x| params.program().eval(x))
                .collect::<Result<Vec<_>, _>>()
                .map_err(GlccError::from)?;
            transcript.outcome = if outcome.outputs == oracle { RoundOutcome::Exact } else { RoundOutcome::Mismatch };
            debug_assert_eq!(transcript.outcome, RoundOutcome::Exact, "decoder returned a wrong answer");
            transcript.flagged_workers = outcome.flagged_workers;
            transcript.outputs = Some(outcome.outputs);
        }
        Err(GlccError::DecodeFailure { .. }) => transcript.outcome = RoundOutcome::DecodeFailed,
        Err(e) => return Err(e.into()),
    }
    transcript.received = received;
    Ok(transcript)
}

/// Evaluates the requested `(worker, index)` sub-responses in order.
pub fn respond(
    params: &GlccParams,
    domain: &EvaluationDomain,
    shares: &[WorkerShare],
    wanted: &[(usize, usize)],
) -> Result<Vec<SubResponse>, GlccError> {
    let mut workers: Vec<Option<Worker<'_>>> = (0..params.workers()).map(|_| None).collect();
    wanted
        .iter()
        .map(|&(w, l)| {
            if workers[w].is_none() {
                workers[w] = Some(Worker::new(params, domain, w)?);
            }
            workers[w].as_ref().expect("just built").respond_one(&shares[w], l)
        })
        .collect()
}

pub(crate) fn corrupt_set(model: &AdversaryModel, arrivals: &[(usize, usize)]) -> Vec<usize> {
    let mut set = match &model.placement {
        Placement::Workers(ws) => ws.clone(),
        Placement::Fastest(count) => {
            let mut order: Vec<usize> = Vec::new();
            for &(w, _) in arrivals {
                if order.len() == *count {
                    break;
                }
                if !order.contains(&w) {
                    order.push(w);
                }
            }
            order
        }
    };
    set.sort_unstable();
    set.dedup();
    set
}

pub(crate) fn corrupt<R: Rng + ?Sized>(
    responses: &mut [SubResponse],
    workers: &[usize],
    strategy: Strategy,
    params: &GlccParams,
    rng: &mut R,
) {
    let q = params.modulus();
    for r in responses.iter_mut().filter(|r| workers.contains(&r.worker)) {
        match strategy {
            Strategy::RandomValue => r.value.iter_mut().for_each(|v| *v = q.random(rng)),
            Strategy::FixedValue(c) => r.value.iter_mut().for_each(|v| *v = q.elem(c)),
            Strategy::BitflipOneCoordinate => {
                let i = rng.random_range(0..r.value.len());
                let x = r.value[i].value();
                let flipped = x ^ 1;
                r.value[i] = q.elem(if flipped >= q.value() { x - 1 } else { flipped });
            }
        }
    }
}

/// One configuration to benchmark.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub params: GlccParams,
    pub layout: DomainLayout,
    pub sim: SimConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub scenario: String,
    pub round: usize,
    pub seed: u64,
    pub latency: f64,
    pub outcome: &'static str,
    pub corrupted: usize,
    pub flagged: usize,
    pub uploaded: usize,
    pub downloaded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSummary {
    pub scenario: String,
    pub workers: usize,
    pub inputs: usize,
    pub collusion: usize,
    pub adversaries: usize,
    pub groups: usize,
    pub sub_responses: usize,
    pub threshold: usize,
    /// `GLN`
    pub upload_cost: usize,
    /// `KL`
    pub download_cost: usize,
    pub rounds: usize,
    pub success_rate: f64,
    /// Latency statistics over the rounds that decoded; `None` if none did.
    pub mean_latency: Option<f64>,
    pub p50_latency: Option<f64>,
    pub p90_latency: Option<f64>,
    pub p99_latency: Option<f64>,
    pub mean_uploaded: f64,
    pub mean_downloaded: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignResult {
    pub rounds: Vec<RoundRecord>,
    pub summaries: Vec<ScenarioSummary>,
}

/// Seed of round `round` of scenario `scenario` in a campaign.
pub fn round_seed(campaign_seed: u64, scenario: usize, round: usize) -> u64 {
    let s = derive_seed(derive_seed(campaign_seed, label("campaign")), scenario as u64);
    derive_seed(s, round as u64)
}

/// Uniform program inputs for a round.
pub fn random_dataset(params: &GlccParams, seed: u64) -> Vec<ProgramInput> {
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, label("data")));
    let q = params.modulus();
    let program = params.program();
    (0..params.inputs())
        .map(|_| {
            let values = (0..program.input_len()).map(|_| q.random(&mut rng)).collect();
            ProgramInput::from_flat(program, values).expect("width matches")
        })
        .collect()
}

/// Runs `rounds` rounds of every scenario. Rounds run in parallel; results
/// are ordered by scenario, then round.
pub fn run_campaign(scenarios: &[Scenario], rounds: usize, seed: u64) -> Result<CampaignResult, SimError> {
    if scenarios.is_empty() {
        return Err(SimError::NoScenarios);
    }
    let mut all = Vec::new();
    let mut summaries = Vec::new();
    for (si, sc) in scenarios.iter().enumerate() {
        let domain = build_domain(&sc.params, sc.layout)?;
        let transcripts: Vec<RoundTranscript> = (0..rounds)
            .into_par_iter()
            .map(|r| {
                let rs = round_seed(seed, si, r);
                run_round(&random_dataset(&sc.params, rs), &sc.params, &domain, &sc.sim, rs)
            })
            .collect::<Result<_, _>>()?;
        let records: Vec<RoundRecord> = transcripts
            .iter()
            .enumerate()
            .map(|(r, t)| RoundRecord {
                scenario: sc.name.clone(),
                round: r,
                seed: t.seed,
                latency: t.latency(),
                outcome: t.outcome.as_str(),
                corrupted: t.corrupted_workers.len(),
                flagged: t.flagged_workers.len(),
                uploaded: t.uploaded,
                downloaded: t.downloaded,
            })
            .collect();
        summaries.push(summarize(sc, &records));
        all.extend(records);
    }
    Ok(CampaignResult { rounds: all, summaries })
}

fn summarize(sc: &Scenario, records: &[RoundRecord]) -> ScenarioSummary {
    let d = sc.params.dims();
    let mut lat: Vec<f64> = records.iter().filter(|r| r.outcome == "exact").map(|r| r.latency).collect();
    lat.sort_by(f64::total_cmp);
    let n = records.len().max(1) as f64;
    let pct = |p: f64| -> Option<f64> {
        // nearest rank
        let rank = ((p * lat.len() as f64).ceil() as usize).clamp(1, lat.len().max(1));
        lat.get(rank - 1).copied()
    };
    ScenarioSummary {
        scenario: sc.name.clone(),
        workers: d.workers,
        inputs: d.inputs,
        collusion: d.collusion,
        adversaries: d.adversaries,
        groups: d.groups,
        sub_responses: d.sub_responses,
        threshold: sc.params.recovery_threshold(),
        upload_cost: d.groups * d.sub_responses * d.workers,
        download_cost: sc.params.recovery_threshold() * d.sub_responses,
        rounds: records.len(),
        success_rate: lat.len() as f64 / n,
        mean_latency: (!lat.is_empty()).then(|| lat.iter().sum::<f64>() / lat.len() as f64),
        p50_latency: pct(0.5),
        p90_latency: pct(0.9),
        p99_latency: pct(0.99),
        mean_uploaded: records.iter().map(|r| r.uploaded as f64).sum::<f64>() / n,
        mean_downloaded: records.iter().map(|r| r.downloaded as f64).sum::<f64>() / n,
    }
}

/// Expected `k`-th smallest of `n` i.i.d. `Exp(lambda)` delays:
/// `sum_{i<k} 1 / (lambda (n - i))`.
pub fn exponential_order_statistic_mean(n: usize, k: usize, lambda: f64) -> f64 {
    (0..k).map(|i| 1.0 / (lambda * (n - i) as f64)).sum()
}

/// Variance of the same order statistic: `sum_{i<k} 1 / (lambda (n - i))^2`.
pub fn exponential_order_statistic_variance(n: usize, k: usize, lambda: f64) -> f64 {
    (0..k).map(|i| (lambda * (n - i) as f64).powi(-2)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use glcc_core::glcc::Dimensions;
    use glcc_core::program::{builtin_perceptron_gradient, builtin_square_map};
    use glcc_core::PrimeModulus;
    use std::sync::Arc;

    fn params(dims: Dimensions) -> GlccParams {
        GlccParams::new(dims, PrimeModulus::new(97).unwrap(), Arc::new(builtin_square_map())).unwrap()
    }

    fn example() -> GlccParams {
        params(Dimensions { workers: 8, inputs: 4, collusion: 1, adversaries: 1, groups: 2, sub_responses: 2 })
    }

    #[test]
    fn delay_models() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        assert!(sample_delays(&StragglerModel::None, 5, &mut rng).iter().all(|&d| d == 0.0));
        let fixed = StragglerModel::Fixed { p: 1.0, delay: 0.05 };
        assert!(sample_delays(&fixed, 5, &mut rng).iter().all(|&d| d == 0.05));
        let never = StragglerModel::Fixed { p: 0.0, delay: 0.05 };
        assert!(sample_delays(&never, 5, &mut rng).iter().all(|&d| d == 0.0));
        let exp = sample_delays(&StragglerModel::Exponential { lambda: 2.0 }, 100_000, &mut rng);
        let mean = exp.iter().sum::<f64>() / exp.len() as f64;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
        let s1 = sample_delays(&StragglerModel::Fixed { p: 0.4, delay: 0.05 }, 100_000, &mut rng);
        let frac = s1.iter().filter(|&&d| d > 0.0).count() as f64 / s1.len() as f64;
        assert!((frac - 0.4).abs() < 0.01, "{frac}");
    }

    #[test]
    fn invalid_models() {
        assert!(StragglerModel::Fixed { p: 1.5, delay: 0.1 }.validate().is_err());
        assert!(StragglerModel::Fixed { p: 0.5, delay: -1.0 }.validate().is_err());
        assert!(StragglerModel::Exponential { lambda: 0.0 }.validate().is_err());
        let p = example();
        let too_many = AdversaryModel { placement: Placement::Fastest(2), strategy: Strategy::RandomValue };
        assert!(matches!(too_many.validate(&p), Err(SimError::TooManyAdversaries { count: 2, budget: 1 })));
        let stray = AdversaryModel { placement: Placement::Workers(vec![8]), strategy: Strategy::RandomValue };
        assert!(matches!(stray.validate(&p), Err(SimError::UnknownWorker(8))));
    }

    #[test]
    fn no_delay_latency_is_compute_time() {
        let p = example();
        let domain = build_domain(&p, DomainLayout::DataFirst).unwrap();
        let sim = SimConfig::default();
        let t = run_round(&random_dataset(&p, 1), &p, &domain, &sim, 1).unwrap();
        assert_eq!(t.outcome, RoundOutcome::Exact);
        assert_eq!(t.latency(), 4.0 * 0.01);
        assert_eq!(t.received.len(), 14);
    }

    #[test]
    fn decode_time_is_kth_fastest_worker() {
        let p = example();
        let domain = build_domain(&p, DomainLayout::DataFirst).unwrap();
        let delays = [0.7, 0.1, 0.3, 0.2, 0.8, 0.5, 0.4, 0.6];
        let t = run_round_with_delays(&random_dataset(&p, 2), &p, &domain, &SimConfig::default(), &delays, 2).unwrap();
        let mut sorted = delays;
        sorted.sort_by(f64::total_cmp);
        assert_eq!(t.latency(), sorted[6] + 0.04);
        assert!(t.received.iter().all(|r| r.worker != 4));
    }

    #[test]
    fn infinite_stragglers_and_adversaries() {
        let p = example();
        let domain = build_domain(&p, DomainLayout::DataFirst).unwrap();
        for strategy in [Strategy::RandomValue, Strategy::FixedValue(5), Strategy::BitflipOneCoordinate] {
            let sim = SimConfig {
                adversary: AdversaryModel { placement: Placement::Fastest(1), strategy },
                ..SimConfig::default()
            };
            let mut delays = vec![0.0; 8];
            delays[3] = f64::INFINITY;
            let t = run_round_with_delays(&random_dataset(&p, 3), &p, &domain, &sim, &delays, 3).unwrap();
            assert_eq!(t.outcome, RoundOutcome::Exact);
            assert_eq!(t.corrupted_workers, [0]);
            delays[5] = f64::INFINITY;
            let t = run_round_with_delays(&random_dataset(&p, 3), &p, &domain, &sim, &delays, 3).unwrap();
            assert_eq!(t.outcome, RoundOutcome::Insufficient);
            assert!(t.latency().is_infinite());
        }
    }

    #[test]
    fn streaming_counts_sub_responses() {
        let p = example();
        let domain = build_domain(&p, DomainLayout::DataFirst).unwrap();
        let sim = SimConfig { mode: CollectionMode::Streaming, ..SimConfig::default() };
        // three workers never answer: 5 * 2 = 10 < 13 sub-responses
        let mut delays = vec![0.0; 8];
        delays[..3].fill(f64::INFINITY);
        let t = run_round_with_delays(&random_dataset(&p, 4), &p, &domain, &sim, &delays, 4).unwrap();
        assert_eq!(t.outcome, RoundOutcome::Insufficient);
        // one silent: seven first sub-responses at 2 units, the 13th arrival
        // is a second one at 4 units
        delays[1..3].fill(0.0);
        let t = run_round_with_delays(&random_dataset(&p, 4), &p, &domain, &sim, &delays, 4).unwrap();
        assert_eq!(t.outcome, RoundOutcome::Exact);
        assert_eq!(t.received.len(), 13);
        assert_eq!(t.latency(), 0.04);
        // first sub-responses alone arrive at 2 units
        let fast = SimConfig { cost: CostModel { unit_cost: 1.0 }, ..sim };
        let slow_tail: Vec<f64> = (0..8).map(|i| i as f64 * 0.001).collect();
        let t = run_round_with_delays(&random_dataset(&p, 4), &p, &domain, &fast, &slow_tail, 4).unwrap();
        assert_eq!(t.received.iter().filter(|r| r.index == 0).count(), 8);
    }

    #[test]
    fn rounds_are_deterministic() {
        let p = example();
        let domain = build_domain(&p, DomainLayout::Shuffled { seed: 4 }).unwrap();
        let sim = SimConfig {
            straggler: StragglerModel::Exponential { lambda: 2.0 },
            adversary: AdversaryModel { placement: Placement::Fastest(1), strategy: Strategy::RandomValue },
            ..SimConfig::default()
        };
        let a = run_round(&random_dataset(&p, 9), &p, &domain, &sim, 9).unwrap();
        let b = run_round(&random_dataset(&p, 9), &p, &domain, &sim, 9).unwrap();
        assert_eq!(a, b);
        let c = run_round(&random_dataset(&p, 10), &p, &domain, &sim, 10).unwrap();
        assert_ne!(a.share_digests, c.share_digests);
    }

    #[test]
    fn campaign_matches_single_rounds() {
        let p = example();
        let sim = SimConfig { straggler: StragglerModel::Fixed { p: 0.4, delay: 0.05 }, ..SimConfig::default() };
        let sc = Scenario { name: "ex".into(), params: p.clone(), layout: DomainLayout::DataFirst, sim: sim.clone() };
        let res = run_campaign(std::slice::from_ref(&sc), 5, 77).unwrap();
        let domain = build_domain(&p, DomainLayout::DataFirst).unwrap();
        for r in 0..5 {
            let seed = round_seed(77, 0, r);
            let t = run_round(&random_dataset(&p, seed), &p, &domain, &sim, seed).unwrap();
            assert_eq!(res.rounds[r].latency, t.latency());
            assert_eq!(res.rounds[r].seed, seed);
        }
        assert_eq!(res, run_campaign(&[sc], 5, 77).unwrap());
        assert!(run_campaign(&[], 1, 0).is_err());
    }

    #[test]
    fn latency_is_monotone_in_delay() {
        let dims = Dimensions { workers: 20, inputs: 2, collusion: 1, adversaries: 0, groups: 1, sub_responses: 1 };
        let p = GlccParams::new(dims, PrimeModulus::new(1009).unwrap(), Arc::new(builtin_perceptron_gradient(1, 1)))
            .unwrap();
        let mut last = 0.0;
        for delay in [0.0, 0.01, 0.05, 0.1, 0.5] {
            let sim = SimConfig { straggler: StragglerModel::Fixed { p: 0.4, delay }, ..SimConfig::default() };
            let sc = Scenario { name: "m".into(), params: p.clone(), layout: DomainLayout::Sequential, sim };
            let mean = run_campaign(&[sc], 40, 5).unwrap().summaries[0].mean_latency.unwrap();
            assert!(mean >= last, "{delay}: {mean} < {last}");
            last = mean;
        }
        let mut last = 0.0;
        for lambda in [8.0, 4.0, 2.0, 1.0] {
            let sim = SimConfig { straggler: StragglerModel::Exponential { lambda }, ..SimConfig::default() };
            let sc = Scenario { name: "m".into(), params: p.clone(), layout: DomainLayout::Sequential, sim };
            let mean = run_campaign(&[sc], 40, 5).unwrap().summaries[0].mean_latency.unwrap();
            assert!(mean >= last);
            last = mean;
        }
    }

    #[test]
    fn order_statistic_formula() {
        // minimum of n exponentials is Exp(n lambda)
        assert!((exponential_order_statistic_mean(10, 1, 2.0) - 0.05).abs() < 1e-15);
        assert!((exponential_order_statistic_mean(1, 1, 2.0) - 0.5).abs() < 1e-15);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let trials = 20_000;
        let mut total = 0.0;
        for _ in 0..trials {
            let mut d = sample_delays(&StragglerModel::Exponential { lambda: 2.0 }, 10, &mut rng);
            d.sort_by(f64::total_cmp);
            total += d[3];
        }
        let expected = exponential_order_statistic_mean(10, 4, 2.0);
        let se = (exponential_order_statistic_variance(10, 4, 2.0) / trials as f64).sqrt();
        assert!((total / trials as f64 - expected).abs() < 4.0 * se);
    }
}
