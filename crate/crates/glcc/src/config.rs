//! Experiment configuration files (TOML).
//!
//! ```toml
//! seed = 7
//! rounds = 100
//! field_q = 134217689
//! program = "perceptron_gradient(s=1,d=1)"
//! mode = "all-or-nothing"        # or "streaming"
//! domain = "sequential"          # "data-first", "shuffled:<seed>"
//! unit_cost = 0.01
//!
//! [straggler]
//! model = "exponential"          # "none", "fixed" (p, delay)
//! lambda = 2.0
//!
//! [adversary]
//! count = 1                      # or workers = [0, 3]
//! strategy = "random-value"      # "fixed-value" (value), "bitflip-one-coordinate"
//!
//! [[config]]
//! name = "glcc"
//! N = 50
//! M = 5
//! T = 1
//! A = 0
//! G = 5
//! L = 1
//!
//! [train]
//! iterations = 300
//! batch = 32
//! learning_rate = 0.2
//! l_x = 5
//! l_w = 6
//! ```
//!
//! Every error carries the line and column of the offending key.

use std::ops::Range;
use std::path::PathBuf;
use std::sync::Arc;

use glcc_core::glcc::{CollectionMode, Dimensions, DomainLayout, GlccError, GlccParams};
use glcc_core::program::{builtin_perceptron_gradient, parse_program, PolyProgram};
use glcc_core::PrimeModulus;
use serde::Deserialize;
use toml::Spanned;

use crate::mltrain::{TrainConfig, TrainMode};
use crate::quant::QuantConfig;
use crate::sim::{AdversaryModel, CostModel, Placement, Scenario, SimConfig, StragglerModel, Strategy};
use crate::transcript::parse_layout;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    rounds: Option<Spanned<usize>>,
    field_q: Option<Spanned<u64>>,
    program: Option<Spanned<String>>,
    mode: Option<Spanned<String>>,
    domain: Option<Spanned<String>>,
    unit_cost: Option<Spanned<f64>>,
    output: Option<PathBuf>,
    straggler: Option<RawStraggler>,
    adversary: Option<RawAdversary>,
    #[serde(default)]
    config: Vec<Spanned<RawCase>>,
    train: Option<Spanned<RawTrain>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStraggler {
    model: Spanned<String>,
    p: Option<Spanned<f64>>,
    delay: Option<Spanned<f64>>,
    lambda: Option<Spanned<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAdversary {
    count: Option<Spanned<usize>>,
    workers: Option<Spanned<Vec<usize>>>,
    strategy: Option<Spanned<String>>,
    value: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCase {
    name: Option<String>,
    #[serde(rename = "N")]
    n: Spanned<usize>,
    #[serde(rename = "M")]
    m: Spanned<usize>,
    #[serde(rename = "T", default)]
    t: usize,
    #[serde(rename = "A", default)]
    a: usize,
    #[serde(rename = "G")]
    g: Option<Spanned<usize>>,
    #[serde(rename = "L")]
    l: Option<Spanned<usize>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrain {
    iterations: Option<usize>,
    batch: Option<Spanned<usize>>,
    learning_rate: Option<Spanned<f64>>,
    momentum: Option<Spanned<f64>>,
    init_scale: Option<Spanned<f64>>,
    l_x: Option<u32>,
    l_w: Option<u32>,
    feature_bound: Option<Spanned<f64>>,
    weight_bound: Option<Spanned<f64>>,
    #[serde(default)]
    plaintext: bool,
}

/// One `[[config]]` entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub name: String,
    pub dims: Dimensions,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub rounds: usize,
    pub modulus: PrimeModulus,
    /// Program description, as written.
    pub program_desc: String,
    pub program: Arc<PolyProgram>,
    pub layout: DomainLayout,
    pub sim: SimConfig,
    pub cases: Vec<Case>,
    pub train: Option<TrainConfig>,
    pub output: Option<PathBuf>,
}

pub const DEFAULT_MODULUS: u64 = (1 << 61) - 1;

fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |nl| before.len() - nl - 1) + 1;
    (line, column)
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn err(&self, span: Range<usize>, message: impl Into<String>) -> ConfigError {
        let (line, column) = position(self.text, span.start);
        ConfigError { line, column, message: message.into() }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let ctx = Ctx { text };
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| position(text, s.start));
            ConfigError { line, column, message: e.message().to_owned() }
        })?;

        let modulus = match &raw.field_q {
            Some(q) => PrimeModulus::new(*q.get_ref()).map_err(|e| ctx.err(q.span(), e.to_string()))?,
            None => PrimeModulus::new(DEFAULT_MODULUS).expect("Mersenne prime"),
        };
        let (program_desc, program) = match &raw.program {
            Some(p) => (p.get_ref().clone(), parse_program(p.get_ref()).map_err(|e| ctx.err(p.span(), e.to_string()))?),
            None => ("square_map".to_owned(), parse_program("square_map").expect("builtin")),
        };
        let program = Arc::new(program);
        let mode = match &raw.mode {
            None => CollectionMode::AllOrNothing,
            Some(m) => parse_mode(m.get_ref()).ok_or_else(|| {
                ctx.err(m.span(), format!("unknown mode {:?}; expected all-or-nothing or streaming", m.get_ref()))
            })?,
        };
        let layout = match &raw.domain {
            None => DomainLayout::Sequential,
            Some(d) => parse_layout(d.get_ref()).ok_or_else(|| {
                ctx.err(
                    d.span(),
                    format!("unknown domain {:?}; expected sequential, data-first or shuffled:<seed>", d.get_ref()),
                )
            })?,
        };
        let cost = match &raw.unit_cost {
            None => CostModel::default(),
            Some(c) if *c.get_ref() >= 0.0 && c.get_ref().is_finite() => CostModel { unit_cost: *c.get_ref() },
            Some(c) => return Err(ctx.err(c.span(), "unit_cost must be a nonnegative number")),
        };
        let straggler = match &raw.straggler {
            None => StragglerModel::None,
            Some(s) => straggler(&ctx, s)?,
        };
        let adversary = match &raw.adversary {
            None => AdversaryModel::none(),
            Some(a) => adversary(&ctx, a)?,
        };
        let rounds = match &raw.rounds {
            None => 1,
            Some(r) if *r.get_ref() >= 1 => *r.get_ref(),
            Some(r) => return Err(ctx.err(r.span(), "rounds must be at least 1")),
        };
        let train = raw.train.as_ref().map(|t| train(&ctx, t, modulus)).transpose()?;

        // training builds its program from the batch shape; only the degree
        // matters for validating the dimensions
        let check_program = if raw.program.is_none() && train.is_some() {
            Arc::new(builtin_perceptron_gradient(1, 1))
        } else {
            program.clone()
        };
        let mut cases = Vec::new();
        for (i, c) in raw.config.iter().enumerate() {
            let case = c.get_ref();
            let dims = Dimensions {
                workers: *case.n.get_ref(),
                inputs: *case.m.get_ref(),
                collusion: case.t,
                adversaries: case.a,
                groups: case.g.as_ref().map_or(1, |g| *g.get_ref()),
                sub_responses: case.l.as_ref().map_or(1, |l| *l.get_ref()),
            };
            let params = GlccParams::new(dims, modulus, check_program.clone()).map_err(|e| {
                let span = match &e {
                    GlccError::GroupsDontDivide { .. } => case.g.as_ref().map_or(c.span(), |g| g.span()),
                    GlccError::TooFewWorkers { .. } => case.n.span(),
                    GlccError::FieldTooSmall { .. } => raw.field_q.as_ref().map_or(c.span(), |q| q.span()),
                    _ => c.span(),
                };
                ctx.err(span, e.to_string())
            })?;
            adversary_fits(&ctx, raw.adversary.as_ref(), &adversary, &params)?;
            let name = case.name.clone().unwrap_or_else(|| format!("config{i}"));
            cases.push(Case { name, dims });
        }
        Ok(ExperimentConfig {
            seed: raw.seed.unwrap_or(0),
            rounds,
            modulus,
            program_desc,
            program,
            layout,
            sim: SimConfig { straggler, adversary, cost, mode },
            cases,
            train,
            output: raw.output,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: 0,
            column: 0,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn scenarios(&self) -> Vec<Scenario> {
        self.cases
            .iter()
            .map(|c| Scenario {
                name: c.name.clone(),
                params: GlccParams::new(c.dims, self.modulus, self.program.clone()).expect("validated at parse time"),
                layout: self.layout,
                sim: self.sim.clone(),
            })
            .collect()
    }
}

pub fn parse_mode(s: &str) -> Option<CollectionMode> {
    match s {
        "all-or-nothing" => Some(CollectionMode::AllOrNothing),
        "streaming" => Some(CollectionMode::Streaming),
        _ => None,
    }
}

fn required(
    ctx: &Ctx<'_>,
    v: &Option<Spanned<f64>>,
    at: Range<usize>,
    what: &str,
) -> Result<Spanned<f64>, ConfigError> {
    v.clone().ok_or_else(|| ctx.err(at, format!("straggler model needs `{what}`")))
}

fn straggler(ctx: &Ctx<'_>, s: &RawStraggler) -> Result<StragglerModel, ConfigError> {
    let model = match s.model.get_ref().as_str() {
        "none" => StragglerModel::None,
        "fixed" => {
            let p = required(ctx, &s.p, s.model.span(), "p")?;
            let delay = required(ctx, &s.delay, s.model.span(), "delay")?;
            let m = StragglerModel::Fixed { p: *p.get_ref(), delay: *delay.get_ref() };
            if !(0.0..=1.0).contains(p.get_ref()) {
                return Err(ctx.err(p.span(), "p must lie in [0, 1]"));
            }
            m.validate().map_err(|e| ctx.err(delay.span(), e.to_string()))?;
            m
        }
        "exponential" => {
            let lambda = required(ctx, &s.lambda, s.model.span(), "lambda")?;
            let m = StragglerModel::Exponential { lambda: *lambda.get_ref() };
            m.validate().map_err(|e| ctx.err(lambda.span(), e.to_string()))?;
            m
        }
        other => {
            return Err(ctx.err(
                s.model.span(),
                format!("unknown straggler model {other:?}; expected none, fixed or exponential"),
            ))
        }
    };
    Ok(model)
}

fn adversary(ctx: &Ctx<'_>, a: &RawAdversary) -> Result<AdversaryModel, ConfigError> {
    let placement = match (&a.count, &a.workers) {
        (Some(c), Some(_)) => return Err(ctx.err(c.span(), "give either `count` or `workers`, not both")),
        (Some(c), None) => Placement::Fastest(*c.get_ref()),
        (None, Some(w)) => Placement::Workers(w.get_ref().clone()),
        (None, None) => Placement::Fastest(0),
    };
    let strategy = match a.strategy.as_ref().map(|s| (s.get_ref().as_str(), s.span())) {
        None | Some(("random-value", _)) => Strategy::RandomValue,
        Some(("fixed-value", _)) => Strategy::FixedValue(a.value.unwrap_or(0)),
        Some(("bitflip-one-coordinate", _)) => Strategy::BitflipOneCoordinate,
        Some((other, span)) => {
            return Err(ctx.err(
                span,
                format!("unknown strategy {other:?}; expected random-value, fixed-value or bitflip-one-coordinate"),
            ))
        }
    };
    Ok(AdversaryModel { placement, strategy })
}

fn adversary_fits(
    ctx: &Ctx<'_>,
    raw: Option<&RawAdversary>,
    model: &AdversaryModel,
    params: &GlccParams,
) -> Result<(), ConfigError> {
    let Some(raw) = raw else { return Ok(()) };
    model.validate(params).map_err(|e| {
        let span = raw.count.as_ref().map(|c| c.span()).or_else(|| raw.workers.as_ref().map(|w| w.span()));
        ctx.err(span.unwrap_or(0..0), e.to_string())
    })
}

fn train(ctx: &Ctx<'_>, t: &Spanned<RawTrain>, modulus: PrimeModulus) -> Result<TrainConfig, ConfigError> {
    let raw = t.get_ref();
    let d = TrainConfig::synthetic_default();
    let positive = |v: &Option<Spanned<f64>>, default: f64, what: &str| -> Result<f64, ConfigError> {
        match v {
            None => Ok(default),
            Some(s) if *s.get_ref() > 0.0 && s.get_ref().is_finite() => Ok(*s.get_ref()),
            Some(s) => Err(ctx.err(s.span(), format!("{what} must be a positive number"))),
        }
    };
    let nonneg = |v: &Option<Spanned<f64>>, default: f64, what: &str| -> Result<f64, ConfigError> {
        match v {
            None => Ok(default),
            Some(s) if *s.get_ref() >= 0.0 && s.get_ref().is_finite() => Ok(*s.get_ref()),
            Some(s) => Err(ctx.err(s.span(), format!("{what} must be a nonnegative number"))),
        }
    };
    let batch = match &raw.batch {
        None => d.batch,
        Some(b) if *b.get_ref() > 0 => *b.get_ref(),
        Some(b) => return Err(ctx.err(b.span(), "batch must be at least 1")),
    };
    let cfg = TrainConfig {
        iterations: raw.iterations.unwrap_or(d.iterations),
        batch,
        learning_rate: nonneg(&raw.learning_rate, d.learning_rate, "learning_rate")?,
        momentum: nonneg(&raw.momentum, d.momentum, "momentum")?,
        init_scale: nonneg(&raw.init_scale, d.init_scale, "init_scale")?,
        feature_bound: positive(&raw.feature_bound, d.feature_bound, "feature_bound")?,
        weight_bound: positive(&raw.weight_bound, d.weight_bound, "weight_bound")?,
        quant: QuantConfig { l_x: raw.l_x.unwrap_or(d.quant.l_x), l_w: raw.l_w.unwrap_or(d.quant.l_w), modulus },
        mode: if raw.plaintext { TrainMode::Plaintext } else { TrainMode::Coded },
    };
    if cfg.momentum >= 1.0 {
        let span = raw.momentum.as_ref().map_or(t.span(), |m| m.span());
        return Err(ctx.err(span, "momentum must be below 1"));
    }
    Ok(cfg)
}
