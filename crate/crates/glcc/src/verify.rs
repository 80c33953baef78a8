//! Self-checks behind `glcc verify`. Each suite compares the library
//! against a direct computation on random instances.

use std::sync::Arc;
use std::time::Instant;

use glcc_core::glcc::{
    build_domain, decode, encode, privacy_certificate, worker_respond, Dimensions, DomainLayout, GlccParams,
};
use glcc_core::poly::{rs_decode, DensePoly, EvalSet};
use glcc_core::program::{builtin_perceptron_gradient, builtin_square_map};
use glcc_core::seed::{derive_seed, label};
use glcc_core::PrimeModulus;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::dataset::synthetic;
use crate::mltrain::{default_training_dims, train, TrainConfig, TrainMode};
use crate::sim::{random_dataset, run_round, AdversaryModel, Placement, SimConfig, StragglerModel, Strategy};

pub const SUITES: [&str; 5] = ["field", "poly", "glcc", "privacy", "train"];

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub seconds: f64,
    pub checks: Vec<Check>,
}

fn check(name: &str, passed: bool, detail: impl Into<String>) -> Check {
    Check { name: name.to_owned(), passed, detail: detail.into() }
}

pub fn run_suite(name: &str, seed: u64) -> Option<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, label(name)));
    let checks = match name {
        "field" => field_suite(&mut rng),
        "poly" => poly_suite(&mut rng),
        "glcc" => glcc_suite(&mut rng),
        "privacy" => privacy_suite(),
        "train" => train_suite(seed),
        _ => return None,
    };
    Some(SuiteReport {
        suite: name.to_owned(),
        passed: checks.iter().all(|c| c.passed),
        seconds: start.elapsed().as_secs_f64(),
        checks,
    })
}

fn field_suite(rng: &mut ChaCha20Rng) -> Vec<Check> {
    let mut out = Vec::new();
    for qv in [97u64, (1 << 27) - 39, (1 << 61) - 1] {
        let q = PrimeModulus::new(qv).expect("prime");
        let mut bad = 0;
        for _ in 0..2000 {
            let (a, b) = (rng.random_range(0..qv), rng.random_range(0..qv));
            let (x, y) = (q.elem(a), q.elem(b));
            let (a, b, m) = (a as u128, b as u128, qv as u128);
            bad += usize::from((x + y).value() as u128 != (a + b) % m);
            bad += usize::from((x - y).value() as u128 != (a + m - b) % m);
            bad += usize::from((x * y).value() as u128 != a * b % m);
            if !x.is_zero() {
                bad += usize::from(x * x.inv().expect("nonzero") != q.one());
                bad += usize::from(x.pow(qv - 1) != q.one());
            }
        }
        out.push(check(&format!("arithmetic mod {qv}"), bad == 0, format!("{bad} mismatches in 2000 draws")));
    }
    out
}

fn poly_suite(rng: &mut ChaCha20Rng) -> Vec<Check> {
    let q = PrimeModulus::new((1 << 27) - 39).expect("prime");
    let (mut ok, mut overload_caught) = (0, 0);
    let trials = 200;
    for _ in 0..trials {
        let k = rng.random_range(1..=30);
        let e = rng.random_range(0..=4);
        let n = k + 2 * e + rng.random_range(0..3);
        let f = DensePoly::new(q, (0..k).map(|_| q.random(rng)).collect());
        let xs: Vec<_> = (1..=n as u64).map(|x| q.elem(x)).collect();
        let mut ys: Vec<_> = xs.iter().map(|&x| f.eval(x)).collect();
        for i in 0..e {
            ys[i * 2 % n] += q.random_nonzero(rng);
        }
        let set = EvalSet::from_parts(xs.clone(), ys.clone()).expect("distinct");
        ok += usize::from(rs_decode(&set, k, e).ok().as_ref() == Some(&f));
        // one error beyond capacity, on exactly k + 2e points
        let m = k + 2 * e;
        let mut ys2 = ys[..m].to_vec();
        let mut hit = std::collections::BTreeSet::new();
        while hit.len() < e + 1 {
            hit.insert(rng.random_range(0..m));
        }
        for &i in &hit {
            ys2[i] = f.eval(xs[i]) + q.random_nonzero(rng);
        }
        let set = EvalSet::from_parts(xs[..m].to_vec(), ys2).expect("distinct");
        overload_caught += usize::from(rs_decode(&set, k, e).ok().as_ref() != Some(&f));
    }
    vec![
        check("reed-solomon decoding", ok == trials, format!("{ok}/{trials} decoded")),
        check(
            "overload never silently accepted as the codeword",
            overload_caught == trials,
            format!("{overload_caught}/{trials} rejected or decoded elsewhere"),
        ),
    ]
}

fn glcc_suite(rng: &mut ChaCha20Rng) -> Vec<Check> {
    let q = PrimeModulus::new((1 << 27) - 39).expect("prime");
    let trials = 100;
    let mut exact = 0;
    let mut skipped = 0;
    for _ in 0..trials {
        let groups = rng.random_range(1..=3);
        let inputs = groups * rng.random_range(1..=3);
        let program =
            Arc::new(if rng.random_bool(0.5) { builtin_square_map() } else { builtin_perceptron_gradient(1, 2) });
        let mut dims = Dimensions {
            workers: 0,
            inputs,
            collusion: rng.random_range(0..=2),
            adversaries: rng.random_range(0..=2),
            groups,
            sub_responses: rng.random_range(1..=2),
        };
        dims.workers = dims.recovery_threshold(program.degree()) + rng.random_range(0..4);
        if dims.workers > 24 {
            skipped += 1;
            continue;
        }
        let params = GlccParams::new(dims, q, program).expect("valid");
        let sim = SimConfig {
            straggler: StragglerModel::Exponential { lambda: 1.0 },
            adversary: AdversaryModel {
                placement: Placement::Fastest(dims.adversaries),
                strategy: Strategy::RandomValue,
            },
            ..SimConfig::default()
        };
        let domain = build_domain(&params, DomainLayout::Shuffled { seed: rng.random() }).expect("domain");
        let seed = rng.random();
        let t = run_round(&random_dataset(&params, seed), &params, &domain, &sim, seed).expect("round");
        exact += usize::from(t.outcome == crate::sim::RoundOutcome::Exact);
    }
    let ran = trials - skipped;
    let mut out = vec![check("coded rounds match direct evaluation", exact == ran, format!("{exact}/{ran} exact"))];

    // a plain round without the simulator: encode, compute, decode
    let params = GlccParams::new(
        Dimensions { workers: 12, inputs: 4, collusion: 1, adversaries: 0, groups: 2, sub_responses: 2 },
        q,
        Arc::new(builtin_square_map()),
    )
    .expect("valid");
    let domain = build_domain(&params, DomainLayout::Sequential).expect("domain");
    let data = random_dataset(&params, 1);
    let shares = encode(&data, &params, &domain, rng).expect("encode");
    let responses: Vec<_> = shares.iter().flat_map(|s| worker_respond(s, &params, &domain).expect("respond")).collect();
    let direct: Vec<_> = data.iter().map(|x| params.program().eval(x).expect("eval")).collect();
    let decoded = decode(&responses, &params, &domain).expect("decode");
    out.push(check("encode, respond, decode", decoded == direct, ""));
    out
}

fn privacy_suite() -> Vec<Check> {
    let q = PrimeModulus::new(97).expect("prime");
    let mut out = Vec::new();
    for (m, g) in [(2, 1), (4, 2), (2, 2)] {
        for l in [1, 2] {
            for t in [1, 2] {
                let dims =
                    Dimensions { workers: 8, inputs: m, collusion: t, adversaries: 0, groups: g, sub_responses: l };
                let Ok(params) = GlccParams::new(dims, q, Arc::new(builtin_square_map())) else { continue };
                let domain = build_domain(&params, DomainLayout::Sequential).expect("domain");
                let subsets = subsets(8, t);
                let failed =
                    subsets.iter().filter(|s| !privacy_certificate(&params, &domain, s).expect("certificate")).count();
                out.push(check(
                    &format!("certificate M={m} G={g} L={l} T={t}"),
                    failed == 0,
                    format!("{failed}/{} subsets fail", subsets.len()),
                ));
            }
        }
    }
    out
}

/// All `size`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, size, &mut Vec::new(), &mut out);
    out
}

fn train_suite(seed: u64) -> Vec<Check> {
    let (ds, _) = synthetic(2, 64, 4, seed);
    let dims = default_training_dims(2);
    let mut cfg = TrainConfig::synthetic_default();
    cfg.iterations = 10;
    let sim = SimConfig { straggler: StragglerModel::Exponential { lambda: 2.0 }, ..SimConfig::default() };
    let coded = train(&ds, dims, DomainLayout::Sequential, cfg.clone(), sim.clone(), seed);
    cfg.mode = TrainMode::Plaintext;
    let plain = train(&ds, dims, DomainLayout::Sequential, cfg, sim, seed);
    match (coded, plain) {
        (Ok(c), Ok(p)) => vec![check(
            "coded and plaintext training agree",
            c.weights == p.weights && c.history == p.history,
            format!("10 iterations, final accuracy {:.3}", c.history.last().map_or(0.0, |h| h.accuracy)),
        )],
        (c, p) => vec![check(
            "coded and plaintext training agree",
            false,
            format!("{:?} / {:?}", c.err().map(|e| e.to_string()), p.err().map(|e| e.to_string())),
        )],
    }
}
