//! Walkthrough of a small round over `F_97`: `M = 4` scalars squared on
//! `N = 8` workers with `G = 2`, `L = 2`, `T = 1`, `A = 1`.

use std::sync::Arc;

use glcc_core::glcc::{
    build_domain, interference_coeff, worker_respond, CollectionMode, Decoder, Dimensions, DomainLayout, Encoder,
    GlccError, GlccParams,
};
use glcc_core::poly::{rs_decode, EvalSet};
use glcc_core::program::{builtin_square_map, ProgramInput};
use glcc_core::PrimeModulus;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::sim::noise_rng;

pub const DEMO_DIMS: Dimensions =
    Dimensions { workers: 8, inputs: 4, collusion: 1, adversaries: 1, groups: 2, sub_responses: 2 };

#[derive(Debug, Clone)]
pub struct DemoReport {
    pub lines: Vec<String>,
    pub ok: bool,
}

fn join<T: ToString>(v: impl IntoIterator<Item = T>) -> String {
    v.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Runs the walkthrough on `xs` (reduced mod 97). With `corrupt = Some(w)`
/// worker `w` returns garbage and the decoder has to correct it.
pub fn run_demo(xs: &[u64; 4], corrupt: Option<usize>, seed: u64) -> Result<DemoReport, GlccError> {
    let q = PrimeModulus::new(97).expect("prime");
    let program = Arc::new(builtin_square_map());
    let params = GlccParams::new(DEMO_DIMS, q, program.clone())?;
    if let Some(w) = corrupt {
        if w >= DEMO_DIMS.workers {
            return Err(GlccError::InvalidParameter("corrupted worker out of range"));
        }
    }
    let domain = build_domain(&params, DomainLayout::DataFirst)?;
    let encoder = Encoder::new(&params, &domain)?;
    let mut lines = Vec::new();
    let d = DEMO_DIMS;
    lines.push(format!(
        "field q=97 N={} M={} T={} A={} G={} L={} domain=data-first",
        d.workers, d.inputs, d.collusion, d.adversaries, d.groups, d.sub_responses
    ));
    lines.push(format!(
        "threshold K={} deg h={} upload GLN={} download KL={}",
        params.recovery_threshold(),
        params.response_degree(),
        d.groups * d.sub_responses * d.workers,
        params.recovery_threshold() * d.sub_responses
    ));

    let data: Vec<ProgramInput> =
        xs.iter().map(|&x| ProgramInput::from_flat(&program, vec![q.elem(x)]).expect("scalar")).collect();
    lines.push(format!("inputs {}", join(data.iter().map(|x| x.values()[0]))));
    for g in 0..d.groups {
        lines.push(format!(
            "group {g} data nodes {} noise nodes {}",
            join(domain.data_nodes(g).iter().copied()),
            join(domain.group_nodes(g)[domain.group_size()..].iter().copied())
        ));
    }

    let mut rng = noise_rng(seed);
    let noise = encoder.sample_noise(1, &mut rng);
    let inputs: Vec<&[_]> = data.iter().map(ProgramInput::values).collect();
    let shares = encoder.encode_with_noise(&inputs, &noise)?;
    let mut responses = Vec::new();
    for s in &shares {
        let mut r = worker_respond(s, &params, &domain)?;
        let alphas: Vec<_> = (0..d.sub_responses).map(|l| domain.alpha(s.worker, l)).collect();
        let mut note = "";
        if corrupt == Some(s.worker) {
            let mut crng = ChaCha20Rng::seed_from_u64(seed ^ 0x5eed);
            for sub in &mut r {
                sub.value[0] += q.random_nonzero(&mut crng);
            }
            note = "  (corrupted)";
        }
        lines.push(format!(
            "worker {} alpha {} share {} response {}{note}",
            s.worker,
            join(alphas),
            join(s.values.iter().flatten().copied()),
            join(r.iter().map(|x| x.value[0]))
        ));
        responses.extend(r);
    }

    // h has degree 8 and the transcript carries 16 points, enough to
    // correct the A*L = 2 bad ones
    let set = EvalSet::new(responses.iter().map(|r| (domain.alpha(r.worker, r.index), r.value[0])).collect())?;
    let h = rs_decode(&set, params.response_degree() + 1, d.adversaries * d.sub_responses)?;
    for g in 0..d.groups {
        for (r, &beta) in domain.data_nodes(g).iter().enumerate() {
            let c = interference_coeff(&domain, g, beta);
            let phi = program.eval(&data[g * domain.group_size() + r]).expect("scalar")[0];
            lines.push(format!("h({beta}) = {} = {c} * {phi}", h.eval(beta)));
        }
    }

    let out = Decoder::new(&params, &domain, CollectionMode::AllOrNothing)?.decode(&responses)?;
    let direct: Vec<_> = data.iter().map(|x| program.eval(x).expect("scalar")).collect();
    lines.push(format!("decoded {}", join(out.outputs.iter().map(|o| o[0]))));
    lines.push(format!("direct  {}", join(direct.iter().map(|o| o[0]))));
    lines.push(format!("flagged workers [{}]", join(out.flagged_workers.iter())));
    let ok = out.outputs == direct
        && corrupt.map_or(out.flagged_workers.is_empty(), |w| {
            // a worker outside the first K is never read
            out.flagged_workers == [w] || !out.used_workers.contains(&w)
        });
    lines.push(format!("result {}", if ok { "exact" } else { "MISMATCH" }));
    Ok(DemoReport { lines, ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_and_corrupted() {
        let r = run_demo(&[1, 2, 3, 4], None, 0).unwrap();
        assert!(r.ok);
        assert!(r.lines.iter().any(|l| l.contains("K=7")));
        assert!(r.lines.iter().any(|l| l == "decoded 1 4 9 16"));
        assert!(r.lines.iter().any(|l| l.starts_with("h(1) = 6 = 6 * 1")));
        assert!(r.lines.iter().any(|l| l.starts_with("h(4) = 96 = 6 * 16")));
        for w in 0..8 {
            let r = run_demo(&[5, 60, 7, 96], Some(w), 3).unwrap();
            assert!(r.ok, "{w}");
        }
        assert!(run_demo(&[1, 2, 3, 4], Some(8), 0).is_err());
    }
}
