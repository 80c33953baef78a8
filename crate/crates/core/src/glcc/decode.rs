use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::{EvaluationDomain, GlccError, GlccParams, SubResponse};
use crate::field::{batch_inverse, FieldElement};
use crate::poly::{rs_decode_detailed, EvalSet, PolyError};

/// How the master decides it has heard enough.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CollectionMode {
    /// Wait for the first `K` workers that delivered all `L` sub-responses.
    #[default]
    AllOrNothing,
    /// Use the first `deg h + 1 + 2AL` sub-responses, whoever sent them.
    Streaming,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    /// `phi(X_m)` for `m = 1..M`.
    pub outputs: Vec<Vec<FieldElement>>,
    /// Workers whose values the decoder had to correct, in id order.
    pub flagged_workers: Vec<usize>,
    /// Workers whose sub-responses were used, in arrival order.
    pub used_workers: Vec<usize>,
    pub sub_responses_used: usize,
}

/// Master-side decoder with the constant-elimination factors precomputed.
#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    params: &'a GlccParams,
    domain: &'a EvaluationDomain,
    mode: CollectionMode,
    /// `c_{g,r}^{-1}`, `[g][r]`
    elimination: Vec<Vec<FieldElement>>,
}

impl<'a> Decoder<'a> {
    pub fn new(params: &'a GlccParams, domain: &'a EvaluationDomain, mode: CollectionMode) -> Result<Self, GlccError> {
        if !domain.matches(params) {
            return Err(GlccError::DomainMismatch);
        }
        let elimination = (0..params.groups())
            .map(|g| {
                let consts: Vec<_> =
                    domain.data_nodes(g).iter().map(|&b| super::interference_coeff(domain, g, b)).collect();
                batch_inverse(&consts).map_err(|_| GlccError::DomainMismatch)
            })
            .collect::<Result<_, _>>()?;
        Ok(Decoder { params, domain, mode, elimination })
    }

    /// Picks the sub-responses to decode from, honouring arrival order.
    /// Extra responses beyond what the mode needs are ignored.
    pub fn select<'r>(&self, responses: &'r [SubResponse]) -> Result<Vec<&'r SubResponse>, GlccError> {
        let p = self.params;
        let (n_workers, l_count, v_len) = (p.workers(), p.sub_responses(), p.program().output_len());
        let mut seen = BTreeSet::new();
        for r in responses {
            if r.worker >= n_workers || r.index >= l_count {
                return Err(GlccError::UnknownSubResponse { worker: r.worker, index: r.index });
            }
            if !seen.insert((r.worker, r.index)) {
                return Err(GlccError::DuplicateResponse { worker: r.worker, index: r.index });
            }
            if r.value.len() != v_len {
                return Err(GlccError::ResponseLength { worker: r.worker, expected: v_len, got: r.value.len() });
            }
        }
        match self.mode {
            CollectionMode::Streaming => {
                let need = p.sub_responses_needed();
                if responses.len() < need {
                    return Err(GlccError::InsufficientResponses { have: responses.len(), need });
                }
                Ok(responses[..need].iter().collect())
            }
            CollectionMode::AllOrNothing => {
                let k = p.recovery_threshold();
                let mut per_worker: BTreeMap<usize, Vec<&SubResponse>> = BTreeMap::new();
                let mut complete = Vec::new();
                for r in responses {
                    let entry = per_worker.entry(r.worker).or_default();
                    entry.push(r);
                    if entry.len() == l_count {
                        complete.push(r.worker);
                        if complete.len() == k {
                            break;
                        }
                    }
                }
                if complete.len() < k {
                    return Err(GlccError::InsufficientResponses { have: complete.len(), need: k });
                }
                let mut chosen = Vec::with_capacity(k * l_count);
                for w in complete {
                    let mut subs = per_worker.remove(&w).unwrap_or_default();
                    subs.sort_by_key(|r| r.index);
                    chosen.extend(subs);
                }
                Ok(chosen)
            }
        }
    }

    /// Recovers `phi(X_1), ..., phi(X_M)`. Each output coordinate is an
    /// independent Reed-Solomon decode with error budget `AL`; the
    /// response polynomial is then read off at the data nodes and divided
    /// by the interference constants.
    pub fn decode(&self, responses: &[SubResponse]) -> Result<DecodeOutcome, GlccError> {
        let chosen = self.select(responses)?;
        let p = self.params;
        let degree_bound = p.response_degree() + 1;
        let budget = p.adversaries() * p.sub_responses();
        let xs: Vec<FieldElement> = chosen.iter().map(|r| self.domain.alpha(r.worker, r.index)).collect();
        let (m, r_size, v_len) = (p.inputs(), p.group_size(), p.program().output_len());
        let q = p.modulus();
        let mut outputs = alloc::vec![alloc::vec![q.zero(); v_len]; m];
        let mut flagged = BTreeSet::new();
        #[allow(clippy::needless_range_loop)]
        for v in 0..v_len {
            let ys = chosen.iter().map(|r| r.value[v]).collect();
            let set = EvalSet::from_parts(xs.clone(), ys)?;
            let decoded = rs_decode_detailed(&set, degree_bound, budget).map_err(|e| match e {
                PolyError::DecodeFailure { .. } => GlccError::DecodeFailure { coordinate: v },
                other => other.into(),
            })?;
            flagged.extend(decoded.error_positions.iter().map(|&i| chosen[i].worker));
            for g in 0..p.groups() {
                for r in 0..r_size {
                    let h = decoded.poly.eval(self.domain.beta(g, r));
                    outputs[g * r_size + r][v] = h * self.elimination[g][r];
                }
            }
        }
        let mut used_workers = Vec::new();
        for r in &chosen {
            if !used_workers.contains(&r.worker) {
                used_workers.push(r.worker);
            }
        }
        Ok(DecodeOutcome {
            outputs,
            flagged_workers: flagged.into_iter().collect(),
            used_workers,
            sub_responses_used: chosen.len(),
        })
    }
}

/// All-or-nothing decode of `responses`, given in arrival order.
pub fn decode(
    responses: &[SubResponse],
    params: &GlccParams,
    domain: &EvaluationDomain,
) -> Result<Vec<Vec<FieldElement>>, GlccError> {
    Ok(Decoder::new(params, domain, CollectionMode::AllOrNothing)?.decode(responses)?.outputs)
}
