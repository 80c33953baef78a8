use alloc::vec::Vec;

use super::{EvaluationDomain, GlccError, GlccParams, WorkerShare};
use crate::field::FieldElement;
use crate::poly::vanishing_eval;

/// One returned evaluation `Y_{n,l}` of the response polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubResponse {
    pub worker: usize,
    pub index: usize,
    pub value: Vec<FieldElement>,
}

/// `prod_{g' != g} prod_{r < R} (x - beta_{g',r})`: zero on every other
/// group's data nodes.
pub fn interference_coeff(domain: &EvaluationDomain, g: usize, x: FieldElement) -> FieldElement {
    (0..domain.groups())
        .filter(|&other| other != g)
        .fold(x.modulus().one(), |acc, other| acc * vanishing_eval(domain.data_nodes(other), x))
}

/// A worker with its interference coefficients computed ahead of the data.
#[derive(Debug, Clone)]
pub struct Worker<'a> {
    id: usize,
    params: &'a GlccParams,
    /// `[l][g]`
    coeffs: Vec<Vec<FieldElement>>,
}

impl<'a> Worker<'a> {
    pub fn new(params: &'a GlccParams, domain: &EvaluationDomain, id: usize) -> Result<Self, GlccError> {
        if !domain.matches(params) {
            return Err(GlccError::DomainMismatch);
        }
        if id >= params.workers() {
            return Err(GlccError::UnknownWorker(id));
        }
        let coeffs = domain
            .worker_points(id)
            .iter()
            .map(|&a| (0..params.groups()).map(|g| interference_coeff(domain, g, a)).collect())
            .collect();
        Ok(Worker { id, params, coeffs })
    }

    pub fn id(&self) -> usize {
        self.id
    }

    /// `Y_{n,l} = sum_g phi(f_g(alpha_{n,l})) * coeff_g(alpha_{n,l})`.
    /// Sub-responses are independent, so they can be produced one at a time.
    pub fn respond_one(&self, share: &WorkerShare, l: usize) -> Result<SubResponse, GlccError> {
        self.check_share(share)?;
        if l >= self.params.sub_responses() {
            return Err(GlccError::UnknownSubResponse { worker: self.id, index: l });
        }
        let q = self.params.modulus();
        let program = self.params.program();
        let mut acc = alloc::vec![q.zero(); program.output_len()];
        for (g, &c) in self.coeffs[l].iter().enumerate() {
            let y = program.eval_over(q, share.get(l, g))?;
            for (a, v) in acc.iter_mut().zip(y) {
                *a += v * c;
            }
        }
        Ok(SubResponse { worker: self.id, index: l, value: acc })
    }

    pub fn respond(&self, share: &WorkerShare) -> Result<Vec<SubResponse>, GlccError> {
        (0..self.params.sub_responses()).map(|l| self.respond_one(share, l)).collect()
    }

    fn check_share(&self, share: &WorkerShare) -> Result<(), GlccError> {
        let p = self.params;
        let u = p.program().input_len();
        let ok = share.worker == self.id
            && share.groups == p.groups()
            && share.values.len() == p.groups() * p.sub_responses()
            && share.values.iter().all(|v| v.len() == u);
        if ok {
            Ok(())
        } else {
            Err(GlccError::MalformedShare(share.worker))
        }
    }
}

/// All `L` sub-responses of the worker owning `share`.
pub fn worker_respond(
    share: &WorkerShare,
    params: &GlccParams,
    domain: &EvaluationDomain,
) -> Result<Vec<SubResponse>, GlccError> {
    Worker::new(params, domain, share.worker)?.respond(share)
}
