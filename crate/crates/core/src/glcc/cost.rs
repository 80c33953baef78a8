use super::GlccParams;

/// Communication and work figures for one round, from the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostReport {
    pub threshold: usize,
    /// Normalized upload cost `P_u = GLN`.
    pub upload: usize,
    /// Normalized download cost `P_d = KL`.
    pub download: usize,
    /// Field elements shipped to workers: `GLN * U`.
    pub upload_elements: usize,
    /// Field elements the master consumes: `KL * V`.
    pub download_elements: usize,
    pub ops: OpCounts,
}

/// Operation counts of the implemented (quadratic) algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCounts {
    /// Multiply-adds in the encoder: `G N L (R + LT) U`.
    pub encode_mults: usize,
    /// Evaluations of `phi` at each worker: `GL`.
    pub worker_phi_evals: usize,
    /// Reed-Solomon decodes at the master: one per output coordinate.
    pub decode_calls: usize,
    /// Points in each decode: `KL`.
    pub decode_points: usize,
}

pub fn cost_report(params: &GlccParams) -> CostReport {
    let d = params.dims();
    let (u, v) = (params.program().input_len(), params.program().output_len());
    let k = params.recovery_threshold();
    let gl = d.groups * d.sub_responses;
    CostReport {
        threshold: k,
        upload: gl * d.workers,
        download: k * d.sub_responses,
        upload_elements: gl * d.workers * u,
        download_elements: k * d.sub_responses * v,
        ops: OpCounts {
            encode_mults: gl * d.workers * d.nodes_per_group() * u,
            worker_phi_evals: gl,
            decode_calls: v,
            decode_points: k * d.sub_responses,
        },
    }
}
