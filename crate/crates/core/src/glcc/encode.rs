use alloc::vec::Vec;

use rand_core::RngCore;

use super::{EvaluationDomain, GlccError, GlccParams};
use crate::field::FieldElement;
use crate::poly::{barycentric_weights, lagrange_basis_with_weights};
use crate::program::ProgramInput;

/// The `GL` encoded inputs sent to one worker: `f_g(alpha_{n,l})` for every
/// group `g` and sub-response index `l`, stored at `values[l * G + g]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkerShare {
    pub worker: usize,
    pub groups: usize,
    pub values: Vec<Vec<FieldElement>>,
}

impl WorkerShare {
    pub fn get(&self, l: usize, g: usize) -> &[FieldElement] {
        &self.values[l * self.groups + g]
    }

    pub fn sub_responses(&self) -> usize {
        self.values.len() / self.groups
    }

    /// Field elements in this share.
    pub fn element_count(&self) -> usize {
        self.values.iter().map(Vec::len).sum()
    }

    /// Appends `other`'s coordinates to each encoded input. Both shares must
    /// come from the same domain and worker; the result is the share of the
    /// concatenated inputs.
    pub fn concat(&self, other: &WorkerShare) -> WorkerShare {
        assert_eq!(self.worker, other.worker);
        assert_eq!(self.values.len(), other.values.len());
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a.iter().chain(b).copied().collect()).collect();
        WorkerShare { worker: self.worker, groups: self.groups, values }
    }
}

/// Lagrange encoder with the basis values `l_{g,j}(alpha_{n,l})`
/// precomputed, so shares of any width can be produced by dot products.
#[derive(Debug, Clone)]
pub struct Encoder {
    groups: usize,
    group_size: usize,
    nodes_per_group: usize,
    workers: usize,
    sub_responses: usize,
    modulus: crate::field::PrimeModulus,
    /// `[g][n * L + l][j]`
    basis: Vec<Vec<Vec<FieldElement>>>,
}

impl Encoder {
    pub fn new(params: &GlccParams, domain: &EvaluationDomain) -> Result<Self, GlccError> {
        if !domain.matches(params) {
            return Err(GlccError::DomainMismatch);
        }
        let d = params.dims();
        let mut basis = Vec::with_capacity(d.groups);
        for g in 0..d.groups {
            let nodes = domain.group_nodes(g);
            let weights = barycentric_weights(nodes)?;
            let per_point = (0..d.workers)
                .flat_map(|n| (0..d.sub_responses).map(move |l| (n, l)))
                .map(|(n, l)| lagrange_basis_with_weights(nodes, &weights, domain.alpha(n, l)))
                .collect();
            basis.push(per_point);
        }
        Ok(Encoder {
            groups: d.groups,
            group_size: d.group_size(),
            nodes_per_group: d.nodes_per_group(),
            workers: d.workers,
            sub_responses: d.sub_responses,
            modulus: params.modulus(),
            basis,
        })
    }

    /// Samples the `LT` noise vectors of every group, `[g][j][coordinate]`,
    /// in group-major then node-major order.
    pub fn sample_noise<R: RngCore + ?Sized>(&self, width: usize, rng: &mut R) -> Vec<Vec<Vec<FieldElement>>> {
        let noise_nodes = self.nodes_per_group - self.group_size;
        (0..self.groups)
            .map(|_| (0..noise_nodes).map(|_| (0..width).map(|_| self.modulus.random(rng)).collect()).collect())
            .collect()
    }

    /// Encodes `M` equal-width vectors with fresh uniform noise.
    pub fn encode_values<R: RngCore + ?Sized>(
        &self,
        inputs: &[&[FieldElement]],
        rng: &mut R,
    ) -> Result<Vec<WorkerShare>, GlccError> {
        let width = inputs.first().map_or(0, |v| v.len());
        let noise = self.sample_noise(width, rng);
        self.encode_with_noise(inputs, &noise)
    }

    /// Encodes with caller-supplied noise, `noise[g][j]` sitting at node
    /// `beta_{g, R + j}`.
    pub fn encode_with_noise(
        &self,
        inputs: &[&[FieldElement]],
        noise: &[Vec<Vec<FieldElement>>],
    ) -> Result<Vec<WorkerShare>, GlccError> {
        let m = self.groups * self.group_size;
        if inputs.len() != m {
            return Err(GlccError::DatasetSize { expected: m, got: inputs.len() });
        }
        let width = inputs.first().map_or(0, |v| v.len());
        if let Some(bad) = inputs.iter().position(|v| v.len() != width) {
            return Err(GlccError::InputWidth { index: bad, expected: width, got: inputs[bad].len() });
        }
        let noise_nodes = self.nodes_per_group - self.group_size;
        let noise_ok = noise.len() == self.groups
            && noise.iter().all(|g| g.len() == noise_nodes && g.iter().all(|z| z.len() == width));
        if !noise_ok {
            return Err(GlccError::InvalidParameter("noise does not match LT x width per group"));
        }
        if inputs.iter().flat_map(|v| v.iter()).any(|x| x.modulus() != self.modulus) {
            return Err(GlccError::ModulusMismatch);
        }

        let zero = self.modulus.zero();
        let mut shares: Vec<WorkerShare> = (0..self.workers)
            .map(|n| WorkerShare {
                worker: n,
                groups: self.groups,
                values: Vec::with_capacity(self.groups * self.sub_responses),
            })
            .collect();
        for (n, share) in shares.iter_mut().enumerate() {
            for l in 0..self.sub_responses {
                for g in 0..self.groups {
                    let coeffs = &self.basis[g][n * self.sub_responses + l];
                    let group_inputs = &inputs[g * self.group_size..(g + 1) * self.group_size];
                    let nodes = group_inputs.iter().copied().chain(noise[g].iter().map(Vec::as_slice));
                    let mut acc = alloc::vec![zero; width];
                    for (&c, values) in coeffs.iter().zip(nodes) {
                        if c.is_zero() {
                            continue;
                        }
                        for (a, &v) in acc.iter_mut().zip(values) {
                            *a += c * v;
                        }
                    }
                    share.values.push(acc);
                }
            }
        }
        Ok(shares)
    }

    /// Field multiplications one call to `encode_values` performs per
    /// coordinate: `G * N * L * (R + LT)`.
    pub fn multiplications_per_coordinate(&self) -> usize {
        self.groups * self.workers * self.sub_responses * self.nodes_per_group
    }
}

/// Encodes `M` program inputs into `N` worker shares with fresh noise.
pub fn encode<R: RngCore + ?Sized>(
    dataset: &[ProgramInput],
    params: &GlccParams,
    domain: &EvaluationDomain,
    rng: &mut R,
) -> Result<Vec<WorkerShare>, GlccError> {
    let u = params.program().input_len();
    if let Some(bad) = dataset.iter().position(|x| x.len() != u) {
        return Err(GlccError::InputWidth { index: bad, expected: u, got: dataset[bad].len() });
    }
    let inputs: Vec<&[FieldElement]> = dataset.iter().map(ProgramInput::values).collect();
    Encoder::new(params, domain)?.encode_values(&inputs, rng)
}
