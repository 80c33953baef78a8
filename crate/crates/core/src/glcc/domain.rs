use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::{GlccError, GlccParams};
use crate::field::{FieldElement, PrimeModulus};
use crate::seed::SplitMix64;

/// How the `beta` and `alpha` points are drawn from the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DomainLayout {
    /// `0, 1, 2, ...` over the beta grid (group-major) then the alpha grid
    /// (worker-major).
    #[default]
    Sequential,
    /// Data nodes first: `beta_{g,r} = (g-1)R + r` for `r <= R`, then the
    /// noise nodes of each group, then alpha. Zero is never used. For
    /// `M=4, G=L=2, T=1` this reproduces the textbook example,
    /// `beta_1 = {1,2,5,6}` and `beta_2 = {3,4,7,8}`.
    DataFirst,
    /// Distinct uniformly random points, reproducible from the seed.
    Shuffled { seed: u64 },
}

/// The pairwise-distinct evaluation points of a GLCC code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationDomain {
    /// `G x (R + LT)`
    beta: Vec<Vec<FieldElement>>,
    /// `N x L`
    alpha: Vec<Vec<FieldElement>>,
    group_size: usize,
}

impl EvaluationDomain {
    /// Checks that every point is distinct and the grids are rectangular.
    pub fn new(
        beta: Vec<Vec<FieldElement>>,
        alpha: Vec<Vec<FieldElement>>,
        group_size: usize,
    ) -> Result<Self, GlccError> {
        let rect = |g: &[Vec<FieldElement>]| g.windows(2).all(|w| w[0].len() == w[1].len());
        if !rect(&beta) || !rect(&alpha) {
            return Err(GlccError::InvalidParameter("domain grids must be rectangular"));
        }
        if beta.first().is_some_and(|b| b.len() < group_size) {
            return Err(GlccError::InvalidParameter("fewer beta nodes than group size"));
        }
        let mut seen = BTreeSet::new();
        for &p in beta.iter().chain(&alpha).flatten() {
            if !seen.insert(p.value()) {
                return Err(GlccError::RepeatedPoint(p.value()));
            }
        }
        Ok(EvaluationDomain { beta, alpha, group_size })
    }

    /// No distinctness check. Only useful to exhibit what breaks when the
    /// invariant does not hold.
    pub fn new_unchecked(beta: Vec<Vec<FieldElement>>, alpha: Vec<Vec<FieldElement>>, group_size: usize) -> Self {
        EvaluationDomain { beta, alpha, group_size }
    }

    pub fn beta(&self, g: usize, r: usize) -> FieldElement {
        self.beta[g][r]
    }

    pub fn alpha(&self, n: usize, l: usize) -> FieldElement {
        self.alpha[n][l]
    }

    /// All `R + LT` interpolation nodes of group `g`.
    pub fn group_nodes(&self, g: usize) -> &[FieldElement] {
        &self.beta[g]
    }

    /// The `R` data nodes of group `g`.
    pub fn data_nodes(&self, g: usize) -> &[FieldElement] {
        &self.beta[g][..self.group_size]
    }

    pub fn worker_points(&self, n: usize) -> &[FieldElement] {
        &self.alpha[n]
    }

    pub fn groups(&self) -> usize {
        self.beta.len()
    }

    pub fn workers(&self) -> usize {
        self.alpha.len()
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    /// Every point, beta grid first.
    pub fn all_points(&self) -> impl Iterator<Item = FieldElement> + '_ {
        self.beta.iter().chain(&self.alpha).flatten().copied()
    }

    /// Whether the grid dimensions match `params`.
    pub fn matches(&self, params: &GlccParams) -> bool {
        let d = params.dims();
        self.group_size == d.group_size()
            && self.beta.len() == d.groups
            && self.beta.iter().all(|b| b.len() == d.nodes_per_group())
            && self.alpha.len() == d.workers
            && self.alpha.iter().all(|a| a.len() == d.sub_responses)
    }
}

/// Lays out the `G(R+LT) + LN` distinct points.
pub fn build_domain(params: &GlccParams, layout: DomainLayout) -> Result<EvaluationDomain, GlccError> {
    let d = params.dims();
    let q = params.modulus();
    let total = d.distinct_points();
    let (per_group, r) = (d.nodes_per_group(), d.group_size());
    let need = match layout {
        DomainLayout::DataFirst => total as u128 + 1,
        _ => total as u128,
    };
    if (q.value() as u128) < need {
        return Err(GlccError::FieldTooSmall { q: q.value(), need });
    }
    let points: Vec<FieldElement> = match layout {
        DomainLayout::Sequential => (0..total as u64).map(|v| q.elem(v)).collect(),
        DomainLayout::DataFirst => {
            let mut pts = Vec::with_capacity(total);
            let noise = per_group - r;
            for g in 0..d.groups {
                pts.extend((0..r).map(|i| q.elem((g * r + i + 1) as u64)));
                let base = d.inputs + g * noise + 1;
                pts.extend((0..noise).map(|j| q.elem((base + j) as u64)));
            }
            let base = d.groups * per_group + 1;
            pts.extend((0..d.workers * d.sub_responses).map(|i| q.elem((base + i) as u64)));
            pts
        }
        DomainLayout::Shuffled { seed } => random_distinct(q, total, seed),
    };
    let (beta_flat, alpha_flat) = points.split_at(d.groups * per_group);
    let beta = beta_flat.chunks(per_group.max(1)).map(<[_]>::to_vec).collect();
    let alpha = alpha_flat.chunks(d.sub_responses).map(<[_]>::to_vec).collect();
    EvaluationDomain::new(beta, alpha, r)
}

fn random_distinct(q: PrimeModulus, count: usize, seed: u64) -> Vec<FieldElement> {
    let mut rng = SplitMix64::new(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = q.random(&mut rng);
        if seen.insert(x.value()) {
            out.push(x);
        }
    }
    out
}
