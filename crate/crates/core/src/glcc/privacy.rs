use alloc::vec::Vec;

use super::{EvaluationDomain, GlccError, GlccParams};
use crate::field::FieldElement;
use crate::poly::lagrange_basis_at;

/// The `LT x LT` matrix `F_g^T` mapping group `g`'s noise onto the shares a
/// colluding set sees: entry `(i, j)` is `b_{g,R+j}(alpha_i)`, rows ordered
/// by worker in the set, then by sub-response index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskingMatrix {
    size: usize,
    entries: Vec<FieldElement>,
}

impl MaskingMatrix {
    pub fn build(
        params: &GlccParams,
        domain: &EvaluationDomain,
        g: usize,
        subset: &[usize],
    ) -> Result<Self, GlccError> {
        Ok(masking_decomposition(params, domain, g, subset, &[])?.1)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, row: usize, col: usize) -> FieldElement {
        self.entries[row * self.size + col]
    }

    /// `F z` for a column of noise values.
    pub fn apply(&self, z: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(z.len(), self.size);
        self.entries
            .chunks(self.size)
            .map(|row| row.iter().zip(z).fold(z[0].modulus().zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    /// Rank by Gaussian elimination over the field.
    pub fn rank(&self) -> usize {
        let n = self.size;
        let mut m = self.entries.clone();
        let mut rank = 0;
        for col in 0..n {
            let Some(pivot) = (rank..n).find(|&r| !m[r * n + col].is_zero()) else {
                continue;
            };
            for c in 0..n {
                m.swap(pivot * n + c, rank * n + c);
            }
            let inv = m[rank * n + col].inv().expect("pivot is nonzero");
            for r in 0..n {
                if r == rank {
                    continue;
                }
                let factor = m[r * n + col] * inv;
                if factor.is_zero() {
                    continue;
                }
                for c in col..n {
                    let sub = factor * m[rank * n + c];
                    m[r * n + c] -= sub;
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn is_invertible(&self) -> bool {
        self.rank() == self.size
    }
}

/// Splits the colluders' view of group `g` into a data part and a noise
/// part: `f_g(alpha) = u_g(alpha) + F_g^T z_g`. Returns `u_g` evaluated at
/// the colluders' points (one vector per row, width of `data`) and `F_g^T`.
/// `data` holds the `R` inputs of group `g`; pass an empty slice to skip
/// `u_g`.
pub fn masking_decomposition(
    params: &GlccParams,
    domain: &EvaluationDomain,
    g: usize,
    subset: &[usize],
    data: &[&[FieldElement]],
) -> Result<(Vec<Vec<FieldElement>>, MaskingMatrix), GlccError> {
    let (r, l_count) = (params.group_size(), params.sub_responses());
    let size = l_count * subset.len();
    if subset.len() != params.collusion() {
        return Err(GlccError::SubsetSize { expected: params.collusion(), got: subset.len() });
    }
    if g >= params.groups() {
        return Err(GlccError::InvalidParameter("group index out of range"));
    }
    if let Some(&bad) = subset.iter().find(|&&n| n >= params.workers()) {
        return Err(GlccError::UnknownWorker(bad));
    }
    if !data.is_empty() && data.len() != r {
        return Err(GlccError::DatasetSize { expected: r, got: data.len() });
    }
    let width = data.first().map_or(0, |d| d.len());
    let zero = params.modulus().zero();
    let nodes = domain.group_nodes(g);
    let mut entries = Vec::with_capacity(size * size);
    let mut u_rows = Vec::with_capacity(size);
    for &n in subset {
        for l in 0..l_count {
            let basis = match lagrange_basis_at(nodes, domain.alpha(n, l)) {
                Ok(b) => b,
                // repeated nodes: the construction itself is broken, report
                // a singular matrix rather than an error
                Err(_) => alloc::vec![zero; nodes.len()],
            };
            entries.extend_from_slice(&basis[r..]);
            if !data.is_empty() {
                let mut u = alloc::vec![zero; width];
                for (&c, x) in basis[..r].iter().zip(data) {
                    for (a, &v) in u.iter_mut().zip(x.iter()) {
                        *a += c * v;
                    }
                }
                u_rows.push(u);
            }
        }
    }
    Ok((u_rows, MaskingMatrix { size, entries }))
}

/// Passes iff `F_g^T` is invertible for every group.
pub fn privacy_certificate(
    params: &GlccParams,
    domain: &EvaluationDomain,
    subset: &[usize],
) -> Result<bool, GlccError> {
    if params.collusion() == 0 {
        return Err(GlccError::InvalidParameter("privacy certificate needs T >= 1"));
    }
    for g in 0..params.groups() {
        if !MaskingMatrix::build(params, domain, g, subset)?.is_invertible() {
            return Ok(false);
        }
    }
    Ok(true)
}
