//! Univariate polynomials over `F_q`: evaluation, Lagrange interpolation and
//! Reed-Solomon decoding with errors (Gao's extended-Euclid decoder).
//!
//! All algorithms are the quadratic textbook versions.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::field::{batch_inverse, FieldElement, FieldError, PrimeModulus};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("point set is empty")]
    Empty,
    #[error("duplicate evaluation point x={x}")]
    DuplicateNode { x: u64 },
    #[error("degree bound must be at least 1")]
    ZeroDegreeBound,
    #[error("need at least {need} points to decode, have {have}")]
    InsufficientPoints { have: usize, need: usize },
    #[error("no polynomial of degree < {degree_bound} agrees with all but {max_errors} points")]
    DecodeFailure { degree_bound: usize, max_errors: usize },
}

/// Dense polynomial, lowest-degree coefficient first, no trailing zeros.
#[derive(Clone, PartialEq, Eq)]
pub struct DensePoly {
    coeffs: Vec<FieldElement>,
    modulus: PrimeModulus,
}

impl DensePoly {
    pub fn new(modulus: PrimeModulus, coeffs: Vec<FieldElement>) -> Self {
        debug_assert!(coeffs.iter().all(|c| c.modulus() == modulus));
        let mut p = DensePoly { coeffs, modulus };
        p.trim();
        p
    }

    pub fn from_u64s(modulus: PrimeModulus, coeffs: &[u64]) -> Self {
        Self::new(modulus, coeffs.iter().map(|&c| modulus.elem(c)).collect())
    }

    pub fn zero(modulus: PrimeModulus) -> Self {
        DensePoly { coeffs: Vec::new(), modulus }
    }

    pub fn constant(c: FieldElement) -> Self {
        Self::new(c.modulus(), vec![c])
    }

    /// `prod_i (x - root_i)`.
    pub fn from_roots(modulus: PrimeModulus, roots: &[FieldElement]) -> Self {
        let mut coeffs = Vec::with_capacity(roots.len() + 1);
        coeffs.push(modulus.one());
        for &r in roots {
            // multiply in place by (x - r)
            coeffs.push(modulus.zero());
            for i in (0..coeffs.len()).rev() {
                let shifted = if i > 0 { coeffs[i - 1] } else { modulus.zero() };
                coeffs[i] = shifted - r * coeffs[i];
            }
        }
        Self::new(modulus, coeffs)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: FieldElement) -> FieldElement {
        self.coeffs.iter().rev().fold(self.modulus.zero(), |acc, &c| acc * x + c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = self.modulus.zero();
        let coeffs = (0..n).map(|i| *self.coeffs.get(i).unwrap_or(&z) + *other.coeffs.get(i).unwrap_or(&z)).collect();
        Self::new(self.modulus, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = self.modulus.zero();
        let coeffs = (0..n).map(|i| *self.coeffs.get(i).unwrap_or(&z) - *other.coeffs.get(i).unwrap_or(&z)).collect();
        Self::new(self.modulus, coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.modulus);
        }
        let mut coeffs = vec![self.modulus.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::new(self.modulus, coeffs)
    }

    pub fn scale(&self, c: FieldElement) -> Self {
        Self::new(self.modulus, self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Long division; returns `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self), PolyError> {
        let Some(dd) = divisor.degree() else {
            return Err(FieldError::DivisionByZero.into());
        };
        let Some(nd) = self.degree() else {
            return Ok((Self::zero(self.modulus), Self::zero(self.modulus)));
        };
        if nd < dd {
            return Ok((Self::zero(self.modulus), self.clone()));
        }
        let lead_inv = divisor.coeffs[dd].inv()?;
        let mut rem = self.coeffs.clone();
        let mut quot = vec![self.modulus.zero(); nd - dd + 1];
        for i in (0..=nd - dd).rev() {
            let c = rem[i + dd] * lead_inv;
            quot[i] = c;
            if c.is_zero() {
                continue;
            }
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= c * d;
            }
        }
        rem.truncate(dd);
        Ok((Self::new(self.modulus, quot), Self::new(self.modulus, rem)))
    }
}

impl fmt::Debug for DensePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DensePoly(q={}, {:?})", self.modulus, self.coeffs)
    }
}

/// Evaluation points with pairwise-distinct abscissae.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalSet {
    xs: Vec<FieldElement>,
    ys: Vec<FieldElement>,
}

impl EvalSet {
    pub fn new(points: Vec<(FieldElement, FieldElement)>) -> Result<Self, PolyError> {
        let (xs, ys): (Vec<_>, Vec<_>) = points.into_iter().unzip();
        Self::from_parts(xs, ys)
    }

    pub fn from_parts(xs: Vec<FieldElement>, ys: Vec<FieldElement>) -> Result<Self, PolyError> {
        assert_eq!(xs.len(), ys.len(), "x and y lists differ in length");
        if let Some(&first) = xs.first() {
            let q = first.modulus();
            let mut seen = BTreeSet::new();
            for (&x, &y) in xs.iter().zip(&ys) {
                if x.modulus() != q || y.modulus() != q {
                    let other = if x.modulus() != q { x } else { y };
                    return Err(FieldError::ModulusMismatch { left: q.value(), right: other.modulus().value() }.into());
                }
                if !seen.insert(x.value()) {
                    return Err(PolyError::DuplicateNode { x: x.value() });
                }
            }
        }
        Ok(EvalSet { xs, ys })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[FieldElement] {
        &self.xs
    }

    pub fn ys(&self) -> &[FieldElement] {
        &self.ys
    }

    pub fn points(&self) -> impl Iterator<Item = (FieldElement, FieldElement)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    fn modulus(&self) -> Result<PrimeModulus, PolyError> {
        self.xs.first().map(|x| x.modulus()).ok_or(PolyError::Empty)
    }

    /// The first `n` points.
    pub fn truncated(&self, n: usize) -> EvalSet {
        EvalSet { xs: self.xs[..n.min(self.len())].to_vec(), ys: self.ys[..n.min(self.len())].to_vec() }
    }
}

/// `prod_i (x - root_i)`; the empty product is 1.
pub fn vanishing_eval(roots: &[FieldElement], x: FieldElement) -> FieldElement {
    roots.iter().fold(x.modulus().one(), |acc, &r| acc * (x - r))
}

/// Barycentric weights `w_j = 1 / prod_{k != j} (x_j - x_k)`.
pub fn barycentric_weights(nodes: &[FieldElement]) -> Result<Vec<FieldElement>, PolyError> {
    let denoms: Vec<_> = nodes
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            nodes.iter().enumerate().filter(|&(k, _)| k != j).fold(xj.modulus().one(), |acc, (_, &xk)| acc * (xj - xk))
        })
        .collect();
    batch_inverse(&denoms).map_err(|e| match e {
        FieldError::ZeroInBatch { index } => PolyError::DuplicateNode { x: nodes[index].value() },
        other => other.into(),
    })
}

/// Values `l_j(x)` of the Lagrange basis over `nodes`, given precomputed
/// barycentric weights.
pub fn lagrange_basis_with_weights(
    nodes: &[FieldElement],
    weights: &[FieldElement],
    x: FieldElement,
) -> Vec<FieldElement> {
    let q = x.modulus();
    if let Some(hit) = nodes.iter().position(|&n| n == x) {
        let mut out = vec![q.zero(); nodes.len()];
        out[hit] = q.one();
        return out;
    }
    let diffs: Vec<_> = nodes.iter().map(|&n| x - n).collect();
    let total = diffs.iter().fold(q.one(), |acc, &d| acc * d);
    let inv = batch_inverse(&diffs).expect("x differs from every node");
    weights.iter().zip(inv).map(|(&w, d)| total * w * d).collect()
}

/// Values `l_j(x)` of the Lagrange basis over the given distinct nodes.
pub fn lagrange_basis_at(nodes: &[FieldElement], x: FieldElement) -> Result<Vec<FieldElement>, PolyError> {
    let weights = barycentric_weights(nodes)?;
    Ok(lagrange_basis_with_weights(nodes, &weights, x))
}

/// Unique polynomial of degree `< points.len()` through every point.
pub fn lagrange_interpolate(points: &EvalSet) -> Result<DensePoly, PolyError> {
    let q = points.modulus()?;
    let weights = barycentric_weights(points.xs())?;
    let master = DensePoly::from_roots(q, points.xs());
    let n = points.len();
    let mut acc = vec![q.zero(); n];
    for ((&xj, &yj), &wj) in points.xs().iter().zip(points.ys()).zip(&weights) {
        let scale = yj * wj;
        if scale.is_zero() {
            continue;
        }
        // synthetic division of master by (x - xj)
        let m = master.coeffs();
        let mut carry = q.zero();
        for i in (0..n).rev() {
            carry = m[i + 1] + carry * xj;
            acc[i] += carry * scale;
        }
    }
    Ok(DensePoly::new(q, acc))
}

/// Value at `x` of the interpolant through `points`, without building it.
pub fn lagrange_eval_from_points(points: &EvalSet, x: FieldElement) -> Result<FieldElement, PolyError> {
    let basis = lagrange_basis_at(points.xs(), x)?;
    Ok(basis.iter().zip(points.ys()).fold(x.modulus().zero(), |acc, (&l, &y)| acc + l * y))
}

/// Result of a successful decode, with the positions the decoder judged
/// erroneous (located by trial evaluation of the error locator).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub poly: DensePoly,
    pub error_positions: Vec<usize>,
}

/// Reed-Solomon decoding with at most `max_errors` wrong values.
pub fn rs_decode(points: &EvalSet, degree_bound: usize, max_errors: usize) -> Result<DensePoly, PolyError> {
    rs_decode_detailed(points, degree_bound, max_errors).map(|d| d.poly)
}

/// Gao's decoder: partial extended Euclid on `(prod (x - x_i), interpolant)`
/// stopped once the remainder drops below degree `(n + k) / 2`.
pub fn rs_decode_detailed(points: &EvalSet, degree_bound: usize, max_errors: usize) -> Result<Decoded, PolyError> {
    if degree_bound == 0 {
        return Err(PolyError::ZeroDegreeBound);
    }
    let need = degree_bound + 2 * max_errors;
    if points.len() < need {
        return Err(PolyError::InsufficientPoints { have: points.len(), need });
    }
    let q = points.modulus()?;
    let n = points.len();
    let failure = PolyError::DecodeFailure { degree_bound, max_errors };

    let g1 = lagrange_interpolate(points)?;
    let stop = |p: &DensePoly| p.degree().is_none_or(|d| 2 * d < n + degree_bound);

    let (g, v) = if stop(&g1) {
        (g1, DensePoly::constant(q.one()))
    } else {
        let mut r_prev = DensePoly::from_roots(q, points.xs());
        let mut r_cur = g1;
        let mut v_prev = DensePoly::zero(q);
        let mut v_cur = DensePoly::constant(q.one());
        while !stop(&r_cur) {
            let (quot, rem) = r_prev.div_rem(&r_cur)?;
            let v_next = v_prev.sub(&quot.mul(&v_cur));
            r_prev = core::mem::replace(&mut r_cur, rem);
            v_prev = core::mem::replace(&mut v_cur, v_next);
        }
        (r_cur, v_cur)
    };

    let (f, rem) = g.div_rem(&v)?;
    if !rem.is_zero() || f.degree().is_some_and(|d| d >= degree_bound) {
        return Err(failure);
    }
    let error_positions: Vec<usize> =
        points.points().enumerate().filter(|&(_, (x, y))| f.eval(x) != y).map(|(i, _)| i).collect();
    if error_positions.len() > max_errors {
        return Err(failure);
    }
    debug_assert!(error_positions.iter().all(|&i| v.eval(points.xs()[i]).is_zero()));
    Ok(Decoded { poly: f, error_positions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f(q: u64) -> PrimeModulus {
        PrimeModulus::new(q).unwrap()
    }

    fn pts(q: PrimeModulus, v: &[(u64, u64)]) -> EvalSet {
        EvalSet::new(v.iter().map(|&(x, y)| (q.elem(x), q.elem(y))).collect()).unwrap()
    }

    fn random_poly(q: PrimeModulus, len: usize, rng: &mut ChaCha8Rng) -> DensePoly {
        DensePoly::new(q, (0..len).map(|_| q.random(rng)).collect())
    }

    fn distinct_xs(q: PrimeModulus, n: usize, rng: &mut ChaCha8Rng) -> Vec<FieldElement> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        while out.len() < n {
            let x = q.random(rng);
            if seen.insert(x.value()) {
                out.push(x);
            }
        }
        out
    }

    fn power_sum(p: &DensePoly, x: FieldElement) -> FieldElement {
        p.coeffs().iter().enumerate().fold(x.modulus().zero(), |acc, (i, &c)| acc + c * x.pow(i as u64))
    }

    #[test]
    fn eval_examples() {
        let q = f(17);
        assert_eq!(DensePoly::from_u64s(q, &[5]).eval(q.elem(3)).value(), 5);
        assert_eq!(DensePoly::from_u64s(q, &[1, 0, 1]).eval(q.elem(4)).value(), 0);
        assert!(DensePoly::zero(q).eval(q.elem(4)).is_zero());
        assert_eq!(DensePoly::from_u64s(q, &[0, 0, 0]).degree(), None);
    }

    #[test]
    fn eval_matches_power_sum() {
        let q = f((1 << 27) - 39);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for len in 0..30 {
            let p = random_poly(q, len, &mut rng);
            let x = q.random(&mut rng);
            assert_eq!(p.eval(x), power_sum(&p, x));
        }
    }

    #[test]
    fn from_roots_vanishes() {
        let q = f(97);
        let roots: Vec<_> = [3u64, 4, 10].iter().map(|&r| q.elem(r)).collect();
        let p = DensePoly::from_roots(q, &roots);
        assert_eq!(p.degree(), Some(3));
        for x in 0..97 {
            let x = q.elem(x);
            assert_eq!(p.eval(x), vanishing_eval(&roots, x));
        }
    }

    #[test]
    fn div_rem_reconstructs() {
        let q = f(97);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = random_poly(q, rng.random_range(0..20), &mut rng);
            let b = random_poly(q, rng.random_range(1..10), &mut rng);
            if b.is_zero() {
                continue;
            }
            let (quot, rem) = a.div_rem(&b).unwrap();
            assert_eq!(quot.mul(&b).add(&rem), a);
            assert!(rem.degree().is_none_or(|d| d < b.degree().unwrap()));
        }
    }

    #[test]
    fn interpolation_examples() {
        let q = f(17);
        let p = lagrange_interpolate(&pts(q, &[(1, 7)])).unwrap();
        assert_eq!(p, DensePoly::from_u64s(q, &[7]));
        let p = lagrange_interpolate(&pts(q, &[(0, 1), (1, 2), (2, 5)])).unwrap();
        assert_eq!(p, DensePoly::from_u64s(q, &[1, 0, 1]));
        assert_eq!(lagrange_interpolate(&EvalSet::new(Vec::new()).unwrap()), Err(PolyError::Empty));
    }

    #[test]
    fn duplicate_nodes_rejected() {
        let q = f(17);
        let err = EvalSet::new(vec![(q.elem(2), q.elem(1)), (q.elem(2), q.elem(3))]);
        assert_eq!(err, Err(PolyError::DuplicateNode { x: 2 }));
        assert_eq!(barycentric_weights(&[q.elem(1), q.elem(1)]), Err(PolyError::DuplicateNode { x: 1 }));
    }

    #[test]
    fn interpolation_round_trip_up_to_degree_64() {
        let q = f(97);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for deg in 0..=64 {
            let p = random_poly(q, deg + 1, &mut rng);
            let xs = distinct_xs(q, deg + 1, &mut rng);
            let ys = xs.iter().map(|&x| p.eval(x)).collect();
            let set = EvalSet::from_parts(xs, ys).unwrap();
            assert_eq!(lagrange_interpolate(&set).unwrap(), p, "degree {deg}");
        }
    }

    #[test]
    fn barycentric_examples() {
        let q = f(17);
        let v = lagrange_eval_from_points(&pts(q, &[(3, 9), (4, 2)]), q.elem(3)).unwrap();
        assert_eq!(v.value(), 9);
        let v = lagrange_eval_from_points(&pts(q, &[(0, 0), (1, 2)]), q.elem(2)).unwrap();
        assert_eq!(v.value(), 4);
    }

    #[test]
    fn barycentric_agrees_with_interpolant() {
        let q = f((1 << 27) - 39);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in 1..25 {
            let xs = distinct_xs(q, n, &mut rng);
            let ys = (0..n).map(|_| q.random(&mut rng)).collect();
            let set = EvalSet::from_parts(xs, ys).unwrap();
            let p = lagrange_interpolate(&set).unwrap();
            for x in distinct_xs(q, 5, &mut rng).into_iter().chain(set.xs().iter().copied()) {
                assert_eq!(lagrange_eval_from_points(&set, x).unwrap(), p.eval(x));
            }
        }
    }

    #[test]
    fn vanishing_examples() {
        let q = f(97);
        assert_eq!(vanishing_eval(&[], q.elem(5)), q.one());
        assert_eq!(vanishing_eval(&[q.elem(3), q.elem(4)], q.elem(1)).value(), 6);
        assert_eq!(vanishing_eval(&[q.elem(1), q.elem(2)], q.elem(3)).value(), 2);
    }

    #[test]
    fn rs_decode_clean_and_single_error() {
        let q = f(97);
        let p = DensePoly::from_u64s(q, &[3, 1, 4, 1]);
        let xs: Vec<_> = (1..=6).map(|x| q.elem(x)).collect();
        let ys: Vec<_> = xs.iter().map(|&x| p.eval(x)).collect();
        let clean = EvalSet::from_parts(xs.clone(), ys.clone()).unwrap();
        assert_eq!(rs_decode(&clean.truncated(4), 4, 0).unwrap(), p);
        assert_eq!(rs_decode(&clean, 4, 1).unwrap(), p);

        let mut bad = ys.clone();
        bad[2] += q.one();
        let d = rs_decode_detailed(&EvalSet::from_parts(xs.clone(), bad).unwrap(), 4, 1).unwrap();
        assert_eq!(d.poly, p);
        assert_eq!(d.error_positions, [2]);

        // with no error budget, a single wrong value must be refused
        let mut bad = ys;
        bad[5] += q.one();
        assert!(matches!(
            rs_decode(&EvalSet::from_parts(xs, bad).unwrap(), 4, 0),
            Err(PolyError::DecodeFailure { .. })
        ));
    }

    #[test]
    fn rs_decode_preconditions() {
        let q = f(97);
        let set = pts(q, &[(1, 1), (2, 2), (3, 3)]);
        assert_eq!(rs_decode(&set, 2, 1), Err(PolyError::InsufficientPoints { have: 3, need: 4 }));
        assert_eq!(rs_decode(&set, 0, 0), Err(PolyError::ZeroDegreeBound));
    }

    #[test]
    fn rs_decode_random_corruptions() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for trial in 0..300 {
            let q = f(if trial % 2 == 0 { 97 } else { (1 << 27) - 39 });
            let k = rng.random_range(1..=12);
            let e = rng.random_range(0..=4);
            let extra = rng.random_range(0..=3);
            let n = k + 2 * e + extra;
            let p = random_poly(q, k, &mut rng);
            let xs = distinct_xs(q, n, &mut rng);
            let mut ys: Vec<_> = xs.iter().map(|&x| p.eval(x)).collect();
            let errors = rng.random_range(0..=e);
            for i in rand::seq::index::sample(&mut rng, n, errors) {
                ys[i] += q.random_nonzero(&mut rng);
            }
            let set = EvalSet::from_parts(xs, ys).unwrap();
            let d = rs_decode_detailed(&set, k, e).unwrap();
            assert_eq!(d.poly, p);
            assert_eq!(d.error_positions.len(), errors);
        }
    }

    /// Exhaustive over all error patterns of weight e+1 on a small code: the
    /// decoder either fails or returns a polynomial meeting the agreement
    /// bound. It never hands back something that disagrees with more than
    /// `e` points.
    #[test]
    fn rs_decode_overload_never_silently_wrong() {
        let q = f(97);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let (k, e) = (3, 1);
        let n = k + 2 * e;
        let p = random_poly(q, k, &mut rng);
        let xs = distinct_xs(q, n, &mut rng);
        let ys: Vec<_> = xs.iter().map(|&x| p.eval(x)).collect();
        for i in 0..n {
            for j in (i + 1)..n {
                for _ in 0..20 {
                    let mut bad = ys.clone();
                    bad[i] += q.random_nonzero(&mut rng);
                    bad[j] += q.random_nonzero(&mut rng);
                    let set = EvalSet::from_parts(xs.clone(), bad).unwrap();
                    if let Ok(d) = rs_decode(&set, k, e) {
                        let agree = set.points().filter(|&(x, y)| d.eval(x) == y).count();
                        assert!(agree >= n - e);
                        assert!(d.degree().is_none_or(|deg| deg < k));
                    }
                }
            }
        }
    }
}
