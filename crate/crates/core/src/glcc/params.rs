use alloc::sync::Arc;

use super::GlccError;
use crate::field::PrimeModulus;
use crate::program::PolyProgram;

/// The integer knobs of a GLCC deployment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dimensions {
    /// `N`
    pub workers: usize,
    /// `M`
    pub inputs: usize,
    /// `T`, colluding workers that must learn nothing.
    pub collusion: usize,
    /// `A`, workers that may return arbitrary values.
    pub adversaries: usize,
    /// `G`
    pub groups: usize,
    /// `L`, sub-responses per worker.
    pub sub_responses: usize,
}

impl Dimensions {
    /// `R = M / G`; only meaningful when `G | M`.
    pub fn group_size(&self) -> usize {
        self.inputs / self.groups
    }

    /// Nodes per group: `R + LT`.
    pub fn nodes_per_group(&self) -> usize {
        self.group_size() + self.sub_responses * self.collusion
    }

    /// `G(R + LT) + LN`.
    pub fn distinct_points(&self) -> usize {
        self.groups * self.nodes_per_group() + self.sub_responses * self.workers
    }

    /// Degree of the response polynomial: `D(R + LT - 1) + (G - 1)R`.
    pub fn response_degree(&self, degree: usize) -> usize {
        degree * (self.nodes_per_group() - 1) + (self.groups - 1) * self.group_size()
    }

    /// Sub-responses needed to decode with `A` adversaries:
    /// `deg h + 1 + 2AL`.
    pub fn sub_responses_needed(&self, degree: usize) -> usize {
        self.response_degree(degree) + 1 + 2 * self.adversaries * self.sub_responses
    }

    /// `K = ceil((D(M - G + GLT) + (G - 1)M + G + 2AGL) / (GL))`, in exact
    /// integer arithmetic.
    pub fn recovery_threshold(&self, degree: usize) -> usize {
        let (m, t, a, g, l) = (self.inputs, self.collusion, self.adversaries, self.groups, self.sub_responses);
        let gl = g * l;
        let num = degree * (m - g + gl * t) + (g - 1) * m + g + 2 * a * gl;
        num.div_ceil(gl)
    }

    fn check_shape(&self) -> Result<(), GlccError> {
        if self.groups == 0 {
            return Err(GlccError::InvalidParameter("G must be at least 1"));
        }
        if self.sub_responses == 0 {
            return Err(GlccError::InvalidParameter("L must be at least 1"));
        }
        if self.inputs == 0 {
            return Err(GlccError::InvalidParameter("M must be at least 1"));
        }
        if !self.inputs.is_multiple_of(self.groups) {
            return Err(GlccError::GroupsDontDivide { inputs: self.inputs, groups: self.groups });
        }
        Ok(())
    }
}

/// Validated parameters: dimensions, field and the program being computed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlccParams {
    dims: Dimensions,
    modulus: PrimeModulus,
    program: Arc<PolyProgram>,
}

impl GlccParams {
    pub fn new(dims: Dimensions, modulus: PrimeModulus, program: Arc<PolyProgram>) -> Result<Self, GlccError> {
        dims.check_shape()?;
        let need = dims.distinct_points() as u128;
        if (modulus.value() as u128) < need {
            return Err(GlccError::FieldTooSmall { q: modulus.value(), need });
        }
        let k = dims.recovery_threshold(program.declared_degree());
        if dims.workers < k {
            return Err(GlccError::TooFewWorkers { workers: dims.workers, threshold: k });
        }
        Ok(GlccParams { dims, modulus, program })
    }

    pub fn dims(&self) -> &Dimensions {
        &self.dims
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn program(&self) -> &PolyProgram {
        &self.program
    }

    pub fn program_arc(&self) -> Arc<PolyProgram> {
        Arc::clone(&self.program)
    }

    pub fn workers(&self) -> usize {
        self.dims.workers
    }

    pub fn inputs(&self) -> usize {
        self.dims.inputs
    }

    pub fn collusion(&self) -> usize {
        self.dims.collusion
    }

    pub fn adversaries(&self) -> usize {
        self.dims.adversaries
    }

    pub fn groups(&self) -> usize {
        self.dims.groups
    }

    pub fn sub_responses(&self) -> usize {
        self.dims.sub_responses
    }

    pub fn group_size(&self) -> usize {
        self.dims.group_size()
    }

    /// Declared total degree `D` of the program.
    pub fn degree(&self) -> usize {
        self.program.declared_degree()
    }

    pub fn recovery_threshold(&self) -> usize {
        self.dims.recovery_threshold(self.degree())
    }

    pub fn response_degree(&self) -> usize {
        self.dims.response_degree(self.degree())
    }

    pub fn sub_responses_needed(&self) -> usize {
        self.dims.sub_responses_needed(self.degree())
    }
}

/// Free-function form of [`GlccParams::recovery_threshold`].
pub fn recovery_threshold(params: &GlccParams) -> usize {
    params.recovery_threshold()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{builtin_perceptron_gradient, builtin_square_map};

    fn dims(m: usize, t: usize, a: usize, g: usize, l: usize) -> Dimensions {
        Dimensions { workers: 0, inputs: m, collusion: t, adversaries: a, groups: g, sub_responses: l }
    }

    /// Reference with rationals: `ceil(D((M-G)/(GL) + T) + ((G-1)M + G)/(GL) + 2A)`.
    fn threshold_rational(d: usize, m: usize, t: usize, a: usize, g: usize, l: usize) -> usize {
        // everything over the common denominator GL
        let den = (g * l) as i64;
        let num = d as i64 * ((m - g) as i64 + t as i64 * den) + ((g - 1) * m + g) as i64 + 2 * a as i64 * den;
        ((num + den - 1) / den) as usize
    }

    #[test]
    fn illustrative_threshold() {
        assert_eq!(dims(4, 1, 1, 2, 2).recovery_threshold(2), 7);
        assert_eq!(dims(4, 1, 1, 2, 2).response_degree(2), 8);
    }

    #[test]
    fn lcc_special_case() {
        for d in 0..8 {
            for m in 1..10 {
                for t in 0..4 {
                    for a in 0..3 {
                        assert_eq!(dims(m, t, a, 1, 1).recovery_threshold(d), d * (m + t - 1) + 2 * a + 1);
                    }
                }
            }
        }
    }

    #[test]
    fn training_configurations() {
        assert_eq!(dims(5, 1, 0, 1, 2).recovery_threshold(7), 22);
        assert_eq!(dims(5, 1, 0, 5, 1).recovery_threshold(7), 12);
        assert_eq!(dims(5, 1, 0, 1, 1).recovery_threshold(7), 36);
    }

    #[test]
    fn threshold_matches_sub_response_count() {
        for d in 0..6 {
            for g in 1..5 {
                for r in 1..5 {
                    for l in 1..4 {
                        for t in 0..3 {
                            for a in 0..3 {
                                let dm = dims(g * r, t, a, g, l);
                                let k = dm.recovery_threshold(d);
                                assert_eq!(k, threshold_rational(d, g * r, t, a, g, l));
                                let need = dm.sub_responses_needed(d);
                                assert!(k * l >= need && (k - 1) * l < need);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn validation() {
        let q = PrimeModulus::new(97).unwrap();
        let sq = Arc::new(builtin_square_map());
        let ok = Dimensions { workers: 8, ..dims(4, 1, 1, 2, 2) };
        assert!(GlccParams::new(ok, q, sq.clone()).is_ok());
        assert_eq!(
            GlccParams::new(Dimensions { groups: 3, ..ok }, q, sq.clone()),
            Err(GlccError::GroupsDontDivide { inputs: 4, groups: 3 })
        );
        assert_eq!(
            GlccParams::new(Dimensions { workers: 6, ..ok }, q, sq.clone()),
            Err(GlccError::TooFewWorkers { workers: 6, threshold: 7 })
        );
        let small = PrimeModulus::new(23).unwrap();
        assert_eq!(GlccParams::new(ok, small, sq.clone()), Err(GlccError::FieldTooSmall { q: 23, need: 24 }));
        assert!(GlccParams::new(Dimensions { sub_responses: 0, ..ok }, q, sq.clone()).is_err());
        assert!(GlccParams::new(Dimensions { groups: 0, ..ok }, q, sq).is_err());
        let pg = Arc::new(builtin_perceptron_gradient(2, 2));
        let p = GlccParams::new(Dimensions { workers: 12, ..dims(5, 1, 0, 5, 1) }, q, pg).unwrap();
        assert_eq!(p.recovery_threshold(), 12);
    }
}
