//! Fixed-point embedding of reals into the field.
//!
//! `Q(x; l)` scales by `2^l`, rounds half up, and maps negatives to
//! `q + Round(2^l x)`. `Q^-1` reads the lower half of the field as
//! nonnegative and the upper half as negative.

use glcc_core::{FieldElement, PrimeModulus};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuantError {
    #[error("{value} is not finite")]
    NotFinite { value: f64 },
    #[error("quantizing {value} at {bits} bits gives magnitude {magnitude}, beyond the field half-range {limit}")]
    Overflow { value: f64, bits: u32, magnitude: f64, limit: u64 },
    #[error("worst-case gradient magnitude {bound} reaches the field half-range {limit}")]
    GradientBound { bound: String, limit: u64 },
    #[error("weight {value} of model {model} exceeds the declared bound {bound}")]
    WeightOutOfRange { model: usize, index: usize, value: f64, bound: f64 },
    #[error("feature {value} at row {row} exceeds the declared bound {bound}")]
    FeatureOutOfRange { row: usize, value: f64, bound: f64 },
}

/// `Round` as a floor-based rule: fractional part below one half rounds
/// down, anything else up.
pub fn round_half_up(v: f64) -> f64 {
    let f = v.floor();
    if v - f < 0.5 {
        f
    } else {
        f + 1.0
    }
}

fn half_range(q: PrimeModulus) -> u64 {
    (q.value() - 1) / 2
}

pub fn quantize(x: f64, bits: u32, q: PrimeModulus) -> Result<FieldElement, QuantError> {
    if !x.is_finite() {
        return Err(QuantError::NotFinite { value: x });
    }
    let r = round_half_up(x * 2f64.powi(bits as i32));
    let limit = half_range(q);
    if r.abs() >= limit as f64 {
        return Err(QuantError::Overflow { value: x, bits, magnitude: r.abs(), limit });
    }
    Ok(q.from_i64(r as i64))
}

pub fn dequantize(x: FieldElement, bits: u32) -> f64 {
    x.to_signed() as f64 * 2f64.powi(-(bits as i32))
}

/// Precisions for the perceptron gradient: data at `l_x` bits, weights at
/// `l_w`, labels at `l_y = 2 l_x + 2 l_w` so both gradient terms land at
/// `l_out = 4 l_x + 3 l_w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantConfig {
    pub l_x: u32,
    pub l_w: u32,
    pub modulus: PrimeModulus,
}

impl QuantConfig {
    pub fn l_y(&self) -> u32 {
        2 * self.l_x + 2 * self.l_w
    }

    pub fn l_out(&self) -> u32 {
        4 * self.l_x + 3 * self.l_w
    }

    /// Largest possible `|sum_rows x (x.w)^3 - x (x.w) y|` over quantized
    /// values, for `batch` rows of `features` features bounded by
    /// `feature_bound` and weights bounded by `weight_bound`. `None` if it
    /// does not even fit in 128 bits.
    pub fn gradient_bound(&self, batch: usize, features: usize, feature_bound: f64, weight_bound: f64) -> Option<u128> {
        let xq = (feature_bound * 2f64.powi(self.l_x as i32)).ceil();
        let wq = (weight_bound * 2f64.powi(self.l_w as i32)).ceil();
        if !(xq.is_finite() && wq.is_finite()) || xq >= 2f64.powi(40) || wq >= 2f64.powi(40) {
            return None;
        }
        let (xq, wq) = (xq as u128, wq as u128);
        let yq = 1u128.checked_shl(self.l_y())?;
        let dot = (features as u128).checked_mul(xq)?.checked_mul(wq)?;
        let cube = dot.checked_mul(dot)?.checked_mul(dot)?;
        let row = xq.checked_mul(cube.checked_add(dot.checked_mul(yq)?)?)?;
        row.checked_mul(batch as u128)
    }

    /// The overflow guard: the bound must stay below `(q-1)/2` so that
    /// dequantization reads the sign correctly.
    pub fn check_gradient_bound(
        &self,
        batch: usize,
        features: usize,
        feature_bound: f64,
        weight_bound: f64,
    ) -> Result<(), QuantError> {
        let limit = half_range(self.modulus);
        match self.gradient_bound(batch, features, feature_bound, weight_bound) {
            Some(b) if b < limit as u128 => Ok(()),
            Some(b) => Err(QuantError::GradientBound { bound: b.to_string(), limit }),
            None => Err(QuantError::GradientBound { bound: "more than 2^128".into(), limit }),
        }
    }
}
