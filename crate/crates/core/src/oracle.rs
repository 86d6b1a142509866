//! Closed-form ensemble averages of the chaotic-light model.
//!
//! Every product mean carries a constant offset `Ī₀²` contributed by
//! multi-pair windows; the corrected forms remove it and leave the
//! single-pair correlations. Angles enter only through `Δ = θ1 − θ2`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which pair of analyzer ports a product moment is taken over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortPairKind {
    /// ⟨I1n I2p⟩
    CrossNp,
    /// ⟨I1p I2n⟩
    CrossPn,
    /// ⟨I1n I2n⟩
    CrossNn,
    /// ⟨I1p I2p⟩
    CrossPp,
    /// ⟨I1n I1p⟩
    SameSide1,
    /// ⟨I2n I2p⟩
    SameSide2,
}

impl PortPairKind {
    pub const ALL: [PortPairKind; 6] = [
        PortPairKind::CrossNp,
        PortPairKind::CrossPn,
        PortPairKind::CrossNn,
        PortPairKind::CrossPp,
        PortPairKind::SameSide1,
        PortPairKind::SameSide2,
    ];

    pub const CROSS: [PortPairKind; 4] = [
        PortPairKind::CrossNp,
        PortPairKind::CrossPn,
        PortPairKind::CrossNn,
        PortPairKind::CrossPp,
    ];

    /// Position in [`PortPairKind::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_cross(self) -> bool {
        !matches!(self, PortPairKind::SameSide1 | PortPairKind::SameSide2)
    }

    pub fn name(self) -> &'static str {
        match self {
            PortPairKind::CrossNp => "cross_np",
            PortPairKind::CrossPn => "cross_pn",
            PortPairKind::CrossNn => "cross_nn",
            PortPairKind::CrossPp => "cross_pp",
            PortPairKind::SameSide1 => "same_side_1",
            PortPairKind::SameSide2 => "same_side_2",
        }
    }
}

impl fmt::Display for PortPairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PortPairKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PortPairKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown port pair kind '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleParams<T> {
    mean_intensity: T,
    /// θ1 − θ2 in radians.
    pub delta_theta: T,
}

impl<T: Scalar> OracleParams<T> {
    pub fn new(mean_intensity: T, delta_theta: T) -> Result<Self> {
        if !mean_intensity.is_positive_finite() {
            return Err(Error::Domain(format!(
                "mean intensity must be positive and finite, got {mean_intensity}"
            )));
        }
        Ok(Self {
            mean_intensity,
            delta_theta,
        })
    }

    pub fn mean_intensity(&self) -> T {
        self.mean_intensity
    }

    /// The constant `Ī₀²` shared by all six product means.
    pub fn offset(&self) -> T {
        self.mean_intensity * self.mean_intensity
    }
}

/// Uncorrected ensemble average of the intensity product for `kind`.
pub fn raw_product_mean<T: Scalar>(kind: PortPairKind, params: &OracleParams<T>) -> T {
    params.offset() + corrected_product_mean(kind, params)
}

/// Product mean with the multi-pair offset removed.
pub fn corrected_product_mean<T: Scalar>(kind: PortPairKind, params: &OracleParams<T>) -> T {
    let i0sq = params.offset();
    let (s, c) = params.delta_theta.sin_cos();
    match kind {
        PortPairKind::CrossNp | PortPairKind::CrossPn => i0sq * c * c,
        PortPairKind::CrossNn | PortPairKind::CrossPp => i0sq * s * s,
        PortPairKind::SameSide1 | PortPairKind::SameSide2 => T::zero(),
    }
}

/// ⟨nn⟩ + ⟨pp⟩ − ⟨pn⟩ − ⟨np⟩ of the raw means, `−2 Ī₀² cos 2Δ`.
pub fn bell_correlation_raw<T: Scalar>(params: &OracleParams<T>) -> T {
    let two = T::lit(2.0);
    -two * params.offset() * (two * params.delta_theta).cos()
}

/// Sum of the four corrected cross means, `2 Ī₀²` for every Δ.
pub fn normalization_sum<T: Scalar>(params: &OracleParams<T>) -> T {
    T::lit(2.0) * params.offset()
}

/// Normalized Bell correlation `−cos 2Δ`.
pub fn normalized_correlation<T: Scalar>(delta_theta: T) -> T {
    -(delta_theta + delta_theta).cos()
}

/// `|C(a,b) − C(a,b′)| + |C(a′,b) + C(a′,b′)|` from four measured or predicted correlations.
pub fn chsh_combination<T: Scalar>(c_ab: T, c_abp: T, c_apb: T, c_apbp: T) -> T {
    (c_ab - c_abp).abs() + (c_apb + c_apbp).abs()
}

/// CHSH value of a correlation function of the angle difference.
pub fn chsh_value<T: Scalar, F: Fn(T) -> T>(a: T, a_prime: T, b: T, b_prime: T, correlation: F) -> T {
    chsh_combination(
        correlation(a - b),
        correlation(a - b_prime),
        correlation(a_prime - b),
        correlation(a_prime - b_prime),
    )
}
