//! Chaotic twin-beam source: exponential intensities, uniform phases, and the
//! cross-beam pairing constraints that fix side 2 from side 1.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::unit_f64;
use crate::scalar::Scalar;

/// Mean intensity of each polarization component, in counts per observation window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceParams<T> {
    mean_intensity: T,
}

impl<T: Scalar> SourceParams<T> {
    pub fn new(mean_intensity: T) -> Result<Self> {
        if !mean_intensity.is_positive_finite() {
            return Err(Error::Domain(format!(
                "mean intensity must be positive and finite, got {mean_intensity}"
            )));
        }
        Ok(Self { mean_intensity })
    }

    pub fn mean_intensity(&self) -> T {
        self.mean_intensity
    }
}

/// One realization of the source hidden variables.
///
/// Side 2 is fully determined by side 1: the intensities swap polarization
/// (`i2v = i1h`, `i2h = i1v`) and the side-2 relative phase is the side-1
/// relative phase shifted by π.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceDraw<T> {
    pub i1h: T,
    pub i1v: T,
    pub phase1h: T,
    pub phase1v: T,
    pub i2h: T,
    pub i2v: T,
    /// θ2H − θ2V, in `[0, 2π)`.
    pub phase_diff2: T,
}

impl<T: Scalar> SourceDraw<T> {
    /// Total intensity entering either analyzer (identical on both sides).
    pub fn total_intensity(&self) -> T {
        self.i1h + self.i1v
    }

    /// θ1H − θ1V.
    pub fn phase_diff1(&self) -> T {
        self.phase1h - self.phase1v
    }
}

/// Complete a draw from its side-1 fields.
pub fn apply_pair_constraints<T: Scalar>(i1h: T, i1v: T, phase1h: T, phase1v: T) -> Result<SourceDraw<T>> {
    for (name, v) in [("i1h", i1h), ("i1v", i1v)] {
        if !v.is_nonnegative_finite() {
            return Err(Error::Domain(format!(
                "{name} must be a nonnegative finite intensity, got {v}"
            )));
        }
    }
    for (name, v) in [("phase1h", phase1h), ("phase1v", phase1v)] {
        if !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be finite, got {v}")));
        }
    }
    let phase1h = phase1h.wrap_two_pi();
    let phase1v = phase1v.wrap_two_pi();
    Ok(SourceDraw {
        i1h,
        i1v,
        phase1h,
        phase1v,
        i2h: i1v,
        i2v: i1h,
        phase_diff2: (phase1h - phase1v + T::PI()).wrap_two_pi(),
    })
}

/// Exponential variate by inversion of the CDF.
pub fn sample_exponential<T: Scalar, R: Rng + ?Sized>(mean: T, rng: &mut R) -> T {
    let u = unit_f64(rng);
    mean * T::lit(-(-u).ln_1p())
}

/// Draw a source realization: i.i.d. exponential intensities and i.i.d.
/// uniform phases on side 1, side 2 completed by the pairing constraints.
pub fn sample_draw<T: Scalar, R: Rng + ?Sized>(params: &SourceParams<T>, rng: &mut R) -> SourceDraw<T> {
    let m = params.mean_intensity();
    let i1h = sample_exponential(m, rng);
    let i1v = sample_exponential(m, rng);
    let phase1h = T::TAU() * T::lit(unit_f64(rng));
    let phase1v = T::TAU() * T::lit(unit_f64(rng));
    apply_pair_constraints(i1h, i1v, phase1h, phase1v).expect("sampled intensities are nonnegative")
}
