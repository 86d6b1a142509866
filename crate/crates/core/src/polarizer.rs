//! Polarization beam splitter outputs and the sequential-polarizer demonstration.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::source::SourceDraw;

/// Analyzer transmit-axis angles for the two sides, in radians from the x axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzerSettings<T> {
    pub theta1: T,
    pub theta2: T,
}

impl<T: Scalar> AnalyzerSettings<T> {
    pub fn new(theta1: T, theta2: T) -> Self {
        Self { theta1, theta2 }
    }

    /// θ1 − θ2.
    pub fn delta(&self) -> T {
        self.theta1 - self.theta2
    }
}

/// Intensities at the transmit (`n`) and reflect (`p`) ports of both analyzers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortIntensities<T> {
    pub i1n: T,
    pub i1p: T,
    pub i2n: T,
    pub i2p: T,
}

/// Complex port amplitudes `(U1n, U1p, U2n, U2p)`.
pub type PortAmplitudes<T> = (Complex<T>, Complex<T>, Complex<T>, Complex<T>);

/// Project both input fields onto the analyzer axes.
///
/// Side-2 fields are rebuilt with a zero V phase and an H phase equal to the
/// constrained relative phase; only that difference is observable.
pub fn amplitudes_at_ports<T: Scalar>(draw: &SourceDraw<T>, settings: &AnalyzerSettings<T>) -> PortAmplitudes<T> {
    let u1h = Complex::from_polar(draw.i1h.sqrt(), draw.phase1h);
    let u1v = Complex::from_polar(draw.i1v.sqrt(), draw.phase1v);
    let u2h = Complex::from_polar(draw.i2h.sqrt(), draw.phase_diff2);
    let u2v = Complex::from_polar(draw.i2v.sqrt(), T::zero());

    let project = |h: Complex<T>, v: Complex<T>, theta: T| {
        let (s, c) = theta.sin_cos();
        (h * c + v * s, -h * s + v * c)
    };
    let (u1n, u1p) = project(u1h, u1v, settings.theta1);
    let (u2n, u2p) = project(u2h, u2v, settings.theta2);
    (u1n, u1p, u2n, u2p)
}

/// Port intensities for one source draw.
///
/// Side 2 uses the pairing-substituted forms, written so that with
/// `theta1 == theta2` the identities `i2n == i1p` and `i2p == i1n` hold bit for bit.
pub fn port_intensities<T: Scalar>(draw: &SourceDraw<T>, settings: &AnalyzerSettings<T>) -> PortIntensities<T> {
    let (h, v) = (draw.i1h, draw.i1v);
    let coherent = (h * v).sqrt() * draw.phase_diff1().cos();

    let (s1, c1) = settings.theta1.sin_cos();
    let (cos2_1, sin2_1) = (c1 * c1, s1 * s1);
    let cross1 = coherent * (settings.theta1 + settings.theta1).sin();

    let (s2, c2) = settings.theta2.sin_cos();
    let (cos2_2, sin2_2) = (c2 * c2, s2 * s2);
    let cross2 = coherent * (settings.theta2 + settings.theta2).sin();

    PortIntensities {
        i1n: clamp_rounding(h * cos2_1 + v * sin2_1 + cross1, h + v),
        i1p: clamp_rounding(h * sin2_1 + v * cos2_1 - cross1, h + v),
        i2n: clamp_rounding(v * cos2_2 + h * sin2_2 - cross2, h + v),
        i2p: clamp_rounding(v * sin2_2 + h * cos2_2 + cross2, h + v),
    }
}

/// Port intensities are squared moduli, so anything below zero is rounding residue.
fn clamp_rounding<T: Scalar>(value: T, total: T) -> T {
    if value >= T::zero() {
        return value;
    }
    debug_assert!(
        -value <= T::lit(1e-12) * total.max(T::one()) * T::lit(16.0),
        "port intensity {value} is not rounding residue of {total}"
    );
    T::zero()
}

/// Light of linear polarization `input_polarization_angle` passed through ideal
/// polarizers in the given order (Malus's law at each stage).
///
/// The transmission factor is evaluated as `(1 + cos 2x) / 2`, which is exact
/// at the quarter and eighth turns where `cos² x` picks up rounding residue.
pub fn sequential_polarizers<T: Scalar>(input_polarization_angle: T, input_intensity: T, analyzer_angles: &[T]) -> T {
    let half = T::lit(0.5);
    let mut axis = input_polarization_angle;
    let mut intensity = input_intensity;
    for &angle in analyzer_angles {
        let x = angle - axis;
        intensity = intensity * (half + half * (x + x).cos());
        axis = angle;
    }
    intensity
}
