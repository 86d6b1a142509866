//! Photon-count statistics: conditional Poisson emission, binomial splitting at
//! an analyzer, the split-product moments, and the Bose-Einstein marginal.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::unit_f64;
use crate::scalar::Scalar;
use crate::source::sample_exponential;

/// Largest `n` for which pmfs are evaluated by direct products.
const DIRECT_PMF_LIMIT: u64 = 20;

/// Inversion is used below this mean; larger means are split into pieces.
const INVERSION_MEAN_LIMIT: f64 = 10.0;

/// Photon counts at the two output ports of one analyzer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CountPair {
    pub n_transmit: u64,
    pub n_reflect: u64,
}

impl CountPair {
    pub fn total(&self) -> u64 {
        self.n_transmit + self.n_reflect
    }

    /// `n_transmit * n_reflect`, the split product.
    pub fn product(&self) -> u64 {
        self.n_transmit * self.n_reflect
    }
}

/// Counts on both sides for one observation window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialCounts {
    pub side1: CountPair,
    pub side2: CountPair,
    pub n_total_1: u64,
    pub n_total_2: u64,
}

impl TrialCounts {
    pub fn new(side1: CountPair, side2: CountPair) -> Self {
        Self {
            side1,
            side2,
            n_total_1: side1.total(),
            n_total_2: side2.total(),
        }
    }
}

fn check_probability<T: Scalar>(p: T) -> Result<()> {
    if p >= T::zero() && p <= T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability must lie in [0, 1], got {p}")))
    }
}

/// `ln n!`, exact summation up to the direct limit and a Stirling series above it.
fn ln_factorial<T: Scalar>(n: u64) -> T {
    if n <= DIRECT_PMF_LIMIT {
        return (2..=n).map(T::from_count).fold(T::zero(), |acc, k| acc + k.ln());
    }
    let x = T::from_count(n);
    let inv = x.recip();
    let inv2 = inv * inv;
    let series = inv * (T::lit(1.0 / 12.0) - inv2 * (T::lit(1.0 / 360.0) - inv2 * T::lit(1.0 / 1260.0)));
    x * x.ln() - x + T::lit(0.5) * (T::TAU() * x).ln() + series
}

/// Probability of `n` counts from a window of intensity `mean`.
pub fn poisson_pmf<T: Scalar>(n: u64, mean: T) -> Result<T> {
    if !mean.is_nonnegative_finite() {
        return Err(Error::Domain(format!(
            "Poisson mean must be nonnegative and finite, got {mean}"
        )));
    }
    if mean == T::zero() {
        return Ok(if n == 0 { T::one() } else { T::zero() });
    }
    if n <= DIRECT_PMF_LIMIT {
        let mut p = (-mean).exp();
        for k in 1..=n {
            p = p * mean / T::from_count(k);
        }
        Ok(p)
    } else {
        Ok((T::from_count(n) * mean.ln() - mean - ln_factorial::<T>(n)).exp())
    }
}

fn poisson_by_inversion<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    let u = unit_f64(rng);
    let mut n = 0u64;
    let mut term = (-mean).exp();
    let mut cdf = term;
    while u >= cdf {
        n += 1;
        term *= mean / n as f64;
        let next = cdf + term;
        // tail exhausted in floating point
        if next == cdf {
            break;
        }
        cdf = next;
    }
    n
}

/// Poisson variate.
///
/// Sequential-search inversion for means below 10. Larger means are written as
/// a sum of equal pieces below that limit; Poisson variables add, so the
/// result is exact in distribution.
pub fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    debug_assert!(mean >= 0.0 && mean.is_finite(), "Poisson mean {mean}");
    if mean <= 0.0 {
        return 0;
    }
    if mean < INVERSION_MEAN_LIMIT {
        return poisson_by_inversion(mean, rng);
    }
    let pieces = (mean / (INVERSION_MEAN_LIMIT / 2.0)).ceil();
    let piece = mean / pieces;
    (0..pieces as u64).map(|_| poisson_by_inversion(piece, rng)).sum()
}

/// Route `n_total` photons independently to the transmit port with probability `p_transmit`.
pub fn binomial_split<R: Rng + ?Sized>(n_total: u64, p_transmit: f64, rng: &mut R) -> Result<CountPair> {
    check_probability(p_transmit)?;
    let n_transmit = if p_transmit == 0.0 {
        0
    } else if p_transmit == 1.0 {
        n_total
    } else {
        (0..n_total).filter(|_| unit_f64(rng) < p_transmit).count() as u64
    };
    Ok(CountPair {
        n_transmit,
        n_reflect: n_total - n_transmit,
    })
}

/// Fraction of a side's intensity leaving through one port; a dark input gives 0.
pub fn port_probability<T: Scalar>(port_intensity: T, total_intensity: T) -> T {
    if total_intensity > T::zero() {
        (port_intensity / total_intensity).max(T::zero()).min(T::one())
    } else {
        T::zero()
    }
}

/// E[n_transmit * n_reflect] for a fixed input of `n_total` photons: `p(1-p)(n² - n)`.
pub fn split_product_mean_conditional<T: Scalar>(n_total: u64, p_transmit: T) -> T {
    let n = T::from_count(n_total);
    p_transmit * (T::one() - p_transmit) * (n * n - n)
}

/// The same moment when the input count is Poisson with mean `mean_total`: `p(1-p) n̄²`.
pub fn split_product_mean_poisson<T: Scalar>(mean_total: T, p_transmit: T) -> T {
    p_transmit * (T::one() - p_transmit) * mean_total * mean_total
}

/// Bose-Einstein (geometric) count probability `Ī₀ⁿ / (Ī₀ + 1)ⁿ⁺¹`.
pub fn bose_einstein_pmf<T: Scalar>(n: u64, mean_intensity: T) -> Result<T> {
    if !mean_intensity.is_positive_finite() {
        return Err(Error::Domain(format!(
            "mean intensity must be positive and finite, got {mean_intensity}"
        )));
    }
    let denom = mean_intensity + T::one();
    if n <= DIRECT_PMF_LIMIT {
        let ratio = mean_intensity / denom;
        Ok((0..n).fold(denom.recip(), |p, _| p * ratio))
    } else {
        let n = T::from_count(n);
        Ok((n * mean_intensity.ln() - (n + T::one()) * denom.ln()).exp())
    }
}

/// Count from a chaotic beam: exponential intensity, then Poisson emission.
pub fn sample_count_marginal<R: Rng + ?Sized>(mean_intensity: f64, rng: &mut R) -> u64 {
    let intensity = sample_exponential(mean_intensity, rng);
    sample_poisson(intensity, rng)
}
