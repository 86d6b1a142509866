//! Trial engine: source draws through both analyzers to intensities or
//! photon counts, accumulated into product moments with standard errors.
//!
//! Trials are grouped into fixed-size chunks. Each chunk is reduced
//! sequentially and the chunk results are merged in chunk order, so an
//! estimate is bit-identical for any number of worker threads.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{chsh_combination, normalized_correlation, PortPairKind};
use crate::photon::{binomial_split, port_probability, sample_poisson, TrialCounts};
use crate::polarizer::{port_intensities, AnalyzerSettings};
use crate::rng::{derive_seed, StreamFamily, StreamRng};
use crate::scalar::Scalar;
use crate::source::{sample_draw, SourceDraw, SourceParams};

/// Trials per reduction chunk. Part of the determinism contract: changing it
/// changes the floating-point summation order.
pub const TRIALS_PER_CHUNK: u64 = 8192;

const KINDS: usize = 6;

/// How an observation window is turned into numbers at the analyzer ports.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    /// Use the port intensities themselves.
    IntensityOnly,
    /// Poisson totals drawn independently per side, then split binomially.
    #[default]
    IndependentPoisson,
    /// One Poisson total shared by both sides, then split binomially.
    MatchedPairs,
}

impl CountMode {
    pub fn name(self) -> &'static str {
        match self {
            CountMode::IntensityOnly => "intensity",
            CountMode::IndependentPoisson => "poisson",
            CountMode::MatchedPairs => "matched",
        }
    }

    pub fn counts_photons(self) -> bool {
        self != CountMode::IntensityOnly
    }
}

impl fmt::Display for CountMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CountMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intensity" | "intensity_only" => Ok(CountMode::IntensityOnly),
            "poisson" | "independent_poisson" => Ok(CountMode::IndependentPoisson),
            "matched" | "matched_pairs" => Ok(CountMode::MatchedPairs),
            other => Err(Error::Usage(format!(
                "unknown count mode '{other}' (expected intensity, poisson or matched)"
            ))),
        }
    }
}

/// Full description of one experiment run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub trials: u64,
    pub mean_intensity: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub seed: u64,
    pub count_mode: CountMode,
    pub postselect_single_pairs: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            trials: 1_000_000,
            mean_intensity: 1.0,
            theta1: 0.0,
            theta2: 0.0,
            seed: 0x5eed_c0de,
            count_mode: CountMode::default(),
            postselect_single_pairs: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !self.mean_intensity.is_positive_finite() {
            return Err(Error::Config(format!(
                "mean intensity must be positive and finite, got {}",
                self.mean_intensity
            )));
        }
        if !self.theta1.is_finite() || !self.theta2.is_finite() {
            return Err(Error::Config("analyzer angles must be finite".into()));
        }
        Ok(())
    }

    pub fn settings(&self) -> AnalyzerSettings<f64> {
        AnalyzerSettings::new(self.theta1, self.theta2)
    }

    /// θ1 − θ2.
    pub fn delta(&self) -> f64 {
        self.theta1 - self.theta2
    }

    pub fn with_angles(self, theta1: f64, theta2: f64) -> Self {
        Self { theta1, theta2, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_mode(self, count_mode: CountMode) -> Self {
        Self { count_mode, ..self }
    }

    fn source_params(&self) -> SourceParams<f64> {
        SourceParams::new(self.mean_intensity).expect("validated mean intensity")
    }
}

/// Run `f` with exactly `lanes` worker threads.
pub fn with_lanes<R: Send>(lanes: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(lanes.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {lanes} worker threads: {e}")))?;
    Ok(pool.install(f))
}

/// Partial result that can absorb another partial result.
pub trait Merge: Default + Send {
    fn merge(&mut self, other: Self);
}

/// Reduce `trials` independent trials in parallel, deterministically.
///
/// Trial `i` receives random stream `i` of the family seeded by `seed`.
pub fn run_trials<A, F>(trials: u64, seed: u64, per_trial: F) -> A
where
    A: Merge,
    F: Fn(&mut A, &mut StreamRng) + Sync,
{
    let family = StreamFamily::new(seed);
    let chunks = trials.div_ceil(TRIALS_PER_CHUNK);
    let partials: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = A::default();
            let end = ((c + 1) * TRIALS_PER_CHUNK).min(trials);
            for i in c * TRIALS_PER_CHUNK..end {
                let mut rng = family.stream(i);
                per_trial(&mut acc, &mut rng);
            }
            acc
        })
        .collect();
    partials.into_iter().fold(A::default(), |mut acc, p| {
        acc.merge(p);
        acc
    })
}

/// First and second moments of the six per-trial port products.
#[derive(Clone, Debug, Default, PartialEq)]
struct ProductMoments {
    n: u64,
    sum: [f64; KINDS],
    cross: [[f64; KINDS]; KINDS],
}

impl ProductMoments {
    fn push(&mut self, q: [f64; KINDS]) {
        self.n += 1;
        for i in 0..KINDS {
            self.sum[i] += q[i];
            for j in i..KINDS {
                self.cross[i][j] += q[i] * q[j];
            }
        }
    }

    fn mean(&self) -> [f64; KINDS] {
        self.sum.map(|s| s / self.n as f64)
    }

    /// Unbiased sample covariance; zero with fewer than two trials.
    fn covariance(&self) -> [[f64; KINDS]; KINDS] {
        let mut cov = [[0.0; KINDS]; KINDS];
        if self.n < 2 {
            return cov;
        }
        let n = self.n as f64;
        let m = self.mean();
        for i in 0..KINDS {
            for j in i..KINDS {
                let c = (self.cross[i][j] - n * m[i] * m[j]) / (n - 1.0);
                cov[i][j] = c;
                cov[j][i] = c;
            }
        }
        cov
    }
}

impl Merge for ProductMoments {
    fn merge(&mut self, other: Self) {
        self.n += other.n;
        for i in 0..KINDS {
            self.sum[i] += other.sum[i];
            for j in i..KINDS {
                self.cross[i][j] += other.cross[i][j];
            }
        }
    }
}

/// Products in [`PortPairKind::ALL`] order.
fn products(i1n: f64, i1p: f64, i2n: f64, i2p: f64) -> [f64; KINDS] {
    [i1n * i2p, i1p * i2n, i1n * i2n, i1p * i2p, i1n * i1p, i2n * i2p]
}

/// Photon counts for one window given its source draw.
pub fn sample_trial_counts(
    draw: &SourceDraw<f64>,
    settings: &AnalyzerSettings<f64>,
    mode: CountMode,
    rng: &mut StreamRng,
) -> Result<TrialCounts> {
    let ports = port_intensities(draw, settings);
    let total1 = draw.i1h + draw.i1v;
    let total2 = draw.i2h + draw.i2v;
    let n1 = sample_poisson(total1, rng);
    let side1 = binomial_split(n1, port_probability(ports.i1n, total1), rng)?;
    let n2 = match mode {
        CountMode::IndependentPoisson => sample_poisson(total2, rng),
        CountMode::MatchedPairs => n1,
        CountMode::IntensityOnly => return Err(Error::Config("intensity mode does not produce photon counts".into())),
    };
    let side2 = binomial_split(n2, port_probability(ports.i2n, total2), rng)?;
    Ok(TrialCounts::new(side1, side2))
}

/// Monte Carlo product-moment estimates for one analyzer setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateSet {
    pub count_mode: CountMode,
    pub delta_theta: f64,
    /// Indexed by [`PortPairKind::index`].
    pub raw_mean: [f64; KINDS],
    pub std_error: [f64; KINDS],
    /// Estimated `Ī₀²`: the average of the two same-side product means.
    pub offset_estimate: f64,
    pub offset_std_error: f64,
    /// Offset-corrected cross means, in [`PortPairKind::CROSS`] order.
    pub corrected_mean: [f64; 4],
    pub corrected_std_error: [f64; 4],
    /// (nn + pp − pn − np) / (nn + pp + pn + np) over the corrected cross means.
    pub normalized_correlation_estimate: f64,
    pub normalized_correlation_std_error: f64,
    /// Sample covariance of the per-trial products.
    pub covariance: [[f64; KINDS]; KINDS],
    pub trials_used: u64,
}

impl EstimateSet {
    fn from_moments(moments: &ProductMoments, config: &SimConfig) -> Self {
        let raw_mean = moments.mean();
        let covariance = moments.covariance();
        let n = moments.n;

        let combine = |w: &[f64; KINDS]| linear_combination(&raw_mean, &covariance, n, w);
        let unit = |k: usize| {
            let mut w = [0.0; KINDS];
            w[k] = 1.0;
            w
        };
        let corrected_weights = |k: PortPairKind| {
            let mut w = unit(k.index());
            w[PortPairKind::SameSide1.index()] -= 0.5;
            w[PortPairKind::SameSide2.index()] -= 0.5;
            w
        };

        let std_error = std::array::from_fn(|k| combine(&unit(k)).1);
        let (offset_estimate, offset_std_error) = combine(&offset_weights());
        let corrected: [(f64, f64); 4] = PortPairKind::CROSS.map(|k| combine(&corrected_weights(k)));

        let numerator = bell_weights();
        let denominator = normalization_weights();
        let (num, _) = combine(&numerator);
        let (den, _) = combine(&denominator);
        let (ratio, ratio_se) = if den != 0.0 {
            let r = num / den;
            let w: [f64; KINDS] = std::array::from_fn(|k| numerator[k] - r * denominator[k]);
            (r, combine(&w).1 / den.abs())
        } else {
            (0.0, 0.0)
        };

        Self {
            count_mode: config.count_mode,
            delta_theta: config.delta(),
            raw_mean,
            std_error,
            offset_estimate,
            offset_std_error,
            corrected_mean: corrected.map(|c| c.0),
            corrected_std_error: corrected.map(|c| c.1),
            normalized_correlation_estimate: ratio,
            normalized_correlation_std_error: ratio_se,
            covariance,
            trials_used: n,
        }
    }

    pub fn raw(&self, kind: PortPairKind) -> f64 {
        self.raw_mean[kind.index()]
    }

    pub fn raw_std_error(&self, kind: PortPairKind) -> f64 {
        self.std_error[kind.index()]
    }

    /// Offset-corrected mean; zero-centred for the same-side kinds.
    pub fn corrected(&self, kind: PortPairKind) -> f64 {
        match PortPairKind::CROSS.iter().position(|&k| k == kind) {
            Some(i) => self.corrected_mean[i],
            None => self.raw(kind) - self.offset_estimate,
        }
    }

    /// Mean and standard error of `Σ w_k · product_k`.
    pub fn combination(&self, weights: &[f64; KINDS]) -> (f64, f64) {
        linear_combination(&self.raw_mean, &self.covariance, self.trials_used, weights)
    }
}

fn linear_combination(mean: &[f64; KINDS], cov: &[[f64; KINDS]; KINDS], n: u64, w: &[f64; KINDS]) -> (f64, f64) {
    let m = (0..KINDS).map(|i| w[i] * mean[i]).sum();
    let var: f64 = (0..KINDS)
        .flat_map(|i| (0..KINDS).map(move |j| (i, j)))
        .map(|(i, j)| w[i] * w[j] * cov[i][j])
        .sum();
    (m, (var.max(0.0) / n as f64).sqrt())
}

/// Weights of the offset estimate (mean of the two same-side products).
pub fn offset_weights() -> [f64; KINDS] {
    [0.0, 0.0, 0.0, 0.0, 0.5, 0.5]
}

/// Weights of nn + pp − pn − np; the offsets cancel.
pub fn bell_weights() -> [f64; KINDS] {
    [-1.0, -1.0, 1.0, 1.0, 0.0, 0.0]
}

/// Weights of the corrected cross sum nn + pp + pn + np − 4·offset.
pub fn normalization_weights() -> [f64; KINDS] {
    [1.0, 1.0, 1.0, 1.0, -2.0, -2.0]
}

/// Intensity-product experiment.
pub fn run_intensity_experiment(config: &SimConfig) -> Result<EstimateSet> {
    config.validate()?;
    if config.count_mode != CountMode::IntensityOnly {
        return Err(Error::Config(format!(
            "intensity experiment needs count mode 'intensity', got '{}'",
            config.count_mode
        )));
    }
    let params = config.source_params();
    let settings = config.settings();
    let moments = run_trials(config.trials, config.seed, |acc: &mut ProductMoments, rng| {
        let draw = sample_draw(&params, rng);
        let p = port_intensities(&draw, &settings);
        acc.push(products(p.i1n, p.i1p, p.i2n, p.i2p));
    });
    Ok(EstimateSet::from_moments(&moments, config))
}

/// Photon-count experiment in either count mode.
pub fn run_count_experiment(config: &SimConfig) -> Result<EstimateSet> {
    config.validate()?;
    if !config.count_mode.counts_photons() {
        return Err(Error::Config(
            "count experiment needs count mode 'poisson' or 'matched'".into(),
        ));
    }
    let params = config.source_params();
    let settings = config.settings();
    let moments = run_trials(config.trials, config.seed, |acc: &mut ProductMoments, rng| {
        let draw = sample_draw(&params, rng);
        let c = sample_trial_counts(&draw, &settings, config.count_mode, rng).expect("count mode checked");
        let f = |n: u64| n as f64;
        acc.push(products(
            f(c.side1.n_transmit),
            f(c.side1.n_reflect),
            f(c.side2.n_transmit),
            f(c.side2.n_reflect),
        ));
    });
    Ok(EstimateSet::from_moments(&moments, config))
}

/// Intensity or count experiment according to `config.count_mode`.
pub fn run_experiment(config: &SimConfig) -> Result<EstimateSet> {
    match config.count_mode {
        CountMode::IntensityOnly => run_intensity_experiment(config),
        _ => run_count_experiment(config),
    }
}

/// Joint port outcomes over windows with exactly one photon on each side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostselectedTally {
    pub nn: u64,
    pub np: u64,
    pub pn: u64,
    pub pp: u64,
    pub trials_selected: u64,
    pub trials_total: u64,
}

impl Merge for PostselectedTally {
    fn merge(&mut self, other: Self) {
        self.nn += other.nn;
        self.np += other.np;
        self.pn += other.pn;
        self.pp += other.pp;
        self.trials_selected += other.trials_selected;
        self.trials_total += other.trials_total;
    }
}

impl PostselectedTally {
    /// Joint frequencies `(nn, np, pn, pp)` among selected windows.
    pub fn frequencies(&self) -> [f64; 4] {
        let s = self.trials_selected.max(1) as f64;
        [self.nn, self.np, self.pn, self.pp].map(|c| c as f64 / s)
    }

    /// (nn + pp − np − pn) / selected.
    pub fn correlation(&self) -> f64 {
        let [nn, np, pn, pp] = self.frequencies();
        nn + pp - np - pn
    }
}

/// Keep windows where each side registers exactly one photon and tally the ports that fired.
pub fn run_postselected_experiment(config: &SimConfig) -> Result<PostselectedTally> {
    config.validate()?;
    if !config.postselect_single_pairs {
        return Err(Error::Config(
            "post-selection is not enabled in this configuration".into(),
        ));
    }
    if !config.count_mode.counts_photons() {
        return Err(Error::Config("post-selection needs a photon-counting mode".into()));
    }
    let params = config.source_params();
    let settings = config.settings();
    Ok(run_trials(
        config.trials,
        config.seed,
        |acc: &mut PostselectedTally, rng| {
            acc.trials_total += 1;
            let draw = sample_draw(&params, rng);
            let c = sample_trial_counts(&draw, &settings, config.count_mode, rng).expect("count mode checked");
            if c.n_total_1 != 1 || c.n_total_2 != 1 {
                return;
            }
            acc.trials_selected += 1;
            match (c.side1.n_transmit == 1, c.side2.n_transmit == 1) {
                (true, true) => acc.nn += 1,
                (true, false) => acc.np += 1,
                (false, true) => acc.pn += 1,
                (false, false) => acc.pp += 1,
            }
        },
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub delta: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub oracle: f64,
}

impl SweepRow {
    pub fn abs_deviation(&self) -> f64 {
        (self.estimate - self.oracle).abs()
    }
}

/// One run per angle difference. Side 2 stays at `config.theta2`; side 1 is
/// set to `theta2 + Δ`. Sweep point `k` is seeded with `derive_seed(seed, k)`.
pub fn sweep_angles(config: &SimConfig, deltas: &[f64]) -> Result<Vec<SweepRow>> {
    if deltas.is_empty() {
        return Err(Error::Usage("angle sweep needs at least one Δ".into()));
    }
    deltas
        .iter()
        .enumerate()
        .map(|(k, &delta)| {
            let run = config
                .with_angles(config.theta2 + delta, config.theta2)
                .with_seed(derive_seed(config.seed, k as u64));
            let est = run_experiment(&run)?;
            Ok(SweepRow {
                delta,
                estimate: est.normalized_correlation_estimate,
                std_error: est.normalized_correlation_std_error,
                oracle: normalized_correlation(delta),
            })
        })
        .collect()
}

/// CHSH estimate from four independent runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshEstimate {
    pub s: f64,
    pub std_error: f64,
    pub oracle: f64,
    /// Correlations at (a,b), (a,b′), (a′,b), (a′,b′).
    pub correlations: [f64; 4],
    pub correlation_std_errors: [f64; 4],
}

/// Estimate S at settings a, a′ (side 1) and b, b′ (side 2). Leg `k` of the
/// four is seeded with `derive_seed(seed, k)`.
pub fn chsh_experiment(config: &SimConfig, a: f64, a_prime: f64, b: f64, b_prime: f64) -> Result<ChshEstimate> {
    let legs = [(a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime)];
    let mut correlations = [0.0; 4];
    let mut errors = [0.0; 4];
    for (k, &(t1, t2)) in legs.iter().enumerate() {
        let run = config.with_angles(t1, t2).with_seed(derive_seed(config.seed, k as u64));
        let est = run_experiment(&run)?;
        correlations[k] = est.normalized_correlation_estimate;
        errors[k] = est.normalized_correlation_std_error;
    }
    let [c0, c1, c2, c3] = correlations;
    let oracle = crate::oracle::chsh_value(a, a_prime, b, b_prime, normalized_correlation);
    Ok(ChshEstimate {
        s: chsh_combination(c0, c1, c2, c3),
        std_error: errors.iter().map(|e| e * e).sum::<f64>().sqrt(),
        oracle,
        correlations,
        correlation_std_errors: errors,
    })
}

/// Histogram of sampled counts.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CountHistogram {
    pub bins: Vec<u64>,
    pub samples: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl CountHistogram {
    fn push(&mut self, n: u64) {
        let i = n as usize;
        if i >= self.bins.len() {
            self.bins.resize(i + 1, 0);
        }
        self.bins[i] += 1;
        self.samples += 1;
        let x = n as f64;
        self.sum += x;
        self.sum_sq += x * x;
    }
}

impl Merge for CountHistogram {
    fn merge(&mut self, other: Self) {
        if other.bins.len() > self.bins.len() {
            self.bins.resize(other.bins.len(), 0);
        }
        for (a, b) in self.bins.iter_mut().zip(other.bins) {
            *a += b;
        }
        self.samples += other.samples;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistRow {
    pub n: u64,
    pub empirical: f64,
    pub analytic: f64,
}

/// Sampled chaotic-light counts against the Bose-Einstein law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistCheck {
    pub mean_intensity: f64,
    pub samples: u64,
    /// One row per count up to the truncation point.
    pub rows: Vec<DistRow>,
    /// Mass above the last row.
    pub tail_empirical: f64,
    pub tail_analytic: f64,
    pub total_variation: f64,
    pub sample_mean: f64,
    pub mean_std_error: f64,
}

/// Largest tail mass of the analytic pmf left out of the row table.
pub const DIST_TAIL_MASS: f64 = 1e-9;

/// Draw `samples` counts (exponential intensity, then Poisson) and compare
/// them with the Bose-Einstein pmf. Rows stop at the first `n` whose analytic
/// tail beyond it is below [`DIST_TAIL_MASS`]; the remainder forms one tail bin
/// that also enters the total-variation distance.
pub fn bose_einstein_check(mean_intensity: f64, samples: u64, seed: u64) -> Result<DistCheck> {
    if samples == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    // validates the mean as a side effect
    crate::photon::bose_einstein_pmf(0, mean_intensity)?;
    let hist = run_trials(samples, seed, |acc: &mut CountHistogram, rng| {
        acc.push(crate::photon::sample_count_marginal(mean_intensity, rng));
    });

    let ratio = mean_intensity / (mean_intensity + 1.0);
    let mut rows = Vec::new();
    let mut n = 0u64;
    loop {
        let analytic = crate::photon::bose_einstein_pmf(n, mean_intensity)?;
        let count = hist.bins.get(n as usize).copied().unwrap_or(0);
        rows.push(DistRow {
            n,
            empirical: count as f64 / samples as f64,
            analytic,
        });
        // P(N > n) = ratio^(n+1)
        if ratio.powf((n + 1) as f64) < DIST_TAIL_MASS {
            break;
        }
        n += 1;
    }
    let tail_analytic = ratio.powf((n + 1) as f64);
    let tail_count: u64 = hist.bins.iter().skip(n as usize + 1).sum();
    let tail_empirical = tail_count as f64 / samples as f64;
    let total_variation = 0.5
        * (rows.iter().map(|r| (r.empirical - r.analytic).abs()).sum::<f64>() + (tail_empirical - tail_analytic).abs());

    let sf = samples as f64;
    let sample_mean = hist.sum / sf;
    let var = if samples > 1 {
        ((hist.sum_sq - sf * sample_mean * sample_mean) / (sf - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(DistCheck {
        mean_intensity,
        samples,
        rows,
        tail_empirical,
        tail_analytic,
        total_variation,
        sample_mean,
        mean_std_error: (var / sf).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    use super::*;
    use crate::oracle::{raw_product_mean, OracleParams};

    fn small(mode: CountMode) -> SimConfig {
        SimConfig {
            trials: 20_000,
            count_mode: mode,
            ..SimConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig {
            trials: 0,
            ..SimConfig::default()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            mean_intensity: 0.0,
            ..SimConfig::default()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            theta1: f64::NAN,
            ..SimConfig::default()
        }
        .validate()
        .is_err());
        assert!(matches!(
            run_intensity_experiment(&small(CountMode::IndependentPoisson)),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            run_count_experiment(&small(CountMode::IntensityOnly)),
            Err(Error::Config(_))
        ));
        assert!(run_postselected_experiment(&small(CountMode::IndependentPoisson)).is_err());
        let ps = SimConfig {
            postselect_single_pairs: true,
            ..small(CountMode::IntensityOnly)
        };
        assert!(run_postselected_experiment(&ps).is_err());
    }

    #[test]
    fn mode_names_parse() {
        for m in [
            CountMode::IntensityOnly,
            CountMode::IndependentPoisson,
            CountMode::MatchedPairs,
        ] {
            assert_eq!(m.name().parse::<CountMode>().unwrap(), m);
        }
        assert!("both".parse::<CountMode>().is_err());
    }

    #[test]
    fn chunk_boundaries_cover_every_trial() {
        #[derive(Default)]
        struct Count(u64);
        impl Merge for Count {
            fn merge(&mut self, o: Self) {
                self.0 += o.0;
            }
        }
        for trials in [
            1,
            TRIALS_PER_CHUNK - 1,
            TRIALS_PER_CHUNK,
            TRIALS_PER_CHUNK + 1,
            3 * TRIALS_PER_CHUNK + 7,
        ] {
            let c: Count = run_trials(trials, 1, |acc: &mut Count, _| acc.0 += 1);
            assert_eq!(c.0, trials);
        }
    }

    #[test]
    fn single_trial_has_zero_error() {
        let est = run_intensity_experiment(&SimConfig {
            trials: 1,
            ..small(CountMode::IntensityOnly)
        })
        .unwrap();
        assert_eq!(est.trials_used, 1);
        assert!(est.std_error.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn estimates_are_internally_consistent() {
        let cfg = small(CountMode::IntensityOnly).with_angles(0.4, 0.1);
        let est = run_intensity_experiment(&cfg).unwrap();
        assert_eq!(est.trials_used, cfg.trials);
        assert!(est.std_error.iter().all(|&e| e >= 0.0));
        let off = 0.5 * (est.raw(PortPairKind::SameSide1) + est.raw(PortPairKind::SameSide2));
        assert!((est.offset_estimate - off).abs() < 1e-12);
        for k in PortPairKind::CROSS {
            assert!((est.corrected(k) - (est.raw(k) - est.offset_estimate)).abs() < 1e-12);
        }
        let c = |k| est.corrected(k);
        let want =
            (c(PortPairKind::CrossNn) + c(PortPairKind::CrossPp) - c(PortPairKind::CrossPn) - c(PortPairKind::CrossNp))
                / PortPairKind::CROSS.iter().map(|&k| c(k)).sum::<f64>();
        assert!((est.normalized_correlation_estimate - want).abs() < 1e-12);
    }

    #[test]
    fn intensity_run_tracks_oracle_roughly() {
        let cfg = SimConfig {
            trials: 200_000,
            ..small(CountMode::IntensityOnly)
        }
        .with_angles(FRAC_PI_8, 0.0);
        let est = run_intensity_experiment(&cfg).unwrap();
        let q = OracleParams::new(1.0, FRAC_PI_8).unwrap();
        for k in PortPairKind::ALL {
            let d = (est.raw(k) - raw_product_mean(k, &q)).abs();
            assert!(
                d < 5.0 * est.raw_std_error(k),
                "{k}: {} vs {}",
                est.raw(k),
                raw_product_mean(k, &q)
            );
        }
    }

    #[test]
    fn same_seed_same_result() {
        let cfg = small(CountMode::MatchedPairs);
        assert_eq!(run_count_experiment(&cfg).unwrap(), run_count_experiment(&cfg).unwrap());
        let other = run_count_experiment(&cfg.with_seed(cfg.seed + 1)).unwrap();
        assert_ne!(run_count_experiment(&cfg).unwrap().raw_mean, other.raw_mean);
    }

    #[test]
    fn postselected_tally_is_consistent() {
        let cfg = SimConfig {
            postselect_single_pairs: true,
            ..small(CountMode::IndependentPoisson)
        };
        let t = run_postselected_experiment(&cfg).unwrap();
        assert_eq!(t.trials_total, cfg.trials);
        assert!(t.trials_selected <= t.trials_total);
        assert_eq!(t.nn + t.np + t.pn + t.pp, t.trials_selected);
        assert!(t.trials_selected > 0);
    }

    #[test]
    fn sweep_rejects_empty_and_reports_oracle() {
        let cfg = small(CountMode::IntensityOnly);
        assert!(matches!(sweep_angles(&cfg, &[]), Err(Error::Usage(_))));
        let rows = sweep_angles(&cfg, &[0.0]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].oracle, -1.0);
    }

    #[test]
    fn dist_check_small_run() {
        let d = bose_einstein_check(1.0, 50_000, 3).unwrap();
        assert_eq!(d.rows[0].analytic, 0.5);
        let mass: f64 = d.rows.iter().map(|r| r.empirical).sum::<f64>() + d.tail_empirical;
        assert!((mass - 1.0).abs() < 1e-12);
        assert!(d.tail_analytic < DIST_TAIL_MASS);
        assert!(d.total_variation < 0.02);
        assert!(bose_einstein_check(0.0, 10, 0).is_err());
        assert!(bose_einstein_check(1.0, 0, 0).is_err());
    }

    #[test]
    fn degenerate_chsh_combination() {
        let cfg = small(CountMode::IntensityOnly);
        let e = chsh_experiment(&cfg, 0.3, 0.3, FRAC_PI_4, FRAC_PI_4).unwrap();
        // legs 0/1 and 2/3 share settings but not seeds
        let c = e.correlations;
        assert!((e.s - ((c[0] - c[1]).abs() + (c[2] + c[3]).abs())).abs() < 1e-15);
        assert!((e.oracle - 2.0 * normalized_correlation(0.3 - FRAC_PI_4).abs()).abs() < 1e-12);
    }
}
