//! Seeded Monte Carlo simulation of the exact AF/MRC system model.
//!
//! Random numbers come from ChaCha8 used as a counter-based generator:
//! stream 0 feeds the direct link and stream `r` feeds relay `r` (two draws
//! per sample, S-R then R-D). Sample `i` always reads the same words of its
//! stream, and samples are reduced in fixed-size blocks in block order, so
//! results are bitwise identical for any number of worker threads.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::relay::ChannelParams;
use crate::special::erfc;

/// Samples per reduction block. Part of the reproducibility contract.
pub const BLOCK_SAMPLES: u64 = 1 << 16;

/// Out-of-range mass above which a histogram is flagged.
pub const HISTOGRAM_WARNING_FRACTION: f64 = 0.01;

/// How the two-hop branch power is formed from the hop powers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SrdModel {
    /// `XY / (X + Y + 1/γ)`
    #[default]
    Exact,
    /// `XY / (X + Y)`, the form the closed-form results assume.
    HighSnr,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub samples: u64,
    pub relays: usize,
    pub histogram_bins: usize,
    pub histogram_range: (f64, f64),
    pub model: SrdModel,
}

impl SimConfig {
    pub fn new(seed: u64, samples: u64) -> Self {
        Self {
            seed,
            samples,
            relays: 1,
            histogram_bins: 100,
            histogram_range: (0.0, 10.0),
            model: SrdModel::Exact,
        }
    }

    pub fn relays(mut self, relays: usize) -> Self {
        self.relays = relays;
        self
    }

    pub fn histogram(mut self, bins: usize, lo: f64, hi: f64) -> Self {
        self.histogram_bins = bins;
        self.histogram_range = (lo, hi);
        self
    }

    pub fn model(mut self, model: SrdModel) -> Self {
        self.model = model;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::domain("samples must be at least 1"));
        }
        if self.relays == 0 {
            return Err(Error::domain("relays must be at least 1"));
        }
        if self.histogram_bins < 2 {
            return Err(Error::domain("histogram needs at least 2 bins"));
        }
        let (lo, hi) = self.histogram_range;
        if !(lo >= 0.0) || !(hi > lo) || !hi.is_finite() {
            return Err(Error::domain(format!("invalid histogram range ({lo}, {hi})")));
        }
        Ok(())
    }
}

/// A sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples_used: u64,
}

impl SimEstimate {
    /// `|value - reference|` measured in standard errors.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = (self.value - reference).abs();
        if self.std_error == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / self.std_error
        }
    }
}

/// Equal-width histogram of simulated power values.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub below: u64,
    pub above: u64,
}

impl Histogram {
    fn empty(bins: usize, (lo, hi): (f64, f64)) -> Self {
        Self {
            lo,
            hi,
            counts: vec![0; bins],
            below: 0,
            above: 0,
        }
    }

    fn record(&mut self, v: f64) {
        if v < self.lo {
            self.below += 1;
        } else if v >= self.hi {
            self.above += 1;
        } else {
            let bins = self.counts.len();
            let idx = (((v - self.lo) / self.width()) as usize).min(bins - 1);
            self.counts[idx] += 1;
        }
    }

    fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.below += other.below;
        self.above += other.above;
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn in_range(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Every recorded sample, in or out of range.
    pub fn samples(&self) -> u64 {
        self.in_range() + self.below + self.above
    }

    pub fn out_of_range_fraction(&self) -> f64 {
        (self.below + self.above) as f64 / self.samples() as f64
    }

    /// More than 1% of the mass fell outside the range.
    pub fn warning(&self) -> bool {
        self.out_of_range_fraction() > HISTOGRAM_WARNING_FRACTION
    }

    pub fn centers(&self) -> Vec<f64> {
        let w = self.width();
        (0..self.counts.len()).map(|i| self.lo + (i as f64 + 0.5) * w).collect()
    }

    /// Bin densities, normalised over the in-range samples so they integrate
    /// to one over `[lo, hi)`.
    pub fn density(&self) -> Vec<f64> {
        let norm = self.in_range() as f64 * self.width();
        self.counts.iter().map(|&c| c as f64 / norm).collect()
    }

    /// Density of the bin containing `x`, if any.
    pub fn density_at(&self, x: f64) -> Option<f64> {
        if x < self.lo || x >= self.hi {
            return None;
        }
        let idx = (((x - self.lo) / self.width()) as usize).min(self.counts.len() - 1);
        Some(self.counts[idx] as f64 / (self.in_range() as f64 * self.width()))
    }

    /// Fraction of all samples below the left edge of bin `edge`
    /// (`edge = bins` is the right end of the range).
    pub fn cumulative_fraction(&self, edge: usize) -> f64 {
        let below: u64 = self.below + self.counts[..edge.min(self.counts.len())].iter().sum::<u64>();
        below as f64 / self.samples() as f64
    }
}

/// What to estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    /// `P(|h_eq|² ≤ x)`
    CdfAt(f64),
    PdfHistogram,
    /// `P(γ|h_eq|² < threshold)`
    Outage { snr_threshold: f64 },
    /// `E[½ erfc(√(γ|h_eq|²))]`
    Bep,
    /// `E[½ ln(1 + γ|h_eq|²)]`
    Capacity,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimOutput {
    Estimate(SimEstimate),
    Histogram(Histogram),
}

impl SimOutput {
    pub fn estimate(&self) -> Option<SimEstimate> {
        match self {
            SimOutput::Estimate(e) => Some(*e),
            SimOutput::Histogram(_) => None,
        }
    }

    pub fn histogram(self) -> Option<Histogram> {
        match self {
            SimOutput::Histogram(h) => Some(h),
            SimOutput::Estimate(_) => None,
        }
    }
}

/// Inverse-CDF exponential from 53 uniform bits: `-ln(1 - U)/λ`, `U ∈ [0, 1)`.
pub fn exponential_from_bits(bits: u64, lambda: f64) -> f64 {
    let u = (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    -(-u).ln_1p() / lambda
}

/// Two-hop branch power from the hop powers `x = |h_sr|²`, `y = |h_rd|²`.
pub fn srd_power(x: f64, y: f64, gamma: f64, model: SrdModel) -> f64 {
    let num = x * y;
    if num == 0.0 {
        return 0.0;
    }
    match model {
        SrdModel::Exact => num / (x + y + 1.0 / gamma),
        SrdModel::HighSnr => num / (x + y),
    }
}

/// Draws `|h_sr|²`, `|h_rd|²` from `rng` and returns `|h_srd|²`.
pub fn sample_srd_power<R: RngCore>(p: &ChannelParams, rng: &mut R, model: SrdModel) -> f64 {
    let x = exponential_from_bits(rng.next_u64(), p.lambda_sr);
    let y = exponential_from_bits(rng.next_u64(), p.lambda_rd);
    srd_power(x, y, p.gamma, model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Combining {
    Mrc(SrdModel),
    MinBound,
}

/// Per-block random streams, positioned at the block's first sample.
struct BlockStreams {
    direct: ChaCha8Rng,
    relays: Vec<ChaCha8Rng>,
}

impl BlockStreams {
    fn new(seed: u64, relays: usize, first_sample: u64) -> Self {
        let stream = |id: u64, u64_per_sample: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id);
            // Two 32-bit words per u64.
            rng.set_word_pos(u128::from(first_sample) * u128::from(u64_per_sample) * 2);
            rng
        };
        Self {
            direct: stream(0, 1),
            relays: (1..=relays as u64).map(|r| stream(r, 2)).collect(),
        }
    }

    fn next_power(&mut self, p: &ChannelParams, combining: Combining) -> f64 {
        let direct = exponential_from_bits(self.direct.next_u64(), p.lambda_sd);
        match combining {
            Combining::Mrc(model) => {
                direct
                    + self
                        .relays
                        .iter_mut()
                        .map(|rng| sample_srd_power(p, rng, model))
                        .sum::<f64>()
            }
            Combining::MinBound => {
                let rng = &mut self.relays[0];
                let x = exponential_from_bits(rng.next_u64(), p.lambda_sr);
                let y = exponential_from_bits(rng.next_u64(), p.lambda_rd);
                direct + x.min(y)
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Accumulator {
    n: u64,
    sum: f64,
    sum_sq: f64,
    histogram: Option<Histogram>,
}

fn run(p: &ChannelParams, cfg: &SimConfig, metric: Metric, combining: Combining) -> Result<SimOutput> {
    cfg.validate()?;
    if let Metric::Outage { snr_threshold } = metric {
        if !(snr_threshold > 0.0) {
            return Err(Error::domain("outage threshold must be positive"));
        }
    }
    let blocks = cfg.samples.div_ceil(BLOCK_SAMPLES);
    let value_of = |power: f64| -> f64 {
        match metric {
            Metric::CdfAt(x) => f64::from(u8::from(power <= x)),
            Metric::Outage { snr_threshold } => f64::from(u8::from(p.gamma * power < snr_threshold)),
            Metric::Bep => 0.5 * erfc((p.gamma * power).sqrt()),
            Metric::Capacity => 0.5 * (p.gamma * power).ln_1p(),
            Metric::PdfHistogram => 0.0,
        }
    };
    let partials: Vec<Accumulator> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK_SAMPLES;
            let end = (start + BLOCK_SAMPLES).min(cfg.samples);
            let mut streams = BlockStreams::new(cfg.seed, cfg.relays, start);
            let mut acc = Accumulator {
                n: end - start,
                sum: 0.0,
                sum_sq: 0.0,
                histogram: matches!(metric, Metric::PdfHistogram)
                    .then(|| Histogram::empty(cfg.histogram_bins, cfg.histogram_range)),
            };
            for _ in start..end {
                let power = streams.next_power(p, combining);
                if let Some(h) = acc.histogram.as_mut() {
                    h.record(power);
                } else {
                    let v = value_of(power);
                    acc.sum += v;
                    acc.sum_sq += v * v;
                }
            }
            acc
        })
        .collect();

    // Block order is fixed, so this reduction is reproducible.
    let mut total = Accumulator {
        n: 0,
        sum: 0.0,
        sum_sq: 0.0,
        histogram: None,
    };
    for part in partials {
        total.n += part.n;
        total.sum += part.sum;
        total.sum_sq += part.sum_sq;
        match (&mut total.histogram, part.histogram) {
            (Some(h), Some(ph)) => h.merge(&ph),
            (slot @ None, Some(ph)) => *slot = Some(ph),
            _ => {}
        }
    }
    if let Some(h) = total.histogram {
        return Ok(SimOutput::Histogram(h));
    }
    let n = total.n as f64;
    let mean = total.sum / n;
    let variance = if total.n > 1 {
        ((total.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(SimOutput::Estimate(SimEstimate {
        value: mean,
        std_error: (variance / n).sqrt(),
        samples_used: total.n,
    }))
}

/// Simulates the MRC output power `|h_sd|² + Σ_r |h_srd,r|²` and estimates `metric`.
///
/// Every relay has the fading parameters in `p`.
pub fn simulate(p: &ChannelParams, cfg: &SimConfig, metric: Metric) -> Result<SimOutput> {
    run(p, cfg, metric, Combining::Mrc(cfg.model))
}

/// Histogram of the min-bound power `|h_sd|² + min(|h_sr|², |h_rd|²)`.
pub fn simulate_minbound(p: &ChannelParams, cfg: &SimConfig) -> Result<Histogram> {
    let out = run(p, &SimConfig { relays: 1, ..*cfg }, Metric::PdfHistogram, Combining::MinBound)?;
    Ok(out.histogram().expect("histogram metric"))
}

/// Any scalar metric of the min-bound power.
pub fn simulate_minbound_metric(p: &ChannelParams, cfg: &SimConfig, metric: Metric) -> Result<SimOutput> {
    run(p, &SimConfig { relays: 1, ..*cfg }, metric, Combining::MinBound)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(gamma: f64) -> ChannelParams {
        ChannelParams::new(gamma, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_hop_gives_zero_power() {
        assert_eq!(srd_power(0.0, 3.0, 10.0, SrdModel::Exact), 0.0);
        assert_eq!(srd_power(0.0, 3.0, 10.0, SrdModel::HighSnr), 0.0);
        assert_eq!(srd_power(2.0, 2.0, 1e300, SrdModel::Exact), 1.0);
    }

    #[test]
    fn exponential_bits_edges() {
        assert_eq!(exponential_from_bits(0, 2.0), 0.0);
        assert!(exponential_from_bits(u64::MAX, 1.0).is_finite());
        // Monotone in the uniform
        assert!(exponential_from_bits(1 << 40, 1.0) < exponential_from_bits(1 << 50, 1.0));
    }

    #[test]
    fn outage_at_infinite_threshold() {
        let cfg = SimConfig::new(1, 10_000);
        let e = simulate(&unit(10.0), &cfg, Metric::Outage { snr_threshold: f64::INFINITY })
            .unwrap()
            .estimate()
            .unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.std_error, 0.0);
        assert_eq!(e.samples_used, 10_000);
    }

    #[test]
    fn config_validation() {
        let p = unit(10.0);
        assert!(simulate(&p, &SimConfig::new(1, 0), Metric::Bep).is_err());
        assert!(simulate(&p, &SimConfig::new(1, 10).relays(0), Metric::Bep).is_err());
        assert!(simulate(&p, &SimConfig::new(1, 10).histogram(1, 0.0, 1.0), Metric::Bep).is_err());
        assert!(simulate(&p, &SimConfig::new(1, 10).histogram(10, 2.0, 1.0), Metric::Bep).is_err());
    }

    #[test]
    fn histogram_mass_and_normalisation() {
        let cfg = SimConfig::new(5, 200_003).histogram(40, 0.0, 3.0);
        let h = simulate(&unit(100.0), &cfg, Metric::PdfHistogram).unwrap().histogram().unwrap();
        assert_eq!(h.samples(), 200_003);
        let integral: f64 = h.density().iter().map(|d| d * h.width()).sum();
        assert!((integral - 1.0).abs() < 1e-12);
        // Range [0, 3) misses a visible share of Exp(1) + branch power.
        assert!(h.warning());
    }

    #[test]
    fn partial_last_block() {
        let cfg = SimConfig::new(9, BLOCK_SAMPLES + 17);
        let e = simulate(&unit(10.0), &cfg, Metric::Capacity).unwrap().estimate().unwrap();
        assert_eq!(e.samples_used, BLOCK_SAMPLES + 17);
    }
}
