//! Lilliefors normality test with Monte Carlo null tables.
//!
//! The statistic is the Kolmogorov-Smirnov distance between the empirical
//! distribution of the standardised sample and the standard normal. Its null
//! distribution has no closed form, so it is tabulated by simulation for a
//! grid of sample sizes (`data/lilliefors_null.json`, produced by
//! `cargo run --release -p handrecon --example gen_lilliefors_table`).
//!
//! Between grid sizes the statistic is rescaled by
//! `√n − 0.01 + 0.85/√n`, which makes the null distribution nearly
//! size-independent, and the p-values of the two neighbouring tables are
//! interpolated linearly in `1/√n`. Beyond the simulated range the
//! Dallal-Wilkinson tail approximation is used.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{mean, require, variance, TestKind, TestResult};
use crate::error::{Error, Result};

/// Seed of the shipped table.
pub const TABLE_SEED: u64 = 0x4c49_4c4c_4945_464f;
/// Null replicates per sample size in the shipped table.
pub const TABLE_REPLICATES: usize = 20_000;
/// Quantile levels `k / TABLE_LEVELS`, `k = 0..=TABLE_LEVELS`.
pub const TABLE_LEVELS: usize = 400;

/// Sample sizes covered by the shipped table.
pub fn table_sizes() -> Vec<usize> {
    let mut sizes: Vec<usize> = (4..=30).collect();
    sizes.extend([35, 40, 45, 50, 60, 70, 80, 90, 100, 120, 150, 200, 250, 300, 400, 500, 700, 1000]);
    sizes
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullEntry {
    pub n: usize,
    /// Null quantiles of the statistic at levels `k / levels`.
    pub quantiles: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullTable {
    pub generator: String,
    pub seed: u64,
    pub replicates: usize,
    pub levels: usize,
    pub entries: Vec<NullEntry>,
}

static SHIPPED: OnceLock<NullTable> = OnceLock::new();

impl NullTable {
    /// The table compiled into the crate.
    pub fn shipped() -> &'static NullTable {
        SHIPPED.get_or_init(|| {
            serde_json::from_str(include_str!("../../data/lilliefors_null.json"))
                .expect("shipped Lilliefors table is valid JSON")
        })
    }

    /// Simulates the null distribution of the statistic for one sample
    /// size. Each size draws from its own ChaCha8 stream, so entries can be
    /// regenerated independently.
    pub fn simulate_entry(seed: u64, n: usize, replicates: usize, levels: usize) -> NullEntry {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(n as u64);
        let mut stats = Vec::with_capacity(replicates);
        let mut sample = vec![0.0; n];
        for _ in 0..replicates {
            for v in sample.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            stats.push(statistic(&mut sample));
        }
        stats.sort_by(f64::total_cmp);
        let quantiles = (0..=levels)
            .map(|k| {
                let pos = k as f64 / levels as f64 * (replicates - 1) as f64;
                let lo = pos.floor() as usize;
                let hi = pos.ceil() as usize;
                stats[lo] + (pos - lo as f64) * (stats[hi] - stats[lo])
            })
            .collect();
        NullEntry { n, quantiles }
    }

    pub fn generate(seed: u64, sizes: &[usize], replicates: usize, levels: usize) -> NullTable {
        NullTable {
            generator: format!("ChaCha8Rng (rand_chacha 0.9), stream = sample size"),
            seed,
            replicates,
            levels,
            entries: sizes.iter().map(|&n| Self::simulate_entry(seed, n, replicates, levels)).collect(),
        }
    }

    fn entry_p(&self, entry: &NullEntry, d: f64) -> f64 {
        let q = &entry.quantiles;
        let levels = q.len() - 1;
        if d < q[0] {
            return 1.0;
        }
        let tail_at_max = dallal_wilkinson(q[levels], entry.n).min(1.0 / self.replicates as f64);
        if d >= q[levels] {
            return dallal_wilkinson(d, entry.n).min(tail_at_max);
        }
        let k = q.partition_point(|&v| v <= d).saturating_sub(1).min(levels - 1);
        let frac = if q[k + 1] > q[k] { (d - q[k]) / (q[k + 1] - q[k]) } else { 1.0 };
        let upper = |k: usize| {
            if k == levels {
                tail_at_max
            } else {
                1.0 - k as f64 / levels as f64
            }
        };
        upper(k) + frac * (upper(k + 1) - upper(k))
    }

    /// Upper-tail probability of the statistic `d` for a sample of size `n`.
    pub fn p_value(&self, d: f64, n: usize) -> f64 {
        let entries = &self.entries;
        let i = entries.partition_point(|e| e.n < n);
        if i < entries.len() && entries[i].n == n {
            return self.entry_p(&entries[i], d);
        }
        let rescale = |e: &NullEntry| d * stephens(n) / stephens(e.n);
        if i == 0 {
            return self.entry_p(&entries[0], rescale(&entries[0]));
        }
        if i == entries.len() {
            let last = &entries[i - 1];
            return self.entry_p(last, rescale(last));
        }
        let (lo, hi) = (&entries[i - 1], &entries[i]);
        let p_lo = self.entry_p(lo, rescale(lo));
        let p_hi = self.entry_p(hi, rescale(hi));
        let t = |k: usize| 1.0 / (k as f64).sqrt();
        let w = (t(lo.n) - t(n)) / (t(lo.n) - t(hi.n));
        p_lo + w * (p_hi - p_lo)
    }
}

fn stephens(n: usize) -> f64 {
    let s = (n as f64).sqrt();
    s - 0.01 + 0.85 / s
}

/// Dallal-Wilkinson approximation of the Lilliefors upper tail, accurate
/// for small p.
fn dallal_wilkinson(d: f64, n: usize) -> f64 {
    let (kd, nd) = if n > 100 { (d * (n as f64 / 100.0).powf(0.49), 100.0) } else { (d, n as f64) };
    let p = (-7.01256 * kd * kd * (nd + 2.78019) + 2.99587 * kd * (nd + 2.78019).sqrt() - 0.122119
        + 0.974598 / nd.sqrt()
        + 1.67997 / nd)
        .exp();
    p.clamp(0.0, 1.0)
}

/// KS distance of a sample standardised with its own mean and standard
/// deviation. Sorts `sample` in place.
fn statistic(sample: &mut [f64]) -> f64 {
    let n = sample.len() as f64;
    let m = mean(sample);
    let s = variance(sample).sqrt();
    sample.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf((x - m) / s);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Lilliefors test of composite normality (mean and variance estimated).
pub fn lilliefors_normality(sample: &[f64]) -> Result<TestResult> {
    require(sample, 4)?;
    let first = sample[0];
    if sample.iter().all(|&v| v == first) || variance(sample) == 0.0 {
        return Err(Error::TooFewDistinct);
    }
    let mut sorted = sample.to_vec();
    let d = statistic(&mut sorted);
    let p = NullTable::shipped().p_value(d, sample.len());
    Ok(TestResult::new(TestKind::Lilliefors, d, None, p))
}
