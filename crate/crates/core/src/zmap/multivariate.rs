//! Range size of the multivariate map, exactly or by sampling.

use std::collections::HashSet;
use std::ops::ControlFlow;

use rand::Rng;
use serde::Serialize;

use super::census::{check_pairs, enumerate_census, EnumOptions, Probability, Walker};
use super::{decode_tuple, pow_u128, z_eval, PairXY, ProblemParams, Scope, ZmapError};
use crate::field::FieldElement;

/// Fewer samples than this are rejected.
pub const MIN_SAMPLES: usize = 30;

/// Width of the reported interval, in standard errors.
const CONFIDENCE_Z: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// Draw uniform `z` and test whether its fiber is empty by scanning pairs.
    /// Unbiased for `|R_k| / q^J`.
    Membership,
    /// Draw uniform pairs and count distinct images. Only a lower bound on
    /// `|R_k| / q^J`.
    DistinctImages,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MultivariateMode {
    Exact,
    /// `mode: None` picks membership sampling when the pair space fits the
    /// budget and distinct-image counting otherwise.
    Sample {
        samples: usize,
        mode: Option<SampleMode>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultivariateReport {
    pub q: u64,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub num_coeffs: usize,
    pub z_space: u128,
    /// `"exact"`, `"membership"` or `"distinct_images"`.
    pub mode: String,
    /// Exact `|R_k|`, when enumerated.
    pub range_size: Option<u64>,
    pub exact_fraction: Option<Probability>,
    /// Point estimate of `|R_k| / q^J` (the exact value in exact mode).
    pub fraction: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Set when `fraction` only bounds the true value from below.
    pub lower_bound: bool,
    pub samples: usize,
    pub hits: usize,
    /// Whether `k > J / (n + 1)`, the regime where the range is expected to
    /// fill almost all of `F_q^J`.
    pub above_threshold: bool,
}

pub fn multivariate_census<R: Rng + ?Sized>(
    params: &ProblemParams,
    mode: MultivariateMode,
    rng: &mut R,
    opts: &EnumOptions,
) -> Result<MultivariateReport, ZmapError> {
    let mut report = MultivariateReport {
        q: params.q(),
        n: params.n(),
        d: params.d(),
        k: params.k(),
        num_coeffs: params.num_coeffs(),
        z_space: params.z_space_size(),
        mode: String::new(),
        range_size: None,
        exact_fraction: None,
        fraction: 0.0,
        std_error: 0.0,
        ci_low: 0.0,
        ci_high: 1.0,
        lower_bound: false,
        samples: 0,
        hits: 0,
        above_threshold: params.k() * (params.n() + 1) > params.num_coeffs(),
    };
    match mode {
        MultivariateMode::Exact => {
            let census = enumerate_census(params, opts)?;
            let p = census.success_probability(Scope::All);
            report.mode = "exact".into();
            report.range_size = Some(census.all.range_size);
            report.exact_fraction = Some(p);
            report.fraction = p.value;
            report.ci_low = p.value;
            report.ci_high = p.value;
        }
        MultivariateMode::Sample { samples, mode } => {
            if samples < MIN_SAMPLES {
                return Err(ZmapError::InsufficientSamples {
                    got: samples,
                    min: MIN_SAMPLES,
                });
            }
            let mode = mode.unwrap_or_else(|| {
                if check_pairs(params, &opts.budget).is_ok() {
                    SampleMode::Membership
                } else {
                    SampleMode::DistinctImages
                }
            });
            report.samples = samples;
            match mode {
                SampleMode::Membership => {
                    check_pairs(params, &opts.budget)?;
                    let walker = Walker::new(params);
                    let cells = params.z_space_size();
                    let hits = (0..samples)
                        .filter(|_| {
                            let target = sample_index(rng, cells);
                            walker
                                .walk(0..walker.x_space(), |_, z, _| {
                                    if z == target {
                                        ControlFlow::Break(())
                                    } else {
                                        ControlFlow::Continue(())
                                    }
                                })
                                .is_break()
                        })
                        .count();
                    let (lo, hi) = wilson(hits, samples, CONFIDENCE_Z);
                    let phat = hits as f64 / samples as f64;
                    report.mode = "membership".into();
                    report.hits = hits;
                    report.fraction = phat;
                    report.std_error = (phat * (1.0 - phat) / samples as f64).sqrt();
                    report.ci_low = lo;
                    report.ci_high = hi;
                }
                SampleMode::DistinctImages => {
                    let q = params.q();
                    let x_len = params.k() * params.n();
                    let mut seen = HashSet::with_capacity(samples);
                    for _ in 0..samples {
                        let x = random_tuple(rng, q, x_len);
                        let y = random_tuple(rng, q, params.k());
                        let z = z_eval(params, &PairXY::new(x, y))?;
                        seen.insert(z.index(q));
                    }
                    let frac = seen.len() as f64 / params.z_space_size() as f64;
                    report.mode = "distinct_images".into();
                    report.hits = seen.len();
                    report.fraction = frac;
                    report.ci_low = frac;
                    report.ci_high = 1.0;
                    report.lower_bound = true;
                }
            }
        }
    }
    Ok(report)
}

fn sample_index<R: Rng + ?Sized>(rng: &mut R, cells: u128) -> u64 {
    if cells <= u64::MAX as u128 {
        rng.gen_range(0..cells as u64)
    } else {
        rng.gen::<u64>()
    }
}

fn random_tuple<R: Rng + ?Sized>(rng: &mut R, q: u64, len: usize) -> Vec<FieldElement> {
    let space = pow_u128(q, len);
    if space <= u64::MAX as u128 {
        decode_tuple(q, len, rng.gen_range(0..space as u64))
    } else {
        (0..len)
            .map(|_| FieldElement::from_index(rng.gen_range(0..q as u32)))
            .collect()
    }
}

/// Wilson score interval for a binomial proportion.
fn wilson(hits: usize, n: usize, z: f64) -> (f64, f64) {
    let n = n as f64;
    let phat = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}
