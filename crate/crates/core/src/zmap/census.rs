//! Exhaustive enumeration of `Z` over all pairs.

use std::collections::BTreeMap;
use std::ops::{ControlFlow, Range};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{encode_tuple, pow_u128, ProblemParams, Scope, ZVector, ZmapError};
use crate::budget::Budget;
use crate::field::FieldElement;
use crate::Exact;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EnumOptions {
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
    pub budget: Budget,
}

impl EnumOptions {
    pub fn with_workers(workers: usize) -> Self {
        EnumOptions {
            workers,
            ..Default::default()
        }
    }
}

/// Per-pair visitor over a contiguous range of `x` tuples.
pub(crate) struct Walker<'a> {
    params: &'a ProblemParams,
    q: u64,
    point_space: u64,
    y_space: u64,
    /// `monomials[point * J + j]`
    monomials: Vec<FieldElement>,
}

impl<'a> Walker<'a> {
    pub(crate) fn new(params: &'a ProblemParams) -> Self {
        let q = params.q();
        let n = params.n();
        let point_space = pow_u128(q, n) as u64;
        let mut monomials = Vec::with_capacity(point_space as usize * params.num_coeffs());
        for pt in 0..point_space {
            let point = super::decode_tuple(q, n, pt);
            monomials.extend(params.monomials(&point));
        }
        Walker {
            params,
            q,
            point_space,
            y_space: pow_u128(q, params.k()) as u64,
            monomials,
        }
    }

    pub(crate) fn x_space(&self) -> u64 {
        self.params.x_space_size() as u64
    }

    /// Calls `visit(pair_index, z_index, is_good)` for every pair whose `x`
    /// index lies in `range`, in increasing pair index.
    pub(crate) fn walk<F>(&self, range: Range<u64>, mut visit: F) -> ControlFlow<()>
    where
        F: FnMut(u64, u64, bool) -> ControlFlow<()>,
    {
        let f = self.params.field();
        let k = self.params.k();
        let jn = self.params.num_coeffs();
        let q = self.q;
        let mut pts = vec![0usize; k];
        let mut sums = vec![FieldElement::ZERO; (k + 1) * jn];
        let mut y = vec![0u32; k];
        for xi in range {
            let mut rest = xi;
            for slot in pts.iter_mut().rev() {
                *slot = (rest % self.point_space) as usize;
                rest /= self.point_space;
            }
            let good_x = (0..k).all(|i| (i + 1..k).all(|j| pts[i] != pts[j]));
            sums.fill(FieldElement::ZERO);
            y.fill(0);
            let mut zeros = k;
            let base = xi * self.y_space;
            for yi in 0..self.y_space {
                if yi > 0 {
                    // odometer step; `pos` ends at the most significant changed digit
                    let mut pos = k - 1;
                    loop {
                        if y[pos] == 0 {
                            zeros -= 1;
                        }
                        y[pos] += 1;
                        if y[pos] as u64 == q {
                            y[pos] = 0;
                            zeros += 1;
                            pos -= 1;
                        } else {
                            break;
                        }
                    }
                    for l in pos..k {
                        let yl = FieldElement::from_index(y[l]);
                        let m = &self.monomials[pts[l] * jn..(pts[l] + 1) * jn];
                        let (head, tail) = sums.split_at_mut((l + 1) * jn);
                        let prev = &head[l * jn..];
                        for ((out, &s), &mj) in tail[..jn].iter_mut().zip(prev).zip(m) {
                            *out = f.add(s, f.mul(yl, mj));
                        }
                    }
                }
                let z = encode_tuple(q, &sums[k * jn..]);
                visit(base + yi, z, good_x && zeros == 0)?;
            }
        }
        ControlFlow::Continue(())
    }
}

pub(crate) fn run_in_pool<T: Send>(workers: usize, op: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return op();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(op),
        Err(_) => op(),
    }
}

pub(crate) fn split_ranges(total: u64, parts: usize) -> Vec<Range<u64>> {
    let parts = (parts.max(1) as u64).min(total.max(1));
    let step = total.div_ceil(parts);
    (0..parts)
        .map(|i| (i * step).min(total)..((i + 1) * step).min(total))
        .filter(|r| !r.is_empty() || total == 0)
        .collect()
}

fn worker_count(workers: usize) -> usize {
    if workers == 0 {
        rayon::current_num_threads()
    } else {
        workers
    }
}

pub(crate) fn check_pairs(params: &ProblemParams, budget: &Budget) -> Result<u64, ZmapError> {
    let pairs = params.pair_space_size();
    let cap = budget.pair_space.min(u32::MAX as u64);
    if pairs > cap as u128 {
        return Err(ZmapError::BudgetExceeded {
            what: "pair enumeration",
            needed: pairs,
            cap,
        });
    }
    Ok(pairs as u64)
}

fn check_cells(params: &ProblemParams, budget: &Budget) -> Result<usize, ZmapError> {
    let cells = params.z_space_size();
    let cap = budget.census_cells.min(u32::MAX as u64);
    if cells > cap as u128 {
        return Err(ZmapError::BudgetExceeded {
            what: "census counters",
            needed: cells,
            cap,
        });
    }
    Ok(cells as usize)
}

/// Fiber sizes `|Z^{-1}(z)|` and `|Z^{-1}(z)^good|` for every `z`, by `z` index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberCounts {
    pub all: Vec<u32>,
    pub good: Vec<u32>,
}

impl FiberCounts {
    pub fn counts(&self, scope: Scope) -> &[u32] {
        match scope {
            Scope::All => &self.all,
            Scope::Good => &self.good,
        }
    }
}

/// Counts every fiber. Each worker fills a private pair of arrays over a
/// contiguous block of `x` tuples; the arrays are summed afterwards.
pub fn fiber_counts(params: &ProblemParams, opts: &EnumOptions) -> Result<FiberCounts, ZmapError> {
    check_pairs(params, &opts.budget)?;
    let cells = check_cells(params, &opts.budget)?;
    let walker = Walker::new(params);
    // private arrays cost 8 bytes per cell per worker
    let mem_parts = ((1usize << 30) / (8 * cells.max(1))).max(1);
    let parts = worker_count(opts.workers).min(mem_parts);
    let ranges = split_ranges(walker.x_space(), parts);
    let count_range = |range: Range<u64>| {
        let mut all = vec![0u32; cells];
        let mut good = vec![0u32; cells];
        let _ = walker.walk(range, |_, z, is_good| {
            all[z as usize] += 1;
            if is_good {
                good[z as usize] += 1;
            }
            ControlFlow::Continue(())
        });
        FiberCounts { all, good }
    };
    let partials: Vec<FiberCounts> = if ranges.len() <= 1 {
        ranges.into_iter().map(count_range).collect()
    } else {
        run_in_pool(opts.workers, || ranges.into_par_iter().map(count_range).collect())
    };
    let mut iter = partials.into_iter();
    let mut acc = iter.next().unwrap_or_else(|| FiberCounts {
        all: vec![0; cells],
        good: vec![0; cells],
    });
    for part in iter {
        for (a, b) in acc.all.iter_mut().zip(part.all) {
            *a += b;
        }
        for (a, b) in acc.good.iter_mut().zip(part.good) {
            *a += b;
        }
    }
    Ok(acc)
}

/// `Z(x, y)` index and goodness for every pair, by pair index.
#[derive(Clone, Debug)]
pub struct PairImages {
    pub z: Vec<u32>,
    pub good: Vec<bool>,
}

pub fn pair_images(params: &ProblemParams, opts: &EnumOptions) -> Result<PairImages, ZmapError> {
    let pairs = check_pairs(params, &opts.budget)? as usize;
    check_cells(params, &opts.budget)?;
    let walker = Walker::new(params);
    let y_space = pow_u128(params.q(), params.k()) as usize;
    let mut z = vec![0u32; pairs];
    let mut good = vec![false; pairs];
    let parts = worker_count(opts.workers);
    let x_per_part = walker.x_space().div_ceil(parts as u64).max(1) as usize;
    let chunk = x_per_part * y_space;
    run_in_pool(opts.workers, || {
        z.par_chunks_mut(chunk)
            .zip(good.par_chunks_mut(chunk))
            .enumerate()
            .for_each(|(i, (zs, gs))| {
                let start = (i * x_per_part) as u64;
                let end = start + (zs.len() / y_space) as u64;
                let offset = start * y_space as u64;
                let _ = walker.walk(start..end, |pair, zi, g| {
                    let local = (pair - offset) as usize;
                    zs[local] = zi as u32;
                    gs[local] = g;
                    ControlFlow::Continue(())
                });
            })
    });
    Ok(PairImages { z, good })
}

/// `|Z^{-1}(z)|` (or its good part) by a direct scan; no census array is built.
pub fn preimage_count(
    params: &ProblemParams,
    z: &ZVector,
    scope: Scope,
    opts: &EnumOptions,
) -> Result<u64, ZmapError> {
    params.check_len("z", params.num_coeffs(), z.0.len())?;
    params.check_elements(&z.0)?;
    check_pairs(params, &opts.budget)?;
    let target = z.index(params.q());
    let walker = Walker::new(params);
    let ranges = split_ranges(walker.x_space(), worker_count(opts.workers));
    let count_range = |range: Range<u64>| {
        let mut c = 0u64;
        let _ = walker.walk(range, |_, zi, g| {
            if zi == target && (scope == Scope::All || g) {
                c += 1;
            }
            ControlFlow::Continue(())
        });
        c
    };
    Ok(run_in_pool(opts.workers, || ranges.into_par_iter().map(count_range).sum()))
}

/// An exact probability with its float rendering.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Probability {
    #[serde(serialize_with = "crate::serialize_exact")]
    pub exact: Exact,
    pub value: f64,
}

impl Probability {
    pub fn new(num: u128, den: u128) -> Self {
        let exact = Exact::new(num, den);
        Probability {
            exact,
            value: num as f64 / den as f64,
        }
    }
}

/// Fiber statistics of one scope, with `z` uniform over `F_q^J`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScopeStats {
    /// Number of `z` with a nonempty fiber.
    pub range_size: u64,
    /// Sorted `[fiber size, number of z]` pairs, including size 0.
    pub histogram: Vec<(u64, u64)>,
    /// Total number of pairs counted.
    pub pairs: u128,
    pub sum_squares: u128,
    #[serde(serialize_with = "crate::serialize_exact")]
    pub mean: Exact,
    #[serde(serialize_with = "crate::serialize_exact")]
    pub variance: Exact,
}

impl ScopeStats {
    fn from_counts(counts: &[u32]) -> Self {
        let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
        for &c in counts {
            *hist.entry(c as u64).or_default() += 1;
        }
        Self::from_histogram(hist.into_iter().collect())
    }

    fn from_histogram(histogram: Vec<(u64, u64)>) -> Self {
        let cells: u128 = histogram.iter().map(|&(_, m)| m as u128).sum();
        let pairs: u128 = histogram.iter().map(|&(c, m)| c as u128 * m as u128).sum();
        let sum_squares: u128 = histogram
            .iter()
            .map(|&(c, m)| (c as u128) * (c as u128) * m as u128)
            .sum();
        let range_size = histogram
            .iter()
            .filter(|&&(c, _)| c > 0)
            .map(|&(_, m)| m)
            .sum();
        ScopeStats {
            range_size,
            histogram,
            pairs,
            sum_squares,
            mean: Exact::new(pairs, cells),
            variance: Exact::new(sum_squares * cells - pairs * pairs, cells * cells),
        }
    }

    /// `sum_z sqrt(|Z^{-1}(z)|)`.
    pub fn sqrt_mass(&self) -> f64 {
        self.histogram
            .iter()
            .map(|&(c, m)| m as f64 * (c as f64).sqrt())
            .sum()
    }
}

/// Exact range sizes and fiber statistics for one problem.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RangeCensus {
    pub p: u32,
    pub r: u32,
    pub q: u64,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub num_coeffs: usize,
    /// `q^J`.
    pub z_space: u128,
    pub all: ScopeStats,
    pub good: ScopeStats,
    pub wall_time_secs: f64,
}

pub fn enumerate_census(params: &ProblemParams, opts: &EnumOptions) -> Result<RangeCensus, ZmapError> {
    let start = Instant::now();
    let counts = fiber_counts(params, opts)?;
    let mut census = RangeCensus::from_counts(params, &counts);
    census.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(census)
}

impl RangeCensus {
    pub fn from_counts(params: &ProblemParams, counts: &FiberCounts) -> Self {
        let f = params.field();
        RangeCensus {
            p: f.characteristic(),
            r: f.degree(),
            q: params.q(),
            n: params.n(),
            d: params.d(),
            k: params.k(),
            num_coeffs: params.num_coeffs(),
            z_space: params.z_space_size(),
            all: ScopeStats::from_counts(&counts.all),
            good: ScopeStats::from_counts(&counts.good),
            wall_time_secs: 0.0,
        }
    }

    pub fn stats(&self, scope: Scope) -> &ScopeStats {
        match scope {
            Scope::All => &self.all,
            Scope::Good => &self.good,
        }
    }

    pub fn range_size(&self, scope: Scope) -> u64 {
        self.stats(scope).range_size
    }

    /// `|R_k| / q^J` (the optimum over all k-query algorithms) or
    /// `|R_k^good| / q^J`.
    pub fn success_probability(&self, scope: Scope) -> Probability {
        Probability::new(self.range_size(scope) as u128, self.z_space)
    }

    /// Mean and variance of the fiber size under uniform `z`.
    pub fn moment_stats(&self, scope: Scope) -> (Exact, Exact) {
        let s = self.stats(scope);
        (s.mean, s.variance)
    }

    /// Success probability of the uniform-superposition variant,
    /// `(sum_z sqrt|Z^{-1}(z)|)^2 / q^{2k + J}`.
    pub fn pgm_success(&self) -> f64 {
        let m = self.all.sqrt_mass();
        m * m / (self.all.pairs as f64 * self.z_space as f64)
    }
}
