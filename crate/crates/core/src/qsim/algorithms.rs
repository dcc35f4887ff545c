//! The interpolation algorithms, simulated end to end.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    check_amplitudes, phase_query, phase_query_via_standard, MeasurementResult, QsimError, StateVector,
};
use crate::budget::Budget;
use crate::prony::{invert_z, valid_extensions};
use crate::zmap::{
    pair_images, CoeffVector, EnumOptions, FiberCounts, PairImages,
    PairXY, ProblemParams, Scope, ZVector,
};

/// How the queries are issued.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryKind {
    #[default]
    Phase,
    /// Each phase query realised as a Fourier-conjugated standard query.
    Standard,
}

/// Where the representative pair of each `z` in the range comes from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RepresentativeSource {
    /// The canonical inverter when it applies, the census otherwise.
    #[default]
    Auto,
    /// The canonical inverter: good scope, odd `d`, `k = (d+1)/2`.
    Inverter,
    /// Smallest pair index in each fiber.
    Census,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase", tag = "variant")]
pub enum Variant {
    /// Uniform superposition over one representative per `z`, phase
    /// queries, `Z` computed in place.
    Optimal {
        scope: Scope,
        source: RepresentativeSource,
        query: QueryKind,
    },
    /// Uniform superposition over all pairs, phase queries, each fiber state
    /// relabelled as its `z`.
    Pgm,
    /// Fiber states `|Z^{-1}(z)^good>` stand in for representatives.
    Superposed,
}

impl Variant {
    pub fn optimal(scope: Scope) -> Self {
        Variant::Optimal {
            scope,
            source: RepresentativeSource::Auto,
            query: QueryKind::Phase,
        }
    }
}

type RepCache = Mutex<HashMap<(Scope, RepresentativeSource), Arc<Vec<u64>>>>;

/// Shared data for simulating one `(q, d, k)` at many hidden polynomials.
pub struct Simulator {
    params: ProblemParams,
    budget: Budget,
    images: PairImages,
    counts: FiberCounts,
    reps: RepCache,
    fibers: OnceLock<Arc<Vec<Vec<u64>>>>,
}

impl Simulator {
    pub fn new(params: &ProblemParams, opts: &EnumOptions) -> Result<Self, QsimError> {
        check_amplitudes("pair register state", params.pair_space_size(), &opts.budget)?;
        check_amplitudes("z register state", params.z_space_size(), &opts.budget)?;
        let images = pair_images(params, opts)?;
        let cells = params.z_space_size() as usize;
        let mut counts = FiberCounts {
            all: vec![0; cells],
            good: vec![0; cells],
        };
        for (&z, &good) in images.z.iter().zip(&images.good) {
            counts.all[z as usize] += 1;
            if good {
                counts.good[z as usize] += 1;
            }
        }
        Ok(Simulator {
            params: params.clone(),
            budget: opts.budget,
            images,
            counts,
            reps: Mutex::new(HashMap::new()),
            fibers: OnceLock::new(),
        })
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn fiber_counts(&self) -> &FiberCounts {
        &self.counts
    }

    pub fn range_size(&self, scope: Scope) -> u64 {
        self.counts.counts(scope).iter().filter(|&&c| c > 0).count() as u64
    }

    fn inverter_applies(&self, scope: Scope) -> bool {
        let d = self.params.d();
        scope == Scope::Good && self.params.n() == 1 && d % 2 == 1 && self.params.k() == d.div_ceil(2)
    }

    /// One pair index per `z` in the range, ordered by `z`.
    pub fn representatives(&self, scope: Scope, source: RepresentativeSource) -> Result<Arc<Vec<u64>>, QsimError> {
        let source = match source {
            RepresentativeSource::Auto if self.inverter_applies(scope) => RepresentativeSource::Inverter,
            RepresentativeSource::Auto => RepresentativeSource::Census,
            s => s,
        };
        if let Some(r) = self.reps.lock().expect("cache lock").get(&(scope, source)) {
            return Ok(r.clone());
        }
        let reps: Vec<u64> = match source {
            RepresentativeSource::Inverter => {
                if !self.inverter_applies(scope) {
                    return Err(QsimError::ParamMismatch(
                        "the inverter needs good scope, odd d and k = (d+1)/2".into(),
                    ));
                }
                let q = self.params.q();
                let cells = self.params.z_space_size() as u64;
                let found: Result<Vec<Option<u64>>, QsimError> = (0..cells)
                    .into_par_iter()
                    .map(|zi| match invert_z(&self.params, &ZVector::from_index(&self.params, zi)) {
                        Ok(c) => Ok(Some(c.pair.index(q))),
                        Err(e) if e.is_not_in_range() => Ok(None),
                        Err(e) => Err(e.into()),
                    })
                    .collect();
                found?.into_iter().flatten().collect()
            }
            _ => {
                let cells = self.params.z_space_size() as usize;
                let mut first = vec![u64::MAX; cells];
                for (i, (&z, &good)) in self.images.z.iter().zip(&self.images.good).enumerate() {
                    let slot = &mut first[z as usize];
                    if *slot == u64::MAX && (scope == Scope::All || good) {
                        *slot = i as u64;
                    }
                }
                first.into_iter().filter(|&i| i != u64::MAX).collect()
            }
        };
        let reps = Arc::new(reps);
        self.reps
            .lock()
            .expect("cache lock")
            .insert((scope, source), reps.clone());
        Ok(reps)
    }

    fn pair_registers(&self) -> usize {
        (self.params.n() + 1) * self.params.k()
    }

    fn z_registers(&self) -> usize {
        self.params.num_coeffs()
    }

    fn query(&self, state: &mut StateVector, c: &CoeffVector, kind: QueryKind) -> Result<(), QsimError> {
        match kind {
            QueryKind::Phase => phase_query(state, &self.params, c),
            QueryKind::Standard => phase_query_via_standard(state, &self.params, c),
        }
    }

    fn check_c(&self, c: &CoeffVector) -> Result<u64, QsimError> {
        if c.0.len() != self.params.num_coeffs() {
            return Err(QsimError::ShapeMismatch(format!(
                "coefficient vector needs {} entries, got {}",
                self.params.num_coeffs(),
                c.0.len()
            )));
        }
        self.params.check_elements(&c.0)?;
        Ok(c.index(self.params.q()))
    }

    /// State over the `z` registers just before the Fourier-basis measurement.
    pub fn optimal_state(
        &self,
        c: &CoeffVector,
        reps: &[u64],
        kind: QueryKind,
    ) -> Result<StateVector, QsimError> {
        self.check_c(c)?;
        let field = self.params.field();
        let mut state = StateVector::uniform_over(field, self.pair_registers(), reps, &self.budget)?;
        self.query(&mut state, c, kind)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.params.z_space_size() as usize];
        for &pair in reps {
            let z = self.images.z[pair as usize] as usize;
            if out[z] != Complex64::new(0.0, 0.0) {
                return Err(QsimError::ShapeMismatch(format!("two representatives map to z index {z}")));
            }
            out[z] = state.amplitudes()[pair as usize];
        }
        StateVector::from_amplitudes(field, self.z_registers(), out)
    }

    pub fn pgm_state(&self, c: &CoeffVector) -> Result<StateVector, QsimError> {
        self.check_c(c)?;
        let field = self.params.field();
        let all: Vec<u64> = (0..self.images.z.len() as u64).collect();
        let mut state = StateVector::uniform_over(field, self.pair_registers(), &all, &self.budget)?;
        phase_query(&mut state, &self.params, c)?;
        // projection of each fiber onto its normalised uniform state
        let mut out = vec![Complex64::new(0.0, 0.0); self.params.z_space_size() as usize];
        for (&z, &a) in self.images.z.iter().zip(state.amplitudes()) {
            out[z as usize] += a;
        }
        for (v, &n) in out.iter_mut().zip(&self.counts.all) {
            if n > 0 {
                *v /= (n as f64).sqrt();
            }
        }
        StateVector::from_amplitudes(field, self.z_registers(), out)
    }

    /// Every good pair of each fiber, assembled from the extended inversions
    /// of `z` (each sorted pair stands for its `k!` orderings).
    pub fn superposed_fibers(&self) -> Result<Arc<Vec<Vec<u64>>>, QsimError> {
        if let Some(f) = self.fibers.get() {
            return Ok(f.clone());
        }
        let d = self.params.d();
        if self.params.n() != 1 || d % 2 == 1 || self.params.k() != d / 2 + 1 {
            return Err(QsimError::ParamMismatch(
                "the superposed variant needs n = 1, even d and k = d/2+1".into(),
            ));
        }
        let q = self.params.q();
        let cells = self.params.z_space_size() as u64;
        let fibers: Result<Vec<Vec<u64>>, QsimError> = (0..cells)
            .into_par_iter()
            .map(|zi| {
                let z = ZVector::from_index(&self.params, zi);
                let mut members = Vec::new();
                for c in valid_extensions(&self.params, &z)? {
                    for perm in permutations(self.params.k()) {
                        let p = PairXY::new(
                            perm.iter().map(|&i| c.pair.x[i]).collect(),
                            perm.iter().map(|&i| c.pair.y[i]).collect(),
                        );
                        members.push(p.index(q));
                    }
                }
                members.sort_unstable();
                Ok(members)
            })
            .collect();
        let fibers = Arc::new(fibers?);
        Ok(self.fibers.get_or_init(|| fibers).clone())
    }

    pub fn superposed_state(&self, c: &CoeffVector) -> Result<StateVector, QsimError> {
        self.check_c(c)?;
        let fibers = self.superposed_fibers()?;
        let field = self.params.field();
        let pair_dim = check_amplitudes("pair register state", self.params.pair_space_size(), &self.budget)?;
        // uniform over all z, then |z> -> |Z^{-1}(z)^good>
        let za = 1.0 / (fibers.len() as f64).sqrt();
        let mut pairs = vec![Complex64::new(0.0, 0.0); pair_dim];
        for members in fibers.iter().filter(|m| !m.is_empty()) {
            let a = za / (members.len() as f64).sqrt();
            for &p in members {
                pairs[p as usize] += Complex64::new(a, 0.0);
            }
        }
        // postselect on z in the good range
        let norm = pairs.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(QsimError::ParamMismatch("good range is empty".into()));
        }
        for a in pairs.iter_mut() {
            *a /= norm;
        }
        let mut state = StateVector::from_amplitudes(field, self.pair_registers(), pairs)?;
        phase_query(&mut state, &self.params, c)?;
        // inverse of the fiber isometry
        let out: Vec<Complex64> = fibers
            .iter()
            .map(|members| {
                if members.is_empty() {
                    return Complex64::new(0.0, 0.0);
                }
                let s: Complex64 = members.iter().map(|&p| state.amplitudes()[p as usize]).sum();
                s / (members.len() as f64).sqrt()
            })
            .collect();
        StateVector::from_amplitudes(field, self.z_registers(), out)
    }

    pub fn run(&self, variant: Variant, c: &CoeffVector) -> Result<MeasurementResult, QsimError> {
        let target = self.check_c(c)?;
        let state = match variant {
            Variant::Optimal { scope, source, query } => {
                let reps = self.representatives(scope, source)?;
                self.optimal_state(c, &reps, query)?
            }
            Variant::Pgm => self.pgm_state(c)?,
            Variant::Superposed => self.superposed_state(c)?,
        };
        MeasurementResult::measure(state, target)
    }

    /// Runs one variant for many hidden polynomials in parallel.
    pub fn run_many(&self, variant: Variant, cs: &[CoeffVector]) -> Result<Vec<MeasurementResult>, QsimError> {
        cs.par_iter().map(|c| self.run(variant, c)).collect()
    }

    /// Numerical rank of the final states of the optimal algorithm over
    /// every hidden polynomial.
    pub fn span_rank(&self, scope: Scope) -> Result<RankReport, QsimError> {
        let cells = self.params.z_space_size();
        check_amplitudes("rank matrix", cells * cells, &self.budget)?;
        let reps = self.representatives(scope, RepresentativeSource::Census)?;
        let cells = cells as usize;
        let rows: Result<Vec<Vec<Complex64>>, QsimError> = (0..cells as u64)
            .into_par_iter()
            .map(|ci| {
                let c = CoeffVector::from_index(&self.params, ci);
                Ok(self.optimal_state(&c, &reps, QueryKind::Phase)?.into_amplitudes())
            })
            .collect();
        let rows = rows?;
        let m = DMatrix::from_fn(cells, cells, |i, j| rows[i][j]);
        let sv = m.singular_values();
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let rank = sv.iter().filter(|&&s| s > RANK_TOLERANCE * max).count();
        Ok(RankReport {
            rank,
            range_size: self.range_size(scope),
            states: cells as u64,
            max_singular_value: max,
        })
    }
}

/// Singular values below this fraction of the largest are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub range_size: u64,
    pub states: u64,
    pub max_singular_value: f64,
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

pub fn run_interpolation(
    params: &ProblemParams,
    c: &CoeffVector,
    scope: Scope,
    opts: &EnumOptions,
) -> Result<MeasurementResult, QsimError> {
    Simulator::new(params, opts)?.run(Variant::optimal(scope), c)
}

pub fn run_pgm(params: &ProblemParams, c: &CoeffVector, opts: &EnumOptions) -> Result<MeasurementResult, QsimError> {
    Simulator::new(params, opts)?.run(Variant::Pgm, c)
}

pub fn run_superposed_rep(
    params: &ProblemParams,
    c: &CoeffVector,
    opts: &EnumOptions,
) -> Result<MeasurementResult, QsimError> {
    Simulator::new(params, opts)?.run(Variant::Superposed, c)
}

pub fn span_rank(params: &ProblemParams, scope: Scope, opts: &EnumOptions) -> Result<RankReport, QsimError> {
    Simulator::new(params, opts)?.span_rank(scope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::zmap::enumerate_census;

    fn sim(p: u64, d: usize, k: usize) -> Simulator {
        let params = ProblemParams::new(Field::new(p, 1).unwrap(), d, k).unwrap();
        Simulator::new(&params, &EnumOptions::default()).unwrap()
    }

    #[test]
    fn smallest_case_both_scopes() {
        let s = sim(3, 1, 1);
        for ci in 0..9 {
            let c = CoeffVector::from_index(s.params(), ci);
            let all = s.run(Variant::optimal(Scope::All), &c).unwrap();
            let good = s.run(Variant::optimal(Scope::Good), &c).unwrap();
            assert!((all.success - 7.0 / 9.0).abs() < 1e-12);
            assert!((good.success - 6.0 / 9.0).abs() < 1e-12);
            assert!((all.total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn inverter_and_census_representatives_agree() {
        let s = sim(5, 3, 2);
        let inv = s.representatives(Scope::Good, RepresentativeSource::Inverter).unwrap();
        let cen = s.representatives(Scope::Good, RepresentativeSource::Census).unwrap();
        assert_eq!(inv.len(), 160);
        assert_eq!(cen.len(), 160);
        let c = CoeffVector::from_index(s.params(), 321);
        for source in [RepresentativeSource::Inverter, RepresentativeSource::Census] {
            let v = Variant::Optimal {
                scope: Scope::Good,
                source,
                query: QueryKind::Phase,
            };
            assert!((s.run(v, &c).unwrap().success - 0.256).abs() < 1e-12);
        }
    }

    #[test]
    fn standard_queries_give_same_success() {
        let s = sim(5, 1, 1);
        let c = CoeffVector::from_index(s.params(), 17);
        let v = Variant::Optimal {
            scope: Scope::Good,
            source: RepresentativeSource::Auto,
            query: QueryKind::Standard,
        };
        assert!((s.run(v, &c).unwrap().success - 20.0 / 25.0).abs() < 1e-9);
    }

    #[test]
    fn pgm_smallest_case() {
        let s = sim(3, 1, 1);
        let c = CoeffVector::from_index(s.params(), 4);
        let r = s.run(Variant::Pgm, &c).unwrap();
        let want = (3f64.sqrt() + 6.0).powi(2) / 81.0;
        assert!((r.success - want).abs() < 1e-12);
        assert!((r.total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn superposed_matches_good_range() {
        let s = sim(7, 2, 2);
        let census = enumerate_census(s.params(), &EnumOptions::default()).unwrap();
        let fibers = s.superposed_fibers().unwrap();
        for (members, &n) in fibers.iter().zip(&s.fiber_counts().good) {
            assert_eq!(members.len() as u32, n);
        }
        let c = CoeffVector::from_index(s.params(), 100);
        let r = s.run(Variant::Superposed, &c).unwrap();
        assert!((r.success - census.success_probability(Scope::Good).value).abs() < 1e-9);
    }

    #[test]
    fn superposed_needs_even_degree() {
        let s = sim(5, 3, 2);
        assert!(matches!(s.superposed_fibers(), Err(QsimError::ParamMismatch(_))));
    }

    #[test]
    fn rank_of_smallest_case() {
        let s = sim(3, 1, 1);
        let r = s.span_rank(Scope::All).unwrap();
        assert_eq!(r.range_size, 7);
        assert!(r.rank <= 7);
        let none = sim(3, 1, 0).span_rank(Scope::All).unwrap();
        assert_eq!(none.rank, 1);
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
    }
}
