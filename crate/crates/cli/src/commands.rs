//! Subcommand handlers.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use qinterp::field::{prime_power, prime_powers_in};
use qinterp::prony::{
    default_attempt_cap, invert_z, invert_z_extended, PronyError, RecurrenceCoeffs,
};
use qinterp::qsim::{QsimError, QueryKind, RepresentativeSource, Simulator, Variant};
use qinterp::zmap::{
    enumerate_census, multivariate_census, z_eval, CoeffVector, EnumOptions, MultivariateMode, PairXY,
    ProblemParams, RangeCensus, SampleMode, Scope, ZVector, ZmapError,
};
use qinterp::{Budget, Field, FieldElement, FieldError};

use crate::report::{to_csv, to_json, ConfigEcho, Record};
use crate::{
    Command, Common, FieldArgs, Format, InvertArgs, MultivariateArgs, MvMode, QueryArg, RankArgs,
    SampleArg, SimulateArgs, VariantArg,
};

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;
pub const EXIT_NOT_IN_RANGE: u8 = 4;
pub const EXIT_ATTEMPTS: u8 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        CliError::validation(e.to_string())
    }
}

impl From<ZmapError> for CliError {
    fn from(e: ZmapError) -> Self {
        let code = match e {
            ZmapError::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_VALIDATION,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<PronyError> for CliError {
    fn from(e: PronyError) -> Self {
        match e {
            PronyError::Zmap(z) => z.into(),
            PronyError::Field(f) => f.into(),
            e => {
                let code = if e.is_not_in_range() {
                    EXIT_NOT_IN_RANGE
                } else if matches!(e, PronyError::AttemptsExhausted { .. }) {
                    EXIT_ATTEMPTS
                } else {
                    EXIT_VALIDATION
                };
                CliError {
                    code,
                    message: format!("{}: {e}", e.kind()),
                }
            }
        }
    }
}

impl From<QsimError> for CliError {
    fn from(e: QsimError) -> Self {
        match e {
            QsimError::Zmap(z) => z.into(),
            QsimError::Prony(p) => p.into(),
            QsimError::BudgetExceeded { .. } => CliError {
                code: EXIT_BUDGET,
                message: e.to_string(),
            },
            e => CliError::validation(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

pub fn dispatch(command: Command) -> CliResult<()> {
    let (common, records) = match command {
        Command::Census(a) => {
            let r = census(&a.common, a.k)?;
            (a.common, r)
        }
        Command::Invert(a) => {
            let r = invert(&a)?;
            (a.common, r)
        }
        Command::Simulate(a) => {
            let r = simulate(&a)?;
            (a.common, r)
        }
        Command::Rank(a) => {
            let r = rank(&a)?;
            (a.common, r)
        }
        Command::Multivariate(a) => {
            let r = multivariate(&a)?;
            (a.common, r)
        }
    };
    emit(&common, &records)
}

fn emit(common: &Common, records: &[Record]) -> CliResult<()> {
    let text = match common.format {
        Format::Json => to_json(records),
        Format::Csv => to_csv(records),
    };
    match &common.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError {
            code: EXIT_FAILURE,
            message: format!("cannot write {}: {e}", path.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// The fields named by `-p/-r` or `-q`, expanding `lo..hi` sweeps.
pub fn resolve_fields(args: &FieldArgs) -> CliResult<Vec<Field>> {
    if let Some(p) = args.p {
        return Ok(vec![Field::new(p, args.r)?]);
    }
    let Some(spec) = args.q.as_deref() else {
        return Err(CliError::validation("give the field as -p P [-r R] or -q Q"));
    };
    let parse = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|_| CliError::validation(format!("bad field order {s:?}")))
    };
    match spec.split_once("..") {
        Some((lo, hi)) => {
            let (lo, hi) = (parse(lo)?, parse(hi)?);
            if lo > hi {
                return Err(CliError::validation(format!("empty sweep {spec}")));
            }
            let keep = prime_powers_in(lo, hi);
            let skipped: Vec<String> = (lo.max(2)..=hi)
                .filter(|q| prime_power(*q).is_none())
                .map(|q| q.to_string())
                .collect();
            if !skipped.is_empty() {
                eprintln!("note: skipping non-prime-powers {}", skipped.join(","));
            }
            if keep.is_empty() {
                return Err(CliError::validation(format!("no prime powers in {spec}")));
            }
            keep.into_iter().map(|q| Field::with_order(q).map_err(CliError::from)).collect()
        }
        None => Ok(vec![Field::with_order(parse(spec)?)?]),
    }
}

fn single_field(args: &FieldArgs) -> CliResult<Field> {
    let mut fields = resolve_fields(args)?;
    if fields.len() != 1 {
        return Err(CliError::validation("this command takes a single field, not a sweep"));
    }
    Ok(fields.remove(0))
}

fn options(common: &Common) -> EnumOptions {
    EnumOptions {
        workers: common.workers,
        budget: Budget::from_env(),
    }
}

fn echo(params: &ProblemParams, common: &Common) -> ConfigEcho {
    let f = params.field();
    ConfigEcho {
        p: f.characteristic(),
        r: f.degree(),
        q: params.q(),
        n: params.n(),
        d: params.d(),
        k: params.k(),
        scope: None,
        variant: None,
        workers: common.workers,
    }
}

fn census_record(params: &ProblemParams, common: &Common) -> CliResult<Record> {
    let start = Instant::now();
    let census = enumerate_census(params, &options(common))?;
    let mut rec = Record::new("census", echo(params, common), common.seed);
    fill_census_metrics(&mut rec, &census);
    let mut details = serde_json::to_value(&census).expect("census serializes");
    if let Some(obj) = details.as_object_mut() {
        obj.remove("wall_time_secs");
    }
    rec.details = Some(details);
    rec.duration_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(rec)
}

fn fill_census_metrics(rec: &mut Record, census: &RangeCensus) {
    rec.integer("z_space", census.z_space);
    for scope in [Scope::All, Scope::Good] {
        let s = census.stats(scope);
        rec.integer(&format!("range_{scope}"), s.range_size as u128);
        rec.probability(&format!("success_{scope}"), &census.success_probability(scope));
        rec.integer(&format!("pairs_{scope}"), s.pairs);
        rec.exact(&format!("mean_{scope}"), &s.mean);
        rec.exact(&format!("variance_{scope}"), &s.variance);
    }
    rec.float("pgm_success", census.pgm_success());
}

fn census(common: &Common, k: usize) -> CliResult<Vec<Record>> {
    resolve_fields(&common.field)?
        .into_iter()
        .map(|f| census_record(&ProblemParams::new(f, common.d, k)?, common))
        .collect()
}

fn to_elements(field: &Field, idx: &[u64]) -> CliResult<Vec<FieldElement>> {
    idx.iter().map(|&i| field.element(i).map_err(CliError::from)).collect()
}

fn push_pair(rec: &mut Record, pair: &PairXY) {
    for (i, v) in pair.x.iter().enumerate() {
        rec.integer(&format!("x_{i}"), v.index() as u128);
    }
    for (i, v) in pair.y.iter().enumerate() {
        rec.integer(&format!("y_{i}"), v.index() as u128);
    }
}

fn invert(a: &InvertArgs) -> CliResult<Vec<Record>> {
    let common = &a.common;
    let field = single_field(&common.field)?;
    let d = common.d;
    let k = a.k.unwrap_or(if d % 2 == 1 { d.div_ceil(2) } else { d / 2 + 1 });
    let params = ProblemParams::new(field.clone(), d, k)?;
    let start = Instant::now();
    let mut rec = Record::new("invert", echo(&params, common), common.seed);
    if a.verify_all {
        if d.is_multiple_of(2) || k != d.div_ceil(2) {
            return Err(CliError::validation("--verify-all needs odd d and k = (d+1)/2"));
        }
        let q = params.q();
        let mut good = 0u128;
        let mut fibers = BTreeSet::new();
        let mut mismatches = 0u128;
        for idx in 0..params.pair_space_size() as u64 {
            let pair = PairXY::from_index(&params, idx);
            if !pair.is_good(1) {
                continue;
            }
            good += 1;
            let z = z_eval(&params, &pair)?;
            let ok = match invert_z(&params, &z) {
                Ok(c) => {
                    c.pair == pair.sorted()
                        && qinterp::prony::char_poly_from_z(&field, &z.0, k)?
                            == RecurrenceCoeffs::from_roots(&field, &c.pair.x)
                }
                Err(_) => false,
            };
            if ok {
                fibers.insert(z.index(q));
            } else {
                mismatches += 1;
            }
        }
        rec.integer("good_pairs", good);
        rec.integer("fibers_verified", fibers.len() as u128);
        rec.integer("mismatches", mismatches);
        rec.details = Some(json!({
            "summary": if mismatches == 0 { "all fibers verified" } else { "round trip failed" }
        }));
        rec.duration_ms = start.elapsed().as_secs_f64() * 1e3;
        if mismatches > 0 {
            emit(common, &[rec])?;
            return Err(CliError {
                code: EXIT_FAILURE,
                message: format!("{mismatches} good pairs failed the round trip"),
            });
        }
        return Ok(vec![rec]);
    }
    let z_idx = a.z.as_ref().ok_or_else(|| CliError::validation("--z is required"))?;
    let z = ZVector(to_elements(&field, z_idx)?);
    if d % 2 == 1 {
        let c = invert_z(&params, &z)?;
        push_pair(&mut rec, &c.pair);
        rec.details = Some(json!({ "x": c.pair.x, "y": c.pair.y }));
    } else {
        let cap = a.attempt_cap.unwrap_or_else(|| default_attempt_cap(k));
        let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
        let inv = invert_z_extended(&params, &z, &mut rng, cap)?;
        let c = &inv.canonical;
        push_pair(&mut rec, &c.pair);
        let ext = c.extension.expect("extended inversion records its extra entry");
        rec.integer("extension", ext.index() as u128);
        rec.integer("attempts", inv.attempts as u128);
        rec.details = Some(json!({
            "x": c.pair.x,
            "y": c.pair.y,
            "extension": ext,
            "attempts": inv.attempts,
        }));
    }
    rec.duration_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(vec![rec])
}

fn coefficient_vectors(params: &ProblemParams, a: &SimulateArgs, rng: &mut ChaCha8Rng) -> CliResult<Vec<CoeffVector>> {
    if a.all_c {
        return Ok((0..params.z_space_size() as u64)
            .map(|i| CoeffVector::from_index(params, i))
            .collect());
    }
    match &a.c {
        Some(idx) => {
            if idx.len() != params.num_coeffs() {
                return Err(CliError::validation(format!(
                    "--c needs {} entries, got {}",
                    params.num_coeffs(),
                    idx.len()
                )));
            }
            Ok(vec![CoeffVector(to_elements(params.field(), idx)?)])
        }
        None => {
            let q = params.q() as u32;
            Ok(vec![CoeffVector(
                (0..params.num_coeffs())
                    .map(|_| FieldElement::from_index(rng.gen_range(0..q)))
                    .collect(),
            )])
        }
    }
}

/// Mean, min and max success over the runs.
fn summarize(successes: &[f64]) -> (f64, f64, f64) {
    let min = successes.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = successes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (successes.iter().sum::<f64>() / successes.len() as f64, min, max)
}

fn simulate(a: &SimulateArgs) -> CliResult<Vec<Record>> {
    let common = &a.common;
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let mut records = Vec::new();
    for field in resolve_fields(&common.field)? {
        let params = ProblemParams::new(field, common.d, a.k)?;
        let start = Instant::now();
        let sim = Simulator::new(&params, &options(common))?;
        let census = RangeCensus::from_counts(&params, sim.fiber_counts());
        let cs = coefficient_vectors(&params, a, &mut rng)?;
        let mut cfg = echo(&params, common);
        let mut rec;
        let query = match a.query {
            QueryArg::Phase => QueryKind::Phase,
            QueryArg::Standard => QueryKind::Standard,
        };
        match a.variant {
            VariantArg::Optimal => {
                cfg.variant = Some("optimal".into());
                rec = Record::new("simulate", cfg, common.seed);
                for scope in [Scope::Good, Scope::All] {
                    let v = Variant::Optimal {
                        scope,
                        source: RepresentativeSource::Auto,
                        query,
                    };
                    let runs = sim.run_many(v, &cs)?;
                    let s: Vec<f64> = runs.iter().map(|m| m.success).collect();
                    let expected = census.success_probability(scope);
                    push_runs(&mut rec, &format!("_{scope}"), &s, expected.value);
                    rec.probability(&format!("expected_{scope}"), &expected);
                }
            }
            VariantArg::Pgm => {
                cfg.variant = Some("pgm".into());
                rec = Record::new("simulate", cfg, common.seed);
                let runs = sim.run_many(Variant::Pgm, &cs)?;
                let s: Vec<f64> = runs.iter().map(|m| m.success).collect();
                push_runs(&mut rec, "", &s, census.pgm_success());
                rec.float("formula", census.pgm_success());
                rec.probability("optimum", &census.success_probability(Scope::All));
            }
            VariantArg::Superposed => {
                cfg.variant = Some("superposed".into());
                rec = Record::new("simulate", cfg, common.seed);
                let runs = sim.run_many(Variant::Superposed, &cs)?;
                let s: Vec<f64> = runs.iter().map(|m| m.success).collect();
                let expected = census.success_probability(Scope::Good);
                push_runs(&mut rec, "", &s, expected.value);
                rec.probability("expected_good", &expected);
            }
        }
        rec.details = Some(json!({ "c": cs.iter().map(|c| c.index(params.q())).collect::<Vec<_>>() }));
        if a.all_c {
            rec.details = Some(json!({ "c": "all" }));
        }
        rec.duration_ms = start.elapsed().as_secs_f64() * 1e3;
        records.push(rec);
    }
    Ok(records)
}

fn push_runs(rec: &mut Record, suffix: &str, successes: &[f64], expected: f64) {
    let (mean, min, max) = summarize(successes);
    rec.float(&format!("success{suffix}"), mean);
    rec.float(&format!("spread{suffix}"), max - min);
    let err = successes.iter().map(|s| (s - expected).abs()).fold(0.0, f64::max);
    rec.float(&format!("max_error{suffix}"), err);
    rec.integer(&format!("runs{suffix}"), successes.len() as u128);
}

fn rank(a: &RankArgs) -> CliResult<Vec<Record>> {
    let common = &a.common;
    let scope: Scope = a.scope.into();
    let mut records = Vec::new();
    for field in resolve_fields(&common.field)? {
        let params = ProblemParams::new(field, common.d, a.k)?;
        let start = Instant::now();
        let report = Simulator::new(&params, &options(common))?.span_rank(scope)?;
        let mut cfg = echo(&params, common);
        cfg.scope = Some(scope.to_string());
        let mut rec = Record::new("rank", cfg, common.seed);
        rec.integer("rank", report.rank as u128);
        rec.integer("range_size", report.range_size as u128);
        rec.integer("states", report.states as u128);
        rec.flag("bound_holds", report.rank as u64 <= report.range_size);
        rec.duration_ms = start.elapsed().as_secs_f64() * 1e3;
        records.push(rec);
    }
    Ok(records)
}

fn multivariate(a: &MultivariateArgs) -> CliResult<Vec<Record>> {
    let common = &a.common;
    if a.n == 1 && a.mode == MvMode::Exact {
        return census(common, a.k);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let mode = match a.mode {
        MvMode::Exact => MultivariateMode::Exact,
        MvMode::Sample => MultivariateMode::Sample {
            samples: a.samples,
            mode: match a.sampler {
                SampleArg::Auto => None,
                SampleArg::Membership => Some(SampleMode::Membership),
                SampleArg::Distinct => Some(SampleMode::DistinctImages),
            },
        },
    };
    let mut records = Vec::new();
    for field in resolve_fields(&common.field)? {
        let params = ProblemParams::multivariate(field, a.n, common.d, a.k)?;
        let start = Instant::now();
        let report = multivariate_census(&params, mode, &mut rng, &options(common))?;
        let mut cfg = echo(&params, common);
        cfg.variant = Some(report.mode.clone());
        let mut rec = Record::new("multivariate", cfg, common.seed);
        rec.integer("num_coeffs", report.num_coeffs as u128);
        rec.integer("z_space", report.z_space);
        if let Some(size) = report.range_size {
            rec.integer("range_size", size as u128);
        }
        match &report.exact_fraction {
            Some(p) => rec.probability("fraction", p),
            None => rec.float("fraction", report.fraction),
        }
        rec.float("std_error", report.std_error);
        rec.float("ci_low", report.ci_low);
        rec.float("ci_high", report.ci_high);
        rec.flag("lower_bound", report.lower_bound);
        rec.flag("above_threshold", report.above_threshold);
        rec.integer("samples", report.samples as u128);
        rec.integer("hits", report.hits as u128);
        let mut details = serde_json::to_value(&report).expect("report serializes");
        if let Some(obj) = details.as_object_mut() {
            obj.insert("exploratory".into(), json!(true));
        }
        rec.details = Some(details);
        rec.duration_ms = start.elapsed().as_secs_f64() * 1e3;
        records.push(rec);
    }
    Ok(records)
}
