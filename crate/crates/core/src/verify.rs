//! The invariant suite behind `tce verify`: a fixed list of seeded checks
//! over every module, reported as JUnit-style JSON. Reports contain no
//! timings, so equal configurations give byte-identical output.

use std::cmp::Ordering;

use rand::Rng;
use rayon::prelude::*;
use rug::{Float, Integer};
use serde::Serialize;

use crate::atoms::{golden_xy, locate_golden, smn_region, smn_scaling_check, Location, Membership};
use crate::baseline::baseline_state;
use crate::cf::{best_approximation_check, delta_sign, scaled_delta_identity_check, ContinuedFraction, SemiIndex};
use crate::error::{Error, Result};
use crate::field::ZLambda;
use crate::io::{RunConfig, Suite};
use crate::renorm::{
    domain_scaling_check, find_periodic_in_atom, periodic_cascade, renorm_tower, renormalize, tolerance,
    verify_conjugacy,
};
use crate::return_map::{closed_return_time, first_return_iter, m0n0, return_map_closed, sample_atom_preimage};
use crate::sample::{rng_stream, uniform_in};
use crate::tce::{golden_params, Point, Region, TceParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Passed,
    Failed,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestCase {
    pub classname: String,
    pub name: String,
    pub status: Status,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub name: String,
    pub suite: Suite,
    pub seed: u64,
    pub precision_bits: u32,
    pub tests: usize,
    pub failures: usize,
    pub errors: usize,
    pub testcases: Vec<TestCase>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.errors == 0
    }
}

/// Shared knobs for every check.
#[derive(Debug, Clone)]
pub struct Ctx {
    pub prec: u32,
    pub seed: u64,
    pub scale: f64,
    pub config: Option<TceParams>,
}

impl Ctx {
    fn count(&self, base: u64) -> u64 {
        ((base as f64 * self.scale).ceil() as u64).max(1)
    }
}

/// `Ok(None)` passes, `Ok(Some(reason))` fails.
type Outcome = Result<Option<String>>;
type Check = fn(&Ctx) -> Outcome;

fn fail_if(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    Ok(if cond { Some(msg()) } else { None })
}

fn fib(n: usize) -> Integer {
    let (mut a, mut b) = (Integer::from(0), Integer::from(1));
    for _ in 0..n {
        let c = Integer::from(&a + &b);
        a = b;
        b = c;
    }
    a
}

/// The continued fractions of the test grid.
pub fn grid_lambdas() -> Vec<ContinuedFraction> {
    vec![
        ContinuedFraction::golden(),
        ContinuedFraction::sqrt2_minus_1(),
        ContinuedFraction::periodic(vec![], vec![1, 2]).expect("valid expansion"),
    ]
}

pub const GRID_PQ: [(u64, u64); 3] = [(1, 1), (1, 2), (2, 3)];

/// `(λ, p, q)` over the grid, keeping only `−λ < p − qλ < 1`.
pub fn grid_params(prec: u32) -> Vec<TceParams> {
    let base = golden_params(prec);
    let mut out = Vec::new();
    for cf in grid_lambdas() {
        for (p, q) in GRID_PQ {
            if let Ok(k) = base.with_translation(cf.clone(), p, q) {
                out.push(k);
            }
        }
    }
    out
}

fn label(k: &TceParams) -> String {
    format!("λ={} p={} q={}", k.cf(), k.p(), k.q())
}

/// Atoms strictly above the threshold with `w <= max_w`.
pub fn atoms_above_threshold(k: &TceParams, max_w: u64) -> Result<Vec<SemiIndex>> {
    let cf = k.cf();
    let start = cf.successor(m0n0(k)?)?;
    let mut out = Vec::new();
    for idx in cf.indices_from(start) {
        let idx = idx?;
        if cf.w_index(idx)? > max_w {
            break;
        }
        out.push(idx);
    }
    Ok(out)
}

/// Closed form against iteration on `samples` preimages of one atom.
/// Returns the worst deviation, or a description of the first mismatch.
pub fn compare_on_atom(
    k: &TceParams,
    idx: SemiIndex,
    samples: u64,
    seed: u64,
) -> Result<std::result::Result<Float, String>> {
    let mut worst = Float::with_val(k.prec(), 0);
    for i in 0..samples {
        let stream = (idx.m as u64) << 40 ^ idx.n << 20 ^ i;
        let mut rng = rng_stream(seed, stream);
        let (z, _) = sample_atom_preimage(k, idx, &mut rng, 0.02)?;
        let closed = return_map_closed(k, &z)?;
        let iter = first_return_iter(k, &z)?;
        if closed.h != iter.h {
            return Ok(Err(format!(
                "S{idx} sample {i}: h_closed={} h_iter={}",
                closed.h, iter.h
            )));
        }
        let d = closed.point.dist(&iter.point);
        if d > worst {
            worst = d;
        }
    }
    Ok(Ok(worst))
}

fn golden_delta_fibonacci(_: &Ctx) -> Outcome {
    let cf = ContinuedFraction::golden();
    for m in 0..=40usize {
        let d = cf.delta(SemiIndex::new(m, 0))?;
        let expected = ZLambda::from_integers(&cf, -fib(m), fib(m + 1));
        if d != expected {
            return fail_if(true, || format!("Δ_{m}(Φ) = {d}, expected {expected}"));
        }
    }
    Ok(None)
}

fn golden_closed_times(ctx: &Ctx) -> Outcome {
    let k = golden_params(ctx.prec);
    for m in 0..=20usize {
        let h = closed_return_time(&k, SemiIndex::new(m, 0))?;
        let expected = fib(m + 2) - 1u32;
        if h != expected {
            return fail_if(true, || format!("h_{m} = {h}, expected {expected}"));
        }
    }
    Ok(None)
}

fn golden_iterated_times(ctx: &Ctx) -> Outcome {
    let k = golden_params(ctx.prec);
    let samples = ctx.count(5);
    let bad: Vec<String> = (0..=10usize)
        .into_par_iter()
        .map(|m| -> Result<Option<String>> {
            let expected = fib(m + 3) - 1u32;
            for i in 0..samples {
                let mut rng = rng_stream(ctx.seed, (m as u64) << 32 | i);
                let (z, _) = sample_atom_preimage(&k, SemiIndex::new(m, 0), &mut rng, 0.02)?;
                let h = first_return_iter(&k, &z)?.h;
                if h != expected {
                    return Ok(Some(format!("S_{m} sample {i}: h = {h}, expected {expected}")));
                }
            }
            Ok(None)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    fail_if(!bad.is_empty(), || bad.join("; "))
}

/// `F^{h_{m,n}}(0) = Δ_{m,n}` for every atom above the threshold with `w <= max_w`.
pub fn orbit_hits_delta_check(k: &TceParams, max_w: u64) -> Outcome {
    for idx in atoms_above_threshold(k, max_w)? {
        let h = closed_return_time(k, idx)?;
        let t = h
            .to_u64()
            .filter(|&t| t > 0)
            .ok_or_else(|| Error::NotInDomain(format!("h{idx} = {h}")))?;
        let value = baseline_state(k, t)?.value;
        let delta = k.cf().delta(idx)?;
        if value != delta {
            return fail_if(true, || {
                format!("{}: F^{t}(0) = {value} but Δ{idx} = {delta}", label(k))
            });
        }
    }
    Ok(None)
}

fn golden_orbit_hits_delta(ctx: &Ctx) -> Outcome {
    orbit_hits_delta_check(&golden_params(ctx.prec), 18)
}

fn grid_orbit_hits_delta(ctx: &Ctx) -> Outcome {
    for k in grid_params(ctx.prec) {
        if let Some(msg) = orbit_hits_delta_check(&k, 12)? {
            return Ok(Some(msg));
        }
    }
    Ok(None)
}

/// How many sets of the golden cover `{X, Y, S_2, S_3, ...}` contain `w`,
/// or `None` if `w` is within guard of one of their edges. Atoms beyond
/// `S_{k+1}` cannot contain a point located in `S_k`, so the count stops there.
pub fn golden_cover_count(k: &TceParams, z: &Point) -> Result<Option<usize>> {
    let location = match locate_golden(k, z) {
        Ok(l) => l,
        Err(Error::BoundaryAmbiguous(_) | Error::PrecisionAmbiguous(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let w = k.exchange(z)?;
    let geometry = k.geometry();
    let (x, y) = golden_xy(k)?;
    let last = match location {
        Location::Atom(idx) => idx.m + 1,
        _ => 3,
    };
    let mut memberships = vec![x.contains(geometry, &w), y.contains(geometry, &w)];
    for m in 2..=last {
        memberships.push(smn_region(k, SemiIndex::new(m, 0))?.contains(geometry, &w));
    }
    if memberships.contains(&Membership::Ambiguous) {
        return Ok(None);
    }
    Ok(Some(memberships.iter().filter(|&&m| m == Membership::Inside).count()))
}

/// Coverage statistics over `samples` seeded points of `C_c ∩ [−1, Φ] × (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coverage {
    pub samples: u64,
    pub unique: u64,
    pub ambiguous: u64,
    pub bad: u64,
}

pub fn golden_coverage(k: &TceParams, samples: u64, seed: u64) -> Result<Coverage> {
    let prec = k.prec();
    let lo_re = Float::with_val(prec, -1);
    let hi_re = k.map().lambda().clone();
    let lo_im = Float::with_val(prec, 0);
    let hi_im = Float::with_val(prec, 1);
    let counts = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<Option<usize>> {
            let mut rng = rng_stream(seed, i);
            loop {
                let re = uniform_in(&mut rng, &lo_re, &hi_re, prec);
                // (0, 1]
                let im = Float::with_val(prec, &hi_im - uniform_in(&mut rng, &lo_im, &hi_im, prec));
                let z = Point::new(re, im);
                if k.map().region(&z)? == Region::Middle {
                    return golden_cover_count(k, &z);
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut c = Coverage {
        samples,
        unique: 0,
        ambiguous: 0,
        bad: 0,
    };
    for n in counts {
        match n {
            None => c.ambiguous += 1,
            Some(1) => c.unique += 1,
            Some(_) => c.bad += 1,
        }
    }
    Ok(c)
}

fn golden_partition_coverage(ctx: &Ctx) -> Outcome {
    let c = golden_coverage(&golden_params(ctx.prec), ctx.count(2000), ctx.seed)?;
    fail_if(c.bad > 0 || c.ambiguous * 200 >= c.samples, || format!("{c:?}"))
}

fn golden_fixed_point(ctx: &Ctx) -> Outcome {
    let k = golden_params(ctx.prec);
    let tower = renorm_tower(&k, 3)?;
    for step in &tower.steps {
        let same = step.kappa_out.cf() == k.cf() && (step.kappa_out.p(), step.kappa_out.q()) == (1, 1);
        let phi2 = ZLambda::from_integers(k.cf(), 1, -1);
        if !same || step.scale != phi2 {
            return fail_if(true, || format!("step {:?} is not (Φ, Φ², Φ²)", step.summary()));
        }
    }
    Ok(None)
}

fn golden_self_similarity(ctx: &Ctx) -> Outcome {
    let step = renormalize(&golden_params(ctx.prec))?;
    let report = verify_conjugacy(&step, ctx.count(20), ctx.seed)?;
    fail_if(!report.pass, || format!("{report:?}"))
}

fn golden_cascade(ctx: &Ctx) -> Outcome {
    let k = golden_params(ctx.prec);
    let seed = find_periodic_in_atom(&k, SemiIndex::new(0, 0), ctx.seed, 100, 50)?;
    let cascade = periodic_cascade(&k, &seed.point, 0, 4)?;
    for e in &cascade {
        let expected = fib(e.atom.m + 3) - 1u32;
        if e.h != expected || crate::atoms::locate(&k, &e.point)? != Location::Atom(e.atom) {
            return fail_if(true, || format!("cascade member {} misplaced: {:?}", e.n, e));
        }
    }
    Ok(None)
}

/// `F_κ(az)/a = F_{κ/a}(z)` for random `z` in `[−2, 2] × [0, 2]`.
pub fn scaling_conjugacy_check(k: &TceParams, samples: u64, seed: u64) -> Result<Float> {
    let prec = k.prec();
    let mut worst = Float::with_val(prec, 0);
    let lo = Float::with_val(prec, -2);
    let hi = Float::with_val(prec, 2);
    let zero = Float::with_val(prec, 0);
    for a in [0.5, 2.0, 3.0] {
        let a = Float::with_val(prec, a);
        let small = k.scale_conjugate(&a);
        let mut rng = rng_stream(seed, a.to_f64().to_bits());
        for _ in 0..samples {
            let z = Point::new(
                uniform_in(&mut rng, &lo, &hi, prec),
                uniform_in(&mut rng, &zero, &hi, prec),
            );
            let lhs = k.step(&z.scale(&a))?.scale(&Float::with_val(prec, 1 / &a));
            let rhs = small.step(&z)?;
            let d = lhs.dist(&rhs);
            if d > worst {
                worst = d;
            }
        }
    }
    Ok(worst)
}

fn golden_scaling_conjugacy(ctx: &Ctx) -> Outcome {
    let d = scaling_conjugacy_check(&golden_params(ctx.prec), ctx.count(50), ctx.seed)?;
    fail_if(d > tolerance(ctx.prec), || format!("max deviation {}", d.to_f64()))
}

fn best_approximation(_: &Ctx) -> Outcome {
    let mut lambdas = grid_lambdas();
    lambdas.push(ContinuedFraction::periodic(vec![3, 1, 4], vec![1, 5, 9, 2]).expect("valid"));
    for cf in lambdas {
        for m in 0..=6usize {
            for n in 0..cf.quotient(m + 1)? {
                if let Some((r, s)) = best_approximation_check(&cf, SemiIndex::new(m, n))? {
                    return fail_if(true, || format!("{cf} ({m},{n}) beaten by {r}/{s}"));
                }
            }
        }
    }
    Ok(None)
}

fn delta_signs(_: &Ctx) -> Outcome {
    for cf in grid_lambdas() {
        for idx in cf.indices_from(SemiIndex::new(0, 0)).take(60) {
            let idx = idx?;
            let s = cf.delta(idx)?.sign()?;
            if s != delta_sign(idx) {
                return fail_if(true, || format!("{cf}: sign Δ{idx} = {s:?}"));
            }
        }
    }
    Ok(None)
}

fn delta_scaling(ctx: &Ctx) -> Outcome {
    for cf in grid_lambdas() {
        for m in 1..=4 {
            for j in 0..=4 {
                for n in 0..cf.quotient(m + j + 1)? {
                    let r = scaled_delta_identity_check(&cf, m, j, n, ctx.prec)?;
                    if !r.holds {
                        return fail_if(true, || format!("{cf} m={m} j={j} n={n}: {}", r.deviation.to_f64()));
                    }
                }
            }
        }
    }
    Ok(None)
}

fn sign_vs_float(ctx: &Ctx) -> Outcome {
    let cf = ContinuedFraction::sqrt2_minus_1();
    let lambda = cf.lambda_float(512)?;
    let mut rng = rng_stream(ctx.seed, 7);
    for _ in 0..ctx.count(200) {
        let a: i64 = rng.gen_range(-1_000_000..=1_000_000);
        let b: i64 = rng.gen_range(-1_000_000..=1_000_000);
        let exact = ZLambda::from_integers(&cf, a, b).sign()?;
        let approx = Float::with_val(512, &lambda * b) + a;
        let float_sign = approx.partial_cmp(&0).unwrap_or(Ordering::Equal);
        if exact != float_sign {
            return fail_if(true, || {
                format!("sign({a} + {b}λ): exact {exact:?}, float {float_sign:?}")
            });
        }
    }
    Ok(None)
}

fn oracle_equivalence(ctx: &Ctx) -> Outcome {
    let tol = tolerance(ctx.prec);
    let samples = ctx.count(3);
    let bad: Vec<String> = grid_params(ctx.prec)
        .par_iter()
        .map(|k| -> Result<Option<String>> {
            for idx in atoms_above_threshold(k, 6)? {
                match compare_on_atom(k, idx, samples, ctx.seed)? {
                    Err(msg) => return Ok(Some(format!("{}: {msg}", label(k)))),
                    Ok(d) if d > tol => return Ok(Some(format!("{}: S{idx} deviation {}", label(k), d.to_f64()))),
                    Ok(_) => {}
                }
            }
            Ok(None)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    fail_if(!bad.is_empty(), || bad.join("; "))
}

fn threshold_atom(ctx: &Ctx) -> Outcome {
    let tol = tolerance(ctx.prec);
    for k in grid_params(ctx.prec) {
        let idx = m0n0(&k)?;
        match compare_on_atom(&k, idx, ctx.count(5), ctx.seed)? {
            Err(msg) => return Ok(Some(format!("{}: {msg}", label(&k)))),
            Ok(d) if d > tol => return Ok(Some(format!("{}: deviation {}", label(&k), d.to_f64()))),
            Ok(_) => {}
        }
    }
    Ok(None)
}

fn atom_scaling(ctx: &Ctx) -> Outcome {
    let base = golden_params(ctx.prec);
    for cf in grid_lambdas().into_iter().skip(1) {
        let k = base.with_translation(cf.clone(), 1, 1)?;
        for m in [2usize, 4] {
            let shifted = cf.gauss_shift(m)?;
            for idx in shifted.indices_from(SemiIndex::new(0, 0)) {
                let idx = idx?;
                if shifted.w_index(idx)? > 6 {
                    break;
                }
                let (ok, dev) = smn_scaling_check(&k, m, idx.m, idx.n)?;
                if !ok {
                    return fail_if(true, || format!("{cf} m={m} S{idx}: {}", dev.to_f64()));
                }
            }
        }
    }
    Ok(None)
}

fn conjugacy_grid(ctx: &Ctx) -> Outcome {
    let samples = ctx.count(10);
    let bad: Vec<String> = grid_params(ctx.prec)
        .par_iter()
        .map(|k| -> Result<Option<String>> {
            let step = renormalize(k)?;
            let report = verify_conjugacy(&step, samples, ctx.seed)?;
            let (dom_ok, dev) = domain_scaling_check(&step)?;
            Ok(if !report.pass {
                Some(format!("{}: {report:?}", label(k)))
            } else if !dom_ok {
                Some(format!("{}: domain deviation {}", label(k), dev.to_f64()))
            } else {
                None
            })
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    fail_if(!bad.is_empty(), || bad.join("; "))
}

fn tower_periodicity(ctx: &Ctx) -> Outcome {
    // tail of length 4 repeats every 2 steps
    let cf = ContinuedFraction::periodic(vec![], vec![1, 2, 3, 4]).expect("valid");
    let k = golden_params(ctx.prec).with_translation(cf, 1, 1)?;
    let tower = renorm_tower(&k, 6)?;
    let key = |i: usize| {
        let s = &tower.steps[i].kappa_out;
        (s.cf().clone(), s.p(), s.q())
    };
    for i in 2..6 {
        if key(i) != key(i - 2) {
            return fail_if(true, || format!("step {i} differs from step {}", i - 2));
        }
    }
    fail_if(key(0) == key(1), || "period-4 tail gave a constant tower".into())
}

fn config_conjugacy(ctx: &Ctx) -> Outcome {
    let Some(k) = &ctx.config else { return Ok(None) };
    let step = renormalize(k)?;
    let report = verify_conjugacy(&step, ctx.count(10), ctx.seed)?;
    fail_if(!report.pass, || format!("{report:?}"))
}

fn config_scaling_conjugacy(ctx: &Ctx) -> Outcome {
    let Some(k) = &ctx.config else { return Ok(None) };
    let d = scaling_conjugacy_check(k, ctx.count(20), ctx.seed)?;
    fail_if(d > tolerance(ctx.prec), || format!("max deviation {}", d.to_f64()))
}

const GOLDEN_CHECKS: &[(&str, &str, Check)] = &[
    ("cf", "golden_delta_fibonacci", golden_delta_fibonacci),
    ("return_map", "golden_closed_return_times", golden_closed_times),
    ("return_map", "golden_iterated_return_times", golden_iterated_times),
    ("baseline", "golden_orbit_hits_delta", golden_orbit_hits_delta),
    ("atoms", "golden_partition_coverage", golden_partition_coverage),
    ("renorm", "golden_fixed_point", golden_fixed_point),
    ("renorm", "golden_self_similarity", golden_self_similarity),
    ("renorm", "golden_periodic_cascade", golden_cascade),
    ("tce", "golden_scaling_conjugacy", golden_scaling_conjugacy),
];

const FULL_CHECKS: &[(&str, &str, Check)] = &[
    ("cf", "best_approximation", best_approximation),
    ("cf", "delta_signs", delta_signs),
    ("cf", "delta_scaling", delta_scaling),
    ("field", "sign_vs_float", sign_vs_float),
    ("baseline", "grid_orbit_hits_delta", grid_orbit_hits_delta),
    ("return_map", "grid_oracle_equivalence", oracle_equivalence),
    ("return_map", "grid_threshold_atom", threshold_atom),
    ("atoms", "atom_scaling", atom_scaling),
    ("renorm", "grid_conjugacy", conjugacy_grid),
    ("renorm", "tower_periodicity", tower_periodicity),
    ("renorm", "config_conjugacy", config_conjugacy),
    ("tce", "config_scaling_conjugacy", config_scaling_conjugacy),
];

/// Runs the configured suite. Checks run in parallel; the report keeps the
/// fixed check order.
pub fn run_suite(cfg: &RunConfig) -> VerifyReport {
    let suite = cfg.verify.suite;
    let ctx = Ctx {
        prec: cfg.precision_bits,
        seed: cfg.seed,
        scale: cfg.verify.scale,
        config: cfg.params().ok(),
    };
    let mut checks: Vec<&(&str, &str, Check)> = GOLDEN_CHECKS.iter().collect();
    if suite == Suite::Full {
        checks.extend(FULL_CHECKS.iter());
    }
    let testcases: Vec<TestCase> = checks
        .par_iter()
        .map(|(class, name, check)| {
            let (status, message) = match check(&ctx) {
                Ok(None) => (Status::Passed, None),
                Ok(Some(msg)) => (Status::Failed, Some(msg)),
                Err(e) => (Status::Error, Some(e.to_string())),
            };
            TestCase {
                classname: class.to_string(),
                name: name.to_string(),
                status,
                message,
            }
        })
        .collect();
    let failures = testcases.iter().filter(|t| t.status == Status::Failed).count();
    let errors = testcases.iter().filter(|t| t.status == Status::Error).count();
    VerifyReport {
        name: "tce-verify".into(),
        suite,
        seed: cfg.seed,
        precision_bits: cfg.precision_bits,
        tests: testcases.len(),
        failures,
        errors,
        testcases,
    }
}
