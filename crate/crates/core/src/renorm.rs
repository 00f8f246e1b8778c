//! The renormalization step `κ ↦ κ′` with `λ′ = g²(λ)`, under which
//! `R_{κ′}(z) = R_κ(sz) / s` for `E(z) ∈ U_{m_0,0}(κ′)` and `s = 1 − λ_1λ`,
//! plus towers of steps and the golden periodic cascade.

use rayon::prelude::*;
use rug::Float;
use serde::Serialize;

use crate::atoms::{locate, u_region, u_region_for, Location, URegion};
use crate::cf::{CfSpec, SemiIndex};
use crate::error::{Error, Result};
use crate::field::{ZLambda, ZLambdaRepr};
use crate::return_map::{first_return_iter, m0n0, return_map_closed, sample_preimage, FirstReturn};
use crate::sample::rng_stream;
use crate::tce::{Point, TceParams};

/// One renormalization step.
#[derive(Debug, Clone)]
pub struct RenormStep {
    pub kappa_in: TceParams,
    pub kappa_out: TceParams,
    /// `s = 1 − λ_1λ = −Δ_{1,0}(λ)`.
    pub scale: ZLambda,
    /// `U_{m_0,0}(κ′)` in the `E`-image.
    pub domain: URegion,
}

impl RenormStep {
    pub fn scale_float(&self) -> Result<Float> {
        self.scale.to_float(self.kappa_in.prec())
    }

    pub fn summary(&self) -> Result<StepSummary> {
        Ok(StepSummary {
            lambda_in: CfSpec::from(self.kappa_in.cf()),
            lambda_out: CfSpec::from(self.kappa_out.cf()),
            p_in: self.kappa_in.p(),
            q_in: self.kappa_in.q(),
            p_out: self.kappa_out.p(),
            q_out: self.kappa_out.q(),
            eta_out: self.kappa_out.eta().to_repr(),
            scale: self.scale.to_repr(),
            scale_value: self.scale_float()?.to_f64(),
            domain_anchor: [self.domain.anchor.m as u64, self.domain.anchor.n],
        })
    }
}

/// JSON form of a step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepSummary {
    pub lambda_in: CfSpec,
    pub lambda_out: CfSpec,
    pub p_in: u64,
    pub q_in: u64,
    pub p_out: u64,
    pub q_out: u64,
    pub eta_out: ZLambdaRepr,
    pub scale: ZLambdaRepr,
    pub scale_value: f64,
    pub domain_anchor: [u64; 2],
}

/// `κ′ = (α, τ, g²(λ), η′ = p′ − q′λ′, 1)`.
///
/// `(p′, q′) = (P, Q)(g²λ)` at the successor of `(m_0, 0)`, the smallest
/// choice with `p′, q′ >= 1` whose threshold index is again `(m_0, 0)`.
pub fn renormalize(kappa: &TceParams) -> Result<RenormStep> {
    let cf = kappa.cf();
    let lambda_1 = cf.quotient(1)?;
    cf.quotient(2)?;
    let shifted = cf.gauss_shift(2)?;

    let scale = ZLambda::from_integers(cf, 1, -(lambda_1 as i64));
    if scale.sign()?.is_le() || ZLambda::one(cf).checked_sub(&scale)?.sign()?.is_le() {
        return Err(Error::InvalidParams(format!("scale {scale} outside (0, 1)")));
    }

    let m0 = m0n0(kappa)?.m;
    let anchor = SemiIndex::new(m0, 0);
    let idx = shifted.successor(anchor)?;
    let pair = shifted.semiconvergent(idx)?;
    let to_u64 = |x: &rug::Integer| {
        x.to_u64()
            .ok_or_else(|| Error::InvalidParams(format!("renormalized translation {x} overflows")))
    };
    let (p, q) = (to_u64(&pair.p)?, to_u64(&pair.q)?);
    let kappa_out = kappa.with_translation(shifted, p, q)?;

    let threshold = m0n0(&kappa_out)?;
    if threshold != anchor {
        return Err(Error::InvalidParams(format!(
            "renormalized threshold {threshold} differs from {anchor}"
        )));
    }
    let domain = u_region(&kappa_out, anchor)?;
    Ok(RenormStep {
        kappa_in: kappa.clone(),
        kappa_out,
        scale,
        domain,
    })
}

/// Compares `U_{m_0+2,0}(κ) / s` with `U_{m_0,0}(κ′)` vertex by vertex.
pub fn domain_scaling_check(step: &RenormStep) -> Result<(bool, Float)> {
    let kappa = &step.kappa_in;
    let prec = kappa.prec();
    let anchor = SemiIndex::new(step.domain.anchor.m + 2, 0);
    let big = u_region_for(kappa.geometry(), kappa.cf(), anchor)?;
    let inv = Float::with_val(prec, 1 / step.scale.to_float(prec + 32)?);
    let mut max_dev = Float::with_val(prec, 0);
    for (a, b) in big.vertices.iter().zip(step.domain.vertices.iter()) {
        let d = a.scale(&inv).dist(b);
        if d > max_dev {
            max_dev = d;
        }
    }
    Ok((max_dev <= tolerance(prec), max_dev))
}

/// `2^(16 − prec)`.
pub fn tolerance(prec: u32) -> Float {
    Float::with_val(prec, Float::i_exp(1, 16 - prec as i32))
}

/// Outcome of [`verify_conjugacy`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugacyReport {
    pub samples: u64,
    pub max_dev: f64,
    pub pass: bool,
    pub seed: u64,
    /// `log2` of the pass tolerance.
    pub tolerance_log2: i64,
    /// Draws thrown away because some evaluation landed within guard of a boundary.
    pub rejected: u64,
    /// Samples where the closed-form and iterated return times disagree.
    pub time_mismatches: u64,
}

struct SampleOutcome {
    dev: Float,
    rejected: u64,
    time_mismatch: bool,
}

const MAX_REDRAWS: u32 = 100;
const DOMAIN_MARGIN: f64 = 0.01;

fn is_ambiguity(e: &Error) -> bool {
    matches!(e, Error::BoundaryAmbiguous(_) | Error::PrecisionAmbiguous(_))
}

fn both_sides(step: &RenormStep, z: &Point, s: &Float, inv: &Float) -> Result<(Float, bool)> {
    let small = &step.kappa_out;
    let big = &step.kappa_in;
    let sz = z.scale(s);
    let lhs_closed = return_map_closed(small, z)?;
    let lhs_iter = first_return_iter(small, z)?;
    let rhs_closed = return_map_closed(big, &sz)?;
    let rhs_iter = first_return_iter(big, &sz)?;
    let rc = rhs_closed.point.scale(inv);
    let ri = rhs_iter.point.scale(inv);
    let devs = [
        lhs_closed.point.dist(&rc),
        lhs_iter.point.dist(&ri),
        lhs_closed.point.dist(&lhs_iter.point),
        rc.dist(&ri),
    ];
    let dev = devs
        .into_iter()
        .fold(Float::with_val(big.prec(), 0), |a, b| if b > a { b } else { a });
    let mismatch = lhs_closed.h != lhs_iter.h || rhs_closed.h != rhs_iter.h;
    Ok((dev, mismatch))
}

fn one_sample(step: &RenormStep, seed: u64, i: u64, s: &Float, inv: &Float) -> Result<SampleOutcome> {
    let small = &step.kappa_out;
    let mut rng = rng_stream(seed, i);
    let mut rejected = 0u64;
    for _ in 0..MAX_REDRAWS {
        let (z, r) = sample_preimage(
            small,
            |rng| step.domain.sample_interior(small.geometry(), rng, DOMAIN_MARGIN),
            &mut rng,
        )?;
        rejected += r as u64;
        match both_sides(step, &z, s, inv) {
            Ok((dev, time_mismatch)) => {
                return Ok(SampleOutcome {
                    dev,
                    rejected,
                    time_mismatch,
                })
            }
            Err(e) if is_ambiguity(&e) => rejected += 1,
            Err(e) => return Err(e),
        }
    }
    Err(Error::BoundaryAmbiguous(format!(
        "sample {i}: every redraw was ambiguous"
    )))
}

/// Checks `R_{κ′}(z) = R_κ(sz) / s` on `samples` interior points of the
/// domain, each side evaluated by the closed form and by iteration.
/// Sample `i` uses stream `i` of `seed`, so the report is independent of
/// thread scheduling.
pub fn verify_conjugacy(step: &RenormStep, samples: u64, seed: u64) -> Result<ConjugacyReport> {
    if samples == 0 {
        return Err(Error::InvalidParams("samples must be at least 1".into()));
    }
    let prec = step.kappa_in.prec();
    let s = step.scale.to_float(prec)?;
    let inv = Float::with_val(prec, 1 / step.scale.to_float(prec + 32)?);
    let outcomes = (0..samples)
        .into_par_iter()
        .map(|i| one_sample(step, seed, i, &s, &inv))
        .collect::<Result<Vec<_>>>()?;
    let mut max_dev = Float::with_val(prec, 0);
    let mut rejected = 0;
    let mut time_mismatches = 0;
    for o in outcomes {
        if o.dev > max_dev {
            max_dev = o.dev;
        }
        rejected += o.rejected;
        time_mismatches += o.time_mismatch as u64;
    }
    let pass = max_dev <= tolerance(prec) && time_mismatches == 0;
    Ok(ConjugacyReport {
        samples,
        max_dev: max_dev.to_f64(),
        pass,
        seed,
        tolerance_log2: 16 - prec as i64,
        rejected,
        time_mismatches,
    })
}

/// A sequence of renormalization steps.
#[derive(Debug, Clone)]
pub struct Tower {
    pub steps: Vec<RenormStep>,
    /// Products `s_1 ⋯ s_k`.
    pub cumulative_scale: Vec<Float>,
    /// Quotients left in the last `λ′`; `None` for periodic tails.
    pub remaining_quotients: Option<usize>,
}

/// JSON form of a tower.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TowerSummary {
    pub depth: usize,
    pub steps: Vec<StepSummary>,
    pub cumulative_scale: Vec<f64>,
    pub remaining_quotients: Option<usize>,
}

impl Tower {
    pub fn summary(&self) -> Result<TowerSummary> {
        Ok(TowerSummary {
            depth: self.steps.len(),
            steps: self.steps.iter().map(RenormStep::summary).collect::<Result<_>>()?,
            cumulative_scale: self.cumulative_scale.iter().map(Float::to_f64).collect(),
            remaining_quotients: self.remaining_quotients,
        })
    }
}

/// `depth` renormalization steps, or an error if any step fails.
pub fn renorm_tower(kappa: &TceParams, depth: usize) -> Result<Tower> {
    match renorm_tower_partial(kappa, depth) {
        (tower, None) => Ok(tower),
        (_, Some(e)) => Err(e),
    }
}

/// As many of `depth` steps as the quotient budget allows, together with
/// the error that stopped the tower early.
pub fn renorm_tower_partial(kappa: &TceParams, depth: usize) -> (Tower, Option<Error>) {
    let prec = kappa.prec();
    let mut steps: Vec<RenormStep> = Vec::with_capacity(depth);
    let mut cumulative_scale = Vec::with_capacity(depth);
    let mut current = kappa.clone();
    let mut product = Float::with_val(prec, 1);
    let mut stopped = None;
    for _ in 0..depth {
        let step = match renormalize(&current).and_then(|s| Ok((s.scale_float()?, s))) {
            Ok((f, s)) => {
                product *= f;
                s
            }
            Err(e) => {
                stopped = Some(e);
                break;
            }
        };
        cumulative_scale.push(product.clone());
        current = step.kappa_out.clone();
        steps.push(step);
    }
    let remaining_quotients = current.cf().available_depth();
    (
        Tower {
            steps,
            cumulative_scale,
            remaining_quotients,
        },
        stopped,
    )
}

/// One return together with its affine form `z ↦ a z + c`.
#[derive(Debug, Clone)]
struct AffineReturn {
    ret: FirstReturn,
    rotation: Point,
    offset: Float,
}

fn affine_return(kappa: &TceParams, z: &Point) -> Result<AffineReturn> {
    let cone = kappa.cone_index(z)?;
    let (cos, sin) = kappa.geometry().rotation(cone.0);
    let prec = kappa.prec();
    let ret = first_return_iter(kappa, z)?;
    let w = kappa.geometry().exchange_in(z, cone);
    let offset = Float::with_val(prec, &ret.point.re - &w.re);
    Ok(AffineReturn {
        ret,
        rotation: Point::new(cos, sin),
        offset,
    })
}

/// A point `z` with `R^k(z) = z` within `2^(16 − prec)`.
#[derive(Debug, Clone)]
pub struct PeriodicPoint {
    pub point: Point,
    /// Period under the return map.
    pub period: u64,
    /// Sum of the return times over one period, the period under `F`.
    pub steps: u64,
}

/// Cap on return steps when detecting periodicity.
pub const PERIOD_CAP: u64 = 10_000;

/// Iterates the return map from `z` until it comes back within tolerance.
pub fn detect_period(kappa: &TceParams, z: &Point, cap: u64) -> Result<PeriodicPoint> {
    let tol = tolerance(kappa.prec());
    let mut cur = z.clone();
    let mut steps = 0u64;
    for k in 1..=cap {
        let r = first_return_iter(kappa, &cur)?;
        steps += r.h;
        cur = r.point;
        if cur.dist(z) <= tol {
            return Ok(PeriodicPoint {
                point: z.clone(),
                period: k,
                steps,
            });
        }
    }
    Err(Error::NotPeriodic(format!(
        "{z:?} did not return within {cap} return steps"
    )))
}

/// Searches for a periodic point of the return map near `start`: follows
/// the orbit for up to `max_period` returns, composing the affine pieces,
/// and after each return solves `a z + c = z` for the centre of the
/// rotation, which is then confirmed by [`detect_period`].
pub fn find_periodic_point(kappa: &TceParams, start: &Point, max_period: u64) -> Result<PeriodicPoint> {
    let prec = kappa.prec();
    let one = Point::from_f64(prec, 1.0, 0.0);
    let mut a = one.clone();
    let mut c = Point::zero(prec);
    let mut cur = start.clone();
    for k in 1..=max_period {
        let step = affine_return(kappa, &cur)?;
        a = step.rotation.mul(&a);
        c = step.rotation.mul(&c).add_real(&step.offset);
        cur = step.ret.point;
        let Some(centre) = c.div(&one.sub(&a)) else { continue };
        if centre.im.is_sign_negative() {
            continue;
        }
        if let Ok(found) = detect_period(kappa, &centre, k) {
            if found.period == k {
                return Ok(found);
            }
        }
    }
    Err(Error::NotPeriodic(format!(
        "no periodic centre found from {start:?} within {max_period} returns"
    )))
}

/// A return-periodic point `z` with `E(z) ∈ S_idx`, searched from seeded
/// interior samples of the atom.
pub fn find_periodic_in_atom(
    kappa: &TceParams,
    idx: SemiIndex,
    seed: u64,
    tries: u64,
    max_period: u64,
) -> Result<PeriodicPoint> {
    for i in 0..tries {
        let mut rng = rng_stream(seed, i);
        let (z, _) = crate::return_map::sample_atom_preimage(kappa, idx, &mut rng, 0.05)?;
        let Ok(found) = find_periodic_point(kappa, &z, max_period) else {
            continue;
        };
        if matches!(locate(kappa, &found.point), Ok(Location::Atom(at)) if at == idx) {
            return Ok(found);
        }
    }
    Err(Error::NotPeriodic(format!(
        "no periodic point found in S{idx} after {tries} starts"
    )))
}

/// One member `z_n` of the golden periodic cascade.
#[derive(Debug, Clone)]
pub struct CascadeEntry {
    pub n: u64,
    pub point: Point,
    /// The atom `S_{2n+m̃}` containing `E(z_n)`.
    pub atom: SemiIndex,
    /// Closed-form return time on that atom, `h_{2n+m̃+1}`.
    pub h: u64,
}

/// Golden cascade `z_n = Φ^{2n+m̃−m} z`, `m̃ = m mod 2`, for `n < count`,
/// starting from a return-periodic `z` with `E(z) ∈ S_m`.
pub fn periodic_cascade(kappa: &TceParams, z: &Point, m: usize, count: u64) -> Result<Vec<CascadeEntry>> {
    if !crate::atoms::is_golden(kappa) {
        return Err(Error::InvalidParams(
            "the periodic cascade needs the golden parameters".into(),
        ));
    }
    match locate(kappa, z)? {
        Location::Atom(idx) if idx == SemiIndex::new(m, 0) => {}
        other => {
            return Err(Error::NotInDomain(format!("E({z:?}) is at {other:?}, not in S_{m}")));
        }
    }
    detect_period(kappa, z, PERIOD_CAP)?;
    let prec = kappa.prec();
    let phi = kappa.cf().lambda_float(prec + 32)?;
    let parity = m % 2;
    let mut out = Vec::with_capacity(count as usize);
    for n in 0..count {
        let power = 2 * n as i64 + parity as i64 - m as i64;
        let factor = Float::with_val(prec, rug::ops::Pow::pow(&phi, power as i32));
        let atom = SemiIndex::new(2 * n as usize + parity, 0);
        let (h, _) = crate::return_map::atom_return(kappa, atom)?;
        out.push(CascadeEntry {
            n,
            point: z.scale(&factor),
            atom,
            h,
        });
    }
    Ok(out)
}

/// Accumulation diagnostics for one cascade member over an orbit prefix.
#[derive(Debug, Clone, Serialize)]
pub struct AccumulationRow {
    pub n: u64,
    pub abs: f64,
    pub horizon: u64,
    /// `max_j |F^j(z_n) − F^j(0)|`, equal to `|z_n|` while `j <= h(z_n)`.
    pub max_gap_to_baseline_orbit: f64,
    /// `max_j` of the distance from `F^j(z_n)` to the segment `[−1, λ]`.
    pub max_dist_to_segment: f64,
}

/// Follows each cascade member for `horizon` steps of `F`.
pub fn accumulation(kappa: &TceParams, cascade: &[CascadeEntry], horizon: u64) -> Result<Vec<AccumulationRow>> {
    let prec = kappa.prec();
    let lambda = kappa.map().lambda().clone();
    let minus_one = Float::with_val(prec, -1);
    let mut base = Vec::with_capacity(horizon as usize);
    let mut x = Point::zero(prec);
    for _ in 0..horizon {
        x = kappa.step(&x)?;
        base.push(x.clone());
    }
    cascade
        .par_iter()
        .map(|entry| {
            let mut cur = entry.point.clone();
            let mut gap = Float::with_val(prec, 0);
            let mut seg = Float::with_val(prec, 0);
            for b in &base {
                cur = kappa.step(&cur)?;
                let g = cur.dist(b);
                if g > gap {
                    gap = g;
                }
                let clamped = cur.re.clone().clamp(&minus_one, &lambda);
                let d = cur.dist(&Point::new(clamped, Float::with_val(prec, 0)));
                if d > seg {
                    seg = d;
                }
            }
            Ok(AccumulationRow {
                n: entry.n,
                abs: entry.point.abs().to_f64(),
                horizon,
                max_gap_to_baseline_orbit: gap.to_f64(),
                max_dist_to_segment: seg.to_f64(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::ContinuedFraction;
    use crate::tce::golden_params;

    fn with(cf: ContinuedFraction, p: u64, q: u64) -> TceParams {
        golden_params(256).with_translation(cf, p, q).unwrap()
    }

    #[test]
    fn golden_is_a_fixed_point() {
        let k = golden_params(256);
        let step = renormalize(&k).unwrap();
        assert_eq!(step.kappa_out.cf(), k.cf());
        assert_eq!((step.kappa_out.p(), step.kappa_out.q()), (1, 1));
        // s = 1 − Φ = Φ²
        assert_eq!(step.scale, ZLambda::from_integers(k.cf(), 1, -1));
        assert_eq!(step.scale, -k.cf().delta(SemiIndex::new(1, 0)).unwrap());
        assert_eq!(step.domain.anchor, SemiIndex::new(0, 0));
    }

    #[test]
    fn period_two_tail_is_fixed_by_two_shifts() {
        let cf = ContinuedFraction::periodic(vec![], vec![1, 2]).unwrap();
        let k = with(cf.clone(), 1, 1);
        let step = renormalize(&k).unwrap();
        assert_eq!(step.kappa_out.cf(), &cf);
        assert_eq!(step.scale, ZLambda::from_integers(&cf, 1, -1));
    }

    #[test]
    fn sqrt2_translation_from_successor() {
        let cf = ContinuedFraction::sqrt2_minus_1();
        for (p, q) in [(1, 1), (1, 2), (2, 3), (3, 7)] {
            let k = with(cf.clone(), p, q);
            let step = renormalize(&k).unwrap();
            let m0 = m0n0(&k).unwrap().m;
            let next = cf.successor(SemiIndex::new(m0, 0)).unwrap();
            let pair = cf.semiconvergent(next).unwrap();
            assert_eq!(step.kappa_out.p(), pair.p);
            assert_eq!(step.kappa_out.q(), pair.q);
            assert_eq!(m0n0(&step.kappa_out).unwrap(), SemiIndex::new(m0, 0));
            assert_eq!(step.scale, ZLambda::from_integers(&cf, 1, -2));
        }
    }

    #[test]
    fn depth_is_consumed() {
        // enough quotients for λ at 256 bits plus a few steps
        let cf = ContinuedFraction::truncated([1, 2].repeat(100)).unwrap();
        let k = with(cf, 1, 1);
        let (tower, err) = renorm_tower_partial(&k, 100);
        assert!(!tower.steps.is_empty());
        assert!(tower.steps.len() < 100);
        assert!(matches!(err, Some(Error::DepthExhausted { .. })));
        assert_eq!(tower.remaining_quotients, Some(200 - 2 * tower.steps.len()));
        assert!(renorm_tower(&k, 100).is_err());
        assert!(renorm_tower(&k, 0).unwrap().steps.is_empty());
    }

    #[test]
    fn golden_tower_is_constant() {
        let k = golden_params(256);
        let tower = renorm_tower(&k, 5).unwrap();
        let first = tower.steps[0].summary().unwrap();
        for s in &tower.steps {
            assert_eq!(s.summary().unwrap(), first);
        }
        let phi2 = tower.steps[0].scale_float().unwrap();
        let expected = Float::with_val(256, rug::ops::Pow::pow(&phi2, 5));
        let diff = Float::with_val(256, &tower.cumulative_scale[4] - &expected).abs();
        assert!(diff < tolerance(256));
        assert_eq!(tower.remaining_quotients, None);
    }

    #[test]
    fn domain_scales() {
        for cf in [ContinuedFraction::golden(), ContinuedFraction::sqrt2_minus_1()] {
            for (p, q) in [(1, 1), (2, 3)] {
                let step = renormalize(&with(cf.clone(), p, q)).unwrap();
                let (ok, dev) = domain_scaling_check(&step).unwrap();
                assert!(ok, "{cf} {p} {q}: {dev}");
            }
        }
    }

    #[test]
    fn conjugacy_on_a_few_samples() {
        let step = renormalize(&with(ContinuedFraction::sqrt2_minus_1(), 2, 3)).unwrap();
        let report = verify_conjugacy(&step, 8, 11).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report, verify_conjugacy(&step, 8, 11).unwrap());
    }

    fn fib(n: usize) -> u64 {
        let (mut a, mut b) = (0u64, 1u64);
        for _ in 0..n {
            (a, b) = (b, a + b);
        }
        a
    }

    #[test]
    fn golden_cascade_from_even_and_odd_atoms() {
        let k = golden_params(256);
        for m in [0usize, 1, 2] {
            let seed = find_periodic_in_atom(&k, SemiIndex::new(m, 0), 3, 50, 20).unwrap();
            assert_eq!(seed.period, 1);
            assert_eq!(seed.steps, fib(m + 3) - 1);
            let cascade = periodic_cascade(&k, &seed.point, m, 5).unwrap();
            for entry in &cascade {
                let atom = SemiIndex::new(2 * entry.n as usize + m % 2, 0);
                assert_eq!(entry.atom, atom);
                assert_eq!(locate(&k, &entry.point).unwrap(), Location::Atom(atom));
                assert_eq!(entry.h, fib(atom.m + 3) - 1);
                let p = detect_period(&k, &entry.point, PERIOD_CAP).unwrap();
                assert_eq!((p.period, p.steps), (1, entry.h));
            }
            if m % 2 == 0 {
                assert_eq!(cascade[m / 2].point, seed.point);
            }
        }
    }

    #[test]
    fn cascade_orbits_shadow_the_baseline() {
        let k = golden_params(256);
        let seed = find_periodic_in_atom(&k, SemiIndex::new(0, 0), 3, 50, 20).unwrap();
        let cascade = periodic_cascade(&k, &seed.point, 0, 6).unwrap();
        let rows = accumulation(&k, &cascade, 40).unwrap();
        for (entry, row) in cascade.iter().zip(&rows) {
            if entry.h >= row.horizon {
                // |F^j(z_n) − F^j(0)| = |z_n| for j <= h(z_n)
                assert!((row.max_gap_to_baseline_orbit - row.abs).abs() < 1e-12);
            }
        }
        assert!(rows.windows(2).all(|w| w[1].abs < w[0].abs));
    }

    #[test]
    fn cascade_rejects_non_periodic_points() {
        let k = golden_params(256);
        let mut r = crate::sample::rng(5);
        let (z, _) = crate::return_map::sample_atom_preimage(&k, SemiIndex::new(0, 0), &mut r, 0.05).unwrap();
        let fixed = find_periodic_in_atom(&k, SemiIndex::new(0, 0), 3, 50, 20).unwrap();
        if z.dist(&fixed.point) > Float::with_val(64, 1e-6) {
            assert!(matches!(periodic_cascade(&k, &z, 0, 3), Err(Error::NotPeriodic(_))));
        }
    }
}
