//! The translated cone exchange `F = G ∘ E` on the closed upper half-plane.

use std::fmt;
use std::sync::Arc;

use rug::float::Constant;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::angle::parse_angle;
use crate::baseline::OrbitCache;
use crate::cf::{CfSpec, ContinuedFraction};
use crate::error::{Error, Result};
use crate::field::ZLambda;

pub const DEFAULT_PRECISION: u32 = 256;

/// A point of the closed upper half-plane.
#[derive(Clone, PartialEq)]
pub struct Point {
    pub re: Float,
    pub im: Float,
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.20e}, {:.20e})", self.re.to_f64(), self.im.to_f64())
    }
}

impl Point {
    pub fn new(re: Float, im: Float) -> Self {
        Point { re, im }
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        Point {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn zero(prec: u32) -> Self {
        Self::from_f64(prec, 0.0, 0.0)
    }

    pub fn real(x: Float) -> Self {
        let prec = x.prec();
        Point {
            re: x,
            im: Float::with_val(prec, 0),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn scale(&self, a: &Float) -> Point {
        Point {
            re: Float::with_val(self.prec(), &self.re * a),
            im: Float::with_val(self.prec(), &self.im * a),
        }
    }

    pub fn add_real(&self, x: &Float) -> Point {
        Point {
            re: Float::with_val(self.prec(), &self.re + x),
            im: self.im.clone(),
        }
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn dist(&self, other: &Point) -> Float {
        let dx = Float::with_val(self.prec(), &self.re - &other.re);
        let dy = Float::with_val(self.prec(), &self.im - &other.im);
        dx.hypot(&dy)
    }

    fn rotate(&self, cos: &Float, sin: &Float) -> Point {
        let p = self.prec();
        let re = Float::with_val(p, &self.re * cos) - Float::with_val(p, &self.im * sin);
        let im = Float::with_val(p, &self.re * sin) + Float::with_val(p, &self.im * cos);
        Point { re, im }
    }

    /// Complex product.
    pub fn mul(&self, other: &Point) -> Point {
        self.rotate(&other.re, &other.im)
    }

    pub fn add(&self, other: &Point) -> Point {
        let p = self.prec();
        Point {
            re: Float::with_val(p, &self.re + &other.re),
            im: Float::with_val(p, &self.im + &other.im),
        }
    }

    pub fn sub(&self, other: &Point) -> Point {
        let p = self.prec();
        Point {
            re: Float::with_val(p, &self.re - &other.re),
            im: Float::with_val(p, &self.im - &other.im),
        }
    }

    /// Complex quotient; `None` when `other` is zero.
    pub fn div(&self, other: &Point) -> Option<Point> {
        if other.is_zero() {
            return None;
        }
        let p = self.prec();
        let norm = Float::with_val(p, other.re.square_ref()) + Float::with_val(p, other.im.square_ref());
        let neg = Float::with_val(p, -&other.im);
        let num = self.rotate(&other.re, &neg);
        Some(Point {
            re: Float::with_val(p, &num.re / &norm),
            im: Float::with_val(p, &num.im / &norm),
        })
    }
}

/// Index `j` of the cone `C_j`, `0 <= j <= d + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConeIndex(pub usize);

/// Which of the three translation regions a cone belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// `C_0`, translated by `−ρ`.
    Right,
    /// `C_c = C_1 ∪ ... ∪ C_d`, translated by `−η`.
    Middle,
    /// `C_{d+1}`, translated by `+λ`.
    Left,
}

impl Region {
    /// Itinerary symbol: `+1`, `0`, `−1`.
    pub fn symbol(self) -> i8 {
        match self {
            Region::Right => 1,
            Region::Middle => 0,
            Region::Left => -1,
        }
    }
}

/// How to treat points within the guard tolerance of a cone boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryMode {
    /// Report [`Error::PrecisionAmbiguous`].
    Strict,
    /// Resolve by the half-open conventions.
    #[default]
    Lenient,
}

#[derive(Debug, Clone)]
struct Direction {
    cos: Float,
    sin: Float,
}

impl Direction {
    fn at(angle: &Float, prec: u32) -> Self {
        let (sin, cos) = Float::with_val(prec, angle).sin_cos(Float::new(prec));
        Direction { cos, sin }
    }

    /// `|z| sin(θ − Arg z)`: positive iff `Arg z < θ` for `z` in the closed upper half-plane.
    fn cross(&self, z: &Point) -> Float {
        let p = z.prec();
        Float::with_val(p, &z.re * &self.sin) - Float::with_val(p, &z.im * &self.cos)
    }
}

/// Angles, cone boundaries and the rotations of the exchange.
#[derive(Debug)]
pub struct ConeGeometry {
    prec: u32,
    alpha: Vec<Float>,
    tau: Vec<usize>,
    /// Direction of `B_k = α_0 + ... + α_k`, `0 <= k <= d`.
    bounds: Vec<Direction>,
    /// Rotation by `θ_j`, index `j - 1` for `1 <= j <= d`.
    rotations: Vec<Direction>,
    /// Upper boundary directions of the image cones in `τ` order, with the cone they belong to.
    image_bounds: Vec<(usize, Direction)>,
    cot_first: Float,
    cot_last: Float,
    guard: Float,
}

impl ConeGeometry {
    /// Builds the geometry from angles `α_0, ..., α_{d+1}` and a permutation `τ`
    /// of `{1, ..., d}` given as `tau[j-1] = τ(j)`.
    pub fn new(alpha: &[Float], tau: &[usize], prec: u32) -> Result<Self> {
        if alpha.len() < 3 {
            return Err(Error::InvalidParams("need at least three angles (d >= 1)".into()));
        }
        let d = alpha.len() - 2;
        if tau.len() != d {
            return Err(Error::InvalidParams(format!("tau must permute 1..{d}")));
        }
        let mut seen = vec![false; d];
        for &t in tau {
            if t == 0 || t > d || seen[t - 1] {
                return Err(Error::InvalidParams(format!(
                    "tau {tau:?} is not a permutation of 1..{d}"
                )));
            }
            seen[t - 1] = true;
        }
        let wp = alpha.iter().map(|a| a.prec()).max().unwrap_or(prec).max(prec);
        let pi = Float::with_val(wp, Constant::Pi);
        for (j, a) in alpha.iter().enumerate() {
            if *a <= 0 || *a >= pi {
                return Err(Error::InvalidParams(format!("angle α_{j} not in (0, π)")));
            }
        }
        let total = alpha.iter().fold(Float::with_val(wp, 0), |acc, a| acc + a);
        let slack = Float::with_val(wp, Float::i_exp(1, 4 - prec as i32));
        if Float::with_val(wp, &total - &pi).abs() > slack {
            return Err(Error::InvalidParams("angles must sum to π".into()));
        }
        let mut bounds = Vec::with_capacity(d + 1);
        let mut acc = Float::with_val(wp, 0);
        for a in &alpha[..=d] {
            acc += a;
            bounds.push(Direction::at(&acc, prec));
        }
        let mut rotations = Vec::with_capacity(d);
        for j in 1..=d {
            let mut theta = Float::with_val(wp, 0);
            for k in 1..=d {
                if tau[k - 1] < tau[j - 1] {
                    theta += &alpha[k];
                }
                if k < j {
                    theta -= &alpha[k];
                }
            }
            rotations.push(Direction::at(&theta, prec));
        }
        let mut order: Vec<usize> = (1..=d).collect();
        order.sort_by_key(|&j| tau[j - 1]);
        let mut image_bounds = Vec::with_capacity(d);
        let mut acc = Float::with_val(wp, &alpha[0]);
        for &j in &order {
            acc += &alpha[j];
            image_bounds.push((j, Direction::at(&acc, prec)));
        }
        let cot_first = Float::with_val(prec, alpha[0].cot_ref());
        let cot_last = Float::with_val(prec, alpha[d + 1].cot_ref());
        Ok(ConeGeometry {
            prec,
            alpha: alpha.iter().map(|a| Float::with_val(prec, a)).collect(),
            tau: tau.to_vec(),
            bounds,
            rotations,
            image_bounds,
            cot_first,
            cot_last,
            guard: Float::with_val(prec, Float::i_exp(1, 8 - prec as i32)),
        })
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Number `d` of exchanged cones.
    pub fn d(&self) -> usize {
        self.alpha.len() - 2
    }

    pub fn alpha(&self) -> &[Float] {
        &self.alpha
    }

    pub fn tau(&self) -> &[usize] {
        &self.tau
    }

    pub fn guard(&self) -> &Float {
        &self.guard
    }

    /// `cot α_0`.
    pub fn cot_first(&self) -> &Float {
        &self.cot_first
    }

    /// `cot α_{d+1}`.
    pub fn cot_last(&self) -> &Float {
        &self.cot_last
    }

    /// `θ_j` as (cos, sin).
    pub fn rotation(&self, j: usize) -> (Float, Float) {
        let r = &self.rotations[j - 1];
        (r.cos.clone(), r.sin.clone())
    }

    fn ambiguous(&self, cross: &Float, z: &Point) -> bool {
        let scale = Float::with_val(self.prec, z.re.abs_ref()) + Float::with_val(self.prec, z.im.abs_ref());
        Float::with_val(self.prec, cross.abs_ref()) <= Float::with_val(self.prec, &self.guard * &scale)
    }

    /// The cone containing `z`.
    pub fn cone_index(&self, z: &Point, mode: BoundaryMode) -> Result<ConeIndex> {
        let d = self.d();
        if z.im.is_zero() {
            return Ok(if z.re.is_zero() {
                ConeIndex(1)
            } else if z.re.is_sign_positive() {
                ConeIndex(0)
            } else {
                ConeIndex(d + 1)
            });
        }
        let check = |k: usize| -> Result<Float> {
            let c = self.bounds[k].cross(z);
            if mode == BoundaryMode::Strict && self.ambiguous(&c, z) {
                return Err(Error::PrecisionAmbiguous(format!(
                    "argument of {z:?} within guard of cone boundary {k}"
                )));
            }
            Ok(c)
        };
        // W_0 = [0, B_0)
        if check(0)? > 0 {
            return Ok(ConeIndex(0));
        }
        // W_1 = [B_0, B_1], W_j = (B_{j-1}, B_j]
        for j in 1..=d {
            if check(j)? >= 0 {
                return Ok(ConeIndex(j));
            }
        }
        Ok(ConeIndex(d + 1))
    }

    pub fn region_of(&self, cone: ConeIndex) -> Region {
        if cone.0 == 0 {
            Region::Right
        } else if cone.0 == self.d() + 1 {
            Region::Left
        } else {
            Region::Middle
        }
    }

    /// `E(z)` given the cone of `z`.
    pub fn exchange_in(&self, z: &Point, cone: ConeIndex) -> Point {
        if cone.0 == 0 || cone.0 > self.d() || z.is_zero() {
            return z.clone();
        }
        let r = &self.rotations[cone.0 - 1];
        let mut w = z.rotate(&r.cos, &r.sin);
        if w.im.is_sign_negative() {
            w.im = Float::with_val(self.prec, 0);
        }
        w
    }

    pub fn exchange(&self, z: &Point, mode: BoundaryMode) -> Result<Point> {
        let cone = self.cone_index(z, mode)?;
        Ok(self.exchange_in(z, cone))
    }

    /// `E^{-1}(w)`; the image cones are matched by closed upper boundaries.
    pub fn exchange_inverse(&self, w: &Point) -> Result<Point> {
        let cone = self.cone_index(w, BoundaryMode::Lenient)?;
        if self.region_of(cone) != Region::Middle || w.is_zero() {
            return Ok(w.clone());
        }
        let j = self
            .image_bounds
            .iter()
            .find(|(_, dir)| dir.cross(w) >= 0)
            .map(|(j, _)| *j)
            .unwrap_or(self.image_bounds[self.image_bounds.len() - 1].0);
        let r = &self.rotations[j - 1];
        let neg_sin = Float::with_val(self.prec, -&r.sin);
        let mut z = w.rotate(&r.cos, &neg_sin);
        if z.im.is_sign_negative() {
            z.im = Float::with_val(self.prec, 0);
        }
        Ok(z)
    }

    /// `u(z) = Re z − Im z · cot α_0`; `z ∈ C_0` iff `u > 0`.
    pub fn u_coord(&self, z: &Point) -> Float {
        Float::with_val(self.prec, &z.re - Float::with_val(self.prec, &z.im * &self.cot_first))
    }

    /// `v(z) = Re z + Im z · cot α_{d+1}`; `z ∈ C_{d+1}` iff `v < 0`.
    pub fn v_coord(&self, z: &Point) -> Float {
        Float::with_val(self.prec, &z.re + Float::with_val(self.prec, &z.im * &self.cot_last))
    }

    /// Inverse of `z ↦ (u(z), v(z))`.
    pub fn from_uv(&self, u: &Float, v: &Float) -> Point {
        let p = self.prec;
        let denom = Float::with_val(p, &self.cot_first + &self.cot_last);
        let im = Float::with_val(p, v - u) / denom;
        let re = Float::with_val(p, u + Float::with_val(p, &im * &self.cot_first));
        Point { re, im }
    }
}

/// A cone exchange with real-valued translation parameters. Parameters of
/// this relaxed form arise from rescaling, where `η` leaves the lattice
/// `p − qλ`.
#[derive(Debug, Clone)]
pub struct TceMap {
    geometry: Arc<ConeGeometry>,
    lambda: Float,
    eta: Float,
    rho: Float,
    mode: BoundaryMode,
}

impl TceMap {
    pub fn new(geometry: Arc<ConeGeometry>, lambda: Float, eta: Float, rho: Float) -> Self {
        TceMap {
            geometry,
            lambda,
            eta,
            rho,
            mode: BoundaryMode::Lenient,
        }
    }

    pub fn with_mode(mut self, mode: BoundaryMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn geometry(&self) -> &ConeGeometry {
        &self.geometry
    }

    pub fn geometry_arc(&self) -> &Arc<ConeGeometry> {
        &self.geometry
    }

    pub fn prec(&self) -> u32 {
        self.geometry.prec
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    pub fn lambda(&self) -> &Float {
        &self.lambda
    }

    pub fn eta(&self) -> &Float {
        &self.eta
    }

    pub fn rho(&self) -> &Float {
        &self.rho
    }

    pub fn cone_index(&self, z: &Point) -> Result<ConeIndex> {
        self.geometry.cone_index(z, self.mode)
    }

    pub fn region(&self, z: &Point) -> Result<Region> {
        Ok(self.geometry.region_of(self.cone_index(z)?))
    }

    pub fn exchange(&self, z: &Point) -> Result<Point> {
        self.geometry.exchange(z, self.mode)
    }

    pub fn exchange_inverse(&self, w: &Point) -> Result<Point> {
        self.geometry.exchange_inverse(w)
    }

    fn shift(&self, region: Region) -> Float {
        let p = self.prec();
        match region {
            Region::Right => Float::with_val(p, -&self.rho),
            Region::Middle => Float::with_val(p, -&self.eta),
            Region::Left => self.lambda.clone(),
        }
    }

    /// `G(z)`.
    pub fn translate(&self, z: &Point) -> Result<Point> {
        let region = self.region(z)?;
        Ok(z.add_real(&self.shift(region)))
    }

    /// `F(z) = G(E(z))`.
    pub fn step(&self, z: &Point) -> Result<Point> {
        let cone = self.cone_index(z)?;
        let region = self.geometry.region_of(cone);
        // E preserves the three regions, so G can use the cone of z
        let w = self.geometry.exchange_in(z, cone);
        Ok(w.add_real(&self.shift(region)))
    }

    /// `F^n(z)`.
    pub fn iterate(&self, z: &Point, n: u64) -> Result<Point> {
        let mut cur = z.clone();
        for _ in 0..n {
            cur = self.step(&cur)?;
        }
        Ok(cur)
    }

    /// Region symbols of `z, F(z), ..., F^{steps-1}(z)`.
    pub fn itinerary(&self, z: &Point, steps: usize) -> Result<Vec<i8>> {
        let mut out = Vec::with_capacity(steps);
        let mut cur = z.clone();
        for _ in 0..steps {
            let cone = self.cone_index(&cur)?;
            let region = self.geometry.region_of(cone);
            out.push(region.symbol());
            let w = self.geometry.exchange_in(&cur, cone);
            cur = w.add_real(&self.shift(region));
        }
        Ok(out)
    }

    /// Parameters `(α, τ, λ/a, η/a, ρ/a)`, for which `F'(z) = F(az)/a`.
    pub fn scale_conjugate(&self, a: &Float) -> TceMap {
        let p = self.prec();
        TceMap {
            geometry: self.geometry.clone(),
            lambda: Float::with_val(p, &self.lambda / a),
            eta: Float::with_val(p, &self.eta / a),
            rho: Float::with_val(p, &self.rho / a),
            mode: self.mode,
        }
    }

    /// Brute-force first return to `C_c` by iterating the planar map.
    /// Only meant as an independent cross-check.
    pub fn first_return_planar(&self, z: &Point, budget: u64) -> Result<(u64, Point)> {
        if self.region(z)? != Region::Middle {
            return Err(Error::NotInDomain(format!("{z:?} is not in the middle cone")));
        }
        let mut cur = self.step(z)?;
        for t in 1..=budget {
            if self.region(&cur)? == Region::Middle {
                return Ok((t, cur));
            }
            cur = self.step(&cur)?;
        }
        Err(Error::IterationBudgetExceeded(budget))
    }
}

/// Serializable parameter description:
/// `{"alpha": [...], "tau": [...], "lambda": {...}, "eta": {"p": 1, "q": 1}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsSpec {
    pub alpha: Vec<String>,
    pub tau: Vec<usize>,
    pub lambda: CfSpec,
    pub eta: EtaSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaSpec {
    pub p: u64,
    pub q: u64,
}

/// Parameters `κ = (α, τ, λ, η = p − qλ, ρ = 1)`.
#[derive(Clone)]
pub struct TceParams {
    map: TceMap,
    cf: ContinuedFraction,
    p: u64,
    q: u64,
    eta: ZLambda,
    alpha_src: Vec<String>,
    orbit: Arc<OrbitCache>,
}

impl fmt::Debug for TceParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TceParams")
            .field("alpha", &self.alpha_src)
            .field("tau", &self.map.geometry.tau)
            .field("lambda", &self.cf)
            .field("p", &self.p)
            .field("q", &self.q)
            .finish()
    }
}

impl TceParams {
    /// Builds and validates `κ`. Angles are expression strings.
    pub fn new(alpha: &[&str], tau: &[usize], cf: ContinuedFraction, p: u64, q: u64, prec: u32) -> Result<Self> {
        let wp = prec + 32;
        let angles = alpha.iter().map(|s| parse_angle(s, wp)).collect::<Result<Vec<_>>>()?;
        let geometry = Arc::new(ConeGeometry::new(&angles, tau, prec)?);
        Self::with_geometry(geometry, alpha.iter().map(|s| s.to_string()).collect(), cf, p, q)
    }

    /// Builds `κ` over an existing geometry (used by renormalization, which keeps the angles).
    pub fn with_geometry(
        geometry: Arc<ConeGeometry>,
        alpha_src: Vec<String>,
        cf: ContinuedFraction,
        p: u64,
        q: u64,
    ) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidParams("p and q must be positive".into()));
        }
        let eta = ZLambda::from_integers(&cf, p, -(q as i64));
        // −λ < η < 1
        let lower = eta.checked_add(&ZLambda::lambda(&cf))?;
        let upper = ZLambda::one(&cf).checked_sub(&eta)?;
        if lower.sign()?.is_le() || upper.sign()?.is_le() {
            return Err(Error::InvalidParams(format!(
                "η = {p} − {q}λ must satisfy −λ < η < 1 for λ = {cf}"
            )));
        }
        let prec = geometry.prec;
        let lambda_f = cf.lambda_float(prec)?;
        let eta_f = eta.to_float(prec)?;
        let map = TceMap::new(geometry, lambda_f, eta_f, Float::with_val(prec, 1));
        Ok(TceParams {
            map,
            orbit: Arc::new(OrbitCache::new()),
            cf,
            p,
            q,
            eta,
            alpha_src,
        })
    }

    pub fn from_spec(spec: &ParamsSpec, prec: u32) -> Result<Self> {
        let alpha: Vec<&str> = spec.alpha.iter().map(String::as_str).collect();
        Self::new(&alpha, &spec.tau, spec.lambda.build()?, spec.eta.p, spec.eta.q, prec)
    }

    pub fn to_spec(&self) -> ParamsSpec {
        ParamsSpec {
            alpha: self.alpha_src.clone(),
            tau: self.map.geometry.tau.clone(),
            lambda: CfSpec::from(&self.cf),
            eta: EtaSpec { p: self.p, q: self.q },
        }
    }

    /// Same parameters with a different boundary mode.
    pub fn with_mode(&self, mode: BoundaryMode) -> Self {
        let mut out = self.clone();
        out.map = out.map.with_mode(mode);
        out
    }

    /// Same angles and `τ` with a different `λ` and `(p, q)`.
    pub fn with_translation(&self, cf: ContinuedFraction, p: u64, q: u64) -> Result<Self> {
        let out = Self::with_geometry(self.map.geometry.clone(), self.alpha_src.clone(), cf, p, q)?;
        Ok(out.with_mode(self.map.mode))
    }

    pub fn map(&self) -> &TceMap {
        &self.map
    }

    pub fn geometry(&self) -> &ConeGeometry {
        &self.map.geometry
    }

    pub fn cf(&self) -> &ContinuedFraction {
        &self.cf
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// `η = p − qλ`, exactly.
    pub fn eta(&self) -> &ZLambda {
        &self.eta
    }

    pub fn prec(&self) -> u32 {
        self.map.prec()
    }

    pub fn d(&self) -> usize {
        self.map.geometry.d()
    }

    pub fn alpha_src(&self) -> &[String] {
        &self.alpha_src
    }

    pub(crate) fn orbit_cache(&self) -> &OrbitCache {
        &self.orbit
    }

    pub fn cone_index(&self, z: &Point) -> Result<ConeIndex> {
        self.map.cone_index(z)
    }

    pub fn exchange(&self, z: &Point) -> Result<Point> {
        self.map.exchange(z)
    }

    pub fn exchange_inverse(&self, w: &Point) -> Result<Point> {
        self.map.exchange_inverse(w)
    }

    pub fn translate(&self, z: &Point) -> Result<Point> {
        self.map.translate(z)
    }

    pub fn step(&self, z: &Point) -> Result<Point> {
        self.map.step(z)
    }

    pub fn itinerary(&self, z: &Point, steps: usize) -> Result<Vec<i8>> {
        self.map.itinerary(z, steps)
    }

    pub fn scale_conjugate(&self, a: &Float) -> TceMap {
        self.map.scale_conjugate(a)
    }

    pub fn point(&self, re: f64, im: f64) -> Point {
        Point::from_f64(self.prec(), re, im)
    }
}

/// The golden parameters used throughout the examples: rhombic atoms
/// (`α_0 = α_3 = 1`), `d = 2` with `τ` the swap, `λ = Φ`, `η = Φ²`.
pub fn golden_params(prec: u32) -> TceParams {
    TceParams::new(
        &["1", "0.5", "pi-2.5", "1"],
        &[2, 1],
        ContinuedFraction::golden(),
        1,
        1,
        prec,
    )
    .expect("golden parameters are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol(prec: u32) -> Float {
        Float::with_val(64, Float::i_exp(1, 16 - prec as i32))
    }

    fn asym(prec: u32) -> TceParams {
        let cf = ContinuedFraction::periodic(vec![1], vec![2]).unwrap();
        TceParams::new(&["0.5", "pi/7", "pi/4", "17pi/28-0.5"], &[2, 1], cf, 1, 1, prec).unwrap()
    }

    #[test]
    fn cone_index_special_points() {
        let k = golden_params(256);
        assert_eq!(k.cone_index(&k.point(0.0, 0.0)).unwrap(), ConeIndex(1));
        assert_eq!(k.cone_index(&k.point(1.0, 0.0)).unwrap(), ConeIndex(0));
        assert_eq!(k.cone_index(&k.point(-1.0, 0.0)).unwrap(), ConeIndex(3));
        // straight up: Arg = π/2 ∈ (1.5, π − 1]
        assert_eq!(k.cone_index(&k.point(0.0, 1.0)).unwrap(), ConeIndex(2));
        let z = Point::new(Float::with_val(256, 1.2).cos(), Float::with_val(256, 1.2).sin());
        assert_eq!(k.cone_index(&z).unwrap(), ConeIndex(1));
        // Arg = 2 ∈ (1.5, π − 1]
        let z = Point::new(Float::with_val(256, 2).cos(), Float::with_val(256, 2).sin());
        assert_eq!(k.cone_index(&z).unwrap(), ConeIndex(2));
    }

    #[test]
    fn cone_boundaries_follow_half_open_convention() {
        let k = golden_params(256);
        let on = |angle: Float| Point::new(angle.clone().cos(), angle.sin());
        // Arg = α_0 belongs to C_1
        assert_eq!(k.cone_index(&on(Float::with_val(256, 1))).unwrap(), ConeIndex(1));
        let strict = k.with_mode(BoundaryMode::Strict);
        assert!(matches!(
            strict.cone_index(&on(Float::with_val(256, 1))),
            Err(Error::PrecisionAmbiguous(_))
        ));
        assert_eq!(strict.cone_index(&on(Float::with_val(256, 1.2))).unwrap(), ConeIndex(1));
    }

    #[test]
    fn exchange_examples() {
        let k = golden_params(256);
        // real points are fixed
        for x in [-0.7, 0.0, 0.3] {
            assert_eq!(k.exchange(&k.point(x, 0.0)).unwrap(), k.point(x, 0.0));
        }
        // θ_1 = α_2 for the swap
        let z = Point::new(Float::with_val(256, 1.2).cos(), Float::with_val(256, 1.2).sin());
        let w = k.exchange(&z).unwrap();
        let expect_arg = Float::with_val(256, 1.2) + Float::with_val(256, Constant::Pi) - 2.5;
        let arg = Float::with_val(256, w.im.atan2_ref(&w.re));
        assert!(Float::with_val(256, arg - expect_arg).abs() < tol(256));
        // identity permutation gives the identity
        let id = TceParams::new(
            &["1", "0.5", "pi-2.5", "1"],
            &[1, 2],
            ContinuedFraction::golden(),
            1,
            1,
            256,
        )
        .unwrap();
        assert!(id.exchange(&z).unwrap().dist(&z) < tol(256));
    }

    #[test]
    fn exchange_inverse_roundtrip() {
        let k = asym(256);
        for i in 1..40 {
            let angle = Float::with_val(256, 0.5 + 0.05 * i as f64);
            let r = Float::with_val(256, 0.3 + 0.01 * i as f64);
            let z = Point::new(
                Float::with_val(256, angle.cos_ref()) * &r,
                Float::with_val(256, angle.sin_ref()) * &r,
            );
            let w = k.exchange(&z).unwrap();
            assert!(k.exchange_inverse(&w).unwrap().dist(&z) < tol(256));
            assert!(Float::with_val(256, w.abs() - z.abs()).abs() < tol(256));
        }
    }

    #[test]
    fn translate_examples() {
        let k = golden_params(256);
        let eta = k.eta().to_float(256).unwrap();
        let lam = k.cf().lambda_float(256).unwrap();
        assert_eq!(
            k.translate(&k.point(0.0, 0.0)).unwrap(),
            Point::real(Float::with_val(256, -&eta))
        );
        assert_eq!(
            k.translate(&k.point(-1.0, 0.0)).unwrap(),
            Point::real(Float::with_val(256, &lam - 1))
        );
        let half = Float::with_val(256, &lam / 2);
        assert_eq!(k.translate(&Point::real(half.clone())).unwrap(), Point::real(half - 1));
    }

    #[test]
    fn step_on_baseline() {
        let k = golden_params(256);
        let lam = k.cf().lambda_float(256).unwrap();
        let x = Float::with_val(256, 0.3);
        assert_eq!(
            k.step(&Point::real(x.clone())).unwrap(),
            Point::real(Float::with_val(256, &x - 1))
        );
        let y = Float::with_val(256, -0.4);
        assert_eq!(
            k.step(&Point::real(y.clone())).unwrap(),
            Point::real(Float::with_val(256, &y + &lam))
        );
        let z0 = k.step(&k.point(0.0, 0.0)).unwrap();
        assert_eq!(z0.re, Float::with_val(256, -k.eta().to_float(256).unwrap()));
        assert!(z0.im.is_zero());
    }

    #[test]
    fn itinerary_of_origin_golden() {
        let k = golden_params(256);
        // 0 ↦ −Φ² ↦ −Φ² + Φ = Φ³ ↦ Φ³ − 1 ...
        assert_eq!(k.itinerary(&k.point(0.0, 0.0), 4).unwrap(), vec![0, -1, 1, -1]);
    }

    #[test]
    fn scale_conjugate_identity() {
        let k = asym(256);
        let one = Float::with_val(256, 1);
        let same = k.scale_conjugate(&one);
        assert_eq!(same.lambda(), k.map().lambda());
        assert_eq!(same.eta(), k.map().eta());
        let two = Float::with_val(256, 2);
        let conj = k.scale_conjugate(&two);
        for (re, im) in [(0.1, 0.2), (-0.3, 0.05), (0.4, 0.01), (-0.2, 0.7)] {
            let z = k.point(re, im);
            let lhs = k.step(&z.scale(&two)).unwrap().scale(&Float::with_val(256, 0.5));
            let rhs = conj.step(&z).unwrap();
            assert!(lhs.dist(&rhs) < tol(256));
            assert_eq!(k.cone_index(&z).unwrap(), k.cone_index(&z.scale(&two)).unwrap());
        }
    }

    #[test]
    fn params_validation() {
        let phi = ContinuedFraction::golden();
        assert!(TceParams::new(&["1", "0.5", "pi-2.5", "1"], &[2, 1], phi.clone(), 2, 1, 256).is_err());
        assert!(TceParams::new(&["1", "0.5", "pi-2.5", "1"], &[2, 1], phi.clone(), 0, 1, 256).is_err());
        assert!(TceParams::new(&["1", "0.5", "pi-2.4", "1"], &[2, 1], phi.clone(), 1, 1, 256).is_err());
        assert!(TceParams::new(&["1", "0.5", "pi-2.5", "1"], &[1, 1], phi.clone(), 1, 1, 256).is_err());
        assert!(TceParams::new(&["1", "0.5", "pi-2.5", "1"], &[2, 1, 3], phi.clone(), 1, 1, 256).is_err());
        // p = 2, q = 3: η = 2 − 3Φ ≈ 0.146
        assert!(TceParams::new(&["1", "0.5", "pi-2.5", "1"], &[2, 1], phi, 2, 3, 256).is_ok());
    }

    #[test]
    fn spec_roundtrip() {
        let json = r#"{"alpha":["0.5","pi/7","pi/4","17pi/28-0.5"],"tau":[2,1],"lambda":{"prefix":[1],"tail":[2]},"eta":{"p":1,"q":1}}"#;
        let spec: ParamsSpec = serde_json::from_str(json).unwrap();
        let k = TceParams::from_spec(&spec, 128).unwrap();
        assert_eq!(k.d(), 2);
        assert_eq!(serde_json::to_string(&k.to_spec()).unwrap(), json);
        let short: ParamsSpec = serde_json::from_str(
            r#"{"alpha":["1","0.5","pi-2.5","1"],"tau":[2,1],"lambda":"phi","eta":{"p":1,"q":1}}"#,
        )
        .unwrap();
        assert_eq!(
            TceParams::from_spec(&short, 128).unwrap().cf(),
            &ContinuedFraction::golden()
        );
    }

    #[test]
    fn planar_first_return_golden_y() {
        // a point well inside Y returns after one step
        let k = golden_params(256);
        let w = k
            .geometry()
            .from_uv(&Float::with_val(256, -0.2), &Float::with_val(256, 0.8));
        let z = k.exchange_inverse(&w).unwrap();
        let (h, out) = k.map().first_return_planar(&z, 100).unwrap();
        assert_eq!(h, 1);
        let expect = w.add_real(&Float::with_val(256, -k.eta().to_float(256).unwrap()));
        assert!(out.dist(&expect) < tol(256));
    }
}
