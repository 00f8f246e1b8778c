//! Atoms `S_{m,n}` of the return partition, the staircase regions `U_{k,l}`
//! and the golden sets `X`, `Y`, all living in the `E`-image.
//!
//! Every region here is a box in the coordinates `u(z) = Re z − Im z cot α_0`
//! and `v(z) = Re z + Im z cot α_{d+1}`: translates of `C_0` are `u > c`,
//! translates of `C_{d+1}` are `v < c`, and `C_c` is `u <= 0, v >= 0`.

use rand::RngCore;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::cf::{ContinuedFraction, SemiIndex};
use crate::error::{Error, Result};
use crate::field::ZLambda;
use crate::sample::uniform;
use crate::tce::{ConeGeometry, Point, TceParams};

/// Which family of lines a constraint belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeFamily {
    /// Lines parallel to the boundary of `C_0` (angle `α_0`), level sets of `u`.
    First,
    /// Lines parallel to the boundary of `C_{d+1}` (angle `π − α_{d+1}`), level sets of `v`.
    Last,
}

/// One side of a box edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Greater,
    GreaterEq,
    Less,
    LessEq,
}

/// A half-plane `coord(z) ⋈ anchor` where the boundary line crosses the
/// real axis at `anchor`.
#[derive(Debug, Clone)]
pub struct HalfPlane {
    pub family: EdgeFamily,
    pub anchor: ZLambda,
    pub relation: Relation,
    anchor_f: Float,
}

/// Outcome of a membership test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Outside,
    /// Within the guard tolerance of an edge.
    Ambiguous,
}

impl HalfPlane {
    fn new(family: EdgeFamily, anchor: ZLambda, relation: Relation, prec: u32) -> Result<Self> {
        let anchor_f = anchor.to_float(prec)?;
        Ok(HalfPlane {
            family,
            anchor,
            relation,
            anchor_f,
        })
    }

    pub fn anchor_float(&self) -> &Float {
        &self.anchor_f
    }

    /// Test on the precomputed coordinate value.
    pub fn test(&self, coord: &Float, guard: &Float) -> Membership {
        let diff = Float::with_val(coord.prec(), coord - &self.anchor_f);
        if Float::with_val(coord.prec(), diff.abs_ref()) <= *guard {
            return Membership::Ambiguous;
        }
        let above = diff.is_sign_positive();
        let inside = match self.relation {
            Relation::Greater | Relation::GreaterEq => above,
            Relation::Less | Relation::LessEq => !above,
        };
        if inside {
            Membership::Inside
        } else {
            Membership::Outside
        }
    }
}

/// `lo ⋈ coord ⋈ hi` with either end possibly missing.
#[derive(Debug, Clone)]
pub struct UvBox {
    pub constraints: Vec<HalfPlane>,
}

impl UvBox {
    /// Membership of a point given by its `(u, v)` coordinates.
    pub fn contains_uv(&self, u: &Float, v: &Float, guard: &Float) -> Membership {
        let mut ambiguous = false;
        for c in &self.constraints {
            let x = match c.family {
                EdgeFamily::First => u,
                EdgeFamily::Last => v,
            };
            match c.test(x, guard) {
                Membership::Outside => return Membership::Outside,
                Membership::Ambiguous => ambiguous = true,
                Membership::Inside => {}
            }
        }
        if ambiguous {
            Membership::Ambiguous
        } else {
            Membership::Inside
        }
    }

    pub fn contains(&self, geometry: &ConeGeometry, w: &Point) -> Membership {
        let scale = coordinate_guard(geometry, w);
        self.contains_uv(&geometry.u_coord(w), &geometry.v_coord(w), &scale)
    }

    fn bound(&self, family: EdgeFamily, lower: bool) -> Option<&HalfPlane> {
        self.constraints.iter().find(|c| {
            c.family == family
                && matches!(
                    (c.relation, lower),
                    (Relation::Greater | Relation::GreaterEq, true) | (Relation::Less | Relation::LessEq, false)
                )
        })
    }

    /// `(u_lo, u_hi, v_lo, v_hi)` when all four are present.
    pub fn bounds(&self) -> Option<(&Float, &Float, &Float, &Float)> {
        Some((
            self.bound(EdgeFamily::First, true)?.anchor_float(),
            self.bound(EdgeFamily::First, false)?.anchor_float(),
            self.bound(EdgeFamily::Last, true)?.anchor_float(),
            self.bound(EdgeFamily::Last, false)?.anchor_float(),
        ))
    }

    /// The four corners `(u_lo,v_lo), (u_hi,v_lo), (u_hi,v_hi), (u_lo,v_hi)`
    /// for a bounded box.
    pub fn vertices(&self, geometry: &ConeGeometry) -> Option<[Point; 4]> {
        let (ul, uh, vl, vh) = self.bounds()?;
        Some([
            geometry.from_uv(ul, vl),
            geometry.from_uv(uh, vl),
            geometry.from_uv(uh, vh),
            geometry.from_uv(ul, vh),
        ])
    }

    /// Point with relative box coordinates `(s, t) ∈ [0,1]²`.
    pub fn point_at(&self, geometry: &ConeGeometry, s: &Float, t: &Float) -> Option<Point> {
        let (ul, uh, vl, vh) = self.bounds()?;
        let p = geometry.prec();
        let u = Float::with_val(p, ul + Float::with_val(p, Float::with_val(p, uh - ul) * s));
        let v = Float::with_val(p, vl + Float::with_val(p, Float::with_val(p, vh - vl) * t));
        Some(geometry.from_uv(&u, &v))
    }
}

/// Guard for coordinate comparisons: `2^(8−prec)` scaled by `max(1, |w|)`.
pub fn coordinate_guard(geometry: &ConeGeometry, w: &Point) -> Float {
    let p = geometry.prec();
    let size = Float::with_val(p, w.re.abs_ref()).max(&Float::with_val(p, w.im.abs_ref()));
    let size = size.max(&Float::with_val(p, 1));
    Float::with_val(p, geometry.guard() * size)
}

fn edge_offset_pair(cf: &ContinuedFraction, idx: SemiIndex) -> Result<(ZLambda, ZLambda)> {
    let width = cf.convergent_error(idx.m as i64)?;
    let edge = cf.edge_offset(idx)?;
    Ok((width, edge))
}

/// The parallelogram `S_{m,n}` in the `E`-image.
#[derive(Debug, Clone)]
pub struct Parallelogram {
    pub index: SemiIndex,
    pub region: UvBox,
    pub vertices: [Point; 4],
}

impl Parallelogram {
    pub fn even(&self) -> bool {
        self.index.m.is_multiple_of(2)
    }

    /// Lengths of the sides parallel to `∂C_0` and to `∂C_{d+1}`.
    pub fn side_lengths(&self) -> (Float, Float) {
        (
            self.vertices[1].dist(&self.vertices[2]),
            self.vertices[0].dist(&self.vertices[1]),
        )
    }

    /// Predicted side lengths: `|Δ_{m,0}| sin α_{d+1} / sin(α_0 + α_{d+1})`
    /// along `∂C_0` and `|Δ_{m,0}| sin α_0 / sin(α_0 + α_{d+1})` along `∂C_{d+1}`.
    pub fn predicted_side_lengths(&self, geometry: &ConeGeometry, cf: &ContinuedFraction) -> Result<(Float, Float)> {
        let p = geometry.prec();
        let width = cf.convergent_error(self.index.m as i64)?.to_float(p)?.abs();
        let a0 = &geometry.alpha()[0];
        let al = &geometry.alpha()[geometry.d() + 1];
        let denom = Float::with_val(p, a0 + al).sin();
        let first = Float::with_val(p, &width * Float::with_val(p, al.sin_ref())) / &denom;
        let last = Float::with_val(p, &width * Float::with_val(p, a0.sin_ref())) / &denom;
        Ok((first, last))
    }

    pub fn contains(&self, geometry: &ConeGeometry, w: &Point) -> Membership {
        self.region.contains(geometry, w)
    }

    /// A point of the atom whose box coordinates lie in `[margin, 1 − margin]`.
    pub fn sample_interior(&self, geometry: &ConeGeometry, rng: &mut impl RngCore, margin: f64) -> Point {
        let p = geometry.prec();
        let m = Float::with_val(p, margin);
        let span = Float::with_val(p, 1 - Float::with_val(p, &m * 2));
        let s = Float::with_val(p, &m + Float::with_val(p, &span * uniform(rng, p)));
        let t = Float::with_val(p, &m + Float::with_val(p, &span * uniform(rng, p)));
        self.region.point_at(geometry, &s, &t).expect("atoms are bounded")
    }

    pub fn to_polygon(&self) -> Polygon {
        Polygon {
            index: Some([self.index.m as u64, self.index.n]),
            label: format!("S{}", self.index),
            vertices: self.vertices.iter().map(|v| [v.re.to_f64(), v.im.to_f64()]).collect(),
        }
    }
}

/// JSON export `{"index": [m, n], "vertices": [[re, im], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub index: Option<[u64; 2]>,
    pub label: String,
    pub vertices: Vec<[f64; 2]>,
}

fn make_box(
    prec: u32,
    u_lo: Option<(ZLambda, Relation)>,
    u_hi: Option<(ZLambda, Relation)>,
    v_lo: Option<(ZLambda, Relation)>,
    v_hi: Option<(ZLambda, Relation)>,
) -> Result<UvBox> {
    let mut constraints = Vec::with_capacity(4);
    for (family, bound) in [
        (EdgeFamily::First, u_lo),
        (EdgeFamily::First, u_hi),
        (EdgeFamily::Last, v_lo),
        (EdgeFamily::Last, v_hi),
    ] {
        if let Some((anchor, rel)) = bound {
            constraints.push(HalfPlane::new(family, anchor, rel, prec)?);
        }
    }
    Ok(UvBox { constraints })
}

/// `S_{m,n}` for `(m, n)` in the half-open index set.
///
/// Even `m`: `(C_0 − Δ_{m,0}) ∩ (C_c − Δ_{m,n+1}) ∩ C_c ∩ (C_{d+1} − D)`;
/// odd `m`: `(C_0 − D) ∩ C_c ∩ (C_c − Δ_{m,n+1}) ∩ (C_{d+1} − Δ_{m,0})`,
/// with `D = nΔ_{m,0} + Δ_{m−1,0}`.
pub fn smn_region(kappa: &TceParams, idx: SemiIndex) -> Result<Parallelogram> {
    smn_region_for(kappa.geometry(), kappa.cf(), idx)
}

pub fn smn_region_for(geometry: &ConeGeometry, cf: &ContinuedFraction, idx: SemiIndex) -> Result<Parallelogram> {
    if !cf.contains_strict(idx)? {
        return Err(Error::IndexOutOfRange {
            m: idx.m,
            n: idx.n,
            limit: cf.quotient(idx.m + 1)? - 1,
        });
    }
    let prec = geometry.prec();
    let (width, edge) = edge_offset_pair(cf, idx)?;
    let next = cf.delta(SemiIndex::new(idx.m, idx.n + 1))?;
    let zero = ZLambda::zero(cf);
    let region = if idx.m.is_multiple_of(2) {
        make_box(
            prec,
            Some((-width, Relation::Greater)),
            Some((zero, Relation::LessEq)),
            Some((-next, Relation::GreaterEq)),
            Some((-edge, Relation::Less)),
        )?
    } else {
        make_box(
            prec,
            Some((-edge, Relation::Greater)),
            Some((-next, Relation::LessEq)),
            Some((zero, Relation::GreaterEq)),
            Some((-width, Relation::Less)),
        )?
    };
    let vertices = region.vertices(geometry).expect("atoms are bounded");
    Ok(Parallelogram {
        index: idx,
        region,
        vertices,
    })
}

/// The convex region `U_{k,l}`, the union of `{0}` and all `S_{m,n}` with
/// `w(m,n) >= w(k,l)`.
#[derive(Debug, Clone)]
pub struct URegion {
    pub anchor: SemiIndex,
    pub region: UvBox,
    pub vertices: [Point; 4],
}

impl URegion {
    pub fn contains(&self, geometry: &ConeGeometry, w: &Point) -> Membership {
        self.region.contains(geometry, w)
    }

    pub fn sample_interior(&self, geometry: &ConeGeometry, rng: &mut impl RngCore, margin: f64) -> Point {
        let p = geometry.prec();
        let m = Float::with_val(p, margin);
        let span = Float::with_val(p, 1 - Float::with_val(p, &m * 2));
        let s = Float::with_val(p, &m + Float::with_val(p, &span * uniform(rng, p)));
        let t = Float::with_val(p, &m + Float::with_val(p, &span * uniform(rng, p)));
        self.region.point_at(geometry, &s, &t).expect("U regions are bounded")
    }
}

/// `U_{k,l}`: even `k`: `(C_0 − Δ_{k,0}) ∩ C_c ∩ (C_{d+1} − D)`;
/// odd `k`: `(C_0 − D) ∩ C_c ∩ (C_{d+1} − Δ_{k,0})`, with `D = lΔ_{k,0} + Δ_{k−1,0}`.
pub fn u_region(kappa: &TceParams, anchor: SemiIndex) -> Result<URegion> {
    u_region_for(kappa.geometry(), kappa.cf(), anchor)
}

pub fn u_region_for(geometry: &ConeGeometry, cf: &ContinuedFraction, anchor: SemiIndex) -> Result<URegion> {
    let prec = geometry.prec();
    let (width, edge) = edge_offset_pair(cf, anchor)?;
    let zero = ZLambda::zero(cf);
    let region = if anchor.m.is_multiple_of(2) {
        make_box(
            prec,
            Some((-width, Relation::Greater)),
            Some((zero.clone(), Relation::LessEq)),
            Some((zero, Relation::GreaterEq)),
            Some((-edge, Relation::Less)),
        )?
    } else {
        make_box(
            prec,
            Some((-edge, Relation::Greater)),
            Some((zero.clone(), Relation::LessEq)),
            Some((zero, Relation::GreaterEq)),
            Some((-width, Relation::Less)),
        )?
    };
    let vertices = region.vertices(geometry).expect("U regions are bounded");
    Ok(URegion {
        anchor,
        region,
        vertices,
    })
}

/// The golden sets `X = C_c ∩ (C_c − Φ³) ∩ (C_{d+1} + Φ²)` and
/// `Y = C_c ∩ (C_c + Φ²)`.
pub fn golden_xy(kappa: &TceParams) -> Result<(UvBox, UvBox)> {
    let cf = kappa.cf();
    let prec = kappa.prec();
    // Φ³ = 2Φ − 1, Φ² = 1 − Φ
    let phi3 = ZLambda::from_integers(cf, -1, 2);
    let phi2 = ZLambda::from_integers(cf, 1, -1);
    let zero = ZLambda::zero(cf);
    let x = make_box(
        prec,
        None,
        Some((-phi3, Relation::LessEq)),
        Some((zero.clone(), Relation::GreaterEq)),
        Some((phi2.clone(), Relation::Less)),
    )?;
    let y = make_box(
        prec,
        None,
        Some((zero, Relation::LessEq)),
        Some((phi2, Relation::GreaterEq)),
        None,
    )?;
    Ok((x, y))
}

/// Whether `κ` is the golden example (`λ = Φ`, `η = Φ²`).
pub fn is_golden(kappa: &TceParams) -> bool {
    kappa.cf() == &ContinuedFraction::golden() && kappa.p() == 1 && kappa.q() == 1
}

/// Where a point of `C_c` falls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Location {
    Atom(SemiIndex),
    X,
    Y,
    /// `E(z) = 0`.
    Origin,
    /// In `C_c` but outside the region covered by the atoms.
    Outside,
}

const WALK_CAP: usize = 100_000;

/// Walks the staircase `U_{k,l} = S_{k,l} ∪ U_{succ(k,l)}` from `start`,
/// assuming `(u, v)` already lies in `U_start`.
fn walk(
    geometry: &ConeGeometry,
    cf: &ContinuedFraction,
    start: SemiIndex,
    u: &Float,
    v: &Float,
    guard: &Float,
) -> Result<Location> {
    let prec = geometry.prec();
    let mut idx = start;
    for _ in 0..WALK_CAP {
        // the cut separating S_{k,l} from U_{succ(k,l)}
        let next = cf.delta(SemiIndex::new(idx.m, idx.n + 1))?;
        let cut = HalfPlane::new(
            if idx.m.is_multiple_of(2) {
                EdgeFamily::Last
            } else {
                EdgeFamily::First
            },
            -next,
            if idx.m.is_multiple_of(2) {
                Relation::GreaterEq
            } else {
                Relation::LessEq
            },
            prec,
        )?;
        let coord = if idx.m.is_multiple_of(2) { v } else { u };
        match cut.test(coord, guard) {
            Membership::Inside => return Ok(Location::Atom(idx)),
            Membership::Ambiguous => {
                return Err(Error::BoundaryAmbiguous(format!("point on the cut of S{idx}")));
            }
            Membership::Outside => {}
        }
        let width = cf.convergent_error(idx.m as i64)?.to_float(prec)?;
        if Float::with_val(prec, width.abs_ref()) <= *guard {
            return Err(Error::BoundaryAmbiguous("point within guard of the origin".into()));
        }
        idx = cf.successor(idx)?;
    }
    Err(Error::BoundaryAmbiguous("atom search did not terminate".into()))
}

fn uv_of(kappa: &TceParams, z: &Point) -> Result<(Point, Float, Float, Float)> {
    let geometry = kappa.geometry();
    let w = kappa.exchange(z)?;
    let guard = coordinate_guard(geometry, &w);
    let u = geometry.u_coord(&w);
    let v = geometry.v_coord(&w);
    let neg_guard = Float::with_val(geometry.prec(), -&guard);
    if u > guard || v < neg_guard {
        return Err(Error::NotInDomain(format!("{z:?} is not in the middle cone")));
    }
    Ok((w, u, v, guard))
}

/// Locates `E(z)` among the atoms `S_{m,n}` with `w(m,n) >= w(anchor)`.
pub fn locate_from(kappa: &TceParams, z: &Point, anchor: SemiIndex) -> Result<Location> {
    let (w, u, v, guard) = uv_of(kappa, z)?;
    if w.is_zero() {
        return Ok(Location::Origin);
    }
    let region = u_region(kappa, anchor)?;
    match region.region.contains_uv(&u, &v, &guard) {
        Membership::Outside => Ok(Location::Outside),
        Membership::Ambiguous => Err(Error::BoundaryAmbiguous(format!(
            "E({z:?}) within guard of the boundary of U{anchor}"
        ))),
        Membership::Inside => walk(kappa.geometry(), kappa.cf(), anchor, &u, &v, &guard),
    }
}

/// Locates `E(z)` among the atoms of `U(κ)`, anchored at the threshold `(m_0, n_0)`.
pub fn locate(kappa: &TceParams, z: &Point) -> Result<Location> {
    locate_from(kappa, z, crate::return_map::m0n0(kappa)?)
}

/// Golden partition of `C_c` into `X`, `Y` and `S_m` for `m >= 2`.
pub fn locate_golden(kappa: &TceParams, z: &Point) -> Result<Location> {
    if !is_golden(kappa) {
        return Err(Error::InvalidParams("golden partition needs λ = Φ and η = Φ²".into()));
    }
    let (w, u, v, guard) = uv_of(kappa, z)?;
    if w.is_zero() {
        return Ok(Location::Origin);
    }
    let (x, y) = golden_xy(kappa)?;
    let mut ambiguous = false;
    for (set, loc) in [(&y, Location::Y), (&x, Location::X)] {
        match set.contains_uv(&u, &v, &guard) {
            Membership::Inside => return Ok(loc),
            Membership::Ambiguous => ambiguous = true,
            Membership::Outside => {}
        }
    }
    if ambiguous {
        return Err(Error::BoundaryAmbiguous(format!("E({z:?}) on the boundary of X or Y")));
    }
    // the rest of C_c is U_{2,0}
    walk(kappa.geometry(), kappa.cf(), SemiIndex::new(2, 0), &u, &v, &guard)
}

/// Checks `S_{m+j,n}(λ) / |Δ_{m−1,0}(λ)| = S_{j,n}(g^m λ)` vertex by vertex.
pub fn smn_scaling_check(kappa: &TceParams, m: usize, j: usize, n: u64) -> Result<(bool, Float)> {
    let geometry = kappa.geometry();
    let cf = kappa.cf();
    let prec = geometry.prec();
    let big = smn_region_for(geometry, cf, SemiIndex::new(m + j, n))?;
    let shifted = cf.gauss_shift(m)?;
    let small = smn_region_for(geometry, &shifted, SemiIndex::new(j, n))?;
    let factor = cf.convergent_error(m as i64 - 1)?.to_float(prec + 32)?.abs();
    let inv = Float::with_val(prec, 1 / factor);
    let mut max_dev = Float::with_val(prec, 0);
    for (a, b) in big.vertices.iter().zip(small.vertices.iter()) {
        let d = a.scale(&inv).dist(b);
        if d > max_dev {
            max_dev = d;
        }
    }
    let tol = Float::with_val(prec, Float::i_exp(1, 16 - prec as i32));
    Ok((max_dev <= tol, max_dev))
}
