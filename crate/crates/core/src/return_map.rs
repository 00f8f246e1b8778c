//! First returns to the middle cone: closed-form return times, the
//! closed-form return map on the atoms, and a brute-force oracle that
//! marches the exact baseline orbit.

use std::cmp::Ordering;

use rand::RngCore;
use rug::{Float, Integer};
use serde::Serialize;

use crate::atoms::{coordinate_guard, locate, locate_golden, smn_region, Location};
use crate::baseline::{baseline_state, BaselineWalker};
use crate::cf::SemiIndex;
use crate::error::{Error, Result};
use crate::tce::{BoundaryMode, Point, Region, TceParams};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// The largest index (in `w` order) of the half-open index set with
/// `P_{m,n} < p` or `Q_{m,n} < q`.
pub fn m0n0(kappa: &TceParams) -> Result<SemiIndex> {
    let cf = kappa.cf();
    let (p, q) = (Integer::from(kappa.p()), Integer::from(kappa.q()));
    // P and Q are nondecreasing along the w order
    let mut cur = SemiIndex::new(0, 0);
    loop {
        let next = cf.successor(cur)?;
        let pair = cf.semiconvergent(next)?;
        if pair.p < p || pair.q < q {
            cur = next;
        } else {
            return Ok(cur);
        }
    }
}

/// `h_{m,n} = (Q_{m,n} − q) + (P_{m,n} − p) + 1` for `(m, n)` in the full
/// index set with `w(m,n) >= w(m_0,n_0)`. At the threshold itself the value
/// may be nonpositive.
pub fn closed_return_time(kappa: &TceParams, idx: SemiIndex) -> Result<Integer> {
    let cf = kappa.cf();
    let threshold = m0n0(kappa)?;
    if cf.w_index(idx)? < cf.w_index(threshold)? {
        return Err(Error::IndexBelowThreshold {
            m: idx.m,
            n: idx.n,
            m0: threshold.m,
            n0: threshold.n,
        });
    }
    let pair = cf.semiconvergent(idx)?;
    Ok(pair.q - kappa.q() + pair.p - kappa.p() + 1u32)
}

fn to_u64(h: &Integer) -> Result<u64> {
    h.to_u64()
        .filter(|&v| v > 0)
        .ok_or_else(|| Error::NotInDomain(format!("return time {h} is not a positive machine integer")))
}

/// A first return `(h(z), F^{h(z)}(z))`.
#[derive(Debug, Clone)]
pub struct FirstReturn {
    pub h: u64,
    pub point: Point,
}

/// Brute-force first return with the default budget.
pub fn first_return_iter(kappa: &TceParams, z: &Point) -> Result<FirstReturn> {
    first_return_iter_budget(kappa, z, DEFAULT_BUDGET)
}

/// Brute-force first return: `F^t(z) = E(z) + F^t(0)` until the first time
/// the right-hand side re-enters `C_c`, which happens exactly when
/// `−Im E(z) cot α_{d+1} − Re E(z) <= F^t(0) <= Im E(z) cot α_0 − Re E(z)`.
pub fn first_return_iter_budget(kappa: &TceParams, z: &Point, budget: u64) -> Result<FirstReturn> {
    let geometry = kappa.geometry();
    let prec = kappa.prec();
    if kappa.map().region(z)? != Region::Middle {
        return Err(Error::NotInDomain(format!("{z:?} is not in the middle cone")));
    }
    let w = kappa.exchange(z)?;
    let lo = Float::with_val(prec, -geometry.v_coord(&w));
    let hi = Float::with_val(prec, -geometry.u_coord(&w));
    let guard = coordinate_guard(geometry, &w);
    let mut walker = BaselineWalker::new(kappa, prec)?;
    for _ in 0..budget {
        let (t, x) = walker.next_value()?;
        let d_lo = Float::with_val(prec, &x - &lo);
        let d_hi = Float::with_val(prec, &hi - &x);
        if Float::with_val(prec, d_lo.abs_ref()) <= guard || Float::with_val(prec, d_hi.abs_ref()) <= guard {
            return Err(Error::BoundaryAmbiguous(format!(
                "F^{t}({z:?}) within guard of the middle cone boundary"
            )));
        }
        if d_lo.is_sign_positive() && d_hi.is_sign_positive() {
            return Ok(FirstReturn {
                h: t,
                point: w.add_real(&x),
            });
        }
    }
    Err(Error::IterationBudgetExceeded(budget))
}

/// Closed-form first return on an atom.
#[derive(Debug, Clone)]
pub struct ClosedReturn {
    pub location: Location,
    pub h: u64,
    pub point: Point,
}

/// Return time and landing offset on `E^{-1}(S_{m,n})`: `h_{m,n+1}` and `Δ_{m,n+1}`.
pub fn atom_return(kappa: &TceParams, idx: SemiIndex) -> Result<(u64, Float)> {
    let next = SemiIndex::new(idx.m, idx.n + 1);
    let h = to_u64(&closed_return_time(kappa, next)?)?;
    let offset = kappa.cf().delta(next)?.to_float(kappa.prec())?;
    Ok((h, offset))
}

/// `R(z) = E(z) + Δ_{m,n+1}` with time `h_{m,n+1}` for `E(z) ∈ S_{m,n}`,
/// `w(m,n) > w(m_0,n_0)`.
pub fn return_map_closed(kappa: &TceParams, z: &Point) -> Result<ClosedReturn> {
    let location = locate(kappa, z)?;
    let idx = match location {
        Location::Atom(idx) => idx,
        other => return Err(Error::NotInDomain(format!("{z:?} located at {other:?}"))),
    };
    let threshold = m0n0(kappa)?;
    if idx == threshold && !threshold_atom_has_closed_form() {
        return Err(Error::NotInDomain(format!("{z:?} lies in the threshold atom S{idx}")));
    }
    let (h, offset) = atom_return(kappa, idx)?;
    let w = kappa.exchange(z)?;
    Ok(ClosedReturn {
        location,
        h,
        point: w.add_real(&offset),
    })
}

/// Whether the closed form is also applied on `S_{m_0,n_0}`.
pub const fn threshold_atom_has_closed_form() -> bool {
    true
}

/// Golden closed form on `C_c \ X`: `Y` returns after one step to `E(z) − Φ²`,
/// `S_m` (`m >= 2`) after `Fib_{m+3} − 1` steps to `E(z) − (−Φ)^{m+2}`.
pub fn return_map_closed_golden(kappa: &TceParams, z: &Point) -> Result<ClosedReturn> {
    let location = locate_golden(kappa, z)?;
    let w = kappa.exchange(z)?;
    match location {
        Location::Atom(idx) => {
            let (h, offset) = atom_return(kappa, idx)?;
            Ok(ClosedReturn {
                location,
                h,
                point: w.add_real(&offset),
            })
        }
        Location::Y => {
            let eta = kappa.eta().to_float(kappa.prec())?;
            Ok(ClosedReturn {
                location,
                h: 1,
                point: w.add_real(&Float::with_val(kappa.prec(), -eta)),
            })
        }
        other => Err(Error::NotInDomain(format!("no closed form at {other:?}"))),
    }
}

/// `|F^t(0)| >= |Δ_{m,0}|`, decided exactly.
pub fn lower_bound_check(kappa: &TceParams, m: usize, t: u64) -> Result<bool> {
    let value = baseline_state(kappa, t)?.value;
    let delta = kappa.cf().convergent_error(m as i64)?;
    let abs = |x: crate::field::ZLambda| -> Result<crate::field::ZLambda> {
        Ok(if x.sign()? == Ordering::Less { -x } else { x })
    };
    Ok(abs(value)?.cmp_exact(&abs(delta)?)? != Ordering::Less)
}

/// For even `m`: `F^t(0) >= Δ_{m,0}` or `F^t(0) <= nΔ_{m,0} + Δ_{m−1,0}`;
/// for odd `m` the inequalities flip. Decided exactly.
pub fn ineqs_check(kappa: &TceParams, idx: SemiIndex, t: u64) -> Result<bool> {
    let cf = kappa.cf();
    let value = baseline_state(kappa, t)?.value;
    let width = cf.convergent_error(idx.m as i64)?;
    let edge = cf.edge_offset(idx)?;
    let a = value.cmp_exact(&width)?;
    let b = value.cmp_exact(&edge)?;
    Ok(if idx.m.is_multiple_of(2) {
        a != Ordering::Less || b != Ordering::Greater
    } else {
        a != Ordering::Greater || b != Ordering::Less
    })
}

/// A point `z` with `E(z)` in the interior of `S_{m,n}` (box coordinates at
/// least `margin` from every edge) and `z` clear of every cone boundary.
/// Returns the point and the number of rejected draws.
pub fn sample_atom_preimage(
    kappa: &TceParams,
    idx: SemiIndex,
    rng: &mut impl RngCore,
    margin: f64,
) -> Result<(Point, u32)> {
    let atom = smn_region(kappa, idx)?;
    sample_preimage(kappa, |r| atom.sample_interior(kappa.geometry(), r, margin), rng)
}

/// Draws `w` with `draw` until `z = E^{-1}(w)` is unambiguous and maps back to `w`.
pub fn sample_preimage<R: RngCore>(
    kappa: &TceParams,
    mut draw: impl FnMut(&mut R) -> Point,
    rng: &mut R,
) -> Result<(Point, u32)> {
    let strict = kappa.with_mode(BoundaryMode::Strict);
    let tol = Float::with_val(kappa.prec(), Float::i_exp(1, 16 - kappa.prec() as i32));
    for rejected in 0..1000u32 {
        let w = draw(rng);
        let z = kappa.exchange_inverse(&w)?;
        match strict.exchange(&z) {
            Ok(back) if back.dist(&w) <= tol => return Ok((z, rejected)),
            _ => continue,
        }
    }
    Err(Error::NotInDomain("could not draw an unambiguous preimage".into()))
}

/// One row of a return-map comparison.
#[derive(Debug, Clone, Serialize)]
pub struct ReturnComparison {
    pub location: Option<Location>,
    pub h_closed: Option<u64>,
    pub h_iter: Option<u64>,
    pub deviation: Option<f64>,
    pub agree: bool,
}
