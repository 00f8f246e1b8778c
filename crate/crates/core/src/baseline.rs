//! Exact orbit of the origin on the real line,
//! `F^t(0) = −η + b_t λ − a_t` with `a_t + b_t + 1 = t`.

use std::cmp::Ordering;
use std::sync::RwLock;

use rug::{Float, Integer};

use crate::error::Result;
use crate::field::ZLambda;
use crate::tce::TceParams;

/// One point `F^t(0)` of the baseline orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineState {
    pub t: u64,
    pub a: u64,
    pub b: u64,
    pub value: ZLambda,
}

/// Memo of `a_t` for `t >= 1` (`b_t = t − 1 − a_t`).
#[derive(Debug, Default)]
pub struct OrbitCache {
    a: RwLock<Vec<u64>>,
}

impl OrbitCache {
    pub fn new() -> Self {
        OrbitCache {
            a: RwLock::new(Vec::new()),
        }
    }
}

const FILTER_PREC: u32 = 192;

/// Sign of `(b + q)λ − (a + p)`, by a float filter with an exact fallback.
fn value_sign(kappa: &TceParams, a: u64, b: u64, lambda: &Float) -> Result<Ordering> {
    let big_b = b + kappa.q();
    let big_a = a + kappa.p();
    let x = Float::with_val(FILTER_PREC, lambda * big_b) - big_a;
    // λ carries relative error 2^-192, so the product is off by at most B·2^-191
    let margin = Float::with_val(FILTER_PREC, Float::i_exp(1, 24 - FILTER_PREC as i32)) * big_b;
    if Float::with_val(FILTER_PREC, x.abs_ref()) > margin {
        return Ok(if x.is_sign_positive() {
            Ordering::Greater
        } else {
            Ordering::Less
        });
    }
    ZLambda::from_integers(kappa.cf(), -Integer::from(big_a), Integer::from(big_b)).sign()
}

/// `a_t` for `1 <= t <= t_max`, extending the memo as needed.
fn a_values(kappa: &TceParams, t_max: u64) -> Result<Vec<u64>> {
    let cache = kappa.orbit_cache();
    {
        let table = cache.a.read().expect("orbit cache poisoned");
        if table.len() as u64 >= t_max {
            return Ok(table[..t_max as usize].to_vec());
        }
    }
    let mut table = cache.a.write().expect("orbit cache poisoned");
    extend(kappa, &mut table, t_max)?;
    Ok(table[..t_max as usize].to_vec())
}

fn extend(kappa: &TceParams, table: &mut Vec<u64>, t_max: u64) -> Result<()> {
    if table.is_empty() {
        table.push(0);
    }
    let lambda = kappa.cf().lambda_float(FILTER_PREC)?;
    while (table.len() as u64) < t_max {
        let t = table.len() as u64;
        let a = table[t as usize - 1];
        let b = t - 1 - a;
        let next = match value_sign(kappa, a, b, &lambda)? {
            Ordering::Greater => a + 1,
            _ => a,
        };
        table.push(next);
    }
    Ok(())
}

/// `a_t` for a single `t >= 1`.
pub fn a_at(kappa: &TceParams, t: u64) -> Result<u64> {
    assert!(t >= 1);
    let cache = kappa.orbit_cache();
    {
        let table = cache.a.read().expect("orbit cache poisoned");
        if let Some(&a) = table.get(t as usize - 1) {
            return Ok(a);
        }
    }
    let mut table = cache.a.write().expect("orbit cache poisoned");
    extend(kappa, &mut table, t)?;
    Ok(table[t as usize - 1])
}

fn state(kappa: &TceParams, t: u64, a: u64) -> BaselineState {
    let b = t - 1 - a;
    let value = ZLambda::from_integers(
        kappa.cf(),
        -(Integer::from(a) + kappa.p()),
        Integer::from(b) + kappa.q(),
    );
    BaselineState { t, a, b, value }
}

/// `F^t(0)` for `t = 1, ..., t_max`.
pub fn baseline_orbit(kappa: &TceParams, t_max: u64) -> Result<Vec<BaselineState>> {
    let a = a_values(kappa, t_max)?;
    Ok(a.iter()
        .enumerate()
        .map(|(i, &a)| state(kappa, i as u64 + 1, a))
        .collect())
}

/// `F^t(0)` for a single `t >= 1`.
pub fn baseline_state(kappa: &TceParams, t: u64) -> Result<BaselineState> {
    Ok(state(kappa, t, a_at(kappa, t)?))
}

/// Float value of `F^t(0)` from `(a_t, b_t)`, with `λ` taken at `prec + 64` bits.
pub fn baseline_float(kappa: &TceParams, t: u64, prec: u32) -> Result<Float> {
    let a = a_at(kappa, t)?;
    let b = t - 1 - a;
    let lambda = kappa.cf().lambda_float(prec + 64)?;
    let x = Float::with_val(prec + 64, &lambda * (b + kappa.q())) - (a + kappa.p());
    Ok(Float::with_val(prec, x))
}

/// Sequential float evaluator for `F^t(0)`, `t = 1, 2, ...`.
pub(crate) struct BaselineWalker<'a> {
    kappa: &'a TceParams,
    lambda: Float,
    prec: u32,
    t: u64,
    chunk: Vec<u64>,
    chunk_start: u64,
}

impl<'a> BaselineWalker<'a> {
    pub fn new(kappa: &'a TceParams, prec: u32) -> Result<Self> {
        Ok(BaselineWalker {
            kappa,
            lambda: kappa.cf().lambda_float(prec + 64)?,
            prec,
            t: 0,
            chunk: Vec::new(),
            chunk_start: 1,
        })
    }

    /// Advances to the next `t` and returns `(t, F^t(0))`.
    pub fn next_value(&mut self) -> Result<(u64, Float)> {
        self.t += 1;
        let offset = self.t - self.chunk_start;
        if offset as usize >= self.chunk.len() {
            let want = (self.t * 2).max(1024);
            self.chunk = a_values(self.kappa, want)?;
            self.chunk_start = 1;
        }
        let a = self.chunk[(self.t - self.chunk_start) as usize];
        let b = self.t - 1 - a;
        let x = Float::with_val(self.prec + 64, &self.lambda * (b + self.kappa.q())) - (a + self.kappa.p());
        Ok((self.t, Float::with_val(self.prec, x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::{ContinuedFraction, SemiIndex};
    use crate::tce::{golden_params, Point};

    #[test]
    fn first_step_is_minus_eta() {
        let k = golden_params(128);
        let s = baseline_state(&k, 1).unwrap();
        assert_eq!((s.a, s.b), (0, 0));
        assert_eq!(s.value, -k.eta().clone());
    }

    #[test]
    fn counts_add_up() {
        let cf = ContinuedFraction::periodic(vec![], vec![1, 2]).unwrap();
        let k = golden_params(128).with_translation(cf, 2, 3).unwrap();
        let orbit = baseline_orbit(&k, 10_000).unwrap();
        for s in &orbit {
            assert_eq!(s.a + s.b + 1, s.t);
            assert!(!s.value.is_zero());
        }
        // update rule
        for pair in orbit.windows(2).take(500) {
            match pair[0].value.sign().unwrap() {
                Ordering::Less => assert_eq!(pair[1].b, pair[0].b + 1),
                _ => assert_eq!(pair[1].a, pair[0].a + 1),
            }
        }
    }

    #[test]
    fn golden_orbit_hits_delta_2_at_h2() {
        // h_2 = Fib_4 − 1 = 2
        let k = golden_params(128);
        let s = baseline_state(&k, 2).unwrap();
        assert_eq!(s.value, k.cf().delta(SemiIndex::new(2, 0)).unwrap());
        assert_eq!(s.value, ZLambda::from_integers(k.cf(), -1, 2));
    }

    #[test]
    fn float_values_track_planar_iteration() {
        let k = golden_params(256);
        let mut z = Point::zero(256);
        let mut walker = BaselineWalker::new(&k, 256).unwrap();
        for t in 1..=200u64 {
            z = k.step(&z).unwrap();
            let (tt, v) = walker.next_value().unwrap();
            assert_eq!(tt, t);
            assert!(z.im.is_zero());
            let diff = Float::with_val(256, &z.re - &v).abs();
            assert!(diff < Float::with_val(64, Float::i_exp(1, -230)), "t={t}");
            assert_eq!(baseline_float(&k, t, 256).unwrap(), v);
        }
    }
}
