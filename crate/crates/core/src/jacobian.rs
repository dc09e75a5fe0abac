//! The Jacobian property of a polynomial `f` on a finite set `X`: a single
//! `z != 0` with `v(f(x) - f(x') - <z, x - x'>) > v(z) + v(x - x')` for all
//! `x != x'` in `X`.
//!
//! The left side is known exactly when it is below `m`. When it is not, the
//! pair still passes if the right side is below `m`, or if the difference
//! polynomial has all coefficients divisible by `p^c` with
//! `c + v(x - x')` beyond the right side. Otherwise the verdict would need
//! more digits and the check reports [`JacobianError::PrecisionExhausted`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::defset::{FiniteSet, Poly};
use crate::padic::{Context, PadicError, RvValue, Valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JacobianError {
    #[error("the inequality at {x:?}, {y:?} depends on digits beyond the precision")]
    PrecisionExhausted { x: Vec<u64>, y: Vec<u64> },
    #[error("z = 0 but f is not constant on X")]
    ZeroGradient,
    #[error("polynomial uses x{var} but n = {n}")]
    VariableOutOfRange { var: usize, n: usize },
    #[error("X needs at least two points")]
    TooFewPoints,
    #[error(transparent)]
    Padic(#[from] PadicError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JacobianWitness {
    pub z: Vec<u64>,
    pub scope: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum JacobianCheck {
    Holds,
    Fails {
        x: Vec<u64>,
        y: Vec<u64>,
        lhs: Valuation,
        rhs: Valuation,
    },
}

impl JacobianCheck {
    pub fn holds(&self) -> bool {
        *self == JacobianCheck::Holds
    }
}

fn check_vars(ctx: &Context, f: &Poly) -> Result<(), JacobianError> {
    if f.num_vars() > ctx.n() {
        return Err(JacobianError::VariableOutOfRange {
            var: f.num_vars(),
            n: ctx.n(),
        });
    }
    Ok(())
}

/// Least `c` with every coefficient of `f(x) - f(x') - <z, x - x'>` (as an
/// integer polynomial in `2n` variables) divisible by `p^c`; `None` if it is
/// the zero polynomial.
fn coefficient_valuation(ctx: &Context, f: &Poly, z: &[u64]) -> Option<u32> {
    let p = ctx.p() as i128;
    let mut coeffs: Vec<i128> = vec![];
    for (e, c) in f.terms() {
        let deg: u32 = e.iter().sum();
        if deg == 0 {
            continue;
        }
        let mut c = c as i128;
        if deg == 1 {
            let i = e.iter().position(|&k| k == 1).unwrap();
            c -= z[i] as i128;
        }
        coeffs.push(c);
    }
    for (i, &zi) in z.iter().enumerate() {
        let mut unit = vec![0u32; i + 1];
        unit[i] = 1;
        if zi != 0 && !f.terms().any(|(e, _)| e == unit.as_slice()) {
            coeffs.push(-(zi as i128));
        }
    }
    coeffs
        .into_iter()
        .filter(|&c| c != 0)
        .map(|mut c| {
            let mut v = 0;
            while c % p == 0 {
                c /= p;
                v += 1;
            }
            v
        })
        .min()
}

fn inner(ctx: &Context, z: &[u64], d: &[u64]) -> u64 {
    z.iter()
        .zip(d)
        .fold(0, |acc, (&a, &b)| ctx.add(acc, ctx.mul(a, b)))
}

/// Exhaustive pair check of the inequality for a fixed `z`.
pub fn check_jacobian(f: &Poly, x: &FiniteSet, z: &[u64]) -> Result<JacobianCheck, JacobianError> {
    let ctx = *x.ctx();
    check_vars(&ctx, f)?;
    ctx.check_point(z)?;
    let pts: Vec<Vec<u64>> = x.points().collect();
    let values: Vec<u64> = pts.iter().map(|p| f.eval(&ctx, p)).collect();
    let vz = ctx.point_valuation(z);
    if vz.is_infinite() {
        return if values.windows(2).all(|w| w[0] == w[1]) {
            Ok(JacobianCheck::Holds)
        } else {
            Err(JacobianError::ZeroGradient)
        };
    }
    let cv = coefficient_valuation(&ctx, f, z);
    let m = ctx.m() as i64;
    // the first offending pair in lexicographic pair order
    let results: Vec<Option<Result<JacobianCheck, JacobianError>>> = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            for j in i + 1..pts.len() {
                let diff = ctx.sub_points(&pts[i], &pts[j]);
                let vd = ctx.point_valuation(&diff);
                let rhs = vz.plus(vd);
                let g = ctx.sub(ctx.sub(values[i], values[j]), inner(&ctx, z, &diff));
                let lhs = ctx.valuation(g);
                let ok = match lhs {
                    Valuation::Finite(l) => Valuation::Finite(l) > rhs,
                    Valuation::Infinite if rhs.cmp_int(m).is_lt() => true,
                    Valuation::Infinite => match cv {
                        None => true,
                        Some(c) => Valuation::Finite(c).plus(vd) > rhs,
                    },
                };
                if !ok {
                    if lhs.is_infinite() {
                        return Some(Err(JacobianError::PrecisionExhausted {
                            x: pts[i].clone(),
                            y: pts[j].clone(),
                        }));
                    }
                    return Some(Ok(JacobianCheck::Fails {
                        x: pts[i].clone(),
                        y: pts[j].clone(),
                        lhs,
                        rhs,
                    }));
                }
            }
            None
        })
        .collect();
    results
        .into_iter()
        .flatten()
        .next()
        .unwrap_or(Ok(JacobianCheck::Holds))
}

/// Up to `count` vectors with the same `rv` as `z`, drawn from a generator
/// seeded by `seed`.
pub fn rv_neighbours(ctx: &Context, z: &[u64], count: usize, seed: u64) -> Vec<Vec<u64>> {
    let RvValue::Leading { lambda, .. } = ctx.rv(z) else {
        return vec![];
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = ctx.pow(lambda + 1);
    (0..count)
        .map(|_| {
            let e: Vec<u64> = z
                .iter()
                .map(|_| ctx.mul(step, rng.random_range(0..ctx.modulus())))
                .collect();
            ctx.add_points(z, &e)
        })
        .collect()
}

/// Whether every `z'` with `rv(z') = rv(z)` among `count` samples gives the
/// same verdict as `z`.
pub fn rv_invariant(
    f: &Poly,
    x: &FiniteSet,
    z: &[u64],
    count: usize,
    seed: u64,
) -> Result<bool, JacobianError> {
    let base = check_jacobian(f, x, z)?.holds();
    for z2 in rv_neighbours(x.ctx(), z, count, seed) {
        match check_jacobian(f, x, &z2) {
            Ok(c) if c.holds() != base => return Ok(false),
            Ok(_) | Err(JacobianError::PrecisionExhausted { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

/// Search for a `z`: first the gradient at the least point of `X`, then one
/// representative `p^lambda u` of every `rv` class allowed by the
/// difference quotients of pairs differing in a single coordinate.
/// Candidates whose check runs out of precision are skipped.
pub fn find_z(f: &Poly, x: &FiniteSet) -> Result<Option<JacobianWitness>, JacobianError> {
    let ctx = *x.ctx();
    check_vars(&ctx, f)?;
    if x.len() < 2 {
        return Err(JacobianError::TooFewPoints);
    }
    let pts: Vec<Vec<u64>> = x.points().collect();
    let witness = |z: Vec<u64>| JacobianWitness {
        z,
        scope: pts.clone(),
    };
    let passes = |z: &[u64]| matches!(check_jacobian(f, x, z), Ok(JacobianCheck::Holds));

    let grad = f.gradient(&ctx, &pts[0]);
    if !ctx.point_valuation(&grad).is_infinite() && passes(&grad) {
        return Ok(Some(witness(grad)));
    }
    let Some(quotients) = quotient_constraints(&ctx, f, &pts) else {
        return Ok(None);
    };
    let n = ctx.n();
    let p = ctx.p();
    let count = (p as usize).pow(n as u32);
    for lambda in 0..ctx.m() {
        let q = ctx.pow(lambda + 1);
        for idx in 1..count {
            let mut u = vec![0u64; n];
            let mut r = idx;
            for c in u.iter_mut().rev() {
                *c = (r % p as usize) as u64;
                r /= p as usize;
            }
            let z: Vec<u64> = u.iter().map(|&c| ctx.mul(c, ctx.pow(lambda))).collect();
            let fits = quotients
                .iter()
                .all(|&(i, quot, prec)| prec < lambda + 1 || quot % q == z[i] % q);
            if fits && passes(&z) {
                return Ok(Some(witness(z)));
            }
        }
    }
    Ok(None)
}

/// Difference quotients `(i, q, k)` with `q = (f(x) - f(x')) / (x_i - x'_i)`
/// known modulo `p^k`, over pairs differing only in coordinate `i`. Any
/// admissible `z` with `v(z) = lambda < k` has `z_i = q mod p^(lambda+1)`.
/// `None` when some quotient is not integral, which rules out every `z`.
fn quotient_constraints(
    ctx: &Context,
    f: &Poly,
    pts: &[Vec<u64>],
) -> Option<Vec<(usize, u64, u32)>> {
    let n = ctx.n();
    let mut out = vec![];
    for (a, x) in pts.iter().enumerate() {
        for y in &pts[a + 1..] {
            let differing: Vec<usize> = (0..n).filter(|&i| x[i] != y[i]).collect();
            let &[i] = differing.as_slice() else { continue };
            let d = ctx.sub(x[i], y[i]);
            let Valuation::Finite(vd) = ctx.valuation(d) else {
                continue;
            };
            let df = ctx.sub(f.eval(ctx, x), f.eval(ctx, y));
            if let Valuation::Finite(vf) = ctx.valuation(df) {
                if vf < vd {
                    return None;
                }
            }
            let k = ctx.m() - vd;
            let unit = ctx.inv(d / ctx.pow(vd)).expect("unit");
            let quot = ctx.mul(df / ctx.pow(vd), unit) % ctx.pow(k);
            out.push((i, quot, k));
        }
    }
    Some(out)
}
