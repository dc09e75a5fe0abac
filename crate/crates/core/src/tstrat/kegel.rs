use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::defset::{Coloring, FiniteSet};
use crate::geometry::{Ball, DigitSpace, Subspace};
use crate::padic::RvValue;
use crate::riso::TspTable;

use super::verify::verify_tstrat;
use super::{Stratification, TstratError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KegelSet {
    pub point: Vec<u64>,
    /// The `xi` for which `chi` is not `dir(xi)`-translatable on
    /// `x + rv^{-1}(xi)`, in increasing order.
    pub xi: Vec<RvValue>,
    /// `v(xi)` over the set above.
    pub valuations: Vec<u32>,
}

/// The exceptional set around `x`: all `xi = (lambda, u)` with `lambda`
/// from the depth of the domain up to `m - 2` such that `chi` is not
/// translatable along `u` on the ball `x + p^lambda u + p^(lambda+1) O^n`.
pub fn kegel_xi(chi: &Coloring, x: &[u64]) -> Result<KegelSet, TstratError> {
    let ctx = chi.ctx();
    ctx.check_point(x)?;
    if !chi.ball().contains(ctx, x) {
        return Err(TstratError::DomainMismatch);
    }
    let table = TspTable::build(chi)?;
    let ds = DigitSpace::new(ctx.p(), ctx.n());
    let mut xi = vec![];
    for lambda in chi.ball().depth..ctx.m().saturating_sub(1) {
        for u in (1..ds.size()).map(|i| ds.vector(i)) {
            let step = ctx.scale_point(ctx.pow(lambda), &u);
            let ball = Ball::around(ctx, &ctx.add_points(x, &step), lambda + 1);
            if !table.tsp(&ball).contains(&u) {
                xi.push(RvValue::Leading { lambda, residue: u });
            }
        }
    }
    let valuations: BTreeSet<u32> = xi.iter().filter_map(|r| r.lambda()).collect();
    Ok(KegelSet {
        point: x.to_vec(),
        xi,
        valuations: valuations.into_iter().collect(),
    })
}

/// The largest ball around `x` inside the base ball that misses
/// `S_{<=d}`, or `None` if `x` itself lies in `S_{<=d}`.
pub fn maximal_ball(s: &Stratification, x: &[u64], d: usize) -> Option<Ball> {
    if s.label(x) <= d {
        return None;
    }
    let ctx = s.ctx();
    let layout = s.layout();
    let mins = s.min_labels();
    let base = s.ball().depth;
    (base..=ctx.m())
        .find(|&k| mins[(k - base) as usize][layout.node_of(k, x)] > d)
        .map(|k| Ball::around(ctx, x, k))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhitneyM {
    pub ball: Ball,
    pub d: usize,
    /// Valuations `v(x' - y')` of violating pairs.
    pub m: Vec<u32>,
    /// One violating pair `(x', y')` per valuation in `m`.
    pub examples: Vec<(Vec<u64>, Vec<u64>)>,
    pub pairs_checked: usize,
}

/// The valuations `v(x' - y')` over pairs `x' ∈ B ∩ S_d`, `y' ∈ B ∩ S_j`
/// (`j > d`) with `dir(x' - y')` outside `tsp_{B'}((S_i)_i)`, where `B'` is
/// the largest ball around `y'` inside `S_{>=j}`. `d` defaults to the least
/// label in `B`.
pub fn whitney_b_m(
    s: &Stratification,
    ball: &Ball,
    d: Option<usize>,
) -> Result<WhitneyM, TstratError> {
    let ctx = s.ctx();
    if !s.ball().contains_ball(ctx, ball) || ball.dim() != ctx.n() {
        return Err(TstratError::DomainMismatch);
    }
    let report = verify_tstrat(s, &Coloring::constant(ctx, s.ball()))?;
    if !report.passed() {
        return Err(TstratError::NotVerified(
            "the stratification fails verification".into(),
        ));
    }
    let least = ball
        .points(ctx)
        .map(|x| s.label(&x))
        .min()
        .expect("balls are non-empty");
    let d = d.unwrap_or(least);
    if d > least {
        return Err(TstratError::NotVerified(format!(
            "the ball meets S_{least}, so it is not inside S_>={d}"
        )));
    }
    if d < least {
        return Err(TstratError::NotVerified(format!(
            "the ball does not meet S_{d}"
        )));
    }
    let table = TspTable::build(&s.coloring())?;
    let lows: Vec<Vec<u64>> = ball.points(ctx).filter(|x| s.label(x) == d).collect();
    let highs: Vec<(Vec<u64>, Subspace)> = ball
        .points(ctx)
        .filter(|y| s.label(y) > d)
        .map(|y| {
            let j = s.label(&y);
            let b = maximal_ball(s, &y, j - 1).expect("y lies in S_j");
            let v = table.tsp(&b);
            (y, v)
        })
        .collect();
    let mut found: BTreeMap<u32, (Vec<u64>, Vec<u64>)> = BTreeMap::new();
    for x in &lows {
        for (y, v) in &highs {
            if let RvValue::Leading { lambda, residue } = ctx.rv(&ctx.sub_points(x, y)) {
                if !v.contains(&residue) {
                    found
                        .entry(lambda)
                        .or_insert_with(|| (x.clone(), y.clone()));
                }
            }
        }
    }
    Ok(WhitneyM {
        ball: ball.clone(),
        d,
        m: found.keys().copied().collect(),
        examples: found.into_values().collect(),
        pairs_checked: lows.len() * highs.len(),
    })
}

/// The span of the leading residues of all differences of points of `C`.
pub fn affdir(c: &FiniteSet) -> Result<Subspace, TstratError> {
    if c.is_empty() {
        return Err(TstratError::EmptySet);
    }
    let ctx = c.ctx();
    let pts: Vec<Vec<u64>> = c.points().collect();
    let full = Subspace::full(ctx.p(), ctx.n());
    let mut acc = Subspace::zero(ctx.p(), ctx.n());
    for (i, x) in pts.iter().enumerate() {
        for y in &pts[i + 1..] {
            if let RvValue::Leading { residue, .. } = ctx.rv(&ctx.sub_points(x, y)) {
                if !acc.contains(&residue) {
                    acc = acc.sum(&Subspace::line(ctx.p(), &residue));
                    if acc == full {
                        return Ok(acc);
                    }
                }
            }
        }
    }
    Ok(acc)
}

/// `dim affdir(C)` equals the declared dimension and some exhibition of
/// `affdir(C)` is injective on `C`.
pub fn is_subaffine(c: &FiniteSet, declared_dim: usize) -> Result<bool, TstratError> {
    let v = affdir(c)?;
    if v.dim() != declared_dim {
        return Ok(false);
    }
    let pi = v
        .exhibitions()
        .into_iter()
        .next()
        .expect("every subspace has an exhibition");
    let mut seen = BTreeSet::new();
    Ok(c.points().all(|x| seen.insert(pi.apply(&x))))
}
