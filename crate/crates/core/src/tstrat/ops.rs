use serde::{Deserialize, Serialize};

use crate::defset::{Coloring, FiniteSet};
use crate::geometry::{Ball, Projection};
use crate::riso::tsp;

use super::rainbow::reflects;
use super::verify::{verify_tstrat, FailureKind, VerifyReport};
use super::{Stratification, TstratError};

/// The stratification `T_i = S_{i+d} ∩ F` of the fiber `F = pi^{-1}(pi(base))`
/// inside `ball`, where `d = dim tsp_ball((S_i)_i)` and `pi` exhibits that
/// space. The fiber is identified with a ball in the complementary
/// coordinates.
pub fn induced_fiber_strat(
    s: &Stratification,
    ball: &Ball,
    pi: &Projection,
    base: &[u64],
) -> Result<Stratification, TstratError> {
    let ctx = s.ctx();
    let n = ctx.n();
    if !s.ball().contains_ball(ctx, ball) || ball.dim() != n {
        return Err(TstratError::DomainMismatch);
    }
    if base.len() != n || !ball.contains(ctx, base) {
        return Err(TstratError::FiberOutsideBall);
    }
    let v = tsp(&s.coloring(), ball)?;
    let d = v.dim();
    if !pi.exhibits(&v) {
        return Err(TstratError::NotExhibiting);
    }
    if d == n {
        return Err(TstratError::PreconditionFailed(
            "the fibers are points".into(),
        ));
    }
    let sub = ctx.with_dim(n - d)?;
    let comp = pi.complement(n);
    let fixed = pi.apply(base);
    let fiber = Ball::around(&sub, &comp.apply(base), ball.depth);
    let mut labels = Vec::with_capacity(fiber.size(&sub) as usize);
    for y in fiber.points(&sub) {
        let x = pi.join(n, &fixed, &y);
        let l = s.label(&x);
        if l < d {
            return Err(TstratError::PreconditionFailed(format!(
                "the fiber meets S_{l} with {l} < {d}"
            )));
        }
        labels.push(l - d);
    }
    Stratification::new(&sub, fiber, labels, (0..=n - d).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyOutcome {
    pub stratification: Stratification,
    pub demotions: Vec<Vec<u64>>,
    pub report: VerifyReport,
}

/// Start from `S_{dims[c]} ⊇ {chi = c}` and, while verification against
/// `chi` fails, move the least point of the lowest stratum meeting the
/// witness ball one stratum down. Every returned stratification passes
/// [`verify_tstrat`]; there is no claim of minimality.
pub fn stratify_greedy(
    chi: &Coloring,
    dims: &[usize],
    budget: usize,
) -> Result<GreedyOutcome, TstratError> {
    let ctx = chi.ctx();
    let mut labels = Vec::with_capacity(chi.colors().len());
    for &c in chi.colors() {
        match dims.get(c as usize) {
            Some(&d) if d <= ctx.n() => labels.push(d),
            Some(&d) => {
                return Err(TstratError::PreconditionFailed(format!(
                    "color {c} declared with dimension {d} > n"
                )))
            }
            None => {
                return Err(TstratError::PreconditionFailed(format!(
                    "no declared dimension for color {c}"
                )))
            }
        }
    }
    let mut s = Stratification::new(ctx, chi.ball().clone(), labels, (0..=ctx.n()).collect())?;
    let mut demotions = vec![];
    loop {
        let report = verify_tstrat(&s, chi)?;
        if report.passed() {
            return Ok(GreedyOutcome {
                stratification: s,
                demotions,
                report,
            });
        }
        if demotions.len() >= budget {
            return Err(TstratError::BudgetExhausted(Box::new(report)));
        }
        let ball = report
            .witness
            .clone()
            .expect("failing reports have a witness");
        let j = report
            .failures
            .iter()
            .find(|f| f.ball == ball && f.filter == FailureKind::Translatability)
            .map(|f| f.required_d)
            .expect("witness is a translatability failure");
        let x = ball
            .points(ctx)
            .find(|x| s.label(x) == j)
            .expect("the least label occurs in the ball");
        s.set_label(&x, j - 1);
        demotions.push(x);
    }
}

/// Combine `S` with a stratification `T` that reflects `(S, chi)`: with `d`
/// the dimension of `X`, points of `T_{<d}` keep their `T` label, other
/// points of `X` get `d`, and the rest get `max(d, label_S)`.
pub fn enhance_small_changes(
    s: &Stratification,
    t: &Stratification,
    x: &FiniteSet,
    x_dim: usize,
    chi: &Coloring,
) -> Result<Stratification, TstratError> {
    let ctx = s.ctx();
    if t.ctx() != ctx
        || t.ball() != s.ball()
        || chi.ctx() != ctx
        || chi.ball() != s.ball()
        || x.ctx() != ctx
    {
        return Err(TstratError::DomainMismatch);
    }
    if x_dim > ctx.n() {
        return Err(TstratError::PreconditionFailed(format!(
            "dim X = {x_dim} > n"
        )));
    }
    if x.points().any(|p| !s.ball().contains(ctx, &p)) {
        return Err(TstratError::PreconditionFailed(
            "X is not inside the base ball".into(),
        ));
    }
    let trivial = Coloring::constant(ctx, s.ball());
    if !verify_tstrat(s, &trivial)?.passed() {
        return Err(TstratError::PreconditionFailed(
            "S is not a t-stratification".into(),
        ));
    }
    if !verify_tstrat(t, &trivial)?.passed() {
        return Err(TstratError::PreconditionFailed(
            "T is not a t-stratification".into(),
        ));
    }
    let target = reflected_target(s, x, chi)?;
    if !reflects(t, &target)? {
        return Err(TstratError::PreconditionFailed(
            "T does not reflect (S, chi)".into(),
        ));
    }
    let labels = s
        .ball()
        .points(ctx)
        .map(|p| {
            let lt = t.label(&p);
            if lt < x_dim {
                lt
            } else if x.contains(&p) {
                x_dim
            } else {
                s.label(&p).max(x_dim)
            }
        })
        .collect();
    let out = Stratification::new(ctx, s.ball().clone(), labels, (0..=ctx.n()).collect())?;
    if !verify_tstrat(&out, &trivial)?.passed() {
        return Err(TstratError::PostconditionFailed(
            "the result is not a t-stratification".into(),
        ));
    }
    if !reflects(&out, &target)? {
        return Err(TstratError::PostconditionFailed(
            "the result does not reflect (S, chi)".into(),
        ));
    }
    Ok(out)
}

/// `(S, chi')` with `chi'` equal to `chi` on `X` and a fresh color off `X`.
pub(crate) fn reflected_target(
    s: &Stratification,
    x: &FiniteSet,
    chi: &Coloring,
) -> Result<Coloring, TstratError> {
    let fresh = chi.colors().iter().max().map_or(0, |c| c + 1);
    let extended = Coloring::from_fn(s.ctx(), s.ball(), |p| {
        if x.contains(p) {
            chi.color(p)
        } else {
            fresh
        }
    });
    Ok(s.coloring().product(&extended)?)
}

/// For a coloring of a ball in `K` (`n = 1`): the least point of every
/// minimal non-monochromatic ball. Every ball missing the result is
/// monochromatic, and no smaller set has this property.
pub fn minimal_t0(chi: &Coloring) -> Result<FiniteSet, TstratError> {
    let ctx = chi.ctx();
    if ctx.n() != 1 {
        return Err(TstratError::NeedsDimensionOne(ctx.n()));
    }
    let layout = chi.layout();
    let fan = ctx.residue_count();
    // color of each node if monochromatic
    let mut level: Vec<Option<u32>> = chi.tree_colors().into_iter().map(Some).collect();
    let mut out = vec![];
    for k in (chi.ball().depth..ctx.m()).rev() {
        let up: Vec<Option<u32>> = level
            .chunks(fan)
            .map(|c| {
                if c.iter().all(|&x| x.is_some() && x == c[0]) {
                    c[0]
                } else {
                    None
                }
            })
            .collect();
        for (node, col) in up.iter().enumerate() {
            let kids = &level[node * fan..(node + 1) * fan];
            if col.is_none() && kids.iter().all(|x| x.is_some()) {
                out.push(layout.node_ball(k, node).base_point());
            }
        }
        level = up;
    }
    Ok(FiniteSet::from_points(ctx, out)?)
}
