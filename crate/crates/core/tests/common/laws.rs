//! Laws of translatability on sampled small instances.

use rand::seq::IndexedRandom;
use rand::Rng;
use tstrat::defset::{Coloring, FiniteSet};
use tstrat::geometry::{Ball, Lift, Projection, Subspace};
use tstrat::padic::Context;
use tstrat::riso::{
    check_straightener, decide_translatable, is_translatable, translatability, tsp,
    Translatability, TranslateOptions,
};

use super::lemmas::Check;
use super::{random_coloring, rng, structured_coloring};

fn sample_coloring(c: &Context, r: &mut rand_chacha::ChaCha8Rng, i: usize) -> Coloring {
    let root = Ball::root(c.n());
    if i % 2 == 0 {
        structured_coloring(c, &root, r)
    } else {
        random_coloring(c, &root, 2, r)
    }
}

fn random_ball(c: &Context, r: &mut rand_chacha::ChaCha8Rng) -> Ball {
    let depth = r.random_range(0..c.m());
    Ball::around(c, &c.random_point(r), depth)
}

/// Random lifts give the same answer as the canonical one.
pub fn lift_independence(instances: usize, lifts: usize, seed: u64) -> Check {
    let mut ch = Check::new("lift independence");
    let mut r = rng(seed);
    let contexts = [
        Context::new(2, 3, 2).unwrap(),
        Context::new(3, 2, 2).unwrap(),
    ];
    for i in 0..instances {
        let c = contexts[i % 2];
        let chi = sample_coloring(&c, &mut r, i / 2);
        let ball = random_ball(&c, &mut r);
        // alternate between the translation space and a random line
        let v = if i % 4 < 2 {
            tsp(&chi, &ball).unwrap()
        } else {
            Subspace::lines(c.p(), c.n())
                .choose(&mut r)
                .unwrap()
                .clone()
        };
        let expected = decide_translatable(&chi, &ball, &v).unwrap();
        for _ in 0..lifts {
            let lift = Lift::random(&c, &v, &mut r);
            let opts = TranslateOptions {
                prefilters: false,
                projection: None,
                lift: Some(lift),
            };
            let ok = match translatability(&chi, &ball, &v, &opts).unwrap() {
                Translatability::Translatable(s) => expected && check_straightener(&chi, &s),
                Translatability::Rejected(_) => !expected,
            };
            ch.record(ok, || format!("ball {ball} V={:?}", v.basis()));
        }
    }
    ch
}

/// Translatable lines sum to a translatable plane, each answer from the
/// straightener search.
pub fn sum_closure(instances: usize, seed: u64) -> Check {
    let mut ch = Check::new("sum closure");
    let c = Context::new(2, 2, 2).unwrap();
    let lines = Subspace::lines(2, 2);
    let mut r = rng(seed);
    for i in 0..instances {
        let chi = sample_coloring(&c, &mut r, i);
        let ball = random_ball(&c, &mut r);
        let good: Vec<&Subspace> = lines
            .iter()
            .filter(|l| is_translatable(&chi, &ball, l).unwrap().is_some())
            .collect();
        for (a, l1) in good.iter().enumerate() {
            for l2 in &good[a + 1..] {
                let sum = l1.sum(l2);
                let ok = is_translatable(&chi, &ball, &sum)
                    .unwrap()
                    .is_some_and(|s| check_straightener(&chi, &s));
                ch.record(ok, || {
                    format!("ball {ball} lines {:?} {:?}", l1.basis(), l2.basis())
                });
            }
        }
    }
    ch
}

fn sub_balls(c: &Context, ball: &Ball) -> Vec<Ball> {
    let mut out = vec![];
    let mut stack = ball.children(c);
    while let Some(b) = stack.pop() {
        if b.depth < c.m() {
            stack.extend(b.children(c));
        }
        out.push(b);
    }
    out
}

/// Translatability on a ball passes to every sub-ball.
pub fn monotonicity(instances: usize, seed: u64) -> Check {
    let mut ch = Check::new("sub-ball monotonicity");
    let c = Context::new(3, 3, 2).unwrap();
    let mut r = rng(seed);
    for i in 0..instances {
        let chi = sample_coloring(&c, &mut r, i);
        let ball = Ball::around(&c, &c.random_point(&mut r), r.random_range(0..2));
        let v = tsp(&chi, &ball).unwrap();
        for b in sub_balls(&c, &ball) {
            ch.record(decide_translatable(&chi, &b, &v).unwrap(), || {
                format!("{ball} -> {b}")
            });
        }
    }
    ch
}

/// The coloring restricted to the fiber of `rho` over `y`, as a coloring of
/// a ball in the complementary coordinates.
fn fiber_coloring(
    chi: &Coloring,
    ball: &Ball,
    rho: &Projection,
    y: &[u64],
) -> (Context, Ball, Coloring) {
    let c = chi.ctx();
    let n = c.n();
    let comp = rho.complement(n);
    let sub = c.with_dim(comp.dim()).unwrap();
    let fb = Ball::around(&sub, &comp.apply(&ball.residue), ball.depth);
    let col = Coloring::from_fn(&sub, &fb, |z| chi.color(&rho.join(n, y, z)));
    (sub, fb, col)
}

/// With `rho` onto `V`, every `rho`-fiber is `V ∩ ker rho`-translatable;
/// checked with the straightener search on the fiber.
pub fn fiber_restriction(instances: usize, seed: u64) -> Check {
    let mut ch = Check::new("fiber restriction");
    let mut r = rng(seed);
    let contexts = [
        Context::new(2, 2, 3).unwrap(),
        Context::new(3, 2, 2).unwrap(),
        Context::new(2, 3, 2).unwrap(),
    ];
    for i in 0..instances {
        let c = contexts[i % 3];
        let n = c.n();
        let chi = sample_coloring(&c, &mut r, i / 3);
        let ball = random_ball(&c, &mut r);
        let Some(s) = is_translatable(&chi, &ball, &tsp(&chi, &ball).unwrap()).unwrap() else {
            ch.record(false, || format!("no straightener for tsp on {ball}"));
            continue;
        };
        let v = s.subspace;
        for mask in 1u32..(1 << n) - 1 {
            let rho = Projection::new(n, (0..n).filter(|k| mask >> k & 1 == 1).collect()).unwrap();
            let image: Vec<Vec<u64>> = v.basis().iter().map(|b| rho.apply(b)).collect();
            if Subspace::span(c.p(), rho.dim(), image).dim() != rho.dim() {
                continue;
            }
            let comp = rho.complement(n);
            let kernel = Subspace::span(
                c.p(),
                n,
                comp.coords()
                    .iter()
                    .map(|&k| (0..n).map(|j| u64::from(j == k)).collect())
                    .collect(),
            );
            let w = v.intersect(&kernel);
            let w_fiber = Subspace::span(
                c.p(),
                comp.dim(),
                w.basis().iter().map(|b| comp.apply(b)).collect(),
            );
            let base = Ball::around(
                &c.with_dim(rho.dim()).unwrap(),
                &rho.apply(&ball.residue),
                ball.depth,
            );
            let sub_ctx = c.with_dim(rho.dim()).unwrap();
            for y in base.points(&sub_ctx) {
                let (_, fb, col) = fiber_coloring(&chi, &ball, &rho, &y);
                let ok = is_translatable(&col, &fb, &w_fiber).unwrap().is_some();
                ch.record(ok, || format!("ball {ball} rho {rho} over {y:?}"));
            }
        }
    }
    ch
}

/// For a set `X` translatable along `V` on `B` and `pi` exhibiting `V`,
/// all fibers of `pi` meet `X` equally often.
pub fn equal_fiber_counts(instances: usize, seed: u64) -> Check {
    let mut ch = Check::new("equal fiber counts");
    let mut r = rng(seed);
    let contexts = [
        Context::new(3, 3, 2).unwrap(),
        Context::new(2, 2, 3).unwrap(),
    ];
    for i in 0..instances {
        let c = contexts[i % 2];
        let chi = structured_coloring(&c, &Ball::root(c.n()), &mut r);
        let x = FiniteSet::from_predicate(&c, |p| chi.color(p) == 0).unwrap();
        let ind = x.indicator(&Ball::root(c.n()));
        let ball = random_ball(&c, &mut r);
        let v = tsp(&ind, &ball).unwrap();
        if v.dim() == 0 {
            continue;
        }
        for pi in v.exhibitions() {
            let mut counts = std::collections::BTreeMap::new();
            for p in ball.points(&c) {
                *counts.entry(pi.apply(&p)).or_insert(0usize) += usize::from(x.contains(&p));
            }
            let distinct: std::collections::BTreeSet<usize> = counts.values().copied().collect();
            ch.record(distinct.len() == 1, || {
                format!("ball {ball} pi {pi} counts {distinct:?}")
            });
        }
    }
    ch
}
