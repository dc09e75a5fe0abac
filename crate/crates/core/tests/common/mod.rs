//! Exhaustive reference implementations for tiny instances.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tstrat::defset::Coloring;
use tstrat::geometry::{Ball, Subspace};
use tstrat::padic::Context;

pub mod laws;
pub mod lemmas;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ctx(p: u64, m: u32, n: usize) -> Context {
    Context::new(p, m, n).unwrap()
}

/// Every rv-preserving bijection of the ball, as image lists in
/// lexicographic point order. Plain backtracking over point images.
pub fn brute_risometries(ctx: &Context, ball: &Ball) -> Vec<Vec<Vec<u64>>> {
    let pts: Vec<Vec<u64>> = ball.points(ctx).collect();
    let mut out = vec![];
    let mut used = vec![false; pts.len()];
    let mut img: Vec<usize> = vec![];
    fn rec(
        ctx: &Context,
        pts: &[Vec<u64>],
        used: &mut [bool],
        img: &mut Vec<usize>,
        out: &mut Vec<Vec<Vec<u64>>>,
    ) {
        let i = img.len();
        if i == pts.len() {
            out.push(img.iter().map(|&j| pts[j].clone()).collect());
            return;
        }
        for j in 0..pts.len() {
            if used[j] {
                continue;
            }
            let ok = (0..i).all(|a| {
                ctx.rv(&ctx.sub_points(&pts[j], &pts[img[a]]))
                    == ctx.rv(&ctx.sub_points(&pts[i], &pts[a]))
            });
            if ok {
                used[j] = true;
                img.push(j);
                rec(ctx, pts, used, img, out);
                img.pop();
                used[j] = false;
            }
        }
    }
    rec(ctx, &pts, &mut used, &mut img, &mut out);
    out
}

/// Translatability straight from the definition: some risometry `phi` makes
/// `chi . phi` invariant under the canonical lift of `V` (restricted to `B`).
pub fn brute_translatable(
    chi: &Coloring,
    ball: &Ball,
    v: &Subspace,
    risos: &[Vec<Vec<u64>>],
) -> bool {
    let ctx = chi.ctx();
    let pts: Vec<Vec<u64>> = ball.points(ctx).collect();
    let index = |x: &[u64]| pts.iter().position(|y| y == x).unwrap();
    let steps: Vec<Vec<u64>> = v
        .basis()
        .iter()
        .map(|g| ctx.scale_point(ctx.pow(ball.depth), g))
        .collect();
    risos.iter().any(|img| {
        let straight: Vec<u32> = img.iter().map(|y| chi.color(y)).collect();
        pts.iter().enumerate().all(|(i, x)| {
            steps
                .iter()
                .all(|s| straight[index(&ctx.add_points(x, s))] == straight[i])
        })
    })
}

pub fn brute_tsp(chi: &Coloring, ball: &Ball, risos: &[Vec<Vec<u64>>]) -> Subspace {
    let ctx = chi.ctx();
    Subspace::lines(ctx.p(), ctx.n())
        .into_iter()
        .filter(|l| brute_translatable(chi, ball, l, risos))
        .fold(Subspace::zero(ctx.p(), ctx.n()), |a, l| a.sum(&l))
}

pub fn random_coloring<R: Rng>(ctx: &Context, ball: &Ball, colors: u32, rng: &mut R) -> Coloring {
    Coloring::from_fn(ctx, ball, |_| rng.random_range(0..colors))
}

/// Colorings with a lot of structure: color depends on a random function of
/// the valuation and leading residue of `x - c`.
pub fn structured_coloring<R: Rng>(ctx: &Context, ball: &Ball, rng: &mut R) -> Coloring {
    let c = ctx.random_point(rng);
    let salt: u64 = rng.random();
    Coloring::from_fn(ctx, ball, |x| {
        let r = ctx.rv(&ctx.sub_points(x, &c));
        let h = format!("{r:?}{salt}");
        (h.bytes()
            .fold(0u64, |a, b| a.wrapping_mul(31).wrapping_add(b as u64))
            % 3) as u32
    })
}

/// Exact `p`-adic valuation of a nonzero integer.
pub fn int_val(p: u64, mut a: i128) -> u32 {
    assert!(a != 0);
    let mut v = 0;
    while a % p as i128 == 0 {
        a /= p as i128;
        v += 1;
    }
    v
}

/// The Jacobian inequality evaluated over the integers at the stored
/// representatives. Returns the first failing pair.
pub fn jacobian_oracle(
    ctx: &Context,
    f: &tstrat::defset::Poly,
    pts: &[Vec<u64>],
    z: &[u64],
) -> Option<(Vec<u64>, Vec<u64>)> {
    let eval = |x: &[u64]| -> i128 {
        f.terms()
            .map(|(e, c)| {
                e.iter()
                    .enumerate()
                    .fold(c as i128, |acc, (i, &k)| acc * (x[i] as i128).pow(k))
            })
            .sum()
    };
    let p = ctx.p();
    let vz = z
        .iter()
        .filter(|&&c| c != 0)
        .map(|&c| int_val(p, c as i128))
        .min()
        .unwrap();
    for (i, x) in pts.iter().enumerate() {
        for y in &pts[i + 1..] {
            let vd = x
                .iter()
                .zip(y)
                .filter(|(a, b)| a != b)
                .map(|(&a, &b)| int_val(p, a as i128 - b as i128))
                .min()
                .unwrap();
            let g = eval(x)
                - eval(y)
                - z.iter()
                    .zip(x.iter().zip(y))
                    .map(|(&c, (&a, &b))| c as i128 * (a as i128 - b as i128))
                    .sum::<i128>();
            if g != 0 && int_val(p, g) <= vz + vd {
                return Some((x.clone(), y.clone()));
            }
        }
    }
    None
}
