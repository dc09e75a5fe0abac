//! Brute-force checks of the valued-field lemma layer, shared by the lemma
//! tests and the acceptance harness.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::Rng;
use tstrat::defset::Coloring;
use tstrat::geometry::{Ball, Projection};
use tstrat::padic::{Context, IntMatrix, RvValue, Valuation};
use tstrat::riso::{is_risometry, random_automorphism, riso_equiv, Risometry};

use super::{brute_risometries, rng};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub example: Option<String>,
}

impl Check {
    pub fn new(name: &str) -> Check {
        Check {
            name: name.to_string(),
            cases: 0,
            failures: 0,
            example: None,
        }
    }

    pub fn record(&mut self, ok: bool, example: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.example.is_none() {
                self.example = Some(example());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Scope {
    Exhaustive,
    Random { cases: usize, seed: u64 },
}

fn samples(c: &Context, scope: Scope, arity: usize) -> Vec<Vec<Vec<u64>>> {
    match scope {
        Scope::Exhaustive => {
            let pts: Vec<Vec<u64>> = c.points().collect();
            let mut out: Vec<Vec<Vec<u64>>> = vec![vec![]];
            for _ in 0..arity {
                out = out
                    .into_iter()
                    .flat_map(|t| {
                        pts.iter()
                            .map(move |p| [t.clone(), vec![p.clone()]].concat())
                    })
                    .collect();
            }
            out
        }
        Scope::Random { cases, seed } => {
            let mut r = rng(seed);
            (0..cases)
                .map(|_| (0..arity).map(|_| c.random_point(&mut r)).collect())
                .collect()
        }
    }
}

pub fn ultrametric(c: &Context, scope: Scope) -> Check {
    let mut ch = Check::new("ultrametric");
    for s in samples(c, scope, 2) {
        let (a, b) = (&s[0], &s[1]);
        let lhs = c.point_valuation(&c.add_points(a, b));
        let rhs = c.point_valuation(a).min(c.point_valuation(b));
        ch.record(lhs >= rhs, || format!("a={a:?} b={b:?}"));
    }
    ch
}

pub fn rv_sum(c: &Context, scope: Scope) -> Check {
    let mut ch = Check::new("rv-sum");
    for s in samples(c, scope, 4) {
        let (a1, a2, b1, b2) = (&s[0], &s[1], &s[2], &s[3]);
        let v = c.point_valuation(&c.add_points(a1, a2));
        let min = c.point_valuation(a1).min(c.point_valuation(a2));
        if v != min || v.is_infinite() || c.rv(b1) != c.rv(a1) || c.rv(b2) != c.rv(a2) {
            continue;
        }
        ch.record(
            c.rv(&c.add_points(b1, b2)) == c.rv(&c.add_points(a1, a2)),
            || format!("{a1:?} {a2:?} {b1:?} {b2:?}"),
        );
    }
    // random quadruples rarely share rv classes; add ones built to share them
    if let Scope::Random { cases, seed } = scope {
        let mut r = rng(seed ^ 0x5eed);
        for _ in 0..cases {
            let a1 = c.random_point(&mut r);
            let a2 = c.random_point(&mut r);
            let v = c.point_valuation(&c.add_points(&a1, &a2));
            if v != c.point_valuation(&a1).min(c.point_valuation(&a2)) || v.is_infinite() {
                continue;
            }
            let shift = |a: &Vec<u64>, r: &mut rand_chacha::ChaCha8Rng| match c.rv(a) {
                RvValue::Zero => a.clone(),
                RvValue::Leading { lambda, .. } => {
                    let e: Vec<u64> = a
                        .iter()
                        .map(|_| c.mul(c.pow(lambda + 1), r.random_range(0..c.modulus())))
                        .collect();
                    c.add_points(a, &e)
                }
            };
            let b1 = shift(&a1, &mut r);
            let b2 = shift(&a2, &mut r);
            ch.record(
                c.rv(&c.add_points(&b1, &b2)) == c.rv(&c.add_points(&a1, &a2)),
                || format!("{a1:?} {a2:?} {b1:?} {b2:?}"),
            );
        }
    }
    ch
}

fn projections(n: usize) -> Vec<Projection> {
    (1u32..(1 << n))
        .map(|mask| Projection::new(n, (0..n).filter(|i| mask >> i & 1 == 1).collect()).unwrap())
        .collect()
}

pub fn dir_pi(c: &Context, scope: Scope) -> Check {
    let mut ch = Check::new("dir-pi");
    let projs = projections(c.n());
    let mut r = rng(3);
    for s in samples(c, scope, 1) {
        let a = &s[0];
        let Some(dir) = c.dir(a) else { continue };
        let chosen: Vec<&Projection> = match scope {
            Scope::Exhaustive => projs.iter().collect(),
            Scope::Random { .. } => vec![projs.choose(&mut r).unwrap()],
        };
        for pi in chosen {
            let lhs = c.point_valuation(&pi.apply(a)) == c.point_valuation(a);
            let rhs = pi.apply(dir.vector()).iter().any(|&u| u != 0);
            ch.record(lhs == rhs, || format!("a={a:?} pi={:?}", pi.coords()));
        }
    }
    ch
}

pub fn dir_scal(c: &Context, scope: Scope) -> Check {
    let mut ch = Check::new("dir-scal");
    let p = c.p();
    for s in samples(c, scope, 2) {
        let (a, b) = (&s[0], &s[1]);
        let (Valuation::Finite(va), Valuation::Finite(vb)) =
            (c.point_valuation(a), c.point_valuation(b))
        else {
            continue;
        };
        if va + vb >= c.m() {
            continue;
        }
        let dot = a
            .iter()
            .zip(b)
            .fold(0, |acc, (&x, &y)| c.add(acc, c.mul(x, y)));
        let lhs = c.valuation(dot) > Valuation::Finite(va + vb);
        let (da, db) = (c.dir(a).unwrap(), c.dir(b).unwrap());
        let rhs = da
            .vector()
            .iter()
            .zip(db.vector())
            .map(|(x, y)| x * y)
            .sum::<u64>()
            % p
            == 0;
        ch.record(lhs == rhs, || format!("a={a:?} b={b:?}"));
    }
    ch
}

pub fn gl_action(c: &Context, scope: Scope) -> Check {
    let mut ch = Check::new("GL_n(O) action");
    let n = c.n();
    let mats: Vec<IntMatrix> = match scope {
        Scope::Exhaustive => {
            let q = c.modulus() as i64;
            let total = (q as u64).pow((n * n) as u32);
            (0..total)
                .filter_map(|code| {
                    let mut r = code;
                    let rows: Vec<Vec<i64>> = (0..n)
                        .map(|_| {
                            (0..n)
                                .map(|_| {
                                    let d = (r % q as u64) as i64;
                                    r /= q as u64;
                                    d
                                })
                                .collect()
                        })
                        .collect();
                    let m = IntMatrix::new(c, &rows).ok()?;
                    m.is_unimodular(c).then_some(m)
                })
                .collect()
        }
        Scope::Random { cases, seed } => {
            let mut r = rng(seed);
            (0..cases.div_ceil(10))
                .map(|_| IntMatrix::random_unimodular(c, n, &mut r))
                .collect()
        }
    };
    let xs = match scope {
        Scope::Exhaustive => samples(c, scope, 1),
        Scope::Random { seed, .. } => samples(
            c,
            Scope::Random {
                cases: 10,
                seed: seed + 1,
            },
            1,
        ),
    };
    for m in &mats {
        for s in &xs {
            let x = &s[0];
            let mx = m.apply(c, x);
            let ok = c.point_valuation(&mx) == c.point_valuation(x)
                && m.act_rv(c, &c.rv(x)).ok() == Some(c.rv(&mx));
            ch.record(ok, || format!("M={m:?} x={x:?}"));
        }
    }
    ch
}

/// Self-maps of `O^n` with `v(f(x) - f(y)) > v(x - y)`: digit `j` of `f(x)`
/// depends only on `x mod p^j`.
fn contracting_maps(c: &Context, scope: Scope) -> Vec<Vec<Vec<u64>>> {
    let pts: Vec<Vec<u64>> = c.points().collect();
    let n = c.n();
    let fan = c.residue_count();
    let build = |tables: &[Vec<Vec<u64>>]| -> Vec<Vec<u64>> {
        pts.iter()
            .map(|x| {
                let mut y = vec![0u64; n];
                for (j, table) in tables.iter().enumerate() {
                    let q = c.pow(j as u32);
                    // index of x mod p^j among the p^(jn) residues
                    let idx = x.iter().fold(0u64, |acc, &xi| acc * q + xi % q) as usize;
                    for (yi, d) in y.iter_mut().zip(&table[idx]) {
                        *yi += d * q;
                    }
                }
                y
            })
            .collect()
    };
    match scope {
        Scope::Exhaustive => {
            assert_eq!(c.m(), 2, "exhaustive enumeration is for m = 2");
            let digits: Vec<Vec<u64>> = (0..fan)
                .map(|i| tstrat::geometry::DigitSpace::new(c.p(), n).vector(i))
                .collect();
            let mut out = vec![];
            let total = fan.pow(fan as u32 + 1);
            for code in 0..total {
                let mut r = code;
                let mut next = || {
                    let d = digits[r % fan].clone();
                    r /= fan;
                    d
                };
                let t0 = vec![next()];
                let t1: Vec<Vec<u64>> = (0..fan).map(|_| next()).collect();
                out.push(build(&[t0, t1]));
            }
            out
        }
        Scope::Random { cases, seed } => {
            let mut r = rng(seed);
            (0..cases)
                .map(|_| {
                    let tables: Vec<Vec<Vec<u64>>> = (0..c.m())
                        .map(|j| {
                            let size = c.pow(j).pow(n as u32) as usize;
                            (0..size)
                                .map(|_| (0..n).map(|_| r.random_range(0..c.p())).collect())
                                .collect()
                        })
                        .collect();
                    build(&tables)
                })
                .collect()
        }
    }
}

pub fn banach(c: &Context, scope: Scope) -> Check {
    let mut ch = Check::new("Banach fixed point");
    let mut r = rng(7);
    let pts: Vec<Vec<u64>> = c.points().collect();
    for f in contracting_maps(c, scope) {
        let at = |x: &[u64]| &f[c.index_of(x) as usize];
        let contracts = |x: &Vec<u64>, y: &Vec<u64>| {
            x == y
                || c.point_valuation(&c.sub_points(at(x), at(y)))
                    > c.point_valuation(&c.sub_points(x, y))
        };
        let contracting = match scope {
            Scope::Exhaustive => pts.iter().all(|x| pts.iter().all(|y| contracts(x, y))),
            Scope::Random { .. } => (0..500)
                .all(|_| contracts(pts.choose(&mut r).unwrap(), pts.choose(&mut r).unwrap())),
        };
        let fixed: Vec<&Vec<u64>> = pts.iter().filter(|x| at(x) == *x).collect();
        let converges = pts.iter().all(|x| {
            let mut y = x.clone();
            for _ in 0..c.m() {
                y = at(&y).clone();
            }
            fixed.first() == Some(&&y)
        });
        ch.record(contracting && fixed.len() == 1 && converges, || {
            format!("{} fixed points", fixed.len())
        });
    }
    ch
}

/// Newton iteration `g(x) = x + x0 - f(x)` finds preimages under
/// risometries of a ball.
pub fn surjectivity(c: &Context, scope: Scope) -> Check {
    let mut ch = Check::new("risometry surjectivity");
    let (cases, seed) = match scope {
        Scope::Exhaustive => (200, 1),
        Scope::Random { cases, seed } => (cases, seed),
    };
    let mut r = rng(seed);
    for _ in 0..cases {
        let depth = r.random_range(0..c.m());
        let ball = Ball::around(c, &c.random_point(&mut r), depth);
        let f = Risometry::random(c, &ball, &mut r);
        let pts: Vec<Vec<u64>> = ball.points(c).collect();
        let x0 = pts.choose(&mut r).unwrap().clone();
        let mut x = ball.base_point();
        for _ in 0..c.m() {
            x = c.add_points(&x, &c.sub_points(&x0, &f.apply(&x)));
        }
        ch.record(f.apply(&x) == x0, || format!("ball {ball} target {x0:?}"));
    }
    ch
}

/// Every node of `T(T)` above the leaves meets a number of children that
/// is not a multiple of `p`.
pub fn tame(c: &Context, t: &[Vec<u64>]) -> bool {
    (0..c.m()).all(|k| {
        let mut kids: std::collections::BTreeMap<Ball, BTreeSet<Ball>> = Default::default();
        for x in t {
            kids.entry(Ball::around(c, x, k))
                .or_default()
                .insert(Ball::around(c, x, k + 1));
        }
        kids.values().all(|s| s.len() as u64 % c.p() != 0)
    })
}

/// Number of children of `ball` meeting `t`.
fn children_meeting(c: &Context, ball: &Ball, t: &[Vec<u64>]) -> usize {
    t.iter()
        .filter(|x| ball.contains(c, x))
        .map(|x| Ball::around(c, x, ball.depth + 1))
        .collect::<BTreeSet<_>>()
        .len()
}

fn subsets(pts: &[Vec<u64>], max: usize) -> Vec<Vec<Vec<u64>>> {
    let mut out: Vec<Vec<Vec<u64>>> = vec![vec![]];
    let mut frontier: Vec<(usize, Vec<Vec<u64>>)> = vec![(0, vec![])];
    for _ in 0..max {
        let mut next = vec![];
        for (start, s) in frontier {
            for (i, x) in pts.iter().enumerate().skip(start) {
                let mut t = s.clone();
                t.push(x.clone());
                out.push(t.clone());
                next.push((i + 1, t));
            }
        }
        frontier = next;
    }
    out
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for p in permutations(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

fn rv_set(c: &Context, x: &[u64], t: &[Vec<u64>]) -> BTreeSet<RvValue> {
    t.iter().map(|s| c.rv(&c.sub_points(x, s))).collect()
}

/// Maximal balls of the root ball missing `t`.
fn maximal_balls(c: &Context, t: &[Vec<u64>]) -> Vec<Ball> {
    let mut out = vec![];
    let mut stack = vec![Ball::root(c.n())];
    while let Some(b) = stack.pop() {
        if !t.iter().any(|x| b.contains(c, x)) {
            out.push(b);
        } else if b.depth < c.m() {
            stack.extend(b.children(c));
        }
    }
    out.sort();
    out
}

fn marked(c: &Context, t: &[Vec<u64>], x: &[u64]) -> Coloring {
    Coloring::from_fn(c, &Ball::root(c.n()), |y| {
        u32::from(t.iter().any(|s| s == y)) + 2 * u32::from(y == x)
    })
}

/// Results for the finite-set lemma, as stated and under [`tame`].
pub struct FinIso {
    pub one: Check,
    pub one_tame: Check,
    pub a_implies_c: Check,
    pub b_implies_a: Check,
    pub c_implies_b: Check,
    pub c_implies_b_tame: Check,
    pub three_if: Check,
    pub three_only_if: Check,
    pub three_only_if_tame: Check,
}

impl FinIso {
    pub fn as_stated(&self) -> Vec<&Check> {
        vec![
            &self.one,
            &self.a_implies_c,
            &self.b_implies_a,
            &self.c_implies_b,
            &self.three_if,
            &self.three_only_if,
        ]
    }

    pub fn restricted(&self) -> Vec<&Check> {
        vec![
            &self.one_tame,
            &self.a_implies_c,
            &self.b_implies_a,
            &self.c_implies_b_tame,
            &self.three_if,
            &self.three_only_if_tame,
        ]
    }
}

pub fn fin_iso(c: &Context, scope: Scope, max_t: usize) -> FinIso {
    let mut out = FinIso {
        one: Check::new("fin&iso (1)"),
        one_tame: Check::new("fin&iso (1), tame T"),
        a_implies_c: Check::new("fin&iso (2) a=>c"),
        b_implies_a: Check::new("fin&iso (2) b=>a"),
        c_implies_b: Check::new("fin&iso (2) c=>b"),
        c_implies_b_tame: Check::new("fin&iso (2) c=>b, tame ball"),
        three_if: Check::new("fin&iso (3) <="),
        three_only_if: Check::new("fin&iso (3) =>"),
        three_only_if_tame: Check::new("fin&iso (3) =>, tame T"),
    };
    let root = Ball::root(c.n());
    let pts: Vec<Vec<u64>> = c.points().collect();
    let mut r = rng(match scope {
        Scope::Exhaustive => 0,
        Scope::Random { seed, .. } => seed,
    });
    let sets: Vec<Vec<Vec<u64>>> = match scope {
        Scope::Exhaustive => subsets(&pts, max_t),
        Scope::Random { cases, .. } => (0..cases)
            .map(|_| {
                let k = r.random_range(1..=max_t);
                let mut t: Vec<Vec<u64>> = pts.choose_multiple(&mut r, k).cloned().collect();
                t.sort();
                t
            })
            .collect(),
    };
    let risos = match scope {
        Scope::Exhaustive => brute_risometries(c, &root),
        Scope::Random { .. } => vec![],
    };

    for (k, t) in sets.iter().enumerate() {
        let is_tame = tame(c, t);
        // (1): rv-preserving permutations of T
        for perm in permutations(t.len()) {
            let ok = (0..t.len()).all(|i| {
                (0..t.len()).all(|j| {
                    c.rv(&c.sub_points(&t[perm[i]], &t[perm[j]]))
                        == c.rv(&c.sub_points(&t[i], &t[j]))
                })
            });
            if ok {
                let identity = perm.iter().enumerate().all(|(i, &j)| i == j);
                out.one
                    .record(identity, || format!("T={t:?} perm={perm:?}"));
                if is_tame {
                    out.one_tame
                        .record(identity, || format!("T={t:?} perm={perm:?}"));
                }
            }
        }

        // (2): pairs x1 != x2
        let pairs: Vec<(Vec<u64>, Vec<u64>)> = match scope {
            Scope::Exhaustive => pts
                .iter()
                .flat_map(|a| {
                    pts.iter()
                        .filter(move |b| *b != a)
                        .map(move |b| (a.clone(), b.clone()))
                })
                .collect(),
            Scope::Random { .. } => {
                let a = c.random_point(&mut r);
                let b = loop {
                    // bias towards nearby pairs, where the conditions are interesting
                    let depth = r.random_range(0..c.m());
                    let step: Vec<u64> = (0..c.n())
                        .map(|_| c.mul(c.pow(depth), r.random_range(0..c.modulus())))
                        .collect();
                    let b = c.add_points(&a, &step);
                    if b != a {
                        break b;
                    }
                };
                vec![(a, b)]
            }
        };
        let stabilizer: Vec<&Vec<Vec<u64>>> = risos
            .iter()
            .filter(|img| {
                pts.iter()
                    .zip(img.iter())
                    .all(|(x, y)| t.contains(x) == t.contains(y))
            })
            .collect();
        for (x1, x2) in pairs {
            let delta = c.point_valuation(&c.sub_points(&x1, &x2)).finite().unwrap();
            let ball = Ball::around(c, &x1, delta);
            let b = !t.iter().any(|s| ball.contains(c, s));
            let cc = rv_set(c, &x1, t) == rv_set(c, &x2, t);
            let a = match scope {
                Scope::Exhaustive => {
                    let i1 = c.index_of(&x1) as usize;
                    stabilizer.iter().any(|img| img[i1] == x2)
                }
                Scope::Random { .. } => riso_equiv(&marked(c, t, &x1), &marked(c, t, &x2))
                    .unwrap()
                    .is_some(),
            };
            let ex = || format!("T={t:?} x1={x1:?} x2={x2:?} a={a} b={b} c={cc}");
            if a {
                out.a_implies_c.record(cc, ex);
            }
            if b {
                out.b_implies_a.record(a, ex);
            }
            if cc {
                out.c_implies_b.record(b, ex);
                if children_meeting(c, &ball, t) as u64 % c.p() != 0 || b {
                    out.c_implies_b_tame.record(b, ex);
                }
            }
        }

        // (3)
        let maxes = maximal_balls(c, t);
        // the pairwise check is quadratic in the space; subsample in the plane
        if matches!(scope, Scope::Exhaustive) || c.n() == 1 || k < 100 {
            let parts: Vec<Risometry> = maxes
                .iter()
                .map(|b| Risometry::random(c, b, &mut r))
                .collect();
            let glued = |x: &[u64]| match maxes.iter().position(|b| b.contains(c, x)) {
                Some(i) => parts[i].apply(x),
                None => x.to_vec(),
            };
            out.three_if
                .record(is_risometry(c, &root, glued), || format!("T={t:?}"));
        }

        let fixing: Vec<Vec<Vec<u64>>> = match scope {
            Scope::Exhaustive => risos
                .iter()
                .filter(|img| t.iter().all(|s| img[c.index_of(s) as usize] == *s))
                .cloned()
                .collect(),
            Scope::Random { .. } => {
                let chi = Coloring::from_fn(c, &root, |y| {
                    t.iter().position(|s| s == y).map_or(0, |i| i as u32 + 1)
                });
                (0..3)
                    .map(|_| {
                        let phi = random_automorphism(&chi, &mut r);
                        pts.iter().map(|x| phi.apply(x)).collect()
                    })
                    .collect()
            }
        };
        for img in fixing {
            let ok = maxes.iter().all(|b| {
                b.points(c)
                    .all(|x| b.contains(c, &img[c.index_of(&x) as usize]))
            });
            out.three_only_if.record(ok, || format!("T={t:?}"));
            if is_tame {
                out.three_only_if_tame.record(ok, || format!("T={t:?}"));
            }
        }
    }
    out
}
