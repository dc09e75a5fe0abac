//! End-to-end acceptance run: one line per criterion.
//!
//! `cargo test -p tstrat --test acceptance -- [--strict] [N ...]` runs the
//! listed criteria (all by default). A failure listed in [`KNOWN`] is
//! printed as FAIL but only turns the exit status non-zero under
//! `--strict`; any other failure always does.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::lemmas::{self, Check, Scope};
use common::{brute_risometries, ctx, jacobian_oracle, laws, random_coloring, rng};
use rand::Rng;
use tstrat::balltree::{build_tree, level_report};
use tstrat::defset::{fixture, parse_poly, Coloring, FiniteSet, Fixture, FIXTURE_NAMES};
use tstrat::geometry::{Ball, Subspace};
use tstrat::jacobian::{check_jacobian, find_z, JacobianCheck};
use tstrat::padic::RvValue;
use tstrat::riso::{canonicalize, decide_translatable, random_automorphism, riso_equiv, Risometry};
use tstrat::tstrat::{
    kegel_xi, rainbow, reflects, stratify_greedy, verify_tstrat, whitney_b_m, Stratification,
};

/// Criteria whose failure is understood and recorded with its analysis.
const KNOWN: &[u32] = &[5, 7];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn default_fixture(name: &str) -> Fixture {
    let (p, m) = Fixture::default_params(name).unwrap();
    fixture(name, p, m).unwrap()
}

fn indicator(f: &Fixture) -> Coloring {
    f.set.indicator(&Ball::root(f.ctx.n()))
}

fn within(t: Instant, limit: Duration) -> bool {
    t.elapsed() < limit
}

fn fixture_verification() -> Outcome {
    let t = Instant::now();
    let f = fixture("parabola", 3, 3).unwrap();
    let with = verify_tstrat(&Stratification::from_fixture(&f, true), &indicator(&f)).unwrap();
    let without = verify_tstrat(&Stratification::from_fixture(&f, false), &indicator(&f)).unwrap();
    let small = fixture("parabola", 3, 2).unwrap();
    let without_m2 = verify_tstrat(
        &Stratification::from_fixture(&small, false),
        &indicator(&small),
    )
    .unwrap();
    let root = Some(Ball::root(2));
    let pass = with.passed()
        && without.witness == root
        && without_m2.witness == root
        && within(t, Duration::from_secs(60));
    outcome(
        pass,
        format!(
            "with S0: {:?}; S0 empty: witness {} (m=3), {} (m=2)",
            with.verdict,
            show(&without.witness),
            show(&without_m2.witness)
        ),
    )
}

fn show(b: &Option<Ball>) -> String {
    b.as_ref().map_or("none".into(), Ball::to_string)
}

fn hyperbola() -> Outcome {
    let t = Instant::now();
    let f = fixture("hyperbola", 3, 4).unwrap();
    assert_eq!(f.text, "x1*x2 - 9 = 0");
    let with = verify_tstrat(&Stratification::from_fixture(&f, true), &indicator(&f)).unwrap();
    let without = verify_tstrat(&Stratification::from_fixture(&f, false), &indicator(&f)).unwrap();
    let expected = Some(Ball::new(&f.ctx, 1, vec![0, 0]).unwrap());
    let pass = with.passed() && without.witness == expected && within(t, Duration::from_secs(300));
    outcome(
        pass,
        format!(
            "a = 9, with S0: {:?}; S0 empty: witness {}",
            with.verdict,
            show(&without.witness)
        ),
    )
}

fn ball_in_k() -> Outcome {
    let mut parts = vec![];
    let mut pass = true;
    for p in [2, 3] {
        let f = fixture("ball-in-K", p, 3).unwrap();
        let r = verify_tstrat(&Stratification::from_fixture(&f, true), &indicator(&f)).unwrap();
        pass &= r.passed();
        parts.push(format!("p={p}: {:?}", r.verdict));
    }
    outcome(pass, parts.join(", "))
}

fn risometry_oracle() -> Outcome {
    let c = ctx(2, 2, 2);
    let ball = Ball::root(2);
    let brute = brute_risometries(&c, &ball);
    let brute_set: BTreeSet<&Vec<Vec<u64>>> = brute.iter().collect();
    let mut normal = BTreeSet::new();
    for code in 0..1024u32 {
        let labels = vec![
            vec![code % 4],
            (0..4).map(|i| (code >> (2 + 2 * i)) % 4).collect(),
        ];
        let r = Risometry::from_labels(&c, &ball, labels).unwrap();
        normal.insert(ball.points(&c).map(|x| r.apply(&x)).collect::<Vec<_>>());
    }
    let groups_agree = normal.len() == 1024 && normal.iter().collect::<BTreeSet<_>>() == brute_set;
    let mut r = rng(7);
    let mut mismatches = 0;
    let pts: Vec<Vec<u64>> = ball.points(&c).collect();
    for _ in 0..200 {
        let a = random_coloring(&c, &ball, 2, &mut r);
        let b = if r.random_bool(0.5) {
            let img = &brute[r.random_range(0..brute.len())];
            let mut colors = vec![0; pts.len()];
            for (i, y) in img.iter().enumerate() {
                colors[c.index_of(y) as usize] = a.colors()[i];
            }
            Coloring::new(&c, ball.clone(), colors).unwrap()
        } else {
            random_coloring(&c, &ball, 2, &mut r)
        };
        let exists = brute.iter().any(|img| {
            img.iter()
                .zip(a.colors())
                .all(|(y, &col)| b.color(y) == col)
        });
        let fast = canonicalize(&a) == canonicalize(&b);
        let witness = riso_equiv(&a, &b).unwrap().is_some();
        mismatches += usize::from(fast != exists || witness != exists);
    }
    outcome(
        groups_agree && mismatches == 0,
        format!(
            "normal forms {} = brute {}; {mismatches} mismatches on 200 pairs",
            normal.len(),
            brute.len()
        ),
    )
}

fn summarize(checks: &[&Check]) -> (bool, Vec<String>) {
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| {
            format!(
                "{} {}/{} (e.g. {})",
                c.name,
                c.failures,
                c.cases,
                c.example.as_deref().unwrap_or("-")
            )
        })
        .collect();
    (failed.is_empty(), failed)
}

fn lemma_suite() -> Outcome {
    let mut basic: Vec<Check> = vec![];
    let runs = [
        (Scope::Exhaustive, vec![(2, 2, 1), (2, 2, 2)]),
        (
            Scope::Random {
                cases: 1000,
                seed: 17,
            },
            vec![(3, 3, 1), (3, 3, 2)],
        ),
    ];
    for (scope, contexts) in runs {
        for (p, m, n) in contexts {
            let c = ctx(p, m, n);
            basic.extend([
                lemmas::ultrametric(&c, scope),
                lemmas::rv_sum(&c, scope),
                lemmas::dir_pi(&c, scope),
                lemmas::dir_scal(&c, scope),
                lemmas::gl_action(&c, scope),
                lemmas::banach(&c, scope),
                lemmas::surjectivity(&c, scope),
            ]);
        }
    }
    let fin: Vec<lemmas::FinIso> = [
        (2, Scope::Exhaustive, 3),
        (
            3,
            Scope::Random {
                cases: 1000,
                seed: 23,
            },
            5,
        ),
    ]
    .into_iter()
    .flat_map(|(p, scope, max_t)| {
        [1, 2].map(|n| lemmas::fin_iso(&ctx(p, if p == 2 { 2 } else { 3 }, n), scope, max_t))
    })
    .collect();
    let (basic_ok, basic_fail) = summarize(&basic.iter().collect::<Vec<_>>());
    let (stated_ok, stated_fail) =
        summarize(&fin.iter().flat_map(|f| f.as_stated()).collect::<Vec<_>>());
    let (restricted_ok, restricted_fail) =
        summarize(&fin.iter().flat_map(|f| f.restricted()).collect::<Vec<_>>());
    let cases: usize = basic.iter().map(|c| c.cases).sum();
    let mut detail = format!(
        "{} basic checks over {cases} cases: {}",
        basic.len(),
        if basic_ok { "green" } else { "red" }
    );
    detail += &format!(
        "; fin&iso as stated: {}",
        if stated_ok {
            "green".into()
        } else {
            stated_fail.join("; ")
        }
    );
    detail += &format!(
        "; fin&iso for p-tame T: {}",
        if restricted_ok {
            "green".into()
        } else {
            restricted_fail.join("; ")
        }
    );
    for f in basic_fail.iter().chain(&restricted_fail) {
        detail += &format!("\n      {f}");
    }
    outcome(basic_ok && stated_ok, detail)
}

fn translatability_laws() -> Outcome {
    let checks = [
        laws::lift_independence(50, 10, 1),
        laws::sum_closure(500, 2),
        laws::monotonicity(30, 3),
        laws::fiber_restriction(30, 4),
        laws::equal_fiber_counts(40, 5),
    ];
    let (ok, failed) = summarize(&checks.iter().collect::<Vec<_>>());
    let counts: Vec<String> = checks
        .iter()
        .map(|c| format!("{} {}/{}", c.name, c.cases - c.failures, c.cases))
        .collect();
    outcome(
        ok,
        if ok {
            counts.join(", ")
        } else {
            failed.join("; ")
        },
    )
}

/// Rainbow coarsenings and ball indicators on the fixture's base ball.
fn fixture_colorings(s: &Stratification, count: usize, seed: u64) -> Vec<Coloring> {
    let mut r = rng(seed);
    let rb = rainbow(s);
    let c = s.ctx();
    (0..count)
        .map(|i| {
            if i % 2 == 0 {
                let k = r.random_range(2..5);
                let map: Vec<u32> = (0..rb.color_count())
                    .map(|_| r.random_range(0..k))
                    .collect();
                Coloring::from_fn(c, s.ball(), |x| map[rb.color(x) as usize])
            } else {
                let x0 = c.random_point(&mut r);
                let radius = r.random_range(1..c.m());
                Coloring::from_fn(c, s.ball(), |x| {
                    u32::from(Ball::around(c, &x0, radius).contains(c, x))
                })
            }
        })
        .collect()
}

fn rainbow_reflection() -> Outcome {
    let mut fixture_pairs = 0;
    let mut fixture_bad = 0;
    for name in FIXTURE_NAMES {
        let f = default_fixture(name);
        let s = Stratification::from_fixture(&f, true);
        let rb = rainbow(&s);
        let mut chis = fixture_colorings(&s, 50, 3);
        chis.push(indicator(&f));
        for chi in chis {
            fixture_pairs += 1;
            fixture_bad += usize::from(reflects(&s, &chi).unwrap() != rb.refines(&chi));
        }
    }
    // random small colorings, each against a stratification verified for it;
    // count both directions of disagreement separately
    let mut r = rng(31);
    let contexts = [ctx(3, 2, 1), ctx(3, 3, 1), ctx(3, 2, 2), ctx(2, 2, 2)];
    let (mut reflect_only, mut refine_only) = (0, 0);
    for i in 0..50 {
        let c = contexts[i % contexts.len()];
        let chi = random_coloring(&c, &Ball::root(c.n()), 2, &mut r);
        let s = stratify_greedy(&chi, &[c.n(), c.n()], 10_000)
            .unwrap()
            .stratification;
        match (reflects(&s, &chi).unwrap(), rainbow(&s).refines(&chi)) {
            (true, false) => reflect_only += 1,
            (false, true) => refine_only += 1,
            _ => {}
        }
    }
    // label-preserving risometries preserve the rainbow
    let mut moved = 0;
    for name in FIXTURE_NAMES {
        let f = default_fixture(name);
        let s = Stratification::from_fixture(&f, true);
        let rb = rainbow(&s);
        let mut r = rng(4);
        for _ in 0..100 {
            let phi = random_automorphism(&s.coloring(), &mut r);
            moved += usize::from(
                f.ctx
                    .points()
                    .any(|x| rb.color(&phi.apply(&x)) != rb.color(&x)),
            );
        }
    }
    outcome(
        fixture_bad == 0 && reflect_only + refine_only == 0 && moved == 0,
        format!(
            "fixtures: {fixture_bad}/{fixture_pairs} disagreements; 50 random small colorings: {reflect_only} reflected without rainbow refinement, {refine_only} the other way; rainbow moved by {moved}/400 risometries"
        ),
    )
}

fn exceptional_set() -> Outcome {
    let f = fixture("parabola", 3, 4).unwrap();
    let s = Stratification::from_fixture(&f, true);
    let chi = s.coloring().product(&indicator(&f)).unwrap();
    let k = kegel_xi(&chi, &[0, 0]).unwrap();
    let c = f.ctx;
    let mut brute = vec![];
    for lambda in 0..c.m() - 1 {
        for u in (1..9u64).map(|i| vec![i / 3, i % 3]) {
            let ball = Ball::around(&c, &c.scale_point(c.pow(lambda), &u), lambda + 1);
            if !decide_translatable(&chi, &ball, &Subspace::line(3, &u)).unwrap() {
                brute.push(RvValue::Leading { lambda, residue: u });
            }
        }
    }
    let mut got = k.xi.clone();
    got.sort();
    brute.sort();
    let pass = got == brute && k.valuations.len() <= 2 && k.valuations == [0];
    outcome(
        pass,
        format!(
            "|Xi| = {} (brute force {}), v(Xi) = {:?}",
            k.xi.len(),
            brute.len(),
            k.valuations
        ),
    )
}

fn whitney() -> Outcome {
    let mut worst = 0;
    let mut balls = 0;
    let mut roots = vec![];
    for name in ["parabola", "hyperbola"] {
        let f = fixture(name, 3, 4).unwrap();
        let c = f.ctx;
        let s = Stratification::from_fixture(&f, true);
        roots.push(whitney_b_m(&s, &Ball::root(2), None).unwrap().m);
        for k in 0..3 {
            let set: BTreeSet<Ball> = c.points().map(|x| Ball::around(&c, &x, k)).collect();
            for b in set {
                if let Ok(w) = whitney_b_m(&s, &b, None) {
                    balls += 1;
                    worst = worst.max(w.m.len());
                }
            }
        }
    }
    let pass = worst <= 2 && roots == [vec![0], vec![1]];
    outcome(
        pass,
        format!(
            "max |M| = {worst} over {balls} balls; M on O^2: parabola {:?}, hyperbola {:?}",
            roots[0], roots[1]
        ),
    )
}

fn jacobian() -> Outcome {
    let c = ctx(3, 3, 1);
    let f = parse_poly("x1^2").unwrap();
    let one_plus = FiniteSet::from_predicate(&c, |x| x[0] % 3 == 1).unwrap();
    let pts: Vec<Vec<u64>> = one_plus.points().collect();
    let w = find_z(&f, &one_plus).unwrap();
    let found = w
        .as_ref()
        .is_some_and(|w| c.rv(&w.z) == c.rv(&[2]) && jacobian_oracle(&c, &f, &pts, &w.z).is_none());
    let full = FiniteSet::full(&c).unwrap();
    let z = w.map_or(vec![2], |w| w.z);
    let rejected = check_jacobian(&f, &full, &z).unwrap();
    let pair_ok = matches!(&rejected, JacobianCheck::Fails { x, y, .. } if jacobian_oracle(&c, &f, &[x.clone(), y.clone()], &z).is_some());
    outcome(
        found && pair_ok,
        format!(
            "z = {z:?} on 1+3O; on O: {}",
            match &rejected {
                JacobianCheck::Fails { x, y, .. } => format!("fails at {x:?}, {y:?}"),
                JacobianCheck::Holds => "holds".into(),
            }
        ),
    )
}

fn trees() -> Outcome {
    let mut mismatches = 0;
    let mut cases = 0;
    for name in FIXTURE_NAMES {
        for (p, m) in [(2, 3), (3, 3), (3, 4)] {
            let f = fixture(name, p, m).unwrap();
            let c = f.ctx;
            // depth-k balls meeting X are the distinct residues of X mod p^k
            let direct: Vec<usize> = (0..=c.m())
                .map(|k| {
                    f.set
                        .points()
                        .map(|x| Ball::around(&c, &x, k))
                        .collect::<BTreeSet<_>>()
                        .len()
                })
                .collect();
            cases += 1;
            mismatches += usize::from(build_tree(&f.set).unwrap().counts_by_depth() != direct);
        }
    }
    let f = fixture("parabola", 3, 4).unwrap();
    let parabola = level_report(&f.set, &Stratification::from_fixture(&f, true))
        .unwrap()
        .message;
    let c = ctx(3, 3, 2);
    let x = FiniteSet::from_points(&c, vec![vec![1, 2]]).unwrap();
    let s =
        Stratification::from_fn(&c, &Ball::root(2), |p| if p == [1, 2] { 0 } else { 2 }).unwrap();
    let point = level_report(&x, &s).unwrap().message;
    let pass = mismatches == 0
        && parabola == "consistent with level ≤ 1"
        && point == "consistent with level ≤ 0";
    outcome(pass, format!("{mismatches} count mismatches on {cases} trees; parabola: {parabola}; single point: {point}"))
}

fn stratifier() -> Outcome {
    let mut failures = vec![];
    let mut max_demotions = 0;
    for name in FIXTURE_NAMES {
        let f = default_fixture(name);
        let chi = indicator(&f);
        match stratify_greedy(&chi, &[f.ctx.n(), f.dim], 100) {
            Ok(o) if verify_tstrat(&o.stratification, &chi).unwrap().passed() => {
                max_demotions = max_demotions.max(o.demotions.len())
            }
            _ => failures.push(name.to_string()),
        }
    }
    let c = ctx(2, 2, 2);
    let mut r = rng(12);
    for i in 0..20 {
        let chi = random_coloring(&c, &Ball::root(2), 3, &mut r);
        match stratify_greedy(&chi, &[2, 1, 0], 100) {
            Ok(o) if verify_tstrat(&o.stratification, &chi).unwrap().passed() => {
                max_demotions = max_demotions.max(o.demotions.len())
            }
            _ => failures.push(format!("random #{i}")),
        }
    }
    outcome(failures.is_empty(), format!("4 fixtures + 20 random colorings, at most {max_demotions} demotions; failures {failures:?}"))
}

type Criterion = (u32, &'static str, fn() -> Outcome);

const CRITERIA: &[Criterion] = &[
    (1, "fixture verification (parabola)", fixture_verification),
    (2, "hyperbola", hyperbola),
    (3, "ball-in-K", ball_in_k),
    (4, "risometry oracle equivalence", risometry_oracle),
    (5, "lemma suite", lemma_suite),
    (6, "translatability laws", translatability_laws),
    (7, "rainbow and reflection", rainbow_reflection),
    (8, "exceptional set finiteness", exceptional_set),
    (9, "Whitney-type sets", whitney),
    (10, "Jacobian property", jacobian),
    (11, "trees and levels", trees),
    (12, "stratifier soundness", stratifier),
];

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let strict = args.iter().any(|a| a == "--strict");
    let wanted: Vec<u32> = args.iter().filter_map(|a| a.parse().ok()).collect();
    let mut failed = vec![];
    let mut run = 0;
    for &(id, name, f) in CRITERIA {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        run += 1;
        let t = Instant::now();
        let o = f();
        let secs = t.elapsed().as_secs_f64();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id:>2} {name} ({secs:.1}s): {}", o.detail);
        if !o.pass {
            failed.push(id);
        }
    }
    let unexpected: Vec<u32> = failed
        .iter()
        .copied()
        .filter(|id| !KNOWN.contains(id))
        .collect();
    println!(
        "{} of {run} criteria pass; failing: {failed:?} (known: {:?})",
        run - failed.len(),
        failed
            .iter()
            .filter(|id| KNOWN.contains(id))
            .collect::<Vec<_>>()
    );
    if !unexpected.is_empty() || (strict && !failed.is_empty()) {
        std::process::exit(1);
    }
}
