mod args;
mod input;

use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{CommandFactory, Parser};
use serde::Serialize;
use serde_json::json;
use tstrat::balltree::{build_tree, level_report, ExportFormat};
use tstrat::defset::{fixture, parse_poly, DefsetError, Fixture, FIXTURE_NAMES};
use tstrat::jacobian::{check_jacobian, find_z, rv_invariant, JacobianCheck, JacobianError};
use tstrat::riso::{canonicalize, riso_equiv, tsp};
use tstrat::tstrat::{
    kegel_xi, reflection_witness, stratify_greedy, verify_tstrat, whitney_b_m, TstratError,
};

use args::{Cli, Command, Format, Global};
use input::Inputs;

/// What a command produced, and whether the answer was negative.
struct Output {
    body: String,
    negative: bool,
}

impl Output {
    fn new(body: String, negative: bool) -> Output {
        Output { body, negative }
    }
}

fn json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// JSON unless the text format was asked for; DOT is only for trees.
fn render<T: Serialize>(g: &Global, value: &T, text: impl FnOnce() -> String) -> Result<String> {
    match g.format {
        Format::Json => Ok(json_text(value)),
        Format::Text => Ok(text()),
        Format::Dot => bail!("--format dot is only available for `tree`"),
    }
}

fn run(cli: &Cli) -> Result<Output> {
    let g = &cli.global;
    match &cli.command {
        Command::Eval { src } => {
            let inp = Inputs::load(g, src)?;
            let set = inp.set()?;
            let pts: Vec<Vec<u64>> = set.points().collect();
            let ctx = set.ctx();
            let v = json!({ "p": ctx.p(), "m": ctx.m(), "n": ctx.n(), "count": pts.len(), "points": pts });
            let body = render(g, &v, || {
                let mut s = format!("{} points\n", pts.len());
                for x in &pts {
                    writeln!(s, "{}", input::point_text(x)).unwrap();
                }
                s
            })?;
            Ok(Output::new(body, false))
        }
        Command::Tree { src, strat, level } => {
            let inp = Inputs::load(g, src)?;
            let set = inp.set()?;
            if *level {
                let s = inp.strat_or_set(strat)?;
                let r = level_report(set, &s)?;
                let body = render(g, &r, || format!("{}\n", r.message))?;
                return Ok(Output::new(body, !r.consistent()));
            }
            let mut t = build_tree(set)?;
            if let Some(s) = &inp.strat(strat)? {
                t.annotate(s)?;
            }
            let body = match g.format {
                Format::Dot => t.to_dot(),
                Format::Json => String::from_utf8(t.export(ExportFormat::Json)).expect("utf8"),
                Format::Text => {
                    let mut out =
                        format!("{} nodes, by depth {:?}\n", t.len(), t.counts_by_depth());
                    for n in t.nodes() {
                        let pad = "  ".repeat(n.ball.depth as usize);
                        match n.stratum {
                            Some(d) => writeln!(out, "{pad}{} S{d}", n.ball).unwrap(),
                            None => writeln!(out, "{pad}{}", n.ball).unwrap(),
                        }
                    }
                    out
                }
            };
            Ok(Output::new(body, false))
        }
        Command::Verify { src, strat } => {
            let inp = Inputs::load(g, src)?;
            let s = inp.require_strat(strat)?;
            let chi = inp.coloring_on(s.ball())?;
            let r = verify_tstrat(&s, &chi)?;
            let body = render(g, &r, || match &r.witness {
                None => format!("pass ({} balls checked)\n", r.checked_balls),
                Some(b) => format!("fail, witness ball {b} ({} failures)\n", r.failures.len()),
            })?;
            Ok(Output::new(body, !r.passed()))
        }
        Command::Reflects { src, strat } => {
            let inp = Inputs::load(g, src)?;
            let s = inp.require_strat(strat)?;
            let chi = inp.coloring_on(s.ball())?;
            let w = reflection_witness(&s, &chi)?;
            let v = json!({ "reflects": w.is_none(), "witness": w });
            let body = render(g, &v, || match &w {
                None => "reflects\n".into(),
                Some(b) => format!("does not reflect, witness ball {b}\n"),
            })?;
            Ok(Output::new(body, w.is_some()))
        }
        Command::Tsp { src, ball } => {
            let inp = Inputs::load(g, src)?;
            let chi = inp.coloring()?;
            let b = match ball {
                Some(t) => input::ball(chi.ctx(), t)?,
                None => chi.ball().clone(),
            };
            let v = tsp(&chi, &b)?;
            let out = json!({ "ball": b, "dim": v.dim(), "basis": v.basis() });
            let body = render(g, &out, || {
                format!("tsp on {b}: dim {}, basis {:?}\n", v.dim(), v.basis())
            })?;
            Ok(Output::new(body, false))
        }
        Command::Canon { src } => {
            let inp = Inputs::load(g, src)?;
            let chi = inp.coloring()?;
            let form = canonicalize(&chi);
            let out =
                json!({ "ball": chi.ball(), "colors": chi.color_count(), "digest": form.digest() });
            let body = render(g, &out, || format!("{}\n", form.digest()))?;
            Ok(Output::new(body, false))
        }
        Command::Equiv { src, other } => {
            let inp = Inputs::load(g, src)?;
            let a = inp.coloring()?;
            let b = input::read_coloring(other)?;
            let w = riso_equiv(&a, &b)?;
            let out = json!({ "equivalent": w.is_some(), "witness": w });
            let body = render(g, &out, || {
                if w.is_some() {
                    "equivalent\n".into()
                } else {
                    "not equivalent\n".into()
                }
            })?;
            Ok(Output::new(body, w.is_none()))
        }
        Command::Stratify { src, dims } => {
            let inp = Inputs::load(g, src)?;
            let chi = inp.coloring()?;
            let dims = match (dims, inp.fixture()) {
                (Some(d), _) => d.clone(),
                // color 0 is the complement, color 1 the set
                (None, Some(f)) => vec![f.ctx.n(), f.dim],
                (None, None) => bail!("--dims is required without a fixture"),
            };
            match stratify_greedy(&chi, &dims, g.budget) {
                Ok(o) => {
                    let body = render(g, &o, || {
                        format!(
                            "verified after {} demotions; strata sizes {:?}\n",
                            o.demotions.len(),
                            strata_sizes(&o.stratification)
                        )
                    })?;
                    Ok(Output::new(body, false))
                }
                Err(TstratError::BudgetExhausted(r)) => {
                    let out = json!({ "budget_exhausted": g.budget, "report": r });
                    let body = render(g, &out, || {
                        format!("budget of {} demotions exhausted\n", g.budget)
                    })?;
                    Ok(Output::new(body, true))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Kegel { src, strat, point } => {
            let inp = Inputs::load(g, src)?;
            let mut chi = inp.coloring()?;
            if let Some(s) = inp.strat(strat)? {
                chi = s.coloring().product(&chi.restrict(s.ball())?)?;
            }
            let x = match (point, inp.fixture()) {
                (Some(t), _) => input::point(chi.ctx(), t)?,
                (None, Some(f)) => f.base_point.clone(),
                (None, None) => bail!("--point is required without a fixture"),
            };
            let k = kegel_xi(&chi, &x)?;
            let body = render(g, &k, || {
                format!(
                    "{} exceptional directions, valuations {:?}\n",
                    k.xi.len(),
                    k.valuations
                )
            })?;
            Ok(Output::new(body, false))
        }
        Command::WhitneyB {
            src,
            strat,
            ball,
            d,
        } => {
            let inp = Inputs::load(g, src)?;
            let s = inp.require_strat(strat)?;
            let b = match ball {
                Some(t) => input::ball(s.ctx(), t)?,
                None => s.ball().clone(),
            };
            let w = whitney_b_m(&s, &b, *d)?;
            let body = render(g, &w, || {
                format!("M = {:?} over {} pairs\n", w.m, w.pairs_checked)
            })?;
            Ok(Output::new(body, false))
        }
        Command::Jacobian { src, poly, z } => {
            let inp = Inputs::load(g, src)?;
            let set = inp.set()?;
            let f = parse_poly(poly)?;
            match z {
                Some(t) => {
                    let z = input::point(set.ctx(), t)?;
                    let c = check_jacobian(&f, set, &z)?;
                    let inv = rv_invariant(&f, set, &z, 5, g.seed)?;
                    let out = json!({ "z": z, "check": c, "rv_invariant": inv });
                    let body = render(g, &out, || match &c {
                        JacobianCheck::Holds => format!("holds; rv-invariant: {inv}\n"),
                        JacobianCheck::Fails { x, y, .. } => {
                            format!(
                                "fails at ({}) and ({})\n",
                                input::point_text(x),
                                input::point_text(y)
                            )
                        }
                    })?;
                    Ok(Output::new(body, !c.holds()))
                }
                None => {
                    let w = find_z(&f, set)?;
                    let out = json!({ "found": w.is_some(), "z": w.as_ref().map(|w| &w.z) });
                    let body = render(g, &out, || match &w {
                        Some(w) => format!("z = ({})\n", input::point_text(&w.z)),
                        None => "no z found\n".into(),
                    })?;
                    Ok(Output::new(body, w.is_none()))
                }
            }
        }
        Command::Fixtures => {
            let mut list = vec![];
            for name in FIXTURE_NAMES {
                let (p, m) = Fixture::default_params(name).expect("known fixture");
                let f = fixture(name, p, m)?;
                list.push(json!({
                    "name": name, "p": p, "m": m, "n": f.ctx.n(), "set": f.text, "dim": f.dim,
                    "s0": f.s0.points().collect::<Vec<_>>(), "points": f.set.len(),
                }));
            }
            let body = render(g, &list, || {
                let mut s = String::new();
                for name in FIXTURE_NAMES {
                    let (p, m) = Fixture::default_params(name).expect("known fixture");
                    let f = fixture(name, p, m).expect("fixture builds");
                    writeln!(s, "{name:<10} p={p} m={m} n={}  {}", f.ctx.n(), f.text).unwrap();
                }
                s
            })?;
            Ok(Output::new(body, false))
        }
    }
}

fn strata_sizes(s: &tstrat::tstrat::Stratification) -> Vec<usize> {
    (0..=s.ctx().n())
        .map(|d| s.labels().iter().filter(|&&l| l == d).count())
        .collect()
}

fn precision_exhausted(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        matches!(
            c.downcast_ref::<DefsetError>(),
            Some(DefsetError::PrecisionExhausted { .. })
        ) || matches!(
            c.downcast_ref::<JacobianError>(),
            Some(JacobianError::PrecisionExhausted { .. })
        ) || matches!(
            c.downcast_ref::<TstratError>(),
            Some(TstratError::Defset(DefsetError::PrecisionExhausted { .. }))
        )
    })
}

fn emit(g: &Global, body: &str) -> Result<()> {
    match &g.out {
        Some(path) => {
            std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            eprintln!("\n{}", Cli::command().render_long_help());
            return ExitCode::from(2);
        }
    };
    if let Some(j) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli).and_then(|o| emit(&cli.global, &o.body).map(|()| o.negative)) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if precision_exhausted(&e) {
                ExitCode::from(3)
            } else {
                eprintln!("run `tstrat --help` for the set grammar and flags");
                ExitCode::from(2)
            }
        }
    }
}
