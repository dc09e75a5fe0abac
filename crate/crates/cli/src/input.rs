use std::path::Path;

use anyhow::{bail, Context as _, Result};
use tstrat::defset::{dim_estimate, evaluate, fixture, parse, Coloring, FiniteSet, Fixture};
use tstrat::geometry::Ball;
use tstrat::padic::Context;
use tstrat::tstrat::Stratification;

use crate::args::{Global, Source, StratSource};

/// The data named by a [`Source`]: a fixture, a set from an expression, or
/// a coloring read from a file.
pub struct Inputs {
    fixture: Option<Fixture>,
    set: Option<FiniteSet>,
    coloring: Option<Coloring>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))
}

pub fn read_coloring(path: &Path) -> Result<Coloring> {
    let c: Coloring = read_json(path)?;
    c.validate()?;
    Ok(c)
}

fn read_strat(path: &Path) -> Result<Stratification> {
    let s: Stratification = read_json(path)?;
    s.validate()?;
    Ok(s)
}

fn check_flags(g: &Global, ctx: &Context) -> Result<()> {
    if g.n.is_some_and(|n| n != ctx.n())
        || g.p.is_some_and(|p| p != ctx.p())
        || g.m.is_some_and(|m| m != ctx.m())
    {
        bail!(
            "--p/--m/--n disagree with the input (p={}, m={}, n={})",
            ctx.p(),
            ctx.m(),
            ctx.n()
        );
    }
    Ok(())
}

impl Inputs {
    pub fn load(g: &Global, src: &crate::args::Source) -> Result<Inputs> {
        let Source {
            fixture: name,
            expr,
            coloring,
        } = src;
        if let Some(name) = name {
            let (dp, dm) = Fixture::default_params(name)
                .with_context(|| format!("unknown fixture {name:?}"))?;
            let f = fixture(name, g.p.unwrap_or(dp), g.m.unwrap_or(dm))?;
            check_flags(g, &f.ctx)?;
            return Ok(Inputs {
                set: Some(f.set.clone()),
                fixture: Some(f),
                coloring: None,
            });
        }
        if let Some(text) = expr {
            let (Some(p), Some(m), Some(n)) = (g.p, g.m, g.n) else {
                bail!("--expr needs --p, --m and --n");
            };
            let ctx = Context::new(p, m, n)?;
            let e = parse(text)?;
            if e.num_vars() > n {
                bail!("expression uses x{} but n = {n}", e.num_vars());
            }
            return Ok(Inputs {
                fixture: None,
                set: Some(evaluate(&e, &ctx)?),
                coloring: None,
            });
        }
        if let Some(path) = coloring {
            let c = read_coloring(path)?;
            check_flags(g, c.ctx())?;
            return Ok(Inputs {
                fixture: None,
                set: None,
                coloring: Some(c),
            });
        }
        bail!("give one of --fixture, --expr or --coloring")
    }

    pub fn fixture(&self) -> Option<&Fixture> {
        self.fixture.as_ref()
    }

    pub fn set(&self) -> Result<&FiniteSet> {
        self.set
            .as_ref()
            .context("this command needs a set (--fixture or --expr), not a coloring")
    }

    /// The coloring itself, or the indicator of the set on `O^n`.
    pub fn coloring(&self) -> Result<Coloring> {
        match (&self.coloring, &self.set) {
            (Some(c), _) => Ok(c.clone()),
            (None, Some(s)) => Ok(s.indicator(&Ball::root(s.ctx().n()))),
            (None, None) => unreachable!("load always sets one"),
        }
    }

    /// As [`Inputs::coloring`], on the given ball.
    pub fn coloring_on(&self, ball: &Ball) -> Result<Coloring> {
        match (&self.coloring, &self.set) {
            (Some(c), _) if c.ball() == ball => Ok(c.clone()),
            (Some(c), _) => Ok(c.restrict(ball)?),
            (None, Some(s)) => Ok(s.indicator(ball)),
            (None, None) => unreachable!("load always sets one"),
        }
    }

    /// The stratification from `--strat`, else the fixture's reference one.
    pub fn strat(&self, s: &StratSource) -> Result<Option<Stratification>> {
        if let Some(path) = &s.strat {
            return Ok(Some(read_strat(path)?));
        }
        Ok(self
            .fixture
            .as_ref()
            .map(|f| Stratification::from_fixture(f, !s.no_s0)))
    }

    /// [`Inputs::strat`], falling back to `X` as one stratum of its
    /// estimated dimension inside `S_n`.
    pub fn strat_or_set(&self, s: &StratSource) -> Result<Stratification> {
        if let Some(st) = self.strat(s)? {
            return Ok(st);
        }
        let x = self.set()?;
        let (ctx, d) = (*x.ctx(), dim_estimate(x)?);
        Ok(Stratification::from_fn(&ctx, &Ball::root(ctx.n()), |p| {
            if x.contains(p) {
                d
            } else {
                ctx.n()
            }
        })?)
    }

    pub fn require_strat(&self, s: &StratSource) -> Result<Stratification> {
        self.strat(s)?
            .context("needs a stratification: use a fixture or --strat")
    }
}

pub fn point(ctx: &Context, text: &str) -> Result<Vec<u64>> {
    let x: Vec<u64> = text
        .trim()
        .trim_start_matches('(')
        .trim_end_matches(')')
        .split(',')
        .map(|c| {
            c.trim()
                .parse()
                .with_context(|| format!("bad point {text:?}"))
        })
        .collect::<Result<_>>()?;
    ctx.check_point(&x)?;
    Ok(x)
}

pub fn point_text(x: &[u64]) -> String {
    x.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

pub fn ball(ctx: &Context, text: &str) -> Result<Ball> {
    let b: Ball = text.parse()?;
    Ok(Ball::new(ctx, b.depth, b.residue)?)
}
