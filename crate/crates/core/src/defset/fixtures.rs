//! Named example sets with reference stratifications.

use crate::padic::Context;

use super::eval::evaluate;
use super::parse::{parse, SetExpr};
use super::set::FiniteSet;
use super::DefsetError;

pub const FIXTURE_NAMES: [&str; 4] = ["parabola", "hyperbola", "ball-in-K", "cusp"];

/// An example set `X` together with the data of its reference
/// stratification: `S_0` is `s0`, the rest of `X` has label `dim`, the
/// complement has label `n`.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub ctx: Context,
    pub text: String,
    pub expr: SetExpr,
    pub set: FiniteSet,
    pub s0: FiniteSet,
    pub dim: usize,
    /// The point used by default for the Kegel-type queries.
    pub base_point: Vec<u64>,
}

impl Fixture {
    /// Reference labels in lexicographic point order, optionally with an
    /// empty `S_0`.
    pub fn labels(&self, with_s0: bool) -> Vec<usize> {
        self.ctx
            .points()
            .map(|x| {
                if with_s0 && self.s0.contains(&x) {
                    0
                } else if self.set.contains(&x) {
                    self.dim
                } else {
                    self.ctx.n()
                }
            })
            .collect()
    }

    /// Default `(p, m)` for a fixture.
    pub fn default_params(name: &str) -> Option<(u64, u32)> {
        match name {
            "parabola" | "ball-in-K" | "cusp" => Some((3, 3)),
            "hyperbola" => Some((3, 4)),
            _ => None,
        }
    }
}

fn build(
    name: &str,
    ctx: Context,
    text: String,
    dim: usize,
    s0: Vec<Vec<u64>>,
    base: Vec<u64>,
) -> Result<Fixture, DefsetError> {
    let expr = parse(&text)?;
    let set = evaluate(&expr, &ctx)?;
    let s0 = FiniteSet::from_points(&ctx, s0)?;
    Ok(Fixture {
        name: name.to_string(),
        ctx,
        text,
        expr,
        set,
        s0,
        dim,
        base_point: base,
    })
}

/// `xy = a`.
pub fn hyperbola(p: u64, m: u32, a: i64) -> Result<Fixture, DefsetError> {
    let ctx = Context::new(p, m, 2)?;
    build(
        "hyperbola",
        ctx,
        format!("x1*x2 - {a} = 0"),
        1,
        vec![vec![0, 0]],
        vec![0, 0],
    )
}

/// Look up a fixture by name at the given `p` and `m`.
pub fn fixture(name: &str, p: u64, m: u32) -> Result<Fixture, DefsetError> {
    match name {
        "parabola" => {
            let ctx = Context::new(p, m, 2)?;
            build(
                name,
                ctx,
                "x2 - x1^2 = 0".into(),
                1,
                vec![vec![0, 0]],
                vec![0, 0],
            )
        }
        "hyperbola" => hyperbola(p, m, (p * p) as i64),
        "cusp" => {
            let ctx = Context::new(p, m, 2)?;
            build(
                name,
                ctx,
                "x2^2 - x1^3 = 0".into(),
                1,
                vec![vec![0, 0]],
                vec![0, 0],
            )
        }
        "ball-in-K" => {
            // x0 + rv^{-1}(1, 1) with x0 = 1: the ball of depth 2 around 1 + p.
            if m < 2 {
                return Err(DefsetError::FixturePrecision {
                    name: name.into(),
                    min: 2,
                });
            }
            let ctx = Context::new(p, m, 1)?;
            build(
                name,
                ctx,
                "rv(x1 - 1) = (1, 1)".into(),
                1,
                vec![vec![1]],
                vec![1],
            )
        }
        _ => Err(DefsetError::UnknownFixture(name.to_string())),
    }
}
