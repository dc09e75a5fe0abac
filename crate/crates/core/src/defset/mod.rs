//! Definable sets: a small formula language over `(Z/p^m)^n`, its evaluator,
//! bitmap sets and colorings, named fixtures and a dimension estimate.

mod eval;
mod fixtures;
mod parse;
mod poly;
mod set;

use thiserror::Error;

use crate::geometry::{Ball, GeometryError, Projection};
use crate::padic::PadicError;

pub use eval::{atom_outcomes, evaluate, holds_at, AtomOutcome, Truth};
pub use fixtures::{fixture, hyperbola, Fixture, FIXTURE_NAMES};
pub use parse::{parse, parse_poly, Cmp, SetExpr};
pub use poly::{Poly, MAX_DEGREE};
pub use set::{Coloring, FiniteSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DefsetError {
    #[error("syntax error at {line}:{col}: expected {expected}")]
    Syntax {
        line: usize,
        col: usize,
        expected: String,
    },
    #[error("unknown variable {name:?} at {line}:{col}")]
    UnknownVariable {
        name: String,
        line: usize,
        col: usize,
    },
    #[error("degree {degree} exceeds the maximum of 16")]
    DegreeOverflow { degree: u32 },
    #[error("integer literal or coefficient overflow")]
    IntegerOverflow,
    #[error("truth of {atom:?} at {point:?} depends on digits beyond the precision")]
    PrecisionExhausted { point: Vec<u64>, atom: String },
    #[error("variable x{var} used in dimension {n}")]
    VariableOutOfRange { var: usize, n: usize },
    #[error("coloring has {got} entries, expected {expected}")]
    ColoringSize { expected: usize, got: usize },
    #[error("ball is not inside the coloring's domain")]
    NotSubBall,
    #[error("colorings have different domains")]
    DomainMismatch,
    #[error("the set is empty")]
    EmptySet,
    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),
    #[error("fixture {name} needs precision at least {min}")]
    FixturePrecision { name: String, min: u32 },
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Largest `d` such that some projection of `X` to `d` coordinates contains a
/// ball of depth `m - 1`; 0 if there is none.
///
/// At finite precision this is a heuristic: a curve can be "fat" once its
/// points are closer than `p^-(m-1)`.
pub fn dim_estimate(x: &FiniteSet) -> Result<usize, DefsetError> {
    if x.is_empty() {
        return Err(DefsetError::EmptySet);
    }
    let ctx = x.ctx();
    for d in (1..=ctx.n()).rev() {
        for pi in projections(ctx.n(), d) {
            let sub = ctx.with_dim(d)?;
            let image = FiniteSet::from_points(&sub, x.points().map(|p| pi.apply(&p)))?;
            if contains_small_ball(&image) {
                return Ok(d);
            }
        }
    }
    Ok(0)
}

fn projections(n: usize, d: usize) -> Vec<Projection> {
    let mut out = vec![];
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == d {
            let coords = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            out.push(Projection::new(n, coords).expect("valid coordinates"));
        }
    }
    out.sort();
    out
}

fn contains_small_ball(s: &FiniteSet) -> bool {
    let ctx = s.ctx();
    let depth = ctx.m() - 1;
    let mut seen = std::collections::BTreeSet::new();
    for x in s.points() {
        let b = Ball::around(ctx, &x, depth);
        if seen.insert(b.residue.clone()) && b.points(ctx).all(|y| s.contains(&y)) {
            return true;
        }
    }
    false
}
