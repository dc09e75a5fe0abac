use rayon::prelude::*;

use crate::padic::{Context, Valuation};

use super::parse::{Cmp, SetExpr};
use super::set::FiniteSet;
use super::DefsetError;

/// Three-valued truth: `Unknown` when the answer depends on digits past `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    fn of(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }

    pub fn known(self) -> Option<bool> {
        match self {
            Truth::True => Some(true),
            Truth::False => Some(false),
            Truth::Unknown => None,
        }
    }
}

/// Outcome of one atom at one point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomOutcome {
    pub atom: String,
    pub truth: Truth,
    /// The polynomial vanished to full precision, so a finer precision
    /// could change the valuation it saw.
    pub sensitive: bool,
}

fn valuation_atom(v: Valuation, cmp: Cmp, c: i64, m: u32) -> Truth {
    let m = m as i64;
    match v {
        Valuation::Finite(v) => Truth::of(cmp.holds(v as i64, c)),
        // The true valuation is some value in [m, inf].
        Valuation::Infinite => match cmp {
            // "val(f) >= c" for c >= m is read as "f = 0".
            Cmp::Ge => Truth::True,
            Cmp::Gt if c < m => Truth::True,
            Cmp::Eq | Cmp::Le if c < m => Truth::False,
            Cmp::Lt if c <= m => Truth::False,
            _ => Truth::Unknown,
        },
    }
}

fn atom_truth(ctx: &Context, e: &SetExpr, x: &[u64]) -> (Truth, bool) {
    match e {
        SetExpr::Zero(poly) => {
            let v = poly.eval(ctx, x);
            (Truth::of(v == 0), v == 0)
        }
        SetExpr::Val { poly, cmp, bound } => {
            let v = ctx.valuation(poly.eval(ctx, x));
            (valuation_atom(v, *cmp, *bound, ctx.m()), v.is_infinite())
        }
        SetExpr::Rv { poly, lambda, unit } => {
            let a = poly.eval(ctx, x);
            let unit = unit.rem_euclid(ctx.p() as i64) as u64;
            match ctx.valuation(a) {
                Valuation::Finite(v) => (
                    Truth::of(v as i64 == *lambda && ctx.digit(a, v) == unit),
                    false,
                ),
                Valuation::Infinite if *lambda < ctx.m() as i64 => (Truth::False, true),
                Valuation::Infinite => (Truth::Unknown, true),
            }
        }
        _ => unreachable!("not an atom"),
    }
}

/// Kleene evaluation; returns the first atom that came out unknown, if that
/// decided the result.
fn truth_at<'e>(ctx: &Context, e: &'e SetExpr, x: &[u64]) -> (Truth, Option<&'e SetExpr>) {
    match e {
        SetExpr::And(a, b) => {
            let (ta, ua) = truth_at(ctx, a, x);
            if ta == Truth::False {
                return (Truth::False, None);
            }
            let (tb, ub) = truth_at(ctx, b, x);
            match (ta, tb) {
                (_, Truth::False) => (Truth::False, None),
                (Truth::True, Truth::True) => (Truth::True, None),
                _ => (Truth::Unknown, ua.or(ub)),
            }
        }
        SetExpr::Or(a, b) => {
            let (ta, ua) = truth_at(ctx, a, x);
            if ta == Truth::True {
                return (Truth::True, None);
            }
            let (tb, ub) = truth_at(ctx, b, x);
            match (ta, tb) {
                (_, Truth::True) => (Truth::True, None),
                (Truth::False, Truth::False) => (Truth::False, None),
                _ => (Truth::Unknown, ua.or(ub)),
            }
        }
        SetExpr::Not(a) => {
            let (t, u) = truth_at(ctx, a, x);
            (t.not(), u)
        }
        atom => {
            let (t, _) = atom_truth(ctx, atom, x);
            (t, (t == Truth::Unknown).then_some(atom))
        }
    }
}

fn check_vars(ctx: &Context, e: &SetExpr) -> Result<(), DefsetError> {
    let k = e.num_vars();
    if k > ctx.n() {
        return Err(DefsetError::VariableOutOfRange { var: k, n: ctx.n() });
    }
    Ok(())
}

/// Truth of `e` at a single point.
pub fn holds_at(ctx: &Context, e: &SetExpr, x: &[u64]) -> Result<bool, DefsetError> {
    check_vars(ctx, e)?;
    ctx.check_point(x)?;
    match truth_at(ctx, e, x) {
        (Truth::True, _) => Ok(true),
        (Truth::False, _) => Ok(false),
        (Truth::Unknown, atom) => Err(DefsetError::PrecisionExhausted {
            point: x.to_vec(),
            atom: atom.map(|a| a.to_string()).unwrap_or_default(),
        }),
    }
}

/// The set of points of `(Z/p^m)^n` satisfying `e`.
pub fn evaluate(e: &SetExpr, ctx: &Context) -> Result<FiniteSet, DefsetError> {
    check_vars(ctx, e)?;
    let count = ctx.ensure_enumerable()?;
    let bits: Vec<Result<bool, DefsetError>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let x = ctx.point_at(i);
            match truth_at(ctx, e, &x) {
                (Truth::True, _) => Ok(true),
                (Truth::False, _) => Ok(false),
                (Truth::Unknown, atom) => Err(DefsetError::PrecisionExhausted {
                    point: x,
                    atom: atom.map(|a| a.to_string()).unwrap_or_default(),
                }),
            }
        })
        .collect();
    let members = bits.into_iter().collect::<Result<Vec<bool>, _>>()?;
    Ok(FiniteSet::from_bitmap(ctx, members))
}

/// Per-atom outcomes at `x`, in left-to-right order.
pub fn atom_outcomes(
    ctx: &Context,
    e: &SetExpr,
    x: &[u64],
) -> Result<Vec<AtomOutcome>, DefsetError> {
    check_vars(ctx, e)?;
    let mut out = vec![];
    collect(ctx, e, x, &mut out);
    Ok(out)
}

fn collect(ctx: &Context, e: &SetExpr, x: &[u64], out: &mut Vec<AtomOutcome>) {
    match e {
        SetExpr::And(a, b) | SetExpr::Or(a, b) => {
            collect(ctx, a, x, out);
            collect(ctx, b, x, out);
        }
        SetExpr::Not(a) => collect(ctx, a, x, out),
        atom => {
            let (truth, sensitive) = atom_truth(ctx, atom, x);
            out.push(AtomOutcome {
                atom: atom.to_string(),
                truth,
                sensitive,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse;
    use super::*;

    #[test]
    fn parabola_mod_nine() {
        let ctx = Context::new(3, 2, 2).unwrap();
        let x = evaluate(&parse("x2 - x1^2 = 0").unwrap(), &ctx).unwrap();
        assert_eq!(x.len(), 9);
        for p in x.points() {
            assert_eq!((p[0] * p[0]) % 9, p[1]);
        }
    }

    #[test]
    fn valuation_atoms_at_infinity() {
        let ctx = Context::new(3, 2, 1).unwrap();
        assert!(holds_at(&ctx, &parse("val(x1) >= 5").unwrap(), &[0]).unwrap());
        assert!(!holds_at(&ctx, &parse("val(x1) >= 5").unwrap(), &[3]).unwrap());
        assert!(!holds_at(&ctx, &parse("val(x1) = 1").unwrap(), &[0]).unwrap());
        assert!(matches!(
            holds_at(&ctx, &parse("val(x1) = 3").unwrap(), &[0]),
            Err(DefsetError::PrecisionExhausted { .. })
        ));
        // An unknown atom does not matter once the other side decides.
        assert!(!holds_at(&ctx, &parse("val(x1) = 3 & x1 - 1 = 0").unwrap(), &[0]).unwrap());
    }

    #[test]
    fn rv_atom() {
        let ctx = Context::new(3, 3, 1).unwrap();
        let x = evaluate(&parse("rv(x1 - 1) = (1, 1)").unwrap(), &ctx).unwrap();
        let pts: Vec<u64> = x.points().map(|p| p[0]).collect();
        assert_eq!(pts, vec![4, 13, 22]);
    }

    #[test]
    fn out_of_range_variable() {
        let ctx = Context::new(3, 2, 1).unwrap();
        assert!(matches!(
            evaluate(&parse("x2 = 0").unwrap(), &ctx),
            Err(DefsetError::VariableOutOfRange { var: 2, n: 1 })
        ));
    }
}
