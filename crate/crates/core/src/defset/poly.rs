use std::collections::BTreeMap;
use std::fmt;

use crate::padic::Context;

use super::DefsetError;

pub const MAX_DEGREE: u32 = 16;

/// Integer polynomial in `x1..xk`, as a map from exponent vectors (trailing
/// zeros trimmed) to nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Vec<u32>, i64>,
}

fn trim(mut e: Vec<u32>) -> Vec<u32> {
    while e.last() == Some(&0) {
        e.pop();
    }
    e
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: i64) -> Poly {
        let mut p = Poly::zero();
        if c != 0 {
            p.terms.insert(vec![], c);
        }
        p
    }

    /// The variable `x{i}` (1-based).
    pub fn var(i: usize) -> Poly {
        let mut e = vec![0; i];
        e[i - 1] = 1;
        let mut p = Poly::zero();
        p.terms.insert(e, 1);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], i64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Largest variable index occurring (0 for constants).
    pub fn num_vars(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    fn add_term(&mut self, e: Vec<u32>, c: i64) -> Result<(), DefsetError> {
        let e = trim(e);
        let entry = self.terms.entry(e.clone()).or_insert(0);
        *entry = entry.checked_add(c).ok_or(DefsetError::IntegerOverflow)?;
        if *entry == 0 {
            self.terms.remove(&e);
        }
        Ok(())
    }

    pub fn add(&self, other: &Poly) -> Result<Poly, DefsetError> {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c)?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Result<Poly, DefsetError> {
        let mut out = Poly::zero();
        for (e, &c) in &self.terms {
            out.terms.insert(
                e.clone(),
                c.checked_neg().ok_or(DefsetError::IntegerOverflow)?,
            );
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly, DefsetError> {
        self.add(&other.neg()?)
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly, DefsetError> {
        let degree = self.degree() + other.degree();
        if !self.is_zero() && !other.is_zero() && degree > MAX_DEGREE {
            return Err(DefsetError::DegreeOverflow { degree });
        }
        let mut out = Poly::zero();
        for (e1, &c1) in &self.terms {
            for (e2, &c2) in &other.terms {
                let len = e1.len().max(e2.len());
                let e: Vec<u32> = (0..len)
                    .map(|i| e1.get(i).copied().unwrap_or(0) + e2.get(i).copied().unwrap_or(0))
                    .collect();
                out.add_term(e, c1.checked_mul(c2).ok_or(DefsetError::IntegerOverflow)?)?;
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Poly, DefsetError> {
        if !self.is_zero() && self.degree().saturating_mul(k) > MAX_DEGREE {
            return Err(DefsetError::DegreeOverflow {
                degree: self.degree().saturating_mul(k),
            });
        }
        let mut out = Poly::constant(1);
        for _ in 0..k {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Value at `x` modulo `p^m`. Variables beyond `x.len()` must not occur.
    pub fn eval(&self, ctx: &Context, x: &[u64]) -> u64 {
        let mut total = 0;
        for (e, &c) in &self.terms {
            let mut t = ctx.reduce(c);
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t = ctx.mul(t, x[i]);
                }
            }
            total = ctx.add(total, t);
        }
        total
    }

    /// Formal partial derivative in `x{i}` (1-based).
    pub fn derivative(&self, i: usize) -> Poly {
        let mut out = Poly::zero();
        for (e, &c) in &self.terms {
            let k = e.get(i - 1).copied().unwrap_or(0);
            if k == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i - 1] -= 1;
            // Coefficients stay small for degree <= 16; saturate rather than fail.
            out.add_term(e2, c.saturating_mul(k as i64))
                .expect("derivative overflow");
        }
        out
    }

    pub fn gradient(&self, ctx: &Context, x: &[u64]) -> Vec<u64> {
        (1..=x.len())
            .map(|i| self.derivative(i).eval(ctx, x))
            .collect()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut terms: Vec<(&Vec<u32>, i64)> = self.terms.iter().map(|(e, &c)| (e, c)).collect();
        terms.sort_by(|(a, _), (b, _)| {
            let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        for (k, (e, c)) in terms.into_iter().enumerate() {
            let mag = c.unsigned_abs();
            match (k, c < 0) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, k)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == 1 {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{mag}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}
