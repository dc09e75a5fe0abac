//! Arithmetic in `(Z/p^m)^n`: valuations, leading terms (`rv`) and directions.
//!
//! Points are plain coordinate slices with entries in `0..p^m`; the
//! [`Context`] carries `p`, `m`, `n` and does the arithmetic, so the same
//! routines serve full points, fibers and single scalars.

use std::cmp::Ordering;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_PRIME: u64 = 13;
pub const MAX_PRECISION: u32 = 8;
pub const MAX_DIM: usize = 4;
/// Largest `|(Z/p^m)^n|` accepted by routines that enumerate every point.
pub const MAX_POINTS: u64 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("{0} is not a prime in 2..=13")]
    InvalidPrime(u64),
    #[error("precision {0} is outside 1..=8")]
    InvalidPrecision(u32),
    #[error("dimension {0} is outside 1..=4")]
    InvalidDimension(usize),
    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {value} is not reduced modulo {modulus}")]
    NotReduced { value: u64, modulus: u64 },
    #[error("matrix is not invertible over O")]
    NotUnimodular,
    #[error("(Z/{p}^{m})^{n} has more than {MAX_POINTS} points")]
    TooLarge { p: u64, m: u32, n: usize },
}

/// The ambient data `(p, m, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawContext")]
pub struct Context {
    p: u64,
    m: u32,
    n: usize,
}

#[derive(Deserialize)]
struct RawContext {
    p: u64,
    m: u32,
    n: usize,
}

impl TryFrom<RawContext> for Context {
    type Error = PadicError;
    fn try_from(raw: RawContext) -> Result<Self, Self::Error> {
        Context::new(raw.p, raw.m, raw.n)
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

impl Context {
    pub fn new(p: u64, m: u32, n: usize) -> Result<Self, PadicError> {
        if !is_prime(p) || p > MAX_PRIME {
            return Err(PadicError::InvalidPrime(p));
        }
        if !(1..=MAX_PRECISION).contains(&m) {
            return Err(PadicError::InvalidPrecision(m));
        }
        if !(1..=MAX_DIM).contains(&n) {
            return Err(PadicError::InvalidDimension(n));
        }
        Ok(Context { p, m, n })
    }

    /// Same prime and precision, different dimension.
    pub fn with_dim(&self, n: usize) -> Result<Self, PadicError> {
        Context::new(self.p, self.m, n)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `p^m`.
    pub fn modulus(&self) -> u64 {
        self.p.pow(self.m)
    }

    /// `p^k`; `k` may exceed `m`.
    pub fn pow(&self, k: u32) -> u64 {
        self.p.pow(k)
    }

    /// `p^n`, the number of residue vectors in `F_p^n`.
    pub fn residue_count(&self) -> usize {
        (self.p as usize).pow(self.n as u32)
    }

    /// `|(Z/p^m)^n|`, if it fits in a `u64`.
    pub fn point_count(&self) -> Option<u64> {
        self.modulus().checked_pow(self.n as u32)
    }

    pub fn ensure_enumerable(&self) -> Result<u64, PadicError> {
        match self.point_count() {
            Some(c) if c <= MAX_POINTS => Ok(c),
            _ => Err(PadicError::TooLarge {
                p: self.p,
                m: self.m,
                n: self.n,
            }),
        }
    }

    pub fn check_point(&self, x: &[u64]) -> Result<(), PadicError> {
        if x.len() != self.n {
            return Err(PadicError::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let q = self.modulus();
        match x.iter().find(|&&c| c >= q) {
            Some(&value) => Err(PadicError::NotReduced { value, modulus: q }),
            None => Ok(()),
        }
    }

    pub fn reduce(&self, a: i64) -> u64 {
        a.rem_euclid(self.modulus() as i64) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.modulus()
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        let q = self.modulus();
        (a + q - b) % q
    }

    pub fn neg(&self, a: u64) -> u64 {
        let q = self.modulus();
        (q - a) % q
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a * b) % self.modulus()
    }

    /// Inverse of a unit of `Z/p^m`.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if a % self.p == 0 {
            return None;
        }
        let q = self.modulus() as i64;
        let (mut r0, mut r1) = (q, a as i64);
        let (mut s0, mut s1) = (0i64, 1i64);
        while r1 != 0 {
            let t = r0 / r1;
            (r0, r1) = (r1, r0 - t * r1);
            (s0, s1) = (s1, s0 - t * s1);
        }
        Some(s0.rem_euclid(q) as u64)
    }

    /// Digit `k` of `a` in base `p`.
    pub fn digit(&self, a: u64, k: u32) -> u64 {
        (a / self.p.pow(k)) % self.p
    }

    pub fn valuation(&self, a: u64) -> Valuation {
        if a == 0 {
            return Valuation::Infinite;
        }
        let mut v = 0;
        let mut a = a;
        while a % self.p == 0 {
            a /= self.p;
            v += 1;
        }
        Valuation::Finite(v)
    }

    pub fn add_points(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        x.iter().zip(y).map(|(&a, &b)| self.add(a, b)).collect()
    }

    pub fn sub_points(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        x.iter().zip(y).map(|(&a, &b)| self.sub(a, b)).collect()
    }

    pub fn neg_point(&self, x: &[u64]) -> Vec<u64> {
        x.iter().map(|&a| self.neg(a)).collect()
    }

    pub fn scale_point(&self, c: u64, x: &[u64]) -> Vec<u64> {
        x.iter().map(|&a| self.mul(c, a)).collect()
    }

    /// Minimum coordinate valuation; infinite exactly for the zero vector.
    pub fn point_valuation(&self, x: &[u64]) -> Valuation {
        x.iter()
            .map(|&a| self.valuation(a))
            .min()
            .unwrap_or(Valuation::Infinite)
    }

    /// Leading term of `x`: its valuation and digit vector at that valuation.
    pub fn rv(&self, x: &[u64]) -> RvValue {
        match self.point_valuation(x) {
            Valuation::Infinite => RvValue::Zero,
            Valuation::Finite(lambda) => RvValue::Leading {
                lambda,
                residue: x.iter().map(|&a| self.digit(a, lambda)).collect(),
            },
        }
    }

    /// Line through the leading residue of `x`, normalized so that its first
    /// nonzero entry is 1.
    pub fn dir(&self, x: &[u64]) -> Option<Direction> {
        match self.rv(x) {
            RvValue::Zero => None,
            RvValue::Leading { residue, .. } => Some(Direction::from_residue(self.p, &residue)),
        }
    }

    /// The `idx`-th point of `(Z/p^m)^n` in lexicographic order.
    pub fn point_at(&self, idx: u64) -> Vec<u64> {
        let q = self.modulus();
        let mut x = vec![0; self.n];
        let mut r = idx;
        for c in x.iter_mut().rev() {
            *c = r % q;
            r /= q;
        }
        x
    }

    pub fn index_of(&self, x: &[u64]) -> u64 {
        let q = self.modulus();
        x.iter().fold(0, |acc, &c| acc * q + c)
    }

    /// Every point in lexicographic order. Panics if the space is too large;
    /// call [`Context::ensure_enumerable`] first.
    pub fn points(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        let count = self
            .ensure_enumerable()
            .expect("space too large to enumerate");
        (0..count).map(move |i| self.point_at(i))
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u64> {
        let q = self.modulus();
        (0..self.n).map(|_| rng.random_range(0..q)).collect()
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(Z/{}^{})^{}", self.p, self.m, self.n)
    }
}

/// `v(x)`, with `Infinite` standing for "zero at this precision".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valuation {
    Finite(u32),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Valuation::Infinite
    }

    /// Sum in the value group; infinite if either side is.
    pub fn plus(self, other: Valuation) -> Valuation {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }

    /// Compare against an integer.
    pub fn cmp_int(self, c: i64) -> Ordering {
        match self {
            Valuation::Finite(v) => (v as i64).cmp(&c),
            Valuation::Infinite => Ordering::Greater,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => s.serialize_u32(*v),
            Valuation::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u32),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Valuation::Finite(v)),
            Raw::Str(s) if s == "inf" => Ok(Valuation::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad valuation {s:?}"))),
        }
    }
}

/// Leading term of a vector: `Zero`, or `(lambda, u)` with `u` a nonzero
/// vector over `F_p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RvValue {
    Zero,
    Leading { lambda: u32, residue: Vec<u64> },
}

impl RvValue {
    pub fn lambda(&self) -> Option<u32> {
        match self {
            RvValue::Zero => None,
            RvValue::Leading { lambda, .. } => Some(*lambda),
        }
    }

    pub fn valuation(&self) -> Valuation {
        self.lambda().map_or(Valuation::Infinite, Valuation::Finite)
    }

    pub fn direction(&self, p: u64) -> Option<Direction> {
        match self {
            RvValue::Zero => None,
            RvValue::Leading { residue, .. } => Some(Direction::from_residue(p, residue)),
        }
    }

    /// The representative `p^lambda * u` with digits in `0..p`.
    pub fn representative(&self, ctx: &Context, dim: usize) -> Vec<u64> {
        match self {
            RvValue::Zero => vec![0; dim],
            RvValue::Leading { lambda, residue } => residue
                .iter()
                .map(|&u| (u * ctx.pow(*lambda)) % ctx.modulus())
                .collect(),
        }
    }
}

impl fmt::Display for RvValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RvValue::Zero => write!(f, "0"),
            RvValue::Leading { lambda, residue } => write!(f, "({lambda}, {residue:?})"),
        }
    }
}

/// A point of projective space over `F_p`, stored with first nonzero entry 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Direction(Vec<u64>);

impl Direction {
    /// Normalize a nonzero residue vector. Panics on the zero vector.
    pub fn from_residue(p: u64, u: &[u64]) -> Direction {
        let lead = *u
            .iter()
            .find(|&&c| c % p != 0)
            .expect("zero vector has no direction");
        let inv = inv_mod_prime(lead % p, p);
        Direction(u.iter().map(|&c| (c % p) * inv % p).collect())
    }

    pub fn vector(&self) -> &[u64] {
        &self.0
    }
}

pub(crate) fn inv_mod_prime(a: u64, p: u64) -> u64 {
    // Fermat; p is tiny.
    let mut r = 1;
    for _ in 0..p - 2 {
        r = r * a % p;
    }
    r
}

/// Square matrix over `Z/p^m`, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMatrix {
    size: usize,
    entries: Vec<u64>,
}

impl IntMatrix {
    pub fn new(ctx: &Context, rows: &[Vec<i64>]) -> Result<Self, PadicError> {
        let size = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != size) {
            return Err(PadicError::DimensionMismatch {
                expected: size,
                got: r.len(),
            });
        }
        Ok(IntMatrix {
            size,
            entries: rows.iter().flatten().map(|&a| ctx.reduce(a)).collect(),
        })
    }

    pub fn identity(size: usize) -> Self {
        let mut entries = vec![0; size * size];
        for i in 0..size {
            entries[i * size + i] = 1;
        }
        IntMatrix { size, entries }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.size + j]
    }

    fn set(&mut self, i: usize, j: usize, v: u64) {
        self.entries[i * self.size + j] = v;
    }

    /// Leibniz expansion; sizes here never exceed 4.
    pub fn det(&self, ctx: &Context) -> u64 {
        let n = self.size;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut total = 0u64;
        permute(&mut perm, 0, &mut |perm, sign| {
            let prod = (0..n).fold(1, |acc, i| ctx.mul(acc, self.get(i, perm[i])));
            total = if sign {
                ctx.add(total, prod)
            } else {
                ctx.sub(total, prod)
            };
        });
        total
    }

    pub fn is_unimodular(&self, ctx: &Context) -> bool {
        self.det(ctx) % ctx.p() != 0
    }

    pub fn apply(&self, ctx: &Context, x: &[u64]) -> Vec<u64> {
        (0..self.size)
            .map(|i| (0..self.size).fold(0, |acc, j| ctx.add(acc, ctx.mul(self.get(i, j), x[j]))))
            .collect()
    }

    pub fn mul(&self, ctx: &Context, other: &IntMatrix) -> IntMatrix {
        let n = self.size;
        let mut out = IntMatrix {
            size: n,
            entries: vec![0; n * n],
        };
        for i in 0..n {
            for j in 0..n {
                let v = (0..n).fold(0, |acc, k| {
                    ctx.add(acc, ctx.mul(self.get(i, k), other.get(k, j)))
                });
                out.set(i, j, v);
            }
        }
        out
    }

    /// Induced action on leading terms: `M . rv(x) = rv(M x)`.
    pub fn act_rv(&self, ctx: &Context, r: &RvValue) -> Result<RvValue, PadicError> {
        if !self.is_unimodular(ctx) {
            return Err(PadicError::NotUnimodular);
        }
        Ok(match r {
            RvValue::Zero => RvValue::Zero,
            RvValue::Leading { lambda, residue } => {
                let p = ctx.p();
                let u = (0..self.size)
                    .map(|i| {
                        (0..self.size).fold(0, |acc, j| (acc + self.get(i, j) % p * residue[j]) % p)
                    })
                    .collect();
                RvValue::Leading {
                    lambda: *lambda,
                    residue: u,
                }
            }
        })
    }

    /// Inverse over `Z/p^m` by Gauss-Jordan with unit pivots.
    pub fn inverse(&self, ctx: &Context) -> Result<IntMatrix, PadicError> {
        let n = self.size;
        let mut a = self.clone();
        let mut inv = IntMatrix::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| a.get(r, col) % ctx.p() != 0)
                .ok_or(PadicError::NotUnimodular)?;
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let s = ctx.inv(a.get(col, col)).expect("unit pivot");
            for j in 0..n {
                a.set(col, j, ctx.mul(a.get(col, j), s));
                inv.set(col, j, ctx.mul(inv.get(col, j), s));
            }
            for r in (0..n).filter(|&r| r != col) {
                let f = a.get(r, col);
                if f == 0 {
                    continue;
                }
                for j in 0..n {
                    a.set(r, j, ctx.sub(a.get(r, j), ctx.mul(f, a.get(col, j))));
                    inv.set(r, j, ctx.sub(inv.get(r, j), ctx.mul(f, inv.get(col, j))));
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            for k in 0..self.size {
                self.entries.swap(i * self.size + k, j * self.size + k);
            }
        }
    }

    /// A random element of `GL_n(O)`: random entries, rejected until the
    /// determinant is a unit.
    pub fn random_unimodular<R: Rng + ?Sized>(
        ctx: &Context,
        size: usize,
        rng: &mut R,
    ) -> IntMatrix {
        loop {
            let m = IntMatrix {
                size,
                entries: (0..size * size)
                    .map(|_| rng.random_range(0..ctx.modulus()))
                    .collect(),
            };
            if m.is_unimodular(ctx) {
                return m;
            }
        }
    }
}

fn permute(perm: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize], bool)) {
    fn rec(perm: &mut Vec<usize>, k: usize, sign: bool, f: &mut impl FnMut(&[usize], bool)) {
        if k == perm.len() {
            f(perm, sign);
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            rec(perm, k + 1, if i == k { sign } else { !sign }, f);
            perm.swap(k, i);
        }
    }
    rec(perm, k, true, f)
}
