//! Balls, coordinate projections and subspaces of `F_p^n`.
//!
//! A ball of depth `d` is the set of points agreeing with `residue` modulo
//! `p^d`. Its children are indexed by the next digit vector, in lexicographic
//! order, which makes the balls inside a fixed ball a complete `p^n`-ary tree.
//! [`BallLayout`] numbers the points of a ball in that tree order so every
//! sub-ball is a contiguous range.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::padic::{Context, PadicError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("depth {depth} exceeds precision {m}")]
    DepthTooLarge { depth: u32, m: u32 },
    #[error("residue {residue:?} is not reduced modulo p^{depth}")]
    BadResidue { residue: Vec<u64>, depth: u32 },
    #[error("projection index {0} out of range")]
    BadProjection(usize),
    #[error("projection does not exhibit the subspace")]
    NotExhibiting,
    #[error("vectors do not lift a basis of the subspace")]
    BadLift,
    #[error("cannot parse ball {0:?}, expected depth:(r1,...,rn)")]
    BadBallText(String),
}

/// `{x : x = residue mod p^depth}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Ball {
    pub depth: u32,
    pub residue: Vec<u64>,
}

impl Ball {
    /// The whole of `O^dim`.
    pub fn root(dim: usize) -> Ball {
        Ball {
            depth: 0,
            residue: vec![0; dim],
        }
    }

    pub fn new(ctx: &Context, depth: u32, residue: Vec<u64>) -> Result<Ball, GeometryError> {
        if depth > ctx.m() {
            return Err(GeometryError::DepthTooLarge { depth, m: ctx.m() });
        }
        if residue.len() != ctx.n() {
            return Err(PadicError::DimensionMismatch {
                expected: ctx.n(),
                got: residue.len(),
            }
            .into());
        }
        if residue.iter().any(|&r| r >= ctx.pow(depth)) {
            return Err(GeometryError::BadResidue { residue, depth });
        }
        Ok(Ball { depth, residue })
    }

    /// The depth-`depth` ball containing `x`.
    pub fn around(ctx: &Context, x: &[u64], depth: u32) -> Ball {
        let q = ctx.pow(depth);
        Ball {
            depth,
            residue: x.iter().map(|&c| c % q).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.residue.len()
    }

    pub fn contains(&self, ctx: &Context, x: &[u64]) -> bool {
        let q = ctx.pow(self.depth);
        x.iter().zip(&self.residue).all(|(&c, &r)| c % q == r)
    }

    pub fn contains_ball(&self, ctx: &Context, other: &Ball) -> bool {
        other.depth >= self.depth && self.contains(ctx, &other.residue)
    }

    /// Number of points, `p^(n(m - depth))`.
    pub fn size(&self, ctx: &Context) -> u64 {
        ctx.pow(ctx.m() - self.depth).pow(self.dim() as u32)
    }

    pub fn is_point(&self, ctx: &Context) -> bool {
        self.depth == ctx.m()
    }

    /// Child with digit vector `e` at position `depth`.
    pub fn child(&self, ctx: &Context, e: &[u64]) -> Ball {
        let q = ctx.pow(self.depth);
        Ball {
            depth: self.depth + 1,
            residue: self
                .residue
                .iter()
                .zip(e)
                .map(|(&r, &d)| r + d * q)
                .collect(),
        }
    }

    pub fn children(&self, ctx: &Context) -> Vec<Ball> {
        assert!(self.depth < ctx.m(), "a point has no children");
        let ds = DigitSpace::new(ctx.p(), self.dim());
        (0..ds.size())
            .map(|e| self.child(ctx, &ds.vector(e)))
            .collect()
    }

    pub fn parent(&self, ctx: &Context) -> Option<Ball> {
        (self.depth > 0).then(|| Ball::around(ctx, &self.residue, self.depth - 1))
    }

    /// Points in lexicographic order.
    pub fn points<'a>(&'a self, ctx: &'a Context) -> impl Iterator<Item = Vec<u64>> + 'a {
        let layout = BallLayout::new(ctx, self);
        (0..layout.size()).map(move |i| layout.lex_point(i))
    }

    /// Least point of the ball (digits above `depth` all zero).
    pub fn base_point(&self) -> Vec<u64> {
        self.residue.clone()
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r: Vec<String> = self.residue.iter().map(|c| c.to_string()).collect();
        write!(f, "{}:({})", self.depth, r.join(","))
    }
}

/// Parses the [`Display`](fmt::Display) form `depth:(r1,...,rn)`. The
/// result is not checked against a context; use [`Ball::new`] for that.
impl std::str::FromStr for Ball {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GeometryError::BadBallText(s.to_string());
        let (depth, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let inner = rest
            .trim()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let depth = depth.trim().parse().map_err(|_| bad())?;
        let residue = inner
            .split(',')
            .map(|c| c.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        Ok(Ball { depth, residue })
    }
}

/// `F_p^dim` with vectors numbered `0..p^dim`, first coordinate most
/// significant, so numeric order is lexicographic order.
#[derive(Debug, Clone)]
pub struct DigitSpace {
    p: u64,
    dim: usize,
    size: usize,
    add: Option<Vec<u32>>,
}

const ADD_TABLE_LIMIT: usize = 2048;

impl DigitSpace {
    pub fn new(p: u64, dim: usize) -> DigitSpace {
        let size = (p as usize).pow(dim as u32);
        let mut ds = DigitSpace {
            p,
            dim,
            size,
            add: None,
        };
        if size <= ADD_TABLE_LIMIT {
            let mut table = vec![0u32; size * size];
            for a in 0..size {
                for b in 0..size {
                    table[a * size + b] = ds.add_slow(a, b) as u32;
                }
            }
            ds.add = Some(table);
        }
        ds
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn vector(&self, idx: usize) -> Vec<u64> {
        let mut v = vec![0; self.dim];
        let mut r = idx as u64;
        for c in v.iter_mut().rev() {
            *c = r % self.p;
            r /= self.p;
        }
        v
    }

    pub fn index(&self, v: &[u64]) -> usize {
        v.iter()
            .fold(0, |acc, &c| acc * self.p as usize + (c % self.p) as usize)
    }

    fn add_slow(&self, a: usize, b: usize) -> usize {
        let (va, vb) = (self.vector(a), self.vector(b));
        let s: Vec<u64> = va.iter().zip(&vb).map(|(x, y)| (x + y) % self.p).collect();
        self.index(&s)
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        match &self.add {
            Some(t) => t[a * self.size + b] as usize,
            None => self.add_slow(a, b),
        }
    }

    pub fn neg(&self, a: usize) -> usize {
        let v: Vec<u64> = self
            .vector(a)
            .iter()
            .map(|&c| (self.p - c) % self.p)
            .collect();
        self.index(&v)
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    pub fn scale(&self, c: u64, a: usize) -> usize {
        let v: Vec<u64> = self.vector(a).iter().map(|&x| x * c % self.p).collect();
        self.index(&v)
    }
}

/// Numbering of the points of a ball (of any dimension) in tree order and in
/// lexicographic order.
///
/// Tree order writes a point as its digit vectors `d_depth, ..., d_{m-1}`
/// (each numbered as in [`DigitSpace`]) and reads them as a base-`p^dim`
/// number, so the sub-ball at depth `k` with a given prefix is a contiguous
/// block of length `(p^dim)^(m-k)`.
#[derive(Debug, Clone)]
pub struct BallLayout {
    p: u64,
    m: u32,
    dim: usize,
    depth: u32,
    residue: Vec<u64>,
    fanout: usize,
    size: usize,
}

impl BallLayout {
    pub fn new(ctx: &Context, ball: &Ball) -> BallLayout {
        BallLayout::raw(ctx.p(), ctx.m(), ball.depth, ball.residue.clone())
    }

    pub fn raw(p: u64, m: u32, depth: u32, residue: Vec<u64>) -> BallLayout {
        let dim = residue.len();
        let fanout = (p as usize).pow(dim as u32);
        let size = fanout.pow(m - depth);
        BallLayout {
            p,
            m,
            dim,
            depth,
            residue,
            fanout,
            size,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn fanout(&self) -> usize {
        self.fanout
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn residue(&self) -> &[u64] {
        &self.residue
    }

    /// Number of nodes at absolute depth `k` (`depth <= k <= m`).
    pub fn nodes_at(&self, k: u32) -> usize {
        self.fanout.pow(k - self.depth)
    }

    /// Leaves below one node of depth `k`.
    pub fn block(&self, k: u32) -> usize {
        self.fanout.pow(self.m - k)
    }

    pub fn tree_index(&self, x: &[u64]) -> usize {
        let mut idx = 0usize;
        for k in self.depth..self.m {
            let q = self.p.pow(k);
            let d = x.iter().fold(0usize, |acc, &c| {
                acc * self.p as usize + ((c / q) % self.p) as usize
            });
            idx = idx * self.fanout + d;
        }
        idx
    }

    pub fn tree_point(&self, idx: usize) -> Vec<u64> {
        let mut x = self.residue.clone();
        let mut rest = idx;
        for k in (self.depth..self.m).rev() {
            let mut d = rest % self.fanout;
            rest /= self.fanout;
            let q = self.p.pow(k);
            for c in x.iter_mut().rev() {
                *c += (d as u64 % self.p) * q;
                d /= self.p as usize;
            }
        }
        x
    }

    pub fn lex_index(&self, x: &[u64]) -> usize {
        let side = self.p.pow(self.m - self.depth);
        let q = self.p.pow(self.depth);
        x.iter()
            .fold(0usize, |acc, &c| acc * side as usize + (c / q) as usize)
    }

    pub fn lex_point(&self, idx: usize) -> Vec<u64> {
        let side = self.p.pow(self.m - self.depth) as usize;
        let q = self.p.pow(self.depth);
        let mut x = vec![0; self.dim];
        let mut rest = idx;
        for i in (0..self.dim).rev() {
            x[i] = self.residue[i] + (rest % side) as u64 * q;
            rest /= side;
        }
        x
    }

    /// `perm[lex] = tree`.
    pub fn lex_to_tree(&self) -> Vec<usize> {
        (0..self.size)
            .map(|i| self.tree_index(&self.lex_point(i)))
            .collect()
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        let q = self.p.pow(self.depth);
        x.len() == self.dim && x.iter().zip(&self.residue).all(|(&c, &r)| c % q == r)
    }

    /// The ball of the node with tree-order number `node` at depth `k`.
    pub fn node_ball(&self, k: u32, node: usize) -> Ball {
        let x = self.tree_point(node * self.block(k));
        let q = self.p.pow(k);
        Ball {
            depth: k,
            residue: x.iter().map(|&c| c % q).collect(),
        }
    }

    /// Tree-order number of the depth-`k` node containing `ball` (which must
    /// have depth at least `k`).
    pub fn node_of(&self, k: u32, x: &[u64]) -> usize {
        self.tree_index(x) / self.block(k)
    }
}

/// Coordinate projection onto the (0-based, increasing) index set `coords`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Projection {
    coords: Vec<usize>,
}

impl Projection {
    pub fn new(n: usize, mut coords: Vec<usize>) -> Result<Projection, GeometryError> {
        coords.sort_unstable();
        coords.dedup();
        if let Some(&bad) = coords.iter().find(|&&c| c >= n) {
            return Err(GeometryError::BadProjection(bad));
        }
        Ok(Projection { coords })
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        self.coords.iter().map(|&i| x[i]).collect()
    }

    /// The complementary coordinates.
    pub fn complement(&self, n: usize) -> Projection {
        Projection {
            coords: (0..n).filter(|i| !self.coords.contains(i)).collect(),
        }
    }

    /// Whether the residue map restricted to `v` is a bijection onto
    /// `F_p^|I|`.
    pub fn exhibits(&self, v: &Subspace) -> bool {
        if self.dim() != v.dim() {
            return false;
        }
        let rows: Vec<Vec<u64>> = v.basis().iter().map(|b| self.apply(b)).collect();
        rank_mod_p(v.p(), rows, self.dim()) == self.dim()
    }

    /// Rebuild a point from its projection `a` and complement part `b`.
    pub fn join(&self, n: usize, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut x = vec![0; n];
        let (mut ia, mut ib) = (0, 0);
        for (i, c) in x.iter_mut().enumerate() {
            if self.coords.contains(&i) {
                *c = a[ia];
                ia += 1;
            } else {
                *c = b[ib];
                ib += 1;
            }
        }
        x
    }
}

impl fmt::Display for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.coords.iter().map(|i| format!("x{}", i + 1)).collect();
        write!(f, "{{{}}}", c.join(","))
    }
}

fn rank_mod_p(p: u64, rows: Vec<Vec<u64>>, width: usize) -> usize {
    rref(p, rows, width).len()
}

/// Reduced row echelon form over `F_p`; zero rows dropped.
fn rref(p: u64, mut rows: Vec<Vec<u64>>, width: usize) -> Vec<Vec<u64>> {
    for r in rows.iter_mut() {
        for c in r.iter_mut() {
            *c %= p;
        }
    }
    let mut pivot_row = 0;
    for col in 0..width {
        let Some(found) = (pivot_row..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(pivot_row, found);
        let inv = crate::padic::inv_mod_prime(rows[pivot_row][col], p);
        for c in rows[pivot_row].iter_mut() {
            *c = *c * inv % p;
        }
        for r in 0..rows.len() {
            if r != pivot_row && rows[r][col] != 0 {
                let f = rows[r][col];
                let pivot = rows[pivot_row].clone();
                for (c, &q) in rows[r].iter_mut().zip(&pivot) {
                    *c = (*c + (p - f) * q) % p;
                }
            }
        }
        pivot_row += 1;
    }
    rows.truncate(pivot_row);
    rows
}

/// A subspace of `F_p^n`, stored by its reduced row echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subspace {
    p: u64,
    n: usize,
    basis: Vec<Vec<u64>>,
}

impl Subspace {
    pub fn span(p: u64, n: usize, vectors: Vec<Vec<u64>>) -> Subspace {
        Subspace {
            p,
            n,
            basis: rref(p, vectors, n),
        }
    }

    pub fn zero(p: u64, n: usize) -> Subspace {
        Subspace {
            p,
            n,
            basis: vec![],
        }
    }

    pub fn full(p: u64, n: usize) -> Subspace {
        let basis = (0..n)
            .map(|i| (0..n).map(|j| u64::from(i == j)).collect())
            .collect();
        Subspace { p, n, basis }
    }

    pub fn line(p: u64, v: &[u64]) -> Subspace {
        Subspace::span(p, v.len(), vec![v.to_vec()])
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u64>] {
        &self.basis
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        rank_mod_p(self.p, rows, self.n) == self.dim()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|b| self.contains(b))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        Subspace::span(self.p, self.n, rows)
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        let members: Vec<Vec<u64>> = self.members().filter(|v| other.contains(v)).collect();
        Subspace::span(self.p, self.n, members)
    }

    /// All `p^dim` vectors, in order of their coefficient tuples.
    pub fn members(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        let ds = DigitSpace::new(self.p, self.dim());
        (0..ds.size()).map(move |i| self.combine(&ds.vector(i)))
    }

    /// `sum c_i b_i` over the echelon basis.
    pub fn combine(&self, coeffs: &[u64]) -> Vec<u64> {
        let mut v = vec![0; self.n];
        for (c, b) in coeffs.iter().zip(&self.basis) {
            for (x, y) in v.iter_mut().zip(b) {
                *x = (*x + c * y) % self.p;
            }
        }
        v
    }

    /// Coefficients of `v` in the echelon basis, if `v` lies in the subspace.
    pub fn coordinates(&self, v: &[u64]) -> Option<Vec<u64>> {
        let coeffs: Vec<u64> = self.pivots().iter().map(|&c| v[c] % self.p).collect();
        let w = self.combine(&coeffs);
        (w.iter().zip(v).all(|(a, b)| a % self.p == b % self.p)).then_some(coeffs)
    }

    fn pivots(&self) -> Vec<usize> {
        self.basis
            .iter()
            .map(|b| b.iter().position(|&c| c != 0).unwrap())
            .collect()
    }

    /// Membership table over the vectors of `ds`.
    pub fn mask(&self, ds: &DigitSpace) -> Vec<bool> {
        let mut mask = vec![false; ds.size()];
        for v in self.members() {
            mask[ds.index(&v)] = true;
        }
        mask
    }

    pub fn from_mask(ds: &DigitSpace, mask: &[bool]) -> Subspace {
        let vectors = mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| ds.vector(i))
            .collect();
        Subspace::span(ds.p(), ds.dim(), vectors)
    }

    /// Every subspace of `F_p^n`, by increasing dimension and then by
    /// echelon basis.
    pub fn all(p: u64, n: usize) -> Vec<Subspace> {
        (0..=n).flat_map(|d| Subspace::of_dim(p, n, d)).collect()
    }

    pub fn of_dim(p: u64, n: usize, d: usize) -> Vec<Subspace> {
        let mut out = vec![];
        for pivots in combinations(n, d) {
            // free slots: row i, column c > pivot_i with c not a pivot
            let slots: Vec<(usize, usize)> = pivots
                .iter()
                .enumerate()
                .flat_map(|(i, &pc)| {
                    ((pc + 1)..n)
                        .filter(|c| !pivots.contains(c))
                        .map(move |c| (i, c))
                })
                .collect();
            let ds = DigitSpace::new(p, slots.len());
            for k in 0..ds.size() {
                let vals = ds.vector(k);
                let mut basis: Vec<Vec<u64>> = pivots
                    .iter()
                    .map(|&pc| (0..n).map(|c| u64::from(c == pc)).collect())
                    .collect();
                for (&(i, c), &v) in slots.iter().zip(&vals) {
                    basis[i][c] = v;
                }
                out.push(Subspace { p, n, basis });
            }
        }
        out
    }

    pub fn lines(p: u64, n: usize) -> Vec<Subspace> {
        Subspace::of_dim(p, n, 1)
    }

    /// Coordinate projections exhibiting this subspace, in lexicographic order
    /// of index sets.
    pub fn exhibitions(&self) -> Vec<Projection> {
        combinations(self.n, self.dim())
            .into_iter()
            .map(|coords| Projection { coords })
            .filter(|pi| pi.exhibits(self))
            .collect()
    }

    /// The basis vectors with entries `0..p` read in `O^n`.
    pub fn canonical_lift(&self, ctx: &Context) -> Lift {
        Lift {
            generators: self.basis.clone(),
            modulus: ctx.modulus(),
        }
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b: Vec<String> = self.basis.iter().map(|v| format!("{v:?}")).collect();
        write!(f, "span[{}]", b.join(", "))
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    rec(0, n, k, &mut vec![], &mut out);
    out
}

/// A free `O`-submodule `V~_O` of `O^n` whose reduction is a given subspace,
/// given by generators whose residues are a basis of it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lift {
    generators: Vec<Vec<u64>>,
    modulus: u64,
}

impl Lift {
    pub fn new(
        ctx: &Context,
        v: &Subspace,
        generators: Vec<Vec<u64>>,
    ) -> Result<Lift, GeometryError> {
        let residues: Vec<Vec<u64>> = generators
            .iter()
            .map(|g| g.iter().map(|c| c % ctx.p()).collect())
            .collect();
        if generators.len() != v.dim() || Subspace::span(ctx.p(), v.ambient_dim(), residues) != *v {
            return Err(GeometryError::BadLift);
        }
        Ok(Lift {
            generators,
            modulus: ctx.modulus(),
        })
    }

    /// A random lift: each basis vector plus `p` times a random vector.
    pub fn random<R: Rng + ?Sized>(ctx: &Context, v: &Subspace, rng: &mut R) -> Lift {
        let generators = v
            .basis()
            .iter()
            .map(|b| {
                b.iter()
                    .map(|&c| {
                        (c + ctx.p() * rng.random_range(0..ctx.pow(ctx.m() - 1))) % ctx.modulus()
                    })
                    .collect()
            })
            .collect();
        Lift {
            generators,
            modulus: ctx.modulus(),
        }
    }

    pub fn generators(&self) -> &[Vec<u64>] {
        &self.generators
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// `sum c_i g_i` in `(Z/p^m)^n`.
    pub fn combine(&self, coeffs: &[u64]) -> Vec<u64> {
        let n = self.generators.first().map_or(0, |g| g.len());
        let mut v = vec![0u64; n];
        for (c, g) in coeffs.iter().zip(&self.generators) {
            for (x, y) in v.iter_mut().zip(g) {
                *x = (*x + c % self.modulus * y) % self.modulus;
            }
        }
        v
    }

    /// Every element of the lift, with coefficients in `Z/p^m`.
    pub fn elements(&self) -> Vec<Vec<u64>> {
        let mut out = vec![];
        let d = self.dim();
        let mut coeffs = vec![0u64; d];
        loop {
            out.push(self.combine(&coeffs));
            let mut i = 0;
            loop {
                if i == d {
                    out.sort();
                    out.dedup();
                    return out;
                }
                coeffs[i] += 1;
                if coeffs[i] < self.modulus {
                    break;
                }
                coeffs[i] = 0;
                i += 1;
            }
        }
    }
}
