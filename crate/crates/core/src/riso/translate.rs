//! Translatability of colorings on balls.
//!
//! In normal form a coloring `chi` of a ball `B` of depth `d` is
//! `V`-translatable iff, for the children `C_e` of `B` indexed by the digit
//! `e` at position `d`:
//!
//! - children in the same coset `e + V` are risometric as colored balls, and
//! - every child is itself `V`-translatable.
//!
//! So `tsp(B)` is the intersection of the stabilizer `{u : C_e ~ C_{e+u}}`
//! with the `tsp` of all children, which [`TspTable`] computes for all balls
//! in one pass. Straighteners are built along the same recursion.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::defset::Coloring;
use crate::geometry::{Ball, BallLayout, DigitSpace, Lift, Projection, Subspace};
use crate::padic::{Context, IntMatrix};

use super::canon::{CanonTable, ColoredTree};
use super::risometry::Risometry;
use super::RisoError;

/// Which stage rejected a translatability query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Filter {
    /// Two fibers of the exhibition are not risometric.
    FiberEquivalence,
    /// The coloring is not pointwise translatable.
    PointwiseTranslatability,
    /// The exact search found no straightener.
    Search,
}

/// A risometry `phi` of `B` with `pi . phi = pi` and `chi . phi` invariant
/// under translation by the lift of `V`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Straightener {
    pub ball: Ball,
    pub subspace: Subspace,
    pub projection: Projection,
    pub lift: Lift,
    pub risometry: Risometry,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Translatability {
    Translatable(Box<Straightener>),
    Rejected(Filter),
}

#[derive(Debug, Clone, Default)]
pub struct TranslateOptions {
    /// Run the fiber and pointwise pre-filters before the search.
    pub prefilters: bool,
    pub projection: Option<Projection>,
    pub lift: Option<Lift>,
}

fn restricted_tree(chi: &Coloring, ball: &Ball) -> Result<ColoredTree, RisoError> {
    let ctx = chi.ctx();
    if !chi.ball().contains_ball(ctx, ball) || ball.dim() != ctx.n() {
        return Err(RisoError::DomainMismatch);
    }
    let outer = chi.layout();
    Ok(ColoredTree::from_fn(BallLayout::new(ctx, ball), |x| {
        chi.colors()[outer.lex_index(x)]
    }))
}

fn generator_indices(ds: &DigitSpace, v: &Subspace) -> Vec<usize> {
    v.basis().iter().map(|b| ds.index(b)).collect()
}

/// `V`-translatability of the node `(k, node)` of tree 0 of `table`.
fn node_translatable(table: &CanonTable, m: u32, gens: &[usize], k: u32, node: usize) -> bool {
    if k == m || gens.is_empty() {
        return true;
    }
    let ds = table.digit_space();
    let fan = ds.size();
    let kids = table.child_ranks(0, k, node);
    gens.iter()
        .all(|&g| (0..fan).all(|e| kids[e] == kids[ds.add(e, g)]))
        && (0..fan).all(|e| node_translatable(table, m, gens, k + 1, node * fan + e))
}

/// Exact decision, without building a straightener.
pub fn decide_translatable(chi: &Coloring, ball: &Ball, v: &Subspace) -> Result<bool, RisoError> {
    let tree = restricted_tree(chi, ball)?;
    let table = CanonTable::build(&[&tree])?;
    let gens = generator_indices(table.digit_space(), v);
    Ok(node_translatable(
        &table,
        chi.ctx().m(),
        &gens,
        ball.depth,
        0,
    ))
}

/// Translation space of `chi` on `ball`: the sum of all translatable lines.
pub fn tsp(chi: &Coloring, ball: &Ball) -> Result<Subspace, RisoError> {
    let ctx = chi.ctx();
    let tree = restricted_tree(chi, ball)?;
    let table = CanonTable::build(&[&tree])?;
    let ds = table.digit_space();
    let mut acc = Subspace::zero(ctx.p(), ctx.n());
    for line in Subspace::lines(ctx.p(), ctx.n()) {
        if !acc.contains_subspace(&line)
            && node_translatable(
                &table,
                ctx.m(),
                &generator_indices(ds, &line),
                ball.depth,
                0,
            )
        {
            acc = acc.sum(&line);
        }
    }
    Ok(acc)
}

/// Translatability with a straightener, using the default exhibition and the
/// canonical lift, after the pre-filters.
pub fn is_translatable(
    chi: &Coloring,
    ball: &Ball,
    v: &Subspace,
) -> Result<Option<Straightener>, RisoError> {
    let opts = TranslateOptions {
        prefilters: true,
        ..Default::default()
    };
    Ok(match translatability(chi, ball, v, &opts)? {
        Translatability::Translatable(s) => Some(*s),
        Translatability::Rejected(_) => None,
    })
}

pub fn translatability(
    chi: &Coloring,
    ball: &Ball,
    v: &Subspace,
    opts: &TranslateOptions,
) -> Result<Translatability, RisoError> {
    let ctx = *chi.ctx();
    let projection = match &opts.projection {
        Some(pi) if pi.exhibits(v) => pi.clone(),
        Some(_) => return Err(RisoError::NotExhibiting),
        None => v
            .exhibitions()
            .into_iter()
            .next()
            .ok_or(RisoError::NotExhibiting)?,
    };
    let lift = match &opts.lift {
        Some(l) => Lift::new(&ctx, v, l.generators().to_vec()).map_err(|_| RisoError::BadLift)?,
        None => v.canonical_lift(&ctx),
    };
    let tree = restricted_tree(chi, ball)?;
    if opts.prefilters {
        if !fibers_equivalent_tree(&ctx, &tree, ball, &projection)? {
            return Ok(Translatability::Rejected(Filter::FiberEquivalence));
        }
        if !pointwise_tree(&ctx, &tree, ball, v, &projection) {
            return Ok(Translatability::Rejected(Filter::PointwiseTranslatability));
        }
    }
    let table = CanonTable::build(&[&tree])?;
    let gens = generator_indices(table.digit_space(), v);
    if !node_translatable(&table, ctx.m(), &gens, ball.depth, 0) {
        return Ok(Translatability::Rejected(Filter::Search));
    }
    let raw = Builder::new(&ctx, &tree, &table, v, &lift).build(ball.depth, 0);
    let fibered = respect_fibers(&ctx, ball, &raw, &projection, &lift)?;
    let risometry = Risometry::from_tree_map(&ctx, ball, &fibered)?;
    Ok(Translatability::Translatable(Box::new(Straightener {
        ball: ball.clone(),
        subspace: v.clone(),
        projection,
        lift,
        risometry,
    })))
}

struct Builder<'a> {
    ctx: &'a Context,
    layout: &'a BallLayout,
    table: &'a CanonTable,
    /// least element of each coset `e + V`
    rep: Vec<usize>,
    /// for `u` in `V`, the lift element `sum c_i g_i` with `u = sum c_i res(g_i)`
    shift: HashMap<usize, Vec<u64>>,
}

impl<'a> Builder<'a> {
    fn new(
        ctx: &'a Context,
        tree: &'a ColoredTree,
        table: &'a CanonTable,
        v: &Subspace,
        lift: &Lift,
    ) -> Self {
        let ds = table.digit_space();
        let members: Vec<usize> = v.members().map(|u| ds.index(&u)).collect();
        let rep = (0..ds.size())
            .map(|e| members.iter().map(|&u| ds.add(e, u)).min().unwrap())
            .collect();
        let coeffs = DigitSpace::new(ctx.p(), lift.dim());
        let shift = (0..coeffs.size())
            .map(|i| {
                let c = coeffs.vector(i);
                let w = lift.combine(&c);
                (ds.index(&w), w)
            })
            .collect();
        Builder {
            ctx,
            layout: tree.layout(),
            table,
            rep,
            shift,
        }
    }

    /// A self-map of the node `(k, node)` (on leaf offsets) after which the
    /// coloring is invariant under `p^k` times the lift.
    fn build(&self, k: u32, node: usize) -> Vec<usize> {
        let m = self.ctx.m();
        if k == m {
            return vec![0];
        }
        let ds = self.table.digit_space();
        let fan = ds.size();
        let block = self.layout.block(k + 1);
        let mut out = vec![0; fan * block];
        let mut rep_maps: HashMap<usize, Vec<usize>> = HashMap::new();
        for e in 0..fan {
            let e0 = self.rep[e];
            let phi0 = rep_maps
                .entry(e0)
                .or_insert_with(|| self.build(k + 1, node * fan + e0))
                .clone();
            if e == e0 {
                for (o, &t) in phi0.iter().enumerate() {
                    out[e * block + o] = e * block + t;
                }
                continue;
            }
            let u = ds.sub(e, e0);
            let w = &self.shift[&u];
            let s: Vec<u64> = w
                .iter()
                .map(|&c| self.ctx.mul(c, self.ctx.pow(k)))
                .collect();
            let rho = self
                .table
                .iso_map((0, node * fan + e0), (0, node * fan + e), k + 1)
                .expect("cosets are risometric");
            let base_e = (node * fan + e) * block;
            let base_e0 = (node * fan + e0) * block;
            for o in 0..block {
                let y = self.layout.tree_point(base_e + o);
                let z = self.ctx.sub_points(&y, &s);
                let oz = self.layout.tree_index(&z) - base_e0;
                out[e * block + o] = e * block + rho[phi0[oz]];
            }
        }
        out
    }
}

/// Modify a straightener so that it preserves `pi`: with `theta` its inverse,
/// `theta'(z) = theta(z) + lift(pi(z) - pi(theta(z)))`, and return the
/// inverse of `theta'`.
fn respect_fibers(
    ctx: &Context,
    ball: &Ball,
    phi: &[usize],
    pi: &Projection,
    lift: &Lift,
) -> Result<Vec<usize>, RisoError> {
    let layout = BallLayout::new(ctx, ball);
    let d = pi.dim();
    if d == 0 {
        return Ok(phi.to_vec());
    }
    // pi restricted to the lift, as a d x d matrix acting on coefficients
    let rows: Vec<Vec<i64>> = (0..d)
        .map(|j| {
            lift.generators()
                .iter()
                .map(|g| pi.apply(g)[j] as i64)
                .collect()
        })
        .collect();
    let inv = IntMatrix::new(ctx, &rows)?.inverse(ctx)?;
    let mut theta = vec![0; phi.len()];
    for (i, &j) in phi.iter().enumerate() {
        theta[j] = i;
    }
    let mut theta2_inv = vec![usize::MAX; phi.len()];
    for (z_idx, &t) in theta.iter().enumerate() {
        let z = layout.tree_point(z_idx);
        let tz = layout.tree_point(t);
        let a = ctx.sub_points(&pi.apply(&z), &pi.apply(&tz));
        let w = lift.combine(&inv.apply(ctx, &a));
        let t2 = ctx.add_points(&tz, &w);
        if !layout.contains(&t2) {
            return Err(RisoError::NotRisometry);
        }
        theta2_inv[layout.tree_index(&t2)] = z_idx;
    }
    if theta2_inv.contains(&usize::MAX) {
        return Err(RisoError::NotRisometry);
    }
    Ok(theta2_inv)
}

/// Whether all fibers of `pi` in `ball` are risometric as colored balls.
pub fn fibers_equivalent(chi: &Coloring, ball: &Ball, pi: &Projection) -> Result<bool, RisoError> {
    let tree = restricted_tree(chi, ball)?;
    fibers_equivalent_tree(chi.ctx(), &tree, ball, pi)
}

fn fibers_equivalent_tree(
    ctx: &Context,
    tree: &ColoredTree,
    ball: &Ball,
    pi: &Projection,
) -> Result<bool, RisoError> {
    let n = ctx.n();
    let comp = pi.complement(n);
    let base = BallLayout::raw(ctx.p(), ctx.m(), ball.depth, pi.apply(&ball.residue));
    let fiber_layout = BallLayout::raw(ctx.p(), ctx.m(), ball.depth, comp.apply(&ball.residue));
    let layout = tree.layout();
    let fibers: Vec<ColoredTree> = (0..base.size())
        .map(|a_idx| {
            let a = base.lex_point(a_idx);
            ColoredTree::from_fn(fiber_layout.clone(), |y| {
                tree.colors()[layout.tree_index(&pi.join(n, &a, y))]
            })
        })
        .collect();
    let refs: Vec<&ColoredTree> = fibers.iter().collect();
    let table = CanonTable::build(&refs)?;
    let r0 = table.root_rank(0);
    Ok((0..fibers.len()).all(|i| table.root_rank(i) == r0))
}

/// For every `y` in the ball and every `x'` in `pi(B)` there is `y'` over
/// `x'` with the same color and `dir(y - y')` in `V`.
pub fn pointwise_translatable(
    chi: &Coloring,
    ball: &Ball,
    v: &Subspace,
    pi: &Projection,
) -> Result<bool, RisoError> {
    if !pi.exhibits(v) {
        return Err(RisoError::NotExhibiting);
    }
    let tree = restricted_tree(chi, ball)?;
    Ok(pointwise_tree(chi.ctx(), &tree, ball, v, pi))
}

fn pointwise_tree(
    ctx: &Context,
    tree: &ColoredTree,
    ball: &Ball,
    v: &Subspace,
    pi: &Projection,
) -> bool {
    let ds = DigitSpace::new(ctx.p(), ctx.n());
    let in_v = v.mask(&ds);
    let layout = tree.layout();
    let base = BallLayout::raw(ctx.p(), ctx.m(), ball.depth, pi.apply(&ball.residue));
    let points: Vec<Vec<u64>> = (0..layout.size()).map(|i| layout.tree_point(i)).collect();
    let proj: Vec<usize> = points
        .iter()
        .map(|x| base.lex_index(&pi.apply(x)))
        .collect();
    let mut classes: HashMap<u32, Vec<usize>> = HashMap::new();
    for (i, &c) in tree.colors().iter().enumerate() {
        classes.entry(c).or_default().push(i);
    }
    let mut seen = vec![u32::MAX; base.size()];
    for (i, y) in points.iter().enumerate() {
        let mut covered = 0;
        for &j in &classes[&tree.colors()[i]] {
            let ok = match ctx.rv(&ctx.sub_points(y, &points[j])) {
                crate::padic::RvValue::Zero => true,
                crate::padic::RvValue::Leading { residue, .. } => in_v[ds.index(&residue)],
            };
            if ok && seen[proj[j]] != i as u32 {
                seen[proj[j]] = i as u32;
                covered += 1;
            }
        }
        if covered < base.size() {
            return false;
        }
    }
    true
}

/// `tsp` of every ball inside the domain of a coloring.
pub struct TspTable {
    ctx: Context,
    layout: BallLayout,
    ds: DigitSpace,
    /// `masks[k - depth][node * fan + u]`: whether `u` lies in `tsp`
    masks: Vec<Vec<bool>>,
}

impl TspTable {
    pub fn build(chi: &Coloring) -> Result<TspTable, RisoError> {
        let tree = ColoredTree::from_coloring(chi);
        let table = CanonTable::build(&[&tree])?;
        Ok(TspTable::from_table(chi.ctx(), &tree, &table))
    }

    pub(crate) fn from_table(ctx: &Context, tree: &ColoredTree, table: &CanonTable) -> TspTable {
        let layout = tree.layout().clone();
        let ds = table.digit_space().clone();
        let fan = ds.size();
        let depth = layout.depth();
        let m = ctx.m();
        let mut masks: Vec<Vec<bool>> = vec![vec![]; (m - depth + 1) as usize];
        masks[(m - depth) as usize] = vec![true; layout.size() * fan];
        for k in (depth..m).rev() {
            let nodes = layout.nodes_at(k);
            let mut level = vec![false; nodes * fan];
            let below = &masks[(k + 1 - depth) as usize];
            for node in 0..nodes {
                let kids = table.child_ranks(0, k, node);
                for u in 0..fan {
                    let in_children = (0..fan).all(|e| below[(node * fan + e) * fan + u]);
                    level[node * fan + u] =
                        in_children && (0..fan).all(|e| kids[e] == kids[ds.add(e, u)]);
                }
            }
            masks[(k - depth) as usize] = level;
        }
        TspTable {
            ctx: *ctx,
            layout,
            ds,
            masks,
        }
    }

    /// `tsp` of the node numbered `node` at depth `k` (tree order).
    pub fn tsp_node(&self, k: u32, node: usize) -> Subspace {
        let fan = self.ds.size();
        let level = &self.masks[(k - self.layout.depth()) as usize];
        Subspace::from_mask(&self.ds, &level[node * fan..(node + 1) * fan])
    }

    pub fn tsp(&self, ball: &Ball) -> Subspace {
        assert!(self.layout.contains(&ball.residue) && ball.depth >= self.layout.depth());
        self.tsp_node(ball.depth, self.layout.node_of(ball.depth, &ball.residue))
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn layout(&self) -> &BallLayout {
        &self.layout
    }
}

/// The family `alpha_x`, `x` in `pi(B - B)`, obtained from a straightener.
#[derive(Debug, Clone)]
pub struct Translater {
    pub ball: Ball,
    pub projection: Projection,
    pub subspace: Subspace,
    pub family: Vec<(Vec<u64>, Risometry)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranslaterDefect {
    NotColorPreserving { x: Vec<u64> },
    NotAdditive { x: Vec<u64>, y: Vec<u64> },
    WrongProjection { x: Vec<u64> },
    DirectionOutsideV { x: Vec<u64> },
}

impl Translater {
    /// `alpha_x = phi . (translation by the lift element over x) . phi^-1`.
    pub fn from_straightener(ctx: &Context, s: &Straightener) -> Result<Translater, RisoError> {
        let layout = BallLayout::new(ctx, &s.ball);
        let d = s.projection.dim();
        let phi = s.risometry.tree_map();
        let mut phi_inv = vec![0; phi.len()];
        for (i, &j) in phi.iter().enumerate() {
            phi_inv[j] = i;
        }
        let rows: Vec<Vec<i64>> = (0..d)
            .map(|j| {
                s.lift
                    .generators()
                    .iter()
                    .map(|g| s.projection.apply(g)[j] as i64)
                    .collect()
            })
            .collect();
        let inv = if d > 0 {
            Some(IntMatrix::new(ctx, &rows)?.inverse(ctx)?)
        } else {
            None
        };
        let diffs = BallLayout::raw(ctx.p(), ctx.m(), s.ball.depth, vec![0; d]);
        let mut family = vec![];
        for xi in 0..diffs.size() {
            let x = diffs.lex_point(xi);
            let w = match &inv {
                Some(inv) => s.lift.combine(&inv.apply(ctx, &x)),
                None => vec![0; ctx.n()],
            };
            let map: Vec<usize> = (0..phi.len())
                .map(|i| {
                    let z = layout.tree_point(phi_inv[i]);
                    phi[layout.tree_index(&ctx.add_points(&z, &w))]
                })
                .collect();
            family.push((x, Risometry::from_tree_map(ctx, &s.ball, &map)?));
        }
        Ok(Translater {
            ball: s.ball.clone(),
            projection: s.projection.clone(),
            subspace: s.subspace.clone(),
            family,
        })
    }

    /// Check conditions (1)-(4) of a translater exhaustively.
    pub fn check(&self, chi: &Coloring) -> Result<(), TranslaterDefect> {
        let ctx = chi.ctx();
        let layout = BallLayout::new(ctx, &self.ball);
        let ds = DigitSpace::new(ctx.p(), ctx.n());
        let in_v = self.subspace.mask(&ds);
        let outer = chi.layout();
        let color = |x: &[u64]| chi.colors()[outer.lex_index(x)];
        let maps: Vec<Vec<usize>> = self.family.iter().map(|(_, a)| a.tree_map()).collect();
        let index: HashMap<Vec<u64>, usize> = self
            .family
            .iter()
            .enumerate()
            .map(|(i, (x, _))| (x.clone(), i))
            .collect();
        for ((x, _), map) in self.family.iter().zip(&maps) {
            for (i, &j) in map.iter().enumerate() {
                let (z, az) = (layout.tree_point(i), layout.tree_point(j));
                if color(&z) != color(&az) {
                    return Err(TranslaterDefect::NotColorPreserving { x: x.clone() });
                }
                let diff = ctx.sub_points(&az, &z);
                if self.projection.apply(&diff) != *x {
                    return Err(TranslaterDefect::WrongProjection { x: x.clone() });
                }
                if let crate::padic::RvValue::Leading { residue, .. } = ctx.rv(&diff) {
                    if !in_v[ds.index(&residue)] {
                        return Err(TranslaterDefect::DirectionOutsideV { x: x.clone() });
                    }
                }
            }
        }
        for ((x, _), a) in self.family.iter().zip(&maps) {
            for ((y, _), b) in self.family.iter().zip(&maps) {
                let sum = index[&ctx.add_points(x, y)];
                let c = &maps[sum];
                if (0..a.len()).any(|i| a[b[i]] != c[i]) {
                    return Err(TranslaterDefect::NotAdditive {
                        x: x.clone(),
                        y: y.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Check the defining properties of a straightener against `chi`.
pub fn check_straightener(chi: &Coloring, s: &Straightener) -> bool {
    let ctx = chi.ctx();
    let layout = BallLayout::new(ctx, &s.ball);
    let outer = chi.layout();
    let phi = s.risometry.tree_map();
    let straightened: Vec<u32> = phi
        .iter()
        .map(|&j| chi.colors()[outer.lex_index(&layout.tree_point(j))])
        .collect();
    let fibers_kept = (0..phi.len()).all(|i| {
        s.projection.apply(&layout.tree_point(i)) == s.projection.apply(&layout.tree_point(phi[i]))
    });
    let steps: Vec<Vec<u64>> = s
        .lift
        .generators()
        .iter()
        .map(|g| ctx.scale_point(ctx.pow(s.ball.depth), g))
        .collect();
    let invariant = (0..phi.len()).all(|i| {
        let x = layout.tree_point(i);
        steps
            .iter()
            .all(|st| straightened[layout.tree_index(&ctx.add_points(&x, st))] == straightened[i])
    });
    fibers_kept && invariant
}
