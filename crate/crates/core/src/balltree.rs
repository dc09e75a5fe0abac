//! The tree `T(X)` of balls meeting a finite set, its skeleton along `S_0`,
//! and the side-branch data of a stratification reflecting `X`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::defset::{DefsetError, FiniteSet};
use crate::geometry::{Ball, Projection, Subspace};
use crate::padic::{Context, PadicError, Valuation};
use crate::riso::{RisoError, TspTable};
use crate::tstrat::{verify_tstrat, Stratification, TstratError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BalltreeError {
    #[error("the set is empty")]
    EmptySet,
    #[error("not verified: {0}")]
    NotVerified(String),
    #[error("the set and the stratification live in different domains")]
    DomainMismatch,
    #[error("unknown export format {0:?} (expected dot or json)")]
    UnknownFormat(String),
    #[error("malformed tree: {0}")]
    Malformed(String),
    #[error(transparent)]
    Tstrat(#[from] TstratError),
    #[error(transparent)]
    Riso(#[from] RisoError),
    #[error(transparent)]
    Defset(#[from] DefsetError),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub ball: Ball,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Least label over the points of `X` in the ball, once annotated.
    pub stratum: Option<usize>,
}

/// Nodes are stored by depth, and by ball order within a depth; node 0 is
/// the root unless the tree is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallTree {
    ctx: Context,
    nodes: Vec<TreeNode>,
}

/// `T(X)` below the root of `O^n`.
pub fn build_tree(x: &FiniteSet) -> Result<BallTree, BalltreeError> {
    build_tree_in(x, &Ball::root(x.ctx().n()))
}

/// `T(X)` below `base`, which must contain `X`.
pub fn build_tree_in(x: &FiniteSet, base: &Ball) -> Result<BallTree, BalltreeError> {
    let ctx = *x.ctx();
    if x.is_empty() {
        return Err(BalltreeError::EmptySet);
    }
    let pts: Vec<Vec<u64>> = x.points().collect();
    if pts.iter().any(|p| !base.contains(&ctx, p)) {
        return Err(BalltreeError::DomainMismatch);
    }
    let levels: Vec<Vec<Ball>> = (base.depth..=ctx.m())
        .into_par_iter()
        .map(|k| {
            pts.iter()
                .map(|p| Ball::around(&ctx, p, k))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()
        })
        .collect();
    Ok(BallTree::from_levels(ctx, levels))
}

impl BallTree {
    fn from_levels(ctx: Context, levels: Vec<Vec<Ball>>) -> BallTree {
        let mut nodes: Vec<TreeNode> = vec![];
        let mut prev: BTreeMap<Ball, usize> = BTreeMap::new();
        for level in levels {
            let mut here = BTreeMap::new();
            for ball in level {
                let idx = nodes.len();
                let parent = ball.parent(&ctx).and_then(|b| prev.get(&b).copied());
                if let Some(p) = parent {
                    nodes[p].children.push(idx);
                }
                here.insert(ball.clone(), idx);
                nodes.push(TreeNode {
                    ball,
                    parent,
                    children: vec![],
                    stratum: None,
                });
            }
            prev = here;
        }
        BallTree { ctx, nodes }
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> Option<&TreeNode> {
        self.nodes.first()
    }

    pub fn find(&self, ball: &Ball) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.ball.cmp(ball)).ok()
    }

    /// Node counts per depth, starting at the root depth.
    pub fn counts_by_depth(&self) -> Vec<usize> {
        let Some(root) = self.root() else {
            return vec![];
        };
        let mut out = vec![0; (self.ctx.m() - root.ball.depth + 1) as usize];
        for n in &self.nodes {
            out[(n.ball.depth - root.ball.depth) as usize] += 1;
        }
        out
    }

    /// Nodes with more than one child.
    pub fn bifurcations(&self) -> Vec<&Ball> {
        self.nodes
            .iter()
            .filter(|n| n.children.len() > 1)
            .map(|n| &n.ball)
            .collect()
    }

    /// The leaves, i.e. the points of `X`.
    pub fn leaves(&self) -> impl Iterator<Item = &Ball> {
        self.nodes
            .iter()
            .filter(|n| n.children.is_empty())
            .map(|n| &n.ball)
    }

    /// The nodes whose ball satisfies `keep`; `keep` must be closed under
    /// passing to ancestors.
    pub fn subtree(&self, mut keep: impl FnMut(&Ball) -> bool) -> BallTree {
        let Some(root) = self.root() else {
            return self.clone();
        };
        let mut levels: Vec<Vec<Ball>> =
            vec![vec![]; (self.ctx.m() - root.ball.depth + 1) as usize];
        for n in &self.nodes {
            if keep(&n.ball) {
                levels[(n.ball.depth - root.ball.depth) as usize].push(n.ball.clone());
            }
        }
        while levels.last().is_some_and(|l| l.is_empty()) {
            levels.pop();
        }
        let mut t = BallTree::from_levels(self.ctx, levels);
        for n in &mut t.nodes {
            n.stratum = self.find(&n.ball).and_then(|i| self.nodes[i].stratum);
        }
        t
    }

    /// Record on every node the least label of `s` over its leaves.
    pub fn annotate(&mut self, s: &Stratification) -> Result<(), BalltreeError> {
        if s.ctx() != &self.ctx {
            return Err(BalltreeError::DomainMismatch);
        }
        for i in (0..self.nodes.len()).rev() {
            let node = &self.nodes[i];
            let label = if node.children.is_empty() {
                if !s.ball().contains(&self.ctx, &node.ball.residue) {
                    return Err(BalltreeError::DomainMismatch);
                }
                s.label(&node.ball.residue)
            } else {
                node.children
                    .iter()
                    .filter_map(|&c| self.nodes[c].stratum)
                    .min()
                    .expect("children are annotated")
            };
            self.nodes[i].stratum = Some(label);
        }
        Ok(())
    }
}

/// `T(S_0) ∩ T(X)`: the nodes of `t` meeting `s0`. Empty when `s0` misses
/// every node.
pub fn skeleton(t: &BallTree, s0: &FiniteSet) -> BallTree {
    let ctx = *t.ctx();
    let pts: Vec<Vec<u64>> = s0.points().collect();
    t.subtree(|b| pts.iter().any(|p| b.contains(&ctx, p)))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Dendrogram {
    Leaf,
    Node(u32, Vec<Dendrogram>),
}

/// Pairwise valuations `v(a_i - a_j)` in a canonical point order, so that
/// two finite sets get equal matrices exactly when some bijection between
/// them preserves all pairwise valuations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ValMatrix {
    pub entries: Vec<Vec<Valuation>>,
}

impl ValMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn of_points(ctx: &Context, pts: &[Vec<u64>]) -> ValMatrix {
        let (_, order) = dendrogram(ctx, pts, (0..pts.len()).collect());
        let entries = order
            .iter()
            .map(|&i| {
                order
                    .iter()
                    .map(|&j| ctx.point_valuation(&ctx.sub_points(&pts[i], &pts[j])))
                    .collect()
            })
            .collect();
        ValMatrix { entries }
    }
}

// The valuations of an ultrametric point set form a rooted tree: split by
// the least valuation, recurse, and order siblings by their shapes.
fn dendrogram(ctx: &Context, pts: &[Vec<u64>], idx: Vec<usize>) -> (Dendrogram, Vec<usize>) {
    if idx.len() <= 1 {
        return (Dendrogram::Leaf, idx);
    }
    let v = |a: usize, b: usize| ctx.point_valuation(&ctx.sub_points(&pts[a], &pts[b]));
    let mu = idx
        .iter()
        .flat_map(|&a| idx.iter().filter(move |&&b| b != a).map(move |&b| (a, b)))
        .filter_map(|(a, b)| v(a, b).finite())
        .min()
        .expect("points are distinct");
    let mut classes: Vec<Vec<usize>> = vec![];
    for &i in &idx {
        match classes
            .iter_mut()
            .find(|c| v(c[0], i) > Valuation::Finite(mu))
        {
            Some(c) => c.push(i),
            None => classes.push(vec![i]),
        }
    }
    let mut subs: Vec<(Dendrogram, Vec<usize>)> = classes
        .into_iter()
        .map(|c| dendrogram(ctx, pts, c))
        .collect();
    subs.sort_by(|a, b| a.0.cmp(&b.0));
    let order = subs.iter().flat_map(|s| s.1.iter().copied()).collect();
    (
        Dendrogram::Node(mu, subs.into_iter().map(|s| s.0).collect()),
        order,
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideBranch {
    pub ball: Ball,
    /// Least point of `S_0` in the parent ball.
    pub anchor: Option<Vec<u64>>,
    /// Digits of the branch at the parent depth, relative to the anchor.
    pub residue: Vec<u64>,
    /// The least label in the ball, and the dimension of the chosen
    /// subspace of `tsp`.
    pub d: usize,
    /// Coordinates of the exhibition.
    pub projection: Vec<usize>,
    pub fibers: usize,
    /// Matrix of `S_d ∩ F` for the fiber `F` through the least point of
    /// `X` in the ball.
    pub matrix: ValMatrix,
    /// Matrix of `X ∩ F` for the same fiber.
    pub x_matrix: ValMatrix,
    /// Level found for `X ∩ F` with the induced stratification.
    pub fiber_level: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CounterWitness {
    /// The translation space is smaller than the least label.
    NoTranslatability {
        ball: Ball,
        tsp_dim: usize,
        d: usize,
    },
    /// Two fibers of the same branch carry different matrices.
    FiberDependence {
        ball: Ball,
        fiber_a: Vec<u64>,
        fiber_b: Vec<u64>,
    },
    /// A fiber meets a stratum below the branch dimension.
    FiberMeetsLowerStratum {
        ball: Ball,
        point: Vec<u64>,
    },
    LevelExceedsDimension {
        level: usize,
        dim: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub anchor: Option<Vec<u64>>,
    /// Set when branches of one radius disagreed and the class was split
    /// by residue.
    pub residue: Option<Vec<u64>>,
    pub radii: Vec<u32>,
    /// Number of maximal radius intervals on which the matrix has constant
    /// size and entries affine in the radius.
    pub affine_pieces: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelReport {
    pub dim: usize,
    pub level: usize,
    pub tree_nodes: usize,
    pub skeleton_nodes: usize,
    pub bifurcations: usize,
    pub branches: Vec<SideBranch>,
    pub classes: Vec<ClassSummary>,
    pub witnesses: Vec<CounterWitness>,
    pub message: String,
}

impl LevelReport {
    pub fn consistent(&self) -> bool {
        self.witnesses.is_empty()
    }
}

/// One matrix per side branch of `T(X)` off the skeleton of `S_0`.
pub fn side_branch_invariants(
    x: &FiniteSet,
    s: &Stratification,
) -> Result<BTreeMap<Ball, ValMatrix>, BalltreeError> {
    let r = level_report(x, s)?;
    Ok(r.branches.into_iter().map(|b| (b.ball, b.matrix)).collect())
}

/// Check the structure that a level bound on `T(X)` predicts: finitely many
/// bifurcations on the skeleton, fiber-independent side-branch matrices,
/// and radius dependence by affine pieces. `s` must pass verification
/// against the indicator of `X`.
pub fn level_report(x: &FiniteSet, s: &Stratification) -> Result<LevelReport, BalltreeError> {
    check_domain(x, s)?;
    let report = verify_tstrat(s, &x.indicator(s.ball()))?;
    if !report.passed() {
        return Err(BalltreeError::NotVerified(match &report.witness {
            Some(b) => format!("fails on {b}"),
            None => "declared dimensions".into(),
        }));
    }
    level_report_inner(x, s)
}

/// [`level_report`] without the verification step.
pub fn level_report_unchecked(
    x: &FiniteSet,
    s: &Stratification,
) -> Result<LevelReport, BalltreeError> {
    check_domain(x, s)?;
    level_report_inner(x, s)
}

fn check_domain(x: &FiniteSet, s: &Stratification) -> Result<(), BalltreeError> {
    if x.ctx() != s.ctx() || x.points().any(|p| !s.ball().contains(s.ctx(), &p)) {
        return Err(BalltreeError::DomainMismatch);
    }
    if x.is_empty() {
        return Err(BalltreeError::EmptySet);
    }
    Ok(())
}

fn level_report_inner(x: &FiniteSet, s: &Stratification) -> Result<LevelReport, BalltreeError> {
    let ctx = *s.ctx();
    let tree = build_tree_in(x, s.ball())?;
    let s0 = s.stratum(0);
    let skel = skeleton(&tree, &s0);
    let dim = x.points().map(|p| s.label(&p)).max().expect("non-empty");

    let mut roots: Vec<(Ball, Option<Vec<u64>>, Vec<u64>)> = vec![];
    if skel.is_empty() {
        roots.push((s.ball().clone(), None, vec![]));
    } else {
        let s0_pts: Vec<Vec<u64>> = s0.points().collect();
        for node in skel.nodes() {
            let Some(i) = tree.find(&node.ball) else {
                continue;
            };
            let anchor = s0_pts.iter().find(|p| node.ball.contains(&ctx, p)).cloned();
            for &c in &tree.nodes()[i].children {
                let child = &tree.nodes()[c].ball;
                if skel.find(child).is_none() {
                    let q = ctx.pow(node.ball.depth);
                    let a = anchor.as_ref().expect("skeleton nodes meet S_0");
                    let u = child
                        .residue
                        .iter()
                        .zip(a)
                        .map(|(&b, &a)| (ctx.sub(b, a) / q) % ctx.p())
                        .collect();
                    roots.push((child.clone(), anchor.clone(), u));
                }
            }
        }
    }

    let table = TspTable::build(&s.coloring())?;
    let mut branches = vec![];
    let mut witnesses = vec![];
    for (ball, anchor, residue) in roots {
        match side_branch(x, s, &table, &ball) {
            Ok(Ok(b)) => branches.push(SideBranch {
                anchor,
                residue,
                ..b
            }),
            Ok(Err(w)) => witnesses.push(w),
            Err(e) => return Err(e),
        }
    }

    let classes = summarize(&branches);
    let level = branches
        .iter()
        .map(|b| b.d + b.fiber_level)
        .max()
        .unwrap_or(0);
    let dim_x = dim;
    if witnesses.is_empty() && level > dim_x {
        witnesses.push(CounterWitness::LevelExceedsDimension { level, dim: dim_x });
    }
    let message = match witnesses.first() {
        None => format!("consistent with level ≤ {dim_x}"),
        Some(w) => format!("counter-witness: {w:?}"),
    };
    Ok(LevelReport {
        dim: dim_x,
        level,
        tree_nodes: tree.len(),
        skeleton_nodes: skel.len(),
        bifurcations: skel.bifurcations().len(),
        branches,
        classes,
        witnesses,
        message,
    })
}

fn choose_subspace(tsp: &Subspace, d: usize) -> Subspace {
    if tsp.dim() == d {
        return tsp.clone();
    }
    Subspace::of_dim(tsp.p(), tsp.ambient_dim(), d)
        .into_iter()
        .find(|v| tsp.contains_subspace(v))
        .expect("tsp has subspaces of every smaller dimension")
}

fn side_branch(
    x: &FiniteSet,
    s: &Stratification,
    table: &TspTable,
    ball: &Ball,
) -> Result<Result<SideBranch, CounterWitness>, BalltreeError> {
    let ctx = *s.ctx();
    let n = ctx.n();
    let d = ball
        .points(&ctx)
        .map(|p| s.label(&p))
        .min()
        .expect("balls are non-empty");
    let tsp = if ball.depth == ctx.m() {
        Subspace::full(ctx.p(), n)
    } else {
        table.tsp(ball)
    };
    if tsp.dim() < d {
        return Ok(Err(CounterWitness::NoTranslatability {
            ball: ball.clone(),
            tsp_dim: tsp.dim(),
            d,
        }));
    }
    let v = choose_subspace(&tsp, d);
    let pi = v
        .exhibitions()
        .into_iter()
        .next()
        .expect("every subspace has an exhibition");
    let mut fibers: BTreeMap<Vec<u64>, Vec<Vec<u64>>> = BTreeMap::new();
    for p in ball.points(&ctx) {
        fibers.entry(pi.apply(&p)).or_default().push(p);
    }
    let key = |pts: &[Vec<u64>]| -> (ValMatrix, ValMatrix) {
        let low: Vec<Vec<u64>> = pts.iter().filter(|p| s.label(p) == d).cloned().collect();
        let on_x: Vec<Vec<u64>> = pts.iter().filter(|p| x.contains(p)).cloned().collect();
        (
            ValMatrix::of_points(&ctx, &low),
            ValMatrix::of_points(&ctx, &on_x),
        )
    };
    let keys: Vec<(&Vec<u64>, (ValMatrix, ValMatrix))> =
        fibers.par_iter().map(|(a, pts)| (a, key(pts))).collect();
    if let Some(w) = keys.windows(2).find(|w| w[0].1 != w[1].1) {
        return Ok(Err(CounterWitness::FiberDependence {
            ball: ball.clone(),
            fiber_a: w[0].0.clone(),
            fiber_b: w[1].0.clone(),
        }));
    }
    let first = ball
        .points(&ctx)
        .find(|p| x.contains(p))
        .expect("branches meet X");
    let fiber_pts = &fibers[&pi.apply(&first)];
    if let Some(p) = fiber_pts.iter().find(|p| s.label(p) < d) {
        return Ok(Err(CounterWitness::FiberMeetsLowerStratum {
            ball: ball.clone(),
            point: p.clone(),
        }));
    }
    let (matrix, x_matrix) = key(fiber_pts);
    let fiber_level = if d == n {
        0
    } else {
        fiber_level(x, s, ball, &pi, &first, d)?
    };
    Ok(Ok(SideBranch {
        ball: ball.clone(),
        anchor: None,
        residue: vec![],
        d,
        projection: pi.coords().to_vec(),
        fibers: fibers.len(),
        matrix,
        x_matrix,
        fiber_level,
    }))
}

fn fiber_level(
    x: &FiniteSet,
    s: &Stratification,
    ball: &Ball,
    pi: &Projection,
    base: &[u64],
    d: usize,
) -> Result<usize, BalltreeError> {
    let ctx = *s.ctx();
    let n = ctx.n();
    let sub = ctx.with_dim(n - d)?;
    let comp = pi.complement(n);
    let fixed = pi.apply(base);
    let fb = Ball::around(&sub, &comp.apply(base), ball.depth);
    let mut labels = vec![];
    let mut on_x = vec![];
    for y in fb.points(&sub) {
        let full = pi.join(n, &fixed, &y);
        labels.push(s.label(&full) - d);
        if x.contains(&full) {
            on_x.push(y);
        }
    }
    let t = Stratification::new(&sub, fb, labels, (0..=n - d).collect())?;
    let fx = FiniteSet::from_points(&sub, on_x)?;
    Ok(level_report_inner(&fx, &t)?.level)
}

fn summarize(branches: &[SideBranch]) -> Vec<ClassSummary> {
    let mut by_anchor: BTreeMap<Option<Vec<u64>>, Vec<&SideBranch>> = BTreeMap::new();
    for b in branches {
        by_anchor.entry(b.anchor.clone()).or_default().push(b);
    }
    let mut out = vec![];
    for (anchor, group) in by_anchor {
        let mut per_radius: BTreeMap<u32, BTreeSet<&ValMatrix>> = BTreeMap::new();
        for b in &group {
            per_radius
                .entry(b.ball.depth)
                .or_default()
                .insert(&b.matrix);
        }
        if per_radius.values().all(|m| m.len() == 1) {
            let seq: Vec<(u32, &ValMatrix)> = per_radius
                .iter()
                .map(|(&r, m)| (r, *m.iter().next().unwrap()))
                .collect();
            out.push(ClassSummary {
                anchor,
                residue: None,
                radii: seq.iter().map(|x| x.0).collect(),
                affine_pieces: affine_pieces(&seq),
            });
            continue;
        }
        let mut by_residue: BTreeMap<&Vec<u64>, Vec<(u32, &ValMatrix)>> = BTreeMap::new();
        for b in &group {
            by_residue
                .entry(&b.residue)
                .or_default()
                .push((b.ball.depth, &b.matrix));
        }
        for (u, mut seq) in by_residue {
            seq.sort();
            out.push(ClassSummary {
                anchor: anchor.clone(),
                residue: Some(u.clone()),
                radii: seq.iter().map(|x| x.0).collect(),
                affine_pieces: affine_pieces(&seq),
            });
        }
    }
    out
}

fn affine_pieces(seq: &[(u32, &ValMatrix)]) -> usize {
    let fits = |piece: &[(u32, &ValMatrix)]| -> bool {
        let size = piece[0].1.size();
        if piece.iter().any(|(_, m)| m.size() != size) {
            return false;
        }
        (0..size).all(|i| {
            (0..size).all(|j| {
                let vals: Vec<(i64, Valuation)> = piece
                    .iter()
                    .map(|(r, m)| (*r as i64, m.entries[i][j]))
                    .collect();
                if vals.iter().all(|v| v.1.is_infinite()) {
                    return true;
                }
                let Some(fin) = vals
                    .iter()
                    .map(|(r, v)| v.finite().map(|v| (*r, v as i64)))
                    .collect::<Option<Vec<_>>>()
                else {
                    return false;
                };
                fin.windows(3).all(|w| {
                    (w[1].1 - w[0].1) * (w[2].0 - w[1].0) == (w[2].1 - w[1].1) * (w[1].0 - w[0].0)
                })
            })
        })
    };
    let mut pieces = 0;
    let mut start = 0;
    while start < seq.len() {
        let mut end = start + 1;
        while end < seq.len() && fits(&seq[start..=end]) {
            end += 1;
        }
        pieces += 1;
        start = end;
    }
    pieces
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

impl FromStr for ExportFormat {
    type Err = BalltreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dot" => Ok(ExportFormat::Dot),
            "json" => Ok(ExportFormat::Json),
            other => Err(BalltreeError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonNode {
    ball: Ball,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stratum: Option<usize>,
    children: Vec<JsonNode>,
}

impl BallTree {
    pub fn export(&self, format: ExportFormat) -> Vec<u8> {
        match format {
            ExportFormat::Dot => self.to_dot().into_bytes(),
            ExportFormat::Json => {
                let mut out = match self.root() {
                    Some(_) => serde_json::to_vec_pretty(&self.json_node(0)).expect("serializable"),
                    None => b"null".to_vec(),
                };
                out.push(b'\n');
                out
            }
        }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph T {\n");
        for (i, n) in self.nodes.iter().enumerate() {
            match n.stratum {
                Some(s) => writeln!(out, "  n{i} [label=\"{}\", stratum={s}];", n.ball),
                None => writeln!(out, "  n{i} [label=\"{}\"];", n.ball),
            }
            .unwrap();
        }
        for (i, n) in self.nodes.iter().enumerate() {
            for c in &n.children {
                writeln!(out, "  n{i} -> n{c};").unwrap();
            }
        }
        out.push_str("}\n");
        out
    }

    fn json_node(&self, i: usize) -> JsonNode {
        let n = &self.nodes[i];
        JsonNode {
            ball: n.ball.clone(),
            stratum: n.stratum,
            children: n.children.iter().map(|&c| self.json_node(c)).collect(),
        }
    }

    /// Inverse of the JSON export.
    pub fn from_json(ctx: &Context, bytes: &[u8]) -> Result<BallTree, BalltreeError> {
        let root: Option<JsonNode> =
            serde_json::from_slice(bytes).map_err(|e| BalltreeError::Malformed(e.to_string()))?;
        let Some(root) = root else {
            return Ok(BallTree {
                ctx: *ctx,
                nodes: vec![],
            });
        };
        let mut levels: Vec<Vec<(Ball, Option<usize>)>> = vec![];
        let mut stack = vec![(root, None::<Ball>)];
        let top = stack[0].0.ball.depth;
        while let Some((node, parent)) = stack.pop() {
            Ball::new(ctx, node.ball.depth, node.ball.residue.clone())
                .map_err(|e| BalltreeError::Malformed(e.to_string()))?;
            if let Some(p) = parent {
                if node.ball.parent(ctx).as_ref() != Some(&p) {
                    return Err(BalltreeError::Malformed(format!(
                        "{} is not a child of {p}",
                        node.ball
                    )));
                }
            }
            let k = (node.ball.depth - top) as usize;
            if levels.len() <= k {
                levels.resize(k + 1, vec![]);
            }
            levels[k].push((node.ball.clone(), node.stratum));
            for c in node.children {
                stack.push((c, Some(node.ball.clone())));
            }
        }
        let mut strata = BTreeMap::new();
        let levels: Vec<Vec<Ball>> = levels
            .into_iter()
            .map(|mut l| {
                l.sort();
                l.into_iter()
                    .map(|(b, s)| {
                        strata.insert(b.clone(), s);
                        b
                    })
                    .collect()
            })
            .collect();
        let mut t = BallTree::from_levels(*ctx, levels);
        for n in &mut t.nodes {
            n.stratum = strata[&n.ball];
        }
        if t.nodes.iter().skip(1).any(|n| n.parent.is_none()) {
            return Err(BalltreeError::Malformed(
                "duplicate or detached ball".into(),
            ));
        }
        Ok(t)
    }
}
