use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::defset::Coloring;
use crate::geometry::{Ball, BallLayout, DigitSpace};
use crate::padic::Context;

use super::risometry::Risometry;
use super::RisoError;

/// A coloring of a ball of any dimension, stored in tree order.
#[derive(Debug, Clone)]
pub struct ColoredTree {
    layout: BallLayout,
    colors: Vec<u32>,
}

impl ColoredTree {
    pub fn new(layout: BallLayout, colors: Vec<u32>) -> ColoredTree {
        assert_eq!(colors.len(), layout.size());
        ColoredTree { layout, colors }
    }

    pub fn from_coloring(c: &Coloring) -> ColoredTree {
        ColoredTree {
            layout: c.layout(),
            colors: c.tree_colors(),
        }
    }

    pub fn from_fn(layout: BallLayout, mut f: impl FnMut(&[u64]) -> u32) -> ColoredTree {
        let colors = (0..layout.size())
            .map(|i| f(&layout.tree_point(i)))
            .collect();
        ColoredTree { layout, colors }
    }

    pub fn layout(&self) -> &BallLayout {
        &self.layout
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }
}

/// Canonical forms of every node of one or more colored trees of the same
/// shape.
///
/// The form of a leaf is its color; the form of an inner node is the
/// lexicographically least sequence of child forms over all cyclic shifts
/// `e -> e + t` of the child digit. Forms are ranked per level in that
/// order, so two nodes of the same depth are risometric (color-preserving)
/// exactly when their ranks agree, and the chosen shifts do not depend on
/// which other trees were ranked alongside.
pub struct CanonTable {
    ds: DigitSpace,
    depth: u32,
    m: u32,
    /// `ranks[tree][k - depth][node]`
    ranks: Vec<Vec<Vec<u32>>>,
    /// `shifts[tree][k - depth][node]` for `k < m`
    shifts: Vec<Vec<Vec<u32>>>,
}

fn best_shift(ds: &DigitSpace, r: &[u32]) -> usize {
    let min = *r.iter().min().expect("nonempty");
    let mut best: Option<usize> = None;
    for t in (0..r.len()).filter(|&t| r[t] == min) {
        best = match best {
            None => Some(t),
            Some(b) => {
                let less = (0..r.len())
                    .map(|e| r[ds.add(e, t)].cmp(&r[ds.add(e, b)]))
                    .find(|o| o.is_ne())
                    == Some(std::cmp::Ordering::Less);
                Some(if less { t } else { b })
            }
        };
    }
    best.unwrap()
}

impl CanonTable {
    pub fn build(trees: &[&ColoredTree]) -> Result<CanonTable, RisoError> {
        let first = trees.first().ok_or(RisoError::DomainMismatch)?.layout();
        let (p, m, dim, depth) = (first.p(), first.m(), first.dim(), first.depth());
        for t in trees {
            let l = t.layout();
            if l.dim() != dim || l.p() != p || l.m() != m {
                return Err(RisoError::DimensionMismatch);
            }
            if l.depth() != depth {
                return Err(RisoError::DepthMismatch);
            }
        }
        let ds = DigitSpace::new(p, dim);
        let fan = ds.size();
        let levels = (m - depth) as usize;
        let mut ranks: Vec<Vec<Vec<u32>>> = trees.iter().map(|t| vec![t.colors.clone()]).collect();
        let mut shifts: Vec<Vec<Vec<u32>>> = vec![vec![]; trees.len()];
        for _ in 0..levels {
            // canonical child sequence and shift per node, per tree
            let per_tree: Vec<(Vec<u32>, Vec<u32>)> = ranks
                .par_iter()
                .map(|r| {
                    let below = r.last().unwrap();
                    let nodes = below.len() / fan;
                    let mut seqs = Vec::with_capacity(below.len());
                    let mut sh = Vec::with_capacity(nodes);
                    for j in 0..nodes {
                        let kids = &below[j * fan..(j + 1) * fan];
                        let t = best_shift(&ds, kids);
                        sh.push(t as u32);
                        seqs.extend((0..fan).map(|e| kids[ds.add(e, t)]));
                    }
                    (seqs, sh)
                })
                .collect();
            let mut all: Vec<&[u32]> = per_tree.iter().flat_map(|(s, _)| s.chunks(fan)).collect();
            all.par_sort_unstable();
            all.dedup();
            let new_ranks: Vec<Vec<u32>> = per_tree
                .par_iter()
                .map(|(s, _)| {
                    s.chunks(fan)
                        .map(|c| all.binary_search(&c).unwrap() as u32)
                        .collect()
                })
                .collect();
            for (i, (nr, (_, sh))) in new_ranks.into_iter().zip(per_tree).enumerate() {
                ranks[i].push(nr);
                shifts[i].push(sh);
            }
        }
        // stored bottom-up; flip so index 0 is the top level
        for r in ranks.iter_mut() {
            r.reverse();
        }
        for s in shifts.iter_mut() {
            s.reverse();
        }
        Ok(CanonTable {
            ds,
            depth,
            m,
            ranks,
            shifts,
        })
    }

    pub fn digit_space(&self) -> &DigitSpace {
        &self.ds
    }

    pub fn rank(&self, tree: usize, k: u32, node: usize) -> u32 {
        self.ranks[tree][(k - self.depth) as usize][node]
    }

    pub fn root_rank(&self, tree: usize) -> u32 {
        self.rank(tree, self.depth, 0)
    }

    /// Ranks of the children of a node of depth `k < m`.
    pub fn child_ranks(&self, tree: usize, k: u32, node: usize) -> &[u32] {
        let fan = self.ds.size();
        &self.ranks[tree][(k + 1 - self.depth) as usize][node * fan..(node + 1) * fan]
    }

    pub fn shift(&self, tree: usize, k: u32, node: usize) -> usize {
        self.shifts[tree][(k - self.depth) as usize][node] as usize
    }

    /// A color-preserving risometry between two nodes of equal rank and
    /// depth `k`, as a map of leaf offsets within the nodes: child `e` of the
    /// first goes to child `e + s_b - s_a` of the second.
    pub fn iso_map(&self, a: (usize, usize), b: (usize, usize), k: u32) -> Option<Vec<usize>> {
        if self.rank(a.0, k, a.1) != self.rank(b.0, k, b.1) {
            return None;
        }
        Some(self.iso_map_unchecked(a, b, k))
    }

    fn iso_map_unchecked(&self, a: (usize, usize), b: (usize, usize), k: u32) -> Vec<usize> {
        if k == self.m {
            return vec![0];
        }
        let fan = self.ds.size();
        let t = self
            .ds
            .sub(self.shift(b.0, k, b.1), self.shift(a.0, k, a.1));
        let block = fan.pow(self.m - k - 1);
        let mut out = vec![0; block * fan];
        for e in 0..fan {
            let f = self.ds.add(e, t);
            let sub = self.iso_map_unchecked((a.0, a.1 * fan + e), (b.0, b.1 * fan + f), k + 1);
            for (o, s) in sub.into_iter().enumerate() {
                out[e * block + o] = f * block + s;
            }
        }
        out
    }

    /// A random color-preserving risometry from node `a` onto node `b`
    /// (equal rank, depth `k`), as a map of leaf offsets. At every node the
    /// child shift is drawn uniformly among those matching child ranks.
    pub fn random_iso_map<R: Rng + ?Sized>(
        &self,
        a: (usize, usize),
        b: (usize, usize),
        k: u32,
        rng: &mut R,
    ) -> Option<Vec<usize>> {
        if self.rank(a.0, k, a.1) != self.rank(b.0, k, b.1) {
            return None;
        }
        Some(self.random_iso_unchecked(a, b, k, rng))
    }

    fn random_iso_unchecked<R: Rng + ?Sized>(
        &self,
        a: (usize, usize),
        b: (usize, usize),
        k: u32,
        rng: &mut R,
    ) -> Vec<usize> {
        if k == self.m {
            return vec![0];
        }
        let fan = self.ds.size();
        let (ra, rb) = (self.child_ranks(a.0, k, a.1), self.child_ranks(b.0, k, b.1));
        let shifts: Vec<usize> = (0..fan)
            .filter(|&t| (0..fan).all(|e| ra[e] == rb[self.ds.add(e, t)]))
            .collect();
        let t = shifts[rng.random_range(0..shifts.len())];
        let block = fan.pow(self.m - k - 1);
        let mut out = vec![0; block * fan];
        for e in 0..fan {
            let f = self.ds.add(e, t);
            let sub =
                self.random_iso_unchecked((a.0, a.1 * fan + e), (b.0, b.1 * fan + f), k + 1, rng);
            for (o, s) in sub.into_iter().enumerate() {
                out[e * block + o] = f * block + s;
            }
        }
        out
    }

    /// Leaf colors of a node read in canonical order, as big-endian bytes.
    pub fn encoding(&self, tree: usize, k: u32, node: usize) -> Vec<u8> {
        let mut out = vec![];
        self.encode_into(tree, k, node, &mut out);
        out
    }

    fn encode_into(&self, tree: usize, k: u32, node: usize, out: &mut Vec<u8>) {
        if k == self.m {
            out.extend_from_slice(&self.rank(tree, k, node).to_be_bytes());
            return;
        }
        let fan = self.ds.size();
        let s = self.shift(tree, k, node);
        for e in 0..fan {
            self.encode_into(tree, k + 1, node * fan + self.ds.add(e, s), out);
        }
    }
}

/// Canonical form of a colored ball: a header `(p, m, dim, depth)` followed by
/// the colors read in canonical order. Two colorings of balls of the same
/// depth have equal forms exactly when some risometry carries one to the
/// other.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalForm {
    bytes: Vec<u8>,
}

impl CanonicalForm {
    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// SHA-256 of the encoding, in hex.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(&self.bytes))
    }
}

pub fn canonical_form_of_tree(tree: &ColoredTree) -> CanonicalForm {
    let table = CanonTable::build(&[tree]).expect("single tree");
    let l = tree.layout();
    let mut bytes = vec![l.p() as u8, l.m() as u8, l.dim() as u8, l.depth() as u8];
    bytes.extend(table.encoding(0, l.depth(), 0));
    CanonicalForm { bytes }
}

pub fn canonicalize(chi: &Coloring) -> CanonicalForm {
    canonical_form_of_tree(&ColoredTree::from_coloring(chi))
}

/// A color-preserving risometry between two balls: translate by `offset`,
/// then apply a self-risometry of the target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RisoWitness {
    pub from: Ball,
    pub to: Ball,
    pub offset: Vec<u64>,
    pub risometry: Risometry,
}

impl RisoWitness {
    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        let ctx = self.risometry.ctx();
        self.risometry.apply(&ctx.add_points(x, &self.offset))
    }
}

/// Decide whether two colorings of equal-depth balls are risometric, with a
/// witness if they are.
pub fn riso_equiv(a: &Coloring, b: &Coloring) -> Result<Option<RisoWitness>, RisoError> {
    if a.ctx() != b.ctx() {
        return Err(RisoError::DimensionMismatch);
    }
    let (ta, tb) = (ColoredTree::from_coloring(a), ColoredTree::from_coloring(b));
    let table = CanonTable::build(&[&ta, &tb])?;
    let ctx = a.ctx();
    let depth = a.ball().depth;
    let Some(map) = table.iso_map((0, 0), (1, 0), depth) else {
        return Ok(None);
    };
    Ok(Some(witness_from_map(ctx, a.ball(), b.ball(), &map)))
}

/// A random risometry of the domain of `chi` preserving every color.
pub fn random_automorphism<R: Rng + ?Sized>(chi: &Coloring, rng: &mut R) -> Risometry {
    let tree = ColoredTree::from_coloring(chi);
    let table = CanonTable::build(&[&tree]).expect("single tree");
    let map = table
        .random_iso_map((0, 0), (0, 0), chi.ball().depth, rng)
        .expect("a node is risometric to itself");
    Risometry::from_tree_map(chi.ctx(), chi.ball(), &map).expect("canonical maps are risometries")
}

pub(crate) fn witness_from_map(
    ctx: &Context,
    from: &Ball,
    to: &Ball,
    map: &[usize],
) -> RisoWitness {
    let (la, lb) = (BallLayout::new(ctx, from), BallLayout::new(ctx, to));
    let offset = ctx.sub_points(&to.base_point(), &from.base_point());
    // self-map of `to`: y -> map(y - offset)
    let self_map: Vec<usize> = (0..lb.size())
        .map(|i| {
            let y = lb.tree_point(i);
            map[la.tree_index(&ctx.sub_points(&y, &offset))]
        })
        .collect();
    let risometry =
        Risometry::from_tree_map(ctx, to, &self_map).expect("canonical maps are risometries");
    RisoWitness {
        from: from.clone(),
        to: to.clone(),
        offset,
        risometry,
    }
}
