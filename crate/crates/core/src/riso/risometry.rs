use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Ball, BallLayout, DigitSpace};
use crate::padic::Context;

use super::RisoError;

/// A risometry of a ball `B` of depth `d`, in normal form: a digit vector
/// `t(N)` for every node `N` of depth `d..m` inside `B`, acting by
/// `x -> x + sum_k p^k t(node_k(x))`.
///
/// Every rv-preserving bijection `B -> B` has exactly one such description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Risometry {
    ctx: Context,
    ball: Ball,
    /// `labels[k - d][node]`, nodes numbered in tree order.
    labels: Vec<Vec<u32>>,
}

impl Risometry {
    pub fn identity(ctx: &Context, ball: &Ball) -> Risometry {
        let layout = BallLayout::new(ctx, ball);
        let labels = (ball.depth..ctx.m())
            .map(|k| vec![0; layout.nodes_at(k)])
            .collect();
        Risometry {
            ctx: *ctx,
            ball: ball.clone(),
            labels,
        }
    }

    pub fn from_labels(
        ctx: &Context,
        ball: &Ball,
        labels: Vec<Vec<u32>>,
    ) -> Result<Risometry, RisoError> {
        let layout = BallLayout::new(ctx, ball);
        let ok = labels.len() == (ctx.m() - ball.depth) as usize
            && labels.iter().enumerate().all(|(i, level)| {
                level.len() == layout.nodes_at(ball.depth + i as u32)
                    && level.iter().all(|&t| (t as usize) < layout.fanout())
            });
        if !ok {
            return Err(RisoError::BadLabels);
        }
        Ok(Risometry {
            ctx: *ctx,
            ball: ball.clone(),
            labels,
        })
    }

    /// Uniformly random risometry of the ball.
    pub fn random<R: Rng + ?Sized>(ctx: &Context, ball: &Ball, rng: &mut R) -> Risometry {
        let mut r = Risometry::identity(ctx, ball);
        let fanout = ctx.residue_count() as u32;
        for level in r.labels.iter_mut() {
            for t in level.iter_mut() {
                *t = rng.random_range(0..fanout);
            }
        }
        r
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn labels(&self) -> &[Vec<u32>] {
        &self.labels
    }

    pub fn is_identity(&self) -> bool {
        self.labels.iter().flatten().all(|&t| t == 0)
    }

    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        let layout = BallLayout::new(&self.ctx, &self.ball);
        let ds = DigitSpace::new(self.ctx.p(), self.ctx.n());
        self.apply_with(&layout, &ds, x)
    }

    fn apply_with(&self, layout: &BallLayout, ds: &DigitSpace, x: &[u64]) -> Vec<u64> {
        let t = layout.tree_index(x);
        let mut y = x.to_vec();
        for (i, level) in self.labels.iter().enumerate() {
            let k = self.ball.depth + i as u32;
            let label = level[t / layout.block(k)] as usize;
            if label != 0 {
                let q = self.ctx.pow(k);
                for (c, d) in y.iter_mut().zip(ds.vector(label)) {
                    *c = self.ctx.add(*c, d * q);
                }
            }
        }
        y
    }

    /// The induced permutation of tree-order indices.
    pub fn tree_map(&self) -> Vec<usize> {
        let layout = BallLayout::new(&self.ctx, &self.ball);
        let ds = DigitSpace::new(self.ctx.p(), self.ctx.n());
        (0..layout.size())
            .map(|i| layout.tree_index(&self.apply_with(&layout, &ds, &layout.tree_point(i))))
            .collect()
    }

    /// Recover the normal form of a self-map of the ball given on tree-order
    /// indices; fails unless the map is a risometry.
    pub fn from_tree_map(
        ctx: &Context,
        ball: &Ball,
        map: &[usize],
    ) -> Result<Risometry, RisoError> {
        let layout = BallLayout::new(ctx, ball);
        if map.len() != layout.size() {
            return Err(RisoError::NotRisometry);
        }
        let ds = DigitSpace::new(ctx.p(), ctx.n());
        let mut labels: Vec<Vec<Option<u32>>> = (ball.depth..ctx.m())
            .map(|k| vec![None; layout.nodes_at(k)])
            .collect();
        for (i, &j) in map.iter().enumerate() {
            if j >= layout.size() {
                return Err(RisoError::NotRisometry);
            }
            let g = ctx.sub_points(&layout.tree_point(j), &layout.tree_point(i));
            for (lvl, slot) in labels.iter_mut().enumerate() {
                let k = ball.depth + lvl as u32;
                let digit: Vec<u64> = g.iter().map(|&c| ctx.digit(c, k)).collect();
                let t = ds.index(&digit) as u32;
                let entry = &mut slot[i / layout.block(k)];
                match entry {
                    None => *entry = Some(t),
                    Some(prev) if *prev == t => {}
                    Some(_) => return Err(RisoError::NotRisometry),
                }
            }
        }
        let labels = labels
            .into_iter()
            .map(|l| l.into_iter().map(|t| t.unwrap_or(0)).collect())
            .collect();
        Ok(Risometry {
            ctx: *ctx,
            ball: ball.clone(),
            labels,
        })
    }

    /// Normal form of `f`, which must map the ball to itself.
    pub fn decompose(
        ctx: &Context,
        ball: &Ball,
        f: impl Fn(&[u64]) -> Vec<u64>,
    ) -> Result<Risometry, RisoError> {
        let layout = BallLayout::new(ctx, ball);
        let mut map = Vec::with_capacity(layout.size());
        for i in 0..layout.size() {
            let y = f(&layout.tree_point(i));
            if !layout.contains(&y) {
                return Err(RisoError::NotRisometry);
            }
            map.push(layout.tree_index(&y));
        }
        Risometry::from_tree_map(ctx, ball, &map)
    }

    /// `self . other`.
    pub fn compose(&self, other: &Risometry) -> Result<Risometry, RisoError> {
        if self.ball != other.ball {
            return Err(RisoError::DomainMismatch);
        }
        let (a, b) = (self.tree_map(), other.tree_map());
        let map: Vec<usize> = b.iter().map(|&j| a[j]).collect();
        Risometry::from_tree_map(&self.ctx, &self.ball, &map)
    }

    pub fn inverse(&self) -> Risometry {
        let a = self.tree_map();
        let mut inv = vec![0; a.len()];
        for (i, &j) in a.iter().enumerate() {
            inv[j] = i;
        }
        Risometry::from_tree_map(&self.ctx, &self.ball, &inv).expect("inverse of a risometry")
    }
}

/// Whether `x_i -> y_i` is injective and preserves `rv` of all differences.
pub fn is_rv_preserving(ctx: &Context, pairs: &[(Vec<u64>, Vec<u64>)]) -> bool {
    pairs.iter().enumerate().all(|(i, (x1, y1))| {
        pairs[i + 1..].iter().all(|(x2, y2)| {
            x1 != x2 && ctx.rv(&ctx.sub_points(x1, x2)) == ctx.rv(&ctx.sub_points(y1, y2))
        })
    })
}

/// Brute-force test that `f` is a risometry of `ball` onto itself.
pub fn is_risometry(ctx: &Context, ball: &Ball, f: impl Fn(&[u64]) -> Vec<u64>) -> bool {
    let pairs: Vec<(Vec<u64>, Vec<u64>)> = ball
        .points(ctx)
        .map(|x| {
            let y = f(&x);
            (x, y)
        })
        .collect();
    pairs.iter().all(|(_, y)| ball.contains(ctx, y)) && is_rv_preserving(ctx, &pairs)
}
