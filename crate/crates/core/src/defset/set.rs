use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{Ball, BallLayout};
use crate::padic::{Context, PadicError};

use super::DefsetError;

/// A subset of `(Z/p^m)^n`, stored as a membership bitmap in lexicographic
/// point order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSet {
    ctx: Context,
    members: Vec<bool>,
}

impl FiniteSet {
    pub fn empty(ctx: &Context) -> Result<FiniteSet, PadicError> {
        let count = ctx.ensure_enumerable()?;
        Ok(FiniteSet {
            ctx: *ctx,
            members: vec![false; count as usize],
        })
    }

    pub fn full(ctx: &Context) -> Result<FiniteSet, PadicError> {
        let mut s = FiniteSet::empty(ctx)?;
        s.members.fill(true);
        Ok(s)
    }

    pub fn from_points<I, P>(ctx: &Context, points: I) -> Result<FiniteSet, PadicError>
    where
        I: IntoIterator<Item = P>,
        P: AsRef<[u64]>,
    {
        let mut s = FiniteSet::empty(ctx)?;
        for x in points {
            ctx.check_point(x.as_ref())?;
            s.insert(x.as_ref());
        }
        Ok(s)
    }

    pub fn from_predicate(
        ctx: &Context,
        mut f: impl FnMut(&[u64]) -> bool,
    ) -> Result<FiniteSet, PadicError> {
        let mut s = FiniteSet::empty(ctx)?;
        for (i, x) in ctx.points().enumerate() {
            s.members[i] = f(&x);
        }
        Ok(s)
    }

    pub(crate) fn from_bitmap(ctx: &Context, members: Vec<bool>) -> FiniteSet {
        FiniteSet { ctx: *ctx, members }
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn insert(&mut self, x: &[u64]) {
        let i = self.ctx.index_of(x) as usize;
        self.members[i] = true;
    }

    pub fn remove(&mut self, x: &[u64]) {
        let i = self.ctx.index_of(x) as usize;
        self.members[i] = false;
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        self.members[self.ctx.index_of(x) as usize]
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.contains(&true)
    }

    /// Members in lexicographic order.
    pub fn points(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| self.ctx.point_at(i as u64))
    }

    pub fn union(&self, other: &FiniteSet) -> FiniteSet {
        self.zip(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &FiniteSet) -> FiniteSet {
        self.zip(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &FiniteSet) -> FiniteSet {
        self.zip(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> FiniteSet {
        FiniteSet {
            ctx: self.ctx,
            members: self.members.iter().map(|b| !b).collect(),
        }
    }

    fn zip(&self, other: &FiniteSet, f: impl Fn(bool, bool) -> bool) -> FiniteSet {
        assert_eq!(self.ctx, other.ctx, "sets live in different contexts");
        let members = self
            .members
            .iter()
            .zip(&other.members)
            .map(|(&a, &b)| f(a, b))
            .collect();
        FiniteSet {
            ctx: self.ctx,
            members,
        }
    }

    /// Whether the set meets `ball`.
    pub fn meets(&self, ball: &Ball) -> bool {
        ball.points(&self.ctx).any(|x| self.contains(&x))
    }

    /// Members inside `ball`, in lexicographic order.
    pub fn points_in<'a>(&'a self, ball: &'a Ball) -> impl Iterator<Item = Vec<u64>> + 'a {
        ball.points(&self.ctx).filter(|x| self.contains(x))
    }

    pub fn indicator(&self, ball: &Ball) -> Coloring {
        Coloring::from_fn(&self.ctx, ball, |x| u32::from(self.contains(x)))
    }
}

/// A coloring of a ball: one small integer per point, stored in lexicographic
/// point order of the ball.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    ctx: Context,
    ball: Ball,
    colors: Vec<u32>,
}

impl Coloring {
    pub fn new(ctx: &Context, ball: Ball, colors: Vec<u32>) -> Result<Coloring, DefsetError> {
        ctx.ensure_enumerable()?;
        let expected = ball.size(ctx) as usize;
        if colors.len() != expected {
            return Err(DefsetError::ColoringSize {
                expected,
                got: colors.len(),
            });
        }
        Ok(Coloring {
            ctx: *ctx,
            ball,
            colors,
        })
    }

    pub fn from_fn(ctx: &Context, ball: &Ball, mut f: impl FnMut(&[u64]) -> u32) -> Coloring {
        let colors = ball.points(ctx).map(|x| f(&x)).collect();
        Coloring {
            ctx: *ctx,
            ball: ball.clone(),
            colors,
        }
    }

    pub fn constant(ctx: &Context, ball: &Ball) -> Coloring {
        Coloring::from_fn(ctx, ball, |_| 0)
    }

    /// Check invariants after deserializing.
    pub fn validate(&self) -> Result<(), DefsetError> {
        Ball::new(&self.ctx, self.ball.depth, self.ball.residue.clone())?;
        Coloring::new(&self.ctx, self.ball.clone(), self.colors.clone()).map(|_| ())
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    /// Colors in lexicographic order of the points of the ball.
    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn layout(&self) -> BallLayout {
        BallLayout::new(&self.ctx, &self.ball)
    }

    pub fn color(&self, x: &[u64]) -> u32 {
        self.colors[self.layout().lex_index(x)]
    }

    /// Colors in tree order (see [`BallLayout`]).
    pub fn tree_colors(&self) -> Vec<u32> {
        let layout = self.layout();
        let mut out = vec![0; self.colors.len()];
        for (lex, tree) in layout.lex_to_tree().into_iter().enumerate() {
            out[tree] = self.colors[lex];
        }
        out
    }

    pub fn color_count(&self) -> usize {
        let mut c = self.colors.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    }

    /// Restriction to a sub-ball.
    pub fn restrict(&self, ball: &Ball) -> Result<Coloring, DefsetError> {
        if !self.ball.contains_ball(&self.ctx, ball) {
            return Err(DefsetError::NotSubBall);
        }
        let layout = self.layout();
        Ok(Coloring::from_fn(&self.ctx, ball, |x| {
            self.colors[layout.lex_index(x)]
        }))
    }

    /// The coloring by pairs of colors, renumbered by sorted pair.
    pub fn product(&self, other: &Coloring) -> Result<Coloring, DefsetError> {
        if self.ball != other.ball || self.ctx != other.ctx {
            return Err(DefsetError::DomainMismatch);
        }
        let pairs: Vec<(u32, u32)> = self
            .colors
            .iter()
            .copied()
            .zip(other.colors.iter().copied())
            .collect();
        let ids: BTreeMap<(u32, u32), u32> = {
            let mut keys = pairs.clone();
            keys.sort_unstable();
            keys.dedup();
            keys.into_iter()
                .enumerate()
                .map(|(i, k)| (k, i as u32))
                .collect()
        };
        let colors = pairs.iter().map(|k| ids[k]).collect();
        Ok(Coloring {
            ctx: self.ctx,
            ball: self.ball.clone(),
            colors,
        })
    }

    /// Renumber colors by first occurrence in lexicographic order.
    pub fn normalized(&self) -> Coloring {
        let mut ids = BTreeMap::new();
        let colors = self
            .colors
            .iter()
            .map(|c| {
                let next = ids.len() as u32;
                *ids.entry(*c).or_insert(next)
            })
            .collect();
        Coloring {
            ctx: self.ctx,
            ball: self.ball.clone(),
            colors,
        }
    }

    /// Points of the given color.
    pub fn class(&self, color: u32) -> Vec<Vec<u64>> {
        let layout = self.layout();
        (0..self.colors.len())
            .filter(|&i| self.colors[i] == color)
            .map(|i| layout.lex_point(i))
            .collect()
    }

    /// Whether every class of `self` lies inside a class of `other`.
    pub fn refines(&self, other: &Coloring) -> bool {
        let mut seen: BTreeMap<u32, u32> = BTreeMap::new();
        self.colors
            .iter()
            .zip(&other.colors)
            .all(|(a, b)| *seen.entry(*a).or_insert(*b) == *b)
    }

    pub fn same_partition(&self, other: &Coloring) -> bool {
        self.refines(other) && other.refines(self)
    }
}
