//! t-stratifications at finite precision: verification, rainbows,
//! reflection, induced stratifications on fibers, a greedy stratifier and
//! the exceptional sets around a point.

mod kegel;
mod ops;
mod rainbow;
mod verify;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::defset::{Coloring, DefsetError, FiniteSet, Fixture};
use crate::geometry::{Ball, BallLayout, GeometryError};
use crate::padic::{Context, PadicError};
use crate::riso::RisoError;

pub use kegel::{affdir, is_subaffine, kegel_xi, maximal_ball, whitney_b_m, KegelSet, WhitneyM};
pub use ops::{
    enhance_small_changes, induced_fiber_strat, minimal_t0, stratify_greedy, GreedyOutcome,
};
pub use rainbow::{rainbow, reflection_witness, reflects};
pub use verify::{verify_tstrat, Failure, FailureKind, Verdict, VerifyReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TstratError {
    #[error("stratification and coloring live on different balls")]
    DomainMismatch,
    #[error("label {label} at position {index} exceeds n = {n}")]
    BadLabel {
        index: usize,
        label: usize,
        n: usize,
    },
    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("expected {expected} declared dimensions, got {got}")]
    DeclaredDims { expected: usize, got: usize },
    #[error("not a t-stratification (failing ball {})", .0.witness.as_ref().map(|b| b.to_string()).unwrap_or_default())]
    NotATStratification(Box<VerifyReport>),
    #[error("stratification is not verified: {0}")]
    NotVerified(String),
    #[error("projection does not exhibit the translation space")]
    NotExhibiting,
    #[error("the fiber does not meet the ball")]
    FiberOutsideBall,
    #[error("demotion budget exhausted")]
    BudgetExhausted(Box<VerifyReport>),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("postcondition failed: {0}")]
    PostconditionFailed(String),
    #[error("operation needs dimension 1, got {0}")]
    NeedsDimensionOne(usize),
    #[error("the set is empty")]
    EmptySet,
    #[error(transparent)]
    Riso(#[from] RisoError),
    #[error(transparent)]
    Defset(#[from] DefsetError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

/// A partition of a base ball `B0` into `S_0, ..., S_n`, given by a label per
/// point (lexicographic order), together with a declared dimension per
/// stratum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stratification {
    ctx: Context,
    ball: Ball,
    labels: Vec<usize>,
    declared_dims: Vec<usize>,
}

impl Stratification {
    pub fn new(
        ctx: &Context,
        ball: Ball,
        labels: Vec<usize>,
        declared_dims: Vec<usize>,
    ) -> Result<Stratification, TstratError> {
        ctx.ensure_enumerable()?;
        Ball::new(ctx, ball.depth, ball.residue.clone())?;
        let expected = ball.size(ctx) as usize;
        if labels.len() != expected {
            return Err(TstratError::LabelCount {
                expected,
                got: labels.len(),
            });
        }
        if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l > ctx.n()) {
            return Err(TstratError::BadLabel {
                index,
                label,
                n: ctx.n(),
            });
        }
        if declared_dims.len() != ctx.n() + 1 {
            return Err(TstratError::DeclaredDims {
                expected: ctx.n() + 1,
                got: declared_dims.len(),
            });
        }
        Ok(Stratification {
            ctx: *ctx,
            ball,
            labels,
            declared_dims,
        })
    }

    /// Labels from a function, declared dimensions `0..=n`.
    pub fn from_fn(
        ctx: &Context,
        ball: &Ball,
        mut f: impl FnMut(&[u64]) -> usize,
    ) -> Result<Stratification, TstratError> {
        let labels = ball.points(ctx).map(|x| f(&x)).collect();
        Stratification::new(ctx, ball.clone(), labels, (0..=ctx.n()).collect())
    }

    /// Everything in `S_n`.
    pub fn trivial(ctx: &Context, ball: &Ball) -> Stratification {
        Stratification::from_fn(ctx, ball, |_| ctx.n()).expect("valid labels")
    }

    /// The reference stratification of a fixture on `O^n`.
    pub fn from_fixture(f: &Fixture, with_s0: bool) -> Stratification {
        let ctx = f.ctx;
        Stratification::new(
            &ctx,
            Ball::root(ctx.n()),
            f.labels(with_s0),
            (0..=ctx.n()).collect(),
        )
        .expect("fixture labels are valid")
    }

    pub fn validate(&self) -> Result<(), TstratError> {
        Stratification::new(
            &self.ctx,
            self.ball.clone(),
            self.labels.clone(),
            self.declared_dims.clone(),
        )
        .map(|_| ())
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn layout(&self) -> BallLayout {
        BallLayout::new(&self.ctx, &self.ball)
    }

    /// Labels in lexicographic order of the points of the base ball.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn declared_dims(&self) -> &[usize] {
        &self.declared_dims
    }

    pub fn label(&self, x: &[u64]) -> usize {
        self.labels[self.layout().lex_index(x)]
    }

    pub fn set_label(&mut self, x: &[u64], d: usize) {
        assert!(d <= self.ctx.n());
        let i = self.layout().lex_index(x);
        self.labels[i] = d;
    }

    fn set_where(&self, keep: impl Fn(usize) -> bool) -> FiniteSet {
        let layout = self.layout();
        let pts = (0..self.labels.len())
            .filter(|&i| keep(self.labels[i]))
            .map(|i| layout.lex_point(i));
        FiniteSet::from_points(&self.ctx, pts).expect("points of the base ball")
    }

    /// `S_d`.
    pub fn stratum(&self, d: usize) -> FiniteSet {
        self.set_where(|l| l == d)
    }

    /// `S_{<=d}`.
    pub fn at_most(&self, d: usize) -> FiniteSet {
        self.set_where(|l| l <= d)
    }

    /// `S_{>=d}`.
    pub fn at_least(&self, d: usize) -> FiniteSet {
        self.set_where(|l| l >= d)
    }

    /// The labels as a coloring.
    pub fn coloring(&self) -> Coloring {
        Coloring::new(
            &self.ctx,
            self.ball.clone(),
            self.labels.iter().map(|&l| l as u32).collect(),
        )
        .expect("sizes agree")
    }

    /// Labels in tree order.
    pub(crate) fn tree_labels(&self) -> Vec<usize> {
        let layout = self.layout();
        let mut out = vec![0; self.labels.len()];
        for (lex, tree) in layout.lex_to_tree().into_iter().enumerate() {
            out[tree] = self.labels[lex];
        }
        out
    }

    /// `min_labels[k - depth][node]`: the least label in each node of depth
    /// `k`, for `k` from the base depth to `m`.
    pub(crate) fn min_labels(&self) -> Vec<Vec<usize>> {
        let fan = self.ctx.residue_count();
        let mut levels = vec![self.tree_labels()];
        for _ in self.ball.depth..self.ctx.m() {
            let below = levels.last().unwrap();
            levels.push(
                below
                    .chunks(fan)
                    .map(|c| *c.iter().min().unwrap())
                    .collect(),
            );
        }
        levels.reverse();
        levels
    }
}
