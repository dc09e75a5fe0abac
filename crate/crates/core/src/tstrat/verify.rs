use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::defset::{dim_estimate, Coloring};
use crate::geometry::{Ball, Subspace};
use crate::riso::TspTable;

use super::{Stratification, TstratError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    /// `dim tsp` is below the least label present in the ball.
    Translatability,
    /// A non-empty stratum `S_d` has a declared dimension above `d`.
    DeclaredDimension,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub ball: Ball,
    pub required_d: usize,
    pub tsp_dim: usize,
    pub tsp: Subspace,
    pub filter: FailureKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub verdict: Verdict,
    /// Balls whose translation space was compared against the requirement.
    pub checked_balls: usize,
    /// Balls skipped because an ancestor with the same requirement passed.
    pub skipped_balls: usize,
    /// Sorted by ball.
    pub failures: Vec<Failure>,
    /// The deepest failing ball (least in ball order among those).
    pub witness: Option<Ball>,
    pub warnings: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Check the t-stratification axioms for `(S_i)_i` together with `chi`.
///
/// For every ball `B` of depth below `m` inside the base ball, with `j` the
/// least label in `B`, require `dim tsp_B((S_i)_i, chi) >= j`. A ball is
/// skipped when an ancestor with the same `j` passed, since translatability
/// passes to sub-balls. Declared dimensions must satisfy `dim S_d <= d`;
/// [`dim_estimate`] only produces warnings.
pub fn verify_tstrat(s: &Stratification, chi: &Coloring) -> Result<VerifyReport, TstratError> {
    if chi.ctx() != s.ctx() || chi.ball() != s.ball() {
        return Err(TstratError::DomainMismatch);
    }
    let ctx = s.ctx();
    let mut failures = vec![];
    let mut warnings = vec![];
    for d in 0..=ctx.n() {
        let stratum = s.stratum(d);
        if stratum.is_empty() {
            continue;
        }
        let declared = s.declared_dims()[d];
        if declared > d {
            failures.push(Failure {
                ball: s.ball().clone(),
                required_d: d,
                tsp_dim: declared,
                tsp: Subspace::zero(ctx.p(), ctx.n()),
                filter: FailureKind::DeclaredDimension,
            });
        }
        let est = dim_estimate(&stratum)?;
        if est > declared {
            warnings.push(format!(
                "S_{d} looks {est}-dimensional but is declared {declared}"
            ));
        }
    }

    let table = TspTable::build(&s.coloring().product(chi)?)?;
    let layout = table.layout().clone();
    let mins = s.min_labels();
    let depth = s.ball().depth;
    let fan = ctx.residue_count();
    let (mut checked, mut skipped) = (0, 0);
    // covered[node]: requirement of the nearest passing ancestor
    let mut covered: Vec<Option<usize>> = vec![None];
    for k in depth..ctx.m() {
        let level = &mins[(k - depth) as usize];
        let results: Vec<(Option<usize>, Option<Failure>, bool)> = (0..layout.nodes_at(k))
            .into_par_iter()
            .map(|node| {
                let j = level[node];
                let inherited = covered[if k == depth { 0 } else { node / fan }];
                if inherited == Some(j) {
                    return (Some(j), None, false);
                }
                let v = table.tsp_node(k, node);
                if v.dim() >= j {
                    (Some(j), None, true)
                } else {
                    let f = Failure {
                        ball: layout.node_ball(k, node),
                        required_d: j,
                        tsp_dim: v.dim(),
                        tsp: v,
                        filter: FailureKind::Translatability,
                    };
                    (None, Some(f), true)
                }
            })
            .collect();
        let mut next = Vec::with_capacity(results.len());
        for (cov, fail, was_checked) in results {
            if was_checked {
                checked += 1;
            } else {
                skipped += 1;
            }
            failures.extend(fail);
            next.push(cov);
        }
        covered = next;
    }
    failures.sort_by(|a, b| {
        a.ball
            .cmp(&b.ball)
            .then(a.filter.cmp_key().cmp(&b.filter.cmp_key()))
    });
    let witness = failures
        .iter()
        .map(|f| &f.ball)
        .max_by(|a, b| a.depth.cmp(&b.depth).then(b.residue.cmp(&a.residue)))
        .cloned();
    let verdict = if failures.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(VerifyReport {
        verdict,
        checked_balls: checked,
        skipped_balls: skipped,
        failures,
        witness,
        warnings,
    })
}

impl FailureKind {
    fn cmp_key(self) -> u8 {
        match self {
            FailureKind::DeclaredDimension => 0,
            FailureKind::Translatability => 1,
        }
    }
}
