use std::collections::HashMap;

use crate::defset::Coloring;
use crate::geometry::{Ball, DigitSpace};
use crate::riso::TspTable;

use super::verify::verify_tstrat;
use super::{Stratification, TstratError};

/// The coloring by the tuple of sets `(rv(x - S_i))_i`, with ids assigned by
/// first occurrence in lexicographic order.
///
/// `rv(x - s) = (k, r)` exactly when `s` lies in child `d_k(x) + r` of the
/// depth-`k` node containing `x`, so the tuple is read off from which
/// children of the nodes along the path of `x` meet each stratum.
pub fn rainbow(s: &Stratification) -> Coloring {
    let ctx = s.ctx();
    let n = ctx.n();
    let layout = s.layout();
    let ds = DigitSpace::new(ctx.p(), n);
    let fan = ds.size();
    let depth = s.ball().depth;
    let m = ctx.m();
    let tree_labels = s.tree_labels();

    // meets[k - depth][i][node]: the node of depth k meets S_i
    let mut leaf: Vec<Vec<bool>> = vec![vec![false; tree_labels.len()]; n + 1];
    for (t, &l) in tree_labels.iter().enumerate() {
        leaf[l][t] = true;
    }
    let mut levels: Vec<Vec<Vec<bool>>> = vec![leaf];
    for _ in depth..m {
        let below = levels.last().unwrap();
        let up = below
            .iter()
            .map(|b| b.chunks(fan).map(|c| c.iter().any(|&x| x)).collect())
            .collect();
        levels.push(up);
    }
    levels.reverse();

    // id of the rotated child pattern, per (level, child node)
    let mut pattern_ids: HashMap<Vec<bool>, u32> = HashMap::new();
    let mut child_code: Vec<Vec<u32>> = Vec::with_capacity((m - depth) as usize);
    for k in depth..m {
        let below = &levels[(k + 1 - depth) as usize];
        let nodes = layout.nodes_at(k);
        let mut codes = vec![0u32; nodes * fan];
        for node in 0..nodes {
            for d in 0..fan {
                let mut key = Vec::with_capacity((n + 1) * fan);
                for stratum in below.iter() {
                    key.push(false);
                    key.extend((1..fan).map(|r| stratum[node * fan + ds.add(d, r)]));
                }
                let next = pattern_ids.len() as u32;
                codes[node * fan + d] = *pattern_ids.entry(key).or_insert(next);
            }
        }
        child_code.push(codes);
    }

    let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
    let colors = (0..layout.size())
        .map(|lex| {
            let x = layout.lex_point(lex);
            let t = layout.tree_index(&x);
            let mut key: Vec<u32> = (depth..m)
                .map(|k| child_code[(k - depth) as usize][t / layout.block(k + 1)])
                .collect();
            key.push(tree_labels[t] as u32);
            let next = ids.len() as u32;
            *ids.entry(key).or_insert(next)
        })
        .collect();
    Coloring::new(ctx, s.ball().clone(), colors).expect("sizes agree")
}

/// Whether `tsp_B((S_i)_i, chi) = tsp_B((S_i)_i)` for every ball `B`.
pub fn reflects(s: &Stratification, chi: &Coloring) -> Result<bool, TstratError> {
    Ok(reflection_witness(s, chi)?.is_none())
}

/// A ball (least in ball order) on which adding `chi` shrinks the
/// translation space, if any. Requires `s` to be a t-stratification.
pub fn reflection_witness(s: &Stratification, chi: &Coloring) -> Result<Option<Ball>, TstratError> {
    if chi.ctx() != s.ctx() || chi.ball() != s.ball() {
        return Err(TstratError::DomainMismatch);
    }
    let report = verify_tstrat(s, &Coloring::constant(s.ctx(), s.ball()))?;
    if !report.passed() {
        return Err(TstratError::NotATStratification(Box::new(report)));
    }
    let plain = TspTable::build(&s.coloring())?;
    let with = TspTable::build(&s.coloring().product(chi)?)?;
    let layout = plain.layout();
    for k in s.ball().depth..s.ctx().m() {
        for node in 0..layout.nodes_at(k) {
            if plain.tsp_node(k, node) != with.tsp_node(k, node) {
                return Ok(Some(layout.node_ball(k, node)));
            }
        }
    }
    Ok(None)
}
