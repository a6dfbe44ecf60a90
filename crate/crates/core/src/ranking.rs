use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::scoring::ScoreState;

/// Codes ordered by descending score.
///
/// Equal scores keep ascending index order. `scores[k]` is the score of
/// `order[k]`; `tie_groups` lists every group of two or more codes sharing
/// exactly the same score, in ranking order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub order: Vec<usize>,
    pub scores: Vec<f64>,
    pub tie_groups: Vec<Vec<usize>>,
}

impl Ranking {
    pub fn top(&self) -> Option<usize> {
        self.order.first().copied()
    }

    pub fn bottom(&self) -> Option<usize> {
        self.order.last().copied()
    }

    /// Every code tied with the top-ranked one (including it).
    pub fn top_group(&self) -> &[usize] {
        match self.tie_groups.first() {
            Some(g) if Some(g[0]) == self.top() => g,
            _ => self.order.get(..1).unwrap_or(&[]),
        }
    }
}

pub fn rank_candidates(state: &ScoreState) -> Ranking {
    rank_scores(&state.code_scores)
}

/// Ranks an arbitrary score vector with the same rules as [`rank_candidates`].
pub fn rank_scores(scores: &[f64]) -> Ranking {
    let order = descending_order(scores);
    let sorted: Vec<f64> = order.iter().map(|&i| scores[i]).collect();

    let mut tie_groups = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && sorted[end] == sorted[start] {
            end += 1;
        }
        if end - start > 1 {
            tie_groups.push(order[start..end].to_vec());
        }
        start = end;
    }

    Ranking {
        order,
        scores: sorted,
        tie_groups,
    }
}

/// Indices sorted by descending value, ties by ascending index.
pub(crate) fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable sort keeps ascending index among equal keys
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order
}
