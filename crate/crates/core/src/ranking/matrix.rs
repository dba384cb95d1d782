use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::RankingError;
use crate::corpus::{Judgment, StyleKeyword};

/// Pairwise win counts over an ordered item list. `wins[i][j]` is the
/// number of times item `i` beat item `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinMatrix {
    pub style: Option<StyleKeyword>,
    ids: Vec<String>,
    wins: Vec<u64>,
}

impl WinMatrix {
    pub fn zeros(ids: Vec<String>) -> Self {
        let n = ids.len();
        Self {
            style: None,
            ids,
            wins: vec![0; n * n],
        }
    }

    /// Counts every judgment. Judgments are folded in regardless of style;
    /// see [`WinMatrix::for_style`] to filter.
    pub fn from_judgments(judgments: &[Judgment], ids: &[String]) -> Result<Self, RankingError> {
        let mut m = Self::zeros(ids.to_vec());
        let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let n = ids.len();
        for j in judgments {
            let w = *index
                .get(j.winner_id())
                .ok_or_else(|| RankingError::UnknownStimulus(j.winner_id().to_string()))?;
            let l = *index
                .get(j.loser_id())
                .ok_or_else(|| RankingError::UnknownStimulus(j.loser_id().to_string()))?;
            m.wins[w * n + l] += 1;
        }
        Ok(m)
    }

    pub fn for_style(judgments: &[Judgment], style: &StyleKeyword, ids: &[String]) -> Result<Self, RankingError> {
        let filtered: Vec<Judgment> = judgments.iter().filter(|j| &j.style == style).cloned().collect();
        let mut m = Self::from_judgments(&filtered, ids)?;
        m.style = Some(style.clone());
        Ok(m)
    }

    /// Builds a matrix from dense rows. Diagonal entries must be zero.
    pub fn from_rows(ids: Vec<String>, rows: &[Vec<u64>]) -> Self {
        let n = ids.len();
        assert_eq!(rows.len(), n);
        let mut m = Self::zeros(ids);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n);
            assert_eq!(row[i], 0, "diagonal must be zero");
            m.wins[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn wins(&self, i: usize, j: usize) -> u64 {
        self.wins[i * self.len() + j]
    }

    /// Total comparisons between `i` and `j` in either direction.
    pub fn comparisons(&self, i: usize, j: usize) -> u64 {
        self.wins(i, j) + self.wins(j, i)
    }

    pub fn total(&self) -> u64 {
        self.wins.iter().sum()
    }

    pub fn total_wins(&self, i: usize) -> u64 {
        (0..self.len()).map(|j| self.wins(i, j)).sum()
    }

    pub fn total_losses(&self, i: usize) -> u64 {
        (0..self.len()).map(|j| self.wins(j, i)).sum()
    }

    /// Every count multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        Self {
            style: self.style.clone(),
            ids: self.ids.clone(),
            wins: self.wins.iter().map(|w| w * factor).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connectivity {
    Connected,
    /// Connected components, each listed in matrix order, ordered by first member.
    Components(Vec<Vec<String>>),
}

/// Connectivity of the undirected graph with an edge wherever two items
/// were compared at least once.
pub fn check_connectivity(m: &WinMatrix) -> Connectivity {
    let n = m.len();
    let mut label = vec![usize::MAX; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let c = components.len();
        let mut members = vec![start];
        label[start] = c;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if label[j] == usize::MAX && m.comparisons(i, j) > 0 {
                    label[j] = c;
                    members.push(j);
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    if components.len() <= 1 {
        Connectivity::Connected
    } else {
        Connectivity::Components(
            components
                .into_iter()
                .map(|c| c.into_iter().map(|i| m.ids[i].clone()).collect())
                .collect(),
        )
    }
}
