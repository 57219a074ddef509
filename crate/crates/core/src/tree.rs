//! Recursive partitioning, routing and tree serialization.
//!
//! Nodes use heap numbering: the root is 1 and node `k` has children `2k`
//! (rule true) and `2k + 1`.

use serde::{Deserialize, Serialize};

use crate::dataset::SurvivalDataset;
use crate::iv::{iv_split, SplitMode};
use crate::rng::Seed;
use crate::split::{best_split, NodeData, SplitConfig, SplitSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_node_size: usize,
    pub min_node_events: usize,
    /// Below these sizes intersected validation falls back to plain splitting.
    pub iv_min_size: usize,
    pub iv_min_events: usize,
    pub mode: SplitMode,
    pub split: SplitConfig,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: 4,
            min_node_size: 30,
            min_node_events: 8,
            iv_min_size: 30,
            iv_min_events: 9,
            mode: SplitMode::Iv,
            split: SplitConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: u64,
    pub depth: usize,
    pub n: usize,
    pub events: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<usize>,
    /// Training rows reaching the node (a multiset for bootstrap samples).
    #[serde(skip)]
    pub rows: Vec<usize>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }
}

pub fn left_child(id: u64) -> u64 {
    2 * id
}

pub fn right_child(id: u64) -> u64 {
    2 * id + 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// Sorted by id.
    nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn from_nodes(mut nodes: Vec<TreeNode>) -> Self {
        nodes.sort_by_key(|n| n.id);
        Tree { nodes }
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: u64) -> Option<&TreeNode> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok().map(|k| &self.nodes[k])
    }

    pub fn node_mut(&mut self, id: u64) -> Option<&mut TreeNode> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok().map(move |k| &mut self.nodes[k])
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    /// Leaf ids in ascending order.
    pub fn leaves(&self) -> Vec<u64> {
        self.nodes.iter().filter(|n| n.is_leaf()).map(|n| n.id).collect()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Leaf reached by a covariate vector: `z <= c` and `z ∈ S` go left.
    pub fn route(&self, covariates: &[f64]) -> u64 {
        let mut id = 1;
        loop {
            let node = self.node(id).expect("tree is connected");
            match &node.split {
                None => return id,
                Some(s) => id = if s.goes_left(covariates[s.variable]) { left_child(id) } else { right_child(id) },
            }
        }
    }

    pub fn route_row(&self, data: &SurvivalDataset, row: usize) -> u64 {
        let mut id = 1;
        loop {
            let node = self.node(id).expect("tree is connected");
            match &node.split {
                None => return id,
                Some(s) => {
                    id = if s.goes_left(data.value(row, s.variable)) { left_child(id) } else { right_child(id) }
                }
            }
        }
    }

    /// Leaf id of every row of `data`.
    pub fn route_all(&self, data: &SurvivalDataset) -> Vec<u64> {
        (0..data.len()).map(|i| self.route_row(data, i)).collect()
    }

    /// Position of each row's leaf within [`Tree::leaves`].
    pub fn leaf_positions(&self, data: &SurvivalDataset, rows: &[usize]) -> Vec<usize> {
        let leaves = self.leaves();
        rows.iter()
            .map(|&i| {
                let id = self.route_row(data, i);
                leaves.binary_search(&id).expect("routing ends at a leaf")
            })
            .collect()
    }

    /// Variables used by at least one split.
    pub fn split_variables(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.nodes.iter().filter_map(|n| n.split.as_ref().map(|s| s.variable)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Collapse every node at depth `depth` into a leaf.
    pub fn truncated(&self, depth: usize) -> Tree {
        let nodes = self
            .nodes
            .iter()
            .filter(|n| n.depth <= depth)
            .map(|n| {
                let mut n = n.clone();
                if n.depth == depth {
                    n.split = None;
                    n.statistic = None;
                }
                n
            })
            .collect();
        Tree { nodes }
    }

    /// Subtree rooted at `id` is replaced by a single leaf.
    pub fn collapse(&mut self, id: u64) {
        let keep: Vec<TreeNode> = self.nodes.drain(..).filter(|n| n.id == id || !is_descendant(n.id, id)).collect();
        self.nodes = keep;
        if let Some(n) = self.node_mut(id) {
            n.split = None;
            n.statistic = None;
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Tree> {
        serde_json::from_str(s)
    }
}

/// Whether `id` lies strictly below `ancestor`.
pub fn is_descendant(mut id: u64, ancestor: u64) -> bool {
    while id > ancestor {
        id /= 2;
        if id == ancestor {
            return true;
        }
    }
    false
}

/// Grow a tree on `rows` of `data` until the stopping rules bind.
pub fn grow(data: &SurvivalDataset, rows: &[usize], config: &TreeConfig, seed: Seed) -> Tree {
    let mut nodes = Vec::new();
    let mut stack = vec![(1u64, 0usize, rows.to_vec())];
    while let Some((id, depth, node_rows)) = stack.pop() {
        let events = node_rows.iter().filter(|&&i| data.event(i)).count();
        let mut node = TreeNode { id, depth, n: node_rows.len(), events, split: None, statistic: None, group: None, rows: vec![] };
        let splittable = depth < config.max_depth && node_rows.len() >= config.min_node_size && events >= config.min_node_events;
        if splittable {
            let use_iv = config.mode == SplitMode::Iv && node_rows.len() >= config.iv_min_size && events >= config.iv_min_events;
            let found = if use_iv {
                iv_split(data, &node_rows, &config.split, seed.index(id))
            } else {
                best_split(&NodeData::new(data, &node_rows), &config.split)
            };
            if let Some(result) = found {
                let (left, right): (Vec<usize>, Vec<usize>) =
                    node_rows.iter().partition(|&&i| result.spec.goes_left(data.value(i, result.spec.variable)));
                if !left.is_empty() && !right.is_empty() {
                    stack.push((right_child(id), depth + 1, right));
                    stack.push((left_child(id), depth + 1, left));
                    node.split = Some(result.spec);
                    node.statistic = Some(result.statistic);
                }
            }
        }
        node.rows = node_rows;
        nodes.push(node);
    }
    Tree::from_nodes(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descendant_arithmetic() {
        assert!(is_descendant(4, 1));
        assert!(is_descendant(5, 2));
        assert!(!is_descendant(6, 2));
        assert!(!is_descendant(2, 2));
    }
}
