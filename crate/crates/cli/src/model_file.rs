//! The `model.json` artifact: sheared tree, grouping and schema.

use std::path::Path;

use serde::{Deserialize, Serialize};
use survfuse::select::FittedModel;
use survfuse::split::SplitRule;
use survfuse::tree::Tree;
use survfuse::Schema;

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEntry {
    pub group: usize,
    /// Relaxed log hazard ratio against group 1.
    pub beta: f64,
    pub hazard_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: u32,
    pub schema: Schema,
    pub time_column: String,
    pub status_column: String,
    pub criterion: String,
    pub lambda: f64,
    pub seed: u64,
    pub groups: Vec<GroupEntry>,
    /// Leaves carry their group id; node sizes refer to the training data.
    pub tree: Tree,
}

impl ModelFile {
    pub fn new(model: &FittedModel, schema: Schema, time_column: &str, status_column: &str, seed: u64) -> Self {
        let groups = model
            .pattern
            .relaxed_betas
            .iter()
            .enumerate()
            .map(|(g, &beta)| GroupEntry { group: g + 1, beta, hazard_ratio: beta.exp() })
            .collect();
        ModelFile {
            format: FORMAT_VERSION,
            schema,
            time_column: time_column.into(),
            status_column: status_column.into(),
            criterion: model.report.criterion.clone(),
            lambda: model.pattern.lambda,
            seed,
            groups,
            tree: model.tree.clone(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let model: ModelFile =
            serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: not a model file: {e}", path.display())))?;
        if model.format != FORMAT_VERSION {
            return Err(CliError::Data(format!("{}: unsupported model format {}", path.display(), model.format)));
        }
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn group_of_leaf(&self, leaf: u64) -> usize {
        self.tree.node(leaf).and_then(|n| n.group).unwrap_or(1)
    }

    pub fn hazard_ratio(&self, group: usize) -> f64 {
        self.groups.get(group - 1).map_or(1.0, |g| g.hazard_ratio)
    }

    fn rule_text(&self, id: u64, left: bool) -> String {
        let node = self.tree.node(id).expect("tree is connected");
        let spec = node.split.as_ref().expect("internal node");
        let cov = self.schema.get(spec.variable);
        match &spec.rule {
            SplitRule::Threshold { cutoff } => {
                format!("{} {} {}", cov.name, if left { "<=" } else { ">" }, survfuse::select::sig6(*cutoff))
            }
            SplitRule::Subset { levels } => {
                let names = cov.levels().unwrap_or(&[]);
                let inside: Vec<&str> = levels.iter().filter_map(|&l| names.get(l).map(String::as_str)).collect();
                format!("{} {} {{{}}}", cov.name, if left { "in" } else { "not in" }, inside.join(", "))
            }
        }
    }

    /// Indented rendering of the tree, one line per node.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut stack: Vec<(u64, usize, String)> = vec![(1, 0, "root".into())];
        while let Some((id, indent, label)) = stack.pop() {
            let node = self.tree.node(id).expect("tree is connected");
            let tail = if node.is_leaf() {
                let g = self.group_of_leaf(id);
                format!(" -> group {g} (HR {})", survfuse::select::sig6(self.hazard_ratio(g)))
            } else {
                String::new()
            };
            out.push_str(&format!("{}{label}  [node {id}, n={}, events={}]{tail}\n", "  ".repeat(indent), node.n, node.events));
            if !node.is_leaf() {
                stack.push((2 * id + 1, indent + 1, self.rule_text(id, false)));
                stack.push((2 * id, indent + 1, self.rule_text(id, true)));
            }
        }
        out
    }
}
