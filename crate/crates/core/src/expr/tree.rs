use std::collections::BTreeMap;

use rand::Rng;

use super::{ExprError, OperatorKind};
use crate::Scalar;

/// Variable names of the published model, in index order `X0..X7`.
pub const DEFAULT_FEATURE_NAMES: [&str; 8] = [
    "SNR_TB_dB",
    "MCS_Code_Rate",
    "MCS_Modulation_Index",
    "v_rel_kmph",
    "N_sub",
    "N_DMRS",
    "Flag_Urban",
    "Flag_NLOS",
];

pub fn default_feature_names() -> Vec<String> {
    DEFAULT_FEATURE_NAMES
        .iter()
        .map(|s| s.to_string())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprNode<T> {
    Operator {
        kind: OperatorKind,
        children: Vec<ExprNode<T>>,
    },
    Variable(usize),
    Constant(T),
}

impl<T: Scalar> ExprNode<T> {
    pub fn unary(kind: OperatorKind, a: ExprNode<T>) -> Self {
        debug_assert_eq!(kind.arity(), 1);
        ExprNode::Operator {
            kind,
            children: vec![a],
        }
    }

    pub fn binary(kind: OperatorKind, a: ExprNode<T>, b: ExprNode<T>) -> Self {
        debug_assert_eq!(kind.arity(), 2);
        ExprNode::Operator {
            kind,
            children: vec![a, b],
        }
    }

    pub fn is_terminal(&self) -> bool {
        !matches!(self, ExprNode::Operator { .. })
    }

    pub fn node_count(&self) -> usize {
        match self {
            ExprNode::Operator { children, .. } => {
                1 + children.iter().map(ExprNode::node_count).sum::<usize>()
            }
            _ => 1,
        }
    }

    pub fn operator_count(&self) -> usize {
        match self {
            ExprNode::Operator { children, .. } => {
                1 + children.iter().map(ExprNode::operator_count).sum::<usize>()
            }
            _ => 0,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            ExprNode::Operator { children, .. } => {
                1 + children.iter().map(ExprNode::depth).max().unwrap_or(0)
            }
            _ => 1,
        }
    }

    /// Preorder traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a ExprNode<T>)) {
        f(self);
        if let ExprNode::Operator { children, .. } = self {
            for c in children {
                c.visit(f);
            }
        }
    }

    pub fn max_variable_index(&self) -> Option<usize> {
        let mut max = None;
        self.visit(&mut |n| {
            if let ExprNode::Variable(i) = n {
                max = Some(max.map_or(*i, |m: usize| m.max(*i)));
            }
        });
        max
    }

    /// The node at preorder position `index`.
    pub fn get(&self, index: usize) -> Option<&ExprNode<T>> {
        let mut remaining = index;
        self.get_inner(&mut remaining)
    }

    fn get_inner(&self, remaining: &mut usize) -> Option<&ExprNode<T>> {
        if *remaining == 0 {
            return Some(self);
        }
        *remaining -= 1;
        if let ExprNode::Operator { children, .. } = self {
            for c in children {
                if let Some(n) = c.get_inner(remaining) {
                    return Some(n);
                }
            }
        }
        None
    }

    fn get_mut_inner(&mut self, remaining: &mut usize) -> Option<&mut ExprNode<T>> {
        if *remaining == 0 {
            return Some(self);
        }
        *remaining -= 1;
        if let ExprNode::Operator { children, .. } = self {
            for c in children {
                if let Some(n) = c.get_mut_inner(remaining) {
                    return Some(n);
                }
            }
        }
        None
    }

    /// Depth (1-based) of the node at preorder position `index`.
    pub fn depth_of(&self, index: usize) -> Option<usize> {
        fn walk<T: Scalar>(n: &ExprNode<T>, remaining: &mut usize, level: usize) -> Option<usize> {
            if *remaining == 0 {
                return Some(level);
            }
            *remaining -= 1;
            if let ExprNode::Operator { children, .. } = n {
                for c in children {
                    if let Some(d) = walk(c, remaining, level + 1) {
                        return Some(d);
                    }
                }
            }
            None
        }
        let mut remaining = index;
        walk(self, &mut remaining, 1)
    }
}

/// Preorder position of a node within a specific tree. Locators are only
/// meaningful for the tree they were drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeLocator {
    pub index: usize,
    /// Node count of the tree the locator was drawn from; used to reject
    /// locators applied to a different tree.
    pub tree_size: usize,
}

/// Occurrence count and share of one feature among all variable nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFrequency {
    pub name: String,
    pub index: usize,
    pub count: usize,
    pub percent: f64,
}

/// A formula `f(X)` bound to a feature schema.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionTree<T> {
    root: ExprNode<T>,
    feature_names: Vec<String>,
}

impl<T: Scalar> ExpressionTree<T> {
    /// Validates that constants are finite, arities match and every
    /// variable index is inside the schema.
    pub fn new(root: ExprNode<T>, feature_names: Vec<String>) -> Result<Self, ExprError> {
        let mut err = None;
        root.visit(&mut |n| {
            if err.is_some() {
                return;
            }
            match n {
                ExprNode::Constant(c) if !c.is_finite() => {
                    err = Some(ExprError::NonFiniteConstant);
                }
                ExprNode::Variable(i) if *i >= feature_names.len() => {
                    err = Some(ExprError::VariableOutOfRange {
                        index: *i,
                        features: feature_names.len(),
                    });
                }
                ExprNode::Operator { kind, children } if children.len() != kind.arity() => {
                    err = Some(ExprError::Arity {
                        name: kind.name().to_string(),
                        expected: kind.arity(),
                        found: children.len(),
                    });
                }
                _ => {}
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(ExpressionTree {
                root,
                feature_names,
            }),
        }
    }

    /// Tree over the default eight-feature schema.
    pub fn with_default_schema(root: ExprNode<T>) -> Result<Self, ExprError> {
        Self::new(root, default_feature_names())
    }

    pub(crate) fn from_parts_unchecked(root: ExprNode<T>, feature_names: Vec<String>) -> Self {
        ExpressionTree {
            root,
            feature_names,
        }
    }

    pub fn root(&self) -> &ExprNode<T> {
        &self.root
    }

    pub fn into_root(self) -> ExprNode<T> {
        self.root
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }

    pub fn operator_count(&self) -> usize {
        self.root.operator_count()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Same formula under a renamed schema of equal width.
    pub fn with_feature_names(self, names: Vec<String>) -> Result<Self, ExprError> {
        Self::new(self.root, names)
    }

    /// Per-feature occurrence counts over all variable nodes, in schema
    /// order. Percentages are zero when the tree has no variables.
    pub fn variable_frequencies(&self) -> Vec<FeatureFrequency> {
        let mut counts = vec![0usize; self.feature_names.len()];
        self.root.visit(&mut |n| {
            if let ExprNode::Variable(i) = n {
                counts[*i] += 1;
            }
        });
        let total: usize = counts.iter().sum();
        self.feature_names
            .iter()
            .zip(counts)
            .enumerate()
            .map(|(index, (name, count))| FeatureFrequency {
                name: name.clone(),
                index,
                count,
                percent: if total == 0 {
                    0.0
                } else {
                    100.0 * count as f64 / total as f64
                },
            })
            .collect()
    }

    /// Same data as [`variable_frequencies`](Self::variable_frequencies),
    /// keyed by feature name.
    pub fn variable_frequency_map(&self) -> BTreeMap<String, (usize, f64)> {
        self.variable_frequencies()
            .into_iter()
            .map(|f| (f.name, (f.count, f.percent)))
            .collect()
    }

    pub fn locator(&self, index: usize) -> Result<NodeLocator, ExprError> {
        let size = self.node_count();
        if index >= size {
            return Err(ExprError::StaleLocator { index, size });
        }
        Ok(NodeLocator {
            index,
            tree_size: size,
        })
    }

    /// Uniformly random node.
    pub fn random_subtree<R: Rng + ?Sized>(&self, rng: &mut R) -> NodeLocator {
        let size = self.node_count();
        NodeLocator {
            index: rng.random_range(0..size),
            tree_size: size,
        }
    }

    pub fn subtree(&self, at: NodeLocator) -> Result<&ExprNode<T>, ExprError> {
        self.check_locator(at)?;
        Ok(self.root.get(at.index).expect("locator checked"))
    }

    /// Returns a new tree with the node at `at` replaced by `subtree`;
    /// `self` is left untouched.
    pub fn replace_subtree(
        &self,
        at: NodeLocator,
        subtree: ExprNode<T>,
    ) -> Result<Self, ExprError> {
        self.check_locator(at)?;
        if let Some(i) = subtree.max_variable_index() {
            if i >= self.feature_names.len() {
                return Err(ExprError::VariableOutOfRange {
                    index: i,
                    features: self.feature_names.len(),
                });
            }
        }
        let mut root = self.root.clone();
        let mut remaining = at.index;
        let slot = root.get_mut_inner(&mut remaining).expect("locator checked");
        *slot = subtree;
        Ok(ExpressionTree {
            root,
            feature_names: self.feature_names.clone(),
        })
    }

    fn check_locator(&self, at: NodeLocator) -> Result<(), ExprError> {
        let size = self.node_count();
        if at.tree_size != size || at.index >= size {
            return Err(ExprError::StaleLocator {
                index: at.index,
                size,
            });
        }
        Ok(())
    }
}
