use crate::expr::{ExpressionTree, FeatureFrequency};
use crate::Scalar;

/// Variable-occurrence table ranked by count (ties keep schema order).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyReport {
    pub rows: Vec<FeatureFrequency>,
    pub total_variables: usize,
    pub node_count: usize,
    pub operator_count: usize,
}

pub fn feature_frequency_report<T: Scalar>(tree: &ExpressionTree<T>) -> FrequencyReport {
    let mut rows = tree.variable_frequencies();
    // Stable sort keeps schema order among equal counts.
    rows.sort_by_key(|r| std::cmp::Reverse(r.count));
    FrequencyReport {
        total_variables: rows.iter().map(|r| r.count).sum(),
        rows,
        node_count: tree.node_count(),
        operator_count: tree.operator_count(),
    }
}

impl FrequencyReport {
    pub fn rank_of(&self, name: &str) -> Option<usize> {
        self.rows.iter().position(|r| r.name == name).map(|i| i + 1)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,feature,count,percent\n");
        for (i, r) in self.rows.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{:.2}\n",
                i + 1,
                r.name,
                r.count,
                r.percent
            ));
        }
        out
    }
}
