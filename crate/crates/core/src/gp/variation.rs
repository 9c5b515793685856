//! Crossover and mutation. All operators return new trees; parents are
//! never modified. A child that would exceed the size limits is retried
//! and, after `max_retries` failed attempts, replaced by a copy of the
//! (first) parent.

use rand::Rng;

use super::TreeBuilder;
use crate::expr::{ExprNode, ExpressionTree};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeLimits {
    pub max_depth: usize,
    pub max_nodes: usize,
    pub max_retries: usize,
}

impl SizeLimits {
    pub fn admits<T: Scalar>(&self, tree: &ExpressionTree<T>) -> bool {
        tree.depth() <= self.max_depth && tree.node_count() <= self.max_nodes
    }
}

/// Replaces a uniformly chosen subtree of `a` with a uniformly chosen
/// subtree of `b`.
pub fn crossover<T: Scalar, R: Rng + ?Sized>(
    a: &ExpressionTree<T>,
    b: &ExpressionTree<T>,
    limits: SizeLimits,
    rng: &mut R,
) -> ExpressionTree<T> {
    for _ in 0..limits.max_retries {
        let at = a.random_subtree(rng);
        let donor_at = b.random_subtree(rng);
        let donor = b.subtree(donor_at).expect("fresh locator").clone();
        let child = a.replace_subtree(at, donor).expect("fresh locator");
        if limits.admits(&child) {
            return child;
        }
    }
    a.clone()
}

/// Replaces a random subtree with a freshly grown one.
pub fn subtree_mutation<T: Scalar, R: Rng + ?Sized>(
    parent: &ExpressionTree<T>,
    builder: &TreeBuilder<'_>,
    grow_depth: usize,
    limits: SizeLimits,
    rng: &mut R,
) -> ExpressionTree<T> {
    for _ in 0..limits.max_retries {
        let at = parent.random_subtree(rng);
        let level = parent.root().depth_of(at.index).expect("fresh locator");
        let room = limits.max_depth.saturating_sub(level) + 1;
        let fresh = builder.grow(1, grow_depth.min(room).max(1), rng);
        let child = parent.replace_subtree(at, fresh).expect("fresh locator");
        if limits.admits(&child) {
            return child;
        }
    }
    parent.clone()
}

/// Swaps one node: an operator for another of the same arity (children
/// kept), a terminal for a new random terminal.
pub fn point_mutation<T: Scalar, R: Rng + ?Sized>(
    parent: &ExpressionTree<T>,
    builder: &TreeBuilder<'_>,
    rng: &mut R,
) -> ExpressionTree<T> {
    let at = parent.random_subtree(rng);
    let node = parent.subtree(at).expect("fresh locator");
    let replacement = match node {
        ExprNode::Operator { kind, children } => {
            let same_arity: Vec<_> = builder
                .functions
                .iter()
                .copied()
                .filter(|k| k.arity() == kind.arity() && k != kind)
                .collect();
            if same_arity.is_empty() {
                return parent.clone();
            }
            let new_kind = same_arity[rng.random_range(0..same_arity.len())];
            ExprNode::Operator {
                kind: new_kind,
                children: children.clone(),
            }
        }
        _ => builder.terminal(rng),
    };
    parent
        .replace_subtree(at, replacement)
        .expect("fresh locator")
}

/// Promotes a random subtree to be the whole tree.
pub fn hoist_mutation<T: Scalar, R: Rng + ?Sized>(
    parent: &ExpressionTree<T>,
    rng: &mut R,
) -> ExpressionTree<T> {
    let at = parent.random_subtree(rng);
    let sub = parent.subtree(at).expect("fresh locator").clone();
    let root_loc = parent.locator(0).expect("root exists");
    parent
        .replace_subtree(root_loc, sub)
        .expect("fresh locator")
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::expr::{parse_expression, OperatorKind};

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("X{i}")).collect()
    }

    const LIMITS: SizeLimits = SizeLimits {
        max_depth: 8,
        max_nodes: 40,
        max_retries: 3,
    };

    fn random_tree(b: &TreeBuilder<'_>, rng: &mut ChaCha8Rng) -> ExpressionTree<f64> {
        loop {
            let t = ExpressionTree::new(b.grow(1, 7, rng), names(3)).unwrap();
            if LIMITS.admits(&t) {
                return t;
            }
        }
    }

    #[test]
    fn crossover_of_terminals() {
        let a = ExpressionTree::new(ExprNode::Variable(0), names(2)).unwrap();
        let b = ExpressionTree::new(ExprNode::Constant(0.5), names(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            let c = crossover(&a, &b, LIMITS, &mut rng);
            assert!(c == a || c == b);
        }
    }

    #[test]
    fn crossover_is_seeded() {
        let n = names(2);
        let a: ExpressionTree<f64> = parse_expression("add(mul(X0, X1), sin(X0))", &n).unwrap();
        let b: ExpressionTree<f64> = parse_expression("sub(cos(X1), div(X0, 0.3))", &n).unwrap();
        let c1 = crossover(&a, &b, LIMITS, &mut ChaCha8Rng::seed_from_u64(5));
        let c2 = crossover(&a, &b, LIMITS, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(c1, c2);
    }

    #[test]
    fn variation_respects_limits() {
        let b = TreeBuilder::new(&OperatorKind::ALL, 3, [-1.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pool: Vec<_> = (0..50).map(|_| random_tree(&b, &mut rng)).collect();
        for i in 0..10_000 {
            let p = &pool[i % pool.len()];
            let q = &pool[(i * 7 + 3) % pool.len()];
            let c = crossover(p, q, LIMITS, &mut rng);
            assert!(LIMITS.admits(&c));
            let m = subtree_mutation(p, &b, 6, LIMITS, &mut rng);
            assert!(
                LIMITS.admits(&m),
                "depth {} nodes {}",
                m.depth(),
                m.node_count()
            );
            let pm = point_mutation(p, &b, &mut rng);
            assert_eq!(pm.node_count(), p.node_count());
            let h = hoist_mutation(p, &mut rng);
            assert!(h.node_count() <= p.node_count());
        }
    }

    #[test]
    fn point_mutation_on_constant() {
        let b = TreeBuilder::new(&OperatorKind::ALL, 2, [-1.0, 1.0]);
        let t = ExpressionTree::new(ExprNode::Constant(7.0), names(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let m = point_mutation(&t, &b, &mut rng);
            assert!(m.root().is_terminal());
            assert_ne!(m.root(), &ExprNode::Constant(7.0));
        }
    }

    #[test]
    fn point_mutation_keeps_arity() {
        let b = TreeBuilder::new(&OperatorKind::ALL, 2, [-1.0, 1.0]);
        let t: ExpressionTree<f64> = parse_expression("sin(X0)", &names(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut changed_op = false;
        for _ in 0..100 {
            let m = point_mutation(&t, &b, &mut rng);
            if let ExprNode::Operator { kind, children } = m.root() {
                assert_eq!(kind.arity(), 1);
                assert_eq!(children.len(), 1);
                changed_op |= *kind != OperatorKind::Sin;
            }
        }
        assert!(changed_op);
    }
}
