//! Binary addition trees.
//!
//! A tree is stored as an arena of nodes in which every child precedes its
//! parent, so cost, depth and evaluation are single forward passes and no
//! operation recurses on tree height. Deep trees (a Huffman tree over
//! geometric weights is a path) are therefore safe at any size.

use std::fmt;

use serde_json::json;

use crate::error::{Error, Result};
use crate::numeric::{exact_sum, parse_value, ErrorModel, Value};

/// Index of a node inside one [`TreeBuilder`] or [`AdditionTree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    value: Value,
    children: Option<(NodeId, NodeId)>,
}

impl Node {
    /// Leaf value, or the exact sum of the subtree for an internal node.
    pub fn value(&self) -> &Value {
        &self.value
    }

    /// `(left, right)` for internal nodes, in construction order.
    pub fn children(&self) -> Option<(NodeId, NodeId)> {
        self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Incremental construction of an [`AdditionTree`].
///
/// Each node may be attached to a parent at most once, and `finish` requires
/// that exactly one detached node (the root) remains.
#[derive(Debug, Default)]
pub struct TreeBuilder {
    nodes: Vec<Node>,
    attached: Vec<bool>,
    detached: usize,
}

impl TreeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(leaves: usize) -> Self {
        let cap = (2 * leaves).saturating_sub(1);
        TreeBuilder { nodes: Vec::with_capacity(cap), attached: Vec::with_capacity(cap), detached: 0 }
    }

    pub fn leaf(&mut self, value: Value) -> NodeId {
        self.push(Node { value, children: None })
    }

    /// Adds `left + right` as a new internal node.
    ///
    /// Panics if either operand already has a parent.
    pub fn join(&mut self, left: NodeId, right: NodeId) -> NodeId {
        assert!(left != right, "cannot add a node to itself");
        for id in [left, right] {
            assert!(!self.attached[id.0], "node {} already has a parent", id.0);
            self.attached[id.0] = true;
        }
        self.detached -= 2;
        let value = &self.nodes[left.0].value + &self.nodes[right.0].value;
        self.push(Node { value, children: Some((left, right)) })
    }

    pub fn value(&self, id: NodeId) -> &Value {
        &self.nodes[id.0].value
    }

    fn push(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        self.attached.push(false);
        self.detached += 1;
        NodeId(self.nodes.len() - 1)
    }

    /// Pairs adjacent operands left to right in rounds, carrying an odd
    /// trailing operand into the next round unpaired. The result has height
    /// `ceil(log2(operands.len()))` above the operands.
    ///
    /// Panics on an empty operand list.
    pub fn balanced(&mut self, mut operands: Vec<NodeId>) -> NodeId {
        assert!(!operands.is_empty(), "balanced tree over no operands");
        while operands.len() > 1 {
            let mut next = Vec::with_capacity(operands.len().div_ceil(2));
            let mut it = operands.chunks_exact(2);
            for pair in &mut it {
                next.push(self.join(pair[0], pair[1]));
            }
            next.extend_from_slice(it.remainder());
            operands = next;
        }
        operands[0]
    }

    pub fn finish(self, root: NodeId) -> AdditionTree {
        assert!(
            self.detached == 1 && !self.attached[root.0],
            "tree under construction still has {} detached nodes",
            self.detached
        );
        AdditionTree { nodes: self.nodes, root }
    }
}

/// A binary addition tree: leaves are inputs, internal nodes exact sums.
#[derive(Clone, Debug)]
pub struct AdditionTree {
    nodes: Vec<Node>,
    root: NodeId,
}

impl AdditionTree {
    pub fn leaf(value: Value) -> Self {
        AdditionTree { nodes: vec![Node { value, children: None }], root: NodeId(0) }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    /// All nodes, each child before its parent.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root_value(&self) -> &Value {
        &self.nodes[self.root.0].value
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.len().div_ceil(2)
    }

    pub fn internal_values(&self) -> impl Iterator<Item = &Value> {
        self.nodes.iter().filter(|n| !n.is_leaf()).map(|n| &n.value)
    }

    /// Leaf values in left-to-right order.
    pub fn leaves(&self) -> Vec<Value> {
        let mut out = Vec::with_capacity(self.leaf_count());
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id.0];
            match node.children {
                None => out.push(node.value.clone()),
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
            }
        }
        out
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        self.heights()[self.root.0]
    }

    fn heights(&self) -> Vec<usize> {
        let mut h = vec![0usize; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if let Some((l, r)) = node.children {
                h[i] = 1 + h[l.0].max(h[r.0]);
            }
        }
        h
    }

    /// Checks that every internal value is the exact sum of its children.
    pub fn is_consistent(&self) -> bool {
        self.nodes.iter().all(|n| match n.children {
            None => true,
            Some((l, r)) => n.value == &self.nodes[l.0].value + &self.nodes[r.0].value,
        })
    }

    /// The same shape with every value negated.
    pub fn negated(&self) -> AdditionTree {
        AdditionTree {
            nodes: self.nodes.iter().map(|n| Node { value: -&n.value, children: n.children }).collect(),
            root: self.root,
        }
    }

    /// Per-node subtree costs, indexed like [`AdditionTree::nodes`].
    pub fn subtree_costs(&self) -> Vec<Value> {
        let mut costs: Vec<Value> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let c = match node.children {
                None => Value::zero(),
                Some((l, r)) => node.value.abs() + &costs[l.0] + &costs[r.0],
            };
            costs.push(c);
        }
        costs
    }

    /// JSON rendering with `value`, subtree `cost`, and `children` per node.
    /// Nested `serde_json::Value`s recurse when serialised or dropped; use
    /// [`AdditionTree::to_json_string`] for trees of unbounded depth.
    pub fn to_json(&self) -> serde_json::Value {
        let costs = self.subtree_costs();
        let mut rendered: Vec<Option<serde_json::Value>> = Vec::with_capacity(self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            let children = match node.children {
                None => vec![],
                Some((l, r)) => vec![
                    rendered[l.0].take().expect("child rendered once"),
                    rendered[r.0].take().expect("child rendered once"),
                ],
            };
            rendered.push(Some(json!({
                "value": node.value.to_string(),
                "cost": costs[i].to_string(),
                "children": children,
            })));
        }
        rendered[self.root.0].take().expect("root rendered")
    }
}

impl AdditionTree {
    /// Compact JSON text of [`AdditionTree::to_json`], written without
    /// recursion.
    pub fn to_json_string(&self) -> String {
        enum Step {
            Visit(NodeId),
            Emit(&'static str),
        }
        let costs = self.subtree_costs();
        let mut out = String::new();
        let mut stack = vec![Step::Visit(self.root)];
        while let Some(step) = stack.pop() {
            match step {
                Step::Emit(s) => out.push_str(s),
                Step::Visit(id) => {
                    let node = self.node(id);
                    out.push_str("{\"value\":");
                    out.push_str(&json_string(&node.value.to_string()));
                    out.push_str(",\"cost\":");
                    out.push_str(&json_string(&costs[id.0].to_string()));
                    match node.children {
                        None => out.push_str(",\"children\":[]}"),
                        Some((l, r)) => {
                            out.push_str(",\"children\":[");
                            stack.push(Step::Emit("]}"));
                            stack.push(Step::Visit(r));
                            stack.push(Step::Emit(","));
                            stack.push(Step::Visit(l));
                        }
                    }
                }
            }
        }
        out
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialise")
}

impl fmt::Display for AdditionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize(self))
    }
}

/// Sum of `|I|` over all internal nodes `I`.
pub fn cost(tree: &AdditionTree) -> Value {
    tree.internal_values().map(Value::abs).sum()
}

/// `alpha * cost(tree)`.
pub fn worst_case_error(tree: &AdditionTree, model: &ErrorModel) -> Value {
    model.scale(&cost(tree))
}

/// Root value of the tree.
pub fn evaluate_exact(tree: &AdditionTree) -> Value {
    tree.root_value().clone()
}

/// Balanced tree over `values` in the given order.
pub fn build_balanced(values: &[Value]) -> Result<AdditionTree> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    let mut b = TreeBuilder::with_capacity(values.len());
    let leaves = values.iter().map(|v| b.leaf(v.clone())).collect();
    let root = b.balanced(leaves);
    Ok(b.finish(root))
}

/// Conservation check: the root equals the exact sum of `values`.
pub fn conserves(tree: &AdditionTree, values: &[Value]) -> bool {
    tree.root_value() == &exact_sum(values)
}

/// Nested parenthesised form, e.g. `((1 2) 3)`.
pub fn serialize(tree: &AdditionTree) -> String {
    enum Step {
        Visit(NodeId),
        Emit(&'static str),
    }
    let mut out = String::new();
    let mut stack = vec![Step::Visit(tree.root)];
    while let Some(step) = stack.pop() {
        match step {
            Step::Emit(s) => out.push_str(s),
            Step::Visit(id) => {
                let node = tree.node(id);
                match node.children {
                    None => out.push_str(&node.value.to_string()),
                    Some((l, r)) => {
                        out.push('(');
                        stack.push(Step::Emit(")"));
                        stack.push(Step::Visit(r));
                        stack.push(Step::Emit(" "));
                        stack.push(Step::Visit(l));
                    }
                }
            }
        }
    }
    out
}

/// Parses the form produced by [`serialize`]. Leaves accept any literal
/// [`parse_value`] accepts. Whitespace separates atoms and is otherwise
/// optional.
pub fn parse_tree(text: &str) -> Result<AdditionTree> {
    let bytes = text.as_bytes();
    let err = |position: usize, reason: &str| Error::ParseTree { position, reason: reason.to_string() };

    let mut builder = TreeBuilder::new();
    // Each open parenthesis collects up to two finished operands.
    let mut frames: Vec<Vec<NodeId>> = Vec::new();
    let mut done: Option<NodeId> = None;
    let mut pos = 0;

    while pos < bytes.len() {
        let c = bytes[pos];
        if c.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        if done.is_some() {
            return Err(err(pos, "unexpected input after complete tree"));
        }
        let token_start = pos;
        let finished = match c {
            b'(' => {
                frames.push(Vec::with_capacity(2));
                pos += 1;
                None
            }
            b')' => {
                let Some(operands) = frames.pop() else {
                    return Err(err(pos, "unmatched ')'"));
                };
                if operands.len() != 2 {
                    return Err(err(pos, "a parenthesised node needs exactly two operands"));
                }
                pos += 1;
                Some(builder.join(operands[0], operands[1]))
            }
            _ => {
                let start = pos;
                while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'(' && bytes[pos] != b')'
                {
                    pos += 1;
                }
                let value = parse_value(&text[start..pos]).map_err(|e| err(start, &e.to_string()))?;
                Some(builder.leaf(value))
            }
        };
        if let Some(id) = finished {
            match frames.last_mut() {
                None => done = Some(id),
                Some(operands) => {
                    if operands.len() == 2 {
                        return Err(err(token_start, "expected ')' after two operands"));
                    }
                    operands.push(id);
                }
            }
        }
    }

    if !frames.is_empty() {
        return Err(err(bytes.len(), "unbalanced parentheses: unexpected end of input"));
    }
    match done {
        Some(root) => Ok(builder.finish(root)),
        None => Err(err(bytes.len(), "empty tree")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vals(xs: &[i64]) -> Vec<Value> {
        xs.iter().map(|&x| Value::from(x)).collect()
    }

    fn chain(xs: &[i64]) -> AdditionTree {
        let mut b = TreeBuilder::new();
        let mut acc = b.leaf(xs[0].into());
        for &x in &xs[1..] {
            let l = b.leaf(x.into());
            acc = b.join(acc, l);
        }
        b.finish(acc)
    }

    #[test]
    fn cost_examples() {
        assert_eq!(cost(&chain(&[1, 2, 3])), Value::from(9));
        assert_eq!(cost(&chain(&[5, -5, 3])), Value::from(3));
        assert_eq!(cost(&AdditionTree::leaf(7.into())), Value::zero());
    }

    #[test]
    fn worst_case_error_examples() {
        let t = chain(&[1, 2, 3]);
        let m = ErrorModel::new(Value::new(1, 8)).unwrap();
        assert_eq!(worst_case_error(&t, &m), Value::new(9, 8));
        assert_eq!(worst_case_error(&t, &ErrorModel::new(Value::zero()).unwrap()), Value::zero());
        let t = chain(&[5, -5, 3]);
        assert_eq!(worst_case_error(&t, &ErrorModel::new(Value::new(1, 1000)).unwrap()), Value::new(3, 1000));
    }

    #[test]
    fn balanced_examples() {
        let t = build_balanced(&vals(&[1, 2, 3, 4])).unwrap();
        assert_eq!(serialize(&t), "((1 2) (3 4))");
        assert_eq!(cost(&t), Value::from(20));

        let t = build_balanced(&vals(&[1, 2, 3])).unwrap();
        assert_eq!(serialize(&t), "((1 2) 3)");
        assert_eq!(t.depth(), 2);

        let t = build_balanced(&vals(&[9])).unwrap();
        assert_eq!(serialize(&t), "9");
        assert!(matches!(build_balanced(&[]), Err(Error::Empty)));
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(evaluate_exact(&chain(&[1, 2, 3])), Value::from(6));
        assert_eq!(evaluate_exact(&chain(&[5, -5, 3])), Value::from(3));
        assert_eq!(evaluate_exact(&AdditionTree::leaf((-4).into())), Value::from(-4));
    }

    #[test]
    fn serialization_examples() {
        assert_eq!(serialize(&chain(&[1, 2, 3])), "((1 2) 3)");
        let t = parse_tree("(-5 5)").unwrap();
        assert_eq!(t.root_value(), &Value::zero());
        assert_eq!(t.leaves(), vals(&[-5, 5]));
        match parse_tree("((1 2)") {
            Err(Error::ParseTree { position, .. }) => assert_eq!(position, 6),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_positions() {
        let cases = [("", 0), ("(1 2))", 5), ("(1 2 3)", 5), ("(1)", 2), ("()", 1), ("(1 x)", 3), ("1 2", 2), (")", 0)];
        for (text, at) in cases {
            match parse_tree(text) {
                Err(Error::ParseTree { position, .. }) => assert_eq!(position, at, "{text:?}"),
                other => panic!("{text:?}: expected parse error, got {other:?}"),
            }
        }
    }

    #[test]
    fn parse_accepts_compact_and_fractional_forms() {
        let t = parse_tree(" ((1/3 0.5)(2 -1e1)) ").unwrap();
        assert_eq!(serialize(&t), "((1/3 0.5) (2 -10))");
        assert_eq!(t.root_value(), &(Value::new(1, 3) + Value::new(1, 2) - Value::from(8)));
    }

    #[test]
    fn json_rendering_has_subtree_costs() {
        let t = chain(&[1, 2, 3]);
        let j = t.to_json();
        assert_eq!(j["value"], "6");
        assert_eq!(j["cost"], "9");
        assert_eq!(j["children"][0]["cost"], "3");
        assert_eq!(j["children"][1]["children"].as_array().unwrap().len(), 0);
        let parsed: serde_json::Value = serde_json::from_str(&t.to_json_string()).unwrap();
        assert_eq!(parsed, j);
    }

    #[test]
    fn deep_trees_do_not_recurse() {
        let xs: Vec<i64> = (1..=200_000).collect();
        let t = chain(&xs);
        assert_eq!(t.depth(), xs.len() - 1);
        let s = serialize(&t);
        assert_eq!(t.to_json_string().matches("\"children\"").count(), 2 * xs.len() - 1);
        let back = parse_tree(&s).unwrap();
        assert_eq!(cost(&back), cost(&t));
    }

    #[test]
    #[should_panic(expected = "already has a parent")]
    fn builder_rejects_reuse() {
        let mut b = TreeBuilder::new();
        let x = b.leaf(1.into());
        let y = b.leaf(2.into());
        b.join(x, y);
        b.join(x, y);
    }

    fn ceil_log2(n: usize) -> usize {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }

    proptest! {
        #[test]
        fn balanced_depth_is_ceil_log2(n in 1usize..300) {
            let t = build_balanced(&vec![Value::one(); n]).unwrap();
            prop_assert_eq!(t.depth(), if n == 1 { 0 } else { ceil_log2(n) });
            prop_assert_eq!(t.leaf_count(), n);
        }

        #[test]
        fn balanced_conserves_and_bounds(xs in prop::collection::vec(-1000i64..1000, 1..60)) {
            let xs: Vec<Value> = xs.into_iter().filter(|&x| x != 0).map(Value::from).collect();
            prop_assume!(!xs.is_empty());
            let t = build_balanced(&xs).unwrap();
            prop_assert!(conserves(&t, &xs));
            prop_assert!(t.is_consistent());
            prop_assert_eq!(t.leaves(), xs.clone());
            if xs.len() >= 2 {
                prop_assert!(cost(&t) >= exact_sum(&xs).abs());
            }
        }

        #[test]
        fn single_sign_balanced_bound(xs in prop::collection::vec(1i64..1000, 1..80)) {
            let xs: Vec<Value> = xs.into_iter().map(Value::from).collect();
            let t = build_balanced(&xs).unwrap();
            let depth = Value::from(t.depth());
            prop_assert!(cost(&t) <= depth * exact_sum(&xs));
        }

        #[test]
        fn serialize_round_trip(xs in prop::collection::vec((-50i64..50, 1i64..7), 1..40)) {
            let xs: Vec<Value> = xs.into_iter().map(|(n, d)| Value::new(n, d)).collect();
            let t = build_balanced(&xs).unwrap();
            let back = parse_tree(&serialize(&t)).unwrap();
            prop_assert_eq!(serialize(&back), serialize(&t));
            prop_assert_eq!(cost(&back), cost(&t));
            prop_assert_eq!(back.root_value(), t.root_value());
        }
    }
}
