//! Exact minimum-cost addition trees for small inputs.
//!
//! Finding an optimal tree over mixed-sign inputs is NP-hard, so the oracle
//! is a subset dynamic program taking `O(3^n)` time and `O(2^n)` memory:
//!
//! ```text
//! f({x}) = 0
//! f(S)   = |sum(S)| + min over proper nonempty A of f(A) + f(S \ A)
//! ```
//!
//! Memoisation is keyed by subset bitmask over the indexed input, so
//! repeated values are not deduplicated. When every input scales to an
//! integer small enough that no cost can overflow, the table is filled in
//! `i128`; the result is exact either way.

use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::numeric::Value;
use crate::tree::{cost, AdditionTree, NodeId, TreeBuilder};

/// Default largest input for [`optimal_cost_dp`]. At this size the table
/// has about a million entries and the split loop runs about 1.7e9 times.
pub const DEFAULT_DP_CAP: usize = 20;

/// Hard limit imposed by the 32-bit subset masks.
pub const MAX_DP_CAP: usize = 30;

/// Largest input for [`enumerate_trees`]; 8 leaves give 135135 trees.
pub const ENUMERATION_CAP: usize = 8;

#[derive(Clone, Debug)]
pub struct OptimalResult {
    pub optimal_cost: Value,
    pub witness: AdditionTree,
}

/// Optimal cost and a witness tree, with the default size cap.
pub fn optimal_cost_dp(values: &[Value]) -> Result<OptimalResult> {
    optimal_cost_dp_capped(values, DEFAULT_DP_CAP)
}

/// Optimal cost and a witness tree for at most `cap` inputs.
///
/// Among equal-cost splits of a subset the witness uses the numerically
/// smallest part containing the subset's lowest-indexed element.
pub fn optimal_cost_dp_capped(values: &[Value], cap: usize) -> Result<OptimalResult> {
    let cap = cap.min(MAX_DP_CAP);
    if values.is_empty() {
        return Err(Error::Empty);
    }
    if values.len() > cap {
        return Err(Error::SizeCap { what: "optimal-tree oracle", n: values.len(), cap });
    }

    let (optimal_cost, split) = match scaled_integers(values) {
        Some((ints, scale)) => {
            let (c, split) = subset_dp(&ints);
            (Value::new(c, scale), split)
        }
        None => subset_dp(values),
    };

    let mut b = TreeBuilder::with_capacity(values.len());
    let full = (1u32 << values.len()) - 1;
    let root = build_witness(&mut b, values, &split, full);
    let witness = b.finish(root);
    debug_assert_eq!(cost(&witness), optimal_cost);
    Ok(OptimalResult { optimal_cost, witness })
}

trait Weight: Clone + Ord + for<'a> Add<&'a Self, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> Self;
}

impl Weight for i128 {
    fn zero() -> Self {
        0
    }
    fn magnitude(&self) -> Self {
        self.abs()
    }
}

impl Weight for Value {
    fn zero() -> Self {
        Value::zero()
    }
    fn magnitude(&self) -> Self {
        self.abs()
    }
}

/// Integer images `x * scale` of the inputs, if all of them together stay
/// far enough below `i128::MAX` that any tree cost fits.
fn scaled_integers(values: &[Value]) -> Option<(Vec<i128>, BigInt)> {
    let scale = values.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let ints: Vec<BigInt> = values.iter().map(|v| v.numer() * (&scale / v.denom())).collect();
    let total: BigInt = ints.iter().map(|i| i.abs()).sum();
    // Every cost is at most (n - 1) * total <= 2^5 * total.
    if total.bits() > 120 {
        return None;
    }
    let ints = ints.iter().map(|i| i.to_i128()).collect::<Option<Vec<_>>>()?;
    Some((ints, scale))
}

/// Fills the subset table; returns the optimal cost and, per mask, the part
/// of the chosen split that contains the lowest set bit.
fn subset_dp<W: Weight>(weights: &[W]) -> (W, Vec<u32>) {
    let n = weights.len();
    let size = 1usize << n;
    let mut sums: Vec<W> = Vec::with_capacity(size);
    let mut best: Vec<W> = Vec::with_capacity(size);
    let mut split = vec![0u32; size];
    sums.push(W::zero());
    best.push(W::zero());

    for mask in 1..size as u32 {
        let low = mask & mask.wrapping_neg();
        let s = sums[(mask ^ low) as usize].clone() + &weights[low.trailing_zeros() as usize];
        sums.push(s);

        let rest = mask ^ low;
        if rest == 0 {
            best.push(W::zero());
            continue;
        }
        // Proper parts containing `low`, visited from largest to smallest so
        // that `<=` keeps the smallest part among ties.
        let mut chosen = low;
        let mut min: Option<W> = None;
        let mut sub = (rest - 1) & rest;
        loop {
            let part = low | sub;
            let c = best[part as usize].clone() + &best[(mask ^ part) as usize];
            if min.as_ref().is_none_or(|m| c <= *m) {
                min = Some(c);
                chosen = part;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        split[mask as usize] = chosen;
        best.push(sums[mask as usize].magnitude() + &min.expect("at least one split"));
    }
    (best.pop().expect("full mask"), split)
}

fn build_witness(b: &mut TreeBuilder, values: &[Value], split: &[u32], mask: u32) -> NodeId {
    if mask.count_ones() == 1 {
        return b.leaf(values[mask.trailing_zeros() as usize].clone());
    }
    let part = split[mask as usize];
    let l = build_witness(b, values, split, part);
    let r = build_witness(b, values, split, mask ^ part);
    b.join(l, r)
}

/// Every addition tree over `values`, each unordered shape with leaf
/// assignment exactly once: `(2n-3)!!` trees for `n >= 2`. Equal values are
/// told apart by position, so value-identical trees may repeat.
pub fn enumerate_trees(values: &[Value]) -> Result<TreeEnumerator> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    if values.len() > ENUMERATION_CAP {
        return Err(Error::SizeCap { what: "tree enumeration", n: values.len(), cap: ENUMERATION_CAP });
    }
    // Leaf k (k >= 2) is inserted above any of the 2k - 1 nodes of the tree
    // over leaves 0..k.
    let choices = vec![0; values.len().saturating_sub(2)];
    Ok(TreeEnumerator { values: values.to_vec(), choices, done: false })
}

/// Iterator returned by [`enumerate_trees`].
#[derive(Debug)]
pub struct TreeEnumerator {
    values: Vec<Value>,
    choices: Vec<usize>,
    done: bool,
}

#[derive(Clone, Copy)]
enum Shape {
    Leaf(usize),
    Join(usize, usize),
}

impl TreeEnumerator {
    fn current(&self) -> AdditionTree {
        let n = self.values.len();
        if n == 1 {
            return AdditionTree::leaf(self.values[0].clone());
        }
        let mut shapes = vec![Shape::Leaf(0), Shape::Leaf(1), Shape::Join(0, 1)];
        let mut parent: Vec<Option<usize>> = vec![Some(2), Some(2), None];
        let mut root = 2;
        for (k, &target) in (2..n).zip(&self.choices) {
            let leaf = shapes.len();
            shapes.push(Shape::Leaf(k));
            parent.push(None);
            let joined = shapes.len();
            shapes.push(Shape::Join(target, leaf));
            parent.push(parent[target]);
            match parent[target] {
                None => root = joined,
                Some(p) => {
                    if let Shape::Join(a, b) = &mut shapes[p] {
                        if *a == target {
                            *a = joined;
                        } else {
                            *b = joined;
                        }
                    }
                }
            }
            parent[target] = Some(joined);
            parent[leaf] = Some(joined);
        }

        fn emit(shapes: &[Shape], values: &[Value], b: &mut TreeBuilder, at: usize) -> NodeId {
            match shapes[at] {
                Shape::Leaf(k) => b.leaf(values[k].clone()),
                Shape::Join(l, r) => {
                    let l = emit(shapes, values, b, l);
                    let r = emit(shapes, values, b, r);
                    b.join(l, r)
                }
            }
        }
        let mut b = TreeBuilder::with_capacity(n);
        let root = emit(&shapes, &self.values, &mut b, root);
        b.finish(root)
    }

    fn advance(&mut self) {
        for (i, c) in self.choices.iter_mut().enumerate() {
            let radix = 2 * (i + 2) - 1;
            *c += 1;
            if *c < radix {
                return;
            }
            *c = 0;
        }
        self.done = true;
    }
}

impl Iterator for TreeEnumerator {
    type Item = AdditionTree;

    fn next(&mut self) -> Option<AdditionTree> {
        if self.done {
            return None;
        }
        let tree = self.current();
        self.advance();
        Some(tree)
    }
}
