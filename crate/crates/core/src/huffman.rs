//! Optimal addition trees for positive inputs.
//!
//! For positive leaves the cost of a tree is `sum(x_i * depth_i)`, the
//! weighted path length minimised by a Huffman code. Two builders are
//! provided: a binary heap for arbitrary order and the linear two-queue method
//! for inputs that are already sorted.
//!
//! Ties between equal weights are broken by insertion order: inputs first, in
//! the order given, then merged nodes in the order they were created. On
//! sorted input both builders therefore produce the same tree.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::numeric::Value;
use crate::tree::{AdditionTree, NodeId, TreeBuilder};

/// A merge step `(left_slot, right_slot)`. Slots `0..n` are the inputs and
/// slot `n + k` is the result of the `k`-th merge.
pub(crate) type Merge = (usize, usize);

/// Queue traffic of the two-queue builder.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueueStats {
    pub pops: usize,
    pub pushes: usize,
}

impl QueueStats {
    pub fn total(&self) -> usize {
        self.pops + self.pushes
    }
}

fn check_positive(values: &[Value]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(i) = values.iter().position(|v| !v.is_positive()) {
        return Err(Error::Precondition(format!(
            "Huffman construction needs strictly positive values; element {i} is {}",
            values[i]
        )));
    }
    Ok(())
}

pub(crate) fn check_sorted(values: &[Value]) -> Result<()> {
    match values.windows(2).position(|w| w[0] > w[1]) {
        Some(i) => Err(Error::Unsorted { index: i + 1 }),
        None => Ok(()),
    }
}

/// Huffman merge order over `weights` using a binary heap.
pub(crate) fn merge_order_heap(weights: &[Value]) -> Vec<Merge> {
    let n = weights.len();
    let mut heap: BinaryHeap<Reverse<(Value, usize)>> =
        weights.iter().enumerate().map(|(slot, w)| Reverse((w.clone(), slot))).collect();
    // Slots double as insertion sequence numbers, so ordering on
    // (weight, slot) is the stable tie-break.
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    while heap.len() > 1 {
        let Reverse((w1, s1)) = heap.pop().expect("heap has two entries");
        let Reverse((w2, s2)) = heap.pop().expect("heap has two entries");
        merges.push((s1, s2));
        heap.push(Reverse((w1 + w2, n + merges.len() - 1)));
    }
    merges
}

/// Huffman merge order over nondecreasing `weights` with two FIFO queues:
/// the inputs, and the merged nodes (which are created in nondecreasing
/// order).
pub(crate) fn merge_order_sorted(weights: &[Value], stats: &mut QueueStats) -> Vec<Merge> {
    let n = weights.len();
    let mut merged: Vec<Value> = Vec::with_capacity(n.saturating_sub(1));
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    let (mut next_input, mut next_merged) = (0usize, 0usize);

    let mut pop = |merged: &[Value], next_input: &mut usize, next_merged: &mut usize| -> (usize, Value) {
        stats.pops += 1;
        let take_input = match (weights.get(*next_input), merged.get(*next_merged)) {
            (Some(a), Some(b)) => a <= b,
            (Some(_), None) => true,
            (None, _) => false,
        };
        if take_input {
            *next_input += 1;
            (*next_input - 1, weights[*next_input - 1].clone())
        } else {
            *next_merged += 1;
            (n + *next_merged - 1, merged[*next_merged - 1].clone())
        }
    };

    while merges.len() + 1 < n {
        let (s1, w1) = pop(&merged, &mut next_input, &mut next_merged);
        let (s2, w2) = pop(&merged, &mut next_input, &mut next_merged);
        merges.push((s1, s2));
        merged.push(w1 + w2);
    }
    stats.pushes += merged.len();
    merges
}

/// Applies `merges` to `operands` (slots `0..operands.len()`), returning the
/// root.
pub(crate) fn assemble(builder: &mut TreeBuilder, operands: Vec<NodeId>, merges: &[Merge]) -> NodeId {
    let mut slots = operands;
    slots.reserve(merges.len());
    for &(l, r) in merges {
        let id = builder.join(slots[l], slots[r]);
        slots.push(id);
    }
    *slots.last().expect("at least one operand")
}

fn build_from_merges(values: &[Value], merges: &[Merge]) -> AdditionTree {
    let mut b = TreeBuilder::with_capacity(values.len());
    let leaves = values.iter().map(|v| b.leaf(v.clone())).collect();
    let root = assemble(&mut b, leaves, merges);
    b.finish(root)
}

/// Huffman tree over strictly positive `values` in `O(n log n)`.
pub fn build_huffman(values: &[Value]) -> Result<AdditionTree> {
    check_positive(values)?;
    Ok(build_from_merges(values, &merge_order_heap(values)))
}

/// Huffman tree over strictly positive, nondecreasing `values` in `O(n)`.
pub fn build_huffman_sorted(values: &[Value]) -> Result<AdditionTree> {
    build_huffman_sorted_with_stats(values).map(|(t, _)| t)
}

/// [`build_huffman_sorted`], also reporting the queue operations performed.
pub fn build_huffman_sorted_with_stats(values: &[Value]) -> Result<(AdditionTree, QueueStats)> {
    check_positive(values)?;
    check_sorted(values)?;
    let mut stats = QueueStats { pops: 0, pushes: values.len() };
    let merges = merge_order_sorted(values, &mut stats);
    Ok((build_from_merges(values, &merges), stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{cost, serialize};
    use proptest::prelude::*;

    fn vals(xs: &[i64]) -> Vec<Value> {
        xs.iter().map(|&x| Value::from(x)).collect()
    }

    #[test]
    fn heap_examples() {
        let t = build_huffman(&vals(&[1, 2, 3, 4])).unwrap();
        assert_eq!(cost(&t), Value::from(19));
        assert_eq!(serialize(&t), "(4 (3 (1 2)))");

        let t = build_huffman(&vals(&[1, 1, 2])).unwrap();
        assert_eq!(cost(&t), Value::from(6));

        let t = build_huffman(&vals(&[5])).unwrap();
        assert_eq!(serialize(&t), "5");
        assert_eq!(cost(&t), Value::zero());
    }

    #[test]
    fn two_queue_examples() {
        assert_eq!(cost(&build_huffman_sorted(&vals(&[1, 2, 3, 4])).unwrap()), Value::from(19));
        let t = build_huffman_sorted(&vals(&[1, 1, 1, 1])).unwrap();
        assert_eq!(cost(&t), Value::from(8));
        assert_eq!(serialize(&t), "((1 1) (1 1))");
        assert_eq!(cost(&build_huffman_sorted(&vals(&[5])).unwrap()), Value::zero());
    }

    #[test]
    fn precondition_errors() {
        assert!(matches!(build_huffman(&[]), Err(Error::Empty)));
        assert!(matches!(build_huffman(&vals(&[1, -2])), Err(Error::Precondition(_))));
        assert!(matches!(build_huffman(&vals(&[1, 0])), Err(Error::Precondition(_))));
        assert!(matches!(build_huffman_sorted(&vals(&[2, 1])), Err(Error::Unsorted { index: 1 })));
        assert!(matches!(build_huffman_sorted(&vals(&[-1, 1])), Err(Error::Precondition(_))));
    }

    #[test]
    fn stable_ties_prefer_earlier_insertions() {
        // 2+2 creates a merged 4 that ties with the input 4; the input wins.
        let t = build_huffman(&vals(&[2, 2, 4, 8])).unwrap();
        assert_eq!(serialize(&t), "(8 (4 (2 2)))");
        let t = build_huffman_sorted(&vals(&[2, 2, 4, 8])).unwrap();
        assert_eq!(serialize(&t), "(8 (4 (2 2)))");
    }

    proptest! {
        #[test]
        fn sorted_builder_matches_heap_cost(mut xs in prop::collection::vec(1i64..500, 1..80)) {
            let heap = build_huffman(&vals(&xs)).unwrap();
            xs.sort();
            let sorted = vals(&xs);
            let (two_queue, stats) = build_huffman_sorted_with_stats(&sorted).unwrap();
            prop_assert_eq!(cost(&heap), cost(&two_queue));
            // Identical trees on sorted input.
            prop_assert_eq!(serialize(&build_huffman(&sorted).unwrap()), serialize(&two_queue));
            prop_assert!(stats.total() <= 4 * xs.len());
            prop_assert!(two_queue.is_consistent());
        }
    }
}
