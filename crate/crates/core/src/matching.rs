//! Minimum critical matchings.
//!
//! A critical pair is two inputs of opposite sign added directly to each
//! other. A critical matching is a set of disjoint critical pairs; its
//! statistics are `pi`, the summed magnitudes of the pair sums, and `delta`,
//! the summed magnitudes of the inputs left unmatched. Half of `pi + delta`
//! for a minimum matching is a lower bound on the cost of every addition tree
//! over the inputs.

use crate::error::{Error, Result};
use crate::numeric::Value;
use crate::tree::AdditionTree;

/// Largest input accepted by [`brute_force_matching`].
pub const BRUTE_FORCE_CAP: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalMatching {
    /// `(positive, negative)` pairs.
    pub pairs: Vec<(Value, Value)>,
    /// Inputs outside every pair, nondecreasing.
    pub unmatched: Vec<Value>,
    pub pi: Value,
    pub delta: Value,
}

impl CriticalMatching {
    fn from_parts(pairs: Vec<(Value, Value)>, unmatched: Vec<Value>) -> Self {
        let pi = pairs.iter().map(|(a, b)| (a + b).abs()).sum();
        let delta = unmatched.iter().map(Value::abs).sum();
        CriticalMatching { pairs, unmatched, pi, delta }
    }

    pub fn pi_plus_delta(&self) -> Value {
        &self.pi + &self.delta
    }

    pub fn pair_sums(&self) -> impl Iterator<Item = Value> + '_ {
        self.pairs.iter().map(|(a, b)| a + b)
    }
}

/// Minimum critical matching of sorted sides.
///
/// `positives` must be strictly positive and nondecreasing; `negatives`
/// strictly negative and nonincreasing, so both sides run from smallest to
/// largest magnitude. The longer side keeps its largest-magnitude elements
/// for pairing and leaves its smallest unmatched. Both orderings are checked
/// in one pass.
pub fn minimum_critical_matching(positives: &[Value], negatives: &[Value]) -> Result<CriticalMatching> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::Precondition(
            "a critical matching needs at least one positive and one negative value; \
             single-sign inputs belong to the Huffman planner"
                .into(),
        ));
    }
    if let Some(i) = positives.iter().position(|v| !v.is_positive()) {
        return Err(Error::Precondition(format!("positive side holds non-positive value {} at {i}", positives[i])));
    }
    if let Some(i) = negatives.iter().position(|v| !v.is_negative()) {
        return Err(Error::Precondition(format!("negative side holds non-negative value {} at {i}", negatives[i])));
    }
    if let Some(i) = positives.windows(2).position(|w| w[0] > w[1]) {
        return Err(Error::Unsorted { index: i + 1 });
    }
    if let Some(i) = negatives.windows(2).position(|w| w[0] < w[1]) {
        return Err(Error::Unsorted { index: i + 1 });
    }

    let (l, m) = (positives.len(), negatives.len());
    let k = l.min(m);
    let (pos_skip, neg_skip) = (l - k, m - k);
    let pairs = positives[pos_skip..].iter().cloned().zip(negatives[neg_skip..].iter().cloned()).collect();
    let unmatched = positives[..pos_skip].iter().chain(negatives[..neg_skip].iter().rev()).cloned().collect();
    Ok(CriticalMatching::from_parts(pairs, unmatched))
}

/// Splits unsorted nonzero `values` into sides ordered for
/// [`minimum_critical_matching`]. Equal values keep their input order.
pub fn split_by_sign(values: &[Value]) -> Result<(Vec<Value>, Vec<Value>)> {
    if let Some(index) = values.iter().position(Value::is_zero) {
        return Err(Error::ZeroValue { index });
    }
    let (mut pos, mut neg): (Vec<Value>, Vec<Value>) = values.iter().cloned().partition(Value::is_positive);
    pos.sort();
    neg.sort_by(|a, b| b.cmp(a));
    Ok((pos, neg))
}

/// Like [`split_by_sign`] for input already sorted nondecreasing, in one
/// pass without sorting.
pub fn split_sorted_by_sign(values: &[Value]) -> Result<(Vec<Value>, Vec<Value>)> {
    if let Some(i) = values.windows(2).position(|w| w[0] > w[1]) {
        return Err(Error::Unsorted { index: i + 1 });
    }
    if let Some(index) = values.iter().position(Value::is_zero) {
        return Err(Error::ZeroValue { index });
    }
    let split = values.partition_point(Value::is_negative);
    let mut neg = values[..split].to_vec();
    neg.reverse();
    Ok((values[split..].to_vec(), neg))
}

/// Sorts and splits `values`, then runs [`minimum_critical_matching`].
pub fn critical_matching(values: &[Value]) -> Result<CriticalMatching> {
    let (pos, neg) = split_by_sign(values)?;
    minimum_critical_matching(&pos, &neg)
}

/// Minimum `pi + delta` over every critical matching of `values`, by
/// exhaustive enumeration.
pub fn brute_force_matching(values: &[Value]) -> Result<Value> {
    if values.len() > BRUTE_FORCE_CAP {
        return Err(Error::SizeCap { what: "brute-force matching", n: values.len(), cap: BRUTE_FORCE_CAP });
    }
    fn search(values: &[Value], used: &mut [bool]) -> Value {
        let Some(i) = used.iter().position(|u| !u) else {
            return Value::zero();
        };
        used[i] = true;
        let mut best = values[i].abs() + search(values, used);
        for j in i + 1..values.len() {
            if !used[j] && values[i].signum() * values[j].signum() < 0 {
                used[j] = true;
                let c = (&values[i] + &values[j]).abs() + search(values, used);
                used[j] = false;
                if c < best {
                    best = c;
                }
            }
        }
        used[i] = false;
        best
    }
    Ok(search(values, &mut vec![false; values.len()]))
}

/// The critical matching a tree realises: sibling leaves of opposite sign
/// form its pairs and every other leaf is unmatched.
pub fn critical_matching_of_tree(tree: &AdditionTree) -> CriticalMatching {
    let mut pairs = Vec::new();
    let mut paired = vec![false; tree.nodes().len()];
    for node in tree.nodes() {
        if let Some((l, r)) = node.children() {
            let (a, b) = (tree.node(l), tree.node(r));
            if a.is_leaf() && b.is_leaf() && a.value().signum() * b.value().signum() < 0 {
                paired[l.index()] = true;
                paired[r.index()] = true;
                let (p, n) = if a.value().is_positive() { (a, b) } else { (b, a) };
                pairs.push((p.value().clone(), n.value().clone()));
            }
        }
    }
    let unmatched = tree
        .nodes()
        .iter()
        .enumerate()
        .filter(|(i, n)| n.is_leaf() && !paired[*i])
        .map(|(_, n)| n.value().clone())
        .collect();
    CriticalMatching::from_parts(pairs, unmatched)
}
