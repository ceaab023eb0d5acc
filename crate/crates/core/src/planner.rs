//! End-to-end summation planners and strategy dispatch.
//!
//! * [`plan_general`] handles inputs of both signs: pair opposite-sign inputs
//!   by a minimum critical matching, add each pair, then add the pair sums
//!   and the unmatched inputs with a balanced tree. Its cost is within
//!   `2(ceil(log2(n-1)) + 1)` of optimal.
//! * [`plan_single_sign`] handles inputs of one sign in linear time: split
//!   the input into groups of `2^t`, sum each group with a balanced tree and
//!   arrange the groups by a Huffman tree over the group maxima. Its cost is
//!   at most `optimal + t * |sum|`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::huffman::{assemble, build_huffman, build_huffman_sorted, check_sorted, merge_order_heap};
use crate::matching::{minimum_critical_matching, split_by_sign, split_sorted_by_sign, CriticalMatching};
use crate::numeric::{ErrorModel, Value};
use crate::oracle::{optimal_cost_dp_capped, DEFAULT_DP_CAP};
use crate::tree::{build_balanced, cost, AdditionTree, TreeBuilder};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Balanced tree in input order.
    Balanced,
    /// Exact optimum for single-sign input.
    Huffman,
    /// Critical matching plus balanced tree, for mixed signs.
    Critical,
    /// Grouped balanced trees under a Huffman tree, for single-sign input.
    Grouped,
    /// Exhaustive subset dynamic program.
    Optimal,
}

impl Strategy {
    pub const ALL: [Strategy; 5] =
        [Strategy::Balanced, Strategy::Huffman, Strategy::Critical, Strategy::Grouped, Strategy::Optimal];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Balanced => "balanced",
            Strategy::Huffman => "huffman",
            Strategy::Critical => "critical",
            Strategy::Grouped => "grouped",
            Strategy::Optimal => "optimal",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown strategy `{s}`")))
    }
}

#[derive(Clone, Debug)]
pub struct PlanOptions {
    /// Group exponent for [`Strategy::Grouped`]; defaults to
    /// [`default_group_parameter`].
    pub group_parameter: Option<u32>,
    /// Input is already sorted nondecreasing: skip sorting and take the
    /// linear-time paths. Checked in one pass.
    pub sorted: bool,
    pub model: ErrorModel,
    /// Also run the exact oracle and report the observed ratio.
    pub with_oracle: bool,
    pub oracle_cap: usize,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            group_parameter: None,
            sorted: false,
            model: ErrorModel::default(),
            with_oracle: false,
            oracle_cap: DEFAULT_DP_CAP,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PlanReport {
    pub strategy: Strategy,
    pub tree: AdditionTree,
    pub cost: Value,
    /// `alpha * cost`.
    pub error_bound: Value,
    /// Proven bound on `cost / optimal_cost`, when the strategy has one for
    /// this input.
    pub guarantee_factor: Option<Value>,
    pub optimal_cost: Option<Value>,
    /// `cost / optimal_cost`, when the optimum is known and positive.
    pub observed_ratio: Option<Value>,
    /// The group exponent used by [`Strategy::Grouped`].
    pub group_parameter: Option<u32>,
}

#[derive(Serialize)]
struct PlanReportJson<'a> {
    strategy: &'static str,
    n: usize,
    cost: &'a Value,
    error_bound: &'a Value,
    guarantee_factor: Option<&'a Value>,
    optimal_cost: Option<&'a Value>,
    observed_ratio: Option<&'a Value>,
    tree: serde_json::Value,
}

impl PlanReport {
    pub fn n(&self) -> usize {
        self.tree.leaf_count()
    }

    fn json_repr(&self) -> PlanReportJson<'_> {
        PlanReportJson {
            strategy: self.strategy.name(),
            n: self.n(),
            cost: &self.cost,
            error_bound: &self.error_bound,
            guarantee_factor: self.guarantee_factor.as_ref(),
            optimal_cost: self.optimal_cost.as_ref(),
            observed_ratio: self.observed_ratio.as_ref(),
            tree: serde_json::Value::Null,
        }
    }

    /// Report in its stable JSON layout; the tree uses
    /// [`AdditionTree::to_json`].
    pub fn to_json(&self) -> serde_json::Value {
        let mut repr = self.json_repr();
        repr.tree = self.tree.to_json();
        serde_json::to_value(repr).expect("report serialises")
    }

    /// Pretty-printed JSON text with fields in a fixed order. The tree is
    /// written compactly on one line by [`AdditionTree::to_json_string`], so
    /// arbitrarily deep trees are fine.
    pub fn to_json_string(&self) -> String {
        let mut repr = self.json_repr();
        repr.tree = serde_json::Value::Null;
        let mut text = serde_json::to_string_pretty(&repr).expect("report serialises");
        let tail = "\"tree\": null\n}";
        assert!(text.ends_with(tail), "tree is the last field");
        text.truncate(text.len() - tail.len());
        text.push_str("\"tree\": ");
        text.push_str(&self.tree.to_json_string());
        text.push_str("\n}");
        text
    }
}

fn reject_zeros(values: &[Value]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    match values.iter().position(Value::is_zero) {
        Some(index) => Err(Error::ZeroValue { index }),
        None => Ok(()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sign {
    Positive,
    Negative,
    Mixed,
}

fn sign_of(values: &[Value]) -> Sign {
    let pos = values.iter().any(Value::is_positive);
    let neg = values.iter().any(Value::is_negative);
    match (pos, neg) {
        (true, true) => Sign::Mixed,
        (_, true) => Sign::Negative,
        _ => Sign::Positive,
    }
}

fn single_sign(values: &[Value], what: &str) -> Result<Sign> {
    match sign_of(values) {
        Sign::Mixed => Err(Error::Precondition(format!(
            "{what} needs all values of one sign, but the input mixes positive and negative values; \
             use the critical strategy"
        ))),
        s => Ok(s),
    }
}

/// `ceil(log2(n))` for `n >= 1`.
pub fn ceil_log2(n: usize) -> u32 {
    assert!(n >= 1);
    usize::BITS - (n - 1).leading_zeros()
}

/// Critical-matching planner for input containing both signs.
pub fn plan_general(values: &[Value]) -> Result<AdditionTree> {
    general_checks(values)?;
    let (pos, neg) = split_by_sign(values)?;
    Ok(general_from_sides(&pos, &neg)?.0)
}

/// [`plan_general`] for input sorted nondecreasing, without sorting.
pub fn plan_general_sorted(values: &[Value]) -> Result<AdditionTree> {
    general_checks(values)?;
    let (pos, neg) = split_sorted_by_sign(values)?;
    Ok(general_from_sides(&pos, &neg)?.0)
}

fn general_checks(values: &[Value]) -> Result<()> {
    reject_zeros(values)?;
    if sign_of(values) != Sign::Mixed {
        return Err(Error::Precondition(
            "the critical strategy needs at least one positive and one negative value; \
             single-sign input should use the huffman or grouped strategy"
                .into(),
        ));
    }
    Ok(())
}

/// Adds every critical pair, then sums the pair sums followed by the
/// unmatched inputs with a balanced tree.
fn general_from_sides(pos: &[Value], neg: &[Value]) -> Result<(AdditionTree, CriticalMatching)> {
    let matching = minimum_critical_matching(pos, neg)?;
    let mut b = TreeBuilder::with_capacity(pos.len() + neg.len());
    let mut operands = Vec::with_capacity(matching.pairs.len() + matching.unmatched.len());
    for (p, q) in &matching.pairs {
        let l = b.leaf(p.clone());
        let r = b.leaf(q.clone());
        operands.push(b.join(l, r));
    }
    operands.extend(matching.unmatched.iter().map(|u| b.leaf(u.clone())));
    let root = b.balanced(operands);
    Ok((b.finish(root), matching))
}

/// Grouped planner for single-sign input with group size `2^t`, groups
/// taken in input order.
pub fn plan_single_sign(values: &[Value], t: u32) -> Result<AdditionTree> {
    reject_zeros(values)?;
    if t < 1 {
        return Err(Error::InvalidParameter("group parameter t must be at least 1".into()));
    }
    match single_sign(values, "the grouped strategy")? {
        Sign::Negative => {
            let flipped: Vec<Value> = values.iter().map(|v| -v).collect();
            Ok(grouped_positive(&flipped, t).negated())
        }
        _ => Ok(grouped_positive(values, t)),
    }
}

fn grouped_positive(values: &[Value], t: u32) -> AdditionTree {
    let group = 1usize.checked_shl(t).unwrap_or(usize::MAX).min(values.len());
    let mut b = TreeBuilder::with_capacity(values.len());
    let mut roots = Vec::with_capacity(values.len().div_ceil(group));
    let mut maxima = Vec::with_capacity(roots.capacity());
    for chunk in values.chunks(group) {
        // First occurrence of the maximum.
        let max = chunk.iter().fold(&chunk[0], |m, v| if v > m { v } else { m });
        maxima.push(max.clone());
        let leaves = chunk.iter().map(|v| b.leaf(v.clone())).collect();
        roots.push(b.balanced(leaves));
    }
    let merges = merge_order_heap(&maxima);
    let root = assemble(&mut b, roots, &merges);
    b.finish(root)
}

/// `max(1, floor(log2(log2(n) - 1)))`: the largest `t` with
/// `2^(2^t + 1) <= n`, clamped to at least 1.
pub fn default_group_parameter(n: usize) -> u32 {
    let fits = |t: u32| -> bool {
        let e = (1u64 << t) + 1;
        e < u64::from(usize::BITS) && (1usize << e) <= n
    };
    let mut t = 0;
    while t < 6 && fits(t + 1) {
        t += 1;
    }
    t.max(1)
}

fn plan_huffman(values: &[Value], sorted: bool) -> Result<AdditionTree> {
    reject_zeros(values)?;
    match single_sign(values, "the huffman strategy")? {
        Sign::Negative => {
            let mut flipped: Vec<Value> = values.iter().map(|v| -v).collect();
            let tree = if sorted {
                flipped.reverse();
                build_huffman_sorted(&flipped)?
            } else {
                build_huffman(&flipped)?
            };
            Ok(tree.negated())
        }
        _ if sorted => build_huffman_sorted(values),
        _ => build_huffman(values),
    }
}

/// Runs `strategy` over `values` and fills in the report.
pub fn plan(values: &[Value], strategy: Strategy, options: &PlanOptions) -> Result<PlanReport> {
    reject_zeros(values)?;
    if options.sorted {
        check_sorted(values)?;
    }
    let n = values.len();
    let sign = sign_of(values);
    let one = Value::one();

    let mut group_parameter = None;
    let mut optimal_cost = None;
    let (tree, guarantee_factor) = match strategy {
        Strategy::Balanced => {
            let factor = (sign != Sign::Mixed).then(|| Value::from(ceil_log2(n)));
            (build_balanced(values)?, factor)
        }
        Strategy::Huffman => (plan_huffman(values, options.sorted)?, Some(one)),
        Strategy::Critical => {
            let tree = if options.sorted { plan_general_sorted(values)? } else { plan_general(values)? };
            (tree, Some(Value::from(2 * (ceil_log2(n - 1) + 1))))
        }
        Strategy::Grouped => {
            let t = options.group_parameter.unwrap_or_else(|| default_group_parameter(n));
            group_parameter = Some(t);
            (plan_single_sign(values, t)?, Some(Value::from(1 + u64::from(t))))
        }
        Strategy::Optimal => {
            let r = optimal_cost_dp_capped(values, options.oracle_cap)?;
            optimal_cost = Some(r.optimal_cost);
            (r.witness, Some(one))
        }
    };

    if options.with_oracle && optimal_cost.is_none() {
        optimal_cost = Some(optimal_cost_dp_capped(values, options.oracle_cap)?.optimal_cost);
    }

    let cost = cost(&tree);
    let observed_ratio = optimal_cost.as_ref().filter(|c| c.is_positive()).map(|c| &cost / c);
    Ok(PlanReport {
        strategy,
        error_bound: options.model.scale(&cost),
        cost,
        tree,
        guarantee_factor,
        optimal_cost,
        observed_ratio,
        group_parameter,
    })
}
