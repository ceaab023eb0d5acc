//! Reduced-precision floating-point simulation.
//!
//! A [`Precision`] of `p` bits represents zero and every `±s·2^e` with
//! `2^(p-1) <= s < 2^p`, for any integer `e`. There is no overflow,
//! underflow, or subnormal range; rounding is to nearest with ties to an
//! even significand, so every addition satisfies
//! `|fl(x+y) - (x+y)| <= 2^-p |x+y|`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::Value;
use crate::tree::{cost, AdditionTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Precision {
    significand_bits: u32,
}

impl Precision {
    pub fn new(significand_bits: u32) -> Result<Self> {
        if significand_bits < 2 {
            return Err(Error::InvalidParameter(format!(
                "precision needs at least 2 significand bits, got {significand_bits}"
            )));
        }
        Ok(Precision { significand_bits })
    }

    /// IEEE binary32 significand width.
    pub fn single() -> Self {
        Precision { significand_bits: 24 }
    }

    /// IEEE binary64 significand width.
    pub fn double() -> Self {
        Precision { significand_bits: 53 }
    }

    pub fn bits(&self) -> u32 {
        self.significand_bits
    }

    /// `2^-p`.
    pub fn unit_roundoff(&self) -> Value {
        Value::pow2(-i64::from(self.significand_bits))
    }

    pub fn is_representable(&self, v: &Value) -> bool {
        if v.is_zero() {
            return true;
        }
        let d = v.denom().magnitude();
        if !(d & (d - 1u32)).is_zero() {
            return false;
        }
        let n = v.numer().magnitude();
        let odd = n >> n.trailing_zeros().unwrap_or(0) as usize;
        odd.bits() <= u64::from(self.significand_bits)
    }
}

/// Nearest value representable at `prec`, ties to even significand.
pub fn round_to_precision(v: &Value, prec: Precision) -> Value {
    if v.is_zero() {
        return Value::zero();
    }
    let p = i64::from(prec.significand_bits);
    let num = v.numer().magnitude();
    let den = v.denom().magnitude();
    // Exponent guess puts num / (den * 2^e) in [2^(p-1), 2^(p+1)).
    let mut e = num.bits() as i64 - den.bits() as i64 - p;
    let (mut s, mut rem, mut scaled_den) = divide_scaled(num, den, e);
    if s.bits() as i64 > p {
        e += 1;
        (s, rem, scaled_den) = divide_scaled(num, den, e);
    }
    let twice = &rem << 1usize;
    if twice > scaled_den || (twice == scaled_den && s.is_odd()) {
        s += 1u32;
    }
    let magnitude = Value::from_integer(BigInt::from(s)) * Value::pow2(e);
    if v.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

/// `floor(num / (den * 2^e))`, the remainder, and the effective divisor,
/// scaled so the remainder compares against the divisor.
fn divide_scaled(num: &BigUint, den: &BigUint, e: i64) -> (BigUint, BigUint, BigUint) {
    let shift = e.unsigned_abs() as usize;
    let (n, d) = if e >= 0 { (num.clone(), den << shift) } else { (num << shift, den.clone()) };
    let (q, r) = n.div_rem(&d);
    (q, r, d)
}

fn require_representable<'a>(values: impl IntoIterator<Item = &'a Value>, prec: Precision) -> Result<()> {
    let bad: Vec<Value> = values.into_iter().filter(|v| !prec.is_representable(v)).cloned().collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::NotRepresentable { bits: prec.significand_bits, values: bad })
    }
}

/// Rounded sum of two representable operands.
pub fn fl_add(x: &Value, y: &Value, prec: Precision) -> Result<Value> {
    require_representable([x, y], prec)?;
    Ok(round_to_precision(&(x + y), prec))
}

/// Rounds every input to `prec`.
pub fn round_all(values: &[Value], prec: Precision) -> Vec<Value> {
    values.iter().map(|v| round_to_precision(v, prec)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulationReport {
    pub computed: Value,
    pub true_sum: Value,
    pub abs_error: Value,
    /// `2^-p * cost(tree)`.
    pub bound: Value,
}

#[derive(Serialize)]
struct SimulationJson<'a> {
    computed: &'a Value,
    true_sum: &'a Value,
    abs_error: &'a Value,
    bound: &'a Value,
    ratio: Value,
}

impl SimulationReport {
    /// `abs_error / bound`, or zero when the bound is zero.
    pub fn ratio(&self) -> Value {
        if self.bound.is_zero() {
            Value::zero()
        } else {
            &self.abs_error / &self.bound
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SimulationJson {
            computed: &self.computed,
            true_sum: &self.true_sum,
            abs_error: &self.abs_error,
            bound: &self.bound,
            ratio: self.ratio(),
        })
        .expect("report serialises")
    }

    fn new(computed: Value, tree: &AdditionTree, prec: Precision) -> Self {
        let true_sum = tree.root_value().clone();
        SimulationReport {
            abs_error: (&computed - &true_sum).abs(),
            bound: prec.unit_roundoff() * cost(tree),
            computed,
            true_sum,
        }
    }
}

/// Evaluates `tree` with a rounded addition at every internal node.
pub fn simulate(tree: &AdditionTree, prec: Precision) -> Result<SimulationReport> {
    let leaves = tree.nodes().iter().filter(|n| n.is_leaf()).map(|n| n.value());
    require_representable(leaves, prec)?;
    let mut computed: Vec<Value> = Vec::with_capacity(tree.nodes().len());
    for node in tree.nodes() {
        let v = match node.children() {
            None => node.value().clone(),
            Some((l, r)) => round_to_precision(&(&computed[l.index()] + &computed[r.index()]), prec),
        };
        computed.push(v);
    }
    let root = computed.swap_remove(tree.root().index());
    Ok(SimulationReport::new(root, tree, prec))
}

/// Evaluates `tree` with every relative error set to `+alpha` or `-alpha`,
/// matching the sign of the exact node value, so that all first-order error
/// terms add up. The operations are exact apart from the injected errors;
/// this need not be a rounding sequence any real arithmetic produces.
pub fn simulate_adversarial(tree: &AdditionTree, prec: Precision) -> SimulationReport {
    let alpha = prec.unit_roundoff();
    let up = Value::one() + &alpha;
    let down = Value::one() - &alpha;
    let mut computed: Vec<Value> = Vec::with_capacity(tree.nodes().len());
    for node in tree.nodes() {
        let v = match node.children() {
            None => node.value().clone(),
            Some((l, r)) => {
                let sum = &computed[l.index()] + &computed[r.index()];
                match node.value().signum() {
                    1 => sum * &up,
                    -1 => sum * &down,
                    _ => sum,
                }
            }
        };
        computed.push(v);
    }
    let root = computed.swap_remove(tree.root().index());
    SimulationReport::new(root, tree, prec)
}
