//! Adversarial instances from 3-PARTITION.
//!
//! A 3-PARTITION instance `(B, K)` has `3m` positive integers with
//! `K/4 < b < K/2` and `sum(B) = mK`, and asks whether `B` splits into `m`
//! triples each summing to `K`. The reduction shifts every element by a
//! large `W`, appends `m` copies of `-H` and `m` copies of a small `h`, and
//! yields a multiset `X` whose optimal addition-tree cost is exactly
//! `m(H + h)` when the instance is solvable and strictly larger otherwise.
//!
//! ```text
//! W = 100 (5m)^2 K        a_i = b_i + W        L = 3W + K
//! eps = 1 / (400 (5m)^2)  h = floor(4 eps L)   H = L + h
//! ```

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::Value;

/// Largest `m` accepted by [`find_three_partition`].
pub const PARTITION_SEARCH_CAP: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreePartitionInstance {
    pub b: Vec<u64>,
    pub k: u64,
}

impl ThreePartitionInstance {
    pub fn new(b: Vec<u64>, k: u64) -> Self {
        ThreePartitionInstance { b, k }
    }
}

/// Checks the 3-PARTITION instance conditions and returns `m`.
pub fn validate_3par(instance: &ThreePartitionInstance) -> Result<usize> {
    let invalid = |msg: String| Err(Error::InvalidInstance(msg));
    let ThreePartitionInstance { b, k } = instance;
    if *k == 0 {
        return invalid("K must be positive".into());
    }
    if b.is_empty() || b.len() % 3 != 0 {
        return invalid(format!("|B| = {} is not a positive multiple of 3", b.len()));
    }
    let m = b.len() / 3;
    let k128 = u128::from(*k);
    for (i, &x) in b.iter().enumerate() {
        let x = u128::from(x);
        if 4 * x <= k128 {
            return invalid(format!("b[{i}] = {x} violates K/4 < b (K = {k})"));
        }
        if 2 * x >= k128 {
            return invalid(format!("b[{i}] = {x} violates b < K/2 (K = {k})"));
        }
    }
    let sum: u128 = b.iter().map(|&x| u128::from(x)).sum();
    if sum != m as u128 * k128 {
        return invalid(format!("sum(B) = {sum} differs from mK = {}", m as u128 * k128));
    }
    Ok(m)
}

/// `W = 100 (5m)^2 K`.
fn shift_for(m: usize, k: u64) -> BigInt {
    BigInt::from(100u32) * BigInt::from(5 * m as u64).pow(2) * BigInt::from(k)
}

/// The shifted instance `(A, L)`: `a_i = b_i + W`, `L = 3W + K`. It is again
/// a 3-PARTITION instance, solvable exactly when the original is.
pub fn amplify(instance: &ThreePartitionInstance) -> Result<(Vec<BigInt>, BigInt)> {
    let m = validate_3par(instance)?;
    let w = shift_for(m, instance.k);
    let a = instance.b.iter().map(|&x| BigInt::from(x) + &w).collect();
    let l = BigInt::from(3u32) * &w + BigInt::from(instance.k);
    Ok((a, l))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionInstance {
    /// `A` followed by `m` copies of `-H` and `m` copies of `h`.
    pub x: Vec<Value>,
    pub a: Vec<BigInt>,
    pub w: BigInt,
    pub l: BigInt,
    pub h: BigInt,
    pub h_big: BigInt,
    pub epsilon: Value,
    pub m: usize,
    pub k: u64,
    pub target_cost: Value,
}

/// Builds the addition-tree instance `(X, m(H + h))`.
pub fn reduce_to_addition_tree(instance: &ThreePartitionInstance) -> Result<ReductionInstance> {
    let m = validate_3par(instance)?;
    let (a, l) = amplify(instance)?;
    let w = shift_for(m, instance.k);
    let five_m_sq = BigInt::from(5 * m as u64).pow(2);
    let epsilon = Value::new(1, BigInt::from(400u32) * &five_m_sq);
    // floor(4 eps L) = floor(L / (100 (5m)^2)).
    let h = l.div_floor(&(BigInt::from(100u32) * &five_m_sq));
    let h_big = &l + &h;

    let mut x: Vec<Value> = a.iter().cloned().map(Value::from).collect();
    x.extend(std::iter::repeat_n(Value::from(-h_big.clone()), m));
    x.extend(std::iter::repeat_n(Value::from(h.clone()), m));
    let target_cost = Value::from(BigInt::from(m) * (&h_big + &h));

    Ok(ReductionInstance { x, a, w, l, h, h_big, epsilon, m, k: instance.k, target_cost })
}

/// Exact values of the scaling quantities the reduction's correctness rests
/// on, with `h = beta_0 H`, `a_i = (1/3 + beta_i) H`, `a_i = (1/3 + eps_i) L`.
#[derive(Clone, Debug)]
pub struct ScalingFacts {
    pub beta_0: Value,
    pub max_abs_beta: Value,
    pub max_abs_eps: Value,
    pub epsilon: Value,
    pub max_a: BigInt,
    pub h_big: BigInt,
}

impl ScalingFacts {
    /// `0 < beta_0 < 4 eps`.
    pub fn beta_0_in_range(&self) -> bool {
        self.beta_0.is_positive() && self.beta_0 < Value::from(4) * &self.epsilon
    }

    /// `|beta_i| < 4 eps` for every `i`.
    pub fn betas_in_range(&self) -> bool {
        self.max_abs_beta < Value::from(4) * &self.epsilon
    }

    /// `|eps_i| < eps` for every `i`.
    pub fn eps_in_range(&self) -> bool {
        self.max_abs_eps < self.epsilon
    }

    /// `3 max(a_i) < H`.
    pub fn max_triple_below_h(&self) -> bool {
        BigInt::from(3u32) * &self.max_a < self.h_big
    }

    pub fn all_hold(&self) -> bool {
        self.beta_0_in_range() && self.betas_in_range() && self.eps_in_range() && self.max_triple_below_h()
    }
}

impl ReductionInstance {
    pub fn scaling_facts(&self) -> ScalingFacts {
        let third = Value::new(1, 3);
        let hb = Value::from(self.h_big.clone());
        let l = Value::from(self.l.clone());
        let max_abs = |scale: &Value| {
            self.a.iter().map(|a| (Value::from(a.clone()) / scale - &third).abs()).max().unwrap_or_default()
        };
        ScalingFacts {
            beta_0: Value::from(self.h.clone()) / &hb,
            max_abs_beta: max_abs(&hb),
            max_abs_eps: max_abs(&l),
            epsilon: self.epsilon.clone(),
            max_a: self.a.iter().max().cloned().unwrap_or_default(),
            h_big: self.h_big.clone(),
        }
    }

    /// `X` in the one-value-per-line input format.
    pub fn values_file(&self) -> String {
        let mut out =
            format!("# addition-tree instance from a 3-partition instance with K = {}, m = {}\n", self.k, self.m);
        for v in &self.x {
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }

    /// Parameter sidecar; big integers are decimal strings.
    pub fn sidecar_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Sidecar {
            k: String,
            m: usize,
            n: usize,
            w: String,
            l: String,
            epsilon: Value,
            h: String,
            h_big: String,
            a: Vec<String>,
            target_cost: Value,
        }
        serde_json::to_value(Sidecar {
            k: self.k.to_string(),
            m: self.m,
            n: self.x.len(),
            w: self.w.to_string(),
            l: self.l.to_string(),
            epsilon: self.epsilon.clone(),
            h: self.h.to_string(),
            h_big: self.h_big.to_string(),
            a: self.a.iter().map(|a| a.to_string()).collect(),
            target_cost: self.target_cost.clone(),
        })
        .expect("sidecar serialises")
    }
}

/// `true` iff every triple of `partition` sums to `K`. Errors unless the
/// triples use exactly the elements of `B`.
pub fn check_partition_witness(instance: &ThreePartitionInstance, partition: &[[u64; 3]]) -> Result<bool> {
    let mut used: Vec<u64> = partition.iter().flatten().copied().collect();
    let mut all = instance.b.clone();
    used.sort_unstable();
    all.sort_unstable();
    if used != all {
        return Err(Error::InvalidPartition(format!(
            "triples hold {} elements that are not the multiset B of {} elements",
            used.len(),
            all.len()
        )));
    }
    Ok(partition.iter().all(|t| t.iter().map(|&x| u128::from(x)).sum::<u128>() == u128::from(instance.k)))
}

/// Exhaustive search for a partition of `B` into triples summing to `K`.
pub fn find_three_partition(instance: &ThreePartitionInstance) -> Result<Option<Vec<[u64; 3]>>> {
    let m = validate_3par(instance)?;
    if m > PARTITION_SEARCH_CAP {
        return Err(Error::SizeCap { what: "3-partition search (groups)", n: m, cap: PARTITION_SEARCH_CAP });
    }
    fn search(b: &[u64], k: u64, used: &mut [bool], out: &mut Vec<[u64; 3]>) -> bool {
        let Some(i) = used.iter().position(|u| !u) else {
            return true;
        };
        used[i] = true;
        for j in i + 1..b.len() {
            if used[j] || b[i] + b[j] >= k {
                continue;
            }
            used[j] = true;
            for l in j + 1..b.len() {
                if !used[l] && b[i] + b[j] + b[l] == k {
                    used[l] = true;
                    out.push([b[i], b[j], b[l]]);
                    if search(b, k, used, out) {
                        return true;
                    }
                    out.pop();
                    used[l] = false;
                }
            }
            used[j] = false;
        }
        used[i] = false;
        false
    }
    let mut out = Vec::with_capacity(m);
    let found = search(&instance.b, instance.k, &mut vec![false; instance.b.len()], &mut out);
    Ok(found.then_some(out))
}

/// A solvable instance with `m` triples: each triple is drawn uniformly
/// from the valid ones for a `K` drawn from `k_range`, then `B` is
/// shuffled. `k_range` must start at 12 or more.
pub fn random_positive_instance<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    k_range: std::ops::RangeInclusive<u64>,
) -> ThreePartitionInstance {
    assert!(m >= 1 && *k_range.start() >= 12, "need m >= 1 and K >= 12");
    let k = rng.random_range(k_range);
    // Open interval (K/4, K/2) over the integers.
    let lo = k / 4 + 1;
    let hi = (k - 1) / 2;
    let mut b = Vec::with_capacity(3 * m);
    while b.len() < 3 * m {
        let x = rng.random_range(lo..=hi);
        let y = rng.random_range(lo..=hi);
        if let Some(z) = k.checked_sub(x + y).filter(|z| (lo..=hi).contains(z)) {
            b.extend([x, y, z]);
        }
    }
    b.shuffle(rng);
    ThreePartitionInstance { b, k }
}

/// A valid, possibly unsolvable instance: a solvable one with `transfers`
/// random unit moves between elements that keep every element in range.
pub fn random_valid_instance<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    k_range: std::ops::RangeInclusive<u64>,
    transfers: usize,
) -> ThreePartitionInstance {
    let mut inst = random_positive_instance(rng, m, k_range);
    let (lo, hi) = (inst.k / 4 + 1, (inst.k - 1) / 2);
    let n = inst.b.len();
    for _ in 0..transfers {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        if i != j && inst.b[i] > lo && inst.b[j] < hi {
            inst.b[i] -= 1;
            inst.b[j] += 1;
        }
    }
    inst
}

/// Parses the instance file format: the first non-blank line is `K m`,
/// followed by the `3m` integers of `B`, whitespace-separated. `#` starts a
/// comment. Only the syntax is checked; see [`validate_3par`].
pub fn parse_3par(text: &str) -> Result<ThreePartitionInstance> {
    let mut header: Option<(u64, usize, usize)> = None;
    let mut b: Vec<u64> = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace().peekable();
        if tokens.peek().is_none() {
            continue;
        }
        let int = |tok: &str| -> Result<u64> {
            tok.parse::<u64>()
                .map_err(|_| Error::ParseInput { line, reason: format!("`{tok}` is not a nonnegative integer") })
        };
        if header.is_none() {
            let k = int(tokens.next().expect("peeked"))?;
            let m_tok =
                tokens.next().ok_or_else(|| Error::ParseInput { line, reason: "header must be `K m`".into() })?;
            let m =
                int(m_tok)?.to_usize().ok_or_else(|| Error::ParseInput { line, reason: "m is too large".into() })?;
            if let Some(extra) = tokens.next() {
                return Err(Error::ParseInput { line, reason: format!("unexpected `{extra}` after `K m` header") });
            }
            header = Some((k, m, line));
            continue;
        }
        let (_, m, _) = header.expect("header parsed");
        for tok in tokens {
            let v = int(tok)?;
            if b.len() == m.saturating_mul(3) {
                return Err(Error::ParseInput { line, reason: format!("more than 3m = {} integers", 3 * m) });
            }
            b.push(v);
        }
    }
    let Some((k, m, _)) = header else {
        return Err(Error::ParseInput { line: last_line.max(1), reason: "missing `K m` header".into() });
    };
    if b.len() != m.saturating_mul(3) {
        return Err(Error::ParseInput {
            line: last_line.max(1),
            reason: format!("expected 3m = {} integers, found {}", m.saturating_mul(3), b.len()),
        });
    }
    Ok(ThreePartitionInstance { b, k })
}

/// Renders an instance in the format read by [`parse_3par`].
pub fn format_3par(instance: &ThreePartitionInstance) -> String {
    let nums: Vec<String> = instance.b.iter().map(u64::to_string).collect();
    format!("{} {}\n{}\n", instance.k, instance.b.len() / 3, nums.join(" "))
}

impl ReductionInstance {
    /// `|X| = 5m` and no element exceeds `H` in magnitude.
    pub fn is_polynomial_size(&self) -> bool {
        let hb = Value::from(self.h_big.clone());
        self.x.len() == 5 * self.m && self.x.iter().all(|v| v.abs() <= hb) && !self.h.is_zero()
    }
}
