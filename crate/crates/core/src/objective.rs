//! Subset scores, suboptimality ratios and the max-min statistic.
//!
//! All sums run over ordered pairs `j ≠ ℓ`, so each unordered pair is counted
//! twice. Ratios use the conventions `0/0 = 1` and `x/0 = +∞` for `x > 0`;
//! `f64::INFINITY` already orders above every finite value.

use thiserror::Error;

/// Sorted arm indices.
pub type Subset = Vec<usize>;

/// Default cap on `C(|S|,h)·C(|S|−1,h−1)` for [`statistic_u`].
pub const U_ENUMERATION_CAP: u128 = 10_000_000;
/// Default cap on `C(K,h)` for subset enumeration.
pub const SUBSET_ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum ObjectiveError {
    #[error("subset has {0} arms, need at least 2")]
    SubsetTooSmall(usize),
    #[error("subsets have different sizes ({0} and {1})")]
    SizeMismatch(usize, usize),
    #[error("enumeration of {count} candidates exceeds the cap of {cap}")]
    EnumerationCapExceeded { count: u128, cap: u128 },
    #[error("argument {0} is outside the domain")]
    DomainError(f64),
    #[error("a suboptimal ratio is not above 1 ({0})")]
    DegenerateInstance(f64),
    #[error("subset size {h} is invalid for {n} arms")]
    InvalidSubsetSize { h: usize, n: usize },
    #[error("arm {0} is not in the active set")]
    ArmNotInSet(usize),
    #[error("arm index {index} out of range for K = {k}")]
    IndexOutOfRange { index: usize, k: usize },
    #[error("at most 64 arms are supported by subset enumeration, got {0}")]
    TooManyArms(usize),
    #[error("invalid distance matrix: {0}")]
    InvalidDistances(String),
}

/// Symmetric, zero-diagonal, non-negative `K × K` matrix of `1 − σ` values.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    dim: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_row_major(dim: usize, d: Vec<f64>) -> Result<Self, ObjectiveError> {
        if d.len() != dim * dim {
            return Err(ObjectiveError::InvalidDistances(format!("{} entries for dim {dim}", d.len())));
        }
        for i in 0..dim {
            if d[i * dim + i] != 0.0 {
                return Err(ObjectiveError::InvalidDistances(format!("nonzero diagonal at {i}")));
            }
            for j in 0..dim {
                let v = d[i * dim + j];
                if !(v >= 0.0) || v.is_infinite() {
                    return Err(ObjectiveError::InvalidDistances(format!("entry ({i},{j}) = {v}")));
                }
                if v != d[j * dim + i] {
                    return Err(ObjectiveError::InvalidDistances(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { dim, d })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.dim + j]
    }
}

fn check_arms(d: &DistanceMatrix, s: &[usize]) -> Result<(), ObjectiveError> {
    match s.iter().find(|&&i| i >= d.dim) {
        Some(&index) => Err(ObjectiveError::IndexOutOfRange { index, k: d.dim }),
        None => Ok(()),
    }
}

/// `Σ_{j≠ℓ ∈ S} d[j][ℓ]`; smaller means more mutually correlated.
pub fn subset_score(d: &DistanceMatrix, s: &[usize]) -> Result<f64, ObjectiveError> {
    if s.len() < 2 {
        return Err(ObjectiveError::SubsetTooSmall(s.len()));
    }
    check_arms(d, s)?;
    let mut sum = 0.0;
    for (a, &j) in s.iter().enumerate() {
        for &l in &s[a + 1..] {
            sum += d.get(j, l);
        }
    }
    Ok(2.0 * sum)
}

/// `C(n, k)` as a `u128`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    c
}

fn check_cap(count: u128, cap: u128) -> Result<(), ObjectiveError> {
    if count > cap {
        Err(ObjectiveError::EnumerationCapExceeded { count, cap })
    } else {
        Ok(())
    }
}

/// Size-`k` subsets of `items` in lexicographic order of positions.
pub fn combinations(items: &[usize], k: usize) -> Combinations<'_> {
    Combinations { items, idx: (0..k).collect(), done: k > items.len() }
}

pub struct Combinations<'a> {
    items: &'a [usize],
    idx: Vec<usize>,
    done: bool,
}

impl Iterator for Combinations<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.iter().map(|&p| self.items[p]).collect();
        let n = self.items.len();
        let k = self.idx.len();
        match (0..k).rev().find(|&p| self.idx[p] != p + n - k) {
            Some(p) => {
                self.idx[p] += 1;
                for q in p + 1..k {
                    self.idx[q] = self.idx[q - 1] + 1;
                }
            }
            None => self.done = true,
        }
        Some(out)
    }
}

/// Score-minimizing size-`h` subset of `arms` (sorted), first in lexicographic
/// order among exact ties, plus the runner-up.
pub(crate) fn best_two_subsets(
    d: &DistanceMatrix,
    arms: &[usize],
    h: usize,
    cap: u128,
) -> Result<(Subset, Option<Subset>), ObjectiveError> {
    if h < 2 || h > arms.len() {
        return Err(ObjectiveError::InvalidSubsetSize { h, n: arms.len() });
    }
    check_arms(d, arms)?;
    check_cap(binomial(arms.len(), h), cap)?;
    let mut best: Option<(f64, Subset)> = None;
    let mut second: Option<(f64, Subset)> = None;
    for s in combinations(arms, h) {
        let score = subset_score(d, &s)?;
        match &best {
            Some((b, _)) if score >= *b => {
                if second.as_ref().is_none_or(|(v, _)| score < *v) {
                    second = Some((score, s));
                }
            }
            _ => {
                second = best.take();
                best = Some((score, s));
            }
        }
    }
    let (_, b) = best.expect("at least one subset");
    Ok((b, second.map(|(_, s)| s)))
}

/// Exhaustive argmin of [`subset_score`] over all size-`h` subsets of `[K]`.
pub fn best_subset(d: &DistanceMatrix, h: usize, cap: u128) -> Result<Subset, ObjectiveError> {
    let arms: Vec<usize> = (0..d.dim).collect();
    best_subset_within(d, &arms, h, cap)
}

/// As [`best_subset`] but restricted to `arms` (sorted).
pub fn best_subset_within(d: &DistanceMatrix, arms: &[usize], h: usize, cap: u128) -> Result<Subset, ObjectiveError> {
    Ok(best_two_subsets(d, arms, h, cap)?.0)
}

#[inline]
fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Suboptimality ratio `D(A, B)`: pair sums of `B` outside `(A∩B)²` over
/// pair sums of `A` outside `(A∩B)²`.
pub fn ratio_d(d: &DistanceMatrix, a: &[usize], b: &[usize]) -> Result<f64, ObjectiveError> {
    if a.len() != b.len() {
        return Err(ObjectiveError::SizeMismatch(a.len(), b.len()));
    }
    check_arms(d, a)?;
    check_arms(d, b)?;
    let outside = |s: &[usize], other: &[usize]| {
        let mut sum = 0.0;
        for (p, &j) in s.iter().enumerate() {
            for &l in &s[p + 1..] {
                if !(other.contains(&j) && other.contains(&l)) {
                    sum += d.get(j, l);
                }
            }
        }
        2.0 * sum
    };
    Ok(ratio(outside(b, a), outside(a, b)))
}

/// `R_i = min_{i ∈ B, |B| = h} D(S*, B)`.
pub fn suboptimality_ratio(d: &DistanceMatrix, optimal: &[usize], i: usize, cap: u128) -> Result<f64, ObjectiveError> {
    let k = d.dim;
    let h = optimal.len();
    if i >= k {
        return Err(ObjectiveError::IndexOutOfRange { index: i, k });
    }
    if h < 1 || h > k {
        return Err(ObjectiveError::InvalidSubsetSize { h, n: k });
    }
    check_cap(binomial(k - 1, h - 1), cap)?;
    let others: Vec<usize> = (0..k).filter(|&j| j != i).collect();
    let mut best = f64::INFINITY;
    for mut b in combinations(&others, h - 1) {
        let pos = b.partition_point(|&j| j < i);
        b.insert(pos, i);
        best = best.min(ratio_d(d, optimal, &b)?);
    }
    Ok(best)
}

/// `α(θ) = ½(log θ − 1 + 1/θ)` for `θ ≥ 1`; `α(+∞) = +∞`.
pub fn alpha(theta: f64) -> Result<f64, ObjectiveError> {
    if !(theta >= 1.0) {
        return Err(ObjectiveError::DomainError(theta));
    }
    if theta.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let x = theta - 1.0;
    Ok(0.5 * (x.ln_1p() - x / theta))
}

/// `β(θ) = θ − 1 − log θ` for `θ ≥ 1`.
pub fn beta(theta: f64) -> Result<f64, ObjectiveError> {
    if !(theta >= 1.0) {
        return Err(ObjectiveError::DomainError(theta));
    }
    if theta.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let x = theta - 1.0;
    Ok(x - x.ln_1p())
}

/// Inverse of [`alpha`] on `[1, ∞)` by bracketing bisection. The bracket
/// starts at `[1, 2]` and its upper end doubles until `α(upper) ≥ y`.
/// Bisection stops at width `1e-12` or when the midpoint is no longer
/// representable between the ends.
pub fn alpha_inv(y: f64) -> Result<f64, ObjectiveError> {
    if !(y >= 0.0) {
        return Err(ObjectiveError::DomainError(y));
    }
    if y == 0.0 {
        return Ok(1.0);
    }
    let f = |t: f64| alpha(t).expect("bracket stays in domain");
    let mut lo = 1.0;
    let mut hi = 2.0;
    while f(hi) < y {
        lo = hi;
        hi *= 2.0;
        if hi.is_infinite() {
            return Ok(f64::INFINITY);
        }
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `H_C = h/α(R_(h+1)) + Σ_{i>h} 1/α(R_(i))` over the ascending order
/// statistics of `ratios`.
pub fn complexity(ratios: &[f64], h: usize) -> Result<f64, ObjectiveError> {
    if h == 0 || h >= ratios.len() {
        return Err(ObjectiveError::InvalidSubsetSize { h, n: ratios.len() });
    }
    let mut sorted = ratios.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = &sorted[h..];
    if let Some(&bad) = tail.iter().find(|&&r| !(r > 1.0)) {
        return Err(ObjectiveError::DegenerateInstance(bad));
    }
    let inv = |r: f64| 1.0 / alpha(r).expect("ratio above 1");
    Ok(h as f64 * inv(tail[0]) + tail.iter().map(|&r| inv(r)).sum::<f64>())
}

/// `1 + Σ_{i=h+1}^{K} 1/i`, the budget normalizer of the fixed-budget schedule.
pub fn log_bar(k: usize, h: usize) -> f64 {
    1.0 + (h + 1..=k).map(|i| 1.0 / i as f64).sum::<f64>()
}

/// Precomputed view of the size-`h` subsets of an active set, as bit masks.
struct SubsetTable {
    masks: Vec<u64>,
    members: Vec<Vec<usize>>,
}

impl SubsetTable {
    fn new(active: &[usize], h: usize) -> Self {
        let members: Vec<Vec<usize>> = combinations(active, h).collect();
        let masks = members.iter().map(|s| s.iter().fold(0u64, |m, &i| m | (1 << i))).collect();
        Self { masks, members }
    }
}

/// Pair sum over `s` excluding pairs with both ends in `mask`.
#[inline]
fn outside_sum(d: &DistanceMatrix, s: &[usize], mask: u64) -> f64 {
    let mut sum = 0.0;
    for (p, &j) in s.iter().enumerate() {
        let j_in = mask & (1 << j) != 0;
        for &l in &s[p + 1..] {
            if !(j_in && mask & (1 << l) != 0) {
                sum += d.get(j, l);
            }
        }
    }
    sum
}

/// `U_i = max_{A ⊂ S} min_{i ∈ B ⊂ S} D(A, B)` for every `i` in `active`,
/// returned in the order of `active` (which must be sorted and distinct).
///
/// Each `D(A, B)` is computed once and shared by every arm of `B`.
pub fn statistic_u(d: &DistanceMatrix, active: &[usize], h: usize, cap: u128) -> Result<Vec<f64>, ObjectiveError> {
    let n = active.len();
    if h < 2 || n < h + 1 {
        return Err(ObjectiveError::InvalidSubsetSize { h, n });
    }
    check_arms(d, active)?;
    if d.dim > 64 {
        return Err(ObjectiveError::TooManyArms(d.dim));
    }
    check_cap(binomial(n, h).saturating_mul(binomial(n - 1, h - 1)), cap)?;
    let table = SubsetTable::new(active, h);
    let slot = |arm: usize| active.binary_search(&arm).expect("member of active set");
    let slots: Vec<Vec<usize>> = table.members.iter().map(|s| s.iter().map(|&i| slot(i)).collect()).collect();
    let mut u = vec![f64::NEG_INFINITY; n];
    let mut mins = vec![f64::INFINITY; n];
    for (a, &mask_a) in table.members.iter().zip(&table.masks) {
        mins.fill(f64::INFINITY);
        for ((b, &mask_b), b_slots) in table.members.iter().zip(&table.masks).zip(&slots) {
            let v = if mask_a == mask_b {
                1.0
            } else {
                ratio(outside_sum(d, b, mask_a), outside_sum(d, a, mask_b))
            };
            for &p in b_slots {
                if v < mins[p] {
                    mins[p] = v;
                }
            }
        }
        for (u, &m) in u.iter_mut().zip(&mins) {
            if m > *u {
                *u = m;
            }
        }
    }
    Ok(u)
}

/// [`statistic_u`] for a single arm.
pub fn statistic_u_arm(d: &DistanceMatrix, active: &[usize], i: usize, h: usize, cap: u128) -> Result<f64, ObjectiveError> {
    let pos = active.iter().position(|&a| a == i).ok_or(ObjectiveError::ArmNotInSet(i))?;
    Ok(statistic_u(d, active, h, cap)?[pos])
}
