//! Brute-force spark computation by exact rank over the integers.
//!
//! This module is the independent cross-check for the certificates: it
//! never looks at the (1 + 1/q)/μ bound or the closed-form witness. It
//! enumerates column subsets in lexicographic order, smallest size
//! first, and tests each for linear dependence with fraction-free
//! elimination. The only shortcut it may take — skipping subset sizes
//! below the ceiled 1 + 1/μ bound — uses a bound that holds for *every*
//! dictionary, so the search stays logically independent of the claim
//! it validates.
//!
//! Elimination is Bareiss-style: every intermediate entry is a minor of
//! the original integer matrix, so sizes are controlled by the Hadamard
//! bound and the i128 fast path can be chosen safely, with big integers
//! as the fallback.

use alloc::{vec, vec::Vec};
use core::fmt;
use core::ops::{Div, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::certify::{mutual_coherence, Rational};
use crate::construct::{DependencyWitness, ScaledDictionary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleError {
    /// Sets of fewer than two nonzero columns are never dependent.
    KMaxTooSmall {
        k_max: usize,
    },
    KMaxExceedsColumns {
        k_max: usize,
        columns: usize,
    },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::KMaxTooSmall { k_max } => {
                write!(f, "k_max must be at least 2, got {k_max}")
            }
            OracleError::KMaxExceedsColumns { k_max, columns } => {
                write!(f, "k_max {k_max} exceeds the {columns} available columns")
            }
        }
    }
}

impl core::error::Error for OracleError {}

// --- fraction-free elimination ------------------------------------------------

/// Integer type usable inside the Bareiss recurrence. The one-step
/// division is exact, so plain `/` is correct for both machine and big
/// integers.
trait EngineInt:
    Clone + PartialEq + From<i64> + Zero + One + Sub<Output = Self> + Div<Output = Self>
{
}

impl EngineInt for i128 {}
impl EngineInt for BigInt {}

/// Incremental Bareiss elimination over a growing set of pivot columns.
///
/// Stage-t vectors hold (t+1)×(t+1) minors of the original matrix:
/// reducing a fresh column through pivot t computes
/// `(p_t·v[i] − v[ρ_t]·w_t[i]) / p_{t−1}` entrywise, which Sylvester's
/// identity keeps integral. A stage-t vector is automatically zero at
/// all earlier pivot rows (repeated-row minors vanish), so "reduces to
/// the zero vector" is exactly linear dependence on the pivots.
struct Eliminator<T> {
    pivot_rows: Vec<usize>,
    pivots: Vec<T>,
    reduced: Vec<Vec<T>>,
}

impl<T: EngineInt> Eliminator<T> {
    fn new() -> Eliminator<T> {
        Eliminator {
            pivot_rows: Vec::new(),
            pivots: Vec::new(),
            reduced: Vec::new(),
        }
    }

    fn depth(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces an integer column through every current pivot.
    fn reduce(&self, column: &[i64]) -> Vec<T> {
        let mut v: Vec<T> = column.iter().map(|&x| T::from(x)).collect();
        for t in 0..self.depth() {
            let prev = if t == 0 {
                T::one()
            } else {
                self.pivots[t - 1].clone()
            };
            let at_pivot = v[self.pivot_rows[t]].clone();
            for (slot, w) in v.iter_mut().zip(&self.reduced[t]) {
                *slot = (self.pivots[t].clone() * slot.clone() - at_pivot.clone() * w.clone())
                    / prev.clone();
            }
        }
        v
    }

    /// Installs a reduced, nonzero vector as the next pivot.
    fn push(&mut self, v: Vec<T>) {
        let row = v
            .iter()
            .position(|x| !x.is_zero())
            .expect("pivot vector must be nonzero");
        self.pivot_rows.push(row);
        self.pivots.push(v[row].clone());
        self.reduced.push(v);
    }

    fn pop(&mut self) {
        self.pivot_rows.pop();
        self.pivots.pop();
        self.reduced.pop();
    }
}

/// Conservative test that every intermediate of a depth-`k` elimination
/// fits i128: stage entries are minors bounded by the Hadamard product
/// of the k largest column norms, and the recurrence multiplies two of
/// them before the exact division.
fn fits_i128(columns: &[&[i64]], k: usize) -> bool {
    let mut max_norm_bits = 0u32;
    for col in columns {
        let mut norm_sq = 0u128;
        for &e in *col {
            let sq = (e as i128)
                .unsigned_abs()
                .saturating_mul(e.unsigned_abs() as u128);
            norm_sq = norm_sq.saturating_add(sq);
            if norm_sq == u128::MAX {
                return false;
            }
        }
        max_norm_bits = max_norm_bits.max(128 - norm_sq.leading_zeros());
    }
    // |minor| ≤ ∏ norms ⇒ bits ≤ k·max_norm_bits/2 (+1 slack); the
    // product of two such minors must stay below the 127 usable bits.
    let minor_bits = (k as u32 * max_norm_bits).div_ceil(2) + 1;
    2 * minor_bits + 2 <= 127
}

// --- exact rank and kernels -----------------------------------------------------

/// Rank of an integer matrix (given as columns) together with a
/// primitive integer kernel vector whenever the columns are dependent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankResult {
    pub rank: usize,
    pub nullvector: Option<Vec<i64>>,
}

/// Exact rank over the rationals by fraction-free elimination. When the
/// rank is below the column count, `nullvector` carries one nonzero
/// integer kernel element (primitive, first nonzero entry positive),
/// supported on the shortest dependent column prefix.
///
/// The matrix must be nonempty. Kernel coefficients are reduced to
/// primitive form and must fit `i64` (always true at this crate's
/// scales); the rank itself has no such restriction.
pub fn exact_rank(columns: &[Vec<i64>]) -> RankResult {
    assert!(!columns.is_empty(), "rank of an empty matrix");
    let refs: Vec<&[i64]> = columns.iter().map(|c| c.as_slice()).collect();
    if fits_i128(&refs, columns.len()) {
        rank_engine::<i128>(&refs)
    } else {
        rank_engine::<BigInt>(&refs)
    }
}

fn rank_engine<T: EngineInt>(columns: &[&[i64]]) -> RankResult {
    let mut elim: Eliminator<T> = Eliminator::new();
    let mut first_dependent = None;
    for (j, col) in columns.iter().enumerate() {
        let reduced = elim.reduce(col);
        if reduced.iter().all(|x| x.is_zero()) {
            if first_dependent.is_none() {
                first_dependent = Some(j);
            }
        } else {
            elim.push(reduced);
        }
    }
    let nullvector = first_dependent.map(|j| {
        let mut v = kernel_coefficients(&columns[..=j])
            .expect("a dependent prefix has a nontrivial kernel");
        v.resize(columns.len(), 0);
        v
    });
    RankResult {
        rank: elim.depth(),
        nullvector,
    }
}

/// Primitive integer kernel vector of the given columns via rational
/// Gauss–Jordan elimination, or `None` if they are independent. The
/// first free column gets coefficient +1 before normalization, so the
/// result is deterministic.
fn kernel_coefficients(columns: &[&[i64]]) -> Option<Vec<i64>> {
    let rows = columns[0].len();
    let k = columns.len();
    let mut m: Vec<Vec<BigRational>> = (0..rows)
        .map(|i| {
            columns
                .iter()
                .map(|c| BigRational::from_integer(BigInt::from(c[i])))
                .collect()
        })
        .collect();
    let mut pivot_cols: Vec<usize> = Vec::new();
    for col in 0..k {
        let row = pivot_cols.len();
        let Some(p) = (row..rows).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in &mut m[row] {
            *x *= &inv;
        }
        let pivot_row = m[row].clone();
        for (i, other) in m.iter_mut().enumerate() {
            if i != row && !other[col].is_zero() {
                let factor = other[col].clone();
                for (x, p) in other.iter_mut().zip(&pivot_row) {
                    *x -= &factor * p;
                }
            }
        }
        pivot_cols.push(col);
    }
    let free = (0..k).find(|c| !pivot_cols.contains(c))?;
    let mut kernel = vec![BigRational::zero(); k];
    kernel[free] = BigRational::one();
    for (row, &pc) in pivot_cols.iter().enumerate() {
        if pc < free {
            kernel[pc] = -m[row][free].clone();
        }
    }
    Some(primitive_integers(&kernel))
}

/// Clears denominators and divides by the content; flips signs so the
/// first nonzero entry is positive.
fn primitive_integers(v: &[BigRational]) -> Vec<i64> {
    let mut lcm = BigInt::one();
    for x in v {
        lcm = num_integer::lcm(lcm, x.denom().clone());
    }
    let mut ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let mut gcd = BigInt::zero();
    for x in &ints {
        gcd = num_integer::gcd(gcd, x.clone());
    }
    if !gcd.is_zero() {
        for x in &mut ints {
            *x /= &gcd;
        }
    }
    if let Some(first) = ints.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in &mut ints {
                *x = -x.clone();
            }
        }
    }
    ints.into_iter()
        .map(|x| i64::try_from(x).expect("primitive kernel coefficient fits i64"))
        .collect()
}

// --- spark search -----------------------------------------------------------------

/// Outcome of a bounded spark search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparkOutcome {
    Exact(u64),
    /// No dependent subset up to `k_max`; the spark is at least this.
    AtLeast(u64),
}

/// What a spark search did and found. `subsets_examined` counts exactly
/// the size-k subsets whose rank was tested (the search stops at the
/// first dependence, so a winning level is only partially counted).
/// `elapsed_ms` is `None` here — this crate has no clock; callers that
/// time the search may fill it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparkSearchReport {
    pub outcome: SparkOutcome,
    pub witness: Option<DependencyWitness>,
    pub subsets_examined: u64,
    pub elapsed_ms: Option<u64>,
}

impl Serialize for SparkSearchReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("SparkSearchReport", 4)?;
        match self.outcome {
            SparkOutcome::Exact(k) => st.serialize_field("spark", &k)?,
            SparkOutcome::AtLeast(k) => st.serialize_field("lower_bound", &k)?,
        }
        st.serialize_field("witness", &self.witness)?;
        st.serialize_field("subsets_examined", &self.subsets_examined)?;
        st.serialize_field("elapsed_ms", &self.elapsed_ms)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for SparkSearchReport {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<SparkSearchReport, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            spark: Option<u64>,
            lower_bound: Option<u64>,
            witness: Option<DependencyWitness>,
            subsets_examined: u64,
            elapsed_ms: Option<u64>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let outcome = match (raw.spark, raw.lower_bound) {
            (Some(k), None) => SparkOutcome::Exact(k),
            (None, Some(k)) => SparkOutcome::AtLeast(k),
            _ => return Err(D::Error::custom("need exactly one of spark / lower_bound")),
        };
        Ok(SparkSearchReport {
            outcome,
            witness: raw.witness,
            subsets_examined: raw.subsets_examined,
            elapsed_ms: raw.elapsed_ms,
        })
    }
}

/// `true` when a subset of this size is already ruled out by the ceiled
/// 1 + 1/μ lower bound (which holds for any dictionary) and can be
/// skipped without a rank test.
pub fn prune_by_coherence(mu: Rational, subset_size: usize) -> bool {
    let de = Rational::from_integer(1) + Rational::from_integer(1) / mu;
    (subset_size as i64) < de.ceil_int()
}

/// Scans all size-`k` column subsets starting at `first`, in
/// lexicographic order, and returns the witness for the first dependent
/// one. `tested` is incremented once per full-size subset whose rank is
/// decided. This is the unit a parallel driver distributes: disjoint
/// `first` values cover disjoint subset families, and taking the answer
/// from the smallest winning `first` reproduces the sequential result.
pub fn search_level_with_first(
    d: &ScaledDictionary,
    k: usize,
    first: usize,
    tested: &mut u64,
) -> Option<DependencyWitness> {
    let refs: Vec<&[i64]> = (0..d.num_columns())
        .map(|i| d.column(i).entries.as_slice())
        .collect();
    if fits_i128(&refs, k) {
        search_with_first::<i128>(d, k, first, tested)
    } else {
        search_with_first::<BigInt>(d, k, first, tested)
    }
}

fn search_with_first<T: EngineInt>(
    d: &ScaledDictionary,
    k: usize,
    first: usize,
    tested: &mut u64,
) -> Option<DependencyWitness> {
    let mut elim: Eliminator<T> = Eliminator::new();
    let head = elim.reduce(&d.column(first).entries);
    if head.iter().all(|x| x.is_zero()) {
        // A zero column is a dependent set of size one on its own.
        return Some(witness_for(d, &[first]));
    }
    if k == 1 {
        return None;
    }
    elim.push(head);
    let mut chosen = vec![first];
    descend(d, k, &mut chosen, &mut elim, tested)
}

fn descend<T: EngineInt>(
    d: &ScaledDictionary,
    k: usize,
    chosen: &mut Vec<usize>,
    elim: &mut Eliminator<T>,
    tested: &mut u64,
) -> Option<DependencyWitness> {
    let depth = chosen.len();
    let last = *chosen
        .last()
        .expect("descend starts with the first column chosen");
    for c in (last + 1)..=(d.num_columns() - (k - depth)) {
        let reduced = elim.reduce(&d.column(c).entries);
        let dependent = reduced.iter().all(|x| x.is_zero());
        if depth + 1 == k {
            *tested += 1;
        }
        if dependent {
            // At the leaf this is the expected discovery; at an inner
            // depth it means a smaller dependent set slipped past the
            // level schedule (possible only when levels were skipped on
            // a bound) — either way, report it honestly.
            chosen.push(c);
            let w = witness_for(d, chosen);
            chosen.pop();
            return Some(w);
        }
        if depth + 1 < k {
            elim.push(reduced);
            chosen.push(c);
            if let Some(w) = descend(d, k, chosen, elim, tested) {
                return Some(w);
            }
            chosen.pop();
            elim.pop();
        }
    }
    None
}

/// Kernel coefficients for a dependent column set, as a witness.
fn witness_for(d: &ScaledDictionary, indices: &[usize]) -> DependencyWitness {
    if indices.len() == 1 {
        return DependencyWitness {
            column_indices: indices.to_vec(),
            coefficients: vec![1],
        };
    }
    let cols: Vec<&[i64]> = indices
        .iter()
        .map(|&i| d.column(i).entries.as_slice())
        .collect();
    let coefficients =
        kernel_coefficients(&cols).expect("dependent columns have a nontrivial kernel");
    DependencyWitness {
        column_indices: indices.to_vec(),
        coefficients,
    }
}

/// Exhaustive spark search: for k = 2…`k_max`, enumerate all k-subsets
/// lexicographically and stop at the first dependent one, whose kernel
/// becomes the witness. With `prune_below_de`, levels ruled out by the
/// ceiled 1 + 1/μ bound are skipped (μ is measured from the dictionary
/// itself, keeping the search independent of any stronger claim). If no
/// dependence is found the spark is reported as ≥ `k_max` + 1.
///
/// The result — including `subsets_examined` — is deterministic: the
/// count is the number of size-k rank tests, and the first hit of the
/// lexicographic order is the canonical witness.
pub fn brute_spark(
    d: &ScaledDictionary,
    k_max: usize,
    prune_below_de: bool,
) -> Result<SparkSearchReport, OracleError> {
    if k_max < 2 {
        return Err(OracleError::KMaxTooSmall { k_max });
    }
    if k_max > d.num_columns() {
        return Err(OracleError::KMaxExceedsColumns {
            k_max,
            columns: d.num_columns(),
        });
    }
    let mu = if prune_below_de {
        Some(mutual_coherence(d))
    } else {
        None
    };
    let mut tested = 0u64;
    for k in 2..=k_max {
        if let Some(mu) = mu {
            if prune_by_coherence(mu, k) {
                continue;
            }
        }
        for first in 0..=(d.num_columns() - k) {
            if let Some(witness) = search_level_with_first(d, k, first, &mut tested) {
                debug_assert_eq!(crate::certify::verify_witness(d, &witness), Ok(()));
                return Ok(SparkSearchReport {
                    outcome: SparkOutcome::Exact(witness.size() as u64),
                    witness: Some(witness),
                    subsets_examined: tested,
                    elapsed_ms: None,
                });
            }
        }
    }
    Ok(SparkSearchReport {
        outcome: SparkOutcome::AtLeast(k_max as u64 + 1),
        witness: None,
        subsets_examined: tested,
        elapsed_ms: None,
    })
}

// --- subset combinatorics (for parallel drivers and reporting) ---------------------

/// C(n, k), saturating at `u128::MAX` (unreachable at this crate's
/// scales; each intermediate division is exact).
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = match acc.checked_mul((n - k + i) as u128) {
            Some(v) => v / i as u128,
            None => return u128::MAX,
        };
    }
    acc
}

/// Position of an ascending k-subset of {0, …, n−1} in lexicographic
/// order, 0-based. A search that stops at this subset has performed
/// rank + 1 leaf tests at its level.
pub fn subset_lex_rank(subset: &[usize], n: usize) -> u128 {
    let k = subset.len();
    let mut rank: u128 = 0;
    let mut prev = 0usize;
    for (i, &c) in subset.iter().enumerate() {
        for v in prev..c {
            rank += binomial((n - v - 1) as u64, (k - i - 1) as u64);
        }
        prev = c + 1;
    }
    rank
}
