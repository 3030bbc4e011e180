//! Exhaustive ℓ0 recovery at desk scale: synthesis of sparse signals,
//! exact minimum-support solving, and a seeded demonstration that
//! sparsity below spark/2 pins the representation uniquely.
//!
//! Everything is rational and exact. The solver enumerates supports
//! outright — no greedy or convex surrogates — so its output is the
//! ground truth the uniqueness guarantee speaks about, not an
//! approximation of it.

use alloc::{vec, vec::Vec};
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::certify::{certify, Rational, SparkConclusion};
use crate::construct::{build_dictionary, dependent_set, ColumnLabel, ScaledDictionary};
use crate::field::FieldSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecoverError {
    LengthMismatch { support: usize, values: usize },
    IndexOutOfRange { index: usize, columns: usize },
    DuplicateIndex { index: usize },
    ZeroValue { position: usize },
}

impl fmt::Display for RecoverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecoverError::LengthMismatch { support, values } => {
                write!(f, "{support} support indices vs {values} values")
            }
            RecoverError::IndexOutOfRange { index, columns } => {
                write!(f, "column index {index} out of range for {columns} columns")
            }
            RecoverError::DuplicateIndex { index } => {
                write!(f, "column index {index} appears twice")
            }
            RecoverError::ZeroValue { position } => {
                write!(
                    f,
                    "zero value at position {position} (support must be exact)"
                )
            }
        }
    }
}

impl core::error::Error for RecoverError {}

/// A vector written by its nonzero coordinates in column space: the ℓ0
/// norm is the support size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseVector {
    pub support: Vec<usize>,
    pub values: Vec<Rational>,
}

impl SparseVector {
    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    fn validate(&self, columns: usize) -> Result<(), RecoverError> {
        if self.support.len() != self.values.len() {
            return Err(RecoverError::LengthMismatch {
                support: self.support.len(),
                values: self.values.len(),
            });
        }
        let mut seen = alloc::collections::BTreeSet::new();
        for (pos, (&idx, value)) in self.support.iter().zip(&self.values).enumerate() {
            if idx >= columns {
                return Err(RecoverError::IndexOutOfRange {
                    index: idx,
                    columns,
                });
            }
            if !seen.insert(idx) {
                return Err(RecoverError::DuplicateIndex { index: idx });
            }
            if value.num() == 0 {
                return Err(RecoverError::ZeroValue { position: pos });
            }
        }
        Ok(())
    }
}

/// v = Σ values[i] · column(support[i]) over the *unit* columns, i.e.
/// the stored integer columns divided by 2^m. Exact rationals out.
pub fn synthesize(
    d: &ScaledDictionary,
    x: &SparseVector,
) -> Result<Vec<BigRational>, RecoverError> {
    x.validate(d.num_columns())?;
    let scale = BigInt::from(1i64 << d.scale_log2());
    let mut v = vec![BigRational::zero(); d.rows()];
    for (&idx, value) in x.support.iter().zip(&x.values) {
        let coeff = BigRational::new(
            BigInt::from(value.num()),
            BigInt::from(value.den()) * &scale,
        );
        for (slot, &e) in v.iter_mut().zip(&d.column(idx).entries) {
            *slot += &coeff * BigRational::from_integer(BigInt::from(e));
        }
    }
    Ok(v)
}

/// A minimum-support representation together with whether it was the
/// only one at that support size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct L0Solution {
    pub vector: SparseVector,
    pub unique_at_size: bool,
}

/// Exhaustive exact ℓ0 minimization: searches supports of size 0…`k_cap`
/// in ascending size (lexicographic within a size), solving each exact
/// linear system, and returns the first representation found plus a
/// uniqueness flag from finishing the scan at that size. `None` means v
/// has no representation within the cap.
///
/// Supports whose columns are linearly dependent are skipped: at the
/// minimal size, a representation on a dependent support could be
/// rewritten on a strictly smaller one (shift along a kernel vector to
/// zero a coefficient), contradicting minimality — so skipping loses
/// neither the minimizer nor any competitor counted by the flag. The
/// same argument shows minimal-size solutions have all coefficients
/// nonzero automatically.
pub fn l0_solve(d: &ScaledDictionary, v: &[BigRational], k_cap: usize) -> Option<L0Solution> {
    assert!(k_cap <= d.num_columns(), "support cap exceeds column count");
    assert_eq!(v.len(), d.rows(), "signal dimension mismatch");
    if v.iter().all(|x| x.is_zero()) {
        return Some(L0Solution {
            vector: SparseVector {
                support: Vec::new(),
                values: Vec::new(),
            },
            unique_at_size: true,
        });
    }
    for size in 1..=k_cap {
        let mut found: Option<SparseVector> = None;
        let mut support: Vec<usize> = (0..size).collect();
        loop {
            if let Some(coefficients) = solve_on_support(d, &support, v) {
                if let Some(first) = &found {
                    // A second consistent support at the minimal size:
                    // the minimizer stands but is not unique.
                    debug_assert_ne!(first.support, support);
                    return Some(L0Solution {
                        vector: first.clone(),
                        unique_at_size: false,
                    });
                }
                let values = coefficients
                    .iter()
                    .map(|c| {
                        Rational::new(
                            i64::try_from(c.numer().clone()).expect("coefficient fits i64"),
                            i64::try_from(c.denom().clone()).expect("coefficient fits i64"),
                        )
                    })
                    .collect();
                found = Some(SparseVector {
                    support: support.clone(),
                    values,
                });
            }
            if !next_combination(&mut support, d.num_columns()) {
                break;
            }
        }
        if let Some(vector) = found {
            return Some(L0Solution {
                vector,
                unique_at_size: true,
            });
        }
    }
    None
}

/// Solves v = (true columns of `support`) · c exactly. Returns the
/// coefficients when the columns are independent and the system is
/// consistent; `None` for dependent supports or inconsistent systems.
fn solve_on_support(
    d: &ScaledDictionary,
    support: &[usize],
    v: &[BigRational],
) -> Option<Vec<BigRational>> {
    let rows = d.rows();
    let k = support.len();
    let scale = BigRational::from_integer(BigInt::from(1i64 << d.scale_log2()));
    // Augmented matrix [true columns | v], eliminated by Gauss–Jordan.
    let mut m: Vec<Vec<BigRational>> = (0..rows)
        .map(|i| {
            let mut row: Vec<BigRational> = support
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(d.column(c).entries[i])) / &scale)
                .collect();
            row.push(v[i].clone());
            row
        })
        .collect();
    let mut pivot_row = 0usize;
    for col in 0..k {
        let Some(p) = (pivot_row..rows).find(|&i| !m[i][col].is_zero()) else {
            // No pivot for this column: the support is dependent.
            return None;
        };
        m.swap(pivot_row, p);
        let inv = m[pivot_row][col].recip();
        for x in &mut m[pivot_row] {
            *x *= &inv;
        }
        let lead = m[pivot_row].clone();
        for (i, other) in m.iter_mut().enumerate() {
            if i != pivot_row && !other[col].is_zero() {
                let factor = other[col].clone();
                for (x, l) in other.iter_mut().zip(&lead).skip(col) {
                    *x -= &factor * l;
                }
            }
        }
        pivot_row += 1;
    }
    // Consistency: every row below the pivots must have zero residual.
    if m[pivot_row..].iter().any(|row| !row[k].is_zero()) {
        return None;
    }
    Some((0..k).map(|i| m[i][k].clone()).collect())
}

/// Advances an ascending index combination in lexicographic order;
/// `false` when exhausted.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - (k - i) {
            c[i] += 1;
            for j in (i + 1)..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Two distinct exact representations of one vector, from splitting the
/// minimal dependence: the character half and the standard half of the
/// witness synthesize the same signal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionExhibit {
    pub left: SparseVector,
    pub right: SparseVector,
    pub synthesized_equal: bool,
}

/// Outcome of the seeded recovery demonstration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemoReport {
    pub spec: FieldSpec,
    /// Planted sparsity floor((spark − 1)/2) — the largest size the
    /// uniqueness guarantee covers.
    pub k: usize,
    pub trials: u32,
    pub successes: u32,
    pub seed: u64,
    pub collision_exhibit: CollisionExhibit,
}

/// Splits the dependence witness into its two bases-aligned halves,
/// both with coefficients +1, and checks their syntheses agree exactly.
fn collision_exhibit(d: &ScaledDictionary) -> CollisionExhibit {
    let witness = dependent_set(d.spec());
    let mut left = SparseVector {
        support: Vec::new(),
        values: Vec::new(),
    };
    let mut right = SparseVector {
        support: Vec::new(),
        values: Vec::new(),
    };
    for (&idx, &coeff) in witness.column_indices.iter().zip(&witness.coefficients) {
        let side = match d.column(idx).label {
            ColumnLabel::Character { .. } => &mut left,
            ColumnLabel::Standard { .. } => &mut right,
        };
        side.support.push(idx);
        // The witness has +1 on character columns and −1 on standard
        // columns; moving the standard half across the equation makes
        // both sides all-ones.
        side.values.push(Rational::from_integer(coeff.abs()));
    }
    let synthesized_equal = synthesize(d, &left).expect("witness indices are in range")
        == synthesize(d, &right).expect("witness indices are in range");
    CollisionExhibit {
        left,
        right,
        synthesized_equal,
    }
}

/// Seeded end-to-end demonstration. Per trial: draw a size-k support
/// (uniform, via index sampling) and uniform nonzero integer values in
/// [−8, 8], synthesize the signal, run the exhaustive solver capped at
/// k, and count the trial as a success only when the solver returns the
/// planted vector exactly *and* flags it unique. Everything is
/// reproducible from the recorded ChaCha12 seed.
///
/// The sparsity k = floor((spark − 1)/2) is taken from a fresh
/// certificate, not from a closed form.
pub fn uniqueness_demo(spec: &FieldSpec, trials: u32, seed: u64) -> DemoReport {
    let certificate = certify(spec);
    let SparkConclusion::Exact(spark) = certificate.concluded_spark else {
        panic!("family certificates pin the spark exactly");
    };
    let k = ((spark - 1) / 2) as usize;
    let d = build_dictionary(spec);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut successes = 0u32;
    for _ in 0..trials {
        let mut support = sample(&mut rng, d.num_columns(), k).into_vec();
        support.sort_unstable();
        let values = (0..k)
            .map(|_| loop {
                let v: i64 = rng.gen_range(-8..=8);
                if v != 0 {
                    break Rational::from_integer(v);
                }
            })
            .collect();
        let planted = SparseVector { support, values };
        let signal = synthesize(&d, &planted).expect("sampled support is in range");
        let recovered = l0_solve(&d, &signal, k);
        if recovered.is_some_and(|solution| solution.unique_at_size && solution.vector == planted) {
            successes += 1;
        }
    }
    DemoReport {
        spec: *spec,
        k,
        trials,
        successes,
        seed,
        collision_exhibit: collision_exhibit(&d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(den: i64, entries: &[i64]) -> Vec<BigRational> {
        entries
            .iter()
            .map(|&e| BigRational::new(BigInt::from(e), BigInt::from(den)))
            .collect()
    }

    #[test]
    fn synthesize_matches_hand_columns() {
        let spec = FieldSpec::build(1, 1).unwrap();
        let d = build_dictionary(&spec);
        let empty = SparseVector {
            support: vec![],
            values: vec![],
        };
        assert_eq!(synthesize(&d, &empty).unwrap(), unit(1, &[0, 0, 0, 0]));

        let single = SparseVector {
            support: vec![8],
            values: vec![Rational::from_integer(1)],
        };
        assert_eq!(synthesize(&d, &single).unwrap(), unit(1, &[1, 0, 0, 0]));

        // First columns of the two character bases sum to e_0.
        let pair = SparseVector {
            support: vec![0, 4],
            values: vec![Rational::from_integer(1); 2],
        };
        assert_eq!(synthesize(&d, &pair).unwrap(), unit(1, &[1, 0, 0, 0]));

        let half = SparseVector {
            support: vec![0],
            values: vec![Rational::from_integer(1)],
        };
        assert_eq!(synthesize(&d, &half).unwrap(), unit(2, &[1, 1, 1, 1]));
    }

    #[test]
    fn synthesize_rejects_malformed_vectors() {
        let spec = FieldSpec::build(1, 1).unwrap();
        let d = build_dictionary(&spec);
        let oor = SparseVector {
            support: vec![12],
            values: vec![Rational::from_integer(1)],
        };
        assert_eq!(
            synthesize(&d, &oor),
            Err(RecoverError::IndexOutOfRange {
                index: 12,
                columns: 12
            })
        );
        let dup = SparseVector {
            support: vec![3, 3],
            values: vec![Rational::from_integer(1); 2],
        };
        assert_eq!(
            synthesize(&d, &dup),
            Err(RecoverError::DuplicateIndex { index: 3 })
        );
        let zero = SparseVector {
            support: vec![3],
            values: vec![Rational::from_integer(0)],
        };
        assert_eq!(
            synthesize(&d, &zero),
            Err(RecoverError::ZeroValue { position: 0 })
        );
        let skew = SparseVector {
            support: vec![3],
            values: vec![],
        };
        assert_eq!(
            synthesize(&d, &skew),
            Err(RecoverError::LengthMismatch {
                support: 1,
                values: 0
            })
        );
    }

    #[test]
    fn synthesize_is_linear_on_random_pairs() {
        use rand::rngs::StdRng;
        use rand::SeedableRng as _;
        let spec = FieldSpec::build(1, 2).unwrap();
        let d = build_dictionary(&spec);
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let mut support = sample(&mut rng, d.num_columns(), 3).into_vec();
            support.sort_unstable();
            let draw = |rng: &mut StdRng| loop {
                let v = rng.gen_range(-5i64..=5);
                if v != 0 {
                    break Rational::from_integer(v);
                }
            };
            let x = SparseVector {
                support: support.clone(),
                values: (0..3).map(|_| draw(&mut rng)).collect(),
            };
            let y = SparseVector {
                support: support.clone(),
                values: (0..3).map(|_| draw(&mut rng)).collect(),
            };
            let sum_xy: Vec<Rational> = x
                .values
                .iter()
                .zip(&y.values)
                .map(|(&a, &b)| a + b)
                .collect();
            // Coefficients may cancel; keep only the surviving support.
            let mut z = SparseVector {
                support: vec![],
                values: vec![],
            };
            for (&s, &v) in support.iter().zip(&sum_xy) {
                if v.num() != 0 {
                    z.support.push(s);
                    z.values.push(v);
                }
            }
            let lhs: Vec<BigRational> = synthesize(&d, &x)
                .unwrap()
                .iter()
                .zip(synthesize(&d, &y).unwrap())
                .map(|(a, b)| a + b)
                .collect();
            assert_eq!(lhs, synthesize(&d, &z).unwrap());
        }
    }

    #[test]
    fn l0_solver_frozen_small_cases() {
        let spec = FieldSpec::build(1, 1).unwrap();
        let d = build_dictionary(&spec);

        let zero = vec![BigRational::zero(); 4];
        let solution = l0_solve(&d, &zero, 2).unwrap();
        assert_eq!(solution.vector.sparsity(), 0);
        assert!(solution.unique_at_size);

        // e_0 is one standard column; unique among single columns ...
        let e0 = unit(1, &[1, 0, 0, 0]);
        let solution = l0_solve(&d, &e0, 1).unwrap();
        assert_eq!(solution.vector.support, vec![8]);
        assert_eq!(solution.vector.values, vec![Rational::from_integer(1)]);
        assert!(solution.unique_at_size);

        // ... and still the minimizer with a looser cap, even though a
        // two-column representation of the same signal exists: sparsity
        // 1 is below spark/2 = 1.5, so the guarantee holds at the edge.
        let solution = l0_solve(&d, &e0, 2).unwrap();
        assert_eq!(solution.vector.support, vec![8]);
        assert!(solution.unique_at_size);

        // A vector needing two columns sits at sparsity 2 ≥ spark/2, so
        // the guarantee is off: e_0 − e_1 is written both by the
        // standard pair {8, 9} and, earlier in lexicographic order, by
        // the character pair {2, 3} whose sign patterns sum to it.
        let diff = unit(1, &[1, -1, 0, 0]);
        let solution = l0_solve(&d, &diff, 2).unwrap();
        assert_eq!(solution.vector.support, vec![2, 3]);
        assert_eq!(solution.vector.values, vec![Rational::from_integer(1); 2]);
        assert!(!solution.unique_at_size);

        // No representation of a generic vector within a zero cap.
        assert_eq!(l0_solve(&d, &e0, 0), None);
    }

    #[test]
    fn l0_solver_flags_non_unique_representations() {
        // The minimal dependence c0 + c4 = c8 drives both halves of
        // this test: first the solver must prefer the size-1 rewrite of
        // a planted size-2 vector, then a same-size tie must drop the
        // uniqueness flag.
        let spec = FieldSpec::build(1, 1).unwrap();
        let d = build_dictionary(&spec);
        let pair = SparseVector {
            support: vec![0, 4],
            values: vec![Rational::from_integer(1); 2],
        };
        let signal = synthesize(&d, &pair).unwrap();
        let solution = l0_solve(&d, &signal, 2).unwrap();
        assert_eq!(solution.vector.support, vec![8]);
        assert!(solution.unique_at_size);

        // A genuine same-size tie needs sparsity ≥ spark/2; at spark 3
        // that means size 2: v = c0 + c8 rewrites via c8 = c0 + c4 as
        // 2·c0 + c4 (and as 2·c8 − c4), so several size-2 supports are
        // consistent and none is below the uniqueness threshold.
        let mixed = SparseVector {
            support: vec![0, 8],
            values: vec![Rational::from_integer(1); 2],
        };
        let signal = synthesize(&d, &mixed).unwrap();
        let solution = l0_solve(&d, &signal, 2).unwrap();
        assert_eq!(
            solution.vector.support,
            vec![0, 4],
            "lexicographically first tie"
        );
        assert_eq!(
            solution.vector.values,
            vec![Rational::from_integer(2), Rational::from_integer(1)]
        );
        assert!(
            !solution.unique_at_size,
            "size-2 ties above spark/2 must be flagged"
        );
    }

    #[test]
    fn collision_exhibit_splits_the_witness() {
        let spec = FieldSpec::build(1, 1).unwrap();
        let d = build_dictionary(&spec);
        let exhibit = collision_exhibit(&d);
        assert_eq!(exhibit.left.support, vec![0, 4]);
        assert_eq!(exhibit.right.support, vec![8]);
        assert!(exhibit
            .left
            .values
            .iter()
            .all(|v| *v == Rational::from_integer(1)));
        assert!(exhibit
            .right
            .values
            .iter()
            .all(|v| *v == Rational::from_integer(1)));
        assert!(exhibit.synthesized_equal);
    }

    #[test]
    fn demo_smoke_run_is_reproducible() {
        let spec = FieldSpec::build(1, 1).unwrap();
        let report = uniqueness_demo(&spec, 5, 424242);
        assert_eq!(report.k, 1);
        assert_eq!((report.trials, report.successes), (5, 5));
        assert_eq!(report.seed, 424242);
        assert!(report.collision_exhibit.synthesized_equal);
        // Same seed, same report — including the planted draws.
        assert_eq!(uniqueness_demo(&spec, 5, 424242), report);
    }

    #[test]
    fn demo_report_serde_shape() {
        let spec = FieldSpec::build(1, 1).unwrap();
        let report = uniqueness_demo(&spec, 2, 7);
        let json = serde_json::to_value(&report).unwrap();
        let keys: Vec<&str> = json
            .as_object()
            .unwrap()
            .keys()
            .map(|k| k.as_str())
            .collect();
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        assert_eq!(
            sorted,
            [
                "collision_exhibit",
                "k",
                "seed",
                "spec",
                "successes",
                "trials"
            ]
        );
        assert_eq!(
            json["collision_exhibit"]["left"]["support"],
            serde_json::json!([0, 4])
        );
        let back: DemoReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, report);
    }
}
