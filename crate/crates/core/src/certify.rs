//! Exact mutual coherence, spark lower bounds, named identity checks,
//! and assembly of machine-checkable spark certificates.
//!
//! Everything here is integer or rational arithmetic on the ×2^m scaled
//! dictionary, so "equals" always means exact equality — there are no
//! tolerances anywhere. A certificate concludes an exact spark only when
//! two independently computed quantities meet: the ceiled
//! (1 + 1/q)/μ lower bound and the size of a verified dependence
//! witness. It never quotes the closed-form answer.

use alloc::collections::BTreeMap;
use alloc::{format, string::String, vec, vec::Vec};
use core::fmt;
use core::ops::{Add, Div, Mul, Sub};

use num_rational::Ratio;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::construct::{
    build_dictionary, build_s, dependent_set, DependencyWitness, ScaledDictionary,
};
use crate::field::FieldSpec;

/// Largest extension degree for which the exhaustive identity checks
/// (all-pairs trace laws, full root searches, full Gram scans) stay
/// desk-scale.
pub const EXHAUSTIVE_DEGREE_MAX: u32 = 8;

/// How many Gram violations are recorded verbatim before only counting.
const MAX_RECORDED_VIOLATIONS: usize = 16;

// --- exact rationals -------------------------------------------------------

/// A reduced fraction with positive denominator, exact throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(Ratio<i64>);

impl Rational {
    /// Reduces and normalizes the sign into the numerator. Panics on a
    /// zero denominator.
    pub fn new(num: i64, den: i64) -> Rational {
        assert!(den != 0, "zero denominator");
        Rational(Ratio::new(num, den))
    }

    pub fn from_integer(v: i64) -> Rational {
        Rational(Ratio::from_integer(v))
    }

    pub fn num(&self) -> i64 {
        *self.0.numer()
    }

    pub fn den(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_positive(&self) -> bool {
        self.num() > 0
    }

    /// Smallest integer ≥ the value (spark bounds are integers).
    pub fn ceil_int(&self) -> i64 {
        self.0.ceil().to_integer()
    }

    fn recip(&self) -> Rational {
        assert!(self.num() != 0, "reciprocal of zero");
        Rational(self.0.recip())
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        Rational(self.0 - rhs.0)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(rhs.num() != 0, "division by zero");
        Rational(self.0 / rhs.0)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den() == 1 {
            write!(f, "{}", self.num())
        } else {
            write!(f, "{}/{}", self.num(), self.den())
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("Rational", 2)?;
        st.serialize_field("num", &self.num())?;
        st.serialize_field("den", &self.den())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            num: i64,
            den: i64,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.den == 0 {
            return Err(D::Error::custom("rational with zero denominator"));
        }
        Ok(Rational::new(raw.num, raw.den))
    }
}

// --- errors ----------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertifyError {
    /// Lower bounds require a strictly positive coherence (a single
    /// orthonormal basis has no spark at this layer).
    NonpositiveCoherence,
    /// The exhaustive identity suite is only run at desk scale.
    DegreeTooLargeForExhaustive { n: u32, max: u32 },
}

impl fmt::Display for CertifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertifyError::NonpositiveCoherence => {
                write!(f, "coherence must be positive to derive spark bounds")
            }
            CertifyError::DegreeTooLargeForExhaustive { n, max } => {
                write!(f, "exhaustive checks need n <= {max}, got n = {n}")
            }
        }
    }
}

impl core::error::Error for CertifyError {}

/// Why a dependence witness failed to verify.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessError {
    Empty,
    LengthMismatch {
        indices: usize,
        coefficients: usize,
    },
    IndexOutOfRange {
        index: usize,
        columns: usize,
    },
    DuplicateIndex {
        index: usize,
    },
    ZeroCoefficient {
        position: usize,
    },
    /// The signed column sum is nonzero at this coordinate.
    NonzeroResidual {
        coordinate: usize,
        value: i64,
    },
}

impl fmt::Display for WitnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessError::Empty => write!(f, "witness is empty"),
            WitnessError::LengthMismatch {
                indices,
                coefficients,
            } => {
                write!(f, "{indices} indices vs {coefficients} coefficients")
            }
            WitnessError::IndexOutOfRange { index, columns } => {
                write!(f, "column index {index} out of range for {columns} columns")
            }
            WitnessError::DuplicateIndex { index } => {
                write!(f, "column index {index} appears twice")
            }
            WitnessError::ZeroCoefficient { position } => {
                write!(f, "zero coefficient at witness position {position}")
            }
            WitnessError::NonzeroResidual { coordinate, value } => {
                write!(f, "residual {value} at coordinate {coordinate}")
            }
        }
    }
}

impl core::error::Error for WitnessError {}

// --- coherence and Gram classification -------------------------------------

/// Exact mutual coherence: the largest |⟨c_i, c_j⟩| over distinct true
/// (unit) columns, i.e. max |scaled dot| / 2^{2m}.
pub fn mutual_coherence(d: &ScaledDictionary) -> Rational {
    let mut max_abs = 0i64;
    for i in 0..d.num_columns() {
        for j in (i + 1)..d.num_columns() {
            max_abs = max_abs.max(d.scaled_dot(i, j).abs());
        }
    }
    Rational::new(max_abs, 1i64 << (2 * d.scale_log2()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramKind {
    /// A self inner product that should equal 2^{2m}.
    Diagonal,
    /// A same-basis pair that should be orthogonal.
    IntraBasis,
    /// A cross-basis pair whose scaled product should be ±2^m.
    CrossBasis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GramViolation {
    pub kind: GramKind,
    pub i: usize,
    pub j: usize,
    pub dot: i64,
}

/// Full classification of the scaled Gram matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramSummary {
    pub diagonal_count: u64,
    pub intra_pair_count: u64,
    /// Cross-basis pairs split by observed sign of the ±2^m product.
    /// Only the magnitude is asserted; the split is reported as data.
    pub cross_positive: u64,
    pub cross_negative: u64,
    pub max_offdiagonal_abs: i64,
    pub diagonal_violations: u64,
    pub intra_violations: u64,
    pub cross_violations: u64,
    /// First few violations verbatim (the counters above are complete).
    pub violations: Vec<GramViolation>,
}

impl GramSummary {
    pub fn pass(&self) -> bool {
        self.diagonal_violations == 0 && self.intra_violations == 0 && self.cross_violations == 0
    }

    pub fn cross_pair_count(&self) -> u64 {
        self.cross_positive + self.cross_negative + self.cross_violations
    }

    fn record(&mut self, v: GramViolation) {
        if self.violations.len() < MAX_RECORDED_VIOLATIONS {
            self.violations.push(v);
        }
    }
}

/// Scans every pair of columns once and classifies the exact inner
/// products: diagonals 2^{2m}, same-basis pairs 0, cross-basis pairs
/// ±2^m.
pub fn cross_coherence_check(d: &ScaledDictionary) -> GramSummary {
    let unit = 1i64 << d.scale_log2();
    let norm_sq = unit * unit;
    let mut s = GramSummary {
        diagonal_count: 0,
        intra_pair_count: 0,
        cross_positive: 0,
        cross_negative: 0,
        max_offdiagonal_abs: 0,
        diagonal_violations: 0,
        intra_violations: 0,
        cross_violations: 0,
        violations: Vec::new(),
    };
    for i in 0..d.num_columns() {
        s.diagonal_count += 1;
        let self_dot = d.scaled_dot(i, i);
        if self_dot != norm_sq {
            s.diagonal_violations += 1;
            s.record(GramViolation {
                kind: GramKind::Diagonal,
                i,
                j: i,
                dot: self_dot,
            });
        }
        for j in (i + 1)..d.num_columns() {
            let dot = d.scaled_dot(i, j);
            s.max_offdiagonal_abs = s.max_offdiagonal_abs.max(dot.abs());
            if d.column(i).label.same_basis(&d.column(j).label) {
                s.intra_pair_count += 1;
                if dot != 0 {
                    s.intra_violations += 1;
                    s.record(GramViolation {
                        kind: GramKind::IntraBasis,
                        i,
                        j,
                        dot,
                    });
                }
            } else if dot == unit {
                s.cross_positive += 1;
            } else if dot == -unit {
                s.cross_negative += 1;
            } else {
                s.cross_violations += 1;
                s.record(GramViolation {
                    kind: GramKind::CrossBasis,
                    i,
                    j,
                    dot,
                });
            }
        }
    }
    s
}

// --- spark lower bounds -----------------------------------------------------

/// The three classical spark lower bounds derived from coherence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    /// 1 + 1/μ — holds for any dictionary.
    pub de: Rational,
    /// 2/μ — holds for unions of two orthonormal bases; reported for
    /// reference but never used in conclusions (this family has q+1 ≥ 3
    /// bases).
    pub eb: Rational,
    /// (1 + 1/q)/μ — holds for unions of q+1 orthonormal bases; the
    /// bound this construction meets with equality.
    pub gn: Rational,
}

/// Computes the three bounds from an exact coherence and the basis
/// count parameter q.
pub fn lower_bounds(mu: Rational, q: u64) -> Result<Bounds, CertifyError> {
    if !mu.is_positive() {
        return Err(CertifyError::NonpositiveCoherence);
    }
    let one = Rational::from_integer(1);
    let inv_mu = mu.recip();
    Ok(Bounds {
        de: one + inv_mu,
        eb: Rational::from_integer(2) * inv_mu,
        gn: (one + Rational::new(1, q as i64)) * inv_mu,
    })
}

// --- witness verification ----------------------------------------------------

/// Checks that the witness indices are distinct, in range, carry nonzero
/// coefficients, and that the signed integer column sum is exactly zero.
pub fn verify_witness(d: &ScaledDictionary, w: &DependencyWitness) -> Result<(), WitnessError> {
    if w.column_indices.is_empty() {
        return Err(WitnessError::Empty);
    }
    if w.column_indices.len() != w.coefficients.len() {
        return Err(WitnessError::LengthMismatch {
            indices: w.column_indices.len(),
            coefficients: w.coefficients.len(),
        });
    }
    let mut seen = alloc::collections::BTreeSet::new();
    for (pos, (&idx, &coeff)) in w.column_indices.iter().zip(&w.coefficients).enumerate() {
        if idx >= d.num_columns() {
            return Err(WitnessError::IndexOutOfRange {
                index: idx,
                columns: d.num_columns(),
            });
        }
        if !seen.insert(idx) {
            return Err(WitnessError::DuplicateIndex { index: idx });
        }
        if coeff == 0 {
            return Err(WitnessError::ZeroCoefficient { position: pos });
        }
    }
    let mut acc = vec![0i64; d.rows()];
    for (&idx, &coeff) in w.column_indices.iter().zip(&w.coefficients) {
        for (slot, &e) in acc.iter_mut().zip(&d.column(idx).entries) {
            *slot += coeff * e;
        }
    }
    if let Some((coordinate, &value)) = acc.iter().enumerate().find(|(_, &v)| v != 0) {
        return Err(WitnessError::NonzeroResidual { coordinate, value });
    }
    Ok(())
}

// --- the named identity suite -------------------------------------------------

/// One entry of a certificate's check log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: String) -> Check {
        Check {
            name: String::from(name),
            pass,
            detail,
        }
    }
}

/// Runs the exhaustive identity checks that underpin the construction:
/// trace laws, the balanced character sum, the quadratic solvability
/// criterion, the paired trace-kernel counts, Gram structure of the
/// dictionary, the size of the dependent index set S, and the zero sum
/// of the dependence witness. Each check reports pass/fail with a
/// counterexample in the detail on failure; failures are data, not
/// errors.
///
/// Requires n ≤ [`EXHAUSTIVE_DEGREE_MAX`]: every check enumerates the
/// whole field (or all column pairs) with zero tolerance.
pub fn lemma_suite(spec: &FieldSpec) -> Result<Vec<Check>, CertifyError> {
    if spec.n() > EXHAUSTIVE_DEGREE_MAX {
        return Err(CertifyError::DegreeTooLargeForExhaustive {
            n: spec.n(),
            max: EXHAUSTIVE_DEGREE_MAX,
        });
    }
    let d = build_dictionary(spec);
    let w = dependent_set(spec);
    let gram = cross_coherence_check(&d);
    Ok(suite_checks(spec, &d, &w, &gram))
}

/// The check list shared by [`lemma_suite`] and [`certify`]; the caller
/// provides the dictionary, witness and Gram scan so nothing is built
/// twice.
fn suite_checks(
    spec: &FieldSpec,
    d: &ScaledDictionary,
    w: &DependencyWitness,
    gram: &GramSummary,
) -> Vec<Check> {
    let mut checks = vec![
        check_trace_additive(spec),
        check_trace_subfield_linear(spec),
        check_trace_frobenius_invariant(spec),
        check_trace_fiber_sizes(spec),
        check_trace_transitive(spec),
        check_character_sum(spec),
        check_quadratic_criterion(spec),
        check_trace_kernel_pair_counts(spec),
    ];
    checks.push(check_basis_gram(spec, gram));
    checks.push(check_cross_gram(spec, gram));
    checks.push(check_dependent_set_size(spec));
    checks.push(check_witness_zero_sum(spec, d, w));
    checks
}

/// trace(a + b) = trace(a) + trace(b) for every divisor target and every
/// pair, using a precomputed trace table per divisor.
fn check_trace_additive(spec: &FieldSpec) -> Check {
    let order = 1usize << spec.n();
    let mut cases = 0u64;
    for deg in spec.subfield_degrees() {
        let table: Vec<_> = spec
            .elements()
            .map(|x| spec.trace(x, spec.n(), deg).unwrap())
            .collect();
        for a in 0..order {
            for b in 0..order {
                cases += 1;
                if table[a ^ b] != spec.add(table[a], table[b]) {
                    return Check::new(
                        "trace_additive",
                        false,
                        format!("counterexample: target degree {deg}, a={a:#x}, b={b:#x}"),
                    );
                }
            }
        }
    }
    Check::new(
        "trace_additive",
        true,
        format!("{cases} (target, pair) cases"),
    )
}

/// trace(c·a) = c·trace(a) for c in the target subfield.
fn check_trace_subfield_linear(spec: &FieldSpec) -> Check {
    let mut cases = 0u64;
    for deg in spec.subfield_degrees() {
        let table: Vec<_> = spec
            .elements()
            .map(|x| spec.trace(x, spec.n(), deg).unwrap())
            .collect();
        for c in spec.subfield_elements(deg).unwrap() {
            for a in spec.elements() {
                cases += 1;
                let lhs = table[spec.mul(c, a).bits() as usize];
                let rhs = spec.mul(c, table[a.bits() as usize]);
                if lhs != rhs {
                    return Check::new(
                        "trace_subfield_linear",
                        false,
                        format!("counterexample: target degree {deg}, c={c}, a={a}"),
                    );
                }
            }
        }
    }
    Check::new(
        "trace_subfield_linear",
        true,
        format!("{cases} (target, scalar, element) cases"),
    )
}

/// trace(a^{2^deg}) = trace(a): the trace is constant on conjugacy
/// classes over the target subfield.
fn check_trace_frobenius_invariant(spec: &FieldSpec) -> Check {
    let mut cases = 0u64;
    for deg in spec.subfield_degrees() {
        let table: Vec<_> = spec
            .elements()
            .map(|x| spec.trace(x, spec.n(), deg).unwrap())
            .collect();
        for a in spec.elements() {
            cases += 1;
            let shifted = spec.frobenius(a, deg);
            if table[shifted.bits() as usize] != table[a.bits() as usize] {
                return Check::new(
                    "trace_frobenius_invariant",
                    false,
                    format!("counterexample: target degree {deg}, a={a}"),
                );
            }
        }
    }
    Check::new(
        "trace_frobenius_invariant",
        true,
        format!("{cases} (target, element) cases"),
    )
}

/// Every trace value is hit exactly 2^{n−deg} times.
fn check_trace_fiber_sizes(spec: &FieldSpec) -> Check {
    for deg in spec.subfield_degrees() {
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for a in spec.elements() {
            *counts
                .entry(spec.trace(a, spec.n(), deg).unwrap().bits())
                .or_insert(0) += 1;
        }
        let expected = 1u64 << (spec.n() - deg);
        if counts.len() != 1usize << deg || counts.values().any(|&c| c != expected) {
            return Check::new(
                "trace_fiber_sizes",
                false,
                format!("target degree {deg}: fibers {counts:?}, expected {expected} each"),
            );
        }
    }
    Check::new(
        "trace_fiber_sizes",
        true,
        format!(
            "uniform fibers of size 2^(n-deg) for all {} targets",
            spec.subfield_degrees().len()
        ),
    )
}

/// Tracing down to deg-l directly agrees with going through any
/// intermediate subfield.
fn check_trace_transitive(spec: &FieldSpec) -> Check {
    let mut cases = 0u64;
    for mid in spec.subfield_degrees() {
        for low in spec.subfield_degrees() {
            if mid % low != 0 {
                continue;
            }
            for a in spec.elements() {
                cases += 1;
                let direct = spec.trace(a, spec.n(), low).unwrap();
                let via = spec
                    .trace(spec.trace(a, spec.n(), mid).unwrap(), mid, low)
                    .unwrap();
                if direct != via {
                    return Check::new(
                        "trace_transitive",
                        false,
                        format!("counterexample: through degree {mid} to {low}, a={a}"),
                    );
                }
            }
        }
    }
    Check::new(
        "trace_transitive",
        true,
        format!("{cases} (tower, element) cases"),
    )
}

/// The absolute-trace character sums to zero over the whole field.
fn check_character_sum(spec: &FieldSpec) -> Check {
    let sum: i64 = spec
        .elements()
        .map(|x| {
            if spec.trace_bit(x, spec.n()).unwrap() == 0 {
                1i64
            } else {
                -1
            }
        })
        .sum();
    Check::new(
        "character_sum_zero",
        sum == 0,
        format!("signed sum {sum} over {} elements", 1u64 << spec.n()),
    )
}

/// x² + ax + b = 0 is solvable exactly when the trace criterion says so,
/// compared against an exhaustive root enumeration.
fn check_quadratic_criterion(spec: &FieldSpec) -> Check {
    let order = 1usize << spec.n();
    // Sweep roots once: for every (a, x), the pair (a, x² + ax) is solvable.
    let mut solvable = vec![false; order * order];
    for a in spec.elements().skip(1) {
        for x in spec.elements() {
            let b = spec.add(spec.square(x), spec.mul(a, x));
            solvable[(a.bits() as usize) * order + b.bits() as usize] = true;
        }
    }
    let mut cases = 0u64;
    for a in spec.elements().skip(1) {
        for b in spec.elements() {
            cases += 1;
            let by_criterion = spec.quadratic_solvable(a, b).unwrap();
            let by_roots = solvable[(a.bits() as usize) * order + b.bits() as usize];
            if by_criterion != by_roots {
                return Check::new(
                    "quadratic_root_criterion",
                    false,
                    format!(
                        "counterexample: a={a}, b={b}: criterion {by_criterion}, roots {by_roots}"
                    ),
                );
            }
        }
    }
    Check::new(
        "quadratic_root_criterion",
        true,
        format!("{cases} (a, b) pairs vs root sweep"),
    )
}

/// For y ∈ F_{2^m}, the number of b ∈ F_{2^m} with both Tr_1^m(by) = 0
/// and Tr_r^m(b) = 0 is 2^{m−r} when y ∈ F_{2^r} and 2^{m−r−1}
/// otherwise (the second case is empty when m = r).
fn check_trace_kernel_pair_counts(spec: &FieldSpec) -> Check {
    let (m, r) = (spec.m(), spec.r());
    let middle = spec.subfield_elements(m).unwrap();
    let mut small_cases = 0u64;
    let mut large_cases = 0u64;
    for &y in &middle {
        let count = middle
            .iter()
            .filter(|&&b| {
                spec.trace_bit(spec.mul(b, y), m).unwrap() == 0
                    && spec.trace(b, m, r).unwrap().is_zero()
            })
            .count() as u64;
        let expected = if spec.in_subfield(y, r).unwrap() {
            large_cases += 1;
            1u64 << (m - r)
        } else {
            small_cases += 1;
            1u64 << (m - r - 1)
        };
        if count != expected {
            return Check::new(
                "trace_kernel_pair_counts",
                false,
                format!("counterexample: y={y} gives {count}, expected {expected}"),
            );
        }
    }
    Check::new(
        "trace_kernel_pair_counts",
        true,
        format!("{large_cases} subfield and {small_cases} non-subfield values of y"),
    )
}

/// Diagonals are 2^{2m} and same-basis pairs are orthogonal: each of the
/// q+1 bases really is orthonormal after unscaling.
fn check_basis_gram(spec: &FieldSpec, gram: &GramSummary) -> Check {
    let pass = gram.diagonal_violations == 0 && gram.intra_violations == 0;
    let detail = if pass {
        format!(
            "{} diagonals = 2^{}, {} same-basis pairs = 0",
            gram.diagonal_count,
            2 * spec.m(),
            gram.intra_pair_count
        )
    } else {
        format!(
            "{} diagonal and {} same-basis violations; first: {:?}",
            gram.diagonal_violations,
            gram.intra_violations,
            gram.violations.first()
        )
    };
    Check::new("basis_gram_scaled_identity", pass, detail)
}

/// Every cross-basis scaled inner product is ±2^m. The sign split is
/// recorded as observed data only.
fn check_cross_gram(spec: &FieldSpec, gram: &GramSummary) -> Check {
    let pass = gram.cross_violations == 0;
    let detail = if pass {
        format!(
            "{} cross pairs with |dot| = 2^{}; signs +{} / -{}",
            gram.cross_pair_count(),
            spec.m(),
            gram.cross_positive,
            gram.cross_negative
        )
    } else {
        format!(
            "{} cross violations; first: {:?}",
            gram.cross_violations,
            gram.violations.first()
        )
    };
    Check::new("cross_gram_unimodular", pass, detail)
}

/// |S| = 2^{m−r}.
fn check_dependent_set_size(spec: &FieldSpec) -> Check {
    let s = build_s(spec);
    let expected = 1usize << (spec.m() - spec.r());
    Check::new(
        "dependent_set_size",
        s.len() == expected,
        format!("|S| = {}, expected {expected}", s.len()),
    )
}

/// The explicit dependent combination sums to the exact zero vector and
/// has q^t + q^{t−1} columns.
fn check_witness_zero_sum(spec: &FieldSpec, d: &ScaledDictionary, w: &DependencyWitness) -> Check {
    let expected = (1usize << spec.m()) + (1usize << (spec.m() - spec.r()));
    match verify_witness(d, w) {
        Ok(()) if w.size() == expected => Check::new(
            "witness_zero_sum",
            true,
            format!("{} columns sum to the zero vector exactly", w.size()),
        ),
        Ok(()) => Check::new(
            "witness_zero_sum",
            false,
            format!(
                "zero sum holds but size {} != expected {expected}",
                w.size()
            ),
        ),
        Err(e) => Check::new("witness_zero_sum", false, format!("{e}")),
    }
}

// --- certificates -------------------------------------------------------------

/// Either an exactly pinned spark or the best interval the evidence
/// supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparkConclusion {
    Exact(u64),
    Interval { lower: u64, upper: u64 },
}

impl Serialize for SparkConclusion {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            SparkConclusion::Exact(k) => serializer.serialize_u64(*k),
            SparkConclusion::Interval { lower, upper } => {
                serializer.serialize_str(&format!("interval [{lower}, {upper}]"))
            }
        }
    }
}

impl<'de> Deserialize<'de> for SparkConclusion {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<SparkConclusion, D::Error> {
        struct Visitor;
        impl serde::de::Visitor<'_> for Visitor {
            type Value = SparkConclusion;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "an integer spark or the string \"interval [lb, ub]\"")
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<SparkConclusion, E> {
                Ok(SparkConclusion::Exact(v))
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<SparkConclusion, E> {
                if v < 0 {
                    return Err(E::custom("spark cannot be negative"));
                }
                Ok(SparkConclusion::Exact(v as u64))
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<SparkConclusion, E> {
                let inner = v
                    .strip_prefix("interval [")
                    .and_then(|rest| rest.strip_suffix(']'))
                    .ok_or_else(|| E::custom("malformed interval string"))?;
                let (lo, hi) = inner
                    .split_once(", ")
                    .ok_or_else(|| E::custom("malformed interval string"))?;
                let lower = lo.parse().map_err(E::custom)?;
                let upper = hi.parse().map_err(E::custom)?;
                Ok(SparkConclusion::Interval { lower, upper })
            }
        }
        deserializer.deserialize_any(Visitor)
    }
}

/// The machine-checkable record: exact coherence, the three lower
/// bounds, the verified dependence witness, the conclusion, and the full
/// check log. Serializes with stable field names and exact integers
/// only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparkCertificate {
    pub field: FieldSpec,
    pub scale_log2: u32,
    pub coherence: Rational,
    pub bounds: Bounds,
    pub witness: DependencyWitness,
    pub concluded_spark: SparkConclusion,
    pub checks: Vec<Check>,
}

impl SparkCertificate {
    /// The witness size — an upper bound for the spark once verified.
    pub fn upper_bound(&self) -> usize {
        self.witness.size()
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// The conclusion rule: an exact spark is claimed only when the ceiled
/// (1 + 1/q)/μ bound meets a verified witness; otherwise the best
/// interval is reported. `fallback_upper` caps the interval when even
/// the witness failed (any 2^n + 1 vectors in R^{2^n} are dependent).
fn conclude(
    bounds: &Bounds,
    witness_ok: bool,
    witness_size: u64,
    fallback_upper: u64,
) -> SparkConclusion {
    let ceil_gn = bounds.gn.ceil_int() as u64;
    if witness_ok && ceil_gn == witness_size {
        return SparkConclusion::Exact(witness_size);
    }
    let lower = ceil_gn.max(bounds.de.ceil_int() as u64);
    let upper = if witness_ok {
        witness_size
    } else {
        fallback_upper
    };
    SparkConclusion::Interval { lower, upper }
}

/// Builds the dictionary, measures coherence from a full Gram scan,
/// verifies the dependence witness, runs the identity suite (at
/// exhaustive scale), and assembles the certificate. Nothing in the
/// conclusion trusts a closed-form value: both sides are computed.
pub fn certify(spec: &FieldSpec) -> SparkCertificate {
    let d = build_dictionary(spec);
    let gram = cross_coherence_check(&d);
    let coherence = Rational::new(gram.max_offdiagonal_abs, 1i64 << (2 * spec.m()));
    // q ≥ 2 bases plus the standard one guarantee cross pairs, so the
    // measured maximum is strictly positive.
    let bounds = lower_bounds(coherence, spec.q()).expect("cross pairs force positive coherence");
    let witness = dependent_set(spec);
    let witness_ok = verify_witness(&d, &witness).is_ok();

    let mut checks = if spec.n() <= EXHAUSTIVE_DEGREE_MAX {
        suite_checks(spec, &d, &witness, &gram)
    } else {
        // Beyond exhaustive scale only the scan-backed checks are kept.
        vec![
            check_basis_gram(spec, &gram),
            check_cross_gram(spec, &gram),
            check_witness_zero_sum(spec, &d, &witness),
        ]
    };
    checks.push(Check::new(
        "gn_bound_dominates_de",
        bounds.gn >= bounds.de,
        format!("gn = {} >= de = {}", bounds.gn, bounds.de),
    ));

    let concluded_spark = conclude(
        &bounds,
        witness_ok,
        witness.size() as u64,
        d.rows() as u64 + 1,
    );
    SparkCertificate {
        field: *spec,
        scale_log2: spec.m(),
        coherence,
        bounds,
        witness,
        concluded_spark,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldElement;

    #[test]
    fn rational_normalization_and_ceil() {
        assert_eq!(Rational::new(2, 4), Rational::new(1, 2));
        let r = Rational::new(1, -2);
        assert_eq!((r.num(), r.den()), (-1, 2), "sign lives in the numerator");
        assert_eq!(Rational::new(7, 2).ceil_int(), 4);
        assert_eq!(Rational::new(6, 2).ceil_int(), 3);
        assert_eq!(Rational::new(-1, 2).ceil_int(), 0);
        assert_eq!(format!("{}", Rational::new(9, 2)), "9/2");
        assert_eq!(format!("{}", Rational::from_integer(5)), "5");
        assert!(Rational::new(1, 3) < Rational::new(1, 2));
    }

    #[test]
    fn rational_serde_shape() {
        let json = serde_json::to_value(Rational::new(-2, 4)).unwrap();
        assert_eq!(json, serde_json::json!({"num": -1, "den": 2}));
        let back: Rational = serde_json::from_value(json).unwrap();
        assert_eq!(back, Rational::new(-1, 2));
        assert!(
            serde_json::from_value::<Rational>(serde_json::json!({"num": 1, "den": 0})).is_err()
        );
    }

    #[test]
    fn coherence_frozen_on_small_grid() {
        for (r, t, num, den) in [(1u32, 1u32, 1i64, 2i64), (1, 2, 1, 4), (2, 1, 1, 4)] {
            let spec = FieldSpec::build(r, t).unwrap();
            let d = build_dictionary(&spec);
            assert_eq!(mutual_coherence(&d), Rational::new(num, den), "r={r} t={t}");
        }
    }

    #[test]
    fn bounds_frozen_values() {
        let b = lower_bounds(Rational::new(1, 2), 2).unwrap();
        assert_eq!(
            (b.de, b.eb, b.gn),
            (
                Rational::from_integer(3),
                Rational::from_integer(4),
                Rational::from_integer(3)
            )
        );
        let b = lower_bounds(Rational::new(1, 4), 2).unwrap();
        assert_eq!(b.gn, Rational::from_integer(6));
        let b = lower_bounds(Rational::new(1, 4), 4).unwrap();
        assert_eq!(b.gn, Rational::from_integer(5));
        // A non-integer bound ceils upward.
        let b = lower_bounds(Rational::new(1, 3), 2).unwrap();
        assert_eq!(b.gn, Rational::new(9, 2));
        assert_eq!(b.gn.ceil_int(), 5);
        assert_eq!(
            lower_bounds(Rational::from_integer(0), 2),
            Err(CertifyError::NonpositiveCoherence)
        );
    }

    #[test]
    fn gram_classification_smallest_case() {
        let spec = FieldSpec::build(1, 1).unwrap();
        let d = build_dictionary(&spec);
        let g = cross_coherence_check(&d);
        assert!(g.pass());
        assert_eq!(g.diagonal_count, 12);
        // Three bases of four columns: 3 · C(4,2) = 18 intra pairs; the
        // remaining 66 − 18 = 48 pairs are cross-basis.
        assert_eq!(g.intra_pair_count, 18);
        assert_eq!(g.cross_pair_count(), 48);
        assert_eq!(g.cross_positive + g.cross_negative, 48);
        assert_eq!(g.max_offdiagonal_abs, 2);
        assert!(g.violations.is_empty());
    }

    #[test]
    fn witness_verification_error_paths() {
        let spec = FieldSpec::build(1, 1).unwrap();
        let d = build_dictionary(&spec);
        let good = dependent_set(&spec);
        assert_eq!(verify_witness(&d, &good), Ok(()));

        let empty = DependencyWitness {
            column_indices: vec![],
            coefficients: vec![],
        };
        assert_eq!(verify_witness(&d, &empty), Err(WitnessError::Empty));

        // Dropping one column of a minimal dependence leaves an
        // independent set: the residual must be nonzero.
        let truncated = DependencyWitness {
            column_indices: good.column_indices[..2].to_vec(),
            coefficients: good.coefficients[..2].to_vec(),
        };
        assert!(matches!(
            verify_witness(&d, &truncated),
            Err(WitnessError::NonzeroResidual { .. })
        ));

        let out_of_range = DependencyWitness {
            column_indices: vec![0, 99],
            coefficients: vec![1, 1],
        };
        assert_eq!(
            verify_witness(&d, &out_of_range),
            Err(WitnessError::IndexOutOfRange {
                index: 99,
                columns: 12
            })
        );

        let duplicated = DependencyWitness {
            column_indices: vec![3, 3],
            coefficients: vec![1, -1],
        };
        assert_eq!(
            verify_witness(&d, &duplicated),
            Err(WitnessError::DuplicateIndex { index: 3 })
        );

        let zero_coeff = DependencyWitness {
            column_indices: vec![0, 1],
            coefficients: vec![1, 0],
        };
        assert_eq!(
            verify_witness(&d, &zero_coeff),
            Err(WitnessError::ZeroCoefficient { position: 1 })
        );
    }

    #[test]
    fn suite_names_and_passes() {
        let spec = FieldSpec::build(1, 2).unwrap();
        let checks = lemma_suite(&spec).unwrap();
        let names: Vec<&str> = checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "trace_additive",
                "trace_subfield_linear",
                "trace_frobenius_invariant",
                "trace_fiber_sizes",
                "trace_transitive",
                "character_sum_zero",
                "quadratic_root_criterion",
                "trace_kernel_pair_counts",
                "basis_gram_scaled_identity",
                "cross_gram_unimodular",
                "dependent_set_size",
                "witness_zero_sum",
            ]
        );
        for c in &checks {
            assert!(c.pass, "{}: {}", c.name, c.detail);
        }
        // The quadratic check really sweeps all 240 pairs of GF(16).
        let quad = checks
            .iter()
            .find(|c| c.name == "quadratic_root_criterion")
            .unwrap();
        assert!(quad.detail.starts_with("240 "), "{}", quad.detail);
    }

    #[test]
    fn suite_rejects_beyond_exhaustive_scale() {
        let spec = FieldSpec::build(3, 2).unwrap();
        assert_eq!(
            lemma_suite(&spec),
            Err(CertifyError::DegreeTooLargeForExhaustive { n: 12, max: 8 })
        );
    }

    #[test]
    fn kernel_pair_counts_cover_the_m_equals_r_edge() {
        // t = 1 collapses F_{2^r} = F_{2^m}: every y is a subfield value
        // and the kernel of Tr_r^m is {0} alone.
        let spec = FieldSpec::build(2, 1).unwrap();
        let check = check_trace_kernel_pair_counts(&spec);
        assert!(check.pass, "{}", check.detail);
        assert!(
            check.detail.contains("4 subfield and 0 non-subfield"),
            "{}",
            check.detail
        );
    }

    #[test]
    fn certificates_frozen_small_cases() {
        let cert = certify(&FieldSpec::build(1, 1).unwrap());
        assert_eq!(cert.coherence, Rational::new(1, 2));
        assert_eq!(cert.bounds.de, Rational::from_integer(3));
        assert_eq!(cert.bounds.eb, Rational::from_integer(4));
        assert_eq!(cert.bounds.gn, Rational::from_integer(3));
        assert_eq!(cert.concluded_spark, SparkConclusion::Exact(3));
        assert_eq!(cert.upper_bound(), 3);
        assert_eq!(cert.scale_log2, 1);
        assert!(cert.all_checks_pass());

        let cert = certify(&FieldSpec::build(2, 1).unwrap());
        assert_eq!(cert.coherence, Rational::new(1, 4));
        assert_eq!(cert.bounds.gn, Rational::from_integer(5));
        assert_eq!(cert.concluded_spark, SparkConclusion::Exact(5));
    }

    #[test]
    fn conclusion_logic_covers_interval_paths() {
        let bounds = Bounds {
            de: Rational::from_integer(5),
            eb: Rational::from_integer(8),
            gn: Rational::new(9, 2),
        };
        // ceil(gn) = 5 but the witness has 6 columns: no exact claim.
        assert_eq!(
            conclude(&bounds, true, 6, 17),
            SparkConclusion::Interval { lower: 5, upper: 6 }
        );
        // A failed witness falls back to the trivial upper bound.
        assert_eq!(
            conclude(&bounds, false, 6, 17),
            SparkConclusion::Interval {
                lower: 5,
                upper: 17
            }
        );
        assert_eq!(conclude(&bounds, true, 5, 17), SparkConclusion::Exact(5));
    }

    #[test]
    fn conclusion_serde_forms() {
        let exact = serde_json::to_value(SparkConclusion::Exact(3)).unwrap();
        assert_eq!(exact, serde_json::json!(3));
        let interval =
            serde_json::to_value(SparkConclusion::Interval { lower: 5, upper: 6 }).unwrap();
        assert_eq!(interval, serde_json::json!("interval [5, 6]"));
        for v in [exact, interval] {
            let back: SparkConclusion = serde_json::from_value(v.clone()).unwrap();
            assert_eq!(serde_json::to_value(back).unwrap(), v);
        }
        assert!(
            serde_json::from_value::<SparkConclusion>(serde_json::json!("interval [x]")).is_err()
        );
    }

    #[test]
    fn certificate_serde_schema_and_round_trip() {
        let cert = certify(&FieldSpec::build(1, 1).unwrap());
        let json = serde_json::to_value(&cert).unwrap();
        let obj = json.as_object().unwrap();
        let keys: Vec<&str> = obj.keys().map(|k| k.as_str()).collect();
        let mut expected = vec![
            "bounds",
            "checks",
            "coherence",
            "concluded_spark",
            "field",
            "scale_log2",
            "witness",
        ];
        expected.sort_unstable();
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, expected);
        assert_eq!(json["coherence"], serde_json::json!({"num": 1, "den": 2}));
        assert_eq!(json["concluded_spark"], serde_json::json!(3));
        assert_eq!(json["witness"]["size"], serde_json::json!(3));
        assert_eq!(json["field"]["modulus_hex"], serde_json::json!("0x7"));
        let back: SparkCertificate = serde_json::from_value(json).unwrap();
        assert_eq!(back, cert);
    }

    #[test]
    fn character_entry_reachable_through_labels() {
        // Smoke-check that the Gram maximum really comes from a
        // cross-basis pair at the smallest size.
        let spec = FieldSpec::build(1, 1).unwrap();
        let d = build_dictionary(&spec);
        let mut best = (0usize, 0usize, 0i64);
        for i in 0..d.num_columns() {
            for j in (i + 1)..d.num_columns() {
                let dot = d.scaled_dot(i, j).abs();
                if dot > best.2 {
                    best = (i, j, dot);
                }
            }
        }
        assert_eq!(best.2, 2);
        assert!(!d.column(best.0).label.same_basis(&d.column(best.1).label));
        let _ = FieldElement::ZERO;
    }
}
