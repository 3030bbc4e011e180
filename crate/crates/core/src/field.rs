//! Exact arithmetic in GF(2^n) with the subfield tower F_{2^r} ⊆ F_{2^m} ⊆ F_{2^n}.
//!
//! Elements are residues of GF(2)[x] modulo an irreducible degree-n
//! polynomial, stored as bit masks (bit i = coefficient of x^i). Addition
//! is XOR, multiplication is shift-and-add with modular reduction. The
//! tower parameters are m = t·r and n = 2m, so the fields of interest are
//! F_{2^r} (basis labels), F_{2^m} (trace targets, unit-circle norms) and
//! F_{2^n} (the ambient field indexing rows and columns).

use alloc::{format, string::String, vec::Vec};
use core::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Default cap on the extension degree n = 2tr. The ambient dimension is
/// 2^n, so larger fields stop being desk-scale.
pub const DEFAULT_DEGREE_CAP: u32 = 20;

/// Absolute ceiling on n. Polynomial products of two degree-(n-1)
/// residues must fit in the u64 scratch words used during reduction.
pub const HARD_DEGREE_CAP: u32 = 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldError {
    /// r and t must both be at least 1.
    ZeroParameter,
    /// Requested degree exceeds the configured cap.
    DegreeCapExceeded { n: u32, cap: u32 },
    /// Explicit modulus does not have the expected degree.
    WrongDegree { expected: u32, found: u32 },
    /// Explicit modulus is not irreducible over GF(2).
    ReducibleModulus { modulus: u64 },
    /// Subfield degree does not divide the relevant extension degree.
    NotADivisor { divisor: u32, degree: u32 },
    /// Element lies outside the subfield required by the operation.
    OutsideSubfield { degree: u32 },
    /// Operation is undefined for the zero element.
    ZeroElement,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::ZeroParameter => write!(f, "field parameters r and t must be positive"),
            FieldError::DegreeCapExceeded { n, cap } => {
                write!(f, "extension degree n={n} exceeds the size cap {cap}")
            }
            FieldError::WrongDegree { expected, found } => {
                write!(f, "modulus has degree {found}, expected {expected}")
            }
            FieldError::ReducibleModulus { modulus } => {
                write!(f, "modulus {modulus:#x} is reducible over GF(2)")
            }
            FieldError::NotADivisor { divisor, degree } => {
                write!(f, "{divisor} does not divide the extension degree {degree}")
            }
            FieldError::OutsideSubfield { degree } => {
                write!(f, "element does not lie in the subfield of degree {degree}")
            }
            FieldError::ZeroElement => write!(f, "operation is undefined for the zero element"),
        }
    }
}

impl core::error::Error for FieldError {}

/// An element of GF(2^n): bit i holds the coefficient of x^i in the
/// residue polynomial. Ordering and indexing follow the integer value of
/// the bit mask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElement(u64);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

/// A concrete model of GF(2^n) for the tower n = 2m, m = t·r.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldSpec {
    n: u32,
    m: u32,
    r: u32,
    t: u32,
    modulus: u64,
}

impl FieldSpec {
    /// Builds GF(2^{2tr}) with the canonical modulus: the irreducible
    /// degree-n polynomial whose bit encoding is numerically smallest.
    pub fn build(r: u32, t: u32) -> Result<FieldSpec, FieldError> {
        FieldSpec::build_capped(r, t, DEFAULT_DEGREE_CAP)
    }

    /// Same as [`FieldSpec::build`] with an explicit degree cap
    /// (clamped to [`HARD_DEGREE_CAP`]).
    pub fn build_capped(r: u32, t: u32, cap: u32) -> Result<FieldSpec, FieldError> {
        let (n, m) = tower_degrees(r, t, cap)?;
        let modulus = smallest_irreducible(n);
        Ok(FieldSpec {
            n,
            m,
            r,
            t,
            modulus,
        })
    }

    /// Builds the field over an explicitly chosen irreducible modulus.
    /// The modulus must be irreducible of degree exactly 2tr.
    pub fn with_modulus(r: u32, t: u32, modulus: u64) -> Result<FieldSpec, FieldError> {
        let (n, m) = tower_degrees(r, t, HARD_DEGREE_CAP)?;
        let found = poly_degree(modulus);
        if found != n as i32 {
            return Err(FieldError::WrongDegree {
                expected: n,
                found: found.max(0) as u32,
            });
        }
        if !is_irreducible(modulus) {
            return Err(FieldError::ReducibleModulus { modulus });
        }
        Ok(FieldSpec {
            n,
            m,
            r,
            t,
            modulus,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// m = t·r, the degree of the middle field; also the scale exponent.
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    /// q = 2^r, the number of trace-character bases.
    pub fn q(&self) -> u64 {
        1u64 << self.r
    }

    pub fn modulus_bits(&self) -> u64 {
        self.modulus
    }

    /// Number of field elements, 2^n.
    pub fn order(&self) -> u64 {
        1u64 << self.n
    }

    pub fn element(&self, bits: u64) -> FieldElement {
        assert!(
            bits < self.order(),
            "bit value {bits:#x} out of range for GF(2^{})",
            self.n
        );
        FieldElement(bits)
    }

    /// All field elements in ascending bit order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.order()).map(FieldElement)
    }

    /// Lowercase hex rendering padded to the field's nibble width.
    pub fn hex(&self, a: FieldElement) -> String {
        let width = self.n.div_ceil(4) as usize;
        format!("0x{:0width$x}", a.bits())
    }

    pub fn modulus_hex(&self) -> String {
        format!("{:#x}", self.modulus)
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(a.0 ^ b.0)
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(poly_mulmod(a.0, b.0, self.modulus))
    }

    pub fn square(&self, a: FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    /// a^e by square-and-multiply, with 0^0 = 1.
    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        let mut base = a;
        let mut e = e;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.square(base);
            e >>= 1;
        }
        acc
    }

    /// a^{2^k}, the k-th power of the Frobenius automorphism.
    pub fn frobenius(&self, a: FieldElement, k: u32) -> FieldElement {
        let mut acc = a;
        for _ in 0..k {
            acc = self.square(acc);
        }
        acc
    }

    /// The conjugate a ↦ a^{2^m}.
    pub fn conjugate(&self, a: FieldElement) -> FieldElement {
        self.frobenius(a, self.m)
    }

    /// a^{2^m + 1} = a · conj(a); always lies in F_{2^m}.
    pub fn norm(&self, a: FieldElement) -> FieldElement {
        self.mul(a, self.conjugate(a))
    }

    /// Multiplicative inverse via a^{2^n - 2}.
    pub fn inverse(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.is_zero() {
            return Err(FieldError::ZeroElement);
        }
        Ok(self.pow(a, self.order() - 2))
    }

    /// Tr_{to}^{from}(a) = a + a^{2^to} + ... + a^{2^{from-to}}.
    ///
    /// Requires to | from | n and a ∈ F_{2^from}; the result lies in
    /// F_{2^to}.
    pub fn trace(
        &self,
        a: FieldElement,
        from_deg: u32,
        to_deg: u32,
    ) -> Result<FieldElement, FieldError> {
        if to_deg == 0 || !from_deg.is_multiple_of(to_deg) {
            return Err(FieldError::NotADivisor {
                divisor: to_deg,
                degree: from_deg,
            });
        }
        if !self.in_subfield(a, from_deg)? {
            return Err(FieldError::OutsideSubfield { degree: from_deg });
        }
        let mut acc = FieldElement::ZERO;
        let mut cur = a;
        for _ in 0..from_deg / to_deg {
            acc = self.add(acc, cur);
            cur = self.frobenius(cur, to_deg);
        }
        debug_assert!(self.in_subfield(acc, to_deg).unwrap_or(false));
        Ok(acc)
    }

    /// The absolute trace Tr_1^{from}(a) as a bit.
    pub fn trace_bit(&self, a: FieldElement, from_deg: u32) -> Result<u8, FieldError> {
        let tr = self.trace(a, from_deg, 1)?;
        Ok(tr.bits() as u8)
    }

    /// Whether a lies in the subfield F_{2^deg}, i.e. a^{2^deg} = a.
    pub fn in_subfield(&self, a: FieldElement, deg: u32) -> Result<bool, FieldError> {
        if deg == 0 || !self.n.is_multiple_of(deg) {
            return Err(FieldError::NotADivisor {
                divisor: deg,
                degree: self.n,
            });
        }
        if deg == self.n {
            return Ok(true);
        }
        Ok(self.frobenius(a, deg) == a)
    }

    /// The 2^deg elements of F_{2^deg}, ascending by bit value.
    pub fn subfield_elements(&self, deg: u32) -> Result<Vec<FieldElement>, FieldError> {
        if deg == 0 || !self.n.is_multiple_of(deg) {
            return Err(FieldError::NotADivisor {
                divisor: deg,
                degree: self.n,
            });
        }
        let out: Vec<FieldElement> = self
            .elements()
            .filter(|&a| self.in_subfield(a, deg).unwrap())
            .collect();
        debug_assert_eq!(out.len(), 1usize << deg);
        Ok(out)
    }

    /// The unit circle U = {u : u^{2^m + 1} = 1}, ascending; |U| = 2^m + 1.
    pub fn unit_circle(&self) -> Vec<FieldElement> {
        let e = (1u64 << self.m) + 1;
        self.elements()
            .filter(|&u| self.pow(u, e) == FieldElement::ONE)
            .collect()
    }

    /// The unique factorization a = u·v with u ∈ U and v ∈ F_{2^m}^*.
    ///
    /// v is the square root in F_{2^m} of the norm a^{2^m+1}, and
    /// u = a/v. Uniqueness follows from gcd(2^m + 1, 2^m - 1) = 1.
    pub fn decompose_uv(
        &self,
        a: FieldElement,
    ) -> Result<(FieldElement, FieldElement), FieldError> {
        if a.is_zero() {
            return Err(FieldError::ZeroElement);
        }
        let norm = self.norm(a);
        // sqrt in F_{2^m} is the inverse of squaring: y ↦ y^{2^{m-1}}.
        let v = self.frobenius(norm, self.m - 1);
        let u = self.mul(a, self.inverse(v)?);
        debug_assert_eq!(self.mul(u, v), a);
        Ok((u, v))
    }

    /// Whether x² + ax + b = 0 has a root in F_{2^n} (a ≠ 0), decided by
    /// Tr_1^n(b/a²) = 0.
    pub fn quadratic_solvable(&self, a: FieldElement, b: FieldElement) -> Result<bool, FieldError> {
        if a.is_zero() {
            return Err(FieldError::ZeroElement);
        }
        let asq_inv = self.inverse(self.square(a))?;
        Ok(self.trace_bit(self.mul(b, asq_inv), self.n)? == 0)
    }

    /// Divisors of n in ascending order (subfield degrees of the tower).
    pub fn subfield_degrees(&self) -> Vec<u32> {
        (1..=self.n).filter(|d| self.n.is_multiple_of(*d)).collect()
    }
}

fn tower_degrees(r: u32, t: u32, cap: u32) -> Result<(u32, u32), FieldError> {
    if r == 0 || t == 0 {
        return Err(FieldError::ZeroParameter);
    }
    let cap = cap.min(HARD_DEGREE_CAP);
    let m = t
        .checked_mul(r)
        .ok_or(FieldError::DegreeCapExceeded { n: u32::MAX, cap })?;
    let n = m
        .checked_mul(2)
        .ok_or(FieldError::DegreeCapExceeded { n: u32::MAX, cap })?;
    if n > cap {
        return Err(FieldError::DegreeCapExceeded { n, cap });
    }
    Ok((n, m))
}

// --- GF(2)[x] on raw bit masks -------------------------------------------

/// Degree of the polynomial encoded by p, or -1 for the zero polynomial.
fn poly_degree(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

fn poly_mod(mut a: u64, f: u64) -> u64 {
    let df = poly_degree(f);
    debug_assert!(df >= 0);
    while poly_degree(a) >= df {
        a ^= f << (poly_degree(a) - df);
    }
    a
}

/// a·b mod f for already-reduced a, b.
fn poly_mulmod(mut a: u64, mut b: u64, f: u64) -> u64 {
    let df = poly_degree(f);
    debug_assert!(df >= 1);
    let mut acc = 0u64;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if poly_degree(a) == df {
            a ^= f;
        }
    }
    acc
}

fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = poly_mod(a, b);
        a = b;
        b = r;
    }
    a
}

/// Irreducibility over GF(2): f of degree d ≥ 1 is irreducible iff it
/// shares no factor with x^{2^k} - x for any k ≤ d/2 (that product
/// covers every irreducible of degree dividing k).
pub fn is_irreducible(f: u64) -> bool {
    let d = poly_degree(f);
    if d < 1 {
        return false;
    }
    let mut xq = 2u64 % f; // the polynomial x, reduced
    for _ in 1..=(d / 2) {
        xq = poly_mulmod(xq, xq, f);
        if poly_gcd(xq ^ 2, f) != 1 {
            return false;
        }
    }
    true
}

/// The irreducible degree-n polynomial with the smallest bit encoding.
pub fn smallest_irreducible(n: u32) -> u64 {
    assert!((1..=HARD_DEGREE_CAP).contains(&n));
    // Constant term must be 1, otherwise x divides.
    let mut cand = (1u64 << n) | 1;
    loop {
        if is_irreducible(cand) {
            return cand;
        }
        cand += 2;
        debug_assert!(cand < 1u64 << (n + 1), "no irreducible of degree {n} found");
    }
}

// --- serde: {n, r, t, modulus_hex} ----------------------------------------

impl Serialize for FieldSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("FieldSpec", 4)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("r", &self.r)?;
        st.serialize_field("t", &self.t)?;
        st.serialize_field("modulus_hex", &self.modulus_hex())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<FieldSpec, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n: u32,
            r: u32,
            t: u32,
            modulus_hex: String,
        }
        let raw = Raw::deserialize(deserializer)?;
        let digits = raw
            .modulus_hex
            .strip_prefix("0x")
            .unwrap_or(&raw.modulus_hex);
        let modulus = u64::from_str_radix(digits, 16)
            .map_err(|e| D::Error::custom(format!("bad modulus_hex: {e}")))?;
        let spec = FieldSpec::with_modulus(raw.r, raw.t, modulus)
            .map_err(|e| D::Error::custom(format!("bad field spec: {e}")))?;
        if spec.n != raw.n {
            return Err(D::Error::custom(format!(
                "declared n={} does not match 2tr={}",
                raw.n, spec.n
            )));
        }
        Ok(spec)
    }
}
