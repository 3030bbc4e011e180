//! The q+1 orthonormal bases and their integer-scaled union.
//!
//! Over the tower F_{2^r} ⊆ F_{2^m} ⊆ F_{2^n} (m = t·r, n = 2m, q = 2^r)
//! the dictionary joins q trace-character bases with the standard basis.
//! The character basis for a ∈ F_{2^r} has one unit column per b ∈ F_{2^n},
//! whose coordinate-x entry is
//!
//! ```text
//!     (−1)^( Tr_1^m(a·x^{2^m+1}) + Tr_1^n(b·x) ) / 2^m .
//! ```
//!
//! Columns are stored multiplied by 2^m so that every downstream check
//! (Gram entries, dependence relations, rank) runs in exact integer
//! arithmetic: character columns hold ±1 entries, standard columns a
//! single 2^m. Squared column norms are then uniformly 2^{2m}.

use alloc::{format, string::String, vec, vec::Vec};

use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::field::{FieldElement, FieldError, FieldSpec};

/// Identifies which basis a dictionary column belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ColumnLabel {
    /// Trace-character column B_{a,b} with a ∈ F_{2^r}, b ∈ F_{2^n}.
    Character { a: FieldElement, b: FieldElement },
    /// Standard basis column e_x.
    Standard { x: FieldElement },
}

impl ColumnLabel {
    /// Two columns are intra-basis when they come from the same character
    /// basis (equal a) or are both standard.
    pub fn same_basis(&self, other: &ColumnLabel) -> bool {
        match (self, other) {
            (ColumnLabel::Character { a: a1, .. }, ColumnLabel::Character { a: a2, .. }) => {
                a1 == a2
            }
            (ColumnLabel::Standard { .. }, ColumnLabel::Standard { .. }) => true,
            _ => false,
        }
    }

    /// Render for CSV headers and manifests: `a=<hex>,b=<hex>` for
    /// character columns, `e,x=<hex>` for standard ones.
    pub fn render(&self, spec: &FieldSpec) -> String {
        match self {
            ColumnLabel::Character { a, b } => {
                format!("a={},b={}", spec.hex(*a), spec.hex(*b))
            }
            ColumnLabel::Standard { x } => format!("e,x={}", spec.hex(*x)),
        }
    }
}

/// One dictionary column, stored ×2^m.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledColumn {
    pub label: ColumnLabel,
    pub entries: Vec<i64>,
}

/// The integer-scaled dictionary: (q+1)·2^n columns of dimension 2^n.
///
/// Column order is fixed: the q character bases first, a ascending by bit
/// value, with b ascending inside each basis, then the standard basis
/// with x ascending. The column of B_{a,b} therefore sits at index
/// `rank(a)·2^n + bits(b)` and e_x at `q·2^n + bits(x)`, which keeps
/// witness indices and exports stable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledDictionary {
    spec: FieldSpec,
    columns: Vec<ScaledColumn>,
}

impl ScaledDictionary {
    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    /// Ambient dimension 2^n (length of every column).
    pub fn rows(&self) -> usize {
        1usize << self.spec.n()
    }

    /// Stored columns equal true columns times 2^{scale_log2}.
    pub fn scale_log2(&self) -> u32 {
        self.spec.m()
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[ScaledColumn] {
        &self.columns
    }

    pub fn column(&self, index: usize) -> &ScaledColumn {
        &self.columns[index]
    }

    /// Exact inner product of two stored (scaled) columns.
    pub fn scaled_dot(&self, i: usize, j: usize) -> i64 {
        let a = &self.columns[i].entries;
        let b = &self.columns[j].entries;
        a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
    }

    /// Labels in column order, rendered for exports.
    pub fn column_labels(&self) -> Vec<String> {
        self.columns
            .iter()
            .map(|c| c.label.render(&self.spec))
            .collect()
    }
}

/// A set of columns with nonzero integer coefficients summing to the
/// exact zero vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyWitness {
    pub column_indices: Vec<usize>,
    pub coefficients: Vec<i64>,
}

impl DependencyWitness {
    pub fn size(&self) -> usize {
        self.column_indices.len()
    }
}

impl Serialize for DependencyWitness {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("DependencyWitness", 3)?;
        st.serialize_field("indices", &self.column_indices)?;
        st.serialize_field("coeffs", &self.coefficients)?;
        st.serialize_field("size", &self.size())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for DependencyWitness {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            indices: Vec<usize>,
            coeffs: Vec<i64>,
            size: usize,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.indices.len() != raw.coeffs.len() || raw.indices.len() != raw.size {
            return Err(D::Error::custom(
                "witness indices/coeffs/size lengths disagree",
            ));
        }
        Ok(DependencyWitness {
            column_indices: raw.indices,
            coefficients: raw.coeffs,
        })
    }
}

/// The ±1 entry of the character column B_{a,b} at coordinate x, before
/// scaling: (−1)^{Tr_1^m(a·x^{2^m+1}) + Tr_1^n(b·x)}.
fn character_entry(spec: &FieldSpec, a: FieldElement, b: FieldElement, x: FieldElement) -> i64 {
    // a ∈ F_{2^r} ⊆ F_{2^m} and x^{2^m+1} ∈ F_{2^m}, so the product stays
    // in F_{2^m} and the inner trace is well defined.
    let exp_m = spec.trace_bit(spec.mul(a, spec.norm(x)), spec.m()).unwrap();
    let exp_n = spec.trace_bit(spec.mul(b, x), spec.n()).unwrap();
    if (exp_m + exp_n).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// The character basis for a ∈ F_{2^r}: 2^n scaled ±1 columns, one per
/// b ∈ F_{2^n} in ascending bit order.
pub fn build_basis(spec: &FieldSpec, a: FieldElement) -> Result<Vec<ScaledColumn>, FieldError> {
    if !spec.in_subfield(a, spec.r())? {
        return Err(FieldError::OutsideSubfield { degree: spec.r() });
    }
    Ok(spec
        .elements()
        .map(|b| ScaledColumn {
            label: ColumnLabel::Character { a, b },
            entries: spec
                .elements()
                .map(|x| character_entry(spec, a, b, x))
                .collect(),
        })
        .collect())
}

/// The scaled standard basis: e_x carries a single 2^m at coordinate x.
pub fn build_standard_basis(spec: &FieldSpec) -> Vec<ScaledColumn> {
    let scale = 1i64 << spec.m();
    spec.elements()
        .map(|x| {
            let mut entries = vec![0i64; 1usize << spec.n()];
            entries[x.bits() as usize] = scale;
            ScaledColumn {
                label: ColumnLabel::Standard { x },
                entries,
            }
        })
        .collect()
}

/// Assemble the full dictionary of (q+1)·2^n columns in the documented
/// fixed order.
pub fn build_dictionary(spec: &FieldSpec) -> ScaledDictionary {
    let mut columns = Vec::with_capacity(((spec.q() as usize) + 1) << spec.n());
    // r | n always holds (n = 2tr), so the subfield enumeration cannot fail.
    for a in spec.subfield_elements(spec.r()).unwrap() {
        columns.extend(build_basis(spec, a).unwrap());
    }
    columns.extend(build_standard_basis(spec));
    ScaledDictionary {
        spec: *spec,
        columns,
    }
}

/// The index set S = {x : Tr_r^m(x^{2^m+1}) = 0 and x + x^{2^m} ∈ F_{2^r}},
/// ascending by bit value. Its members mark the standard columns of the
/// minimal dependence; |S| = 2^{m−r}.
pub fn build_s(spec: &FieldSpec) -> Vec<FieldElement> {
    spec.elements()
        .filter(|&x| {
            let norm_trace = spec.trace(spec.norm(x), spec.m(), spec.r()).unwrap();
            norm_trace.is_zero()
                && spec
                    .in_subfield(spec.add(x, spec.conjugate(x)), spec.r())
                    .unwrap()
        })
        .collect()
}

/// The explicit dependent column set: coefficient +1 on every B_{a,b}
/// with a ∈ F_{2^r} and b in the kernel of Tr_r^m on F_{2^m}, and −1 on
/// every e_x with x ∈ S. The signed sum of stored columns is the exact
/// zero vector, and the witness size is q^t + q^{t−1}.
pub fn dependent_set(spec: &FieldSpec) -> DependencyWitness {
    let order = 1usize << spec.n();
    let mut column_indices = Vec::new();
    let mut coefficients = Vec::new();

    let kernel: Vec<FieldElement> = spec
        .subfield_elements(spec.m())
        .unwrap()
        .into_iter()
        .filter(|&b| spec.trace(b, spec.m(), spec.r()).unwrap().is_zero())
        .collect();
    for (a_rank, _) in spec.subfield_elements(spec.r()).unwrap().iter().enumerate() {
        for &b in &kernel {
            column_indices.push(a_rank * order + b.bits() as usize);
            coefficients.push(1);
        }
    }

    let standard_base = (spec.q() as usize) * order;
    for x in build_s(spec) {
        column_indices.push(standard_base + x.bits() as usize);
        coefficients.push(-1);
    }

    DependencyWitness {
        column_indices,
        coefficients,
    }
}
