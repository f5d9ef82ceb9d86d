//! Sparse algebra of Pauli strings and complex-weighted Pauli sums.
//!
//! A Pauli string on `n` qubits is a tensor product of single-qubit Paulis
//! `{I, X, Y, Z}`. It is stored as a pair of bitmasks (`x`, `z`) where qubit
//! `k` carries `X` iff bit `k` of `x` is set, `Z` iff bit `k` of `z` is set,
//! and `Y` iff both are. Products, transposes and adjoints then reduce to
//! bit operations plus a phase in `{1, i, −1, −i}`.
//!
//! Conventions fixed here and relied on everywhere else:
//! * qubit 0 is the least significant bit of a basis index;
//! * `σᶻ|0⟩ = +|0⟩`, so `σ⁻ = (X − iY)/2 = |1⟩⟨0|`;
//! * textual form of a term is `(re,im) LABEL` with the label listing qubit 0
//!   first, e.g. `(0.5,-1) XIZ` for `0.5 − i` times `X₀ ⊗ I₁ ⊗ Z₂`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64;

use crate::{Error, Result};

/// Strings and sums refuse dense conversion above this many qubits unless a
/// caller raises the limit explicitly (`2^12 = 4096` rows).
pub const DENSE_QUBIT_LIMIT: usize = 12;

/// Coefficients with modulus at or below this are dropped by [`PauliSum::collect`].
pub const DEFAULT_DROP_TOL: f64 = 1e-12;

/// Single-qubit Pauli label. Ordering `I < X < Y < Z` defines the canonical
/// term order of collected sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    I,
    X,
    Y,
    Z,
}

impl Axis {
    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Axis::I,
            (true, false) => Axis::X,
            (true, true) => Axis::Y,
            (false, true) => Axis::Z,
        }
    }

    fn to_char(self) -> char {
        match self {
            Axis::I => 'I',
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Axis::I),
            'X' => Some(Axis::X),
            'Y' => Some(Axis::Y),
            'Z' => Some(Axis::Z),
            _ => None,
        }
    }
}

/// `i^k` for `k mod 4`.
fn i_pow(k: u32) -> Complex64 {
    match k & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Tensor product of single-qubit Paulis on a fixed number of qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: u64,
    z: u64,
    n: usize,
}

impl PauliString {
    /// The identity string on `n` qubits (`n ≤ 64`).
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1 && n <= 64, "qubit count {n} outside 1..=64");
        PauliString { x: 0, z: 0, n }
    }

    /// Build from per-qubit labels, `axes[0]` acting on qubit 0.
    pub fn from_axes(axes: &[Axis]) -> Self {
        let mut s = PauliString::identity(axes.len());
        for (k, &a) in axes.iter().enumerate() {
            s.set_axis(k, a);
        }
        s
    }

    /// Identity everywhere except `axis` on `qubit`.
    pub fn single(n: usize, qubit: usize, axis: Axis) -> Self {
        let mut s = PauliString::identity(n);
        s.set_axis(qubit, axis);
        s
    }

    fn set_axis(&mut self, qubit: usize, axis: Axis) {
        assert!(qubit < self.n, "qubit {qubit} outside 0..{}", self.n);
        let bit = 1u64 << qubit;
        let (xb, zb) = match axis {
            Axis::I => (false, false),
            Axis::X => (true, false),
            Axis::Y => (true, true),
            Axis::Z => (false, true),
        };
        self.x = if xb { self.x | bit } else { self.x & !bit };
        self.z = if zb { self.z | bit } else { self.z & !bit };
    }

    /// Label on one qubit.
    pub fn axis(&self, qubit: usize) -> Axis {
        assert!(qubit < self.n);
        let bit = 1u64 << qubit;
        Axis::from_bits(self.x & bit != 0, self.z & bit != 0)
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of qubits carrying `Y`.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Number of qubits carrying a non-identity label.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub(crate) fn x_mask(&self) -> u64 {
        self.x
    }

    pub(crate) fn z_mask(&self) -> u64 {
        self.z
    }

    /// Product of two strings: `self · other = phase · string`, with the
    /// phase in `{1, i, −1, −i}`.
    pub fn multiply(&self, other: &PauliString) -> Result<(Complex64, PauliString)> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let out = PauliString { x, z, n: self.n };
        // Writing each literal Pauli as i^{x·z} X^x Z^z and commuting the X
        // of `other` past the Z of `self` gives, per qubit, a phase exponent
        // x₁z₁ + x₂z₂ − x₃z₃ + 2·z₁x₂ (mod 4); the terms sum over qubits as
        // popcounts.
        let k = self.y_count() as i32 + other.y_count() as i32 - out.y_count() as i32
            + 2 * (self.z & other.x).count_ones() as i32;
        Ok((i_pow(k.rem_euclid(4) as u32), out))
    }

    /// Amplitude contribution when the string acts on basis state `col`:
    /// `P|col⟩ = factor · |col ^ x_mask⟩`.
    pub(crate) fn column_factor(&self, col: usize) -> Complex64 {
        let sign = if ((col as u64) & self.z).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
        i_pow(self.y_count()) * sign
    }

    /// Per-qubit labels as a text label, qubit 0 first.
    pub fn label(&self) -> String {
        (0..self.n).map(|k| self.axis(k).to_char()).collect()
    }

    fn cmp_axes(&self, other: &PauliString) -> std::cmp::Ordering {
        debug_assert_eq!(self.n, other.n);
        for k in 0..self.n {
            let ord = self.axis(k).cmp(&other.axis(k));
            if ord != std::cmp::Ordering::Equal {
                return ord;
            }
        }
        std::cmp::Ordering::Equal
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PauliString {
    /// Lexicographic in the per-qubit labels with `I < X < Y < Z`, qubit 0
    /// most significant; shorter strings sort first across lengths.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.n.cmp(&other.n).then_with(|| self.cmp_axes(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s.len() > 64 {
            return Err(Error::Domain(format!("invalid Pauli label {s:?}")));
        }
        let mut axes = Vec::with_capacity(s.len());
        for c in s.chars() {
            let a = Axis::from_char(c)
                .ok_or_else(|| Error::Domain(format!("invalid Pauli letter {c:?} in {s:?}")))?;
            axes.push(a);
        }
        Ok(PauliString::from_axes(&axes))
    }
}

/// A complex-weighted sum of Pauli strings on a fixed qubit count.
///
/// Terms are kept in insertion order until [`collect`](Self::collect) merges
/// duplicates and sorts canonically; every constructor that could produce
/// duplicates calls it.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: Vec<(Complex64, PauliString)>,
}

impl PauliSum {
    /// The empty sum (zero operator) on `n` qubits.
    pub fn zero(n: usize) -> Self {
        assert!(n >= 1 && n <= 64, "qubit count {n} outside 1..=64");
        PauliSum { n, terms: Vec::new() }
    }

    /// The identity operator on `n` qubits.
    pub fn identity(n: usize) -> Self {
        PauliSum { n, terms: vec![(Complex64::new(1.0, 0.0), PauliString::identity(n))] }
    }

    /// Build from `(coefficient, string)` pairs; all strings must share `n`.
    pub fn from_terms(n: usize, terms: Vec<(Complex64, PauliString)>) -> Result<Self> {
        for (_, s) in &terms {
            if s.qubit_count() != n {
                return Err(Error::DimensionMismatch { left: n, right: s.qubit_count() });
            }
        }
        Ok(PauliSum { n, terms })
    }

    /// Single-term sum `coeff · axis(qubit)`.
    pub fn single(n: usize, qubit: usize, axis: Axis, coeff: Complex64) -> Self {
        PauliSum { n, terms: vec![(coeff, PauliString::single(n, qubit, axis))] }
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    /// Number of stored terms (after `collect`, the number of distinct strings).
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[(Complex64, PauliString)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Append a term in place (no merging; call [`collect`](Self::collect)).
    pub fn push(&mut self, coeff: Complex64, string: PauliString) -> Result<()> {
        if string.qubit_count() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: string.qubit_count() });
        }
        self.terms.push((coeff, string));
        Ok(())
    }

    /// Merge duplicate strings, drop coefficients with `|c| ≤ drop_tol`, and
    /// sort terms canonically (`I < X < Y < Z`, qubit 0 first). Idempotent.
    pub fn collect(&self, drop_tol: f64) -> Self {
        let mut map: BTreeMap<PauliString, Complex64> = BTreeMap::new();
        for &(c, s) in &self.terms {
            *map.entry(s).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        let terms = map
            .into_iter()
            .filter(|(_, c)| c.norm() > drop_tol)
            .map(|(s, c)| (c, s))
            .collect();
        PauliSum { n: self.n, terms }
    }

    /// `self + other` (uncollected).
    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Ok(PauliSum { n: self.n, terms })
    }

    /// `c · self`.
    pub fn scaled(&self, c: Complex64) -> PauliSum {
        PauliSum {
            n: self.n,
            terms: self.terms.iter().map(|&(a, s)| (c * a, s)).collect(),
        }
    }

    /// Operator product `self · other`, collected. Term count of the result
    /// is at most the product of the operand term counts.
    pub fn multiply(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(ca, sa) in &self.terms {
            for &(cb, sb) in &other.terms {
                let (phase, s) = sa.multiply(&sb)?;
                terms.push((ca * cb * phase, s));
            }
        }
        Ok(PauliSum { n: self.n, terms }.collect(DEFAULT_DROP_TOL))
    }

    /// Hermitian adjoint: conjugate every coefficient (strings are Hermitian).
    pub fn adjoint(&self) -> PauliSum {
        PauliSum {
            n: self.n,
            terms: self.terms.iter().map(|&(c, s)| (c.conj(), s)).collect(),
        }
    }

    /// Transpose: flip the sign of every term with an odd number of `Y`s.
    pub fn transpose(&self) -> PauliSum {
        PauliSum {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|&(c, s)| (if s.y_count() & 1 == 1 { -c } else { c }, s))
                .collect(),
        }
    }

    /// Entrywise complex conjugate (= adjoint of the transpose).
    pub fn conjugate(&self) -> PauliSum {
        self.transpose().adjoint()
    }

    /// Sum of coefficient moduli — an upper bound on the operator norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.norm()).sum()
    }

    /// Dense matrix in the computational basis (qubit 0 = least significant
    /// bit). Linear in term count; refuses more than [`DENSE_QUBIT_LIMIT`]
    /// qubits — use [`to_dense_with_limit`](Self::to_dense_with_limit) to override.
    pub fn to_dense(&self) -> Result<Array2<Complex64>> {
        self.to_dense_with_limit(DENSE_QUBIT_LIMIT)
    }

    /// As [`to_dense`](Self::to_dense) with an explicit qubit limit.
    pub fn to_dense_with_limit(&self, limit: usize) -> Result<Array2<Complex64>> {
        if self.n > limit {
            return Err(Error::DenseLimit { requested: self.n, limit });
        }
        let dim = 1usize << self.n;
        let mut m = Array2::zeros((dim, dim));
        for &(c, s) in &self.terms {
            let x = s.x_mask() as usize;
            for col in 0..dim {
                m[[col ^ x, col]] += c * s.column_factor(col);
            }
        }
        Ok(m)
    }
}

impl fmt::Display for PauliSum {
    /// One term per `+`-joined clause: `(re,im) LABEL + (re,im) LABEL + …`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "(0,0) {}", PauliString::identity(self.n).label());
        }
        for (i, (c, s)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({},{}) {}", c.re, c.im, s.label())?;
        }
        Ok(())
    }
}

/// Parse one textual term `(re,im) LABEL`.
pub fn parse_term(s: &str) -> Result<(Complex64, PauliString)> {
    let s = s.trim();
    let inner_end = s
        .find(')')
        .ok_or_else(|| Error::Domain(format!("term {s:?} must start with a (re,im) pair")))?;
    if !s.starts_with('(') {
        return Err(Error::Domain(format!("term {s:?} must start with a (re,im) pair")));
    }
    let inner = &s[1..inner_end];
    let mut parts = inner.splitn(2, ',');
    let re = parts
        .next()
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .ok_or_else(|| Error::Domain(format!("missing real part in {s:?}")))?;
    let im = parts
        .next()
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .ok_or_else(|| Error::Domain(format!("missing imaginary part in {s:?}")))?;
    let re: f64 = re
        .parse()
        .map_err(|_| Error::Domain(format!("bad real part {re:?} in {s:?}")))?;
    let im: f64 = im
        .parse()
        .map_err(|_| Error::Domain(format!("bad imaginary part {im:?} in {s:?}")))?;
    let label = s[inner_end + 1..].trim();
    let string: PauliString = label.parse()?;
    Ok((Complex64::new(re, im), string))
}

impl FromStr for PauliSum {
    type Err = Error;

    /// Parse `+`- or newline-joined terms; all labels must agree in length.
    fn from_str(s: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for clause in s.split(['+', '\n']) {
            let clause = clause.trim();
            if clause.is_empty() {
                continue;
            }
            terms.push(parse_term(clause)?);
        }
        let n = match terms.first() {
            Some((_, s)) => s.qubit_count(),
            None => return Err(Error::Domain("empty Pauli sum text".into())),
        };
        PauliSum::from_terms(n, terms)
    }
}
