//! Exact-rational stochastic matrices and probability vectors.
//!
//! Entries follow the column-as-source convention: `m.get(i, j)` is the
//! probability of moving from state `j` to state `i`, so columns of a
//! stochastic matrix sum to one and a distribution evolves as `v' = M v`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `"p/q"` or an integer shorthand such as `"1"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Format(format!("not a rational: {text:?}"));
    match text.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(text.parse().map_err(|_| bad())?)),
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn in_unit_interval(r: &Rational) -> bool {
    !r.is_negative() && *r <= Rational::one()
}

/// Strength of a square nonnegative matrix, weakest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    General,
    ColumnStochastic,
    DoublyStochastic,
    Permutation,
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixKind::General => "general",
            MatrixKind::ColumnStochastic => "column-stochastic",
            MatrixKind::DoublyStochastic => "doubly-stochastic",
            MatrixKind::Permutation => "permutation",
        })
    }
}

/// Why a grid fell short of a stronger kind.
#[derive(Debug, Clone, PartialEq)]
pub enum SumViolation {
    Entry { row: usize, col: usize, value: Rational },
    Column { col: usize, sum: Rational },
    Row { row: usize, sum: Rational },
}

impl fmt::Display for SumViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SumViolation::Entry { row, col, value } => {
                write!(f, "entry ({row}, {col}) = {value} outside [0, 1]")
            }
            SumViolation::Column { col, sum } => write!(f, "column {col} sums to {sum}"),
            SumViolation::Row { row, sum } => write!(f, "row {row} sums to {sum}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub kind: MatrixKind,
    /// Every failed column/row/entry check, in index order.
    pub violations: Vec<SumViolation>,
}

/// Classifies a square grid by exact summation.
pub fn classify_matrix(grid: &[Vec<Rational>]) -> Result<Classification> {
    let n = check_square(grid)?;
    let mut violations = Vec::new();
    for (i, row) in grid.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if !in_unit_interval(v) {
                violations.push(SumViolation::Entry { row: i, col: j, value: v.clone() });
            }
        }
    }
    let entries_ok = violations.is_empty();
    let mut columns_ok = true;
    for j in 0..n {
        let sum: Rational = grid.iter().map(|row| &row[j]).sum();
        if !sum.is_one() {
            columns_ok = false;
            violations.push(SumViolation::Column { col: j, sum });
        }
    }
    let mut rows_ok = true;
    for (i, row) in grid.iter().enumerate() {
        let sum: Rational = row.iter().sum();
        if !sum.is_one() {
            rows_ok = false;
            violations.push(SumViolation::Row { row: i, sum });
        }
    }
    let kind = if !entries_ok || !columns_ok {
        MatrixKind::General
    } else if !rows_ok {
        MatrixKind::ColumnStochastic
    } else if grid.iter().flatten().all(|v| v.is_zero() || v.is_one()) {
        MatrixKind::Permutation
    } else {
        MatrixKind::DoublyStochastic
    };
    Ok(Classification { kind, violations })
}

fn check_square(grid: &[Vec<Rational>]) -> Result<usize> {
    let n = grid.len();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    for (row, r) in grid.iter().enumerate() {
        if r.len() != n {
            return Err(Error::NotSquare { row, len: r.len(), expected: n });
        }
    }
    Ok(n)
}

/// Square matrix of exact rationals in `[0, 1]`, tagged with its kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StochMatrix {
    n: usize,
    entries: Vec<Rational>,
    kind: MatrixKind,
}

impl StochMatrix {
    pub fn new(grid: Vec<Vec<Rational>>) -> Result<Self> {
        let n = check_square(&grid)?;
        for (i, row) in grid.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !in_unit_interval(v) {
                    return Err(Error::EntryOutOfRange { row: i, col: j, value: v.to_string() });
                }
            }
        }
        let kind = classify_matrix(&grid)?.kind;
        Ok(Self { n, entries: grid.into_iter().flatten().collect(), kind })
    }

    /// Convenience constructor from `(numerator, denominator)` pairs.
    pub fn from_ratios(rows: &[&[(i64, i64)]]) -> Result<Self> {
        Self::new(rows.iter().map(|r| r.iter().map(|&(p, q)| rat(p, q)).collect()).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self::permutation(&(0..n).collect::<Vec<_>>())
    }

    /// Matrix sending state `j` to `perm[j]`.
    pub fn permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let mut entries = vec![Rational::zero(); n * n];
        for (j, &i) in perm.iter().enumerate() {
            entries[i * n + j] = Rational::one();
        }
        let kind = classify_matrix(&Self::rows_of(n, &entries)).map(|c| c.kind).unwrap_or(MatrixKind::General);
        Self { n, entries, kind }
    }

    /// Every entry equal to `1/n`.
    pub fn uniform(n: usize) -> Self {
        let v = rat(1, n as i64);
        Self {
            n,
            entries: vec![v; n * n],
            kind: if n == 1 { MatrixKind::Permutation } else { MatrixKind::DoublyStochastic },
        }
    }

    fn rows_of(n: usize, entries: &[Rational]) -> Vec<Vec<Rational>> {
        entries.chunks(n).map(<[Rational]>::to_vec).collect()
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn is_doubly_stochastic(&self) -> bool {
        self.kind >= MatrixKind::DoublyStochastic
    }

    pub fn is_column_stochastic(&self) -> bool {
        self.kind >= MatrixKind::ColumnStochastic
    }

    pub fn get(&self, row: usize, col: usize) -> &Rational {
        &self.entries[row * self.n + col]
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        Self::rows_of(self.n, &self.entries)
    }

    pub fn column(&self, col: usize) -> Vec<Rational> {
        (0..self.n).map(|i| self.get(i, col).clone()).collect()
    }

    pub fn classification(&self) -> Classification {
        classify_matrix(&self.rows()).expect("stored matrix is square")
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let entries = (0..n * n).map(|k| self.entries[(k % n) * n + k / n].clone()).collect();
        Self { n, entries, kind: self.kind_of_transpose() }
    }

    fn kind_of_transpose(&self) -> MatrixKind {
        match self.kind {
            MatrixKind::DoublyStochastic | MatrixKind::Permutation => self.kind,
            _ => {
                let n = self.n;
                let entries: Vec<_> = (0..n * n).map(|k| self.entries[(k % n) * n + k / n].clone()).collect();
                classify_matrix(&Self::rows_of(n, &entries)).map(|c| c.kind).unwrap_or(MatrixKind::General)
            }
        }
    }

    /// Exact product `self · other`.
    pub fn matmul(&self, other: &StochMatrix) -> Result<StochMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        let n = self.n;
        let mut entries = vec![Rational::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = &self.entries[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other.entries[k * n + j];
                    if !b.is_zero() {
                        entries[i * n + j] += a * b;
                    }
                }
            }
        }
        StochMatrix::new(Self::rows_of(n, &entries))
    }

    /// Kronecker product; row/column `(a, b)` is at index `a * other.order() + b`.
    pub fn kron(&self, other: &StochMatrix) -> StochMatrix {
        let (p, q) = (self.n, other.n);
        let n = p * q;
        let mut entries = vec![Rational::zero(); n * n];
        for i in 0..p {
            for j in 0..p {
                let a = &self.entries[i * p + j];
                if a.is_zero() {
                    continue;
                }
                for k in 0..q {
                    for l in 0..q {
                        let b = &other.entries[k * q + l];
                        if !b.is_zero() {
                            entries[(i * q + k) * n + (j * q + l)] = a * b;
                        }
                    }
                }
            }
        }
        StochMatrix::new(Self::rows_of(n, &entries)).expect("products of [0,1] entries stay in [0,1]")
    }

    /// `self^exp` by repeated squaring.
    pub fn pow(&self, exp: u64) -> StochMatrix {
        let mut result = StochMatrix::identity(self.n);
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = result.matmul(&base).expect("same order");
            }
            e >>= 1;
            if e > 0 {
                base = base.matmul(&base).expect("same order");
            }
        }
        result
    }

    /// Raw product with a weight vector; no normalization assumptions.
    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        let n = self.n;
        let mut out = vec![Rational::zero(); n];
        for (j, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                let a = &self.entries[i * n + j];
                if !a.is_zero() {
                    *o += a * x;
                }
            }
        }
        out
    }

    /// Exact `M · v` for a column-stochastic `M`.
    pub fn apply(&self, v: &Distribution) -> Result<Distribution> {
        if self.n != v.len() {
            return Err(Error::DimensionMismatch { left: self.n, right: v.len() });
        }
        if !self.is_column_stochastic() {
            return Err(Error::NotStochastic);
        }
        Ok(Distribution { weights: self.mul_vec(&v.weights) })
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(|r| r.iter().map(to_f64).collect()).collect()
    }
}

impl fmt::Display for StochMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.entries.chunks(self.n) {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

pub fn matmul(a: &StochMatrix, b: &StochMatrix) -> Result<StochMatrix> {
    a.matmul(b)
}

pub fn kron(a: &StochMatrix, b: &StochMatrix) -> StochMatrix {
    a.kron(b)
}

pub fn apply(m: &StochMatrix, v: &Distribution) -> Result<Distribution> {
    m.apply(v)
}

/// Convex combination of `k` seeded random permutation matrices of order `n`.
///
/// Weights are random integers in `1..=9` normalized to sum to one, so
/// every term contributes at least `1/(9k)`.
pub fn random_doubly_stochastic(n: usize, k: usize, seed: u64) -> StochMatrix {
    assert!(n >= 1 && k >= 1, "order and term count must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<u32> = (0..k).map(|_| rng.random_range(1..=9)).collect();
    let total: u32 = raw.iter().sum();
    let mut entries = vec![Rational::zero(); n * n];
    for &w in &raw {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let weight = rat(w as i64, total as i64);
        for (j, &i) in perm.iter().enumerate() {
            entries[i * n + j] += &weight;
        }
    }
    StochMatrix::new(StochMatrix::rows_of(n, &entries)).expect("convex combination stays in [0,1]")
}

/// Probability vector with exact rational weights summing to one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Distribution {
    weights: Vec<Rational>,
}

impl Distribution {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if let Some(w) = weights.iter().find(|w| !in_unit_interval(w)) {
            return Err(Error::InvalidDistribution(format!("weight {w} outside [0, 1]")));
        }
        let sum: Rational = weights.iter().sum();
        if !sum.is_one() {
            return Err(Error::InvalidDistribution(format!("weights sum to {sum}")));
        }
        Ok(Self { weights })
    }

    pub fn point(n: usize, index: usize) -> Self {
        let mut weights = vec![Rational::zero(); n];
        weights[index] = Rational::one();
        Self { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<Rational> {
        self.weights
    }

    pub fn max(&self) -> &Rational {
        self.weights.iter().max().expect("non-empty")
    }

    pub fn min(&self) -> &Rational {
        self.weights.iter().min().expect("non-empty")
    }

    /// Total weight on the marked indices.
    pub fn mass_on(&self, marked: &[bool]) -> Rational {
        mass_on(&self.weights, marked)
    }
}

pub(crate) fn mass_on(weights: &[Rational], marked: &[bool]) -> Rational {
    weights.iter().zip(marked).filter(|(_, &m)| m).map(|(w, _)| w).sum()
}

// JSON: {"n": 2, "entries": [["1/2", "1/2"], ["1/2", "1/2"]]}

pub(crate) fn grid_to_strings(grid: &[Vec<Rational>]) -> Vec<Vec<String>> {
    grid.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect()
}

pub(crate) fn grid_from_strings(grid: &[Vec<String>]) -> Result<Vec<Vec<Rational>>> {
    grid.iter().map(|r| r.iter().map(|s| parse_rational(s)).collect()).collect()
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    entries: Vec<Vec<String>>,
}

impl Serialize for StochMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson { n: self.n, entries: grid_to_strings(&self.rows()) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for StochMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        let grid = grid_from_strings(&raw.entries).map_err(serde::de::Error::custom)?;
        if grid.len() != raw.n {
            return Err(serde::de::Error::custom(format!("n = {} but {} rows given", raw.n, grid.len())));
        }
        StochMatrix::new(grid).map_err(serde::de::Error::custom)
    }
}
