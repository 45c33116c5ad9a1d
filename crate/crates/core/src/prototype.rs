//! Unitary prototypes: unitary `U` with `|U_ij|² = S_ij` for a doubly
//! stochastic `S`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dsmat::StochMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::NotSquare { row, len: r.len(), expected: n });
        }
        if rows.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("complex entries must be finite".into()));
        }
        Ok(Self { n, entries: rows.into_iter().flatten().collect() })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Self { n, entries }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.entries.chunks(self.n).map(<[Complex64]>::to_vec).collect()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let entries = (0..n * n).map(|k| self.get(k % n, k / n).conj()).collect();
        Self { n, entries }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        let n = self.n;
        let entries = (0..n * n).map(|k| (0..n).map(|t| self.get(k / n, t) * other.get(t, k % n)).sum()).collect();
        Ok(Self { n, entries })
    }

    /// Largest entry of `|U U† − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.matmul(&self.adjoint()).expect("same order");
        let n = self.n;
        (0..n * n)
            .map(|k| {
                let target = if k / n == k % n { 1.0 } else { 0.0 };
                (g.entries[k] - Complex64::new(target, 0.0)).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("finite floats serialize")
    }
}

#[derive(Serialize, Deserialize)]
struct ComplexJson {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = self.rows();
        ComplexJson {
            re: rows.iter().map(|r| r.iter().map(|z| z.re).collect()).collect(),
            im: rows.iter().map(|r| r.iter().map(|z| z.im).collect()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ComplexJson::deserialize(d)?;
        if raw.re.len() != raw.im.len() || raw.re.iter().zip(&raw.im).any(|(a, b)| a.len() != b.len()) {
            return Err(serde::de::Error::custom("re and im grids differ in shape"));
        }
        let rows = raw
            .re
            .iter()
            .zip(&raw.im)
            .map(|(a, b)| a.iter().zip(b).map(|(&re, &im)| Complex64::new(re, im)).collect())
            .collect();
        ComplexMatrix::new(rows).map_err(serde::de::Error::custom)
    }
}

/// `U` is unitary and `|U_ij|²` matches `S_ij`, both entrywise within `tol`.
pub fn is_prototype(u: &ComplexMatrix, s: &StochMatrix, tol: f64) -> Result<bool> {
    if u.order() != s.order() {
        return Err(Error::DimensionMismatch { left: u.order(), right: s.order() });
    }
    let target = s.to_f64_rows();
    let n = u.order();
    let moduli = (0..n).all(|i| (0..n).all(|j| (u.get(i, j).norm_sqr() - target[i][j]).abs() <= tol));
    Ok(moduli && u.unitarity_defect() <= tol)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Unistochastic {
    Yes(ComplexMatrix),
    No,
}

const LINK_TOL: f64 = 1e-12;

fn polar(r: f64, theta: f64) -> Complex64 {
    Complex64::from_polar(r, theta)
}

/// Phases `θ` with `Σ a_j e^{iθ_j} = 0`, `θ_0 = 0`, for side lengths that
/// satisfy the triangle inequality.
fn closing_phases(a: [f64; 3]) -> [f64; 3] {
    if a[0] <= LINK_TOL || a[1] <= LINK_TOL {
        // the two remaining links are equal and cancel
        return [0.0, 0.0, PI];
    }
    let cos_gamma = ((a[0] * a[0] + a[1] * a[1] - a[2] * a[2]) / (2.0 * a[0] * a[1])).clamp(-1.0, 1.0);
    let theta1 = PI - cos_gamma.acos();
    let rest = -(Complex64::new(a[0], 0.0) + polar(a[1], theta1));
    let theta2 = if a[2] <= LINK_TOL { 0.0 } else { rest.arg() };
    [0.0, theta1, theta2]
}

/// Decides whether a 3×3 doubly stochastic matrix has a unitary prototype.
///
/// Rows 1 and 2 of a prototype are orthogonal iff the three links
/// `√(S_1j S_2j)` close a triangle; the third row then follows from
/// unitarity and its moduli from the column sums.
pub fn unistochastic_3x3(s: &StochMatrix) -> Result<Unistochastic> {
    if s.order() != 3 {
        return Err(Error::DimensionMismatch { left: s.order(), right: 3 });
    }
    if !s.is_doubly_stochastic() {
        return Err(Error::NotDoublyStochastic);
    }
    let m = s.to_f64_rows();
    let links = [0, 1, 2].map(|j| (m[0][j] * m[1][j]).sqrt());
    let mut sorted = links;
    sorted.sort_by(f64::total_cmp);
    if sorted[2] > sorted[0] + sorted[1] + LINK_TOL {
        return Ok(Unistochastic::No);
    }
    let phases = closing_phases(links);
    let r1: Vec<Complex64> = (0..3).map(|j| Complex64::new(m[0][j].sqrt(), 0.0)).collect();
    // Σ_j r1_j conj(r2_j) = Σ_j a_j e^{-iφ_j}, so r2 takes the negated phases
    let r2: Vec<Complex64> = (0..3).map(|j| polar(m[1][j].sqrt(), -phases[j])).collect();
    let cross = [r1[1] * r2[2] - r1[2] * r2[1], r1[2] * r2[0] - r1[0] * r2[2], r1[0] * r2[1] - r1[1] * r2[0]];
    let r3: Vec<Complex64> = cross.iter().map(|z| z.conj()).collect();
    let u = ComplexMatrix::new(vec![r1, r2, r3])?;
    if is_prototype(&u, s, DEFAULT_TOL)? {
        Ok(Unistochastic::Yes(u))
    } else {
        // numerically borderline triangle; fall back to a local search
        Ok(search_prototype(s, 8, 0)?.map_or(Unistochastic::No, Unistochastic::Yes))
    }
}

fn build(moduli: &[f64], phases: &[f64], n: usize) -> ComplexMatrix {
    let entries = moduli.iter().zip(phases).map(|(&r, &t)| polar(r, t)).collect();
    ComplexMatrix { n, entries }
}

/// `‖U U† − I‖_F²` and its gradient in the phases.
fn objective(u: &ComplexMatrix) -> (f64, Vec<f64>) {
    let n = u.order();
    let ud = u.adjoint();
    let mut g = u.matmul(&ud).expect("same order");
    for i in 0..n {
        g.entries[i * n + i] -= Complex64::new(1.0, 0.0);
    }
    let f = g.entries.iter().map(Complex64::norm_sqr).sum();
    let udg = ud.matmul(&g).expect("same order");
    let grad = (0..n * n).map(|k| -4.0 * (u.entries[k] * udg.get(k % n, k / n)).im).collect();
    (f, grad)
}

fn descend(moduli: &[f64], mut phases: Vec<f64>, n: usize, s: &StochMatrix) -> Option<ComplexMatrix> {
    let mut step = 0.5;
    let (mut f, mut grad) = objective(&build(moduli, &phases, n));
    for _ in 0..4000 {
        let u = build(moduli, &phases, n);
        if is_prototype(&u, s, DEFAULT_TOL).unwrap_or(false) {
            return Some(u);
        }
        let norm2: f64 = grad.iter().map(|g| g * g).sum();
        if norm2 < 1e-30 {
            return None;
        }
        // backtracking line search
        loop {
            let trial: Vec<f64> = phases.iter().zip(&grad).map(|(p, g)| p - step * g).collect();
            let (ft, gt) = objective(&build(moduli, &trial, n));
            if ft <= f - 1e-4 * step * norm2 {
                phases = trial;
                f = ft;
                grad = gt;
                step *= 2.0;
                break;
            }
            step *= 0.5;
            if step < 1e-14 {
                return None;
            }
        }
    }
    None
}

/// Best-effort search for a prototype: gradient descent on the unitarity
/// residual over entry phases, from all-zero phases, then a sign flip in
/// the last entry, then `restarts` seeded random starts. `None` only means
/// nothing was found within the budget.
pub fn search_prototype(s: &StochMatrix, restarts: usize, seed: u64) -> Result<Option<ComplexMatrix>> {
    if !s.is_doubly_stochastic() {
        return Err(Error::NotDoublyStochastic);
    }
    let n = s.order();
    let moduli: Vec<f64> = s.to_f64_rows().into_iter().flatten().map(f64::sqrt).collect();
    let mut starts = vec![vec![0.0; n * n]];
    let mut flipped = vec![0.0; n * n];
    flipped[n * n - 1] = PI;
    starts.push(flipped);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..restarts {
        starts.push((0..n * n).map(|_| rng.random_range(0.0..TAU)).collect());
    }
    Ok(starts.into_iter().find_map(|p| descend(&moduli, p, n, s)))
}
