//! Cellular homology of polygon complexes over Z and Z₂, and the maps induced
//! by orientation double covers.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::surface::{CellularCover, DoubleCover, GluingWord, SurfaceModel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomologyError {
    #[error("{0} is orientable and has no orientation double cover")]
    Orientable(String),
    #[error("boundary maps do not compose to zero")]
    NotAComplex,
    #[error("projection is not a chain map")]
    NotAChainMap,
}

/// Dense integer matrix with arbitrary-precision entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged matrix");
            for (j, &x) in r.iter().enumerate() {
                m.set(i, j, BigInt::from(x));
            }
        }
        m
    }

    pub fn from_columns(rows: usize, columns: &[Vec<BigInt>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: BigInt) {
        self.data[i * self.cols + j] = x;
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        (0..self.cols).map(|j| self.get(i, j).clone()).collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.data[idx] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "shape mismatch");
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum()).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Rows `from..` as a new matrix.
    pub fn row_slice(&self, from: usize) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.rows - from, self.cols);
        for i in from..self.rows {
            for j in 0..self.cols {
                out.set(i - from, j, self.get(i, j).clone());
            }
        }
        out
    }

    /// Columns `from..` as a new matrix.
    pub fn column_slice(&self, from: usize) -> IntMatrix {
        self.transpose().row_slice(from).transpose()
    }

    pub fn to_i64_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_i64().expect("entry fits in i64")).collect())
            .collect()
    }

    pub fn mod2(&self) -> Vec<Vec<u8>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| u8::from(self.get(i, j).is_odd())).collect()).collect()
    }

    fn row_add(&mut self, target: usize, source: usize, k: &BigInt) {
        for j in 0..self.cols {
            let add = self.get(source, j) * k;
            self.data[target * self.cols + j] += add;
        }
    }

    fn col_add(&mut self, target: usize, source: usize, k: &BigInt) {
        for i in 0..self.rows {
            let add = self.get(i, source) * k;
            self.data[i * self.cols + target] += add;
        }
    }

    fn row_swap(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn col_swap(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    fn row_neg(&mut self, i: usize) {
        for j in 0..self.cols {
            let idx = i * self.cols + j;
            self.data[idx] = -&self.data[idx];
        }
    }

    fn col_neg(&mut self, j: usize) {
        for i in 0..self.rows {
            let idx = i * self.cols + j;
            self.data[idx] = -&self.data[idx];
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows)
            .map(|i| format!("[{}]", self.row(i).iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")))
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> =
            (0..self.rows).map(|i| self.row(i).iter().map(|x| x.to_string()).collect()).collect();
        if rows.iter().flatten().all(|x| x.parse::<i64>().is_ok()) {
            self.to_i64_rows().serialize(s)
        } else {
            rows.serialize(s)
        }
    }
}

/// `U A V = D` with `U`, `V` unimodular and `D` diagonal, each diagonal entry
/// dividing the next.
#[derive(Debug, Clone)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
}

impl SmithForm {
    /// Nonzero diagonal entries.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols)).map(|i| self.d.get(i, i).clone()).filter(|x| !x.is_zero()).collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

struct Reducer {
    d: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
    v: IntMatrix,
    v_inv: IntMatrix,
}

impl Reducer {
    fn row_add(&mut self, target: usize, source: usize, k: &BigInt) {
        self.d.row_add(target, source, k);
        self.u.row_add(target, source, k);
        self.u_inv.col_add(source, target, &-k);
    }

    fn col_add(&mut self, target: usize, source: usize, k: &BigInt) {
        self.d.col_add(target, source, k);
        self.v.col_add(target, source, k);
        self.v_inv.row_add(source, target, &-k);
    }

    fn row_swap(&mut self, a: usize, b: usize) {
        self.d.row_swap(a, b);
        self.u.row_swap(a, b);
        self.u_inv.col_swap(a, b);
    }

    fn col_swap(&mut self, a: usize, b: usize) {
        self.d.col_swap(a, b);
        self.v.col_swap(a, b);
        self.v_inv.row_swap(a, b);
    }

    fn row_neg(&mut self, i: usize) {
        self.d.row_neg(i);
        self.u.row_neg(i);
        self.u_inv.col_neg(i);
    }

    /// Smallest nonzero `|entry|` in the trailing block, ties broken by row-major position.
    fn pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<((usize, usize), BigInt)> = None;
        for i in t..self.d.rows {
            for j in t..self.d.cols {
                let a = self.d.get(i, j).abs();
                if !a.is_zero() && best.as_ref().is_none_or(|(_, b)| a < *b) {
                    best = Some(((i, j), a));
                }
            }
        }
        best.map(|(p, _)| p)
    }
}

pub fn smith_normal_form(a: &IntMatrix) -> SmithForm {
    let (m, n) = (a.rows, a.cols);
    let mut r = Reducer {
        d: a.clone(),
        u: IntMatrix::identity(m),
        u_inv: IntMatrix::identity(m),
        v: IntMatrix::identity(n),
        v_inv: IntMatrix::identity(n),
    };
    for t in 0..m.min(n) {
        while let Some((pi, pj)) = r.pivot(t) {
            r.row_swap(t, pi);
            r.col_swap(t, pj);
            let p = r.d.get(t, t).clone();
            let mut clean = true;
            for i in t + 1..m {
                let k = r.d.get(i, t).div_floor(&p);
                if !k.is_zero() {
                    r.row_add(i, t, &-k);
                }
                clean &= r.d.get(i, t).is_zero();
            }
            for j in t + 1..n {
                let k = r.d.get(t, j).div_floor(&p);
                if !k.is_zero() {
                    r.col_add(j, t, &-k);
                }
                clean &= r.d.get(t, j).is_zero();
            }
            if !clean {
                continue;
            }
            let offender = (t + 1..m).find(|&i| (t + 1..n).any(|j| !r.d.get(i, j).is_multiple_of(&p)));
            match offender {
                Some(i) => r.row_add(t, i, &BigInt::one()),
                None => break,
            }
        }
        if r.d.get(t, t).is_negative() {
            r.row_neg(t);
        }
    }
    SmithForm { u: r.u, u_inv: r.u_inv, d: r.d, v: r.v, v_inv: r.v_inv }
}

/// Cellular chain complex `C₂ -> C₁ -> C₀` of a polygon complex.
#[derive(Debug, Clone)]
pub struct ChainComplex {
    /// `∂₁: C₁ -> C₀` (rows are vertices).
    pub d1: IntMatrix,
    /// `∂₂: C₂ -> C₁` (rows are edges).
    pub d2: IntMatrix,
    pub edge_names: Vec<String>,
}

impl ChainComplex {
    pub fn from_word(word: &GluingWord) -> Result<Self, HomologyError> {
        let (nv, _) = word.vertices();
        let ne = word.edge_count();
        let nf = word.faces().len();
        let mut d1 = IntMatrix::zeros(nv, ne);
        for (e, (s, t)) in word.edge_endpoints().into_iter().enumerate() {
            if s != t {
                d1.set(s, e, BigInt::from(-1));
                d1.set(t, e, BigInt::one());
            }
        }
        let mut d2 = IntMatrix::zeros(ne, nf);
        for (f, face) in word.faces().iter().enumerate() {
            for side in face {
                let cur = d2.get(side.edge, f) + side.exponent();
                d2.set(side.edge, f, cur);
            }
        }
        let complex = ChainComplex { d1, d2, edge_names: word.names().to_vec() };
        if !complex.d1.mul(&complex.d2).is_zero() {
            return Err(HomologyError::NotAComplex);
        }
        Ok(complex)
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.d1.rows, self.d1.cols, self.d2.cols]
    }

    /// Outgoing and incoming boundary maps at degree `k`.
    fn around(&self, k: usize) -> (IntMatrix, IntMatrix) {
        let [n0, _, n2] = self.dims();
        match k {
            0 => (IntMatrix::zeros(0, n0), self.d1.clone()),
            1 => (self.d1.clone(), self.d2.clone()),
            2 => (self.d2.clone(), IntMatrix::zeros(n2, 0)),
            _ => panic!("surfaces have no cells above dimension 2"),
        }
    }

    pub fn integral(&self, k: usize) -> IntegralGroup {
        let (out, inc) = self.around(k);
        IntegralGroup::compute(&out, &inc)
    }

    pub fn mod2(&self, k: usize) -> Z2Group {
        let (out, inc) = self.around(k);
        Z2Group::compute(&out.mod2(), &inc.mod2(), out.cols)
    }
}

/// `Z^free ⊕ Z/t₁ ⊕ …` with explicit cycle representatives.
#[derive(Debug, Clone)]
pub struct IntegralGroup {
    pub free: usize,
    pub torsion: Vec<BigInt>,
    /// Generators as cycles: free ones first, then torsion ones in the order of `torsion`.
    pub generators: Vec<Vec<BigInt>>,
    coordinates: IntMatrix,
}

impl IntegralGroup {
    /// Homology of `C_{k+1} --inc--> C_k --out--> C_{k-1}`.
    fn compute(out: &IntMatrix, inc: &IntMatrix) -> Self {
        let n = out.cols;
        let s = smith_normal_form(out);
        let r = s.rank();
        let kernel = s.v.column_slice(r);
        let to_kernel = s.v_inv.row_slice(r);
        let relations = to_kernel.mul(inc);
        let t = smith_normal_form(&relations);
        let basis = kernel.mul(&t.u_inv);
        let coords = t.u.mul(&to_kernel);
        let dim = n - r;
        let diag: Vec<BigInt> =
            (0..dim).map(|i| if i < t.d.cols { t.d.get(i, i).clone() } else { BigInt::zero() }).collect();
        let mut free_idx = Vec::new();
        let mut tors_idx = Vec::new();
        for (i, d) in diag.iter().enumerate() {
            if d.is_zero() {
                free_idx.push(i);
            } else if !d.is_one() {
                tors_idx.push(i);
            }
        }
        let order: Vec<usize> = free_idx.iter().chain(tors_idx.iter()).copied().collect();
        let mut coordinates = IntMatrix::zeros(order.len(), n);
        for (row, &i) in order.iter().enumerate() {
            for j in 0..n {
                coordinates.set(row, j, coords.get(i, j).clone());
            }
        }
        IntegralGroup {
            free: free_idx.len(),
            torsion: tors_idx.iter().map(|&i| diag[i].clone()).collect(),
            generators: order.iter().map(|&i| basis.column(i)).collect(),
            coordinates,
        }
    }

    /// Order of each generator, `None` for free ones.
    pub fn orders(&self) -> Vec<Option<BigInt>> {
        (0..self.free).map(|_| None).chain(self.torsion.iter().cloned().map(Some)).collect()
    }

    /// Coordinates of a cycle in the generator basis, torsion parts reduced.
    pub fn coordinates(&self, cycle: &[BigInt]) -> Vec<BigInt> {
        let raw = self.coordinates.apply(cycle);
        raw.into_iter()
            .zip(self.orders())
            .map(|(c, o)| match o {
                Some(d) => c.mod_floor(&d),
                None => c,
            })
            .collect()
    }

    pub fn summary(&self) -> GroupSummary {
        GroupSummary {
            free: self.free,
            torsion: self.torsion.iter().map(|t| t.to_u64().expect("small torsion")).collect(),
        }
    }
}

/// Free rank and torsion orders of one homology group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupSummary {
    pub free: usize,
    pub torsion: Vec<u64>,
}

impl GroupSummary {
    pub fn z2_dimension(dim: usize) -> Self {
        GroupSummary { free: dim, torsion: Vec::new() }
    }
}

impl fmt::Display for GroupSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free {
            0 => {}
            1 => parts.push("Z".to_string()),
            k => parts.push(format!("Z^{k}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" ⊕ "))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Coefficients {
    Z,
    Z2,
}

/// Homology in degrees 0, 1, 2. Over Z₂ the `free` field holds the dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GradedGroups {
    pub coefficients: Coefficients,
    pub h0: GroupSummary,
    pub h1: GroupSummary,
    pub h2: GroupSummary,
}

pub fn homology(x: &SurfaceModel, coefficients: Coefficients) -> GradedGroups {
    let complex = ChainComplex::from_word(&x.word).expect("gluing words give chain complexes");
    let group = |k| match coefficients {
        Coefficients::Z => complex.integral(k).summary(),
        Coefficients::Z2 => GroupSummary::z2_dimension(complex.mod2(k).dim()),
    };
    GradedGroups { coefficients, h0: group(0), h1: group(1), h2: group(2) }
}

/// `dim H₁(X, Z₂)`.
pub fn b1_mod2(x: &SurfaceModel) -> usize {
    homology(x, Coefficients::Z2).h1.free
}

/// Row-reduced form of a GF(2) matrix: returns pivot columns and the reduced rows.
fn gf2_reduce(m: &[Vec<u8>], cols: usize) -> (Vec<usize>, Vec<Vec<u8>>) {
    let mut rows: Vec<Vec<u8>> = m.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c] == 1) else { continue };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && rows[i][c] == 1 {
                let pivot_row = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(pivot_row) {
                    *x ^= y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    (pivots, rows)
}

pub fn gf2_rank(m: &[Vec<u8>], cols: usize) -> usize {
    gf2_reduce(m, cols).0.len()
}

/// Basis of `{x : M x = 0}`.
pub fn gf2_nullspace(m: &[Vec<u8>], cols: usize) -> Vec<Vec<u8>> {
    let (pivots, rows) = gf2_reduce(m, cols);
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut x = vec![0u8; cols];
            x[free] = 1;
            for (row, &p) in rows.iter().zip(&pivots) {
                x[p] = row[free];
            }
            x
        })
        .collect()
}

/// Some `x` with `Σ x_j columns[j] = target`.
pub fn gf2_solve(columns: &[Vec<u8>], target: &[u8]) -> Option<Vec<u8>> {
    let n = columns.len();
    let m = target.len();
    let augmented: Vec<Vec<u8>> =
        (0..m).map(|i| columns.iter().map(|c| c[i]).chain(std::iter::once(target[i])).collect()).collect();
    let (pivots, rows) = gf2_reduce(&augmented, n + 1);
    if pivots.contains(&n) {
        return None;
    }
    let mut x = vec![0u8; n];
    for (row, &p) in rows.iter().zip(&pivots) {
        x[p] = row[n];
    }
    Some(x)
}

pub fn gf2_mul(a: &[Vec<u8>], b: &[Vec<u8>]) -> Vec<Vec<u8>> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter().map(|row| (0..cols).map(|j| (0..inner).fold(0u8, |acc, k| acc ^ (row[k] & b[k][j]))).collect()).collect()
}

pub fn gf2_transpose(a: &[Vec<u8>], cols: usize) -> Vec<Vec<u8>> {
    (0..cols).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

fn dot2(a: &[u8], b: &[u8]) -> u8 {
    a.iter().zip(b).fold(0, |acc, (x, y)| acc ^ (x & y))
}

/// Homology over Z₂ with cycle representatives and a dual cocycle basis.
#[derive(Debug, Clone)]
pub struct Z2Group {
    pub generators: Vec<Vec<u8>>,
    boundaries: Vec<Vec<u8>>,
    /// Cocycles `u_i` with `u_i(generators[j]) = δ_ij`.
    pub dual_cocycles: Vec<Vec<u8>>,
}

impl Z2Group {
    fn compute(out: &[Vec<u8>], inc: &[Vec<u8>], n: usize) -> Self {
        let cycles = gf2_nullspace(out, n);
        let inc_cols = inc.first().map_or(0, |r| r.len());
        let boundaries: Vec<Vec<u8>> = (0..inc_cols).map(|j| inc.iter().map(|r| r[j]).collect()).collect();
        let mut span = boundaries.clone();
        let mut generators = Vec::new();
        for z in cycles {
            let before = gf2_rank(&span, n);
            span.push(z.clone());
            if gf2_rank(&span, n) > before {
                generators.push(z);
            } else {
                span.pop();
            }
        }
        // cocycles: kernel of the transposed incoming map, modulo images of the outgoing one
        let cocycle_space = gf2_nullspace(&gf2_transpose(inc, inc_cols), n);
        let mut span: Vec<Vec<u8>> = out.to_vec();
        let mut reps = Vec::new();
        for u in cocycle_space {
            let before = gf2_rank(&span, n);
            span.push(u.clone());
            if gf2_rank(&span, n) > before {
                reps.push(u);
            } else {
                span.pop();
            }
        }
        let k = generators.len();
        assert_eq!(reps.len(), k, "universal coefficients over a field");
        let pairing: Vec<Vec<u8>> = reps.iter().map(|u| generators.iter().map(|g| dot2(u, g)).collect()).collect();
        let inverse = gf2_inverse(&pairing).expect("evaluation pairing is perfect");
        let dual_cocycles = (0..k)
            .map(|i| (0..n).map(|e| (0..k).fold(0u8, |acc, j| acc ^ (inverse[i][j] & reps[j][e]))).collect())
            .collect();
        Z2Group { generators, boundaries, dual_cocycles }
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// Coordinates of a cycle in the generator basis.
    pub fn coordinates(&self, cycle: &[u8]) -> Vec<u8> {
        let mut columns = self.generators.clone();
        columns.extend(self.boundaries.iter().cloned());
        let x = gf2_solve(&columns, cycle).expect("argument must be a cycle");
        x[..self.dim()].to_vec()
    }

    /// Values of a cocycle on the generators: its coordinates in the dual basis.
    pub fn evaluate(&self, cocycle: &[u8]) -> Vec<u8> {
        self.generators.iter().map(|g| dot2(cocycle, g)).collect()
    }

    /// Whether a 1-cochain vanishes on every boundary.
    pub fn is_cocycle(&self, cochain: &[u8]) -> bool {
        self.boundaries.iter().all(|b| dot2(cochain, b) == 0)
    }
}

pub fn gf2_inverse(m: &[Vec<u8>]) -> Option<Vec<Vec<u8>>> {
    let n = m.len();
    let augmented: Vec<Vec<u8>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| r.iter().copied().chain((0..n).map(|j| u8::from(i == j))).collect())
        .collect();
    let (pivots, rows) = gf2_reduce(&augmented, 2 * n);
    if pivots.len() < n || pivots[..n] != (0..n).collect::<Vec<_>>()[..] {
        return None;
    }
    Some(rows.iter().map(|r| r[n..].to_vec()).collect())
}

/// Cellular chain map of a double cover in degree 1 (edges), with degree 0 and 2 checks.
fn projection_matrices(cover: &CellularCover, base: &ChainComplex) -> Result<[IntMatrix; 3], HomologyError> {
    let up = ChainComplex::from_word(&cover.word)?;
    let [bv, be, bf] = base.dims();
    let [cv, ce, cf] = up.dims();
    let mut p0 = IntMatrix::zeros(bv, cv);
    for (v, &b) in cover.vertex_base.iter().enumerate() {
        p0.set(b, v, BigInt::one());
    }
    let mut p1 = IntMatrix::zeros(be, ce);
    for (e, &b) in cover.edge_base.iter().enumerate() {
        p1.set(b, e, BigInt::one());
    }
    let mut p2 = IntMatrix::zeros(bf, cf);
    for (f, &(b, sign)) in cover.face_base.iter().enumerate() {
        p2.set(b, f, BigInt::from(sign));
    }
    if base.d1.mul(&p1) != p0.mul(&up.d1) || base.d2.mul(&p2) != p1.mul(&up.d2) {
        return Err(HomologyError::NotAChainMap);
    }
    Ok([p0, p1, p2])
}

/// `π_*`, `π^*` and the splitting bookkeeping for an orientation double cover.
#[derive(Debug, Clone, Serialize)]
pub struct InducedMaps {
    pub base: String,
    pub cover: String,
    /// `π_*` on H₁ over Z: rows are base generators (free first, then torsion
    /// reduced mod its order), columns an adapted basis of H₁ of the cover.
    pub push_z: IntMatrix,
    pub base_generators: Vec<String>,
    pub base_orders: Vec<Option<u64>>,
    pub cover_generators: Vec<String>,
    /// `π_*` on H₁ over Z₂.
    pub push_z2: Vec<Vec<u8>>,
    /// `π^*` on H¹ over Z₂ in the dual bases.
    pub pull: Vec<Vec<u8>>,
    /// Basis of Ker π^* in the dual basis of H¹ of the base.
    pub pull_kernel: Vec<Vec<u8>>,
    /// The same classes as edge cochains on the base.
    pub pull_kernel_cochains: Vec<Vec<u8>>,
    pub pull_cokernel_dim: usize,
    pub push_kernel_dim: usize,
    /// `dim H₁(X,Z₂) - dim Im π_*`; the index of the image is `2^codim`.
    pub push_image_codim: usize,
    pub b1_2_base: usize,
    pub b1_2_cover: usize,
}

impl InducedMaps {
    /// `dim Ker π_* = b₁⁽²⁾(X̃) - b₁⁽²⁾(X) + 1`.
    pub fn splitting_holds(&self) -> bool {
        self.push_kernel_dim + self.b1_2_base == self.b1_2_cover + 1
    }

    pub fn pull_is_transpose(&self) -> bool {
        let cols = self.push_z2.first().map_or(self.b1_2_cover, |r| r.len());
        gf2_transpose(&self.push_z2, cols) == self.pull
    }

    pub fn image_index(&self) -> u64 {
        1 << self.push_image_codim
    }
}

/// Renders an integer chain as a sum of edge names, e.g. `2a - b`.
pub fn chain_label(names: &[String], chain: &[BigInt]) -> String {
    let mut out = String::new();
    for (name, c) in names.iter().zip(chain) {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        let coef = if mag.is_one() { String::new() } else { mag.to_string() };
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        out.push_str(&format!("{coef}{name}"));
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

/// Unimodular column reduction of `m` to echelon form, with rows listed in
/// `moduli` reduced modulo their entry. Returns the reduced matrix and the column transform.
pub fn column_echelon(m: &IntMatrix, moduli: &[Option<BigInt>]) -> (IntMatrix, IntMatrix) {
    let mut a = m.clone();
    let mut v = IntMatrix::identity(m.cols);
    let reduce = |a: &mut IntMatrix| {
        for (i, md) in moduli.iter().enumerate() {
            if let Some(d) = md {
                for j in 0..a.cols {
                    let x = a.get(i, j).mod_floor(d);
                    a.set(i, j, x);
                }
            }
        }
    };
    reduce(&mut a);
    let mut p = 0;
    for i in 0..a.rows {
        if p >= a.cols {
            break;
        }
        loop {
            let best = (p..a.cols).filter(|&j| !a.get(i, j).is_zero()).min_by_key(|&j| a.get(i, j).abs());
            let Some(b) = best else { break };
            a.col_swap(p, b);
            v.col_swap(p, b);
            let pivot = a.get(i, p).clone();
            let mut done = true;
            for j in p + 1..a.cols {
                let k = a.get(i, j).div_floor(&pivot);
                if !k.is_zero() {
                    a.col_add(j, p, &-&k);
                    v.col_add(j, p, &-k);
                }
                reduce(&mut a);
                done &= a.get(i, j).is_zero();
            }
            if done {
                break;
            }
        }
        if a.get(i, p).is_zero() {
            continue;
        }
        if a.get(i, p).is_negative() {
            a.col_neg(p);
            v.col_neg(p);
            reduce(&mut a);
        }
        let pivot = a.get(i, p).clone();
        for j in 0..p {
            let k = a.get(i, j).div_floor(&pivot);
            if !k.is_zero() {
                a.col_add(j, p, &-&k);
                v.col_add(j, p, &-k);
            }
        }
        reduce(&mut a);
        p += 1;
    }
    (a, v)
}

pub fn induced_maps(cover: &DoubleCover) -> Result<InducedMaps, HomologyError> {
    let x = &cover.base;
    if x.orientable {
        return Err(HomologyError::Orientable(x.name()));
    }
    let cell = x.word.orientation_cover();
    let base = ChainComplex::from_word(&x.word)?;
    let up = ChainComplex::from_word(&cell.word)?;
    let [_, p1, _] = projection_matrices(&cell, &base)?;

    let hx = base.integral(1);
    let hc = up.integral(1);
    let images: Vec<Vec<BigInt>> = hc.generators.iter().map(|g| hx.coordinates(&p1.apply(g))).collect();
    let raw = IntMatrix::from_columns(hx.generators.len(), &images);
    let orders = hx.orders();
    let (push_z, transform) = if hc.torsion.is_empty() {
        column_echelon(&raw, &orders)
    } else {
        (raw.clone(), IntMatrix::identity(raw.cols))
    };
    let source = IntMatrix::from_columns(up.dims()[1], &hc.generators).mul(&transform);

    let zx = base.mod2(1);
    let zc = up.mod2(1);
    let p1_2 = p1.mod2();
    let push_cols: Vec<Vec<u8>> = zc.generators.iter().map(|g| zx.coordinates(&gf2_apply(&p1_2, g))).collect();
    let push_z2 = gf2_transpose(&push_cols, zx.dim());
    let pull: Vec<Vec<u8>> = zx
        .dual_cocycles
        .iter()
        .map(|w| {
            let pulled: Vec<u8> = cell.edge_base.iter().map(|&b| w[b]).collect();
            zc.evaluate(&pulled)
        })
        .collect();
    let pull = gf2_transpose(&pull, zc.dim());
    let pull_kernel = gf2_nullspace(&pull, zx.dim());
    let pull_kernel_cochains = pull_kernel
        .iter()
        .map(|c| {
            (0..base.dims()[1])
                .map(|e| c.iter().zip(&zx.dual_cocycles).fold(0u8, |acc, (bit, u)| acc ^ (bit & u[e])))
                .collect()
        })
        .collect();
    let push_rank = gf2_rank(&push_z2, zc.dim());
    let pull_rank = gf2_rank(&pull, zx.dim());
    Ok(InducedMaps {
        base: x.name(),
        cover: cover.cover.name(),
        push_z,
        base_generators: hx.generators.iter().map(|g| chain_label(&base.edge_names, g)).collect(),
        base_orders: orders.iter().map(|o| o.as_ref().map(|d| d.to_u64().expect("small torsion"))).collect(),
        cover_generators: (0..source.cols).map(|j| chain_label(&up.edge_names, &source.column(j))).collect(),
        push_z2,
        pull_kernel,
        pull_kernel_cochains,
        pull_cokernel_dim: zc.dim() - pull_rank,
        push_kernel_dim: zc.dim() - push_rank,
        push_image_codim: zx.dim() - push_rank,
        pull,
        b1_2_base: zx.dim(),
        b1_2_cover: zc.dim(),
    })
}

pub fn gf2_apply(m: &[Vec<u8>], v: &[u8]) -> Vec<u8> {
    m.iter().map(|row| dot2(row, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smith_examples() {
        let z = smith_normal_form(&IntMatrix::zeros(2, 2));
        assert!(z.d.is_zero());
        let s = smith_normal_form(&IntMatrix::from_rows(&[vec![2, 0], vec![0, 0]]));
        assert_eq!(s.invariant_factors(), vec![BigInt::from(2)]);
        let s = smith_normal_form(&IntMatrix::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]));
        assert_eq!(s.invariant_factors(), [2, 6, 12].map(BigInt::from).to_vec());
    }

    #[test]
    fn klein_relation_matrix() {
        let k = SurfaceModel::parse("k2").unwrap();
        let c = ChainComplex::from_word(&k.word).unwrap();
        assert_eq!(c.d2, IntMatrix::from_rows(&[vec![2], vec![0]]));
        let h = homology(&k, Coefficients::Z);
        assert_eq!(h.h1, GroupSummary { free: 1, torsion: vec![2] });
        assert_eq!(h.h1.to_string(), "Z ⊕ Z/2");
    }

    #[test]
    fn gf2_helpers() {
        let m = vec![vec![1, 1, 0], vec![0, 1, 1]];
        assert_eq!(gf2_rank(&m, 3), 2);
        assert_eq!(gf2_nullspace(&m, 3), vec![vec![1, 1, 1]]);
        let inv = gf2_inverse(&[vec![1, 1], vec![0, 1]]).unwrap();
        assert_eq!(inv, vec![vec![1, 1], vec![0, 1]]);
        assert!(gf2_inverse(&[vec![1, 1], vec![1, 1]]).is_none());
    }

    #[test]
    fn chain_labels() {
        let names = vec!["a".to_string(), "b".to_string()];
        assert_eq!(chain_label(&names, &[BigInt::from(2), BigInt::from(-1)]), "2a - b");
        assert_eq!(chain_label(&names, &[BigInt::zero(), BigInt::zero()]), "0");
    }
}
