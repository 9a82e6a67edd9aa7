//! Points, symmetric matrices and rotations in dimension 2..=4, with the
//! small dense kernels (determinants, linear solves) the rest of the crate
//! builds on. Everything is stack-allocated; `MAX_DIM` is 4 by construction.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Hard cap on the ambient dimension.
pub const MAX_DIM: usize = 4;

/// A point (or vector) in R^n, n <= 4.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct Point {
    n: usize,
    c: [f64; MAX_DIM],
}

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&coords.len()),
            "dimension must be 1..=4, got {}",
            coords.len()
        );
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Point {
            n: coords.len(),
            c,
        }
    }

    pub fn zero(n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n));
        Point { n, c: [0.0; 4] }
    }

    /// The standard basis vector e_i (0-indexed).
    pub fn axis(n: usize, i: usize) -> Self {
        let mut p = Point::zero(n);
        p.c[i] = 1.0;
        p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[f64] {
        &self.c[..self.n]
    }

    pub fn get(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        self.c[i]
    }

    pub fn set(&mut self, i: usize, v: f64) {
        debug_assert!(i < self.n);
        self.c[i] = v;
    }

    /// Last coordinate x_n.
    pub fn last(&self) -> f64 {
        self.c[self.n - 1]
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Norm of the first n-1 coordinates, |x|_{n-1}.
    pub fn norm_head(&self) -> f64 {
        self.c[..self.n - 1].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.n, other.n);
        (0..self.n).map(|i| self.c[i] * other.c[i]).sum()
    }

    pub fn add(&self, other: &Point) -> Point {
        debug_assert_eq!(self.n, other.n);
        let mut out = *self;
        for i in 0..self.n {
            out.c[i] += other.c[i];
        }
        out
    }

    pub fn sub(&self, other: &Point) -> Point {
        debug_assert_eq!(self.n, other.n);
        let mut out = *self;
        for i in 0..self.n {
            out.c[i] -= other.c[i];
        }
        out
    }

    pub fn scale(&self, a: f64) -> Point {
        let mut out = *self;
        for i in 0..self.n {
            out.c[i] *= a;
        }
        out
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.sub(other).norm()
    }

    /// x / |x|; `None` at the origin.
    pub fn unit(&self) -> Option<Point> {
        let r = self.norm();
        if r == 0.0 {
            None
        } else {
            Some(self.scale(1.0 / r))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|v| v.is_finite())
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.coords().to_vec()
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = String;
    fn try_from(v: Vec<f64>) -> std::result::Result<Self, String> {
        if (1..=MAX_DIM).contains(&v.len()) {
            Ok(Point::new(&v))
        } else {
            Err(format!("point dimension must be 1..=4, got {}", v.len()))
        }
    }
}

/// An n x n real symmetric matrix, n <= 4.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<f64>>", try_from = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    n: usize,
    a: [[f64; MAX_DIM]; MAX_DIM],
}

impl SymMatrix {
    /// Builds from row data, checking symmetry to 1e-12 relative tolerance.
    pub fn new(n: usize, rows: &[&[f64]]) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&n) || rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "expected {n}x{n} symmetric matrix"
            )));
        }
        let mut a = [[0.0; MAX_DIM]; MAX_DIM];
        let mut scale: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                a[i][j] = rows[i][j];
                scale = scale.max(rows[i][j].abs());
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (a[i][j] - a[j][i]).abs() > 1e-12 * scale.max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i},{j})"
                    )));
                }
                let m = 0.5 * (a[i][j] + a[j][i]);
                a[i][j] = m;
                a[j][i] = m;
            }
        }
        Ok(SymMatrix { n, a })
    }

    pub fn zeros(n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n));
        SymMatrix {
            n,
            a: [[0.0; 4]; 4],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            m.a[i][i] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = SymMatrix::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.a[i][i] = v;
        }
        m
    }

    /// c * v v^T (rank-one), v of dimension n.
    pub fn outer(v: &Point, c: f64) -> Self {
        let n = v.dim();
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i][j] = c * v.get(i) * v.get(j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.a[i][j] = v;
        self.a[j][i] = v;
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        debug_assert_eq!(self.n, other.n);
        let mut out = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                out.a[i][j] += other.a[i][j];
            }
        }
        out
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        let mut out = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                out.a[i][j] *= c;
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.a[i][i]).sum()
    }

    pub fn mul_vec(&self, v: &Point) -> Point {
        debug_assert_eq!(self.n, v.dim());
        let mut out = Point::zero(self.n);
        for i in 0..self.n {
            let mut s = 0.0;
            for j in 0..self.n {
                s += self.a[i][j] * v.get(j);
            }
            out.set(i, s);
        }
        out
    }

    pub fn quad_form(&self, v: &Point) -> f64 {
        self.mul_vec(v).dot(v)
    }

    pub fn det(&self) -> f64 {
        det_small(self.n, &self.a)
    }

    /// [A]_j, the jth elementary symmetric function of the eigenvalues,
    /// computed as the sum of all j x j principal minors (no eigensolve).
    pub fn elem_sym(&self, j: usize) -> Result<f64> {
        if j > self.n {
            return Err(Error::IndexOutOfRange { j, n: self.n });
        }
        if j == 0 {
            return Ok(1.0);
        }
        let mut sum = 0.0;
        for subset in subsets(self.n, j) {
            let mut minor = [[0.0; MAX_DIM]; MAX_DIM];
            for (r, &i) in subset.iter().enumerate() {
                for (c, &k) in subset.iter().enumerate() {
                    minor[r][c] = self.a[i][k];
                }
            }
            sum += det_small(j, &minor);
        }
        Ok(sum)
    }

    /// theta A theta^T.
    pub fn conjugate(&self, theta: &Rotation) -> SymMatrix {
        debug_assert_eq!(self.n, theta.n);
        let n = self.n;
        let mut tmp = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += theta.a[i][k] * self.a[k][j];
                }
                tmp[i][j] = s;
            }
        }
        let mut out = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += tmp[i][k] * theta.a[j][k];
                }
                out.a[i][j] = s;
            }
        }
        out
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Vec<Vec<f64>> {
        (0..m.n)
            .map(|i| m.a[i][..m.n].to_vec())
            .collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = String;
    fn try_from(rows: Vec<Vec<f64>>) -> std::result::Result<Self, String> {
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        SymMatrix::new(rows.len(), &refs).map_err(|e| e.to_string())
    }
}

/// An element of SO(n), n <= 4.
#[derive(Clone, Copy, Debug)]
pub struct Rotation {
    n: usize,
    a: [[f64; MAX_DIM]; MAX_DIM],
}

impl Rotation {
    /// Builds from rows, checking theta theta^T = I and det = +1 to 1e-10.
    pub fn new(n: usize, rows: &[[f64; MAX_DIM]; MAX_DIM]) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&n) {
            return Err(Error::DimensionMismatch(format!("dimension {n}")));
        }
        let r = Rotation { n, a: *rows };
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += r.a[i][k] * r.a[j][k];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                if (s - expect).abs() > 1e-10 {
                    return Err(Error::InvalidParameter(format!(
                        "rows are not orthonormal at ({i},{j}): {s}"
                    )));
                }
            }
        }
        if (det_small(n, &r.a) - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter("determinant is not +1".into()));
        }
        Ok(r)
    }

    pub fn identity(n: usize) -> Self {
        let mut a = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..n {
            a[i][i] = 1.0;
        }
        Rotation { n, a }
    }

    /// Planar rotation by `angle` in the (i,j) coordinate plane.
    pub fn planar(n: usize, i: usize, j: usize, angle: f64) -> Self {
        let mut r = Rotation::identity(n);
        let (s, c) = angle.sin_cos();
        r.a[i][i] = c;
        r.a[j][j] = c;
        r.a[i][j] = -s;
        r.a[j][i] = s;
        r
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    pub(crate) fn from_raw_unchecked(n: usize, a: [[f64; MAX_DIM]; MAX_DIM]) -> Self {
        Rotation { n, a }
    }

    pub fn det(&self) -> f64 {
        det_small(self.n, &self.a)
    }

    /// theta x.
    pub fn apply(&self, x: &Point) -> Point {
        debug_assert_eq!(self.n, x.dim());
        let mut out = Point::zero(self.n);
        for i in 0..self.n {
            let mut s = 0.0;
            for j in 0..self.n {
                s += self.a[i][j] * x.get(j);
            }
            out.set(i, s);
        }
        out
    }

    /// theta^{-1} x = theta^T x.
    pub fn apply_inverse(&self, x: &Point) -> Point {
        debug_assert_eq!(self.n, x.dim());
        let mut out = Point::zero(self.n);
        for i in 0..self.n {
            let mut s = 0.0;
            for j in 0..self.n {
                s += self.a[j][i] * x.get(j);
            }
            out.set(i, s);
        }
        out
    }

    /// self o other (matrix product).
    pub fn compose(&self, other: &Rotation) -> Rotation {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut a = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += self.a[i][k] * other.a[k][j];
                }
                a[i][j] = s;
            }
        }
        Rotation { n, a }
    }

    pub fn inverse(&self) -> Rotation {
        let n = self.n;
        let mut a = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = self.a[j][i];
            }
        }
        Rotation { n, a }
    }
}

/// Determinant of the leading k x k block, closed form for k <= 4.
pub(crate) fn det_small(k: usize, a: &[[f64; MAX_DIM]; MAX_DIM]) -> f64 {
    match k {
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        3 => {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
        4 => {
            let mut det = 0.0;
            let mut sign = 1.0;
            for c in 0..4 {
                let mut minor = [[0.0; MAX_DIM]; MAX_DIM];
                for i in 1..4 {
                    let mut cc = 0;
                    for j in 0..4 {
                        if j == c {
                            continue;
                        }
                        minor[i - 1][cc] = a[i][j];
                        cc += 1;
                    }
                }
                det += sign * a[0][c] * det_small(3, &minor);
                sign = -sign;
            }
            det
        }
        _ => panic!("dimension {k} out of range"),
    }
}

/// All j-element subsets of 0..n, in lexicographic order. n <= 4 so these
/// lists are tiny.
fn subsets(n: usize, j: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, j: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == j {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, j, cur, out);
            cur.pop();
        }
    }
    rec(0, n, j, &mut cur, &mut out);
    out
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
/// A is row-major, dimension k x k with k <= 8.
pub fn solve_dense(k: usize, a: &mut [f64], b: &mut [f64]) -> Result<()> {
    assert!(a.len() == k * k && b.len() == k);
    for col in 0..k {
        let mut piv = col;
        for r in (col + 1)..k {
            if a[r * k + col].abs() > a[piv * k + col].abs() {
                piv = r;
            }
        }
        if a[piv * k + col].abs() < 1e-300 {
            return Err(Error::IllConditionedFit("singular linear system".into()));
        }
        if piv != col {
            for c in 0..k {
                a.swap(col * k + c, piv * k + c);
            }
            b.swap(col, piv);
        }
        let d = a[col * k + col];
        for r in (col + 1)..k {
            let f = a[r * k + col] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..k {
                a[r * k + c] -= f * a[col * k + c];
            }
            b[r] -= f * b[col];
        }
    }
    for col in (0..k).rev() {
        let mut s = b[col];
        for c in (col + 1)..k {
            s -= a[col * k + c] * b[c];
        }
        b[col] = s / a[col * k + col];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_closed_forms() {
        let m = SymMatrix::diag(&[2.0, 3.0, 4.0, 5.0]);
        assert_eq!(m.det(), 120.0);
        let m = SymMatrix::new(2, &[&[1.0, 2.0], &[2.0, 5.0]]).unwrap();
        assert!((m.det() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn elem_sym_identity_is_binomial() {
        for n in 1..=4 {
            let id = SymMatrix::identity(n);
            for j in 0..=n {
                let expect = crate::numerics::binomial(n, j);
                assert!((id.elem_sym(j).unwrap() - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symmetry_is_enforced() {
        assert!(SymMatrix::new(2, &[&[1.0, 2.0], &[2.1, 5.0]]).is_err());
    }

    #[test]
    fn rotation_roundtrip() {
        let r = Rotation::planar(3, 0, 2, 0.7);
        let x = Point::new(&[1.0, -2.0, 0.5]);
        let y = r.apply(&x);
        let back = r.apply_inverse(&y);
        assert!(back.dist(&x) < 1e-14);
        assert!((r.det() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dense_solve() {
        let mut a = vec![2.0, 1.0, -1.0, -3.0, -1.0, 2.0, -2.0, 1.0, 2.0];
        let mut b = vec![8.0, -11.0, -3.0];
        solve_dense(3, &mut a, &mut b).unwrap();
        assert!((b[0] - 2.0).abs() < 1e-12);
        assert!((b[1] - 3.0).abs() < 1e-12);
        assert!((b[2] - (-1.0)).abs() < 1e-12);
    }
}
