//! Low-level numerical kernels: elementary symmetric functions, mixed
//! discriminants via coefficient extraction, quadrature grids, Haar sampling
//! on SO(n), least-squares polynomial fits, and splittable rng streams.

mod linalg;
mod polyfit;
mod quadrature;
mod rng;
mod rotation;

pub use linalg::{solve_dense, Point, Rotation, SymMatrix, MAX_DIM};
pub use polyfit::{polyval, steiner_fit};
pub use quadrature::{
    adaptive_integral, gauss_legendre, product_quadrature, AngularGrid, QuadratureGrid,
};
pub use rng::{stream, RngStream};
pub use rotation::haar_rotation;

use crate::{Error, Result};

/// Volume kappa_n of the unit ball in R^n (kappa_0 = 1).
pub fn kappa(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        4 => std::f64::consts::PI * std::f64::consts::PI / 2.0,
        _ => panic!("dimension {n} out of range"),
    }
}

/// Surface measure omega_n of the unit sphere S^{n-1} in R^n; omega_n = n kappa_n.
pub fn omega(n: usize) -> f64 {
    n as f64 * kappa(n)
}

/// Binomial coefficient as f64 (arguments stay tiny here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut num = 1.0;
    let mut den = 1.0;
    for i in 0..k {
        num *= (n - i) as f64;
        den *= (i + 1) as f64;
    }
    num / den
}

/// The jth elementary symmetric function of the given eigenvalue list,
/// [A]_0 = 1. Computed by coefficient accumulation, exact in j multiplications
/// per eigenvalue.
pub fn elem_sym(eigenvalues: &[f64], j: usize) -> Result<f64> {
    let n = eigenvalues.len();
    if j > n {
        return Err(Error::IndexOutOfRange { j, n });
    }
    // e[k] accumulates the kth elementary symmetric polynomial of the
    // eigenvalues processed so far.
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for (i, &lam) in eigenvalues.iter().enumerate() {
        for k in (1..=(i + 1)).rev() {
            e[k] += lam * e[k - 1];
        }
    }
    Ok(e[j])
}

/// Extraction weights for two-matrix mixed discriminants in dimension n.
///
/// det(sA + tB) = sum_j binom(n,j) D(A[j], B[n-j]) s^j t^{n-j}; the
/// coefficients are recovered from det evaluations at n+1 Chebyshev-spaced
/// points on the segment s + t = 1, solving the small basis system once and
/// caching the weights. `coefficient(j)` then is a dot product with the
/// determinant values.
#[derive(Clone, Debug)]
pub struct MixedDetExtractor {
    n: usize,
    nodes: Vec<f64>,
    /// weights[j][i]: coefficient of det_i in binom(n,j) D(A[j],B[n-j]).
    weights: Vec<Vec<f64>>,
}

impl MixedDetExtractor {
    pub fn new(n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n));
        let m = n + 1;
        // Chebyshev points mapped to [0,1]; distinct, well separated.
        let nodes: Vec<f64> = (0..m)
            .map(|i| 0.5 * (1.0 + (std::f64::consts::PI * i as f64 / n as f64).cos()))
            .collect();
        // Basis matrix M[i][j] = s_i^j (1-s_i)^{n-j}; weights are rows of M^{-1}.
        let mut weights = vec![vec![0.0; m]; m];
        for j in 0..m {
            let mut a: Vec<f64> = Vec::with_capacity(m * m);
            for &s in &nodes {
                for col in 0..m {
                    a.push(s.powi(col as i32) * (1.0 - s).powi((n - col) as i32));
                }
            }
            let mut rhs = vec![0.0; m];
            rhs[j] = 1.0;
            // Solve M^T w = e_j so that w . det = coefficient j.
            let mut at = vec![0.0; m * m];
            for r in 0..m {
                for c in 0..m {
                    at[r * m + c] = a[c * m + r];
                }
            }
            solve_dense(m, &mut at, &mut rhs).expect("Chebyshev basis is nonsingular");
            weights[j] = rhs;
        }
        MixedDetExtractor { n, nodes, weights }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// D(A[j], B[n-j]), normalized so that D(A,...,A) = det A.
    pub fn mixed_det(&self, a: &SymMatrix, b: &SymMatrix, j: usize) -> Result<f64> {
        if a.dim() != self.n || b.dim() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "extractor built for n={}, got {}x{} and {}x{}",
                self.n,
                a.dim(),
                a.dim(),
                b.dim(),
                b.dim()
            )));
        }
        if j > self.n {
            return Err(Error::IndexOutOfRange { j, n: self.n });
        }
        let dets: Vec<f64> = self
            .nodes
            .iter()
            .map(|&s| a.scale(s).add(&b.scale(1.0 - s)).det())
            .collect();
        let cj: f64 = self.weights[j]
            .iter()
            .zip(&dets)
            .map(|(w, d)| w * d)
            .sum();
        Ok(cj / binomial(self.n, j))
    }
}

/// Convenience wrapper constructing a fresh extractor; hot paths should hold
/// a `MixedDetExtractor` instead.
pub fn mixed_det_two(a: &SymMatrix, b: &SymMatrix, j: usize) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(
            "mixed discriminant of matrices with different dimensions".into(),
        ));
    }
    MixedDetExtractor::new(a.dim()).mixed_det(a, b, j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elem_sym_examples() {
        assert_eq!(elem_sym(&[2.0, 3.0], 1).unwrap(), 5.0);
        assert_eq!(elem_sym(&[1.0, 1.0, 1.0], 2).unwrap(), 3.0);
        assert_eq!(elem_sym(&[1.0, 2.0, 3.0], 3).unwrap(), 6.0);
        assert_eq!(elem_sym(&[1.0, 2.0], 0).unwrap(), 1.0);
        assert!(elem_sym(&[1.0, 2.0], 3).is_err());
    }

    #[test]
    fn mixed_det_examples() {
        let i2 = SymMatrix::identity(2);
        assert!((mixed_det_two(&i2, &i2, 1).unwrap() - 1.0).abs() < 1e-12);

        let a = SymMatrix::diag(&[1.0, 2.0]);
        let b = SymMatrix::diag(&[3.0, 4.0]);
        // det(s diag(1,2) + t diag(3,4)) cross term (1*4 + 2*3)/2 = 5.
        assert!((mixed_det_two(&a, &b, 1).unwrap() - 5.0).abs() < 1e-12);

        let a = SymMatrix::diag(&[2.0, 3.0]);
        // j = n returns det A regardless of B.
        assert!((mixed_det_two(&a, &b, 2).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_det_polarization_consistency() {
        // D(A,...,A) = det A for all j when both arguments coincide.
        let a = SymMatrix::new(3, &[&[2.0, 0.3, 0.0], &[0.3, 1.5, -0.2], &[0.0, -0.2, 4.0]])
            .unwrap();
        let det = a.det();
        let ex = MixedDetExtractor::new(3);
        for j in 0..=3 {
            assert!((ex.mixed_det(&a, &a, j).unwrap() - det).abs() < 1e-10 * det.abs());
        }
    }

    #[test]
    fn mixed_det_symmetry() {
        let a = SymMatrix::new(2, &[&[2.0, 0.5], &[0.5, 1.0]]).unwrap();
        let b = SymMatrix::new(2, &[&[1.0, -0.25], &[-0.25, 3.0]]).unwrap();
        let d_ab = mixed_det_two(&a, &b, 1).unwrap();
        let d_ba = mixed_det_two(&b, &a, 1).unwrap();
        assert!((d_ab - d_ba).abs() < 1e-12);
    }

    #[test]
    fn mixed_det_matches_elem_sym_against_identity() {
        // [A]_j = binom(n,j) D(A[j], I[n-j]).
        let a = SymMatrix::new(3, &[&[1.0, 0.2, 0.1], &[0.2, 2.0, 0.0], &[0.1, 0.0, 3.0]])
            .unwrap();
        let id = SymMatrix::identity(3);
        let ex = MixedDetExtractor::new(3);
        for j in 0..=3 {
            let lhs = a.elem_sym(j).unwrap();
            let rhs = binomial(3, j) * ex.mixed_det(&a, &id, j).unwrap();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }
}
