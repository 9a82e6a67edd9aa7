//! Least-squares polynomial fits for Steiner-type coefficient extraction.

use crate::{Error, Result};

/// Least-squares coefficients (c_0, ..., c_degree) of sum c_j s^j through the
/// given (s, value) samples, by Householder QR on the Vandermonde matrix.
///
/// Requires at least degree+1 distinct abscissae.
pub fn steiner_fit(samples: &[(f64, f64)], degree: usize) -> Result<Vec<f64>> {
    let m = samples.len();
    let k = degree + 1;
    let mut distinct: Vec<f64> = samples.iter().map(|&(s, _)| s).collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    if distinct.len() < k {
        return Err(Error::IllConditionedFit(format!(
            "{} distinct nodes for degree {}",
            distinct.len(),
            degree
        )));
    }

    // Column-major Vandermonde.
    let mut a = vec![0.0; m * k];
    let mut b: Vec<f64> = samples.iter().map(|&(_, v)| v).collect();
    for (row, &(s, _)) in samples.iter().enumerate() {
        let mut p = 1.0;
        for col in 0..k {
            a[col * m + row] = p;
            p *= s;
        }
    }

    // Householder QR, applying reflectors to b as we go.
    for col in 0..k {
        let mut norm = 0.0;
        for row in col..m {
            norm += a[col * m + row] * a[col * m + row];
        }
        let norm = norm.sqrt();
        if norm < 1e-13 {
            return Err(Error::IllConditionedFit("rank-deficient Vandermonde".into()));
        }
        let alpha = if a[col * m + col] >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; m];
        v[col] = a[col * m + col] - alpha;
        for row in (col + 1)..m {
            v[row] = a[col * m + row];
        }
        let vtv: f64 = v[col..].iter().map(|x| x * x).sum();
        if vtv < 1e-300 {
            continue;
        }
        for target in col..k {
            let dot: f64 = (col..m).map(|r| v[r] * a[target * m + r]).sum();
            let f = 2.0 * dot / vtv;
            for r in col..m {
                a[target * m + r] -= f * v[r];
            }
        }
        let dot: f64 = (col..m).map(|r| v[r] * b[r]).sum();
        let f = 2.0 * dot / vtv;
        for r in col..m {
            b[r] -= f * v[r];
        }
    }

    // Back substitution on the upper-triangular k x k block.
    let mut coeffs = vec![0.0; k];
    for row in (0..k).rev() {
        let mut s = b[row];
        for col in (row + 1)..k {
            s -= a[col * m + row] * coeffs[col];
        }
        coeffs[row] = s / a[row * m + row];
    }
    Ok(coeffs)
}

/// Evaluates sum c_j s^j.
pub fn polyval(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_polynomial_recovery() {
        let samples: Vec<(f64, f64)> = (1..=10)
            .map(|i| {
                let s = i as f64 / 10.0;
                (s, 1.0 + 2.0 * s + s * s)
            })
            .collect();
        let c = steiner_fit(&samples, 2).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-10);
        assert!((c[1] - 2.0).abs() < 1e-10);
        assert!((c[2] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn parallel_volume_of_quadratic() {
        // pi (1+s)^2 is the parallel volume of x -> |x|^2/2 over the unit disk.
        let pi = std::f64::consts::PI;
        let samples: Vec<(f64, f64)> = (1..=10)
            .map(|i| {
                let s = i as f64 / 10.0;
                (s, pi * (1.0 + s) * (1.0 + s))
            })
            .collect();
        let c = steiner_fit(&samples, 2).unwrap();
        assert!((c[0] - pi).abs() < 1e-10);
        assert!((c[1] - 2.0 * pi).abs() < 1e-10);
        assert!((c[2] - pi).abs() < 1e-10);
    }

    #[test]
    fn too_few_nodes() {
        assert!(steiner_fit(&[(0.1, 1.0), (0.2, 2.0)], 2).is_err());
    }

    #[test]
    fn polyval_matches() {
        let c = [1.0, -2.0, 0.5];
        assert!((polyval(&c, 2.0) - (1.0 - 4.0 + 2.0)).abs() < 1e-14);
    }
}
