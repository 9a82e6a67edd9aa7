//! Haar sampling on SO(n).

use super::linalg::{det_small, Rotation, MAX_DIM};
use rand::Rng;

/// One standard normal deviate by Box-Muller (the partner value is dropped;
/// rotations need so few draws that caching is not worth the state).
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u1: f64 = rng.gen();
        if u1 <= f64::MIN_POSITIVE {
            continue;
        }
        let u2: f64 = rng.gen();
        return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
    }
}

/// Draws theta from the Haar probability measure on SO(n): a Gaussian matrix
/// is orthonormalized (modified Gram-Schmidt, which fixes the R-diagonal
/// signs positive), then one column is flipped if det = -1.
pub fn haar_rotation<R: Rng>(n: usize, rng: &mut R) -> Rotation {
    assert!((1..=MAX_DIM).contains(&n));
    loop {
        let mut cols = [[0.0f64; MAX_DIM]; MAX_DIM];
        for col in cols.iter_mut().take(n) {
            for entry in col.iter_mut().take(n) {
                *entry = standard_normal(rng);
            }
        }
        let mut ok = true;
        for j in 0..n {
            for i in 0..j {
                let dot: f64 = (0..n).map(|k| cols[j][k] * cols[i][k]).sum();
                for k in 0..n {
                    cols[j][k] -= dot * cols[i][k];
                }
            }
            let norm: f64 = (0..n).map(|k| cols[j][k] * cols[j][k]).sum::<f64>().sqrt();
            if norm < 1e-8 {
                // Numerically degenerate draw; resample.
                ok = false;
                break;
            }
            for k in 0..n {
                cols[j][k] /= norm;
            }
        }
        if !ok {
            continue;
        }
        let mut a = [[0.0f64; MAX_DIM]; MAX_DIM];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = cols[j][i];
            }
        }
        if det_small(n, &a) < 0.0 {
            for row in a.iter_mut().take(n) {
                row[n - 1] = -row[n - 1];
            }
        }
        return Rotation::from_raw_unchecked(n, a);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{stream, Point};

    #[test]
    fn group_membership() {
        let mut rng = stream(11, 0);
        for _ in 0..50 {
            for n in 2..=4 {
                let r = haar_rotation(n, &mut rng);
                assert!((r.det() - 1.0).abs() < 1e-10);
                // Orthogonality: theta theta^T = I entrywise.
                for i in 0..n {
                    for j in 0..n {
                        let dot: f64 = (0..n).map(|k| r.get(i, k) * r.get(j, k)).sum();
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!((dot - expect).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn mean_image_of_axis_vanishes() {
        // Haar symmetry: E[theta e_1] = 0; 10^4 draws, 3 sigma window.
        let mut rng = stream(13, 0);
        let n = 2;
        let draws = 10_000;
        let mut mean = Point::zero(n);
        for _ in 0..draws {
            let r = haar_rotation(n, &mut rng);
            mean = mean.add(&r.apply(&Point::axis(n, 0)));
        }
        mean = mean.scale(1.0 / draws as f64);
        let bound = 3.0 / (draws as f64).sqrt();
        for i in 0..n {
            assert!(mean.get(i).abs() < bound, "coordinate {i}: {}", mean.get(i));
        }
    }

    #[test]
    fn entrywise_empirical_mean_within_four_standard_errors() {
        let mut rng = stream(17, 0);
        let n = 3;
        let draws = 10_000;
        let mut sum = [[0.0f64; 4]; 4];
        let mut sumsq = [[0.0f64; 4]; 4];
        for _ in 0..draws {
            let r = haar_rotation(n, &mut rng);
            for i in 0..n {
                for j in 0..n {
                    let v = r.get(i, j);
                    sum[i][j] += v;
                    sumsq[i][j] += v * v;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let mean = sum[i][j] / draws as f64;
                let var = sumsq[i][j] / draws as f64 - mean * mean;
                let se = (var / draws as f64).sqrt();
                assert!(
                    mean.abs() < 4.0 * se,
                    "entry ({i},{j}): mean {mean}, se {se}"
                );
            }
        }
    }
}
