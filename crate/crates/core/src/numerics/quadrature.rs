//! Gauss-Legendre rules, adaptive 1-D integration with breakpoints, and the
//! radial x angular product grids used for integrals over annuli
//! eps <= |x| <= R in dimension 2 and 3.

use super::linalg::Point;
use super::omega;
use crate::{Error, Result};
use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence. Cached for the orders used in practice.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<std::sync::Mutex<std::collections::HashMap<usize, (Vec<f64>, Vec<f64>)>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| std::sync::Mutex::new(std::collections::HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&order) {
        return hit.clone();
    }
    let computed = compute_gauss_legendre(order);
    cache.lock().unwrap().insert(order, computed.clone());
    computed
}

fn compute_gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and P_n'(x) by recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Integrates f over [lo, hi] with a fixed Gauss-Legendre rule.
fn panel_integral<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, order: usize) -> f64 {
    let (xs, ws) = gauss_legendre(order);
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let mut s = 0.0;
    for (x, w) in xs.iter().zip(&ws) {
        s += w * f(c + h * x);
    }
    s * h
}

/// Adaptive integral of f over [a, b] with mandatory breakpoints. Each
/// segment is bisected until the GL(16)-vs-two-halves difference is below the
/// local tolerance share. Returns (value, error_estimate).
pub fn adaptive_integral<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    abs_tol: f64,
) -> (f64, f64) {
    if b <= a {
        return (0.0, 0.0);
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&t| t > a && t < b)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-300);

    let mut total = 0.0;
    let mut err = 0.0;
    for seg in cuts.windows(2) {
        let (v, e) = adaptive_segment(f, seg[0], seg[1], abs_tol * (seg[1] - seg[0]) / (b - a), 0);
        total += v;
        err += e;
    }
    (total, err)
}

fn adaptive_segment<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    tol: f64,
    depth: usize,
) -> (f64, f64) {
    let whole = panel_integral(f, lo, hi, 16);
    let mid = 0.5 * (lo + hi);
    let left = panel_integral(f, lo, mid, 16);
    let right = panel_integral(f, mid, hi, 16);
    let diff = (left + right - whole).abs();
    if diff <= tol.max(1e-15 * whole.abs()) || depth >= 28 || hi - lo < 1e-14 * hi.abs().max(1.0) {
        (left + right, diff)
    } else {
        let (lv, le) = adaptive_segment(f, lo, mid, 0.5 * tol, depth + 1);
        let (rv, re) = adaptive_segment(f, mid, hi, 0.5 * tol, depth + 1);
        (lv + rv, le + re)
    }
}

/// Quadrature nodes over the unit sphere S^{n-1}; weights sum to omega_n.
#[derive(Clone, Debug)]
pub struct AngularGrid {
    n: usize,
    nodes: Vec<(Point, f64)>,
}

impl AngularGrid {
    /// n = 2: `count` equispaced angles. n = 3: Gauss-Legendre in the polar
    /// cosine times `count` equispaced azimuths.
    pub fn new(n: usize, count: usize) -> Result<Self> {
        let mut nodes = Vec::new();
        match n {
            2 => {
                let w = 2.0 * std::f64::consts::PI / count as f64;
                for i in 0..count {
                    let th = w * (i as f64 + 0.5);
                    nodes.push((Point::new(&[th.cos(), th.sin()]), w));
                }
            }
            3 => {
                let n_u = (count / 2).max(8);
                let (us, wus) = gauss_legendre(n_u);
                let wt = 2.0 * std::f64::consts::PI / count as f64;
                for (u, wu) in us.iter().zip(&wus) {
                    let s = (1.0 - u * u).sqrt();
                    for i in 0..count {
                        let th = wt * (i as f64 + 0.5);
                        nodes.push((Point::new(&[s * th.cos(), s * th.sin(), *u]), wu * wt));
                    }
                }
            }
            _ => {
                return Err(Error::DimensionMismatch(format!(
                    "angular grids are implemented for n in {{2,3}}, got {n}"
                )))
            }
        }
        let sum: f64 = nodes.iter().map(|(_, w)| w).sum();
        if (sum - omega(n)).abs() > 1e-8 {
            return Err(Error::InvalidParameter(format!(
                "angular weights sum to {sum}, expected {}",
                omega(n)
            )));
        }
        Ok(AngularGrid { n, nodes })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[(Point, f64)] {
        &self.nodes
    }
}

/// Tensor product grid over the annulus eps <= |x| <= r_max.
///
/// Radial panels are Gauss-Legendre between consecutive breakpoints, the
/// innermost stretch is geometrically graded towards eps so that integrands
/// with integrable singularities at the origin are handled without special
/// casing. Hosts the kappa_n / omega_n constants through [`kappa`]/[`omega`].
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    n: usize,
    eps: f64,
    r_max: f64,
    breakpoints: Vec<f64>,
    panels_hint: usize,
    panel_order: usize,
    angular_count: usize,
    radial: Vec<(f64, f64)>,
    angular: AngularGrid,
}

impl QuadratureGrid {
    pub fn new(
        n: usize,
        eps: f64,
        r_max: f64,
        breakpoints: &[f64],
        panels_hint: usize,
        angular_count: usize,
    ) -> Result<Self> {
        Self::with_order(n, eps, r_max, breakpoints, panels_hint, 16, angular_count)
    }

    pub fn with_order(
        n: usize,
        eps: f64,
        r_max: f64,
        breakpoints: &[f64],
        panels_hint: usize,
        panel_order: usize,
        angular_count: usize,
    ) -> Result<Self> {
        if !(eps > 0.0 && r_max > eps) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < eps < r_max, got eps={eps}, r_max={r_max}"
            )));
        }
        let angular = AngularGrid::new(n, angular_count)?;
        let radial = build_radial(eps, r_max, breakpoints, panels_hint, panel_order);
        if radial.iter().any(|&(_, w)| w <= 0.0) {
            return Err(Error::InvalidParameter("nonpositive radial weight".into()));
        }
        Ok(QuadratureGrid {
            n,
            eps,
            r_max,
            breakpoints: breakpoints.to_vec(),
            panels_hint,
            panel_order,
            angular_count,
            radial,
            angular,
        })
    }

    /// Default grid for the given outer radius: eps = 1e-3 r_max, 64 panels'
    /// worth of radial nodes, 512 angles (n=2) or 64x64-ish (n=3).
    pub fn default_for(n: usize, r_max: f64, breakpoints: &[f64]) -> Result<Self> {
        let count = if n == 2 { 512 } else { 128 };
        Self::new(n, 1e-3 * r_max, r_max, breakpoints, 48, count)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn radial(&self) -> &[(f64, f64)] {
        &self.radial
    }

    pub fn angular(&self) -> &AngularGrid {
        &self.angular
    }

    /// A companion grid at roughly half the resolution, for error estimates.
    pub fn coarser(&self) -> QuadratureGrid {
        QuadratureGrid::with_order(
            self.n,
            self.eps,
            self.r_max,
            &self.breakpoints,
            (self.panels_hint / 2).max(2),
            self.panel_order,
            (self.angular_count * 2 / 3).max(16),
        )
        .expect("coarser grid parameters remain valid")
    }

    /// A companion grid with the inner cutoff halved, for the convergence
    /// check on the excluded mass near the origin.
    pub fn halved_eps(&self) -> QuadratureGrid {
        QuadratureGrid::with_order(
            self.n,
            0.5 * self.eps,
            self.r_max,
            &self.breakpoints,
            self.panels_hint,
            self.panel_order,
            self.angular_count,
        )
        .expect("halved-eps grid parameters remain valid")
    }
}

fn build_radial(
    eps: f64,
    r_max: f64,
    breakpoints: &[f64],
    panels_hint: usize,
    order: usize,
) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&t| t > eps && t < r_max)
        .collect();
    cuts.push(eps);
    cuts.push(r_max);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-12 * r_max);

    // Geometric grading of the innermost stretch towards eps.
    let first_hi = cuts[1];
    let mut edges = vec![eps];
    let mut t = eps;
    while t * 4.0 < first_hi {
        t *= 4.0;
        edges.push(t);
    }
    edges.push(first_hi);
    for seg in cuts[1..].windows(2) {
        edges.push(seg[1]);
    }

    let (xs, ws) = gauss_legendre(order);
    let mut radial = Vec::new();
    for seg in edges.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        // Panels proportional to the segment's share of the full range.
        let share = ((hi - lo) / (r_max - eps) * panels_hint as f64).ceil() as usize;
        let panels = share.clamp(1, panels_hint);
        let h = (hi - lo) / panels as f64;
        for p in 0..panels {
            let a = lo + p as f64 * h;
            let c = a + 0.5 * h;
            for (x, w) in xs.iter().zip(&ws) {
                radial.push((c + 0.5 * h * x, 0.5 * h * w));
            }
        }
    }
    radial
}

/// Tensor quadrature of integrand(x) dx over the annulus (scalar weight) or
/// of integrand(x) x dx (vector weight). Returns the value components
/// (length 1 or n) and an error estimate from a half-resolution companion
/// grid.
pub fn product_quadrature<F: Fn(&Point) -> f64 + Sync>(
    integrand: F,
    grid: &QuadratureGrid,
    vector_weight: bool,
) -> Result<(Vec<f64>, f64)> {
    let fine = tensor_sum(&integrand, grid, vector_weight)?;
    let coarse = tensor_sum(&integrand, &grid.coarser(), vector_weight)?;
    let err = fine
        .iter()
        .zip(&coarse)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    Ok((fine, err))
}

fn tensor_sum<F: Fn(&Point) -> f64>(
    integrand: &F,
    grid: &QuadratureGrid,
    vector_weight: bool,
) -> Result<Vec<f64>> {
    let n = grid.dim();
    let mut acc = vec![0.0; if vector_weight { n } else { 1 }];
    for &(r, wr) in grid.radial() {
        let rn = r.powi(n as i32 - 1) * wr;
        for (theta, wt) in grid.angular().nodes() {
            let x = theta.scale(r);
            let v = integrand(&x);
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand {
                    at: x.coords().to_vec(),
                });
            }
            let w = rn * wt * v;
            if vector_weight {
                for i in 0..n {
                    acc[i] += w * x.get(i);
                }
            } else {
                acc[0] += w;
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let (xs, ws) = gauss_legendre(8);
        // degree 15 polynomial x^14 over [-1,1] = 2/15.
        let s: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_kinks() {
        // |x - 0.3| over [0,1] with the kink declared: exact 0.09/... =
        // int = 0.3^2/2 + 0.7^2/2 = 0.29.
        let f = |x: f64| (x - 0.3f64).abs();
        let (v, _) = adaptive_integral(&f, 0.0, 1.0, &[0.3], 1e-12);
        assert!((v - 0.29).abs() < 1e-12);
    }

    #[test]
    fn annulus_area() {
        // integrand 1, n=2, eps=0.01, R=1 -> pi (1 - 1e-4).
        let grid = QuadratureGrid::new(2, 0.01, 1.0, &[], 32, 256).unwrap();
        let (v, _) = product_quadrature(|_| 1.0, &grid, false).unwrap();
        let expect = std::f64::consts::PI * (1.0 - 1e-4);
        assert!((v[0] - expect).abs() < 1e-6, "got {} want {}", v[0], expect);
    }

    #[test]
    fn odd_symmetry_vector_weight() {
        // 1/|x| with vector weight integrates to the zero vector.
        let grid = QuadratureGrid::new(2, 0.01, 1.0, &[], 32, 256).unwrap();
        let (v, _) = product_quadrature(|x: &Point| 1.0 / x.norm(), &grid, true).unwrap();
        assert!(v.iter().all(|c| c.abs() < 1e-8));
    }

    #[test]
    fn tent_over_radius() {
        // alpha(|x|)/|x| for tent alpha, n=2 -> 2 pi int_0^1 (1-r) dr = pi.
        let grid = QuadratureGrid::new(2, 1e-6, 1.0, &[], 48, 256).unwrap();
        let (v, _) =
            product_quadrature(|x: &Point| (1.0 - x.norm()).max(0.0) / x.norm(), &grid, false)
                .unwrap();
        assert!((v[0] - std::f64::consts::PI).abs() < 1e-4);
    }

    #[test]
    fn angular_weights_sum_to_sphere_measure() {
        for (n, count) in [(2usize, 128usize), (3, 96)] {
            let g = AngularGrid::new(n, count).unwrap();
            let sum: f64 = g.nodes().iter().map(|(_, w)| w).sum();
            assert!((sum - omega(n)).abs() < 1e-10);
        }
    }

    #[test]
    fn kappa_omega_consistency() {
        use crate::numerics::kappa;
        for n in 1..=4 {
            assert!((omega(n) - n as f64 * kappa(n)).abs() < 1e-12);
        }
    }
}
