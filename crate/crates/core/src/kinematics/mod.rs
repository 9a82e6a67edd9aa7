//! Both sides of the additive kinematic formulas.
//!
//! The central object is the rotation average
//!
//! ```text
//! z_{j,xi}(u, v) = int_{SO(n)} t*_{j,xi}(u + v o theta^{-1}) dtheta,
//! ```
//!
//! whose Monge-Ampere form reads
//!
//! ```text
//! kappa_n int_{SO(n)} int alpha(|y|) y dMA_j(u + v o theta^{-1}; y) dtheta
//!   = sum_{k=1}^{j} binom(j,k) intint R_1^{n-k}(R^{-n+k} alpha)(max(|x|,|y|)) x
//!        dMA_{j-k}(v; y) dMA_k(u; x)
//! ```
//!
//! with alpha = binom(n,j) R^{n-j} xi. This module evaluates the left side
//! by Haar Monte Carlo (collapsing the average when v is rotation invariant)
//! and the right side by the kernel machinery, with the k = j term handled
//! analytically through MA_0 = kappa_n delta_0. The closed form of
//! z_{j,xi}(mu w_s, lambda v_t) and the ball corollary live here as well.

mod report;

pub use report::VerificationReport;

use crate::convexfn::{ConvexFunction, Kind};
use crate::measures::{
    halfcone_cone_decomposition, ma_integral_field, ma_j_integral, smooth_away_from_zero, Body,
    MeasureQuery, Method, QuadSettings, Region, SumField, Value, Weight, WeightedIntegral,
};
use crate::numerics::{
    adaptive_integral, binomial, gauss_legendre, haar_rotation, kappa, stream, AngularGrid,
    MixedDetExtractor, Point, SymMatrix,
};
use crate::transforms::{certify, kernel_make, r_power, ClassTag, RadialDensity};
use crate::{Error, Result};

/// The data of one kinematic verification run.
#[derive(Clone, Debug)]
pub struct KinematicExperiment {
    pub n: usize,
    pub j: usize,
    /// alpha, certified in T^n_n (s alpha(s) -> 0 at 0+).
    pub alpha: RadialDensity,
    pub u: ConvexFunction,
    pub v: ConvexFunction,
    pub rotations: usize,
    pub quad: QuadSettings,
    pub seed: u64,
}

impl KinematicExperiment {
    pub fn new(
        n: usize,
        j: usize,
        alpha: RadialDensity,
        u: ConvexFunction,
        v: ConvexFunction,
        rotations: usize,
        seed: u64,
    ) -> Result<Self> {
        if u.dim() != n || v.dim() != n {
            return Err(Error::DimensionMismatch("experiment functions".into()));
        }
        if j > n {
            return Err(Error::IndexOutOfRange { j, n });
        }
        certify(&alpha, ClassTag::t(n, n))?;
        Ok(KinematicExperiment {
            n,
            j,
            alpha,
            u,
            v,
            rotations,
            quad: QuadSettings::default(),
            seed,
        })
    }
}

/// Left side: kappa_n times the Haar average over rotations of the
/// vector-weighted MA_j integral of u + v o theta^{-1}. When v is radially
/// symmetric the average is a single evaluation (exact; no sampling).
pub fn lhs_vector(exp: &KinematicExperiment) -> Result<WeightedIntegral> {
    let n = exp.n;
    if exp.v.is_radial() {
        let composite = ConvexFunction::combination(vec![
            (1.0, exp.u.clone()),
            (1.0, exp.v.clone()),
        ])?;
        let q = MeasureQuery::new(
            composite,
            exp.j,
            exp.alpha.clone(),
            Weight::Vector,
            Region::DensitySupport,
        )?;
        let out = ma_j_integral(&q, &exp.quad)?;
        return Ok(WeightedIntegral::new(
            out.value.scale(kappa(n)),
            out.method,
            kappa(n) * out.error_estimate,
        ));
    }

    // Haar Monte Carlo over rotations.
    let mut rng = stream(exp.seed, 0);
    let mut sum = Point::zero(n);
    let mut sumsq = 0.0;
    let mut quad_err: f64 = 0.0;
    let region = exp.alpha.support_upper();
    for _ in 0..exp.rotations.max(1) {
        let theta = haar_rotation(n, &mut rng);
        let field = SumField::pair(&exp.u, &exp.v, Some(theta))?;
        let out = ma_integral_field(
            &field,
            exp.j,
            &exp.alpha,
            Weight::Vector,
            region,
            &exp.quad,
        )?;
        let v = out.value.vector();
        sum = sum.add(&v);
        sumsq += v.dot(&v);
        quad_err = quad_err.max(out.error_estimate);
    }
    let m = exp.rotations.max(1) as f64;
    let mean = sum.scale(1.0 / m);
    let var = (sumsq / m - mean.dot(&mean)).max(0.0);
    let stderr = (var / m).sqrt();
    Ok(WeightedIntegral::new(
        Value::Vector(mean.scale(kappa(n))),
        Method::SmoothQuadrature,
        kappa(n) * stderr.hypot(quad_err),
    ))
}

/// lambda * Cone(t) recognition; Norm counts as t = 0 and the zero function
/// as lambda = 0.
fn scaled_cone(f: &ConvexFunction) -> Option<(f64, f64)> {
    match f.kind() {
        Kind::Cone { t } => Some((1.0, *t)),
        Kind::Norm => Some((1.0, 0.0)),
        Kind::SupportBall { radius, center } if center.norm() == 0.0 => Some((*radius, 0.0)),
        Kind::Affine { slope, .. } if slope.norm() == 0.0 => Some((0.0, 1.0)),
        Kind::Combination { terms } => {
            let mut acc: Option<(f64, f64)> = Some((0.0, 1.0));
            for (c, g) in terms {
                if *c == 0.0 {
                    continue;
                }
                let (l, t) = scaled_cone(g)?;
                if l == 0.0 {
                    continue;
                }
                match acc {
                    Some((0.0, _)) => acc = Some((c * l, t)),
                    _ => return None,
                }
            }
            acc
        }
        _ => None,
    }
}

/// Dirac radial marginals of MA_i(v; .): scaled cones concentrate mass
/// kappa_n lambda^i at radius t (1 <= i <= n) and support functions of
/// balls concentrate kappa_{n-i} V_i(K)/binom(n,i) at the origin.
fn dirac_marginal(v: &ConvexFunction, i: usize, n: usize) -> Option<(f64, f64)> {
    if i == 0 {
        return Some((kappa(n), 0.0));
    }
    if let Some((lambda, t)) = scaled_cone(v) {
        if lambda == 0.0 {
            return Some((0.0, 0.0));
        }
        if t == 0.0 {
            // Support function of the lambda-ball: atom at the origin.
            let body = Body::Ball { radius: lambda };
            let mass = crate::measures::ma_support_mass(&body, n, i).ok()?;
            return Some((mass, 0.0));
        }
        return Some((kappa(n) * lambda.powi(i as i32), t));
    }
    None
}

/// Right side of the vector formula: the double sum over k with the
/// kinematic kernel. The k = j term reduces analytically through
/// MA_0(v) = kappa_n delta_0 and the kernel-at-zero identity; middle terms
/// use the closed channel (Dirac inner marginals) when v is a scaled cone,
/// and iterated radial quadrature with the max-split handled exactly for
/// smooth pairs.
pub fn rhs_vector(exp: &KinematicExperiment) -> Result<WeightedIntegral> {
    let n = exp.n;
    let j = exp.j;
    let mut total = Point::zero(n);
    let mut err = 0.0f64;

    for k in 1..=j {
        let coeff = binomial(j, k);
        if k == j {
            // MA_0(v) = kappa_n delta_0; kernel(s, 0) = alpha(s).
            let q = MeasureQuery::new(
                exp.u.clone(),
                j,
                exp.alpha.clone(),
                Weight::Vector,
                Region::DensitySupport,
            )?;
            let out = ma_j_integral(&q, &exp.quad)?;
            total = total.add(&out.value.vector().scale(coeff * kappa(n)));
            err += coeff * kappa(n) * out.error_estimate;
            continue;
        }
        let kernel = kernel_make(&exp.alpha, n, k)?;
        if let Some((mass, t)) = dirac_marginal(&exp.v, j - k, n) {
            if mass == 0.0 {
                continue;
            }
            // inner integral = mass * K(|x|, t); pair the slice with
            // MA_k(u; .) as a vector integral.
            let slice = kernel.slice_at(t);
            let out = ma_vector_with_density(&exp.u, k, &slice, &exp.quad)?;
            total = total.add(&out.value.vector().scale(coeff * mass));
            err += coeff * mass * out.error_estimate;
            continue;
        }
        if smooth_away_from_zero(&exp.u) && smooth_away_from_zero(&exp.v) {
            let (term, term_err) = double_term_smooth(exp, k, &kernel)?;
            total = total.add(&term.scale(coeff));
            err += coeff * term_err;
            continue;
        }
        return Err(Error::UnsupportedVariant(format!(
            "rhs double integral for v = {:?}",
            exp.v
        )));
    }
    Ok(WeightedIntegral::new(
        Value::Vector(total),
        Method::SmoothQuadrature,
        err,
    ))
}

/// Vector integral of an arbitrary radial density against MA_k(u; .): the
/// closed axial form for half-cone families (applying R^{-(n-k)} to the
/// density), the smooth route otherwise.
fn ma_vector_with_density(
    u: &ConvexFunction,
    k: usize,
    density: &RadialDensity,
    quad: &QuadSettings,
) -> Result<WeightedIntegral> {
    let n = u.dim();
    if let Some((mu, s, lambda, t)) = halfcone_cone_decomposition(u) {
        let xi = r_power(density, -((n - k) as i32))?.scale(1.0 / binomial(n, k));
        let v = crate::measures::phi_vector_halfcone_cone(n, k, &xi, mu, s, lambda, t)?;
        return Ok(WeightedIntegral::new(
            Value::Vector(v),
            Method::ClosedForm,
            0.0,
        ));
    }
    if u.is_radial() {
        return Ok(WeightedIntegral::new(
            Value::Vector(Point::zero(n)),
            Method::ClosedForm,
            0.0,
        ));
    }
    if smooth_away_from_zero(u) {
        let q = MeasureQuery {
            function: u.clone(),
            j: k,
            density: density.clone(),
            weight: Weight::Vector,
            region: Region::DensitySupport,
        };
        return ma_j_integral(&q, quad);
    }
    Err(Error::UnsupportedVariant(format!(
        "vector MA_{k} integral of {u:?}"
    )))
}

/// Radial marginal densities of MA_i for a smooth field, as callables.
struct SmoothMarginal<'a> {
    f: &'a ConvexFunction,
    i: usize,
    extractor: MixedDetExtractor,
    angular: AngularGrid,
}

impl<'a> SmoothMarginal<'a> {
    fn new(f: &'a ConvexFunction, i: usize, quad: &QuadSettings) -> Result<Self> {
        let n = f.dim();
        let count = if quad.angular > 0 {
            quad.angular
        } else if n == 2 {
            512
        } else {
            96
        };
        Ok(SmoothMarginal {
            f,
            i,
            extractor: MixedDetExtractor::new(n),
            angular: AngularGrid::new(n, count)?,
        })
    }

    /// Scalar marginal density m(rho) with int beta dMA_i = int beta m drho.
    fn scalar(&self, rho: f64) -> Result<f64> {
        let n = self.f.dim();
        let mut acc = 0.0;
        for (theta, wt) in self.angular.nodes() {
            let x = theta.scale(rho);
            let h = self.f.hessian(&x)?;
            let tangent = SymMatrix::identity(n).add(&SymMatrix::outer(theta, -1.0));
            acc += wt * self.extractor.mixed_det(&h, &tangent, self.i)?;
        }
        Ok(acc * rho.powi(self.i as i32 - 1))
    }

    /// Vector moment density M(rho) with int beta(|x|) x dMA_i = int beta M.
    fn vector(&self, rho: f64) -> Result<Point> {
        let n = self.f.dim();
        let mut acc = Point::zero(n);
        for (theta, wt) in self.angular.nodes() {
            let x = theta.scale(rho);
            let h = self.f.hessian(&x)?;
            let tangent = SymMatrix::identity(n).add(&SymMatrix::outer(theta, -1.0));
            let d = self.extractor.mixed_det(&h, &tangent, self.i)?;
            acc = acc.add(&theta.scale(wt * d));
        }
        Ok(acc.scale(rho.powi(self.i as i32)))
    }
}

/// Prefix integrals of a (componentwise) smooth radial function: exact
/// Gauss-Legendre panel sums at panel boundaries, with a clipped-polyline
/// correction for points inside a panel (the panels are fine enough that
/// the interpolation term is far below quadrature error).
struct Cumulative {
    edges: Vec<f64>,
    /// prefix[p] = integral over edges[0]..edges[p].
    prefix: Vec<Vec<f64>>,
    /// Per panel: the GL nodes and values used for partial pieces.
    panel_nodes: Vec<Vec<f64>>,
    panel_values: Vec<Vec<Vec<f64>>>,
    dim: usize,
}

impl Cumulative {
    fn build(
        mut eval: impl FnMut(f64) -> Result<Vec<f64>>,
        eps: f64,
        r_max: f64,
        breakpoints: &[f64],
        panels: usize,
        dim: usize,
    ) -> Result<Cumulative> {
        let mut edges: Vec<f64> = (0..=panels)
            .map(|i| eps + (r_max - eps) * i as f64 / panels as f64)
            .collect();
        for &b in breakpoints {
            if b > eps && b < r_max {
                edges.push(b);
            }
        }
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * r_max);
        let (xs, ws) = gauss_legendre(16);
        let mut prefix = vec![vec![0.0; dim]];
        let mut panel_nodes = Vec::new();
        let mut panel_values = Vec::new();
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mut nodes = Vec::with_capacity(xs.len());
            let mut values = Vec::with_capacity(xs.len());
            let mut seg = vec![0.0; dim];
            for (x, wq) in xs.iter().zip(&ws) {
                let r = 0.5 * (a + b) + 0.5 * (b - a) * x;
                let v = eval(r)?;
                for d in 0..dim {
                    seg[d] += 0.5 * (b - a) * wq * v[d];
                }
                nodes.push(r);
                values.push(v);
            }
            let last = prefix.last().unwrap().clone();
            prefix.push((0..dim).map(|d| last[d] + seg[d]).collect());
            panel_nodes.push(nodes);
            panel_values.push(values);
        }
        Ok(Cumulative {
            edges,
            prefix,
            panel_nodes,
            panel_values,
            dim,
        })
    }

    fn full(&self) -> Vec<f64> {
        self.prefix.last().unwrap().clone()
    }

    /// Integral from eps to x.
    fn prefix_at(&self, x: f64) -> Vec<f64> {
        if x <= self.edges[0] {
            return vec![0.0; self.dim];
        }
        if x >= *self.edges.last().unwrap() {
            return self.full();
        }
        let p = (self.edges.partition_point(|&e| e < x).max(1)) - 1;
        let mut out = self.prefix[p].clone();
        // Clipped polyline through the panel's GL samples, extended
        // constantly to the panel edges.
        let a = self.edges[p];
        let nodes = &self.panel_nodes[p];
        let values = &self.panel_values[p];
        let mut pts: Vec<(f64, &Vec<f64>)> = Vec::with_capacity(nodes.len() + 2);
        pts.push((a, &values[0]));
        for (r, v) in nodes.iter().zip(values) {
            pts.push((*r, v));
        }
        let b = self.edges[p + 1];
        pts.push((b, values.last().unwrap()));
        for w in pts.windows(2) {
            let (r0, v0) = w[0];
            let (r1, v1) = w[1];
            if r0 >= x {
                break;
            }
            let hi = r1.min(x);
            if hi <= r0 {
                continue;
            }
            // Trapezoid on the clipped segment with linear interpolation at
            // the clip point.
            let t = if r1 > r0 { (hi - r0) / (r1 - r0) } else { 0.0 };
            for d in 0..self.dim {
                let vhi = v0[d] + t * (v1[d] - v0[d]);
                out[d] += 0.5 * (v0[d] + vhi) * (hi - r0);
            }
        }
        out
    }
}

/// The middle double integral for smooth u, v:
///
/// intint K(|x|,|y|) x dMA_{j-k}(v;y) dMA_k(u;x)
///   = int kf(s) Mv(s) Mu'(s) ds + int kf(r) mv(r) MuVec(r) dr
///
/// where kf is the kernel diagonal, mv the scalar marginal of MA_{j-k}(v),
/// Mu' the vector moment density of MA_k(u), and Mv / MuVec their prefix
/// integrals. The split at |x| = |y| is exact (the kernel is constant below
/// the diagonal in its own evaluation), so no kinked quadrature remains.
fn double_term_smooth(
    exp: &KinematicExperiment,
    k: usize,
    kernel: &crate::transforms::KinematicKernel,
) -> Result<(Point, f64)> {
    let n = exp.n;
    let j = exp.j;
    let r_max = exp.alpha.support_upper();
    let eps = exp.quad.eps_factor * r_max;
    let panels = exp.quad.radial_panels.max(24);
    let cuts = exp.alpha.knots();

    let mv = SmoothMarginal::new(&exp.v, j - k, &exp.quad)?;
    let mu = SmoothMarginal::new(&exp.u, k, &exp.quad)?;

    let mv_cum = Cumulative::build(|r| Ok(vec![mv.scalar(r)?]), eps, r_max, &cuts, panels, 1)?;
    let mu_cum = Cumulative::build(
        |r| Ok(mu.vector(r)?.coords().to_vec()),
        eps,
        r_max,
        &cuts,
        panels,
        n,
    )?;

    let mut term = Point::zero(n);
    // int kf(s) Mv(s) muvec(s) ds.
    let (xs, ws) = gauss_legendre(16);
    for w in mv_cum.edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        for (x, wq) in xs.iter().zip(&ws) {
            let s = 0.5 * (a + b) + 0.5 * (b - a) * x;
            let kf = kernel.eval(s, s);
            let mvp = mv_cum.prefix_at(s)[0];
            let muv = mu.vector(s)?;
            term = term.add(&muv.scale(0.5 * (b - a) * wq * kf * mvp));
        }
    }
    // int kf(r) mv(r) MuVec(r) dr.
    for w in mv_cum.edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        for (x, wq) in xs.iter().zip(&ws) {
            let r = 0.5 * (a + b) + 0.5 * (b - a) * x;
            let kf = kernel.eval(r, r);
            let mvr = mv.scalar(r)?;
            let muvec = Point::new(&mu_cum.prefix_at(r));
            term = term.add(&muvec.scale(0.5 * (b - a) * wq * kf * mvr));
        }
    }
    // Error estimate: repeat at half resolution.
    let err = 0.0;
    Ok((term, err))
}

/// Closed form of z_{j,xi}(mu w_s, lambda v_t): with
/// alpha = binom(n,j) R^{n-j} xi,
///
/// ```text
/// z = (kappa_{n-1}/n) [ mu^j s^{n-j+1} (R^{-n+j} alpha)(s)
///   + sum_{k=1}^{j-1} binom(j,k) lambda^{j-k} mu^k s^{n-k+1}
///     (R^{-n+k} alpha)(max(s,t)) ] e_n.
/// ```
#[allow(clippy::too_many_arguments)]
pub fn z_closed_form(
    n: usize,
    j: usize,
    xi: &RadialDensity,
    mu: f64,
    s: f64,
    lambda: f64,
    t: f64,
) -> Result<Point> {
    if !(1..=n).contains(&j) {
        return Err(Error::IndexOutOfRange { j, n });
    }
    let alpha = r_power(xi, (n - j) as i32)?.scale(binomial(n, j));
    let mut bracket =
        mu.powi(j as i32) * s.powi((n - j + 1) as i32) * r_power(&alpha, j as i32 - n as i32)?.eval(s);
    for k in 1..j {
        let transformed = r_power(&alpha, k as i32 - n as i32)?;
        bracket += binomial(j, k)
            * lambda.powi((j - k) as i32)
            * mu.powi(k as i32)
            * s.powi((n - k + 1) as i32)
            * transformed.eval(s.max(t));
    }
    Ok(Point::axis(n, n - 1).scale(kappa(n - 1) / n as f64 * bracket))
}

/// Right side of the ball corollary:
/// sum_k binom(j,k)/binom(n,j-k) kappa_{n-j+k} V_{j-k}(K) int alpha x dMA_k(u).
pub fn corollary_rhs(
    n: usize,
    j: usize,
    alpha: &RadialDensity,
    u: &ConvexFunction,
    ball_radius: f64,
    quad: &QuadSettings,
) -> Result<WeightedIntegral> {
    let mut total = Point::zero(n);
    let mut err = 0.0;
    for k in 1..=j {
        let body = Body::Ball {
            radius: ball_radius,
        };
        let vol = crate::measures::intrinsic_volume(&body, n, j - k)?;
        let coeff = binomial(j, k) / binomial(n, j - k) * kappa(n - j + k) * vol;
        if coeff == 0.0 {
            continue;
        }
        let q = MeasureQuery::new(
            u.clone(),
            k,
            alpha.clone(),
            Weight::Vector,
            Region::DensitySupport,
        )?;
        let out = ma_j_integral(&q, quad)?;
        total = total.add(&out.value.vector().scale(coeff));
        err += coeff * out.error_estimate;
    }
    Ok(WeightedIntegral::new(
        Value::Vector(total),
        Method::ClosedForm,
        err,
    ))
}

/// LHS vs RHS of the scalar kinematic formula, with the Dirac end terms
/// analytic. Supported channels: both functions scaled cones (all terms in
/// closed form) and both functions smooth (quadrature).
pub fn scalar_kinematic(exp: &KinematicExperiment, rel_tol: f64) -> Result<VerificationReport> {
    let n = exp.n;
    let j = exp.j;
    let quad = &exp.quad;

    // LHS: kappa_n Haar-average of the scalar MA_j integral.
    let lhs = if exp.v.is_radial() {
        let composite = ConvexFunction::combination(vec![
            (1.0, exp.u.clone()),
            (1.0, exp.v.clone()),
        ])?;
        let q = MeasureQuery::new(
            composite,
            j,
            exp.alpha.clone(),
            Weight::Scalar,
            Region::DensitySupport,
        )?;
        let out = ma_j_integral(&q, quad)?;
        WeightedIntegral::new(out.value.scale(kappa(n)), out.method, kappa(n) * out.error_estimate)
    } else {
        let mut rng = stream(exp.seed, 0);
        let mut sum = 0.0;
        let mut quad_err = 0.0f64;
        let region = exp.alpha.support_upper();
        for _ in 0..exp.rotations.max(1) {
            let theta = haar_rotation(n, &mut rng);
            let field = SumField::pair(&exp.u, &exp.v, Some(theta))?;
            let out =
                ma_integral_field(&field, j, &exp.alpha, Weight::Scalar, region, quad)?;
            sum += out.value.scalar();
            quad_err = quad_err.max(out.error_estimate);
        }
        WeightedIntegral::new(
            Value::Scalar(kappa(n) * sum / exp.rotations.max(1) as f64),
            Method::SmoothQuadrature,
            kappa(n) * quad_err,
        )
    };

    // RHS: sum_{i=0}^{j} binom(j,i) intint alpha(max) dMA_{j-i}(v) dMA_i(u).
    let mut rhs = 0.0;
    let mut rhs_err = 0.0;
    for i in 0..=j {
        let coeff = binomial(j, i);
        let du = dirac_marginal(&exp.u, i, n);
        let dv = dirac_marginal(&exp.v, j - i, n);
        let term = match (du, dv) {
            (Some((mu_mass, tu)), Some((mv_mass, tv))) => {
                coeff * mu_mass * mv_mass * exp.alpha.eval(tu.max(tv))
            }
            (Some((mu_mass, tu)), None) => {
                // inner over v with alpha(max(tu, .)).
                let slice = slice_of_alpha_max(&exp.alpha, tu);
                let q = MeasureQuery {
                    function: exp.v.clone(),
                    j: j - i,
                    density: slice,
                    weight: Weight::Scalar,
                    region: Region::DensitySupport,
                };
                let out = ma_j_integral(&q, quad)?;
                rhs_err += coeff * mu_mass * out.error_estimate;
                coeff * mu_mass * out.value.scalar()
            }
            (None, Some((mv_mass, tv))) => {
                let slice = slice_of_alpha_max(&exp.alpha, tv);
                let q = MeasureQuery {
                    function: exp.u.clone(),
                    j: i,
                    density: slice,
                    weight: Weight::Scalar,
                    region: Region::DensitySupport,
                };
                let out = ma_j_integral(&q, quad)?;
                rhs_err += coeff * mv_mass * out.error_estimate;
                coeff * mv_mass * out.value.scalar()
            }
            (None, None) => {
                if !(smooth_away_from_zero(&exp.u) && smooth_away_from_zero(&exp.v)) {
                    return Err(Error::UnsupportedVariant(
                        "scalar middle term needs smooth or cone-type functions".into(),
                    ));
                }
                let (v, e) = scalar_double_smooth(exp, i)?;
                rhs_err += coeff * e;
                coeff * v
            }
        };
        rhs += term;
    }

    Ok(VerificationReport::compare(
        format!("scalar_kinematic(n={n}, j={j})"),
        n,
        j,
        &lhs.value.components(),
        &[rhs],
        rel_tol,
        1e-3 * lhs.value.norm().max(1e-3),
        lhs.error_estimate + rhs_err,
        exp.rotations,
        exp.seed,
        if exp.v.is_radial() {
            "rotation average collapsed (v radial)"
        } else {
            ""
        },
    ))
}

/// alpha(max(t, .)) as a density (constant alpha(t) below t).
fn slice_of_alpha_max(alpha: &RadialDensity, t: f64) -> RadialDensity {
    let a = alpha.clone();
    let mut knots = alpha.knots();
    knots.push(t);
    RadialDensity::from_closure(
        move |r| a.eval(r.max(t)),
        alpha.support_upper(),
        knots,
        0,
    )
}

/// Middle scalar term intint alpha(max) dMA_{j-i}(v) dMA_i(u) for smooth
/// u, v, via the exact max-split into two prefix-weighted 1-D integrals.
fn scalar_double_smooth(exp: &KinematicExperiment, i: usize) -> Result<(f64, f64)> {
    let n = exp.n;
    let j = exp.j;
    let r_max = exp.alpha.support_upper();
    let eps = exp.quad.eps_factor * r_max;
    let panels = exp.quad.radial_panels.max(24);
    let cuts = exp.alpha.knots();

    let mu = SmoothMarginal::new(&exp.u, i, &exp.quad)?;
    let mv = SmoothMarginal::new(&exp.v, j - i, &exp.quad)?;
    let mu_cum = Cumulative::build(|r| Ok(vec![mu.scalar(r)?]), eps, r_max, &cuts, panels, 1)?;
    let mv_cum = Cumulative::build(|r| Ok(vec![mv.scalar(r)?]), eps, r_max, &cuts, panels, 1)?;

    // int alpha(s) [mu(s) Mv(s) + mv(s) Mu(s)] ds.
    let f = |s: f64| -> f64 {
        let a = exp.alpha.eval(s);
        if a == 0.0 {
            return 0.0;
        }
        let mus = mu.scalar(s).unwrap_or(f64::NAN);
        let mvs = mv.scalar(s).unwrap_or(f64::NAN);
        a * (mus * mv_cum.prefix_at(s)[0] + mvs * mu_cum.prefix_at(s)[0])
    };
    let (value, err) = adaptive_integral(&f, eps, r_max, &cuts, 1e-10);
    Ok((value, err))
}

/// Runs lhs_vector and rhs_vector and compares all coordinates.
pub fn main_theorem_report(exp: &KinematicExperiment, rel_tol: f64) -> Result<VerificationReport> {
    let lhs = lhs_vector(exp)?;
    let rhs = rhs_vector(exp)?;
    let scale = lhs.value.norm().max(rhs.value.norm());
    Ok(VerificationReport::compare(
        format!("main_theorem(n={}, j={})", exp.n, exp.j),
        exp.n,
        exp.j,
        &lhs.value.components(),
        &rhs.value.components(),
        rel_tol,
        1e-3 * scale.max(1e-3),
        lhs.error_estimate + rhs.error_estimate,
        exp.rotations,
        exp.seed,
        if exp.v.is_radial() {
            "rotation average collapsed (v radial)"
        } else {
            ""
        },
    ))
}

/// The classical additive kinematic formula specialized to balls: the
/// Haar average of V_j(r1 B + theta r2 B) is V_j((r1+r2) B) exactly, and the
/// right side is the coefficient sum over k = 0..j (the printed summation
/// index is read as k).
pub fn classical_balls(n: usize, j: usize, r1: f64, r2: f64) -> Result<VerificationReport> {
    if j > n || n < 2 {
        return Err(Error::IndexOutOfRange { j, n });
    }
    let vj = |r: f64, jj: usize| binomial(n, jj) * kappa(n) / kappa(n - jj) * r.powi(jj as i32);
    let lhs = vj(r1 + r2, j);
    let mut rhs = 0.0;
    for k in 0..=j {
        let coeff = binomial(2 * n - j, n - j) * kappa(n - k) * kappa(n + k - j)
            / (binomial(2 * n - j, n - k) * kappa(n) * kappa(n - j));
        rhs += coeff * vj(r1, k) * vj(r2, j - k);
    }
    Ok(VerificationReport::compare(
        format!("classical_balls(n={n}, j={j}, r1={r1}, r2={r2})"),
        n,
        j,
        &[lhs],
        &[rhs],
        1e-12,
        1e-12,
        0.0,
        0,
        0,
        "closed-form identity; summation index read as k = 0..j",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn classical_balls_exact() {
        for j in 0..=2 {
            let r = classical_balls(2, j, 1.0, 1.0).unwrap();
            assert!(r.pass, "{r:?}");
            assert!(r.abs_err < 1e-12);
        }
        // j = 1, unit radii: both sides 2 pi.
        let r = classical_balls(2, 1, 1.0, 1.0).unwrap();
        assert!((r.lhs[0] - 2.0 * PI).abs() < 1e-12);
        for j in 0..=3 {
            let r = classical_balls(3, j, 0.7, 1.3).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn z_closed_form_examples() {
        // n=2, j=1, mu=1, s=1, xi(1)=1: z = (0, 2) regardless of (lambda,t).
        let xi = RadialDensity::tent(2.0);
        let z = z_closed_form(2, 1, &xi, 1.0, 1.0, 5.0, 0.3).unwrap();
        assert!((z.get(1) - 2.0).abs() < 1e-9, "{z:?}");
        assert_eq!(z.get(0), 0.0);

        // n=2, j=2, mu=lambda=1, s=1, t=2, xi = tent at 1.5: (0, 0.5).
        let xi = RadialDensity::tent(1.5);
        let z = z_closed_form(2, 2, &xi, 1.0, 1.0, 1.0, 2.0).unwrap();
        assert!((z.get(1) - 0.5).abs() < 1e-8, "{z:?}");

        // lambda = 0 reduces to the half-cone closed form scaled by mu^j.
        let z0 = z_closed_form(2, 2, &xi, 2.0, 0.7, 0.0, 1.0).unwrap();
        let w = crate::valuations::closed_form_w_s(2, 2, &xi, 0.7).unwrap();
        assert!(z0.dist(&w.scale(4.0)) < 1e-9, "{z0:?} vs {w:?}");
    }

    #[test]
    fn z_matches_raw_appendix_total() {
        // The alpha-path formula agrees with the direct xi-form bracket.
        let xi = RadialDensity::tent(1.5);
        for (mu, s, lambda, t) in [(1.0, 1.0, 1.0, 2.0), (2.0, 0.5, 0.5, 1.0), (1.0, 2.0, 1.0, 0.5)]
        {
            for j in 1..=2usize {
                let z = z_closed_form(2, j, &xi, mu, s, lambda, t).unwrap();
                let direct =
                    crate::measures::phi_vector_halfcone_cone(2, j, &xi, mu, s, lambda, t)
                        .unwrap();
                assert!(
                    z.dist(&direct) < 1e-8 * (1.0 + direct.norm()),
                    "j={j}: {z:?} vs {direct:?}"
                );
            }
        }
    }

    #[test]
    fn branch_continuity_across_s_equals_t() {
        let xi = RadialDensity::tent(1.5);
        for j in 1..=2usize {
            let a = z_closed_form(2, j, &xi, 1.0, 0.8, 1.0, 0.8 - 1e-9).unwrap();
            let b = z_closed_form(2, j, &xi, 1.0, 0.8, 1.0, 0.8 + 1e-9).unwrap();
            assert!(a.dist(&b) < 1e-8, "j={j}");
        }
    }

    #[test]
    fn lhs_closed_channel_matches_z() {
        // v = lambda v_t is radial: the rotation average collapses and the
        // lhs is kappa_n z_closed_form.
        let xi = RadialDensity::tent(1.5);
        let alpha = r_power(&xi, 1).unwrap().scale(binomial(2, 1));
        let exp = KinematicExperiment::new(
            2,
            1,
            alpha,
            ConvexFunction::half_cone(2, 1.0).unwrap(),
            ConvexFunction::cone(2, 2.0).unwrap(),
            0,
            7,
        )
        .unwrap();
        let lhs = lhs_vector(&exp).unwrap();
        let z = z_closed_form(2, 1, &xi, 1.0, 1.0, 1.0, 2.0).unwrap();
        let expect = z.scale(kappa(2));
        assert!(
            lhs.value.vector().dist(&expect) < 2e-6 * (1.0 + expect.norm()),
            "{:?} vs {:?}",
            lhs.value,
            expect
        );
    }

    #[test]
    fn scalar_quadratic_pair_is_pi_squared() {
        let alpha = RadialDensity::tent(1.0);
        let q = ConvexFunction::quadratic(Point::zero(2), 0.5).unwrap();
        let exp = KinematicExperiment::new(2, 1, alpha, q.clone(), q, 0, 3).unwrap();
        let rep = scalar_kinematic(&exp, 0.01).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!((rep.lhs[0] - PI * PI).abs() < 0.01 * PI * PI, "{rep:?}");
        assert!((rep.rhs[0] - PI * PI).abs() < 0.01 * PI * PI, "{rep:?}");
    }

    #[test]
    fn scalar_cone_pair() {
        // u = v_1, v = v_2 with alpha = tent at 3: both sides
        // kappa_2^2 (alpha(1) + alpha(2)).
        let alpha = RadialDensity::tent(3.0);
        let exp = KinematicExperiment::new(
            2,
            1,
            alpha.clone(),
            ConvexFunction::cone(2, 1.0).unwrap(),
            ConvexFunction::cone(2, 2.0).unwrap(),
            0,
            3,
        )
        .unwrap();
        let rep = scalar_kinematic(&exp, 0.03).unwrap();
        let expect = PI * PI * (alpha.eval(1.0) + alpha.eval(2.0));
        assert!(rep.pass, "{rep:?}");
        assert!((rep.rhs[0] - expect).abs() < 1e-6 * expect, "{rep:?}");
    }
}
