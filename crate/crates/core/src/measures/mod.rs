//! Weighted integrals against Hessian measures Phi^n_j and mixed
//! Monge-Ampere measures MA_j, along independent routes:
//!
//! * smooth quadrature of the closed-form densities ([Hess f]_j for Hessian
//!   measures, mixed discriminants against Hess |x| for MA_j),
//! * exact closed forms for the canonical nonsmooth functions (radial
//!   piecewise-linear profiles and half-cone combinations),
//! * a prox-based Steiner oracle (Monte Carlo parallel-set volumes), the
//!   brute-force route independent of every density formula,
//! * analytic Dirac handling for MA_0 and support functions.
//!
//! Routes are cross-checked whenever more than one applies; disagreement
//! beyond tolerance is an error rather than a warning, since it flags an
//! implementation bug.

mod oracle;
mod profiles;

pub use oracle::{phi_region_oracle, phi_weighted_oracle, CellPartition, OracleSettings};
pub use profiles::{
    halfcone_cone_decomposition, phi_scalar_radial_pl, phi_vector_halfcone_cone,
    smooth_away_from_zero, smooth_measure_integral, C2Field, MeasureKind, SumField,
};

use crate::convexfn::ConvexFunction;
use crate::numerics::{binomial, gauss_legendre, kappa, Point, QuadratureGrid, SymMatrix};
use crate::transforms::{r_power, RadialDensity};
use crate::{Error, Result};

/// Scalar-or-vector weighted value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Scalar(f64),
    Vector(Point),
}

impl Value {
    pub fn components(&self) -> Vec<f64> {
        match self {
            Value::Scalar(v) => vec![*v],
            Value::Vector(p) => p.coords().to_vec(),
        }
    }

    pub fn from_components(c: &[f64], vector: bool) -> Value {
        if vector {
            Value::Vector(Point::new(c))
        } else {
            Value::Scalar(c[0])
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            Value::Scalar(v) => v.abs(),
            Value::Vector(p) => p.norm(),
        }
    }

    pub fn scalar(&self) -> f64 {
        match self {
            Value::Scalar(v) => *v,
            Value::Vector(_) => panic!("expected scalar value"),
        }
    }

    pub fn vector(&self) -> Point {
        match self {
            Value::Vector(p) => *p,
            Value::Scalar(_) => panic!("expected vector value"),
        }
    }

    pub fn sub_norm(&self, other: &Value) -> f64 {
        self.components()
            .iter()
            .zip(other.components())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn add(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(a + b),
            (Value::Vector(a), Value::Vector(b)) => Value::Vector(a.add(b)),
            _ => panic!("mixed value kinds"),
        }
    }

    pub fn scale(&self, c: f64) -> Value {
        match self {
            Value::Scalar(a) => Value::Scalar(c * a),
            Value::Vector(a) => Value::Vector(a.scale(c)),
        }
    }
}

/// How a weighted integral was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    SmoothQuadrature,
    ProxSteiner,
    AnalyticDirac,
    ClosedForm,
}

/// A measure integral with its provenance and accuracy estimate.
#[derive(Clone, Debug)]
pub struct WeightedIntegral {
    pub value: Value,
    pub method: Method,
    pub error_estimate: f64,
}

impl WeightedIntegral {
    pub fn new(value: Value, method: Method, error_estimate: f64) -> Self {
        WeightedIntegral {
            value,
            method,
            error_estimate: error_estimate.abs(),
        }
    }
}

/// Scalar or vector weight in the integrand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weight {
    Scalar,
    Vector,
}

/// Integration region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    /// Origin-centered ball of the given radius.
    Ball(f64),
    /// The full support of the query density.
    DensitySupport,
}

impl Region {
    pub fn radius(&self, density: &RadialDensity) -> f64 {
        match self {
            Region::Ball(r) => *r,
            Region::DensitySupport => density.support_upper(),
        }
    }
}

/// A weighted measure integral query.
#[derive(Clone, Debug)]
pub struct MeasureQuery {
    pub function: ConvexFunction,
    pub j: usize,
    pub density: RadialDensity,
    pub weight: Weight,
    pub region: Region,
}

impl MeasureQuery {
    pub fn new(
        function: ConvexFunction,
        j: usize,
        density: RadialDensity,
        weight: Weight,
        region: Region,
    ) -> Result<Self> {
        let n = function.dim();
        if j > n {
            return Err(Error::IndexOutOfRange { j, n });
        }
        if weight == Weight::Vector && j >= 1 {
            // Vector-weighted pairings require the T^n_j decay; a clearly
            // divergent density is rejected here.
            crate::transforms::certify(&density, crate::transforms::ClassTag::t(n, j))?;
        }
        Ok(MeasureQuery {
            function,
            j,
            density,
            weight,
            region,
        })
    }
}

/// Quadrature resolution knobs shared by the smooth routes.
#[derive(Clone, Debug)]
pub struct QuadSettings {
    pub radial_panels: usize,
    pub angular: usize,
    pub eps_factor: f64,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings {
            radial_panels: 48,
            angular: 0, // 0 = pick by dimension
            eps_factor: 1e-3,
        }
    }
}

impl QuadSettings {
    pub fn grid(&self, n: usize, r_max: f64, breakpoints: &[f64]) -> Result<QuadratureGrid> {
        let angular = if self.angular > 0 {
            self.angular
        } else if n == 2 {
            512
        } else {
            96
        };
        QuadratureGrid::new(
            n,
            self.eps_factor * r_max,
            r_max,
            breakpoints,
            self.radial_panels,
            angular,
        )
    }
}

/// Quadrature of int xi(|x|) [Hess f(x)]_j dx (times x for vector weight)
/// over the region; the function must be C^2 there away from the cutoff ball.
pub fn phi_integral_smooth(q: &MeasureQuery, settings: &QuadSettings) -> Result<WeightedIntegral> {
    let n = q.function.dim();
    let r = q.region.radius(&q.density);
    let mut cuts = q.density.knots();
    cuts.extend(q.function.singular_radii());
    let grid = settings.grid(n, r, &cuts)?;
    let (v, err) = smooth_measure_integral(
        &q.function,
        q.j,
        MeasureKind::Hessian,
        &q.density,
        q.weight == Weight::Vector,
        r,
        &grid,
    )?;
    Ok(WeightedIntegral::new(
        Value::from_components(&v, q.weight == Weight::Vector),
        Method::SmoothQuadrature,
        err,
    ))
}

/// All cheaply available routes for the Hessian-measure integral
/// int xi(|x|) (x) dPhi^n_j(f; x) over an origin-centered ball.
pub(crate) fn phi_routes(
    f: &ConvexFunction,
    j: usize,
    xi: &RadialDensity,
    weight: Weight,
    region_radius: f64,
    settings: &QuadSettings,
) -> Result<Vec<WeightedIntegral>> {
    let n = f.dim();
    let mut routes = Vec::new();

    if let Some((knots, slopes)) = f.radial_pl_profile() {
        match weight {
            Weight::Scalar => {
                let v = phi_scalar_radial_pl(n, j, &knots, &slopes, xi, region_radius)?;
                routes.push(WeightedIntegral::new(
                    Value::Scalar(v),
                    Method::ClosedForm,
                    0.0,
                ));
            }
            Weight::Vector => {
                // Radial symmetry: the vector integral vanishes identically.
                routes.push(WeightedIntegral::new(
                    Value::Vector(Point::zero(n)),
                    Method::ClosedForm,
                    0.0,
                ));
            }
        }
    }

    if weight == Weight::Vector && j >= 1 {
        if let Some((mu, s, lambda, t)) = halfcone_cone_decomposition(f) {
            let v = phi_vector_halfcone_cone(n, j, xi, mu, s, lambda, t)?;
            routes.push(WeightedIntegral::new(
                Value::Vector(v),
                Method::ClosedForm,
                0.0,
            ));
        }
    }

    if smooth_away_from_zero(f) {
        let q = MeasureQuery {
            function: f.clone(),
            j,
            density: xi.clone(),
            weight,
            region: Region::Ball(region_radius),
        };
        routes.push(phi_integral_smooth(&q, settings)?);
    }

    Ok(routes)
}

/// Cross-checks routes, failing on relative disagreement beyond 1%, and
/// returns the most trusted one (closed form first, then quadrature).
pub(crate) fn reconcile(what: &str, routes: Vec<WeightedIntegral>) -> Result<WeightedIntegral> {
    if routes.is_empty() {
        return Err(Error::UnsupportedVariant(format!(
            "no route available for {what}"
        )));
    }
    let floor = 1e-6;
    for i in 0..routes.len() {
        for k in (i + 1)..routes.len() {
            let a = &routes[i];
            let b = &routes[k];
            let scale = a.value.norm().max(b.value.norm());
            let diff = a.value.sub_norm(&b.value);
            let tol_abs = floor + 3.0 * (a.error_estimate + b.error_estimate);
            if diff > 0.01 * scale && diff > tol_abs {
                return Err(Error::RouteMismatch {
                    what: what.into(),
                    a: a.value.components(),
                    b: b.value.components(),
                    rel: diff / scale.max(1e-300),
                });
            }
        }
    }
    let mut best = routes[0].clone();
    for r in routes.into_iter().skip(1) {
        let better = match (r.method, best.method) {
            (Method::ClosedForm, m) if m != Method::ClosedForm => true,
            _ => r.error_estimate < best.error_estimate && r.method == best.method,
        };
        if better {
            best = r;
        }
    }
    Ok(best)
}

/// Weighted integral against the mixed Monge-Ampere measure MA_j(f; .),
/// through two independent routes wherever both apply:
///
/// (a) smooth route: quadrature of alpha(|x|) D(Hess f [j], Hess|x| [n-j]),
/// (b) transform route: conversion to a Hessian-measure integral with
///     xi = R^{-(n-j)} alpha / binom(n, j).
///
/// Disagreement beyond 1% relative is an error. j = 0 is the analytic Dirac.
pub fn ma_j_integral(q: &MeasureQuery, settings: &QuadSettings) -> Result<WeightedIntegral> {
    let n = q.function.dim();
    if q.j == 0 {
        return ma0_integral(&q.density, q.weight, q.region, n);
    }
    let r = q.region.radius(&q.density);
    let mut routes = Vec::new();

    if smooth_away_from_zero(&q.function) {
        let mut cuts = q.density.knots();
        cuts.extend(q.function.singular_radii());
        let grid = settings.grid(n, r, &cuts)?;
        let (v, err) = smooth_measure_integral(
            &q.function,
            q.j,
            MeasureKind::MongeAmpere,
            &q.density,
            q.weight == Weight::Vector,
            r,
            &grid,
        )?;
        routes.push(WeightedIntegral::new(
            Value::from_components(&v, q.weight == Weight::Vector),
            Method::SmoothQuadrature,
            err,
        ));
    }

    // Transform route: xi = R^{-(n-j)} alpha / binom(n,j).
    let xi = r_power(&q.density, -((n - q.j) as i32))?.scale(1.0 / binomial(n, q.j));
    routes.extend(phi_routes(&q.function, q.j, &xi, q.weight, r, settings)?);

    reconcile(&format!("MA_{} integral of {:?}", q.j, q.function), routes)
}

/// Smooth-route MA_j integral of an arbitrary Hessian field (rotated sums of
/// smooth functions); no cross-route check, since closed forms generally do
/// not exist for composites.
pub fn ma_integral_field(
    field: &dyn C2Field,
    j: usize,
    alpha: &RadialDensity,
    weight: Weight,
    region_radius: f64,
    settings: &QuadSettings,
) -> Result<WeightedIntegral> {
    let n = field.dim();
    if j == 0 {
        return ma0_integral(alpha, weight, Region::Ball(region_radius), n);
    }
    let mut cuts = alpha.knots();
    cuts.extend(field.singular_radii());
    let grid = settings.grid(n, region_radius, &cuts)?;
    let (v, err) = smooth_measure_integral(
        field,
        j,
        MeasureKind::MongeAmpere,
        alpha,
        weight == Weight::Vector,
        region_radius,
        &grid,
    )?;
    Ok(WeightedIntegral::new(
        Value::from_components(&v, weight == Weight::Vector),
        Method::SmoothQuadrature,
        err,
    ))
}

/// MA_0(v; .) = kappa_n delta_0: the scalar pairing is kappa_n alpha(0+)
/// when the region contains the origin, and the vector weight kills the atom.
pub fn ma0_integral(
    alpha: &RadialDensity,
    weight: Weight,
    region: Region,
    n: usize,
) -> Result<WeightedIntegral> {
    let contains_origin = match region {
        Region::Ball(r) => r > 0.0,
        Region::DensitySupport => true,
    };
    let value = match weight {
        Weight::Vector => Value::Vector(Point::zero(n)),
        Weight::Scalar => {
            if !contains_origin {
                Value::Scalar(0.0)
            } else {
                let v1 = alpha.eval(1e-9);
                let v2 = alpha.eval(1e-10);
                if !v1.is_finite() || !v2.is_finite() || (v1 - v2).abs() > 1e-5 * (1.0 + v1.abs())
                {
                    return Err(Error::ClassViolation {
                        class: "D^n_n".into(),
                        detail: "density has no finite limit at 0+ for the MA_0 atom".into(),
                    });
                }
                Value::Scalar(kappa(n) * v2)
            }
        }
    };
    Ok(WeightedIntegral::new(value, Method::AnalyticDirac, 0.0))
}

/// Convex bodies with closed-form intrinsic volumes.
#[derive(Clone, Debug)]
pub enum Body {
    Ball { radius: f64 },
    Ellipse { matrix: SymMatrix },
    Segment { length: f64 },
}

/// Intrinsic volume V_j(K) for the three supported families (the ellipse is
/// planar; its perimeter is a Gauss-Legendre quadrature of the boundary
/// speed, exact to machine precision for these smooth curves).
pub fn intrinsic_volume(body: &Body, n: usize, j: usize) -> Result<f64> {
    if j > n {
        return Err(Error::IndexOutOfRange { j, n });
    }
    match body {
        Body::Ball { radius } => {
            Ok(binomial(n, j) * kappa(n) / kappa(n - j) * radius.powi(j as i32))
        }
        Body::Segment { length } => Ok(match j {
            0 => 1.0,
            1 => *length,
            _ => 0.0,
        }),
        Body::Ellipse { matrix } => {
            if matrix.dim() != 2 {
                return Err(Error::UnsupportedBody(
                    "ellipse bodies are planar (n = 2)".into(),
                ));
            }
            let (l1, l2) = sym2_eigenvalues(matrix);
            if l1 <= 0.0 || l2 <= 0.0 {
                return Err(Error::UnsupportedBody("ellipse matrix not positive definite".into()));
            }
            let (a, b) = (l1.sqrt(), l2.sqrt());
            Ok(match j {
                0 => 1.0,
                1 => ellipse_perimeter(a, b) / 2.0,
                2 => std::f64::consts::PI * a * b,
                _ => 0.0,
            })
        }
    }
}

/// Total mass of MA(h_K[j], h_B[n-j]; .), which concentrates at the origin:
/// kappa_{n-j} V_j(K) / binom(n, j).
pub fn ma_support_mass(body: &Body, n: usize, j: usize) -> Result<f64> {
    Ok(kappa(n - j) * intrinsic_volume(body, n, j)? / binomial(n, j))
}

fn sym2_eigenvalues(m: &SymMatrix) -> (f64, f64) {
    let (a, b, c) = (m.get(0, 0), m.get(0, 1), m.get(1, 1));
    let tr = a + c;
    let disc = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (0.5 * tr + disc, 0.5 * tr - disc)
}

fn ellipse_perimeter(a: f64, b: f64) -> f64 {
    let (xs, ws) = gauss_legendre(64);
    // 4 int_0^{pi/2} sqrt(a^2 sin^2 + b^2 cos^2).
    let h = std::f64::consts::FRAC_PI_2;
    let mut s = 0.0;
    for (x, w) in xs.iter().zip(&ws) {
        let th = 0.5 * h * (x + 1.0);
        let v = (a * a * th.sin().powi(2) + b * b * th.cos().powi(2)).sqrt();
        s += w * v;
    }
    4.0 * s * 0.5 * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn support_masses() {
        let disk = Body::Ball { radius: 1.0 };
        assert!((ma_support_mass(&disk, 2, 1).unwrap() - PI).abs() < 1e-12);
        assert!((ma_support_mass(&disk, 2, 0).unwrap() - PI).abs() < 1e-12);
        let seg = Body::Segment { length: 2.0 };
        assert!((ma_support_mass(&seg, 2, 1).unwrap() - 2.0).abs() < 1e-12);
        // Circle as a degenerate ellipse agrees with the ball.
        let circ = Body::Ellipse {
            matrix: SymMatrix::identity(2),
        };
        assert!((intrinsic_volume(&circ, 2, 1).unwrap() - PI).abs() < 1e-10);
        assert!((intrinsic_volume(&circ, 2, 2).unwrap() - PI).abs() < 1e-12);
    }

    #[test]
    fn ma0_atom() {
        let alpha = crate::transforms::RadialDensity::tent(1.0);
        let v = ma0_integral(&alpha, Weight::Scalar, Region::Ball(1.0), 2).unwrap();
        assert!((v.value.scalar() - PI).abs() < 1e-6);
        let v = ma0_integral(&alpha, Weight::Vector, Region::Ball(1.0), 2).unwrap();
        assert_eq!(v.value.vector().coords(), &[0.0, 0.0]);
    }

    #[test]
    fn ma_j_routes_agree_for_quadratic() {
        // Both routes reduce analytically to pi * int alpha = pi/2.
        let alpha = crate::transforms::RadialDensity::tent(1.0);
        let f = ConvexFunction::quadratic(Point::zero(2), 0.5).unwrap();
        let q = MeasureQuery::new(f, 1, alpha, Weight::Scalar, Region::DensitySupport).unwrap();
        let v = ma_j_integral(&q, &QuadSettings::default()).unwrap();
        assert!(
            (v.value.scalar() - PI / 2.0).abs() < 1e-3,
            "{:?}",
            v.value
        );
    }

    #[test]
    fn ma_j_transform_route_for_cone() {
        // The MA_j radial marginal of v_t concentrates at t: value
        // kappa_2 alpha(1) for alpha = tent at 1.5.
        let alpha = crate::transforms::RadialDensity::tent(1.5);
        let f = ConvexFunction::cone(2, 1.0).unwrap();
        let q = MeasureQuery::new(f, 1, alpha, Weight::Scalar, Region::DensitySupport).unwrap();
        let v = ma_j_integral(&q, &QuadSettings::default()).unwrap();
        assert!(
            (v.value.scalar() - PI * 0.5).abs() < 1e-6,
            "{:?}",
            v.value
        );
    }

    #[test]
    fn ma_j_axial_for_halfcone() {
        // Theorem-B route: s^2 (R^{-1} alpha)(s) e_2 for n=2, j=1.
        let alpha = crate::transforms::RadialDensity::tent(1.5);
        let f = ConvexFunction::half_cone(2, 1.0).unwrap();
        let q = MeasureQuery::new(f, 1, alpha.clone(), Weight::Vector, Region::DensitySupport)
            .unwrap();
        let v = ma_j_integral(&q, &QuadSettings::default()).unwrap();
        let expect = (1.5f64).ln(); // R^{-1}(tent at 1.5)(1) = ln 1.5
        assert!((v.value.vector().get(1) - expect).abs() < 1e-8, "{v:?}");
    }
}
