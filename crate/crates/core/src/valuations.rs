//! Functional intrinsic volumes V*_{j,xi} and functional Minkowski vectors
//! t*_{j,xi}: scalar and vector valuations pairing a radial test density
//! with the Hessian measures of a convex function,
//!
//! ```text
//! V*_{j,xi}(f) = int xi(|x|)   dPhi^n_j(f; x)      (xi in D^n_j)
//! t*_{j,xi}(f) = int xi(|x|) x dPhi^n_j(f; x)      (xi in T^n_j)
//! ```
//!
//! with closed forms on the canonical cone functions and the vanishing check
//! on support functions (the Minkowski relation).

use crate::convexfn::ConvexFunction;
use crate::kinematics::VerificationReport;
use crate::measures::{
    self, ma_integral_field, phi_vector_halfcone_cone, MeasureKind, Method, QuadSettings,
    SumField, Value, Weight, WeightedIntegral,
};

use crate::numerics::{binomial, kappa, omega, Point, Rotation, SymMatrix};
use crate::transforms::{certify, r_power, ClassTag, RadialDensity};
use crate::{Error, Result};

/// Which valuation family a spec describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValuationKind {
    /// Scalar functional intrinsic volume V*.
    ScalarV,
    /// Vector functional Minkowski vector t*.
    VectorT,
}

/// Degree, density and class certification for one valuation.
#[derive(Clone, Debug)]
pub struct ValuationSpec {
    pub kind: ValuationKind,
    pub n: usize,
    pub j: usize,
    pub density: RadialDensity,
}

impl ValuationSpec {
    /// Scalar valuation of degree j; the density must pass the D^n_j check.
    pub fn scalar(n: usize, j: usize, density: RadialDensity) -> Result<Self> {
        if j > n {
            return Err(Error::IndexOutOfRange { j, n });
        }
        certify(&density, ClassTag::d(n, j))?;
        Ok(ValuationSpec {
            kind: ValuationKind::ScalarV,
            n,
            j,
            density,
        })
    }

    /// Vector valuation of degree j in 1..=n; the density must pass T^n_j.
    pub fn vector(n: usize, j: usize, density: RadialDensity) -> Result<Self> {
        if !(1..=n).contains(&j) {
            return Err(Error::IndexOutOfRange { j, n });
        }
        certify(&density, ClassTag::t(n, j))?;
        Ok(ValuationSpec {
            kind: ValuationKind::VectorT,
            n,
            j,
            density,
        })
    }
}

/// Every cheaply available route: the Hessian-measure routes plus, for
/// smooth functions, the Monge-Ampere representation with
/// alpha = binom(n,j) R^{n-j} xi (the decomposition-theorem route).
fn routes(
    spec: &ValuationSpec,
    f: &ConvexFunction,
    weight: Weight,
    settings: &QuadSettings,
) -> Result<Vec<WeightedIntegral>> {
    let n = spec.n;
    if f.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "valuation built for n={n}, function has n={}",
            f.dim()
        )));
    }
    let region_radius = spec.density.support_upper();
    let mut routes =
        measures::phi_routes(f, spec.j, &spec.density, weight, region_radius, settings)?;

    if spec.j >= 1 && measures::smooth_away_from_zero(f) {
        let alpha = r_power(&spec.density, (n - spec.j) as i32)?.scale(binomial(n, spec.j));
        let mut cuts = alpha.knots();
        cuts.extend(measures::C2Field::singular_radii(f));
        let grid = settings.grid(n, region_radius, &cuts)?;
        let (v, err) = measures::smooth_measure_integral(
            f,
            spec.j,
            MeasureKind::MongeAmpere,
            &alpha,
            weight == Weight::Vector,
            region_radius,
            &grid,
        )?;
        routes.push(WeightedIntegral::new(
            Value::from_components(&v, weight == Weight::Vector),
            Method::SmoothQuadrature,
            err,
        ));
    }
    Ok(routes)
}

/// V*_{j,xi}(f), cross-checking all available routes.
pub fn v_star(spec: &ValuationSpec, f: &ConvexFunction, settings: &QuadSettings) -> Result<f64> {
    if spec.kind != ValuationKind::ScalarV {
        return Err(Error::InvalidParameter("spec is not a scalar valuation".into()));
    }
    if spec.j == 0 {
        // Phi_0 is Lebesgue measure: the integral is independent of f.
        let v = omega(spec.n) * spec.density.tail_integral(spec.n as i32 - 1, 1e-300);
        return Ok(v);
    }
    let routes = routes(spec, f, Weight::Scalar, settings)?;
    Ok(
        measures::reconcile(&format!("V*_{{{},xi}}", spec.j), routes)?
            .value
            .scalar(),
    )
}

/// t*_{j,xi}(f), cross-checking all available routes.
pub fn t_star(spec: &ValuationSpec, f: &ConvexFunction, settings: &QuadSettings) -> Result<Point> {
    if spec.kind != ValuationKind::VectorT {
        return Err(Error::InvalidParameter("spec is not a vector valuation".into()));
    }
    let routes = routes(spec, f, Weight::Vector, settings)?;
    Ok(
        measures::reconcile(&format!("t*_{{{},xi}}", spec.j), routes)?
            .value
            .vector(),
    )
}

/// t* of a rotated smooth function f o theta^{-1}, through the smooth
/// Monge-Ampere route on the rotated Hessian field (used by the rotation
/// equivariance checks).
pub fn t_star_rotated(
    spec: &ValuationSpec,
    f: &ConvexFunction,
    theta: &Rotation,
    settings: &QuadSettings,
) -> Result<Point> {
    let alpha = r_power(&spec.density, (spec.n - spec.j) as i32)?.scale(binomial(spec.n, spec.j));
    let field = SumField::new(vec![(1.0, f.clone(), Some(*theta))])?;
    let out = ma_integral_field(
        &field,
        spec.j,
        &alpha,
        Weight::Vector,
        spec.density.support_upper(),
        settings,
    )?;
    Ok(out.value.vector())
}

/// Closed form on the cone v_t for 1 <= j <= n-1:
/// kappa_n binom(n,j) [ t^{n-j} xi(t) + (n-j) int_t^inf r^{n-j-1} xi ],
/// which equals kappa_n binom(n,j) (R^{n-j} xi)(t).
pub fn closed_form_v_t(n: usize, j: usize, xi: &RadialDensity, t: f64) -> Result<f64> {
    if !(1..n).contains(&j) {
        return Err(Error::IndexOutOfRange { j, n });
    }
    if t <= 0.0 {
        return Err(Error::InvalidParameter("t must be > 0".into()));
    }
    let m = (n - j) as i32;
    Ok(kappa(n)
        * binomial(n, j)
        * (t.powi(m) * xi.eval(t) + m as f64 * xi.tail_integral(m - 1, t)))
}

/// Closed form on the half-cone w_s for 1 <= j <= n:
/// (1/n) binom(n,j) kappa_{n-1} s^{n-j+1} xi(s) e_n.
pub fn closed_form_w_s(n: usize, j: usize, xi: &RadialDensity, s: f64) -> Result<Point> {
    if !(1..=n).contains(&j) {
        return Err(Error::IndexOutOfRange { j, n });
    }
    if s <= 0.0 {
        return Err(Error::InvalidParameter("s must be > 0".into()));
    }
    phi_vector_halfcone_cone(n, j, xi, 1.0, s, 0.0, 1.0)
}

/// Bodies accepted by the vanishing check.
#[derive(Clone, Debug)]
pub enum VanishingBody {
    Ball { radius: f64, center: Point },
    Ellipse { matrix: SymMatrix },
}

/// The Minkowski relation: functional Minkowski vectors vanish identically
/// on support functions. Computes int alpha(|x|) x dMA(h_K[j], h_B[n-j]; x)
/// by smooth quadrature (h_K is C^2 away from the origin) and asserts the
/// norm stays below the tolerance.
pub fn minkowski_vanishing(
    body: &VanishingBody,
    n: usize,
    j: usize,
    alpha: &RadialDensity,
    tolerance: f64,
) -> Result<VerificationReport> {
    let h_k = match body {
        VanishingBody::Ball { radius, center } => ConvexFunction::support_ball(*radius, *center)?,
        VanishingBody::Ellipse { matrix } => ConvexFunction::support_ellipse(*matrix)?,
    };
    if h_k.dim() != n {
        return Err(Error::DimensionMismatch("body dimension".into()));
    }
    certify(alpha, ClassTag::t(n, n))?;
    let settings = QuadSettings::default();
    let region = alpha.support_upper();
    let grid = settings.grid(n, region, &alpha.knots())?;
    let (v, err) = measures::smooth_measure_integral(
        &h_k,
        j,
        MeasureKind::MongeAmpere,
        alpha,
        true,
        region,
        &grid,
    )?;
    let mut report = VerificationReport::near_zero(
        format!("minkowski_vanishing(n={n}, j={j})"),
        n,
        j,
        &v,
        tolerance,
        err,
    );
    report.notes = format!("{body:?}");
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn settings() -> QuadSettings {
        QuadSettings::default()
    }

    #[test]
    fn v_star_on_cone_matches_lemma() {
        let xi = RadialDensity::tent(1.5);
        let spec = ValuationSpec::scalar(2, 1, xi.clone()).unwrap();
        let f = ConvexFunction::cone(2, 1.0).unwrap();
        let v = v_star(&spec, &f, &settings()).unwrap();
        assert!((v - 1.25 * PI).abs() < 1e-10, "{v}");
        let cf = closed_form_v_t(2, 1, &xi, 1.0).unwrap();
        assert!((v - cf).abs() < 1e-12);
    }

    #[test]
    fn closed_form_v_t_equals_transform_identity() {
        let xi = RadialDensity::tent(1.5);
        for (n, j, t) in [(2usize, 1usize, 0.8f64), (3, 1, 1.2), (3, 2, 0.4)] {
            let lhs = closed_form_v_t(n, j, &xi, t).unwrap();
            let rhs = kappa(n) * binomial(n, j) * r_power(&xi, (n - j) as i32).unwrap().eval(t);
            assert!((lhs - rhs).abs() < 1e-12, "n={n} j={j}: {lhs} vs {rhs}");
        }
        // Density supported below t gives zero.
        let low = RadialDensity::tent(0.5);
        assert_eq!(closed_form_v_t(2, 1, &low, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn v_star_on_quadratic() {
        let xi = RadialDensity::tent(1.0);
        let spec = ValuationSpec::scalar(2, 1, xi).unwrap();
        let f = ConvexFunction::quadratic(Point::zero(2), 0.5).unwrap();
        let v = v_star(&spec, &f, &settings()).unwrap();
        assert!((v - 2.0 * PI / 3.0).abs() < 0.01 * v.abs(), "{v}");
    }

    #[test]
    fn v_star_epi_translation_invariance() {
        let xi = RadialDensity::tent(1.0);
        let spec = ValuationSpec::scalar(2, 1, xi).unwrap();
        let f = ConvexFunction::quadratic(Point::zero(2), 0.5).unwrap();
        let g = ConvexFunction::combination(vec![
            (1.0, f.clone()),
            (1.0, ConvexFunction::affine(Point::new(&[0.3, -0.2]), 0.7)),
        ])
        .unwrap();
        let a = v_star(&spec, &f, &settings()).unwrap();
        let b = v_star(&spec, &g, &settings()).unwrap();
        assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn t_star_on_halfcone_matches_prop() {
        let xi = RadialDensity::tent(2.0); // xi(1) = 1
        let spec = ValuationSpec::vector(2, 1, xi.clone()).unwrap();
        let w = ConvexFunction::half_cone(2, 1.0).unwrap();
        let t = t_star(&spec, &w, &settings()).unwrap();
        assert!((t.get(1) - 2.0).abs() < 1e-12, "{t:?}");
        let cf = closed_form_w_s(2, 1, &xi, 1.0).unwrap();
        assert!(t.dist(&cf) < 1e-12);
        // n=3, j=3, s=2, xi(2)=0.25 -> pi/6 on the last axis.
        let xi3 = RadialDensity::piecewise_linear(&[0.0, 2.0, 4.0], &[0.25, 0.25, 0.0]).unwrap();
        let cf = closed_form_w_s(3, 3, &xi3, 2.0).unwrap();
        assert!((cf.get(2) - PI / 6.0).abs() < 1e-12);
        // Zero density value kills the vector.
        let low = RadialDensity::tent(0.5);
        assert_eq!(closed_form_w_s(2, 1, &low, 1.0).unwrap().norm(), 0.0);
    }

    #[test]
    fn t_star_vanishes_on_radial_functions() {
        let xi = RadialDensity::tent(1.0);
        let spec = ValuationSpec::vector(2, 1, xi).unwrap();
        let f = ConvexFunction::quadratic(Point::zero(2), 0.5).unwrap();
        let t = t_star(&spec, &f, &settings()).unwrap();
        assert!(t.norm() < 1e-8, "{t:?}");
    }

    #[test]
    fn t_star_rotation_equivariance_smooth() {
        let xi = RadialDensity::tent(1.0);
        let spec = ValuationSpec::vector(2, 1, xi).unwrap();
        let f = ConvexFunction::quartic_norm(Point::new(&[0.4, 0.1]));
        let base = t_star(&spec, &f, &settings()).unwrap();
        let theta = Rotation::planar(2, 0, 1, 0.8);
        let rotated = t_star_rotated(&spec, &f, &theta, &settings()).unwrap();
        let expect = theta.apply(&base);
        assert!(
            rotated.dist(&expect) < 1e-4 * (1.0 + base.norm()),
            "{rotated:?} vs {expect:?}"
        );
    }

    #[test]
    fn valuation_additivity_on_cones() {
        // Pointwise max/min of two cones are again cones (max has the
        // smaller parameter), so additivity is exercised end to end.
        let xi = RadialDensity::tent(2.0);
        let spec = ValuationSpec::scalar(2, 1, xi).unwrap();
        let s = settings();
        let v1 = ConvexFunction::cone(2, 0.6).unwrap();
        let v2 = ConvexFunction::cone(2, 1.1).unwrap();
        let vmax = ConvexFunction::cone(2, 0.6).unwrap();
        let vmin = ConvexFunction::cone(2, 1.1).unwrap();
        let lhs = v_star(&spec, &vmax, &s).unwrap() + v_star(&spec, &vmin, &s).unwrap();
        let rhs = v_star(&spec, &v1, &s).unwrap() + v_star(&spec, &v2, &s).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn homogeneity_of_degree_j() {
        let xi = RadialDensity::tent(1.0);
        let s = settings();
        for j in 1..=2usize {
            let spec = ValuationSpec::scalar(2, j, xi.clone()).unwrap();
            let f = ConvexFunction::quadratic(Point::zero(2), 0.5).unwrap();
            let base = v_star(&spec, &f, &s).unwrap();
            for lambda in [0.5, 2.0] {
                let scaled = ConvexFunction::quadratic(Point::zero(2), 0.5 * lambda).unwrap();
                let v = v_star(&spec, &scaled, &s).unwrap();
                let expect = lambda.powi(j as i32) * base;
                assert!(
                    (v - expect).abs() < 0.01 * expect.abs().max(1e-9),
                    "j={j}, lambda={lambda}: {v} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn minkowski_vanishing_on_disks_and_ellipses() {
        let alpha = RadialDensity::tent(1.0);
        let r = minkowski_vanishing(
            &VanishingBody::Ball {
                radius: 1.0,
                center: Point::zero(2),
            },
            2,
            1,
            &alpha,
            1e-6,
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
        let r = minkowski_vanishing(
            &VanishingBody::Ball {
                radius: 1.0,
                center: Point::new(&[0.3, 0.0]),
            },
            2,
            1,
            &alpha,
            1e-6,
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
        let r = minkowski_vanishing(
            &VanishingBody::Ellipse {
                matrix: SymMatrix::diag(&[1.0, 4.0]),
            },
            2,
            1,
            &alpha,
            1e-4,
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
    }
}
