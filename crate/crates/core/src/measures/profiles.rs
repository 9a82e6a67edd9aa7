//! Quadrature machinery for measures of C^2 fields, plus the exact closed
//! forms for the nonsmooth canonical functions: knot-sphere masses of radial
//! piecewise-linear profiles and the axial vector integral of
//! mu w_s + lambda v_t.

use crate::convexfn::{ConvexFunction, Kind};
use crate::numerics::{
    binomial, kappa, omega, AngularGrid, MixedDetExtractor, Point, QuadratureGrid, Rotation,
    SymMatrix,
};
use crate::transforms::{r_power, RadialDensity};
use crate::{Error, Result};

/// A field of Hessians: anything the smooth quadrature routes can integrate.
pub trait C2Field: Sync {
    fn dim(&self) -> usize;
    /// Hess at x; must be well defined away from the origin on the
    /// integration region.
    fn hessian_at(&self, x: &Point) -> Result<SymMatrix>;
    /// Radii where the field is singular or kinked (quadrature breakpoints).
    fn singular_radii(&self) -> Vec<f64>;
}

impl C2Field for ConvexFunction {
    fn dim(&self) -> usize {
        self.dim()
    }
    fn hessian_at(&self, x: &Point) -> Result<SymMatrix> {
        self.hessian(x)
    }
    fn singular_radii(&self) -> Vec<f64> {
        fn collect(f: &ConvexFunction, out: &mut Vec<f64>) {
            match f.kind() {
                Kind::Cone { t } => out.push(*t),
                Kind::HalfCone { s } => out.push(*s),
                Kind::Combination { terms } => {
                    for (c, g) in terms {
                        if *c > 0.0 {
                            collect(g, out);
                        }
                    }
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        collect(self, &mut out);
        out
    }
}

/// Weighted sum of (possibly rotated) functions, as a Hessian field:
/// Hess(sum c_i f_i o theta_i^{-1})(x) = sum c_i theta_i Hess f_i(theta_i^{-1} x) theta_i^T.
pub struct SumField {
    n: usize,
    terms: Vec<(f64, ConvexFunction, Option<Rotation>)>,
}

impl SumField {
    pub fn new(terms: Vec<(f64, ConvexFunction, Option<Rotation>)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter("empty field".into()));
        }
        let n = terms[0].1.dim();
        if terms.iter().any(|(_, f, _)| f.dim() != n) {
            return Err(Error::DimensionMismatch("field terms".into()));
        }
        Ok(SumField { n, terms })
    }

    pub fn pair(u: &ConvexFunction, v: &ConvexFunction, theta: Option<Rotation>) -> Result<Self> {
        SumField::new(vec![(1.0, u.clone(), None), (1.0, v.clone(), theta)])
    }
}

impl C2Field for SumField {
    fn dim(&self) -> usize {
        self.n
    }
    fn hessian_at(&self, x: &Point) -> Result<SymMatrix> {
        let mut h = SymMatrix::zeros(self.n);
        for (c, f, rot) in &self.terms {
            if *c == 0.0 {
                continue;
            }
            let part = match rot {
                None => f.hessian(x)?,
                Some(theta) => f.hessian(&theta.apply_inverse(x))?.conjugate(theta),
            };
            h = h.add(&part.scale(*c));
        }
        Ok(h)
    }
    fn singular_radii(&self) -> Vec<f64> {
        self.terms
            .iter()
            .flat_map(|(_, f, _)| f.singular_radii())
            .collect()
    }
}

/// Which measure family a smooth integral runs against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureKind {
    /// Hessian measure: density [Hess f]_j.
    Hessian,
    /// Mixed Monge-Ampere MA_j: density D(Hess f [j], Hess |x| [n-j]).
    MongeAmpere,
}

/// Integrates density(|x|) * (x)? against the chosen measure density of the
/// field over the annulus, returning (components, error estimate). The error
/// estimate combines a half-resolution companion grid with an inner-cutoff
/// halving.
pub fn smooth_measure_integral(
    field: &dyn C2Field,
    j: usize,
    kind: MeasureKind,
    density: &RadialDensity,
    vector_weight: bool,
    region_radius: f64,
    grid: &QuadratureGrid,
) -> Result<(Vec<f64>, f64)> {
    let fine = smooth_sum(field, j, kind, density, vector_weight, region_radius, grid)?;
    let coarse = smooth_sum(
        field,
        j,
        kind,
        density,
        vector_weight,
        region_radius,
        &grid.coarser(),
    )?;
    let inner = smooth_sum(
        field,
        j,
        kind,
        density,
        vector_weight,
        region_radius,
        &grid.halved_eps(),
    )?;
    let err = fine
        .iter()
        .zip(coarse.iter().zip(&inner))
        .map(|(a, (b, c))| (a - b).abs().max((a - c).abs()))
        .fold(0.0f64, f64::max);
    Ok((fine, err))
}

fn smooth_sum(
    field: &dyn C2Field,
    j: usize,
    kind: MeasureKind,
    density: &RadialDensity,
    vector_weight: bool,
    region_radius: f64,
    grid: &QuadratureGrid,
) -> Result<Vec<f64>> {
    let n = field.dim();
    if j > n {
        return Err(Error::IndexOutOfRange { j, n });
    }
    let extractor = MixedDetExtractor::new(n);
    let mut acc = vec![0.0; if vector_weight { n } else { 1 }];
    for &(r, wr) in grid.radial() {
        if r > region_radius {
            continue;
        }
        let xi_r = density.eval(r);
        if xi_r == 0.0 {
            continue;
        }
        let rpow = r.powi(n as i32 - 1) * wr * xi_r;
        for (theta, wt) in grid.angular().nodes() {
            let x = theta.scale(r);
            let h = field.hessian_at(&x)?;
            let val = match kind {
                MeasureKind::Hessian => h.elem_sym(j)?,
                MeasureKind::MongeAmpere => {
                    // D(H[j], (I - theta theta^T)/r [n-j]) =
                    // r^{j-n} D(H[j], (I-theta theta^T)[n-j]).
                    let tangent = SymMatrix::identity(n).add(&SymMatrix::outer(theta, -1.0));
                    extractor.mixed_det(&h, &tangent, j)? * r.powi(j as i32 - n as i32)
                }
            };
            if !val.is_finite() {
                return Err(Error::NonFiniteIntegrand {
                    at: x.coords().to_vec(),
                });
            }
            let w = rpow * wt * val;
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

/// Scalar Hessian-measure integral of a radial piecewise-linear function:
/// exact knot-sphere masses plus the absolutely continuous part, both in
/// closed form through the density's exact tail integrals.
///
/// The sphere |x| = r where the radial slope jumps from a to b carries
/// Phi_j-mass kappa_n binom(n,j) r^{n-j} (b^j - a^j); between knots the
/// density is binom(n-1,j) (slope/r)^j with respect to Lebesgue measure.
pub fn phi_scalar_radial_pl(
    n: usize,
    j: usize,
    knots: &[f64],
    slopes: &[f64],
    xi: &RadialDensity,
    region_radius: f64,
) -> Result<f64> {
    if j > n {
        return Err(Error::IndexOutOfRange { j, n });
    }
    let mut total = 0.0;
    // Knot spheres (the knot at r = 0 only matters for j = n).
    for (i, &r) in knots.iter().enumerate() {
        if r > region_radius {
            continue;
        }
        let a = if i == 0 { 0.0 } else { slopes[i - 1] };
        let b = slopes[i];
        if a == b {
            continue;
        }
        let jump = b.powi(j as i32) - a.powi(j as i32);
        if r == 0.0 {
            if j == n {
                total += kappa(n) * jump * xi_limit_at_zero(xi)?;
            }
            continue;
        }
        total += kappa(n) * binomial(n, j) * r.powi((n - j) as i32) * jump * xi.eval(r);
    }
    // Absolutely continuous part (vanishes for j = n).
    if j < n {
        let cnj = binomial(n - 1, j) * omega(n);
        let p = n as i32 - 1 - j as i32;
        for i in 0..knots.len() {
            let lo = knots[i];
            let hi = knots
                .get(i + 1)
                .copied()
                .unwrap_or(f64::INFINITY)
                .min(region_radius)
                .min(xi.support_upper());
            if hi <= lo || slopes[i] == 0.0 {
                continue;
            }
            let seg = xi.tail_integral(p, lo) - xi.tail_integral(p, hi);
            total += cnj * slopes[i].powi(j as i32) * seg;
        }
    }
    Ok(total)
}

fn xi_limit_at_zero(xi: &RadialDensity) -> Result<f64> {
    let v1 = xi.eval(1e-9);
    let v2 = xi.eval(1e-10);
    if !v1.is_finite() || !v2.is_finite() || (v1 - v2).abs() > 1e-6 * (1.0 + v1.abs()) {
        return Err(Error::ClassViolation {
            class: "D^n_n".into(),
            detail: "density has no finite limit at 0+".into(),
        });
    }
    Ok(v2)
}

/// The axial vector Hessian-measure integral of mu w_s + lambda v_t,
///
/// ```text
/// int xi(|x|) x dPhi^n_j = (kappa_{n-1}/n) binom(n,j) [ mu^j s^{n-j+1} xi(s)
///     + sum_{k=1}^{j-1} binom(j,k) lambda^{j-k} mu^k s^{n-k+1}
///       (R^{k-j} xi)(max(s,t)) ] e_n,
/// ```
///
/// valid for both parameter orderings (the max handles s <= t and s > t).
/// lambda = 0 recovers the pure half-cone value and t may be 0 (the norm).
pub fn phi_vector_halfcone_cone(
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
    if s <= 0.0 || mu < 0.0 || lambda < 0.0 || t < 0.0 {
        return Err(Error::InvalidParameter(
            "need s > 0, mu >= 0, lambda >= 0, t >= 0".into(),
        ));
    }
    let w = s.max(t);
    let mut bracket = mu.powi(j as i32) * s.powi((n - j + 1) as i32) * xi.eval(s);
    for k in 1..j {
        let transformed = r_power(xi, k as i32 - j as i32)?;
        bracket += binomial(j, k)
            * lambda.powi((j - k) as i32)
            * mu.powi(k as i32)
            * s.powi((n - k + 1) as i32)
            * transformed.eval(w);
    }
    let c = kappa(n - 1) / n as f64 * binomial(n, j) * bracket;
    Ok(Point::axis(n, n - 1).scale(c))
}

/// Recognizes f = mu * HalfCone(s) + lambda * (Cone(t) | Norm), the family
/// with the closed-form axial integral. Returns (mu, s, lambda, t) where a
/// missing cone term reports lambda = 0.
pub fn halfcone_cone_decomposition(f: &ConvexFunction) -> Option<(f64, f64, f64, f64)> {
    match f.kind() {
        Kind::HalfCone { s } => Some((1.0, *s, 0.0, 1.0)),
        Kind::Combination { terms } => {
            let mut half: Option<(f64, f64)> = None;
            let mut cone: Option<(f64, f64)> = None;
            for (c, g) in terms {
                if *c == 0.0 {
                    continue;
                }
                match g.kind() {
                    Kind::HalfCone { s } => {
                        if half.is_some() {
                            return None;
                        }
                        half = Some((*c, *s));
                    }
                    Kind::Cone { t } => {
                        if cone.is_some() {
                            return None;
                        }
                        cone = Some((*c, *t));
                    }
                    Kind::Norm => {
                        if cone.is_some() {
                            return None;
                        }
                        cone = Some((*c, 0.0));
                    }
                    _ => return None,
                }
            }
            let (mu, s) = half?;
            let (lambda, t) = cone.unwrap_or((0.0, 1.0));
            Some((mu, s, lambda, t))
        }
        _ => None,
    }
}

/// True when the function is C^2 away from the origin (eligible for the
/// smooth quadrature routes with an inner cutoff).
pub fn smooth_away_from_zero(f: &ConvexFunction) -> bool {
    match f.kind() {
        Kind::Quadratic { .. }
        | Kind::QuarticNorm { .. }
        | Kind::Affine { .. }
        | Kind::Norm
        | Kind::SupportBall { .. }
        | Kind::SupportEllipse { .. } => true,
        Kind::Cone { .. } | Kind::HalfCone { .. } => false,
        Kind::Combination { terms } => terms
            .iter()
            .all(|(c, g)| *c == 0.0 || smooth_away_from_zero(g)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::RadialDensity;

    #[test]
    fn quadratic_hessian_integrals() {
        // f = |x|^2/2 on R^2, Hess = I: Phi_1 density [I]_1 = 2, Phi_2 = 1.
        let f = ConvexFunction::quadratic(Point::zero(2), 0.5).unwrap();
        let tent = RadialDensity::tent(1.0);
        let grid = QuadratureGrid::new(2, 1e-4, 1.0, &tent.knots(), 48, 384).unwrap();
        let (v, err) =
            smooth_measure_integral(&f, 1, MeasureKind::Hessian, &tent, false, 1.0, &grid)
                .unwrap();
        let expect = 2.0 * std::f64::consts::PI / 3.0;
        assert!((v[0] - expect).abs() < 1e-4, "{} vs {expect} (err {err})", v[0]);
        let (v, _) =
            smooth_measure_integral(&f, 2, MeasureKind::Hessian, &tent, false, 1.0, &grid)
                .unwrap();
        assert!((v[0] - std::f64::consts::PI / 3.0).abs() < 1e-4);
        // Radial symmetry kills the vector weight.
        let (v, _) =
            smooth_measure_integral(&f, 1, MeasureKind::Hessian, &tent, true, 1.0, &grid)
                .unwrap();
        assert!(v.iter().all(|c| c.abs() < 1e-8));
    }

    #[test]
    fn monge_ampere_density_of_quadratic() {
        // D(I, Hess|x|) = 1/(2|x|) in the plane: integral = pi * int alpha.
        let f = ConvexFunction::quadratic(Point::zero(2), 0.5).unwrap();
        let tent = RadialDensity::tent(1.0);
        let grid = QuadratureGrid::new(2, 1e-5, 1.0, &tent.knots(), 48, 384).unwrap();
        let (v, _) =
            smooth_measure_integral(&f, 1, MeasureKind::MongeAmpere, &tent, false, 1.0, &grid)
                .unwrap();
        let expect = std::f64::consts::PI * 0.5;
        assert!((v[0] - expect).abs() < 1e-3, "{} vs {expect}", v[0]);
    }

    #[test]
    fn radial_pl_closed_forms() {
        // Cone(1): Phi_1(v_1, ball 2) decomposes as 2pi (sphere) + 2pi (AC).
        let xi_one = RadialDensity::piecewise_linear(&[0.0, 2.0, 2.0 + 1e-9], &[1.0, 1.0, 0.0])
            .unwrap();
        let knots = vec![0.0, 1.0];
        let slopes = vec![0.0, 1.0];
        let v = phi_scalar_radial_pl(2, 1, &knots, &slopes, &xi_one, 2.0).unwrap();
        assert!((v - 4.0 * std::f64::consts::PI).abs() < 1e-6, "{v}");
        let v = phi_scalar_radial_pl(2, 2, &knots, &slopes, &xi_one, 2.0).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-9, "{v}");
    }

    #[test]
    fn lemma_value_for_cone_with_tent() {
        // int xi dPhi^2_1(v_1) over everything, xi = tent at 1.5:
        // kappa_2 binom(2,1) [t xi(t) + int_t xi] = 2pi (0.5 + 0.125).
        let xi = RadialDensity::tent(1.5);
        let v = phi_scalar_radial_pl(2, 1, &[0.0, 1.0], &[0.0, 1.0], &xi, f64::INFINITY).unwrap();
        assert!((v - 1.25 * std::f64::consts::PI).abs() < 1e-12, "{v}");
    }

    #[test]
    fn axial_closed_form_matches_prop_62() {
        // Pure half-cone: (1/n) binom(n,j) kappa_{n-1} s^{n-j+1} xi(s) e_n.
        let xi = RadialDensity::tent(2.0); // xi(1) = 1
        let v = phi_vector_halfcone_cone(2, 1, &xi, 1.0, 1.0, 0.0, 1.0).unwrap();
        assert!((v.get(1) - 2.0).abs() < 1e-12, "{v:?}");
        assert_eq!(v.get(0), 0.0);
        // n=3, j=3, s=2, xi(2)=0.25: (1/3) kappa_2 2 * 0.25 = pi/6.
        let xi = RadialDensity::piecewise_linear(&[0.0, 2.0, 4.0], &[0.25, 0.25, 0.0]).unwrap();
        let v = phi_vector_halfcone_cone(3, 3, &xi, 1.0, 2.0, 0.0, 1.0).unwrap();
        assert!((v.get(2) - std::f64::consts::PI / 6.0).abs() < 1e-12, "{v:?}");
    }

    #[test]
    fn axial_closed_form_sum_example() {
        // n=2, j=2, mu=lambda=1, s=1, t=2, xi = tent at 1.5: value 0.5 e_2.
        let xi = RadialDensity::tent(1.5);
        let v = phi_vector_halfcone_cone(2, 2, &xi, 1.0, 1.0, 1.0, 2.0).unwrap();
        assert!((v.get(1) - 0.5).abs() < 1e-10, "{v:?}");
    }

    #[test]
    fn family_detection() {
        let f = ConvexFunction::halfcone_plus_cone(2, 2.0, 0.5, 1.5, 1.0).unwrap();
        let (mu, s, lambda, t) = halfcone_cone_decomposition(&f).unwrap();
        assert_eq!((mu, s, lambda, t), (2.0, 0.5, 1.5, 1.0));
        let wn = ConvexFunction::combination(vec![
            (1.0, ConvexFunction::half_cone(2, 1.0).unwrap()),
            (1.0, ConvexFunction::norm(2)),
        ])
        .unwrap();
        let (mu, s, lambda, t) = halfcone_cone_decomposition(&wn).unwrap();
        assert_eq!((mu, s, lambda, t), (1.0, 1.0, 1.0, 0.0));
        assert!(halfcone_cone_decomposition(&ConvexFunction::norm(2)).is_none());
    }

    #[test]
    fn rotated_sum_field_hessian() {
        let u = ConvexFunction::quartic_norm(Point::new(&[0.5, 0.0]));
        let v = ConvexFunction::quadratic(Point::new(&[0.0, 0.7]), 0.5).unwrap();
        let theta = Rotation::planar(2, 0, 1, 1.1);
        let field = SumField::pair(&u, &v, Some(theta)).unwrap();
        let x = Point::new(&[0.4, -0.2]);
        let h = field.hessian_at(&x).unwrap();
        // Quadratic has constant Hessian I regardless of rotation.
        let expect = u.hessian(&x).unwrap().add(&SymMatrix::identity(2));
        for i in 0..2 {
            for j in 0..2 {
                assert!((h.get(i, j) - expect.get(i, j)).abs() < 1e-12);
            }
        }
    }
}
