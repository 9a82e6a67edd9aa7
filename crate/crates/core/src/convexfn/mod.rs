//! The convex-function zoo: every finite convex function the identities are
//! instantiated on, with evaluation, derivatives, subdifferentials and
//! proximal maps.
//!
//! All variants are finite and convex on the whole space. The canonical
//! nonsmooth test functions are the cone
//! `v_t(x) = max(0, |x| - t)` and its half-space modification
//!
//! ```text
//! w_s(x) = 0            if |x| <= s,      x_n >= 0
//!          0            if |x|_{n-1} <= s, x_n < 0
//!          |x| - s      if |x| > s,       x_n >= 0
//!          |x|_{n-1} - s if |x|_{n-1} > s, x_n < 0
//! ```
//!
//! where `|x|_{n-1}` is the norm of the first n-1 coordinates.

mod prox;
mod subdiff;

pub use prox::{ProxFunction, Rotated};
pub use subdiff::SubdiffSet;

use crate::numerics::{Point, SymMatrix};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A finite convex function on R^n together with its dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexFunction {
    n: usize,
    kind: Kind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Kind {
    /// x -> scale * |x - center|^2
    Quadratic { center: Point, scale: f64 },
    /// x -> |x - center|^4
    QuarticNorm { center: Point },
    /// v_t
    Cone { t: f64 },
    /// w_s
    HalfCone { s: f64 },
    /// x -> radius |x| + <x, center>, the support function of a ball
    SupportBall { radius: f64, center: Point },
    /// x -> sqrt(x' M x), the support function of an ellipse (M pos. def.)
    SupportEllipse { matrix: SymMatrix },
    /// x -> |x|
    Norm,
    /// x -> <slope, x> + offset
    Affine { slope: Point, offset: f64 },
    /// Nonnegative combination of other variants
    Combination { terms: Vec<(f64, ConvexFunction)> },
}

impl ConvexFunction {
    pub fn quadratic(center: Point, scale: f64) -> Result<Self> {
        if scale < 0.0 {
            return Err(Error::InvalidParameter("quadratic scale must be >= 0".into()));
        }
        Ok(ConvexFunction {
            n: center.dim(),
            kind: Kind::Quadratic { center, scale },
        })
    }

    pub fn quartic_norm(center: Point) -> Self {
        ConvexFunction {
            n: center.dim(),
            kind: Kind::QuarticNorm { center },
        }
    }

    /// v_t; requires t > 0 for membership in the C^2-near-zero class.
    pub fn cone(n: usize, t: f64) -> Result<Self> {
        if t <= 0.0 {
            return Err(Error::InvalidParameter("cone parameter t must be > 0".into()));
        }
        Ok(ConvexFunction {
            n,
            kind: Kind::Cone { t },
        })
    }

    /// w_s; requires s > 0 and n >= 2.
    pub fn half_cone(n: usize, s: f64) -> Result<Self> {
        if s <= 0.0 {
            return Err(Error::InvalidParameter(
                "half-cone parameter s must be > 0".into(),
            ));
        }
        if n < 2 {
            return Err(Error::DimensionMismatch("half-cone needs n >= 2".into()));
        }
        Ok(ConvexFunction {
            n,
            kind: Kind::HalfCone { s },
        })
    }

    pub fn support_ball(radius: f64, center: Point) -> Result<Self> {
        if radius < 0.0 {
            return Err(Error::InvalidParameter("ball radius must be >= 0".into()));
        }
        Ok(ConvexFunction {
            n: center.dim(),
            kind: Kind::SupportBall { radius, center },
        })
    }

    pub fn support_ellipse(matrix: SymMatrix) -> Result<Self> {
        // Positive definiteness via the leading principal minors.
        for k in 1..=matrix.dim() {
            let mut rows: Vec<Vec<f64>> = Vec::new();
            for i in 0..k {
                rows.push((0..k).map(|j| matrix.get(i, j)).collect());
            }
            let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
            if SymMatrix::new(k, &refs)?.det() <= 0.0 {
                return Err(Error::InvalidParameter(
                    "ellipse matrix must be positive definite".into(),
                ));
            }
        }
        Ok(ConvexFunction {
            n: matrix.dim(),
            kind: Kind::SupportEllipse { matrix },
        })
    }

    pub fn norm(n: usize) -> Self {
        ConvexFunction {
            n,
            kind: Kind::Norm,
        }
    }

    pub fn affine(slope: Point, offset: f64) -> Self {
        ConvexFunction {
            n: slope.dim(),
            kind: Kind::Affine { slope, offset },
        }
    }

    pub fn zero(n: usize) -> Self {
        ConvexFunction::affine(Point::zero(n), 0.0)
    }

    /// Nonnegative combination sum c_i f_i.
    pub fn combination(terms: Vec<(f64, ConvexFunction)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter("empty combination".into()));
        }
        let n = terms[0].1.n;
        for (c, f) in &terms {
            if *c < 0.0 {
                return Err(Error::InvalidParameter(
                    "combination coefficients must be >= 0".into(),
                ));
            }
            if f.n != n {
                return Err(Error::DimensionMismatch(
                    "combination terms have mixed dimensions".into(),
                ));
            }
        }
        Ok(ConvexFunction {
            n,
            kind: Kind::Combination { terms },
        })
    }

    /// mu w_s + lambda v_t as a combination.
    pub fn halfcone_plus_cone(n: usize, mu: f64, s: f64, lambda: f64, t: f64) -> Result<Self> {
        ConvexFunction::combination(vec![
            (mu, ConvexFunction::half_cone(n, s)?),
            (lambda, ConvexFunction::cone(n, t)?),
        ])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    /// f(x).
    pub fn eval(&self, x: &Point) -> f64 {
        debug_assert_eq!(x.dim(), self.n);
        match &self.kind {
            Kind::Quadratic { center, scale } => {
                let d = x.sub(center);
                scale * d.dot(&d)
            }
            Kind::QuarticNorm { center } => {
                let d2 = x.sub(center).dot(&x.sub(center));
                d2 * d2
            }
            Kind::Cone { t } => (x.norm() - t).max(0.0),
            Kind::HalfCone { s } => half_cone_eval(*s, x),
            Kind::SupportBall { radius, center } => radius * x.norm() + x.dot(center),
            Kind::SupportEllipse { matrix } => matrix.quad_form(x).max(0.0).sqrt(),
            Kind::Norm => x.norm(),
            Kind::Affine { slope, offset } => slope.dot(x) + offset,
            Kind::Combination { terms } => terms.iter().map(|(c, f)| c * f.eval(x)).sum(),
        }
    }

    /// grad f(x); errors where f is not differentiable.
    pub fn gradient(&self, x: &Point) -> Result<Point> {
        debug_assert_eq!(x.dim(), self.n);
        match &self.kind {
            Kind::Quadratic { center, scale } => Ok(x.sub(center).scale(2.0 * scale)),
            Kind::QuarticNorm { center } => {
                let d = x.sub(center);
                Ok(d.scale(4.0 * d.dot(&d)))
            }
            Kind::Cone { t } => {
                let r = x.norm();
                if r < *t {
                    Ok(Point::zero(self.n))
                } else if r > *t {
                    Ok(x.scale(1.0 / r))
                } else {
                    Err(Error::NotDifferentiable)
                }
            }
            Kind::HalfCone { s } => half_cone_gradient(*s, x),
            Kind::SupportBall { radius, center } => match x.unit() {
                Some(u) => Ok(u.scale(*radius).add(center)),
                None => {
                    if *radius == 0.0 {
                        Ok(*center)
                    } else {
                        Err(Error::NotDifferentiable)
                    }
                }
            },
            Kind::SupportEllipse { matrix } => {
                let q = matrix.quad_form(x);
                if q <= 0.0 {
                    return Err(Error::NotDifferentiable);
                }
                Ok(matrix.mul_vec(x).scale(1.0 / q.sqrt()))
            }
            Kind::Norm => x.unit().ok_or(Error::NotDifferentiable),
            Kind::Affine { slope, .. } => Ok(*slope),
            Kind::Combination { terms } => {
                let mut g = Point::zero(self.n);
                for (c, f) in terms {
                    if *c == 0.0 {
                        continue;
                    }
                    g = g.add(&f.gradient(x)?.scale(*c));
                }
                Ok(g)
            }
        }
    }

    /// Hess f(x); errors where f is not twice differentiable.
    pub fn hessian(&self, x: &Point) -> Result<SymMatrix> {
        debug_assert_eq!(x.dim(), self.n);
        let n = self.n;
        match &self.kind {
            Kind::Quadratic { scale, .. } => Ok(SymMatrix::identity(n).scale(2.0 * scale)),
            Kind::QuarticNorm { center } => {
                let d = x.sub(center);
                let d2 = d.dot(&d);
                Ok(SymMatrix::identity(n)
                    .scale(4.0 * d2)
                    .add(&SymMatrix::outer(&d, 8.0)))
            }
            Kind::Cone { t } => {
                let r = x.norm();
                if r < *t {
                    Ok(SymMatrix::zeros(n))
                } else if r > *t {
                    Ok(norm_hessian(x))
                } else {
                    Err(Error::NotTwiceDifferentiable)
                }
            }
            Kind::HalfCone { s } => half_cone_hessian(*s, x),
            Kind::SupportBall { radius, .. } => {
                if x.norm() == 0.0 {
                    if *radius == 0.0 {
                        Ok(SymMatrix::zeros(n))
                    } else {
                        Err(Error::NotTwiceDifferentiable)
                    }
                } else {
                    Ok(norm_hessian(x).scale(*radius))
                }
            }
            Kind::SupportEllipse { matrix } => {
                let q = matrix.quad_form(x);
                if q <= 0.0 {
                    return Err(Error::NotTwiceDifferentiable);
                }
                let mx = matrix.mul_vec(x);
                let qs = q.sqrt();
                Ok(matrix
                    .scale(1.0 / qs)
                    .add(&SymMatrix::outer(&mx, -1.0 / (q * qs))))
            }
            Kind::Norm => {
                if x.norm() == 0.0 {
                    Err(Error::NotTwiceDifferentiable)
                } else {
                    Ok(norm_hessian(x))
                }
            }
            Kind::Affine { .. } => Ok(SymMatrix::zeros(n)),
            Kind::Combination { terms } => {
                let mut h = SymMatrix::zeros(n);
                for (c, f) in terms {
                    if *c == 0.0 {
                        continue;
                    }
                    h = h.add(&f.hessian(x)?.scale(*c));
                }
                Ok(h)
            }
        }
    }

    /// Upper bound on sup { |g| : g in subdiff f(x), |x| <= r }.
    pub fn lipschitz_on_ball(&self, r: f64) -> f64 {
        match &self.kind {
            Kind::Quadratic { center, scale } => 2.0 * scale * (r + center.norm()),
            Kind::QuarticNorm { center } => 4.0 * (r + center.norm()).powi(3),
            Kind::Cone { .. } | Kind::HalfCone { .. } | Kind::Norm => 1.0,
            Kind::SupportBall { radius, center } => radius + center.norm(),
            Kind::SupportEllipse { matrix } => {
                // sqrt of the largest eigenvalue, bounded by the trace.
                matrix.trace().sqrt()
            }
            Kind::Affine { slope, .. } => slope.norm(),
            Kind::Combination { terms } => {
                terms.iter().map(|(c, f)| c * f.lipschitz_on_ball(r)).sum()
            }
        }
    }

    /// True when f(x) depends on x only through |x|.
    pub fn is_radial(&self) -> bool {
        match &self.kind {
            Kind::Cone { .. } | Kind::Norm => true,
            Kind::Quadratic { center, .. } | Kind::QuarticNorm { center } => center.norm() == 0.0,
            Kind::SupportBall { center, .. } => center.norm() == 0.0,
            Kind::SupportEllipse { .. } | Kind::HalfCone { .. } | Kind::Affine { .. } => false,
            Kind::Combination { terms } => terms.iter().all(|(c, f)| *c == 0.0 || f.is_radial()),
        }
    }

    /// True when f(x) depends only on (|x|_{n-1}, x_n): every radial variant
    /// and the half-cone family.
    pub fn is_axisymmetric(&self) -> bool {
        match &self.kind {
            Kind::HalfCone { .. } => true,
            Kind::Combination { terms } => {
                terms.iter().all(|(c, f)| *c == 0.0 || f.is_axisymmetric())
            }
            _ => self.is_radial(),
        }
    }

    /// The radial profile r -> f(r e_1) (only meaningful when `is_radial`).
    pub fn radial_profile(&self, r: f64) -> f64 {
        self.eval(&Point::axis(self.n, 0).scale(r))
    }

    /// The piecewise-linear radial profile as (knots, slopes), when the
    /// function is radial and piecewise linear. knots[0] = 0, slopes[i]
    /// applies on [knots[i], knots[i+1]) and slopes.last() beyond the last
    /// knot.
    pub fn radial_pl_profile(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match &self.kind {
            Kind::Cone { t } => Some((vec![0.0, *t], vec![0.0, 1.0])),
            Kind::Norm => Some((vec![0.0], vec![1.0])),
            Kind::SupportBall { radius, center } if center.norm() == 0.0 => {
                Some((vec![0.0], vec![*radius]))
            }
            Kind::Affine { slope, .. } if slope.norm() == 0.0 => Some((vec![0.0], vec![0.0])),
            Kind::Combination { terms } => {
                let mut acc = (vec![0.0], vec![0.0]);
                for (c, f) in terms {
                    if *c == 0.0 {
                        continue;
                    }
                    let part = f.radial_pl_profile()?;
                    acc = merge_pl(&acc, &part, *c);
                }
                Some(acc)
            }
            _ => None,
        }
    }
}

/// a + c * b for piecewise-linear radial profiles given as (knots, slopes).
pub(crate) fn merge_pl(
    a: &(Vec<f64>, Vec<f64>),
    b: &(Vec<f64>, Vec<f64>),
    c: f64,
) -> (Vec<f64>, Vec<f64>) {
    let slope_at = |prof: &(Vec<f64>, Vec<f64>), r: f64| -> f64 {
        let i = prof.0.iter().rposition(|&k| k <= r).unwrap_or(0);
        prof.1[i]
    };
    let mut knots: Vec<f64> = a.0.iter().chain(b.0.iter()).copied().collect();
    knots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    knots.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    let slopes = knots
        .iter()
        .map(|&k| slope_at(a, k) + c * slope_at(b, k))
        .collect();
    (knots, slopes)
}

/// Hess |x| = (I - u u^T)/|x| at x != 0.
pub fn norm_hessian(x: &Point) -> SymMatrix {
    let r = x.norm();
    let u = x.scale(1.0 / r);
    SymMatrix::identity(x.dim())
        .add(&SymMatrix::outer(&u, -1.0))
        .scale(1.0 / r)
}

fn half_cone_eval(s: f64, x: &Point) -> f64 {
    let head = x.norm_head();
    if x.last() >= 0.0 {
        (x.norm() - s).max(0.0)
    } else {
        (head - s).max(0.0)
    }
}

fn half_cone_gradient(s: f64, x: &Point) -> Result<Point> {
    let n = x.dim();
    let zn = x.last();
    if zn > 0.0 {
        let r = x.norm();
        if r < s {
            Ok(Point::zero(n))
        } else if r > s {
            Ok(x.scale(1.0 / r))
        } else {
            Err(Error::NotDifferentiable)
        }
    } else if zn < 0.0 {
        let h = x.norm_head();
        if h < s {
            Ok(Point::zero(n))
        } else if h > s {
            let mut g = x.scale(1.0 / h);
            g.set(n - 1, 0.0);
            Ok(g)
        } else {
            Err(Error::NotDifferentiable)
        }
    } else {
        // On the plane x_n = 0 the two regional gradients coincide away from
        // the circle |x| = s.
        let r = x.norm();
        if r < s {
            Ok(Point::zero(n))
        } else if r > s {
            Ok(x.scale(1.0 / r))
        } else {
            Err(Error::NotDifferentiable)
        }
    }
}

fn half_cone_hessian(s: f64, x: &Point) -> Result<SymMatrix> {
    let n = x.dim();
    let zn = x.last();
    if zn > 0.0 {
        let r = x.norm();
        if r < s {
            Ok(SymMatrix::zeros(n))
        } else if r > s {
            Ok(norm_hessian(x))
        } else {
            Err(Error::NotTwiceDifferentiable)
        }
    } else if zn < 0.0 {
        let h = x.norm_head();
        if h < s {
            Ok(SymMatrix::zeros(n))
        } else if h > s {
            // Hessian of |x|_{n-1}: the (n-1)-dimensional norm Hessian,
            // embedded with a zero last row and column.
            let mut head = *x;
            head.set(n - 1, 0.0);
            let mut m = SymMatrix::identity(n)
                .add(&SymMatrix::outer(&head.scale(1.0 / h), -1.0))
                .scale(1.0 / h);
            for i in 0..n {
                m.set_sym(i, n - 1, 0.0);
            }
            Ok(m)
        } else {
            Err(Error::NotTwiceDifferentiable)
        }
    } else {
        // Not C^2 across x_n = 0 outside the flat core.
        if x.norm() < s {
            Ok(SymMatrix::zeros(n))
        } else {
            Err(Error::NotTwiceDifferentiable)
        }
    }
}

/// Piecewise value of mu w_s + lambda v_t per the seven-case (s <= t) or
/// six-case (s > t) table, applied verbatim.
pub fn eval_sum_cases(mu: f64, s: f64, lambda: f64, t: f64, x: &Point) -> f64 {
    let r = x.norm();
    let h = x.norm_head();
    let zn = x.last();
    if s <= t {
        if r <= s && zn >= 0.0 {
            0.0
        } else if s < r && r <= t && zn >= 0.0 {
            mu * (r - s)
        } else if r > t && zn >= 0.0 {
            mu * (r - s) + lambda * (r - t)
        } else if h <= s && r <= t && zn < 0.0 {
            0.0
        } else if h <= s && r > t && zn < 0.0 {
            lambda * (r - t)
        } else if h > s && r <= t && zn < 0.0 {
            mu * (h - s)
        } else {
            mu * (h - s) + lambda * (r - t)
        }
    } else {
        if r <= t && zn >= 0.0 {
            0.0
        } else if t < r && r <= s && zn >= 0.0 {
            lambda * (r - t)
        } else if r > s && zn >= 0.0 {
            mu * (r - s) + lambda * (r - t)
        } else if r <= t && zn < 0.0 {
            0.0
        } else if h <= s && r > t && zn < 0.0 {
            lambda * (r - t)
        } else {
            mu * (h - s) + lambda * (r - t)
        }
    }
}

// --- JSON wire format ------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
enum FnJson {
    Quadratic { n: usize, center: Vec<f64>, scale: f64 },
    QuarticNorm { n: usize, center: Vec<f64> },
    Cone { n: usize, t: f64 },
    HalfCone { n: usize, s: f64 },
    SupportBall { n: usize, radius: f64, center: Vec<f64> },
    SupportEllipse { n: usize, matrix: Vec<Vec<f64>> },
    Norm { n: usize },
    Affine { n: usize, slope: Vec<f64>, offset: f64 },
    Combination { n: usize, terms: Vec<TermJson> },
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    coeff: f64,
    function: FnJson,
}

impl From<&ConvexFunction> for FnJson {
    fn from(f: &ConvexFunction) -> FnJson {
        let n = f.n;
        match &f.kind {
            Kind::Quadratic { center, scale } => FnJson::Quadratic {
                n,
                center: center.coords().to_vec(),
                scale: *scale,
            },
            Kind::QuarticNorm { center } => FnJson::QuarticNorm {
                n,
                center: center.coords().to_vec(),
            },
            Kind::Cone { t } => FnJson::Cone { n, t: *t },
            Kind::HalfCone { s } => FnJson::HalfCone { n, s: *s },
            Kind::SupportBall { radius, center } => FnJson::SupportBall {
                n,
                radius: *radius,
                center: center.coords().to_vec(),
            },
            Kind::SupportEllipse { matrix } => FnJson::SupportEllipse {
                n,
                matrix: (*matrix).into(),
            },
            Kind::Norm => FnJson::Norm { n },
            Kind::Affine { slope, offset } => FnJson::Affine {
                n,
                slope: slope.coords().to_vec(),
                offset: *offset,
            },
            Kind::Combination { terms } => FnJson::Combination {
                n,
                terms: terms
                    .iter()
                    .map(|(c, f)| TermJson {
                        coeff: *c,
                        function: f.into(),
                    })
                    .collect(),
            },
        }
    }
}

impl TryFrom<FnJson> for ConvexFunction {
    type Error = Error;
    fn try_from(j: FnJson) -> Result<ConvexFunction> {
        match j {
            FnJson::Quadratic { center, scale, .. } => {
                ConvexFunction::quadratic(Point::new(&center), scale)
            }
            FnJson::QuarticNorm { center, .. } => {
                Ok(ConvexFunction::quartic_norm(Point::new(&center)))
            }
            FnJson::Cone { n, t } => ConvexFunction::cone(n, t),
            FnJson::HalfCone { n, s } => ConvexFunction::half_cone(n, s),
            FnJson::SupportBall { radius, center, .. } => {
                ConvexFunction::support_ball(radius, Point::new(&center))
            }
            FnJson::SupportEllipse { matrix, .. } => {
                let m = SymMatrix::try_from(matrix).map_err(Error::InvalidParameter)?;
                ConvexFunction::support_ellipse(m)
            }
            FnJson::Norm { n } => Ok(ConvexFunction::norm(n)),
            FnJson::Affine { slope, offset, .. } => {
                Ok(ConvexFunction::affine(Point::new(&slope), offset))
            }
            FnJson::Combination { terms, .. } => {
                let mut out = Vec::new();
                for t in terms {
                    out.push((t.coeff, ConvexFunction::try_from(t.function)?));
                }
                ConvexFunction::combination(out)
            }
        }
    }
}

impl Serialize for ConvexFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FnJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConvexFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = FnJson::deserialize(d)?;
        ConvexFunction::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_and_halfcone_values() {
        let v1 = ConvexFunction::cone(2, 1.0).unwrap();
        assert_eq!(v1.eval(&Point::new(&[2.0, 0.0])), 1.0);

        let w1 = ConvexFunction::half_cone(2, 1.0).unwrap();
        assert_eq!(w1.eval(&Point::new(&[3.0, -4.0])), 2.0);
        assert_eq!(w1.eval(&Point::new(&[0.0, -5.0])), 0.0);
        assert_eq!(w1.eval(&Point::new(&[0.0, 5.0])), 4.0);
    }

    #[test]
    fn gradients() {
        let q = ConvexFunction::quadratic(Point::zero(2), 0.5).unwrap();
        let g = q.gradient(&Point::new(&[1.0, 2.0])).unwrap();
        assert_eq!(g.coords(), &[1.0, 2.0]);

        let norm = ConvexFunction::norm(2);
        let g = norm.gradient(&Point::new(&[3.0, 4.0])).unwrap();
        assert!((g.get(0) - 0.6).abs() < 1e-15 && (g.get(1) - 0.8).abs() < 1e-15);
        assert!(matches!(
            norm.gradient(&Point::zero(2)),
            Err(Error::NotDifferentiable)
        ));
    }

    #[test]
    fn hessians() {
        let q = ConvexFunction::quadratic(Point::zero(2), 0.5).unwrap();
        let h = q.hessian(&Point::new(&[0.3, -0.2])).unwrap();
        assert_eq!(h, SymMatrix::identity(2));

        let norm = ConvexFunction::norm(2);
        let h = norm.hessian(&Point::new(&[1.0, 0.0])).unwrap();
        assert!(h.get(0, 0).abs() < 1e-15);
        assert!((h.get(1, 1) - 1.0).abs() < 1e-15);

        let v1 = ConvexFunction::cone(2, 1.0).unwrap();
        let h = v1.hessian(&Point::new(&[0.5, 0.0])).unwrap();
        assert_eq!(h, SymMatrix::zeros(2));
        assert!(v1.hessian(&Point::new(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn sum_cases_examples() {
        // s <= t branch: mu (|x|-s) for s < |x| <= t, x_n >= 0.
        let x = Point::new(&[0.0, 1.5]);
        assert!((eval_sum_cases(1.0, 1.0, 1.0, 2.0, &x) - 0.5).abs() < 1e-15);
        // s > t branch: lambda (|x|-t) for t < |x| <= s, x_n >= 0.
        assert!((eval_sum_cases(1.0, 2.0, 1.0, 1.0, &x) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn radial_pl_profiles() {
        let f = ConvexFunction::combination(vec![
            (1.0, ConvexFunction::cone(2, 1.0).unwrap()),
            (1.0, ConvexFunction::cone(2, 2.0).unwrap()),
        ])
        .unwrap();
        let (knots, slopes) = f.radial_pl_profile().unwrap();
        assert_eq!(knots, vec![0.0, 1.0, 2.0]);
        assert_eq!(slopes, vec![0.0, 1.0, 2.0]);
        let (knots, slopes) = ConvexFunction::norm(2).radial_pl_profile().unwrap();
        assert_eq!((knots, slopes), (vec![0.0], vec![1.0]));
    }

    #[test]
    fn json_round_trip() {
        let f = ConvexFunction::cone(2, 1.0).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"variant\":\"cone\""));
        assert!(s.contains("\"t\":1.0"));
        let back: ConvexFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);

        let parsed: ConvexFunction =
            serde_json::from_str(r#"{"variant":"cone","t":1.0,"n":2}"#).unwrap();
        assert_eq!(parsed, f);
    }
}
