//! Proximal maps: x = argmin_x step * f(x) + |x - z|^2 / 2.
//!
//! The minimizer inverts the parallel-set map, z in x + step * subdiff f(x),
//! which is what the Monte Carlo volume oracle needs. Dispatch:
//! closed forms for affine/quadratic/piecewise-linear-radial/half-cone,
//! a 1-D golden-section reduction for other radially symmetric functions,
//! a nested 2-D golden-section reduction in (|x|_{n-1}, x_n) for half-cone
//! combinations, gradient descent for smooth variants, and subgradient
//! descent with diminishing steps as the generic fallback.

use super::{ConvexFunction, Kind};
use crate::numerics::{Point, Rotation};
use crate::{Error, Result};

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Anything the Monte Carlo oracle can invert pointwise. Implemented by
/// [`ConvexFunction`] and by rotated wrappers; tests may supply their own.
pub trait ProxFunction: Sync {
    fn dim(&self) -> usize;
    fn eval_at(&self, x: &Point) -> f64;
    /// The proximal point, without the optimality verification.
    fn prox_point(&self, step: f64, z: &Point) -> Result<Point>;
    /// Upper bound on subgradient norms over |x| <= radius.
    fn max_subgradient_norm(&self, radius: f64) -> f64;
}

impl ProxFunction for ConvexFunction {
    fn dim(&self) -> usize {
        self.dim()
    }
    fn eval_at(&self, x: &Point) -> f64 {
        self.eval(x)
    }
    fn prox_point(&self, step: f64, z: &Point) -> Result<Point> {
        prox_impl(self, step, z, 1e-12)
    }
    fn max_subgradient_norm(&self, radius: f64) -> f64 {
        self.lipschitz_on_ball(radius)
    }
}

/// f composed with a rotation: (f o theta^{-1}); prox by conjugation.
pub struct Rotated<'a> {
    pub f: &'a ConvexFunction,
    pub theta: Rotation,
}

impl ProxFunction for Rotated<'_> {
    fn dim(&self) -> usize {
        self.f.dim()
    }
    fn eval_at(&self, x: &Point) -> f64 {
        self.f.eval(&self.theta.apply_inverse(x))
    }
    fn prox_point(&self, step: f64, z: &Point) -> Result<Point> {
        let y = self
            .f
            .prox_point(step, &self.theta.apply_inverse(z))?;
        Ok(self.theta.apply(&y))
    }
    fn max_subgradient_norm(&self, radius: f64) -> f64 {
        self.f.lipschitz_on_ball(radius)
    }
}

impl ConvexFunction {
    /// The unique minimizer of step * f(x) + |x - z|^2 / 2, verified against
    /// the subdifferential inclusion z - x in step * subdiff f(x) whenever
    /// the subdifferential is available.
    pub fn prox(&self, step: f64, z: &Point, tol: f64) -> Result<Point> {
        if step <= 0.0 || tol <= 0.0 {
            return Err(Error::InvalidParameter("prox needs step > 0, tol > 0".into()));
        }
        let x = prox_impl(self, step, z, tol)?;
        if let Ok(sd) = self.subdiff(&x) {
            let residual = sd.scale(step).distance(&z.sub(&x));
            if residual > tol.max(1e-9 * (1.0 + z.norm())) {
                return Err(Error::NonConvergence {
                    residual,
                    iterations: 200,
                });
            }
        }
        Ok(x)
    }
}

pub(crate) fn prox_impl(f: &ConvexFunction, step: f64, z: &Point, tol: f64) -> Result<Point> {
    let n = f.dim();
    match f.kind() {
        Kind::Affine { slope, .. } => Ok(z.sub(&slope.scale(step))),
        Kind::Quadratic { center, scale } => {
            let d = 1.0 + 2.0 * step * scale;
            Ok(z.add(&center.scale(2.0 * step * scale)).scale(1.0 / d))
        }
        Kind::QuarticNorm { center } => {
            let d = z.sub(center);
            let rho = d.norm();
            if rho == 0.0 {
                return Ok(*center);
            }
            // 4 step r^3 + r = rho, monotone in r; Newton from r = rho.
            let mut r = rho / (1.0 + 4.0 * step * rho * rho);
            for _ in 0..60 {
                let g = 4.0 * step * r * r * r + r - rho;
                let dg = 12.0 * step * r * r + 1.0;
                let next = r - g / dg;
                if (next - r).abs() < 1e-16 * rho.max(1.0) {
                    r = next;
                    break;
                }
                r = next.max(0.0);
            }
            Ok(center.add(&d.scale(r / rho)))
        }
        Kind::HalfCone { s } => Ok(half_cone_prox(*s, step, z)),
        Kind::Cone { t } => {
            let rho = z.norm();
            Ok(scale_to_radius(z, pl_radial_prox(&[0.0, *t], &[0.0, 1.0], step, rho)))
        }
        Kind::Norm => {
            let rho = z.norm();
            Ok(scale_to_radius(z, pl_radial_prox(&[0.0], &[1.0], step, rho)))
        }
        Kind::SupportBall { radius, center } => {
            // Strip the affine part, prox the scaled norm.
            let zz = z.sub(&center.scale(step));
            let rho = zz.norm();
            Ok(scale_to_radius(
                &zz,
                pl_radial_prox(&[0.0], &[*radius], step, rho),
            ))
        }
        Kind::SupportEllipse { .. } => smooth_descent(f, step, z, tol),
        Kind::Combination { .. } => {
            // Affine parts shift the anchor exactly.
            let (slope, rest) = split_affine(f)?;
            let zz = z.sub(&slope.scale(step));
            if let Some(rest) = rest {
                prox_combination(&rest, step, &zz, tol)
            } else {
                Ok(zz)
            }
        }
    }
    .map(|x| {
        debug_assert_eq!(x.dim(), n);
        x
    })
}

/// Splits sum c_i f_i into (total affine slope, remaining combination).
fn split_affine(f: &ConvexFunction) -> Result<(Point, Option<ConvexFunction>)> {
    let n = f.dim();
    let mut slope = Point::zero(n);
    let mut rest = Vec::new();
    if let Kind::Combination { terms } = f.kind() {
        for (c, g) in terms {
            if *c == 0.0 {
                continue;
            }
            match g.kind() {
                Kind::Affine { slope: s, .. } => slope = slope.add(&s.scale(*c)),
                Kind::SupportBall { radius, center } if center.norm() > 0.0 => {
                    slope = slope.add(&center.scale(*c));
                    rest.push((
                        *c,
                        ConvexFunction::support_ball(*radius, Point::zero(n))?,
                    ));
                }
                _ => rest.push((*c, g.clone())),
            }
        }
    } else {
        rest.push((1.0, f.clone()));
    }
    let rest = if rest.is_empty() {
        None
    } else {
        Some(ConvexFunction::combination(rest)?)
    };
    Ok((slope, rest))
}

fn prox_combination(f: &ConvexFunction, step: f64, z: &Point, tol: f64) -> Result<Point> {
    if let Some((knots, slopes)) = f.radial_pl_profile() {
        let rho = z.norm();
        return Ok(scale_to_radius(z, pl_radial_prox(&knots, &slopes, step, rho)));
    }
    if f.is_radial() {
        let rho = z.norm();
        let lip = f.lipschitz_on_ball(rho + 1.0);
        let lo = (rho - step * lip).max(0.0);
        let profile = |r: f64| step * f.radial_profile(r) + 0.5 * (r - rho) * (r - rho);
        let mut r = golden_min(&profile, lo, rho, 1e-13 * (1.0 + rho));
        r = snap_radial(&profile, r, &kink_radii(f));
        return Ok(scale_to_radius(z, r));
    }
    if f.is_axisymmetric() {
        if let Some((mu, s, knots, slopes)) = split_halfcone_pl(f) {
            return Ok(halfcone_pl_prox(mu, s, &knots, &slopes, step, z));
        }
        return axisym_prox(f, step, z);
    }
    if f.is_smooth_everywhere() {
        return smooth_descent(f, step, z, tol);
    }
    subgradient_descent(f, step, z, tol)
}

/// Decomposes f into mu * w_s plus a piecewise-linear radial part, when f is
/// a combination with exactly one half-cone term. Returns
/// (mu, s, radial knots, radial slopes).
fn split_halfcone_pl(f: &ConvexFunction) -> Option<(f64, f64, Vec<f64>, Vec<f64>)> {
    let Kind::Combination { terms } = f.kind() else {
        return None;
    };
    let mut halfcone: Option<(f64, f64)> = None;
    let mut radial = (vec![0.0], vec![0.0]);
    for (c, g) in terms {
        if *c == 0.0 {
            continue;
        }
        match g.kind() {
            Kind::HalfCone { s } => {
                if halfcone.is_some() {
                    return None;
                }
                halfcone = Some((*c, *s));
            }
            _ => {
                let part = g.radial_pl_profile()?;
                radial = super::merge_pl(&radial, &part, *c);
            }
        }
    }
    let (mu, s) = halfcone?;
    Some((mu, s, radial.0, radial.1))
}

/// Exact prox of mu w_s + (piecewise-linear radial part), by case analysis
/// on the optimality conditions.
///
/// For z_n >= 0 the function is radial in R = |x| (w_s coincides with the
/// cone v_s there) and the 1-D piecewise-linear prox applies. For z_n < 0,
/// with head radius h = |x|_{n-1}, writing a in subdiff phi(R) for the radial
/// multiplier and b in subdiff of mu*max(0, h - s), the stationarity system
///
///   zn (1 + step a / R) = zn0,   h (1 + step a / R) + step b = h0
///
/// is solved region by region: both multipliers at fixed slopes, R clamped
/// on a kink sphere, h clamped on the kink cylinder, or both clamped. Every
/// branch is closed form except the h = s branch, which reduces to a
/// monotone scalar root found by bisection. The candidate with the smallest
/// objective wins; by strict convexity it is the unique prox point.
fn halfcone_pl_prox(
    mu: f64,
    s: f64,
    knots: &[f64],
    slopes: &[f64],
    step: f64,
    z: &Point,
) -> Point {
    let n = z.dim();
    if z.last() >= 0.0 {
        let total = super::merge_pl(
            &(knots.to_vec(), slopes.to_vec()),
            &(vec![0.0, s], vec![0.0, 1.0]),
            mu,
        );
        let rho = z.norm();
        return scale_to_radius(z, pl_radial_prox(&total.0, &total.1, step, rho));
    }

    let h0 = z.norm_head();
    let zn0 = z.last();
    let objective = |h: f64, zn: f64| -> f64 {
        let radial = pl_eval(knots, slopes, (h * h + zn * zn).sqrt());
        let head = mu * (h - s).max(0.0);
        step * (radial + head)
            + 0.5 * ((h - h0) * (h - h0) + (zn - zn0) * (zn - zn0))
    };

    let m = knots.len();
    let slack = 1e-11 * (1.0 + z.norm());
    let mut best: Option<(f64, f64, f64)> = None;
    let consider = |h: f64, zn: f64, best: &mut Option<(f64, f64, f64)>| {
        if !(h >= -slack) || !h.is_finite() || !zn.is_finite() {
            return;
        }
        let h = h.max(0.0);
        let v = objective(h, zn);
        if best.map_or(true, |(bv, _, _)| v < bv) {
            *best = Some((v, h, zn));
        }
    };

    let interval = |i: usize| -> (f64, f64) {
        (
            knots[i],
            knots.get(i + 1).copied().unwrap_or(f64::INFINITY),
        )
    };

    for &b in &[0.0, mu] {
        let u = h0 - step * b;
        if u < -slack {
            continue;
        }
        let u = u.max(0.0);
        let d = (u * u + zn0 * zn0).sqrt();
        // Fixed head multiplier, fixed radial slope g_i.
        for i in 0..m {
            let r = d - step * slopes[i];
            let (lo, hi) = interval(i);
            if r <= 0.0 || r < lo - slack || r > hi + slack {
                continue;
            }
            let c = r / d;
            let (h, zn) = (u * c, zn0 * c);
            if (b == 0.0 && h <= s + slack) || (b == mu && h >= s - slack) {
                consider(h, zn, &mut best);
            }
        }
        // Fixed head multiplier, R clamped on a kink sphere.
        for i in 1..m {
            let k = knots[i];
            if d <= 0.0 {
                continue;
            }
            let a_req = (d - k) / step;
            if a_req < slopes[i - 1] - slack || a_req > slopes[i] + slack {
                continue;
            }
            let c = k / d;
            let (h, zn) = (u * c, zn0 * c);
            if (b == 0.0 && h <= s + slack) || (b == mu && h >= s - slack) {
                consider(h, zn, &mut best);
            }
        }
    }

    // h clamped on the cylinder |x|_{n-1} = s, radial slope g_i: solve
    // (R + step g_i)^2 (R^2 - s^2) = zn0^2 R^2 for R >= s by bisection.
    for i in 0..m {
        let c = step * slopes[i];
        let q = |r: f64| (r + c) * (r + c) * (r * r - s * s) - zn0 * zn0 * r * r;
        let mut lo = s;
        let mut hi = (s * s + zn0 * zn0).sqrt() + c + 1.0;
        if q(lo) > 0.0 || q(hi) < 0.0 {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if q(mid) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        let (ilo, ihi) = interval(i);
        if r < ilo - slack || r > ihi + slack {
            continue;
        }
        let zn = zn0 * r / (r + c);
        let b_req = (h0 - s * (r + c) / r) / step;
        if b_req >= -slack && b_req <= mu + slack {
            consider(s, zn, &mut best);
        }
    }

    // Corner: h = s and R on a kink sphere k_i > s.
    for i in 1..m {
        let k = knots[i];
        if k <= s {
            continue;
        }
        let zn = -(k * k - s * s).sqrt();
        let ratio = zn0 / zn;
        if ratio < 1.0 - slack {
            continue;
        }
        let a_req = k * (ratio - 1.0) / step;
        if a_req < slopes[i - 1] - slack || a_req > slopes[i] + slack {
            continue;
        }
        let b_req = (h0 - s * ratio) / step;
        if b_req >= -slack && b_req <= mu + slack {
            consider(s, zn, &mut best);
        }
    }

    let (_, h, zn) = best.expect("optimality case analysis is exhaustive");
    let mut x = if h0 == 0.0 {
        Point::zero(n)
    } else {
        let mut head = *z;
        head.set(n - 1, 0.0);
        head.scale(h / h0)
    };
    x.set(n - 1, zn);
    x
}

/// Value of the piecewise-linear profile (knots, slopes) at r.
fn pl_eval(knots: &[f64], slopes: &[f64], r: f64) -> f64 {
    let mut v = 0.0;
    for i in 0..knots.len() {
        let hi = knots.get(i + 1).copied().unwrap_or(f64::INFINITY);
        if r <= knots[i] {
            break;
        }
        v += slopes[i] * (r.min(hi) - knots[i]);
    }
    v
}

impl ConvexFunction {
    pub(crate) fn is_smooth_everywhere(&self) -> bool {
        match self.kind() {
            Kind::Quadratic { .. } | Kind::QuarticNorm { .. } | Kind::Affine { .. } => true,
            Kind::Combination { terms } => terms
                .iter()
                .all(|(c, f)| *c == 0.0 || f.is_smooth_everywhere()),
            _ => false,
        }
    }
}

/// Radii where a radial profile has kinks (for snapping 1-D minimizers).
fn kink_radii(f: &ConvexFunction) -> Vec<f64> {
    match f.kind() {
        Kind::Cone { t } => vec![*t],
        Kind::Norm | Kind::SupportBall { .. } => vec![0.0],
        Kind::Combination { terms } => terms
            .iter()
            .filter(|(c, _)| *c > 0.0)
            .flat_map(|(_, g)| kink_radii(g))
            .collect(),
        _ => Vec::new(),
    }
}

fn scale_to_radius(z: &Point, r: f64) -> Point {
    let rho = z.norm();
    if rho == 0.0 {
        Point::zero(z.dim())
    } else {
        z.scale(r / rho)
    }
}

/// Exact prox of a nondecreasing convex piecewise-linear radial profile:
/// minimize step * phi(r) + (r - rho)^2 / 2 over r >= 0 by scanning the
/// optimality condition through the knots.
fn pl_radial_prox(knots: &[f64], slopes: &[f64], step: f64, rho: f64) -> f64 {
    for (i, &k) in knots.iter().enumerate() {
        let below = if i == 0 { f64::NEG_INFINITY } else { slopes[i - 1] };
        let above = slopes[i];
        // Knot optimal iff rho - step*above <= k <= rho - step*below.
        if rho - step * above <= k && k <= rho - step * below {
            return k;
        }
        // Interior of [k, next) optimal at r = rho - step*above.
        let cand = rho - step * above;
        let hi = knots.get(i + 1).copied().unwrap_or(f64::INFINITY);
        if cand > k && cand < hi {
            return cand;
        }
    }
    // Profile is nondecreasing so the scan cannot fall through; the guard
    // keeps pathological float inputs finite.
    knots[0].max(rho - step * slopes.last().copied().unwrap_or(0.0)).max(0.0)
}

/// Golden-section minimization of a convex function on [a, b].
fn golden_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, atol: f64) -> f64 {
    if b <= a {
        return a;
    }
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if b - a <= atol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Replaces r by a nearby kink radius when that does not increase the
/// objective; recovers exact minimizers that sit on profile knots.
fn snap_radial<F: Fn(f64) -> f64>(profile: &F, r: f64, kinks: &[f64]) -> f64 {
    let mut best = r;
    let mut fbest = profile(r);
    for &k in kinks {
        if (k - r).abs() < 1e-6 * (1.0 + r) {
            let fk = profile(k);
            if fk <= fbest {
                best = k;
                fbest = fk;
            }
        }
    }
    best
}

/// Closed-form prox of w_s. For z_n >= 0 the function is radial in |x| and
/// the answer is the radial clamp; for z_n < 0 it depends only on |x|_{n-1}
/// and the clamp acts on the head coordinates alone.
fn half_cone_prox(s: f64, step: f64, z: &Point) -> Point {
    let n = z.dim();
    if z.last() >= 0.0 {
        let rho = z.norm();
        scale_to_radius(z, pl_radial_prox(&[0.0, s], &[0.0, 1.0], step, rho))
    } else {
        let h = z.norm_head();
        let r = pl_radial_prox(&[0.0, s], &[0.0, 1.0], step, h);
        let mut x = if h == 0.0 { Point::zero(n) } else { z.scale(r / h) };
        x.set(n - 1, z.last());
        x
    }
}

/// Nested golden-section over (|x|_{n-1}, x_n) for half-cone combinations.
/// Inner minimization in x_n is exact convex 1-D; the partial minimum is
/// convex in the head radius. Minimizers are snapped onto the kink circles
/// |x| = t and kink cylinders |x|_{n-1} = s before returning.
fn axisym_prox(f: &ConvexFunction, step: f64, z: &Point) -> Result<Point> {
    let n = f.dim();
    let h0 = z.norm_head();
    let zn0 = z.last();
    let scale = 1.0 + z.norm();
    let lip = f.lipschitz_on_ball(z.norm() + 1.0);

    let eval_axi = |h: f64, zn: f64| -> f64 {
        let mut p = Point::zero(n);
        p.set(0, h);
        p.set(n - 1, zn);
        f.eval(&p)
    };
    let objective = |h: f64, zn: f64| -> f64 {
        step * eval_axi(h, zn) + 0.5 * ((h - h0) * (h - h0) + (zn - zn0) * (zn - zn0))
    };

    let zn_lo = zn0 - step * lip;
    let zn_hi = zn0 + step * lip;
    let inner = |h: f64| -> (f64, f64) {
        let g = |zn: f64| objective(h, zn);
        let zn = golden_min(&g, zn_lo, zn_hi, 1e-13 * scale);
        (g(zn), zn)
    };

    let h_lo = (h0 - step * lip).max(0.0);
    let h_hi = h0 + 1e-12 * scale;
    let outer = |h: f64| inner(h).0;
    let mut h = golden_min(&outer, h_lo, h_hi, 1e-13 * scale);
    let mut zn = inner(h).1;

    // Snap candidates onto kink sets, keeping whichever has the lowest
    // objective.
    let mut best = (objective(h, zn), h, zn);
    let consider = |hc: f64, znc: f64, best: &mut (f64, f64, f64)| {
        if hc >= 0.0 {
            let v = objective(hc, znc);
            if v <= best.0 {
                *best = (v, hc, znc);
            }
        }
    };
    let window = 1e-6 * scale;
    for s in head_kinks(f) {
        if (h - s).abs() < window {
            let (_, znc) = inner(s);
            consider(s, znc, &mut best);
        }
    }
    for t in kink_radii(f) {
        let r = (h * h + zn * zn).sqrt();
        if r > 0.0 && (r - t).abs() < window {
            let c = t / r;
            consider(h * c, zn * c, &mut best);
        }
    }
    for s in head_kinks(f) {
        for t in kink_radii(f) {
            if t > s && (h - s).abs() < window {
                let znc = -(t * t - s * s).sqrt();
                if (znc - zn).abs() < window {
                    consider(s, znc, &mut best);
                }
            }
        }
    }
    h = best.1;
    zn = best.2;

    let mut x = if h0 == 0.0 {
        Point::zero(n)
    } else {
        let mut head = *z;
        head.set(n - 1, 0.0);
        head.scale(h / h0)
    };
    x.set(n - 1, zn);
    Ok(x)
}

/// Cylinder radii |x|_{n-1} = s where an axisymmetric profile has kinks.
fn head_kinks(f: &ConvexFunction) -> Vec<f64> {
    match f.kind() {
        Kind::HalfCone { s } => vec![*s],
        Kind::Combination { terms } => terms
            .iter()
            .filter(|(c, _)| *c > 0.0)
            .flat_map(|(_, g)| head_kinks(g))
            .collect(),
        _ => Vec::new(),
    }
}

/// Gradient descent with backtracking on the strongly convex prox objective.
fn smooth_descent(f: &ConvexFunction, step: f64, z: &Point, tol: f64) -> Result<Point> {
    let mut x = *z;
    let mut last_norm = f64::INFINITY;
    for _ in 0..500 {
        let grad = match f.gradient(&x) {
            Ok(g) => g.scale(step).add(&x.sub(z)),
            Err(_) => return subgradient_descent(f, step, z, tol),
        };
        last_norm = grad.norm();
        if last_norm <= 0.25 * tol.max(1e-13 * (1.0 + z.norm())) {
            return Ok(x);
        }
        // Backtracking line search on the 1-strongly convex objective.
        let fx = step * f.eval(&x) + 0.5 * x.sub(z).dot(&x.sub(z));
        let mut gamma = 1.0;
        for _ in 0..60 {
            let cand = x.sub(&grad.scale(gamma));
            let fc = step * f.eval(&cand) + 0.5 * cand.sub(z).dot(&cand.sub(z));
            if fc <= fx - 0.25 * gamma * last_norm * last_norm {
                x = cand;
                break;
            }
            gamma *= 0.5;
        }
    }
    if last_norm <= tol.max(1e-10 * (1.0 + z.norm())) {
        Ok(x)
    } else {
        Err(Error::NonConvergence {
            residual: last_norm,
            iterations: 500,
        })
    }
}

/// Subgradient descent with diminishing steps; the generic fallback.
fn subgradient_descent(f: &ConvexFunction, step: f64, z: &Point, _tol: f64) -> Result<Point> {
    let mut x = *z;
    let mut best = x;
    let mut best_val = step * f.eval(&x);
    for k in 1..=5000usize {
        let g = match f.subdiff(&x) {
            Ok(sd) => match sd {
                super::SubdiffSet::Point(p) => p,
                other => {
                    // Any element works for a subgradient step; use a support
                    // point in the descent direction of the quadratic part.
                    other.scale(1.0).support_point_for(&x.sub(z).scale(-1.0))
                }
            },
            Err(_) => return Err(Error::UnsupportedVariant("no subgradient available".into())),
        };
        let grad = g.scale(step).add(&x.sub(z));
        let gamma = 0.5 / k as f64;
        x = x.sub(&grad.scale(gamma / grad.norm().max(1e-30)));
        let val = step * f.eval(&x) + 0.5 * x.sub(z).dot(&x.sub(z));
        if val < best_val {
            best_val = val;
            best = x;
        }
    }
    Ok(best)
}

impl super::SubdiffSet {
    fn support_point_for(&self, dir: &Point) -> Point {
        match self {
            super::SubdiffSet::Point(p) => *p,
            super::SubdiffSet::Segment(a, b) => {
                if b.sub(a).dot(dir) >= 0.0 {
                    *b
                } else {
                    *a
                }
            }
            super::SubdiffSet::Ball { center, radius } => match dir.unit() {
                Some(u) => center.add(&u.scale(*radius)),
                None => *center,
            },
            super::SubdiffSet::ConvexHullOfPoints(ps) => *ps
                .iter()
                .max_by(|a, b| a.dot(dir).partial_cmp(&b.dot(dir)).unwrap())
                .unwrap(),
            super::SubdiffSet::MinkowskiSum(sets) => {
                let mut p = Point::zero(dir.dim());
                for s in sets {
                    p = p.add(&s.support_point_for(dir));
                }
                p
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_prox_branches() {
        let v1 = ConvexFunction::cone(2, 1.0).unwrap();
        // rho - s >= t branch.
        let x = v1.prox(0.5, &Point::new(&[2.0, 0.0]), 1e-10).unwrap();
        assert!(x.dist(&Point::new(&[1.5, 0.0])) < 1e-12);
        // t < rho < t + s clamps to the kink circle.
        let x = v1.prox(0.5, &Point::new(&[1.2, 0.0]), 1e-10).unwrap();
        assert!(x.dist(&Point::new(&[1.0, 0.0])) < 1e-12);
        // Flat region is fixed.
        let x = v1.prox(0.5, &Point::new(&[0.3, 0.2]), 1e-10).unwrap();
        assert!(x.dist(&Point::new(&[0.3, 0.2])) < 1e-12);
    }

    #[test]
    fn quadratic_prox_closed_form() {
        let q = ConvexFunction::quadratic(Point::new(&[1.0, -1.0]), 0.5).unwrap();
        let z = Point::new(&[3.0, 1.0]);
        let x = q.prox(2.0, &z, 1e-10).unwrap();
        // (z + 2*2*0.5*a)/(1+2*2*0.5) = (z + 2a)/3.
        assert!(x.dist(&Point::new(&[5.0 / 3.0, -1.0 / 3.0])) < 1e-12);
    }

    #[test]
    fn half_cone_prox_cases() {
        let w1 = ConvexFunction::half_cone(2, 1.0).unwrap();
        // Upper half: radial clamp.
        let x = w1.prox(0.5, &Point::new(&[0.0, 2.0]), 1e-10).unwrap();
        assert!(x.dist(&Point::new(&[0.0, 1.5])) < 1e-12);
        // Lower half: clamp on |x|_1 only, x_2 untouched.
        let x = w1.prox(0.5, &Point::new(&[2.0, -3.0]), 1e-10).unwrap();
        assert!(x.dist(&Point::new(&[1.5, -3.0])) < 1e-12);
        // Flat wedge below: identity.
        let x = w1.prox(0.5, &Point::new(&[0.5, -4.0]), 1e-10).unwrap();
        assert!(x.dist(&Point::new(&[0.5, -4.0])) < 1e-12);
    }

    #[test]
    fn composite_prox_matches_radial_structure() {
        // mu w_s + lambda v_t in the upper half plane is radial: compare the
        // 2-D nested solver against the 1-D piecewise-linear closed form.
        let f = ConvexFunction::halfcone_plus_cone(2, 1.0, 0.5, 1.0, 1.0).unwrap();
        let z = Point::new(&[0.3, 1.7]);
        let x = f.prox(0.4, &z, 1e-8).unwrap();
        let rho = z.norm();
        let r = pl_radial_prox(&[0.0, 0.5, 1.0], &[0.0, 1.0, 2.0], 0.4, rho);
        let expect = z.scale(r / rho);
        assert!(x.dist(&expect) < 1e-7, "{x:?} vs {expect:?}");
    }

    #[test]
    fn prox_zero_slope_region_is_identity() {
        let f = ConvexFunction::halfcone_plus_cone(2, 2.0, 1.0, 0.5, 2.0).unwrap();
        let z = Point::new(&[0.2, -0.4]);
        let x = f.prox(0.7, &z, 1e-8).unwrap();
        assert!(x.dist(&z) < 1e-9);
    }

    #[test]
    fn quartic_prox_optimality() {
        let f = ConvexFunction::quartic_norm(Point::new(&[0.5, 0.0]));
        let z = Point::new(&[1.5, 1.0]);
        let x = f.prox(0.3, &z, 1e-9).unwrap();
        let g = f.gradient(&x).unwrap();
        let resid = x.add(&g.scale(0.3)).sub(&z).norm();
        assert!(resid < 1e-9, "residual {resid}");
    }

    #[test]
    fn firm_nonexpansiveness_samples() {
        use rand::Rng;
        let mut rng = crate::numerics::stream(5, 0);
        let fs = vec![
            ConvexFunction::cone(2, 1.0).unwrap(),
            ConvexFunction::half_cone(2, 0.7).unwrap(),
            ConvexFunction::quadratic(Point::new(&[0.2, -0.1]), 0.8).unwrap(),
            ConvexFunction::quartic_norm(Point::new(&[0.5, 0.0])),
            ConvexFunction::halfcone_plus_cone(2, 1.0, 0.5, 2.0, 1.0).unwrap(),
            ConvexFunction::support_ball(1.5, Point::new(&[0.3, 0.0])).unwrap(),
        ];
        for f in &fs {
            for _ in 0..40 {
                let z1 = Point::new(&[rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]);
                let z2 = Point::new(&[rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]);
                let x1 = f.prox(0.6, &z1, 1e-7).unwrap();
                let x2 = f.prox(0.6, &z2, 1e-7).unwrap();
                assert!(
                    x1.dist(&x2) <= z1.dist(&z2) + 1e-7,
                    "prox expansion for {f:?}"
                );
            }
        }
    }

    #[test]
    fn rotated_prox_conjugation() {
        let w = ConvexFunction::half_cone(2, 1.0).unwrap();
        let theta = Rotation::planar(2, 0, 1, 0.9);
        let rot = Rotated { f: &w, theta };
        let z = Point::new(&[1.4, -2.0]);
        let x = rot.prox_point(0.5, &z).unwrap();
        let direct = w
            .prox_point(0.5, &theta.apply_inverse(&z))
            .map(|y| theta.apply(&y))
            .unwrap();
        assert!(x.dist(&direct) < 1e-12);
    }
}
