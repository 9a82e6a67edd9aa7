//! Radial test densities and the integral transform calculus.
//!
//! The basic transform acts on continuous densities with bounded support on
//! (0, infinity) by
//!
//! ```text
//! R xi(s) = s xi(s) + int_s^inf xi(r) dr
//! ```
//!
//! and its iterates satisfy R^m xi(s) = s^m xi(s) + m int_s^inf r^{m-1} xi(r) dr
//! for any integer m, with negative m implementing the inverse through the
//! same algebraic formula. Piecewise-linear and negative-log densities carry
//! exact antiderivatives; transformed densities evaluate their tail integrals
//! by adaptive quadrature over the exact inner evaluations, so a composed
//! transform is computed literally rather than simplified symbolically.

use crate::numerics::adaptive_integral;
use crate::{Error, Result};
use std::sync::Arc;

/// Decay classes of densities on (0, infinity).
///
/// * `Cb`: continuous with bounded support (no decay condition).
/// * `D`: lim r^{n-j} xi(r) = 0 and the tail integral of r^{n-j-1} xi stays
///   finite as r -> 0+ (for j = n: xi has a finite limit at 0+).
/// * `T`: lim r^{n-j+1} xi(r) = 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DensityClass {
    Cb,
    D,
    T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ClassTag {
    pub class: DensityClass,
    pub n: usize,
    pub j: usize,
}

impl ClassTag {
    pub fn t(n: usize, j: usize) -> Self {
        ClassTag {
            class: DensityClass::T,
            n,
            j,
        }
    }
    pub fn d(n: usize, j: usize) -> Self {
        ClassTag {
            class: DensityClass::D,
            n,
            j,
        }
    }
}

#[derive(Clone)]
enum Repr {
    /// Linear between knots, constant at values[0] below the first knot,
    /// zero beyond the last knot (whose value must vanish).
    PiecewiseLinear { knots: Vec<f64>, values: Vec<f64> },
    /// ln(upper / r) on (0, upper], zero beyond.
    NegLog { upper: f64 },
    /// The exact formula s^m base(s) + m * tail_{m-1}(s).
    Transformed { base: Arc<RadialDensity>, power: i32 },
    /// factor * base, for non-piecewise-linear bases.
    Scaled { base: Arc<RadialDensity>, factor: f64 },
    /// Arbitrary evaluable density (used for measured marginals and kernel
    /// slices); tail integrals are numeric.
    Closure {
        eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        knots: Vec<f64>,
    },
}

/// A test density xi (or alpha) on (0, infinity) with bounded support,
/// carrying its certified decay-class tags.
#[derive(Clone)]
pub struct RadialDensity {
    repr: Repr,
    support_upper: f64,
    /// Approximate pole order at 0+ (0 = bounded, 1 covers logarithms).
    singularity_order: i32,
    tags: Vec<ClassTag>,
}

impl std::fmt::Debug for RadialDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match &self.repr {
            Repr::PiecewiseLinear { .. } => "PiecewiseLinear",
            Repr::NegLog { .. } => "NegLog",
            Repr::Transformed { power, .. } => return write!(f, "Transformed(m={power})"),
            Repr::Scaled { .. } => "Scaled",
            Repr::Closure { .. } => "Closure",
        };
        write!(f, "{name}(support {:.4})", self.support_upper)
    }
}

impl RadialDensity {
    /// Piecewise-linear density; the final value must be zero so the density
    /// is continuous with bounded support.
    pub fn piecewise_linear(knots: &[f64], values: &[f64]) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(Error::InvalidParameter(
                "piecewise-linear density needs matching knots/values, at least two".into(),
            ));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) || knots[0] < 0.0 {
            return Err(Error::InvalidParameter(
                "knots must be nonnegative and strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite density value".into()));
        }
        if values.last().copied().unwrap_or(1.0) != 0.0 {
            return Err(Error::InvalidParameter(
                "density must vanish at its last knot (bounded support)".into(),
            ));
        }
        Ok(RadialDensity {
            support_upper: *knots.last().unwrap(),
            repr: Repr::PiecewiseLinear {
                knots: knots.to_vec(),
                values: values.to_vec(),
            },
            singularity_order: 0,
            tags: Vec::new(),
        })
    }

    /// The tent max(0, c - r).
    pub fn tent(c: f64) -> Self {
        RadialDensity::piecewise_linear(&[0.0, c], &[c, 0.0]).expect("valid tent")
    }

    /// ln(upper/r) on (0, upper], zero beyond.
    pub fn neg_log(upper: f64) -> Self {
        RadialDensity {
            repr: Repr::NegLog { upper },
            support_upper: upper,
            singularity_order: 1,
            tags: Vec::new(),
        }
    }

    /// Wraps an arbitrary evaluation rule (zero must be returned beyond
    /// `support_upper`); `knots` lists quadrature breakpoints.
    pub fn from_closure(
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support_upper: f64,
        knots: Vec<f64>,
        singularity_order: i32,
    ) -> Self {
        RadialDensity {
            repr: Repr::Closure {
                eval: Arc::new(eval),
                knots,
            },
            support_upper,
            singularity_order,
            tags: Vec::new(),
        }
    }

    pub fn support_upper(&self) -> f64 {
        self.support_upper
    }

    pub fn singularity_order(&self) -> i32 {
        self.singularity_order
    }

    pub fn tags(&self) -> &[ClassTag] {
        &self.tags
    }

    /// Adds a tag after certifying it numerically.
    pub fn with_tag(mut self, tag: ClassTag) -> Result<Self> {
        certify(&self, tag)?;
        if !self.tags.contains(&tag) {
            self.tags.push(tag);
        }
        Ok(self)
    }

    pub fn has_tag(&self, tag: ClassTag) -> bool {
        self.tags.contains(&tag)
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r >= self.support_upper {
            return 0.0;
        }
        match &self.repr {
            Repr::PiecewiseLinear { knots, values } => {
                if r <= knots[0] {
                    return values[0];
                }
                let i = knots.partition_point(|&k| k <= r) - 1;
                if i + 1 >= knots.len() {
                    return 0.0;
                }
                let t = (r - knots[i]) / (knots[i + 1] - knots[i]);
                values[i] * (1.0 - t) + values[i + 1] * t
            }
            Repr::NegLog { upper } => (upper / r).ln(),
            Repr::Transformed { base, power } => {
                let m = *power;
                r.powi(m) * base.eval(r) + m as f64 * base.tail_integral(m - 1, r)
            }
            Repr::Scaled { base, factor } => factor * base.eval(r),
            Repr::Closure { eval, .. } => eval(r),
        }
    }

    /// int_s^inf r^p xi(r) dr, exact for piecewise-linear and negative-log
    /// representations, adaptive quadrature otherwise.
    pub fn tail_integral(&self, p: i32, s: f64) -> f64 {
        let upper = self.support_upper;
        if s >= upper {
            return 0.0;
        }
        match &self.repr {
            Repr::PiecewiseLinear { knots, values } => {
                let mut total = 0.0;
                // Constant stretch below the first knot.
                if s < knots[0] {
                    total += values[0] * power_integral(p, s, knots[0]);
                }
                for i in 0..knots.len() - 1 {
                    let (a, b) = (knots[i].max(s), knots[i + 1]);
                    if a >= b {
                        continue;
                    }
                    // xi(r) = u + v r on this piece.
                    let v = (values[i + 1] - values[i]) / (knots[i + 1] - knots[i]);
                    let u = values[i] - v * knots[i];
                    total += u * power_integral(p, a, b) + v * power_integral(p + 1, a, b);
                }
                total
            }
            Repr::NegLog { upper } => log_power_integral(p, s, *upper),
            Repr::Scaled { base, factor } => factor * base.tail_integral(p, s),
            _ => self.numeric_tail(p, s),
        }
    }

    fn numeric_tail(&self, p: i32, s: f64) -> f64 {
        let upper = self.support_upper;
        // Geometric pre-splitting towards the (possibly singular) lower end.
        let mut cuts = self.knots();
        let mut t = s;
        while t * 4.0 < upper {
            t *= 4.0;
            cuts.push(t);
        }
        let f = |r: f64| r.powi(p) * self.eval(r);
        let (value, _) = adaptive_integral(&f, s, upper, &cuts, 1e-13);
        value
    }

    /// Quadrature breakpoints (profile kinks).
    pub fn knots(&self) -> Vec<f64> {
        match &self.repr {
            Repr::PiecewiseLinear { knots, .. } => knots.clone(),
            Repr::NegLog { upper } => vec![*upper],
            Repr::Transformed { base, .. } | Repr::Scaled { base, .. } => base.knots(),
            Repr::Closure { knots, .. } => knots.clone(),
        }
    }

    /// factor * self. Piecewise-linear data is scaled in place.
    pub fn scale(&self, factor: f64) -> RadialDensity {
        match &self.repr {
            Repr::PiecewiseLinear { knots, values } => RadialDensity {
                repr: Repr::PiecewiseLinear {
                    knots: knots.clone(),
                    values: values.iter().map(|v| v * factor).collect(),
                },
                support_upper: self.support_upper,
                singularity_order: self.singularity_order,
                tags: self.tags.clone(),
            },
            Repr::Scaled { base, factor: f0 } => RadialDensity {
                repr: Repr::Scaled {
                    base: base.clone(),
                    factor: f0 * factor,
                },
                support_upper: self.support_upper,
                singularity_order: self.singularity_order,
                tags: self.tags.clone(),
            },
            _ => RadialDensity {
                repr: Repr::Scaled {
                    base: Arc::new(self.clone()),
                    factor,
                },
                support_upper: self.support_upper,
                singularity_order: self.singularity_order,
                tags: self.tags.clone(),
            },
        }
    }
}

/// int_a^b r^p dr for integer p.
fn power_integral(p: i32, a: f64, b: f64) -> f64 {
    if p == -1 {
        (b / a).ln()
    } else {
        (b.powi(p + 1) - a.powi(p + 1)) / (p + 1) as f64
    }
}

/// int_s^upper r^p ln(upper/r) dr.
fn log_power_integral(p: i32, s: f64, upper: f64) -> f64 {
    if p == -1 {
        0.5 * (upper / s).ln() * (upper / s).ln()
    } else {
        let q = (p + 1) as f64;
        // d/dr [ r^q (q ln(u/r) + 1) / q^2 ] = r^p q ln(u/r) / q = r^p ln(u/r).
        let at = |r: f64| r.powi(p + 1) * (q * (upper / r).ln() + 1.0) / (q * q);
        at(upper) - at(s)
    }
}

/// R xi.
pub fn r_apply(xi: &RadialDensity) -> RadialDensity {
    r_power_unchecked(xi, 1)
}

fn r_power_unchecked(xi: &RadialDensity, m: i32) -> RadialDensity {
    if m == 0 {
        return xi.clone();
    }
    let singularity_order = if m < 0 {
        xi.singularity_order + (-m)
    } else {
        (xi.singularity_order - m).max(0)
    };
    RadialDensity {
        repr: Repr::Transformed {
            base: Arc::new(xi.clone()),
            power: m,
        },
        support_upper: xi.support_upper,
        singularity_order,
        tags: Vec::new(),
    }
}

/// R^m xi for any integer m (negative m is the inverse transform, computed
/// with the same formula). Class tags are transported T^n_k -> T^{n-m}_k and
/// re-certified; a clearly diverging limit check is a hard error.
pub fn r_power(xi: &RadialDensity, m: i32) -> Result<RadialDensity> {
    let mut out = r_power_unchecked(xi, m);
    for tag in xi.tags.clone() {
        if tag.class == DensityClass::T {
            let new_n = tag.n as i64 - m as i64;
            if new_n >= tag.j as i64 && new_n >= 1 {
                let new_tag = ClassTag::t(new_n as usize, tag.j);
                certify(&out, new_tag)?;
                out.tags.push(new_tag);
            }
        }
    }
    Ok(out)
}

/// Outcome of a numerical limit certification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certification {
    /// The probed limit visibly tends to its required value.
    Verified,
    /// Neither verified nor clearly divergent (reported as a warning by
    /// callers that care).
    Inconclusive,
}

/// Limit certification on a geometric grid r = r0 * 2^{-k}. The check is
/// numerical: a clear divergence (three consecutive increases by at least a
/// factor of two) is a hard error; a limit that visibly decays to zero is
/// `Verified`; anything else is `Inconclusive`.
pub fn certify(xi: &RadialDensity, tag: ClassTag) -> Result<Certification> {
    let probe = |exponent: f64| -> Result<Certification> {
        let r0 = (0.5 * xi.support_upper()).min(0.5);
        let values: Vec<f64> = (4..30)
            .map(|k| {
                let r = r0 * 0.5f64.powi(k);
                r.powf(exponent) * xi.eval(r)
            })
            .collect();
        check_limit_zero(&values, &format!("{:?}^{}_{}", tag.class, tag.n, tag.j))
    };
    match tag.class {
        DensityClass::Cb => Ok(Certification::Verified),
        DensityClass::T => probe((tag.n - tag.j + 1) as f64),
        DensityClass::D => {
            if tag.j == tag.n {
                // Finite limit at 0+.
                let r0 = (0.5 * xi.support_upper()).min(0.5);
                let values: Vec<f64> = (4..30).map(|k| xi.eval(r0 * 0.5f64.powi(k))).collect();
                if clearly_diverges(&values) {
                    return Err(Error::ClassViolation {
                        class: format!("D^{}_{}", tag.n, tag.j),
                        detail: "no finite limit at 0+".into(),
                    });
                }
                Ok(Certification::Verified)
            } else {
                let mut out = probe((tag.n - tag.j) as f64)?;
                // Tail integral of r^{n-j-1} xi must stabilize as r -> 0+.
                let r0 = (0.5 * xi.support_upper()).min(0.5);
                let ints: Vec<f64> = (4..20)
                    .map(|k| {
                        xi.tail_integral(tag.n as i32 - tag.j as i32 - 1, r0 * 0.5f64.powi(k))
                    })
                    .collect();
                let diffs: Vec<f64> = ints.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
                if clearly_diverges(&diffs) {
                    return Err(Error::ClassViolation {
                        class: format!("D^{}_{}", tag.n, tag.j),
                        detail: "tail integral does not converge at 0+".into(),
                    });
                }
                if diffs.last().map_or(false, |d| *d > 1e-8) {
                    out = Certification::Inconclusive;
                }
                Ok(out)
            }
        }
    }
}

fn check_limit_zero(values: &[f64], label: &str) -> Result<Certification> {
    if clearly_diverges(values) {
        return Err(Error::ClassViolation {
            class: label.into(),
            detail: format!(
                "limit check diverges (last probes {:?})",
                &values[values.len().saturating_sub(3)..]
            ),
        });
    }
    let head = values.iter().take(4).fold(0.0f64, |a, v| a.max(v.abs()));
    let tail = values.iter().rev().take(3).fold(0.0f64, |a, v| a.max(v.abs()));
    if tail <= 1e-4 * head.max(1e-6) {
        Ok(Certification::Verified)
    } else {
        Ok(Certification::Inconclusive)
    }
}

fn clearly_diverges(values: &[f64]) -> bool {
    let mut rising = 0;
    for w in values.windows(2) {
        let (a, b) = (w[0].abs(), w[1].abs());
        if b >= 2.0 * a && b > 1e-12 {
            rising += 1;
            if rising >= 3 {
                return true;
            }
        } else {
            rising = 0;
        }
    }
    false
}

/// A bivariate density on (0,inf)^2 with declared breakpoints.
#[derive(Clone)]
pub struct BivariateDensity {
    eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    support_upper: f64,
    knots: Vec<f64>,
    /// Max-type integrands have a kink where the running variable crosses
    /// the fixed one; `diag_kink` inserts that breakpoint.
    diag_kink: bool,
}

impl BivariateDensity {
    pub fn new(
        eval: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        support_upper: f64,
        knots: Vec<f64>,
        diag_kink: bool,
    ) -> Self {
        BivariateDensity {
            eval: Arc::new(eval),
            support_upper,
            knots,
            diag_kink,
        }
    }

    /// gamma(s, t) = g(max(s, t)).
    pub fn of_max(g: &RadialDensity) -> Self {
        let knots = g.knots();
        let upper = g.support_upper();
        let g = g.clone();
        BivariateDensity::new(move |s, t| g.eval(s.max(t)), upper, knots, true)
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        (self.eval)(s, t)
    }
}

/// The m-fold partial transform on the chosen axis (1 or 2), computed by the
/// iterated-transform formula at fixed other coordinate, with the kink of
/// max-type integrands split explicitly.
pub fn r_partial(gamma: &BivariateDensity, axis: u8, m: u32) -> Result<BivariateDensity> {
    if axis != 1 && axis != 2 {
        return Err(Error::InvalidParameter("axis must be 1 or 2".into()));
    }
    let g = gamma.clone();
    let m = m as i32;
    let upper = g.support_upper;
    let eval = move |s: f64, t: f64| -> f64 {
        let (a, b) = if axis == 1 { (s, t) } else { (t, s) };
        let line = |r: f64| {
            if axis == 1 {
                g.eval(r, b)
            } else {
                g.eval(b, r)
            }
        };
        if a >= upper {
            return 0.0;
        }
        let mut cuts = g.knots.clone();
        if g.diag_kink {
            cuts.push(b);
        }
        let f = |r: f64| r.powi(m - 1) * line(r);
        let (tail, _) = adaptive_integral(&f, a, upper, &cuts, 1e-12);
        a.powi(m) * line(a) + m as f64 * tail
    };
    Ok(BivariateDensity::new(
        eval,
        upper,
        gamma.knots.clone(),
        gamma.diag_kink,
    ))
}

/// The kinematic kernel (s,t) -> R_1^{n-k}(R^{-(n-k)} alpha)(max(s,t)),
/// evaluated as the literal composite: the inner inverse transform g is a
/// transformed density, and the outer partial transform integrates g along
/// the first axis with the max-kink split at r = t.
#[derive(Clone, Debug)]
pub struct KinematicKernel {
    n: usize,
    k: usize,
    alpha: RadialDensity,
    g: RadialDensity,
}

impl KinematicKernel {
    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.k)
    }

    pub fn alpha(&self) -> &RadialDensity {
        &self.alpha
    }

    /// The inner density g = R^{-(n-k)} alpha.
    pub fn inner(&self) -> &RadialDensity {
        &self.g
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        let m = (self.n - self.k) as i32;
        if m == 0 {
            return self.alpha.eval(s.max(t));
        }
        if s >= t {
            // The plain iterated transform of g at s.
            s.powi(m) * self.g.eval(s) + m as f64 * self.g.tail_integral(m - 1, s)
        } else {
            // Constant stretch g(t) over [s, t], then the tail beyond t.
            let gt = self.g.eval(t);
            s.powi(m) * gt + gt * (t.powi(m) - s.powi(m))
                + m as f64 * self.g.tail_integral(m - 1, t)
        }
    }

    /// The conjectured collapsed form alpha(max(s,t)); tested against
    /// `eval`, never assumed.
    pub fn collapsed(&self, s: f64, t: f64) -> f64 {
        self.alpha.eval(s.max(t))
    }

    /// The kernel slice s -> K(s, t) as a radial density.
    pub fn slice_at(&self, t: f64) -> RadialDensity {
        let k = self.clone();
        let mut knots = self.g.knots();
        knots.push(t);
        let upper = self.alpha.support_upper().max(t);
        RadialDensity::from_closure(move |s| k.eval(s, t), upper, knots, 0)
    }
}

/// Builds the kinematic kernel for alpha in T^n_n and 1 <= k <= n.
pub fn kernel_make(alpha: &RadialDensity, n: usize, k: usize) -> Result<KinematicKernel> {
    if !(1..=n).contains(&k) {
        return Err(Error::InvalidParameter(format!(
            "kernel needs 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    certify(alpha, ClassTag::t(n, n))?;
    let g = r_power_unchecked(alpha, -((n - k) as i32));
    Ok(KinematicKernel {
        n,
        k,
        alpha: alpha.clone(),
        g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tent() -> RadialDensity {
        RadialDensity::tent(1.0)
    }

    #[test]
    fn r_apply_tent_values() {
        let r = r_apply(&tent());
        assert!((r.eval(0.5) - 0.375).abs() < 1e-14);
        assert_eq!(r.eval(1.0), 0.0);
        assert_eq!(r.eval(2.5), 0.0);
    }

    #[test]
    fn r_apply_neg_log() {
        let r = r_apply(&RadialDensity::neg_log(1.0));
        // s(-ln s) + [r - r ln r]_s^1 = 1 - s.
        assert!((r.eval(0.5) - 0.5).abs() < 1e-13);
        assert!((r.eval(0.25) - 0.75).abs() < 1e-13);
    }

    #[test]
    fn r_power_examples() {
        let xi = tent();
        let r2 = r_power(&xi, 2).unwrap();
        assert!((r2.eval(0.5) - 0.2916666666666667).abs() < 1e-12);
        let rm1 = r_power(&xi, -1).unwrap();
        assert!((rm1.eval(0.5) - std::f64::consts::LN_2).abs() < 1e-12);
        let id = r_power(&xi, 0).unwrap();
        assert_eq!(id.eval(0.37), xi.eval(0.37));
    }

    #[test]
    fn inverse_of_tent_is_neg_log() {
        // R^{-1}(tent at c)(s) = ln(c/s) on (0, c].
        let inv = r_power(&RadialDensity::tent(1.5), -1).unwrap();
        for &s in &[0.1, 0.5, 1.0, 1.4] {
            assert!((inv.eval(s) - (1.5f64 / s).ln()).abs() < 1e-12, "s={s}");
        }
    }

    #[test]
    fn round_trip_and_semigroup() {
        let xi = RadialDensity::tent(1.25);
        for m in 1..=3 {
            let fwd = r_power(&xi, m).unwrap();
            let back = r_power(&fwd, -m).unwrap();
            for i in 1..=40 {
                let s = 1.3 * i as f64 / 40.0;
                assert!(
                    (back.eval(s) - xi.eval(s)).abs() < 1e-9,
                    "m={m}, s={s}: {} vs {}",
                    back.eval(s),
                    xi.eval(s)
                );
            }
        }
        let a = r_power(&xi, 1).unwrap();
        let ab = r_power(&a, 2).unwrap();
        let direct = r_power(&xi, 3).unwrap();
        for i in 1..=20 {
            let s = 1.3 * i as f64 / 20.0;
            assert!((ab.eval(s) - direct.eval(s)).abs() < 1e-9);
        }
    }

    #[test]
    fn class_certification() {
        let xi = tent();
        assert_eq!(certify(&xi, ClassTag::t(2, 1)).unwrap(), Certification::Verified);
        assert_eq!(certify(&xi, ClassTag::t(3, 3)).unwrap(), Certification::Verified);
        assert!(certify(&xi, ClassTag::d(2, 2)).is_ok());
        // R^{-2} of a tent behaves like 1/s near zero: the weight r^{n-j+1}
        // with n = j leaves a nonzero limit (inconclusive, not divergent).
        let pole = r_power_unchecked(&xi, -2);
        assert_eq!(
            certify(&pole, ClassTag::t(2, 2)).unwrap(),
            Certification::Inconclusive
        );
        // A genuine divergence is a hard error.
        let worse = r_power_unchecked(&xi, -3);
        assert!(certify(&worse, ClassTag::t(2, 2)).is_err());
        // Higher weights still vanish.
        assert_eq!(
            certify(&pole, ClassTag::t(3, 1)).unwrap(),
            Certification::Verified
        );
    }

    #[test]
    fn class_transport() {
        let xi = RadialDensity::tent(1.0).with_tag(ClassTag::t(3, 1)).unwrap();
        for l in 1..=2 {
            let out = r_power(&xi, l).unwrap();
            assert!(out.has_tag(ClassTag::t(3 - l as usize, 1)), "l={l}");
        }
    }

    #[test]
    fn kernel_collapse_examples() {
        let alpha = tent();
        let k = kernel_make(&alpha, 2, 1).unwrap();
        // (0.3, 0.6) -> tent(0.6) = 0.4.
        assert!((k.eval(0.3, 0.6) - 0.4).abs() < 1e-9);
        // t = 0 reduces to alpha(s).
        for &s in &[0.2, 0.5, 0.9] {
            assert!((k.eval(s, 0.0) - alpha.eval(s)).abs() < 1e-9);
        }
        // k = n applies no transform at all.
        let kn = kernel_make(&alpha, 2, 2).unwrap();
        assert_eq!(kn.eval(0.3, 0.6), alpha.eval(0.6));
    }

    #[test]
    fn r_partial_reduces_to_r_apply() {
        let xi = tent();
        let xi2 = xi.clone();
        let gamma = BivariateDensity::new(move |s, _| xi2.eval(s), 1.0, xi.knots(), false);
        let tr = r_partial(&gamma, 1, 1).unwrap();
        let direct = r_apply(&xi);
        for &s in &[0.25, 0.5, 0.75] {
            for &t in &[0.1, 0.9] {
                assert!((tr.eval(s, t) - direct.eval(s)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn r_partial_on_max_composite() {
        // gamma(s,t) = g(max(s,t)) with g = R^{-1}(tent): the partial
        // transform along axis 1 recovers tent(max(s,t)).
        let alpha = tent();
        let g = r_power(&alpha, -1).unwrap();
        let gamma = BivariateDensity::of_max(&g);
        let tr = r_partial(&gamma, 1, 1).unwrap();
        assert!((tr.eval(0.3, 0.6) - 0.4).abs() < 1e-8);
        // At t = 0 the max collapses to the plain 1-D transform.
        let direct = r_apply(&g);
        for &s in &[0.3, 0.7] {
            assert!((tr.eval(s, 0.0) - direct.eval(s)).abs() < 1e-8);
        }
    }

    #[test]
    fn kernel_slice_transform() {
        // R^{-1} applied to the slice K(., t) evaluates like g(max(., t)).
        let alpha = tent();
        let kernel = kernel_make(&alpha, 2, 1).unwrap();
        let slice = kernel.slice_at(0.6);
        let inv = r_power(&slice, -1).unwrap();
        let g = kernel.inner();
        for &s in &[0.2f64, 0.5, 0.8] {
            let expect = g.eval(s.max(0.6));
            assert!(
                (inv.eval(s) - expect).abs() < 1e-7,
                "s={s}: {} vs {expect}",
                inv.eval(s)
            );
        }
    }
}
