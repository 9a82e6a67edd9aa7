//! The prox-based Steiner oracle: brute-force Hessian-measure values that
//! are independent of every density formula in the crate.
//!
//! A point z lies in the parallel set {x + s y : x in B, y in subdiff f(x)}
//! exactly when prox(f, s, z) lands in B, so the parallel-set volume is a
//! Monte Carlo membership count over a bounding box, and the coefficients of
//! its degree-n polynomial in s are the Hessian measures Phi^n_j(f, B).
//! Weighted integrals come from partitioning the region into cells, fitting
//! each cell, and summing cell representatives.

use super::profiles::C2Field;
use super::{MeasureQuery, Method, Region, Value, Weight, WeightedIntegral};
use crate::convexfn::ProxFunction;
use crate::numerics::{steiner_fit, stream, Point};
use crate::transforms::RadialDensity;
use crate::{Error, Result};
use rand::Rng;
use rayon::prelude::*;

/// Sampling configuration for the oracle.
#[derive(Clone, Debug)]
pub struct OracleSettings {
    /// Steiner nodes; s = 0 contributes an exact anchor (prox is the
    /// identity there).
    pub steiner_nodes: Vec<f64>,
    /// Total Monte Carlo points (shared across nodes: the same z-sample is
    /// inverted at every node so the fitted polynomial sees common noise).
    pub samples: usize,
    /// Independent batches for the standard-error estimate.
    pub batches: usize,
    pub seed: u64,
    pub stream_offset: u64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            steiner_nodes: (0..=10).map(|i| i as f64 / 10.0).collect(),
            samples: 400_000,
            batches: 8,
            seed: 0,
            stream_offset: 0,
        }
    }
}

impl OracleSettings {
    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }
    pub fn with_seed(mut self, seed: u64, stream_offset: u64) -> Self {
        self.seed = seed;
        self.stream_offset = stream_offset;
        self
    }
}

/// Regions the oracle can test membership against.
#[derive(Clone, Debug)]
pub enum OracleRegion {
    Ball { radius: f64 },
    Rect { lo: Point, hi: Point },
}

impl OracleRegion {
    fn contains(&self, x: &Point) -> bool {
        match self {
            OracleRegion::Ball { radius } => x.norm() <= *radius,
            OracleRegion::Rect { lo, hi } => (0..x.dim())
                .all(|i| x.get(i) >= lo.get(i) && x.get(i) <= hi.get(i)),
        }
    }

    /// Axis-aligned bounds of the parallel set for step sizes up to s_max.
    fn sample_box(&self, f: &dyn ProxFunction, s_max: f64) -> (Point, Point) {
        match self {
            OracleRegion::Ball { radius } => {
                let w = radius + s_max * f.max_subgradient_norm(*radius);
                let n = f.dim();
                let mut lo = Point::zero(n);
                let mut hi = Point::zero(n);
                for i in 0..n {
                    lo.set(i, -w);
                    hi.set(i, w);
                }
                (lo, hi)
            }
            OracleRegion::Rect { lo, hi } => {
                let circum = lo.norm().max(hi.norm());
                let pad = s_max * f.max_subgradient_norm(circum);
                let mut l = *lo;
                let mut h = *hi;
                for i in 0..lo.dim() {
                    l.set(i, l.get(i) - pad);
                    h.set(i, h.get(i) + pad);
                }
                (l, h)
            }
        }
    }
}

fn box_volume(lo: &Point, hi: &Point) -> f64 {
    (0..lo.dim()).map(|i| hi.get(i) - lo.get(i)).product()
}

fn sample_in_box<R: Rng>(rng: &mut R, lo: &Point, hi: &Point) -> Point {
    let mut z = Point::zero(lo.dim());
    for i in 0..lo.dim() {
        z.set(i, rng.gen_range(lo.get(i)..hi.get(i)));
    }
    z
}

fn prox_at(f: &dyn ProxFunction, s: f64, z: &Point) -> Result<Point> {
    if s <= 0.0 {
        Ok(*z)
    } else {
        f.prox_point(s, z)
    }
}

/// Phi^n_j(f, region) by the Monte Carlo parallel-volume fit. Returns the
/// estimate and a standard error over batches.
pub fn phi_region_oracle(
    f: &dyn ProxFunction,
    j: usize,
    region: &OracleRegion,
    settings: &OracleSettings,
) -> Result<(f64, f64)> {
    let n = f.dim();
    if j > n {
        return Err(Error::IndexOutOfRange { j, n });
    }
    let nodes = &settings.steiner_nodes;
    let s_max = nodes.iter().cloned().fold(0.0, f64::max);
    let (lo, hi) = region.sample_box(f, s_max);
    let vol = box_volume(&lo, &hi);
    let per_batch = (settings.samples / settings.batches).max(1);

    let batch_values: Result<Vec<f64>> = (0..settings.batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(settings.seed, settings.stream_offset + b as u64);
            let mut counts = vec![0usize; nodes.len()];
            for _ in 0..per_batch {
                let z = sample_in_box(&mut rng, &lo, &hi);
                for (i, &s) in nodes.iter().enumerate() {
                    let x = prox_at(f, s, &z)?;
                    if region.contains(&x) {
                        counts[i] += 1;
                    }
                }
            }
            let samples: Vec<(f64, f64)> = nodes
                .iter()
                .zip(&counts)
                .map(|(&s, &c)| (s, c as f64 / per_batch as f64 * vol))
                .collect();
            let coeffs = steiner_fit(&samples, n)?;
            Ok(coeffs[j])
        })
        .collect();
    let batch_values = batch_values?;
    Ok(mean_and_stderr(&batch_values))
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Cell layout for the weighted oracle.
#[derive(Clone, Debug)]
pub struct CellPartition {
    /// Radial shells between 0 and the region radius.
    pub radial_cells: usize,
    /// Angular sectors (n = 2) or polar bands in x_n/|x| (n = 3); ignored
    /// for scalar weights. 24 sectors keep each cell within 15 degrees.
    pub angular_cells: usize,
    /// Refine (doubling the partition) until the estimate moves less than
    /// this relative amount; 0 disables refinement.
    pub refine_rel: f64,
}

impl Default for CellPartition {
    fn default() -> Self {
        CellPartition {
            radial_cells: 24,
            angular_cells: 24,
            refine_rel: 0.01,
        }
    }
}

struct Cells {
    n: usize,
    radial_edges: Vec<f64>,
    angular_cells: usize,
    vector: bool,
}

impl Cells {
    fn build(
        n: usize,
        region_radius: f64,
        split_radii: &[f64],
        radial_cells: usize,
        angular_cells: usize,
        vector: bool,
    ) -> Cells {
        let mut edges: Vec<f64> = (0..=radial_cells)
            .map(|i| region_radius * i as f64 / radial_cells as f64)
            .collect();
        for &r in split_radii {
            if r > 0.0 && r < region_radius {
                edges.push(r);
            }
        }
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * region_radius);
        Cells {
            n,
            radial_edges: edges,
            angular_cells: if vector { angular_cells } else { 1 },
            vector,
        }
    }

    fn count(&self) -> usize {
        (self.radial_edges.len() - 1) * self.angular_cells
    }

    fn locate(&self, x: &Point) -> Option<usize> {
        let r = x.norm();
        let edges = &self.radial_edges;
        if r > *edges.last().unwrap() {
            return None;
        }
        let ri = edges.partition_point(|&e| e < r).saturating_sub(1);
        let ri = ri.min(edges.len() - 2);
        let ai = if self.angular_cells == 1 {
            0
        } else if self.n == 2 {
            let th = x.get(1).atan2(x.get(0)).rem_euclid(2.0 * std::f64::consts::PI);
            ((th / (2.0 * std::f64::consts::PI) * self.angular_cells as f64) as usize)
                .min(self.angular_cells - 1)
        } else {
            // Polar bands in u = x_n / |x|.
            let u = if r == 0.0 { 0.0 } else { x.last() / r };
            (((u + 1.0) / 2.0 * self.angular_cells as f64) as usize).min(self.angular_cells - 1)
        };
        Some(ri * self.angular_cells + ai)
    }

    /// Representative weight of the cell: xi at the area-centroid radius,
    /// times the exact cell centroid for vector weights.
    fn weights(&self, density: &RadialDensity) -> Vec<Vec<f64>> {
        let n = self.n;
        let mut out = Vec::with_capacity(self.count());
        for ri in 0..self.radial_edges.len() - 1 {
            let (r0, r1) = (self.radial_edges[ri], self.radial_edges[ri + 1]);
            // Radius centroid with respect to r^{n-1} dr.
            let p = n as f64;
            let rbar = (p / (p + 1.0)) * (r1.powf(p + 1.0) - r0.powf(p + 1.0))
                / (r1.powf(p) - r0.powf(p)).max(1e-300);
            let xi = density.eval(rbar);
            for ai in 0..self.angular_cells {
                if !self.vector {
                    out.push(vec![xi]);
                    continue;
                }
                let mut w = vec![0.0; n];
                if n == 2 {
                    let th0 = 2.0 * std::f64::consts::PI * ai as f64 / self.angular_cells as f64;
                    let th1 =
                        2.0 * std::f64::consts::PI * (ai + 1) as f64 / self.angular_cells as f64;
                    // Exact centroid of the annular sector.
                    let rc = (2.0 / 3.0) * (r1.powi(3) - r0.powi(3))
                        / (r1.powi(2) - r0.powi(2)).max(1e-300);
                    let dth = th1 - th0;
                    w[0] = xi * rc * (th1.sin() - th0.sin()) / dth;
                    w[1] = xi * rc * (-(th1.cos() - th0.cos())) / dth;
                } else {
                    let u0 = -1.0 + 2.0 * ai as f64 / self.angular_cells as f64;
                    let u1 = -1.0 + 2.0 * (ai + 1) as f64 / self.angular_cells as f64;
                    // Only the axial moment survives the azimuthal average.
                    let rc = 0.75 * (r1.powi(4) - r0.powi(4))
                        / (r1.powi(3) - r0.powi(3)).max(1e-300);
                    w[n - 1] = xi * rc * 0.5 * (u0 + u1);
                }
                out.push(w);
            }
        }
        out
    }
}

/// Weighted Hessian-measure integral by the cell-partitioned oracle:
/// Phi_j per cell via the Steiner fit, summed against the representative
/// weight, refined until stable.
pub fn phi_weighted_oracle(
    q: &MeasureQuery,
    settings: &OracleSettings,
    partition: &CellPartition,
) -> Result<WeightedIntegral> {
    phi_weighted_oracle_with(
        &q.function,
        q.j,
        &q.density,
        q.weight,
        q.region.radius(&q.density),
        &q.function.singular_radii(),
        settings,
        partition,
    )
}

/// Trait-object variant for rotated functions and test doubles.
#[allow(clippy::too_many_arguments)]
pub fn phi_weighted_oracle_with(
    f: &dyn ProxFunction,
    j: usize,
    density: &RadialDensity,
    weight: Weight,
    region_radius: f64,
    split_radii: &[f64],
    settings: &OracleSettings,
    partition: &CellPartition,
) -> Result<WeightedIntegral> {
    let n = f.dim();
    if j > n {
        return Err(Error::IndexOutOfRange { j, n });
    }
    let vector = weight == Weight::Vector;
    let mut splits = split_radii.to_vec();
    splits.extend(density.knots());

    let mut part = partition.clone();
    let (mut value, mut stderr) = weighted_pass(
        f,
        j,
        density,
        vector,
        region_radius,
        &splits,
        settings,
        &part,
    )?;
    let mut refine_err = 0.0;
    if partition.refine_rel > 0.0 {
        for _ in 0..2 {
            part.radial_cells *= 2;
            if vector {
                part.angular_cells = (part.angular_cells * 2).min(96);
            }
            let (next, next_se) = weighted_pass(
                f,
                j,
                density,
                vector,
                region_radius,
                &splits,
                settings,
                &part,
            )?;
            let change = value
                .iter()
                .zip(&next)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            let scale = next.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
            refine_err = change;
            value = next;
            stderr = next_se;
            if change <= partition.refine_rel * scale.max(1e-9) {
                break;
            }
        }
    }
    Ok(WeightedIntegral::new(
        Value::from_components(&value, vector),
        Method::ProxSteiner,
        stderr.hypot(refine_err),
    ))
}

#[allow(clippy::too_many_arguments)]
fn weighted_pass(
    f: &dyn ProxFunction,
    j: usize,
    density: &RadialDensity,
    vector: bool,
    region_radius: f64,
    splits: &[f64],
    settings: &OracleSettings,
    part: &CellPartition,
) -> Result<(Vec<f64>, f64)> {
    let n = f.dim();
    let cells = Cells::build(
        n,
        region_radius,
        splits,
        part.radial_cells,
        part.angular_cells,
        vector,
    );
    let weights = cells.weights(density);
    let nodes = &settings.steiner_nodes;
    let s_max = nodes.iter().cloned().fold(0.0, f64::max);
    let region = OracleRegion::Ball {
        radius: region_radius,
    };
    let (lo, hi) = region.sample_box(f, s_max);
    let vol = box_volume(&lo, &hi);
    let per_batch = (settings.samples / settings.batches).max(1);
    let dim_out = if vector { n } else { 1 };

    let batch_values: Result<Vec<Vec<f64>>> = (0..settings.batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(settings.seed, settings.stream_offset + b as u64);
            let mut counts = vec![0u32; cells.count() * nodes.len()];
            for _ in 0..per_batch {
                let z = sample_in_box(&mut rng, &lo, &hi);
                for (i, &s) in nodes.iter().enumerate() {
                    let x = prox_at(f, s, &z)?;
                    if let Some(c) = cells.locate(&x) {
                        counts[c * nodes.len() + i] += 1;
                    }
                }
            }
            // Per-cell Steiner fit, then the weighted sum of coefficients.
            let mut acc = vec![0.0; dim_out];
            let mut samples: Vec<(f64, f64)> = nodes.iter().map(|&s| (s, 0.0)).collect();
            for (c, w) in weights.iter().enumerate() {
                if w.iter().all(|v| *v == 0.0) {
                    continue;
                }
                let base = c * nodes.len();
                let mut any = false;
                for (i, slot) in samples.iter_mut().enumerate() {
                    let v = counts[base + i] as f64 / per_batch as f64 * vol;
                    slot.1 = v;
                    any |= v != 0.0;
                }
                if !any {
                    continue;
                }
                let coeffs = steiner_fit(&samples, n)?;
                for (d, wd) in w.iter().enumerate() {
                    acc[d] += wd * coeffs[j];
                }
            }
            Ok(acc)
        })
        .collect();
    let batch_values = batch_values?;

    let mut value = vec![0.0; dim_out];
    let mut var = 0.0f64;
    for d in 0..dim_out {
        let comp: Vec<f64> = batch_values.iter().map(|b| b[d]).collect();
        let (m, se) = mean_and_stderr(&comp);
        value[d] = m;
        var += se * se;
    }
    Ok((value, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convexfn::ConvexFunction;
    use std::f64::consts::PI;

    fn fast_settings(samples: usize) -> OracleSettings {
        OracleSettings {
            samples,
            batches: 5,
            seed: 42,
            ..OracleSettings::default()
        }
    }

    #[test]
    fn quadratic_region_oracle() {
        // f = |x|^2/2, B = unit disk: parallel volume pi (1+s)^2, so
        // Phi_1 = 2 pi within a couple of percent.
        let f = ConvexFunction::quadratic(Point::zero(2), 0.5).unwrap();
        let region = OracleRegion::Ball { radius: 1.0 };
        let (v, se) = phi_region_oracle(&f, 1, &region, &fast_settings(200_000)).unwrap();
        assert!(
            (v - 2.0 * PI).abs() < 0.02 * 2.0 * PI,
            "Phi_1 = {v} (se {se})"
        );
        let (v, _) = phi_region_oracle(&f, 2, &region, &fast_settings(200_000)).unwrap();
        assert!((v - PI).abs() < 0.03 * PI, "Phi_2 = {v}");
    }

    #[test]
    fn cone_region_oracle() {
        // v_1 over the disk of radius 2: Phi_1 = 4 pi (singular circle mass
        // 2 pi plus annulus mass 2 pi), Phi_2 = pi.
        let f = ConvexFunction::cone(2, 1.0).unwrap();
        let region = OracleRegion::Ball { radius: 2.0 };
        let (v, se) = phi_region_oracle(&f, 1, &region, &fast_settings(300_000)).unwrap();
        assert!(
            (v - 4.0 * PI).abs() < 0.02 * 4.0 * PI,
            "Phi_1 = {v} (se {se})"
        );
        let (v, _) = phi_region_oracle(&f, 2, &region, &fast_settings(300_000)).unwrap();
        assert!((v - PI).abs() < 0.03 * PI, "Phi_2 = {v}");
    }

    #[test]
    fn rectangle_region_via_separable_function() {
        // f(x) = g(x_1) with g piecewise linear: Phi^2_1(f, [a,b] x [c,d])
        // = Phi^(1)_1(g, [a,b]) (d - c). With g = max(0, |x_1| - 1) and the
        // rectangle [-2,2] x [0,1]: the 1-D measure of g on [-2,2] is
        // 2 (two kinks) + AC 0 => wait, the 1-D Phi_1 of g over [-2,2] is
        // the subdifferential spread: 2 kinks each of mass 1 => 2; times
        // height 1 gives 2.
        struct Separable;
        impl ProxFunction for Separable {
            fn dim(&self) -> usize {
                2
            }
            fn eval_at(&self, x: &Point) -> f64 {
                (x.get(0).abs() - 1.0).max(0.0)
            }
            fn prox_point(&self, step: f64, z: &Point) -> crate::Result<Point> {
                // 1-D prox of max(0, |u| - 1) acts on x_1 only.
                let u = z.get(0);
                let sign = if u < 0.0 { -1.0 } else { 1.0 };
                let a = u.abs();
                let r = if a <= 1.0 {
                    a
                } else if a <= 1.0 + step {
                    1.0
                } else {
                    a - step
                };
                Ok(Point::new(&[sign * r, z.get(1)]))
            }
            fn max_subgradient_norm(&self, _radius: f64) -> f64 {
                1.0
            }
        }
        let region = OracleRegion::Rect {
            lo: Point::new(&[-2.0, 0.0]),
            hi: Point::new(&[2.0, 1.0]),
        };
        let (v, se) = phi_region_oracle(&Separable, 1, &region, &fast_settings(300_000)).unwrap();
        assert!((v - 2.0).abs() < 0.08, "Phi_1 = {v} (se {se})");
    }

    #[test]
    fn weighted_oracle_on_cone_matches_closed_form() {
        // int xi dPhi^2_1(v_1) with xi = tent at 1.5 equals 1.25 pi.
        let f = ConvexFunction::cone(2, 1.0).unwrap();
        let xi = RadialDensity::tent(1.5);
        let q = MeasureQuery::new(f, 1, xi, Weight::Scalar, Region::DensitySupport).unwrap();
        let out = phi_weighted_oracle(
            &q,
            &fast_settings(400_000),
            &CellPartition {
                radial_cells: 24,
                angular_cells: 1,
                refine_rel: 0.01,
            },
        )
        .unwrap();
        let expect = 1.25 * PI;
        assert!(
            (out.value.scalar() - expect).abs() < 0.03 * expect,
            "{:?} vs {expect}",
            out.value
        );
    }

    #[test]
    fn weighted_oracle_vector_on_halfcone() {
        // t*_{1,xi}(w_1) = 2 xi(1) e_2 = (0, 2) for xi = tent at 2.
        let f = ConvexFunction::half_cone(2, 1.0).unwrap();
        let xi = RadialDensity::tent(2.0);
        let q = MeasureQuery::new(f, 1, xi, Weight::Vector, Region::DensitySupport).unwrap();
        let out = phi_weighted_oracle(&q, &fast_settings(1_500_000), &CellPartition::default())
            .unwrap();
        let v = out.value.vector();
        assert!((v.get(1) - 2.0).abs() < 0.06, "{v:?}");
        assert!(v.get(0).abs() < 0.03, "{v:?}");
    }
}
