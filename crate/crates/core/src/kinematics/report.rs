//! Per-identity verification records.

use serde::Serialize;

/// One verified identity: both sides, errors, sampling metadata, verdict.
/// `pass` holds iff the relative error meets the declared tolerance or, for
/// near-zero identities, the absolute error stays under the absolute floor.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub identity: String,
    pub n: usize,
    pub j: usize,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub abs_err: f64,
    pub rel_err: f64,
    pub monte_carlo_stderr: f64,
    pub samples: usize,
    pub seed: u64,
    pub pass: bool,
    pub notes: String,
}

impl VerificationReport {
    /// Compares lhs against rhs componentwise (Euclidean norms).
    #[allow(clippy::too_many_arguments)]
    pub fn compare(
        identity: impl Into<String>,
        n: usize,
        j: usize,
        lhs: &[f64],
        rhs: &[f64],
        rel_tol: f64,
        abs_floor: f64,
        stderr: f64,
        samples: usize,
        seed: u64,
        notes: impl Into<String>,
    ) -> Self {
        let abs_err = lhs
            .iter()
            .zip(rhs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let scale = lhs
            .iter()
            .chain(rhs)
            .map(|v| v.abs())
            .fold(0.0f64, f64::max);
        let rel_err = if scale > 0.0 { abs_err / scale } else { 0.0 };
        let pass = rel_err <= rel_tol || abs_err <= abs_floor;
        VerificationReport {
            identity: identity.into(),
            n,
            j,
            lhs: lhs.to_vec(),
            rhs: rhs.to_vec(),
            abs_err,
            rel_err,
            monte_carlo_stderr: stderr,
            samples,
            seed,
            pass,
            notes: notes.into(),
        }
    }

    /// A near-zero identity: the rhs is the zero vector and only the
    /// absolute floor applies.
    pub fn near_zero(
        identity: impl Into<String>,
        n: usize,
        j: usize,
        value: &[f64],
        tolerance: f64,
        error_estimate: f64,
    ) -> Self {
        let zeros = vec![0.0; value.len()];
        let mut r = VerificationReport::compare(
            identity,
            n,
            j,
            value,
            &zeros,
            0.0,
            tolerance,
            error_estimate,
            0,
            0,
            "near-zero identity; absolute floor only",
        );
        r.rel_err = 0.0;
        r
    }
}
