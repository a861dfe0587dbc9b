//! Ring Green's function at real regular spectral points, computed two
//! independent ways: direct ODE matching through transfer matrices, and the
//! regularized eigenfunction series about a reference point.

use nalgebra::{DMatrix, Vector2};
use std::f64::consts::PI;

use crate::domain::{piecewise_ring_eigendata, EigenData, RingDomain};
use crate::error::{Result, RingError};

/// Near-pole refusal threshold for regular-point evaluations.
pub const NEAR_POLE_TOL: f64 = 1e-8;

/// Default reference point of the regularized series.
pub const DEFAULT_REF_LAMBDA: f64 = -1.0;

/// A single Green's function value G_lambda(s, t) on the ring.
#[derive(Clone, Copy, Debug)]
pub struct GreenValue {
    pub lambda: f64,
    pub s: f64,
    pub t: f64,
    pub value: f64,
}

/// Solves -G'' + q G - lambda G = delta_t on the ring: continuity at t and
/// derivative jump G'(t+) - G'(t-) = -1. No pole-distance check.
pub(crate) fn green_unchecked(domain: &RingDomain, lambda: f64, s: f64, t: f64) -> f64 {
    let l = domain.circumference();
    let mt = domain.arc_transfer(lambda, t, l);
    // (Mt - I) v = (0, 1)^T; det(Mt - I) = 2 - tr since det Mt = 1.
    let det = 2.0 - mt.trace();
    let v = Vector2::new(-mt[(0, 1)], mt[(0, 0)] - 1.0) / det;
    let dist = (s - t).rem_euclid(l);
    (domain.arc_transfer(lambda, t, dist) * v)[0]
}

fn check_regular(spectrum: &[f64], lambda: f64) -> Result<()> {
    for &ev in spectrum {
        if (ev - lambda).abs() <= NEAR_POLE_TOL {
            return Err(RingError::NearPole {
                lambda,
                eigenvalue: ev,
                dist: (ev - lambda).abs(),
            });
        }
    }
    Ok(())
}

/// Spectrum used for the pole-distance check of a regular-point evaluation
/// at `lambda`: everything up to lambda + 1 (at least the ground state).
pub(crate) fn guard_spectrum(domain: &RingDomain, lambda: f64) -> Result<Vec<f64>> {
    let cap = (lambda + 1.0).max(domain.q_mean() + 1.0);
    Ok(piecewise_ring_eigendata(domain, cap)?
        .eigenvalues()
        .to_vec())
}

/// Direct Green's function evaluation at a regular point.
pub fn green_direct(domain: &RingDomain, lambda: f64, s: f64, t: f64) -> Result<GreenValue> {
    let spectrum = guard_spectrum(domain, lambda)?;
    green_direct_with_spectrum(domain, &spectrum, lambda, s, t)
}

/// Same as [`green_direct`] with a caller-supplied spectrum for the
/// pole-distance check (must cover eigenvalues up to lambda).
pub fn green_direct_with_spectrum(
    domain: &RingDomain,
    spectrum: &[f64],
    lambda: f64,
    s: f64,
    t: f64,
) -> Result<GreenValue> {
    check_regular(spectrum, lambda)?;
    Ok(GreenValue {
        lambda,
        s,
        t,
        value: green_unchecked(domain, lambda, s, t),
    })
}

/// Series evaluation result: the value plus the certified truncation tail.
#[derive(Clone, Copy, Debug)]
pub struct SeriesGreen {
    pub value: GreenValue,
    pub tail_bound: f64,
}

/// Regularized spectral series for Green's values at the attachment points:
/// G_lambda = G_ref + (lambda - ref) * sum_l phi_l(a_s) phi_l(a_t) /
/// ((lambda_l - ref)(lambda_l - lambda)), with a certified tail bound from
/// the lambda_l >= q_min + (pi l / L)^2 comparison.
pub struct SpectralGreen {
    eigendata: EigenData,
    ref_lambda: f64,
    ref_values: DMatrix<f64>,
    circumference: f64,
    q_min: f64,
    attachments: Vec<f64>,
}

impl SpectralGreen {
    pub fn new(domain: &RingDomain, eigendata: EigenData) -> Result<Self> {
        Self::with_reference(domain, eigendata, DEFAULT_REF_LAMBDA)
    }

    /// Build with an explicit reference point; it must be a regular point of
    /// the ring operator.
    pub fn with_reference(
        domain: &RingDomain,
        eigendata: EigenData,
        ref_lambda: f64,
    ) -> Result<Self> {
        check_regular(eigendata.eigenvalues(), ref_lambda)?;
        if ref_lambda >= eigendata.lambda_cap() {
            return Err(RingError::InvalidArgument(format!(
                "reference point {ref_lambda} not covered by the eigendata (cap {})",
                eigendata.lambda_cap()
            )));
        }
        let n = domain.n_leads();
        let atts = domain.attachments().to_vec();
        let ref_values = DMatrix::from_fn(n, n, |i, j| {
            green_unchecked(domain, ref_lambda, atts[i], atts[j])
        });
        Ok(Self {
            eigendata,
            ref_lambda,
            ref_values,
            circumference: domain.circumference(),
            q_min: domain.q_min(),
            attachments: atts,
        })
    }

    pub fn eigendata(&self) -> &EigenData {
        &self.eigendata
    }

    pub fn ref_lambda(&self) -> f64 {
        self.ref_lambda
    }

    pub fn ref_values(&self) -> &DMatrix<f64> {
        &self.ref_values
    }

    /// Certified bound on the dropped series tail at `lambda`, using the
    /// comparison lambda_l >= q_min + (pi l / L)^2 and |phi phi| <= 4/L.
    pub fn tail_bound(&self, lambda: f64) -> f64 {
        let m = self.eigendata.truncation_count();
        let l = self.circumference;
        let b = (PI / l).powi(2);
        let t_of = |idx: usize| self.q_min + b * (idx as f64).powi(2);
        let pref = (lambda - self.ref_lambda).abs() * 4.0 / l;
        // Explicit terms until both denominators are dominated by b*l^2.
        let thresh = 2.0 * (lambda.abs() + self.ref_lambda.abs() + self.q_min.abs()) + 4.0;
        let m2 = {
            let need = ((thresh - self.q_min).max(1.0) / b).sqrt().ceil() as usize + 1;
            (m + 1).max(need)
        };
        let mut tail = 0.0;
        for idx in m..m2 {
            let t = t_of(idx);
            let d1 = t - self.ref_lambda;
            let d2 = t - lambda;
            if d1 <= 0.0 || d2 <= 0.0 {
                return f64::INFINITY;
            }
            tail += pref / (d1 * d2);
        }
        // For idx >= m2 both factors exceed t/2, so each term is below
        // pref * 4 / (b idx^2)^2; integrate the bound.
        tail += pref * 4.0 / (b * b) / (3.0 * ((m2 - 1) as f64).powi(3));
        tail
    }

    /// Evaluate the series at attachment indices (s_idx, t_idx). Errors if
    /// the certified tail exceeds `tol`.
    pub fn evaluate(&self, lambda: f64, s_idx: usize, t_idx: usize, tol: f64) -> Result<SeriesGreen> {
        let n = self.attachments.len();
        if s_idx >= n || t_idx >= n {
            return Err(RingError::InvalidArgument(format!(
                "attachment index out of range ({s_idx}, {t_idx}) for N = {n}"
            )));
        }
        check_regular(self.eigendata.eigenvalues(), lambda)?;
        if lambda >= self.eigendata.lambda_cap() {
            return Err(RingError::InvalidArgument(format!(
                "lambda = {lambda} not covered by the eigendata (cap {})",
                self.eigendata.lambda_cap()
            )));
        }
        let tail = self.tail_bound(lambda);
        if !(tail <= tol) {
            return Err(RingError::Truncation {
                modes: self.eigendata.truncation_count(),
                tail,
                requested: tol,
            });
        }
        let mut sum = 0.0;
        let vals = self.eigendata.values();
        for (l, &ev) in self.eigendata.eigenvalues().iter().enumerate() {
            sum += vals[(l, s_idx)] * vals[(l, t_idx)]
                / ((ev - self.ref_lambda) * (ev - lambda));
        }
        let value = self.ref_values[(s_idx, t_idx)] + (lambda - self.ref_lambda) * sum;
        Ok(SeriesGreen {
            value: GreenValue {
                lambda,
                s: self.attachments[s_idx],
                t: self.attachments[t_idx],
                value,
            },
            tail_bound: tail,
        })
    }
}
