//! Compact ring domain with a piecewise-constant potential: geometry,
//! transfer matrices and the periodic eigenproblem.

use nalgebra::{DMatrix, Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Result, RingError};

/// One constant-potential segment `[start, end)` of the ring.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub q: f64,
}

impl Segment {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.len() <= 0.0
    }
}

/// A ring of circumference `L` carrying a piecewise-constant potential, with
/// `N` lead attachment points at arc coordinates in `[0, L)`.
#[derive(Clone, Debug)]
pub struct RingDomain {
    circumference: f64,
    segments: Vec<Segment>,
    attachments: Vec<f64>,
}

impl RingDomain {
    pub fn new(
        circumference: f64,
        segments: Vec<Segment>,
        attachments: Vec<f64>,
    ) -> Result<Self> {
        if !(circumference.is_finite() && circumference > 0.0) {
            return Err(RingError::InvalidArgument(format!(
                "circumference must be positive, got {circumference}"
            )));
        }
        if segments.is_empty() {
            return Err(RingError::InvalidArgument("no segments given".into()));
        }
        let tol = 1e-12 * circumference;
        let mut segs = segments;
        // Segments must partition [0, L) with matching endpoints.
        if segs[0].start.abs() > tol {
            return Err(RingError::InvalidArgument(format!(
                "first segment must start at 0, got {}",
                segs[0].start
            )));
        }
        segs[0].start = 0.0;
        for i in 0..segs.len() {
            if segs[i].end < segs[i].start - tol {
                return Err(RingError::InvalidArgument(format!(
                    "segment {i} has negative length"
                )));
            }
            if i + 1 < segs.len() {
                if (segs[i].end - segs[i + 1].start).abs() > tol {
                    return Err(RingError::InvalidArgument(format!(
                        "gap or overlap between segments {i} and {}",
                        i + 1
                    )));
                }
                let mid = segs[i].end;
                segs[i + 1].start = mid;
            }
        }
        let last = segs.len() - 1;
        if (segs[last].end - circumference).abs() > tol {
            return Err(RingError::InvalidArgument(format!(
                "segments end at {} but circumference is {circumference}",
                segs[last].end
            )));
        }
        segs[last].end = circumference;

        if attachments.is_empty() {
            return Err(RingError::InvalidArgument(
                "at least one attachment point is required".into(),
            ));
        }
        let mut atts = attachments;
        for a in atts.iter_mut() {
            if !a.is_finite() || *a < -tol || *a >= circumference + tol {
                return Err(RingError::InvalidArgument(format!(
                    "attachment point {a} outside [0, L)"
                )));
            }
            // Snap onto segment boundaries within tolerance.
            for seg in &segs {
                if (*a - seg.start).abs() <= tol {
                    *a = seg.start;
                }
            }
            if (*a - circumference).abs() <= tol {
                *a = 0.0;
            }
            if *a < 0.0 {
                *a = 0.0;
            }
        }
        for i in 0..atts.len() {
            for j in (i + 1)..atts.len() {
                if (atts[i] - atts[j]).abs() <= tol {
                    return Err(RingError::InvalidArgument(format!(
                        "attachment points {} and {} coincide",
                        atts[i], atts[j]
                    )));
                }
            }
        }
        Ok(Self {
            circumference,
            segments: segs,
            attachments: atts,
        })
    }

    /// Ring with a single uniform potential segment.
    pub fn uniform(circumference: f64, q: f64, attachments: Vec<f64>) -> Result<Self> {
        Self::new(
            circumference,
            vec![Segment {
                start: 0.0,
                end: circumference,
                q,
            }],
            attachments,
        )
    }

    pub fn circumference(&self) -> f64 {
        self.circumference
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn attachments(&self) -> &[f64] {
        &self.attachments
    }

    pub fn n_leads(&self) -> usize {
        self.attachments.len()
    }

    pub fn q_min(&self) -> f64 {
        self.segments
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| s.q)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn q_max(&self) -> f64 {
        self.segments
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| s.q)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Length-weighted mean potential; the constant test function bounds the
    /// ground state from above by this value.
    pub fn q_mean(&self) -> f64 {
        let total: f64 = self.segments.iter().map(|s| s.len() * s.q).sum();
        total / self.circumference
    }

    fn segment_index_at(&self, x: f64) -> usize {
        // x in [0, L); last segment wins ties at boundaries.
        let mut idx = 0;
        for (i, seg) in self.segments.iter().enumerate() {
            if x >= seg.start {
                idx = i;
            }
        }
        idx
    }

    /// Transfer matrix over the arc of length `dist` starting at arc
    /// coordinate `from` and running in the positive direction (wrapping).
    pub(crate) fn arc_transfer(&self, lambda: f64, from: f64, dist: f64) -> Matrix2<f64> {
        let l = self.circumference;
        let x0 = from.rem_euclid(l);
        let mut idx = self.segment_index_at(x0);
        let mut offset = x0 - self.segments[idx].start;
        let mut remaining = dist;
        let mut acc = Matrix2::identity();
        let eps = 1e-15 * l.max(dist);
        while remaining > eps {
            let seg = &self.segments[idx];
            let avail = seg.len() - offset;
            let step = avail.min(remaining);
            if step > 0.0 {
                let m = lambda - seg.q;
                let (c, s) = fundamental_cs(m, step);
                let t = Matrix2::new(c, s, -m * s, c);
                acc = t * acc;
                remaining -= step;
            }
            idx = (idx + 1) % self.segments.len();
            offset = 0.0;
        }
        acc
    }

    /// Monodromy matrix of the periodic problem, based at arc coordinate 0.
    pub(crate) fn monodromy(&self, lambda: f64) -> Matrix2<f64> {
        self.arc_transfer(lambda, 0.0, self.circumference)
    }

    /// L2 inner product over the ring of the two solutions of
    /// -u'' + q u = lambda u with initial data `va`, `vb` at arc coordinate 0,
    /// computed from closed-form per-segment antiderivatives.
    pub(crate) fn ring_inner(&self, lambda: f64, va: Vector2<f64>, vb: Vector2<f64>) -> f64 {
        let mut sa = va;
        let mut sb = vb;
        let mut total = 0.0;
        for seg in &self.segments {
            let len = seg.len();
            if len > 0.0 {
                let m = lambda - seg.q;
                let (icc, ics, iss) = basis_integrals(m, len);
                total += sa[0] * sb[0] * icc
                    + (sa[0] * sb[1] + sa[1] * sb[0]) * ics
                    + sa[1] * sb[1] * iss;
                let (c, s) = fundamental_cs(m, len);
                let t = Matrix2::new(c, s, -m * s, c);
                sa = t * sa;
                sb = t * sb;
            }
        }
        total
    }

    /// Value and derivative at arc coordinate `x` of the solution with initial
    /// data `v` at 0.
    pub(crate) fn evaluate_solution(&self, lambda: f64, v: Vector2<f64>, x: f64) -> Vector2<f64> {
        self.arc_transfer(lambda, 0.0, x.rem_euclid(self.circumference)) * v
    }
}

/// Fundamental solutions of u'' = -(lambda - q) u over length `x`:
/// returns (c(x), s(x)) with c(0)=1, c'(0)=0, s(0)=0, s'(0)=1, where
/// `m = lambda - q`. Degenerate `m ~ 0` uses the series expansion.
fn fundamental_cs(m: f64, x: f64) -> (f64, f64) {
    if m.abs() * x * x < 1e-4 {
        let u = m * x * x;
        let c = 1.0 - u / 2.0 + u * u / 24.0 - u * u * u / 720.0;
        let s = x * (1.0 - u / 6.0 + u * u / 120.0 - u * u * u / 5040.0);
        (c, s)
    } else if m > 0.0 {
        let k = m.sqrt();
        ((k * x).cos(), (k * x).sin() / k)
    } else {
        let k = (-m).sqrt();
        ((k * x).cosh(), (k * x).sinh() / k)
    }
}

/// Closed-form integrals over [0, len] of c*c, c*s and s*s for the
/// fundamental solutions above.
fn basis_integrals(m: f64, len: f64) -> (f64, f64, f64) {
    let l = len;
    if m.abs() * l * l < 1e-4 {
        let icc = l - m * l.powi(3) / 3.0 + m * m * l.powi(5) / 15.0
            - 2.0 * m.powi(3) * l.powi(7) / 315.0;
        let ics = l * l / 2.0 - m * l.powi(4) / 6.0 + m * m * l.powi(6) / 45.0
            - m.powi(3) * l.powi(8) / 630.0;
        let iss = l.powi(3) / 3.0 - m * l.powi(5) / 15.0 + 2.0 * m * m * l.powi(7) / 315.0
            - m.powi(3) * l.powi(9) / 2835.0;
        (icc, ics, iss)
    } else if m > 0.0 {
        let k = m.sqrt();
        let icc = l / 2.0 + (2.0 * k * l).sin() / (4.0 * k);
        let ics = (k * l).sin().powi(2) / (2.0 * m);
        let iss = (l / 2.0 - (2.0 * k * l).sin() / (4.0 * k)) / m;
        (icc, ics, iss)
    } else {
        let k = (-m).sqrt();
        let icc = l / 2.0 + (2.0 * k * l).sinh() / (4.0 * k);
        let ics = (k * l).sinh().powi(2) / (2.0 * k * k);
        let iss = (-l / 2.0 + (2.0 * k * l).sinh() / (4.0 * k)) / (k * k);
        (icc, ics, iss)
    }
}

/// Unit-determinant propagator of (u, u') across one constant-potential
/// segment at spectral parameter lambda.
#[derive(Clone, Copy, Debug)]
pub struct TransferMatrix(pub Matrix2<f64>);

impl TransferMatrix {
    pub fn det(&self) -> f64 {
        self.0.determinant()
    }
}

/// Propagator of -u'' + q u = lambda u over a segment of length `len`.
pub fn transfer_matrix(len: f64, q: f64, lambda: f64) -> Result<TransferMatrix> {
    if !(len.is_finite() && len >= 0.0) {
        return Err(RingError::InvalidArgument(format!(
            "segment length must be non-negative, got {len}"
        )));
    }
    let m = lambda - q;
    let (c, s) = fundamental_cs(m, len);
    Ok(TransferMatrix(Matrix2::new(c, s, -m * s, c)))
}

/// Truncated spectrum of the ring with eigenfunction values at the
/// attachment points. Eigenvalues ascend with multiplicity listed explicitly;
/// each eigenfunction carries unit L2 norm on the ring.
#[derive(Clone, Debug)]
pub struct EigenData {
    eigenvalues: Vec<f64>,
    values: DMatrix<f64>,
    lambda_cap: f64,
}

impl EigenData {
    /// Assemble from an externally computed spectrum. `eigenvalues` must be
    /// ascending; row l of `values` holds eigenfunction l at the attachment
    /// points.
    pub fn from_parts(
        eigenvalues: Vec<f64>,
        values: DMatrix<f64>,
        lambda_cap: f64,
    ) -> Self {
        debug_assert_eq!(eigenvalues.len(), values.nrows());
        debug_assert!(eigenvalues.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        Self {
            eigenvalues,
            values,
            lambda_cap,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// M x N matrix; row l holds the values of eigenfunction l at the
    /// attachment points.
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn truncation_count(&self) -> usize {
        self.eigenvalues.len()
    }

    /// All eigenvalues strictly below this bound are present with full
    /// multiplicity.
    pub fn lambda_cap(&self) -> f64 {
        self.lambda_cap
    }

    pub fn nearest_eigenvalue(&self, lambda: f64) -> Option<(usize, f64)> {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &ev)| (i, ev))
            .min_by(|a, b| {
                (a.1 - lambda)
                    .abs()
                    .partial_cmp(&(b.1 - lambda).abs())
                    .unwrap()
            })
    }
}

/// Analytic spectrum of the uniform ring: eigenvalues q + (2 pi n / L)^2 with
/// the constant mode at n = 0 and cos/sin doublets for n >= 1, truncated to
/// `m_modes` entries.
pub fn uniform_ring_eigendata(
    circumference: f64,
    q: f64,
    m_modes: usize,
    attachments: &[f64],
) -> Result<EigenData> {
    if !(circumference.is_finite() && circumference > 0.0) {
        return Err(RingError::InvalidArgument(format!(
            "circumference must be positive, got {circumference}"
        )));
    }
    if m_modes == 0 {
        return Err(RingError::InvalidArgument(
            "mode count must be positive".into(),
        ));
    }
    let l = circumference;
    let n_att = attachments.len();
    let mut eigenvalues = Vec::with_capacity(m_modes);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m_modes);

    eigenvalues.push(q);
    rows.push(attachments.iter().map(|_| (1.0 / l).sqrt()).collect());

    let amp = (2.0 / l).sqrt();
    let mut n = 1usize;
    while eigenvalues.len() < m_modes {
        let ev = q + (2.0 * PI * n as f64 / l).powi(2);
        let w = 2.0 * PI * n as f64 / l;
        eigenvalues.push(ev);
        rows.push(attachments.iter().map(|&a| amp * (w * a).cos()).collect());
        if eigenvalues.len() < m_modes {
            eigenvalues.push(ev);
            rows.push(attachments.iter().map(|&a| amp * (w * a).sin()).collect());
        }
        n += 1;
    }
    // First eigenvalue not included in the truncation bounds the coverage.
    let next_ev = q + (2.0 * PI * n as f64 / l).powi(2);
    let lambda_cap = if eigenvalues.len() % 2 == 0 {
        // Pair at the tail was split: coverage ends at the split pair.
        *eigenvalues.last().unwrap()
    } else {
        next_ev
    };
    let values = DMatrix::from_fn(eigenvalues.len(), n_att, |r, c| rows[r][c]);
    Ok(EigenData::from_parts(eigenvalues, values, lambda_cap))
}

const DOUBLE_ROOT_NORM: f64 = 1e-7;
const BISECT_TOL: f64 = 1e-13;

fn frob_minus_identity(m: &Matrix2<f64>) -> f64 {
    ((m[(0, 0)] - 1.0).powi(2)
        + m[(0, 1)].powi(2)
        + m[(1, 0)].powi(2)
        + (m[(1, 1)] - 1.0).powi(2))
    .sqrt()
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, fa_in: f64) -> f64 {
    let mut fa = fa_in;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a < BISECT_TOL * (1.0 + mid.abs()) {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fa > 0.0) == (fm > 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Eigenvalues of the periodic problem on the ring up to `lambda_max`, with
/// multiplicity, found as roots of the discriminant tr(Monodromy) - 2.
/// Eigenfunction values at the attachment points come from propagating the
/// periodic eigenvectors of the monodromy and normalizing with closed-form
/// norm integrals.
pub fn piecewise_ring_eigendata(domain: &RingDomain, lambda_max: f64) -> Result<EigenData> {
    let q_min = domain.q_min();
    if !(lambda_max > q_min) {
        return Err(RingError::InvalidArgument(format!(
            "lambda_max = {lambda_max} must lie above the minimum segment potential {q_min}"
        )));
    }
    let l = domain.circumference();
    let disc = |lam: f64| domain.monodromy(lam).trace() - 2.0;
    let off12 = |lam: f64| domain.monodromy(lam)[(0, 1)];

    // Scan grid: step capped at 0.05 and at a quarter of the local root
    // spacing in the accumulated-phase variable.
    let mut grid = Vec::new();
    let mut lam = q_min - 1.0;
    while lam < lambda_max {
        grid.push(lam);
        let dx = (lam - q_min).max((PI / l).powi(2));
        let h = (0.05f64).min(PI * dx.sqrt() / (2.0 * l));
        lam += h;
    }
    grid.push(lambda_max);

    let samples: Vec<(f64, f64, f64)> = grid
        .iter()
        .map(|&x| {
            let m = domain.monodromy(x);
            (x, m.trace() - 2.0, m[(0, 1)])
        })
        .collect();

    // (eigenvalue, multiplicity)
    let mut roots: Vec<(f64, usize)> = Vec::new();

    for w in samples.windows(2) {
        let (x0, f0, _) = w[0];
        let (x1, f1, _) = w[1];
        if f0 == 0.0 {
            roots.push((x0, 1));
        } else if f0 * f1 < 0.0 {
            roots.push((bisect(&disc, x0, x1, f0), 1));
        }
    }

    for w in samples.windows(2) {
        let (x0, _, g0) = w[0];
        let (x1, f1grid, g1) = w[1];
        let f0grid = w[0].1;
        if g0 * g1 < 0.0 || g0 == 0.0 {
            let xc = if g0 == 0.0 {
                x0
            } else {
                bisect(&off12, x0, x1, g0)
            };
            let m = domain.monodromy(xc);
            let d = frob_minus_identity(&m);
            let fc = m.trace() - 2.0;
            if d < DOUBLE_ROOT_NORM {
                roots.push((xc, 2));
            } else if fc > 0.0 && f0grid < 0.0 && f1grid < 0.0 {
                // Narrow open gap straddled by the grid: two simple roots.
                roots.push((bisect(&disc, x0, xc, f0grid), 1));
                roots.push((bisect(&disc, xc, x1, fc), 1));
            } else if fc.abs() < 1e-10 && d < 1e-4 {
                // Could be a nearly-closed gap the grid cannot resolve.
                return Err(RingError::Resolution { lambda: xc });
            }
        }
    }

    roots.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // Merge duplicates; a double subsumes any nearby simple root.
    let mut merged: Vec<(f64, usize)> = Vec::new();
    for (x, mult) in roots {
        if x > lambda_max + 1e-12 {
            continue;
        }
        match merged.last_mut() {
            Some(last) if (last.0 - x).abs() < 1e-9 => {
                if mult > last.1 {
                    *last = (x, mult);
                }
            }
            _ => merged.push((x, mult)),
        }
    }

    let n_att = domain.n_leads();
    let mut eigenvalues = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();

    for (ev, mult) in merged {
        let m = domain.monodromy(ev);
        let mult = if frob_minus_identity(&m) < DOUBLE_ROOT_NORM {
            2
        } else {
            mult
        };
        if mult == 2 {
            // Every solution is periodic; orthonormalize two independent ones.
            let v1 = Vector2::new(1.0, 0.0);
            let v2 = Vector2::new(0.0, 1.0);
            let n11 = domain.ring_inner(ev, v1, v1);
            let n12 = domain.ring_inner(ev, v1, v2);
            let n22 = domain.ring_inner(ev, v2, v2);
            let e1 = v1 / n11.sqrt();
            let w2 = v2 - v1 * (n12 / n11);
            let nw2 = n22 - n12 * n12 / n11;
            let e2 = w2 / nw2.sqrt();
            for e in [e1, e2] {
                eigenvalues.push(ev);
                rows.push(
                    domain
                        .attachments()
                        .iter()
                        .map(|&a| domain.evaluate_solution(ev, e, a)[0])
                        .collect(),
                );
            }
        } else {
            // Null vector of M - I.
            let r1 = Vector2::new(m[(0, 1)], 1.0 - m[(0, 0)]);
            let r2 = Vector2::new(1.0 - m[(1, 1)], m[(1, 0)]);
            let v = if r1.norm() >= r2.norm() { r1 } else { r2 };
            let norm2 = domain.ring_inner(ev, v, v);
            let e = v / norm2.sqrt();
            eigenvalues.push(ev);
            rows.push(
                domain
                    .attachments()
                    .iter()
                    .map(|&a| domain.evaluate_solution(ev, e, a)[0])
                    .collect(),
            );
        }
    }

    let values = DMatrix::from_fn(eigenvalues.len(), n_att, |r, c| rows[r][c]);
    Ok(EigenData::from_parts(eigenvalues, values, lambda_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_ring(q: f64, attachments: Vec<f64>) -> RingDomain {
        RingDomain::uniform(2.0 * PI, q, attachments).unwrap()
    }

    #[test]
    fn uniform_free_ring_spectrum() {
        let e = uniform_ring_eigendata(2.0 * PI, 0.0, 5, &[0.0]).unwrap();
        let expect = [0.0, 1.0, 1.0, 4.0, 4.0];
        for (got, want) in e.eigenvalues().iter().zip(expect) {
            assert_abs_diff_eq!(got, &want, epsilon = 1e-14);
        }
    }

    #[test]
    fn uniform_shifted_ring_spectrum() {
        let e = uniform_ring_eigendata(2.0 * PI, -3.0, 5, &[0.0]).unwrap();
        let expect = [-3.0, -2.0, -2.0, 1.0, 1.0];
        for (got, want) in e.eigenvalues().iter().zip(expect) {
            assert_abs_diff_eq!(got, &want, epsilon = 1e-14);
        }
    }

    #[test]
    fn uniform_cosine_row_normalization() {
        let e = uniform_ring_eigendata(2.0 * PI, 0.0, 3, &[0.0]).unwrap();
        // n = 1 cosine row at a = 0 has value sqrt(2/L) = sqrt(1/pi).
        assert_abs_diff_eq!(e.values()[(1, 0)], (1.0 / PI).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(e.values()[(2, 0)], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn transfer_zero_length_is_identity() {
        let t = transfer_matrix(0.0, 1.7, -2.0).unwrap();
        assert_abs_diff_eq!(t.0[(0, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.0[(0, 1)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.0[(1, 0)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.0[(1, 1)], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn transfer_rotation_case() {
        let t = transfer_matrix(PI, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(t.0[(0, 0)], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.0[(0, 1)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.0[(1, 0)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.0[(1, 1)], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn transfer_hyperbolic_against_rk4() {
        // Integrate -u'' + q u = lambda u over [0, 1] with a fine RK4 step and
        // compare columns of the propagator.
        let (len, q, lambda) = (1.0, 3.0, 1.0);
        let t = transfer_matrix(len, q, lambda).unwrap();
        assert_abs_diff_eq!(t.det(), 1.0, epsilon = 1e-10);
        let rhs = |v: Vector2<f64>| Vector2::new(v[1], (q - lambda) * v[0]);
        for init in [Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)] {
            let mut v = init;
            let n = 20000;
            let h = len / n as f64;
            for _ in 0..n {
                let k1 = rhs(v);
                let k2 = rhs(v + k1 * (h / 2.0));
                let k3 = rhs(v + k2 * (h / 2.0));
                let k4 = rhs(v + k3 * h);
                v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            }
            let got = t.0 * init;
            assert_abs_diff_eq!(got[0], v[0], epsilon = 1e-9);
            assert_abs_diff_eq!(got[1], v[1], epsilon = 1e-9);
        }
    }

    #[test]
    fn transfer_negative_length_rejected() {
        assert!(transfer_matrix(-0.1, 0.0, 1.0).is_err());
    }

    #[test]
    fn piecewise_matches_uniform_on_single_segment() {
        let dom = unit_ring(0.0, vec![0.0, PI / 2.0]);
        let pw = piecewise_ring_eigendata(&dom, 4.5).unwrap();
        let expect = [0.0, 1.0, 1.0, 4.0, 4.0];
        assert_eq!(pw.eigenvalues().len(), 5);
        for (got, want) in pw.eigenvalues().iter().zip(expect) {
            assert_abs_diff_eq!(got, &want, epsilon = 1e-9);
        }
        // Degenerate-pair value rows span the same subspace as the analytic
        // ones: compare the 2x2 projectors built from each pair.
        let uni = uniform_ring_eigendata(2.0 * PI, 0.0, 5, dom.attachments()).unwrap();
        for pair_start in [1usize, 3] {
            let proj = |vals: &DMatrix<f64>| {
                let mut p = nalgebra::Matrix2::zeros();
                for r in pair_start..pair_start + 2 {
                    let v = Vector2::new(vals[(r, 0)], vals[(r, 1)]);
                    let n2 = v.norm_squared();
                    if n2 > 1e-20 {
                        p += v * v.transpose() / n2;
                    }
                }
                p
            };
            let p_pw = proj(pw.values());
            let p_uni = proj(uni.values());
            assert!((p_pw - p_uni).norm() < 1e-8);
        }
    }

    #[test]
    fn piecewise_shifted_constant_mode() {
        let dom = unit_ring(3.0, vec![0.0]);
        let pw = piecewise_ring_eigendata(&dom, 3.5).unwrap();
        assert_eq!(pw.eigenvalues().len(), 1);
        assert_abs_diff_eq!(pw.eigenvalues()[0], 3.0, epsilon = 1e-9);
        // Constant mode value 1/sqrt(L).
        assert_abs_diff_eq!(
            pw.values()[(0, 0)].abs(),
            (1.0 / (2.0 * PI)).sqrt(),
            epsilon = 1e-9
        );
        // A window below the potential floor violates the precondition.
        assert!(piecewise_ring_eigendata(&unit_ring(3.0, vec![0.0]), 2.0).is_err());
    }

    #[test]
    fn piecewise_two_segment_against_galerkin() {
        // q = 0 on [0, pi), q = 3 on [pi, 2 pi): Fourier-Galerkin oracle.
        let l = 2.0 * PI;
        let dom = RingDomain::new(
            l,
            vec![
                Segment {
                    start: 0.0,
                    end: PI,
                    q: 0.0,
                },
                Segment {
                    start: PI,
                    end: l,
                    q: 3.0,
                },
            ],
            vec![0.0, PI],
        )
        .unwrap();
        let pw = piecewise_ring_eigendata(&dom, 2.0).unwrap();
        let oracle = fourier_galerkin_eigenvalues(&dom, 256, 2.0);
        assert_eq!(pw.eigenvalues().len(), oracle.len());
        for (got, want) in pw.eigenvalues().iter().zip(&oracle) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-6);
        }
    }

    /// Dense Fourier-Galerkin diagonalization of -u'' + q(x) u on the ring;
    /// test-only oracle, independent of the transfer-matrix path.
    fn fourier_galerkin_eigenvalues(dom: &RingDomain, n_modes: i64, lambda_max: f64) -> Vec<f64> {
        let l = dom.circumference();
        let dim = (2 * n_modes + 1) as usize;
        // Basis e_n = exp(2 pi i n x / L)/sqrt(L), n = -n_modes..n_modes.
        // Kinetic part diagonal; potential couples via Fourier coefficients of q.
        let mut h_re = DMatrix::<f64>::zeros(dim, dim);
        let mut h_im = DMatrix::<f64>::zeros(dim, dim);
        for (i, n) in (-n_modes..=n_modes).enumerate() {
            h_re[(i, i)] = (2.0 * PI * n as f64 / l).powi(2);
        }
        for (i, n) in (-n_modes..=n_modes).enumerate() {
            for (j, m) in (-n_modes..=n_modes).enumerate() {
                let d = (n - m) as f64;
                // q_hat(d) = (1/L) * sum over segments of q * int exp(-2 pi i d x / L)
                let mut re = 0.0;
                let mut im = 0.0;
                for seg in dom.segments() {
                    if d == 0.0 {
                        re += seg.q * seg.len() / l;
                    } else {
                        let w = 2.0 * PI * d / l;
                        // int_a^b exp(-i w x) dx = (exp(-i w a) - exp(-i w b)) / (i w)
                        let (a, b) = (seg.start, seg.end);
                        let re_i = ((w * a).sin() - (w * b).sin()) / (-w);
                        let im_i = ((w * a).cos() - (w * b).cos()) / w;
                        re += seg.q * re_i / l;
                        im += seg.q * im_i / l;
                    }
                }
                h_re[(i, j)] += re;
                h_im[(i, j)] += im;
            }
        }
        // Embed the Hermitian matrix as a real symmetric one of twice the size:
        // [[Re, -Im], [Im, Re]]; eigenvalues appear doubled.
        let mut big = DMatrix::<f64>::zeros(2 * dim, 2 * dim);
        for i in 0..dim {
            for j in 0..dim {
                big[(i, j)] = h_re[(i, j)];
                big[(i + dim, j + dim)] = h_re[(i, j)];
                big[(i, j + dim)] = -h_im[(i, j)];
                big[(i + dim, j)] = h_im[(i, j)];
            }
        }
        let mut evs: Vec<f64> = big
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        evs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // Undo the doubling.
        evs.into_iter()
            .step_by(2)
            .take_while(|&e| e <= lambda_max)
            .collect()
    }

    #[test]
    fn monodromy_det_one_on_grid() {
        let l = 2.0 * PI;
        let dom = RingDomain::new(
            l,
            vec![
                Segment {
                    start: 0.0,
                    end: 2.0,
                    q: -1.0,
                },
                Segment {
                    start: 2.0,
                    end: l,
                    q: 2.5,
                },
            ],
            vec![0.5],
        )
        .unwrap();
        let mut lam = -2.0;
        while lam < 6.0 {
            let m = dom.monodromy(lam);
            // det = 1 up to roundoff amplified by the hyperbolic entry size.
            let scale = m.norm_squared().max(1.0);
            assert_abs_diff_eq!(m.determinant(), 1.0, epsilon = 1e-13 * scale);
            lam += 0.11;
        }
    }

    #[test]
    fn eigenvalue_count_weyl_monotone() {
        let dom = unit_ring(0.0, vec![0.0]);
        let c1 = piecewise_ring_eigendata(&dom, 2.0).unwrap().eigenvalues().len();
        let c2 = piecewise_ring_eigendata(&dom, 5.0).unwrap().eigenvalues().len();
        assert!(c2 >= c1);
        let shifted = unit_ring(1.5, vec![0.0]);
        let c3 = piecewise_ring_eigendata(&shifted, 5.0)
            .unwrap()
            .eigenvalues()
            .len();
        assert!(c3 <= c2);
    }

    #[test]
    fn degenerate_rows_orthonormal() {
        let dom = unit_ring(0.0, vec![0.0, 1.0, 2.5]);
        let pw = piecewise_ring_eigendata(&dom, 4.5).unwrap();
        // Rebuild the pair solutions and check L2 orthonormality directly.
        let ev = pw.eigenvalues()[1];
        let v1 = Vector2::new(1.0, 0.0);
        let v2 = Vector2::new(0.0, 1.0);
        let n11 = dom.ring_inner(ev, v1, v1);
        let n12 = dom.ring_inner(ev, v1, v2);
        let n22 = dom.ring_inner(ev, v2, v2);
        let e1 = v1 / n11.sqrt();
        let w2 = v2 - v1 * (n12 / n11);
        let e2 = w2 / (n22 - n12 * n12 / n11).sqrt();
        assert_abs_diff_eq!(dom.ring_inner(ev, e1, e1), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(dom.ring_inner(ev, e2, e2), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(dom.ring_inner(ev, e1, e2), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn completeness_partial_sums() {
        let e = uniform_ring_eigendata(2.0 * PI, 0.0, 400, &[0.7]).unwrap();
        let mut partial = 0.0;
        let mut last_increment = f64::INFINITY;
        let mut sums = Vec::new();
        for (l, &ev) in e.eigenvalues().iter().enumerate() {
            let inc = e.values()[(l, 0)].powi(2) / (ev + 1.0).powi(2);
            assert!(inc >= 0.0);
            partial += inc;
            sums.push(partial);
            if l > 10 && l % 2 == 0 {
                let pair_inc = inc + e.values()[(l - 1, 0)].powi(2) / (ev + 1.0).powi(2);
                assert!(pair_inc <= last_increment + 1e-15);
                last_increment = pair_inc;
            }
        }
        // Convergent: late increments are tiny.
        let tail = sums[sums.len() - 1] - sums[sums.len() - 100];
        assert!(tail < 1e-5);
    }

    #[test]
    fn segment_gap_rejected() {
        let bad = RingDomain::new(
            1.0,
            vec![
                Segment {
                    start: 0.0,
                    end: 0.4,
                    q: 0.0,
                },
                Segment {
                    start: 0.5,
                    end: 1.0,
                    q: 0.0,
                },
            ],
            vec![0.1],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn coincident_attachments_rejected() {
        assert!(RingDomain::uniform(1.0, 0.0, vec![0.2, 0.2]).is_err());
    }

    #[test]
    fn basis_integrals_match_quadrature() {
        for &(m, len) in &[(2.3, 1.7), (-4.0, 0.9), (1e-7, 2.0), (0.0, 1.3)] {
            let (icc, ics, iss) = basis_integrals(m, len);
            let n = 40000;
            let h = len / n as f64;
            let (mut qcc, mut qcs, mut qss) = (0.0, 0.0, 0.0);
            for i in 0..n {
                let x = (i as f64 + 0.5) * h;
                let (c, s) = fundamental_cs(m, x);
                qcc += c * c * h;
                qcs += c * s * h;
                qss += s * s * h;
            }
            assert_abs_diff_eq!(icc, qcc, epsilon = 1e-7);
            assert_abs_diff_eq!(ics, qcs, epsilon = 1e-7);
            assert_abs_diff_eq!(iss, qss, epsilon = 1e-7);
        }
    }
}
