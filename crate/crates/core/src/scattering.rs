//! Scattering matrix of the ring-with-leads system: exact Cayley-form
//! evaluation at regular energies, the stable factorized limit at a
//! resonance, and the weak-coupling asymptotic series.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, RingError};
use crate::qmatrix::{QMatrix, ResonanceData};

/// S-matrix of the leads at energy lambda = k^2 with coupling beta.
/// Unitary and symmetric (Q real symmetric).
#[derive(Clone, Debug)]
pub struct ScatteringMatrix {
    pub lambda: f64,
    /// Momentum on the leads, k = +sqrt(lambda) (outgoing waves e^{+ikx}).
    pub k: f64,
    pub beta: f64,
    pub matrix: DMatrix<Complex64>,
}

impl ScatteringMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Frobenius norm of S*S - I.
    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.matrix)
    }
}

/// Frobenius norm of S*S - I for an arbitrary complex matrix.
pub fn unitarity_defect(s: &DMatrix<Complex64>) -> f64 {
    let n = s.nrows();
    let prod = s.adjoint() * s;
    (prod - DMatrix::<Complex64>::identity(n, n)).norm()
}

fn identity(n: usize) -> DMatrix<Complex64> {
    DMatrix::identity(n, n)
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Solve (I - X) S' = (I + X) and return -S'; X commutes with itself so the
/// two Cayley orderings coincide.
fn cayley(x: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = x.nrows();
    let denom = identity(n) - x;
    let numer = identity(n) + x;
    let lu = denom.lu();
    let solved = lu
        .solve(&numer)
        .ok_or_else(|| RingError::InvalidArgument("Cayley denominator singular".into()))?;
    Ok(-solved)
}

/// Exact scattering matrix S = -(I + ik b^2 Q)(I - ik b^2 Q)^{-1} at a
/// regular energy lambda = k^2 > 0.
pub fn smatrix(q: &QMatrix, beta: f64) -> Result<ScatteringMatrix> {
    if !(q.lambda > 0.0) {
        return Err(RingError::InvalidArgument(format!(
            "lambda = {} has no propagating lead modes",
            q.lambda
        )));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(RingError::InvalidArgument(format!(
            "coupling beta = {beta} must be non-negative"
        )));
    }
    let k = q.lambda.sqrt();
    let x = to_complex(&q.entries) * Complex64::new(0.0, k * beta * beta);
    let matrix = cayley(&x)?;
    Ok(ScatteringMatrix {
        lambda: q.lambda,
        k,
        beta,
        matrix,
    })
}

/// Exact lambda -> lambda0 limit of the scattering matrix at a resonance,
/// via the factorized denominator: S(l0) = -(I - 2 P0 + ik0 b^2 Q0 P0_perp)
/// (I - ik0 b^2 Q0 P0_perp)^{-1}. No near-pole cancellation occurs.
pub fn smatrix_at_resonance(res: &ResonanceData, beta: f64) -> Result<ScatteringMatrix> {
    if !(res.lambda0 > 0.0) {
        return Err(RingError::InvalidArgument(format!(
            "resonance lambda0 = {} has no propagating lead modes",
            res.lambda0
        )));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(RingError::InvalidArgument(format!(
            "coupling beta = {beta} must be non-negative"
        )));
    }
    let n = res.projector.nrows();
    let k0 = res.lambda0.sqrt();
    let p0 = to_complex(&res.projector);
    let p_perp = identity(n) - &p0;
    let q0_pperp =
        to_complex(&res.regular_part) * &p_perp * Complex64::new(0.0, k0 * beta * beta);
    let numer = identity(n) - &p0 * Complex64::new(2.0, 0.0) + &q0_pperp;
    let denom = identity(n) - &q0_pperp;
    let lu = denom.lu();
    let inv_times = lu
        .solve(&identity(n))
        .ok_or_else(|| RingError::InvalidArgument("resonance denominator singular".into()))?;
    let matrix = -(numer * inv_times);
    Ok(ScatteringMatrix {
        lambda: res.lambda0,
        k: k0,
        beta,
        matrix,
    })
}

/// Weak-coupling expansion at the resonance:
/// S = -I + 2 P0 - 2 sum_{s=1}^{order} (i k0 b^2 P0_perp Q0 P0_perp)^s.
pub fn smatrix_asymptotic(
    res: &ResonanceData,
    beta: f64,
    order: usize,
) -> Result<ScatteringMatrix> {
    if !(res.lambda0 > 0.0) {
        return Err(RingError::InvalidArgument(format!(
            "resonance lambda0 = {} has no propagating lead modes",
            res.lambda0
        )));
    }
    let n = res.projector.nrows();
    let k0 = res.lambda0.sqrt();
    let p_perp = DMatrix::<f64>::identity(n, n) - &res.projector;
    let core = &p_perp * &res.regular_part * &p_perp * (k0 * beta * beta);
    // Real symmetric: spectral radius from the symmetric eigendecomposition.
    let radius = core
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &e| acc.max(e.abs()));
    if radius >= 1.0 {
        return Err(RingError::Divergence { radius });
    }
    let term0 = to_complex(&core) * Complex64::new(0.0, 1.0);
    let mut matrix = identity(n) * Complex64::new(-1.0, 0.0) + to_complex(&res.projector) * Complex64::new(2.0, 0.0);
    let mut power = identity(n);
    for _ in 0..order {
        power = &power * &term0;
        matrix -= &power * Complex64::new(2.0, 0.0);
    }
    Ok(ScatteringMatrix {
        lambda: res.lambda0,
        k: k0,
        beta,
        matrix,
    })
}

/// Geometric tail bound for the truncated asymptotic series: the dropped
/// terms sum to at most 2 r^{order+1} / (1 - r) in spectral norm, where r is
/// the spectral radius of k0 b^2 P0_perp Q0 P0_perp.
pub fn asymptotic_tail_bound(res: &ResonanceData, beta: f64, order: usize) -> f64 {
    let n = res.projector.nrows();
    let k0 = res.lambda0.max(0.0).sqrt();
    let p_perp = DMatrix::<f64>::identity(n, n) - &res.projector;
    let core = &p_perp * &res.regular_part * &p_perp * (k0 * beta * beta);
    let radius = core
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &e| acc.max(e.abs()));
    if radius >= 1.0 {
        return f64::INFINITY;
    }
    2.0 * radius.powi(order as i32 + 1) / (1.0 - radius)
}
