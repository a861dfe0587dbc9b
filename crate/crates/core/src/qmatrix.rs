//! The N x N matrix Q(lambda) of regularized Green's values relating regular
//! to singular boundary amplitudes, and its resonance decomposition: pole
//! matrix, projector onto the eigenfunction images, and regular part.

use nalgebra::DMatrix;

use crate::domain::{EigenData, RingDomain};
use crate::error::{Result, RingError};
use crate::greens::{green_direct_with_spectrum, green_unchecked, DEFAULT_REF_LAMBDA};

/// Tolerance for matching a requested resonance against eigendata.
pub const EIGENVALUE_MATCH_TOL: f64 = 1e-9;

/// Relative threshold below which an image column counts as a null direction.
pub const NULL_IMAGE_TOL: f64 = 1e-10;

/// Q(lambda): diagonal entries are the regularized diagonal Green's values
/// g^s(lambda) = G_lambda(a_s, a_s) (finite in 1D), off-diagonal entries are
/// G_lambda(a_s, a_t). Real symmetric at regular real lambda.
#[derive(Clone, Debug)]
pub struct QMatrix {
    pub lambda: f64,
    pub entries: DMatrix<f64>,
}

impl QMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

/// Assemble Q(lambda) at a regular point, using the eigendata for the
/// pole-distance check.
pub fn build_q(domain: &RingDomain, eigendata: &EigenData, lambda: f64) -> Result<QMatrix> {
    if lambda >= eigendata.lambda_cap() {
        return Err(RingError::InvalidArgument(format!(
            "lambda = {lambda} not covered by the eigendata (cap {})",
            eigendata.lambda_cap()
        )));
    }
    let atts = domain.attachments();
    let n = atts.len();
    let spectrum = eigendata.eigenvalues();
    let mut entries = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let g = green_direct_with_spectrum(domain, spectrum, lambda, atts[i], atts[j])?;
            entries[(i, j)] = g.value;
            entries[(j, i)] = g.value;
        }
    }
    Ok(QMatrix { lambda, entries })
}

/// Internal assembly without the near-pole refusal; used by transport
/// quadrature which deliberately samples close to resonances.
pub(crate) fn build_q_unchecked(domain: &RingDomain, lambda: f64) -> QMatrix {
    let atts = domain.attachments();
    let n = atts.len();
    let mut entries = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let g = green_unchecked(domain, lambda, atts[i], atts[j]);
            entries[(i, j)] = g;
            entries[(j, i)] = g;
        }
    }
    QMatrix { lambda, entries }
}

/// Resonance data at an eigenvalue lambda0 of the ring operator.
#[derive(Clone, Debug)]
pub struct ResonanceData {
    pub lambda0: f64,
    /// Multiplicity p of lambda0 in the spectrum.
    pub multiplicity: usize,
    /// N x p image matrix after Gram diagonalization; columns are mutually
    /// orthogonal in C^N, ordered by descending norm (null columns last).
    pub images: DMatrix<f64>,
    /// Rank m of the image space R0.
    pub rank: usize,
    /// Norms pi_i of the first `rank` image columns.
    pub image_norms: Vec<f64>,
    /// Residue matrix D0 = V V^T of the Q-matrix pole.
    pub pole_matrix: DMatrix<f64>,
    /// Orthogonal projector P0 onto the column space of the images.
    pub projector: DMatrix<f64>,
    /// Regular (pole-subtracted) part Q0 at lambda0.
    pub regular_part: DMatrix<f64>,
}

/// Rotate the image columns of an orthonormal eigenbasis so they become
/// mutually orthogonal in C^N (symmetric eigendecomposition of the p x p
/// image Gram matrix). Returns (rotated images, rank m, column norms pi_i for
/// the first m columns).
pub fn orthogonalize_images(raw: &DMatrix<f64>) -> (DMatrix<f64>, usize, Vec<f64>) {
    let p = raw.ncols();
    if p == 0 {
        return (raw.clone(), 0, Vec::new());
    }
    if p == 1 {
        let norm = raw.column(0).norm();
        let m = if norm > 0.0 { 1 } else { 0 };
        return (raw.clone(), m, if m == 1 { vec![norm] } else { vec![] });
    }
    let gram = raw.transpose() * raw;
    let se = gram.symmetric_eigen();
    // Order eigenpairs by descending eigenvalue.
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).unwrap());
    let mut u = DMatrix::zeros(p, p);
    for (new_col, &old_col) in order.iter().enumerate() {
        u.set_column(new_col, &se.eigenvectors.column(old_col));
    }
    let rotated = raw * &u;
    let max_norm = se.eigenvalues[order[0]].max(0.0).sqrt();
    let mut norms = Vec::new();
    for i in 0..p {
        let n = rotated.column(i).norm();
        if max_norm > 0.0 && n >= NULL_IMAGE_TOL * max_norm {
            norms.push(n);
        } else {
            break;
        }
    }
    let rank = norms.len();
    (rotated, rank, norms)
}

/// Extract the resonance data at lambda0: gathers the degenerate
/// eigenfunction rows, Gram-diagonalizes their images, and evaluates the
/// regular part Q0 as the resonant-term-excluded regularized series.
pub fn resonance_data(
    domain: &RingDomain,
    eigendata: &EigenData,
    lambda0: f64,
) -> Result<ResonanceData> {
    resonance_data_with_reference(domain, eigendata, lambda0, DEFAULT_REF_LAMBDA)
}

pub fn resonance_data_with_reference(
    domain: &RingDomain,
    eigendata: &EigenData,
    lambda0: f64,
    ref_lambda: f64,
) -> Result<ResonanceData> {
    let n = domain.n_leads();
    let resonant: Vec<usize> = eigendata
        .eigenvalues()
        .iter()
        .enumerate()
        .filter(|(_, &ev)| (ev - lambda0).abs() < EIGENVALUE_MATCH_TOL)
        .map(|(i, _)| i)
        .collect();
    if resonant.is_empty() {
        let nearest = eigendata
            .nearest_eigenvalue(lambda0)
            .map(|(_, ev)| ev)
            .unwrap_or(f64::NAN);
        return Err(RingError::NotAnEigenvalue { lambda0, nearest });
    }
    for &ev in eigendata.eigenvalues() {
        if (ev - ref_lambda).abs() < 1e-6 {
            return Err(RingError::InvalidArgument(format!(
                "series reference point {ref_lambda} too close to eigenvalue {ev}; \
                 supply a reference below the spectrum"
            )));
        }
    }

    let p = resonant.len();
    let raw = DMatrix::from_fn(n, p, |r, c| eigendata.values()[(resonant[c], r)]);
    let (images, rank, image_norms) = orthogonalize_images(&raw);

    let pole_matrix = &raw * raw.transpose();
    let mut projector = DMatrix::zeros(n, n);
    for i in 0..rank {
        let v = images.column(i) / image_norms[i];
        projector += &v * v.transpose();
    }

    // Q0 = [G_ref - D0/(lambda0 - ref)] + (lambda0 - ref) * series with the
    // resonant terms removed; the bracket strips the resonant modes out of
    // the directly-evaluated reference Green's matrix.
    let atts = domain.attachments();
    let mut regular_part = DMatrix::from_fn(n, n, |i, j| {
        green_unchecked(domain, ref_lambda, atts[i], atts[j])
    });
    regular_part -= &pole_matrix / (lambda0 - ref_lambda);
    let vals = eigendata.values();
    for (l, &ev) in eigendata.eigenvalues().iter().enumerate() {
        if (ev - lambda0).abs() < EIGENVALUE_MATCH_TOL {
            continue;
        }
        let w = (lambda0 - ref_lambda) / ((ev - ref_lambda) * (ev - lambda0));
        for i in 0..n {
            for j in 0..n {
                regular_part[(i, j)] += w * vals[(l, i)] * vals[(l, j)];
            }
        }
    }

    Ok(ResonanceData {
        lambda0,
        multiplicity: p,
        images,
        rank,
        image_norms,
        pole_matrix,
        projector,
        regular_part,
    })
}
