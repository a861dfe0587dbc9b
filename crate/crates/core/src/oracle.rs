//! Brute-force scattering solver by direct boundary-condition matching on
//! the ring-plus-leads system. Bypasses the Q-matrix entirely and keeps its
//! own arc propagation, so it can serve as an independent cross-check of the
//! production path. Clarity over speed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::domain::RingDomain;
use crate::error::{Result, RingError};
use crate::scattering::{unitarity_defect, ScatteringMatrix};

const COND_LIMIT: f64 = 1e12;

/// Fundamental solutions of u'' = -(lambda - q) u over length x, written out
/// here independently of the domain module.
fn arc_cs(m: f64, x: f64) -> (f64, f64) {
    if m.abs() * x * x < 1e-4 {
        let u = m * x * x;
        (
            1.0 - u / 2.0 + u * u / 24.0 - u * u * u / 720.0,
            x * (1.0 - u / 6.0 + u * u / 120.0 - u * u * u / 5040.0),
        )
    } else if m > 0.0 {
        let k = m.sqrt();
        ((k * x).cos(), (k * x).sin() / k)
    } else {
        let k = (-m).sqrt();
        ((k * x).cosh(), (k * x).sinh() / k)
    }
}

/// Propagator of (u, u') across the arc from `from` over distance `dist`,
/// walking the potential segments directly.
fn arc_propagator(domain: &RingDomain, lambda: f64, from: f64, dist: f64) -> [[f64; 2]; 2] {
    let l = domain.circumference();
    let segs = domain.segments();
    let x0 = from.rem_euclid(l);
    let mut idx = segs
        .iter()
        .enumerate()
        .filter(|(_, s)| x0 >= s.start)
        .map(|(i, _)| i)
        .last()
        .unwrap_or(0);
    let mut offset = x0 - segs[idx].start;
    let mut remaining = dist;
    let mut acc = [[1.0, 0.0], [0.0, 1.0]];
    let eps = 1e-15 * l.max(dist);
    while remaining > eps {
        let seg = &segs[idx];
        let avail = (seg.end - seg.start) - offset;
        let step = avail.min(remaining);
        if step > 0.0 {
            let m = lambda - seg.q;
            let (c, s) = arc_cs(m, step);
            let t = [[c, s], [-m * s, c]];
            acc = [
                [
                    t[0][0] * acc[0][0] + t[0][1] * acc[1][0],
                    t[0][0] * acc[0][1] + t[0][1] * acc[1][1],
                ],
                [
                    t[1][0] * acc[0][0] + t[1][1] * acc[1][0],
                    t[1][0] * acc[0][1] + t[1][1] * acc[1][1],
                ],
            ];
            remaining -= step;
        }
        idx = (idx + 1) % segs.len();
        offset = 0.0;
    }
    acc
}

struct MatchingSystem {
    matrix: DMatrix<Complex64>,
    /// Sorted node order; entry j is the original lead index at node j.
    node_leads: Vec<usize>,
    n: usize,
    k: f64,
    beta: f64,
}

/// Build the square matching system: per arc two solution coefficients, per
/// lead one scattering amplitude. Equations per node: ring value continuity,
/// the lead-value relation u_s(0) = beta B_s, and the derivative-jump
/// relation jump(u')(a_s) = -A_s with A_s = beta u_s'(0).
fn build_system(domain: &RingDomain, lambda: f64, beta: f64) -> MatchingSystem {
    let n = domain.n_leads();
    let k = lambda.sqrt();
    let atts = domain.attachments();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| atts[a].partial_cmp(&atts[b]).unwrap());
    let l = domain.circumference();

    // Arc j runs from sorted node j to sorted node j+1 (wrapping); for a
    // single lead it is the full ring.
    let arc_t: Vec<[[f64; 2]; 2]> = (0..n)
        .map(|j| {
            let from = atts[order[j]];
            let to = atts[order[(j + 1) % n]];
            let dist = if n == 1 {
                l
            } else {
                (to - from).rem_euclid(l)
            };
            arc_propagator(domain, lambda, from, dist)
        })
        .collect();

    // Unknowns: (p_j, r_j) = ring value/derivative at the start of arc j,
    // then the N scattering amplitudes (original lead indexing).
    let dim = 3 * n;
    let mut a = DMatrix::<Complex64>::zeros(dim, dim);
    let ikb = Complex64::new(0.0, k * beta);
    for j in 0..n {
        let s = order[j];
        let prev = (j + n - 1) % n;
        let t = &arc_t[prev];
        let (pj, rj) = (2 * j, 2 * j + 1);
        let (pp, rp) = (2 * prev, 2 * prev + 1);
        let s_col = 2 * n + s;
        let row = 3 * j;
        // Ring value continuity across the node.
        a[(row, pp)] += Complex64::new(t[0][0], 0.0);
        a[(row, rp)] += Complex64::new(t[0][1], 0.0);
        a[(row, pj)] -= Complex64::new(1.0, 0.0);
        // Lead value: beta p_j - S_s = delta_{s,in}.
        a[(row + 1, pj)] = Complex64::new(beta, 0.0);
        a[(row + 1, s_col)] = Complex64::new(-1.0, 0.0);
        // Derivative jump: r_j - (arrived derivative) + i k beta S_s = i k beta delta.
        a[(row + 2, rj)] += Complex64::new(1.0, 0.0);
        a[(row + 2, pp)] -= Complex64::new(t[1][0], 0.0);
        a[(row + 2, rp)] -= Complex64::new(t[1][1], 0.0);
        a[(row + 2, s_col)] += ikb;
    }
    MatchingSystem {
        matrix: a,
        node_leads: order,
        n,
        k,
        beta,
    }
}

fn rhs_for(sys: &MatchingSystem, incoming: usize) -> DVector<Complex64> {
    let mut rhs = DVector::<Complex64>::zeros(3 * sys.n);
    for j in 0..sys.n {
        if sys.node_leads[j] == incoming {
            rhs[3 * j + 1] = Complex64::new(1.0, 0.0);
            rhs[3 * j + 2] = Complex64::new(0.0, sys.k * sys.beta);
        }
    }
    rhs
}

fn solve_column(
    sys: &MatchingSystem,
    incoming: usize,
) -> Result<DVector<Complex64>> {
    let lu = sys.matrix.clone().lu();
    let sol = lu
        .solve(&rhs_for(sys, incoming))
        .ok_or(RingError::IllConditioned { cond: f64::INFINITY })?;
    Ok(DVector::from_fn(sys.n, |s, _| sol[2 * sys.n + s]))
}

fn condition_estimate(m: &DMatrix<Complex64>) -> f64 {
    let svd = m.clone().svd(false, false);
    let max = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let min = svd
        .singular_values
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b));
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// One column of the scattering matrix from explicit boundary-condition
/// matching: incoming Jost wave e^{-ikx} on the chosen ray, outgoing e^{+ikx}
/// amplitudes on all rays.
pub fn scatter_direct(
    domain: &RingDomain,
    lambda: f64,
    beta: f64,
    incoming: usize,
) -> Result<DVector<Complex64>> {
    if !(lambda > 0.0) {
        return Err(RingError::InvalidArgument(format!(
            "lambda = {lambda} has no propagating lead modes"
        )));
    }
    if incoming >= domain.n_leads() {
        return Err(RingError::InvalidArgument(format!(
            "incoming ray index {incoming} out of range"
        )));
    }
    let sys = build_system(domain, lambda, beta);
    let cond = condition_estimate(&sys.matrix);
    if cond > COND_LIMIT {
        return Err(RingError::IllConditioned { cond });
    }
    solve_column(&sys, incoming)
}

/// Full scattering matrix by direct matching; asserts unitarity and
/// reciprocity before returning.
pub fn assemble_full_s(domain: &RingDomain, lambda: f64, beta: f64) -> Result<ScatteringMatrix> {
    let n = domain.n_leads();
    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    for incoming in 0..n {
        let col = scatter_direct(domain, lambda, beta, incoming)?;
        matrix.set_column(incoming, &col);
    }
    let defect = unitarity_defect(&matrix);
    if defect > 1e-9 {
        return Err(RingError::UnitarityViolation { defect });
    }
    let sym_defect = (&matrix - matrix.transpose()).norm();
    if sym_defect > 1e-8 {
        return Err(RingError::UnitarityViolation { defect: sym_defect });
    }
    Ok(ScatteringMatrix {
        lambda,
        k: lambda.sqrt(),
        beta,
        matrix,
    })
}

/// Quadrature-internal variant: skips the condition estimate and the
/// post-hoc assertions (samples deliberately approach resonances).
pub(crate) fn assemble_full_s_unchecked(
    domain: &RingDomain,
    lambda: f64,
    beta: f64,
) -> Result<ScatteringMatrix> {
    let n = domain.n_leads();
    let sys = build_system(domain, lambda, beta);
    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    for incoming in 0..n {
        let col = solve_column(&sys, incoming)?;
        matrix.set_column(incoming, &col);
    }
    Ok(ScatteringMatrix {
        lambda,
        k: lambda.sqrt(),
        beta,
        matrix,
    })
}
