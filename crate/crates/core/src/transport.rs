//! Landauer transport: transmission coefficients, Fermi-averaged conductance
//! over the thermal window, and switch figures of merit for the paired
//! open/closed ring configurations.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::domain::{piecewise_ring_eigendata, RingDomain};
use crate::error::{Result, RingError};
use crate::oracle::assemble_full_s_unchecked;
use crate::qmatrix::{build_q_unchecked, resonance_data, EIGENVALUE_MATCH_TOL};
use crate::scattering::{smatrix, smatrix_at_resonance, ScatteringMatrix};

/// Which scattering engine backs the transmission evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    QMatrix,
    Direct,
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Engine::QMatrix => write!(f, "qmatrix"),
            Engine::Direct => write!(f, "direct"),
        }
    }
}

/// |S_{to,from}|^2.
pub fn transmission(s: &ScatteringMatrix, from_ray: usize, to_ray: usize) -> Result<f64> {
    let n = s.dim();
    if from_ray >= n || to_ray >= n {
        return Err(RingError::InvalidArgument(format!(
            "ray index out of range ({from_ray}, {to_ray}) for N = {n}"
        )));
    }
    if from_ray == to_ray {
        return Err(RingError::InvalidArgument(
            "transmission requires distinct rays".into(),
        ));
    }
    Ok(s.matrix[(to_ray, from_ray)].norm_sqr())
}

/// Linear-response averaging weight -df/dlambda of the Fermi distribution:
/// (1/(4 tau)) sech^2((lambda - mu)/(2 tau)). Integrates to 1 over the line.
pub fn fermi_weight(lambda: f64, mu: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(RingError::InvalidArgument(
            "tau must be positive; use the tau = 0 delta-limit path".into(),
        ));
    }
    let x = (lambda - mu) / (2.0 * tau);
    // sech^2 underflows gracefully.
    let c = x.cosh();
    Ok(1.0 / (4.0 * tau * c * c))
}

/// Offset applied to quadrature nodes that land exactly on an eigenvalue.
const POLE_NUDGE: f64 = 1e-9;

/// Inside this relative distance of an eigenvalue the Green's-value route
/// loses the non-resonant channel to roundoff (the trace condition is
/// quadratic in the offset at a double eigenvalue), so the integrand falls
/// back to the direct matching solve, which stays well-conditioned there.
const QPATH_GUARD: f64 = 1e-5;

fn transmission_at(
    domain: &RingDomain,
    spectrum: &[f64],
    beta: f64,
    lambda: f64,
    source: usize,
    drain: usize,
    engine: Engine,
) -> Result<f64> {
    let mut lam = lambda;
    let mut near_pole = false;
    for &ev in spectrum {
        let scale = ev.abs().max(1.0);
        if (lam - ev).abs() < POLE_NUDGE * scale {
            lam = ev + POLE_NUDGE * scale;
        }
        if (lam - ev).abs() < QPATH_GUARD * scale {
            near_pole = true;
        }
    }
    let s = match engine {
        Engine::QMatrix if !near_pole => smatrix(&build_q_unchecked(domain, lam), beta)?,
        _ => assemble_full_s_unchecked(domain, lam, beta)?,
    };
    transmission(&s, source, drain)
}

struct Quadrature<'a, F: Fn(f64) -> Result<f64>> {
    f: &'a F,
    abs_tol: f64,
    max_depth: usize,
}

impl<'a, F: Fn(f64) -> Result<f64>> Quadrature<'a, F> {
    /// Adaptive Simpson with Richardson error estimate per interval.
    fn integrate(&self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, tol: f64, depth: usize) -> Result<f64> {
        let m = 0.5 * (a + b);
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm)?;
        let frm = (self.f)(rm)?;
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let err = (left + right - whole) / 15.0;
        // The relative criterion caps refinement once the error estimate is
        // dominated by evaluation noise of the scattering solves, which
        // scales with the integrand like the local integral does; without it
        // the halving tolerance is never met and the tree degenerates.
        let converged =
            err.abs() <= tol || err.abs() <= 1e-10 * (left.abs() + right.abs());
        if converged || depth >= self.max_depth {
            if !converged && err.abs() > 1e4 * tol {
                return Err(RingError::Accuracy {
                    achieved: err.abs(),
                });
            }
            return Ok(left + right + err);
        }
        // Floor keeps the subdivided tolerance from dropping below the
        // integrand's evaluation-noise scale.
        let half = (0.5 * tol).max(1e-14);
        Ok(self.integrate(a, m, fa, flm, fm, half, depth + 1)?
            + self.integrate(m, b, fm, frm, fb, half, depth + 1)?)
    }

    fn run(&self, a: f64, b: f64) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let fa = (self.f)(a)?;
        let fm = (self.f)(0.5 * (a + b))?;
        let fb = (self.f)(b)?;
        self.integrate(a, b, fa, fm, fb, self.abs_tol, 0)
    }
}

/// Fermi-averaged conductance between two rays (dimensionless transmission
/// units). For tau > 0, adaptive quadrature of T(lambda) * w(lambda) over
/// mu +- 40 tau with panel splits at resonance spikes; for tau = 0, the
/// pointwise limit, using the resonance-separated evaluation when mu is an
/// eigenvalue.
pub fn averaged_conductance(
    domain: &RingDomain,
    beta: f64,
    mu: f64,
    tau: f64,
    source: usize,
    drain: usize,
    engine: Engine,
) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(RingError::InvalidArgument(format!(
            "chemical potential mu = {mu} must be positive"
        )));
    }
    if tau < 0.0 {
        return Err(RingError::InvalidArgument(format!(
            "temperature parameter tau = {tau} must be non-negative"
        )));
    }
    if beta == 0.0 {
        return Ok(0.0);
    }

    if tau == 0.0 {
        return transmission_limit(domain, beta, mu, source, drain, engine);
    }

    let lo = (mu - 40.0 * tau).max(1e-6);
    let hi = mu + 40.0 * tau;
    let spectrum = spectrum_below(domain, hi + 1.0)?;

    // Panel breakpoints: eigenvalues in the window and shells around them at
    // the resonance width scale ~ k beta^2.
    let width = (mu.sqrt() * beta * beta * 0.5).max(1e-9);
    let mut cuts = vec![lo, hi];
    for &ev in &spectrum {
        if ev > lo && ev < hi {
            cuts.push(ev);
            for shell in [1.0, 8.0, 64.0, 512.0] {
                for sign in [-1.0, 1.0] {
                    let x = ev + sign * shell * width;
                    if x > lo && x < hi {
                        cuts.push(x);
                    }
                }
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);

    let integrand = |lam: f64| -> Result<f64> {
        let t = transmission_at(domain, &spectrum, beta, lam, source, drain, engine)?;
        Ok(t * fermi_weight(lam, mu, tau)?)
    };
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let quad = Quadrature {
            f: &integrand,
            abs_tol: 1e-11 * ((w[1] - w[0]) / (hi - lo)).max(1e-3),
            max_depth: 40,
        };
        total += quad.run(w[0], w[1])?;
    }
    if !total.is_finite() {
        return Err(RingError::Accuracy { achieved: f64::NAN });
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Eigenvalues below `cap`; empty without solving when the whole spectrum
/// (bounded below by the minimum potential) lies above the cap.
fn spectrum_below(domain: &RingDomain, cap: f64) -> Result<Vec<f64>> {
    if cap <= domain.q_min() {
        return Ok(Vec::new());
    }
    Ok(piecewise_ring_eigendata(domain, cap)?.eigenvalues().to_vec())
}

fn transmission_limit(
    domain: &RingDomain,
    beta: f64,
    mu: f64,
    source: usize,
    drain: usize,
    engine: Engine,
) -> Result<f64> {
    let spectrum = spectrum_below(domain, mu + 1.0)?;
    let at_eigenvalue = spectrum
        .iter()
        .any(|&ev| (ev - mu).abs() < EIGENVALUE_MATCH_TOL);
    if at_eigenvalue {
        // Resonance-separated path; needs a deep spectral truncation for Q0.
        let cap = (mu + 1.0).max(4.0e4);
        let eig = piecewise_ring_eigendata(domain, cap)?;
        let res = resonance_data(domain, &eig, mu)?;
        let s = smatrix_at_resonance(&res, beta)?;
        transmission(&s, source, drain)
    } else {
        transmission_at(
            domain,
            &spectrum,
            beta,
            mu,
            source,
            drain,
            engine,
        )
    }
}

/// Paired open/closed switch configuration: identical geometry, different
/// ring potentials, operated at energy mu with thermal width tau.
#[derive(Clone, Debug)]
pub struct SwitchSpec {
    pub open_domain: RingDomain,
    pub closed_domain: RingDomain,
    pub beta: f64,
    pub mu: f64,
    pub tau: f64,
    pub source: usize,
    pub drain: usize,
}

impl SwitchSpec {
    pub fn validate(&self) -> Result<()> {
        let lo = &self.open_domain;
        let lc = &self.closed_domain;
        if (lo.circumference() - lc.circumference()).abs() > 1e-12 * lo.circumference() {
            return Err(RingError::InvalidArgument(
                "open and closed domains must share the circumference".into(),
            ));
        }
        if lo.attachments() != lc.attachments() {
            return Err(RingError::InvalidArgument(
                "open and closed domains must share the attachment points".into(),
            ));
        }
        if !(self.mu > 0.0) {
            return Err(RingError::InvalidArgument("mu must be positive".into()));
        }
        if self.tau < 0.0 {
            return Err(RingError::InvalidArgument("tau must be non-negative".into()));
        }
        let n = lo.n_leads();
        if self.source >= n || self.drain >= n || self.source == self.drain {
            return Err(RingError::InvalidArgument(
                "source/drain ray indices invalid".into(),
            ));
        }
        Ok(())
    }
}

/// Which nominal state transmits more.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransmittingState {
    Open,
    Closed,
    Equal,
}

/// Averaged conductances of the two switch states and their ratio.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConductanceReport {
    pub sigma_open: f64,
    pub sigma_closed: f64,
    /// sigma_closed / sigma_open; infinite if the open state is dark.
    pub ratio_closed_over_open: f64,
    /// The nominal labels are configuration names; this records which state
    /// actually transmits more.
    pub transmitting_state: TransmittingState,
    pub beta: f64,
    pub mu: f64,
    pub tau: f64,
    pub engine: Engine,
}

/// Compute both switch states and the contrast between them.
pub fn switch_report(spec: &SwitchSpec, engine: Engine) -> Result<ConductanceReport> {
    spec.validate()?;
    let sigma_open = averaged_conductance(
        &spec.open_domain,
        spec.beta,
        spec.mu,
        spec.tau,
        spec.source,
        spec.drain,
        engine,
    )?;
    let sigma_closed = averaged_conductance(
        &spec.closed_domain,
        spec.beta,
        spec.mu,
        spec.tau,
        spec.source,
        spec.drain,
        engine,
    )?;
    let ratio = if sigma_open > 0.0 {
        sigma_closed / sigma_open
    } else {
        f64::INFINITY
    };
    let transmitting_state = if (sigma_open - sigma_closed).abs()
        <= 1e-12 * sigma_open.max(sigma_closed)
    {
        TransmittingState::Equal
    } else if sigma_open > sigma_closed {
        TransmittingState::Open
    } else {
        TransmittingState::Closed
    };
    Ok(ConductanceReport {
        sigma_open,
        sigma_closed,
        ratio_closed_over_open: ratio,
        transmitting_state,
        beta: spec.beta,
        mu: spec.mu,
        tau: spec.tau,
        engine,
    })
}

/// Interference switch: rays a quarter turn apart on the unit-frequency
/// ring, states toggled by a uniform field q in {0, -3}, operated at the
/// doublet mu = 1. The nominal open/closed labels follow the source model;
/// the report records which state actually transmits.
pub fn interference_switch(beta: f64, tau: f64) -> SwitchSpec {
    let l = 2.0 * PI;
    let atts = vec![0.0, PI / 2.0];
    SwitchSpec {
        open_domain: RingDomain::uniform(l, 0.0, atts.clone()).unwrap(),
        closed_domain: RingDomain::uniform(l, -3.0, atts).unwrap(),
        beta,
        mu: 1.0,
        tau,
        source: 0,
        drain: 1,
    }
}

/// Potential-barrier switch: rays half a turn apart, closed state raised
/// uniformly to q = 3 above the operating energy mu = 1 (evanescent ring,
/// tunneling-limited).
pub fn barrier_switch(beta: f64, tau: f64) -> SwitchSpec {
    let l = 2.0 * PI;
    let atts = vec![0.0, PI];
    SwitchSpec {
        open_domain: RingDomain::uniform(l, 0.0, atts.clone()).unwrap(),
        closed_domain: RingDomain::uniform(l, 3.0, atts).unwrap(),
        beta,
        mu: 1.0,
        tau,
        source: 0,
        drain: 1,
    }
}
