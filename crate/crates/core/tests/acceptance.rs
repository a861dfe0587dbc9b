//! End-to-end acceptance suite. Each test checks one headline property of
//! the solver at its stated tolerance and prints a single pass line.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

use ring_scatter::domain::{piecewise_ring_eigendata, uniform_ring_eigendata, EigenData};
use ring_scatter::greens::green_direct;
use ring_scatter::qmatrix::{build_q, resonance_data};
use ring_scatter::scattering::{smatrix, smatrix_at_resonance};
use ring_scatter::transport::{averaged_conductance, barrier_switch, interference_switch, switch_report, Engine};
use ring_scatter::oracle::assemble_full_s;
use ring_scatter::{RingDomain, Segment};

fn shift_off_spectrum(mut lambda: f64, spectrum: &[f64], margin: f64) -> f64 {
    loop {
        let close = spectrum.iter().any(|&ev| (lambda - ev).abs() < margin);
        if !close {
            return lambda;
        }
        lambda += 2.0 * margin;
    }
}

#[test]
fn unitarity_suite() {
    let presets = [
        RingDomain::uniform(2.0 * PI, 0.0, vec![0.0, PI]).unwrap(),
        RingDomain::uniform(2.0 * PI, -3.0, vec![0.0, PI / 2.0]).unwrap(),
        RingDomain::uniform(2.0 * PI, 3.0, vec![0.0, PI]).unwrap(),
    ];
    let betas = [0.01, 0.1, 0.5, 1.0, 10.0];
    let mut worst = 0.0_f64;
    for dom in &presets {
        let q0 = dom.segments()[0].q;
        let e = uniform_ring_eigendata(dom.circumference(), q0, 1001, dom.attachments()).unwrap();
        for i in 0..200 {
            let lambda = shift_off_spectrum(0.11 + 0.1 * i as f64, e.eigenvalues(), 1e-4);
            let q = build_q(dom, &e, lambda).unwrap();
            for &beta in &betas {
                let s = smatrix(&q, beta).unwrap();
                worst = worst.max(s.unitarity_defect());
            }
        }
    }
    assert!(worst <= 1e-10, "worst unitarity defect {worst:.3e}");
    println!("acceptance unitarity_suite: pass (worst defect {worst:.3e})");
}

#[test]
fn oracle_equivalence() {
    let mut rng = StdRng::seed_from_u64(0x5ca77e2);
    let mut done = 0;
    let mut worst = 0.0_f64;
    while done < 50 {
        let l = rng.gen_range(4.0..8.0);
        let n_leads = rng.gen_range(1..=3usize);
        let mut atts: Vec<f64> = Vec::new();
        while atts.len() < n_leads {
            let a: f64 = rng.gen_range(0.0..l);
            if atts.iter().all(|&b| {
                let d = (a - b).abs();
                d.min(l - d) > 0.3
            }) {
                atts.push(a);
            }
        }
        atts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n_seg = rng.gen_range(1..=3usize);
        let mut breaks: Vec<f64> = (0..n_seg - 1).map(|_| rng.gen_range(0.5..l - 0.5)).collect();
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup_by(|a, b| (*a - *b).abs() < 0.2);
        let mut edges = vec![0.0];
        edges.extend(&breaks);
        edges.push(l);
        let segments: Vec<Segment> = edges
            .windows(2)
            .map(|w| Segment {
                start: w[0],
                end: w[1],
                q: rng.gen_range(-4.0..4.0),
            })
            .collect();
        let Ok(dom) = RingDomain::new(l, segments, atts) else {
            continue;
        };
        let lambda_raw: f64 = rng.gen_range(0.2..10.0);
        let cap = (lambda_raw + 1.0).max(dom.q_min() + 0.5);
        let Ok(e) = piecewise_ring_eigendata(&dom, cap) else {
            continue;
        };
        let lambda = shift_off_spectrum(lambda_raw, e.eigenvalues(), 1e-3);
        if lambda >= e.lambda_cap() {
            continue;
        }
        let beta = rng.gen_range(0.05..1.5);
        let via_q = match build_q(&dom, &e, lambda).and_then(|q| smatrix(&q, beta)) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let direct = match assemble_full_s(&dom, lambda, beta) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let diff = (&via_q.matrix - &direct.matrix).norm();
        assert!(
            diff <= 1e-8,
            "config {done}: |S_q - S_direct| = {diff:.3e} (lambda {lambda}, beta {beta})"
        );
        worst = worst.max(diff);
        done += 1;
    }
    println!("acceptance oracle_equivalence: pass (50 configs, worst {worst:.3e})");
}

#[test]
fn green_series_certified() {
    let mut rng = StdRng::seed_from_u64(0x9e1a);
    let mut worst_excess = f64::NEG_INFINITY;
    for i in 0..50 {
        let l = rng.gen_range(4.0..8.0);
        let q = rng.gen_range(-0.5..3.0);
        let a1: f64 = rng.gen_range(0.0..l / 2.0);
        let a2: f64 = rng.gen_range(l / 2.0 + 0.3..l - 0.1);
        let dom = RingDomain::uniform(l, q, vec![a1, a2]).unwrap();
        let e = uniform_ring_eigendata(l, q, 10_000, dom.attachments()).unwrap();
        let spectrum = e.eigenvalues().to_vec();
        let sg = ring_scatter::SpectralGreen::new(&dom, e).unwrap();
        let lambda = shift_off_spectrum(rng.gen_range(-3.0..6.0), &spectrum, 1e-3);
        let (si, ti) = if rng.gen::<bool>() { (0, 1) } else { (1, 1) };
        let series = sg.evaluate(lambda, si, ti, 1e-6).unwrap();
        let exact = green_direct(&dom, lambda, dom.attachments()[si], dom.attachments()[ti])
            .unwrap();
        let err = (series.value.value - exact.value).abs();
        assert!(
            err <= series.tail_bound + 1e-8,
            "point {i}: error {err:.3e} exceeds certified bound {:.3e} + 1e-8",
            series.tail_bound
        );
        worst_excess = worst_excess.max(err - series.tail_bound);
    }
    println!("acceptance green_series_certified: pass (50 points, worst err-bound {worst_excess:.3e})");
}

#[test]
fn pole_residue_extraction() {
    // Richardson extrapolation of (lambda0 - lambda)(Q - Q0) onto the
    // residue matrix for the free-ring doublet at lambda0 = 1.
    let lambda0 = 1.0;
    for atts in [vec![0.0, PI / 2.0], vec![0.0, PI]] {
        let dom = RingDomain::uniform(2.0 * PI, 0.0, atts).unwrap();
        let e = uniform_ring_eigendata(2.0 * PI, 0.0, 20_001, dom.attachments()).unwrap();
        let res = resonance_data(&dom, &e, lambda0).unwrap();
        let f = |delta: f64| -> DMatrix<f64> {
            let q = build_q(&dom, &e, lambda0 - delta).unwrap();
            (q.entries - &res.regular_part) * delta
        };
        let d = 4e-3;
        let extrap = f(d / 2.0) * 2.0 - f(d);
        let err = (&extrap - &res.pole_matrix).norm();
        assert!(err <= 1e-5, "residue extrapolation error {err:.3e}");
    }
    println!("acceptance pole_residue_extraction: pass");
}

#[test]
fn resonance_remainder_order() {
    // A simple resonance (constant mode of the q = 1 ring at lambda0 = 1)
    // leaves a nonzero regular part in the complementary channel, so the
    // remainder of the resonance-limit S-matrix shrinks like beta^2:
    // e(beta/2)/e(beta) near 1/4.
    let dom = RingDomain::uniform(2.0 * PI, 1.0, vec![0.0, PI]).unwrap();
    let e = uniform_ring_eigendata(2.0 * PI, 1.0, 20_001, dom.attachments()).unwrap();
    let res = resonance_data(&dom, &e, 1.0).unwrap();
    let n = dom.n_leads();
    let leading = DMatrix::from_fn(n, n, |i, j| {
        let p = res.projector[(i, j)];
        Complex64::new(2.0 * p - if i == j { 1.0 } else { 0.0 }, 0.0)
    });
    let e_of = |beta: f64| {
        let s = smatrix_at_resonance(&res, beta).unwrap();
        (&s.matrix - &leading).norm()
    };
    for beta in [0.2, 0.1, 0.05] {
        let ratio = e_of(beta / 2.0) / e_of(beta);
        assert!(
            (0.15..=0.4).contains(&ratio),
            "beta {beta}: remainder ratio {ratio}"
        );
    }
    println!("acceptance resonance_remainder_order: pass");
}

#[test]
fn full_rank_resonance_transparency() {
    // Single ray, free ring, resonance at lambda0 = 1: the resonant images
    // span all of C^1, so S(lambda0) = I for every coupling strength.
    let dom = RingDomain::uniform(2.0 * PI, 0.0, vec![0.0]).unwrap();
    let e = uniform_ring_eigendata(2.0 * PI, 0.0, 20_001, dom.attachments()).unwrap();
    let res = resonance_data(&dom, &e, 1.0).unwrap();
    assert_eq!(res.rank, dom.n_leads());
    for beta in [0.01, 0.1, 1.0, 10.0] {
        let s = smatrix_at_resonance(&res, beta).unwrap();
        let id = DMatrix::<Complex64>::identity(1, 1);
        let dev = (&s.matrix - id).norm();
        assert!(dev <= 1e-10, "beta {beta}: |S - I| = {dev:.3e}");
    }
    println!("acceptance full_rank_resonance_transparency: pass");
}

#[test]
fn basis_rotation_invariance() {
    // P0 and the residue matrix must not depend on which orthonormal basis
    // of the degenerate eigenspace is fed in, and the Gram-diagonalized
    // images must come out mutually orthogonal.
    let dom = RingDomain::uniform(2.0 * PI, 0.0, vec![0.0, PI / 2.0]).unwrap();
    let base = uniform_ring_eigendata(2.0 * PI, 0.0, 4001, dom.attachments()).unwrap();
    let reference = resonance_data(&dom, &base, 1.0).unwrap();
    let resonant: Vec<usize> = base
        .eigenvalues()
        .iter()
        .enumerate()
        .filter(|(_, &ev)| (ev - 1.0).abs() < 1e-9)
        .map(|(i, _)| i)
        .collect();
    assert_eq!(resonant.len(), 2);

    let mut rng = StdRng::seed_from_u64(0x0b0e);
    for trial in 0..20 {
        let theta = rng.gen_range(0.0..2.0 * PI);
        let reflect = rng.gen::<bool>();
        let (c, s) = (theta.cos(), theta.sin());
        let rot = if reflect {
            Matrix2::new(c, s, s, -c)
        } else {
            Matrix2::new(c, -s, s, c)
        };
        let mut values = base.values().clone();
        for col in 0..dom.n_leads() {
            let a = base.values()[(resonant[0], col)];
            let b = base.values()[(resonant[1], col)];
            values[(resonant[0], col)] = rot[(0, 0)] * a + rot[(0, 1)] * b;
            values[(resonant[1], col)] = rot[(1, 0)] * a + rot[(1, 1)] * b;
        }
        let rotated = EigenData::from_parts(
            base.eigenvalues().to_vec(),
            values,
            base.lambda_cap(),
        );
        let res = resonance_data(&dom, &rotated, 1.0).unwrap();
        let dp = (&res.projector - &reference.projector).norm();
        let dd = (&res.pole_matrix - &reference.pole_matrix).norm();
        assert!(dp <= 1e-10, "trial {trial}: projector drift {dp:.3e}");
        assert!(dd <= 1e-10, "trial {trial}: residue drift {dd:.3e}");
        for i in 0..res.rank {
            for j in i + 1..res.rank {
                let dot = res.images.column(i).dot(&res.images.column(j)).abs();
                assert!(dot <= 1e-10, "trial {trial}: image overlap {dot:.3e}");
            }
        }
    }
    println!("acceptance basis_rotation_invariance: pass");
}

#[test]
fn interference_switch_contrast() {
    let report = switch_report(&interference_switch(0.1, 1e-3), Engine::QMatrix).unwrap();
    let bright = report.sigma_open.max(report.sigma_closed);
    let dark = report.sigma_open.min(report.sigma_closed);
    assert!(bright >= 0.9, "transmitting-state conductance {bright}");
    assert!(dark <= 1e-3, "reflecting-state conductance {dark}");
    println!(
        "acceptance interference_switch_contrast: pass (bright {bright:.4}, dark {dark:.3e})"
    );
}

#[test]
fn tunneling_bound_order() {
    // Barrier switch at beta = 1: conductance ratio extrapolated tau -> 0,
    // compared against the tunneling-limited contrast e^(2 kappa pi) scale
    // (~4.6e3 for kappa = sqrt(2)).
    let mut ratios = Vec::new();
    let taus = [1e-2, 1e-3, 1e-4];
    for &tau in &taus {
        let r = switch_report(&barrier_switch(1.0, tau), Engine::QMatrix).unwrap();
        let bright = r.sigma_open.max(r.sigma_closed);
        let dark = r.sigma_open.min(r.sigma_closed);
        ratios.push(bright / dark);
    }
    // Linear-in-tau extrapolation from the two smallest temperatures.
    let extrap = ratios[2] + (ratios[2] - ratios[1]) * taus[2] / (taus[1] - taus[2]);
    let reference = 4.57e3;
    let factor = (extrap / reference).max(reference / extrap);
    println!(
        "acceptance tunneling_bound_order: ratios {:?} -> extrapolated {extrap:.3e}, \
         reference {reference:.2e} (within factor {factor:.2})",
        ratios
    );
    assert!(
        (1e3..=1e4).contains(&extrap),
        "extrapolated contrast {extrap:.3e} outside 1e3..1e4"
    );
    assert!(factor <= 5.0, "contrast off reference by factor {factor:.2}");
    println!("acceptance tunneling_bound_order: pass");
}

#[test]
fn weak_coupling_decoupling() {
    let dom = RingDomain::uniform(2.0 * PI, 0.0, vec![0.0, PI]).unwrap();
    let at_zero = averaged_conductance(&dom, 0.0, 2.0, 1e-2, 0, 1, Engine::QMatrix).unwrap();
    assert_eq!(at_zero, 0.0, "beta = 0 must give exactly zero conductance");
    let tiny = averaged_conductance(&dom, 1e-4, 2.0, 1e-2, 0, 1, Engine::QMatrix).unwrap();
    assert!(tiny <= 1e-6, "beta = 1e-4 conductance {tiny:.3e}");
    println!("acceptance weak_coupling_decoupling: pass (sigma(1e-4) = {tiny:.3e})");
}
