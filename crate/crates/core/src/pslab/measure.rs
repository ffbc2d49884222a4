//! Orbital Patterson-Sullivan measures at supercritical parameters, with
//! conformality and equivariance audits.

use std::collections::HashMap;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{busemann, chord_through, distance_to_chord_point, hilbert_distance, ChordPoint};
use crate::group::orbit::DefectTransport;
use crate::group::words::free_reduce;
use crate::group::{GroupScenario, OrbitBall};

/// Atoms deeper than `radius - margin` may sit near the enumeration cutoff
/// where shells are incomplete; audits that extrapolate to the boundary
/// restrict to the interior band.
pub const INTERIOR_MARGIN: f64 = 2.0;
/// Relative tolerance for the horofunction form of the conformal derivative
/// at finite (far but interior) atoms.
pub const FAR_ATOM_REL_TOL: f64 = 5e-2;
/// Supercritical approach schedule: delta * (1 + 0.1 * 2^-k), k = 0..=5.
const SCHEDULE_STEPS: u32 = 5;

/// One weighted orbit point of an orbital measure.
#[derive(Debug, Clone)]
pub struct Atom {
    /// Affine-chart position of the orbit point.
    pub point: DVector<f64>,
    pub weight: f64,
    /// Depth `d(o, gamma o)` of the support point.
    pub distance: f64,
    /// Depth clears the cutoff band: `distance < radius - INTERIOR_MARGIN`.
    pub interior: bool,
}

/// A finite orbital measure `sum_gamma e^{-s d(gamma o, x)} / Z delta_{gamma o}`
/// with the normalizer `Z = sum_gamma e^{-s d(gamma o, o)}` fixed at the
/// scenario basepoint, so measures at different viewpoints share one scale.
///
/// Atoms are index-aligned with the elements of the ball that built them.
#[derive(Debug, Clone)]
pub struct AtomicMeasure {
    pub atoms: Vec<Atom>,
    pub total_mass: f64,
    pub label: String,
    /// Series parameter; must exceed the critical exponent.
    pub s: f64,
    /// The point the weights are conformal about.
    pub viewpoint: DVector<f64>,
}

/// Hilbert distances from `x` to every orbit point of the ball, carrying the
/// image defects analytically when the domain supports it.
fn orbit_distances(
    s: &GroupScenario,
    ball: &OrbitBall,
    x: &DVector<f64>,
) -> Result<Vec<f64>> {
    let dom = &s.domain;
    let transport = DefectTransport::new(dom, &s.basepoint);
    let mut out = Vec::with_capacity(ball.len());
    for e in &ball.elements {
        let d = match &transport {
            Some(t) => {
                let (img, gap) = t.image_and_gap(&e.map);
                let cp = ChordPoint {
                    point: img,
                    defect: gap,
                    t: 0.0,
                };
                distance_to_chord_point(dom, x, &cp)?
            }
            None => hilbert_distance(dom, x, &e.image)?,
        };
        out.push(d);
    }
    Ok(out)
}

/// Builds the orbital measure of the ball seen from `x` at parameter `s`.
///
/// `s` must exceed `delta_hat`; weights are normalized by the basepoint
/// partition sum, so the measure from the basepoint itself has mass 1.
pub fn ps_density(
    scen: &GroupScenario,
    ball: &OrbitBall,
    x: &DVector<f64>,
    s: f64,
    delta_hat: f64,
) -> Result<AtomicMeasure> {
    if !s.is_finite() || s <= delta_hat {
        return Err(Error::SubcriticalParameter(format!(
            "parameter {s} does not exceed the exponent estimate {delta_hat}"
        )));
    }
    if !scen.domain.contains(x) {
        return Err(Error::OutsideDomain(format!(
            "viewpoint has gap {:.3e}",
            scen.domain.gap(x)
        )));
    }
    let z: f64 = ball.elements.iter().map(|e| (-s * e.distance).exp()).sum();
    if !(z > 0.0) {
        return Err(Error::InsufficientData(
            "empty or fully damped orbit ball".into(),
        ));
    }
    let at_basepoint = x == &scen.basepoint;
    let distances = if at_basepoint {
        ball.elements.iter().map(|e| e.distance).collect()
    } else {
        orbit_distances(scen, ball, x)?
    };
    let mut atoms = Vec::with_capacity(ball.len());
    let mut total_mass = 0.0;
    for (e, &d) in ball.elements.iter().zip(&distances) {
        let weight = (-s * d).exp() / z;
        total_mass += weight;
        atoms.push(Atom {
            point: e.image.clone(),
            weight,
            distance: e.distance,
            interior: e.distance < ball.radius - INTERIOR_MARGIN,
        });
    }
    Ok(AtomicMeasure {
        atoms,
        total_mass,
        label: format!("ps[s={s:.6}] r<={:.3}", ball.radius),
        s,
        viewpoint: x.clone(),
    })
}

/// Conformal-derivative audit between two viewpoints.
#[derive(Debug, Clone)]
pub struct ConformalityReport {
    /// Atoms entering the exact cocycle check.
    pub checked: usize,
    /// Max `| w'(a)/w(a) - e^{-s (d(a,x') - d(a,x))} |` over all atoms; this
    /// is an identity up to distance round-off and should be near zero.
    pub max_identity_residual: f64,
    /// Deep interior atoms entering the horofunction comparison.
    pub far_checked: usize,
    /// Max relative gap between the weight ratio and `e^{-s beta_xi(x', x)}`
    /// at the boundary direction of each far atom.
    pub max_far_relative_error: f64,
}

/// Audits `d mu_{x2} / d mu_x` against the conformal law: exactly the
/// distance cocycle at every atom, and approximately `e^{-s beta}` in the
/// boundary direction of the `n_far` deepest interior atoms.
pub fn conformality_audit(
    scen: &GroupScenario,
    ball: &OrbitBall,
    x: &DVector<f64>,
    x2: &DVector<f64>,
    s: f64,
    delta_hat: f64,
    n_far: usize,
) -> Result<ConformalityReport> {
    let mu = ps_density(scen, ball, x, s, delta_hat)?;
    let mu2 = ps_density(scen, ball, x2, s, delta_hat)?;
    let dom = &scen.domain;
    let d_x = orbit_distances(scen, ball, x)?;
    let d_x2 = orbit_distances(scen, ball, x2)?;

    let mut max_identity_residual = 0.0f64;
    for i in 0..ball.len() {
        let ratio = mu2.atoms[i].weight / mu.atoms[i].weight;
        let expected = (-s * (d_x2[i] - d_x[i])).exp();
        max_identity_residual = max_identity_residual.max((ratio - expected).abs());
    }

    // deepest interior atoms approximate boundary directions
    let mut order: Vec<usize> = (0..ball.len())
        .filter(|&i| mu.atoms[i].interior && mu.atoms[i].distance > 0.0)
        .collect();
    order.sort_by(|&a, &b| {
        mu.atoms[b]
            .distance
            .partial_cmp(&mu.atoms[a].distance)
            .unwrap()
    });
    order.truncate(n_far);
    let mut max_far_relative_error = 0.0f64;
    let mut far_checked = 0usize;
    for &i in &order {
        let dir = &mu.atoms[i].point - &scen.basepoint;
        if dir.norm() < 1e-12 * dom.extent() {
            continue;
        }
        let chord = chord_through(dom, &scen.basepoint, &dir)?;
        let xi = chord.forward_endpoint().clone();
        let beta = busemann(dom, &xi, x2, x)?;
        let ratio = mu2.atoms[i].weight / mu.atoms[i].weight;
        let expected = (-s * beta.value).exp();
        let rel = (ratio - expected).abs() / expected.abs().max(f64::MIN_POSITIVE);
        max_far_relative_error = max_far_relative_error.max(rel);
        far_checked += 1;
    }
    if far_checked == 0 {
        return Err(Error::InsufficientData(
            "no interior atoms available for the far-field check".into(),
        ));
    }
    Ok(ConformalityReport {
        checked: ball.len(),
        max_identity_residual,
        far_checked,
        max_far_relative_error,
    })
}

/// Group-equivariance audit under one generator.
#[derive(Debug, Clone)]
pub struct EquivarianceReport {
    /// Atom pairs `(gamma w, w)` found in the ball.
    pub matched: usize,
    /// Max `| mu_{gamma x}(gamma w o) / mu_x(w o) - 1 |` over matched pairs.
    pub max_ratio_error: f64,
}

/// Audits `gamma_* mu_x = mu_{gamma x}` atom by atom: for every element `w`
/// whose left translate `gamma w` also lies in the ball, the weight of
/// `gamma w o` seen from `gamma x` must equal the weight of `w o` seen from
/// `x` (both distances are computed independently, so this exercises the
/// isometry numerically).
pub fn equivariance_audit(
    scen: &GroupScenario,
    ball: &OrbitBall,
    x: &DVector<f64>,
    s: f64,
    delta_hat: f64,
    letter: i32,
) -> Result<EquivarianceReport> {
    let mu_x = ps_density(scen, ball, x, s, delta_hat)?;
    let gx = scen.letter_map(letter).apply_chart(x);
    let mu_gx = ps_density(scen, ball, &gx, s, delta_hat)?;

    let index: HashMap<&[i32], usize> = ball
        .elements
        .iter()
        .enumerate()
        .map(|(i, e)| (e.word(), i))
        .collect();
    let mut matched = 0usize;
    let mut max_ratio_error = 0.0f64;
    for (i, e) in ball.elements.iter().enumerate() {
        let w = e.word();
        let mut lw = Vec::with_capacity(w.len() + 1);
        lw.push(letter);
        lw.extend_from_slice(w);
        let lw = free_reduce(&lw);
        let Some(&j) = index.get(lw.as_slice()) else {
            continue;
        };
        let ratio = mu_gx.atoms[j].weight / mu_x.atoms[i].weight;
        max_ratio_error = max_ratio_error.max((ratio - 1.0).abs());
        matched += 1;
    }
    if matched == 0 {
        return Err(Error::InsufficientData(
            "no translate pairs inside the ball".into(),
        ));
    }
    Ok(EquivarianceReport {
        matched,
        max_ratio_error,
    })
}

/// Descending schedule of supercritical parameters approaching `delta_hat`:
/// `delta * (1 + 0.1 * 2^-k)` for `k = 0..=5`.
pub fn supercritical_schedule(delta_hat: f64) -> Result<Vec<f64>> {
    if !(delta_hat > 0.0) || !delta_hat.is_finite() {
        return Err(Error::Config(format!(
            "schedule needs a positive finite exponent, got {delta_hat}"
        )));
    }
    Ok((0..=SCHEDULE_STEPS)
        .map(|k| delta_hat * (1.0 + 0.1 * 0.5f64.powi(k as i32)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{orbit_ball, preset, DEFAULT_ELEMENT_BUDGET};
    use crate::pslab::exponent::exponent_from_ball;

    fn fixture() -> (GroupScenario, OrbitBall, f64) {
        let s = preset("schottky-2").unwrap();
        let ball = orbit_ball(&s, 10.0, DEFAULT_ELEMENT_BUDGET).unwrap();
        let delta = exponent_from_ball(&ball).unwrap().delta_hat;
        (s, ball, delta)
    }

    #[test]
    fn basepoint_measure_has_unit_mass() {
        let (s, ball, delta) = fixture();
        let mu = ps_density(&s, &ball, &s.basepoint, delta * 1.1, delta).unwrap();
        assert!((mu.total_mass - 1.0).abs() < 1e-12, "{}", mu.total_mass);
        assert_eq!(mu.atoms.len(), ball.len());
    }

    #[test]
    fn subcritical_parameter_rejected() {
        let (s, ball, delta) = fixture();
        assert!(matches!(
            ps_density(&s, &ball, &s.basepoint, delta, delta),
            Err(Error::SubcriticalParameter(_))
        ));
        assert!(matches!(
            ps_density(&s, &ball, &s.basepoint, 0.5 * delta, delta),
            Err(Error::SubcriticalParameter(_))
        ));
    }

    #[test]
    fn weights_are_deterministic_across_fresh_enumerations() {
        let s = preset("schottky-2").unwrap();
        let b1 = orbit_ball(&s, 9.0, DEFAULT_ELEMENT_BUDGET).unwrap();
        let b2 = orbit_ball(&s, 9.0, DEFAULT_ELEMENT_BUDGET).unwrap();
        let delta = exponent_from_ball(&b1).unwrap().delta_hat;
        let x = DVector::from_vec(vec![0.21, -0.1]);
        let m1 = ps_density(&s, &b1, &x, delta * 1.05, delta).unwrap();
        let m2 = ps_density(&s, &b2, &x, delta * 1.05, delta).unwrap();
        assert_eq!(m1.atoms.len(), m2.atoms.len());
        for (a, b) in m1.atoms.iter().zip(&m2.atoms) {
            assert_eq!(a.weight.to_bits(), b.weight.to_bits());
        }
        assert_eq!(m1.total_mass.to_bits(), m2.total_mass.to_bits());
    }

    #[test]
    fn conformality_identity_and_far_field() {
        let (s, ball, delta) = fixture();
        let x = DVector::from_vec(vec![0.15, 0.05]);
        let x2 = DVector::from_vec(vec![-0.2, 0.1]);
        let rep =
            conformality_audit(&s, &ball, &x, &x2, delta * 1.05, delta, 64).unwrap();
        assert_eq!(rep.checked, ball.len());
        assert!(
            rep.max_identity_residual < 1e-9,
            "identity residual {}",
            rep.max_identity_residual
        );
        assert!(rep.far_checked >= 32, "far checked {}", rep.far_checked);
        assert!(
            rep.max_far_relative_error < FAR_ATOM_REL_TOL,
            "far error {}",
            rep.max_far_relative_error
        );
    }

    #[test]
    fn equivariance_holds_atomwise() {
        let (s, ball, delta) = fixture();
        let x = DVector::from_vec(vec![0.1, -0.15]);
        let rep = equivariance_audit(&s, &ball, &x, delta * 1.05, delta, 1).unwrap();
        assert!(rep.matched > ball.len() / 4, "matched {}", rep.matched);
        assert!(
            rep.max_ratio_error < 1e-8,
            "ratio error {}",
            rep.max_ratio_error
        );
    }

    #[test]
    fn schedule_descends_toward_the_exponent() {
        let sched = supercritical_schedule(0.8).unwrap();
        assert_eq!(sched.len(), 6);
        for w in sched.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(sched.iter().all(|&v| v > 0.8));
        assert!((sched[0] - 0.88).abs() < 1e-12);
        assert!(matches!(
            supercritical_schedule(0.0),
            Err(Error::Config(_))
        ));
    }
}
