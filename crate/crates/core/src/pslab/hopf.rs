//! Hopf coordinates on the space of parametrized geodesics and the
//! Bowen-Margulis-Sullivan density factor.

use nalgebra::DVector;

use crate::domain::ConvexDomain;
use crate::error::{Error, Result};
use crate::geometry::{busemann, chord_between, gromov_product, ChordPoint};

/// Tolerance on detecting coincident endpoint directions.
const ENDPOINT_COINCIDENCE: f64 = 1e-9;

/// A parametrized geodesic in Hopf coordinates: backward endpoint, forward
/// endpoint, and the time `t` fixed by `beta_eta(o, footpoint) = t`.
#[derive(Debug, Clone)]
pub struct HopfVector {
    pub xi_minus: DVector<f64>,
    pub eta_plus: DVector<f64>,
    pub t: f64,
    /// Reference point `o` entering the time normalization.
    pub basepoint: DVector<f64>,
}

fn endpoints_distinct(dom: &ConvexDomain, v: &HopfVector) -> Result<()> {
    if (&v.xi_minus - &v.eta_plus).norm() < ENDPOINT_COINCIDENCE * dom.extent() {
        return Err(Error::DegenerateChord(
            "Hopf endpoints coincide".into(),
        ));
    }
    Ok(())
}

/// The point the Hopf vector stands at: the unique `p` on the chord
/// `(xi_minus, eta_plus)` with `beta_{eta_plus}(o, p) = t`.
pub fn hopf_footpoint(dom: &ConvexDomain, v: &HopfVector) -> Result<ChordPoint> {
    endpoints_distinct(dom, v)?;
    let chord = chord_between(dom, &v.xi_minus, &v.eta_plus)?;
    let origin = chord.point_at(0.0);
    let b0 = busemann(dom, &v.eta_plus, &v.basepoint, &origin)?;
    // moving forward by s adds s to the horofunction value at eta_plus
    Ok(chord.chord_point(dom, v.t - b0.value))
}

/// Time reversal: swaps the endpoints and re-times so the footpoint is
/// fixed, using `beta_xi(o, p) + beta_eta(o, p) = 2 <xi, eta>_o` on the
/// chord.
pub fn hopf_flip(dom: &ConvexDomain, v: &HopfVector) -> Result<HopfVector> {
    endpoints_distinct(dom, v)?;
    let gp = gromov_product(dom, &v.basepoint, &v.xi_minus, &v.eta_plus)?;
    Ok(HopfVector {
        xi_minus: v.eta_plus.clone(),
        eta_plus: v.xi_minus.clone(),
        t: 2.0 * gp - v.t,
        basepoint: v.basepoint.clone(),
    })
}

/// Bowen-Margulis-Sullivan density factor `e^{2 delta <xi, eta>_o}` pairing
/// two boundary measures into a flow-invariant measure on Hopf coordinates.
pub fn sullivan_density(dom: &ConvexDomain, v: &HopfVector, delta: f64) -> Result<f64> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Config(format!(
            "density needs a positive finite exponent, got {delta}"
        )));
    }
    endpoints_distinct(dom, v)?;
    let gp = gromov_product(dom, &v.basepoint, &v.xi_minus, &v.eta_plus)?;
    Ok((2.0 * delta * gp).exp())
}

/// Ratio of the density assembled at basepoint `y` (with its conformally
/// rescaled boundary measures) to the density at the vector's own
/// basepoint. Invariance of the Bowen-Margulis-Sullivan construction makes
/// this identically 1.
pub fn basepoint_change_ratio(
    dom: &ConvexDomain,
    v: &HopfVector,
    y: &DVector<f64>,
    delta: f64,
) -> Result<f64> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Config(format!(
            "density needs a positive finite exponent, got {delta}"
        )));
    }
    endpoints_distinct(dom, v)?;
    let x = &v.basepoint;
    let gp_x = gromov_product(dom, x, &v.xi_minus, &v.eta_plus)?;
    let gp_y = gromov_product(dom, y, &v.xi_minus, &v.eta_plus)?;
    let b_xi = busemann(dom, &v.xi_minus, y, x)?.value;
    let b_eta = busemann(dom, &v.eta_plus, y, x)?.value;
    Ok((delta * (2.0 * gp_y - b_xi - b_eta - 2.0 * gp_x)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::hilbert_distance;

    const FOOT_TOL: f64 = 1e-6;

    fn disk_vector(theta1: f64, theta2: f64, t: f64) -> (ConvexDomain, HopfVector) {
        let dom = ConvexDomain::unit_ball(2);
        let v = HopfVector {
            xi_minus: DVector::from_vec(vec![theta1.cos(), theta1.sin()]),
            eta_plus: DVector::from_vec(vec![theta2.cos(), theta2.sin()]),
            t,
            basepoint: DVector::from_vec(vec![0.05, -0.1]),
        };
        (dom, v)
    }

    #[test]
    fn footpoint_satisfies_the_time_normalization() {
        let (dom, v) = disk_vector(0.3, 2.5, 0.7);
        let p = hopf_footpoint(&dom, &v).unwrap();
        let b = busemann(&dom, &v.eta_plus, &v.basepoint, &p.point).unwrap();
        assert!((b.value - v.t).abs() < FOOT_TOL, "beta {} vs t {}", b.value, v.t);
    }

    #[test]
    fn flip_fixes_the_footpoint_and_is_an_involution() {
        let (dom, v) = disk_vector(-0.4, 1.9, -0.35);
        let w = hopf_flip(&dom, &v).unwrap();
        let p = hopf_footpoint(&dom, &v).unwrap();
        let q = hopf_footpoint(&dom, &w).unwrap();
        let gap = hilbert_distance(&dom, &p.point, &q.point).unwrap();
        assert!(gap < FOOT_TOL, "footpoint moved by {gap}");
        let vv = hopf_flip(&dom, &w).unwrap();
        assert!((vv.t - v.t).abs() < FOOT_TOL);
        assert_eq!(vv.xi_minus, v.xi_minus);
    }

    #[test]
    fn density_is_one_on_chords_through_the_basepoint() {
        let dom = ConvexDomain::unit_ball(2);
        let v = HopfVector {
            xi_minus: DVector::from_vec(vec![1.0, 0.0]),
            eta_plus: DVector::from_vec(vec![-1.0, 0.0]),
            t: 0.4,
            basepoint: DVector::zeros(2),
        };
        let d = sullivan_density(&dom, &v, 0.9).unwrap();
        assert!((d - 1.0).abs() < 1e-6, "density {d}");
    }

    #[test]
    fn density_grows_with_the_gromov_product() {
        // nearly aligned endpoints are far from a chord through the
        // basepoint, so the product and the density blow up
        let (dom, near) = disk_vector(0.3, 0.5, 0.0);
        let (_, wide) = disk_vector(0.3, 3.0, 0.0);
        let dn = sullivan_density(&dom, &near, 1.0).unwrap();
        let dw = sullivan_density(&dom, &wide, 1.0).unwrap();
        assert!(dn > 4.0 * dw, "near {dn} wide {dw}");
    }

    #[test]
    fn basepoint_change_cancels_exactly() {
        let (dom, v) = disk_vector(0.9, -2.0, 0.25);
        let y = DVector::from_vec(vec![-0.3, 0.22]);
        let r = basepoint_change_ratio(&dom, &v, &y, 0.85).unwrap();
        assert!((r - 1.0).abs() < 1e-6, "ratio {r}");
    }

    #[test]
    fn degenerate_and_invalid_inputs_are_rejected() {
        let dom = ConvexDomain::unit_ball(2);
        let v = HopfVector {
            xi_minus: DVector::from_vec(vec![1.0, 0.0]),
            eta_plus: DVector::from_vec(vec![1.0, 0.0]),
            t: 0.0,
            basepoint: DVector::zeros(2),
        };
        assert!(matches!(
            sullivan_density(&dom, &v, 1.0),
            Err(Error::DegenerateChord(_))
        ));
        let (dom2, good) = disk_vector(0.1, 2.0, 0.0);
        assert!(matches!(
            sullivan_density(&dom2, &good, 0.0),
            Err(Error::Config(_))
        ));
    }
}
