//! Trichotomy classification of projective automorphisms and translation
//! lengths.

use nalgebra::DMatrix;

use crate::domain::ConvexDomain;
use crate::error::{Error, Result};
use crate::projective::{eigen_summary, log_spread_amplified, ProjPoint, ProjectiveMap};

/// Translation lengths below this snap to zero.
const LENGTH_FLOOR: f64 = 1e-9;
/// Modulus-ratio margin above 1 required to call a spectral gap open.
const PROXIMAL_GAP_MARGIN: f64 = 1e-9;
/// Imaginary parts at most this large (unit-norm representative) make an
/// eigenvalue a real fixed-point candidate.
const REAL_CANDIDATE_TOL: f64 = 1e-6;
/// Residual bound accepting a null-space vector as an eigenvector at all.
const FIXED_POINT_RESIDUAL: f64 = 1e-10;
/// Relative depth a fixed point must clear to count as interior. Defective
/// spectra shift computed eigenvectors of boundary fixed points inward by up
/// to ~eps^(1/p) ≈ 1e-4; a genuine elliptic center sits O(1) deep.
const FIXED_POINT_DEPTH: f64 = 1e-3;
/// Representatives this close to a scaled identity are elliptic outright.
const IDENTITY_TOL: f64 = 1e-12;
/// Relative boundary mismatch allowed for verified axis endpoints.
const AXIS_BOUNDARY_TOL: f64 = 1e-7;

/// Hilbert translation length `inf_x d(x, gx) = log(lambda_1/lambda_{n+1})/2`,
/// resolved by squaring amplification when the spectrum is too clustered for
/// the dense solver, and snapped to zero below `LENGTH_FLOOR`.
pub fn translation_length(g: &ProjectiveMap) -> f64 {
    let l = 0.5 * log_spread_amplified(g, 60);
    if l < LENGTH_FLOOR {
        0.0
    } else {
        l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementClass {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub class: ElementClass,
    /// Dominant eigenvalue simple, real, modulus-separated.
    pub proximal: bool,
    /// Proximal for the map and its inverse.
    pub biproximal: bool,
    /// Biproximal with axis endpoints at strongly extremal boundary points
    /// (decided by the domain-level strict-convexity flag).
    pub rank_one: bool,
    pub translation_length: f64,
}

/// Elliptic / parabolic / hyperbolic trichotomy with spectral flags.
pub fn classify(dom: &ConvexDomain, g: &ProjectiveMap) -> Result<Classification> {
    let l = translation_length(g);
    if l > 0.0 {
        let summary = eigen_summary(g)?;
        let top_gap = summary.top_gap();
        if top_gap <= 1.0 + PROXIMAL_GAP_MARGIN {
            return Err(Error::SpectralAmbiguity(format!(
                "translation length {l:.6} but top modulus ratio {top_gap:.12} \
                 cannot separate a dominant eigenvalue"
            )));
        }
        let proximal = summary.top_is_simple_real;
        let m = &summary.moduli;
        let bottom_gap = if m[m.len() - 1] == 0.0 {
            f64::INFINITY
        } else {
            m[m.len() - 2] / m[m.len() - 1]
        };
        let biproximal = proximal
            && summary.bottom_is_simple_real
            && bottom_gap > 1.0 + PROXIMAL_GAP_MARGIN;
        Ok(Classification {
            class: ElementClass::Hyperbolic,
            proximal,
            biproximal,
            rank_one: biproximal && dom.strictly_convex_c1(),
            translation_length: l,
        })
    } else {
        let class = if has_interior_fixed_point(dom, g) {
            ElementClass::Elliptic
        } else {
            ElementClass::Parabolic
        };
        Ok(Classification {
            class,
            proximal: false,
            biproximal: false,
            rank_one: false,
            translation_length: 0.0,
        })
    }
}

/// Fixed-point scan deciding elliptic (interior fixed point) against
/// parabolic (boundary fixed points only) for length-zero maps.
fn has_interior_fixed_point(dom: &ConvexDomain, g: &ProjectiveMap) -> bool {
    let m = g.matrix();
    let n = m.nrows();
    let scaled_id = DMatrix::<f64>::identity(n, n) / (n as f64).sqrt();
    if (m - &scaled_id).abs().max() < IDENTITY_TOL {
        return true;
    }

    let eig = m.complex_eigenvalues();
    let mut candidates: Vec<f64> = eig
        .iter()
        .filter(|z| z.im.abs() <= REAL_CANDIDATE_TOL)
        .map(|z| z.re)
        .collect();
    // the spectral mean is exact even when a fully clustered spectrum is
    // individually polluted by defectiveness
    candidates.push(m.trace() / n as f64);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    for lambda in candidates {
        let shifted = m - DMatrix::<f64>::identity(n, n) * lambda;
        let svd = shifted.svd(false, true);
        let v_t = match &svd.v_t {
            Some(v) => v,
            None => continue,
        };
        let mut arg = 0;
        for (i, s) in svd.singular_values.iter().enumerate() {
            if *s < svd.singular_values[arg] {
                arg = i;
            }
        }
        let v = v_t.row(arg).transpose();
        let mv = m * &v;
        let mu = v.dot(&mv);
        if (&mv - &v * mu).norm() > FIXED_POINT_RESIDUAL {
            continue;
        }
        let p = ProjPoint::from_homogeneous(v);
        if let Some(chart) = p.chart() {
            if chart.len() == dom.dim() && dom.gap(&chart) > FIXED_POINT_DEPTH * dom.extent() {
                return true;
            }
        }
    }
    false
}

/// Repelling and attracting boundary fixed points of a biproximal map,
/// verified against the domain boundary.
pub fn axis_endpoints(
    dom: &ConvexDomain,
    g: &ProjectiveMap,
) -> Result<(ProjPoint, ProjPoint)> {
    let cls = classify(dom, g)?;
    if !cls.biproximal {
        return Err(Error::NotBiproximal(format!(
            "class {:?}, proximal {}",
            cls.class, cls.proximal
        )));
    }
    let summary = eigen_summary(g)?;
    let attracting = summary.attracting.ok_or_else(|| {
        Error::NumericalFailure("dominant direction did not settle".into())
    })?;
    let repelling = summary.repelling.ok_or_else(|| {
        Error::NumericalFailure("inverse dominant direction did not settle".into())
    })?;
    for p in [&repelling, &attracting] {
        let chart = p
            .chart()
            .ok_or_else(|| Error::NumericalFailure("axis endpoint at infinity".into()))?;
        let gap = dom.gap(&chart);
        if gap.abs() > AXIS_BOUNDARY_TOL * dom.extent() {
            return Err(Error::NumericalFailure(format!(
                "axis endpoint misses the boundary, gap {gap:.3e}"
            )));
        }
    }
    Ok((repelling, attracting))
}
