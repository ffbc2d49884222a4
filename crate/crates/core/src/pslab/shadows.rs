//! Shadow-mass comparisons for orbital measures and the horofunction
//! sandwich audit on shadow directions.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    busemann_at_depths, chord_through, ray_passes_within, shadow_contains, Shadow,
    BUSEMANN_TS,
};
use crate::group::{GroupScenario, OrbitBall};

use super::measure::AtomicMeasure;

/// Additive slack on horofunction comparisons beyond the extrapolation's own
/// declared error: distance round-off at band-depth anchor points.
pub const SANDWICH_NUMERIC_FLOOR: f64 = 1e-6;
/// Default number of shadows audited per run.
pub const DEFAULT_SHADOW_SAMPLE: usize = 48;

/// Shadow mass at one orbit point.
#[derive(Debug, Clone)]
pub struct ShadowRow {
    /// Element index in the enumerated ball.
    pub index: usize,
    pub word: Vec<i32>,
    /// Depth `d(o, gamma o)` of the shadow anchor.
    pub distance: f64,
    /// Measure mass captured by the shadow around this anchor.
    pub mass: f64,
    /// `mass * e^{delta_hat * distance}`; the shadow-lemma statement is that
    /// this stays in a depth-independent band.
    pub normalized: f64,
}

/// Normalized shadow masses over a depth band.
#[derive(Debug, Clone)]
pub struct ShadowRatioReport {
    pub rows: Vec<ShadowRow>,
    pub shadow_radius: f64,
    /// Depth band `[lo, hi]` of the audited anchors.
    pub band: (f64, f64),
    pub min_normalized: f64,
    pub max_normalized: f64,
    /// Audited shadows that captured no atom at all.
    pub zero_mass_shadows: usize,
}

impl ShadowRatioReport {
    /// Multiplicative spread of the non-zero normalized masses.
    pub fn spread(&self) -> f64 {
        self.max_normalized / self.min_normalized
    }
}

/// Indices of ball elements with depth in `[band.0, band.1]`, thinned by a
/// deterministic stride to at most `max_audited` entries.
fn band_subsample(ball: &OrbitBall, band: (f64, f64), max_audited: usize) -> Vec<usize> {
    let hits: Vec<usize> = ball
        .elements
        .iter()
        .enumerate()
        .filter(|(_, e)| e.distance >= band.0 && e.distance <= band.1)
        .map(|(i, _)| i)
        .collect();
    if hits.len() <= max_audited {
        return hits;
    }
    let stride = hits.len().div_ceil(max_audited);
    hits.into_iter().step_by(stride).collect()
}

/// Measures `mu(O_r(o, gamma o)) e^{delta_hat d(o, gamma o)}` over a band of
/// anchors. The shadow-lemma prediction is a bounded spread of these values.
///
/// `mu` must be the basepoint measure of exactly this ball (atoms aligned
/// index-for-index). Membership of an atom is decided by its own ray from
/// the basepoint passing within `r` of the anchor.
pub fn shadow_lemma_audit(
    scen: &GroupScenario,
    ball: &OrbitBall,
    mu: &AtomicMeasure,
    delta_hat: f64,
    r: f64,
    band: (f64, f64),
    max_audited: usize,
) -> Result<ShadowRatioReport> {
    if mu.atoms.len() != ball.len() {
        return Err(Error::Config(format!(
            "measure has {} atoms but the ball has {} elements",
            mu.atoms.len(),
            ball.len()
        )));
    }
    if mu.viewpoint != scen.basepoint {
        return Err(Error::Config(
            "shadow audit needs the basepoint measure".into(),
        ));
    }
    if !(r > 0.0) {
        return Err(Error::Config(format!("shadow radius must be positive, got {r}")));
    }
    if !(band.0 <= band.1) || band.0 < 0.0 {
        return Err(Error::Config(format!("bad depth band [{}, {}]", band.0, band.1)));
    }
    let picked = band_subsample(ball, band, max_audited);
    if picked.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no ball elements in depth band [{}, {}]",
            band.0, band.1
        )));
    }
    let dom = &scen.domain;
    let o = &scen.basepoint;
    // each atom's ray from the basepoint, shared across all audited shadows
    let atom_chords = mu
        .atoms
        .iter()
        .map(|a| {
            let dir = &a.point - o;
            if dir.norm() < 1e-12 * dom.extent() {
                Ok(None) // the identity atom has no direction
            } else {
                chord_through(dom, o, &dir).map(Some)
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let rows = picked
        .par_iter()
        .map(|&i| -> Result<ShadowRow> {
            let anchor = &ball.elements[i];
            let mut mass = 0.0;
            for (a, chord) in mu.atoms.iter().zip(&atom_chords) {
                let Some(chord) = chord else { continue };
                if ray_passes_within(dom, &anchor.image, anchor.distance, chord, r)? {
                    mass += a.weight;
                }
            }
            Ok(ShadowRow {
                index: i,
                word: anchor.word().to_vec(),
                distance: anchor.distance,
                mass,
                normalized: mass * (delta_hat * anchor.distance).exp(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let zero_mass_shadows = rows.iter().filter(|r| r.mass == 0.0).count();
    let nonzero: Vec<f64> = rows
        .iter()
        .filter(|r| r.mass > 0.0)
        .map(|r| r.normalized)
        .collect();
    if nonzero.is_empty() {
        return Err(Error::InsufficientData(
            "every audited shadow captured zero mass".into(),
        ));
    }
    let min_normalized = nonzero.iter().copied().fold(f64::INFINITY, f64::min);
    let max_normalized = nonzero.iter().copied().fold(0.0f64, f64::max);
    Ok(ShadowRatioReport {
        rows,
        shadow_radius: r,
        band,
        min_normalized,
        max_normalized,
        zero_mass_shadows,
    })
}

/// Horofunction sandwich over shadow directions.
#[derive(Debug, Clone)]
pub struct SandwichReport {
    pub checked_shadows: usize,
    pub checked_samples: usize,
    /// Samples breaking either inequality beyond declared error bounds.
    pub violations: usize,
    /// Max of `beta_xi(o, gamma o) - d(o, gamma o)` over samples (the upper
    /// bound allows only declared numeric error above zero).
    pub max_upper_excess: f64,
    /// Min of `beta_xi(o, gamma o) - (d(o, gamma o) - 2r)` over samples
    /// (positive with margin when samples sit strictly inside the shadow).
    pub min_lower_margin: f64,
}

/// Checks `d(o, gamma o) - 2r <= beta_xi(o, gamma o) <= d(o, gamma o)` for
/// boundary directions `xi` inside each audited shadow `O_r(o, gamma o)`.
///
/// Directions are taken from deeper ball elements extending the anchor word
/// (their rays land inside the shadow for ping-pong scenarios) and verified
/// by the membership test before the horofunction is evaluated.
pub fn busemann_sandwich_audit(
    scen: &GroupScenario,
    ball: &OrbitBall,
    r: f64,
    band: (f64, f64),
    max_shadows: usize,
    max_samples: usize,
) -> Result<SandwichReport> {
    if !(r > 0.0) {
        return Err(Error::Config(format!("shadow radius must be positive, got {r}")));
    }
    let dom = &scen.domain;
    if !dom.strictly_convex_c1() {
        return Err(Error::InvalidGeometry(
            "the sandwich audit needs horofunctions, hence a strictly convex C1 boundary".into(),
        ));
    }
    let o = &scen.basepoint;
    let picked = band_subsample(ball, band, max_shadows);
    if picked.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no ball elements in depth band [{}, {}]",
            band.0, band.1
        )));
    }

    let per_shadow = picked
        .par_iter()
        .map(|&i| -> Result<(usize, usize, f64, f64)> {
            let anchor = &ball.elements[i];
            let aw = anchor.word();
            let shadow = Shadow {
                source: o.clone(),
                target: anchor.image.clone(),
                radius: r,
            };
            let mut samples = 0usize;
            let mut violations = 0usize;
            let mut upper_excess = f64::NEG_INFINITY;
            let mut lower_margin = f64::INFINITY;
            for e in &ball.elements {
                if samples >= max_samples {
                    break;
                }
                let w = e.word();
                if w.len() <= aw.len() || !w.starts_with(aw) {
                    continue;
                }
                let dir = &e.image - o;
                if dir.norm() < 1e-12 * dom.extent() {
                    continue;
                }
                let xi = chord_through(dom, o, &dir)?.forward_endpoint().clone();
                if !shadow_contains(dom, &shadow, &xi)? {
                    continue;
                }
                // shift the extrapolation window past the anchor depth so
                // the tail of d(o, z_t) - d(anchor, z_t) is actually sampled
                let ts = BUSEMANN_TS.map(|t| t + anchor.distance);
                let beta = busemann_at_depths(dom, &xi, o, &anchor.image, ts)?;
                let tol = beta.error_estimate + SANDWICH_NUMERIC_FLOOR;
                let upper = beta.value - anchor.distance;
                let lower = beta.value - (anchor.distance - 2.0 * r);
                if upper > tol || lower < -tol {
                    violations += 1;
                }
                upper_excess = upper_excess.max(upper);
                lower_margin = lower_margin.min(lower);
                samples += 1;
            }
            Ok((samples, violations, upper_excess, lower_margin))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut checked_shadows = 0;
    let mut checked_samples = 0;
    let mut violations = 0;
    let mut max_upper_excess = f64::NEG_INFINITY;
    let mut min_lower_margin = f64::INFINITY;
    for (s, v, up, lo) in per_shadow {
        if s == 0 {
            continue;
        }
        checked_shadows += 1;
        checked_samples += s;
        violations += v;
        max_upper_excess = max_upper_excess.max(up);
        min_lower_margin = min_lower_margin.min(lo);
    }
    if checked_samples == 0 {
        return Err(Error::InsufficientData(
            "no verified boundary samples inside the audited shadows".into(),
        ));
    }
    Ok(SandwichReport {
        checked_shadows,
        checked_samples,
        violations,
        max_upper_excess,
        min_lower_margin,
    })
}
