//! Homogeneous coordinates, projective maps and spectral summaries.
//!
//! Points of RP^n are stored as unit homogeneous vectors with a sign
//! convention; maps are stored as unit-Frobenius matrix representatives so
//! that equal projective maps have bitwise-comparable representatives.

use nalgebra::{DMatrix, DVector};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Entries smaller than this (after normalization) are not trusted to carry a
/// sign when fixing the representative's overall sign.
pub const SIGN_TOL: f64 = 1e-9;
/// Relative modulus gap below which two eigenvalue moduli count as clustered.
pub const MODULUS_CLUSTER_TOL: f64 = 1e-9;
/// Imaginary part (relative to modulus) below which an eigenvalue is real.
pub const REAL_EIGEN_TOL: f64 = 1e-9;
/// Collinearity tolerance for cross-ratio arguments, relative to the spread.
const COLLINEAR_TOL: f64 = 1e-9;
/// Chord-parameter separation below which cross-ratio factors degenerate.
const DEGENERATE_TOL: f64 = 1e-13;
/// Log modulus-ratio above which a spectral gap is considered decided.
const GAP_DECIDE: f64 = 1e-3;
/// Unit-norm dominant moduli below this are indistinguishable from the
/// eps^(1/p) eigenvalue noise of defective (Jordan) spectra.
const SPECTRUM_NOISE_FLOOR: f64 = 5e-3;

/// A point of projective space, stored as a unit homogeneous vector.
///
/// The affine chart is `x_{n+1} = 1`; points with (near-)zero last coordinate
/// are at infinity in that chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjPoint {
    hom: DVector<f64>,
}

impl ProjPoint {
    /// Point of the affine chart: homogeneous vector `(x, 1)`.
    pub fn from_chart(x: &DVector<f64>) -> Self {
        let mut hom = DVector::zeros(x.len() + 1);
        hom.rows_mut(0, x.len()).copy_from(x);
        hom[x.len()] = 1.0;
        Self::from_homogeneous(hom)
    }

    /// Normalizes an arbitrary nonzero homogeneous representative.
    pub fn from_homogeneous(mut hom: DVector<f64>) -> Self {
        let n = hom.norm();
        assert!(n > 0.0, "zero homogeneous vector");
        hom /= n;
        for i in 0..hom.len() {
            if hom[i].abs() > SIGN_TOL {
                if hom[i] < 0.0 {
                    hom.neg_mut();
                }
                break;
            }
        }
        Self { hom }
    }

    pub fn homogeneous(&self) -> &DVector<f64> {
        &self.hom
    }

    pub fn ambient_dim(&self) -> usize {
        self.hom.len() - 1
    }

    /// True if the point lies in the affine chart `x_{n+1} = 1`.
    pub fn is_finite(&self) -> bool {
        self.hom[self.hom.len() - 1].abs() > SIGN_TOL
    }

    /// Chart coordinates; `None` for points at infinity.
    pub fn chart(&self) -> Option<DVector<f64>> {
        if !self.is_finite() {
            return None;
        }
        let n = self.hom.len() - 1;
        let w = self.hom[n];
        Some(self.hom.rows(0, n).map(|v| v / w))
    }
}

/// A projective transformation with a normalized matrix representative.
///
/// The representative has unit Frobenius norm and its first entry of
/// magnitude above [`SIGN_TOL`] (row-major order) is positive, so equal maps
/// produce identical representatives up to floating-point noise.
#[derive(Debug)]
pub struct ProjectiveMap {
    mat: DMatrix<f64>,
    /// Generator word that produced this element, as signed 1-based indices
    /// (`-k` is the inverse of generator `k`); `None` for ad-hoc maps.
    word: Option<Vec<i32>>,
    /// `ln |det|` of the normalized representative, tracked analytically
    /// through composition. An LU determinant of a product whose condition
    /// number exceeds `1/eps` is pure rounding noise, so the log-determinant
    /// is carried additively instead of ever being recomputed.
    log_det_abs: f64,
    kappa: OnceLock<f64>,
}

impl Clone for ProjectiveMap {
    fn clone(&self) -> Self {
        Self {
            mat: self.mat.clone(),
            word: self.word.clone(),
            log_det_abs: self.log_det_abs,
            kappa: match self.kappa.get() {
                Some(&k) => {
                    let cell = OnceLock::new();
                    let _ = cell.set(k);
                    cell
                }
                None => OnceLock::new(),
            },
        }
    }
}

impl PartialEq for ProjectiveMap {
    fn eq(&self, other: &Self) -> bool {
        self.mat == other.mat && self.word == other.word
    }
}

/// Scales a matrix to unit Frobenius norm with the sign convention of
/// [`ProjectiveMap`]. Idempotent to the bit on already-normalized input.
pub fn normalize_representative(mat: &DMatrix<f64>) -> DMatrix<f64> {
    let n = mat.norm();
    assert!(n.is_finite() && n > 0.0, "degenerate matrix representative");
    let mut already_unit = (n - 1.0).abs() < 1e-12;
    let mut sign = 0.0f64;
    'outer: for i in 0..mat.nrows() {
        for j in 0..mat.ncols() {
            if mat[(i, j)].abs() > SIGN_TOL {
                sign = mat[(i, j)].signum();
                break 'outer;
            }
        }
    }
    if sign == 0.0 {
        sign = 1.0;
    }
    already_unit &= sign > 0.0;
    if already_unit {
        return mat.clone();
    }
    mat * (sign / n)
}

impl ProjectiveMap {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() < 2 {
            return Err(Error::InvalidGeometry(format!(
                "projective map needs a square matrix of size >= 2, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if !mat.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite matrix entry".into()));
        }
        // log|det| of the normalized representative; the LU value is accurate
        // here because constructor inputs are direct matrices, not deep
        // products (those go through `compose`, which tracks it exactly).
        let dim = mat.nrows() as f64;
        let log_det_abs = mat.determinant().abs().ln() - dim * mat.norm().ln();
        Ok(Self {
            mat: normalize_representative(&mat),
            word: None,
            log_det_abs,
            kappa: OnceLock::new(),
        })
    }

    pub fn identity(ambient_dim: usize) -> Self {
        Self::new(DMatrix::identity(ambient_dim + 1, ambient_dim + 1)).unwrap()
    }

    pub fn with_word(mut self, word: Vec<i32>) -> Self {
        self.word = Some(word);
        self
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn word(&self) -> Option<&[i32]> {
        self.word.as_deref()
    }

    /// `ln |det|` of the normalized representative. Exact up to additive
    /// rounding (`word length * eps`) even for compositions so deep that a
    /// recomputed determinant would be noise.
    pub fn log_det_abs(&self) -> f64 {
        self.log_det_abs
    }

    /// Ambient dimension `n` of the chart the map acts on (matrix is
    /// `(n+1) x (n+1)`).
    pub fn ambient_dim(&self) -> usize {
        self.mat.nrows() - 1
    }

    pub fn apply(&self, p: &ProjPoint) -> ProjPoint {
        ProjPoint::from_homogeneous(&self.mat * p.homogeneous())
    }

    /// Applies the map to a chart point, returning chart coordinates.
    /// Panics if the image is at infinity; callers in metric code always act
    /// by automorphisms of a bounded domain, where that cannot happen.
    pub fn apply_chart(&self, x: &DVector<f64>) -> DVector<f64> {
        self.apply(&ProjPoint::from_chart(x))
            .chart()
            .expect("image at infinity")
    }

    pub fn compose(&self, other: &Self) -> Self {
        let word = match (&self.word, &other.word) {
            (Some(a), Some(b)) => {
                let mut w = a.clone();
                w.extend_from_slice(b);
                Some(w)
            }
            _ => None,
        };
        let raw = &self.mat * &other.mat;
        let dim = raw.nrows() as f64;
        let log_det_abs = self.log_det_abs + other.log_det_abs - dim * raw.norm().ln();
        Self {
            mat: normalize_representative(&raw),
            word,
            log_det_abs,
            kappa: OnceLock::new(),
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self
            .mat
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidGeometry("singular matrix".into()))?;
        let word = self
            .word
            .as_ref()
            .map(|w| w.iter().rev().map(|&l| -l).collect());
        let dim = inv.nrows() as f64;
        let log_det_abs = -self.log_det_abs - dim * inv.norm().ln();
        Ok(Self {
            mat: normalize_representative(&inv),
            word,
            log_det_abs,
            kappa: OnceLock::new(),
        })
    }

    /// Condition number of the representative: ratio of extreme singular
    /// values. Scale-invariant, so well-defined on the projective class.
    pub fn kappa(&self) -> f64 {
        *self.kappa.get_or_init(|| {
            let sv = self.mat.clone().singular_values();
            let smax = sv.max();
            let smin = sv.min();
            if smin <= 0.0 {
                f64::INFINITY
            } else {
                smax / smin
            }
        })
    }
}

/// Cross-ratio `|ay| |bx| / (|ax| |by|)` of four collinear chart points.
///
/// For boundary points `a, b` and interior points `x, y` ordered
/// `a, x, y, b` along a chord this is the quantity whose half-log is the
/// Hilbert distance.
///
/// # Errors
/// `InvalidGeometry` if the points are not collinear (relative to their
/// spread), `DegenerateChord` if a denominator factor vanishes.
pub fn cross_ratio(
    a: &DVector<f64>,
    x: &DVector<f64>,
    y: &DVector<f64>,
    b: &DVector<f64>,
) -> Result<f64> {
    let pts = [a, x, y, b];
    // Direction from the two most distant points; residuals checked against it.
    let mut span = 0.0;
    let (mut i0, mut j0) = (0usize, 1usize);
    for i in 0..4 {
        for j in (i + 1)..4 {
            let d = (pts[i] - pts[j]).norm();
            if d > span {
                span = d;
                (i0, j0) = (i, j);
            }
        }
    }
    if span < DEGENERATE_TOL {
        return Err(Error::DegenerateChord("all four points coincide".into()));
    }
    let dir = (pts[j0] - pts[i0]) / span;
    for p in &pts {
        let rel = *p - pts[i0];
        let residual = (&rel - &dir * rel.dot(&dir)).norm();
        if residual > COLLINEAR_TOL * span {
            return Err(Error::InvalidGeometry(format!(
                "cross-ratio arguments not collinear (residual {residual:.3e} over span {span:.3e})"
            )));
        }
    }
    let ay = (a - y).norm();
    let bx = (b - x).norm();
    let ax = (a - x).norm();
    let by = (b - y).norm();
    if ax < DEGENERATE_TOL * span || by < DEGENERATE_TOL * span {
        return Err(Error::DegenerateChord(
            "cross-ratio denominator factor vanishes".into(),
        ));
    }
    Ok((ay * bx) / (ax * by))
}

/// Sorted spectral data of a projective map's representative.
#[derive(Debug, Clone)]
pub struct EigenSummary {
    /// Eigenvalue moduli in non-increasing order.
    pub moduli: Vec<f64>,
    /// True when the largest modulus is attained by a single real eigenvalue.
    pub top_is_simple_real: bool,
    /// True when the smallest modulus is attained by a single real eigenvalue.
    pub bottom_is_simple_real: bool,
    /// Fixed point of the dominant eigendirection, when defined.
    pub attracting: Option<ProjPoint>,
    /// Fixed point of the dominant eigendirection of the inverse, when defined.
    pub repelling: Option<ProjPoint>,
}

impl EigenSummary {
    /// `lambda_1 / lambda_2` modulus ratio (1.0 when the spectrum has fewer
    /// than two eigenvalues).
    pub fn top_gap(&self) -> f64 {
        if self.moduli.len() < 2 || self.moduli[1] == 0.0 {
            1.0
        } else {
            self.moduli[0] / self.moduli[1]
        }
    }

    /// `lambda_1 / lambda_{n+1}` modulus ratio.
    pub fn spread(&self) -> f64 {
        let last = *self.moduli.last().unwrap();
        if last == 0.0 {
            f64::INFINITY
        } else {
            self.moduli[0] / last
        }
    }
}

fn eigen_moduli_raw(mat: &DMatrix<f64>) -> (Vec<f64>, bool, bool) {
    let eig = mat.complex_eigenvalues();
    let mut vals: Vec<(f64, f64)> = eig.iter().map(|z| (z.norm(), z.im.abs())).collect();
    vals.sort_by(|a, b| b.0.total_cmp(&a.0));
    let top = vals[0];
    let bot = vals[vals.len() - 1];
    let top_simple = vals.len() < 2 || vals[1].0 < top.0 * (1.0 - MODULUS_CLUSTER_TOL);
    let bot_simple = vals.len() < 2 || vals[vals.len() - 2].0 * (1.0 - MODULUS_CLUSTER_TOL) > bot.0;
    let top_real = top.1 <= REAL_EIGEN_TOL * top.0.max(1e-300);
    let bot_real = bot.1 <= REAL_EIGEN_TOL * top.0.max(1e-300);
    (
        vals.into_iter().map(|v| v.0).collect(),
        top_simple && top_real,
        bot_simple && bot_real,
    )
}

/// Power iteration for the dominant eigendirection; deterministic start.
/// Returns `None` when the iteration fails to settle (e.g. complex dominant
/// pair).
fn dominant_direction(mat: &DMatrix<f64>) -> Option<ProjPoint> {
    let n = mat.nrows();
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.01 * (i as f64 + 1.0));
    v /= v.norm();
    let mut prev = v.clone();
    for iter in 0..5000 {
        v = mat * &v;
        let norm = v.norm();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        v /= norm;
        if iter % 8 == 7 {
            // compare up to sign
            let d_plus = (&v - &prev).norm();
            let d_minus = (&v + &prev).norm();
            if d_plus.min(d_minus) < 1e-14 {
                return Some(ProjPoint::from_homogeneous(v));
            }
            prev = v.clone();
        }
    }
    None
}

/// Spectral summary of a projective map.
///
/// Eigenvalue moduli come from the dense (Schur) solver; the fixed points of
/// the dominant directions come from power iteration on the map and its
/// inverse, which also serves as the fallback for moduli so extreme that the
/// dense solver's smallest values degenerate.
pub fn eigen_summary(map: &ProjectiveMap) -> Result<EigenSummary> {
    let (moduli, top_sr, bot_sr) = eigen_moduli_raw(map.matrix());
    let attracting = if top_sr {
        dominant_direction(map.matrix())
    } else {
        None
    };
    let repelling = if bot_sr {
        let inv = map.inverse()?;
        dominant_direction(inv.matrix())
    } else {
        None
    };
    Ok(EigenSummary {
        moduli,
        top_is_simple_real: top_sr,
        bottom_is_simple_real: bot_sr,
        attracting,
        repelling,
    })
}

/// `log(lambda_1 / lambda_{n+1})` of the projective class, resolved by
/// repeated squaring when the raw spectrum is too clustered to trust.
///
/// Defective eigenvalues of a `p x p` Jordan block carry `eps^(1/p)`-scale
/// noise, far above honest spectral gaps near the decision threshold, so the
/// gap is amplified (`M <- M^2`, renormalized) until it is either clearly
/// present — and then measured and scaled back — or stays clustered through
/// `max_squarings` doublings, which pins the true spread to zero at f64 scale.
pub fn log_spread_amplified(map: &ProjectiveMap, max_squarings: u32) -> f64 {
    let mut a = map.matrix().clone();
    let mut scale = 1.0f64;
    for _ in 0..=max_squarings {
        let (moduli, _, _) = eigen_moduli_raw(&a);
        let last = *moduli.last().unwrap();
        // unipotent powers grow polynomially while their eigenvalues stay
        // put, so under unit-norm scaling the whole true spectrum sinks
        // below the defect-noise floor and any measured "gap" is pure
        // noise. A genuine dominant eigenvalue converges to O(1) instead.
        let above_noise = moduli[0] > SPECTRUM_NOISE_FLOOR;
        if above_noise && last > 0.0 {
            let r = (moduli[0] / last).ln();
            if r > GAP_DECIDE {
                return r / scale;
            }
        } else if above_noise {
            // smallest modulus underflowed: gap is enormous at this scale
            return f64::INFINITY;
        }
        a = normalize_representative(&(&a * &a));
        scale *= 2.0;
    }
    0.0
}
