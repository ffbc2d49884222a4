//! Properly convex domains and their geometric oracles.
//!
//! Every domain kind exposes the same small oracle set: a signed *gap*
//! function (positive inside, zero on the boundary), containment, ray-to-
//! boundary casting, and supporting hyperplanes. The metric layer is written
//! entirely against these oracles; near-boundary numerics additionally use
//! low-order Taylor data of the gap along a direction ([`GapJet`]).

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};

/// Boundary tolerance relative to the domain's linear extent.
pub const BOUNDARY_REL_TOL: f64 = 1e-12;
/// Relative tolerance of the p-norm-ball ray bisection.
const RAY_BISECT_REL_TOL: f64 = 1e-12;
/// Two polytope facets both active within this relative tolerance make the
/// supporting hyperplane non-unique.
const FACET_ACTIVE_REL_TOL: f64 = 1e-9;

/// Chord endpoints produced by casting a ray in both directions.
#[derive(Debug, Clone)]
pub struct ChordEndpoints {
    /// Boundary point hit by the ray in `-dir`.
    pub backward: DVector<f64>,
    /// Boundary point hit by the ray in `+dir`.
    pub forward: DVector<f64>,
    /// Ray parameter of `backward` (positive; in units of `|dir|`).
    pub backward_param: f64,
    /// Ray parameter of `forward` (positive; in units of `|dir|`).
    pub forward_param: f64,
}

/// Taylor data of the gap along a ray: `gap(z + e*dir) - gap(z)` is
/// `sum_k coeffs[k-1] * e^k` up to the stored order.
#[derive(Debug, Clone, Copy)]
pub struct GapJet {
    pub coeffs: [f64; 4],
    /// True when the stored coefficients describe the gap exactly
    /// (polynomial gap of degree <= 4 along lines).
    pub exact: bool,
}

impl GapJet {
    pub fn eval(&self, e: f64) -> f64 {
        let c = &self.coeffs;
        e * (c[0] + e * (c[1] + e * (c[2] + e * c[3])))
    }

    pub fn deriv(&self, e: f64) -> f64 {
        let c = &self.coeffs;
        c[0] + e * (2.0 * c[1] + e * (3.0 * c[2] + e * 4.0 * c[3]))
    }
}

/// A properly convex domain in the affine chart.
#[derive(Debug, Clone)]
pub enum ConvexDomain {
    /// `(x-c)^T A (x-c) < 1` with `A` symmetric positive definite.
    Ellipsoid {
        center: DVector<f64>,
        shape: DMatrix<f64>,
    },
    /// `sum |x_i / scale|^p < 1`, `p >= 2`.
    PNormBall { dim: usize, p: f64, scale: f64 },
    /// Intersection of halfspaces `n_i . x < b_i` with unit normals.
    HalfspacePolytope {
        normals: Vec<DVector<f64>>,
        offsets: Vec<f64>,
        /// Axis-aligned sampling box, when known.
        bbox: Option<(DVector<f64>, DVector<f64>)>,
    },
}

impl ConvexDomain {
    /// The open Euclidean unit ball.
    pub fn unit_ball(dim: usize) -> Self {
        ConvexDomain::Ellipsoid {
            center: DVector::zeros(dim),
            shape: DMatrix::identity(dim, dim),
        }
    }

    pub fn ellipsoid(center: DVector<f64>, shape: DMatrix<f64>) -> Result<Self> {
        let n = center.len();
        if shape.nrows() != n || shape.ncols() != n {
            return Err(Error::InvalidGeometry("shape matrix size mismatch".into()));
        }
        if (&shape - shape.transpose()).amax() > 1e-12 * shape.amax().max(1.0) {
            return Err(Error::InvalidGeometry("shape matrix not symmetric".into()));
        }
        if shape.clone().cholesky().is_none() {
            return Err(Error::InvalidGeometry(
                "shape matrix not positive definite".into(),
            ));
        }
        Ok(ConvexDomain::Ellipsoid { center, shape })
    }

    pub fn pnorm_ball(dim: usize, p: f64, scale: f64) -> Result<Self> {
        if !(p >= 2.0) {
            return Err(Error::InvalidGeometry(format!(
                "p-norm ball needs p >= 2, got {p}"
            )));
        }
        if !(scale > 0.0) {
            return Err(Error::InvalidGeometry("scale must be positive".into()));
        }
        Ok(ConvexDomain::PNormBall { dim, p, scale })
    }

    /// Standard open simplex `x_i > 0`, `sum x_i < 1`.
    pub fn simplex(dim: usize) -> Self {
        let mut normals = Vec::with_capacity(dim + 1);
        let mut offsets = Vec::with_capacity(dim + 1);
        for i in 0..dim {
            let mut n = DVector::zeros(dim);
            n[i] = -1.0;
            normals.push(n);
            offsets.push(0.0);
        }
        let s = (dim as f64).sqrt();
        normals.push(DVector::from_element(dim, 1.0 / s));
        offsets.push(1.0 / s);
        ConvexDomain::HalfspacePolytope {
            normals,
            offsets,
            bbox: Some((DVector::zeros(dim), DVector::from_element(dim, 1.0))),
        }
    }

    pub fn halfspace_polytope(
        facets: Vec<(DVector<f64>, f64)>,
        bbox: Option<(DVector<f64>, DVector<f64>)>,
    ) -> Result<Self> {
        if facets.is_empty() {
            return Err(Error::InvalidGeometry("no facets".into()));
        }
        let dim = facets[0].0.len();
        let mut normals = Vec::new();
        let mut offsets = Vec::new();
        for (n, b) in facets {
            if n.len() != dim {
                return Err(Error::InvalidGeometry("facet dimension mismatch".into()));
            }
            let len = n.norm();
            if len < 1e-14 {
                return Err(Error::InvalidGeometry("zero facet normal".into()));
            }
            normals.push(n / len);
            offsets.push(b / len);
        }
        Ok(ConvexDomain::HalfspacePolytope {
            normals,
            offsets,
            bbox,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexDomain::Ellipsoid { center, .. } => center.len(),
            ConvexDomain::PNormBall { dim, .. } => *dim,
            ConvexDomain::HalfspacePolytope { normals, .. } => normals[0].len(),
        }
    }

    /// Whether the boundary is strictly convex with a unique supporting
    /// hyperplane everywhere (C^1).
    pub fn strictly_convex_c1(&self) -> bool {
        match self {
            ConvexDomain::Ellipsoid { .. } => true,
            ConvexDomain::PNormBall { p, .. } => p.is_finite(),
            ConvexDomain::HalfspacePolytope { .. } => false,
        }
    }

    /// Linear extent used to scale boundary tolerances.
    pub fn extent(&self) -> f64 {
        match self {
            ConvexDomain::Ellipsoid { shape, .. } => {
                let sv = shape.clone().singular_values();
                (1.0 / sv.min()).sqrt()
            }
            ConvexDomain::PNormBall { scale, .. } => *scale,
            ConvexDomain::HalfspacePolytope { offsets, .. } => offsets
                .iter()
                .fold(1.0f64, |m, &b| m.max(b.abs()))
                .max(1.0),
        }
    }

    pub fn boundary_tol(&self) -> f64 {
        BOUNDARY_REL_TOL * self.extent()
    }

    /// Signed gap: positive inside, zero on the boundary, negative outside.
    ///
    /// Ellipsoid: `1 - (x-c)^T A (x-c)`; p-ball: `1 - sum |x_i/s|^p`;
    /// polytope: `min_i (b_i - n_i . x)` over unit-normal facets.
    pub fn gap(&self, x: &DVector<f64>) -> f64 {
        match self {
            ConvexDomain::Ellipsoid { center, shape } => {
                let d = x - center;
                1.0 - (shape * &d).dot(&d)
            }
            ConvexDomain::PNormBall { p, scale, .. } => {
                1.0 - x.iter().map(|v| (v.abs() / scale).powf(*p)).sum::<f64>()
            }
            ConvexDomain::HalfspacePolytope {
                normals, offsets, ..
            } => normals
                .iter()
                .zip(offsets)
                .map(|(n, b)| b - n.dot(x))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Gradient of the gap (non-smooth polytope: gradient of the active facet).
    pub fn gap_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            ConvexDomain::Ellipsoid { center, shape } => shape * (x - center) * -2.0,
            ConvexDomain::PNormBall { p, scale, dim } => DVector::from_fn(*dim, |i, _| {
                let v = x[i] / scale;
                -p * v.abs().powf(p - 1.0) * v.signum() / scale
            }),
            ConvexDomain::HalfspacePolytope {
                normals, offsets, ..
            } => {
                let mut best = 0;
                let mut best_gap = f64::INFINITY;
                for (i, (n, b)) in normals.iter().zip(offsets).enumerate() {
                    let g = b - n.dot(x);
                    if g < best_gap {
                        best_gap = g;
                        best = i;
                    }
                }
                -&normals[best]
            }
        }
    }

    /// Open containment: boundary points are *not* contained.
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        x.len() == self.dim() && self.gap(x) > self.boundary_tol()
    }

    /// Taylor coefficients of `e -> gap(z + e*dir) - gap(z)` up to order 4.
    pub fn gap_jet(&self, z: &DVector<f64>, dir: &DVector<f64>) -> GapJet {
        match self {
            ConvexDomain::Ellipsoid { center, shape } => {
                let d = z - center;
                GapJet {
                    coeffs: [
                        -2.0 * (shape * &d).dot(dir),
                        -(shape * dir).dot(dir),
                        0.0,
                        0.0,
                    ],
                    exact: true,
                }
            }
            ConvexDomain::PNormBall { p, scale, .. } => {
                let pi = p.round();
                if (*p - pi).abs() < 1e-12 && pi as i64 % 2 == 0 && pi <= 4.5 {
                    // even integer p <= 4: exact binomial expansion
                    let q = pi as i32;
                    let mut coeffs = [0.0f64; 4];
                    for (k, c) in coeffs.iter_mut().enumerate() {
                        let k = k as i32 + 1;
                        if k > q {
                            break;
                        }
                        let binom = (1..=k).fold(1.0, |acc, j| {
                            acc * f64::from(q - j + 1) / f64::from(j)
                        });
                        let s: f64 = (0..z.len())
                            .map(|i| {
                                (z[i] / scale).powi(q - k) * (dir[i] / scale).powi(k)
                            })
                            .sum();
                        *c = -binom * s;
                    }
                    GapJet {
                        coeffs,
                        exact: true,
                    }
                } else {
                    // generic p: first and second derivatives only (exponents
                    // p-1, p-2 >= 0 stay finite at vanishing coordinates)
                    let mut c1 = 0.0;
                    let mut c2 = 0.0;
                    for i in 0..z.len() {
                        let v = z[i] / scale;
                        let d = dir[i] / scale;
                        c1 += p * v.abs().powf(p - 1.0) * v.signum() * d;
                        c2 += p * (p - 1.0) * v.abs().powf(p - 2.0) * d * d / 2.0;
                    }
                    GapJet {
                        coeffs: [-c1, -c2, 0.0, 0.0],
                        exact: false,
                    }
                }
            }
            ConvexDomain::HalfspacePolytope {
                normals, offsets, ..
            } => {
                let mut best = 0;
                let mut best_gap = f64::INFINITY;
                for (i, (n, b)) in normals.iter().zip(offsets).enumerate() {
                    let g = b - n.dot(z);
                    if g < best_gap {
                        best_gap = g;
                        best = i;
                    }
                }
                GapJet {
                    coeffs: [-normals[best].dot(dir), 0.0, 0.0, 0.0],
                    exact: true,
                }
            }
        }
    }

    /// Ray parameter `s > 0` with `x + s*dir` on the boundary.
    ///
    /// # Errors
    /// `OutsideDomain` if `x` is not interior, `DegenerateChord` on a
    /// (near-)zero direction.
    pub fn ray_boundary_param(&self, x: &DVector<f64>, dir: &DVector<f64>) -> Result<f64> {
        let g0 = self.gap(x);
        if g0 <= self.boundary_tol() {
            return Err(Error::OutsideDomain(format!(
                "ray origin has gap {g0:.3e}"
            )));
        }
        let dn = dir.norm();
        if dn < 1e-14 * self.extent() {
            return Err(Error::DegenerateChord("zero ray direction".into()));
        }
        match self {
            ConvexDomain::Ellipsoid { center, shape } => {
                // gap(x+s d) = g0 - 2 s (A(x-c)).d - s^2 (A d).d
                let xc = x - center;
                let a = (shape * dir).dot(dir);
                let b = (shape * &xc).dot(dir);
                let disc = b * b + a * g0;
                let sq = disc.sqrt();
                // stable positive root of a s^2 + 2 b s - g0 = 0
                let s = if b <= 0.0 {
                    (sq - b) / a
                } else {
                    g0 / (b + sq)
                };
                Ok(s)
            }
            ConvexDomain::PNormBall { .. } => {
                let mut hi = self.extent() / dn;
                let mut iters = 0;
                while self.gap(&(x + dir * hi)) > 0.0 {
                    hi *= 2.0;
                    iters += 1;
                    if iters > 200 {
                        return Err(Error::NumericalFailure(
                            "ray never exits p-norm ball".into(),
                        ));
                    }
                }
                let mut lo = 0.0f64;
                while (hi - lo) > RAY_BISECT_REL_TOL * hi {
                    let mid = 0.5 * (lo + hi);
                    if self.gap(&(x + dir * mid)) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                // Newton polish to full precision (convex 1-D gap)
                let mut s = 0.5 * (lo + hi);
                for _ in 0..3 {
                    let z = x + dir * s;
                    let g = self.gap(&z);
                    let gp = self.gap_gradient(&z).dot(dir);
                    if gp.abs() < 1e-300 {
                        break;
                    }
                    s -= g / gp;
                }
                Ok(s)
            }
            ConvexDomain::HalfspacePolytope {
                normals, offsets, ..
            } => {
                let mut s_min = f64::INFINITY;
                for (n, b) in normals.iter().zip(offsets) {
                    let speed = n.dot(dir);
                    if speed > 1e-15 {
                        s_min = s_min.min((b - n.dot(x)) / speed);
                    }
                }
                if !s_min.is_finite() {
                    return Err(Error::NumericalFailure(
                        "ray never exits polytope (unbounded direction)".into(),
                    ));
                }
                Ok(s_min)
            }
        }
    }

    /// Boundary point hit by the ray from `x` in direction `dir`.
    pub fn ray_boundary(&self, x: &DVector<f64>, dir: &DVector<f64>) -> Result<DVector<f64>> {
        let s = self.ray_boundary_param(x, dir)?;
        Ok(x + dir * s)
    }

    /// Both boundary points of the chord through `x` with direction `dir`.
    pub fn chord_endpoints(&self, x: &DVector<f64>, dir: &DVector<f64>) -> Result<ChordEndpoints> {
        let forward_param = self.ray_boundary_param(x, dir)?;
        let backward_param = self.ray_boundary_param(x, &(-dir))?;
        Ok(ChordEndpoints {
            backward: x - dir * backward_param,
            forward: x + dir * forward_param,
            backward_param,
            forward_param,
        })
    }

    /// Outward unit normal and offset of the supporting hyperplane
    /// `n . y = b` at a boundary point.
    ///
    /// # Errors
    /// `InvalidGeometry` away from the boundary; `NonUniqueSupport` where the
    /// boundary is not C^1 (polytope vertices/edges).
    pub fn supporting_hyperplane(&self, x: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
        let g = self.gap(x);
        if g.abs() > 1e-7 * self.extent() {
            return Err(Error::InvalidGeometry(format!(
                "not a boundary point (gap {g:.3e})"
            )));
        }
        if let ConvexDomain::HalfspacePolytope {
            normals, offsets, ..
        } = self
        {
            let tol = FACET_ACTIVE_REL_TOL * self.extent();
            let mut active: Vec<usize> = Vec::new();
            for (i, (n, b)) in normals.iter().zip(offsets).enumerate() {
                if (b - n.dot(x)).abs() <= tol {
                    active.push(i);
                }
            }
            return match active.len() {
                0 => Err(Error::InvalidGeometry(
                    "no active facet at claimed boundary point".into(),
                )),
                1 => Ok((normals[active[0]].clone(), offsets[active[0]])),
                _ => Err(Error::NonUniqueSupport(format!(
                    "{} facets active",
                    active.len()
                ))),
            };
        }
        let n = -self.gap_gradient(x);
        let len = n.norm();
        if len < 1e-14 {
            return Err(Error::NumericalFailure("vanishing boundary normal".into()));
        }
        let n = n / len;
        let b = n.dot(x);
        Ok((n, b))
    }

    /// Uniform sample from the interior (rejection sampling).
    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DVector<f64>> {
        let dim = self.dim();
        let (lo, hi): (DVector<f64>, DVector<f64>) = match self {
            ConvexDomain::Ellipsoid { center, .. } => {
                let e = self.extent();
                (
                    center.map(|c| c - e),
                    center.map(|c| c + e),
                )
            }
            ConvexDomain::PNormBall { scale, .. } => (
                DVector::from_element(dim, -scale),
                DVector::from_element(dim, *scale),
            ),
            ConvexDomain::HalfspacePolytope { bbox, .. } => match bbox {
                Some((lo, hi)) => (lo.clone(), hi.clone()),
                None => {
                    return Err(Error::InvalidGeometry(
                        "polytope without sampling box".into(),
                    ))
                }
            },
        };
        for _ in 0..100_000 {
            let x = DVector::from_fn(dim, |i, _| rng.gen_range(lo[i]..hi[i]));
            if self.contains(&x) {
                return Ok(x);
            }
        }
        Err(Error::NumericalFailure(
            "interior rejection sampling failed".into(),
        ))
    }

    /// Homogeneous quadratic form `Q` with `Q(x, 1) = gap(x)` — ellipsoids
    /// only. The form lets callers transport boundary defects through
    /// projective automorphisms without catastrophic cancellation.
    pub fn homogeneous_form(&self) -> Option<DMatrix<f64>> {
        match self {
            ConvexDomain::Ellipsoid { center, shape } => {
                let n = center.len();
                let mut q = DMatrix::zeros(n + 1, n + 1);
                // gap(x) = 1 - (x - c)^T A (x - c); homogenized:
                // Q(u, w) = w^2 - (u - w c)^T A (u - w c)
                let ac = shape * center;
                for i in 0..n {
                    for j in 0..n {
                        q[(i, j)] = -shape[(i, j)];
                    }
                    q[(i, n)] = ac[i];
                    q[(n, i)] = ac[i];
                }
                q[(n, n)] = 1.0 - ac.dot(center);
                Some(q)
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn contains_is_open() {
        let ball = ConvexDomain::unit_ball(2);
        assert!(ball.contains(&dvector![0.0, 0.0]));
        assert!(ball.contains(&dvector![0.999, 0.0]));
        assert!(!ball.contains(&dvector![1.0, 0.0]));
        assert!(!ball.contains(&dvector![1.1, 0.0]));

        let sx = ConvexDomain::simplex(2);
        assert!(sx.contains(&dvector![0.25, 0.25]));
        assert!(!sx.contains(&dvector![0.0, 0.5]));
        assert!(!sx.contains(&dvector![0.6, 0.6]));
    }

    #[test]
    fn ellipsoid_requires_spd() {
        assert!(ConvexDomain::ellipsoid(
            dvector![0.0, 0.0],
            dmatrix![1.0, 0.0; 0.0, -1.0]
        )
        .is_err());
        assert!(ConvexDomain::ellipsoid(
            dvector![0.0, 0.0],
            dmatrix![1.0, 0.5; 0.0, 1.0]
        )
        .is_err());
    }

    #[test]
    fn pnorm_ball_requires_p_at_least_two() {
        assert!(ConvexDomain::pnorm_ball(2, 1.5, 1.0).is_err());
        assert!(ConvexDomain::pnorm_ball(2, 2.0, 1.0).is_ok());
    }

    #[test]
    fn ray_boundary_lands_on_boundary_all_kinds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let domains = [
            ConvexDomain::unit_ball(2),
            ConvexDomain::ellipsoid(
                dvector![0.2, -0.1],
                dmatrix![2.0, 0.3; 0.3, 1.0],
            )
            .unwrap(),
            ConvexDomain::pnorm_ball(2, 4.0, 1.0).unwrap(),
            ConvexDomain::pnorm_ball(2, 2.7, 1.3).unwrap(),
            ConvexDomain::simplex(2),
        ];
        for dom in &domains {
            for _ in 0..200 {
                let x = dom.sample_interior(&mut rng).unwrap();
                let dir = dvector![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                if dir.norm() < 1e-3 {
                    continue;
                }
                let b = dom.ray_boundary(&x, &dir).unwrap();
                assert!(
                    dom.gap(&b).abs() <= 1e-10 * dom.extent(),
                    "gap at boundary {:.3e}",
                    dom.gap(&b)
                );
            }
        }
    }

    #[test]
    fn ellipsoid_ray_matches_bisection_oracle() {
        // closed-form quadratic root vs naive bisection on the gap
        let dom = ConvexDomain::ellipsoid(
            dvector![0.1, 0.0],
            dmatrix![1.5, 0.2; 0.2, 0.8],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let x = dom.sample_interior(&mut rng).unwrap();
            let dir = dvector![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            if dir.norm() < 1e-3 {
                continue;
            }
            let s = dom.ray_boundary_param(&x, &dir).unwrap();
            let mut lo = 0.0f64;
            let mut hi = 10.0 / dir.norm();
            while dom.gap(&(&x + &dir * hi)) > 0.0 {
                hi *= 2.0;
            }
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if dom.gap(&(&x + &dir * mid)) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((s - 0.5 * (lo + hi)).abs() < 1e-9 * s.max(1.0));
        }
    }

    #[test]
    fn ray_boundary_rejects_exterior_origin() {
        let ball = ConvexDomain::unit_ball(2);
        assert!(matches!(
            ball.ray_boundary(&dvector![2.0, 0.0], &dvector![1.0, 0.0]),
            Err(Error::OutsideDomain(_))
        ));
    }

    #[test]
    fn supporting_hyperplane_unique_on_smooth_domains() {
        let ball = ConvexDomain::unit_ball(2);
        let (n, b) = ball
            .supporting_hyperplane(&dvector![1.0, 0.0])
            .unwrap();
        assert!((n - dvector![1.0, 0.0]).norm() < 1e-12);
        assert!((b - 1.0).abs() < 1e-12);

        let p4 = ConvexDomain::pnorm_ball(2, 4.0, 1.0).unwrap();
        let x = dvector![0.5f64, (1.0 - 0.5f64.powi(4)).powf(0.25)];
        let (n, b) = p4.supporting_hyperplane(&x).unwrap();
        // supporting plane touches only at x: gap of nearby boundary points
        // stays strictly below the plane
        assert!((n.dot(&x) - b).abs() < 1e-10);
    }

    #[test]
    fn supporting_hyperplane_nonunique_at_simplex_vertex() {
        let sx = ConvexDomain::simplex(2);
        assert!(matches!(
            sx.supporting_hyperplane(&dvector![0.0, 0.0]),
            Err(Error::NonUniqueSupport(_))
        ));
        // facet interior is fine
        let (n, _) = sx.supporting_hyperplane(&dvector![0.4, 0.0]).unwrap();
        assert!((n - dvector![0.0, -1.0]).norm() < 1e-12);
    }

    #[test]
    fn gap_jet_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let domains = [
            ConvexDomain::unit_ball(3),
            ConvexDomain::pnorm_ball(3, 4.0, 1.0).unwrap(),
            ConvexDomain::pnorm_ball(3, 3.3, 1.0).unwrap(),
            ConvexDomain::simplex(3),
        ];
        for dom in &domains {
            for _ in 0..50 {
                let z = dom.sample_interior(&mut rng).unwrap();
                let dir = DVector::from_fn(3, |_, _| rng.gen_range(-1.0f64..1.0));
                let jet = dom.gap_jet(&z, &dir);
                for &e in &[1e-4f64, -1e-4, 5e-4] {
                    let truth = dom.gap(&(&z + &dir * e)) - dom.gap(&z);
                    let approx = jet.eval(e);
                    // exact jets agree to rounding; order-2 jets truncate at e^3
                    let tol = if jet.exact {
                        1e-12
                    } else {
                        50.0 * e.abs().powi(3)
                    };
                    assert!(
                        (truth - approx).abs() < tol,
                        "jet mismatch {truth:.3e} vs {approx:.3e}"
                    );
                }
            }
        }
    }

    #[test]
    fn homogeneous_form_agrees_with_gap() {
        let dom = ConvexDomain::ellipsoid(
            dvector![0.3, -0.2],
            dmatrix![1.5, 0.1; 0.1, 0.9],
        )
        .unwrap();
        let q = dom.homogeneous_form().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let x = dom.sample_interior(&mut rng).unwrap();
            let u = dvector![x[0], x[1], 1.0];
            let val = (&q * &u).dot(&u);
            assert!((val - dom.gap(&x)).abs() < 1e-12);
        }
    }
}
