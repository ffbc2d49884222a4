//! Breadth-first orbit enumeration with projective-class deduplication.

use std::collections::HashSet;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::domain::ConvexDomain;
use crate::error::{Error, Result};
use crate::geometry::{distance_between, hilbert_distance, ChordPoint};
use crate::projective::ProjectiveMap;

use super::scenario::GroupScenario;

/// Grid spacing for the projective-class dedup key.
const DEDUP_GRID: f64 = 1e-9;
/// Fraction of a grid cell treated as borderline; borderline entries get
/// their neighbor cell probed so that numerically straddling copies of one
/// element still collide.
const BORDERLINE_FRAC: f64 = 5e-2;
/// Distance beyond the requested radius kept explorable (on top of the
/// largest per-letter displacement), letting word paths overshoot their
/// target before closing in.
const PRUNE_SLACK: f64 = 2.0;
/// Frontier nodes expanded per parallel batch; bounds transient memory on
/// million-element levels without affecting the output.
const NODE_CHUNK: usize = 32_768;
/// Default cap on distinct elements explored.
pub const DEFAULT_ELEMENT_BUDGET: usize = 10_000_000;

#[derive(Debug, Clone)]
pub struct OrbitElement {
    pub map: ProjectiveMap,
    /// Chart coordinates of the basepoint image.
    pub image: DVector<f64>,
    /// Hilbert distance from the basepoint to `image`.
    pub distance: f64,
}

impl OrbitElement {
    pub fn word(&self) -> &[i32] {
        self.map.word().unwrap_or(&[])
    }
}

#[derive(Debug, Clone, Default)]
pub struct OrbitStats {
    /// Distinct elements retained within the pruning cutoff (identity
    /// included; elements between the radius and the cutoff count too).
    pub explored: usize,
    /// Candidate words within the cutoff that deduplicated against an
    /// already-seen element.
    pub duplicates: usize,
    /// Candidate words discarded beyond the pruning cutoff.
    pub pruned: usize,
    /// Candidate words dropped because their displacement failed to evaluate.
    pub numeric_drops: usize,
    /// True when enumeration stopped at the word-length cap with the
    /// frontier still alive (the ball may then be incomplete).
    pub word_cap_hit: bool,
    /// Smallest observed displacement increment over retained parent→child
    /// steps (+inf when no step was retained). Free scenarios are pruned at
    /// the bare radius on the strength of this staying positive.
    pub min_increment: f64,
}

#[derive(Debug, Clone)]
pub struct OrbitBall {
    /// Sorted by distance, then word.
    pub elements: Vec<OrbitElement>,
    pub radius: f64,
    pub stats: OrbitStats,
}

impl OrbitBall {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Elements within distance `r` of the basepoint.
    pub fn count_within(&self, r: f64) -> usize {
        self.elements.partition_point(|e| e.distance <= r)
    }
}

fn key_hash(cells: &[i64]) -> u64 {
    // FNV-1a, fixed parameters: stable across runs and thread counts
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &c in cells {
        for b in c.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Rounded dedup cells of a normalized matrix plus the neighbor cell for
/// every borderline entry.
fn dedup_cells(map: &ProjectiveMap) -> (Vec<i64>, Vec<(usize, i64)>) {
    let mat = map.matrix();
    let mut cells = Vec::with_capacity(mat.len());
    let mut alts = Vec::new();
    for (idx, &v) in mat.iter().enumerate() {
        let r = v / DEDUP_GRID;
        let rounded = r.round();
        if (r - rounded).abs() > 0.5 - BORDERLINE_FRAC {
            alts.push((idx, (rounded + (r - rounded).signum()) as i64));
        }
        cells.push(rounded as i64);
    }
    (cells, alts)
}

/// Hashes to probe for a candidate: its own key first, then every
/// combination of borderline neighbors (capped; more than 8 borderline
/// entries at once does not occur for sane inputs).
fn probe_hashes(cells: &[i64], alts: &[(usize, i64)]) -> Vec<u64> {
    let k = alts.len().min(8);
    let mut out = Vec::with_capacity(1 << k);
    let mut scratch = cells.to_vec();
    for mask in 0u32..(1 << k) {
        for (bit, &(idx, alt)) in alts.iter().take(k).enumerate() {
            scratch[idx] = if mask >> bit & 1 == 1 { alt } else { cells[idx] };
        }
        out.push(key_hash(&scratch));
    }
    out
}

/// Carries the basepoint gap through group elements analytically.
///
/// An automorphism of an ellipsoid preserves its homogeneous quadratic form
/// up to the scalar |det M|^{2/(n+1)}, so the image gap is that scalar times
/// the basepoint gap divided by the squared homogenizing coordinate — no
/// cancellation even when the image is within 1e-300 of the boundary.
pub(crate) struct DefectTransport {
    o_hom: DVector<f64>,
    q_base: f64,
    det_exp: f64,
}

impl DefectTransport {
    pub(crate) fn new(dom: &ConvexDomain, o: &DVector<f64>) -> Option<Self> {
        let form = dom.homogeneous_form()?;
        let n = o.len();
        let mut o_hom = DVector::zeros(n + 1);
        o_hom.rows_mut(0, n).copy_from(o);
        o_hom[n] = 1.0;
        let q_base = (&form * &o_hom).dot(&o_hom);
        Some(Self {
            o_hom,
            q_base,
            det_exp: 2.0 / (n as f64 + 1.0),
        })
    }

    pub(crate) fn image_and_gap(&self, map: &ProjectiveMap) -> (DVector<f64>, f64) {
        let n = self.o_hom.len() - 1;
        let v = map.matrix() * &self.o_hom;
        let w = v[n];
        let img = v.rows(0, n).into_owned() / w;
        // tracked log-det: an LU determinant here would be pure noise once
        // the element's condition number passes 1/eps (distance ~18 in 2d),
        // silently flooring every deeper displacement near a constant
        let c2 = (self.det_exp * map.log_det_abs()).exp();
        (img, c2 * self.q_base / (w * w))
    }
}

fn orbit_displacement(
    dom: &ConvexDomain,
    o: &DVector<f64>,
    gap_o: f64,
    transport: Option<&DefectTransport>,
    map: &ProjectiveMap,
) -> Result<(DVector<f64>, f64)> {
    match transport {
        Some(tr) => {
            let (img, gap_img) = tr.image_and_gap(map);
            if !(gap_img > 0.0) || !img.iter().all(|v| v.is_finite()) {
                return Err(Error::NumericalFailure(
                    "transported image left the domain".into(),
                ));
            }
            let p = ChordPoint {
                point: o.clone(),
                defect: gap_o,
                t: 0.0,
            };
            let q = ChordPoint {
                point: img.clone(),
                defect: gap_img,
                t: 0.0,
            };
            let d = distance_between(dom, &p, &q)?;
            Ok((img, d))
        }
        None => {
            let img = map.apply_chart(o);
            let d = hilbert_distance(dom, o, &img)?;
            Ok((img, d))
        }
    }
}

/// Breadth-first enumeration of `{γ : d(o, γo) ≤ radius}`.
///
/// Candidates are generated level-parallel but merged in a fixed order, so
/// the result is identical for every thread count. Displacements are
/// evaluated before deduplication so that out-of-cutoff candidates never
/// enter the dedup set; `budget` caps the distinct elements retained.
///
/// Free (ping-pong) scenarios are pruned at the bare radius: nested
/// ping-pong regions make the displacement increase along reduced words, so
/// no prefix of an in-ball element ever leaves the ball. The observed
/// minimum increment is audited; if it ever comes out negative the whole
/// enumeration is redone with the generic overshoot slack.
pub fn orbit_ball(s: &GroupScenario, radius: f64, budget: usize) -> Result<OrbitBall> {
    if !(radius >= 0.0) || radius > s.max_radius {
        return Err(Error::Config(format!(
            "radius {radius} outside [0, {}]",
            s.max_radius
        )));
    }
    let dom = &s.domain;
    let o = &s.basepoint;
    let gap_o = dom.gap(o);
    let transport = DefectTransport::new(dom, o);
    let tr = transport.as_ref();
    let mut max_letter_disp = 0.0f64;
    for &l in &s.letters() {
        let (_, d) = orbit_displacement(dom, o, gap_o, tr, s.letter_map(l))?;
        max_letter_disp = max_letter_disp.max(d);
    }
    let wide_cutoff = radius + PRUNE_SLACK + max_letter_disp;

    if s.free_group {
        let ball = orbit_ball_pruned(s, radius, budget, radius)?;
        if ball.stats.min_increment >= -1e-9 {
            return Ok(ball);
        }
        return orbit_ball_pruned(s, radius, budget, wide_cutoff);
    }
    orbit_ball_pruned(s, radius, budget, wide_cutoff)
}

fn orbit_ball_pruned(
    s: &GroupScenario,
    radius: f64,
    budget: usize,
    cutoff: f64,
) -> Result<OrbitBall> {
    let dom = &s.domain;
    let o = &s.basepoint;
    let gap_o = dom.gap(o);
    let transport = DefectTransport::new(dom, o);
    let tr = transport.as_ref();
    let letters = s.letters();

    let identity = ProjectiveMap::identity(dom.dim()).with_word(Vec::new());
    let mut seen: HashSet<u64> = HashSet::new();
    {
        let (cells, _) = dedup_cells(&identity);
        seen.insert(key_hash(&cells));
    }
    let mut stats = OrbitStats {
        explored: 1,
        min_increment: f64::INFINITY,
        ..OrbitStats::default()
    };
    let mut kept = vec![OrbitElement {
        map: identity.clone(),
        image: o.clone(),
        distance: 0.0,
    }];
    let mut frontier: Vec<(ProjectiveMap, f64)> = vec![(identity, 0.0)];

    let mut word_len = 0usize;
    while !frontier.is_empty() {
        if word_len >= s.max_word_length {
            stats.word_cap_hit = true;
            break;
        }
        word_len += 1;

        let mut next: Vec<(ProjectiveMap, f64)> = Vec::new();
        for node_chunk in frontier.chunks(NODE_CHUNK) {
            let produced: Vec<(ProjectiveMap, f64, Result<(DVector<f64>, f64)>)> = node_chunk
                .par_iter()
                .flat_map_iter(|(map, pdist)| {
                    let last = map.word().and_then(|w| w.last().copied());
                    letters
                        .iter()
                        .filter(move |&&l| last != Some(-l))
                        .map(move |&l| {
                            let cand = map.compose(s.letter_map(l));
                            let res = orbit_displacement(dom, o, gap_o, tr, &cand);
                            (cand, *pdist, res)
                        })
                })
                .collect();

            for (cand, pdist, res) in produced {
                let (img, d) = match res {
                    Err(_) => {
                        stats.numeric_drops += 1;
                        continue;
                    }
                    Ok(v) => v,
                };
                if d > cutoff {
                    stats.pruned += 1;
                    continue;
                }
                let (cells, alts) = dedup_cells(&cand);
                let probes = probe_hashes(&cells, &alts);
                if probes.iter().any(|h| seen.contains(h)) {
                    stats.duplicates += 1;
                    continue;
                }
                seen.insert(probes[0]);
                stats.explored += 1;
                if stats.explored > budget {
                    return Err(Error::BudgetExceeded(format!(
                        "retained {} distinct elements (budget {budget}) at word length \
                         {word_len}; partial ball held {} elements within radius {radius}",
                        stats.explored,
                        kept.len()
                    )));
                }
                stats.min_increment = stats.min_increment.min(d - pdist);
                if d <= radius {
                    kept.push(OrbitElement {
                        map: cand.clone(),
                        image: img,
                        distance: d,
                    });
                }
                next.push((cand, d));
            }
        }
        frontier = next;
    }

    kept.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then_with(|| a.word().cmp(b.word()))
    });
    Ok(OrbitBall {
        elements: kept,
        radius,
        stats,
    })
}

#[derive(Debug, Clone)]
pub struct KappaAudit {
    /// Extremes over the ball of e^{2 d(o,γo)} / κ(γ).
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl KappaAudit {
    pub fn spread(&self) -> f64 {
        self.max_ratio / self.min_ratio
    }
}

/// Ratio statistics comparing displacement growth against the matrix
/// condition number over a ball.
pub fn kappa_distance_audit(ball: &OrbitBall) -> Result<KappaAudit> {
    if ball.is_empty() {
        return Err(Error::InsufficientData("empty orbit ball".into()));
    }
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    for e in &ball.elements {
        let ratio = (2.0 * e.distance).exp() / e.map.kappa();
        if !ratio.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "non-finite ratio for word {:?}",
                e.word()
            )));
        }
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
    }
    Ok(KappaAudit {
        min_ratio,
        max_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::words::free_reduce;
    use nalgebra::DMatrix;

    const TOL: f64 = 1e-10;

    fn boost_x(len: f64) -> DMatrix<f64> {
        let (c, s) = (len.cosh(), len.sinh());
        DMatrix::from_row_slice(3, 3, &[c, 0.0, s, 0.0, 1.0, 0.0, s, 0.0, c])
    }

    fn boost_y(len: f64) -> DMatrix<f64> {
        let (c, s) = (len.cosh(), len.sinh());
        DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, c, s, 0.0, s, c])
    }

    fn schottky(max_word_length: usize) -> GroupScenario {
        GroupScenario::new(
            ConvexDomain::unit_ball(2),
            vec![
                ProjectiveMap::new(boost_x(2.0)).unwrap(),
                ProjectiveMap::new(boost_y(2.0)).unwrap(),
            ],
            true,
            DVector::zeros(2),
            max_word_length,
            50.0,
        )
        .unwrap()
    }

    #[test]
    fn word_length_two_ball_has_seventeen_elements() {
        let s = schottky(2);
        let ball = orbit_ball(&s, 12.0, 1 << 20).unwrap();
        assert_eq!(ball.len(), 17);
        assert_eq!(ball.stats.duplicates, 0);
        assert_eq!(ball.stats.numeric_drops, 0);
        assert!(ball.stats.word_cap_hit);
        assert_eq!(ball.elements[0].distance, 0.0);
        assert_eq!(ball.elements[0].word(), &[] as &[i32]);
    }

    #[test]
    fn radius_zero_keeps_only_identity() {
        let s = schottky(8);
        let ball = orbit_ball(&s, 0.0, 1 << 20).unwrap();
        assert_eq!(ball.len(), 1);
        assert_eq!(ball.elements[0].word(), &[] as &[i32]);
    }

    #[test]
    fn balls_nest_and_count_within_matches() {
        let s = schottky(16);
        let small = orbit_ball(&s, 5.0, 1 << 20).unwrap();
        let large = orbit_ball(&s, 8.0, 1 << 20).unwrap();
        assert!(small.len() <= large.len());
        let large_words: HashSet<Vec<i32>> = large
            .elements
            .iter()
            .map(|e| e.word().to_vec())
            .collect();
        for e in &small.elements {
            assert!(large_words.contains(e.word()));
        }
        assert_eq!(large.count_within(5.0), small.len());
    }

    #[test]
    fn free_scenario_sees_no_matrix_duplicates() {
        let s = schottky(16);
        let ball = orbit_ball(&s, 8.0, 1 << 20).unwrap();
        assert_eq!(ball.stats.duplicates, 0);
        assert_eq!(ball.stats.numeric_drops, 0);
        for e in &ball.elements {
            assert_eq!(free_reduce(e.word()), e.word());
        }
    }

    #[test]
    fn displacement_grows_with_word_length_on_ping_pong() {
        let s = schottky(16);
        let ball = orbit_ball(&s, 9.0, 1 << 20).unwrap();
        // every letter extends the displacement for perpendicular-axis boosts
        for e in &ball.elements {
            let floor = 2.0 * e.word().len() as f64 - 1.2 * (e.word().len() as f64 - 1.0).max(0.0);
            assert!(
                e.distance >= floor - TOL,
                "word {:?} at distance {}",
                e.word(),
                e.distance
            );
        }
    }

    #[test]
    fn transported_distance_matches_direct_evaluation() {
        let s = schottky(16);
        let ball = orbit_ball(&s, 9.0, 1 << 20).unwrap();
        for e in ball.elements.iter().skip(1) {
            let direct = hilbert_distance(&s.domain, &s.basepoint, &e.image).unwrap();
            // the direct path evaluates the boundary gap with cancellation,
            // losing ~e^{2d} ulps; the transported path has no such loss
            let tol = 1e-12 + 1e-14 * (2.0 * e.distance).exp();
            assert!(
                (direct - e.distance).abs() < tol,
                "word {:?}: transported {} direct {}",
                e.word(),
                e.distance,
                direct
            );
        }
    }

    #[test]
    fn single_boost_displacement_equals_translation_amount() {
        let s = schottky(16);
        let ball = orbit_ball(&s, 8.5, 1 << 20).unwrap();
        let letter = ball
            .elements
            .iter()
            .find(|e| e.word() == [1])
            .expect("letter present");
        assert!((letter.distance - 2.0).abs() < 1e-12);
        let quad = ball
            .elements
            .iter()
            .find(|e| e.word() == [1, 1, 1, 1])
            .expect("fourth power present");
        // the composed matrix itself carries ~eps * e^d relative error, so
        // the displacement of the product cannot be sharper than that
        assert!((quad.distance - 8.0).abs() < 1e-8);
    }

    #[test]
    fn surface_relator_deduplicates_to_identity() {
        // commuting translations would do, but a genuinely non-free example
        // is better: two boosts along the same axis commute
        let s = GroupScenario::new(
            ConvexDomain::unit_ball(2),
            vec![
                ProjectiveMap::new(boost_x(1.0)).unwrap(),
                ProjectiveMap::new(boost_x(0.7)).unwrap(),
            ],
            false,
            DVector::zeros(2),
            12,
            50.0,
        )
        .unwrap();
        let ball = orbit_ball(&s, 4.0, 1 << 20).unwrap();
        assert!(ball.stats.duplicates > 0, "commutators must collide");
        assert_eq!(ball.stats.numeric_drops, 0);
        // elements are n*1.0 + m*0.7 displacements along one axis
        for e in &ball.elements {
            let expect: f64 = e.word().iter().map(|&l| match l {
                1 => 1.0,
                -1 => -1.0,
                2 => 0.7,
                -2 => -0.7,
                _ => unreachable!(),
            }).sum();
            assert!(
                (e.distance - expect.abs()).abs() < 1e-9,
                "word {:?} distance {} expected {}",
                e.word(),
                e.distance,
                expect.abs()
            );
        }
    }

    #[test]
    fn ping_pong_increments_stay_positive_and_radius_prune_is_complete() {
        let s = schottky(32);
        let tight = orbit_ball(&s, 9.0, 1 << 22).unwrap();
        assert!(
            tight.stats.min_increment > 0.5,
            "min increment {}",
            tight.stats.min_increment
        );
        // the bare-radius prune must agree with a generous overshoot slack
        let wide = orbit_ball_pruned(&s, 9.0, 1 << 22, 9.0 + 6.0).unwrap();
        assert_eq!(tight.len(), wide.len());
        for (a, b) in tight.elements.iter().zip(&wide.elements) {
            assert_eq!(a.word(), b.word());
        }
    }

    #[test]
    fn budget_overflow_reports_partial_state() {
        let s = schottky(16);
        let err = orbit_ball(&s, 10.0, 10).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded(_)));
    }

    #[test]
    fn kappa_ratio_is_bounded_on_ping_pong_ball() {
        let s = schottky(16);
        let ball = orbit_ball(&s, 8.0, 1 << 20).unwrap();
        let audit = kappa_distance_audit(&ball).unwrap();
        assert!(audit.min_ratio > 0.0);
        assert!(audit.max_ratio.is_finite());
        assert!(audit.spread() < 100.0, "spread {}", audit.spread());
        // identity alone gives ratio exactly 1
        let only_id = orbit_ball(&s, 0.0, 1 << 20).unwrap();
        let id_audit = kappa_distance_audit(&only_id).unwrap();
        assert!((id_audit.min_ratio - 1.0).abs() < 1e-12);
        assert!((id_audit.max_ratio - 1.0).abs() < 1e-12);
    }
}
