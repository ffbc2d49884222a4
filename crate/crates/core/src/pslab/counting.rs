//! Orbit counting, closed-geodesic counting, and the two-sided
//! equidistribution experiment.

use std::collections::HashMap;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    chord_through, distance_to_chord_point, hilbert_distance, ray_passes_within, ChordPoint,
};
use crate::group::orbit::DefectTransport;
use crate::group::words::inverse_word;
use crate::group::{orbit_ball, primitive_conjugacy_classes, GroupScenario, OrbitBall};

use super::exponent::slope_fit;
use super::measure::ps_density;

/// Rows averaged for the orbit-count plateau statistic.
const PLATEAU_ROWS: usize = 3;
/// Supercritical offset for the proxy measures of the equidistribution
/// experiment: `s = delta_hat * (1 + 0.02)`.
const PROXY_SUPERCRITICAL: f64 = 0.02;
/// Slack when comparing translation lengths against grid values.
const LENGTH_GRID_EPS: f64 = 1e-12;

/// Growth-rate fit from sorted distance samples: least-squares slope of
/// `ln N(r)` over integer radii in the upper half of `[1, floor(t_max)]`.
fn exponent_from_sorted_distances(sorted: &[f64], t_max: f64) -> Result<(f64, f64)> {
    let r_max = t_max.floor() as usize;
    let lo = r_max.div_ceil(2).max(1);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in lo..=r_max {
        let n = sorted.partition_point(|&d| d <= r as f64);
        if n > 0 {
            xs.push(r as f64);
            ys.push((n as f64).ln());
        }
    }
    if xs.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "growth fit needs >= 4 usable radii in [{lo}, {r_max}], got {}",
            xs.len()
        )));
    }
    let (slope, stderr) = slope_fit(&xs, &ys)?;
    Ok((slope.max(0.0), stderr))
}

/// One radius of the orbit-counting table.
#[derive(Debug, Clone)]
pub struct OrbitCountRow {
    pub t: f64,
    /// `N(t) = #{gamma : d(x, gamma y) <= t}`.
    pub count: usize,
    /// `N(t) e^{-delta_hat t}`; flattens onto the counting plateau.
    pub normalized: f64,
}

/// Orbit-counting table with its growth fit and plateau statistic.
#[derive(Debug, Clone)]
pub struct OrbitCountReport {
    pub rows: Vec<OrbitCountRow>,
    pub delta_hat: f64,
    pub delta_stderr: f64,
    /// Mean normalized count over the last [`PLATEAU_ROWS`] rows.
    pub plateau_value: f64,
    /// `(max - min) / mean` of the normalized counts over those rows.
    pub plateau_drift: f64,
}

/// Hilbert distances from `x` to the image of `y` under every ball element,
/// in ball enumeration order.
fn pair_distances(
    scen: &GroupScenario,
    ball: &OrbitBall,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<Vec<f64>> {
    let dom = &scen.domain;
    let transport = DefectTransport::new(dom, y);
    ball.elements
        .par_iter()
        .map(|e| match &transport {
            Some(t) => {
                let (img, gap) = t.image_and_gap(&e.map);
                let cp = ChordPoint {
                    point: img,
                    defect: gap,
                    t: 0.0,
                };
                distance_to_chord_point(dom, x, &cp)
            }
            None => hilbert_distance(dom, x, &e.map.apply_chart(y)),
        })
        .collect()
}

/// Counts `N(t) = #{gamma : d(x, gamma y) <= t}` at each requested radius
/// and fits the growth rate; when `x` and `y` are both the scenario
/// basepoint the counts coincide exactly with the ball's own tallies.
pub fn orbit_counting_experiment(
    scen: &GroupScenario,
    x: &DVector<f64>,
    y: &DVector<f64>,
    radii: &[f64],
    budget: usize,
) -> Result<OrbitCountReport> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] < 0.0 {
        return Err(Error::Config(
            "radii must be non-negative and strictly increasing".into(),
        ));
    }
    let t_max = *radii.last().unwrap();
    let at_basepoint = x == &scen.basepoint && y == &scen.basepoint;
    let pad = if at_basepoint {
        0.0
    } else {
        hilbert_distance(&scen.domain, &scen.basepoint, x)?
            + hilbert_distance(&scen.domain, &scen.basepoint, y)?
    };
    let ball = orbit_ball(scen, t_max + pad, budget)?;
    let sorted: Vec<f64> = if at_basepoint {
        ball.elements.iter().map(|e| e.distance).collect()
    } else {
        let mut d = pair_distances(scen, &ball, x, y)?;
        d.sort_unstable_by(f64::total_cmp);
        d
    };
    let (delta_hat, delta_stderr) = exponent_from_sorted_distances(&sorted, t_max)?;
    let rows: Vec<OrbitCountRow> = radii
        .iter()
        .map(|&t| {
            let count = if at_basepoint {
                ball.count_within(t)
            } else {
                sorted.partition_point(|&d| d <= t)
            };
            OrbitCountRow {
                t,
                count,
                normalized: count as f64 * (-delta_hat * t).exp(),
            }
        })
        .collect();
    let top = &rows[rows.len().saturating_sub(PLATEAU_ROWS)..];
    let vals: Vec<f64> = top.iter().map(|r| r.normalized).collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(OrbitCountReport {
        rows,
        delta_hat,
        delta_stderr,
        plateau_value: mean,
        plateau_drift: if mean > 0.0 { (max - min) / mean } else { f64::NAN },
    })
}

/// One grid length of the closed-geodesic table.
#[derive(Debug, Clone)]
pub struct GeodesicCountRow {
    pub length: f64,
    /// Primitive oriented classes with translation length at most `length`.
    pub count: usize,
    /// `count * delta_hat * length * e^{-delta_hat * length}`; tends to 1
    /// under the prime-geodesic asymptotic.
    pub normalized: f64,
}

/// Closed-geodesic counting table on a translation-length grid.
#[derive(Debug, Clone)]
pub struct GeodesicCountReport {
    pub rows: Vec<GeodesicCountRow>,
    pub delta_hat: f64,
    /// Completeness horizon: counts at lengths beyond this could miss
    /// classes of longer words and are not reported.
    pub grid_max: f64,
    /// Enumerated primitive oriented classes (all word lengths).
    pub class_count: usize,
    pub bottom_quartile_mean: f64,
    pub top_quartile_mean: f64,
}

/// Cumulative counts of primitive oriented conjugacy classes by translation
/// length, normalized by the prime-geodesic asymptotic `e^{delta l}/(delta l)`.
///
/// The grid stops at the shortest translation length realized by words of
/// exactly `max_len` letters: classes beyond the enumeration horizon have
/// longer words, so counts below that length are complete for ping-pong
/// scenarios where length grows with the word.
pub fn geodesic_counting_experiment(
    scen: &GroupScenario,
    max_len: usize,
    grid_points: usize,
    budget: usize,
) -> Result<GeodesicCountReport> {
    if max_len == 0 || grid_points == 0 {
        return Err(Error::Config(
            "need a positive word length and grid size".into(),
        ));
    }
    let classes = primitive_conjugacy_classes(scen, max_len, true)?;
    if classes.classes.is_empty() {
        return Err(Error::InsufficientData("no conjugacy classes".into()));
    }
    let delta_hat =
        super::exponent::critical_exponent_at(scen, scen.max_radius, budget)?.delta_hat;
    let mut lengths: Vec<f64> = classes.classes.iter().map(|c| c.length).collect();
    let grid_max = classes
        .classes
        .iter()
        .filter(|c| c.word.len() == max_len)
        .map(|c| c.length)
        .fold(f64::INFINITY, f64::min);
    let grid_max = if grid_max.is_finite() {
        grid_max
    } else {
        lengths.iter().copied().fold(0.0f64, f64::max)
    };
    lengths.sort_unstable_by(f64::total_cmp);
    let l_min = lengths[0];

    let grid: Vec<f64> = if grid_max <= l_min {
        vec![grid_max.max(l_min)]
    } else {
        (0..grid_points)
            .map(|j| l_min + (grid_max - l_min) * j as f64 / (grid_points - 1).max(1) as f64)
            .collect()
    };
    let rows: Vec<GeodesicCountRow> = grid
        .iter()
        .map(|&l| {
            let count = lengths.partition_point(|&v| v <= l + LENGTH_GRID_EPS);
            GeodesicCountRow {
                length: l,
                count,
                normalized: count as f64 * delta_hat * l * (-delta_hat * l).exp(),
            }
        })
        .collect();
    let q = (rows.len() / 4).max(1);
    let mean = |slice: &[GeodesicCountRow]| {
        slice.iter().map(|r| r.normalized).sum::<f64>() / slice.len() as f64
    };
    Ok(GeodesicCountReport {
        delta_hat,
        grid_max,
        class_count: classes.classes.len(),
        bottom_quartile_mean: mean(&rows[..q]),
        top_quartile_mean: mean(&rows[rows.len() - q..]),
        rows,
    })
}

/// A boundary cap realized as a shadow: directions whose ray from the
/// experiment viewpoint passes within `radius` of the interior `anchor`.
#[derive(Debug, Clone)]
pub struct BoundaryCap {
    pub anchor: DVector<f64>,
    pub radius: f64,
}

/// One radius of the equidistribution table. `nu_*` are the damped counts
/// `#{pairs} * e^{-delta_hat t}` for each cap combination.
#[derive(Debug, Clone)]
pub struct EquidistributionRow {
    pub t: f64,
    pub n_ab: usize,
    pub n_a2b2: usize,
    pub n_ab2: usize,
    pub n_a2b: usize,
    pub nu_ab: f64,
    pub nu_a2b2: f64,
    pub nu_ab2: f64,
    pub nu_a2b: f64,
    /// `nu(AxB) nu(A'xB') / (nu(AxB') nu(A'xB))`; the product-measure limit
    /// makes this converge to 1.
    pub cross_ratio: f64,
    /// `nu(AxB)/nu(A'xB)`, converging to `mu_x(A)/mu_x(A')`.
    pub marginal_a: f64,
    /// `nu(AxB)/nu(AxB')`, converging to `mu_y(B)/mu_y(B')`.
    pub marginal_b: f64,
}

/// Equidistribution table with the measure-proxy reference ratios.
#[derive(Debug, Clone)]
pub struct EquidistributionReport {
    pub rows: Vec<EquidistributionRow>,
    pub delta_hat: f64,
    /// Cap-mass cross-ratio of the proxy measures; identically 1 by the
    /// product structure, kept as an explicit reference column.
    pub proxy_cross_ratio: f64,
    /// `mu_x(A)/mu_x(A')` from the proxy measure at the x viewpoint.
    pub proxy_marginal_a: f64,
    /// `mu_y(B)/mu_y(B')` from the proxy measure at the y viewpoint.
    pub proxy_marginal_b: f64,
    /// Elements paired with their inverse inside the ball.
    pub matched_elements: usize,
}

/// Membership of the direction of `img` seen from `view` in a cap;
/// `anchor_depth` is the precomputed `d(view, anchor)`.
fn cap_hit(
    scen: &GroupScenario,
    view: &DVector<f64>,
    img: &DVector<f64>,
    cap: &BoundaryCap,
    anchor_depth: f64,
) -> Result<bool> {
    let dom = &scen.domain;
    let dir = img - view;
    if dir.norm() < 1e-12 * dom.extent() {
        return Ok(false);
    }
    let chord = chord_through(dom, view, &dir)?;
    ray_passes_within(dom, &cap.anchor, anchor_depth, &chord, cap.radius)
}

/// Two-sided equidistribution of `(gamma y, gamma^{-1} x)` directions over
/// cap pairs `(A or A') x (B or B')`, against the product of the proxy
/// measures. Cross-ratios of the damped counts cancel every unknown global
/// constant and must approach the proxy cross-ratio 1; the marginal ratios
/// approach the proxy cap-mass ratios.
#[allow(clippy::too_many_arguments)]
pub fn equidistribution_experiment(
    scen: &GroupScenario,
    x: &DVector<f64>,
    y: &DVector<f64>,
    cap_a: &BoundaryCap,
    cap_a2: &BoundaryCap,
    cap_b: &BoundaryCap,
    cap_b2: &BoundaryCap,
    radii: &[f64],
    budget: usize,
) -> Result<EquidistributionReport> {
    if !scen.free_group {
        return Err(Error::UnsupportedScenario(
            "pairing elements with their inverses needs a free (ping-pong) scenario".into(),
        ));
    }
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
        return Err(Error::Config(
            "radii must be positive and strictly increasing".into(),
        ));
    }
    for cap in [cap_a, cap_a2, cap_b, cap_b2] {
        if !scen.domain.contains(&cap.anchor) {
            return Err(Error::OutsideDomain(
                "cap anchors must be interior points".into(),
            ));
        }
        if !(cap.radius > 0.0) {
            return Err(Error::Config("cap radius must be positive".into()));
        }
    }
    let t_max = *radii.last().unwrap();
    let at_basepoint = x == &scen.basepoint && y == &scen.basepoint;
    let pad = if at_basepoint {
        0.0
    } else {
        hilbert_distance(&scen.domain, &scen.basepoint, x)?
            + hilbert_distance(&scen.domain, &scen.basepoint, y)?
    };
    let ball = orbit_ball(scen, t_max + pad, budget)?;
    let dom = &scen.domain;
    let transport_x = DefectTransport::new(dom, x);
    let transport_y = DefectTransport::new(dom, y);
    let depth_a = hilbert_distance(dom, x, &cap_a.anchor)?;
    let depth_a2 = hilbert_distance(dom, x, &cap_a2.anchor)?;
    let depth_b = hilbert_distance(dom, y, &cap_b.anchor)?;
    let depth_b2 = hilbert_distance(dom, y, &cap_b2.anchor)?;

    // per element: d(x, gamma y), flags of gamma y from x against A/A',
    // flags of (element applied to x) from y against B/B'
    struct ElementView {
        dist: f64,
        a: bool,
        a2: bool,
        b: bool,
        b2: bool,
    }
    let views: Vec<Option<ElementView>> = ball
        .elements
        .par_iter()
        .map(|e| -> Result<Option<ElementView>> {
            if e.word().is_empty() {
                return Ok(None); // the identity has no direction
            }
            let (gy, dist) = if at_basepoint {
                (e.image.clone(), e.distance)
            } else {
                match &transport_y {
                    Some(t) => {
                        let (img, gap) = t.image_and_gap(&e.map);
                        let cp = ChordPoint {
                            point: img.clone(),
                            defect: gap,
                            t: 0.0,
                        };
                        (img, distance_to_chord_point(dom, x, &cp)?)
                    }
                    None => {
                        let img = e.map.apply_chart(y);
                        let d = hilbert_distance(dom, x, &img)?;
                        (img, d)
                    }
                }
            };
            let ex = if at_basepoint {
                e.image.clone()
            } else {
                match &transport_x {
                    Some(t) => t.image_and_gap(&e.map).0,
                    None => e.map.apply_chart(x),
                }
            };
            Ok(Some(ElementView {
                dist,
                a: cap_hit(scen, x, &gy, cap_a, depth_a)?,
                a2: cap_hit(scen, x, &gy, cap_a2, depth_a2)?,
                b: cap_hit(scen, y, &ex, cap_b, depth_b)?,
                b2: cap_hit(scen, y, &ex, cap_b2, depth_b2)?,
            }))
        })
        .collect::<Result<Vec<_>>>()?;

    let index: HashMap<&[i32], usize> = ball
        .elements
        .iter()
        .enumerate()
        .map(|(i, e)| (e.word(), i))
        .collect();

    // pair gamma with its inverse and take the four joint memberships
    struct PairHit {
        dist: f64,
        ab: bool,
        a2b2: bool,
        ab2: bool,
        a2b: bool,
    }
    let mut pairs: Vec<PairHit> = Vec::new();
    for (i, e) in ball.elements.iter().enumerate() {
        let Some(v) = &views[i] else { continue };
        let inv = inverse_word(e.word());
        let Some(&j) = index.get(inv.as_slice()) else {
            continue; // inverse fell outside the enumeration cutoff
        };
        let Some(vj) = &views[j] else { continue };
        pairs.push(PairHit {
            dist: v.dist,
            ab: v.a && vj.b,
            a2b2: v.a2 && vj.b2,
            ab2: v.a && vj.b2,
            a2b: v.a2 && vj.b,
        });
    }
    let matched_elements = pairs.len();
    if matched_elements == 0 {
        return Err(Error::InsufficientData(
            "no element/inverse pairs inside the ball".into(),
        ));
    }

    let all_dists: Vec<f64> = {
        let mut d: Vec<f64> = pairs.iter().map(|p| p.dist).collect();
        d.sort_unstable_by(f64::total_cmp);
        d
    };
    let (delta_hat, _) = exponent_from_sorted_distances(&all_dists, t_max)?;

    let rows: Vec<EquidistributionRow> = radii
        .iter()
        .map(|&t| {
            let mut n = [0usize; 4];
            for p in &pairs {
                if p.dist > t {
                    continue;
                }
                n[0] += p.ab as usize;
                n[1] += p.a2b2 as usize;
                n[2] += p.ab2 as usize;
                n[3] += p.a2b as usize;
            }
            let damp = (-delta_hat * t).exp();
            let nu: Vec<f64> = n.iter().map(|&c| c as f64 * damp).collect();
            EquidistributionRow {
                t,
                n_ab: n[0],
                n_a2b2: n[1],
                n_ab2: n[2],
                n_a2b: n[3],
                nu_ab: nu[0],
                nu_a2b2: nu[1],
                nu_ab2: nu[2],
                nu_a2b: nu[3],
                cross_ratio: (nu[0] * nu[1]) / (nu[2] * nu[3]),
                marginal_a: nu[0] / nu[3],
                marginal_b: nu[0] / nu[2],
            }
        })
        .collect();
    let last = rows.last().unwrap();
    if last.n_ab == 0 || last.n_a2b2 == 0 || last.n_ab2 == 0 || last.n_a2b == 0 {
        return Err(Error::InsufficientData(format!(
            "a cap combination captured no pairs at t = {t_max}: counts ({}, {}, {}, {})",
            last.n_ab, last.n_ab2, last.n_a2b, last.n_a2b2
        )));
    }

    // proxy cap masses from the orbital measures at both viewpoints
    let s_proxy = delta_hat * (1.0 + PROXY_SUPERCRITICAL);
    let mu_x = ps_density(scen, &ball, x, s_proxy, delta_hat)?;
    let mu_y = ps_density(scen, &ball, y, s_proxy, delta_hat)?;
    let mut mass = [0.0f64; 4]; // x:A, x:A', y:B, y:B'
    for (i, v) in views.iter().enumerate() {
        let Some(v) = v else { continue };
        mass[0] += if v.a { mu_x.atoms[i].weight } else { 0.0 };
        mass[1] += if v.a2 { mu_x.atoms[i].weight } else { 0.0 };
        mass[2] += if v.b { mu_y.atoms[i].weight } else { 0.0 };
        mass[3] += if v.b2 { mu_y.atoms[i].weight } else { 0.0 };
    }
    if mass.iter().any(|&m| m <= 0.0) {
        return Err(Error::InsufficientData(format!(
            "a cap has zero proxy mass: ({:.3e}, {:.3e}, {:.3e}, {:.3e})",
            mass[0], mass[1], mass[2], mass[3]
        )));
    }
    Ok(EquidistributionReport {
        rows,
        delta_hat,
        proxy_cross_ratio: (mass[0] * mass[2] * mass[1] * mass[3])
            / (mass[0] * mass[3] * mass[1] * mass[2]),
        proxy_marginal_a: mass[0] / mass[1],
        proxy_marginal_b: mass[2] / mass[3],
        matched_elements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{preset, DEFAULT_ELEMENT_BUDGET};

    #[test]
    fn basepoint_counts_match_the_ball_exactly() {
        let s = preset("schottky-2").unwrap();
        let radii: Vec<f64> = (0..=8).map(|k| k as f64).collect();
        let rep = orbit_counting_experiment(
            &s,
            &s.basepoint,
            &s.basepoint,
            &radii,
            DEFAULT_ELEMENT_BUDGET,
        )
        .unwrap();
        let ball = orbit_ball(&s, 8.0, DEFAULT_ELEMENT_BUDGET).unwrap();
        assert_eq!(rep.rows[0].count, 1, "identity only at t = 0");
        for row in &rep.rows {
            assert_eq!(row.count, ball.count_within(row.t), "t = {}", row.t);
        }
        for w in rep.rows.windows(2) {
            assert!(w[1].count >= w[0].count);
        }
    }

    #[test]
    fn offset_viewpoints_match_a_direct_scan() {
        let s = preset("schottky-2").unwrap();
        let x = s.letter_map(1).apply_chart(&s.basepoint);
        let y = DVector::from_vec(vec![0.1, 0.12]);
        let radii = [2.0, 3.0, 4.0, 5.0, 6.0];
        let rep =
            orbit_counting_experiment(&s, &x, &y, &radii, DEFAULT_ELEMENT_BUDGET).unwrap();
        // independent oracle: raw-coordinate distances over a wide ball
        let ball = orbit_ball(&s, 11.0, DEFAULT_ELEMENT_BUDGET).unwrap();
        for &t in &radii {
            let direct = ball
                .elements
                .iter()
                .filter(|e| {
                    hilbert_distance(&s.domain, &x, &e.map.apply_chart(&y)).unwrap() <= t
                })
                .count();
            let row = rep.rows.iter().find(|r| r.t == t).unwrap();
            assert_eq!(row.count, direct, "t = {t}");
        }
    }

    #[test]
    fn decreasing_radii_are_rejected() {
        let s = preset("schottky-2").unwrap();
        assert!(matches!(
            orbit_counting_experiment(
                &s,
                &s.basepoint,
                &s.basepoint,
                &[4.0, 3.0],
                DEFAULT_ELEMENT_BUDGET
            ),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn length_one_classes_count_four() {
        let s = preset("schottky-2").unwrap();
        let rep = geodesic_counting_experiment(&s, 1, 8, DEFAULT_ELEMENT_BUDGET).unwrap();
        assert_eq!(rep.class_count, 4);
        assert_eq!(rep.rows.len(), 1, "degenerate grid collapses to one row");
        assert_eq!(rep.rows[0].count, 4);
        assert!((rep.rows[0].length - 2.0).abs() < 1e-9);
        let expect = 4.0 * rep.delta_hat * 2.0 * (-rep.delta_hat * 2.0).exp();
        assert!((rep.rows[0].normalized - expect).abs() < 1e-12);
    }

    #[test]
    fn geodesic_grid_counts_are_cumulative_and_complete() {
        let s = preset("schottky-2").unwrap();
        let rep = geodesic_counting_experiment(&s, 6, 12, DEFAULT_ELEMENT_BUDGET).unwrap();
        assert!(rep.rows.len() == 12);
        for w in rep.rows.windows(2) {
            assert!(w[1].count >= w[0].count);
            assert!(w[1].length > w[0].length);
        }
        assert!(rep.rows.last().unwrap().count > 4);
        assert!(rep.grid_max > 2.0);
        // classes at the horizon are exactly those the cumulative row holds
        let classes = primitive_conjugacy_classes(&s, 6, true).unwrap();
        let direct = classes
            .classes
            .iter()
            .filter(|c| c.length <= rep.grid_max + 1e-12)
            .count();
        assert_eq!(rep.rows.last().unwrap().count, direct);
    }

    #[test]
    fn non_free_scenarios_cannot_count_geodesics_by_words() {
        let s = preset("surface-octagon").unwrap();
        assert!(matches!(
            geodesic_counting_experiment(&s, 3, 8, DEFAULT_ELEMENT_BUDGET),
            Err(Error::UnsupportedScenario(_))
        ));
    }

    fn letter_caps(s: &GroupScenario, r: f64) -> [BoundaryCap; 4] {
        let anchor = |l: i32| BoundaryCap {
            anchor: s.letter_map(l).apply_chart(&s.basepoint),
            radius: r,
        };
        [anchor(1), anchor(-1), anchor(2), anchor(-2)]
    }

    #[test]
    fn identical_caps_give_cross_ratio_one_exactly() {
        let s = preset("schottky-2").unwrap();
        let [a, _, b, _] = letter_caps(&s, 2.0);
        let rep = equidistribution_experiment(
            &s,
            &s.basepoint,
            &s.basepoint,
            &a,
            &a,
            &b,
            &b,
            &[6.0, 8.0],
            DEFAULT_ELEMENT_BUDGET,
        )
        .unwrap();
        for row in &rep.rows {
            assert_eq!(row.cross_ratio, 1.0, "t = {}", row.t);
            assert_eq!(row.marginal_a, 1.0);
            assert_eq!(row.marginal_b, 1.0);
        }
        assert_eq!(rep.proxy_cross_ratio, 1.0);
    }

    #[test]
    fn swapping_the_a_caps_inverts_the_cross_ratio() {
        let s = preset("schottky-2").unwrap();
        let [a, a2, b, b2] = letter_caps(&s, 2.0);
        let run = |p: &BoundaryCap, q: &BoundaryCap| {
            equidistribution_experiment(
                &s,
                &s.basepoint,
                &s.basepoint,
                p,
                q,
                &b,
                &b2,
                &[8.0],
                DEFAULT_ELEMENT_BUDGET,
            )
            .unwrap()
        };
        let fwd = run(&a, &a2);
        let swp = run(&a2, &a);
        let prod = fwd.rows[0].cross_ratio * swp.rows[0].cross_ratio;
        assert!((prod - 1.0).abs() < 1e-12, "product {prod}");
    }

    #[test]
    fn starved_cap_reports_insufficient_data() {
        // radius 1.5 keeps perpendicular letter families (at distance
        // exactly 2) strictly outside, avoiding knife-edge membership
        let s = preset("schottky-2").unwrap();
        let [a, a2, b, _] = letter_caps(&s, 1.5);
        let tiny = BoundaryCap {
            anchor: DVector::from_vec(vec![0.0, -0.9995]),
            radius: 1e-6,
        };
        assert!(matches!(
            equidistribution_experiment(
                &s,
                &s.basepoint,
                &s.basepoint,
                &a,
                &a2,
                &b,
                &tiny,
                &[6.0],
                DEFAULT_ELEMENT_BUDGET,
            ),
            Err(Error::InsufficientData(_))
        ));
    }
}
