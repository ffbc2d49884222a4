//! Ready-made group scenarios: free boost pairs on the disk, a closed-surface
//! side-pairing group, and cusp-type unipotent actions on balls.

use nalgebra::{DMatrix, DVector};

use crate::domain::ConvexDomain;
use crate::error::{Error, Result};
use crate::projective::ProjectiveMap;

use super::scenario::GroupScenario;

/// Rotation of the unit disk chart about the origin.
pub fn plane_rotation(angle: f64) -> ProjectiveMap {
    let (c, s) = (angle.cos(), angle.sin());
    ProjectiveMap::new(DMatrix::from_row_slice(
        3,
        3,
        &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0],
    ))
    .unwrap()
}

/// Translation by `length` along the x-axis chord of the unit disk.
pub fn plane_boost_x(length: f64) -> ProjectiveMap {
    let (c, s) = (length.cosh(), length.sinh());
    ProjectiveMap::new(DMatrix::from_row_slice(
        3,
        3,
        &[c, 0.0, s, 0.0, 1.0, 0.0, s, 0.0, c],
    ))
    .unwrap()
}

/// Translation by `length` along the y-axis chord of the unit disk.
pub fn plane_boost_y(length: f64) -> ProjectiveMap {
    let (c, s) = (length.cosh(), length.sinh());
    ProjectiveMap::new(DMatrix::from_row_slice(
        3,
        3,
        &[1.0, 0.0, 0.0, 0.0, c, s, 0.0, s, c],
    ))
    .unwrap()
}

/// Translation by `length` along the diameter at `angle` from the x-axis.
pub fn axis_boost(angle: f64, length: f64) -> ProjectiveMap {
    plane_rotation(angle)
        .compose(&plane_boost_x(length))
        .compose(&plane_rotation(-angle))
}

fn sym_square(a: f64, b: f64, c: f64, d: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(
        3,
        3,
        &[
            a * a,
            2.0 * a * b,
            b * b,
            a * c,
            a * d + b * c,
            b * d,
            c * c,
            2.0 * c * d,
            d * d,
        ],
    )
}

/// Unit-disk action of a real 2x2 matrix via its symmetric square,
/// conjugated into the disk chart. Requires `ad - bc != 0`.
pub fn disk_from_sl2(a: f64, b: f64, c: f64, d: f64) -> Result<ProjectiveMap> {
    if (a * d - b * c).abs() < 1e-14 {
        return Err(Error::InvalidGeometry(format!(
            "2x2 input is singular: det = {}",
            a * d - b * c
        )));
    }
    let t = DMatrix::from_row_slice(3, 3, &[0.5, 0.0, -0.5, 0.0, 1.0, 0.0, 0.5, 0.0, 0.5]);
    let t_inv = t.clone().try_inverse().unwrap();
    ProjectiveMap::new(&t * sym_square(a, b, c, d) * &t_inv)
}

fn schottky_pair(length: f64) -> Result<GroupScenario> {
    GroupScenario::new(
        ConvexDomain::unit_ball(2),
        vec![plane_boost_x(length), plane_boost_y(length)],
        true,
        DVector::zeros(2),
        64,
        14.0,
    )
}

/// Side length such that eight copies of the regular octagon tile around a
/// vertex: the side-pairing translations all share this translation length.
fn octagon_translation_length() -> f64 {
    2.0 * (1.0 + 2.0f64.sqrt()).acosh()
}

fn surface_octagon() -> Result<GroupScenario> {
    let l0 = octagon_translation_length();
    let gens = (0..4)
        .map(|k| axis_boost(k as f64 * std::f64::consts::FRAC_PI_4, l0))
        .collect();
    GroupScenario::new(
        ConvexDomain::unit_ball(2),
        gens,
        false,
        DVector::zeros(2),
        64,
        12.0,
    )
}

fn parabolic_rank_1() -> Result<GroupScenario> {
    GroupScenario::new(
        ConvexDomain::unit_ball(2),
        vec![disk_from_sl2(1.0, 1.0, 0.0, 1.0)?],
        true,
        DVector::zeros(2),
        4096,
        16.0,
    )
}

/// Unipotent translation of the 3-ball fixing one boundary point, built as
/// the (exact, nilpotent) exponential of a null rotation of the form
/// diag(-1,-1,-1,1).
fn null_rotation(spacelike: &DVector<f64>) -> ProjectiveMap {
    let g_form = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -1.0, -1.0, 1.0]));
    let n = DVector::from_vec(vec![0.0, 0.0, 1.0, 1.0]);
    let gs = &g_form * spacelike;
    let gn = &g_form * &n;
    let x = &n * gs.transpose() - spacelike * gn.transpose();
    let m = DMatrix::identity(4, 4) + &x + (&x * &x).scale(0.5);
    ProjectiveMap::new(m).unwrap()
}

fn parabolic_rank_2() -> Result<GroupScenario> {
    GroupScenario::new(
        ConvexDomain::unit_ball(3),
        vec![
            null_rotation(&DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0])),
            null_rotation(&DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0])),
        ],
        false,
        DVector::zeros(3),
        2048,
        9.0,
    )
}

/// Names and one-line descriptions of the built-in scenarios.
pub fn list_presets() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "schottky-2",
            "free pair of perpendicular disk translations, length 2",
        ),
        (
            "schottky-2-long",
            "free pair of perpendicular disk translations, length 3",
        ),
        (
            "schottky-2-xlong",
            "free pair of perpendicular disk translations, length 4",
        ),
        (
            "surface-octagon",
            "four side-pairing translations of the regular octagon (closed genus-2 quotient)",
        ),
        (
            "parabolic-rank-1",
            "single unipotent disk translation fixing one boundary point",
        ),
        (
            "parabolic-rank-2",
            "two commuting unipotent 3-ball translations fixing one boundary point",
        ),
    ]
}

/// Builds a named built-in scenario.
pub fn preset(name: &str) -> Result<GroupScenario> {
    match name {
        "schottky-2" => schottky_pair(2.0),
        "schottky-2-long" => schottky_pair(3.0),
        "schottky-2-xlong" => schottky_pair(4.0),
        "surface-octagon" => surface_octagon(),
        "parabolic-rank-1" => parabolic_rank_1(),
        "parabolic-rank-2" => parabolic_rank_2(),
        other => {
            let names: Vec<&str> = list_presets().iter().map(|(n, _)| *n).collect();
            Err(Error::Config(format!(
                "unknown preset '{other}'; available: {}",
                names.join(", ")
            )))
        }
    }
}
