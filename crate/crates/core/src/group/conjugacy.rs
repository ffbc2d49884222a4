//! Primitive conjugacy classes of free scenarios and the length-spectrum
//! arithmeticity heuristic.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::projective::ProjectiveMap;

use super::classify::translation_length;
use super::scenario::GroupScenario;
use super::words::{canonical_rotation, inverse_word, is_primitive};

#[derive(Debug, Clone)]
pub struct ConjugacyClass {
    /// Canonical word: lexicographically minimal cyclic rotation (and, when
    /// unoriented, minimal against the inverse word's rotations too).
    pub word: Vec<i32>,
    pub representative: ProjectiveMap,
    /// Translation length of the class.
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct ConjugacyClassList {
    /// Sorted by word length, then lexicographically.
    pub classes: Vec<ConjugacyClass>,
    pub primitive_only: bool,
    /// When false, a class and its inverse were merged.
    pub oriented: bool,
}

fn visit_reduced(
    letters: &[i32],
    max_len: usize,
    word: &mut Vec<i32>,
    f: &mut impl FnMut(&[i32]),
) {
    if word.len() >= max_len {
        return;
    }
    for &l in letters {
        if word.last().is_some_and(|&y| y == -l) {
            continue;
        }
        word.push(l);
        f(word);
        visit_reduced(letters, max_len, word, f);
        word.pop();
    }
}

/// All primitive conjugacy classes of cyclically reduced word length at most
/// `max_len`. Classes are cyclic-rotation orbits; `oriented` keeps a class
/// and its inverse distinct (periodic flow orbits carry an orientation).
pub fn primitive_conjugacy_classes(
    s: &GroupScenario,
    max_len: usize,
    oriented: bool,
) -> Result<ConjugacyClassList> {
    if !s.free_group {
        return Err(Error::UnsupportedScenario(
            "conjugacy enumeration by words needs a free (ping-pong) scenario".into(),
        ));
    }
    let n = s.n_free() as i32;
    let letters: Vec<i32> = (1..=n).flat_map(|k| [k, -k]).collect();

    let mut seen: HashSet<Vec<i32>> = HashSet::new();
    let mut class_words: Vec<Vec<i32>> = Vec::new();
    let mut scratch = Vec::with_capacity(max_len);
    visit_reduced(&letters, max_len, &mut scratch, &mut |w: &[i32]| {
        if w.len() >= 2 && w[0] == -w[w.len() - 1] {
            return; // not cyclically reduced
        }
        if !is_primitive(w) {
            return;
        }
        let mut canon = canonical_rotation(w);
        if !oriented {
            let inv_canon = canonical_rotation(&inverse_word(w));
            if inv_canon < canon {
                canon = inv_canon;
            }
        }
        if seen.insert(canon.clone()) {
            class_words.push(canon);
        }
    });

    class_words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let classes = class_words
        .into_iter()
        .map(|word| {
            let representative = s.word_map(&word);
            let length = translation_length(&representative);
            ConjugacyClass {
                word,
                representative,
                length,
            }
        })
        .collect();
    Ok(ConjugacyClassList {
        classes,
        primitive_only: true,
        oriented,
    })
}

#[derive(Debug, Clone)]
pub struct NonarithmeticityReport {
    /// Approximate positive generator of the additive group the lengths span.
    pub approx_generator: f64,
    /// True when the generator collapsed below the cutoff — consistent with
    /// a dense length spectrum. Heuristic only: floating point cannot
    /// certify density.
    pub dense_consistent: bool,
}

fn approx_gcd(mut a: f64, mut b: f64, tol: f64) -> f64 {
    while b > tol {
        let r = a.rem_euclid(b);
        a = b;
        b = r;
    }
    if b == 0.0 {
        a
    } else {
        b
    }
}

/// Continued-fraction-style reduction of a set of lengths to an approximate
/// common generator, with floor cutoff `tol`.
pub fn nonarithmeticity_audit(lengths: &[f64], tol: f64) -> Result<NonarithmeticityReport> {
    if lengths.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 lengths, got {}",
            lengths.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!("cutoff {tol} must be positive")));
    }
    for &l in lengths {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::Config(format!("length {l} is not a positive real")));
        }
    }
    let mut g = lengths[0];
    for &l in &lengths[1..] {
        g = approx_gcd(g, l, tol);
    }
    Ok(NonarithmeticityReport {
        approx_generator: g,
        dense_consistent: g < tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ConvexDomain;
    use nalgebra::{DMatrix, DVector};

    fn boost_pair_scenario() -> GroupScenario {
        let boost_x = |len: f64| {
            let (c, s) = (f64::cosh(len), f64::sinh(len));
            DMatrix::from_row_slice(3, 3, &[c, 0.0, s, 0.0, 1.0, 0.0, s, 0.0, c])
        };
        let boost_y = |len: f64| {
            let (c, s) = (f64::cosh(len), f64::sinh(len));
            DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, c, s, 0.0, s, c])
        };
        GroupScenario::new(
            ConvexDomain::unit_ball(2),
            vec![
                ProjectiveMap::new(boost_x(2.0)).unwrap(),
                ProjectiveMap::new(boost_y(2.0)).unwrap(),
            ],
            true,
            DVector::zeros(2),
            32,
            50.0,
        )
        .unwrap()
    }

    #[test]
    fn oriented_class_counts_match_free_rank_two() {
        let s = boost_pair_scenario();
        let len1 = primitive_conjugacy_classes(&s, 1, true).unwrap();
        assert_eq!(len1.classes.len(), 4);
        let len2 = primitive_conjugacy_classes(&s, 2, true).unwrap();
        assert_eq!(len2.classes.len(), 8, "4 letters + 4 mixed length-2 classes");
        for c in &len2.classes {
            assert_eq!(c.word, canonical_rotation(&c.word));
        }
    }

    #[test]
    fn unoriented_counts_halve() {
        let s = boost_pair_scenario();
        assert_eq!(primitive_conjugacy_classes(&s, 1, false).unwrap().classes.len(), 2);
        assert_eq!(primitive_conjugacy_classes(&s, 2, false).unwrap().classes.len(), 4);
    }

    #[test]
    fn powers_are_excluded() {
        let s = boost_pair_scenario();
        let list = primitive_conjugacy_classes(&s, 4, true).unwrap();
        for c in &list.classes {
            assert!(is_primitive(&c.word), "non-primitive {:?}", c.word);
        }
        assert!(!list.classes.iter().any(|c| c.word == [1, 1]));
        assert!(!list.classes.iter().any(|c| c.word == [1, 2, 1, 2]));
        assert!(list.classes.iter().any(|c| c.word == [1, 1, 2]));
    }

    #[test]
    fn length_is_rotation_invariant() {
        let s = boost_pair_scenario();
        let w = [1, 2, -1, 2];
        let base = translation_length(&s.word_map(&w));
        assert!(base > 0.0);
        for i in 1..w.len() {
            let rot: Vec<i32> = w[i..].iter().chain(&w[..i]).copied().collect();
            let l = translation_length(&s.word_map(&rot));
            assert!((l - base).abs() < 1e-9, "rotation {rot:?}: {l} vs {base}");
        }
    }

    #[test]
    fn letter_classes_carry_generator_length() {
        let s = boost_pair_scenario();
        let list = primitive_conjugacy_classes(&s, 1, true).unwrap();
        for c in &list.classes {
            assert!((c.length - 2.0).abs() < 1e-9, "{:?}: {}", c.word, c.length);
        }
    }

    #[test]
    fn integer_lengths_reduce_to_unit() {
        let r = nonarithmeticity_audit(&[1.0, 2.0], 1e-6).unwrap();
        assert_eq!(r.approx_generator, 1.0);
        assert!(!r.dense_consistent);
    }

    #[test]
    fn irrational_ratio_collapses() {
        let r = nonarithmeticity_audit(&[1.0, 2.0f64.sqrt()], 1e-6).unwrap();
        assert!(r.approx_generator < 1e-6);
        assert!(r.dense_consistent);
    }

    #[test]
    fn schottky_length_spectrum_is_dense_consistent() {
        let s = boost_pair_scenario();
        let list = primitive_conjugacy_classes(&s, 3, true).unwrap();
        let lengths: Vec<f64> = list.classes.iter().map(|c| c.length).collect();
        assert_eq!(lengths.len(), 16, "4 + 4 + 8 classes through length 3");
        let r = nonarithmeticity_audit(&lengths, 1e-6).unwrap();
        assert!(r.dense_consistent, "generator {}", r.approx_generator);
    }

    #[test]
    fn non_free_scenario_is_rejected() {
        let boost_x = |len: f64| {
            let (c, s) = (f64::cosh(len), f64::sinh(len));
            DMatrix::from_row_slice(3, 3, &[c, 0.0, s, 0.0, 1.0, 0.0, s, 0.0, c])
        };
        let s = GroupScenario::new(
            ConvexDomain::unit_ball(2),
            vec![ProjectiveMap::new(boost_x(1.0)).unwrap()],
            false,
            DVector::zeros(2),
            8,
            20.0,
        )
        .unwrap();
        let err = primitive_conjugacy_classes(&s, 2, true).unwrap_err();
        assert!(matches!(err, Error::UnsupportedScenario(_)));
    }
}
