//! A discrete-group acting scenario: a convex domain, a generating set of
//! projective automorphisms, and enumeration limits.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::ConvexDomain;
use crate::error::{Error, Result};
use crate::projective::ProjectiveMap;

/// Samples drawn when checking that each generator preserves the domain.
const PRESERVATION_SAMPLES: usize = 1_000;
/// Images may leave the domain by at most this fraction of its extent.
const PRESERVATION_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct GroupScenario {
    pub domain: ConvexDomain,
    /// Generators followed by their inverses: index `i` is letter `i+1`,
    /// index `n_free + i` is letter `-(i+1)`.
    generators: Vec<ProjectiveMap>,
    n_free: usize,
    pub free_group: bool,
    pub basepoint: DVector<f64>,
    pub max_word_length: usize,
    pub max_radius: f64,
}

impl GroupScenario {
    /// Adjoins inverses, tags every generator with its one-letter word, and
    /// verifies that each generator maps sampled interior points back into
    /// the domain (within `PRESERVATION_REL_TOL * extent`).
    pub fn new(
        domain: ConvexDomain,
        generators: Vec<ProjectiveMap>,
        free_group: bool,
        basepoint: DVector<f64>,
        max_word_length: usize,
        max_radius: f64,
    ) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Config("empty generating set".into()));
        }
        let dim = domain.dim();
        if basepoint.len() != dim {
            return Err(Error::Config(format!(
                "basepoint dimension {} does not match domain dimension {dim}",
                basepoint.len()
            )));
        }
        if !domain.contains(&basepoint) {
            return Err(Error::OutsideDomain(
                "basepoint is not interior to the domain".into(),
            ));
        }
        for g in &generators {
            if g.ambient_dim() != dim {
                return Err(Error::Config(format!(
                    "generator matrix is {0}x{0} but the domain chart has dimension {dim}",
                    g.ambient_dim() + 1
                )));
            }
        }

        let n_free = generators.len();
        let mut all: Vec<ProjectiveMap> = Vec::with_capacity(2 * n_free);
        for (i, g) in generators.into_iter().enumerate() {
            all.push(g.with_word(vec![i as i32 + 1]));
        }
        for i in 0..n_free {
            all.push(all[i].inverse()?.with_word(vec![-(i as i32 + 1)]));
        }

        let gap_floor = -PRESERVATION_REL_TOL * domain.extent();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5ce9a210);
        let mut samples = Vec::with_capacity(PRESERVATION_SAMPLES + 1);
        samples.push(basepoint.clone());
        for _ in 0..PRESERVATION_SAMPLES {
            samples.push(domain.sample_interior(&mut rng)?);
        }
        for (idx, g) in all.iter().enumerate() {
            for x in &samples {
                let y = g.apply_chart(x);
                if !y.iter().all(|v| v.is_finite()) || domain.gap(&y) < gap_floor {
                    let letter = if idx < n_free {
                        idx as i32 + 1
                    } else {
                        -((idx - n_free) as i32 + 1)
                    };
                    return Err(Error::NotAnAutomorphism(format!(
                        "generator for letter {letter} maps an interior point outside the domain \
                         (gap {:.3e})",
                        domain.gap(&y)
                    )));
                }
            }
        }

        Ok(Self {
            domain,
            generators: all,
            n_free,
            free_group,
            basepoint,
            max_word_length,
            max_radius,
        })
    }

    /// Number of distinct generators (not counting adjoined inverses).
    pub fn n_free(&self) -> usize {
        self.n_free
    }

    /// Generators followed by their inverses.
    pub fn generators(&self) -> &[ProjectiveMap] {
        &self.generators
    }

    /// All letters in extension order: `1, 2, ..., n, -1, -2, ..., -n`.
    pub fn letters(&self) -> Vec<i32> {
        let n = self.n_free as i32;
        (1..=n).chain((1..=n).map(|k| -k)).collect()
    }

    pub fn letter_map(&self, letter: i32) -> &ProjectiveMap {
        assert!(letter != 0 && letter.unsigned_abs() as usize <= self.n_free);
        if letter > 0 {
            &self.generators[letter as usize - 1]
        } else {
            &self.generators[self.n_free + (-letter) as usize - 1]
        }
    }

    /// Composes the letters of `word` left to right (leftmost acts last).
    pub fn word_map(&self, word: &[i32]) -> ProjectiveMap {
        let mut out = ProjectiveMap::identity(self.domain.dim()).with_word(Vec::new());
        for &l in word {
            out = out.compose(self.letter_map(l));
        }
        out
    }
}
