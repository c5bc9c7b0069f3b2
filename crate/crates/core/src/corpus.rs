//! Deterministic pseudo-random generation of charts, polynomials, and
//! vector fields for property checks and seeded batch runs.
//!
//! The generator is a fixed SplitMix64 stream, so corpora are
//! byte-stable across platforms and runs for a given seed.

use alloc::vec::Vec;

use crate::cartan::Derivation;
use crate::chart::{Chart, ChartRef, GenKind};
use crate::error::Result;
use crate::poly::{normalize, rat, ratio, GradedPoly, Rat};

/// SplitMix64: tiny, seedable, platform-stable.
#[derive(Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `0..n` (n > 0).
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// Small nonzero integer in `[-bound, bound]`.
    pub fn small_nonzero(&mut self, bound: i64) -> i64 {
        let v = (self.next_u64() % (2 * bound as u64)) as i64 - bound;
        if v >= 0 {
            v + 1
        } else {
            v
        }
    }

    /// Small integer in `[-bound, bound]`, zero included.
    pub fn small(&mut self, bound: i64) -> i64 {
        (self.next_u64() % (2 * bound as u64 + 1)) as i64 - bound
    }

    /// Small rational with numerator in `[-3,3]` and denominator in `{1,2,3}`.
    pub fn small_rat(&mut self) -> Rat {
        ratio(self.small(3), 1 + self.below(3) as i64)
    }
}

/// A random chart with `1..=max_coords` coordinates of degrees
/// `0..=max_degree`, at least one of degree 0.
pub fn random_chart(rng: &mut Rng, max_coords: usize, max_degree: i64) -> Result<ChartRef> {
    let ncoords = 1 + rng.below(max_coords);
    let names = ["z1", "z2", "z3", "z4", "z5", "z6", "z7", "z8"];
    let mut decls: Vec<(&str, i64)> = Vec::new();
    for (i, name) in names.iter().enumerate().take(ncoords) {
        let deg = if i == 0 {
            0
        } else {
            rng.below(max_degree as usize + 1) as i64
        };
        decls.push((name, deg));
    }
    Chart::new(&decls, None)
}

/// A random polynomial built from `terms` random generator words of
/// length at most `max_len` over the allowed generator set.
fn random_poly_over(
    rng: &mut Rng,
    chart: &ChartRef,
    gens: &[usize],
    terms: usize,
    max_len: usize,
) -> GradedPoly {
    let mut out = GradedPoly::zero(chart);
    if gens.is_empty() {
        return out;
    }
    for _ in 0..terms {
        let len = rng.below(max_len + 1);
        let word: Vec<usize> = (0..len).map(|_| gens[rng.below(gens.len())]).collect();
        if let Ok((sign, mono)) = normalize(chart, &word) {
            if sign != 0 {
                let c = rat(rng.small_nonzero(3) * sign as i64);
                out = out
                    .add(&GradedPoly::monomial(chart, mono, c))
                    .expect("same chart");
            }
        }
    }
    out
}

/// Random polynomial in the coordinates only (no differentials).
pub fn random_function(rng: &mut Rng, chart: &ChartRef, terms: usize, max_len: usize) -> GradedPoly {
    let gens: Vec<usize> = chart.coordinate_indices().to_vec();
    random_poly_over(rng, chart, &gens, terms, max_len)
}

/// Random bigraded form: words over coordinates and differentials.
pub fn random_form(rng: &mut Rng, chart: &ChartRef, terms: usize, max_len: usize) -> GradedPoly {
    let gens: Vec<usize> = (0..chart.len())
        .filter(|&i| !matches!(chart.generator(i).kind, GenKind::Exponential))
        .collect();
    random_poly_over(rng, chart, &gens, terms, max_len)
}

/// The homogeneous part of `p` in internal degree `k`.
pub fn homogeneous_part(p: &GradedPoly, k: i64) -> GradedPoly {
    let chart = p.chart().clone();
    let mut out = GradedPoly::zero(&chart);
    for (m, c) in p.terms() {
        let d: i64 = m
            .iter()
            .enumerate()
            .map(|(i, &e)| e as i64 * chart.generator(i).int_degree)
            .sum();
        if d == k {
            out = out
                .add(&GradedPoly::monomial(&chart, m.clone(), c.clone()))
                .expect("same chart");
        }
    }
    out
}

/// A random homogeneous function of the given internal degree; may be
/// zero when the degree is hard to hit.
pub fn random_homogeneous_function(
    rng: &mut Rng,
    chart: &ChartRef,
    degree: i64,
    terms: usize,
    max_len: usize,
) -> GradedPoly {
    homogeneous_part(&random_function(rng, chart, terms, max_len), degree)
}

/// A random homogeneous derivation (vector field with coordinate-only
/// coefficients) of the given degree.
pub fn random_derivation(rng: &mut Rng, chart: &ChartRef, degree: i64) -> Result<Derivation> {
    let mut images = alloc::collections::BTreeMap::new();
    for &idx in chart.coordinate_indices() {
        if rng.below(3) == 0 {
            continue;
        }
        let target = degree + chart.generator(idx).int_degree;
        if target < 0 {
            continue;
        }
        let img = random_homogeneous_function(rng, chart, target, 3, 3);
        if !img.is_zero() {
            images.insert(idx, img);
        }
    }
    Derivation::new(chart, degree, images)
}

use crate::models::{base_chart, JacobiPair};

/// Random Jacobi-pair candidate data (not necessarily satisfying the
/// compatibility equations) with polynomial coefficients of degree <= 2.
pub fn random_jacobi_data(rng: &mut Rng, dim: usize) -> Result<JacobiPair> {
    let chart = base_chart(dim)?;
    let mut lambda =
        alloc::vec![alloc::vec![GradedPoly::zero(&chart); dim]; dim];
    for i in 0..dim {
        for j in (i + 1)..dim {
            let p = random_function(rng, &chart, 2, 2);
            lambda[i][j] = p.clone();
            lambda[j][i] = p.neg();
        }
    }
    let e: Vec<GradedPoly> = (0..dim)
        .map(|_| random_function(rng, &chart, 2, 2))
        .collect();
    JacobiPair::new(&chart, lambda, e)
}
