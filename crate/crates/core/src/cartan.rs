//! Graded vector fields as derivations, the graded commutator, and the
//! Cartan operators `d`, `i_X`, `L_X` on bigraded forms.
//!
//! Forms are plain `GradedPoly` values over a chart that contains the
//! differential generators; the bidegree is available through
//! `GradedPoly::bidegree`. Operators act from the left, accumulating a
//! Koszul sign over every generator they pass. The six commutation
//! rules pin this convention down; they are enforced by the test suite.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::chart::{same_chart, ChartRef};
use crate::error::{CalcError, Result};
use crate::poly::{rat, signed, Degree, GradedPoly, Rat};

/// A bigraded differential form: a polynomial in the coordinates and
/// their differentials.
pub type BigradedForm = GradedPoly;

/// A homogeneous graded derivation, stored by its action on the
/// coordinate generators (and the exponential generator, if present).
#[derive(Debug, Clone)]
pub struct Derivation {
    chart: ChartRef,
    degree: i64,
    images: BTreeMap<usize, GradedPoly>,
}

impl Derivation {
    /// Build a derivation from generator images, checking the degree
    /// constraint `|X(z)| = |X| + |z|` on each nonzero image.
    pub fn new(chart: &ChartRef, degree: i64, images: BTreeMap<usize, GradedPoly>) -> Result<Self> {
        for (&idx, img) in &images {
            if !same_chart(img.chart(), chart) {
                return Err(CalcError::ChartMismatch);
            }
            if img.is_zero() {
                continue;
            }
            let expected = degree + chart.generator(idx).int_degree;
            match img.degree() {
                Degree::Homogeneous(d) if d == expected => {}
                other => {
                    return Err(CalcError::DegreeMismatch {
                        expected,
                        found: format!("{other}"),
                    })
                }
            }
        }
        Ok(Derivation {
            chart: chart.clone(),
            degree,
            images,
        })
    }

    /// Build without the per-image degree check (used for solver output
    /// whose degrees are certified by back-substitution).
    pub(crate) fn new_unchecked(
        chart: &ChartRef,
        degree: i64,
        images: BTreeMap<usize, GradedPoly>,
    ) -> Self {
        Derivation {
            chart: chart.clone(),
            degree,
            images,
        }
    }

    pub fn zero(chart: &ChartRef, degree: i64) -> Self {
        Derivation {
            chart: chart.clone(),
            degree,
            images: BTreeMap::new(),
        }
    }

    /// The coordinate vector field `∂/∂z` for generator `idx`.
    pub fn coordinate(chart: &ChartRef, idx: usize) -> Self {
        let mut images = BTreeMap::new();
        images.insert(idx, GradedPoly::one(chart));
        Derivation {
            chart: chart.clone(),
            degree: -chart.generator(idx).int_degree,
            images,
        }
    }

    /// The Euler vector field: `z -> |z| z` on every coordinate.
    pub fn euler(chart: &ChartRef) -> Self {
        let mut images = BTreeMap::new();
        for &idx in chart.coordinate_indices() {
            let d = chart.generator(idx).int_degree;
            if d != 0 {
                images.insert(idx, GradedPoly::generator(chart, idx).scale(&rat(d)));
            }
        }
        Derivation {
            chart: chart.clone(),
            degree: 0,
            images,
        }
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn parity(&self) -> u8 {
        (self.degree.rem_euclid(2)) as u8
    }

    /// The image of a generator; zero when unset.
    pub fn image(&self, idx: usize) -> GradedPoly {
        self.images
            .get(&idx)
            .cloned()
            .unwrap_or_else(|| GradedPoly::zero(&self.chart))
    }

    pub fn images(&self) -> impl Iterator<Item = (&usize, &GradedPoly)> {
        self.images.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.images.values().all(|p| p.is_zero())
    }

    /// Apply to a polynomial of coordinates by the graded Leibniz rule.
    pub fn apply(&self, f: &GradedPoly) -> Result<GradedPoly> {
        let op = Operator {
            chart: self.chart.clone(),
            parity: self.parity(),
            images: self.images.clone(),
        };
        op.apply(f)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !same_chart(&self.chart, &other.chart) {
            return Err(CalcError::ChartMismatch);
        }
        let mut images = self.images.clone();
        for (&idx, img) in &other.images {
            let cur = images
                .remove(&idx)
                .unwrap_or_else(|| GradedPoly::zero(&self.chart));
            images.insert(idx, cur.add(img)?);
        }
        Ok(Derivation {
            chart: self.chart.clone(),
            degree: self.degree,
            images,
        })
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let images = self
            .images
            .iter()
            .map(|(&i, p)| (i, p.scale(c)))
            .collect();
        Derivation {
            chart: self.chart.clone(),
            degree: self.degree,
            images,
        }
    }

    /// Left multiplication by a function: `(f X)(z) = f * X(z)`.
    pub fn left_mul(&self, f: &GradedPoly) -> Result<Self> {
        let mut images = BTreeMap::new();
        for (&i, p) in &self.images {
            images.insert(i, f.mul(p)?);
        }
        let degree = match f.degree() {
            Degree::Homogeneous(d) => self.degree + d,
            Degree::Mixed => self.degree,
        };
        Ok(Derivation {
            chart: self.chart.clone(),
            degree,
            images,
        })
    }
}

impl PartialEq for Derivation {
    fn eq(&self, other: &Self) -> bool {
        if !same_chart(&self.chart, &other.chart) {
            return false;
        }
        for &idx in self.chart.coordinate_indices() {
            if self.image(idx) != other.image(idx) {
                return false;
            }
        }
        if let Some(u) = self.chart.exponential_index() {
            if self.image(u) != other.image(u) {
                return false;
            }
        }
        true
    }
}

/// An internal graded operator extended to products by the Leibniz rule
/// with the given parity.
struct Operator {
    chart: ChartRef,
    parity: u8,
    images: BTreeMap<usize, GradedPoly>,
}

impl Operator {
    fn apply(&self, f: &GradedPoly) -> Result<GradedPoly> {
        if !same_chart(f.chart(), &self.chart) {
            return Err(CalcError::ChartMismatch);
        }
        let chart = &self.chart;
        let mut out = GradedPoly::zero(chart);
        for (mono, coeff) in f.terms() {
            for (idx, &exp) in mono.iter().enumerate() {
                if exp == 0 {
                    continue;
                }
                let image = match self.images.get(&idx) {
                    Some(img) if !img.is_zero() => img,
                    _ => continue,
                };
                // parity of the prefix the operator passes over
                let mut prefix_parity: i64 = 0;
                let mut prefix = alloc::vec![0i32; chart.len()];
                let mut suffix = alloc::vec![0i32; chart.len()];
                for (j, &e) in mono.iter().enumerate() {
                    if j < idx {
                        prefix[j] = e;
                        prefix_parity += e as i64 * chart.generator(j).parity() as i64;
                    } else if j > idx {
                        suffix[j] = e;
                    }
                }
                // e occurrences of an even generator all contribute the
                // same term; odd generators have e = 1
                suffix[idx] = exp - 1;
                let sign = crate::poly::sign_pow(self.parity as i64 * prefix_parity);
                let mut c = coeff * rat(exp as i64);
                if sign < 0 {
                    c = -c;
                }
                if c.is_zero() {
                    continue;
                }
                let term = GradedPoly::monomial(chart, prefix, c)
                    .mul(image)?
                    .mul(&GradedPoly::monomial(chart, suffix, rat(1)))?;
                out = out.add(&term)?;
            }
        }
        Ok(out)
    }
}

/// Graded commutator `[X,Y] = XY - (-1)^{|X||Y|} YX`, computed on the
/// coordinate generators.
pub fn commutator(x: &Derivation, y: &Derivation) -> Result<Derivation> {
    if !same_chart(x.chart(), y.chart()) {
        return Err(CalcError::ChartMismatch);
    }
    let chart = x.chart().clone();
    let sign = x.degree() * y.degree();
    let mut images = BTreeMap::new();
    let mut gens: Vec<usize> = chart.coordinate_indices().to_vec();
    if let Some(u) = chart.exponential_index() {
        gens.push(u);
    }
    for idx in gens {
        let g = GradedPoly::generator(&chart, idx);
        let xy = x.apply(&y.apply(&g)?)?;
        let yx = y.apply(&x.apply(&g)?)?;
        let val = xy.sub(&signed(yx, sign))?;
        if !val.is_zero() {
            images.insert(idx, val);
        }
    }
    Ok(Derivation::new_unchecked(
        &chart,
        x.degree() + y.degree(),
        images,
    ))
}

/// True iff `Q` has degree 1 and `[Q,Q]` vanishes on every coordinate.
pub fn is_homological(q: &Derivation) -> bool {
    if q.degree() != 1 {
        return false;
    }
    match commutator(q, q) {
        Ok(c) => c.is_zero(),
        Err(_) => false,
    }
}

/// The de Rham differential: `z -> dz`, `dz -> 0`, `u -> u dt`.
pub fn d(form: &BigradedForm) -> Result<BigradedForm> {
    let chart = form.chart().clone();
    let mut images = BTreeMap::new();
    for &idx in chart.coordinate_indices() {
        if let Some(didx) = chart.differential_of(idx) {
            images.insert(idx, GradedPoly::generator(&chart, didx));
        }
    }
    if let Some(u) = chart.exponential_index() {
        // d(e^t) = e^t dt
        let t = chart.index_of("t")?;
        let dt = chart
            .differential_of(t)
            .ok_or_else(|| CalcError::UnknownGenerator("dt".into()))?;
        images.insert(
            u,
            GradedPoly::generator(&chart, u).mul(&GradedPoly::generator(&chart, dt))?,
        );
    }
    let op = Operator {
        chart,
        parity: 1,
        images,
    };
    op.apply(form)
}

/// Contraction `i_X`: `z -> 0`, `dz -> X(z)`; bidegree `(-1, |X|)`.
pub fn contract(x: &Derivation, form: &BigradedForm) -> Result<BigradedForm> {
    if !same_chart(x.chart(), form.chart()) {
        return Err(CalcError::ChartMismatch);
    }
    let chart = x.chart().clone();
    let mut images = BTreeMap::new();
    for &idx in chart.coordinate_indices() {
        if let Some(didx) = chart.differential_of(idx) {
            let img = x.image(idx);
            if !img.is_zero() {
                images.insert(didx, img);
            }
        }
    }
    let op = Operator {
        chart,
        parity: (x.degree() + 1).rem_euclid(2) as u8,
        images,
    };
    op.apply(form)
}

/// Lie derivative `L_X = i_X d + (-1)^{|X|} d i_X`.
pub fn lie(x: &Derivation, form: &BigradedForm) -> Result<BigradedForm> {
    let a = contract(x, &d(form)?)?;
    let b = d(&contract(x, form)?)?;
    a.add(&signed(b, x.degree()))
}
