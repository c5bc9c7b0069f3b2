//! Exact evaluation of action integrands on discrete fields over closed
//! oriented triangulated tori.
//!
//! Cochains carry exact rational (or univariate-polynomial) values on
//! sorted vertex tuples and are evaluated on ordered simplices with the
//! permutation sign. Products use the front/back-segment cup product on
//! the ordered top simplices, and structure coefficients are sampled at
//! each top cell's lowest vertex; the layer tests structural identities
//! (discrete Stokes, variant equality), not continuum dynamics.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::action::{ActionIntegrand, FieldSymbol, StructureCoef};
use crate::chart::ChartRef;
use crate::error::{CalcError, Result};
use crate::models::{CourantJacobiData, JacobiPair};
use crate::poly::{GradedPoly, Rat};

/// Coefficient ring for field values: exact rationals, or univariate
/// polynomials in a perturbation parameter.
pub trait Scalar: Clone + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_rat(r: &Rat) -> Self;
    fn is_zero(&self) -> bool;
}

impl Scalar for Rat {
    fn zero() -> Self {
        <Rat as Zero>::zero()
    }
    fn one() -> Self {
        <Rat as One>::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn is_zero(&self) -> bool {
        <Rat as Zero>::is_zero(self)
    }
}

/// Dense univariate polynomial over the rationals, used as the scalar
/// ring for directional derivatives of the action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly1 {
    /// Coefficients by ascending power; no trailing zeros.
    pub coeffs: Vec<Rat>,
}

impl Poly1 {
    pub fn constant(r: Rat) -> Self {
        let mut p = Poly1 { coeffs: vec![r] };
        p.trim();
        p
    }

    /// `c0 + c1 * eps`.
    pub fn linear(c0: Rat, c1: Rat) -> Self {
        let mut p = Poly1 { coeffs: vec![c0, c1] };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if <Rat as Zero>::is_zero(c)) {
            self.coeffs.pop();
        }
    }

    /// Coefficient of the `k`-th power.
    pub fn coeff(&self, k: usize) -> Rat {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(<Rat as Zero>::zero)
    }

    /// Evaluate at a rational point.
    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = <Rat as Zero>::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }
}

impl Scalar for Poly1 {
    fn zero() -> Self {
        Poly1 { coeffs: Vec::new() }
    }
    fn one() -> Self {
        Poly1::constant(<Rat as One>::one())
    }
    fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            coeffs.push(&self.coeff(k) + &other.coeff(k));
        }
        let mut p = Poly1 { coeffs };
        p.trim();
        p
    }
    fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return <Poly1 as Scalar>::zero();
        }
        let mut coeffs = vec![<Rat as Zero>::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = &coeffs[i + j] + &(a * b);
            }
        }
        let mut p = Poly1 { coeffs };
        p.trim();
        p
    }
    fn neg(&self) -> Self {
        Poly1 {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
    fn from_rat(r: &Rat) -> Self {
        Poly1::constant(r.clone())
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// A closed oriented simplicial complex given by its ordered top cells.
pub struct DiscreteComplex {
    pub dim: usize,
    pub num_vertices: usize,
    /// Ordered vertex tuples with orientation signs.
    pub top: Vec<(Vec<usize>, i8)>,
}

impl DiscreteComplex {
    /// Triangulated 2-torus on an `nr x nc` vertex grid: each square is
    /// split along the main diagonal into `(v00, v10, v11)` with sign
    /// `+1` and `(v00, v01, v11)` with sign `-1`, indices wrapping.
    pub fn torus_2d(nr: usize, nc: usize) -> Result<Self> {
        if nr < 3 || nc < 3 {
            return Err(CalcError::InvalidChart(
                "torus grid must be at least 3x3".into(),
            ));
        }
        let v = |r: usize, c: usize| (r % nr) * nc + (c % nc);
        let mut top = Vec::with_capacity(2 * nr * nc);
        for r in 0..nr {
            for c in 0..nc {
                let v00 = v(r, c);
                let v10 = v(r + 1, c);
                let v01 = v(r, c + 1);
                let v11 = v(r + 1, c + 1);
                top.push((vec![v00, v10, v11], 1));
                top.push((vec![v00, v01, v11], -1));
            }
        }
        let complex = DiscreteComplex {
            dim: 2,
            num_vertices: nr * nc,
            top,
        };
        complex.verify_closed()?;
        Ok(complex)
    }

    /// Triangulated 3-torus on an `n1 x n2 x n3` vertex grid: each cube
    /// splits into six tetrahedra along monotone lattice paths, one per
    /// permutation of the axes, oriented by the permutation sign.
    pub fn torus_3d(n1: usize, n2: usize, n3: usize) -> Result<Self> {
        if n1 < 3 || n2 < 3 || n3 < 3 {
            return Err(CalcError::InvalidChart(
                "torus grid must be at least 3x3x3".into(),
            ));
        }
        let v = |i: usize, j: usize, k: usize| ((i % n1) * n2 + (j % n2)) * n3 + (k % n3);
        let perms: [([usize; 3], i8); 6] = [
            ([0, 1, 2], 1),
            ([1, 2, 0], 1),
            ([2, 0, 1], 1),
            ([1, 0, 2], -1),
            ([0, 2, 1], -1),
            ([2, 1, 0], -1),
        ];
        let mut top = Vec::with_capacity(6 * n1 * n2 * n3);
        for i in 0..n1 {
            for j in 0..n2 {
                for k in 0..n3 {
                    for (perm, sgn) in &perms {
                        let mut pos = [i, j, k];
                        let mut verts = vec![v(pos[0], pos[1], pos[2])];
                        for &axis in perm {
                            pos[axis] += 1;
                            verts.push(v(pos[0], pos[1], pos[2]));
                        }
                        top.push((verts, *sgn));
                    }
                }
            }
        }
        let complex = DiscreteComplex {
            dim: 3,
            num_vertices: n1 * n2 * n3,
            top,
        };
        complex.verify_closed()?;
        Ok(complex)
    }

    /// Check that the fundamental chain has zero boundary.
    fn verify_closed(&self) -> Result<()> {
        let mut boundary: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
        for (verts, sgn) in &self.top {
            for omit in 0..verts.len() {
                let mut face: Vec<usize> = verts
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != omit)
                    .map(|(_, &w)| w)
                    .collect();
                let mut s = (*sgn as i64) * if omit % 2 == 0 { 1 } else { -1 };
                // sort the face, tracking the permutation sign
                let mut swaps = 0usize;
                for a in 1..face.len() {
                    let mut b = a;
                    while b > 0 && face[b - 1] > face[b] {
                        face.swap(b - 1, b);
                        swaps += 1;
                        b -= 1;
                    }
                }
                if swaps % 2 == 1 {
                    s = -s;
                }
                *boundary.entry(face).or_insert(0) += s;
            }
        }
        if boundary.values().any(|&s| s != 0) {
            return Err(CalcError::InvalidChart(
                "complex has nonzero boundary".into(),
            ));
        }
        Ok(())
    }

    /// All sorted `k`-simplices appearing as faces of top cells.
    pub fn simplices(&self, k: usize) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut seen = BTreeMap::new();
        for (verts, _) in &self.top {
            for subset in subsets(verts, k + 1) {
                let mut s = subset;
                s.sort_unstable();
                if seen.insert(s.clone(), ()).is_none() {
                    out.push(s);
                }
            }
        }
        out
    }
}

fn subsets(verts: &[usize], size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let n = verts.len();
    if size > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        out.push(idx.iter().map(|&i| verts[i]).collect());
        // advance the combination
        let mut pos = size;
        while pos > 0 {
            pos -= 1;
            if idx[pos] != pos + n - size {
                idx[pos] += 1;
                for j in (pos + 1)..size {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
            if pos == 0 {
                return out;
            }
        }
    }
}

/// A simplicial `k`-cochain with values in a scalar ring. Values are
/// stored on sorted vertex tuples; evaluation on an ordered tuple picks
/// up the permutation sign.
#[derive(Clone)]
pub struct Cochain<S: Scalar> {
    pub degree: usize,
    pub values: BTreeMap<Vec<usize>, S>,
}

impl<S: Scalar> Cochain<S> {
    pub fn zero(degree: usize) -> Self {
        Cochain {
            degree,
            values: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, simplex: &[usize], value: S) {
        let (sign, key) = sort_with_sign(simplex);
        let v = if sign < 0 { value.neg() } else { value };
        if v.is_zero() {
            self.values.remove(&key);
        } else {
            self.values.insert(key, v);
        }
    }

    pub fn eval(&self, simplex: &[usize]) -> S {
        debug_assert_eq!(simplex.len(), self.degree + 1);
        let (sign, key) = sort_with_sign(simplex);
        match self.values.get(&key) {
            None => S::zero(),
            Some(v) => {
                if sign < 0 {
                    v.neg()
                } else {
                    v.clone()
                }
            }
        }
    }

    /// The simplicial coboundary, materialized on every
    /// `(degree+1)`-simplex of the complex.
    pub fn discrete_d(&self, complex: &DiscreteComplex) -> Result<Cochain<S>> {
        if self.degree >= complex.dim {
            return Err(CalcError::DegreeMismatch {
                expected: complex.dim as i64 - 1,
                found: format!("cochain degree {}", self.degree),
            });
        }
        let mut out = Cochain::zero(self.degree + 1);
        for key in complex.simplices(self.degree + 1) {
            let mut acc = S::zero();
            for omit in 0..key.len() {
                let face: Vec<usize> = key
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != omit)
                    .map(|(_, &w)| w)
                    .collect();
                let v = self.eval(&face);
                acc = if omit % 2 == 0 {
                    acc.add(&v)
                } else {
                    acc.add(&v.neg())
                };
            }
            if !acc.is_zero() {
                out.values.insert(key, acc);
            }
        }
        Ok(out)
    }

    pub fn map<T: Scalar, F: Fn(&S) -> T>(&self, f: F) -> Cochain<T> {
        let mut out = Cochain::zero(self.degree);
        for (k, v) in &self.values {
            let w = f(v);
            if !w.is_zero() {
                out.values.insert(k.clone(), w);
            }
        }
        out
    }
}

fn sort_with_sign(simplex: &[usize]) -> (i8, Vec<usize>) {
    let mut key = simplex.to_vec();
    let mut swaps = 0usize;
    for a in 1..key.len() {
        let mut b = a;
        while b > 0 && key[b - 1] > key[b] {
            key.swap(b - 1, b);
            swaps += 1;
            b -= 1;
        }
    }
    (if swaps % 2 == 0 { 1 } else { -1 }, key)
}

/// Discrete fields feeding an integrand: vertex values for `X` and
/// cochains for the form-valued fields.
#[derive(Clone)]
pub struct FieldConfig<S: Scalar> {
    /// `x[vertex][i]`.
    pub x: Vec<Vec<S>>,
    /// 1-cochains `eta_i` (degree-1 model) or `eta^alpha` (degree-2).
    pub eta: Vec<Cochain<S>>,
    /// 2-cochains `P_i` (degree-2 model only).
    pub p: Vec<Cochain<S>>,
    /// `Theta`: degree `n` cochain.
    pub theta: Cochain<S>,
}

impl<S: Scalar> FieldConfig<S> {
    pub fn zero(complex: &DiscreteComplex, d: usize, n_eta: usize, n_p: usize) -> Self {
        let n = complex.dim - 1;
        FieldConfig {
            x: vec![vec![S::zero(); d]; complex.num_vertices],
            eta: vec![Cochain::zero(1); n_eta],
            p: vec![Cochain::zero(2); n_p],
            theta: Cochain::zero(n),
        }
    }

    pub fn map<T: Scalar, F: Fn(&S) -> T + Copy>(&self, f: F) -> FieldConfig<T> {
        FieldConfig {
            x: self
                .x
                .iter()
                .map(|row| row.iter().map(f).collect())
                .collect(),
            eta: self.eta.iter().map(|c| c.map(f)).collect(),
            p: self.p.iter().map(|c| c.map(f)).collect(),
            theta: self.theta.map(f),
        }
    }
}

/// Evaluate a base-chart polynomial (even generators only) at scalar
/// coordinate values.
pub fn eval_base<S: Scalar>(poly: &GradedPoly, chart: &ChartRef, vals: &[S]) -> Result<S> {
    let coord_pos: BTreeMap<usize, usize> = chart
        .coordinate_indices()
        .iter()
        .enumerate()
        .map(|(pos, &idx)| (idx, pos))
        .collect();
    let mut acc = S::zero();
    for (mono, coeff) in poly.terms() {
        let mut term = S::from_rat(coeff);
        for (idx, &e) in mono.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let pos = coord_pos
                .get(&idx)
                .ok_or_else(|| CalcError::UnsupportedGenerator(chart.generator(idx).name.clone()))?;
            if e < 0 {
                return Err(CalcError::UnsupportedGenerator(
                    chart.generator(idx).name.clone(),
                ));
            }
            for _ in 0..e {
                term = term.mul(&vals[*pos]);
            }
        }
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// Resolves symbolic structure coefficients against model data at a
/// point of the base.
pub trait CoefResolver {
    fn resolve<S: Scalar>(&self, coef: &StructureCoef, xvals: &[S]) -> Result<S>;
    fn base_dim(&self) -> usize;
}

impl CoefResolver for JacobiPair {
    fn resolve<S: Scalar>(&self, coef: &StructureCoef, xvals: &[S]) -> Result<S> {
        match coef {
            StructureCoef::Lambda(i, j) => eval_base(self.lambda_coeff(*i, *j), self.chart(), xvals),
            StructureCoef::EVec(i) => eval_base(self.e_coeff(*i), self.chart(), xvals),
            other => Err(CalcError::UnsupportedGenerator(format!("{other:?}"))),
        }
    }
    fn base_dim(&self) -> usize {
        self.dim()
    }
}

impl CoefResolver for CourantJacobiData {
    fn resolve<S: Scalar>(&self, coef: &StructureCoef, xvals: &[S]) -> Result<S> {
        match coef {
            StructureCoef::Anchor(a, i) => eval_base(self.a_coeff(*a, *i), self.chart(), xvals),
            StructureCoef::BVec(a) => eval_base(self.b_coeff(*a), self.chart(), xvals),
            StructureCoef::TCoef(a, b, c) => {
                eval_base(self.t_coeff(*a, *b, *c), self.chart(), xvals)
            }
            other => Err(CalcError::UnsupportedGenerator(format!("{other:?}"))),
        }
    }
    fn base_dim(&self) -> usize {
        self.dim()
    }
}

/// Sum of the integrand's cup-product evaluation over the oriented top
/// cells. Structure coefficients are sampled at each cell's lowest
/// vertex.
pub fn eval_action<S: Scalar, R: CoefResolver>(
    complex: &DiscreteComplex,
    resolver: &R,
    integrand: &ActionIntegrand,
    fields: &FieldConfig<S>,
) -> Result<S> {
    if integrand.n + 1 != complex.dim as i64 {
        return Err(CalcError::DegreeMismatch {
            expected: integrand.n + 1,
            found: format!("complex dimension {}", complex.dim),
        });
    }
    // materialize the derived cochains once
    let dx: Vec<Cochain<S>> = (0..resolver.base_dim())
        .map(|i| {
            let mut c0 = Cochain::zero(0);
            for (vtx, row) in fields.x.iter().enumerate() {
                c0.set(&[vtx], row[i].clone());
            }
            c0.discrete_d(complex)
        })
        .collect::<Result<_>>()?;
    let deta: Vec<Cochain<S>> = fields
        .eta
        .iter()
        .map(|c| c.discrete_d(complex))
        .collect::<Result<_>>()?;
    let dtheta = fields.theta.discrete_d(complex)?;
    let mut total = S::zero();
    for (verts, sgn) in &complex.top {
        let base = *verts.iter().min().expect("nonempty cell");
        let xv = &fields.x[base];
        let mut cell_value = S::zero();
        for term in &integrand.terms {
            let mut v = S::from_rat(&term.coeff);
            if let Some(coef) = &term.structure {
                v = v.mul(&resolver.resolve(coef, xv)?);
            }
            if v.is_zero() {
                continue;
            }
            // front/back segment cup product along the ordered cell
            let mut cursor = 0usize;
            for sym in &term.fields {
                let deg = sym.form_degree(integrand.n) as usize;
                let seg = &verts[cursor..=cursor + deg];
                let fval = match sym {
                    FieldSymbol::DX(i) => dx[*i].eval(seg),
                    FieldSymbol::Eta(i) => fields.eta[*i].eval(seg),
                    FieldSymbol::DEta(i) => deta[*i].eval(seg),
                    FieldSymbol::P(i) => fields.p[*i].eval(seg),
                    FieldSymbol::Theta => fields.theta.eval(seg),
                    FieldSymbol::DTheta => dtheta.eval(seg),
                };
                v = v.mul(&fval);
                if v.is_zero() {
                    break;
                }
                cursor += deg;
            }
            cell_value = cell_value.add(&v);
        }
        if *sgn < 0 {
            cell_value = cell_value.neg();
        }
        total = total.add(&cell_value);
    }
    Ok(total)
}

/// Exact directional derivative of the action at `fields` along
/// `direction`: the first-order coefficient of the action evaluated on
/// `fields + eps * direction`.
pub fn eom_residual<R: CoefResolver>(
    complex: &DiscreteComplex,
    resolver: &R,
    integrand: &ActionIntegrand,
    fields: &FieldConfig<Rat>,
    direction: &FieldConfig<Rat>,
) -> Result<Rat> {
    let perturbed = perturb(fields, direction)?;
    let value = eval_action(complex, resolver, integrand, &perturbed)?;
    Ok(value.coeff(1))
}

/// `fields + eps * direction` as a polynomial-valued configuration.
pub fn perturb(fields: &FieldConfig<Rat>, direction: &FieldConfig<Rat>) -> Result<FieldConfig<Poly1>> {
    if fields.x.len() != direction.x.len()
        || fields.eta.len() != direction.eta.len()
        || fields.p.len() != direction.p.len()
    {
        return Err(CalcError::InvalidChart("perturbation shape mismatch".into()));
    }
    let lin = |f: &Rat, g: &Rat| Poly1::linear(f.clone(), g.clone());
    let combine = |f: &Cochain<Rat>, g: &Cochain<Rat>| -> Cochain<Poly1> {
        let mut out = Cochain::zero(f.degree);
        let zero = <Rat as Zero>::zero();
        for (k, v) in &f.values {
            let w = g.values.get(k).unwrap_or(&zero);
            out.values.insert(k.clone(), lin(v, w));
        }
        for (k, w) in &g.values {
            if !f.values.contains_key(k) {
                out.values.insert(k.clone(), lin(&zero, w));
            }
        }
        out
    };
    Ok(FieldConfig {
        x: fields
            .x
            .iter()
            .zip(&direction.x)
            .map(|(fr, dr)| fr.iter().zip(dr).map(|(f, g)| lin(f, g)).collect())
            .collect(),
        eta: fields
            .eta
            .iter()
            .zip(&direction.eta)
            .map(|(f, g)| combine(f, g))
            .collect(),
        p: fields
            .p
            .iter()
            .zip(&direction.p)
            .map(|(f, g)| combine(f, g))
            .collect(),
        theta: combine(&fields.theta, &direction.theta),
    })
}
