//! The two target constructions: degree-1 Jacobi pairs and degree-2
//! Courant-Jacobi data, each with an independent oracle.
//!
//! Multivector fields are kept in a wedge-of-coordinate-fields
//! representation with its own Schouten-Nijenhuis bracket, entirely
//! separate from the graded-polynomial encoding on contact charts; the
//! two only meet at the comparison boundary of the cross-validation
//! tests.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::chart::{Chart, ChartRef};
use crate::contact::ContactChart;
use crate::error::{CalcError, Result};
use crate::poly::{rat, ratio, GradedPoly, Rat};
use crate::solver::invert;

/// The base algebra: commutative polynomials in `x_1..x_d`, realized as
/// a chart of degree-0 coordinates.
pub fn base_chart(dim: usize) -> Result<ChartRef> {
    let names: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    let coords: Vec<(&str, i64)> = names.iter().map(|n| (n.as_str(), 0)).collect();
    Chart::new(&coords, None)
}

/// Generator index of `x_{i+1}` in a base chart (coordinates interleave
/// with their differentials).
pub fn base_coord(chart: &ChartRef, i: usize) -> usize {
    chart.coordinate_indices()[i]
}

/// A multivector field on `R^d`: a sum of terms
/// `c(x) d/dx_{i_1} ^ ... ^ d/dx_{i_k}` with strictly increasing
/// direction indices.
#[derive(Clone)]
pub struct MultiVector {
    chart: ChartRef,
    dim: usize,
    terms: BTreeMap<Vec<usize>, GradedPoly>,
}

impl MultiVector {
    pub fn zero(chart: &ChartRef, dim: usize) -> Self {
        MultiVector {
            chart: chart.clone(),
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_term(chart: &ChartRef, dim: usize, dirs: &[usize], coeff: GradedPoly) -> Self {
        let mut out = Self::zero(chart, dim);
        out.add_term(dirs, coeff);
        out
    }

    pub fn function(chart: &ChartRef, dim: usize, f: GradedPoly) -> Self {
        Self::from_term(chart, dim, &[], f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &GradedPoly)> {
        self.terms.iter()
    }

    /// Add `coeff * d_I`, sorting the directions with sign; repeated
    /// directions vanish.
    pub fn add_term(&mut self, dirs: &[usize], coeff: GradedPoly) {
        if coeff.is_zero() {
            return;
        }
        let mut sorted: Vec<usize> = dirs.to_vec();
        let mut swaps = 0u64;
        for i in 1..sorted.len() {
            let mut j = i;
            while j > 0 && sorted[j - 1] > sorted[j] {
                sorted.swap(j - 1, j);
                swaps += 1;
                j -= 1;
            }
        }
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return;
            }
        }
        let signed = if swaps % 2 == 0 { coeff } else { coeff.neg() };
        let cur = self
            .terms
            .remove(&sorted)
            .unwrap_or_else(|| GradedPoly::zero(&self.chart));
        let sum = cur.add(&signed).expect("same chart");
        if !sum.is_zero() {
            self.terms.insert(sorted, sum);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (dirs, c) in &other.terms {
            out.add_term(dirs, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(&self.chart, self.dim);
        for (dirs, c) in &self.terms {
            out.terms.insert(dirs.clone(), c.neg());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let mut out = Self::zero(&self.chart, self.dim);
        if c.is_zero() {
            return out;
        }
        for (dirs, p) in &self.terms {
            out.terms.insert(dirs.clone(), p.scale(c));
        }
        out
    }

    pub fn wedge(&self, other: &Self) -> Self {
        let mut out = Self::zero(&self.chart, self.dim);
        for (da, ca) in &self.terms {
            for (db, cb) in &other.terms {
                let coeff = ca.mul(cb).expect("same chart");
                let mut dirs = da.clone();
                dirs.extend_from_slice(db);
                out.add_term(&dirs, coeff);
            }
        }
        out
    }

    /// Rank of a homogeneous multivector; `None` when mixed or zero.
    pub fn rank(&self) -> Option<usize> {
        let mut rank = None;
        for dirs in self.terms.keys() {
            match rank {
                None => rank = Some(dirs.len()),
                Some(r) if r != dirs.len() => return None,
                _ => {}
            }
        }
        rank
    }
}

fn partial(chart: &ChartRef, f: &GradedPoly, dir: usize) -> GradedPoly {
    f.partial(base_coord(chart, dir)).expect("even coordinate")
}

/// Classical Schouten-Nijenhuis bracket, by recursive extension of the
/// Lie bracket on wedge products. Conventions:
/// `[P,Q] = -(-1)^{(p-1)(q-1)}[Q,P]` and
/// `[P, Q^R] = [P,Q]^R + (-1)^{(p-1)q} Q^[P,R]`.
pub fn schouten(p: &MultiVector, q: &MultiVector) -> MultiVector {
    let mut out = MultiVector::zero(&p.chart, p.dim);
    for (da, ca) in &p.terms {
        for (db, cb) in &q.terms {
            out = out.add(&schouten_terms(&p.chart, p.dim, ca, da, cb, db));
        }
    }
    out
}

fn schouten_terms(
    chart: &ChartRef,
    dim: usize,
    ca: &GradedPoly,
    da: &[usize],
    cb: &GradedPoly,
    db: &[usize],
) -> MultiVector {
    let p = da.len();
    let q = db.len();
    if q >= 2 {
        // split B = Y ^ B' with Y carrying the coefficient
        let y_dirs = [db[0]];
        let rest = &db[1..];
        let one = GradedPoly::one(chart);
        let left = schouten_terms(chart, dim, ca, da, cb, &y_dirs)
            .wedge(&MultiVector::from_term(chart, dim, rest, one.clone()));
        let mut right = MultiVector::from_term(chart, dim, &y_dirs, cb.clone())
            .wedge(&schouten_terms(chart, dim, ca, da, &one, rest));
        if (p as i64 - 1).rem_euclid(2) == 1 {
            right = right.neg();
        }
        return left.add(&right);
    }
    if p >= 2 {
        // antisymmetry, then the q >= 2 branch applies to the flip
        let flipped = schouten_terms(chart, dim, cb, db, ca, da);
        let sign = ((p as i64 - 1) * (q as i64 - 1)).rem_euclid(2);
        return if sign == 0 { flipped.neg() } else { flipped };
    }
    match (p, q) {
        (0, 0) => MultiVector::zero(chart, dim),
        (1, 0) => MultiVector::function(
            chart,
            dim,
            ca.mul(&partial(chart, cb, da[0])).expect("same chart"),
        ),
        (0, 1) => MultiVector::function(
            chart,
            dim,
            cb.mul(&partial(chart, ca, db[0])).expect("same chart").neg(),
        ),
        (1, 1) => {
            // [a d_i, b d_j] = a (d_i b) d_j - b (d_j a) d_i
            let mut out = MultiVector::zero(chart, dim);
            out.add_term(&[db[0]], ca.mul(&partial(chart, cb, da[0])).expect("chart"));
            out.add_term(
                &[da[0]],
                cb.mul(&partial(chart, ca, db[0])).expect("chart").neg(),
            );
            out
        }
        _ => unreachable!("ranks reduced to <= 1"),
    }
}

/// A Jacobi pair `(Lambda, E)` on `R^d`.
#[derive(Clone)]
pub struct JacobiPair {
    chart: ChartRef,
    dim: usize,
    /// `Lambda^{ij}` as polynomials in the base coordinates.
    lambda: Vec<Vec<GradedPoly>>,
    /// `E^i` as polynomials.
    e: Vec<GradedPoly>,
}

impl JacobiPair {
    pub fn new(chart: &ChartRef, lambda: Vec<Vec<GradedPoly>>, e: Vec<GradedPoly>) -> Result<Self> {
        let dim = e.len();
        if lambda.len() != dim || lambda.iter().any(|row| row.len() != dim) {
            return Err(CalcError::InvalidChart("Lambda must be d x d".into()));
        }
        for i in 0..dim {
            for j in 0..dim {
                if lambda[i][j] != lambda[j][i].neg() {
                    return Err(CalcError::InvalidChart(
                        "Lambda must be antisymmetric".into(),
                    ));
                }
            }
        }
        Ok(JacobiPair {
            chart: chart.clone(),
            dim,
            lambda,
            e,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn lambda_coeff(&self, i: usize, j: usize) -> &GradedPoly {
        &self.lambda[i][j]
    }

    pub fn e_coeff(&self, i: usize) -> &GradedPoly {
        &self.e[i]
    }

    /// `Lambda` as a bivector field.
    pub fn lambda_mv(&self) -> MultiVector {
        let mut out = MultiVector::zero(&self.chart, self.dim);
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                out.add_term(&[i, j], self.lambda[i][j].clone());
            }
        }
        out
    }

    /// `E` as a vector field.
    pub fn e_mv(&self) -> MultiVector {
        let mut out = MultiVector::zero(&self.chart, self.dim);
        for i in 0..self.dim {
            out.add_term(&[i], self.e[i].clone());
        }
        out
    }

    /// Residuals `([Lambda,Lambda] + 2 E^Lambda, [Lambda,E])`, computed
    /// by the Schouten oracle; the pair is Jacobi iff both vanish. The
    /// relative sign of the wedge term is fixed by this crate's Schouten
    /// convention (the `(0,1)` base case carries the minus sign).
    pub fn check(&self) -> (MultiVector, MultiVector) {
        let lambda = self.lambda_mv();
        let e = self.e_mv();
        let r1 = schouten(&lambda, &lambda).add(&e.wedge(&lambda).scale(&rat(2)));
        let r2 = schouten(&lambda, &e);
        (r1, r2)
    }

    pub fn is_jacobi(&self) -> bool {
        let (r1, r2) = self.check();
        r1.is_zero() && r2.is_zero()
    }

    /// The local Lie bracket `{f,g} = Lambda(df,dg) + f E(g) - E(f) g`.
    pub fn fn_bracket(&self, f: &GradedPoly, g: &GradedPoly) -> Result<GradedPoly> {
        let mut out = GradedPoly::zero(&self.chart);
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i == j || self.lambda[i][j].is_zero() {
                    continue;
                }
                let term = self.lambda[i][j]
                    .mul(&partial(&self.chart, f, i))?
                    .mul(&partial(&self.chart, g, j))?;
                out = out.add(&term)?;
            }
        }
        // note Lambda(df,dg) double counts over ordered pairs, matching
        // Lambda = sum_{i<j} Lambda^{ij} d_i ^ d_j
        let e_of = |h: &GradedPoly| -> Result<GradedPoly> {
            let mut acc = GradedPoly::zero(&self.chart);
            for i in 0..self.dim {
                acc = acc.add(&self.e[i].mul(&partial(&self.chart, h, i))?)?;
            }
            Ok(acc)
        };
        out = out.add(&f.mul(&e_of(g)?)?)?;
        out.sub(&e_of(f)?.mul(g)?)
    }
}

/// The degree-1 contact model built from a Jacobi pair.
pub struct JacobiContactModel {
    pub contact: Arc<ContactChart>,
    pub s: GradedPoly,
    /// Generator indices of `x_i`, `p_i`, `theta` in the graded chart.
    pub x_idx: Vec<usize>,
    pub p_idx: Vec<usize>,
    pub theta_idx: usize,
    /// Map from base-chart generators into the graded chart.
    pub base_map: Vec<usize>,
}

/// Build the chart `x^i (0), p_i (1), theta (1)` with
/// `alpha = p_i dx^i + dtheta` and `S = 1/2 Lambda^{ij} p_i p_j - E^i p_i theta`.
pub fn build_jacobi_contact(pair: &JacobiPair) -> Result<JacobiContactModel> {
    let d = pair.dim;
    let mut names: Vec<(String, i64)> = Vec::new();
    for i in 1..=d {
        names.push((format!("x{i}"), 0));
    }
    for i in 1..=d {
        names.push((format!("p{i}"), 1));
    }
    names.push(("theta".into(), 1));
    let decls: Vec<(&str, i64)> = names.iter().map(|(n, k)| (n.as_str(), *k)).collect();
    let chart = Chart::new(&decls, Some(1))?;
    let x_idx: Vec<usize> = (0..d).map(|i| chart.coordinate_indices()[i]).collect();
    let p_idx: Vec<usize> = (0..d).map(|i| chart.coordinate_indices()[d + i]).collect();
    let theta_idx = chart.coordinate_indices()[2 * d];
    // alpha = p_i dx^i + dtheta
    let mut alpha = GradedPoly::generator(&chart, chart.differential_of(theta_idx).unwrap());
    for i in 0..d {
        let dx = chart.differential_of(x_idx[i]).unwrap();
        alpha = alpha.add(
            &GradedPoly::generator(&chart, p_idx[i]).mul(&GradedPoly::generator(&chart, dx))?,
        )?;
    }
    let contact = ContactChart::new(&chart, alpha)?;
    // transport base coefficients: x_i -> x_i
    let base_map: Vec<usize> = build_base_map(pair.chart(), &chart, &x_idx);
    let mut s = GradedPoly::zero(&chart);
    for i in 0..d {
        for j in 0..d {
            if pair.lambda[i][j].is_zero() {
                continue;
            }
            let c = pair.lambda[i][j].transport_map(&chart, &base_map)?;
            let term = c
                .mul(&GradedPoly::generator(&chart, p_idx[i]))?
                .mul(&GradedPoly::generator(&chart, p_idx[j]))?
                .scale(&ratio(1, 2));
            s = s.add(&term)?;
        }
    }
    for i in 0..d {
        if pair.e[i].is_zero() {
            continue;
        }
        let c = pair.e[i].transport_map(&chart, &base_map)?;
        let term = c
            .mul(&GradedPoly::generator(&chart, p_idx[i]))?
            .mul(&GradedPoly::generator(&chart, theta_idx))?;
        s = s.sub(&term)?;
    }
    Ok(JacobiContactModel {
        contact,
        s,
        x_idx,
        p_idx,
        theta_idx,
        base_map,
    })
}

fn build_base_map(base: &ChartRef, graded: &ChartRef, x_idx: &[usize]) -> Vec<usize> {
    // base chart generators are x_i interleaved with dx_i; map both onto
    // the graded chart's copies
    let mut map = vec![0usize; base.len()];
    for (i, &bx) in base.coordinate_indices().iter().enumerate() {
        map[bx] = x_idx[i];
        if let Some(bdx) = base.differential_of(bx) {
            map[bdx] = graded.differential_of(x_idx[i]).unwrap();
        }
    }
    map
}

/// Encode a multivector as a polynomial in the `p_i` on the degree-1
/// chart: `c(x) d_I -> c(x) p_{i_1} ... p_{i_k}` for increasing `I`.
pub fn encode_multivector(model: &JacobiContactModel, mv: &MultiVector) -> Result<GradedPoly> {
    let chart = model.contact.chart();
    let mut out = GradedPoly::zero(chart);
    for (dirs, coeff) in mv.terms() {
        let mut term = coeff.transport_map(chart, &model.base_map)?;
        for &i in dirs {
            term = term.mul(&GradedPoly::generator(chart, model.p_idx[i]))?;
        }
        out = out.add(&term)?;
    }
    Ok(out)
}

/// The value `master_check` of the built degree-1 model must reproduce,
/// stated through the Schouten oracle:
/// `-enc([Lambda,Lambda] + 2 E^Lambda) + 2 enc([Lambda,E]) theta`.
/// The per-rank signs of the multivector encoding are fixed constants of
/// this crate's conventions, validated against the contact side on
/// random data.
pub fn expected_master_residual(
    model: &JacobiContactModel,
    pair: &JacobiPair,
) -> Result<GradedPoly> {
    let (r1, r2) = pair.check();
    let theta = GradedPoly::generator(model.contact.chart(), model.theta_idx);
    let enc1 = encode_multivector(model, &r1.neg())?;
    let enc2 = encode_multivector(model, &r2)?
        .mul(&theta)?
        .scale(&rat(2));
    enc1.add(&enc2)
}

/// Courant-Jacobi input data over `R^d`: a constant symmetric invertible
/// pairing `g`, anchor coefficients `a^i_alpha`, `b_alpha`, and the raw
/// bracket array `T_{alpha beta gamma}` (no symmetry imposed a priori;
/// the bracket is non-skew).
#[derive(Clone)]
pub struct CourantJacobiData {
    chart: ChartRef,
    dim: usize,
    rank: usize,
    g: Vec<Vec<Rat>>,
    g_inv: Vec<Vec<Rat>>,
    /// `a[alpha][i]`
    a: Vec<Vec<GradedPoly>>,
    b: Vec<GradedPoly>,
    /// `t[alpha][beta][gamma]`
    t: Vec<Vec<Vec<GradedPoly>>>,
}

/// Residuals of the four Courant-Jacobi axioms, evaluated on frame
/// sections. Each residual is a list of section components (axioms 1-3)
/// or scalar polynomials (axiom 4), tagged by the frame indices.
pub struct CourantJacobiReport {
    /// Leibniz-type Jacobi identity on frame triples.
    pub axiom1: Vec<(Vec<usize>, Vec<GradedPoly>)>,
    /// Module-structure rule on `(frame, monomial, frame)` triples.
    pub axiom2: Vec<(Vec<usize>, Vec<GradedPoly>)>,
    /// Symmetric part against `D<.,.>`, on frame pairs.
    pub axiom3: Vec<(Vec<usize>, Vec<GradedPoly>)>,
    /// Invariance of the pairing, on frame triples.
    pub axiom4: Vec<(Vec<usize>, GradedPoly)>,
}

impl CourantJacobiReport {
    pub fn passes(&self) -> bool {
        self.axiom1.iter().all(|(_, r)| r.iter().all(|p| p.is_zero()))
            && self.axiom2.iter().all(|(_, r)| r.iter().all(|p| p.is_zero()))
            && self.axiom3.iter().all(|(_, r)| r.iter().all(|p| p.is_zero()))
            && self.axiom4.iter().all(|(_, r)| r.is_zero())
    }

    pub fn residual_terms(&self) -> usize {
        let mut count = 0;
        for (_, r) in &self.axiom1 {
            count += r.iter().map(|p| p.num_terms()).sum::<usize>();
        }
        for (_, r) in &self.axiom2 {
            count += r.iter().map(|p| p.num_terms()).sum::<usize>();
        }
        for (_, r) in &self.axiom3 {
            count += r.iter().map(|p| p.num_terms()).sum::<usize>();
        }
        for (_, r) in &self.axiom4 {
            count += r.num_terms();
        }
        count
    }
}

impl CourantJacobiData {
    pub fn new(
        chart: &ChartRef,
        dim: usize,
        rank: usize,
        g: Vec<Vec<Rat>>,
        a: Vec<Vec<GradedPoly>>,
        b: Vec<GradedPoly>,
        t: Vec<Vec<Vec<GradedPoly>>>,
    ) -> Result<Self> {
        if g.len() != rank || g.iter().any(|row| row.len() != rank) {
            return Err(CalcError::InvalidChart("g must be r x r".into()));
        }
        for i in 0..rank {
            for j in 0..rank {
                if g[i][j] != g[j][i] {
                    return Err(CalcError::InvalidChart("g must be symmetric".into()));
                }
            }
        }
        let g_inv = invert(&g).ok_or_else(|| CalcError::InvalidChart("g must be invertible".into()))?;
        if a.len() != rank || a.iter().any(|row| row.len() != dim) {
            return Err(CalcError::InvalidChart("a must be r x d".into()));
        }
        if b.len() != rank {
            return Err(CalcError::InvalidChart("b must have length r".into()));
        }
        if t.len() != rank
            || t.iter().any(|m| m.len() != rank || m.iter().any(|r| r.len() != rank))
        {
            return Err(CalcError::InvalidChart("T must be r x r x r".into()));
        }
        Ok(CourantJacobiData {
            chart: chart.clone(),
            dim,
            rank,
            g,
            g_inv,
            a,
            b,
            t,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn g(&self) -> &Vec<Vec<Rat>> {
        &self.g
    }

    pub fn a_coeff(&self, alpha: usize, i: usize) -> &GradedPoly {
        &self.a[alpha][i]
    }

    pub fn b_coeff(&self, alpha: usize) -> &GradedPoly {
        &self.b[alpha]
    }

    pub fn t_coeff(&self, alpha: usize, beta: usize, gamma: usize) -> &GradedPoly {
        &self.t[alpha][beta][gamma]
    }

    /// Replace `T` by its canonical representative: the totally
    /// antisymmetric part plus the symmetric part forced by `(g, b)`,
    /// `U_{abc} = (b_c g_{ab} + b_a g_{bc} - b_b g_{ac}) / 2`. This is
    /// the array actually encoded by the degree-3 function `S`; valid
    /// data is fixed by it.
    pub fn canonicalized(&self) -> Result<Self> {
        let r = self.rank;
        let mut t = vec![vec![vec![GradedPoly::zero(&self.chart); r]; r]; r];
        let sixth = ratio(1, 6);
        let half = ratio(1, 2);
        for a in 0..r {
            for b in 0..r {
                for c in 0..r {
                    // totally antisymmetric part
                    let mut alt = GradedPoly::zero(&self.chart);
                    for (perm, sgn) in permutations3(a, b, c) {
                        let v = self.t[perm.0][perm.1][perm.2].clone();
                        alt = if sgn > 0 { alt.add(&v)? } else { alt.sub(&v)? };
                    }
                    let mut val = alt.scale(&sixth);
                    // forced symmetric part
                    let u = self.b[c]
                        .scale(&self.g[a][b])
                        .add(&self.b[a].scale(&self.g[b][c]))?
                        .sub(&self.b[b].scale(&self.g[a][c]))?
                        .scale(&half);
                    val = val.add(&u)?;
                    t[a][b][c] = val;
                }
            }
        }
        CourantJacobiData::new(
            &self.chart,
            self.dim,
            self.rank,
            self.g.clone(),
            self.a.clone(),
            self.b.clone(),
            t,
        )
    }

    /// Bracket of frame sections: `<[[v_a, v_b]], v_c> = T_{abc}`.
    fn frame_bracket(&self, alpha: usize, beta: usize) -> Result<Section> {
        let mut comps = vec![GradedPoly::zero(&self.chart); self.rank];
        for delta in 0..self.rank {
            let mut acc = GradedPoly::zero(&self.chart);
            for gamma in 0..self.rank {
                if !self.g_inv[delta][gamma].is_zero() {
                    acc = acc.add(&self.t[alpha][beta][gamma].scale(&self.g_inv[delta][gamma]))?;
                }
            }
            comps[delta] = acc;
        }
        Ok(comps)
    }

    /// Anchor action `rho(v_alpha)(f) = a^i_alpha df/dx_i + b_alpha f`.
    fn rho_frame(&self, alpha: usize, f: &GradedPoly) -> Result<GradedPoly> {
        let mut acc = self.b[alpha].mul(f)?;
        for i in 0..self.dim {
            if !self.a[alpha][i].is_zero() {
                acc = acc.add(&self.a[alpha][i].mul(&partial(&self.chart, f, i))?)?;
            }
        }
        Ok(acc)
    }

    /// Symbol of the anchor (no `b` term).
    fn rho_hat(&self, e: &Section, f: &GradedPoly) -> Result<GradedPoly> {
        let mut acc = GradedPoly::zero(&self.chart);
        for alpha in 0..self.rank {
            if e[alpha].is_zero() {
                continue;
            }
            for i in 0..self.dim {
                if !self.a[alpha][i].is_zero() {
                    acc = acc.add(&e[alpha].mul(&self.a[alpha][i].mul(&partial(&self.chart, f, i))?)?)?;
                }
            }
        }
        Ok(acc)
    }

    fn rho(&self, e: &Section, f: &GradedPoly) -> Result<GradedPoly> {
        let mut acc = GradedPoly::zero(&self.chart);
        for alpha in 0..self.rank {
            if !e[alpha].is_zero() {
                acc = acc.add(&e[alpha].mul(&self.rho_frame(alpha, f)?)?)?;
            }
        }
        Ok(acc)
    }

    fn pairing(&self, e1: &Section, e2: &Section) -> Result<GradedPoly> {
        let mut acc = GradedPoly::zero(&self.chart);
        for a in 0..self.rank {
            for b in 0..self.rank {
                if !self.g[a][b].is_zero() {
                    acc = acc.add(&e1[a].mul(&e2[b])?.scale(&self.g[a][b]))?;
                }
            }
        }
        Ok(acc)
    }

    /// `D f`, the section with `<D f, e> = rho(e)(f)`.
    fn cal_d(&self, f: &GradedPoly) -> Result<Section> {
        let mut comps = vec![GradedPoly::zero(&self.chart); self.rank];
        for beta in 0..self.rank {
            let mut acc = GradedPoly::zero(&self.chart);
            for alpha in 0..self.rank {
                if !self.g_inv[beta][alpha].is_zero() {
                    acc = acc.add(&self.rho_frame(alpha, f)?.scale(&self.g_inv[beta][alpha]))?;
                }
            }
            comps[beta] = acc;
        }
        Ok(comps)
    }

    /// Dorfman-type bracket on general sections, extended from the frame
    /// bracket by the right rule of axiom (2) and the left rule forced
    /// by axioms (2)+(3):
    /// `[[f e, e']] = f [[e,e']] - rhohat(e')(f) e + D(f<e,e'>) - f D<e,e'>`.
    pub fn bracket(&self, e1: &Section, e2: &Section) -> Result<Section> {
        let mut out = vec![GradedPoly::zero(&self.chart); self.rank];
        for alpha in 0..self.rank {
            if e1[alpha].is_zero() {
                continue;
            }
            // [[v_alpha, e2]] by the right rule
            let mut inner = vec![GradedPoly::zero(&self.chart); self.rank];
            for beta in 0..self.rank {
                if e2[beta].is_zero() {
                    continue;
                }
                let fb = self.frame_bracket(alpha, beta)?;
                for k in 0..self.rank {
                    inner[k] = inner[k].add(&e2[beta].mul(&fb[k])?)?;
                }
                inner[beta] = inner[beta].add(&self.rho_frame(alpha, &e2[beta])?
                    .sub(&self.b[alpha].mul(&e2[beta])?)?)?;
            }
            // left rule for the coefficient e1[alpha]
            let c = &e1[alpha];
            let mut frame = vec![GradedPoly::zero(&self.chart); self.rank];
            frame[alpha] = GradedPoly::one(&self.chart);
            let pair = self.pairing(&frame, e2)?;
            let d_cpair = self.cal_d(&c.mul(&pair)?)?;
            let d_pair = self.cal_d(&pair)?;
            for k in 0..self.rank {
                let mut term = c.mul(&inner[k])?;
                if k == alpha {
                    term = term.sub(&self.rho_hat(e2, c)?)?;
                }
                term = term.add(&d_cpair[k])?;
                term = term.sub(&c.mul(&d_pair[k])?)?;
                out[k] = out[k].add(&term)?;
            }
        }
        Ok(out)
    }

    /// Evaluate the four axioms on frame sections (and degree <= 2
    /// monomials in the function slot of axiom 2). Bilinearity and the
    /// forced extension rules make these generator checks complete at
    /// polynomial scale.
    pub fn check(&self) -> Result<CourantJacobiReport> {
        let r = self.rank;
        let frames: Vec<Section> = (0..r)
            .map(|a| {
                let mut s = vec![GradedPoly::zero(&self.chart); r];
                s[a] = GradedPoly::one(&self.chart);
                s
            })
            .collect();
        let mut axiom1 = Vec::new();
        let mut axiom2 = Vec::new();
        let mut axiom3 = Vec::new();
        let mut axiom4 = Vec::new();
        for a in 0..r {
            for b in 0..r {
                for c in 0..r {
                    // axiom 1: [[e,[[e',e'']]]] - [[[[e,e']],e'']] - [[e',[[e,e'']]]]
                    let lhs = self.bracket(&frames[a], &self.bracket(&frames[b], &frames[c])?)?;
                    let r1 = self.bracket(&self.bracket(&frames[a], &frames[b])?, &frames[c])?;
                    let r2 = self.bracket(&frames[b], &self.bracket(&frames[a], &frames[c])?)?;
                    let res: Result<Vec<GradedPoly>> = (0..r)
                        .map(|k| lhs[k].sub(&r1[k])?.sub(&r2[k]))
                        .collect();
                    axiom1.push((vec![a, b, c], res?));
                    // axiom 4: rho(e)<e',e''> - <[[e,e']],e''> - <e',[[e,e'']]>
                    let pair_bc = self.pairing(&frames[b], &frames[c])?;
                    let lhs4 = self.rho(&frames[a], &pair_bc)?;
                    let t1 = self.pairing(&self.bracket(&frames[a], &frames[b])?, &frames[c])?;
                    let t2 = self.pairing(&frames[b], &self.bracket(&frames[a], &frames[c])?)?;
                    axiom4.push((vec![a, b, c], lhs4.sub(&t1)?.sub(&t2)?));
                }
                // axiom 3 (polarized): [[e,e']] + [[e',e]] - D<e,e'>
                let fb = self.bracket(&frames[a], &frames[b])?;
                let bf = self.bracket(&frames[b], &frames[a])?;
                let dp = self.cal_d(&self.pairing(&frames[a], &frames[b])?)?;
                let res: Result<Vec<GradedPoly>> =
                    (0..r).map(|k| fb[k].add(&bf[k])?.sub(&dp[k])).collect();
                axiom3.push((vec![a, b], res?));
                // axiom 2 on monomial functions up to degree 2
                for f in monomials_up_to(&self.chart, self.dim, 2)? {
                    let fe = scale_section(&frames[b], &f)?;
                    let lhs = self.bracket(&frames[a], &fe)?;
                    let mut rhs = scale_section(&self.bracket(&frames[a], &frames[b])?, &f)?;
                    let rho_hat_f = self.rho_hat(&frames[a], &f)?;
                    rhs[b] = rhs[b].add(&rho_hat_f)?;
                    let res: Result<Vec<GradedPoly>> =
                        (0..r).map(|k| lhs[k].sub(&rhs[k])).collect();
                    axiom2.push((vec![a, b], res?));
                }
            }
        }
        Ok(CourantJacobiReport {
            axiom1,
            axiom2,
            axiom3,
            axiom4,
        })
    }
}

/// A section in frame components.
pub type Section = Vec<GradedPoly>;

fn scale_section(s: &Section, f: &GradedPoly) -> Result<Section> {
    s.iter().map(|c| f.mul(c)).collect()
}

fn monomials_up_to(chart: &ChartRef, dim: usize, max_deg: u32) -> Result<Vec<GradedPoly>> {
    let mut out = vec![GradedPoly::one(chart)];
    let coords: Vec<GradedPoly> = (0..dim)
        .map(|i| GradedPoly::generator(chart, base_coord(chart, i)))
        .collect();
    let mut layer = vec![GradedPoly::one(chart)];
    for _ in 0..max_deg {
        let mut next = Vec::new();
        for m in &layer {
            for x in &coords {
                next.push(m.mul(x)?);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    Ok(out)
}

fn permutations3(a: usize, b: usize, c: usize) -> [((usize, usize, usize), i8); 6] {
    [
        ((a, b, c), 1),
        ((b, c, a), 1),
        ((c, a, b), 1),
        ((b, a, c), -1),
        ((a, c, b), -1),
        ((c, b, a), -1),
    ]
}

/// The degree-2 contact model built from Courant-Jacobi data.
pub struct CourantJacobiContactModel {
    pub contact: Arc<ContactChart>,
    pub s: GradedPoly,
    pub x_idx: Vec<usize>,
    pub v_idx: Vec<usize>,
    pub p_idx: Vec<usize>,
    pub theta_idx: usize,
    pub base_map: Vec<usize>,
}

/// Build the chart `x^i (0), v^alpha (1), p_i (2), theta (2)` with
/// `alpha = p_i dx^i + 1/2 g_{ab} v^a dv^b + 1/2 dtheta` and
/// `S = a^i_a v^a p_i - 1/2 b_a v^a theta - 1/6 T_{abc} v^a v^b v^c`.
///
/// The weight of the `theta` term is a fixed constant of this crate's
/// bracket conventions, pinned so that the master residual of `S`
/// vanishes exactly when the algebroid axioms hold; the standard
/// algebroid over R^1 and R^2 exercises every cross term.
pub fn build_cj_contact(data: &CourantJacobiData) -> Result<CourantJacobiContactModel> {
    let d = data.dim;
    let r = data.rank;
    let mut names: Vec<(String, i64)> = Vec::new();
    for i in 1..=d {
        names.push((format!("x{i}"), 0));
    }
    for a in 1..=r {
        names.push((format!("v{a}"), 1));
    }
    for i in 1..=d {
        names.push((format!("p{i}"), 2));
    }
    names.push(("theta".into(), 2));
    let decls: Vec<(&str, i64)> = names.iter().map(|(n, k)| (n.as_str(), *k)).collect();
    let chart = Chart::new(&decls, Some(2))?;
    let coords = chart.coordinate_indices();
    let x_idx: Vec<usize> = (0..d).map(|i| coords[i]).collect();
    let v_idx: Vec<usize> = (0..r).map(|a| coords[d + a]).collect();
    let p_idx: Vec<usize> = (0..d).map(|i| coords[d + r + i]).collect();
    let theta_idx = coords[d + r + d];
    let half = ratio(1, 2);
    let mut alpha = GradedPoly::generator(&chart, chart.differential_of(theta_idx).unwrap())
        .scale(&half);
    for i in 0..d {
        let dx = chart.differential_of(x_idx[i]).unwrap();
        alpha = alpha.add(
            &GradedPoly::generator(&chart, p_idx[i]).mul(&GradedPoly::generator(&chart, dx))?,
        )?;
    }
    for a in 0..r {
        for b in 0..r {
            if data.g[a][b].is_zero() {
                continue;
            }
            let dv = chart.differential_of(v_idx[b]).unwrap();
            let term = GradedPoly::generator(&chart, v_idx[a])
                .mul(&GradedPoly::generator(&chart, dv))?
                .scale(&(&data.g[a][b] * &half));
            alpha = alpha.add(&term)?;
        }
    }
    let contact = ContactChart::new(&chart, alpha)?;
    let base_map = build_base_map(data.chart(), &chart, &x_idx);
    let mut s = GradedPoly::zero(&chart);
    for a in 0..r {
        for i in 0..d {
            if data.a[a][i].is_zero() {
                continue;
            }
            let c = data.a[a][i].transport_map(&chart, &base_map)?;
            s = s.add(
                &c.mul(&GradedPoly::generator(&chart, v_idx[a]))?
                    .mul(&GradedPoly::generator(&chart, p_idx[i]))?,
            )?;
        }
        if !data.b[a].is_zero() {
            // the theta coefficient is -1/2 b_a in this crate's bracket
            // conventions; see the module notes on the encoding
            let c = data.b[a].transport_map(&chart, &base_map)?;
            s = s.sub(
                &c.mul(&GradedPoly::generator(&chart, v_idx[a]))?
                    .mul(&GradedPoly::generator(&chart, theta_idx))?
                    .scale(&half),
            )?;
        }
    }
    let sixth = ratio(1, 6);
    for a in 0..r {
        for b in 0..r {
            for c in 0..r {
                if data.t[a][b][c].is_zero() {
                    continue;
                }
                let coeff = data.t[a][b][c].transport_map(&chart, &base_map)?;
                let term = coeff
                    .mul(&GradedPoly::generator(&chart, v_idx[a]))?
                    .mul(&GradedPoly::generator(&chart, v_idx[b]))?
                    .mul(&GradedPoly::generator(&chart, v_idx[c]))?
                    .scale(&sixth);
                s = s.sub(&term)?;
            }
        }
    }
    Ok(CourantJacobiContactModel {
        contact,
        s,
        x_idx,
        v_idx,
        p_idx,
        theta_idx,
        base_map,
    })
}

/// A section of Wade's standard Courant-Jacobi algebroid
/// `(TM x R) + (T*M x R)`: the quadruple `(X, f, xi, g)` with
/// polynomial coefficients on `R^d`.
#[derive(Clone)]
pub struct SectionCJ {
    pub chart: ChartRef,
    pub dim: usize,
    /// Vector field components `X^i`.
    pub x: Vec<GradedPoly>,
    pub f: GradedPoly,
    /// One-form components `xi_i`.
    pub xi: Vec<GradedPoly>,
    pub g: GradedPoly,
}

impl SectionCJ {
    pub fn zero(chart: &ChartRef, dim: usize) -> Self {
        SectionCJ {
            chart: chart.clone(),
            dim,
            x: vec![GradedPoly::zero(chart); dim],
            f: GradedPoly::zero(chart),
            xi: vec![GradedPoly::zero(chart); dim],
            g: GradedPoly::zero(chart),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.x.iter().all(|p| p.is_zero())
            && self.f.is_zero()
            && self.xi.iter().all(|p| p.is_zero())
            && self.g.is_zero()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(SectionCJ {
            chart: self.chart.clone(),
            dim: self.dim,
            x: zip_with(&self.x, &other.x, |a, b| a.add(b))?,
            f: self.f.add(&other.f)?,
            xi: zip_with(&self.xi, &other.xi, |a, b| a.add(b))?,
            g: self.g.add(&other.g)?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(SectionCJ {
            chart: self.chart.clone(),
            dim: self.dim,
            x: zip_with(&self.x, &other.x, |a, b| a.sub(b))?,
            f: self.f.sub(&other.f)?,
            xi: zip_with(&self.xi, &other.xi, |a, b| a.sub(b))?,
            g: self.g.sub(&other.g)?,
        })
    }

    pub fn scale_fn(&self, h: &GradedPoly) -> Result<Self> {
        Ok(SectionCJ {
            chart: self.chart.clone(),
            dim: self.dim,
            x: self.x.iter().map(|p| h.mul(p)).collect::<Result<_>>()?,
            f: h.mul(&self.f)?,
            xi: self.xi.iter().map(|p| h.mul(p)).collect::<Result<_>>()?,
            g: h.mul(&self.g)?,
        })
    }

    /// `<s1, s2> = <X1, xi2> + <X2, xi1> + f1 g2 + f2 g1`.
    pub fn pairing(&self, other: &Self) -> Result<GradedPoly> {
        let mut acc = GradedPoly::zero(&self.chart);
        for i in 0..self.dim {
            acc = acc.add(&self.x[i].mul(&other.xi[i])?)?;
            acc = acc.add(&other.x[i].mul(&self.xi[i])?)?;
        }
        acc = acc.add(&self.f.mul(&other.g)?)?;
        acc.add(&other.f.mul(&self.g)?)
    }

    /// Anchor action: `rho(X,f)(h) = X(h) + f h`.
    pub fn rho(&self, h: &GradedPoly) -> Result<GradedPoly> {
        let mut acc = self.f.mul(h)?;
        for i in 0..self.dim {
            acc = acc.add(&self.x[i].mul(&partial(&self.chart, h, i))?)?;
        }
        Ok(acc)
    }

    /// Symbol of the anchor: `X(h)` only.
    pub fn rho_hat(&self, h: &GradedPoly) -> Result<GradedPoly> {
        let mut acc = GradedPoly::zero(&self.chart);
        for i in 0..self.dim {
            acc = acc.add(&self.x[i].mul(&partial(&self.chart, h, i))?)?;
        }
        Ok(acc)
    }
}

fn zip_with<F>(a: &[GradedPoly], b: &[GradedPoly], f: F) -> Result<Vec<GradedPoly>>
where
    F: Fn(&GradedPoly, &GradedPoly) -> Result<GradedPoly>,
{
    a.iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

/// `D h = (0, 0, dh, h)` for Wade's standard algebroid.
pub fn wade_cal_d(chart: &ChartRef, dim: usize, h: &GradedPoly) -> Result<SectionCJ> {
    let mut s = SectionCJ::zero(chart, dim);
    for i in 0..dim {
        s.xi[i] = partial(chart, h, i);
    }
    s.g = h.clone();
    Ok(s)
}

/// The standard Courant-Jacobi bracket of quadruple sections:
/// `X3 = [X1,X2]`, `f3 = X1(f2) - X2(f1)`,
/// `xi3 = L_{X1} xi2 - i_{X2} d xi1 + f1 xi2 - f2 xi1 + f2 dg1 + g2 df1`,
/// `g3 = X1(g2) - X2(g1) + i_{X2} xi1 + f1 g2`.
pub fn wade_bracket(s1: &SectionCJ, s2: &SectionCJ) -> Result<SectionCJ> {
    let chart = &s1.chart;
    let dim = s1.dim;
    let mut out = SectionCJ::zero(chart, dim);
    // X3 = [X1, X2]
    for i in 0..dim {
        let mut acc = GradedPoly::zero(chart);
        for j in 0..dim {
            acc = acc.add(&s1.x[j].mul(&partial(chart, &s2.x[i], j))?)?;
            acc = acc.sub(&s2.x[j].mul(&partial(chart, &s1.x[i], j))?)?;
        }
        out.x[i] = acc;
    }
    // f3 = X1(f2) - X2(f1)
    out.f = s1.rho_hat(&s2.f)?.sub(&s2.rho_hat(&s1.f)?)?;
    // xi3 per Wade's formula, componentwise:
    // (L_{X1} xi2)_i = X1(xi2_i) + xi2_j d_i X1^j
    // (i_{X2} d xi1)_i = X2^j (d_j xi1_i - d_i xi1_j)
    for i in 0..dim {
        let mut acc = s1.rho_hat(&s2.xi[i])?;
        for j in 0..dim {
            acc = acc.add(&s2.xi[j].mul(&partial(chart, &s1.x[j], i))?)?;
            let curl = partial(chart, &s1.xi[i], j).sub(&partial(chart, &s1.xi[j], i))?;
            acc = acc.sub(&s2.x[j].mul(&curl)?)?;
        }
        acc = acc.add(&s1.f.mul(&s2.xi[i])?)?;
        acc = acc.sub(&s2.f.mul(&s1.xi[i])?)?;
        acc = acc.add(&s2.f.mul(&partial(chart, &s1.g, i))?)?;
        acc = acc.add(&s2.g.mul(&partial(chart, &s1.f, i))?)?;
        out.xi[i] = acc;
    }
    // g3 = X1(g2) - X2(g1) + i_{X2} xi1 + f1 g2
    let mut g3 = s1.rho_hat(&s2.g)?.sub(&s2.rho_hat(&s1.g)?)?;
    for j in 0..dim {
        g3 = g3.add(&s2.x[j].mul(&s1.xi[j])?)?;
    }
    out.g = g3.add(&s1.f.mul(&s2.g)?)?;
    Ok(out)
}

/// Convert Wade's standard algebroid on `R^d` into frame-based
/// Courant-Jacobi data, frame order:
/// `(d/dx_i, 0,0,0), (0,1,0,0), (0,0,dx_i,0), (0,0,0,1)`.
pub fn wade_standard_data(dim: usize) -> Result<(CourantJacobiData, Vec<SectionCJ>)> {
    let chart = base_chart(dim)?;
    let rank = 2 * dim + 2;
    let mut frames: Vec<SectionCJ> = Vec::with_capacity(rank);
    for i in 0..dim {
        let mut s = SectionCJ::zero(&chart, dim);
        s.x[i] = GradedPoly::one(&chart);
        frames.push(s);
    }
    {
        let mut s = SectionCJ::zero(&chart, dim);
        s.f = GradedPoly::one(&chart);
        frames.push(s);
    }
    for i in 0..dim {
        let mut s = SectionCJ::zero(&chart, dim);
        s.xi[i] = GradedPoly::one(&chart);
        frames.push(s);
    }
    {
        let mut s = SectionCJ::zero(&chart, dim);
        s.g = GradedPoly::one(&chart);
        frames.push(s);
    }
    let mut g = vec![vec![Rat::zero(); rank]; rank];
    for a in 0..rank {
        for b in 0..rank {
            let p = frames[a].pairing(&frames[b])?;
            if !p.is_zero() {
                g[a][b] = p.constant_term();
            }
        }
    }
    let mut a_mat = vec![vec![GradedPoly::zero(&chart); dim]; rank];
    let mut b_vec = vec![GradedPoly::zero(&chart); rank];
    for al in 0..rank {
        for i in 0..dim {
            a_mat[al][i] = frames[al].x[i].clone();
        }
        b_vec[al] = frames[al].f.clone();
    }
    let mut t = vec![vec![vec![GradedPoly::zero(&chart); rank]; rank]; rank];
    for a in 0..rank {
        for b in 0..rank {
            let br = wade_bracket(&frames[a], &frames[b])?;
            for c in 0..rank {
                t[a][b][c] = br.pairing(&frames[c])?;
            }
        }
    }
    let data = CourantJacobiData::new(&chart, dim, rank, g, a_mat, b_vec, t)?;
    Ok((data, frames))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::ContactVerdict;
    use crate::corpus::{random_function, random_jacobi_data, Rng};
    use crate::poly::rat;

    fn coord(chart: &ChartRef, i: usize) -> GradedPoly {
        GradedPoly::generator(chart, base_coord(chart, i))
    }

    fn mv(chart: &ChartRef, dim: usize, dirs: &[usize]) -> MultiVector {
        MultiVector::from_term(chart, dim, dirs, GradedPoly::one(chart))
    }

    fn random_mv(rng: &mut Rng, chart: &ChartRef, dim: usize, rank: usize) -> MultiVector {
        let mut out = MultiVector::zero(chart, dim);
        for _ in 0..2 {
            let dirs: Vec<usize> = (0..rank).map(|_| rng.below(dim)).collect();
            out.add_term(&dirs, random_function(rng, chart, 2, 2));
        }
        out
    }

    #[test]
    fn wedge_is_graded_commutative_and_nilpotent() {
        let chart = base_chart(3).unwrap();
        let a = mv(&chart, 3, &[0, 1]);
        let b = mv(&chart, 3, &[1, 2]);
        assert!(a.wedge(&a).is_zero());
        // bivectors commute
        assert!(a.wedge(&b).sub(&b.wedge(&a)).is_zero());
        let v = mv(&chart, 3, &[0]);
        let w = mv(&chart, 3, &[2]);
        // vectors anticommute
        assert!(v.wedge(&w).add(&w.wedge(&v)).is_zero());
        // reordering picks up the permutation sign
        let mut m = MultiVector::zero(&chart, 3);
        m.add_term(&[2, 0], GradedPoly::one(&chart));
        assert!(m.add(&mv(&chart, 3, &[0, 2])).is_zero());
    }

    #[test]
    fn schouten_base_cases() {
        let chart = base_chart(2).unwrap();
        let x = coord(&chart, 0);
        let y = coord(&chart, 1);
        // [d_0, f] = d_0 f
        let f = MultiVector::function(&chart, 2, x.mul(&y).unwrap());
        let d0 = mv(&chart, 2, &[0]);
        let r = schouten(&d0, &f);
        assert!(r.sub(&MultiVector::function(&chart, 2, y.clone())).is_zero());
        // [f, d_0] = -d_0 f
        let r = schouten(&f, &d0);
        assert!(r.add(&MultiVector::function(&chart, 2, y.clone())).is_zero());
        // [x d_0, d_0 ^ d_1] = -d_0 ^ d_1
        let xd0 = MultiVector::from_term(&chart, 2, &[0], x.clone());
        let biv = mv(&chart, 2, &[0, 1]);
        let r = schouten(&xd0, &biv);
        assert!(r.add(&biv).is_zero());
        // constant bivector has vanishing self-bracket
        assert!(schouten(&biv, &biv).is_zero());
    }

    #[test]
    fn schouten_antisymmetry_and_leibniz() {
        let chart = base_chart(3).unwrap();
        let mut rng = Rng::new(11);
        for _ in 0..25 {
            let p_rank = 1 + rng.below(3);
            let q_rank = 1 + rng.below(2);
            let p = random_mv(&mut rng, &chart, 3, p_rank);
            let q = random_mv(&mut rng, &chart, 3, q_rank);
            // [P,Q] = -(-1)^{(p-1)(q-1)} [Q,P]
            let lhs = schouten(&p, &q);
            let mut rhs = schouten(&q, &p).neg();
            if ((p_rank as i64 - 1) * (q_rank as i64 - 1)).rem_euclid(2) == 1 {
                rhs = rhs.neg();
            }
            assert!(lhs.sub(&rhs).is_zero());
            // [P, Q ^ R] = [P,Q] ^ R + (-1)^{(p-1)q} Q ^ [P,R]
            let r_rank = 1 + rng.below(2);
            let r = random_mv(&mut rng, &chart, 3, r_rank);
            let lhs = schouten(&p, &q.wedge(&r));
            let mut second = q.wedge(&schouten(&p, &r));
            if ((p_rank as i64 - 1) * q_rank as i64).rem_euclid(2) == 1 {
                second = second.neg();
            }
            let rhs = schouten(&p, &q).wedge(&r).add(&second);
            assert!(lhs.sub(&rhs).is_zero());
        }
    }

    #[test]
    fn schouten_graded_jacobi() {
        let chart = base_chart(2).unwrap();
        let mut rng = Rng::new(23);
        for _ in 0..15 {
            let pr = 1 + rng.below(2);
            let qr = 1 + rng.below(2);
            let rr = 1 + rng.below(2);
            let p = random_mv(&mut rng, &chart, 2, pr);
            let q = random_mv(&mut rng, &chart, 2, qr);
            let r = random_mv(&mut rng, &chart, 2, rr);
            // [P,[Q,R]] = [[P,Q],R] + (-1)^{(p-1)(q-1)} [Q,[P,R]]
            let lhs = schouten(&p, &schouten(&q, &r));
            let mut second = schouten(&q, &schouten(&p, &r));
            if ((pr as i64 - 1) * (qr as i64 - 1)).rem_euclid(2) == 1 {
                second = second.neg();
            }
            let rhs = schouten(&schouten(&p, &q), &r).add(&second);
            assert!(lhs.sub(&rhs).is_zero());
        }
    }

    fn constant_pair(chart: &ChartRef) -> JacobiPair {
        // Lambda = d_0 ^ d_1, E = 0 on R^2
        let one = GradedPoly::one(chart);
        let lambda = vec![
            vec![GradedPoly::zero(chart), one.clone()],
            vec![one.neg(), GradedPoly::zero(chart)],
        ];
        let e = vec![GradedPoly::zero(chart); 2];
        JacobiPair::new(chart, lambda, e).unwrap()
    }

    /// The pair induced by the standard contact form on R^3:
    /// E = d_3, Lambda = (d_1 + x2 d_3) ^ d_2.
    fn contact_r3_pair(chart: &ChartRef) -> JacobiPair {
        let y = coord(chart, 1);
        let one = GradedPoly::one(chart);
        let z = GradedPoly::zero(chart);
        let lambda = vec![
            vec![z.clone(), one.clone(), z.clone()],
            vec![one.neg(), z.clone(), y.neg()],
            vec![z.clone(), y.clone(), z.clone()],
        ];
        let e = vec![z.clone(), z.clone(), one.clone()];
        JacobiPair::new(chart, lambda, e).unwrap()
    }

    #[test]
    fn jacobi_pair_examples() {
        let chart = base_chart(2).unwrap();
        assert!(constant_pair(&chart).is_jacobi());

        // same Lambda with E = x1 d_0 breaks [Lambda, E] = 0
        let one = GradedPoly::one(&chart);
        let lambda = vec![
            vec![GradedPoly::zero(&chart), one.clone()],
            vec![one.neg(), GradedPoly::zero(&chart)],
        ];
        let e = vec![coord(&chart, 0), GradedPoly::zero(&chart)];
        let bad = JacobiPair::new(&chart, lambda, e).unwrap();
        assert!(!bad.is_jacobi());
        let (r1, r2) = bad.check();
        assert!(r1.is_zero());
        assert!(!r2.is_zero());

        let chart3 = base_chart(3).unwrap();
        assert!(contact_r3_pair(&chart3).is_jacobi());
    }

    #[test]
    fn jacobi_pair_bracket_satisfies_jacobi_identity() {
        let chart = base_chart(3).unwrap();
        let pair = contact_r3_pair(&chart);
        let mut rng = Rng::new(5);
        for _ in 0..10 {
            let f = random_function(&mut rng, &chart, 2, 2);
            let g = random_function(&mut rng, &chart, 2, 2);
            let h = random_function(&mut rng, &chart, 2, 2);
            let lhs = pair.fn_bracket(&f, &pair.fn_bracket(&g, &h).unwrap()).unwrap();
            let t1 = pair.fn_bracket(&pair.fn_bracket(&f, &g).unwrap(), &h).unwrap();
            let t2 = pair.fn_bracket(&g, &pair.fn_bracket(&f, &h).unwrap()).unwrap();
            assert!(lhs.sub(&t1).unwrap().sub(&t2).unwrap().is_zero());
        }
    }

    #[test]
    fn degree_one_model_shape() {
        let chart = base_chart(3).unwrap();
        let model = build_jacobi_contact(&contact_r3_pair(&chart)).unwrap();
        assert_eq!(model.contact.check_contact(), ContactVerdict::Contact);
        assert_eq!(model.s.degree().homogeneous(), Some(2));
        assert!(model.contact.master_check(&model.s).unwrap().is_zero());
    }

    #[test]
    fn encode_multivector_examples() {
        let chart = base_chart(2).unwrap();
        let model = build_jacobi_contact(&constant_pair(&chart)).unwrap();
        let gchart = model.contact.chart();
        let p1 = GradedPoly::generator(gchart, model.p_idx[0]);
        let p2 = GradedPoly::generator(gchart, model.p_idx[1]);
        let enc = encode_multivector(&model, &mv(&chart, 2, &[0, 1])).unwrap();
        assert_eq!(enc, p1.mul(&p2).unwrap());
        let x1 = coord(&chart, 0);
        let enc = encode_multivector(
            &model,
            &MultiVector::from_term(&chart, 2, &[1], x1.clone()),
        )
        .unwrap();
        let gx1 = GradedPoly::generator(gchart, model.x_idx[0]);
        assert_eq!(enc, gx1.mul(&p2).unwrap());
    }

    /// The master residual of the degree-1 model equals the encoded
    /// compatibility residuals of the underlying bivector/vector data.
    #[test]
    fn master_residual_matches_schouten_oracle() {
        let mut rng = Rng::new(314);
        for _ in 0..20 {
            let dim = 2 + rng.below(2);
            let pair = random_jacobi_data(&mut rng, dim).unwrap();
            let model = build_jacobi_contact(&pair).unwrap();
            let master = model.contact.master_check(&model.s).unwrap();
            let expected = expected_master_residual(&model, &pair).unwrap();
            assert_eq!(master, expected);
        }
    }

    #[test]
    fn master_zero_iff_jacobi() {
        let mut rng = Rng::new(99);
        let mut seen_nonzero = false;
        for _ in 0..20 {
            let pair = random_jacobi_data(&mut rng, 2).unwrap();
            let model = build_jacobi_contact(&pair).unwrap();
            let master = model.contact.master_check(&model.s).unwrap();
            assert_eq!(master.is_zero(), pair.is_jacobi());
            seen_nonzero |= !master.is_zero();
        }
        assert!(seen_nonzero);
    }

    fn random_section(rng: &mut Rng, chart: &ChartRef, dim: usize) -> SectionCJ {
        let mut s = SectionCJ::zero(chart, dim);
        for i in 0..dim {
            s.x[i] = random_function(rng, chart, 2, 2);
            s.xi[i] = random_function(rng, chart, 2, 2);
        }
        s.f = random_function(rng, chart, 2, 2);
        s.g = random_function(rng, chart, 2, 2);
        s
    }

    /// Frame components of a quadruple section in the order used by
    /// `wade_standard_data`.
    fn frame_components(s: &SectionCJ) -> Section {
        let mut c = Vec::new();
        c.extend(s.x.iter().cloned());
        c.push(s.f.clone());
        c.extend(s.xi.iter().cloned());
        c.push(s.g.clone());
        c
    }

    fn section_from_frames(chart: &ChartRef, dim: usize, c: &Section) -> SectionCJ {
        let mut s = SectionCJ::zero(chart, dim);
        for i in 0..dim {
            s.x[i] = c[i].clone();
            s.xi[i] = c[dim + 1 + i].clone();
        }
        s.f = c[dim].clone();
        s.g = c[2 * dim + 1].clone();
        s
    }

    #[test]
    fn quadruple_bracket_examples() {
        let chart = base_chart(1).unwrap();
        let mut vec_sec = SectionCJ::zero(&chart, 1);
        vec_sec.x[0] = GradedPoly::one(&chart);
        let mut form_sec = SectionCJ::zero(&chart, 1);
        form_sec.xi[0] = GradedPoly::one(&chart);
        // constant vector against constant one-form: everything vanishes
        let br = wade_bracket(&vec_sec, &form_sec).unwrap();
        assert!(br.is_zero());
        // against x dx the vector differentiates the form coefficient
        let x = coord(&chart, 0);
        let br = wade_bracket(&vec_sec, &form_sec.scale_fn(&x).unwrap()).unwrap();
        assert!(br.x[0].is_zero() && br.f.is_zero() && br.g.is_zero());
        assert_eq!(br.xi[0], GradedPoly::one(&chart));
    }

    #[test]
    fn quadruple_bracket_symmetric_part() {
        // [[s,s]] = 1/2 D <s,s>
        let chart = base_chart(2).unwrap();
        let mut rng = Rng::new(7);
        for _ in 0..10 {
            let s = random_section(&mut rng, &chart, 2);
            let lhs = wade_bracket(&s, &s).unwrap();
            let rhs = wade_cal_d(&chart, 2, &s.pairing(&s).unwrap())
                .unwrap()
                .scale_fn(&GradedPoly::constant(&chart, ratio(1, 2)))
                .unwrap();
            assert!(lhs.sub(&rhs).unwrap().is_zero());
        }
    }

    fn same_t(d1: &CourantJacobiData, d2: &CourantJacobiData) -> bool {
        let r = d1.rank();
        (0..r).all(|a| {
            (0..r).all(|b| (0..r).all(|c| d1.t_coeff(a, b, c) == d2.t_coeff(a, b, c)))
        })
    }

    #[test]
    fn standard_algebroid_data_is_valid() {
        for dim in 1..=2 {
            let (data, _) = wade_standard_data(dim).unwrap();
            let report = data.check().unwrap();
            assert!(report.passes());
            assert_eq!(report.residual_terms(), 0);
            // its raw structure array is already canonical
            assert!(same_t(&data, &data.canonicalized().unwrap()));
        }
    }

    #[test]
    fn frame_data_bracket_matches_quadruple_bracket() {
        let mut rng = Rng::new(41);
        for dim in 1..=2 {
            let (data, _) = wade_standard_data(dim).unwrap();
            let chart = data.chart().clone();
            for _ in 0..6 {
                let s1 = random_section(&mut rng, &chart, dim);
                let s2 = random_section(&mut rng, &chart, dim);
                let via_data = data
                    .bracket(&frame_components(&s1), &frame_components(&s2))
                    .unwrap();
                let direct = wade_bracket(&s1, &s2).unwrap();
                let back = section_from_frames(&chart, dim, &via_data);
                assert!(back.sub(&direct).unwrap().is_zero());
            }
        }
    }

    fn point_case(
        rank: usize,
        g: Vec<Vec<Rat>>,
        b: Vec<i64>,
        t_entries: &[(usize, usize, usize, i64)],
    ) -> CourantJacobiData {
        let chart = base_chart(1).unwrap();
        let a = vec![vec![GradedPoly::zero(&chart); 1]; rank];
        let b = b
            .into_iter()
            .map(|v| GradedPoly::constant(&chart, rat(v)))
            .collect();
        let mut t = vec![vec![vec![GradedPoly::zero(&chart); rank]; rank]; rank];
        for &(i, j, k, v) in t_entries {
            t[i][j][k] = GradedPoly::constant(&chart, rat(v));
        }
        CourantJacobiData::new(&chart, 1, rank, g, a, b, t).unwrap()
    }

    fn identity_g(r: usize) -> Vec<Vec<Rat>> {
        let mut g = vec![vec![Rat::zero(); r]; r];
        for i in 0..r {
            g[i][i] = rat(1);
        }
        g
    }

    fn hyperbolic_g() -> Vec<Vec<Rat>> {
        vec![vec![Rat::zero(), rat(1)], vec![rat(1), Rat::zero()]]
    }

    #[test]
    fn point_case_examples() {
        // abelian with hyperbolic pairing
        let abelian = point_case(2, hyperbolic_g(), vec![0, 0], &[]);
        assert!(abelian.check().unwrap().passes());

        // so(3) with its invariant form and totally antisymmetric structure
        let eps = [
            (0usize, 1usize, 2usize, 1i64),
            (1, 2, 0, 1),
            (2, 0, 1, 1),
            (1, 0, 2, -1),
            (0, 2, 1, -1),
            (2, 1, 0, -1),
        ];
        let so3 = point_case(3, identity_g(3), vec![0, 0, 0], &eps);
        assert!(so3.check().unwrap().passes());

        // a symmetric-in-the-first-two-slots entry breaks the pairing axiom
        let bad = point_case(2, hyperbolic_g(), vec![0, 0], &[(0, 1, 0, 1)]);
        let report = bad.check().unwrap();
        assert!(!report.passes());
        assert!(report.axiom3.iter().any(|(_, r)| r.iter().any(|p| !p.is_zero())));

        // nonzero distinguished vector with a skew bracket array also
        // breaks the symmetric-part axiom
        let bad_b = point_case(2, hyperbolic_g(), vec![1, 0], &[]);
        let report = bad_b.check().unwrap();
        assert!(!report.passes());
        assert!(report.axiom3.iter().any(|(_, r)| r.iter().any(|p| !p.is_zero())));
        assert!(report.residual_terms() > 0);
    }

    #[test]
    fn canonicalization_is_idempotent() {
        let bad = point_case(3, identity_g(3), vec![1, -2, 0], &[(0, 1, 0, 1), (2, 1, 0, 3)]);
        let c1 = bad.canonicalized().unwrap();
        let c2 = c1.canonicalized().unwrap();
        assert!(same_t(&c1, &c2));
    }

    #[test]
    fn degree_two_model_shape() {
        let (data, _) = wade_standard_data(1).unwrap();
        let model = build_cj_contact(&data).unwrap();
        assert_eq!(model.contact.check_contact(), ContactVerdict::Contact);
        assert_eq!(model.s.degree().homogeneous(), Some(3));
        // the Reeb field is 2 d/dtheta
        let reeb = model.contact.reeb().unwrap();
        let chart = model.contact.chart();
        let theta = GradedPoly::generator(chart, model.theta_idx);
        assert_eq!(reeb.apply(&theta).unwrap(), GradedPoly::constant(chart, rat(2)));
        for &i in model.x_idx.iter().chain(&model.v_idx).chain(&model.p_idx) {
            assert!(reeb.apply(&GradedPoly::generator(chart, i)).unwrap().is_zero());
        }
        assert!(model.contact.master_check(&model.s).unwrap().is_zero());
    }

    #[test]
    fn degree_two_master_detects_invalid_data() {
        let bad = point_case(2, hyperbolic_g(), vec![0, 0], &[(0, 1, 0, 1)]);
        let canon = bad.canonicalized().unwrap();
        let model = build_cj_contact(&canon).unwrap();
        let master = model.contact.master_check(&model.s).unwrap();
        assert_eq!(master.is_zero(), canon.check().unwrap().passes());
    }

    #[test]
    fn master_zero_iff_axioms_hold_on_random_point_cases() {
        let mut rng = Rng::new(2024);
        let mut seen_pass = false;
        let mut seen_fail = false;
        for case in 0..12 {
            let r = 2 + rng.below(2);
            let g = if r == 2 { hyperbolic_g() } else { identity_g(3) };
            let b: Vec<i64> = (0..r).map(|_| rng.small(1)).collect();
            let mut entries = Vec::new();
            for _ in 0..(case % 4) {
                entries.push((rng.below(r), rng.below(r), rng.below(r), rng.small_nonzero(2)));
            }
            let data = point_case(r, g, b, &entries).canonicalized().unwrap();
            let valid = data.check().unwrap().passes();
            let model = build_cj_contact(&data).unwrap();
            let master = model.contact.master_check(&model.s).unwrap();
            assert_eq!(master.is_zero(), valid);
            seen_pass |= valid;
            seen_fail |= !valid;
        }
        assert!(seen_pass && seen_fail);
    }

    #[test]
    fn degree_two_master_on_standard_algebroid_r2() {
        let (data, _) = wade_standard_data(2).unwrap();
        let model = build_cj_contact(&data).unwrap();
        assert!(model.contact.master_check(&model.s).unwrap().is_zero());
    }

}
