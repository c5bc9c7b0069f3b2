//! Exact graded-commutative polynomial arithmetic with Koszul sign
//! normal ordering.
//!
//! A `GradedPoly` is a sparse map from normal-ordered monomials to
//! nonzero rational coefficients. Odd generators square to zero and
//! anticommute; the formal exponential generator admits integer
//! (Laurent) exponents.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::chart::{same_chart, ChartRef, GenKind};
use crate::error::{CalcError, Result};

pub type Rat = BigRational;

/// Exponent vector aligned with the chart's generator order.
pub type Mono = Vec<i32>;

/// Degree of a polynomial: a single integer for homogeneous values,
/// `Mixed` otherwise. The zero polynomial reports degree 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degree {
    Homogeneous(i64),
    Mixed,
}

impl Degree {
    pub fn homogeneous(self) -> Option<i64> {
        match self {
            Degree::Homogeneous(d) => Some(d),
            Degree::Mixed => None,
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::Homogeneous(d) => write!(f, "{d}"),
            Degree::Mixed => write!(f, "mixed"),
        }
    }
}

pub fn rat(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Sort a generator word into chart order.
///
/// Returns the Koszul sign of the sorting permutation and the resulting
/// exponent vector. A repeated odd generator yields sign 0 and the empty
/// monomial.
pub fn normalize(chart: &ChartRef, word: &[usize]) -> Result<(i8, Mono)> {
    for &g in word {
        if g >= chart.len() {
            return Err(CalcError::UnknownGenerator(String::from("<index>")));
        }
    }
    let mut sorted: Vec<usize> = word.to_vec();
    // insertion sort, counting odd-odd transpositions
    let mut swaps: u64 = 0;
    for i in 1..sorted.len() {
        let mut j = i;
        while j > 0 && sorted[j - 1] > sorted[j] {
            if chart.generator(sorted[j - 1]).is_odd() && chart.generator(sorted[j]).is_odd() {
                swaps += 1;
            }
            sorted.swap(j - 1, j);
            j -= 1;
        }
    }
    let mut mono = vec![0i32; chart.len()];
    for &g in &sorted {
        mono[g] += 1;
        if chart.generator(g).is_odd() && mono[g] > 1 {
            return Ok((0, vec![0i32; chart.len()]));
        }
    }
    Ok((if swaps % 2 == 0 { 1 } else { -1 }, mono))
}

#[derive(Clone)]
pub struct GradedPoly {
    chart: ChartRef,
    terms: BTreeMap<Mono, Rat>,
}

impl GradedPoly {
    pub fn zero(chart: &ChartRef) -> Self {
        GradedPoly {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(chart: &ChartRef, c: Rat) -> Self {
        let mut p = Self::zero(chart);
        if !c.is_zero() {
            p.terms.insert(vec![0; chart.len()], c);
        }
        p
    }

    pub fn one(chart: &ChartRef) -> Self {
        Self::constant(chart, Rat::one())
    }

    pub fn generator(chart: &ChartRef, idx: usize) -> Self {
        let mut mono = vec![0; chart.len()];
        mono[idx] = 1;
        let mut p = Self::zero(chart);
        p.terms.insert(mono, Rat::one());
        p
    }

    /// A single monomial term with the given exponent vector.
    pub fn monomial(chart: &ChartRef, mono: Mono, c: Rat) -> Self {
        debug_assert_eq!(mono.len(), chart.len());
        let mut p = Self::zero(chart);
        if !c.is_zero() {
            p.terms.insert(mono, c);
        }
        p
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of the constant monomial.
    pub fn constant_term(&self) -> Rat {
        self.terms
            .get(&vec![0; self.chart.len()])
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    fn insert_term(&mut self, mono: Mono, c: Rat) {
        if c.is_zero() {
            return;
        }
        use alloc::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !same_chart(&self.chart, &other.chart) {
            return Err(CalcError::ChartMismatch);
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(&self.chart);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(&self.chart);
        }
        let mut out = Self::zero(&self.chart);
        for (m, k) in &self.terms {
            out.terms.insert(m.clone(), k * c);
        }
        out
    }

    /// Graded product. `f * g = (-1)^{|f||g|} g * f` for homogeneous inputs.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if !same_chart(&self.chart, &other.chart) {
            return Err(CalcError::ChartMismatch);
        }
        let chart = &self.chart;
        let mut out = Self::zero(chart);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((sign, mono)) = mul_monomials(chart, ma, mb) {
                    let mut c = ca * cb;
                    if sign < 0 {
                        c = -c;
                    }
                    out.insert_term(mono, c);
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut out = Self::one(&self.chart);
        for _ in 0..k {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Internal degree; `Mixed` if the monomials disagree, 0 for zero.
    pub fn degree(&self) -> Degree {
        degree_by(self, |i| self.chart.generator(i).int_degree)
    }

    /// Form degree: count of differential generators per monomial.
    pub fn form_degree(&self) -> Degree {
        degree_by(self, |i| self.chart.generator(i).form_degree)
    }

    /// Bidegree `(p, l)` of a bigraded form, when homogeneous in both.
    pub fn bidegree(&self) -> Option<(i64, i64)> {
        match (self.form_degree(), self.degree()) {
            (Degree::Homogeneous(p), Degree::Homogeneous(l)) => Some((p, l)),
            _ => None,
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self.degree(), Degree::Homogeneous(_))
    }

    /// Action of the Euler vector field: each monomial scaled by its
    /// internal degree.
    pub fn euler_apply(&self) -> Self {
        let mut out = Self::zero(&self.chart);
        for (m, c) in &self.terms {
            let d: i64 = m
                .iter()
                .enumerate()
                .map(|(i, &e)| e as i64 * self.chart.generator(i).int_degree)
                .sum();
            if d != 0 {
                out.terms.insert(m.clone(), c * rat(d));
            }
        }
        out
    }

    /// Formal partial derivative along an even, non-exponential generator.
    pub fn partial(&self, idx: usize) -> Result<Self> {
        let gen = self.chart.generator(idx);
        if gen.is_odd() || matches!(gen.kind, GenKind::Exponential) {
            return Err(CalcError::UnsupportedGenerator(gen.name.clone()));
        }
        let mut out = Self::zero(&self.chart);
        for (m, c) in &self.terms {
            let e = m[idx];
            if e == 0 {
                continue;
            }
            let mut mono = m.clone();
            mono[idx] -= 1;
            out.insert_term(mono, c * rat(e as i64));
        }
        Ok(out)
    }

    /// Transport into a chart obtained by appending generators
    /// (exponent vectors are zero-padded).
    pub fn transport_prefix(&self, target: &ChartRef) -> Result<Self> {
        if target.len() < self.chart.len() {
            return Err(CalcError::ChartMismatch);
        }
        for i in 0..self.chart.len() {
            if self.chart.generator(i).name != target.generator(i).name {
                return Err(CalcError::ChartMismatch);
            }
        }
        let mut out = Self::zero(target);
        for (m, c) in &self.terms {
            let mut mono = vec![0i32; target.len()];
            mono[..m.len()].copy_from_slice(m);
            out.terms.insert(mono, c.clone());
        }
        Ok(out)
    }

    /// Transport along an explicit generator map `gen_map[i] = j`:
    /// generator `i` of this chart becomes generator `j` of `target`.
    /// The map must preserve parities; signs are recomputed by
    /// re-normalizing each mapped word.
    pub fn transport_map(&self, target: &ChartRef, gen_map: &[usize]) -> Result<Self> {
        let mut out = Self::zero(target);
        for (m, c) in &self.terms {
            let mut word = Vec::new();
            let mut u_exp = 0i32;
            for (i, &e) in m.iter().enumerate() {
                let j = gen_map[i];
                if matches!(target.generator(j).kind, GenKind::Exponential) {
                    u_exp += e;
                    continue;
                }
                if e < 0 {
                    return Err(CalcError::UnsupportedGenerator(
                        self.chart.generator(i).name.clone(),
                    ));
                }
                for _ in 0..e {
                    word.push(j);
                }
            }
            let (sign, mut mono) = normalize(target, &word)?;
            if sign == 0 {
                continue;
            }
            if let Some(u) = target.exponential_index() {
                mono[u] += u_exp;
            }
            let mut coeff = c.clone();
            if sign < 0 {
                coeff = -coeff;
            }
            out.insert_term(mono, coeff);
        }
        Ok(out)
    }

    /// Substitute `1` for the generator at `one_idx` and `0` for the
    /// generators in `zero_idx`. Used for zero-section pullbacks.
    pub fn substitute_unit_zero(
        &self,
        target: &ChartRef,
        one_idx: &[usize],
        zero_idx: &[usize],
    ) -> Result<Self> {
        let mut out = Self::zero(target);
        'terms: for (m, c) in &self.terms {
            let mut mono = vec![0i32; target.len()];
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if one_idx.contains(&i) {
                    continue;
                }
                if zero_idx.contains(&i) {
                    continue 'terms;
                }
                if i >= target.len() {
                    return Err(CalcError::ChartMismatch);
                }
                mono[i] = e;
            }
            out.insert_term(mono, c.clone());
        }
        Ok(out)
    }

    /// Evaluate a purely even polynomial at a rational point indexed by
    /// generator. Odd or differential generators must be absent.
    pub fn eval_even(&self, point: &BTreeMap<usize, Rat>) -> Result<Rat> {
        let mut total = Rat::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let x = point
                    .get(&i)
                    .ok_or_else(|| CalcError::UnknownGenerator(self.chart.generator(i).name.clone()))?;
                for _ in 0..e {
                    v = v * x;
                }
            }
            total += v;
        }
        Ok(total)
    }

    /// Largest total exponent sum over the monomials (0 for the zero
    /// polynomial). Used by the solver's degree bound.
    pub fn max_word_length(&self) -> i64 {
        self.terms
            .keys()
            .map(|m| m.iter().map(|&e| e.unsigned_abs() as i64).sum())
            .max()
            .unwrap_or(0)
    }
}

fn degree_by<F: Fn(usize) -> i64>(p: &GradedPoly, weight: F) -> Degree {
    let mut deg: Option<i64> = None;
    for m in p.terms.keys() {
        let d: i64 = m.iter().enumerate().map(|(i, &e)| e as i64 * weight(i)).sum();
        match deg {
            None => deg = Some(d),
            Some(prev) if prev != d => return Degree::Mixed,
            _ => {}
        }
    }
    Degree::Homogeneous(deg.unwrap_or(0))
}

/// Multiply two normal-ordered monomials: Koszul sign, or `None` when an
/// odd generator repeats.
fn mul_monomials(chart: &ChartRef, a: &Mono, b: &Mono) -> Option<(i8, Mono)> {
    let n = chart.len();
    let mut mono = vec![0i32; n];
    // suffix[i] = number of odd a-generators with index > i; each odd
    // b-generator at slot i must pass all of them
    let mut swaps: u64 = 0;
    let mut suffix = vec![0u64; n];
    let mut count: u64 = 0;
    for i in (0..n).rev() {
        suffix[i] = count;
        if chart.generator(i).is_odd() {
            count += a[i].max(0) as u64;
        }
    }
    for i in 0..n {
        let g = chart.generator(i);
        if g.is_odd() {
            if a[i] != 0 && b[i] != 0 {
                return None;
            }
            if b[i] != 0 {
                swaps += suffix[i] * b[i] as u64;
            }
        }
        mono[i] = a[i] + b[i];
    }
    Some((if swaps % 2 == 0 { 1 } else { -1 }, mono))
}

/// `(-1)^k` as a sign.
pub fn sign_pow(k: i64) -> i8 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Apply `(-1)^k` to a polynomial.
pub fn signed(p: GradedPoly, k: i64) -> GradedPoly {
    if sign_pow(k) < 0 {
        p.neg()
    } else {
        p
    }
}

impl PartialEq for GradedPoly {
    fn eq(&self, other: &Self) -> bool {
        same_chart(&self.chart, &other.chart) && self.terms == other.terms
    }
}

impl Eq for GradedPoly {}

impl fmt::Display for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c.is_negative();
            let mag = if neg { -c.clone() } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut parts: Vec<String> = Vec::new();
            if !mag.is_one() || m.iter().all(|&e| e == 0) {
                parts.push(alloc::format!("{mag}"));
            }
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = &self.chart.generator(i).name;
                if e == 1 {
                    parts.push(name.clone());
                } else {
                    parts.push(alloc::format!("{name}^{e}"));
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn chart() -> ChartRef {
        // x (0), p (1), q (1), theta (1); differentials interleaved
        Chart::new(&[("x", 0), ("p", 1), ("q", 1), ("theta", 1)], None).unwrap()
    }

    fn g(c: &ChartRef, name: &str) -> GradedPoly {
        GradedPoly::generator(c, c.index_of(name).unwrap())
    }

    #[test]
    fn normalize_odd_square_vanishes() {
        let c = chart();
        let th = c.index_of("theta").unwrap();
        let (sign, mono) = normalize(&c, &[th, th]).unwrap();
        assert_eq!(sign, 0);
        assert!(mono.iter().all(|&e| e == 0));
    }

    #[test]
    fn normalize_odd_transposition() {
        let c = chart();
        let p = c.index_of("p").unwrap();
        let q = c.index_of("q").unwrap();
        let (sign, mono) = normalize(&c, &[q, p]).unwrap();
        assert_eq!(sign, -1);
        assert_eq!(mono[p], 1);
        assert_eq!(mono[q], 1);
    }

    #[test]
    fn normalize_even_commutes() {
        let c = chart();
        let x = c.index_of("x").unwrap();
        let p = c.index_of("p").unwrap();
        let (s1, m1) = normalize(&c, &[p, x]).unwrap();
        let (s2, m2) = normalize(&c, &[x, p]).unwrap();
        assert_eq!(s1, 1);
        assert_eq!(s2, 1);
        assert_eq!(m1, m2);
    }

    #[test]
    fn mul_anticommutes_on_odd() {
        let c = chart();
        let p = g(&c, "p");
        let q = g(&c, "q");
        let s = p.mul(&q).unwrap().add(&q.mul(&p).unwrap()).unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn mul_odd_square_zero_via_units() {
        let c = chart();
        let th = g(&c, "theta");
        let one = GradedPoly::one(&c);
        let a = one.add(&th).unwrap();
        let b = one.sub(&th).unwrap();
        assert_eq!(a.mul(&b).unwrap(), one);
    }

    #[test]
    fn mul_mixed_even_odd() {
        let c = chart();
        let x = g(&c, "x");
        let p = g(&c, "p");
        let q = g(&c, "q");
        let xp = x.mul(&p).unwrap();
        let xq = x.mul(&q).unwrap();
        let expect = x.pow(2).unwrap().mul(&p).unwrap().mul(&q).unwrap();
        assert_eq!(xp.mul(&xq).unwrap(), expect);
    }

    #[test]
    fn degree_examples() {
        let c = chart();
        let xpt = g(&c, "x").mul(&g(&c, "p")).unwrap().mul(&g(&c, "theta")).unwrap();
        assert_eq!(xpt.degree(), Degree::Homogeneous(2));
        let mixed = GradedPoly::one(&c).add(&g(&c, "p")).unwrap();
        assert_eq!(mixed.degree(), Degree::Mixed);
        assert_eq!(GradedPoly::zero(&c).degree(), Degree::Homogeneous(0));
    }

    #[test]
    fn euler_scales_by_degree() {
        let c = chart();
        let xpt = g(&c, "x").mul(&g(&c, "p")).unwrap().mul(&g(&c, "theta")).unwrap();
        assert_eq!(xpt.euler_apply(), xpt.scale(&rat(2)));
        let f0 = g(&c, "x").pow(3).unwrap();
        assert!(f0.euler_apply().is_zero());
        let p = g(&c, "p");
        let pth = p.mul(&g(&c, "theta")).unwrap();
        let f = p.add(&pth).unwrap();
        let expect = p.add(&pth.scale(&rat(2))).unwrap();
        assert_eq!(f.euler_apply(), expect);
    }

    // random monomials as generator words over the full chart (including
    // differentials), bounded length
    fn word_strategy() -> impl Strategy<Value = (Vec<usize>, i64)> {
        (proptest::collection::vec(0usize..8, 0..4), -4i64..5)
    }

    fn poly_from(c: &ChartRef, words: &[(Vec<usize>, i64)]) -> GradedPoly {
        let mut out = GradedPoly::zero(c);
        for (w, coeff) in words {
            if *coeff == 0 {
                continue;
            }
            if let Ok((sign, mono)) = normalize(c, w) {
                if sign != 0 {
                    let cval = rat(*coeff * sign as i64);
                    out = out.add(&GradedPoly::monomial(c, mono, cval)).unwrap();
                }
            }
        }
        out
    }

    proptest! {
        #[test]
        fn mul_associative(
            a in proptest::collection::vec(word_strategy(), 1..4),
            b in proptest::collection::vec(word_strategy(), 1..4),
            d in proptest::collection::vec(word_strategy(), 1..4),
        ) {
            let c = chart();
            let (f, g, h) = (poly_from(&c, &a), poly_from(&c, &b), poly_from(&c, &d));
            let lhs = f.mul(&g).unwrap().mul(&h).unwrap();
            let rhs = f.mul(&g.mul(&h).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn mul_graded_commutative(a in word_strategy(), b in word_strategy()) {
            let c = chart();
            let f = poly_from(&c, core::slice::from_ref(&a));
            let g = poly_from(&c, core::slice::from_ref(&b));
            // monomials are homogeneous in total parity
            let pf = f.terms().next().map(|(m, _)| {
                m.iter().enumerate().map(|(i, &e)| e as i64 * c.generator(i).parity() as i64).sum::<i64>()
            });
            let pg = g.terms().next().map(|(m, _)| {
                m.iter().enumerate().map(|(i, &e)| e as i64 * c.generator(i).parity() as i64).sum::<i64>()
            });
            if let (Some(pf), Some(pg)) = (pf, pg) {
                let fg = f.mul(&g).unwrap();
                let gf = signed(g.mul(&f).unwrap(), pf * pg);
                prop_assert_eq!(fg, gf);
            }
        }

        #[test]
        fn normalize_idempotent(w in proptest::collection::vec(0usize..8, 0..4)) {
            let c = chart();
            let (sign, mono) = normalize(&c, &w).unwrap();
            if sign != 0 {
                // expand the normal-ordered monomial back into a word
                let mut word = Vec::new();
                for (i, &e) in mono.iter().enumerate() {
                    for _ in 0..e {
                        word.push(i);
                    }
                }
                let (sign2, mono2) = normalize(&c, &word).unwrap();
                prop_assert_eq!(sign2, 1);
                prop_assert_eq!(mono2, mono);
            }
        }

        #[test]
        fn euler_is_derivation(
            a in proptest::collection::vec(word_strategy(), 1..4),
            b in proptest::collection::vec(word_strategy(), 1..4),
        ) {
            let c = chart();
            let (f, g) = (poly_from(&c, &a), poly_from(&c, &b));
            let lhs = f.mul(&g).unwrap().euler_apply();
            let rhs = f.euler_apply().mul(&g).unwrap()
                .add(&f.mul(&g.euler_apply()).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
