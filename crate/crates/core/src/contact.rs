//! Contact charts, the flat map, Reeb and contact Hamiltonian vector
//! fields, Jacobi and Cartan brackets, and master-equation checking.
//!
//! The same code path serves ungraded charts (all coordinate degrees 0,
//! contact degree 0) and graded charts; the graded sign factors
//! collapse to the classical formulas in the ungraded regime.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::cartan::{commutator, contract, d, is_homological, BigradedForm, Derivation};
use crate::chart::{same_chart, ChartRef, GenKind};
use crate::error::{CalcError, Result};
use crate::poly::{sign_pow, signed, Degree, GradedPoly};
use crate::solver::FlatSystem;

/// Outcome of the contact test on a chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactVerdict {
    /// The constant part of the flat matrix is invertible and the
    /// solver succeeds on every generator target.
    Contact,
    /// A constant-coefficient vector field lies in the kernel of flat.
    Degenerate,
    /// The constant part is singular but no constant kernel vector
    /// exists; global invertibility is not decided.
    Indeterminate,
}

/// A chart equipped with a degree `n` contact form, with the flat
/// matrix and Reeb vector field cached at construction.
pub struct ContactChart {
    chart: ChartRef,
    n: i64,
    alpha: BigradedForm,
    dalpha: BigradedForm,
    system: FlatSystem,
    verdict: ContactVerdict,
    reeb: Option<Derivation>,
}

impl ContactChart {
    /// Validate the contact form and cache the flat data. Construction
    /// succeeds for degenerate charts too; `check_contact` reports the
    /// verdict.
    pub fn new(chart: &ChartRef, alpha: BigradedForm) -> Result<Arc<Self>> {
        if !same_chart(alpha.chart(), chart) {
            return Err(CalcError::ChartMismatch);
        }
        let n = match alpha.bidegree() {
            Some((1, n)) => n,
            other => {
                return Err(CalcError::DegreeMismatch {
                    expected: 1,
                    found: format!("{other:?}"),
                })
            }
        };
        if let Some(tag) = chart.contact_degree() {
            if tag != n {
                return Err(CalcError::DegreeMismatch {
                    expected: tag,
                    found: format!("{n}"),
                });
            }
        }
        let dalpha = d(&alpha)?;
        let unknowns: Vec<usize> = chart.coordinate_indices().to_vec();
        let rows: Vec<usize> = (0..chart.len())
            .filter(|&i| matches!(chart.generator(i).kind, GenKind::Differential { .. }))
            .collect();
        let alpha_c = alpha.clone();
        let dalpha_c = dalpha.clone();
        let system = FlatSystem::build(chart, unknowns, rows, |x| {
            flat_of(x, &alpha_c, &dalpha_c)
        })?;
        let (verdict, reeb) = if system.constant_part_invertible() {
            let mut ok = true;
            for &row in &system.rows {
                let target = GradedPoly::generator(chart, row);
                if system.solve(&target).is_err() {
                    ok = false;
                    break;
                }
            }
            let reeb = if ok { solve_reeb(chart, &system, &alpha, &dalpha, n) } else { None };
            if ok && reeb.is_some() {
                (ContactVerdict::Contact, reeb)
            } else {
                (ContactVerdict::Indeterminate, None)
            }
        } else if system.constant_kernel().is_some() {
            (ContactVerdict::Degenerate, None)
        } else {
            (ContactVerdict::Indeterminate, None)
        };
        Ok(Arc::new(ContactChart {
            chart: chart.clone(),
            n,
            alpha,
            dalpha,
            system,
            verdict,
            reeb,
        }))
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    /// The contact degree `n`.
    pub fn degree(&self) -> i64 {
        self.n
    }

    pub fn alpha(&self) -> &BigradedForm {
        &self.alpha
    }

    pub fn dalpha(&self) -> &BigradedForm {
        &self.dalpha
    }

    pub fn check_contact(&self) -> ContactVerdict {
        self.verdict
    }

    /// The flat map `X -> (i_X alpha) alpha + i_X d alpha`.
    pub fn flat(&self, x: &Derivation) -> Result<BigradedForm> {
        flat_of(x, &self.alpha, &self.dalpha)
    }

    /// The Reeb vector field: the unique solution of `flat(R) = alpha`,
    /// of degree `-n`.
    pub fn reeb(&self) -> Result<&Derivation> {
        self.reeb.as_ref().ok_or(CalcError::NotContact)
    }

    /// The contact Hamiltonian vector field of a homogeneous function:
    /// `i_{X_f} alpha = f`,
    /// `i_{X_f} d alpha = (-1)^{n(|f|-1)} R(f) alpha - (-1)^{|f|-n} df`.
    pub fn hamiltonian_vf(&self, f: &GradedPoly) -> Result<Derivation> {
        let reeb = self.reeb()?;
        let deg_f = match f.degree() {
            Degree::Homogeneous(k) => k,
            Degree::Mixed => return Err(CalcError::Inhomogeneous),
        };
        let n = self.n;
        let rf = reeb.apply(f)?;
        let dalpha_target = signed(rf.mul(&self.alpha)?, n * (deg_f - 1))
            .sub(&signed(d(f)?, deg_f - n))?;
        let target = f.mul(&self.alpha)?.add(&dalpha_target)?;
        let comps = self.system.solve(&target)?;
        let x = self.derivation_from_components(comps, deg_f - n);
        // back-substitution certificate
        if contract(&x, &self.alpha)? != *f || contract(&x, &self.dalpha)? != dalpha_target {
            return Err(CalcError::NoPolynomialSolution);
        }
        Ok(x)
    }

    fn derivation_from_components(&self, comps: Vec<GradedPoly>, degree: i64) -> Derivation {
        let mut images = BTreeMap::new();
        for (b, poly) in self.system.unknowns.iter().zip(comps) {
            if !poly.is_zero() {
                images.insert(*b, poly);
            }
        }
        Derivation::new_unchecked(&self.chart, degree, images)
    }

    /// Jacobi bracket `{f,g}_J = X_f(g) - (-1)^{n(|f|+1)} R(f) g`.
    pub fn jacobi_bracket(&self, f: &GradedPoly, g: &GradedPoly) -> Result<GradedPoly> {
        let deg_f = f.degree().homogeneous().ok_or(CalcError::Inhomogeneous)?;
        let xf = self.hamiltonian_vf(f)?;
        let rf = self.reeb()?.apply(f)?;
        xf.apply(g)?.sub(&signed(rf.mul(g)?, self.n * (deg_f + 1)))
    }

    /// Cartan bracket `{f,g}_C = X_f(g)`.
    pub fn cartan_bracket(&self, f: &GradedPoly, g: &GradedPoly) -> Result<GradedPoly> {
        let xf = self.hamiltonian_vf(f)?;
        xf.apply(g)
    }

    /// Master-equation residual `{S,S}_J` for a degree `n+1` function.
    /// The chart with `(alpha, S)` is a contact NQ-manifold iff the
    /// residual vanishes; agreement with `is_homological(X_S)` is
    /// certified along the way.
    pub fn master_check(&self, s: &GradedPoly) -> Result<GradedPoly> {
        if !s.is_zero() {
            match s.degree() {
                Degree::Homogeneous(k) if k == self.n + 1 => {}
                other => {
                    return Err(CalcError::DegreeMismatch {
                        expected: self.n + 1,
                        found: format!("{other}"),
                    })
                }
            }
        }
        let residual = self.jacobi_bracket(s, s)?;
        if !s.is_zero() {
            let xs = self.hamiltonian_vf(s)?;
            let homological = is_homological(&xs);
            if homological != residual.is_zero() {
                // {S,S}_J = i_{[X_S,X_S]} alpha; a mismatch would mean the
                // correspondence X_{{f,g}} = [X_f, X_g] failed
                return Err(CalcError::NoPolynomialSolution);
            }
        }
        Ok(residual)
    }

    /// `i_{[X_f, X_g]} alpha`, the definitional route to the Jacobi
    /// bracket; used by tests as a cross-check.
    pub fn jacobi_bracket_via_commutator(
        &self,
        f: &GradedPoly,
        g: &GradedPoly,
    ) -> Result<GradedPoly> {
        let xf = self.hamiltonian_vf(f)?;
        let xg = self.hamiltonian_vf(g)?;
        contract(&commutator(&xf, &xg)?, &self.alpha)
    }
}

fn flat_of(x: &Derivation, alpha: &BigradedForm, dalpha: &BigradedForm) -> Result<BigradedForm> {
    let ia = contract(x, alpha)?;
    ia.mul(alpha)?.add(&contract(x, dalpha)?)
}

fn solve_reeb(
    chart: &ChartRef,
    system: &FlatSystem,
    alpha: &BigradedForm,
    dalpha: &BigradedForm,
    n: i64,
) -> Option<Derivation> {
    let comps = system.solve(alpha).ok()?;
    let mut images = BTreeMap::new();
    for (b, poly) in system.unknowns.iter().zip(comps) {
        if !poly.is_zero() {
            images.insert(*b, poly);
        }
    }
    let r = Derivation::new_unchecked(chart, -n, images);
    // certify i_R alpha = 1 and i_R d alpha = 0
    let one = GradedPoly::one(chart);
    if contract(&r, alpha).ok()? != one || !contract(&r, dalpha).ok()?.is_zero() {
        return None;
    }
    Some(r)
}

/// Convenience check used by tests: `(-1)^k` lives here so sign-sensitive
/// call sites read uniformly.
pub fn sign(k: i64) -> i8 {
    sign_pow(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::lie;
    use crate::chart::Chart;
    use crate::corpus::{self, Rng};
    use crate::poly::rat;
    use crate::poly::ratio;

    fn g(c: &ChartRef, name: &str) -> GradedPoly {
        GradedPoly::generator(c, c.index_of(name).unwrap())
    }

    fn darboux1() -> Arc<ContactChart> {
        let c = Chart::new(&[("x", 0), ("p", 1), ("theta", 1)], Some(1)).unwrap();
        let alpha = g(&c, "p")
            .mul(&g(&c, "dx"))
            .unwrap()
            .add(&g(&c, "dtheta"))
            .unwrap();
        ContactChart::new(&c, alpha).unwrap()
    }

    fn darboux2() -> Arc<ContactChart> {
        let c = Chart::new(&[("x", 0), ("v", 1), ("p", 2), ("theta", 2)], Some(2)).unwrap();
        let half = ratio(1, 2);
        let alpha = g(&c, "p")
            .mul(&g(&c, "dx"))
            .unwrap()
            .add(&g(&c, "v").mul(&g(&c, "dv")).unwrap().scale(&half))
            .unwrap()
            .add(&g(&c, "dtheta").scale(&half))
            .unwrap();
        ContactChart::new(&c, alpha).unwrap()
    }

    fn ungraded_r3() -> Arc<ContactChart> {
        let c = Chart::new(&[("x", 0), ("y", 0), ("z", 0)], Some(0)).unwrap();
        let alpha = g(&c, "dz")
            .sub(&g(&c, "y").mul(&g(&c, "dx")).unwrap())
            .unwrap();
        ContactChart::new(&c, alpha).unwrap()
    }

    #[test]
    fn darboux_charts_are_contact() {
        assert_eq!(darboux1().check_contact(), ContactVerdict::Contact);
        assert_eq!(darboux2().check_contact(), ContactVerdict::Contact);
        assert_eq!(ungraded_r3().check_contact(), ContactVerdict::Contact);
    }

    #[test]
    fn theta_only_form_is_degenerate() {
        let c = Chart::new(&[("x", 0), ("p", 1), ("theta", 1)], None).unwrap();
        let cc = ContactChart::new(&c, g(&c, "dtheta")).unwrap();
        assert_eq!(cc.check_contact(), ContactVerdict::Degenerate);
        assert!(cc.reeb().is_err());
    }

    #[test]
    fn rejects_non_one_forms() {
        let c = Chart::new(&[("x", 0), ("p", 1), ("theta", 1)], None).unwrap();
        let two_form = g(&c, "dp").mul(&g(&c, "dx")).unwrap();
        assert!(ContactChart::new(&c, two_form).is_err());
    }

    #[test]
    fn flat_examples() {
        let cc = darboux1();
        let c = cc.chart();
        let r = cc.reeb().unwrap();
        assert_eq!(cc.flat(r).unwrap(), *cc.alpha());
        let zero = Derivation::zero(c, 0);
        assert!(cc.flat(&zero).unwrap().is_zero());
        let ddtheta = Derivation::coordinate(c, c.index_of("theta").unwrap());
        assert_eq!(cc.flat(&ddtheta).unwrap(), *cc.alpha());
    }

    #[test]
    fn reeb_fields() {
        let cc = darboux1();
        let c = cc.chart();
        let expect = Derivation::coordinate(c, c.index_of("theta").unwrap());
        assert_eq!(*cc.reeb().unwrap(), expect);
        assert_eq!(cc.reeb().unwrap().degree(), -1);

        let cc2 = darboux2();
        let c2 = cc2.chart();
        let expect2 =
            Derivation::coordinate(c2, c2.index_of("theta").unwrap()).scale(&rat(2));
        assert_eq!(*cc2.reeb().unwrap(), expect2);

        let cc0 = ungraded_r3();
        let c0 = cc0.chart();
        let expect0 = Derivation::coordinate(c0, c0.index_of("z").unwrap());
        assert_eq!(*cc0.reeb().unwrap(), expect0);
    }

    #[test]
    fn hamiltonian_of_one_is_reeb() {
        for cc in [darboux1(), darboux2(), ungraded_r3()] {
            let one = GradedPoly::one(cc.chart());
            let x1 = cc.hamiltonian_vf(&one).unwrap();
            assert_eq!(&x1, cc.reeb().unwrap());
        }
    }

    #[test]
    fn hamiltonian_certified_by_equations() {
        let cc = darboux1();
        let c = cc.chart();
        let f = g(c, "x");
        let xf = cc.hamiltonian_vf(&f).unwrap();
        assert_eq!(contract(&xf, cc.alpha()).unwrap(), f);
        assert_eq!(xf.degree(), -1);
    }

    #[test]
    fn jacobi_bracket_examples() {
        let cc = darboux1();
        let c = cc.chart();
        let x = g(c, "x");
        // degree would be -1 on an N-chart
        assert!(cc.jacobi_bracket(&x, &x).unwrap().is_zero());
        let one = GradedPoly::one(c);
        let gpoly = g(c, "p").mul(&g(c, "x")).unwrap();
        let rg = cc.reeb().unwrap().apply(&gpoly).unwrap();
        assert_eq!(cc.jacobi_bracket(&one, &gpoly).unwrap(), rg);
    }

    #[test]
    fn cartan_bracket_examples() {
        let cc = darboux1();
        let c = cc.chart();
        let one = GradedPoly::one(c);
        let gpoly = g(c, "p").mul(&g(c, "x")).unwrap();
        let rg = cc.reeb().unwrap().apply(&gpoly).unwrap();
        assert_eq!(cc.cartan_bracket(&one, &gpoly).unwrap(), rg);
        assert!(cc.cartan_bracket(&gpoly, &one).unwrap().is_zero());
        // difference formula
        let f = g(c, "x").mul(&g(c, "p")).unwrap();
        let n = cc.degree();
        let df = f.degree().homogeneous().unwrap();
        let diff = cc
            .cartan_bracket(&f, &gpoly)
            .unwrap()
            .sub(&cc.jacobi_bracket(&f, &gpoly).unwrap())
            .unwrap();
        let rf = cc.reeb().unwrap().apply(&f).unwrap();
        assert_eq!(diff, signed(rf.mul(&gpoly).unwrap(), n * (df + 1)));
    }

    fn random_pair(rng: &mut Rng, cc: &Arc<ContactChart>) -> Option<(GradedPoly, GradedPoly)> {
        let c = cc.chart();
        let df = rng.below(3) as i64;
        let dg = rng.below(3) as i64;
        let f = corpus::random_homogeneous_function(rng, c, df, 3, 3);
        let gp = corpus::random_homogeneous_function(rng, c, dg, 3, 3);
        if f.is_zero() || gp.is_zero() {
            None
        } else {
            Some((f, gp))
        }
    }

    #[test]
    fn bracket_equals_commutator_route() {
        let mut rng = Rng::new(31);
        for cc in [darboux1(), darboux2(), ungraded_r3()] {
            let mut tested = 0;
            while tested < 15 {
                let Some((f, gp)) = random_pair(&mut rng, &cc) else {
                    continue;
                };
                let direct = cc.jacobi_bracket(&f, &gp).unwrap();
                let via = cc.jacobi_bracket_via_commutator(&f, &gp).unwrap();
                assert_eq!(direct, via);
                tested += 1;
            }
        }
    }

    #[test]
    fn correspondence_on_small_corpus() {
        let mut rng = Rng::new(47);
        for cc in [darboux1(), darboux2()] {
            let mut tested = 0;
            while tested < 10 {
                let Some((f, gp)) = random_pair(&mut rng, &cc) else {
                    continue;
                };
                let br = cc.jacobi_bracket(&f, &gp).unwrap();
                let lhs = if br.is_zero() {
                    Derivation::zero(cc.chart(), 0)
                } else {
                    cc.hamiltonian_vf(&br).unwrap()
                };
                let rhs = commutator(
                    &cc.hamiltonian_vf(&f).unwrap(),
                    &cc.hamiltonian_vf(&gp).unwrap(),
                )
                .unwrap();
                assert_eq!(lhs, rhs);
                tested += 1;
            }
        }
    }

    #[test]
    fn lie_of_alpha_along_hamiltonian() {
        let mut rng = Rng::new(53);
        for cc in [darboux1(), darboux2(), ungraded_r3()] {
            let n = cc.degree();
            let mut tested = 0;
            while tested < 10 {
                let Some((f, _)) = random_pair(&mut rng, &cc) else {
                    continue;
                };
                let df = f.degree().homogeneous().unwrap();
                let xf = cc.hamiltonian_vf(&f).unwrap();
                let lhs = lie(&xf, cc.alpha()).unwrap();
                let rf = cc.reeb().unwrap().apply(&f).unwrap();
                let rhs = signed(rf.mul(cc.alpha()).unwrap(), n * (df - 1));
                assert_eq!(lhs, rhs);
                tested += 1;
            }
        }
    }

    #[test]
    fn cartan_bracket_right_leibniz() {
        let mut rng = Rng::new(61);
        for cc in [darboux1(), darboux2()] {
            let n = cc.degree();
            let mut tested = 0;
            while tested < 10 {
                let Some((f, gp)) = random_pair(&mut rng, &cc) else {
                    continue;
                };
                let Some((h, _)) = random_pair(&mut rng, &cc) else {
                    continue;
                };
                let dg = gp.degree().homogeneous().unwrap();
                let df = f.degree().homogeneous().unwrap();
                let lhs = cc.cartan_bracket(&f, &gp.mul(&h).unwrap()).unwrap();
                let rhs = cc
                    .cartan_bracket(&f, &gp)
                    .unwrap()
                    .mul(&h)
                    .unwrap()
                    .add(&signed(
                        gp.mul(&cc.cartan_bracket(&f, &h).unwrap()).unwrap(),
                        (df - n) * dg,
                    ))
                    .unwrap();
                assert_eq!(lhs, rhs);
                tested += 1;
            }
        }
    }

    #[test]
    fn ungraded_leibniz_anomaly() {
        // {f, gh} = {f,g} h + g {f,h} + R(f) g h on ungraded charts
        let cc = ungraded_r3();
        let mut rng = Rng::new(71);
        let c = cc.chart();
        for _ in 0..10 {
            let f = corpus::random_function(&mut rng, c, 3, 2);
            let gp = corpus::random_function(&mut rng, c, 3, 2);
            let h = corpus::random_function(&mut rng, c, 3, 2);
            let lhs = cc.jacobi_bracket(&f, &gp.mul(&h).unwrap()).unwrap();
            let rf = cc.reeb().unwrap().apply(&f).unwrap();
            let rhs = cc
                .jacobi_bracket(&f, &gp)
                .unwrap()
                .mul(&h)
                .unwrap()
                .add(&gp.mul(&cc.jacobi_bracket(&f, &h).unwrap()).unwrap())
                .unwrap()
                .add(&rf.mul(&gp).unwrap().mul(&h).unwrap())
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn ungraded_reeb_invariant_brackets_coincide() {
        let cc = ungraded_r3();
        let c = cc.chart();
        // functions of x and y only are Reeb invariant (R = d/dz)
        let mut rng = Rng::new(83);
        let xi = c.index_of("x").unwrap();
        let yi = c.index_of("y").unwrap();
        for _ in 0..10 {
            let mk = |rng: &mut Rng| {
                let mut p = GradedPoly::zero(c);
                for _ in 0..3 {
                    let (a, b) = (rng.below(3) as i32, rng.below(3) as i32);
                    let mut mono = alloc::vec![0i32; c.len()];
                    mono[xi] = a;
                    mono[yi] = b;
                    p = p
                        .add(&GradedPoly::monomial(c, mono, rat(rng.small_nonzero(3))))
                        .unwrap();
                }
                p
            };
            let f = mk(&mut rng);
            let gp = mk(&mut rng);
            assert!(cc.reeb().unwrap().apply(&f).unwrap().is_zero());
            assert_eq!(
                cc.jacobi_bracket(&f, &gp).unwrap(),
                cc.cartan_bracket(&f, &gp).unwrap()
            );
        }
    }

    #[test]
    fn master_check_examples() {
        // base R^2: x,y degree 0 with momenta p,q and theta
        let c = Chart::new(
            &[("x", 0), ("y", 0), ("p", 1), ("q", 1), ("theta", 1)],
            Some(1),
        )
        .unwrap();
        let alpha = g(&c, "p")
            .mul(&g(&c, "dx"))
            .unwrap()
            .add(&g(&c, "q").mul(&g(&c, "dy")).unwrap())
            .unwrap()
            .add(&g(&c, "dtheta"))
            .unwrap();
        let cc = ContactChart::new(&c, alpha).unwrap();
        assert!(cc.master_check(&GradedPoly::zero(&c)).unwrap().is_zero());
        // constant bivector: S = p q
        let s = g(&c, "p").mul(&g(&c, "q")).unwrap();
        assert!(cc.master_check(&s).unwrap().is_zero());
        // adding E = x d/dx breaks it: S = p q - x p theta
        let s_bad = s
            .sub(&g(&c, "x").mul(&g(&c, "p")).unwrap().mul(&g(&c, "theta")).unwrap())
            .unwrap();
        assert!(!cc.master_check(&s_bad).unwrap().is_zero());
        // wrong degree rejected
        assert!(cc.master_check(&g(&c, "p")).is_err());
    }
}
