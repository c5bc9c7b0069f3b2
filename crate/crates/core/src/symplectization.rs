//! Symplectization: the homogeneous symplectic manifold `M x R` with
//! `omega = d(e^t alpha)`, lifts of functions and Hamiltonian fields,
//! and the Poisson bracket that serves as an independent oracle for the
//! Jacobi bracket.
//!
//! The exponential `e^t` is a formal group-like Laurent generator `u`
//! with `d u = u dt` and `(d/dt)(u) = u`, so the whole construction
//! stays inside exact Laurent-polynomial arithmetic.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::cartan::{contract, d, lie, BigradedForm, Derivation};
use crate::chart::{Chart, ChartRef, GenKind};
use crate::contact::ContactChart;
use crate::error::{CalcError, Result};
use crate::poly::{rat, ratio, signed, GradedPoly};
use crate::solver::FlatSystem;

pub struct Symplectization {
    source: Arc<ContactChart>,
    ext: ChartRef,
    t_idx: usize,
    u_idx: usize,
    alpha_ext: BigradedForm,
    omega: BigradedForm,
    /// The homogeneity field `Z = d/dt`.
    z: Derivation,
    system: FlatSystem,
}

impl Symplectization {
    /// Extend the chart by `t` and `u = e^t` and build
    /// `omega = d(u alpha)`. Closedness and `L_Z omega = omega` are
    /// verified at construction.
    pub fn new(source: &Arc<ContactChart>) -> Result<Self> {
        let ext = Chart::extend_symplectization(source.chart())?;
        let t_idx = ext.index_of("t")?;
        let u_idx = ext.index_of("u")?;
        let alpha_ext = source.alpha().transport_prefix(&ext)?;
        let u = GradedPoly::generator(&ext, u_idx);
        let omega = d(&u.mul(&alpha_ext)?)?;
        if !d(&omega)?.is_zero() {
            return Err(CalcError::InvalidChart("omega not closed".into()));
        }
        let mut z_images = BTreeMap::new();
        z_images.insert(t_idx, GradedPoly::one(&ext));
        z_images.insert(u_idx, u.clone());
        let z = Derivation::new(&ext, 0, z_images)?;
        if lie(&z, &omega)? != omega {
            return Err(CalcError::InvalidChart("omega not homogeneous".into()));
        }
        // the omega-flat system, rescaled by u^{-1} so that its constant
        // part is rational
        let mut u_inv_mono = alloc::vec![0i32; ext.len()];
        u_inv_mono[u_idx] = -1;
        let u_inv = GradedPoly::monomial(&ext, u_inv_mono, rat(1));
        let unknowns: Vec<usize> = ext.coordinate_indices().to_vec();
        let rows: Vec<usize> = (0..ext.len())
            .filter(|&i| matches!(ext.generator(i).kind, GenKind::Differential { .. }))
            .collect();
        let omega_c = omega.clone();
        let u_inv_c = u_inv.clone();
        let system = FlatSystem::build(&ext, unknowns, rows, |x| {
            u_inv_c.mul(&contract(x, &omega_c)?)
        })?;
        Ok(Symplectization {
            source: source.clone(),
            ext,
            t_idx,
            u_idx,
            alpha_ext,
            omega,
            z,
            system,
        })
    }

    pub fn chart(&self) -> &ChartRef {
        &self.ext
    }

    pub fn source(&self) -> &Arc<ContactChart> {
        &self.source
    }

    pub fn omega(&self) -> &BigradedForm {
        &self.omega
    }

    /// The contact form transported to the extended chart.
    pub fn alpha_ext(&self) -> &BigradedForm {
        &self.alpha_ext
    }

    pub fn homogeneity_field(&self) -> &Derivation {
        &self.z
    }

    pub fn t_index(&self) -> usize {
        self.t_idx
    }

    pub fn u_index(&self) -> usize {
        self.u_idx
    }

    /// Transport a function on the source chart to the extended chart.
    pub fn include(&self, f: &GradedPoly) -> Result<GradedPoly> {
        f.transport_prefix(&self.ext)
    }

    /// The lift `f -> e^t f`.
    pub fn lift_function(&self, f: &GradedPoly) -> Result<GradedPoly> {
        GradedPoly::generator(&self.ext, self.u_idx).mul(&self.include(f)?)
    }

    /// The Hamiltonian vector field of a homogeneous function on the
    /// extended chart: the unique solution of
    /// `d f = (-1)^{|f|-n-1} i_X omega`.
    pub fn hamiltonian_vf(&self, f: &GradedPoly) -> Result<Derivation> {
        let deg_f = f.degree().homogeneous().ok_or(CalcError::Inhomogeneous)?;
        let n = self.source.degree();
        let df = d(f)?;
        // i_X omega = (-1)^{|f|-n-1} d f
        let target_form = signed(df.clone(), deg_f - n - 1);
        let mut u_inv_mono = alloc::vec![0i32; self.ext.len()];
        u_inv_mono[self.u_idx] = -1;
        let u_inv = GradedPoly::monomial(&self.ext, u_inv_mono, rat(1));
        let target = u_inv.mul(&target_form)?;
        let comps = self.system.solve(&target)?;
        let mut images = BTreeMap::new();
        for (b, poly) in self.system.unknowns.iter().zip(comps) {
            if !poly.is_zero() {
                images.insert(*b, poly);
            }
        }
        // a derivation on the symplectization treats u as e^t
        let t_image = images
            .get(&self.t_idx)
            .cloned()
            .unwrap_or_else(|| GradedPoly::zero(&self.ext));
        if !t_image.is_zero() {
            let u = GradedPoly::generator(&self.ext, self.u_idx);
            images.insert(self.u_idx, u.mul(&t_image)?);
        }
        let x = Derivation::new_unchecked(&self.ext, deg_f - n, images);
        // back-substitution certificate
        if contract(&x, &self.omega)? != target_form {
            return Err(CalcError::NoPolynomialSolution);
        }
        Ok(x)
    }

    /// Poisson bracket `{f,g}_omega = X_f(g)` on the symplectization.
    pub fn poisson_bracket(&self, f: &GradedPoly, g: &GradedPoly) -> Result<GradedPoly> {
        let xf = self.hamiltonian_vf(f)?;
        xf.apply(g)
    }

    /// The Liouville-type potential `lambda = (1/n) i_epsilon omega`.
    pub fn lambda(&self) -> Result<BigradedForm> {
        let n = self.source.degree();
        if n == 0 {
            return Err(CalcError::DegreeMismatch {
                expected: 1,
                found: alloc::format!("contact degree 0"),
            });
        }
        let eps = Derivation::euler(&self.ext);
        Ok(contract(&eps, &self.omega)?.scale(&ratio(1, n)))
    }

    /// Pull a form on the extended chart back along the zero section
    /// `t = 0`: substitutes `u -> 1`, `t -> 0`, `dt -> 0`.
    pub fn zero_section_pullback(&self, form: &BigradedForm) -> Result<BigradedForm> {
        let base = self.source.chart();
        let dt_idx = self
            .ext
            .differential_of(self.t_idx)
            .ok_or_else(|| CalcError::UnknownGenerator("dt".into()))?;
        form.substitute_unit_zero(base, &[self.u_idx], &[self.t_idx, dt_idx])
    }
}
