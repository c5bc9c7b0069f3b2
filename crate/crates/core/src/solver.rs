//! Linear solving against a flat-type map, split into a rational
//! constant part and a degree-raising remainder.
//!
//! The map sends a vector field to a 1-form and is left-linear over the
//! function algebra, so it is determined by its columns on the
//! coordinate vector fields. Writing the column matrix as `M0 + N` with
//! `M0` the constant rational part, the solver iterates
//! `f <- M0^{-1}(target - N f)` until the exact residual vanishes or a
//! degree bound is exceeded. This avoids determinants over a graded
//! ring with odd entries and terminates on all Darboux-type charts.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::cartan::{BigradedForm, Derivation};
use crate::chart::{ChartRef, GenKind};
use crate::error::{CalcError, Result};
use crate::poly::{GradedPoly, Rat};

/// Extract the left-coefficient components of a 1-form along the
/// chart's differential generators: `beta = sum_a c_a dz_a`.
pub fn one_form_components(form: &BigradedForm, rows: &[usize]) -> Result<Vec<GradedPoly>> {
    let chart = form.chart().clone();
    let mut comps = vec![GradedPoly::zero(&chart); rows.len()];
    for (mono, coeff) in form.terms() {
        let mut diff_slot: Option<usize> = None;
        for (i, &e) in mono.iter().enumerate() {
            if e != 0 && matches!(chart.generator(i).kind, GenKind::Differential { .. }) {
                if diff_slot.is_some() || e != 1 {
                    return Err(CalcError::DegreeMismatch {
                        expected: 1,
                        found: alloc::format!("form degree > 1 monomial"),
                    });
                }
                diff_slot = Some(i);
            }
        }
        let didx = diff_slot.ok_or(CalcError::DegreeMismatch {
            expected: 1,
            found: alloc::format!("form degree 0 monomial"),
        })?;
        let row = rows
            .iter()
            .position(|&r| r == didx)
            .ok_or_else(|| CalcError::UnknownGenerator(chart.generator(didx).name.clone()))?;
        // move dz past the suffix to the far right
        let mut suffix_parity: i64 = 0;
        let mut rest = mono.clone();
        rest[didx] = 0;
        for (j, &e) in mono.iter().enumerate() {
            if j > didx {
                suffix_parity += e as i64 * chart.generator(j).parity() as i64;
            }
        }
        let sign = crate::poly::sign_pow(chart.generator(didx).parity() as i64 * suffix_parity);
        let mut c = coeff.clone();
        if sign < 0 {
            c = -c;
        }
        comps[row] = comps[row].add(&GradedPoly::monomial(&chart, rest, c))?;
    }
    Ok(comps)
}

/// Invert a rational matrix by Gauss-Jordan elimination.
pub fn invert(m: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut inv: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rat::one() } else { Rat::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for j in 0..n {
                    let av = &a[col][j] * &factor;
                    a[r][j] = &a[r][j] - &av;
                    let iv = &inv[col][j] * &factor;
                    inv[r][j] = &inv[r][j] - &iv;
                }
            }
        }
    }
    Some(inv)
}

/// A nonzero rational kernel vector of a stacked rational matrix
/// (rows over columns), or `None` when the kernel is trivial.
pub fn kernel_vector(rows: &[Vec<Rat>], ncols: usize) -> Option<Vec<Rat>> {
    let mut a: Vec<Vec<Rat>> = rows.to_vec();
    let nrows = a.len();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..nrows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let pv = a[r][c].clone();
        for j in 0..ncols {
            a[r][j] = &a[r][j] / &pv;
        }
        for i in 0..nrows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..ncols {
                    let v = &a[r][j] * &f;
                    a[i][j] = &a[i][j] - &v;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == nrows {
            break;
        }
    }
    let free = (0..ncols).find(|c| !pivot_cols.contains(c))?;
    let mut v = vec![Rat::zero(); ncols];
    v[free] = Rat::one();
    for (row, &pc) in pivot_cols.iter().enumerate() {
        v[pc] = -a[row][free].clone();
    }
    Some(v)
}

/// The column data of a flat-type map.
pub struct FlatSystem {
    chart: ChartRef,
    /// Unknown generators (coordinate vector fields), chart order.
    pub unknowns: Vec<usize>,
    /// Differential generators indexing the form components.
    pub rows: Vec<usize>,
    /// `cols[b][a]` = component `a` of the map applied to `e_{unknowns[b]}`.
    pub cols: Vec<Vec<GradedPoly>>,
    /// Constant rational part, `m0[a][b]`.
    pub m0: Vec<Vec<Rat>>,
    m0_inv: Option<Vec<Vec<Rat>>>,
}

impl FlatSystem {
    pub fn build<F>(chart: &ChartRef, unknowns: Vec<usize>, rows: Vec<usize>, map: F) -> Result<Self>
    where
        F: Fn(&Derivation) -> Result<BigradedForm>,
    {
        let mut cols = Vec::with_capacity(unknowns.len());
        for &b in &unknowns {
            let e_b = Derivation::coordinate(chart, b);
            let image = map(&e_b)?;
            cols.push(one_form_components(&image, &rows)?);
        }
        let m0: Vec<Vec<Rat>> = (0..rows.len())
            .map(|a| (0..unknowns.len()).map(|b| cols[b][a].constant_term()).collect())
            .collect();
        let m0_inv = if rows.len() == unknowns.len() {
            invert(&m0)
        } else {
            None
        };
        Ok(FlatSystem {
            chart: chart.clone(),
            unknowns,
            rows,
            cols,
            m0,
            m0_inv,
        })
    }

    pub fn constant_part_invertible(&self) -> bool {
        self.m0_inv.is_some()
    }

    /// A constant vector annihilated by the full polynomial matrix, i.e.
    /// a rational-coefficient vector field in the kernel of the map.
    pub fn constant_kernel(&self) -> Option<Vec<Rat>> {
        // stack one rational row per (component row, monomial)
        let mut monos: Vec<(usize, crate::poly::Mono)> = Vec::new();
        for col in &self.cols {
            for (a, p) in col.iter().enumerate() {
                for (m, _) in p.terms() {
                    if !monos.iter().any(|(ra, rm)| *ra == a && rm == m) {
                        monos.push((a, m.clone()));
                    }
                }
            }
        }
        let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(monos.len());
        for (a, m) in &monos {
            let row: Vec<Rat> = self
                .cols
                .iter()
                .map(|col| {
                    col[*a]
                        .terms()
                        .find(|(tm, _)| *tm == m)
                        .map(|(_, c)| c.clone())
                        .unwrap_or_else(Rat::zero)
                })
                .collect();
            rows.push(row);
        }
        if rows.is_empty() {
            // the map is identically zero; any coordinate field works
            if self.unknowns.is_empty() {
                return None;
            }
            let mut v = vec![Rat::zero(); self.unknowns.len()];
            v[0] = Rat::one();
            return Some(v);
        }
        kernel_vector(&rows, self.unknowns.len())
    }

    /// Solve `sum_b f_b cols[b] = target` for polynomial components
    /// `f_b`, by constant-part iteration with exact residual checks.
    pub fn solve(&self, target: &BigradedForm) -> Result<Vec<GradedPoly>> {
        let m0_inv = self
            .m0_inv
            .as_ref()
            .ok_or(CalcError::NoPolynomialSolution)?;
        let target_comps = one_form_components(target, &self.rows)?;
        let nb = self.unknowns.len();
        let mut f: Vec<GradedPoly> = vec![GradedPoly::zero(&self.chart); nb];
        let bound = target.max_word_length() + self.chart.positive_degree_sum() + self.chart.len() as i64 + 8;
        for _ in 0..=bound {
            // exact residual
            let mut residual = target_comps.clone();
            for b in 0..nb {
                if f[b].is_zero() {
                    continue;
                }
                for a in 0..residual.len() {
                    if !self.cols[b][a].is_zero() {
                        residual[a] = residual[a].sub(&f[b].mul(&self.cols[b][a])?)?;
                    }
                }
            }
            if residual.iter().all(|r| r.is_zero()) {
                return Ok(f);
            }
            for b in 0..nb {
                let mut delta = GradedPoly::zero(&self.chart);
                for a in 0..residual.len() {
                    if !m0_inv[b][a].is_zero() {
                        delta = delta.add(&residual[a].scale(&m0_inv[b][a]))?;
                    }
                }
                f[b] = f[b].add(&delta)?;
            }
            if f.iter().any(|p| p.max_word_length() > bound) {
                return Err(CalcError::NoPolynomialSolution);
            }
        }
        Err(CalcError::NoPolynomialSolution)
    }
}
