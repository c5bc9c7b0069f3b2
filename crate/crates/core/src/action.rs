//! Symbolic sigma-model action integrands for the degree-1 and
//! degree-2 models.
//!
//! An integrand is a canonically ordered formal sum of terms
//! `rational x structure-coefficient x ordered field symbols`. The
//! structure coefficient (an entry of `Lambda`, `E`, `a`, `b`, `T`)
//! stays symbolic here; the lattice layer resolves it against the model
//! data at evaluation time.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{CalcError, Result};
use crate::models::{CourantJacobiData, JacobiPair};
use crate::poly::{ratio, Rat};

/// Which action to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionVariant {
    Aksz,
    Bpv,
}

/// A field symbol of the worldvolume theory, with its form degree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum FieldSymbol {
    /// `dX^i` (1-form), `i` zero-based.
    DX(usize),
    /// `eta_i` / `eta^alpha` (1-form).
    Eta(usize),
    /// `d eta^alpha` (2-form, degree-2 models only).
    DEta(usize),
    /// `P_i` (2-form, degree-2 models only).
    P(usize),
    /// `Theta` (n-form).
    Theta,
    /// `dTheta` ((n+1)-form).
    DTheta,
}

impl FieldSymbol {
    /// Worldvolume form degree, given the model degree `n`.
    pub fn form_degree(&self, n: i64) -> i64 {
        match self {
            FieldSymbol::DX(_) | FieldSymbol::Eta(_) => 1,
            FieldSymbol::DEta(_) | FieldSymbol::P(_) => 2,
            FieldSymbol::Theta => n,
            FieldSymbol::DTheta => n + 1,
        }
    }
}

impl fmt::Display for FieldSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSymbol::DX(i) => write!(f, "dX_{}", i + 1),
            FieldSymbol::Eta(i) => write!(f, "eta_{}", i + 1),
            FieldSymbol::DEta(i) => write!(f, "deta_{}", i + 1),
            FieldSymbol::P(i) => write!(f, "P_{}", i + 1),
            FieldSymbol::Theta => write!(f, "Theta"),
            FieldSymbol::DTheta => write!(f, "dTheta"),
        }
    }
}

/// A symbolic structure coefficient, resolved against model data by the
/// evaluator. Indices are zero-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum StructureCoef {
    Lambda(usize, usize),
    EVec(usize),
    Anchor(usize, usize),
    BVec(usize),
    TCoef(usize, usize, usize),
}

impl fmt::Display for StructureCoef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureCoef::Lambda(i, j) => write!(f, "Lambda_{}_{}", i + 1, j + 1),
            StructureCoef::EVec(i) => write!(f, "E_{}", i + 1),
            StructureCoef::Anchor(a, i) => write!(f, "a_{}_{}", a + 1, i + 1),
            StructureCoef::BVec(a) => write!(f, "b_{}", a + 1),
            StructureCoef::TCoef(a, b, c) => write!(f, "T_{}_{}_{}", a + 1, b + 1, c + 1),
        }
    }
}

/// One term of an integrand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionTerm {
    pub coeff: Rat,
    pub structure: Option<StructureCoef>,
    /// Ordered field factors (cup products do not commute; the order is
    /// part of the term).
    pub fields: Vec<FieldSymbol>,
}

impl ActionTerm {
    fn key(&self) -> (Option<StructureCoef>, Vec<FieldSymbol>) {
        (self.structure.clone(), self.fields.clone())
    }
}

/// A canonically ordered formal sum of terms, every one of worldvolume
/// form degree `n + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionIntegrand {
    pub n: i64,
    pub terms: Vec<ActionTerm>,
}

impl ActionIntegrand {
    fn from_terms(n: i64, raw: Vec<ActionTerm>) -> Self {
        let mut terms: Vec<ActionTerm> = Vec::new();
        for t in raw {
            debug_assert_eq!(
                t.fields.iter().map(|s| s.form_degree(n)).sum::<i64>(),
                n + 1
            );
            if t.coeff.is_zero() {
                continue;
            }
            if let Some(existing) = terms.iter_mut().find(|e| e.key() == t.key()) {
                existing.coeff = &existing.coeff + &t.coeff;
            } else {
                terms.push(t);
            }
        }
        terms.retain(|t| !t.coeff.is_zero());
        terms.sort_by(|a, b| a.key().cmp(&b.key()));
        ActionIntegrand { n, terms }
    }

    pub fn sub(&self, other: &ActionIntegrand) -> ActionIntegrand {
        let mut raw = self.terms.clone();
        raw.extend(other.terms.iter().map(|t| ActionTerm {
            coeff: -t.coeff.clone(),
            structure: t.structure.clone(),
            fields: t.fields.clone(),
        }));
        ActionIntegrand::from_terms(self.n, raw)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn render(&self) -> String {
        use core::fmt::Write;
        let mut out = String::new();
        if self.terms.is_empty() {
            out.push('0');
            return out;
        }
        for (k, t) in self.terms.iter().enumerate() {
            let neg = t.coeff.is_negative();
            if k == 0 {
                if neg {
                    out.push_str("-");
                }
            } else if neg {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            let mag = t.coeff.abs();
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() {
                let mut s = String::new();
                if mag.denom().is_one() {
                    let _ = write!(s, "{}", mag.numer());
                } else {
                    let _ = write!(s, "{}/{}", mag.numer(), mag.denom());
                }
                factors.push(s);
            }
            if let Some(c) = &t.structure {
                let mut s = String::new();
                let _ = write!(s, "{c}");
                factors.push(s);
            }
            for fsym in &t.fields {
                let mut s = String::new();
                let _ = write!(s, "{fsym}");
                factors.push(s);
            }
            if factors.is_empty() {
                let mut s = String::new();
                let _ = write!(s, "{}", mag.numer());
                factors.push(s);
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

impl fmt::Display for ActionIntegrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// The degree-1 integrand on a 2-dimensional worldvolume:
/// `eta_i dX^i [+ dTheta] + 1/2 Lambda^{ij} eta_i eta_j - E^i eta_i Theta`,
/// with the `dTheta` term present exactly in the Aksz variant.
pub fn emit_action_jacobi(pair: &JacobiPair, variant: ActionVariant) -> ActionIntegrand {
    let d = pair.dim();
    let mut terms = Vec::new();
    for i in 0..d {
        terms.push(ActionTerm {
            coeff: Rat::one(),
            structure: None,
            fields: vec![FieldSymbol::Eta(i), FieldSymbol::DX(i)],
        });
    }
    if variant == ActionVariant::Aksz {
        terms.push(ActionTerm {
            coeff: Rat::one(),
            structure: None,
            fields: vec![FieldSymbol::DTheta],
        });
    }
    for i in 0..d {
        for j in 0..d {
            if i != j {
                terms.push(ActionTerm {
                    coeff: ratio(1, 2),
                    structure: Some(StructureCoef::Lambda(i, j)),
                    fields: vec![FieldSymbol::Eta(i), FieldSymbol::Eta(j)],
                });
            }
        }
    }
    for i in 0..d {
        terms.push(ActionTerm {
            coeff: -Rat::one(),
            structure: Some(StructureCoef::EVec(i)),
            fields: vec![FieldSymbol::Eta(i), FieldSymbol::Theta],
        });
    }
    ActionIntegrand::from_terms(1, terms)
}

/// The degree-2 integrand on a 3-dimensional worldvolume:
/// `P_i dX^i + 1/2 g_{ab} eta^a d eta^b [+ 1/2 dTheta]
///  - a^i_a eta^a P_i - b_a eta^a Theta + 1/6 T_{abc} eta^a eta^b eta^c`,
/// with the `1/2 dTheta` term present exactly in the Aksz variant.
pub fn emit_action_cj(data: &CourantJacobiData, variant: ActionVariant) -> ActionIntegrand {
    let d = data.dim();
    let r = data.rank();
    let mut terms = Vec::new();
    for i in 0..d {
        terms.push(ActionTerm {
            coeff: Rat::one(),
            structure: None,
            fields: vec![FieldSymbol::P(i), FieldSymbol::DX(i)],
        });
    }
    let half = ratio(1, 2);
    for a in 0..r {
        for b in 0..r {
            let g = &data.g()[a][b];
            if !g.is_zero() {
                terms.push(ActionTerm {
                    coeff: g * &half,
                    structure: None,
                    fields: vec![FieldSymbol::Eta(a), FieldSymbol::DEta(b)],
                });
            }
        }
    }
    if variant == ActionVariant::Aksz {
        terms.push(ActionTerm {
            coeff: half.clone(),
            structure: None,
            fields: vec![FieldSymbol::DTheta],
        });
    }
    for a in 0..r {
        for i in 0..d {
            terms.push(ActionTerm {
                coeff: -Rat::one(),
                structure: Some(StructureCoef::Anchor(a, i)),
                fields: vec![FieldSymbol::Eta(a), FieldSymbol::P(i)],
            });
        }
        terms.push(ActionTerm {
            coeff: -Rat::one(),
            structure: Some(StructureCoef::BVec(a)),
            fields: vec![FieldSymbol::Eta(a), FieldSymbol::Theta],
        });
    }
    let sixth = ratio(1, 6);
    for a in 0..r {
        for b in 0..r {
            for c in 0..r {
                terms.push(ActionTerm {
                    coeff: sixth.clone(),
                    structure: Some(StructureCoef::TCoef(a, b, c)),
                    fields: vec![
                        FieldSymbol::Eta(a),
                        FieldSymbol::Eta(b),
                        FieldSymbol::Eta(c),
                    ],
                });
            }
        }
    }
    ActionIntegrand::from_terms(2, terms)
}

/// The exact term by which the two variants differ: `(1/n) dTheta`.
pub fn variant_difference(n: i64) -> Result<ActionIntegrand> {
    if n != 1 && n != 2 {
        return Err(CalcError::DegreeMismatch {
            expected: 1,
            found: alloc::format!("{n}"),
        });
    }
    Ok(ActionIntegrand::from_terms(
        n,
        vec![ActionTerm {
            coeff: ratio(1, n),
            structure: None,
            fields: vec![FieldSymbol::DTheta],
        }],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{base_chart, wade_standard_data, JacobiPair};
    use crate::poly::GradedPoly;

    fn pair_r2() -> JacobiPair {
        let chart = base_chart(2).unwrap();
        let one = GradedPoly::one(&chart);
        let lambda = vec![
            vec![GradedPoly::zero(&chart), one.clone()],
            vec![one.neg(), GradedPoly::zero(&chart)],
        ];
        let e = vec![GradedPoly::one(&chart), GradedPoly::zero(&chart)];
        JacobiPair::new(&chart, lambda, e).unwrap()
    }

    #[test]
    fn degree_one_aksz_term_list() {
        let action = emit_action_jacobi(&pair_r2(), ActionVariant::Aksz);
        assert_eq!(
            action.render(),
            "eta_1*dX_1 + eta_2*dX_2 + dTheta \
             + 1/2*Lambda_1_2*eta_1*eta_2 + 1/2*Lambda_2_1*eta_2*eta_1 \
             - E_1*eta_1*Theta - E_2*eta_2*Theta"
                .replace("  ", " ")
                .replace("  ", " ")
        );
    }

    #[test]
    fn degree_one_bpv_lacks_only_the_exact_term() {
        let pair = pair_r2();
        let aksz = emit_action_jacobi(&pair, ActionVariant::Aksz);
        let bpv = emit_action_jacobi(&pair, ActionVariant::Bpv);
        assert_eq!(aksz.sub(&bpv), variant_difference(1).unwrap());
        assert_eq!(aksz.num_terms(), bpv.num_terms() + 1);
    }

    #[test]
    fn degree_two_variants_differ_by_half_dtheta() {
        let (data, _) = wade_standard_data(1).unwrap();
        let aksz = emit_action_cj(&data, ActionVariant::Aksz);
        let bpv = emit_action_cj(&data, ActionVariant::Bpv);
        let diff = aksz.sub(&bpv);
        assert_eq!(diff, variant_difference(2).unwrap());
        assert_eq!(diff.num_terms(), 1);
        assert_eq!(diff.render(), "1/2*dTheta");
    }

    #[test]
    fn all_terms_have_worldvolume_degree_n_plus_one() {
        let (data, _) = wade_standard_data(2).unwrap();
        for variant in [ActionVariant::Aksz, ActionVariant::Bpv] {
            let a = emit_action_cj(&data, variant);
            for t in &a.terms {
                let deg: i64 = t.fields.iter().map(|s| s.form_degree(a.n)).sum();
                assert_eq!(deg, a.n + 1);
            }
        }
    }

    #[test]
    fn unsupported_degree_is_rejected() {
        assert!(variant_difference(3).is_err());
        assert!(variant_difference(0).is_err());
    }

    #[test]
    fn zero_integrand_renders_as_zero() {
        let pair = pair_r2();
        let a = emit_action_jacobi(&pair, ActionVariant::Aksz);
        assert_eq!(a.sub(&a).render(), "0");
    }
}
