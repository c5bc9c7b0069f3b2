//! Coordinate charts for graded manifolds.
//!
//! A chart lists its generators in a fixed order: each coordinate is
//! immediately followed by its differential, and an optional formal
//! exponential generator `u` (standing for `e^t`) comes with a degree 0
//! coordinate `t`. The declaration order is what makes Koszul signs
//! deterministic across runs.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{CalcError, Result};

/// What role a generator plays in the chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    /// An ordinary graded coordinate.
    Coordinate,
    /// The differential of the coordinate at the given generator index.
    Differential { of: usize },
    /// The formal group-like generator `u = e^t`; admits negative
    /// (Laurent) exponents.
    Exponential,
}

#[derive(Debug, Clone)]
pub struct Generator {
    pub name: String,
    pub kind: GenKind,
    /// Form degree: 1 for differentials, 0 otherwise.
    pub form_degree: i64,
    /// Internal degree: the coordinate degree, also for its differential.
    pub int_degree: i64,
}

impl Generator {
    /// Koszul parity, governed by the total degree `p + l`.
    pub fn parity(&self) -> u8 {
        (((self.form_degree + self.int_degree) % 2) + 2) as u8 % 2
    }

    pub fn is_odd(&self) -> bool {
        self.parity() == 1
    }
}

/// An immutable generator chart, shared behind an `Arc`.
#[derive(Debug)]
pub struct Chart {
    generators: Vec<Generator>,
    /// Indices of coordinate-kind generators, in chart order.
    coordinates: Vec<usize>,
    /// Contact degree tag, when the chart carries one.
    contact_degree: Option<i64>,
    /// Index of the exponential generator, if present.
    exponential: Option<usize>,
}

pub type ChartRef = Arc<Chart>;

impl Chart {
    /// Build a chart from `(name, degree)` coordinate declarations.
    /// Differentials named `d<name>` are interleaved after each coordinate.
    pub fn new(coords: &[(&str, i64)], contact_degree: Option<i64>) -> Result<ChartRef> {
        let mut generators = Vec::with_capacity(coords.len() * 2);
        let mut coordinates = Vec::with_capacity(coords.len());
        for (name, degree) in coords {
            if *degree < 0 {
                return Err(CalcError::InvalidChart(format!(
                    "coordinate `{name}` has negative degree"
                )));
            }
            let idx = generators.len();
            coordinates.push(idx);
            generators.push(Generator {
                name: name.to_string(),
                kind: GenKind::Coordinate,
                form_degree: 0,
                int_degree: *degree,
            });
            generators.push(Generator {
                name: format!("d{name}"),
                kind: GenKind::Differential { of: idx },
                form_degree: 1,
                int_degree: *degree,
            });
        }
        let chart = Chart {
            generators,
            coordinates,
            contact_degree,
            exponential: None,
        };
        chart.check_names()?;
        Ok(Arc::new(chart))
    }

    /// Extend a chart by the symplectization generators `t`, `dt`, `u`.
    /// Existing generator indices are preserved, so polynomials transport
    /// by zero-padding their exponent vectors.
    pub fn extend_symplectization(base: &ChartRef) -> Result<ChartRef> {
        if base.exponential.is_some() {
            return Err(CalcError::InvalidChart(
                "chart already carries an exponential generator".into(),
            ));
        }
        let mut generators = base.generators.clone();
        let mut coordinates = base.coordinates.clone();
        let t_idx = generators.len();
        coordinates.push(t_idx);
        generators.push(Generator {
            name: "t".into(),
            kind: GenKind::Coordinate,
            form_degree: 0,
            int_degree: 0,
        });
        generators.push(Generator {
            name: "dt".into(),
            kind: GenKind::Differential { of: t_idx },
            form_degree: 1,
            int_degree: 0,
        });
        let u_idx = generators.len();
        generators.push(Generator {
            name: "u".into(),
            kind: GenKind::Exponential,
            form_degree: 0,
            int_degree: 0,
        });
        let chart = Chart {
            generators,
            coordinates,
            contact_degree: base.contact_degree,
            exponential: Some(u_idx),
        };
        chart.check_names()?;
        Ok(Arc::new(chart))
    }

    fn check_names(&self) -> Result<()> {
        for (i, g) in self.generators.iter().enumerate() {
            for h in &self.generators[i + 1..] {
                if g.name == h.name {
                    return Err(CalcError::InvalidChart(format!(
                        "duplicate generator name `{}`",
                        g.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generator(&self, idx: usize) -> &Generator {
        &self.generators[idx]
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    /// Indices of coordinate-kind generators, in chart order.
    pub fn coordinate_indices(&self) -> &[usize] {
        &self.coordinates
    }

    pub fn contact_degree(&self) -> Option<i64> {
        self.contact_degree
    }

    pub fn exponential_index(&self) -> Option<usize> {
        self.exponential
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| CalcError::UnknownGenerator(name.to_string()))
    }

    /// The differential generator paired with coordinate `idx`, if any.
    pub fn differential_of(&self, idx: usize) -> Option<usize> {
        self.generators
            .iter()
            .position(|g| matches!(g.kind, GenKind::Differential { of } if of == idx))
    }

    /// Sum of positive internal degrees, a crude nilpotency bound used
    /// to cap the flat-system iteration.
    pub fn positive_degree_sum(&self) -> i64 {
        self.generators
            .iter()
            .filter(|g| matches!(g.kind, GenKind::Coordinate))
            .map(|g| g.int_degree)
            .sum()
    }
}

/// Pointer identity on the shared chart; all cross-value operations
/// require the same chart instance.
pub fn same_chart(a: &ChartRef, b: &ChartRef) -> bool {
    Arc::ptr_eq(a, b)
}
