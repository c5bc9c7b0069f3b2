//! JSON model files and their fully validated in-memory form.
//!
//! A model file is a single JSON document with a `kind` discriminator:
//!
//! - `"contact-chart"`: explicit graded coordinates, a contact form
//!   `alpha`, and optionally a function `S` for master checks.
//! - `"jacobi"`: a bivector/vector pair `(Lambda, E)` over `R^d`; the
//!   degree-1 contact model is built from it.
//! - `"courant-jacobi"`: a pairing `g`, anchor `a`, vector `b`, and
//!   structure array `T` over `R^d`; the degree-2 contact model is
//!   built from it.
//!
//! All expression strings use the grammar of [`crate::expr`].

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use gradedcontact::chart::{Chart, ChartRef};
use gradedcontact::contact::ContactChart;
use gradedcontact::models::{
    base_chart, build_cj_contact, build_jacobi_contact, CourantJacobiContactModel,
    CourantJacobiData, JacobiContactModel, JacobiPair,
};
use gradedcontact::poly::{GradedPoly, Rat};

use crate::expr;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoordDecl {
    name: String,
    degree: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    kind: String,
    #[serde(default)]
    coordinates: Option<Vec<CoordDecl>>,
    #[serde(default)]
    alpha: Option<String>,
    #[serde(rename = "S", default)]
    s: Option<String>,
    #[serde(rename = "Lambda", default)]
    lambda: Option<Vec<Vec<String>>>,
    #[serde(rename = "E", default)]
    e: Option<Vec<String>>,
    #[serde(default)]
    g: Option<Vec<Vec<String>>>,
    #[serde(default)]
    a: Option<Vec<Vec<String>>>,
    #[serde(default)]
    b: Option<Vec<String>>,
    #[serde(rename = "T", default)]
    t: Option<Vec<Vec<Vec<String>>>>,
    #[serde(default)]
    base_dim: Option<usize>,
    #[serde(default)]
    rank: Option<usize>,
}

/// A fully validated model, ready to run commands against.
pub enum Model {
    Contact {
        contact: Arc<ContactChart>,
        s: Option<GradedPoly>,
    },
    Jacobi {
        pair: JacobiPair,
        built: JacobiContactModel,
    },
    CourantJacobi {
        data: CourantJacobiData,
        built: CourantJacobiContactModel,
    },
}

impl Model {
    /// The contact chart every kind ultimately carries.
    pub fn contact(&self) -> &Arc<ContactChart> {
        match self {
            Model::Contact { contact, .. } => contact,
            Model::Jacobi { built, .. } => &built.contact,
            Model::CourantJacobi { built, .. } => &built.contact,
        }
    }

    /// The distinguished function `S`, when the model has one.
    pub fn s(&self) -> Option<&GradedPoly> {
        match self {
            Model::Contact { s, .. } => s.as_ref(),
            Model::Jacobi { built, .. } => Some(&built.s),
            Model::CourantJacobi { built, .. } => Some(&built.s),
        }
    }

    /// Name map for expressions over the model's graded chart.
    pub fn names(&self) -> BTreeMap<String, usize> {
        name_map(self.contact().chart())
    }
}

/// All generator names (coordinates and differentials) of a chart.
pub fn name_map(chart: &ChartRef) -> BTreeMap<String, usize> {
    (0..chart.len())
        .map(|i| (chart.generator(i).name.clone(), i))
        .collect()
}

fn parse_entry(
    field: &str,
    text: &str,
    chart: &ChartRef,
    names: &BTreeMap<String, usize>,
) -> Result<GradedPoly> {
    expr::parse_poly(text, chart, names)
        .map_err(|e| anyhow!("in field `{field}`: {e}"))
}

fn parse_table_1d(
    field: &str,
    rows: &[String],
    expect: usize,
    chart: &ChartRef,
    names: &BTreeMap<String, usize>,
) -> Result<Vec<GradedPoly>> {
    if rows.len() != expect {
        bail!("field `{field}` must have {expect} entries, found {}", rows.len());
    }
    rows.iter()
        .enumerate()
        .map(|(i, t)| parse_entry(&format!("{field}[{i}]"), t, chart, names))
        .collect()
}

fn parse_table_2d(
    field: &str,
    rows: &[Vec<String>],
    expect_rows: usize,
    expect_cols: usize,
    chart: &ChartRef,
    names: &BTreeMap<String, usize>,
) -> Result<Vec<Vec<GradedPoly>>> {
    if rows.len() != expect_rows {
        bail!("field `{field}` must have {expect_rows} rows, found {}", rows.len());
    }
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != expect_cols {
                bail!(
                    "field `{field}[{i}]` must have {expect_cols} entries, found {}",
                    row.len()
                );
            }
            row.iter()
                .enumerate()
                .map(|(j, t)| parse_entry(&format!("{field}[{i}][{j}]"), t, chart, names))
                .collect()
        })
        .collect()
}

fn constant_of(field: &str, poly: &GradedPoly) -> Result<Rat> {
    for (mono, _) in poly.terms() {
        if mono.iter().any(|&e| e != 0) {
            bail!("field `{field}` must be a constant");
        }
    }
    Ok(poly.constant_term())
}

/// Load and fully validate a model file.
pub fn load(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read `{}`", path.display()))?;
    let file: ModelFile = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse `{}`", path.display()))?;
    match file.kind.as_str() {
        "contact-chart" => load_contact(&file),
        "jacobi" => load_jacobi(&file),
        "courant-jacobi" => load_courant_jacobi(&file),
        other => bail!(
            "unknown kind `{other}` (expected `contact-chart`, `jacobi`, or `courant-jacobi`)"
        ),
    }
}

fn load_contact(file: &ModelFile) -> Result<Model> {
    let coords = file
        .coordinates
        .as_ref()
        .ok_or_else(|| anyhow!("kind `contact-chart` requires `coordinates`"))?;
    if coords.is_empty() {
        bail!("`coordinates` must be nonempty");
    }
    for c in coords {
        if c.degree < 0 {
            bail!("coordinate `{}` has negative degree {}", c.name, c.degree);
        }
    }
    let decls: Vec<(&str, i64)> = coords.iter().map(|c| (c.name.as_str(), c.degree)).collect();
    let chart = Chart::new(&decls, None)?;
    let names = name_map(&chart);
    let alpha_text = file
        .alpha
        .as_ref()
        .ok_or_else(|| anyhow!("kind `contact-chart` requires `alpha`"))?;
    let alpha = parse_entry("alpha", alpha_text, &chart, &names)?;
    if alpha.bidegree().map(|(p, _)| p) != Some(1) {
        bail!("`alpha` must be a homogeneous 1-form");
    }
    let contact = ContactChart::new(&chart, alpha)?;
    let s = match &file.s {
        Some(text) => Some(parse_entry("S", text, &chart, &names)?),
        None => None,
    };
    Ok(Model::Contact { contact, s })
}

fn load_jacobi(file: &ModelFile) -> Result<Model> {
    let d = file
        .base_dim
        .ok_or_else(|| anyhow!("kind `jacobi` requires `base_dim`"))?;
    let chart = base_chart(d)?;
    let names = name_map(&chart);
    let lambda_rows = file
        .lambda
        .as_ref()
        .ok_or_else(|| anyhow!("kind `jacobi` requires `Lambda`"))?;
    let lambda = parse_table_2d("Lambda", lambda_rows, d, d, &chart, &names)?;
    for i in 0..d {
        for j in 0..d {
            if !lambda[i][j].add(&lambda[j][i])?.is_zero() {
                bail!("`Lambda` is not antisymmetric at ({}, {})", i + 1, j + 1);
            }
        }
    }
    let e = match &file.e {
        Some(rows) => parse_table_1d("E", rows, d, &chart, &names)?,
        None => vec![GradedPoly::zero(&chart); d],
    };
    let pair = JacobiPair::new(&chart, lambda, e)?;
    let built = build_jacobi_contact(&pair)?;
    Ok(Model::Jacobi { pair, built })
}

fn load_courant_jacobi(file: &ModelFile) -> Result<Model> {
    let d = file
        .base_dim
        .ok_or_else(|| anyhow!("kind `courant-jacobi` requires `base_dim`"))?;
    let r = file
        .rank
        .ok_or_else(|| anyhow!("kind `courant-jacobi` requires `rank`"))?;
    if r == 0 {
        bail!("`rank` must be positive");
    }
    let chart = base_chart(d)?;
    let names = name_map(&chart);
    let g_rows = file
        .g
        .as_ref()
        .ok_or_else(|| anyhow!("kind `courant-jacobi` requires `g`"))?;
    let g_polys = parse_table_2d("g", g_rows, r, r, &chart, &names)?;
    let mut g = vec![vec![Rat::from_integer(0.into()); r]; r];
    for i in 0..r {
        for j in 0..r {
            g[i][j] = constant_of(&format!("g[{i}][{j}]"), &g_polys[i][j])?;
        }
    }
    let a = match &file.a {
        Some(rows) => parse_table_2d("a", rows, r, d, &chart, &names)?,
        None => vec![vec![GradedPoly::zero(&chart); d]; r],
    };
    let b = match &file.b {
        Some(rows) => parse_table_1d("b", rows, r, &chart, &names)?,
        None => vec![GradedPoly::zero(&chart); r],
    };
    let t = match &file.t {
        Some(cube) => {
            if cube.len() != r {
                bail!("field `T` must have {r} slices, found {}", cube.len());
            }
            cube.iter()
                .enumerate()
                .map(|(i, slice)| parse_table_2d(&format!("T[{i}]"), slice, r, r, &chart, &names))
                .collect::<Result<Vec<_>>>()?
        }
        None => vec![vec![vec![GradedPoly::zero(&chart); r]; r]; r],
    };
    let data = CourantJacobiData::new(&chart, d, r, g, a, b, t)?;
    let built = build_cj_contact(&data)?;
    Ok(Model::CourantJacobi { data, built })
}
