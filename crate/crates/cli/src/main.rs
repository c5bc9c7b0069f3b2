//! Batch front end: load a JSON model file, run a check or computation,
//! print a plain-text report ending in a machine-readable verdict line.
//!
//! Exit codes: 0 when the verdict is pass (residual zero / check true),
//! 1 when the verdict is fail (residuals are printed), 2 on any error
//! (bad file, bad flags, malformed expressions).

use gradedcontact_cli::{expr, model};

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_traits::Zero;

use gradedcontact::action::{emit_action_cj, emit_action_jacobi, ActionVariant};
use gradedcontact::cartan::{d, lie};
use gradedcontact::contact::ContactVerdict;
use gradedcontact::corpus::Rng;
use gradedcontact::lattice::{eval_action, Cochain, DiscreteComplex, FieldConfig};
use gradedcontact::models::MultiVector;
use gradedcontact::poly::{GradedPoly, Rat};
use gradedcontact::symplectization::Symplectization;

use model::Model;

#[derive(Parser)]
#[command(
    name = "gradedcontact",
    version,
    about = "Checks and computations for graded contact structures and their sigma models"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Aksz,
    Bpv,
}

impl From<VariantArg> for ActionVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Aksz => ActionVariant::Aksz,
            VariantArg::Bpv => ActionVariant::Bpv,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify that the model's 1-form is contact (flat map invertible,
    /// Reeb field exists).
    CheckContact { model: PathBuf },
    /// Print the Reeb vector field.
    Reeb { model: PathBuf },
    /// Print the Hamiltonian vector field of a homogeneous function.
    Hamiltonian {
        model: PathBuf,
        /// Function expression over the graded chart.
        #[arg(long)]
        f: String,
    },
    /// Print the bracket of two homogeneous functions.
    Bracket {
        model: PathBuf,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        /// Use the Cartan bracket instead of the Jacobi bracket.
        #[arg(long)]
        cartan: bool,
    },
    /// Compute the self-bracket {S, S} of the model's function S and
    /// report whether it vanishes.
    Master { model: PathBuf },
    /// Build the symplectization and verify its structural identities.
    SymplectizeCheck { model: PathBuf },
    /// Check the bivector/vector compatibility equations of a `jacobi`
    /// model.
    JacobiCheck { model: PathBuf },
    /// Check the four algebroid axioms of a `courant-jacobi` model.
    CjCheck { model: PathBuf },
    /// Print the sigma-model integrand for the model's data.
    EmitAction {
        model: PathBuf,
        #[arg(long, value_enum)]
        variant: VariantArg,
    },
    /// Evaluate both action variants on random discrete fields over a
    /// torus grid and compare them.
    LatticeEval {
        model: PathBuf,
        /// Grid shape: `NxM` for degree-1 models, `NxMxK` for degree-2.
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Outcome of one command: report lines, a verdict, and a residual
/// term count for the final machine-readable line.
struct Report {
    lines: Vec<String>,
    pass: bool,
    residual_terms: usize,
}

impl Report {
    fn info(lines: Vec<String>) -> Self {
        Report {
            lines,
            pass: true,
            residual_terms: 0,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.cmd) {
        Ok(report) => {
            for line in &report.lines {
                println!("{line}");
            }
            let verdict = if report.pass { "pass" } else { "fail" };
            println!("VERDICT: {verdict} RESIDUAL_TERMS: {}", report.residual_terms);
            if report.pass {
                ExitCode::from(0)
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: &Cmd) -> Result<Report> {
    match cmd {
        Cmd::CheckContact { model } => check_contact(&model::load(model)?),
        Cmd::Reeb { model } => reeb(&model::load(model)?),
        Cmd::Hamiltonian { model, f } => hamiltonian(&model::load(model)?, f),
        Cmd::Bracket { model, f, g, cartan } => bracket(&model::load(model)?, f, g, *cartan),
        Cmd::Master { model } => master(&model::load(model)?),
        Cmd::SymplectizeCheck { model } => symplectize_check(&model::load(model)?),
        Cmd::JacobiCheck { model } => jacobi_check(&model::load(model)?),
        Cmd::CjCheck { model } => cj_check(&model::load(model)?),
        Cmd::EmitAction { model, variant } => emit_action(&model::load(model)?, (*variant).into()),
        Cmd::LatticeEval { model, grid, seed } => lattice_eval(&model::load(model)?, grid, *seed),
    }
}

fn check_contact(m: &Model) -> Result<Report> {
    let contact = m.contact();
    let mut lines = vec![format!(
        "contact form of degree {} on a chart with {} coordinates",
        contact.degree(),
        contact.chart().coordinate_indices().len()
    )];
    let verdict = contact.check_contact();
    let pass = matches!(verdict, ContactVerdict::Contact);
    match verdict {
        ContactVerdict::Contact => lines.push("flat map invertible; Reeb field exists".into()),
        ContactVerdict::Degenerate => {
            lines.push("alpha is degenerate: the flat map has a constant kernel".into())
        }
        ContactVerdict::Indeterminate => {
            lines.push("alpha could not be certified contact (flat map not invertible over polynomials)".into())
        }
    }
    Ok(Report {
        lines,
        pass,
        residual_terms: 0,
    })
}

fn reeb(m: &Model) -> Result<Report> {
    let contact = m.contact();
    let r = contact.reeb()?;
    let chart = contact.chart();
    let mut lines = vec![format!("Reeb field (degree {}):", r.degree())];
    for &idx in chart.coordinate_indices() {
        let name = &chart.generator(idx).name;
        lines.push(format!("  R({name}) = {}", r.image(idx)));
    }
    Ok(Report::info(lines))
}

fn hamiltonian(m: &Model, f_text: &str) -> Result<Report> {
    let contact = m.contact();
    let chart = contact.chart();
    let names = m.names();
    let f = expr::parse_poly(f_text, chart, &names).map_err(|e| anyhow!("in --f: {e}"))?;
    let x = contact.hamiltonian_vf(&f)?;
    let mut lines = vec![format!("Hamiltonian field of f = {f} (degree {}):", x.degree())];
    for &idx in chart.coordinate_indices() {
        let name = &chart.generator(idx).name;
        lines.push(format!("  X_f({name}) = {}", x.image(idx)));
    }
    Ok(Report::info(lines))
}

fn bracket(m: &Model, f_text: &str, g_text: &str, cartan: bool) -> Result<Report> {
    let contact = m.contact();
    let chart = contact.chart();
    let names = m.names();
    let f = expr::parse_poly(f_text, chart, &names).map_err(|e| anyhow!("in --f: {e}"))?;
    let g = expr::parse_poly(g_text, chart, &names).map_err(|e| anyhow!("in --g: {e}"))?;
    let (label, value) = if cartan {
        ("Cartan", contact.cartan_bracket(&f, &g)?)
    } else {
        ("Jacobi", contact.jacobi_bracket(&f, &g)?)
    };
    Ok(Report::info(vec![format!(
        "{label} bracket {{{f_text}, {g_text}}} = {value}"
    )]))
}

fn master(m: &Model) -> Result<Report> {
    let contact = m.contact();
    let s = m
        .s()
        .ok_or_else(|| anyhow!("model carries no function `S` for a master check"))?;
    let residual = contact.master_check(s)?;
    let mut lines = vec![format!("S = {s}")];
    if residual.is_zero() {
        lines.push("{S, S} = 0".into());
    } else {
        lines.push(format!("{{S, S}} = {residual}"));
    }
    let pass = residual.is_zero();
    Ok(Report {
        lines,
        pass,
        residual_terms: residual.num_terms(),
    })
}

fn symplectize_check(m: &Model) -> Result<Report> {
    let contact = m.contact();
    let sym = Symplectization::new(contact)?;
    let chart = contact.chart();
    let mut lines = Vec::new();
    let mut residual_terms = 0usize;

    let r_closed = d(sym.omega())?;
    residual_terms += r_closed.num_terms();
    lines.push(format!(
        "d(omega) = {}",
        if r_closed.is_zero() { "0".into() } else { r_closed.to_string() }
    ));

    let r_hom = lie(sym.homogeneity_field(), sym.omega())?.sub(sym.omega())?;
    residual_terms += r_hom.num_terms();
    lines.push(format!(
        "L_Z(omega) - omega = {}",
        if r_hom.is_zero() { "0".into() } else { r_hom.to_string() }
    ));

    // bracket correspondence on all coordinate pairs of the source chart
    let coords: Vec<GradedPoly> = chart
        .coordinate_indices()
        .iter()
        .map(|&i| GradedPoly::generator(chart, i))
        .collect();
    let mut pairs = 0usize;
    let mut bad = 0usize;
    for f in &coords {
        for g in &coords {
            let lhs = sym.lift_function(&contact.jacobi_bracket(f, g)?)?;
            let rhs = sym.poisson_bracket(&sym.lift_function(f)?, &sym.lift_function(g)?)?;
            let res = lhs.sub(&rhs)?;
            if !res.is_zero() {
                bad += 1;
                residual_terms += res.num_terms();
            }
            pairs += 1;
        }
    }
    lines.push(format!(
        "lift({{f, g}}) - {{lift f, lift g}} vanished on {}/{pairs} coordinate pairs",
        pairs - bad
    ));
    Ok(Report {
        lines,
        pass: residual_terms == 0,
        residual_terms,
    })
}

fn render_multivector(mv: &MultiVector) -> Vec<String> {
    let mut out = Vec::new();
    for (dirs, coeff) in mv.terms() {
        let slot: Vec<String> = dirs.iter().map(|i| format!("d{}", i + 1)).collect();
        out.push(format!("  [{}]: {coeff}", slot.join("^")));
    }
    out
}

fn jacobi_check(m: &Model) -> Result<Report> {
    let pair = match m {
        Model::Jacobi { pair, .. } => pair,
        _ => bail!("jacobi-check requires a model of kind `jacobi`"),
    };
    let (r1, r2) = pair.check();
    let count = |mv: &MultiVector| -> usize { mv.terms().map(|(_, c)| c.num_terms()).sum() };
    let residual_terms = count(&r1) + count(&r2);
    let mut lines = Vec::new();
    if r1.is_zero() {
        lines.push("bivector compatibility residual = 0".into());
    } else {
        lines.push("bivector compatibility residual:".into());
        lines.extend(render_multivector(&r1));
    }
    if r2.is_zero() {
        lines.push("vector compatibility residual = 0".into());
    } else {
        lines.push("vector compatibility residual:".into());
        lines.extend(render_multivector(&r2));
    }
    Ok(Report {
        lines,
        pass: residual_terms == 0,
        residual_terms,
    })
}

fn cj_check(m: &Model) -> Result<Report> {
    let data = match m {
        Model::CourantJacobi { data, .. } => data,
        _ => bail!("cj-check requires a model of kind `courant-jacobi`"),
    };
    let report = data.check()?;
    let sum_axiom = |rows: &[(Vec<usize>, Vec<GradedPoly>)]| -> usize {
        rows.iter()
            .map(|(_, r)| r.iter().map(|p| p.num_terms()).sum::<usize>())
            .sum()
    };
    let a1 = sum_axiom(&report.axiom1);
    let a2 = sum_axiom(&report.axiom2);
    let a3 = sum_axiom(&report.axiom3);
    let a4: usize = report.axiom4.iter().map(|(_, p)| p.num_terms()).sum();
    let lines = vec![
        format!("axiom 1 (Jacobi identity): {a1} residual terms"),
        format!("axiom 2 (module rule): {a2} residual terms"),
        format!("axiom 3 (symmetric part): {a3} residual terms"),
        format!("axiom 4 (pairing invariance): {a4} residual terms"),
    ];
    Ok(Report {
        lines,
        pass: report.passes(),
        residual_terms: report.residual_terms(),
    })
}

fn emit_action(m: &Model, variant: ActionVariant) -> Result<Report> {
    let integrand = match m {
        Model::Jacobi { pair, .. } => emit_action_jacobi(pair, variant),
        Model::CourantJacobi { data, .. } => emit_action_cj(data, variant),
        Model::Contact { .. } => {
            bail!("emit-action requires a model of kind `jacobi` or `courant-jacobi`")
        }
    };
    Ok(Report::info(vec![integrand.render()]))
}

fn parse_grid(grid: &str) -> Result<Vec<usize>> {
    let parts: Result<Vec<usize>> = grid
        .split('x')
        .map(|p| {
            p.parse::<usize>()
                .map_err(|_| anyhow!("bad grid component `{p}` in `{grid}`"))
        })
        .collect();
    let parts = parts?;
    if parts.len() != 2 && parts.len() != 3 {
        bail!("grid must be `NxM` or `NxMxK`, got `{grid}`");
    }
    Ok(parts)
}

fn random_cochain(rng: &mut Rng, complex: &DiscreteComplex, k: usize) -> Cochain<Rat> {
    let mut c = Cochain::zero(k);
    for s in complex.simplices(k) {
        c.set(&s, rng.small_rat());
    }
    c
}

fn random_fields(
    rng: &mut Rng,
    complex: &DiscreteComplex,
    d: usize,
    n_eta: usize,
    n_p: usize,
) -> FieldConfig<Rat> {
    let mut fields = FieldConfig::zero(complex, d, n_eta, n_p);
    for row in fields.x.iter_mut() {
        for v in row.iter_mut() {
            *v = rng.small_rat();
        }
    }
    for c in fields.eta.iter_mut() {
        *c = random_cochain(rng, complex, 1);
    }
    for c in fields.p.iter_mut() {
        *c = random_cochain(rng, complex, 2);
    }
    fields.theta = random_cochain(rng, complex, complex.dim - 1);
    fields
}

fn lattice_eval(m: &Model, grid: &str, seed: u64) -> Result<Report> {
    let dims = parse_grid(grid)?;
    let mut rng = Rng::new(seed);
    let (aksz, bpv) = match m {
        Model::Jacobi { pair, .. } => {
            if dims.len() != 2 {
                bail!("a degree-1 model needs a 2-dimensional grid `NxM`");
            }
            let complex = DiscreteComplex::torus_2d(dims[0], dims[1])?;
            let fields = random_fields(&mut rng, &complex, pair.dim(), pair.dim(), 0);
            let aksz = eval_action(
                &complex,
                pair,
                &emit_action_jacobi(pair, ActionVariant::Aksz),
                &fields,
            )?;
            let bpv = eval_action(
                &complex,
                pair,
                &emit_action_jacobi(pair, ActionVariant::Bpv),
                &fields,
            )?;
            (aksz, bpv)
        }
        Model::CourantJacobi { data, .. } => {
            if dims.len() != 3 {
                bail!("a degree-2 model needs a 3-dimensional grid `NxMxK`");
            }
            let complex = DiscreteComplex::torus_3d(dims[0], dims[1], dims[2])?;
            let fields = random_fields(&mut rng, &complex, data.dim(), data.rank(), data.dim());
            let aksz = eval_action(
                &complex,
                data,
                &emit_action_cj(data, ActionVariant::Aksz),
                &fields,
            )?;
            let bpv = eval_action(
                &complex,
                data,
                &emit_action_cj(data, ActionVariant::Bpv),
                &fields,
            )?;
            (aksz, bpv)
        }
        Model::Contact { .. } => {
            bail!("lattice-eval requires a model of kind `jacobi` or `courant-jacobi`")
        }
    };
    let diff = &aksz - &bpv;
    let lines = vec![
        format!("grid {grid}, seed {seed}"),
        format!("AKSZ action = {aksz}"),
        format!("BPV action = {bpv}"),
        format!("difference = {diff}"),
    ];
    let pass = diff.is_zero();
    Ok(Report {
        lines,
        pass,
        residual_terms: usize::from(!pass),
    })
}
