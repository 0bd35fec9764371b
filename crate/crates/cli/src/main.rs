//! harmdens CLI: density expansions, flattening and prescription solves,
//! Weyl-signature classification, and the verification battery.
//!
//! Exit codes: 0 on success, 1 on a domain error (the diagnostic names
//! the violated precondition), 2 when `verify` reports failures.

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use harmdens::asymptotics::{eval_h, extract_h, HSequence};
use harmdens::deformation::{
    flatten_series, prescribe, solve_numeric, transform_density, DeformationProblem, DensitySpec,
    GridRow, NumericTolerances,
};
use harmdens::models::{
    make_space, make_space_by_dim, theta_tilde_series, trace_table, Family, ModelSpace,
};
use harmdens::rational::{rat_from_str, rat_to_string};
use harmdens::verify;
use harmdens::weyl::{odd_product_spectrum, weyl_spectrum};

#[derive(Parser)]
#[command(
    name = "harmdens",
    version,
    about = "Volume densities of central harmonic model spaces: exact expansions, conformal deformation solvers, Weyl classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Density coefficients of a model space via both the trace formulas
    /// and the series expansion, with an agreement flag.
    Expand(ExpandArgs),
    /// Solve for the deformation that flattens a model space's density
    /// (series germ, optionally a numeric grid).
    Flatten(FlattenArgs),
    /// Solve for the deformation realizing a prescribed coefficient
    /// sequence, with the round trip verified in the output.
    Prescribe(PrescribeArgs),
    /// Weyl-Jacobi signatures of the catalog at a given dimension.
    Classify(ClassifyArgs),
    /// Run the verification battery; exit 0 only if everything passes.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SpaceSel {
    /// Density family.
    #[arg(long, value_parser = ["sphere", "cp", "hp", "op2", "hsphere", "chp", "hhp", "hop2", "flat"])]
    space: String,
    /// Family parameter k (projective families).
    #[arg(long, conflicts_with = "m")]
    k: Option<u32>,
    /// Total dimension m.
    #[arg(long)]
    m: Option<u32>,
}

impl SpaceSel {
    fn resolve(&self) -> harmdens::Result<ModelSpace> {
        let family = Family::from_token(&self.space)?;
        match (self.k, self.m) {
            (Some(k), None) => match family {
                Family::Cp | Family::Chp | Family::Hp | Family::Hhp => {
                    make_space(family, Some(k))
                }
                _ => Err(harmdens::Error::UndefinedSpace(format!(
                    "--k applies to the projective families; use --m for {}",
                    family.token()
                ))),
            },
            (None, Some(m)) => make_space_by_dim(family, m),
            (None, None) => make_space(family, None),
            (Some(_), Some(_)) => Err(harmdens::Error::Domain(
                "--k and --m are mutually exclusive".into(),
            )),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Args)]
struct OutputOpts {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the artifact to a file instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct ExpandArgs {
    #[command(flatten)]
    space: SpaceSel,
    /// Series truncation order.
    #[arg(long, default_value_t = 8)]
    order: usize,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct FlattenArgs {
    #[command(flatten)]
    space: SpaceSel,
    /// Series truncation order of the exact germ.
    #[arg(long, default_value_t = 10)]
    order: usize,
    /// Numeric grid `start:stop:step` (adds grid rows to the output).
    #[arg(long)]
    grid: Option<String>,
    /// Newton tolerance on the implicit equation (advanced).
    #[arg(long, default_value_t = NumericTolerances::default().newton_tol)]
    tol_newton: f64,
    /// Quadrature absolute tolerance (advanced).
    #[arg(long, default_value_t = NumericTolerances::default().quad_tol)]
    tol_quad: f64,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct PrescribeArgs {
    #[command(flatten)]
    space: SpaceSel,
    /// Target coefficients as comma-separated rationals, e.g.
    /// `1,0,-1/2,0,13/120`. Must start with 1; odd entries must be 0.
    #[arg(long)]
    coeffs: String,
    /// Series truncation order (defaults to the target length, at least 8).
    #[arg(long)]
    order: Option<usize>,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Dimension of the classified spaces (even; odd with --odd).
    #[arg(long, required_unless_present = "space")]
    m: Option<u32>,
    /// Classify the product of the (m-1)-dimensional members with a line.
    #[arg(long, default_value_t = false)]
    odd: bool,
    /// Restrict to a single family.
    #[arg(long, value_parser = ["sphere", "cp", "hp", "op2", "hsphere", "chp", "hhp", "hop2", "flat"])]
    space: Option<String>,
    /// Family parameter k when --space selects a projective family.
    #[arg(long)]
    k: Option<u32>,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct VerifyArgs {
    /// Worker threads (defaults to HARMDENS_THREADS or the CPU count).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Expand(args) => run_expand(args),
        Command::Flatten(args) => run_flatten(args),
        Command::Prescribe(args) => run_prescribe(args),
        Command::Classify(args) => run_classify(args),
        Command::Verify(args) => run_verify(args),
    };
    std::process::exit(code);
}

fn fail(err: impl std::fmt::Display) -> i32 {
    eprintln!("error: {err}");
    1
}

fn emit(output: &OutputOpts, text: &str) -> i32 {
    match &output.out {
        None => {
            println!("{text}");
            0
        }
        Some(path) => match std::fs::File::create(path).and_then(|mut f| {
            f.write_all(text.as_bytes())?;
            f.write_all(b"\n")
        }) {
            Ok(()) => 0,
            Err(e) => fail(format!("cannot write {}: {e}", path.display())),
        },
    }
}

fn run_expand(args: ExpandArgs) -> i32 {
    let space = match args.space.resolve() {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let series = theta_tilde_series(&space, args.order);
    let table = trace_table(&space);
    let extracted = match extract_h(&series) {
        Ok(h) => h,
        Err(e) => return fail(e),
    };

    let mut doc = serde_json::Map::new();
    doc.insert("space".into(), json!(space.name()));
    doc.insert("m".into(), json!(space.dim()));
    doc.insert("order".into(), json!(args.order));
    let mut agreement = true;
    for nu in 2..=8u32 {
        let value = match eval_h(&table, nu) {
            Ok(v) => v,
            Err(e) => return fail(e),
        };
        if nu as usize <= args.order && value != extracted.get(nu as usize) {
            agreement = false;
        }
        doc.insert(format!("H{nu}"), json!(rat_to_string(&value)));
    }
    doc.insert("agreement".into(), json!(agreement));
    doc.insert("series".into(), serde_json::to_value(&series).unwrap());

    match args.output.format {
        Format::Json => emit(&args.output, &serde_json::to_string_pretty(&doc).unwrap()),
        Format::Table => {
            let mut text = format!("space: {} (m = {})\n", space.name(), space.dim());
            for nu in 2..=8u32 {
                text += &format!("  H{nu} = {}\n", doc[&format!("H{nu}")].as_str().unwrap());
            }
            text += &format!("  agreement with series: {agreement}\n  series: {series}");
            emit(&args.output, &text)
        }
        Format::Csv => fail("expand has no csv form; use json or table"),
    }
}

fn parse_grid(spec: &str) -> harmdens::Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(harmdens::Error::Domain(format!(
            "grid must be start:stop:step, got '{spec}'"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| harmdens::Error::Domain(format!("bad grid number '{p}'")))
        })
        .collect::<harmdens::Result<_>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || !(start > 0.0) || stop < start {
        return Err(harmdens::Error::Domain(
            "grid needs start > 0, stop >= start, step > 0".into(),
        ));
    }
    let mut grid = Vec::new();
    let mut i = 0u64;
    loop {
        let r = start + step * i as f64;
        if r > stop + 1e-12 {
            break;
        }
        grid.push(r);
        i += 1;
    }
    Ok(grid)
}

fn grid_rows_json(rows: &[GridRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|row| {
                json!({
                    "r": row.r,
                    "beta": row.beta,
                    "eta": row.eta,
                    "psi": row.psi,
                    "residual": row.residual,
                })
            })
            .collect(),
    )
}

fn grid_rows_csv(rows: &[GridRow]) -> String {
    let mut text = String::from("r,beta,eta,psi,residual");
    for row in rows {
        text += &format!(
            "\n{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            row.r, row.beta, row.eta, row.psi, row.residual
        );
    }
    text
}

fn run_flatten(args: FlattenArgs) -> i32 {
    let space = match args.space.resolve() {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let m = space.dim();
    let solution = match flatten_series(&DensitySpec::for_space(&space, args.order), m, args.order)
    {
        Ok(s) => s,
        Err(e) => return fail(e),
    };

    let rows = if let Some(spec) = &args.grid {
        let grid = match parse_grid(spec) {
            Ok(g) => g,
            Err(e) => return fail(e),
        };
        // The numeric path reads the density germ near 0; give it a
        // comfortable order regardless of the display order.
        let germ_order = args.order.max(16);
        let problem = match DeformationProblem::new(
            DensitySpec::constant_one(germ_order),
            DensitySpec::for_space(&space, germ_order),
            m,
        ) {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        let tol = NumericTolerances {
            quad_tol: args.tol_quad,
            newton_tol: args.tol_newton,
            ..NumericTolerances::default()
        };
        match solve_numeric(&problem, &grid, &tol) {
            Ok(rows) => Some(rows),
            Err(e) => return fail(e),
        }
    } else {
        None
    };

    match args.output.format {
        Format::Json => {
            let mut doc = serde_json::Map::new();
            doc.insert("space".into(), json!(space.name()));
            doc.insert("m".into(), json!(m));
            doc.insert("order".into(), json!(args.order));
            doc.insert("psi".into(), serde_json::to_value(&solution.psi).unwrap());
            doc.insert("eta".into(), serde_json::to_value(&solution.eta).unwrap());
            doc.insert("beta".into(), serde_json::to_value(&solution.beta).unwrap());
            if let Some(rows) = &rows {
                doc.insert("grid".into(), grid_rows_json(rows));
            }
            emit(&args.output, &serde_json::to_string_pretty(&doc).unwrap())
        }
        Format::Csv => match &rows {
            Some(rows) => emit(&args.output, &grid_rows_csv(rows)),
            None => fail("csv output needs --grid"),
        },
        Format::Table => {
            let mut text = format!(
                "space: {} (m = {})\n  psi = {}\n  eta = {}",
                space.name(),
                m,
                solution.psi,
                solution.eta
            );
            if let Some(rows) = &rows {
                text += "\n  grid (r, beta, eta, psi, residual):";
                for row in rows {
                    text += &format!(
                        "\n    {:>7.4} {:>18.12} {:>18.12} {:>18.12} {:>9.2e}",
                        row.r, row.beta, row.eta, row.psi, row.residual
                    );
                }
            }
            emit(&args.output, &text)
        }
    }
}

fn run_prescribe(args: PrescribeArgs) -> i32 {
    let space = match args.space.resolve() {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let coeffs: Vec<_> = match args
        .coeffs
        .split(',')
        .map(rat_from_str)
        .collect::<harmdens::Result<Vec<_>>>()
    {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let target = match HSequence::new(coeffs) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let order = args.order.unwrap_or_else(|| (target.len() - 1).max(8));
    let solution = match prescribe(&space, &target, order) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };

    // Round trip embedded in the output: transform the source density by
    // the solved eta and read the coefficients back.
    let round_trip = transform_density(&theta_tilde_series(&space, order), &solution.eta, space.dim())
        .and_then(|out| extract_h(&out))
        .map(|back| (0..=order).all(|nu| back.get(nu) == target.get(nu)))
        .unwrap_or(false);

    match args.output.format {
        Format::Json => {
            let mut doc = serde_json::Map::new();
            doc.insert("space".into(), json!(space.name()));
            doc.insert("m".into(), json!(space.dim()));
            doc.insert("order".into(), json!(order));
            doc.insert(
                "target".into(),
                Value::Array(
                    target
                        .coeffs()
                        .iter()
                        .map(|c| json!(rat_to_string(c)))
                        .collect(),
                ),
            );
            doc.insert("psi".into(), serde_json::to_value(&solution.psi).unwrap());
            doc.insert("eta".into(), serde_json::to_value(&solution.eta).unwrap());
            doc.insert("round_trip".into(), json!(round_trip));
            emit(&args.output, &serde_json::to_string_pretty(&doc).unwrap())
        }
        Format::Table => {
            let text = format!(
                "space: {} (m = {})\n  psi = {}\n  eta = {}\n  round trip verified: {round_trip}",
                space.name(),
                space.dim(),
                solution.psi,
                solution.eta
            );
            emit(&args.output, &text)
        }
        Format::Csv => fail("prescribe has no csv form; use json or table"),
    }
}

fn classify_targets(args: &ClassifyArgs) -> harmdens::Result<Vec<ModelSpace>> {
    // --m is always the classified dimension; with --odd the members are
    // products, so the catalog factor lives one dimension down.
    let factor_dim = match args.m {
        Some(m) if args.odd => {
            if m % 2 == 0 || m < 5 {
                return Err(harmdens::Error::Domain(format!(
                    "--odd classifies odd dimensions at least 5, got {m}"
                )));
            }
            Some(m - 1)
        }
        Some(m) => {
            if args.space.is_none() && (m % 2 != 0 || m < 4) {
                return Err(harmdens::Error::Domain(format!(
                    "classification covers even dimensions at least 4 (use --odd for odd), got {m}"
                )));
            }
            Some(m)
        }
        None => None,
    };
    if let Some(tok) = &args.space {
        let sel = SpaceSel { space: tok.clone(), k: args.k, m: factor_dim };
        return Ok(vec![sel.resolve()?]);
    }
    let factor_dim = factor_dim.expect("clap requires --m without --space");
    let mut spaces: Vec<ModelSpace> = Vec::new();
    for family in [Family::Cp, Family::Hp, Family::Op2, Family::Chp, Family::Hhp, Family::Hop2] {
        if let Ok(space) = make_space_by_dim(family, factor_dim) {
            spaces.push(space);
        }
    }
    spaces.push(make_space(Family::Flat, Some(factor_dim))?);
    spaces.sort_by_key(|s| s.family().catalog_index());
    Ok(spaces)
}

fn run_classify(args: ClassifyArgs) -> i32 {
    let spaces = match classify_targets(&args) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let mut entries = Vec::new();
    for space in &spaces {
        let (signature, m, label) = if args.odd {
            match odd_product_spectrum(space) {
                Ok(sig) => (sig, space.dim() + 1, format!("{} x line", space.name())),
                Err(e) => return fail(e),
            }
        } else {
            match weyl_spectrum(space) {
                Ok(sig) => (sig, space.dim(), space.name()),
                Err(e) => return fail(e),
            }
        };
        entries.push(signature.to_json_entry(&label, m));
    }

    match args.output.format {
        Format::Json => emit(
            &args.output,
            &serde_json::to_string_pretty(&serde_json::to_value(&entries).unwrap()).unwrap(),
        ),
        Format::Table => {
            let mut text = String::new();
            for e in &entries {
                let spec: Vec<String> = e
                    .spectrum
                    .iter()
                    .map(|(ev, mult)| format!("{ev} (x{mult})"))
                    .collect();
                text += &format!(
                    "{:<16} m={:<3} counts (neg,zero,pos) = {:?}  spectrum: {}\n",
                    e.space,
                    e.m,
                    e.counts,
                    spec.join(", ")
                );
            }
            emit(&args.output, text.trim_end())
        }
        Format::Csv => fail("classify has no csv form; use json or table"),
    }
}

fn run_verify(args: VerifyArgs) -> i32 {
    // HARMDENS_THREADS caps the worker count, also over an explicit
    // --threads.
    let env_cap = std::env::var("HARMDENS_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok());
    let mut threads = args.threads.unwrap_or_else(verify::default_threads);
    if let Some(cap) = env_cap {
        threads = threads.min(cap);
    }
    let results = verify::run_all(threads.max(1));
    let mut failures = Vec::new();
    for r in &results {
        if r.passed {
            println!("PASS {} — {} ({:.2}s)", r.name, r.detail, r.seconds);
        } else {
            println!("FAIL {} — {} ({:.2}s)", r.name, r.detail, r.seconds);
            failures.push(r.name);
        }
    }
    if failures.is_empty() {
        println!("all {} checks passed", results.len());
        0
    } else {
        eprintln!("failed checks: {}", failures.join(", "));
        2
    }
}
