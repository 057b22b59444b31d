//! `herglotz` command-line front end. Column layouts are documented in `docs/cli.md`.

mod error;
mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use herglotz::epi::{self, Background, HeterogeneityKind, RabiesParams, VaccineStrategy};
use herglotz::herglotz::{check_quadratic_reduction, check_three_species, check_two_species, Jacobian2, Jacobian3, Verdict};
use herglotz::output::fmt_num;
use herglotz::pencil::{self, DiscreteGrid, PencilProblem, ProblemFile, DEFAULT_REALITY_TOL};
use herglotz::presets::{self, load_preset, Preset, PRESET_NAMES};
use herglotz::prufer::{shoot_eigenvalue, DEFAULT_REL_TOL};
use herglotz::wkb;

use error::{CliError, EXIT_NUMERICAL, EXIT_USAGE};
use output::{Sink, Table};

#[derive(Parser)]
#[command(name = "herglotz", version, about = "Spectra of rational Herglotz operator pencils")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SourceArgs {
    /// Built-in problem (see `preset list`).
    #[arg(long, required_unless_present = "problem", conflicts_with = "problem")]
    preset: Option<String>,
    /// Problem file (JSON).
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Preset field, repeatable.
    #[arg(long = "field", value_name = "NAME=EXPR", value_parser = parse_field)]
    fields: Vec<(String, String)>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the sign conditions of a problem, or the Herglotz property of a small reaction system.
    CheckHerglotz(CheckArgs),
    /// Full spectrum by linearization.
    Eigs(EigsArgs),
    /// Recompute the residuals stored in an `eigs --format json` file.
    Verify(VerifyArgs),
    /// One eigenvalue by Prüfer shooting.
    Shoot(ModeArgs),
    /// One eigenvalue by WKB quantization.
    Wkb(WkbArgs),
    /// WKB accumulation constant at a pole.
    WkbAccum(AccumArgs),
    /// Spatial rabies model.
    #[command(subcommand)]
    Rabies(RabiesCommand),
    /// Built-in problems.
    #[command(subcommand)]
    Preset(PresetCommand),
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["preset", "problem", "jacobian2", "jacobian3", "quadratic"])))]
struct CheckArgs {
    /// Built-in problem (see `preset list`).
    #[arg(long)]
    preset: Option<String>,
    /// Problem file (JSON).
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Preset field, repeatable.
    #[arg(long = "field", value_name = "NAME=EXPR", value_parser = parse_field)]
    fields: Vec<(String, String)>,
    /// Two-species Jacobian `fu,fv,gu,gv`.
    #[arg(long, value_name = "LIST", value_parser = parse_floats::<4>, allow_hyphen_values = true)]
    jacobian2: Option<Floats>,
    /// Three-species Jacobian, row-major `fu,fv,fw,gu,gv,gw,hu,hv,hw`.
    #[arg(long, value_name = "LIST", value_parser = parse_floats::<9>, allow_hyphen_values = true)]
    jacobian3: Option<Floats>,
    /// `alpha,beta,gamma,delta` of `λ − (αλ+β)/(λ²+γλ+δ)`.
    #[arg(long, value_name = "LIST", value_parser = parse_floats::<4>, allow_hyphen_values = true)]
    quadratic: Option<Floats>,
    /// Cells of the sign-condition scan.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct EigsArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = 100)]
    nx: usize,
    /// Relative bound on imaginary parts.
    #[arg(long, default_value_t = DEFAULT_REALITY_TOL)]
    reality_tol: f64,
    /// Also write eigenfunctions (long-format CSV) here.
    #[arg(long)]
    eigenfunctions: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// JSON written by `eigs --format json`.
    #[arg(long)]
    input: PathBuf,
    /// Largest accepted difference between stored and recomputed residuals.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ModeArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Interval index (0 below the first pole).
    #[arg(long)]
    j: usize,
    /// Number of interior zeros.
    #[arg(long)]
    k: usize,
    /// Relative bisection tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Integrator tolerance.
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    rel_tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct WkbArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Interval index (0 below the first pole).
    #[arg(long)]
    j: usize,
    /// Mode index; the quantum is `k` plus half the number of Dirichlet ends.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct AccumArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// 1-based pole index.
    #[arg(long)]
    pole: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct RabiesArgs {
    /// rabies-vaccine or rabies-fig3.
    #[arg(long, default_value = "rabies-vaccine")]
    preset: String,
    #[arg(long, default_value_t = 200)]
    nx: usize,
}

#[derive(Subcommand)]
enum RabiesCommand {
    /// Reproduction number, with the sign of the growth rate as a cross-check.
    R0 {
        #[command(flatten)]
        rabies: RabiesArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Principal growth rate, optionally under one vaccination strategy.
    Growth {
        #[command(flatten)]
        rabies: RabiesArgs,
        #[arg(long, requires_all = ["a0", "l"])]
        c0: Option<f64>,
        #[arg(long, requires = "c0")]
        a0: Option<f64>,
        #[arg(long = "L", id = "l", requires = "c0")]
        l: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Growth rate over the (a0, L) strategy grid at one efficacy.
    VaccineSweep {
        #[command(flatten)]
        rabies: RabiesArgs,
        #[arg(long)]
        c0: f64,
        /// Grid step for both a0 and L.
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Smallest efficacy on a grid for which some strategy is stable.
    Threshold {
        #[command(flatten)]
        rabies: RabiesArgs,
        #[arg(long, default_value_t = 0.3)]
        c0_from: f64,
        #[arg(long, default_value_t = 1.0)]
        c0_to: f64,
        #[arg(long, default_value_t = 0.01)]
        c0_step: f64,
        /// Grid step for both a0 and L.
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Reproduction number across one heterogeneity parameter.
    Heterogeneity {
        /// beta_c1, alpha_c2, diffusion_D0 or diffusion_c3.
        #[arg(long)]
        kind: String,
        /// Comma-separated sweep values (default depends on the kind).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        c1: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        c2: f64,
        #[arg(long, default_value_t = 200)]
        nx: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Subcommand)]
enum PresetCommand {
    /// Print the preset names.
    List,
    /// Print a pencil preset as a problem file.
    Show {
        name: String,
        #[arg(long = "field", value_name = "NAME=EXPR", value_parser = parse_field)]
        fields: Vec<(String, String)>,
    },
}

/// Fixed-length comma-separated numbers.
#[derive(Clone, Debug)]
struct Floats(Vec<f64>);

fn parse_floats<const N: usize>(s: &str) -> Result<Floats, String> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if v.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got {}", v.len()));
    }
    Ok(Floats(v))
}

fn parse_field(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(format!("expected NAME=EXPR, got '{s}'")),
    }
}

fn field_map(fields: &[(String, String)]) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (k, v) in fields {
        if map.insert(k.clone(), v.clone()).is_some() {
            return Err(CliError::input(format!("field '{k}' given twice")));
        }
    }
    Ok(map)
}

fn load_problem(preset: Option<&str>, file: Option<&PathBuf>, fields: &[(String, String)]) -> Result<PencilProblem, CliError> {
    match (preset, file) {
        (Some(name), None) => Ok(load_preset(name, &field_map(fields)?)?.problem()?),
        (None, Some(path)) => {
            if !fields.is_empty() {
                return Err(CliError::input("--field applies to presets only"));
            }
            Ok(PencilProblem::from_json_file(path)?)
        }
        _ => Err(CliError { code: EXIT_USAGE, message: "give exactly one of --preset and --problem".into() }),
    }
}

impl SourceArgs {
    fn load(&self) -> Result<PencilProblem, CliError> {
        load_problem(self.preset.as_deref(), self.problem.as_ref(), &self.fields)
    }
}

fn rabies_params(args: &RabiesArgs) -> Result<RabiesParams, CliError> {
    match load_preset(&args.preset, &BTreeMap::new())? {
        Preset::Rabies(rp) => Ok(rp),
        Preset::Pencil { .. } => Err(CliError::input(format!("'{}' is not a rabies preset", args.preset))),
    }
}

/// Pair record of the `eigs` JSON document.
#[derive(Serialize, Deserialize)]
struct PairRecord {
    j: usize,
    k: usize,
    lambda: f64,
    imag_magnitude: f64,
    /// Auxiliary-unknown residual of the linearization.
    residual: f64,
    equation_residual: f64,
    sign_changes: usize,
    near_pole: bool,
    u: Vec<f64>,
    v: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct EigsDocument {
    problem: ProblemFile,
    nx: usize,
    reality_tol: f64,
    pairs: Vec<PairRecord>,
    discarded: Vec<[f64; 2]>,
}

fn emit_table(table: &Table, out: &OutputArgs, json: impl FnOnce() -> serde_json::Value) -> Result<(), CliError> {
    let mut sink = Sink::open(out.out.as_deref())?;
    match out.format {
        Format::Csv => table.write_csv(&mut sink)?,
        Format::Json => sink.write_json(&json())?,
    }
    sink.finish()
}

fn verdict_detail(v: &Verdict) -> String {
    match v {
        Verdict::Herglotz => "herglotz".into(),
        Verdict::NotHerglotz(r) => format!("not herglotz: {r}"),
        Verdict::Indeterminate(r) => format!("indeterminate: {r}"),
    }
}

fn check_herglotz(a: &CheckArgs) -> Result<(), CliError> {
    let mut t = Table::new(&["check", "holds", "detail"]);
    let json;
    if let Some(Floats(v)) = &a.jacobian2 {
        let j = Jacobian2 { fu: v[0], fv: v[1], gu: v[2], gv: v[3] };
        let holds = check_two_species(&j);
        t.row(vec!["two_species".into(), holds.to_string(), format!("fv*gu = {}", fmt_num(j.fv * j.gu))]);
        json = serde_json::json!({ "two_species": holds, "fv_gu": j.fv * j.gu });
    } else if let Some(Floats(v)) = &a.quadratic {
        let r = check_quadratic_reduction(v[0], v[1], v[2], v[3]);
        t.row(vec!["partial_fractions".into(), r.is_herglotz().to_string(), verdict_detail(&r.verdict)]);
        t.row(vec![
            "compact_inequalities".into(),
            r.compact_holds.to_string(),
            format!("beta*gamma - alpha*delta = {}; beta^2 - alpha*(beta*gamma - alpha*delta) = {}", fmt_num(r.compact_first), fmt_num(r.compact_second)),
        ]);
        json = serde_json::to_value(&r)?;
    } else if let Some(Floats(v)) = &a.jacobian3 {
        let arr: [f64; 9] = v.as_slice().try_into().expect("parser enforces nine values");
        let r = check_three_species(&Jacobian3::from_slice(&arr));
        t.row(vec![
            "determinant_conditions".into(),
            r.holds.to_string(),
            format!("first = {}; second = {}", fmt_num(r.first), fmt_num(r.second)),
        ]);
        t.row(vec!["partial_fractions".into(), r.primitive.is_herglotz().to_string(), verdict_detail(&r.primitive.verdict)]);
        json = serde_json::to_value(&r)?;
    } else {
        let p = load_problem(a.preset.as_deref(), a.problem.as_ref(), &a.fields)?;
        let r = pencil::sign_report(&p, a.samples)?;
        t.row(vec!["sign_conditions".into(), r.holds.to_string(), r.failures.join("; ")]);
        json = serde_json::to_value(&r)?;
    }
    emit_table(&t, &a.output, || json)
}

fn eigs(a: &EigsArgs) -> Result<(), CliError> {
    let p = a.source.load()?;
    let grid = DiscreteGrid::new(&p, a.nx)?;
    let s = pencil::solve_spectrum(&p, &grid, a.reality_tol)?;
    if let Some(path) = &a.eigenfunctions {
        let mut t = Table::new(&["j", "k", "x", "u"]);
        let xs = grid.interior_nodes();
        for e in &s.pairs {
            for (x, u) in xs.iter().zip(&e.u) {
                t.row(vec![e.interval.to_string(), e.rank.to_string(), fmt_num(*x), fmt_num(*u)]);
            }
        }
        let mut sink = Sink::open(Some(path))?;
        t.write_csv(&mut sink)?;
        sink.finish()?;
    }
    let mut sink = Sink::open(a.output.out.as_deref())?;
    match a.output.format {
        Format::Csv => {
            let mut t = Table::new(&[
                "j",
                "k",
                "lambda",
                "imag_magnitude",
                "residual",
                "equation_residual",
                "sign_changes",
                "near_pole",
            ]);
            for e in &s.pairs {
                t.row(vec![
                    e.interval.to_string(),
                    e.rank.to_string(),
                    fmt_num(e.lambda),
                    fmt_num(e.imag_magnitude),
                    fmt_num(e.residual),
                    fmt_num(e.equation_residual),
                    e.oscillation_count.to_string(),
                    e.near_pole.to_string(),
                ]);
            }
            t.write_csv(&mut sink)?;
        }
        Format::Json => {
            let doc = EigsDocument {
                problem: p.to_file()?,
                nx: a.nx,
                reality_tol: a.reality_tol,
                pairs: s
                    .pairs
                    .iter()
                    .map(|e| PairRecord {
                        j: e.interval,
                        k: e.rank,
                        lambda: e.lambda,
                        imag_magnitude: e.imag_magnitude,
                        residual: e.residual,
                        equation_residual: e.equation_residual,
                        sign_changes: e.oscillation_count,
                        near_pole: e.near_pole,
                        u: e.u.clone(),
                        v: e.v.clone(),
                    })
                    .collect(),
                discarded: s.discarded.iter().map(|d| [d.re, d.im]).collect(),
            };
            sink.write_json(&doc)?;
        }
    }
    sink.finish()
}

fn verify(a: &VerifyArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.input).map_err(|e| CliError::input(format!("{}: {e}", a.input.display())))?;
    let doc: EigsDocument = serde_json::from_str(&text)?;
    let p = doc.problem.into_problem()?;
    let grid = DiscreteGrid::new(&p, doc.nx)?;
    let mut t = Table::new(&["j", "k", "lambda", "residual_diff", "equation_residual_diff"]);
    let mut worst: f64 = 0.0;
    for e in &doc.pairs {
        let aux = pencil::auxiliary_residual(&p, &grid, e.lambda, &e.u, &e.v)?;
        let eq = pencil::residual(&p, &grid, e.lambda, &e.u)?;
        let (da, de) = ((aux - e.residual).abs(), (eq - e.equation_residual).abs());
        worst = worst.max(da).max(de);
        t.row(vec![e.j.to_string(), e.k.to_string(), fmt_num(e.lambda), fmt_num(da), fmt_num(de)]);
    }
    emit_table(&t, &a.output, || serde_json::json!({ "pairs": doc.pairs.len(), "max_diff": worst, "tol": a.tol }))?;
    if worst > a.tol {
        return Err(CliError {
            code: EXIT_NUMERICAL,
            message: format!("stored residuals not reproduced: max difference {worst:e} > {:e}", a.tol),
        });
    }
    Ok(())
}

fn shoot(a: &ModeArgs) -> Result<(), CliError> {
    let p = a.source.load()?;
    let r = shoot_eigenvalue::<f64>(&p, a.j, a.k, a.tol, a.rel_tol)?;
    let mut t = Table::new(&["j", "k", "lambda", "crossings", "iterations"]);
    t.row(vec![a.j.to_string(), a.k.to_string(), fmt_num(r.lambda), r.crossings.to_string(), r.iterations.to_string()]);
    emit_table(&t, &a.output, || serde_json::json!({ "j": a.j, "k": a.k, "result": r }))
}

fn wkb_mode(a: &WkbArgs) -> Result<(), CliError> {
    let p = a.source.load()?;
    let quantum: f64 = wkb::mode_quantum(&p, a.k);
    let lambda = wkb::wkb_mode_eigenvalue::<f64>(&p, a.j, a.k, a.tol)?;
    let mut t = Table::new(&["j", "k", "quantum", "lambda"]);
    t.row(vec![a.j.to_string(), a.k.to_string(), fmt_num(quantum), fmt_num(lambda)]);
    emit_table(&t, &a.output, || serde_json::json!({ "j": a.j, "k": a.k, "quantum": quantum, "lambda": lambda }))
}

fn wkb_accum(a: &AccumArgs) -> Result<(), CliError> {
    let p = a.source.load()?;
    let c: f64 = wkb::accumulation_constant(&p, a.pole)?;
    let alpha = p.poles[a.pole - 1].alpha;
    let mut t = Table::new(&["pole", "alpha", "constant"]);
    t.row(vec![a.pole.to_string(), fmt_num(alpha), fmt_num(c)]);
    emit_table(&t, &a.output, || serde_json::json!({ "pole": a.pole, "alpha": alpha, "constant": c }))
}

/// `from, from + step, …` up to `to`, built by multiplication so that grid values are exact
/// to rounding.
fn range(from: f64, to: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0) || !(to >= from) {
        return Err(CliError::input(format!("bad range {from}..{to} step {step}")));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| from + i as f64 * step).collect())
}

fn sweep_rows(t: &mut Table, r: &epi::SweepResult) {
    for pt in &r.points {
        t.row(vec![fmt_num(r.c0), fmt_num(pt.a0), fmt_num(pt.l), fmt_num(pt.lambda0), pt.stable().to_string()]);
    }
}

fn rabies(cmd: &RabiesCommand) -> Result<(), CliError> {
    match cmd {
        RabiesCommand::R0 { rabies, output } => {
            let rp = rabies_params(rabies)?;
            let sc = epi::sign_consistency(&rp, rabies.nx)?;
            let mut t = Table::new(&["r0", "lambda0", "consistent"]);
            t.row(vec![fmt_num(sc.r0), fmt_num(sc.lambda0), sc.consistent.to_string()]);
            emit_table(&t, output, || serde_json::json!({ "preset": rabies.preset, "nx": rabies.nx, "result": sc }))
        }
        RabiesCommand::Growth { rabies, c0, a0, l, output } => {
            let rp = rabies_params(rabies)?;
            let lambda0 = match (c0, a0, l) {
                (Some(c0), Some(a0), Some(l)) => {
                    epi::strategy_growth_rate(&rp, &VaccineStrategy::new(*c0, *a0, *l)?, rabies.nx)?
                }
                _ => epi::principal_growth_rate(&rp, rabies.nx)?,
            };
            let stable = lambda0 < 0.0;
            let mut t = Table::new(&["lambda0", "stable"]);
            t.row(vec![fmt_num(lambda0), stable.to_string()]);
            emit_table(&t, output, || {
                serde_json::json!({ "preset": rabies.preset, "nx": rabies.nx, "c0": c0, "a0": a0, "L": l, "lambda0": lambda0, "stable": stable })
            })
        }
        RabiesCommand::VaccineSweep { rabies, c0, step, output } => {
            let rp = rabies_params(rabies)?;
            let r = epi::vaccine_sweep(&rp, *c0, &epi::a0_grid(*step), &epi::l_grid(*step), rabies.nx)?;
            let mut t = Table::new(&["c0", "a0", "L", "lambda0", "stable"]);
            sweep_rows(&mut t, &r);
            emit_table(&t, output, || {
                serde_json::json!({
                    "metadata": { "preset": rabies.preset, "nx": rabies.nx, "step": step },
                    "result": r,
                })
            })
        }
        RabiesCommand::Threshold { rabies, c0_from, c0_to, c0_step, step, output } => {
            let rp = rabies_params(rabies)?;
            let c0s = range(*c0_from, *c0_to, *c0_step)?;
            let found = epi::minimum_stable_c0(&rp, &c0s, &epi::a0_grid(*step), &epi::l_grid(*step), rabies.nx)?;
            let mut t = Table::new(&["c0", "a0", "L", "lambda0", "found"]);
            match &found {
                Some(r) => t.row(vec![
                    fmt_num(r.c0),
                    fmt_num(r.minimizer.a0),
                    fmt_num(r.minimizer.l),
                    fmt_num(r.minimizer.lambda0),
                    "true".into(),
                ]),
                None => t.row(vec![String::new(), String::new(), String::new(), String::new(), "false".into()]),
            }
            emit_table(&t, output, || {
                serde_json::json!({
                    "metadata": { "preset": rabies.preset, "nx": rabies.nx, "step": step, "c0s": c0s },
                    "result": found.as_ref().map(|r| serde_json::json!({ "c0": r.c0, "minimizer": r.minimizer })),
                })
            })
        }
        RabiesCommand::Heterogeneity { kind, values, c1, c2, nx, output } => {
            let kind = HeterogeneityKind::from_name(kind).ok_or_else(|| {
                let names: Vec<_> = HeterogeneityKind::ALL.iter().map(|k| k.name()).collect();
                CliError::input(format!("unknown kind '{kind}' (available: {})", names.join(", ")))
            })?;
            let values = match values {
                Some(v) => v.clone(),
                None => default_heterogeneity_values(kind),
            };
            let tab = epi::heterogeneity_experiment(kind, &values, Background { c1: *c1, c2: *c2 }, *nx)?;
            let mut t = Table::new(&["kind", "value", "r0"]);
            for row in &tab.rows {
                t.row(vec![kind.name().to_string(), fmt_num(row.value), fmt_num(row.r0)]);
            }
            if tab.degenerate_diffusion {
                eprintln!("note: D vanishes on the closed domain; values use interior nodes only");
            }
            emit_table(&t, output, || serde_json::to_value(&tab).expect("table serializes"))
        }
    }
}

fn default_heterogeneity_values(kind: HeterogeneityKind) -> Vec<f64> {
    match kind {
        HeterogeneityKind::BetaC1 | HeterogeneityKind::AlphaC2 => (-9..=9).map(|i| i as f64 / 10.0).collect(),
        HeterogeneityKind::DiffusionD0 => (1..=30).map(|i| i as f64 / 100.0).collect(),
        HeterogeneityKind::DiffusionC3 => (0..=9).map(|i| i as f64 / 10.0).collect(),
    }
}

fn preset(cmd: &PresetCommand) -> Result<(), CliError> {
    match cmd {
        PresetCommand::List => {
            for name in PRESET_NAMES {
                let fields = presets::preset_fields(name);
                if fields.is_empty() {
                    println!("{name}");
                } else {
                    println!("{name} (fields: {})", fields.join(", "));
                }
            }
            Ok(())
        }
        PresetCommand::Show { name, fields } => {
            let p = load_preset(name, &field_map(fields)?)?;
            if let Some(note) = p.note() {
                eprintln!("note: {note}");
            }
            println!("{}", p.problem()?.to_json_string()?);
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::CheckHerglotz(a) => check_herglotz(a),
        Command::Eigs(a) => eigs(a),
        Command::Verify(a) => verify(a),
        Command::Shoot(a) => shoot(a),
        Command::Wkb(a) => wkb_mode(a),
        Command::WkbAccum(a) => wkb_accum(a),
        Command::Rabies(c) => rabies(c),
        Command::Preset(c) => preset(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE as u8),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
