use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use repcone::analysis::{
    analyze, AlexanderSection, AnalysisConfig, AnalysisReport, CharacterSection, Checks,
    ConeSection, HypothesesSection, PresentationSection, EXIT_HYPOTHESIS, EXIT_NUMERICAL, EXIT_OK,
};
use repcone::catalog::{entries, lookup};
use repcone::cone::tangent_basis;
use repcone::foxcoh::alexander_polynomial;
use repcone::linalg::Tolerance;
use repcone::presentation::{parse_presentation, Presentation};
use repcone::repbuild::{check_hypotheses_with, EigenvalueData};

/// Bad input: unknown knot, unreadable file, malformed flags.
const EXIT_INPUT: u8 = 1;

#[derive(Parser)]
#[command(
    name = "repcone",
    version,
    about = "Deformations of reducible SL(n,C) representations of knot groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Alexander polynomial with its cyclotomic factors.
    Alexander(Common),
    /// Check the eigenvalue ratios against the Alexander polynomial.
    Hypotheses(Scenario),
    /// Run the full pipeline and report every check.
    Analyze(Scenario),
    /// Cone components, tangent rank and the oracle cross-check.
    Cone(Scenario),
    /// Slice and character-variety bookkeeping.
    Character(Scenario),
    /// List the built-in knots.
    Catalog(JsonOut),
}

#[derive(Args)]
struct JsonOut {
    /// Write the JSON report to PATH (`-` for stdout).
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct Common {
    /// Built-in knot: trefoil, fig8 or torus:p,q.
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    knot: Option<String>,
    /// Presentation file.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Relative singular-value threshold for rank decisions.
    #[arg(long, default_value_t = 1e-8)]
    tol_rank: f64,
    /// Absolute residual tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol_res: f64,
    #[command(flatten)]
    out: JsonOut,
}

#[derive(Args)]
struct Scenario {
    #[command(flatten)]
    common: Common,
    /// Matrix size.
    #[arg(long)]
    n: Option<usize>,
    /// Eigenvalues, comma separated: cyc:m/k or num:re,im.
    #[arg(long, allow_hyphen_values = true)]
    eig: String,
    /// Jet order (default 2 for `cone`, 4 otherwise).
    #[arg(long)]
    order: Option<usize>,
    /// Curve parameter for the irreducible deformation.
    #[arg(long, default_value_t = 1e-2)]
    t: f64,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

struct Failure(u8, String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(EXIT_INPUT, e.to_string())
    }
}

impl Common {
    fn presentation(&self) -> Result<Presentation, Failure> {
        match (&self.knot, &self.file) {
            (Some(name), _) => Ok(lookup(name)?),
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))?;
                Ok(parse_presentation(&text)?)
            }
            (None, None) => Err(Failure(
                EXIT_INPUT,
                "one of --knot or --file is required".into(),
            )),
        }
    }

    fn tolerance(&self) -> Result<Tolerance, Failure> {
        let ok = |x: f64| x > 0.0 && x < 1.0;
        if !ok(self.tol_rank) || !ok(self.tol_res) {
            return Err(Failure(EXIT_INPUT, "tolerances must lie in (0, 1)".into()));
        }
        Ok(Tolerance::new(self.tol_rank, self.tol_res))
    }
}

impl Scenario {
    fn eigenvalues(&self) -> Result<EigenvalueData, Failure> {
        let lambdas = repcone::laurent::parse_root_list(&self.eig)?;
        let n = self.n.unwrap_or(lambdas.len());
        Ok(EigenvalueData::parse(n, &self.eig)?)
    }

    fn config(&self, default_order: usize) -> Result<AnalysisConfig, Failure> {
        if self.jobs == 0 || self.samples == 0 {
            return Err(Failure(
                EXIT_INPUT,
                "--jobs and --samples must be positive".into(),
            ));
        }
        if !(self.t > 0.0 && self.t < 1.0) {
            return Err(Failure(EXIT_INPUT, "--t must lie in (0, 1)".into()));
        }
        Ok(AnalysisConfig {
            tol: self.common.tolerance()?,
            samples: self.samples,
            seed: self.seed,
            jobs: self.jobs,
            order: self.order.unwrap_or(default_order),
            t: self.t,
        })
    }
}

fn emit(out: &JsonOut, value: &Value) -> Result<(), Failure> {
    let Some(path) = &out.json else { return Ok(()) };
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    if path.as_os_str() == "-" {
        print!("{text}");
    } else {
        std::fs::write(path, text)
            .map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn code_of(checks: &Checks) -> u8 {
    if checks.all_pass() {
        EXIT_OK as u8
    } else {
        EXIT_NUMERICAL as u8
    }
}

fn print_failures(checks: &Checks) {
    for c in checks.items.iter().filter(|c| !c.pass) {
        println!("FAIL {}: {}", c.name, c.detail);
    }
    for e in &checks.errors {
        println!("ERROR {e}");
    }
}

fn cmd_alexander(args: &Common) -> Result<u8, Failure> {
    let p = args.presentation()?;
    let (section, _) = AlexanderSection::new(&p)?;
    println!("{}", section.display);
    emit(
        &args.out,
        &json!({ "presentation": PresentationSection::new(&p), "alexander": section }),
    )?;
    Ok(EXIT_OK as u8)
}

fn cmd_hypotheses(args: &Scenario) -> Result<u8, Failure> {
    let p = args.common.presentation()?;
    let ev = args.eigenvalues()?;
    let delta = alexander_polynomial(&p)?.poly;
    let report = check_hypotheses_with(&delta, &ev);
    let section = HypothesesSection::new(&ev, &report);
    for r in &section.ratios {
        let status = if r.ok { "ok" } else { "FAIL" };
        println!(
            "lambda_{}/lambda_{} = {:<10} {:<16} |Delta| = {:.3e}  {status}",
            r.i + 1,
            r.j + 1,
            r.value,
            r.kind,
            r.delta_abs
        );
    }
    if section.passed {
        println!("hypotheses hold");
    }
    for reason in &section.reasons {
        println!("FAIL {reason}");
    }
    emit(
        &args.common.out,
        &json!({ "presentation": PresentationSection::new(&p), "hypotheses": section }),
    )?;
    Ok(if section.passed {
        EXIT_OK as u8
    } else {
        EXIT_HYPOTHESIS as u8
    })
}

fn print_report(r: &AnalysisReport) {
    println!(
        "knot group: {}",
        r.presentation
            .text
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ")
    );
    println!("Alexander polynomial: {}", r.alexander.display);
    println!(
        "hypotheses: {}",
        if r.hypotheses.passed {
            "hold".to_string()
        } else {
            r.hypotheses.reasons.join("; ")
        }
    );
    if let Some(c) = &r.cohomology {
        let d = &c.diagonal;
        let t = &c.triangular;
        println!(
            "diagonal:   dim Z1 = {}, dim B1 = {}, h0 = {}, h1 = {}, h2 = {}",
            d.dim_z1.measured, d.dim_b1.measured, d.h0.measured, d.h1.measured, d.h2.measured
        );
        println!(
            "triangular: dim Z1 = {}, h0 = {}, h1 = {}, h2 = {}, residual {:.2e}",
            t.dim_z1.measured,
            t.h0.measured,
            t.h1.measured,
            t.h2.measured,
            c.triangular_relator_residual
        );
    }
    if let Some(c) = &r.cone {
        let dims: Vec<String> = c
            .components
            .iter()
            .map(|e| e.dim.measured.to_string())
            .collect();
        println!("cone dims: {}", dims.join(","));
        println!(
            "oracle: {}/{} agree ({} inside, {} generic)",
            c.oracle.agreements, c.oracle.samples, c.oracle.inside, c.oracle.generic
        );
    }
    if let Some(d) = &r.deformation {
        println!(
            "deformation at t = {}: residual {:.2e}, span {}, margin {:.2e}, irreducible = {}",
            d.t, d.refined_residual, d.span.measured, d.margin, d.irreducible
        );
    }
    if let Some(c) = &r.character {
        println!(
            "slice: ({}, {}, {}, {}, {}, {})",
            c.dim_h1_quotient.measured,
            c.dim_tx_abelian.measured,
            c.dim_tx_component.measured,
            c.intersection_dim.measured,
            c.rank_dt.measured,
            c.h0_triangular.measured
        );
    }
    let failed = r.checks.items.iter().filter(|c| !c.pass).count();
    println!(
        "checks: {} of {} passed",
        r.checks.items.len() - failed,
        r.checks.items.len()
    );
}

fn cmd_analyze(args: &Scenario) -> Result<u8, Failure> {
    let p = args.common.presentation()?;
    let ev = args.eigenvalues()?;
    let cfg = args.config(4)?;
    let report = analyze(&p, &ev, &cfg)?;
    print_report(&report);
    let checks = Checks {
        items: report.checks.items.clone(),
        errors: report.checks.errors.clone(),
    };
    print_failures(&checks);
    emit(&args.common.out, &serde_json::to_value(&report)?)?;
    Ok(report.exit_code() as u8)
}

/// Shared front part of `cone` and `character`: fails with exit 2 when the
/// hypotheses do not hold.
fn scenario_start(args: &Scenario) -> Result<(Presentation, EigenvalueData, Value), Failure> {
    let p = args.common.presentation()?;
    let ev = args.eigenvalues()?;
    let delta = alexander_polynomial(&p)?.poly;
    let report = check_hypotheses_with(&delta, &ev);
    if !report.passed() {
        let section = HypothesesSection::new(&ev, &report);
        emit(
            &args.common.out,
            &json!({ "presentation": PresentationSection::new(&p), "hypotheses": section }),
        )?;
        return Err(Failure(
            EXIT_HYPOTHESIS as u8,
            format!("hypotheses fail: {}", report.reasons().join("; ")),
        ));
    }
    let head = json!({
        "presentation": PresentationSection::new(&p),
        "hypotheses": HypothesesSection::new(&ev, &report),
    });
    Ok((p, ev, head))
}

fn cmd_cone(args: &Scenario) -> Result<u8, Failure> {
    let (p, ev, mut doc) = scenario_start(args)?;
    let cfg = args.config(2)?;
    let basis = tangent_basis(&p, &ev, &cfg.tol)?;
    let mut checks = Checks::default();
    let cone = ConeSection::new(&mut checks, &p, &basis, cfg.order, &cfg)?;
    for c in &cone.components {
        println!(
            "iota {:?}: dim {} (n^2-1+|iota| = {})",
            c.iota, c.dim.measured, c.dim.expected
        );
    }
    println!(
        "tangent rank {} (expected {}); oracle {}/{} agree",
        cone.tangent_rank.measured,
        cone.tangent_rank.expected,
        cone.oracle.agreements,
        cone.oracle.samples
    );
    for e in &cone.integration {
        match e.obstructed_at {
            None => println!(
                "iota {:?}: integrates to order {}",
                e.iota.as_deref().unwrap_or_default(),
                e.order
            ),
            Some(k) => println!(
                "iota {:?}: obstructed at order {k}",
                e.iota.as_deref().unwrap_or_default()
            ),
        }
    }
    print_failures(&checks);
    let code = code_of(&checks);
    doc["cone"] = serde_json::to_value(&cone)?;
    doc["checks"] = json!({ "settings": cfg, "items": checks.items, "errors": checks.errors, "exit_code": code });
    emit(&args.common.out, &doc)?;
    Ok(code)
}

fn cmd_character(args: &Scenario) -> Result<u8, Failure> {
    let (p, ev, mut doc) = scenario_start(args)?;
    let cfg = args.config(4)?;
    let basis = tangent_basis(&p, &ev, &cfg.tol)?;
    let mut checks = Checks::default();
    let c = CharacterSection::new(&mut checks, &p, &ev, &basis, &cfg.tol)?;
    for q in [
        ("dim H1 quotient", &c.dim_h1_quotient),
        ("dim T abelian", &c.dim_tx_abelian),
        ("dim T component", &c.dim_tx_component),
        ("intersection", &c.intersection_dim),
        ("rank dt", &c.rank_dt),
        ("h0 triangular", &c.h0_triangular),
    ] {
        println!(
            "{:<16} {} ({} = {})",
            q.0, q.1.measured, q.1.formula, q.1.expected
        );
    }
    print_failures(&checks);
    let code = code_of(&checks);
    doc["character"] = serde_json::to_value(&c)?;
    doc["checks"] = json!({ "settings": cfg, "items": checks.items, "errors": checks.errors, "exit_code": code });
    emit(&args.common.out, &doc)?;
    Ok(code)
}

fn cmd_catalog(out: &JsonOut) -> Result<u8, Failure> {
    let list: Vec<Value> = entries()
        .iter()
        .map(|e| json!({ "name": e.name, "description": e.description }))
        .collect();
    for e in entries() {
        println!("{:<10} {}", e.name, e.description);
    }
    emit(out, &json!({ "catalog": list }))?;
    Ok(EXIT_OK as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Alexander(a) => cmd_alexander(a),
        Command::Hypotheses(s) => cmd_hypotheses(s),
        Command::Analyze(s) => cmd_analyze(s),
        Command::Cone(s) => cmd_cone(s),
        Command::Character(s) => cmd_character(s),
        Command::Catalog(o) => cmd_catalog(o),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
