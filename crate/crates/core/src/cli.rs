//! Command-line front end. All state flows through argv; output is a pure
//! function of the arguments and the files they name.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::extpan::{self, CocycleFile, ExtClass, ExtError, FinAbGroup, EXTPAN_BUDGET};
use crate::graph::{TropicalCurve, Violation};
use crate::linalg::IntMatrix;
use crate::pairing::{self, IntSymMatrix, PairingError, PairingMatrix};
use crate::realizations::{self, HodgeTable, MonodromyOperator, RealizationError, TorsionDims};
use crate::selftest::{self, SelftestReport};

#[derive(Parser, Debug)]
#[command(
    name = "monodromy",
    version,
    about = "Monodromy pairings of degenerating Jacobians and variegated extensions"
)]
pub struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a curve file and list every violation.
    Validate { curve: PathBuf },
    /// Monoid-valued pairing on the fundamental-cycle basis.
    Pairing { curve: PathBuf },
    /// Integer pairing at the given generator weights.
    Specialize {
        curve: PathBuf,
        #[command(flatten)]
        weights: Weights,
    },
    /// Picard-Lefschetz operator on the Betti realization.
    Pl {
        curve: PathBuf,
        #[command(flatten)]
        weights: Weights,
        /// Winding number of the loop.
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        winding: i64,
        /// Reduce coefficients modulo this integer (at least 2).
        #[arg(long = "mod", allow_negative_numbers = true)]
        modulus: Option<i64>,
    },
    /// Hodge filtration dimensions on each graded piece.
    Hodge { curve: PathBuf },
    /// Ranks of the graded pieces of the n-torsion.
    Torsion {
        curve: PathBuf,
        #[arg(long = "mod", allow_negative_numbers = true)]
        modulus: i64,
    },
    /// Component group of the Néron model at the given weights.
    Compgroup {
        curve: PathBuf,
        #[command(flatten)]
        weights: Weights,
    },
    /// Torsor report for variegated extensions of E in Ext(Q,R) by F in Ext(R,P).
    Extpan {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long)]
        r: String,
        /// `split`, `nonsplit`, or a cocycle-table file.
        #[arg(long)]
        e: String,
        #[arg(long)]
        f: String,
    },
    /// Seeded property suites over random graphs and small groups.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
}

#[derive(Args, Debug)]
pub struct Weights {
    /// One positive weight per base generator, comma separated.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub weights: Vec<i64>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Flag(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Flag(_) | CliError::Budget(_) => 2,
        }
    }
}

impl From<PairingError> for CliError {
    fn from(e: PairingError) -> Self {
        match e {
            PairingError::WeightCount { .. } | PairingError::NonPositiveWeight { .. } => {
                CliError::Flag(format!("--weights: {e}"))
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<RealizationError> for CliError {
    fn from(e: RealizationError) -> Self {
        match e {
            RealizationError::BadModulus(_) => CliError::Flag(format!("--mod: {e}")),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<ExtError> for CliError {
    fn from(e: ExtError) -> Self {
        match e {
            ExtError::Budget { .. } => CliError::Budget(e.to_string()),
            ExtError::GroupSpec { .. } => CliError::Flag(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

/// A finished command: the rendered report and its exit code.
struct Outcome {
    text: String,
    code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, code: 0 }
    }
}

/// Parses `args` (program name first) and runs the command, writing the
/// report to `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational =
                matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let sink: &mut dyn Write = if informational { out } else { err };
            let _ = write!(sink, "{}", e.render());
            return if informational { 0 } else { 2 };
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            let _ = out.write_all(outcome.text.as_bytes());
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let fmt = cli.format;
    match &cli.command {
        Command::Validate { curve } => {
            let c = read_curve_unchecked(curve)?;
            let violations = c.validate();
            let code = if violations.is_empty() { 0 } else { 1 };
            Ok(Outcome {
                text: render_validation(&violations, fmt),
                code,
            })
        }
        Command::Pairing { curve } => {
            let c = read_curve(curve)?;
            let basis = c.cycle_basis().map_err(input)?;
            let pm = pairing::pairing_matrix(&c, &basis)?;
            Ok(Outcome::ok(match fmt {
                Format::Json => json_line(pm.to_json()),
                Format::Text => text_pairing(&pm),
            }))
        }
        Command::Specialize { curve, weights } => {
            let b = specialized(&read_curve(curve)?, &weights.weights)?;
            Ok(Outcome::ok(match fmt {
                Format::Json => json_line(b.to_json()),
                Format::Text => text_matrix("B", b.matrix()),
            }))
        }
        Command::Pl {
            curve,
            weights,
            winding,
            modulus,
        } => {
            if let Some(n) = modulus {
                if *n < 2 {
                    return Err(CliError::Flag(format!("--mod must be at least 2, got {n}")));
                }
            }
            let c = read_curve(curve)?;
            let b = specialized(&c, &weights.weights)?;
            let a = c.abelian_rank().map_err(input)?;
            let op = realizations::picard_lefschetz(&b, a as i64, *winding, modulus.unwrap_or(0))?;
            Ok(Outcome::ok(match fmt {
                Format::Json => json_line(op.to_json()),
                Format::Text => text_operator(&op),
            }))
        }
        Command::Hodge { curve } => {
            let table = realizations::hodge_table(&read_curve(curve)?)?;
            Ok(Outcome::ok(match fmt {
                Format::Json => to_json(&table),
                Format::Text => text_hodge(&table),
            }))
        }
        Command::Torsion { curve, modulus } => {
            if *modulus < 2 {
                return Err(CliError::Flag(format!(
                    "--mod must be at least 2, got {modulus}"
                )));
            }
            let dims = realizations::torsion_dims(&read_curve(curve)?, *modulus)?;
            Ok(Outcome::ok(match fmt {
                Format::Json => to_json(&dims),
                Format::Text => text_torsion(&dims),
            }))
        }
        Command::Compgroup { curve, weights } => {
            let b = specialized(&read_curve(curve)?, &weights.weights)?;
            let report = ComponentGroupReport {
                invariant_factors: pairing::component_group(&b)?,
            };
            Ok(Outcome::ok(match fmt {
                Format::Json => to_json(&report),
                Format::Text => text_component_group(&report),
            }))
        }
        Command::Extpan { p, q, r, e, f } => {
            let p = parse_group("--p", p)?;
            let q = parse_group("--q", q)?;
            let r = parse_group("--r", r)?;
            let e = choose_class("--e", e, &q, &r)?;
            let f = choose_class("--f", f, &r, &p)?;
            let report = extpan::torsor_report(&e, &f)?;
            Ok(Outcome::ok(match fmt {
                Format::Json => json_line(report.to_json()),
                Format::Text => text_rows(&[
                    ("fiber_size", report.fiber_size.to_string()),
                    ("ext1_order", report.ext1_order.to_string()),
                    ("stabilizer_order", report.stabilizer_order.to_string()),
                    ("transitive", report.transitive.to_string()),
                    ("section_ok", report.section_ok.to_string()),
                ]),
            }))
        }
        Command::Selftest { seed, count } => {
            if *count == 0 {
                return Err(CliError::Flag("--count must be at least 1".into()));
            }
            let report = selftest::selftest(*seed, *count);
            let code = if report.all_passed { 0 } else { 1 };
            Ok(Outcome {
                text: match fmt {
                    Format::Json => to_json(&report),
                    Format::Text => text_selftest(&report),
                },
                code,
            })
        }
    }
}

#[derive(Serialize)]
struct ComponentGroupReport {
    invariant_factors: Vec<u64>,
}

#[derive(Serialize)]
struct ValidationReport<'a> {
    valid: bool,
    violations: &'a [Violation],
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn read_curve_unchecked(path: &Path) -> Result<TropicalCurve, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    TropicalCurve::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_curve(path: &Path) -> Result<TropicalCurve, CliError> {
    let c = read_curve_unchecked(path)?;
    c.ensure_valid()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(c)
}

fn specialized(c: &TropicalCurve, weights: &[i64]) -> Result<IntSymMatrix, CliError> {
    let basis = c.cycle_basis().map_err(input)?;
    let pm = pairing::pairing_matrix(c, &basis)?;
    Ok(pairing::specialize(&pm, weights)?)
}

fn parse_group(flag: &str, spec: &str) -> Result<FinAbGroup, CliError> {
    let g = FinAbGroup::parse(spec).map_err(|e| CliError::Flag(format!("{flag}: {e}")))?;
    if g.order() > EXTPAN_BUDGET {
        return Err(CliError::Budget(format!(
            "{flag}: group {g} has order {}, limit is {EXTPAN_BUDGET}",
            g.order()
        )));
    }
    Ok(g)
}

/// Resolves `split`, `nonsplit` or a cocycle-table path to a class in
/// `Ext¹(q, p)`.
fn choose_class(
    flag: &str,
    spec: &str,
    q: &FinAbGroup,
    p: &FinAbGroup,
) -> Result<ExtClass, CliError> {
    match spec {
        "split" => Ok(ExtClass::split(q.clone(), p.clone())),
        "nonsplit" => {
            let classes = extpan::ext1_classes(q, p)?;
            if classes.len() != 2 {
                return Err(CliError::Flag(format!(
                    "{flag} nonsplit needs Ext¹({q}, {p}) of order 2, it has order {}",
                    classes.len()
                )));
            }
            Ok(classes[1].clone())
        }
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{flag}: cannot read {path}: {e}")))?;
            let file: CocycleFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{flag}: {path}: {e}")))?;
            let class = file
                .into_class()
                .map_err(|e| CliError::Input(format!("{flag}: {path}: {e}")))?;
            if class.q() != q || class.p() != p {
                return Err(CliError::Input(format!(
                    "{flag}: {path} is a class in Ext¹({}, {}), expected Ext¹({q}, {p})",
                    class.q(),
                    class.p()
                )));
            }
            Ok(class)
        }
    }
}

fn json_line(mut s: String) -> String {
    s.push('\n');
    s
}

fn to_json<T: Serialize>(value: &T) -> String {
    json_line(serde_json::to_string_pretty(value).expect("report serializes"))
}

fn render_validation(violations: &[Violation], fmt: Format) -> String {
    match fmt {
        Format::Json => to_json(&ValidationReport {
            valid: violations.is_empty(),
            violations,
        }),
        Format::Text if violations.is_empty() => "valid\n".into(),
        Format::Text => {
            let width = violations.iter().map(|v| v.locus.len()).max().unwrap_or(0);
            let mut s = format!("invalid: {} violation(s)\n", violations.len());
            for v in violations {
                let _ = writeln!(s, "  {:<width$}  {}", v.locus, v.message);
            }
            s
        }
    }
}

/// Right-aligned grid with one space between columns.
fn grid(cells: &[Vec<String>]) -> String {
    let cols = cells.first().map_or(0, Vec::len);
    let widths: Vec<usize> = (0..cols)
        .map(|j| cells.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
        .collect();
    let mut s = String::new();
    for row in cells {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:>w$}"))
            .collect();
        let _ = writeln!(s, "  {}", line.join(" "));
    }
    s
}

fn text_matrix(label: &str, m: &IntMatrix) -> String {
    let cells: Vec<Vec<String>> = m
        .to_rows()
        .into_iter()
        .map(|r| r.into_iter().map(|x| x.to_string()).collect())
        .collect();
    format!("{label} ({}x{}):\n{}", m.nrows(), m.ncols(), grid(&cells))
}

fn text_pairing(pm: &PairingMatrix) -> String {
    let cells: Vec<Vec<String>> = pm
        .entries()
        .iter()
        .map(|r| r.iter().map(|x| x.to_string()).collect())
        .collect();
    format!(
        "pairing (h = {}, base rank {}):\n{}",
        pm.h(),
        pm.base_rank(),
        grid(&cells)
    )
}

fn text_operator(op: &MonodromyOperator) -> String {
    let coeff = if op.modulus == 0 {
        "Z".to_string()
    } else {
        format!("Z/{}", op.modulus)
    };
    let label = format!("N over {coeff} (h = {}, a = {}, w = {})", op.h, op.a, op.w);
    text_matrix(&label, &op.matrix)
}

fn text_rows(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

fn text_hodge(t: &HodgeTable) -> String {
    let mut cells = vec![vec!["".to_string(), "F^0".into(), "F^1".into()]];
    for (name, row) in ["gr_-1", "gr_0", "gr_1"].iter().zip(t.rows()) {
        cells.push(vec![name.to_string(), row[0].to_string(), row[1].to_string()]);
    }
    grid(&cells)
}

fn text_torsion(d: &TorsionDims) -> String {
    text_rows(&[
        ("modulus", d.modulus.to_string()),
        ("toric", d.toric.to_string()),
        ("abelian", d.abelian.to_string()),
        ("lattice", d.lattice.to_string()),
    ])
}

fn text_component_group(r: &ComponentGroupReport) -> String {
    if r.invariant_factors.is_empty() {
        return "trivial\n".into();
    }
    let parts: Vec<String> = r.invariant_factors.iter().map(|d| format!("Z/{d}")).collect();
    format!("{}\n", parts.join(" + "))
}

fn text_selftest(r: &SelftestReport) -> String {
    let width = r.properties.iter().map(|p| p.name.len()).max().unwrap_or(0);
    let mut s = format!("seed {} count {}\n", r.seed, r.count);
    for p in &r.properties {
        let status = if p.passed { "pass" } else { "FAIL" };
        let _ = write!(s, "{status} {:<width$} {:>6} cases", p.name, p.cases);
        if let Some(f) = &p.first_failure {
            let _ = write!(s, "  ({f})");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "{}", if r.all_passed { "all passed" } else { "failures" });
    s
}
