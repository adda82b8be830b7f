mod output;

use std::io::{self, Write};
use std::process::ExitCode;

use bdspectral::classify::{atom_at_zero_weight, classify, invariant_distribution};
use bdspectral::km::{closed_form_transition, current_row, transition_row, CurrentMethod, QuadratureConfig};
use bdspectral::model::{build_model, FamilyKind, Side};
use bdspectral::oracle::{oracle_row, OracleConfig};
use bdspectral::spectral::{spectral_matrix, spectral_measure_halfline, AcPiece, Weight};
use bdspectral::{CatalogModel, Domain, Error, Mat2};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use output::{num_value, write_json, Cell, Format, Table};

const FIGURES: &str = "\
Figure data (columns n,t,omega):
  Fig. 1(a)  bdspectral current --family mm1-absorbing --lambda 1 --mu 1 --j 0 --n-range 0 20 --t 3,6,9
  Fig. 1(b)  bdspectral current --family mm1-absorbing --lambda 1 --mu 2 --j 0 --n-range 0 20 --t 3,6,9
  Fig. 1(c)  bdspectral current --family mm1-absorbing --lambda 2 --mu 1 --j 0 --n-range 0 20 --t 3,6,9
  Fig. 1(d)  bdspectral current --family mm1-absorbing --lambda 2 --mu 2 --j 0 --n-range 0 20 --t 3,6,9
  Fig. 2(a)  bdspectral current --family symmetric-bilateral --lambda 1 --mu 2 --j 0 --n-range -10 10 --t 3,6,9
  Fig. 2(b)  bdspectral current --family symmetric-bilateral --lambda 2 --mu 1 --j 0 --n-range -10 10 --t 3,6,9
  Fig. 3(a)  bdspectral current --family alternating-case1 --lambda 1 --mu 2 --j 0 --n-range -10 10 --t 3,6,9
  Fig. 3(b)  bdspectral current --family alternating-case1 --lambda 2 --mu 1 --j 0 --n-range -10 10 --t 3,6,9
  Fig. 4(a)  bdspectral current --family defect-case1 --lambda 1 --mu 2 --lambda0 1 --mu0 5 --j 0 --n-range -10 10 --t 3,6,9
  Fig. 4(b)  bdspectral current --family defect-case1 --lambda 1 --mu 2 --lambda0 5 --mu0 1 --j 0 --n-range -10 10 --t 3,6,9
  Fig. 4(c)  bdspectral current --family defect-case1 --lambda 2 --mu 1 --lambda0 1 --mu0 5 --j 0 --n-range -10 10 --t 3,6,9
  Fig. 4(d)  bdspectral current --family defect-case1 --lambda 2 --mu 1 --lambda0 5 --mu0 1 --j 0 --n-range -10 10 --t 3,6,9
  Fig. 6(a)  bdspectral current --family defect-case2 --lambda 1 --mu 2 --lambda0 1 --mu0 5 --j 0 --n-range -10 10 --t 3,6,9
  Fig. 6(b)  bdspectral current --family defect-case2 --lambda 2 --mu 1 --lambda0 5 --mu0 1 --j 0 --n-range -10 10 --t 3,6,9
  Fig. 7(a)  bdspectral current --family split-queues --lambda 1 --mu 2 --alpha 3 --beta 4 --j 0 --n-range -10 10 --t 3,6,9
  Fig. 7(b)  bdspectral current --family split-queues --lambda 1/2 --mu 1/3 --alpha 13/5 --beta 1/10 --j 0 --n-range -10 10 --t 3,6,9
  Fig. 7(c)  bdspectral current --family split-queues --lambda 1 --mu 5/2 --alpha 1 --beta 2 --j 0 --n-range -10 10 --t 3,6,9
  Fig. 7(d)  bdspectral current --family split-queues --lambda 1 --mu 1 --alpha 2 --beta 2 --j 0 --n-range -10 10 --t 3,6,9

Exit codes: 0 ok, 2 usage or invalid parameters, 3 numerical non-convergence, 4 verification failure.
Set KM_SPECTRAL_NODES to change the default number of quadrature nodes per piece.";

#[derive(Parser)]
#[command(name = "bdspectral", version, about = "Spectral tools for birth-death processes on Z and on n >= 0")]
#[command(after_help = FIGURES)]
struct Cli {
    /// Output format; `spectral` always writes JSON.
    #[arg(long, value_enum, default_value = "csv", global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the model families, their parameters and default parameter sets.
    Catalog {
        #[arg(long)]
        family: Option<FamilyKind>,
    },
    /// Transition probabilities P_ij(t).
    Transition(TransitionArgs),
    /// Probability current from n-1 to n starting at j.
    Current(CurrentArgs),
    /// Spectral measure or matrix as a JSON document.
    Spectral {
        #[command(flatten)]
        model: ModelArgs,
        /// Density samples per absolutely continuous piece.
        #[arg(long, default_value_t = 33)]
        grid: usize,
    },
    /// Transient, null-recurrent or positive-recurrent.
    Classify {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Normalised invariant distribution over a window.
    Invariant {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, default_values_t = [-5, 5])]
        window: Vec<i64>,
    },
    /// Mass identities, coupling relations and oracle agreement.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long)]
    family: FamilyKind,
    #[arg(long, value_parser = parse_rational, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long, value_parser = parse_rational, allow_negative_numbers = true)]
    mu: Option<f64>,
    #[arg(long, value_parser = parse_rational, allow_negative_numbers = true)]
    lambda0: Option<f64>,
    #[arg(long, value_parser = parse_rational, allow_negative_numbers = true)]
    mu0: Option<f64>,
    #[arg(long, value_parser = parse_rational, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, value_parser = parse_rational, allow_negative_numbers = true)]
    beta: Option<f64>,
}

#[derive(Args, Clone, Copy)]
struct QuadArgs {
    /// Gauss-Legendre nodes per piece (default 512 or KM_SPECTRAL_NODES).
    #[arg(long)]
    nodes: Option<usize>,
    /// Evaluate quadrature nodes on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TransitionSource {
    Quadrature,
    ClosedForm,
    Oracle,
}

#[derive(Args)]
struct TransitionArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    i: i64,
    #[arg(long, allow_negative_numbers = true, conflicts_with = "row", required_unless_present = "row")]
    j: Option<i64>,
    /// Every j in LO..=HI.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    row: Option<Vec<i64>>,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true, value_parser = parse_rational)]
    t: Vec<f64>,
    #[arg(long, value_enum, default_value = "quadrature")]
    method: TransitionSource,
    /// Append the uniformization value and the absolute difference.
    #[arg(long)]
    check_oracle: bool,
    #[arg(long, default_value_t = 1e-10)]
    oracle_tol: f64,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CurrentSource {
    Direct,
    Dual,
}

#[derive(Args)]
struct CurrentArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0)]
    j: i64,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, required = true)]
    n_range: Vec<i64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true, value_parser = parse_rational)]
    t: Vec<f64>,
    #[arg(long, value_enum, default_value = "dual")]
    method: CurrentSource,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    model: Option<ModelArgs>,
    /// Every family at every default parameter set.
    #[arg(long, conflicts_with = "family")]
    all: bool,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[command(flatten)]
    quad: QuadArgs,
}

fn parse_rational(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| format!("`{s}` is not a number or ratio"))?;
            let d: f64 = d.trim().parse().map_err(|_| format!("`{s}` is not a number or ratio"))?;
            if d == 0.0 {
                return Err(format!("`{s}` divides by zero"));
            }
            n / d
        }
        None => s.parse().map_err(|_| format!("`{s}` is not a number or ratio"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

enum Failure {
    Usage(String),
    Numerical(String),
    Verification,
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergedQuadrature { .. } | Error::WindowTooLarge { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = Result<(), Failure>;

impl ModelArgs {
    fn build(&self) -> Result<CatalogModel, Failure> {
        let given = [
            ("lambda", self.lambda),
            ("mu", self.mu),
            ("lambda0", self.lambda0),
            ("mu0", self.mu0),
            ("alpha", self.alpha),
            ("beta", self.beta),
        ];
        let names = self.family.param_names();
        for (name, v) in given {
            if v.is_some() && !names.contains(&name) {
                return Err(Failure::Usage(format!("--{name} does not apply to {}", self.family)));
            }
        }
        let params = names
            .iter()
            .map(|n| {
                given
                    .iter()
                    .find(|(g, _)| g == n)
                    .and_then(|(_, v)| *v)
                    .ok_or_else(|| Failure::Usage(format!("{} needs --{n}", self.family)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(build_model(self.family, &params)?)
    }
}

impl QuadArgs {
    fn config(&self) -> Result<QuadratureConfig, Failure> {
        let cfg = match self.nodes {
            Some(n) => QuadratureConfig::new(n)?,
            None => QuadratureConfig::from_env()?,
        };
        Ok(if self.sequential { cfg.sequential() } else { cfg })
    }
}

fn range_pair(v: &[i64], flag: &str) -> Result<(i64, i64), Failure> {
    match v {
        [lo, hi] if lo <= hi => Ok((*lo, *hi)),
        _ => Err(Failure::Usage(format!("--{flag} needs LO <= HI"))),
    }
}

fn params_text(model: &CatalogModel) -> String {
    model
        .kind()
        .param_names()
        .iter()
        .zip(model.params())
        .map(|(n, v)| format!("{n}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_catalog(family: Option<FamilyKind>, format: Format, out: &mut dyn Write) -> Outcome {
    let mut t = Table::new(&["family", "domain", "parameters", "figure", "default_sets", "description"]);
    for kind in FamilyKind::ALL.into_iter().filter(|k| family.is_none_or(|f| f == *k)) {
        let sets: Vec<String> = kind
            .figure_params()
            .iter()
            .map(|p| p.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        let domain = match kind.domain() {
            Domain::HalfLine => "half-line",
            Domain::Bilateral => "bilateral",
        };
        t.push(vec![
            kind.name().into(),
            domain.into(),
            kind.param_names().join(",").into(),
            kind.figure().map_or(Cell::Empty, |f| Cell::Int(f as i64)),
            sets.join(";").into(),
            kind.description().into(),
        ]);
    }
    t.write(format, out)?;
    Ok(())
}

fn cmd_transition(a: &TransitionArgs, format: Format, out: &mut dyn Write) -> Outcome {
    let model = a.model.build()?;
    let cfg = a.quad.config()?;
    let (lo, hi) = match (&a.row, a.j) {
        (Some(r), _) => range_pair(r, "row")?,
        (None, Some(j)) => (j, j),
        (None, None) => return Err(Failure::Usage("give --j or --row".into())),
    };
    let mut headers = vec!["i", "j", "t", "p", "err", "method"];
    if a.check_oracle {
        headers.extend(["oracle", "delta"]);
    }
    let mut table = Table::new(&headers);
    let oc = OracleConfig { tol: a.oracle_tol, ..OracleConfig::default() };
    for &t in &a.t {
        let row = match a.method {
            TransitionSource::Quadrature => transition_row(&model, a.i, t, lo, hi, &cfg)?,
            TransitionSource::ClosedForm => {
                (lo..=hi).map(|j| closed_form_transition(&model, a.i, j, t)).collect::<Result<Vec<_>, _>>()?
            }
            TransitionSource::Oracle => oracle_row(&model, a.i, t, lo, hi, &oc)?,
        };
        let reference = if a.check_oracle { Some(oracle_row(&model, a.i, t, lo, hi, &oc)?) } else { None };
        for (k, r) in row.iter().enumerate() {
            let mut cells = vec![
                Cell::Int(a.i),
                Cell::Int(lo + k as i64),
                Cell::Num(t),
                Cell::Num(r.value),
                Cell::Num(r.err_estimate),
                r.method.name().into(),
            ];
            if let Some(o) = &reference {
                cells.push(Cell::Num(o[k].value));
                cells.push(Cell::Num((r.value - o[k].value).abs()));
            }
            table.push(cells);
        }
    }
    table.write(format, out)?;
    Ok(())
}

fn cmd_current(a: &CurrentArgs, format: Format, out: &mut dyn Write) -> Outcome {
    let model = a.model.build()?;
    let cfg = a.quad.config()?;
    let (lo, hi) = range_pair(&a.n_range, "n-range")?;
    let method = match a.method {
        CurrentSource::Direct => CurrentMethod::Direct,
        CurrentSource::Dual => CurrentMethod::Dual,
    };
    let mut table = Table::new(&["n", "t", "omega"]);
    for &t in &a.t {
        let row = current_row(&model, a.j, lo, hi, t, method, &cfg)?;
        for (n, w) in (lo..=hi).zip(row) {
            table.push(vec![Cell::Int(n), Cell::Num(t), Cell::Num(w)]);
        }
    }
    table.write(format, out)?;
    Ok(())
}

fn mat_value(m: Mat2) -> Value {
    json!({ "m11": num_value(m.m11), "m12": num_value(m.m12), "m22": num_value(m.m22) })
}

fn piece_value<W: Weight>(p: &AcPiece<W>, grid: usize, weight: impl Fn(W) -> Value) -> Value {
    let xs: Vec<f64> = (0..grid).map(|k| p.a + (p.b - p.a) * (k as f64 + 0.5) / grid as f64).collect();
    json!({
        "a": num_value(p.a),
        "b": num_value(p.b),
        "left": p.left.name(),
        "right": p.right.name(),
        "x": xs.iter().map(|&x| num_value(x)).collect::<Vec<_>>(),
        "density": xs.iter().map(|&x| weight(p.density(x))).collect::<Vec<_>>(),
    })
}

fn cmd_spectral(model: &ModelArgs, grid: usize, out: &mut dyn Write) -> Outcome {
    let model = model.build()?;
    let mut doc = Map::new();
    doc.insert("family".into(), model.kind().name().into());
    doc.insert(
        "parameters".into(),
        Value::Object(
            model.kind().param_names().iter().zip(model.params()).map(|(n, v)| ((*n).to_owned(), num_value(v))).collect(),
        ),
    );
    match model.domain() {
        Domain::HalfLine => {
            let m = spectral_measure_halfline(&model.half_line(Side::Plus)?);
            doc.insert("kind".into(), "measure".into());
            doc.insert("pieces".into(), m.pieces.iter().map(|p| piece_value(p, grid, num_value)).collect());
            doc.insert(
                "atoms".into(),
                m.atoms.iter().map(|a| json!({"location": num_value(a.location), "weight": num_value(a.weight)})).collect(),
            );
        }
        Domain::Bilateral => {
            let m = spectral_matrix(&model)?;
            doc.insert("kind".into(), "matrix".into());
            doc.insert("pi_minus1".into(), num_value(m.pi_minus1));
            doc.insert("pieces".into(), m.pieces.iter().map(|p| piece_value(p, grid, mat_value)).collect());
            doc.insert(
                "atoms".into(),
                m.atoms.iter().map(|a| json!({"location": num_value(a.location), "weight": mat_value(a.weight)})).collect(),
            );
        }
    }
    write_json(&Value::Object(doc), out)?;
    Ok(())
}

fn cmd_classify(model: &ModelArgs, format: Format, out: &mut dyn Write) -> Outcome {
    let model = model.build()?;
    let c = classify(&model);
    let mut t = Table::new(&["family", "verdict", "spectral", "ratesum", "atom_at_zero"]);
    t.push(vec![
        model.kind().name().into(),
        c.verdict.name().into(),
        c.evidence.spectral.name().into(),
        c.evidence.ratesum.name().into(),
        Cell::Num(atom_at_zero_weight(&model)),
    ]);
    t.write(format, out)?;
    Ok(())
}

fn cmd_invariant(model: &ModelArgs, window: &[i64], format: Format, out: &mut dyn Write) -> Outcome {
    let model = model.build()?;
    let (lo, hi) = range_pair(window, "window")?;
    if model.domain() == Domain::HalfLine && lo < 0 {
        return Err(Failure::Usage("a half-line window starts at 0 or above".into()));
    }
    match invariant_distribution(&model, lo, hi) {
        Some(v) => {
            let mut t = Table::new(&["n", "pi"]);
            for (n, p) in (lo..=hi).zip(v) {
                t.push(vec![Cell::Int(n), Cell::Num(p)]);
            }
            t.write(format, out)?;
        }
        None => match format {
            Format::Csv => writeln!(out, "none")?,
            Format::Json => write_json(&Value::Null, out)?,
        },
    }
    Ok(())
}

/// (check, value) pairs for one model.
fn verify_model(model: &CatalogModel, cfg: &QuadratureConfig) -> Result<Vec<(&'static str, f64)>, Failure> {
    let mut checks = Vec::new();
    let nodes = cfg.nodes_per_piece;
    match model.domain() {
        Domain::HalfLine => {
            let m = spectral_measure_halfline(&model.half_line(Side::Plus)?);
            checks.push(("mass", (m.total_mass(nodes) - 1.0).abs()));
        }
        Domain::Bilateral => {
            let m = spectral_matrix(model)?;
            let mass = m.total_mass(nodes);
            checks.push(("mass11", (mass.m11 - 1.0).abs()));
            checks.push(("mass12", mass.m12.abs()));
            checks.push(("mass22", (mass.m22 * model.potential_coefficient(-1)? - 1.0).abs()));
            let mut worst = 0.0f64;
            for z in [-0.25, -1.0, -5.0, -50.0] {
                let (a, b, c) = bdspectral::spectral::verify_coupling(model, z)?;
                worst = worst.max(a.abs()).max(b.abs()).max(c.abs());
            }
            checks.push(("coupling", worst));
        }
    }
    let (lo, hi) = if model.domain() == Domain::HalfLine { (0, 5) } else { (-5, 5) };
    let oc = OracleConfig { tol: 1e-9, ..OracleConfig::default() };
    let mut worst = 0.0f64;
    for t in [0.5, 1.0, 3.0] {
        for i in lo..=hi {
            let km = transition_row(model, i, t, lo, hi, cfg)?;
            let or = oracle_row(model, i, t, lo, hi, &oc)?;
            for (a, b) in km.iter().zip(&or) {
                worst = worst.max((a.value - b.value).abs());
            }
        }
    }
    checks.push(("oracle", worst));
    Ok(checks)
}

fn cmd_verify(a: &VerifyArgs, format: Format, out: &mut dyn Write) -> Outcome {
    let cfg = a.quad.config()?;
    let models: Vec<CatalogModel> = match (&a.model, a.all) {
        (_, true) => FamilyKind::ALL
            .into_iter()
            .flat_map(|k| k.figure_params().iter().map(move |p| build_model(k, p)))
            .collect::<Result<_, _>>()?,
        (Some(m), false) => vec![m.build()?],
        (None, false) => return Err(Failure::Usage("give model flags or --all".into())),
    };
    let mut t = Table::new(&["family", "parameters", "check", "value", "tol", "pass"]);
    let mut ok = true;
    for m in &models {
        for (check, v) in verify_model(m, &cfg)? {
            let pass = v <= a.tol;
            ok &= pass;
            t.push(vec![
                m.kind().name().into(),
                params_text(m).into(),
                check.into(),
                Cell::Num(v),
                Cell::Num(a.tol),
                Cell::Bool(pass),
            ]);
        }
    }
    t.write(format, out)?;
    if ok {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn run(cli: &Cli, out: &mut dyn Write) -> Outcome {
    match &cli.command {
        Command::Catalog { family } => cmd_catalog(*family, cli.format, out),
        Command::Transition(a) => cmd_transition(a, cli.format, out),
        Command::Current(a) => cmd_current(a, cli.format, out),
        Command::Spectral { model, grid } => cmd_spectral(model, *grid, out),
        Command::Classify { model } => cmd_classify(model, cli.format, out),
        Command::Invariant { model, window } => cmd_invariant(model, window, cli.format, out),
        Command::Verify(a) => cmd_verify(a, cli.format, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = run(&cli, &mut out);
    let flushed = out.flush();
    match (result, flushed) {
        (Ok(()), Ok(())) => ExitCode::SUCCESS,
        (Err(Failure::Usage(msg)), _) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        (Err(Failure::Numerical(msg)), _) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        (Err(Failure::Verification), _) => {
            eprintln!("verification failed");
            ExitCode::from(4)
        }
        (Err(Failure::Io(e)), _) | (Ok(()), Err(e)) => {
            if e.kind() == io::ErrorKind::BrokenPipe {
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
