//! Deterministic command-line reports over the metrology library: bound
//! certificates at a point, strength-grid tables, finite-N extension values,
//! lossy-interferometer analyses, product-probe gains, and binomial
//! measurement statistics.
//!
//! Output is byte-stable across identical runs: JSON objects serialize with
//! sorted keys and every float prints with 12 significant digits; CSV uses
//! `,` separators, `.` decimals, and always starts with a header row. Exit
//! codes: 0 success, 2 usage or domain error, 3 solver failure, 4 problem
//! size beyond a supported limit.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qmetro::bounds::{
    ce_bound, channel_qfi, extended_channel_qfi, finite_n_ce, qs_bound, rld_bound, Applicability,
    BoundReport, Method,
};
use qmetro::channels::{choi_from_kraus, make_noise_channel, NoiseKind, NoiseModel, ParamLabel};
use qmetro::error::MetroError;
use qmetro::geometry::cs_bound;
use qmetro::interferometer::{
    asymptotic_loss_bound, bayes_classical_cost, bayes_lower_bound, bayes_minimal_cost,
    binomial_suite, classical_coherent_crb, escher_finite_n_bound, noon_qfi_lossy,
    optimize_frequentist_input, LossSetting,
};
use qmetro::scenarios::{
    dec_strength_report, frequency_channel_qfi, frequency_enhancement, ghz_depolarization_qfi,
    ghz_enhancement, FrequencyQuantity, FrequencySetting,
};

#[derive(Parser)]
#[command(name = "qmetro", version, about = "Precision limits of noisy quantum metrology")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Report every channel bound with its certificate at one parameter point.
    Bounds(BoundsArgs),
    /// Tabulate bound families over a strength grid (or decay rate for freq).
    Table(TableArgs),
    /// Finite-N channel-extension values against the asymptotic interpolation.
    FiniteN(FiniteNArgs),
    /// Lossy two-arm interferometer: frequentist and Bayesian analyses.
    Mz(MzArgs),
    /// Product-probe gain for depolarization-strength estimation.
    Ghz(GhzArgs),
    /// Binomial single-detector phase statistics.
    Binomial(BinomialArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum ModelArg {
    Dephasing,
    Depolarization,
    Loss,
    #[value(alias = "spem")]
    SpontaneousEmission,
}

impl ModelArg {
    fn kind(self) -> NoiseKind {
        match self {
            ModelArg::Dephasing => NoiseKind::Dephasing,
            ModelArg::Depolarization => NoiseKind::Depolarization,
            ModelArg::Loss => NoiseKind::Loss,
            ModelArg::SpontaneousEmission => NoiseKind::SpontaneousEmission,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum ParamArg {
    Phase,
    Strength,
}

#[derive(Copy, Clone, ValueEnum)]
enum TableName {
    Chqfi,
    Sql,
    Freq,
    Dec,
}

#[derive(Args)]
struct OutputArgs {
    /// Emit JSON.
    #[arg(long)]
    json: bool,
    /// Emit CSV.
    #[arg(long, conflicts_with = "json")]
    csv: bool,
    /// Write to FILE instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Noise family.
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Noise strength.
    #[arg(long)]
    eta: f64,
    /// Estimated parameter.
    #[arg(long, value_enum)]
    param: ParamArg,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct TableArgs {
    /// Which table to emit.
    #[arg(value_enum)]
    name: TableName,
    /// Single strength point.
    #[arg(long, conflicts_with = "eta_grid")]
    eta: Option<f64>,
    /// Strength grid start:stop:step (inclusive ends).
    #[arg(long, value_name = "A:B:STEP")]
    eta_grid: Option<String>,
    /// Decay rate for the frequency table.
    #[arg(long)]
    gamma: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct FiniteNArgs {
    /// Noise family.
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Noise strength.
    #[arg(long)]
    eta: f64,
    /// Channel-use counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct MzArgs {
    #[command(subcommand)]
    cmd: MzCmd,
}

#[derive(Subcommand)]
enum MzCmd {
    /// Optimal-input frequentist information per photon number.
    Freq(MzCommonArgs),
    /// Minimal flat-prior Bayesian cost, its lower bound, and the coherent benchmark.
    Bayes(MzBayesArgs),
    /// Input-independent information ceilings per photon number.
    Bound(MzCommonArgs),
}

#[derive(Args)]
struct MzCommonArgs {
    /// Transmission of the sensing arm.
    #[arg(long)]
    eta_a: f64,
    /// Transmission of the reference arm.
    #[arg(long)]
    eta_b: f64,
    /// Photon numbers, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct MzBayesArgs {
    #[command(flatten)]
    common: MzCommonArgs,
    /// Write the optimal input coefficients to FILE (single photon number only).
    #[arg(long, value_name = "FILE")]
    alpha_out: Option<PathBuf>,
}

#[derive(Args)]
struct GhzArgs {
    /// Depolarization strength.
    #[arg(long)]
    eta: f64,
    /// Probe particle count.
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct BinomialArgs {
    /// Trial count.
    #[arg(long)]
    n: usize,
    /// Observed success count.
    #[arg(long)]
    k: usize,
    /// True phase in (0, pi).
    #[arg(long)]
    phi: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug)]
struct CliError {
    code: u8,
    msg: String,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError { code: 2, msg: msg.into() }
    }
}

impl From<MetroError> for CliError {
    fn from(e: MetroError) -> Self {
        let code = match e {
            MetroError::ScaleLimit { .. } => 4,
            _ if is_solver_error(&e) => 3,
            _ => 2,
        };
        CliError { code, msg: e.to_string() }
    }
}

/// Failures of a numerical routine on a valid problem, as opposed to domain
/// or applicability conditions that are part of the answer.
fn is_solver_error(e: &MetroError) -> bool {
    matches!(
        e,
        MetroError::Infeasible
            | MetroError::MaxIterations(_)
            | MetroError::NumericalBreakdown(_)
            | MetroError::SolverFailure(_)
            | MetroError::ConvergenceFailure(_)
            | MetroError::OptimizationFailure(_)
    )
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (text, output) = match cli.cmd {
        Cmd::Bounds(a) => (cmd_bounds(&a)?, a.output),
        Cmd::Table(a) => (cmd_table(&a)?, a.output),
        Cmd::FiniteN(a) => (cmd_finite_n(&a)?, a.output),
        Cmd::Mz(a) => match a.cmd {
            MzCmd::Freq(c) => (cmd_mz_freq(&c)?, c.output),
            MzCmd::Bayes(c) => (cmd_mz_bayes(&c)?, c.common.output),
            MzCmd::Bound(c) => (cmd_mz_bound(&c)?, c.output),
        },
        Cmd::Ghz(a) => (cmd_ghz(&a)?, a.output),
        Cmd::Binomial(a) => (cmd_binomial(&a)?, a.output),
    };
    match &output.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::usage(format!("cannot write {}: {}", path.display(), e))),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Deterministic value tree and emitters.

enum Val {
    Null,
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Val>),
    Obj(Vec<(String, Val)>),
}

/// 12 significant digits; non-finite values become JSON null / CSV na.
fn fmt_f64(x: f64) -> Option<String> {
    x.is_finite().then(|| format!("{:.11e}", x))
}

fn opt_num(x: Option<f64>) -> Val {
    match x {
        Some(v) if v.is_finite() => Val::Num(v),
        _ => Val::Null,
    }
}

fn json_escape(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
}

fn write_json(v: &Val, out: &mut String) {
    match v {
        Val::Null => out.push_str("null"),
        Val::Int(i) => out.push_str(&i.to_string()),
        Val::Num(x) => match fmt_f64(*x) {
            Some(s) => out.push_str(&s),
            None => out.push_str("null"),
        },
        Val::Str(s) => json_escape(s, out),
        Val::Arr(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_json(item, out);
            }
            out.push(']');
        }
        Val::Obj(pairs) => {
            let mut order: Vec<&(String, Val)> = pairs.iter().collect();
            order.sort_by(|a, b| a.0.cmp(&b.0));
            out.push('{');
            for (i, (key, val)) in order.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                json_escape(key, out);
                out.push(':');
                write_json(val, out);
            }
            out.push('}');
        }
    }
}

fn json_text(v: &Val) -> String {
    let mut s = String::new();
    write_json(v, &mut s);
    s.push('\n');
    s
}

/// One output record; the pair order fixes the CSV column order.
struct Row(Vec<(&'static str, Val)>);

fn csv_cell(v: &Val) -> String {
    let raw = match v {
        Val::Null => "na".to_string(),
        Val::Int(i) => i.to_string(),
        Val::Num(x) => fmt_f64(*x).unwrap_or_else(|| "na".to_string()),
        Val::Str(s) => s.clone(),
        Val::Arr(_) | Val::Obj(_) => "na".to_string(),
    };
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}

fn csv_text(rows: &[Row]) -> String {
    let header: Vec<&str> = rows.first().map(|r| r.0.iter().map(|(k, _)| *k).collect()).unwrap_or_default();
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.0.iter().map(|(_, v)| csv_cell(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn rows_json(rows: &[Row]) -> Val {
    Val::Arr(
        rows.iter()
            .map(|r| Val::Obj(r.0.iter().map(|(k, v)| (k.to_string(), clone_val(v))).collect()))
            .collect(),
    )
}

fn clone_val(v: &Val) -> Val {
    match v {
        Val::Null => Val::Null,
        Val::Int(i) => Val::Int(*i),
        Val::Num(x) => Val::Num(*x),
        Val::Str(s) => Val::Str(s.clone()),
        Val::Arr(items) => Val::Arr(items.iter().map(clone_val).collect()),
        Val::Obj(pairs) => Val::Obj(pairs.iter().map(|(k, v)| (k.clone(), clone_val(v))).collect()),
    }
}

/// Tables default to CSV; `--json` flips to an array of row objects.
fn table_text(rows: &[Row], json: bool) -> String {
    if json {
        json_text(&rows_json(rows))
    } else {
        csv_text(rows)
    }
}

/// Single records default to JSON; `--csv` flips to a one-row table.
fn record_text(row: Row, csv: bool) -> String {
    if csv {
        csv_text(&[row])
    } else {
        json_text(&Val::Obj(row.0.into_iter().map(|(k, v)| (k.to_string(), v)).collect()))
    }
}

// ---------------------------------------------------------------------------
// Naming maps shared by every emitter.

fn kind_str(kind: NoiseKind) -> &'static str {
    match kind {
        NoiseKind::Dephasing => "dephasing",
        NoiseKind::Depolarization => "depolarization",
        NoiseKind::Loss => "loss",
        NoiseKind::SpontaneousEmission => "spontaneous_emission",
        NoiseKind::LossyInterferometer => "lossy_interferometer",
    }
}

fn applicability_str(a: Applicability) -> &'static str {
    match a {
        Applicability::Ok => "ok",
        Applicability::PhiExtremal => "phi_extremal",
        Applicability::BetaConditionUnsatisfiable => "beta_condition_unsatisfiable",
        Applicability::AlphaNotScalar => "alpha_not_scalar",
    }
}

fn method_str(m: Method) -> &'static str {
    match m {
        Method::ChannelQfi => "channel_qfi",
        Method::ExtendedChannelQfi => "extended_channel_qfi",
        Method::Rld => "rld",
        Method::ClassicalSimulation => "classical_simulation",
        Method::QuantumSimulation => "quantum_simulation",
        Method::ChannelExtension => "channel_extension",
        Method::FiniteNChannelExtension => "finite_n_channel_extension",
    }
}

const TABLE_MODELS: [NoiseKind; 4] =
    [NoiseKind::Dephasing, NoiseKind::Depolarization, NoiseKind::Loss, NoiseKind::SpontaneousEmission];

// ---------------------------------------------------------------------------
// bounds

/// One bound entry: a finished report, or a quantity with no finite value at
/// this point (e.g. the simulation reach degenerates); solver failures abort.
enum Entry {
    Report(BoundReport),
    Undefined(String),
}

fn entry_from(r: Result<BoundReport, MetroError>) -> Result<Entry, CliError> {
    match r {
        Ok(report) => Ok(Entry::Report(report)),
        Err(e) if is_solver_error(&e) => Err(e.into()),
        Err(e) => Ok(Entry::Undefined(e.to_string())),
    }
}

fn entry_val(entry: &Entry) -> Val {
    match entry {
        Entry::Report(r) => {
            let cert = Val::Obj(vec![
                (
                    "alpha_eigs".to_string(),
                    match &r.certificate.alpha_eigs {
                        Some(eigs) => Val::Arr(eigs.iter().map(|&x| Val::Num(x)).collect()),
                        None => Val::Null,
                    },
                ),
                ("beta_norm".to_string(), opt_num(r.certificate.beta_norm)),
                ("sdp_gap".to_string(), opt_num(r.certificate.sdp_gap)),
            ]);
            Val::Obj(vec![
                (
                    "applicability".to_string(),
                    Val::Str(applicability_str(r.certificate.applicability).to_string()),
                ),
                ("certificate".to_string(), cert),
                (
                    "note".to_string(),
                    r.note.as_ref().map(|n| Val::Str(n.clone())).unwrap_or(Val::Null),
                ),
                ("value".to_string(), opt_num(r.value)),
            ])
        }
        Entry::Undefined(msg) => Val::Obj(vec![
            ("applicability".to_string(), Val::Str("undefined".to_string())),
            (
                "certificate".to_string(),
                Val::Obj(vec![
                    ("alpha_eigs".to_string(), Val::Null),
                    ("beta_norm".to_string(), Val::Null),
                    ("sdp_gap".to_string(), Val::Null),
                ]),
            ),
            ("note".to_string(), Val::Str(msg.clone())),
            ("value".to_string(), Val::Null),
        ]),
    }
}

fn check_eta_closed(eta: f64) -> Result<(), CliError> {
    if eta.is_finite() && (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(CliError::usage(format!("--eta must lie in [0, 1], got {}", eta)))
    }
}

fn check_eta_open(eta: f64) -> Result<(), CliError> {
    if eta.is_finite() && eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(CliError::usage(format!("--eta must lie strictly inside (0, 1), got {}", eta)))
    }
}

fn cmd_bounds(a: &BoundsArgs) -> Result<String, CliError> {
    check_eta_closed(a.eta)?;
    let kind = a.model.kind();
    let (param, param_name, point) = match a.param {
        ParamArg::Phase => (ParamLabel::Phase, "phase", 0.0),
        ParamArg::Strength => (ParamLabel::Strength, "strength", a.eta),
    };
    let k = make_noise_channel(NoiseModel::new(kind, a.eta), param, point)?;
    let choi = choi_from_kraus(&k);
    let entries: Vec<(&'static str, Entry)> = vec![
        ("channel_qfi", entry_from(channel_qfi(&k))?),
        ("extended_qfi", entry_from(extended_channel_qfi(&k))?),
        ("rld", entry_from(rld_bound(&choi))?),
        ("cs", entry_from(cs_bound(&choi))?),
        ("qs", entry_from(qs_bound(&k, 0.0))?),
        ("ce", entry_from(ce_bound(&k))?),
    ];
    if a.output.csv {
        let mut names: Vec<&(&'static str, Entry)> = entries.iter().collect();
        names.sort_by(|x, y| x.0.cmp(y.0));
        let rows: Vec<Row> = names
            .into_iter()
            .map(|(name, entry)| {
                let (value, app, gap, beta, note) = match entry {
                    Entry::Report(r) => (
                        opt_num(r.value),
                        applicability_str(r.certificate.applicability).to_string(),
                        opt_num(r.certificate.sdp_gap),
                        opt_num(r.certificate.beta_norm),
                        r.note.clone().map(Val::Str).unwrap_or(Val::Null),
                    ),
                    Entry::Undefined(msg) => {
                        (Val::Null, "undefined".to_string(), Val::Null, Val::Null, Val::Str(msg.clone()))
                    }
                };
                Row(vec![
                    ("bound", Val::Str(name.to_string())),
                    ("value", value),
                    ("applicability", Val::Str(app)),
                    ("sdp_gap", gap),
                    ("beta_norm", beta),
                    ("note", note),
                ])
            })
            .collect();
        return Ok(csv_text(&rows));
    }
    let report = Val::Obj(vec![
        (
            "bounds".to_string(),
            Val::Obj(entries.iter().map(|(name, e)| (name.to_string(), entry_val(e))).collect()),
        ),
        ("eta".to_string(), Val::Num(a.eta)),
        ("model".to_string(), Val::Str(kind_str(kind).to_string())),
        ("parameter".to_string(), Val::Str(param_name.to_string())),
        ("point".to_string(), Val::Num(point)),
    ]);
    Ok(json_text(&report))
}

// ---------------------------------------------------------------------------
// table

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::usage(format!("--eta-grid expects A:B:STEP, got {}", spec)));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| CliError::usage(format!("bad grid number {}", p))))
        .collect::<Result<_, _>>()?;
    let (a, b, step) = (nums[0], nums[1], nums[2]);
    if !step.is_finite() || step <= 0.0 {
        return Err(CliError::usage(format!("grid step must be positive, got {}", step)));
    }
    let mut grid = Vec::new();
    let mut i = 0usize;
    loop {
        let x = a + i as f64 * step;
        if x > b + 1e-12 {
            break;
        }
        grid.push(x);
        i += 1;
    }
    if grid.is_empty() {
        return Err(CliError::usage(format!("grid {} contains no points", spec)));
    }
    Ok(grid)
}

fn strength_grid(a: &TableArgs) -> Result<Vec<f64>, CliError> {
    let grid = match (&a.eta, &a.eta_grid) {
        (Some(eta), _) => vec![*eta],
        (None, Some(spec)) => parse_grid(spec)?,
        (None, None) => (1..=9).map(|i| i as f64 / 10.0).collect(),
    };
    for &eta in &grid {
        check_eta_open(eta)?;
    }
    Ok(grid)
}

fn report_value(r: &BoundReport) -> Val {
    opt_num(r.value)
}

fn cmd_table(a: &TableArgs) -> Result<String, CliError> {
    match a.name {
        TableName::Freq => {
            if a.eta.is_some() || a.eta_grid.is_some() {
                return Err(CliError::usage("the freq table is parametrized by --gamma, not --eta"));
            }
            let gamma = a.gamma.ok_or_else(|| CliError::usage("the freq table requires --gamma"))?;
            let mut rows = Vec::new();
            for kind in TABLE_MODELS {
                let fs = FrequencySetting::new(kind, gamma)?;
                let plain = frequency_channel_qfi(&fs, FrequencyQuantity::Plain)?;
                let ext = frequency_channel_qfi(&fs, FrequencyQuantity::Extended)?;
                let ce = frequency_channel_qfi(&fs, FrequencyQuantity::CeAsymptotic)?;
                let chi = frequency_enhancement(&fs)?;
                rows.push(Row(vec![
                    ("model", Val::Str(kind_str(kind).to_string())),
                    ("plain", report_value(&plain)),
                    ("extended", report_value(&ext)),
                    ("ce_asymptotic", report_value(&ce)),
                    ("enhancement", Val::Num(chi)),
                ]));
            }
            Ok(table_text(&rows, a.output.json))
        }
        TableName::Chqfi | TableName::Sql | TableName::Dec => {
            if a.gamma.is_some() {
                return Err(CliError::usage("--gamma applies only to the freq table"));
            }
            let grid = strength_grid(a)?;
            let mut rows = Vec::new();
            for &eta in &grid {
                for kind in TABLE_MODELS {
                    rows.push(match a.name {
                        TableName::Chqfi => chqfi_row(kind, eta)?,
                        TableName::Sql => sql_row(kind, eta)?,
                        TableName::Dec => dec_row(kind, eta)?,
                        TableName::Freq => unreachable!(),
                    });
                }
            }
            Ok(table_text(&rows, a.output.json))
        }
    }
}

fn chqfi_row(kind: NoiseKind, eta: f64) -> Result<Row, CliError> {
    let k = make_noise_channel(NoiseModel::new(kind, eta), ParamLabel::Phase, 0.0)?;
    let choi = choi_from_kraus(&k);
    let plain = channel_qfi(&k)?;
    let ext = extended_channel_qfi(&k)?;
    let rld = rld_bound(&choi)?;
    Ok(Row(vec![
        ("eta", Val::Num(eta)),
        ("model", Val::Str(kind_str(kind).to_string())),
        ("channel_qfi", report_value(&plain)),
        ("extended_qfi", report_value(&ext)),
        ("rld", report_value(&rld)),
    ]))
}

fn sql_row(kind: NoiseKind, eta: f64) -> Result<Row, CliError> {
    let k = make_noise_channel(NoiseModel::new(kind, eta), ParamLabel::Phase, 0.0)?;
    let choi = choi_from_kraus(&k);
    let ce = ce_bound(&k)?;
    let qs = qs_bound(&k, 0.0)?;
    let rld = rld_bound(&choi)?;
    let cs = cs_bound(&choi)?;
    Ok(Row(vec![
        ("eta", Val::Num(eta)),
        ("model", Val::Str(kind_str(kind).to_string())),
        ("ce", report_value(&ce)),
        ("qs", report_value(&qs)),
        ("rld", report_value(&rld)),
        ("cs", report_value(&cs)),
    ]))
}

fn dec_row(kind: NoiseKind, eta: f64) -> Result<Row, CliError> {
    let r = dec_strength_report(kind, eta)?;
    Ok(Row(vec![
        ("eta", Val::Num(eta)),
        ("model", Val::Str(kind_str(kind).to_string())),
        ("plain", Val::Num(r.plain)),
        ("extended", Val::Num(r.extended)),
        ("asymptotic_bound", Val::Num(r.asymptotic_bound)),
        ("method", Val::Str(method_str(r.bound_method).to_string())),
    ]))
}

// ---------------------------------------------------------------------------
// finite-n

fn cmd_finite_n(a: &FiniteNArgs) -> Result<String, CliError> {
    check_eta_open(a.eta)?;
    let k = make_noise_channel(NoiseModel::new(a.model.kind(), a.eta), ParamLabel::Phase, 0.0)?;
    let f_as = ce_bound(&k)?
        .value
        .ok_or_else(|| CliError::usage("asymptotic channel-extension bound is undefined here"))?;
    let mut rows = Vec::new();
    for &n in &a.n {
        let r = finite_n_ce(&k, n)?;
        let interp = n as f64 * f_as / (n as f64 + f_as);
        rows.push(Row(vec![
            ("n", Val::Int(n as i64)),
            ("finite_n_ce", report_value(&r)),
            ("interpolation", Val::Num(interp)),
        ]));
    }
    Ok(table_text(&rows, a.output.json))
}

// ---------------------------------------------------------------------------
// mz

fn loss_setting(a: &MzCommonArgs, n: usize) -> Result<LossSetting, CliError> {
    Ok(LossSetting::new(a.eta_a, a.eta_b, n)?)
}

fn cmd_mz_freq(a: &MzCommonArgs) -> Result<String, CliError> {
    let mut rows = Vec::new();
    for &n in &a.n {
        let s = loss_setting(a, n)?;
        let (_, fbar) = optimize_frequentist_input(&s)?;
        rows.push(Row(vec![
            ("n", Val::Int(n as i64)),
            ("optimal_bound", Val::Num(fbar)),
            ("noon_qfi", Val::Num(noon_qfi_lossy(&s))),
            ("escher_bound", Val::Num(escher_finite_n_bound(&s))),
            ("coherent_fi", Val::Num(n as f64 / classical_coherent_crb(&s))),
        ]));
    }
    Ok(table_text(&rows, a.output.json))
}

/// Coherent-benchmark cost minimized over the splitting ratio by golden
/// section; the cost is smooth and single-welled in tau.
fn best_classical_cost(s: &LossSetting) -> Result<f64, CliError> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (1e-9, 1.0 - 1e-9);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = bayes_classical_cost(s, x1)?;
    let mut f2 = bayes_classical_cost(s, x2)?;
    for _ in 0..120 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = bayes_classical_cost(s, x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = bayes_classical_cost(s, x2)?;
        }
    }
    Ok(f1.min(f2))
}

fn cmd_mz_bayes(a: &MzBayesArgs) -> Result<String, CliError> {
    if a.alpha_out.is_some() && a.common.n.len() != 1 {
        return Err(CliError::usage("--alpha-out requires exactly one photon number"));
    }
    let mut rows = Vec::new();
    for &n in &a.common.n {
        let s = loss_setting(&a.common, n)?;
        let (cost, input) = bayes_minimal_cost(&s)?;
        let lower = bayes_lower_bound(&s)?;
        let classical = best_classical_cost(&s)?;
        if let Some(path) = &a.alpha_out {
            let alpha_rows: Vec<Row> = input
                .alpha
                .iter()
                .enumerate()
                .map(|(k, z)| Row(vec![("k", Val::Int(k as i64)), ("alpha", Val::Num(z.re))]))
                .collect();
            std::fs::write(path, csv_text(&alpha_rows))
                .map_err(|e| CliError::usage(format!("cannot write {}: {}", path.display(), e)))?;
        }
        rows.push(Row(vec![
            ("n", Val::Int(n as i64)),
            ("minimal_cost", Val::Num(cost)),
            ("lower_bound", Val::Num(lower)),
            ("classical_cost", Val::Num(classical)),
        ]));
    }
    Ok(table_text(&rows, a.common.output.json))
}

fn cmd_mz_bound(a: &MzCommonArgs) -> Result<String, CliError> {
    let mut rows = Vec::new();
    for &n in &a.n {
        let s = loss_setting(a, n)?;
        let (coeff, _) = asymptotic_loss_bound(&s)?;
        rows.push(Row(vec![
            ("n", Val::Int(n as i64)),
            ("escher_bound", Val::Num(escher_finite_n_bound(&s))),
            ("asymptotic_bound", Val::Num(n as f64 * coeff)),
            ("coherent_fi", Val::Num(n as f64 / classical_coherent_crb(&s))),
        ]));
    }
    Ok(table_text(&rows, a.output.json))
}

// ---------------------------------------------------------------------------
// ghz, binomial

fn cmd_ghz(a: &GhzArgs) -> Result<String, CliError> {
    let qfi = ghz_depolarization_qfi(a.n, a.eta)?;
    let chi = ghz_enhancement(a.eta)?;
    let row = Row(vec![
        ("chi", Val::Num(chi)),
        ("eta", Val::Num(a.eta)),
        ("n", Val::Int(a.n as i64)),
        ("qfi", Val::Num(qfi)),
        ("qfi_per_particle", Val::Num(qfi / a.n as f64)),
    ]);
    Ok(record_text(row, a.output.csv))
}

fn cmd_binomial(a: &BinomialArgs) -> Result<String, CliError> {
    let suite = binomial_suite(a.n, a.k, a.phi)?;
    let row = Row(vec![
        ("n", Val::Int(a.n as i64)),
        ("k", Val::Int(a.k as i64)),
        ("phi", Val::Num(a.phi)),
        ("fi", Val::Num(suite.fi)),
        ("ml", Val::Num(suite.ml)),
        ("local_efficient", Val::Num(suite.local_efficient)),
        ("bayes_h", Val::Num(suite.bayes_h)),
        ("avg_cost_h", Val::Num(suite.avg_cost_h)),
        ("p_mmse", Val::Num(suite.p_mmse)),
        ("p_avg_mse", Val::Num(suite.p_avg_mse)),
    ]);
    Ok(record_text(row, a.output.csv))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_keeps_twelve_significant_digits() {
        assert_eq!(fmt_f64(4.263157894736842).unwrap(), "4.26315789474e0");
        assert_eq!(fmt_f64(0.5).unwrap(), "5.00000000000e-1");
        assert_eq!(fmt_f64(-1.0 / 3.0e8).unwrap(), "-3.33333333333e-9");
        assert_eq!(fmt_f64(0.0).unwrap(), "0.00000000000e0");
        assert!(fmt_f64(f64::NAN).is_none());
        assert!(fmt_f64(f64::INFINITY).is_none());
    }

    #[test]
    fn json_objects_sort_keys_and_escape_strings() {
        let v = Val::Obj(vec![
            ("b".to_string(), Val::Int(2)),
            ("a".to_string(), Val::Str("x\"y\n".to_string())),
            ("c".to_string(), Val::Arr(vec![Val::Null, Val::Num(0.25)])),
        ]);
        assert_eq!(json_text(&v), "{\"a\":\"x\\\"y\\n\",\"b\":2,\"c\":[null,2.50000000000e-1]}\n");
    }

    #[test]
    fn csv_quotes_cells_with_separators() {
        let rows = vec![Row(vec![
            ("name", Val::Str("a,b".to_string())),
            ("value", Val::Null),
        ])];
        assert_eq!(csv_text(&rows), "name,value\n\"a,b\",na\n");
    }

    #[test]
    fn grid_expansion_hits_inclusive_endpoints() {
        let g = parse_grid("0.1:0.9:0.1").unwrap();
        assert_eq!(g.len(), 9);
        assert!((g[0] - 0.1).abs() < 1e-15);
        assert!((g[8] - 0.9).abs() < 1e-12);
        assert!(parse_grid("0.9:0.1:0.1").is_err());
        assert!(parse_grid("0.1:0.9:0").is_err());
        assert!(parse_grid("0.1:0.9").is_err());
        assert!(parse_grid("a:b:c").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
