use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qcert::formats::{read_state, read_state_set, read_unitary, write_json, StateSetFile, UnitaryFile};
use qcert::harness::{
    bounds_table, generate_state_set, generate_unitary_pair, oracle_verify, run_experiment, trial_rng,
    ExperimentKind, ExperimentReport, ExperimentSpec, InstanceKind, PlanSummary, INSTANCE_STREAM,
};
use qcert::quantum::unitary_distance;
use qcert::state_set::{chernoff_closed_form_copies, plan_l2_membership, plan_membership};
use qcert::unitary::{self, TestMode, UnitaryTestPlan};

const EXIT_PASS: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "qcert", version, about = "Plan and simulate quantum membership and unitary-equality testers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the tester plan for the given parameters
    Plan(PlanArgs),
    /// Monte Carlo campaign for the state-set membership tester
    SimulateStateSet(StateSetArgs),
    /// Monte Carlo campaign for a unitary equality tester
    SimulateUnitary(UnitaryArgs),
    /// Cross-check closed forms against explicit tensor algebra
    OracleVerify(OracleArgs),
    /// Copy-count comparison tables
    BoundsTable(TableArgs),
    /// Write instance files
    GenInstances(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Membership,
    L2Membership,
    /// Known reference; qubit or qudit by dimension
    Known,
    /// Two unknown unitaries; qubit or qudit by dimension
    Swap,
    QubitKnown,
    QubitSwap,
    QuditKnown,
    QuditSwap,
}

impl ModeArg {
    fn test_mode(self, d: usize) -> Option<TestMode> {
        match self {
            ModeArg::Membership | ModeArg::L2Membership => None,
            ModeArg::Known => Some(TestMode::for_dimension(d, true)),
            ModeArg::Swap => Some(TestMode::for_dimension(d, false)),
            ModeArg::QubitKnown => Some(TestMode::QubitKnown),
            ModeArg::QubitSwap => Some(TestMode::QubitSwap),
            ModeArg::QuditKnown => Some(TestMode::QuditKnown),
            ModeArg::QuditSwap => Some(TestMode::QuditSwap),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum InstanceArg {
    Member,
    Far,
}

impl From<InstanceArg> for InstanceKind {
    fn from(a: InstanceArg) -> Self {
        match a {
            InstanceArg::Member => InstanceKind::Member,
            InstanceArg::Far => InstanceKind::Far,
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Write the result here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 2)]
    dimension: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Known)]
    mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    set_size: usize,
    /// Variance constant of the l2 min-tester
    #[arg(long, default_value_t = 1.0)]
    variance_constant: f64,
    /// Measurement rounds for unitary testers (default: 1 known, 2 swap)
    #[arg(long)]
    repetitions: Option<u32>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct StateSetArgs {
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 4)]
    dimension: usize,
    #[arg(long, default_value_t = 8)]
    set_size: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// State set file; random states when absent
    #[arg(long)]
    input: Option<PathBuf>,
    /// State file for the tested state; generated from --instance when absent
    #[arg(long)]
    state: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = InstanceArg::Member)]
    instance: InstanceArg,
    /// Run trials on one thread
    #[arg(long)]
    serial: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct UnitaryArgs {
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 2)]
    dimension: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Known)]
    mode: ModeArg,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Unitary file for U
    #[arg(long, requires = "reference")]
    input: Option<PathBuf>,
    /// Unitary file for the reference V
    #[arg(long, requires = "input")]
    reference: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = InstanceArg::Member)]
    instance: InstanceArg,
    #[arg(long)]
    serial: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3, 0.5])]
    epsilon: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 4])]
    dimension: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [8, 64])]
    set_size: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.001, 0.01, 0.1, 0.5])]
    delta: Vec<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    StateSet,
    UnitaryPair,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    #[arg(long, default_value_t = 4)]
    dimension: usize,
    #[arg(long, default_value_t = 8)]
    set_size: usize,
    /// Minimum pairwise trace distance of the state set
    #[arg(long)]
    delta: Option<f64>,
    /// Distance of the unitary pair
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// State set file, or the file for U
    #[arg(long)]
    output: PathBuf,
    /// File for V (unitary pairs)
    #[arg(long)]
    reference: Option<PathBuf>,
}

fn emit_text(out: &OutputArgs, text: &str) -> qcert::Result<()> {
    match &out.output {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json_line<T: Serialize>(value: &T) -> qcert::Result<String> {
    let mut s = serde_json::to_string(value)?;
    s.push('\n');
    Ok(s)
}

fn csv_text<T: Serialize>(rows: &[T]) -> qcert::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| qcert::Error::InvalidParameter(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| qcert::Error::InvalidParameter(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn emit<T: Serialize>(out: &OutputArgs, rows: &[T]) -> qcert::Result<()> {
    let text = match out.format {
        Format::Json if rows.len() == 1 => json_line(&rows[0])?,
        Format::Json => json_line(&rows)?,
        Format::Csv => csv_text(rows)?,
    };
    emit_text(out, &text)
}

#[derive(Serialize)]
struct PlanRow {
    mode: String,
    d: usize,
    epsilon: f64,
    n: u64,
    s: Option<usize>,
    lambda: Option<String>,
    repetitions: Option<u32>,
    threshold: Option<f64>,
    chernoff_s: Option<f64>,
    set_size: Option<usize>,
    total_copies: Option<u64>,
    closed_form_n: Option<u64>,
    soundness_cap: Option<f64>,
    ancilla_dimension: Option<u64>,
}

fn lambda_text(plan: &UnitaryTestPlan) -> String {
    plan.lambda
        .parts()
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn unitary_row(plan: &UnitaryTestPlan) -> PlanRow {
    PlanRow {
        mode: plan.mode.to_string(),
        d: plan.d,
        epsilon: plan.epsilon,
        n: plan.n as u64,
        s: plan.s,
        lambda: Some(lambda_text(plan)),
        repetitions: Some(plan.repetitions),
        threshold: None,
        chernoff_s: None,
        set_size: None,
        total_copies: Some(plan.uses_per_unitary() as u64),
        closed_form_n: None,
        soundness_cap: Some(plan.soundness_cap),
        ancilla_dimension: Some(plan.ancilla_dimension),
    }
}

fn cmd_plan(a: PlanArgs) -> qcert::Result<u8> {
    match a.mode {
        ModeArg::Membership => {
            let p = plan_membership(a.epsilon, a.set_size)?;
            let row = PlanRow {
                mode: "membership".into(),
                d: a.dimension,
                epsilon: p.epsilon,
                n: p.n,
                s: None,
                lambda: None,
                repetitions: None,
                threshold: Some(p.threshold),
                chernoff_s: Some(p.chernoff_s),
                set_size: Some(p.set_size),
                total_copies: Some(p.total_copies()),
                closed_form_n: chernoff_closed_form_copies(a.epsilon, a.set_size),
                soundness_cap: None,
                ancilla_dimension: None,
            };
            emit(&a.out, &[row])?;
        }
        ModeArg::L2Membership => {
            let n = plan_l2_membership(a.epsilon, a.set_size, a.variance_constant)?;
            let row = PlanRow {
                mode: "l2-membership".into(),
                d: a.dimension,
                epsilon: a.epsilon,
                n,
                s: None,
                lambda: None,
                repetitions: None,
                threshold: None,
                chernoff_s: None,
                set_size: Some(a.set_size),
                total_copies: Some(n * a.set_size as u64),
                closed_form_n: None,
                soundness_cap: None,
                ancilla_dimension: None,
            };
            emit(&a.out, &[row])?;
        }
        m => {
            let mode = m.test_mode(a.dimension).expect("unitary mode");
            let mut plan = unitary::plan(mode, a.dimension, a.epsilon)?;
            if let Some(r) = a.repetitions {
                plan = plan.with_repetitions(r)?;
            }
            match a.out.format {
                Format::Json => emit_text(&a.out, &json_line(&plan)?)?,
                Format::Csv => emit(&a.out, &[unitary_row(&plan)])?,
            }
        }
    }
    Ok(EXIT_PASS)
}

#[derive(Serialize)]
struct ReportRow {
    kind: ExperimentKind,
    mode: String,
    epsilon: f64,
    dimension: usize,
    set_size: usize,
    trials: u64,
    seed: u64,
    side: InstanceKind,
    distance: f64,
    n: u64,
    accepts: u64,
    empirical_accept_rate: f64,
    wilson_lo: f64,
    wilson_hi: f64,
    analytic_prediction: f64,
    threshold: f64,
    pass: bool,
}

fn report_row(r: &ExperimentReport) -> ReportRow {
    let (mode, n) = match &r.plan {
        PlanSummary::Membership { plan, .. } => ("membership".to_string(), plan.n),
        PlanSummary::Unitary(p) => (p.mode.to_string(), p.n as u64),
        PlanSummary::Oracle { .. } => ("oracle".to_string(), 0),
    };
    ReportRow {
        kind: r.spec.kind,
        mode,
        epsilon: r.spec.epsilon,
        dimension: r.spec.dimension,
        set_size: r.spec.set_size,
        trials: r.trials,
        seed: r.spec.seed,
        side: r.side,
        distance: r.distance,
        n,
        accepts: r.accepts,
        empirical_accept_rate: r.empirical_accept_rate,
        wilson_lo: r.wilson_interval.0,
        wilson_hi: r.wilson_interval.1,
        analytic_prediction: r.analytic_prediction,
        threshold: r.threshold,
        pass: r.pass,
    }
}

fn emit_report(out: &OutputArgs, report: &ExperimentReport) -> qcert::Result<u8> {
    match out.format {
        Format::Json => emit_text(out, &json_line(report)?)?,
        Format::Csv => emit(out, &[report_row(report)])?,
    }
    Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
}

fn cmd_state_set(a: StateSetArgs) -> qcert::Result<u8> {
    let mut spec = ExperimentSpec::new(ExperimentKind::StateSetMembership, a.epsilon, a.dimension, a.seed)
        .with_trials(a.trials)
        .with_set_size(a.set_size)
        .with_instance(a.instance.into());
    if let Some(path) = &a.input {
        let set = read_state_set(path)?;
        let state = a.state.as_ref().map(read_state).transpose()?;
        spec = spec.with_state_set(set, state);
    } else if a.state.is_some() {
        return Err(qcert::Error::InvalidParameter("--state needs --input".into()));
    }
    if a.serial {
        spec = spec.serial();
    }
    let report = run_experiment(spec)?;
    emit_report(&a.out, &report)
}

fn cmd_unitary(a: UnitaryArgs) -> qcert::Result<u8> {
    let mut spec = ExperimentSpec::new(ExperimentKind::UnitaryEquality, a.epsilon, a.dimension, a.seed)
        .with_trials(a.trials)
        .with_instance(a.instance.into());
    if let (Some(u), Some(v)) = (&a.input, &a.reference) {
        spec = spec.with_unitaries(read_unitary(u)?, read_unitary(v)?);
    }
    let d = spec.dimension;
    match a.mode.test_mode(d) {
        Some(mode) => spec = spec.with_mode(mode),
        None => {
            return Err(qcert::Error::InvalidParameter(
                "simulate-unitary needs a unitary tester mode".into(),
            ))
        }
    }
    if a.serial {
        spec = spec.serial();
    }
    let report = run_experiment(spec)?;
    emit_report(&a.out, &report)
}

fn cmd_oracle(a: OracleArgs) -> qcert::Result<u8> {
    let rows = oracle_verify(a.seed)?;
    let all = rows.iter().all(|r| r.passed);
    match a.out.format {
        Format::Csv => emit(&a.out, &rows)?,
        Format::Json => {
            let mut text = String::new();
            for r in &rows {
                text.push_str(&json_line(r)?);
            }
            emit_text(&a.out, &text)?;
        }
    }
    let failed = rows.iter().filter(|r| !r.passed).count();
    eprintln!("oracle-verify: {} checks, {} failed", rows.len(), failed);
    Ok(if all { EXIT_PASS } else { EXIT_FAIL })
}

fn cmd_table(a: TableArgs) -> qcert::Result<u8> {
    let table = bounds_table(&a.epsilon, &a.dimension, &a.set_size, &a.delta)?;
    let text = match a.out.format {
        Format::Json => json_line(&table)?,
        Format::Csv => format!("{}\n{}", csv_text(&table.membership)?, csv_text(&table.unitary)?),
    };
    emit_text(&a.out, &text)?;
    Ok(EXIT_PASS)
}

#[derive(Serialize)]
struct GenSummary {
    kind: &'static str,
    files: Vec<PathBuf>,
    dimension: usize,
    set_size: Option<usize>,
    requested: Option<f64>,
    recomputed: Option<f64>,
}

fn cmd_gen(a: GenArgs) -> qcert::Result<u8> {
    let mut rng = trial_rng(a.seed, INSTANCE_STREAM);
    let summary = match a.kind {
        GenKind::StateSet => {
            let set = generate_state_set(a.dimension, a.set_size, a.delta, &mut rng)?;
            write_json(&a.output, &StateSetFile::from_set(&set))?;
            let reread = read_state_set(&a.output)?;
            GenSummary {
                kind: "state-set",
                files: vec![a.output.clone()],
                dimension: a.dimension,
                set_size: Some(a.set_size),
                requested: a.delta,
                recomputed: reread.min_pairwise_distance(),
            }
        }
        GenKind::UnitaryPair => {
            let eps = a
                .epsilon
                .ok_or_else(|| qcert::Error::InvalidParameter("unitary pairs need --epsilon".into()))?;
            let reference = a
                .reference
                .clone()
                .ok_or_else(|| qcert::Error::InvalidParameter("unitary pairs need --reference".into()))?;
            let (u, v) = generate_unitary_pair(a.dimension, eps, &mut rng)?;
            write_json(&a.output, &UnitaryFile::from_unitary(&u))?;
            write_json(&reference, &UnitaryFile::from_unitary(&v))?;
            let dist = unitary_distance(&read_unitary(&a.output)?, &read_unitary(&reference)?)?;
            GenSummary {
                kind: "unitary-pair",
                files: vec![a.output.clone(), reference],
                dimension: a.dimension,
                set_size: None,
                requested: Some(eps),
                recomputed: Some(dist),
            }
        }
    };
    let ok = match (summary.requested, summary.recomputed) {
        (Some(want), Some(got)) => (got - want).abs() <= 1e-6 && got >= want - 1e-9,
        _ => true,
    };
    print!("{}", json_line(&summary)?);
    Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
}

fn ensure_parent(path: &Path) {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            let _ = fs::create_dir_all(dir);
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    for path in match &cli.command {
        Command::Plan(a) => a.out.output.iter().collect::<Vec<_>>(),
        Command::SimulateStateSet(a) => a.out.output.iter().collect(),
        Command::SimulateUnitary(a) => a.out.output.iter().collect(),
        Command::OracleVerify(a) => a.out.output.iter().collect(),
        Command::BoundsTable(a) => a.out.output.iter().collect(),
        Command::GenInstances(a) => std::iter::once(&a.output).chain(a.reference.iter()).collect(),
    } {
        ensure_parent(path);
    }
    let result = match cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::SimulateStateSet(a) => cmd_state_set(a),
        Command::SimulateUnitary(a) => cmd_unitary(a),
        Command::OracleVerify(a) => cmd_oracle(a),
        Command::BoundsTable(a) => cmd_table(a),
        Command::GenInstances(a) => cmd_gen(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
