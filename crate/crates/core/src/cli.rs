//! Command-line front end.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::builder::build;
use crate::circuit::{count_resources, export, ExportFormat};
use crate::estimator::{analytic_circuit_count, estimate, reproduce_tables};
use crate::numerics::{make_plan, FunctionKind, GaussianDomain, Plan, PlanMode, ProblemSpec, Real};
use crate::oracle::error_report;
use crate::verify::{count_bridge, sweep_artifact, verify_plan};
use crate::{Error, Result};

pub const REPORT_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "qexp", version, about = "Reversible circuits for exp(-a x) and exp(-a x^2)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Derive constants and the multiplication count.
    Plan(Common),
    /// Closed-form and exact Toffoli/qubit estimates for both modes.
    Estimate(Common),
    /// Build a circuit and compare measured with predicted counts.
    Build(Common),
    /// Simulate basis inputs against the reference.
    Simulate(Common),
    /// Reproduce the published resource tables.
    Tables(Output),
    /// Build, simulate, count-check and reproduce tables in one pass.
    Verify(Common),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FunctionArg {
    Exponential,
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    GateSaving,
    SpaceSaving,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Text,
    QasmLike,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
    /// Write here instead of stdout (the circuit file for `build`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Omit the generation timestamp.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long, value_enum, default_value = "exponential")]
    pub function: FunctionArg,
    #[arg(long, default_value = "1")]
    pub alpha: String,
    #[arg(long, default_value = "0")]
    pub xmin: String,
    #[arg(long)]
    pub xmax: Option<String>,
    /// Domain qubits.
    #[arg(long)]
    pub d: Option<u32>,
    /// Range qubits.
    #[arg(long)]
    pub n: Option<u32>,
    /// Gaussian only: two's-complement domain, exponent width 2d - 1.
    #[arg(long)]
    pub symmetric: bool,
    #[arg(long, value_enum, default_value = "gate-saving")]
    pub mode: ModeArg,
    #[arg(long)]
    pub m_override: Option<u32>,
    /// Comma-separated basis inputs for `simulate`.
    #[arg(long, value_delimiter = ',')]
    pub inputs: Option<Vec<u64>>,
    #[command(flatten)]
    pub output: Output,
}

impl From<ModeArg> for PlanMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::GateSaving => PlanMode::GateSaving,
            ModeArg::SpaceSaving => PlanMode::SpaceSaving,
        }
    }
}

impl Common {
    fn has_spec(&self) -> bool {
        self.xmax.is_some() || self.d.is_some() || self.n.is_some()
    }

    pub fn spec(&self) -> Result<ProblemSpec> {
        let missing = |f: &str| Error::InvalidSpec(format!("--{f} is required"));
        let xmax = Real::parse(self.xmax.as_deref().ok_or_else(|| missing("xmax"))?)?;
        let d = self.d.ok_or_else(|| missing("d"))?;
        let n = self.n.ok_or_else(|| missing("n"))?;
        let alpha = Real::parse(&self.alpha)?;
        let x_min = Real::parse(&self.xmin)?;
        let spec = ProblemSpec {
            kind: match self.function {
                FunctionArg::Exponential => FunctionKind::Exponential,
                FunctionArg::Gaussian => FunctionKind::Gaussian,
            },
            alpha,
            x_min,
            x_max: xmax,
            d,
            n,
            gaussian_domain: if self.symmetric { GaussianDomain::Symmetric } else { GaussianDomain::Full },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn plan(&self) -> Result<Plan> {
        make_plan(&self.spec()?, self.mode.into(), self.m_override)
    }
}

/// What a command produced: an exit code and the report to emit.
pub struct Outcome {
    pub code: i32,
    pub report: Value,
    pub text: Option<String>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn envelope(command: &str, body: Value, output: &Output) -> Value {
    let mut v = json!({ "report_version": REPORT_VERSION, "command": command });
    if !output.no_timestamp {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        v["generated_at_unix"] = json!(secs);
    }
    if let (Value::Object(dst), Value::Object(src)) = (&mut v, body) {
        dst.extend(src);
    }
    v
}

fn plan_summary(plan: &Plan) -> Value {
    let k = &plan.constants;
    json!({
        "spec": to_value(&plan.spec),
        "d_eff": plan.d_eff,
        "m": plan.m,
        "m_planned": plan.m_planned,
        "delta": k.delta,
        "a": k.a_real,
        "c": k.c_real,
        "a_max": plan.a_max,
        "a_i": k.a_i.iter().map(|a| a.bit_string()).collect::<Vec<_>>(),
        "c_fp": k.c_fp.bit_string(),
        "c1_fp": k.c1_fp.bit_string(),
    })
}

fn mode_estimate(plan: &Plan, mode: PlanMode) -> Value {
    match estimate(plan, mode) {
        Ok(e) => json!({
            "toffoli": e.toffoli,
            "qubits": e.qubits,
            "toffoli_exact": e.toffoli_exact,
            "terms": e.terms,
            "analytic_toffoli": analytic_circuit_count(plan, mode).ok(),
        }),
        Err(err) => json!({ "unavailable": err.to_string() }),
    }
}

fn cmd_plan(c: &Common) -> Result<Outcome> {
    let plan = c.plan()?;
    let mut body = plan_summary(&plan);
    body["recommended_mode"] = json!(PlanMode::GateSaving);
    body["predicted"] = json!({
        "gate_saving": mode_estimate(&plan, PlanMode::GateSaving),
        "space_saving": mode_estimate(&plan, PlanMode::SpaceSaving),
    });
    Ok(Outcome { code: EXIT_OK, report: envelope("plan", body, &c.output), text: None })
}

fn cmd_estimate(c: &Common) -> Result<Outcome> {
    let plan = c.plan()?;
    let body = json!({
        "config": plan.triple(),
        "gate_saving": mode_estimate(&plan, PlanMode::GateSaving),
        "space_saving": mode_estimate(&plan, PlanMode::SpaceSaving),
    });
    Ok(Outcome { code: EXIT_OK, report: envelope("estimate", body, &c.output), text: None })
}

fn cmd_build(c: &Common) -> Result<Outcome> {
    let plan = c.plan()?;
    let art = build(&plan)?;
    let counts = count_resources(&art.circuit);
    let bridge = count_bridge(&art)?;
    let formula = estimate(&plan, plan.mode)?;
    if let Some(path) = &c.output.out {
        let format = match c.output.format {
            FormatArg::Json => ExportFormat::Json,
            FormatArg::Text | FormatArg::QasmLike => ExportFormat::QasmLike,
        };
        std::fs::write(path, export(&art.circuit, format))
            .map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display())))?;
    }
    let body = json!({
        "config": plan.triple(),
        "mode": plan.mode,
        "circuit_file": c.output.out.as_ref().map(|p| p.display().to_string()),
        "measured": {
            "toffoli_core": bridge.counted_toffoli,
            "toffoli_squarer": art.squarer_toffoli,
            "toffoli_total": counts.toffoli,
            "qubits": counts.qubits,
            "by_kind": counts.by_kind,
        },
        "predicted": {
            "formula_toffoli": formula.toffoli,
            "analytic_toffoli": bridge.analytic_toffoli,
            "formula_qubits": art.formula_qubits,
            "qubits": art.predicted_qubits,
        },
        "schedule": art.schedule,
        "status": if bridge.ok { "ok" } else { "mismatch" },
    });
    let code = if bridge.ok { EXIT_OK } else { EXIT_MISMATCH };
    let mut output = c.output.clone();
    output.out = None;
    Ok(Outcome { code, report: envelope("build", body, &output), text: None })
}

fn cmd_simulate(c: &Common) -> Result<Outcome> {
    let plan = c.plan()?;
    let art = build(&plan)?;
    let inputs = c.inputs.as_deref();
    let sweep = sweep_artifact(&art, inputs)?;
    let mut body = json!({ "config": plan.triple(), "sweep": to_value(&sweep), "ok": sweep.ok() });
    if let Some(list) = inputs {
        let sim = crate::circuit::Simulator::new(&art.circuit)?;
        let mut rows = vec![];
        for &x in list {
            let out = sim.run_output(x)?;
            rows.push(json!({ "x": x, "output": out, "expected": crate::verify::expected_trace(&art, x)?.final_value }));
        }
        body["outputs"] = json!(rows);
    } else {
        body["error"] = to_value(&error_report(&plan)?);
    }
    let code = if sweep.ok() { EXIT_OK } else { EXIT_MISMATCH };
    Ok(Outcome { code, report: envelope("simulate", body, &c.output), text: None })
}

fn cmd_tables(o: &Output) -> Result<Outcome> {
    let report = reproduce_tables()?;
    let code = if report.ok { EXIT_OK } else { EXIT_MISMATCH };
    let text = report.to_text();
    Ok(Outcome { code, report: envelope("tables", to_value(&report), o), text: Some(text) })
}

/// Configurations checked by `verify` when no spec is given.
pub fn default_verify_plans() -> Result<Vec<Plan>> {
    let gs = PlanMode::GateSaving;
    Ok(vec![
        make_plan(&ProblemSpec::exponential(1u32, 0u32, 10u32, 7, 21), gs, None)?,
        make_plan(&ProblemSpec::exponential(1u32, 0u32, 100u32, 7, 21), gs, None)?,
        make_plan(&ProblemSpec::gaussian(1u32, 10u32, 7, 24, GaussianDomain::Symmetric), gs, None)?,
        make_plan(&ProblemSpec::gaussian(1u32, 100u32, 7, 24, GaussianDomain::Symmetric), gs, Some(4))?,
    ])
}

fn cmd_verify(c: &Common) -> Result<Outcome> {
    let plans = if c.has_spec() { vec![c.plan()?] } else { default_verify_plans()? };
    let mut runs = vec![];
    let mut ok = true;
    for plan in &plans {
        let r = verify_plan(plan, c.inputs.as_deref())?;
        let err = error_report(plan)?;
        ok &= r.ok && err.within_envelope;
        runs.push(json!({ "config": plan.triple(), "verify": to_value(&r), "error": to_value(&err) }));
    }
    let body = json!({ "runs": runs, "ok": ok });
    let code = if ok { EXIT_OK } else { EXIT_MISMATCH };
    Ok(Outcome { code, report: envelope("verify", body, &c.output), text: None })
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Plan(c) => cmd_plan(c),
        Command::Estimate(c) => cmd_estimate(c),
        Command::Build(c) => cmd_build(c),
        Command::Simulate(c) => cmd_simulate(c),
        Command::Tables(o) => cmd_tables(o),
        Command::Verify(c) => cmd_verify(c),
    }
}

fn output_of(cli: &Cli) -> &Output {
    match &cli.command {
        Command::Plan(c) | Command::Estimate(c) | Command::Build(c) | Command::Simulate(c) | Command::Verify(c) => {
            &c.output
        }
        Command::Tables(o) => o,
    }
}

fn render(outcome: &Outcome, format: FormatArg) -> String {
    match (format, &outcome.text) {
        (FormatArg::Text, Some(t)) => t.clone(),
        (FormatArg::Text, None) => text_lines(&outcome.report, ""),
        _ => serde_json::to_string_pretty(&outcome.report).expect("report serializes") + "\n",
    }
}

fn text_lines(v: &Value, prefix: &str) -> String {
    match v {
        Value::Object(map) => map
            .iter()
            .map(|(k, v)| {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                text_lines(v, &key)
            })
            .collect(),
        Value::Array(items) if items.iter().any(|i| i.is_object()) => items
            .iter()
            .enumerate()
            .map(|(i, v)| text_lines(v, &format!("{prefix}[{i}]")))
            .collect(),
        other => format!("{prefix}: {other}\n"),
    }
}

/// Runs a parsed command, writing output, and returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let output = output_of(cli);
    match execute(cli) {
        Ok(outcome) => {
            let rendered = render(&outcome, output.format);
            let to_file = !matches!(cli.command, Command::Build(_));
            match (&output.out, to_file) {
                (Some(path), true) => {
                    if let Err(e) = std::fs::write(path, &rendered) {
                        return fail(&Error::Format(format!("cannot write {}: {e}", path.display())));
                    }
                }
                _ => print!("{rendered}"),
            }
            outcome.code
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> i32 {
    let v = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
    eprintln!("{v}");
    match e {
        Error::Domain(_) | Error::InvalidSpec(_) | Error::Unsupported(_) | Error::Format(_) => EXIT_INVALID,
        Error::Structural(_) => EXIT_MISMATCH,
    }
}
