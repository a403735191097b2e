//! Checks built circuits against the oracle and the resource formulas.

use serde::{Deserialize, Serialize};

use crate::builder::{build, BuiltArtifact, InputKind};
use crate::circuit::{count_resources, Simulator};
use crate::estimator::{analytic_circuit_count, reproduce_tables};
use crate::numerics::{Plan, PlanMode};
use crate::oracle::{exponent_trace, pipeline_reference, PipelineTrace};
use crate::sweep;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub x: u64,
    pub expected: u64,
    pub got: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: String,
    pub mode: PlanMode,
    pub inputs: u64,
    pub matches: u64,
    /// First few disagreements, if any.
    pub mismatches: Vec<Mismatch>,
    /// Inputs with a set exponent bit at or above `m`.
    pub zeroing_inputs: u64,
    pub zeroing_ok: bool,
    pub input_preserved: bool,
    pub clean_ok: bool,
}

impl SweepReport {
    pub fn ok(&self) -> bool {
        self.matches == self.inputs && self.zeroing_ok && self.input_preserved && self.clean_ok
    }
}

struct Outcome {
    x: u64,
    expected: PipelineTrace,
    got: u64,
    input_kept: bool,
    clean: bool,
}

pub fn expected_trace(art: &BuiltArtifact, x: u64) -> Result<PipelineTrace> {
    match art.input {
        InputKind::Domain => pipeline_reference(&art.plan, x),
        InputKind::Exponent => exponent_trace(&art.plan, x),
    }
}

/// Simulates every basis input (or the listed ones) and compares the output
/// register with the oracle.
pub fn sweep_artifact(art: &BuiltArtifact, inputs: Option<&[u64]>) -> Result<SweepReport> {
    let sim = Simulator::new(&art.circuit)?;
    let input_reg = art.circuit.input_register();
    let width = sim.input_width();
    let run = |x: u64| -> Result<Outcome> {
        let expected = expected_trace(art, x)?;
        let state = sim.run(x)?;
        Ok(Outcome {
            x,
            got: state[art.circuit.output],
            input_kept: input_reg.is_none_or(|r| state[r] == x),
            clean: art.clean_registers.iter().all(|&r| state[r] == 0),
            expected,
        })
    };
    let outcomes: Vec<Result<Outcome>> = match inputs {
        Some(list) => sweep::map_listed(list, run),
        None => sweep::map_inputs(1u64 << width, run),
    };
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let mut report = SweepReport {
        config: art.plan.triple(),
        mode: art.plan.mode,
        inputs: outcomes.len() as u64,
        matches: 0,
        mismatches: vec![],
        zeroing_inputs: 0,
        zeroing_ok: true,
        input_preserved: true,
        clean_ok: true,
    };
    for o in &outcomes {
        if o.got == o.expected.final_value {
            report.matches += 1;
        } else if report.mismatches.len() < 8 {
            report.mismatches.push(Mismatch { x: o.x, expected: o.expected.final_value, got: o.got });
        }
        if o.expected.tail_zeroed {
            report.zeroing_inputs += 1;
            report.zeroing_ok &= o.got == 0;
        }
        report.input_preserved &= o.input_kept;
        report.clean_ok &= o.clean;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountBridge {
    pub config: String,
    pub mode: PlanMode,
    pub analytic_toffoli: u64,
    pub counted_toffoli: u64,
    pub squarer_toffoli: u64,
    pub predicted_qubits: usize,
    pub counted_qubits: usize,
    pub ok: bool,
}

/// Exact analytic count vs. gates actually emitted (squarer excluded).
pub fn count_bridge(art: &BuiltArtifact) -> Result<CountBridge> {
    let analytic = analytic_circuit_count(&art.plan, art.plan.mode)?;
    let counted = art.core_toffoli() as u64;
    let qubits = count_resources(&art.circuit).qubits;
    Ok(CountBridge {
        config: art.plan.triple(),
        mode: art.plan.mode,
        analytic_toffoli: analytic,
        counted_toffoli: counted,
        squarer_toffoli: art.squarer_toffoli as u64,
        predicted_qubits: art.predicted_qubits,
        counted_qubits: qubits,
        ok: analytic == counted && qubits == art.predicted_qubits,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub sweeps: Vec<SweepReport>,
    pub bridges: Vec<CountBridge>,
    /// Space-saving is skipped for `m <= 3`.
    pub skipped_modes: Vec<PlanMode>,
    pub tables_ok: bool,
    pub ok: bool,
}

/// Builds the plan in every applicable mode, sweeps it, checks the count
/// bridge and reproduces the reference tables.
pub fn verify_plan(plan: &Plan, inputs: Option<&[u64]>) -> Result<VerifyReport> {
    let mut sweeps = vec![];
    let mut bridges = vec![];
    let mut skipped = vec![];
    for mode in [PlanMode::GateSaving, PlanMode::SpaceSaving] {
        let p = plan.with_mode(mode);
        let art = match build(&p) {
            Ok(a) => a,
            Err(Error::Unsupported(_)) if mode == PlanMode::SpaceSaving => {
                skipped.push(mode);
                continue;
            }
            Err(e) => return Err(e),
        };
        sweeps.push(sweep_artifact(&art, inputs)?);
        bridges.push(count_bridge(&art)?);
    }
    let tables_ok = reproduce_tables()?.ok;
    let ok = tables_ok && sweeps.iter().all(SweepReport::ok) && bridges.iter().all(|b| b.ok);
    Ok(VerifyReport { sweeps, bridges, skipped_modes: skipped, tables_ok, ok })
}
