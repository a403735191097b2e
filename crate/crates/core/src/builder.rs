//! Whole-circuit assembly for both evaluation modes.
//!
//! Gate-saving: one fresh `n`-bit accumulator per multiplication. Space-saving:
//! `r` accumulators reused in waves, each wave computing a run of products and
//! then uncomputing all but the newest.

use serde::{Deserialize, Serialize};

use crate::arith::{
    build_constant_multiplier, build_constant_multiplier_inverse, build_controlled_register_swap,
    build_or_cascade, build_signed_squarer, build_squarer, build_transformation, plan_transformation,
    reg_bits, squarer_ancilla_width, squarer_toffoli,
};
use crate::circuit::{invert, toffoli_count, Circuit, Control, Gate, QubitRef, Role};
use crate::estimator::{qubits_gate_saving, qubits_space_saving};
use crate::numerics::{FixedPoint, FunctionKind, GaussianDomain, Plan, PlanMode};
use crate::{Error, Result};

/// `(r, l, m_un, m_ss)` for `m` compute multiplications.
pub fn schedule_numbers(m: u32) -> (u32, u32, u32, u32) {
    let tri = |k: u32| k * (k + 1) / 2;
    let mut r = 1;
    while tri(r) < m {
        r += 1;
    }
    let slack = tri(r) - m;
    let mut l = 0;
    while tri(l + 1) <= slack {
        l += 1;
    }
    let m_un = tri(r - 1) - tri(l);
    (r, l, m_un, m + m_un)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ScheduleOp {
    /// Slot `dst` (zero) becomes `C_1` through the transformation pair.
    TrickCompute { dst: usize },
    /// `dst = C_{i+1}` from `src = C_i`, controlled by exponent bit `i`.
    Compute { i: u32, src: usize, dst: usize },
    /// Clears `dst = C_{i+1}` using `src = C_i`.
    Uncompute { i: u32, src: usize, dst: usize },
    TrickUncompute { dst: usize },
    /// An uncompute appended only to free a register for the tail.
    ExtraUncompute { i: u32, src: usize, dst: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "slot", rename_all = "snake_case")]
pub enum TailSource {
    NoTail,
    FreeSlot(usize),
    ExtraUncompute(usize),
    Fresh,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceSavingSchedule {
    pub m: u32,
    pub r: u32,
    pub l: u32,
    pub m_un: u32,
    pub m_ss: u32,
    pub ops: Vec<ScheduleOp>,
    pub output_slot: usize,
    pub tail_source: TailSource,
    /// Slots holding zero once the schedule (and any extra uncompute) ends.
    pub free_slots: Vec<usize>,
}

impl SpaceSavingSchedule {
    pub fn computes(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, ScheduleOp::TrickCompute { .. } | ScheduleOp::Compute { .. }))
            .count()
    }

    pub fn uncomputes(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, ScheduleOp::TrickUncompute { .. } | ScheduleOp::Uncompute { .. }))
            .count()
    }

    pub fn has_extra_uncompute(&self) -> bool {
        self.ops.iter().any(|op| matches!(op, ScheduleOp::ExtraUncompute { .. }))
    }
}

/// Wave schedule over `r` slots; the lowest free slot takes the next product.
pub fn schedule_space_saving(m: u32, d_eff: u32) -> Result<SpaceSavingSchedule> {
    if m <= 3 {
        return Err(Error::Unsupported(format!(
            "space-saving needs m > 3 (got m = {m}); use gate-saving"
        )));
    }
    if m > d_eff {
        return Err(Error::Domain(format!("m = {m} exceeds d_eff = {d_eff}")));
    }
    let (r, l, m_un, m_ss) = schedule_numbers(m);
    // holder[k] = slot holding C_k
    let mut holder: Vec<Option<usize>> = vec![None; m as usize + 1];
    let mut occupied = vec![false; r as usize];
    let mut ops = Vec::new();
    let mut computed = 0u32;
    let mut wave = 1u32;
    let take = |occupied: &mut Vec<bool>| -> usize {
        let s = occupied.iter().position(|o| !o).expect("a free slot");
        occupied[s] = true;
        s
    };
    while computed < m {
        let mut this_wave = Vec::new();
        for _ in 0..(r - wave + 1) {
            if computed == m {
                break;
            }
            let dst = take(&mut occupied);
            if computed == 0 {
                ops.push(ScheduleOp::TrickCompute { dst });
            } else {
                let i = computed;
                let src = holder[i as usize].expect("source product present");
                ops.push(ScheduleOp::Compute { i, src, dst });
            }
            computed += 1;
            holder[computed as usize] = Some(dst);
            this_wave.push(computed);
        }
        if computed == m {
            break;
        }
        // uncompute all but the newest, newest first
        for &k in this_wave[..this_wave.len() - 1].iter().rev() {
            let dst = holder[k as usize].take().expect("product present");
            if k == 1 {
                ops.push(ScheduleOp::TrickUncompute { dst });
            } else {
                let src = holder[k as usize - 1].expect("uncompute source present");
                ops.push(ScheduleOp::Uncompute { i: k - 1, src, dst });
            }
            occupied[dst] = false;
        }
        wave += 1;
    }
    let output_slot = holder[m as usize].expect("output present");
    let tri = |k: u32| k * (k + 1) / 2;
    let equality = tri(l) == tri(r) - m;
    let tail_source = if m == d_eff {
        TailSource::NoTail
    } else if let Some(s) = occupied.iter().position(|o| !o) {
        TailSource::FreeSlot(s)
    } else if l > 0 && equality {
        let dst = holder[m as usize - 1].take().expect("C_{m-1} present");
        let src = holder[m as usize - 2].expect("C_{m-2} present");
        ops.push(ScheduleOp::ExtraUncompute { i: m - 2, src, dst });
        occupied[dst] = false;
        TailSource::ExtraUncompute(dst)
    } else {
        TailSource::Fresh
    };
    let free_slots = (0..r as usize).filter(|&s| !occupied[s]).collect();
    let sched = SpaceSavingSchedule { m, r, l, m_un, m_ss, ops, output_slot, tail_source, free_slots };
    assert_eq!(sched.computes() as u32, m);
    assert_eq!(sched.uncomputes() as u32, m_un);
    Ok(sched)
}

/// Which register a basis input is loaded into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    /// Raw domain index (squared in-circuit for the Gaussian).
    Domain,
    /// Exponent register driven directly.
    Exponent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuiltArtifact {
    pub circuit: Circuit,
    pub plan: Plan,
    pub schedule: Option<SpaceSavingSchedule>,
    pub input: InputKind,
    /// Resource-formula qubits plus any squarer registers.
    pub predicted_qubits: usize,
    pub formula_qubits: usize,
    pub tail_present: bool,
    pub squarer_toffoli: usize,
    pub squarer_qubits: usize,
    /// Index of the first gate after the squarer.
    pub core_gate_start: usize,
    /// Registers expected to be all-zero at the end for every input.
    pub clean_registers: Vec<usize>,
}

impl BuiltArtifact {
    /// Toffolis excluding the squarer.
    pub fn core_toffoli(&self) -> usize {
        toffoli_count(&self.circuit.gates[self.core_gate_start..])
    }
}

struct CoreLayout {
    output: usize,
    clean: Vec<usize>,
    schedule: Option<SpaceSavingSchedule>,
}

fn trick_gates(plan: &Plan, x0: QubitRef, reg: &[QubitRef]) -> Result<Vec<Gate>> {
    let k = &plan.constants;
    let zero = FixedPoint::zero(plan.n())?;
    let mut g = build_transformation(&plan_transformation(&zero, &k.c_fp)?, reg, None);
    g.extend(build_transformation(
        &plan_transformation(&k.c_fp, &k.c1_fp)?,
        reg,
        Some(Control::pos(x0)),
    ));
    Ok(g)
}

fn append_tail(c: &mut Circuit, plan: &Plan, x: &[QubitRef], output: usize, zero_reg: usize) -> Result<()> {
    let n = plan.n();
    let high = &x[plan.m as usize..plan.d_eff as usize];
    let or_count = high.len() as u32 - 1;
    let ancillas = if or_count > 0 {
        let id = c.add_register(or_count, Role::OrAncilla, (1u64 << or_count) - 1);
        reg_bits(id, or_count)
    } else {
        vec![]
    };
    let (g, fire) = build_or_cascade(high, &ancillas)?;
    c.extend(g);
    c.extend(build_controlled_register_swap(
        Control::pos(fire),
        &reg_bits(output, n),
        &reg_bits(zero_reg, n),
    )?);
    Ok(())
}

fn gate_saving_core(c: &mut Circuit, plan: &Plan, x: &[QubitRef]) -> Result<CoreLayout> {
    let n = plan.n();
    let m = plan.m as usize;
    let regs: Vec<usize> = (0..m).map(|_| c.add_register(n, Role::ConstantProduct, 0)).collect();
    c.extend(trick_gates(plan, x[0], &reg_bits(regs[0], n))?);
    for k in 1..m {
        c.extend(build_constant_multiplier(
            &plan.constants.a_i[k],
            x[k],
            &reg_bits(regs[k - 1], n),
            &reg_bits(regs[k], n),
        )?);
    }
    let output = regs[m - 1];
    if plan.m < plan.d_eff {
        let zero = c.add_register(n, Role::ZeroAncilla, 0);
        append_tail(c, plan, x, output, zero)?;
    }
    Ok(CoreLayout { output, clean: vec![], schedule: None })
}

fn space_saving_core(c: &mut Circuit, plan: &Plan, x: &[QubitRef]) -> Result<CoreLayout> {
    let n = plan.n();
    let sched = schedule_space_saving(plan.m, plan.d_eff)?;
    let slots: Vec<usize> = (0..sched.r).map(|_| c.add_register(n, Role::ConstantProduct, 0)).collect();
    let bits = |s: usize| reg_bits(slots[s], n);
    let a = &plan.constants.a_i;
    for op in &sched.ops {
        match *op {
            ScheduleOp::TrickCompute { dst } => c.extend(trick_gates(plan, x[0], &bits(dst))?),
            ScheduleOp::TrickUncompute { dst } => c.extend(invert(&trick_gates(plan, x[0], &bits(dst))?)),
            ScheduleOp::Compute { i, src, dst } => {
                c.extend(build_constant_multiplier(&a[i as usize], x[i as usize], &bits(src), &bits(dst))?)
            }
            ScheduleOp::Uncompute { i, src, dst } | ScheduleOp::ExtraUncompute { i, src, dst } => c.extend(
                build_constant_multiplier_inverse(&a[i as usize], x[i as usize], &bits(src), &bits(dst))?,
            ),
        }
    }
    let output = slots[sched.output_slot];
    let zero = match sched.tail_source {
        TailSource::NoTail => None,
        TailSource::FreeSlot(s) | TailSource::ExtraUncompute(s) => Some(slots[s]),
        TailSource::Fresh => Some(c.add_register(n, Role::ZeroAncilla, 0)),
    };
    if let Some(z) = zero {
        append_tail(c, plan, x, output, z)?;
    }
    let clean = sched
        .free_slots
        .iter()
        .map(|&s| slots[s])
        .filter(|&r| Some(r) != zero)
        .collect();
    Ok(CoreLayout { output, clean, schedule: Some(sched) })
}

fn formula_qubits(plan: &Plan) -> usize {
    match plan.mode {
        PlanMode::GateSaving => qubits_gate_saving(plan.n(), plan.d_eff, plan.m),
        PlanMode::SpaceSaving => qubits_space_saving(plan.n(), plan.d_eff, plan.m),
    }
}

fn assemble(plan: &Plan, input: InputKind) -> Result<BuiltArtifact> {
    if plan.mode == PlanMode::SpaceSaving && plan.m <= 3 {
        return Err(Error::Unsupported(format!(
            "space-saving needs m > 3 (got m = {}); use gate-saving",
            plan.m
        )));
    }
    let d_eff = plan.d_eff;
    let mut c = Circuit::new();
    let mut clean = vec![];
    let (squarer_toffoli_count, squarer_qubits) = match input {
        InputKind::Exponent => {
            c.add_register(d_eff, Role::Exponent, 0);
            (0, 0)
        }
        InputKind::Domain => {
            let d = plan.spec.d;
            let signed = plan.spec.gaussian_domain == GaussianDomain::Symmetric;
            let xd = c.add_register(d, Role::Domain, 0);
            let e = c.add_register(d_eff, Role::Exponent, 0);
            let anc_w = squarer_ancilla_width(d, signed);
            let anc = if anc_w > 0 {
                let id = c.add_register(anc_w, Role::ZeroAncilla, 0);
                clean.push(id);
                reg_bits(id, anc_w)
            } else {
                vec![]
            };
            let g = if signed {
                build_signed_squarer(&reg_bits(xd, d), &reg_bits(e, d_eff), &anc)?
            } else {
                build_squarer(&reg_bits(xd, d), &reg_bits(e, d_eff), &anc)?
            };
            c.extend(g);
            (squarer_toffoli(d, signed), (d + anc_w) as usize)
        }
    };
    let core_gate_start = c.gates.len();
    let exp_reg = c
        .registers
        .iter()
        .find(|r| r.role == Role::Exponent)
        .map(|r| r.id)
        .expect("exponent register");
    let x = reg_bits(exp_reg, d_eff);
    let core = match plan.mode {
        PlanMode::GateSaving => gate_saving_core(&mut c, plan, &x)?,
        PlanMode::SpaceSaving => space_saving_core(&mut c, plan, &x)?,
    };
    c.output = core.output;
    clean.extend(core.clean);
    c.validate()?;
    let formula = formula_qubits(plan);
    let predicted = formula + squarer_qubits;
    assert_eq!(c.qubit_count(), predicted, "qubit law violated for {}", plan.triple());
    assert_eq!(toffoli_count(&c.gates[..core_gate_start]), squarer_toffoli_count);
    Ok(BuiltArtifact {
        circuit: c,
        plan: plan.clone(),
        schedule: core.schedule,
        input,
        predicted_qubits: predicted,
        formula_qubits: formula,
        tail_present: plan.m < plan.d_eff,
        squarer_toffoli: squarer_toffoli_count,
        squarer_qubits,
        core_gate_start,
        clean_registers: clean,
    })
}

fn require_mode(plan: &Plan, mode: PlanMode) -> Result<()> {
    if plan.mode != mode {
        return Err(Error::InvalidSpec(format!("plan mode is {}, expected {mode}", plan.mode)));
    }
    Ok(())
}

fn default_input(plan: &Plan) -> InputKind {
    match plan.kind() {
        FunctionKind::Exponential => InputKind::Exponent,
        FunctionKind::Gaussian => InputKind::Domain,
    }
}

pub fn build_gate_saving(plan: &Plan) -> Result<BuiltArtifact> {
    require_mode(plan, PlanMode::GateSaving)?;
    assemble(plan, default_input(plan))
}

pub fn build_space_saving(plan: &Plan) -> Result<BuiltArtifact> {
    require_mode(plan, PlanMode::SpaceSaving)?;
    assemble(plan, default_input(plan))
}

/// Squarer feeding the exponent register, then the core in the plan's mode.
pub fn build_gaussian(plan: &Plan) -> Result<BuiltArtifact> {
    if plan.kind() != FunctionKind::Gaussian {
        return Err(Error::InvalidSpec("build_gaussian needs a Gaussian plan".into()));
    }
    assemble(plan, InputKind::Domain)
}

/// The multiplication core alone, driven by the exponent register.
pub fn build_exponent_core(plan: &Plan) -> Result<BuiltArtifact> {
    assemble(plan, InputKind::Exponent)
}

/// Builds the full circuit for the plan's kind and mode.
pub fn build(plan: &Plan) -> Result<BuiltArtifact> {
    assemble(plan, default_input(plan))
}
