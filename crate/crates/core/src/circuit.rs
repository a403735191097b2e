//! Reversible circuit IR over NOT / CNOT / CCNOT / CSWAP, with resource
//! counting, a register-level simulator and text/JSON export.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::numerics::MAX_WIDTH;
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QubitRef {
    pub reg: usize,
    pub bit: u32,
}

impl QubitRef {
    pub fn new(reg: usize, bit: u32) -> Self {
        Self { reg, bit }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Control {
    pub reg: usize,
    pub bit: u32,
    /// Fires on `|0>` instead of `|1>`.
    #[serde(default)]
    pub neg: bool,
}

impl Control {
    pub fn pos(q: QubitRef) -> Self {
        Self { reg: q.reg, bit: q.bit, neg: false }
    }

    pub fn neg(q: QubitRef) -> Self {
        Self { reg: q.reg, bit: q.bit, neg: true }
    }

    pub fn qubit(&self) -> QubitRef {
        QubitRef::new(self.reg, self.bit)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Not,
    Cnot,
    Ccnot,
    Cswap,
}

impl GateKind {
    fn arity(self) -> (usize, usize) {
        match self {
            GateKind::Not => (0, 1),
            GateKind::Cnot => (1, 1),
            GateKind::Ccnot => (2, 1),
            GateKind::Cswap => (1, 2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Not => "NOT",
            GateKind::Cnot => "CNOT",
            GateKind::Ccnot => "CCNOT",
            GateKind::Cswap => "CSWAP",
        }
    }

    pub fn toffoli_cost(self) -> usize {
        match self {
            GateKind::Ccnot | GateKind::Cswap => 1,
            GateKind::Not | GateKind::Cnot => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    #[serde(default)]
    pub controls: Vec<Control>,
    pub targets: Vec<QubitRef>,
}

impl Gate {
    pub fn not(t: QubitRef) -> Self {
        Self { kind: GateKind::Not, controls: vec![], targets: vec![t] }
    }

    pub fn cnot(c: Control, t: QubitRef) -> Self {
        Self { kind: GateKind::Cnot, controls: vec![c], targets: vec![t] }
    }

    pub fn ccnot(c1: Control, c2: Control, t: QubitRef) -> Self {
        Self { kind: GateKind::Ccnot, controls: vec![c1, c2], targets: vec![t] }
    }

    /// Toffoli with two positive controls.
    pub fn toffoli(c1: QubitRef, c2: QubitRef, t: QubitRef) -> Self {
        Self::ccnot(Control::pos(c1), Control::pos(c2), t)
    }

    pub fn cswap(c: Control, a: QubitRef, b: QubitRef) -> Self {
        Self { kind: GateKind::Cswap, controls: vec![c], targets: vec![a, b] }
    }

    pub fn qubits(&self) -> impl Iterator<Item = QubitRef> + '_ {
        self.controls
            .iter()
            .map(Control::qubit)
            .chain(self.targets.iter().copied())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Domain,
    Exponent,
    ConstantProduct,
    ZeroAncilla,
    OrAncilla,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub id: usize,
    pub width: u32,
    pub role: Role,
    #[serde(default)]
    pub init: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    pub format_version: u32,
    pub registers: Vec<Register>,
    pub gates: Vec<Gate>,
    pub output: usize,
}

impl Default for Circuit {
    fn default() -> Self {
        Self::new()
    }
}

impl Circuit {
    pub fn new() -> Self {
        Self { format_version: FORMAT_VERSION, registers: vec![], gates: vec![], output: 0 }
    }

    /// Allocates a register and returns its id.
    pub fn add_register(&mut self, width: u32, role: Role, init: u64) -> usize {
        let id = self.registers.len();
        self.registers.push(Register { id, width, role, init });
        id
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) {
        self.gates.extend(gates);
    }

    pub fn register(&self, id: usize) -> &Register {
        &self.registers[id]
    }

    pub fn qubit_count(&self) -> usize {
        self.registers.iter().map(|r| r.width as usize).sum()
    }

    /// The register a basis input is loaded into: the domain register if
    /// there is one, otherwise the exponent register.
    pub fn input_register(&self) -> Option<usize> {
        let find = |role| self.registers.iter().find(|r| r.role == role).map(|r| r.id);
        find(Role::Domain).or_else(|| find(Role::Exponent))
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format_version {}",
                self.format_version
            )));
        }
        for (i, r) in self.registers.iter().enumerate() {
            if r.id != i {
                return Err(Error::Structural(format!("register at index {i} has id {}", r.id)));
            }
            if r.width < 1 || r.width > MAX_WIDTH {
                return Err(Error::Structural(format!("register {i} has width {}", r.width)));
            }
            if r.init >> r.width != 0 {
                return Err(Error::Structural(format!(
                    "register {i} init {} exceeds width {}",
                    r.init, r.width
                )));
            }
            if r.role == Role::OrAncilla && r.init != (1u64 << r.width) - 1 {
                return Err(Error::Structural(format!("OR ancilla register {i} must start as all ones")));
            }
        }
        if self.output >= self.registers.len() {
            return Err(Error::Structural(format!("output register {} not allocated", self.output)));
        }
        for (g, gate) in self.gates.iter().enumerate() {
            self.validate_gate(gate)
                .map_err(|e| Error::Structural(format!("gate {g}: {e}")))?;
        }
        Ok(())
    }

    fn validate_gate(&self, gate: &Gate) -> std::result::Result<(), String> {
        let (nc, nt) = gate.kind.arity();
        if gate.controls.len() != nc || gate.targets.len() != nt {
            return Err(format!(
                "{} needs {nc} controls and {nt} targets, got {} and {}",
                gate.kind.name(),
                gate.controls.len(),
                gate.targets.len()
            ));
        }
        let mut seen = Vec::with_capacity(3);
        for q in gate.qubits() {
            let reg = self
                .registers
                .get(q.reg)
                .ok_or_else(|| format!("register {} not allocated", q.reg))?;
            if q.bit >= reg.width {
                return Err(format!("bit {} out of range for register {}", q.bit, q.reg));
            }
            if seen.contains(&q) {
                return Err(format!("qubit r{}[{}] used twice", q.reg, q.bit));
            }
            seen.push(q);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceCount {
    pub toffoli: usize,
    pub qubits: usize,
    pub by_kind: BTreeMap<String, usize>,
}

pub fn count_gates(gates: &[Gate]) -> ResourceCount {
    let mut out = ResourceCount::default();
    for g in gates {
        out.toffoli += g.kind.toffoli_cost();
        *out.by_kind.entry(g.kind.name().to_string()).or_default() += 1;
    }
    out
}

pub fn toffoli_count(gates: &[Gate]) -> usize {
    gates.iter().map(|g| g.kind.toffoli_cost()).sum()
}

pub fn count_resources(c: &Circuit) -> ResourceCount {
    let mut out = count_gates(&c.gates);
    out.qubits = c.qubit_count();
    out
}

/// Every gate kind here is self-inverse, so the inverse is the reversal.
pub fn invert(gates: &[Gate]) -> Vec<Gate> {
    gates.iter().rev().cloned().collect()
}

#[derive(Clone, Copy, Debug)]
struct Ctl {
    reg: u32,
    mask: u64,
    want: u64,
}

impl Ctl {
    #[inline(always)]
    fn fires(&self, state: &[u64]) -> bool {
        state[self.reg as usize] & self.mask == self.want
    }
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Not { reg: u32, mask: u64 },
    Cnot { c: Ctl, reg: u32, mask: u64 },
    Ccnot { c1: Ctl, c2: Ctl, reg: u32, mask: u64 },
    Cswap { c: Ctl, ra: u32, ma: u64, rb: u32, mb: u64 },
}

/// A validated circuit lowered to mask operations on whole-register words.
#[derive(Clone, Debug)]
pub struct Simulator {
    ops: Vec<Op>,
    init: Vec<u64>,
    widths: Vec<u32>,
    input: Option<usize>,
    output: usize,
}

fn lower_ctl(c: &Control) -> Ctl {
    let mask = 1u64 << c.bit;
    Ctl { reg: c.reg as u32, mask, want: if c.neg { 0 } else { mask } }
}

fn lower(g: &Gate) -> Op {
    let t = |q: &QubitRef| (q.reg as u32, 1u64 << q.bit);
    match g.kind {
        GateKind::Not => {
            let (reg, mask) = t(&g.targets[0]);
            Op::Not { reg, mask }
        }
        GateKind::Cnot => {
            let (reg, mask) = t(&g.targets[0]);
            Op::Cnot { c: lower_ctl(&g.controls[0]), reg, mask }
        }
        GateKind::Ccnot => {
            let (reg, mask) = t(&g.targets[0]);
            Op::Ccnot { c1: lower_ctl(&g.controls[0]), c2: lower_ctl(&g.controls[1]), reg, mask }
        }
        GateKind::Cswap => {
            let (ra, ma) = t(&g.targets[0]);
            let (rb, mb) = t(&g.targets[1]);
            Op::Cswap { c: lower_ctl(&g.controls[0]), ra, ma, rb, mb }
        }
    }
}

impl Simulator {
    pub fn new(c: &Circuit) -> Result<Self> {
        c.validate()?;
        Ok(Self {
            ops: c.gates.iter().map(lower).collect(),
            init: c.registers.iter().map(|r| r.init).collect(),
            widths: c.registers.iter().map(|r| r.width).collect(),
            input: c.input_register(),
            output: c.output,
        })
    }

    pub fn initial_state(&self) -> Vec<u64> {
        self.init.clone()
    }

    /// Applies every gate to `state` in order.
    pub fn apply(&self, state: &mut [u64]) {
        for op in &self.ops {
            match *op {
                Op::Not { reg, mask } => state[reg as usize] ^= mask,
                Op::Cnot { c, reg, mask } => {
                    if c.fires(state) {
                        state[reg as usize] ^= mask;
                    }
                }
                Op::Ccnot { c1, c2, reg, mask } => {
                    if c1.fires(state) && c2.fires(state) {
                        state[reg as usize] ^= mask;
                    }
                }
                Op::Cswap { c, ra, ma, rb, mb } => {
                    if c.fires(state) {
                        let a = state[ra as usize] & ma != 0;
                        let b = state[rb as usize] & mb != 0;
                        if a != b {
                            state[ra as usize] ^= ma;
                            state[rb as usize] ^= mb;
                        }
                    }
                }
            }
        }
    }

    /// Runs from the initial state with `input` loaded into the input register.
    pub fn run(&self, input: u64) -> Result<Vec<u64>> {
        let mut state = self.init.clone();
        if let Some(reg) = self.input {
            let width = self.widths[reg];
            if input >> width != 0 {
                return Err(Error::Domain(format!(
                    "input {input} does not fit the {width}-bit input register"
                )));
            }
            state[reg] = input;
        } else if input != 0 {
            return Err(Error::Domain("circuit has no input register".into()));
        }
        self.apply(&mut state);
        Ok(state)
    }

    pub fn run_output(&self, input: u64) -> Result<u64> {
        Ok(self.run(input)?[self.output])
    }

    pub fn input_width(&self) -> u32 {
        self.input.map_or(0, |r| self.widths[r])
    }
}

/// Final value of every register, keyed by register id.
pub fn simulate(c: &Circuit, domain_value: u64) -> Result<BTreeMap<usize, u64>> {
    let state = Simulator::new(c)?.run(domain_value)?;
    Ok(state.into_iter().enumerate().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Json,
    QasmLike,
}

pub fn export(c: &Circuit, format: ExportFormat) -> String {
    match format {
        ExportFormat::Json => to_json(c),
        ExportFormat::QasmLike => to_qasm_like(c),
    }
}

pub fn to_json(c: &Circuit) -> String {
    serde_json::to_string(c).expect("circuit serializes")
}

pub fn from_json(text: &str) -> Result<Circuit> {
    let c: Circuit =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("circuit JSON: {e}")))?;
    c.validate()?;
    Ok(c)
}

fn role_name(role: Role) -> &'static str {
    match role {
        Role::Domain => "domain",
        Role::Exponent => "exponent",
        Role::ConstantProduct => "constant_product",
        Role::ZeroAncilla => "zero_ancilla",
        Role::OrAncilla => "or_ancilla",
    }
}

/// One gate per line. Negative controls appear as explicit `x` lines on
/// either side of the gate.
pub fn to_qasm_like(c: &Circuit) -> String {
    let q = |r: usize, b: u32| format!("r{r}[{b}]");
    let mut out = String::new();
    let _ = writeln!(out, "// qexp format_version {}", c.format_version);
    for r in &c.registers {
        let _ = writeln!(out, "qreg r{}[{}]; // {} init={}", r.id, r.width, role_name(r.role), r.init);
    }
    let _ = writeln!(out, "// output r{}", c.output);
    for g in &c.gates {
        let negs: Vec<&Control> = g.controls.iter().filter(|c| c.neg).collect();
        for n in &negs {
            let _ = writeln!(out, "x {}; // neg", q(n.reg, n.bit));
        }
        let mnemonic = match g.kind {
            GateKind::Not => "x",
            GateKind::Cnot => "cx",
            GateKind::Ccnot => "ccx",
            GateKind::Cswap => "cswap",
        };
        let args: Vec<String> = g
            .controls
            .iter()
            .map(|c| q(c.reg, c.bit))
            .chain(g.targets.iter().map(|t| q(t.reg, t.bit)))
            .collect();
        let _ = writeln!(out, "{mnemonic} {};", args.join(", "));
        for n in negs.iter().rev() {
            let _ = writeln!(out, "x {}; // neg", q(n.reg, n.bit));
        }
    }
    out
}
