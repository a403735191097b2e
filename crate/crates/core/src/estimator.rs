//! Closed-form Toffoli and qubit counts, exact per-constant counting, and
//! reproduction of the published reference tables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arith::multiplier_toffoli;
use crate::builder::{schedule_numbers, schedule_space_saving, ScheduleOp};
use crate::numerics::{Plan, PlanMode};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormulaEstimate {
    pub toffoli: u64,
    pub toffoli_exact: f64,
    pub qubits: usize,
    pub terms: BTreeMap<String, f64>,
}

/// Average Toffoli cost of the additions in one multiplication:
/// half of `sum_{s=2}^{n-1} (3s + 3)`.
pub fn per_multiplication(n: u32) -> f64 {
    let n = n as f64;
    0.75 * n * n + 0.75 * n - 4.5
}

/// `sum_{s=2}^{n-1} (3s + 3)`.
pub fn full_addition_sum(n: u32) -> u64 {
    (2..n as u64).map(|s| 3 * s + 3).sum()
}

/// Uncompute savings `S = 2 * 2^-dm - 2^-2dm / 3`, in multiplications.
pub fn uncompute_savings(delta_m: u32) -> f64 {
    let h = 0.5f64.powi(delta_m as i32);
    2.0 * h - h * h / 3.0
}

fn finish(terms: BTreeMap<String, f64>, qubits: usize) -> FormulaEstimate {
    let total: f64 = terms.values().sum();
    FormulaEstimate { toffoli: total.round() as u64, toffoli_exact: total, qubits, terms }
}

fn tail_terms(terms: &mut BTreeMap<String, f64>, n: u32, d_eff: u32, m: u32) {
    if m < d_eff {
        terms.insert("tail_or".into(), (d_eff - m - 1) as f64);
        terms.insert("tail_swap".into(), n as f64);
    }
}

pub fn qubits_gate_saving(n: u32, d_eff: u32, m: u32) -> usize {
    let (n, d, m) = (n as usize, d_eff as usize, m as usize);
    if m == d {
        d * n + d
    } else {
        (m + 1) * n + 2 * d - m - 1
    }
}

pub fn qubits_space_saving(n: u32, d_eff: u32, m: u32) -> usize {
    let (r, _, _, _) = schedule_numbers(m);
    let (n, d, m, r) = (n as usize, d_eff as usize, m as usize, r as usize);
    if m == d {
        r * n + d
    } else if m == r * (r + 1) / 2 {
        (r + 1) * n + 2 * d - m - 1
    } else {
        r * n + 2 * d - m - 1
    }
}

fn check_range(d_eff: u32, m: u32) -> Result<()> {
    if m < 1 || m > d_eff {
        return Err(Error::Domain(format!("need 1 <= m <= d_eff, got m = {m}, d_eff = {d_eff}")));
    }
    Ok(())
}

pub fn estimate_gate_saving(n: u32, d_eff: u32, m: u32) -> Result<FormulaEstimate> {
    check_range(d_eff, m)?;
    let b = per_multiplication(n);
    let mults = (m - 1) as f64;
    let mut terms = BTreeMap::new();
    terms.insert("addition_sum".into(), mults * b);
    terms.insert("leading_zero_savings".into(), -5.0 / 3.0 * b);
    terms.insert("cascades".into(), mults * (n + 2) as f64);
    tail_terms(&mut terms, n, d_eff, m);
    Ok(finish(terms, qubits_gate_saving(n, d_eff, m)))
}

pub fn estimate_space_saving(n: u32, d_eff: u32, m: u32) -> Result<FormulaEstimate> {
    check_range(d_eff, m)?;
    if m <= 3 {
        return Err(Error::Unsupported(format!("space-saving needs m > 3, got {m}")));
    }
    let (r, l, m_un, m_ss) = schedule_numbers(m);
    let b = per_multiplication(n);
    let mults = (m_ss - 2) as f64;
    let mut terms = BTreeMap::new();
    terms.insert("addition_sum".into(), mults * b);
    terms.insert("leading_zero_savings".into(), -5.0 / 3.0 * b);
    terms.insert("uncompute_savings".into(), -uncompute_savings(m - m_un) * b);
    terms.insert("cascades".into(), mults * (n + 2) as f64);
    tail_terms(&mut terms, n, d_eff, m);
    if m < d_eff && l > 0 && l * (l + 1) / 2 == r * (r + 1) / 2 - m {
        terms.insert("extra_uncompute".into(), 9.0 / 16.0 * b + (n + 2) as f64);
    }
    Ok(finish(terms, qubits_space_saving(n, d_eff, m)))
}

pub fn toffoli_gate_saving(n: u32, d_eff: u32, m: u32) -> Result<u64> {
    Ok(estimate_gate_saving(n, d_eff, m)?.toffoli)
}

pub fn toffoli_space_saving(n: u32, d_eff: u32, m: u32) -> Result<u64> {
    Ok(estimate_space_saving(n, d_eff, m)?.toffoli)
}

pub fn estimate(plan: &Plan, mode: PlanMode) -> Result<FormulaEstimate> {
    match mode {
        PlanMode::GateSaving => estimate_gate_saving(plan.n(), plan.d_eff, plan.m),
        PlanMode::SpaceSaving => estimate_space_saving(plan.n(), plan.d_eff, plan.m),
    }
}

/// Exact Toffoli count of the core circuit (no squarer) from the constants'
/// bit patterns and the schedule.
pub fn analytic_circuit_count(plan: &Plan, mode: PlanMode) -> Result<u64> {
    let a = &plan.constants.a_i;
    let mut total = 0usize;
    match mode {
        PlanMode::GateSaving => {
            for c in &a[1..plan.m as usize] {
                total += multiplier_toffoli(c)?;
            }
        }
        PlanMode::SpaceSaving => {
            let sched = schedule_space_saving(plan.m, plan.d_eff)?;
            for op in &sched.ops {
                match *op {
                    ScheduleOp::Compute { i, .. }
                    | ScheduleOp::Uncompute { i, .. }
                    | ScheduleOp::ExtraUncompute { i, .. } => total += multiplier_toffoli(&a[i as usize])?,
                    ScheduleOp::TrickCompute { .. } | ScheduleOp::TrickUncompute { .. } => {}
                }
            }
        }
    }
    if plan.m < plan.d_eff {
        total += (plan.d_eff - plan.m - 1) as usize + plan.n() as usize;
    }
    Ok(total as u64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table1Row {
    pub m: u32,
    pub r: u32,
    pub m_un: u32,
    pub m_ss_minus_2: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table2Row {
    pub function: String,
    pub mode: PlanMode,
    pub x_max: u32,
    pub accuracy: String,
    pub n: u32,
    pub d: u32,
    pub m: u32,
    pub toffoli: u64,
    pub qubits: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HaenerRow {
    pub function: String,
    pub accuracy: String,
    pub toffoli: u64,
    pub qubits: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceTables {
    pub format_version: u32,
    pub table1: Vec<Table1Row>,
    pub table2: Vec<Table2Row>,
    pub haener: Vec<HaenerRow>,
    pub inverse_sqrt_toffoli: u64,
}

const REFERENCE_JSON: &str = include_str!("../data/reference_tables.json");

pub fn reference_tables() -> ReferenceTables {
    serde_json::from_str(REFERENCE_JSON).expect("embedded reference tables parse")
}

/// Table I row recomputed from the schedule arithmetic.
pub fn table1_row(m: u32) -> Table1Row {
    let (r, _, m_un, m_ss) = schedule_numbers(m);
    Table1Row { m, r, m_un, m_ss_minus_2: m_ss - 2 }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Pass,
    Fail,
    /// Differs from the publication for a documented reason.
    Flagged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub table: String,
    pub row: String,
    pub column: String,
    pub published: u64,
    pub computed: u64,
    pub status: CellStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub label: String,
    pub reference: u64,
    pub ours: u64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TablesReport {
    pub cells: Vec<Cell>,
    pub ratios: Vec<Ratio>,
    pub passed: usize,
    pub failed: usize,
    pub flagged: usize,
    pub ok: bool,
}

impl TablesReport {
    pub fn count(&self, table: &str, column: &str, status: CellStatus) -> usize {
        self.cells
            .iter()
            .filter(|c| c.table == table && c.column == column && c.status == status)
            .count()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.cells {
            let status = match c.status {
                CellStatus::Pass => "pass",
                CellStatus::Fail => "FAIL",
                CellStatus::Flagged => "flagged",
            };
            out += &format!(
                "{:<8} {:<36} {:<12} {:>8} {:>8}  {}",
                c.table, c.row, c.column, c.published, c.computed, status
            );
            if let Some(n) = &c.note {
                out += &format!("  ({n})");
            }
            out.push('\n');
        }
        for r in &self.ratios {
            out += &format!("{}: {} / {} = {:.1}x\n", r.label, r.reference, r.ours, r.ratio);
        }
        out += &format!("passed {} failed {} flagged {}\n", self.passed, self.failed, self.flagged);
        out
    }
}

/// Known inconsistency: Eq. for space-saving qubits gives 137 here, the table
/// prints the third-case value 105.
fn is_flagged_qubit_cell(row: &Table2Row) -> bool {
    row.mode == PlanMode::SpaceSaving && (row.n, row.d, row.m) == (32, 8, 6)
}

pub fn reproduce_tables() -> Result<TablesReport> {
    let refs = reference_tables();
    let mut cells = Vec::new();
    let status = |ok: bool| if ok { CellStatus::Pass } else { CellStatus::Fail };
    for row in &refs.table1 {
        let got = table1_row(row.m);
        for (col, published, computed) in [
            ("r", row.r, got.r),
            ("m_un", row.m_un, got.m_un),
            ("m_ss-2", row.m_ss_minus_2, got.m_ss_minus_2),
        ] {
            cells.push(Cell {
                table: "table1".into(),
                row: format!("m={}", row.m),
                column: col.into(),
                published: published as u64,
                computed: computed as u64,
                status: status(published == computed),
                note: None,
            });
        }
    }
    for row in &refs.table2 {
        let est = match row.mode {
            PlanMode::GateSaving => estimate_gate_saving(row.n, row.d, row.m)?,
            PlanMode::SpaceSaving => estimate_space_saving(row.n, row.d, row.m)?,
        };
        let label = format!("{} {} [0,{}) ({},{},{})", row.function, row.mode, row.x_max, row.n, row.d, row.m);
        cells.push(Cell {
            table: "table2".into(),
            row: label.clone(),
            column: "toffoli".into(),
            published: row.toffoli,
            computed: est.toffoli,
            status: status(row.toffoli == est.toffoli),
            note: None,
        });
        let (st, note) = if is_flagged_qubit_cell(row) {
            let ok = est.qubits == 137;
            (
                if ok { CellStatus::Flagged } else { CellStatus::Fail },
                Some("qubit formula second case gives 137; published value matches the third case".to_string()),
            )
        } else {
            (status(est.qubits == row.qubits), None)
        };
        cells.push(Cell {
            table: "table2".into(),
            row: label,
            column: "qubits".into(),
            published: row.qubits as u64,
            computed: est.qubits as u64,
            status: st,
            note,
        });
    }
    let ratios = headline_ratios(&refs)?;
    let passed = cells.iter().filter(|c| c.status == CellStatus::Pass).count();
    let failed = cells.iter().filter(|c| c.status == CellStatus::Fail).count();
    let flagged = cells.iter().filter(|c| c.status == CellStatus::Flagged).count();
    Ok(TablesReport { cells, ratios, passed, failed, flagged, ok: failed == 0 })
}

/// Minimum reference Toffolis over minimum own Toffolis, per function at the
/// lower accuracy.
pub fn headline_ratios(refs: &ReferenceTables) -> Result<Vec<Ratio>> {
    let mut out = Vec::new();
    for function in ["exponential", "gaussian"] {
        let reference = refs
            .haener
            .iter()
            .filter(|h| h.function == function && h.accuracy == "1e-7")
            .map(|h| h.toffoli)
            .min()
            .ok_or_else(|| Error::Format(format!("no reference rows for {function}")))?;
        let mut ours = u64::MAX;
        for row in refs.table2.iter().filter(|r| r.function == function && r.accuracy == "1e-7") {
            let t = match row.mode {
                PlanMode::GateSaving => toffoli_gate_saving(row.n, row.d, row.m)?,
                PlanMode::SpaceSaving => toffoli_space_saving(row.n, row.d, row.m)?,
            };
            ours = ours.min(t);
        }
        out.push(Ratio {
            label: format!("{function} minimal Toffoli"),
            reference,
            ours,
            ratio: reference as f64 / ours as f64,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_saving_examples() {
        assert_eq!(toffoli_gate_saving(21, 7, 5).unwrap(), 912);
        assert_eq!(toffoli_gate_saving(21, 7, 7).unwrap(), 1620);
        assert_eq!(toffoli_gate_saving(24, 13, 4).unwrap(), 704);
        assert_eq!(qubits_gate_saving(32, 8, 6), 233);
    }

    #[test]
    fn space_saving_examples() {
        assert_eq!(toffoli_space_saving(21, 7, 5).unwrap(), 1409);
        assert_eq!(toffoli_space_saving(32, 8, 8).unwrap(), 7531);
        assert_eq!(toffoli_space_saving(30, 15, 14).unwrap(), 14479);
        assert_eq!(qubits_space_saving(21, 7, 5), 71);
        assert_eq!(qubits_space_saving(32, 8, 6), 137);
        assert!(matches!(toffoli_space_saving(21, 7, 3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn closed_forms_agree() {
        for n in 2..40u32 {
            for d in 1..16u32 {
                for m in 1..=d {
                    let t = estimate_gate_saving(n, d, m).unwrap().toffoli_exact;
                    let (nf, df, mf) = (n as f64, d as f64, m as f64);
                    let closed = if m == d {
                        (0.75 * df - 2.0) * nf * nf + (1.75 * df - 3.0) * nf - 2.5 * df + 10.0
                    } else {
                        (0.75 * mf - 2.0) * nf * nf + (1.75 * mf - 2.0) * nf - 3.5 * mf + df + 9.0
                    };
                    assert!((t - closed).abs() < 1e-9, "n={n} d={d} m={m}");
                }
            }
        }
    }

    #[test]
    fn addition_sum_identity() {
        for n in 3..64u32 {
            let nf = n as f64;
            assert_eq!(full_addition_sum(n) as f64, 1.5 * nf * nf + 1.5 * nf - 9.0);
        }
    }

    #[test]
    fn reference_data_shape() {
        let r = reference_tables();
        assert_eq!((r.table1.len(), r.table2.len(), r.haener.len()), (33, 16, 16));
        assert_eq!(r.inverse_sqrt_toffoli, 134302);
    }

    #[test]
    fn terms_sum_to_total() {
        let e = estimate_space_saving(21, 7, 5).unwrap();
        let sum: f64 = e.terms.values().sum();
        assert_eq!(sum, e.toffoli_exact);
        assert!(e.terms.contains_key("extra_uncompute"));
    }
}
