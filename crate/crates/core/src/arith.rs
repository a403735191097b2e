//! Gate-level arithmetic: controlled truncated adders, hard-wired constant
//! multipliers, NOT-cascade transformations, OR gates, register swaps and
//! squarers.

use serde::{Deserialize, Serialize};

use crate::circuit::{invert, toffoli_count, Control, Gate, QubitRef};
use crate::numerics::FixedPoint;
use crate::{Error, Result};

/// Bits `0..width` of register `reg`, least significant first.
pub fn reg_bits(reg: usize, width: u32) -> Vec<QubitRef> {
    (0..width).map(|b| QubitRef::new(reg, b)).collect()
}

fn distinct(qs: &[QubitRef]) -> bool {
    let mut v = qs.to_vec();
    v.sort();
    v.windows(2).all(|w| w[0] != w[1])
}

/// Operands of a controlled `s`-bit addition `z += a` where `z` has `s + 1`
/// bits (the top one receives the carry).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdderLayout {
    pub control: QubitRef,
    pub addend: Vec<QubitRef>,
    pub target: Vec<QubitRef>,
    /// Borrowed qubit, only needed when `s = 1`; its value is restored.
    pub spare: Option<QubitRef>,
}

impl AdderLayout {
    pub fn s(&self) -> usize {
        self.addend.len()
    }
}

/// Toffoli cost of one controlled adder of width `s`.
pub fn adder_toffoli(s: usize) -> usize {
    if s == 1 {
        5
    } else {
        3 * s + 3
    }
}

/// `z ^= c & p & q` from four Toffolis, using `w` as a borrowed dirty qubit.
fn c3x(c: QubitRef, p: QubitRef, q: QubitRef, z: QubitRef, w: QubitRef, out: &mut Vec<Gate>) {
    out.push(Gate::toffoli(c, w, z));
    out.push(Gate::toffoli(p, q, w));
    out.push(Gate::toffoli(c, w, z));
    out.push(Gate::toffoli(p, q, w));
}

/// Controlled ripple-carry addition without ancillas (Takahashi-Tani-Kunihiro
/// layout with the middle section controlled).
pub fn build_controlled_adder(layout: &AdderLayout) -> Result<Vec<Gate>> {
    let s = layout.s();
    if s < 1 {
        return Err(Error::Domain("adder width must be at least 1".into()));
    }
    if layout.target.len() != s + 1 {
        return Err(Error::Domain(format!(
            "adder of width {s} needs {} target bits, got {}",
            s + 1,
            layout.target.len()
        )));
    }
    let c = layout.control;
    let a = &layout.addend;
    let b = &layout.target[..s];
    let z = layout.target[s];

    let mut all: Vec<QubitRef> = a.iter().chain(layout.target.iter()).copied().collect();
    all.push(c);
    if s == 1 {
        let w = layout
            .spare
            .ok_or_else(|| Error::Domain("a 1-bit adder needs a spare qubit".into()))?;
        all.push(w);
        if !distinct(&all) {
            return Err(Error::Domain("adder qubits must be distinct".into()));
        }
        let mut g = Vec::with_capacity(5);
        c3x(c, a[0], b[0], z, w, &mut g);
        g.push(Gate::toffoli(c, a[0], b[0]));
        return Ok(g);
    }
    if !distinct(&all) {
        return Err(Error::Domain("adder qubits must be distinct".into()));
    }

    let cx = |ctl: QubitRef, t: QubitRef| Gate::cnot(Control::pos(ctl), t);
    let mut g = Vec::new();
    for i in 1..s {
        g.push(cx(a[i], b[i]));
    }
    g.push(Gate::toffoli(c, a[s - 1], z));
    for i in (1..s - 1).rev() {
        g.push(cx(a[i], a[i + 1]));
    }
    for i in 0..s - 1 {
        g.push(Gate::toffoli(b[i], a[i], a[i + 1]));
    }
    c3x(c, b[s - 1], a[s - 1], z, b[0], &mut g);
    for i in (1..s).rev() {
        g.push(Gate::toffoli(c, a[i], b[i]));
        g.push(Gate::toffoli(b[i - 1], a[i - 1], a[i]));
    }
    for i in 1..s - 1 {
        g.push(cx(a[i], a[i + 1]));
    }
    g.push(Gate::toffoli(c, a[0], b[0]));
    for i in 1..s {
        g.push(cx(a[i], b[i]));
    }
    assert_eq!(toffoli_count(&g), 3 * s + 3);
    Ok(g)
}

/// Bit positions `j >= 1` of `a` that contribute `y >> (n - j)`.
pub fn multiplier_terms(a: &FixedPoint) -> Vec<u32> {
    a.set_bits().filter(|&j| j >= 1).collect()
}

/// Toffoli cost of [`build_constant_multiplier`] for constant `a`.
pub fn multiplier_toffoli(a: &FixedPoint) -> Result<usize> {
    let terms = multiplier_terms(a);
    let Some((&j0, rest)) = terms.split_first() else {
        return Ok(a.width() as usize);
    };
    let adds: usize = rest.iter().map(|&j| adder_toffoli(j as usize)).sum();
    Ok(j0 as usize + adds + a.width() as usize)
}

/// Hard-wired `z = ctrl ? M(y, a) : y` for an all-zero `z`.
///
/// `M(y, a) = sum_j (y >> (n - j))` over set bits `j >= 1` of `a`. The
/// smallest term is a Toffoli copy, every further term a controlled adder,
/// and a final negatively controlled copy passes `y` through when `ctrl` is
/// off. Bit `y_0` is only ever borrowed. A constant with no bit above
/// `j = 0` leaves only the pass-through.
pub fn build_constant_multiplier(
    a: &FixedPoint,
    control: QubitRef,
    y: &[QubitRef],
    z: &[QubitRef],
) -> Result<Vec<Gate>> {
    let n = a.width() as usize;
    if y.len() != n || z.len() != n {
        return Err(Error::Domain(format!(
            "multiplier registers must be {n} bits wide, got {} and {}",
            y.len(),
            z.len()
        )));
    }
    let terms = multiplier_terms(a);
    let (j0, rest) = match terms.split_first() {
        Some((&j0, rest)) => (j0 as usize, rest),
        None => (0, &[][..]),
    };
    let mut g = Vec::new();
    for k in 0..j0 {
        g.push(Gate::toffoli(control, y[n - j0 + k], z[k]));
    }
    for &j in rest {
        let j = j as usize;
        g.extend(build_controlled_adder(&AdderLayout {
            control,
            addend: y[n - j..].to_vec(),
            target: z[..=j].to_vec(),
            spare: Some(y[0]),
        })?);
    }
    for k in 0..n {
        g.push(Gate::ccnot(Control::neg(control), Control::pos(y[k]), z[k]));
    }
    Ok(g)
}

/// Clears `z` back to zero after [`build_constant_multiplier`].
pub fn build_constant_multiplier_inverse(
    a: &FixedPoint,
    control: QubitRef,
    y: &[QubitRef],
    z: &[QubitRef],
) -> Result<Vec<Gate>> {
    Ok(invert(&build_constant_multiplier(a, control, y, z)?))
}

/// The bit flips turning one constant into another.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitDiffPlan {
    pub from: FixedPoint,
    pub to: FixedPoint,
    pub flip_positions: Vec<u32>,
    pub p: usize,
}

pub fn plan_transformation(from: &FixedPoint, to: &FixedPoint) -> Result<BitDiffPlan> {
    if from.width() != to.width() {
        return Err(Error::Domain(format!(
            "transformation between widths {} and {}",
            from.width(),
            to.width()
        )));
    }
    let diff = from.mantissa() ^ to.mantissa();
    let flip_positions: Vec<u32> = (0..from.width()).filter(|&j| diff >> j & 1 == 1).collect();
    Ok(BitDiffPlan { from: *from, to: *to, p: flip_positions.len(), flip_positions })
}

/// One NOT per flipped bit, or one CNOT per bit when `control` is given.
pub fn build_transformation(plan: &BitDiffPlan, reg: &[QubitRef], control: Option<Control>) -> Vec<Gate> {
    plan.flip_positions
        .iter()
        .map(|&j| {
            let t = reg[j as usize];
            match control {
                Some(c) => Gate::cnot(c, t),
                None => Gate::not(t),
            }
        })
        .collect()
}

/// `ancilla = a | b` for an ancilla prepared in `|1>`: one Toffoli with both
/// controls negated.
pub fn build_or_gate(a: QubitRef, b: QubitRef, ancilla: QubitRef) -> Vec<Gate> {
    vec![Gate::ccnot(Control::neg(a), Control::neg(b), ancilla)]
}

/// OR of `inputs` accumulated through `inputs.len() - 1` ancillas. Returns the
/// gates and the qubit holding the result.
pub fn build_or_cascade(inputs: &[QubitRef], ancillas: &[QubitRef]) -> Result<(Vec<Gate>, QubitRef)> {
    if inputs.is_empty() {
        return Err(Error::Domain("OR cascade needs at least one input".into()));
    }
    if ancillas.len() != inputs.len() - 1 {
        return Err(Error::Domain(format!(
            "OR cascade over {} inputs needs {} ancillas, got {}",
            inputs.len(),
            inputs.len() - 1,
            ancillas.len()
        )));
    }
    let mut acc = inputs[0];
    let mut g = Vec::with_capacity(ancillas.len());
    for (input, &anc) in inputs[1..].iter().zip(ancillas) {
        g.extend(build_or_gate(acc, *input, anc));
        acc = anc;
    }
    Ok((g, acc))
}

/// Bitwise controlled swap of two equal-width registers.
pub fn build_controlled_register_swap(control: Control, a: &[QubitRef], b: &[QubitRef]) -> Result<Vec<Gate>> {
    if a.len() != b.len() {
        return Err(Error::Domain(format!("swap widths differ: {} vs {}", a.len(), b.len())));
    }
    Ok(a.iter().zip(b).map(|(&p, &q)| Gate::cswap(control, p, q)).collect())
}

/// Extra zero-initialised qubits a squarer borrows (and returns clean).
pub fn squarer_ancilla_width(d: u32, signed: bool) -> u32 {
    match (signed, d) {
        (false, 1) => 0,
        (false, _) => d,
        (true, _) => 2 * d - 2,
    }
}

pub fn squarer_toffoli(d: u32, signed: bool) -> usize {
    let d = d as usize;
    match (signed, d) {
        (false, 1) => 0,
        (false, _) => d * adder_toffoli(d),
        (true, 2) => adder_toffoli(2),
        (true, _) => (d - 1) * adder_toffoli(d - 1) + adder_toffoli(2 * d - 2),
    }
}

fn copy_gates(from: &[QubitRef], to: &[QubitRef]) -> Vec<Gate> {
    from.iter().zip(to).map(|(&f, &t)| Gate::cnot(Control::pos(f), t)).collect()
}

/// `out = x^2` for unsigned `x` by shifted controlled additions of a copy of
/// `x`. `copy` must hold `d` zero qubits (none for `d = 1`) and is returned
/// to zero.
pub fn build_squarer(x: &[QubitRef], out: &[QubitRef], copy: &[QubitRef]) -> Result<Vec<Gate>> {
    let d = x.len();
    if d == 0 {
        return Err(Error::Domain("squarer input is empty".into()));
    }
    if out.len() < 2 * d {
        return Err(Error::Domain(format!(
            "a {}-bit output cannot hold the square of a {d}-bit value",
            out.len()
        )));
    }
    if copy.len() != squarer_ancilla_width(d as u32, false) as usize {
        return Err(Error::Domain(format!("squarer needs {d} copy qubits")));
    }
    if d == 1 {
        return Ok(vec![Gate::cnot(Control::pos(x[0]), out[0])]);
    }
    let mut g = copy_gates(x, copy);
    for i in 0..d {
        g.extend(build_controlled_adder(&AdderLayout {
            control: x[i],
            addend: copy.to_vec(),
            target: out[i..=i + d].to_vec(),
            spare: None,
        })?);
    }
    g.extend(copy_gates(x, copy));
    Ok(g)
}

/// `out = x^2` where `x` is read as a `d`-bit two's-complement value, so the
/// square fits `2d - 1` bits. `scratch` holds `2d - 2` zero qubits.
///
/// With sign bit `b` and the low bits conditionally complemented to `v`,
/// `|x| = v + b` and `x^2 = v^2 + b (2v + 1)`.
pub fn build_signed_squarer(x: &[QubitRef], out: &[QubitRef], scratch: &[QubitRef]) -> Result<Vec<Gate>> {
    let d = x.len();
    if d < 2 {
        return Err(Error::Domain("signed squarer needs at least 2 bits".into()));
    }
    if out.len() < 2 * d - 1 {
        return Err(Error::Domain(format!(
            "a {}-bit output cannot hold the square of a signed {d}-bit value",
            out.len()
        )));
    }
    if scratch.len() != squarer_ancilla_width(d as u32, true) as usize {
        return Err(Error::Domain(format!("signed squarer needs {} scratch qubits", 2 * d - 2)));
    }
    let (copy, pad) = scratch.split_at(d);
    let sign = x[d - 1];

    let mut prep = copy_gates(x, copy);
    for k in 0..d - 1 {
        prep.push(Gate::cnot(Control::pos(sign), copy[k]));
        prep.push(Gate::cnot(Control::pos(sign), x[k]));
    }

    let mut g = prep.clone();
    if d == 2 {
        g.push(Gate::cnot(Control::pos(copy[0]), out[0]));
    } else {
        for i in 0..d - 1 {
            g.extend(build_controlled_adder(&AdderLayout {
                control: x[i],
                addend: copy[..d - 1].to_vec(),
                target: out[i..=i + d - 1].to_vec(),
                spare: None,
            })?);
        }
    }
    let mut addend = vec![copy[d - 1]];
    addend.extend_from_slice(&copy[..d - 1]);
    addend.extend_from_slice(pad);
    g.extend(build_controlled_adder(&AdderLayout {
        control: sign,
        addend,
        target: out[..=2 * d - 2].to_vec(),
        spare: None,
    })?);
    g.extend(invert(&prep));
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, Role, Simulator};
    use crate::numerics::fp_round;

    #[test]
    fn adder_small_example() {
        let mut c = Circuit::new();
        let ctl = c.add_register(1, Role::Domain, 0);
        let a = c.add_register(3, Role::ZeroAncilla, 3);
        let t = c.add_register(4, Role::ConstantProduct, 4);
        c.output = t;
        let layout = AdderLayout {
            control: QubitRef::new(ctl, 0),
            addend: reg_bits(a, 3),
            target: reg_bits(t, 4),
            spare: None,
        };
        c.extend(build_controlled_adder(&layout).unwrap());
        let sim = Simulator::new(&c).unwrap();
        assert_eq!(sim.run(1).unwrap(), vec![1, 3, 7]);
        assert_eq!(sim.run(0).unwrap(), vec![0, 3, 4]);
    }

    #[test]
    fn adder_cost() {
        assert_eq!(adder_toffoli(5), 18);
        let layout = AdderLayout {
            control: QubitRef::new(0, 0),
            addend: reg_bits(1, 5),
            target: reg_bits(2, 6),
            spare: None,
        };
        assert_eq!(toffoli_count(&build_controlled_adder(&layout).unwrap()), 18);
        let bad = AdderLayout { addend: vec![], target: reg_bits(2, 1), ..layout };
        assert!(build_controlled_adder(&bad).is_err());
    }

    #[test]
    fn fig6_multiplier_terms() {
        let a0 = fp_round(0.389, 21).unwrap();
        assert_eq!(multiplier_terms(&a0), vec![4, 5, 7, 9, 12, 13, 14, 18, 19]);
        assert_eq!(multiplier_toffoli(&a0).unwrap(), 340);
        let y = reg_bits(1, 21);
        let z = reg_bits(2, 21);
        let g = build_constant_multiplier(&a0, QubitRef::new(0, 0), &y, &z).unwrap();
        assert_eq!(toffoli_count(&g), 340);
        assert!(g.iter().all(|gate| !gate.targets.contains(&y[0])));
    }

    #[test]
    fn negligible_constant_passes_through_only() {
        let tiny = FixedPoint::new(8, 1).unwrap();
        let g = build_constant_multiplier(&tiny, QubitRef::new(0, 0), &reg_bits(1, 8), &reg_bits(2, 8)).unwrap();
        assert_eq!(toffoli_count(&g), 8);
        assert_eq!(multiplier_toffoli(&tiny).unwrap(), 8);
        assert!(g.iter().all(|gate| gate.controls[0].neg));
    }

    #[test]
    fn fig3_transformation() {
        let a0 = fp_round(0.389, 21).unwrap();
        let a1 = fp_round(0.151321, 21).unwrap();
        let plan = plan_transformation(&a0, &a1).unwrap();
        assert_eq!(plan.p, 10);
        let same = plan_transformation(&a0, &a0).unwrap();
        assert_eq!(same.p, 0);
        assert!(build_transformation(&same, &reg_bits(0, 21), None).is_empty());
    }

    #[test]
    fn or_truth_table() {
        for (a, b) in [(0u64, 0u64), (0, 1), (1, 0), (1, 1)] {
            let mut c = Circuit::new();
            let x = c.add_register(2, Role::Domain, 0);
            let anc = c.add_register(1, Role::OrAncilla, 1);
            c.output = anc;
            c.extend(build_or_gate(QubitRef::new(x, 0), QubitRef::new(x, 1), QubitRef::new(anc, 0)));
            assert_eq!(toffoli_count(&c.gates), 1);
            let st = Simulator::new(&c).unwrap().run(a | b << 1).unwrap();
            assert_eq!(st, vec![a | b << 1, a | b]);
        }
    }

    #[test]
    fn or_cascade_counts() {
        let inputs = reg_bits(0, 4);
        let anc = reg_bits(1, 3);
        let (g, out) = build_or_cascade(&inputs, &anc).unwrap();
        assert_eq!((g.len(), out), (3, anc[2]));
        let (g, out) = build_or_cascade(&inputs[..1], &[]).unwrap();
        assert!(g.is_empty() && out == inputs[0]);
    }

    #[test]
    fn register_swap() {
        let mut c = Circuit::new();
        let x = c.add_register(1, Role::Domain, 0);
        let a = c.add_register(21, Role::ConstantProduct, 12345);
        let b = c.add_register(21, Role::ZeroAncilla, 0);
        c.extend(
            build_controlled_register_swap(Control::pos(QubitRef::new(x, 0)), &reg_bits(a, 21), &reg_bits(b, 21))
                .unwrap(),
        );
        assert_eq!(toffoli_count(&c.gates), 21);
        let sim = Simulator::new(&c).unwrap();
        assert_eq!(sim.run(0).unwrap(), vec![0, 12345, 0]);
        assert_eq!(sim.run(1).unwrap(), vec![1, 0, 12345]);
    }

    fn squarer_circuit(d: u32, signed: bool) -> (Simulator, usize) {
        let mut c = Circuit::new();
        let x = c.add_register(d, Role::Domain, 0);
        let out_w = if signed { 2 * d - 1 } else { 2 * d };
        let out = c.add_register(out_w, Role::Exponent, 0);
        let anc_w = squarer_ancilla_width(d, signed);
        let anc = (anc_w > 0).then(|| c.add_register(anc_w, Role::ZeroAncilla, 0));
        let anc_bits = anc.map_or(vec![], |r| reg_bits(r, anc_w));
        c.output = out;
        let g = if signed {
            build_signed_squarer(&reg_bits(x, d), &reg_bits(out, out_w), &anc_bits).unwrap()
        } else {
            build_squarer(&reg_bits(x, d), &reg_bits(out, out_w), &anc_bits).unwrap()
        };
        assert_eq!(toffoli_count(&g), squarer_toffoli(d, signed));
        c.extend(g);
        (Simulator::new(&c).unwrap(), out)
    }

    #[test]
    fn squarer_small() {
        let (sim, _) = squarer_circuit(3, false);
        for x in 0..8u64 {
            let st = sim.run(x).unwrap();
            assert_eq!(st[0], x);
            assert_eq!(st[1], x * x);
            assert_eq!(st[2], 0);
        }
        let (sim, _) = squarer_circuit(1, false);
        assert_eq!(sim.run_output(1).unwrap(), 1);
    }

    #[test]
    fn signed_squarer_small() {
        for d in 2..=4 {
            let (sim, _) = squarer_circuit(d, true);
            for x in 0..1u64 << d {
                let v = crate::numerics::signed_index(x, d);
                let st = sim.run(x).unwrap();
                assert_eq!(st[1], (v * v) as u64, "d={d} x={x}");
                assert_eq!((st[0], st[2]), (x, 0));
            }
        }
    }

    #[test]
    fn squarer_rejects_narrow_output() {
        assert!(build_squarer(&reg_bits(0, 3), &reg_bits(1, 5), &reg_bits(2, 3)).is_err());
        assert!(build_signed_squarer(&reg_bits(0, 3), &reg_bits(1, 4), &reg_bits(2, 4)).is_err());
    }
}
