mod common;

use common::*;
use proptest::prelude::*;
use qexp::arith::{build_constant_multiplier, reg_bits};
use qexp::builder::{build, build_exponent_core, schedule_numbers, schedule_space_saving, ScheduleOp, TailSource};
use qexp::circuit::{count_resources, from_json, invert, to_json, Circuit, QubitRef, Role, Simulator};
use qexp::estimator::{analytic_circuit_count, estimate, qubits_gate_saving, qubits_space_saving};
use qexp::hp;
use qexp::numerics::{
    closed_form_m, compute_a_max, compute_m, compute_m_hp, fp_round, make_plan, FixedPoint, Plan, PlanMode,
    ProblemSpec,
};
use qexp::oracle::{exponent_trace, mult_truncated};
use qexp::verify::sweep_artifact;

/// Exponential over `[0, 2^d)` so that `A = exp(-alpha)`.
fn unit_plan(alpha: f64, d: u32, n: u32, mode: PlanMode) -> Option<Plan> {
    let spec = ProblemSpec::exponential(alpha, 0u32, 1u32 << d, d, n);
    make_plan(&spec, mode, None).ok()
}

fn near_boundary(n: u32, a: &qexp::hp::HpFloat) -> bool {
    // log2(n / log2(1/A)) within 1e-9 of an integer
    let lg = hp::to_f64(&hp::log2(a));
    let t = (n as f64 / -lg).log2();
    (t - t.round()).abs() < 1e-9
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn closed_form_matches_search(n in 4u32..=40, d_eff in 1u32..=20, bits in 1u64..u64::MAX) {
        let a = hp::from_f64(bits as f64 / u64::MAX as f64, hp::working_precision(n)).unwrap();
        let floor = hp::pow2(-(n as i64), hp::working_precision(n));
        prop_assume!(a > floor && !near_boundary(n, &a));
        prop_assert_eq!(compute_m_hp(n, d_eff, &a).unwrap(), closed_form_m(n, d_eff, &a).unwrap());
    }
}

proptest! {
    #[test]
    fn m_monotone_in_a_and_n(n in 4u32..=40, d_eff in 1u32..=16, a in 0.001f64..0.999, b in 0.001f64..0.999) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assume!(lo > 2f64.powi(-(n as i32)));
        prop_assert!(compute_m(n, d_eff, lo).unwrap() <= compute_m(n, d_eff, hi).unwrap());
        prop_assert!(compute_m(n, d_eff, lo).unwrap() <= compute_m(n + 1, d_eff, lo).unwrap());
    }

    #[test]
    fn a_max_threshold(n in 8u32..=40, d_eff in 2u32..=8) {
        let amax = compute_a_max(n, d_eff);
        prop_assume!(amax + 1e-9 < 1.0 && amax - 1e-9 > 2f64.powi(-(n as i32)));
        prop_assert_eq!(compute_m(n, d_eff, amax + 1e-9).unwrap(), d_eff);
        prop_assert!(compute_m(n, d_eff, amax - 1e-9).unwrap() < d_eff);
    }

    #[test]
    fn fp_round_monotone(n in 2u32..=40, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(fp_round(lo, n).unwrap().mantissa() <= fp_round(hi, n).unwrap().mantissa());
    }

    #[test]
    fn fp_round_round_trip(n in 2u32..=40, raw in any::<u64>()) {
        let mant = raw % (1u64 << n);
        let v = mant as f64 / 2f64.powi(n as i32);
        prop_assert_eq!(fp_round(v, n).unwrap().mantissa(), mant);
        let fp = FixedPoint::new(n, mant).unwrap();
        prop_assert_eq!(FixedPoint::from_bit_string(&fp.bit_string()).unwrap(), fp);
    }

    #[test]
    fn squared_constants(alpha in 0.01f64..5.0, d in 3u32..=12, n in 12u32..=40) {
        let plan = unit_plan(alpha, d, n, PlanMode::GateSaving).unwrap();
        let prec = hp::working_precision(n);
        let a = hp::from_f64(plan.constants.a_real, prec).unwrap();
        let ulp = 2f64.powi(-(n as i32));
        let a_i = &plan.constants.a_i;
        for i in 1..a_i.len() {
            prop_assert!(a_i[i].mantissa() < a_i[i - 1].mantissa());
            let exact = hp::to_f64(&hp::pow_pow2(&a, i as u32));
            let got = a_i[i].mantissa() as f64 * ulp;
            prop_assert!((got - exact).abs() <= ulp / 2.0 * (1.0 + 1e-9), "i={} got={} exact={}", i, got, exact);
        }
    }

    #[test]
    fn truncation_bound(n in 2u32..=40, y_raw in any::<u64>(), a_raw in any::<u64>()) {
        let y = y_raw % (1u64 << n);
        let a = FixedPoint::new(n, a_raw % (1u64 << n)).unwrap();
        let exact = y as f64 * a.mantissa() as f64 / 2f64.powi(n as i32);
        let got = mult_truncated(y, &a) as f64;
        let pop = a.mantissa().count_ones() as f64;
        prop_assert!(exact - got >= -1e-6 * exact.max(1.0));
        prop_assert!(exact - got < pop.max(1e-300));
    }

    #[test]
    fn traces_non_increasing(alpha in 0.01f64..3.0, d in 3u32..=10, e_raw in any::<u64>()) {
        let plan = unit_plan(alpha, d, 21, PlanMode::GateSaving).unwrap();
        let t = exponent_trace(&plan, e_raw % (1u64 << d)).unwrap();
        prop_assert!(t.steps.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(t.tail_zeroed, (e_raw % (1u64 << d)) >> plan.m != 0);
    }

    #[test]
    fn multiplier_n21(a_raw in 0u64..(1u64 << 21), y in 0u64..(1u64 << 21), ctl in 0u64..2) {
        let a = FixedPoint::new(21, a_raw).unwrap();
        let mut c = Circuit::new();
        let cr = c.add_register(1, Role::Domain, 0);
        let yr = c.add_register(21, Role::ConstantProduct, 0);
        let zr = c.add_register(21, Role::ConstantProduct, 0);
        c.extend(build_constant_multiplier(&a, QubitRef::new(cr, 0), &reg_bits(yr, 21), &reg_bits(zr, 21)).unwrap());
        let mut st = vec![ctl, y, 0];
        Simulator::new(&c).unwrap().apply(&mut st);
        let want = if ctl == 1 { shifted_sum(y, &a) } else { y };
        prop_assert_eq!(st, vec![ctl, y, want]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reversible_and_round_trips(alpha in 0.05f64..3.0, d in 2u32..=7, n in 6u32..=16, space in any::<bool>(), x_raw in any::<u64>()) {
        let mode = if space { PlanMode::SpaceSaving } else { PlanMode::GateSaving };
        let plan = unit_plan(alpha, d, n, mode).unwrap();
        prop_assume!(!space || plan.m > 3);
        let art = build(&plan).unwrap();
        let c = &art.circuit;
        let x = x_raw % (1u64 << d);
        let sim = Simulator::new(c).unwrap();
        let mut full = c.clone();
        full.extend(invert(&c.gates));
        let back = Simulator::new(&full).unwrap().run(x).unwrap();
        let mut start = sim.initial_state();
        start[c.input_register().unwrap()] = x;
        prop_assert_eq!(back, start);
        prop_assert_eq!(count_resources(c).toffoli, count_resources(&Circuit { gates: invert(&c.gates), ..c.clone() }).toffoli);
        prop_assert_eq!(&from_json(&to_json(c)).unwrap(), c);
    }

    #[test]
    fn modes_agree_and_stay_clean(alpha in 0.02f64..2.0, d in 4u32..=9, n in 8u32..=21) {
        let gs = unit_plan(alpha, d, n, PlanMode::GateSaving).unwrap();
        prop_assume!(gs.m > 3);
        let ss = gs.with_mode(PlanMode::SpaceSaving);
        let a = build_exponent_core(&gs).unwrap();
        let b = build_exponent_core(&ss).unwrap();
        let (sa, sb) = (Simulator::new(&a.circuit).unwrap(), Simulator::new(&b.circuit).unwrap());
        for x in 0..1u64 << d {
            let oa = sa.run_output(x).unwrap();
            prop_assert_eq!(oa, sb.run_output(x).unwrap());
            prop_assert_eq!(oa, reference_output(&gs, x));
        }
        let r = sweep_artifact(&b, None).unwrap();
        prop_assert!(r.ok(), "{:?}", r);
        for art in [&a, &b] {
            let law = if art.plan.mode == PlanMode::GateSaving { qubits_gate_saving(n, d, gs.m) } else { qubits_space_saving(n, d, gs.m) };
            prop_assert_eq!(count_resources(&art.circuit).qubits, law);
        }
    }
}

#[test]
fn schedules_consistent_to_100() {
    for m in 4..=100u32 {
        for d_eff in [m, m + 1] {
            let s = schedule_space_saving(m, d_eff).unwrap();
            let (r, l, m_un, m_ss) = schedule_numbers(m);
            assert_eq!((s.r, s.l, s.m_un, s.m_ss), (r, l, m_un, m_ss));
            assert_eq!(s.computes() as u32, m);
            assert_eq!(s.uncomputes() as u32, m_un);
            // replay the ops on abstract slot contents
            let mut slot: Vec<Option<u32>> = vec![None; r as usize];
            for op in &s.ops {
                match *op {
                    ScheduleOp::TrickCompute { dst } => {
                        assert!(slot[dst].is_none());
                        slot[dst] = Some(1);
                    }
                    ScheduleOp::Compute { i, src, dst } => {
                        assert_eq!(slot[src], Some(i));
                        assert!(slot[dst].is_none());
                        slot[dst] = Some(i + 1);
                    }
                    ScheduleOp::TrickUncompute { dst } => {
                        assert_eq!(slot[dst], Some(1));
                        slot[dst] = None;
                    }
                    ScheduleOp::Uncompute { i, src, dst } | ScheduleOp::ExtraUncompute { i, src, dst } => {
                        assert_eq!(slot[src], Some(i));
                        assert_eq!(slot[dst], Some(i + 1));
                        slot[dst] = None;
                    }
                }
            }
            assert_eq!(slot[s.output_slot], Some(m));
            let free: Vec<usize> = (0..r as usize).filter(|&k| slot[k].is_none()).collect();
            assert_eq!(free, s.free_slots);
            match s.tail_source {
                TailSource::NoTail => assert_eq!(d_eff, m),
                TailSource::FreeSlot(k) | TailSource::ExtraUncompute(k) => assert!(slot[k].is_none()),
                TailSource::Fresh => assert!(free.is_empty()),
            }
        }
    }
}

#[test]
fn formula_tracks_analytic_count_at_n21() {
    let mut rng = <rand::rngs::StdRng as rand::SeedableRng>::seed_from_u64(21);
    let (mut formula, mut analytic, mut gaps) = (0.0f64, 0.0f64, vec![]);
    for _ in 0..300 {
        let alpha: f64 = rand::Rng::gen_range(&mut rng, 0.001..0.5);
        let d: u32 = rand::Rng::gen_range(&mut rng, 4..=10);
        let plan = unit_plan(alpha, d, 21, PlanMode::GateSaving).unwrap();
        for mode in [PlanMode::GateSaving, PlanMode::SpaceSaving] {
            if mode == PlanMode::SpaceSaving && plan.m <= 3 {
                continue;
            }
            let f = estimate(&plan, mode).unwrap().toffoli as f64;
            let a = analytic_circuit_count(&plan, mode).unwrap() as f64;
            formula += f;
            analytic += a;
            gaps.push((f - a) / a);
        }
    }
    assert!(gaps.len() > 300);
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
    assert!(((formula - analytic) / analytic).abs() < 0.20);
    assert!(mean_gap.abs() < 0.20);
}
