#![allow(dead_code)]

use qexp::numerics::{FixedPoint, GaussianDomain, Plan, PlanMode, ProblemSpec};

/// Truncated product read straight off the constant's bit string.
pub fn shifted_sum(y: u64, a: &FixedPoint) -> u64 {
    let n = a.width() as usize;
    a.bit_string()
        .chars()
        .enumerate()
        .filter(|&(pos, ch)| ch == '1' && pos < n - 1)
        .map(|(pos, _)| {
            let j = n - 1 - pos;
            y / (1u64 << (n - j))
        })
        .sum()
}

/// Expected output register for exponent `e`.
pub fn reference_output(plan: &Plan, e: u64) -> u64 {
    let k = &plan.constants;
    if e >> plan.m != 0 {
        return 0;
    }
    let mut v = if e % 2 == 1 { k.c1_fp.mantissa() } else { k.c_fp.mantissa() };
    for i in 1..plan.m as usize {
        if (e >> i) % 2 == 1 {
            v = shifted_sum(v, &k.a_i[i]);
        }
    }
    v
}

/// Exponent for raw domain index `x`.
pub fn exponent_for(spec: &ProblemSpec, x: u64) -> u64 {
    use qexp::numerics::FunctionKind::*;
    match (spec.kind, spec.gaussian_domain) {
        (Exponential, _) => x,
        (Gaussian, GaussianDomain::Full) => x * x,
        (Gaussian, GaussianDomain::Symmetric) => {
            let half = 1u64 << (spec.d - 1);
            let mag = if x >= half { (1u64 << spec.d) - x } else { x };
            mag * mag
        }
    }
}

/// Nearest `n`-bit mantissa to `v`, computed in `f64`.
pub fn f64_mantissa(v: f64, n: u32) -> f64 {
    v * 2f64.powi(n as i32)
}

pub struct Config {
    pub label: &'static str,
    pub spec: ProblemSpec,
    pub m_override: Option<u32>,
    pub n: u32,
    pub d_eff: u32,
    pub m: u32,
}

/// The eight (n, d, m) triples of the published comparison, each with its
/// problem description.
pub fn table2_configs() -> Vec<Config> {
    let sym = GaussianDomain::Symmetric;
    vec![
        Config { label: "exp [0,10) 1e-7", spec: ProblemSpec::exponential(1u32, 0u32, 10u32, 7, 21), m_override: None, n: 21, d_eff: 7, m: 7 },
        Config { label: "exp [0,100) 1e-7", spec: ProblemSpec::exponential(1u32, 0u32, 100u32, 7, 21), m_override: None, n: 21, d_eff: 7, m: 5 },
        Config { label: "exp [0,10) 1e-9", spec: ProblemSpec::exponential(1u32, 0u32, 10u32, 8, 32), m_override: None, n: 32, d_eff: 8, m: 8 },
        Config { label: "exp [0,100) 1e-9", spec: ProblemSpec::exponential(1u32, 0u32, 100u32, 8, 32), m_override: None, n: 32, d_eff: 8, m: 6 },
        Config { label: "gauss [0,10) 1e-7", spec: ProblemSpec::gaussian(1u32, 10u32, 7, 24, sym), m_override: None, n: 24, d_eff: 13, m: 12 },
        Config { label: "gauss [0,100) 1e-7", spec: ProblemSpec::gaussian(1u32, 100u32, 7, 24, sym), m_override: Some(4), n: 24, d_eff: 13, m: 4 },
        Config { label: "gauss [0,10) 1e-9", spec: ProblemSpec::gaussian(1u32, 10u32, 8, 30, sym), m_override: None, n: 30, d_eff: 15, m: 14 },
        Config { label: "gauss [0,100) 1e-9", spec: ProblemSpec::gaussian(1u32, 100u32, 8, 30, sym), m_override: Some(7), n: 30, d_eff: 15, m: 7 },
    ]
}

pub fn plan_for(c: &Config, mode: PlanMode) -> Plan {
    qexp::numerics::make_plan(&c.spec, mode, c.m_override).expect("plan")
}
