//! Invariant suites over the state and channel measures, run as one batch.
//! Each suite reports how many of its cases held.

use serde::{Deserialize, Serialize};

use crate::batch::par_map;
use crate::channel_measures::{e_kappa_channel, one_shot_channel_cost, q_theta};
use crate::channels::{
    apply_bipartite, apply_operator, channel_checks, compose, completely_dephasing, make_channel,
    random_channel, tensor, ChannelFamily, QuantumChannel,
};
use crate::matcore::{permute_systems, BipartitePartition, HermitianOperator};
use crate::state_measures::{
    binegativity_holds, build_dilution_channel, e_kappa_dual, e_kappa_primal, log_negativity,
    one_shot_ppt_cost, z_upper, MeasureError,
};
use crate::states::{
    make_isotropic, make_werner, max_entangled, monogamy_triple, non_convex_triple, random_density, Cut,
    DensityMatrix, Pair,
};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SuiteResult {
    pub name: String,
    pub passed: usize,
    pub total: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

type Case = Result<(), String>;

fn check(cond: bool, what: impl FnOnce() -> String) -> Case {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn ek(rho: &DensityMatrix) -> Result<f64, String> {
    e_kappa_primal(rho).map(|r| r.value_bits).map_err(|e| e.to_string())
}

fn ekc(n: &QuantumChannel) -> Result<f64, String> {
    e_kappa_channel(n).map(|r| r.value_bits).map_err(|e| e.to_string())
}

fn ch(f: ChannelFamily) -> QuantumChannel {
    make_channel(f).expect("suite parameters are valid")
}

fn p(a: usize, b: usize) -> BipartitePartition {
    BipartitePartition { d_a: a, d_b: b }
}

fn random_states(seed: u64, count: usize) -> Vec<DensityMatrix> {
    let shapes = [p(2, 2), p(2, 3)];
    (0..count)
        .map(|i| random_density(shapes[i % 2], seed.wrapping_add(i as u64)))
        .collect()
}

fn qubit_channels(seed: u64, count: usize) -> Vec<QuantumChannel> {
    (0..count)
        .map(|i| random_channel(2, 2, 1 + i % 3, seed.wrapping_add(1000 + i as u64)))
        .collect()
}

/// Applies `N` to the middle factor of a state on `A' ⊗ A ⊗ B'` and
/// returns the output split as `A' | B' B`.
pub fn apply_middle(n: &QuantumChannel, rho: &HermitianOperator, dims: [usize; 3]) -> Result<DensityMatrix, MeasureError> {
    let moved = permute_systems(rho.matrix(), &dims, &[0, 2, 1])
        .map_err(|e| MeasureError::Channel(e.into()))?;
    let moved = HermitianOperator::new(moved).map_err(|e| MeasureError::Channel(e.into()))?;
    let out = apply_operator(n, &moved, dims[0] * dims[2])?;
    Ok(DensityMatrix::new(out, p(dims[0], dims[2] * n.d_out()))?)
}

fn suite(name: &str, cases: Vec<Case>) -> SuiteResult {
    let total = cases.len();
    let failures: Vec<String> = cases.into_iter().filter_map(Result::err).collect();
    SuiteResult {
        name: name.to_string(),
        passed: total - failures.len(),
        total,
        failures,
    }
}

type SuiteFn = fn(u64) -> SuiteResult;

pub fn suites() -> Vec<(&'static str, SuiteFn)> {
    vec![
        ("state/normalization", state_normalization),
        ("state/dimension-bound", state_dimension_bound),
        ("state/faithfulness", state_faithfulness),
        ("state/ordering-chain", state_ordering),
        ("state/binegativity-collapse", state_binegativity),
        ("state/additivity", state_additivity),
        ("state/monotonicity", state_monotonicity),
        ("state/non-convexity", state_non_convexity),
        ("state/non-monogamy", state_non_monogamy),
        ("state/one-shot-sandwich", state_one_shot),
        ("state/dilution-round-trip", state_dilution),
        ("channel/additivity", channel_additivity),
        ("channel/amortization", channel_amortization),
        ("channel/superchannel-monotonicity", channel_superchannel),
        ("channel/faithfulness", channel_faithfulness),
        ("channel/normalization-bound", channel_normalization),
        ("channel/non-convexity", channel_non_convexity),
        ("channel/covariant-collapse", channel_covariant),
        ("channel/q-theta-bound", channel_q_theta),
        ("channel/one-shot-sandwich", channel_one_shot),
    ]
}

/// Runs every suite with the given seed.
pub fn run_all(seed: u64) -> Vec<SuiteResult> {
    par_map(&suites(), |(_, f)| f(seed))
}

fn state_normalization(_: u64) -> SuiteResult {
    let cases = (2..=5)
        .map(|m| {
            let v = ek(&max_entangled(m))?;
            check((v - (m as f64).log2()).abs() <= 1e-6, || format!("Φ^{m}: {v}"))
        })
        .collect();
    suite("state/normalization", cases)
}

fn state_dimension_bound(seed: u64) -> SuiteResult {
    let cases = random_states(seed, 8)
        .iter()
        .map(|r| {
            let v = ek(r)?;
            let bound = (r.partition().min_dim() as f64).log2();
            check(v <= bound + 1e-6, || format!("{v} > {bound}"))
        })
        .collect();
    suite("state/dimension-bound", cases)
}

fn state_faithfulness(_: u64) -> SuiteResult {
    let mut states = Vec::new();
    for d in [2, 3] {
        for k in 1..=10 {
            let x = k as f64 / 10.0;
            states.push(make_isotropic(x, d).expect("valid"));
            states.push(make_werner(x, d).expect("valid"));
        }
    }
    let cases = states
        .iter()
        .map(|r| {
            let v = ek(r)?;
            let ppt = r.partial_transpose().lambda_min() >= -1e-7;
            check((v <= 1e-6) == ppt, || format!("{:?}: E = {v}, PPT = {ppt}", r.family()))
        })
        .collect();
    suite("state/faithfulness", cases)
}

fn state_ordering(seed: u64) -> SuiteResult {
    let mut states = random_states(seed, 8);
    states.push(crate::states::make_rho_v());
    states.push(non_convex_triple().mixture);
    let cases = states
        .iter()
        .map(|r| {
            let (en, e, z) = (log_negativity(r), ek(r)?, z_upper(r));
            check(en <= e + 1e-6 && e <= z + 1e-6, || format!("{en} ≤ {e} ≤ {z} fails"))
        })
        .collect();
    suite("state/ordering-chain", cases)
}

fn state_binegativity(seed: u64) -> SuiteResult {
    let cases = (0..8)
        .map(|i| {
            let r = random_density(p(2, 2), seed.wrapping_add(50 + i));
            let e = ek(&r)?;
            let en = log_negativity(&r);
            check(binegativity_holds(&r) && (e - en).abs() <= 1e-6, || format!("E = {e}, E_N = {en}"))
        })
        .collect();
    suite("state/binegativity-collapse", cases)
}

fn state_additivity(seed: u64) -> SuiteResult {
    let cases = (0..3)
        .map(|i| {
            let r = random_density(p(2, 2), seed.wrapping_add(100 + 2 * i));
            let w = random_density(p(2, 2), seed.wrapping_add(101 + 2 * i));
            let (a, b, ab) = (ek(&r)?, ek(&w)?, ek(&r.tensor(&w))?);
            check((ab - a - b).abs() <= 1e-4, || format!("{ab} vs {a} + {b}"))
        })
        .collect();
    suite("state/additivity", cases)
}

fn state_monotonicity(seed: u64) -> SuiteResult {
    let twirl = ch(ChannelFamily::IsotropicTwirl { m: 2 });
    let mut cases = Vec::new();
    for i in 0..8u64 {
        let r = random_density(p(2, 2), seed.wrapping_add(200 + i));
        let local = tensor(
            &random_channel(2, 2, 2, seed.wrapping_add(300 + i)),
            &random_channel(2, 2, 1 + (i as usize % 2), seed.wrapping_add(400 + i)),
        )
        .expect("dims match");
        let replace_b = tensor(&ch(ChannelFamily::Identity { d: 2 }), &completely_dephasing(2)).expect("dims match");
        for op in [&local, &twirl, &replace_b] {
            let case = (|| {
                let before = ek(&r)?;
                let out = apply_bipartite(op, &r, p(2, 2)).map_err(|e| e.to_string())?;
                let after = ek(&out)?;
                check(after <= before + 1e-5, || format!("{after} > {before}"))
            })();
            cases.push(case);
        }
    }
    suite("state/monotonicity", cases)
}

fn state_non_convexity(_: u64) -> SuiteResult {
    let t = non_convex_triple();
    let case = (|| {
        let (a, b, m) = (ek(&t.rho1)?, ek(&t.rho2)?, ek(&t.mixture)?);
        check(m > 0.5 * a + 0.5 * b + 0.05, || format!("{m} vs {a}, {b}"))
    })();
    suite("state/non-convexity", vec![case])
}

fn state_non_monogamy(_: u64) -> SuiteResult {
    let psi = monogamy_triple();
    let case = (|| {
        let ab = ek(&psi.marginal(Pair::AB))?;
        let ac = ek(&psi.marginal(Pair::AC))?;
        let a_bc = ek(&psi.cut(Cut::ABc))?;
        let want = 2.0 * 1.5f64.log2() - 1.0;
        let got = ab + ac - a_bc;
        check((got - want).abs() <= 1e-4, || format!("{got} vs {want}"))
    })();
    suite("state/non-monogamy", vec![case])
}

fn state_one_shot(seed: u64) -> SuiteResult {
    let cases = (0..3)
        .map(|i| {
            let r = random_density(p(2, 2), seed.wrapping_add(500 + i));
            let o = one_shot_ppt_cost(&r).map_err(|e| e.to_string())?;
            let ok = o.e_kappa_bits <= 0.0
                || (o.sandwich.0 - 1e-4 <= o.cost_bits && o.cost_bits <= o.sandwich.1 + 1e-4);
            check(ok, || format!("cost {} outside {:?}", o.cost_bits, o.sandwich))
        })
        .collect();
    suite("state/one-shot-sandwich", cases)
}

fn state_dilution(seed: u64) -> SuiteResult {
    let mut states = vec![crate::states::make_omega_hat(0.6).expect("valid"), max_entangled(2)];
    states.push(random_density(p(2, 2), seed.wrapping_add(600)));
    let cases = states
        .iter()
        .map(|r| {
            let o = one_shot_ppt_cost(r).map_err(|e| e.to_string())?;
            let d = build_dilution_channel(r, o.m_integer, &o.g_integer).map_err(|e| e.to_string())?;
            check(d.report.all_pass(), || format!("{:?}", d.report))
        })
        .collect();
    suite("state/dilution-round-trip", cases)
}

fn channel_additivity(seed: u64) -> SuiteResult {
    let chans = qubit_channels(seed, 4);
    let cases = (0..2)
        .map(|i| {
            let (n, m) = (&chans[2 * i], &chans[2 * i + 1]);
            let nm = tensor(n, m).map_err(|e| e.to_string())?;
            let (a, b, ab) = (ekc(n)?, ekc(m)?, ekc(&nm)?);
            check((ab - a - b).abs() <= 1e-4, || format!("{ab} vs {a} + {b}"))
        })
        .collect();
    suite("channel/additivity", cases)
}

fn channel_amortization(seed: u64) -> SuiteResult {
    let mut cases = Vec::new();
    let chans = [
        ch(ChannelFamily::Dephasing { q: 0.2, d: 2 }),
        ch(ChannelFamily::AmplitudeDamping { r: 0.3 }),
        random_channel(2, 2, 2, seed.wrapping_add(700)),
    ];
    for (k, n) in chans.iter().enumerate() {
        let en = match ekc(n) {
            Ok(v) => v,
            Err(e) => {
                cases.push(Err(e));
                continue;
            }
        };
        // Φ on A'A with a product B' reaches the bound for covariant channels.
        let phi = max_entangled(2).op().kron(&HermitianOperator::from_real_diagonal(&[1.0, 0.0]));
        let mut inputs = vec![phi];
        for i in 0..3 {
            inputs.push(random_density(p(4, 2), seed.wrapping_add(800 + 10 * k as u64 + i)).op().clone());
        }
        let mut best_gap = f64::NEG_INFINITY;
        for rho in &inputs {
            let case = (|| {
                let before = ek(&DensityMatrix::new(rho.clone(), p(4, 2)).map_err(|e| e.to_string())?)?;
                let after = ek(&apply_middle(n, rho, [2, 2, 2]).map_err(|e| e.to_string())?)?;
                best_gap = best_gap.max(after - before);
                check(after - before <= en + 1e-5, || format!("{after} − {before} > {en}"))
            })();
            cases.push(case);
        }
        if k == 0 {
            cases.push(check((best_gap - en).abs() <= 1e-5, || format!("sup {best_gap} vs {en}")));
        }
    }
    suite("channel/amortization", cases)
}

fn channel_superchannel(seed: u64) -> SuiteResult {
    let cases = (0..4u64)
        .map(|i| {
            let n = random_channel(2, 2, 2, seed.wrapping_add(900 + i));
            let pre = random_channel(2, 2, 2, seed.wrapping_add(950 + i));
            let post = random_channel(2, 2, 1 + i as usize % 2, seed.wrapping_add(990 + i));
            let sandwich = compose(&post, &compose(&n, &pre).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            let (before, after) = (ekc(&n)?, ekc(&sandwich)?);
            check(after <= before + 1e-5, || format!("{after} > {before}"))
        })
        .collect();
    suite("channel/superchannel-monotonicity", cases)
}

fn channel_faithfulness(seed: u64) -> SuiteResult {
    let mut chans = qubit_channels(seed, 3);
    chans.push(completely_dephasing(2));
    chans.push(ch(ChannelFamily::Depolarizing { p: 0.8, d: 2 }));
    chans.push(ch(ChannelFamily::Erasure { p: 1.0, d: 2 }));
    let cases = chans
        .iter()
        .map(|n| {
            let e = ekc(n)?;
            let binding = channel_checks(n).ppt_binding;
            check((e <= 1e-6) == binding, || format!("E = {e}, binding = {binding}"))
        })
        .collect();
    suite("channel/faithfulness", cases)
}

fn channel_normalization(seed: u64) -> SuiteResult {
    let mut chans = qubit_channels(seed, 3);
    chans.push(random_channel(2, 3, 2, seed.wrapping_add(1100)));
    chans.push(random_channel(3, 2, 2, seed.wrapping_add(1101)));
    chans.push(ch(ChannelFamily::Identity { d: 3 }));
    let cases = chans
        .iter()
        .map(|n| {
            let e = ekc(n)?;
            let bound = (n.d_in().min(n.d_out()) as f64).log2();
            check(e <= bound + 1e-6, || format!("{e} > {bound}"))
        })
        .collect();
    suite("channel/normalization-bound", cases)
}

fn channel_non_convexity(_: u64) -> SuiteResult {
    let id = ch(ChannelFamily::Identity { d: 2 });
    let cd = completely_dephasing(2);
    let case = (|| {
        let mix = QuantumChannel::from_choi(id.choi().add(cd.choi()).scale(0.5), 2, 2).map_err(|e| e.to_string())?;
        let (a, b, m) = (ekc(&id)?, ekc(&cd)?, ekc(&mix)?);
        check(
            (m - 1.5f64.log2()).abs() <= 1e-5 && m > 0.5 * (a + b),
            || format!("{m} vs {a}, {b}"),
        )
    })();
    suite("channel/non-convexity", vec![case])
}

fn channel_covariant(_: u64) -> SuiteResult {
    let mut chans = Vec::new();
    for x in [0.1, 0.3, 0.5, 0.7, 0.9] {
        chans.push(ch(ChannelFamily::Erasure { p: x, d: 2 }));
        chans.push(ch(ChannelFamily::Depolarizing { p: x, d: 2 }));
        chans.push(ch(ChannelFamily::Dephasing { q: x, d: 2 }));
    }
    let cases = chans
        .iter()
        .map(|n| {
            let (a, b) = (ekc(n)?, ek(&n.choi_state())?);
            check((a - b).abs() <= 1e-5, || format!("{:?}: {a} vs {b}", n.family()))
        })
        .collect();
    suite("channel/covariant-collapse", cases)
}

fn channel_q_theta(seed: u64) -> SuiteResult {
    let mut chans = qubit_channels(seed, 3);
    chans.push(ch(ChannelFamily::AmplitudeDamping { r: 0.5 }));
    let non_qubit = random_channel(2, 3, 2, seed.wrapping_add(1200));
    let mut cases: Vec<Case> = chans
        .iter()
        .map(|n| {
            let (q, e) = (q_theta(n).map_err(|e| e.to_string())?, ekc(n)?);
            check((q - e).abs() <= 1e-4, || format!("Q_Θ {q} vs E_κ {e}"))
        })
        .collect();
    cases.push((|| {
        let (q, e) = (q_theta(&non_qubit).map_err(|e| e.to_string())?, ekc(&non_qubit)?);
        check(q <= e + 1e-5, || format!("Q_Θ {q} > E_κ {e}"))
    })());
    suite("channel/q-theta-bound", cases)
}

fn channel_one_shot(seed: u64) -> SuiteResult {
    let chans = [
        ch(ChannelFamily::Dephasing { q: 0.25, d: 2 }),
        random_channel(2, 2, 2, seed.wrapping_add(1300)),
    ];
    let cases = chans
        .iter()
        .map(|n| {
            let r = one_shot_channel_cost(n).map_err(|e| e.to_string())?;
            let o = r.one_shot.expect("filled by one_shot_channel_cost");
            let ok = r.e_kappa_bits <= 0.0
                || (o.sandwich.0 - 1e-4 <= o.one_shot_bits && o.one_shot_bits <= o.sandwich.1 + 1e-4);
            let sim = crate::channel_measures::build_parallel_simulation(n, o.m_integer, &o.q_integer)
                .map_err(|e| e.to_string())?;
            check(ok && sim.report.all_pass(), || format!("{} in {:?}; {:?}", o.one_shot_bits, o.sandwich, sim.report))
        })
        .collect();
    suite("channel/one-shot-sandwich", cases)
}

/// Dual-route agreement used by the strong-duality checks.
pub fn duality_gap_bits(rho: &DensityMatrix) -> Result<f64, MeasureError> {
    let a = e_kappa_primal(rho)?;
    let b = e_kappa_dual(rho)?;
    Ok((a.primal_bits - b.dual_bits).abs())
}
