//! Property tests over randomly drawn states, channels and parameters.

use proptest::prelude::*;

use kappa_core::channel_measures::{e_kappa_channel, q_theta, sequential_bounds};
use kappa_core::channels::{apply, channel_checks, compose, make_channel, random_channel, tensor, ChannelFamily};
use kappa_core::io::ObjectSpec;
use kappa_core::matcore::{
    partial_trace_systems, partial_transpose_systems, permute_systems, BipartitePartition, HermitianOperator,
    Subsystem,
};
use kappa_core::state_measures::{e_kappa_dual, e_kappa_primal, log_negativity, z_upper};
use kappa_core::states::{make_isotropic, make_werner, random_density, random_pure, DensityMatrix};

const SDP_TOL: f64 = 1e-6;

fn shape() -> impl Strategy<Value = BipartitePartition> {
    prop_oneof![
        Just(BipartitePartition { d_a: 2, d_b: 2 }),
        Just(BipartitePartition { d_a: 2, d_b: 3 }),
        Just(BipartitePartition { d_a: 3, d_b: 2 }),
    ]
}

fn ek(rho: &DensityMatrix) -> f64 {
    e_kappa_primal(rho).expect("solver converges").value_bits
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_transpose_is_an_involution_preserving_trace(p in shape(), seed in any::<u64>()) {
        let r = random_density(p, seed);
        let once = r.partial_transpose();
        let twice = once.partial_transpose(p, Subsystem::B).unwrap();
        prop_assert!(twice.max_abs_diff(r.op()) < 1e-14);
        prop_assert!((once.trace() - 1.0).abs() < 1e-12);
        // Transposing both factors is the full transpose, whose spectrum is unchanged.
        let full = partial_transpose_systems(r.op().matrix(), &[p.d_a, p.d_b], &[true, true]).unwrap();
        prop_assert!((full - r.op().matrix().transpose()).norm() < 1e-14);
    }

    #[test]
    fn partial_transpose_preserves_inner_products(p in shape(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let (a, b) = (random_density(p, s1), random_density(p, s2));
        let lhs = a.partial_transpose().inner(&b.partial_transpose());
        prop_assert!((lhs - a.op().inner(b.op())).abs() < 1e-13);
    }

    #[test]
    fn partial_trace_of_product_is_the_other_factor(s1 in any::<u64>(), s2 in any::<u64>()) {
        let one = BipartitePartition { d_a: 1, d_b: 2 };
        let a = random_density(BipartitePartition { d_a: 3, d_b: 1 }, s1);
        let b = random_density(one, s2);
        let ab = a.op().kron(b.op());
        let p = BipartitePartition { d_a: 3, d_b: 2 };
        prop_assert!(ab.partial_trace(p, Subsystem::A).unwrap().max_abs_diff(b.op()) < 1e-14);
        prop_assert!(ab.partial_trace(p, Subsystem::B).unwrap().max_abs_diff(a.op()) < 1e-14);
    }

    #[test]
    fn permutation_round_trips(seed in any::<u64>()) {
        let dims = [2usize, 3, 2];
        let r = random_density(BipartitePartition { d_a: 6, d_b: 2 }, seed);
        let fwd = permute_systems(r.op().matrix(), &dims, &[2, 0, 1]).unwrap();
        let back = permute_systems(&fwd, &[2, 2, 3], &[1, 2, 0]).unwrap();
        prop_assert!((back - r.op().matrix()).norm() < 1e-14);
        let kept = partial_trace_systems(&fwd, &[2, 2, 3], &[true, false, false]).unwrap();
        let direct = partial_trace_systems(r.op().matrix(), &dims, &[false, false, true]).unwrap();
        prop_assert!((kept - direct).norm() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn state_measure_chain(p in shape(), seed in any::<u64>()) {
        let r = random_density(p, seed);
        let (en, e, lz) = (log_negativity(&r), ek(&r), z_upper(&r));
        prop_assert!(e >= -SDP_TOL);
        prop_assert!(en <= e + SDP_TOL, "E_N {} > E_kappa {}", en, e);
        prop_assert!(e <= lz + SDP_TOL, "E_kappa {} > log Z {}", e, lz);
        prop_assert!(e <= (p.min_dim() as f64).log2() + SDP_TOL);
        prop_assert_eq!(e <= SDP_TOL, r.is_ppt(1e-9));
    }

    #[test]
    fn primal_and_dual_agree(p in shape(), seed in any::<u64>()) {
        let r = random_density(p, seed);
        let a = e_kappa_primal(&r).unwrap().value_bits;
        let b = e_kappa_dual(&r).unwrap().value_bits;
        prop_assert!((a - b).abs() <= SDP_TOL, "{} vs {}", a, b);
    }

    #[test]
    fn pure_states_collapse_to_log_negativity(p in shape(), seed in any::<u64>()) {
        // Pure states satisfy binegativity, so both routes coincide.
        let r = random_pure(p, seed);
        prop_assert!((ek(&r) - log_negativity(&r)).abs() <= 1e-5);
    }

    #[test]
    fn isotropic_and_werner_are_monotone_in_their_parameter(x in 0.0f64..0.95, dx in 0.01f64..0.05, d in 2usize..4) {
        let hi = (x + dx).min(1.0);
        let a = ek(&make_isotropic(x, d).unwrap());
        let b = ek(&make_isotropic(hi, d).unwrap());
        prop_assert!(a <= b + SDP_TOL);
        let a = ek(&make_werner(x, d).unwrap());
        let b = ek(&make_werner(hi, d).unwrap());
        prop_assert!(a <= b + SDP_TOL);
    }

    #[test]
    fn local_channels_do_not_increase_e_kappa(seed in any::<u64>(), k1 in 1usize..4, k2 in 1usize..4) {
        let r = random_density(BipartitePartition { d_a: 2, d_b: 2 }, seed);
        let n = random_channel(2, 2, k1, seed ^ 0x5151);
        let out = apply(&n, &r).unwrap();
        prop_assert!(ek(&out) <= ek(&r) + 1e-5);
        let m = tensor(&random_channel(2, 2, k2, seed ^ 0xa0a0), &make_channel(ChannelFamily::Identity { d: 2 }).unwrap()).unwrap();
        let out = kappa_core::channels::apply_bipartite(&m, &r, BipartitePartition { d_a: 2, d_b: 2 }).unwrap();
        prop_assert!(ek(&out) <= ek(&r) + 1e-5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_channels_are_valid_and_compose(seed in any::<u64>(), k in 1usize..4, d_out in 2usize..4) {
        let n = random_channel(2, d_out, k, seed);
        let c = channel_checks(&n);
        prop_assert!(c.cp && c.tp);
        let m = random_channel(d_out, 2, k, seed ^ 1);
        let mn = compose(&m, &n).unwrap();
        let c = channel_checks(&mn);
        prop_assert!(c.cp && c.tp);
    }

    #[test]
    fn channel_measure_bounds(seed in any::<u64>(), k in 1usize..4) {
        let n = random_channel(2, 2, k, seed);
        let r = e_kappa_channel(&n).unwrap();
        prop_assert!(r.gap <= SDP_TOL);
        prop_assert!(r.value_bits >= -SDP_TOL && r.value_bits <= 1.0 + SDP_TOL);
        let q = q_theta(&n).unwrap();
        prop_assert!(q <= r.value_bits + 1e-5, "Q_Theta {} > E_kappa {}", q, r.value_bits);
        // Composing with a channel cannot raise the cost.
        let post = random_channel(2, 2, 2, seed ^ 7);
        let after = e_kappa_channel(&compose(&post, &n).unwrap()).unwrap().value_bits;
        prop_assert!(after <= r.value_bits + 1e-5);
    }

    #[test]
    fn sequential_bounds_bracket_n_times_e(e in 0.0f64..2.0, n in 1usize..6) {
        let (lo, hi) = sequential_bounds(e, n);
        prop_assert!(lo <= hi + 1e-12);
        prop_assert!(lo <= n as f64 * e + 1e-12);
        if e > 0.0 {
            prop_assert!(n as f64 * e <= hi + 1e-9);
        }
    }

    #[test]
    fn object_spec_round_trips(t in 0.0f64..1.0, d in 2usize..5) {
        let spec = ObjectSpec::parse(&format!(r#"{{"kind":"isotropic","params":{{"t":{t},"d":{d}}}}}"#)).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        prop_assert_eq!(ObjectSpec::parse(&text).unwrap(), spec.clone());
        let r = spec.to_state().unwrap();
        let direct = make_isotropic(t, d).unwrap();
        prop_assert!(r.op().max_abs_diff(direct.op()) < 1e-15);
        let moved = spec.with_param("t", 0.5);
        prop_assert!(moved.has_param("t"));
    }
}

#[test]
fn hermitian_identity_is_its_own_partial_transpose() {
    let p = BipartitePartition { d_a: 3, d_b: 3 };
    let id = HermitianOperator::identity(9);
    assert_eq!(id.partial_transpose(p, Subsystem::B).unwrap(), id);
}
