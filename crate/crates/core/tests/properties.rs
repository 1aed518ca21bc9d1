use dadda_core::adders::{build_cla, build_rca, overflow_width, BecVariant, BlockSpec, FinalAdderPlan};
use dadda_core::analysis::{critical_depth, GateCostModel};
use dadda_core::multiplier::{build, verify, MultiplierConfig, Variant, VerifyMode};
use dadda_core::netlist::{GateKind, NetId, NetlistBuilder};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// RCA and CLA against integer addition: about 10^5 cases over widths 1..=70.
#[test]
fn adders_match_integer_addition_up_to_70_bits() {
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let mut total = 0;
    for w in 1..=70usize {
        let mut b = NetlistBuilder::new();
        let x = b.add_input("x", w).unwrap();
        let y = b.add_input("y", w).unwrap();
        let cin = b.add_input("cin", 1).unwrap()[0];
        let (s, c) = build_rca(&x, &y, cin, &mut b).unwrap();
        b.add_output("rca", [s, vec![c]].concat()).unwrap();
        let (s, c) = build_cla(&x, &y, cin, &mut b).unwrap();
        b.add_output("cla", [s, vec![c]].concat()).unwrap();
        let nl = b.finish();
        let mask = (1u128 << w) - 1;
        for _ in 0..23 {
            let vectors: Vec<Vec<u128>> = (0..64)
                .map(|_| vec![rng.gen::<u128>() & mask, rng.gen::<u128>() & mask, rng.gen_range(0..2)])
                .collect();
            let out = nl.unpack_outputs(&nl.simulate_lanes(&nl.pack_words(&vectors).unwrap()).unwrap(), 64);
            for (v, o) in vectors.iter().zip(&out) {
                let want = v[0] + v[1] + v[2];
                assert_eq!(o, &vec![want, want], "width {w}: {v:?}");
            }
            total += 64;
        }
    }
    assert!(total >= 100_000);
}

fn plan_strategy(n: usize) -> impl Strategy<Value = FinalAdderPlan> {
    let k = overflow_width(n);
    (0..=2usize, prop::collection::vec(0..3u32, 0..4)).prop_map(move |(extra, exps)| {
        let cla_width = k + extra;
        let mut rem = n - cla_width;
        let mut blocks = Vec::new();
        for e in exps {
            let width = 4usize << e;
            if width >= rem {
                break;
            }
            blocks.push(BlockSpec {
                width,
                variant: BecVariant::WithCarry,
            });
            rem -= width;
        }
        blocks.push(BlockSpec {
            width: rem,
            variant: BecVariant::Plain,
        });
        FinalAdderPlan { cla_width, blocks }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn any_valid_plan_multiplies_n8(plan in plan_strategy(8)) {
        let d = build(&MultiplierConfig::new(8, Variant::PartitionedHybrid).with_plan(plan)).unwrap();
        prop_assert!(verify(&d.netlist, VerifyMode::Exhaustive).unwrap().pass);
    }

    #[test]
    fn any_valid_plan_multiplies_n16(plan in plan_strategy(16), seed in any::<u64>()) {
        let d = build(&MultiplierConfig::new(16, Variant::PartitionedHybrid).with_plan(plan)).unwrap();
        let r = verify(&d.netlist, VerifyMode::Random { count: 4096, seed }).unwrap();
        prop_assert!(r.pass, "{:?}", r.counterexample);
    }

    #[test]
    fn generation_is_deterministic(n in 4usize..24, v in 0usize..3) {
        let config = MultiplierConfig::new(n, Variant::ALL[v]);
        prop_assert_eq!(build(&config).unwrap().netlist.to_json(), build(&config).unwrap().netlist.to_json());
    }

    #[test]
    fn adding_a_gate_never_lowers_depth(
        ops in prop::collection::vec((0usize..9, any::<prop::sample::Index>(), any::<prop::sample::Index>()), 1..40),
        extra in (0usize..9, any::<prop::sample::Index>(), any::<prop::sample::Index>()),
    ) {
        let model = GateCostModel::default();
        let mut b = NetlistBuilder::new();
        let mut nets: Vec<NetId> = b.add_input("x", 3).unwrap();
        let push = |b: &mut NetlistBuilder, nets: &mut Vec<NetId>, (k, i, j): (usize, prop::sample::Index, prop::sample::Index)| {
            let kind = GateKind::ALL[k];
            let ins: Vec<NetId> = [i.get(nets), j.get(nets)][..kind.arity()].iter().map(|&&n| n).collect();
            let out = b.add_gate(kind, &ins).unwrap();
            nets.push(out);
        };
        for op in ops {
            push(&mut b, &mut nets, op);
        }
        let mut before = b.clone();
        before.add_output("y", nets.clone()).unwrap();
        let d0 = critical_depth(&before.finish(), &model);
        push(&mut b, &mut nets, extra);
        b.add_output("y", nets).unwrap();
        prop_assert!(critical_depth(&b.finish(), &model) >= d0);
    }
}
