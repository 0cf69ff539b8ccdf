use spikearith_core::verify::{oracle, sweep, Circuit, Mutation, SweepMode, SweepSpec};
use spikearith_core::Error;

#[test]
fn oracle_module_is_self_contained() {
    let src = include_str!("../src/verify/oracle.rs");
    for forbidden in ["crate::", "super::super", "spikearith_core"] {
        assert!(!src.contains(forbidden), "oracle references {forbidden}");
    }
}

#[test]
fn ones_complement_carry_is_greater_than() {
    for k in 1..=8 {
        for a in 0..1i64 << k {
            for b in 0..1i64 << k {
                assert_eq!(oracle::ones_complement_carry(a, b, k), a > b);
            }
        }
    }
}

#[test]
fn seeded_sweeps_reproduce_and_seeds_matter() {
    let spec = |seed| {
        SweepSpec::new(
            vec![Circuit::VariableMult, Circuit::Subtractor],
            vec![7, 8],
            SweepMode::Randomized { samples: 300, seed },
        )
    };
    let a = serde_json::to_string(&sweep(&spec(1)).unwrap()).unwrap();
    let b = serde_json::to_string(&sweep(&spec(1)).unwrap()).unwrap();
    assert_eq!(a, b);
    let mut bad = spec(1);
    bad.mutation = Some(Mutation::AdderCarryWeight { value: 0 });
    let r1 = sweep(&bad).unwrap();
    bad.mode = SweepMode::Randomized {
        samples: 300,
        seed: 2,
    };
    let r2 = sweep(&bad).unwrap();
    assert_ne!(r1.entries[0].counterexample, r2.entries[0].counterexample);
}

#[test]
fn counterexample_is_the_first_failing_case() {
    let mut spec = SweepSpec::new(vec![Circuit::Mux], vec![3], SweepMode::Exhaustive);
    spec.mutation = Some(Mutation::MuxOutThreshold { value: 2 });
    let r = sweep(&spec).unwrap();
    let c = r.entries[0].counterexample.clone().unwrap();
    // A=1, B=0, select=0 is the first case with a set bit to pass
    assert_eq!(
        (c.operands["A"], c.operands["B"], c.operands["select"]),
        (1, 0, 0)
    );
    assert_eq!((c.expected, c.actual), (1, 0));
    assert!(r.to_text().contains("FAIL"));
}

#[test]
fn every_documented_mutation_breaks_its_target() {
    for m in Mutation::documented() {
        let mut spec = SweepSpec::new(vec![m.target()], vec![3], SweepMode::Exhaustive);
        spec.mutation = Some(m);
        assert!(sweep(&spec).unwrap().failures > 0, "{m}");
    }
}

#[test]
fn sweep_arguments_are_validated() {
    let spec = SweepSpec::new(vec![Circuit::VariableMult], vec![9], SweepMode::Exhaustive);
    assert!(matches!(sweep(&spec), Err(Error::ExhaustiveBound { .. })));
    let spec = SweepSpec::new(vec![], vec![3], SweepMode::Exhaustive);
    assert!(matches!(sweep(&spec), Err(Error::InvalidSweep(_))));
    let spec = SweepSpec::new(
        vec![Circuit::Adder],
        vec![3],
        SweepMode::Randomized {
            samples: 0,
            seed: 1,
        },
    );
    assert!(matches!(sweep(&spec), Err(Error::InvalidSweep(_))));
    assert!(matches!(
        Circuit::family("divider"),
        Err(Error::UnknownCircuit(_))
    ));
}
