use ksflow::ckks::{keygen, keyswitch, keyswitch_reference, CkksParams};
use ksflow::dataflow::{verify_equivalence_on, ScheduleSpec};
use ksflow::rns::{Domain, RnsPolynomial};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn every_schedule_matches_the_reference(seed in any::<u64>(), dnum in 1usize..=6, level in 1usize..=6) {
        let params = CkksParams::builder(256, 6, dnum).build().unwrap();
        let (_, evk) = keygen(&params, seed).unwrap();
        let basis = params.level_basis(level).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let rows = basis.moduli().iter().map(|&q| (0..256).map(|_| rng.random_range(0..q)).collect()).collect();
        let d = RnsPolynomial::from_rows(&basis, rows, Domain::Ntt).unwrap();
        let reference = keyswitch_reference(&params, &d, &evk).unwrap();
        for spec in ScheduleSpec::all() {
            let (out, trace) = keyswitch(&params, &d, &evk, spec).unwrap();
            prop_assert_eq!(&out, &reference, "{}", spec);
            prop_assert_eq!(trace.launches, ksflow::ExecutionTrace::symbolic(&params.shape(), level, spec, &trace.costs).launches);
        }
    }
}

#[test]
fn zero_input_gives_zero_output() {
    let params = CkksParams::builder(1 << 10, 6, 3).build().unwrap();
    let (_, evk) = keygen(&params, 0).unwrap();
    let zero = RnsPolynomial::zero(&params.level_basis(6).unwrap(), Domain::Ntt);
    let report = verify_equivalence_on(&params, &evk, &[zero.clone()], None).unwrap();
    assert!(report.all_equal());
    let (out, _) = keyswitch(&params, &zero, &evk, ScheduleSpec::dpoc(10).unwrap()).unwrap();
    assert_eq!(out.c0, zero);
    assert_eq!(out.c1, zero);
}
