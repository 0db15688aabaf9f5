//! Property tests for the structural invariants.

use bogflow_core::fockspace::{
    assemble_hbog, ground_state_dense_full, sector_count, ModePair, ModelParams, PotentialSpec,
    SectorBasis, ORACLE_RESIDUAL,
};
use bogflow_core::threemode::{check_g, z_max};
use proptest::prelude::*;

fn arb_spec() -> impl Strategy<Value = PotentialSpec> {
    (2u32..=20, 1usize..=4, 2f64..50.0).prop_map(|(half_n, m, phi0)| {
        let n = 2 * half_n;
        let params = ModelParams::new(n, 1, 1.0).unwrap();
        let pairs = (0..m)
            .map(|l| ModePair::new(vec![l as i64 + 1], 1.0, phi0 * (l as f64 + 1.0)).unwrap())
            .collect();
        PotentialSpec::new(params, 0.0, pairs).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn basis_cardinality_formula(spec in arb_spec()) {
        let basis = SectorBasis::build(&spec).unwrap();
        prop_assert_eq!(basis.len() as u128, sector_count(spec.params.n, spec.mode_count()));
    }

    #[test]
    fn assembled_operators_symmetric_and_number_conserving(spec in arb_spec()) {
        let basis = SectorBasis::build(&spec).unwrap();
        let active: Vec<usize> = (0..spec.mode_count()).collect();
        let op = assemble_hbog(&spec, &basis, &active);
        // both triangles from one formula: exact symmetry
        prop_assert_eq!(op.asymmetry(), 0.0);
        // every entry connects states of equal total particle number
        for &(r, c, _) in &op.entries {
            let total = |s: &[u32]| 2 * s.iter().sum::<u32>();
            let nr = total(basis.state(r as usize));
            let nc = total(basis.state(c as usize));
            prop_assert!(nr <= spec.params.n && nc <= spec.params.n);
        }
    }

    #[test]
    fn oracle_residual_contract(spec in arb_spec()) {
        let basis = SectorBasis::build(&spec).unwrap();
        if basis.len() > 600 {
            return Ok(());
        }
        let active: Vec<usize> = (0..spec.mode_count()).collect();
        let dense = assemble_hbog(&spec, &basis, &active).to_dense();
        let gs = ground_state_dense_full(&dense).unwrap();
        prop_assert!(gs.residual <= ORACLE_RESIDUAL * (1.0 + dense.norm_one()));
    }

    #[test]
    fn gcheck_nondecreasing_in_z(
        half_n in 5u32..=40,
        eps in 0.05f64..0.3,
        lo_frac in 0.1f64..2.0,
        hi_frac in 0.0f64..0.9,
    ) {
        let n = 2 * half_n;
        let k2 = (2.0 * std::f64::consts::PI).powi(2);
        let phi = k2 / eps;
        let e = bogflow_core::threemode::bogoliubov_energy(k2, phi);
        let z1 = e - lo_frac * phi;
        let z2 = z1 + hi_frac * (z_max(n, k2, phi) - z1);
        prop_assume!(z1 < z2);
        let t1 = check_g(z1, n, k2, phi);
        let t2 = check_g(z2, n, k2, phi);
        if let (Ok(t1), Ok(t2)) = (t1, t2) {
            for (a, b) in t1.values.iter().zip(t2.values.iter()) {
                prop_assert!(a <= b, "Gcheck not monotone: {} > {}", a, b);
            }
        }
    }
}
