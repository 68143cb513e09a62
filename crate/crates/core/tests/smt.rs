mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn external_solver_agrees_with_region_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    match common::smt_differential(&mut rng, 150) {
        Ok(Some((sat, unsat))) => {
            assert!(sat > 10 && unsat > 10, "unbalanced sample: {sat} sat, {unsat} unsat");
        }
        Ok(None) => eprintln!("warning: no SMT-LIB solver found (set VMAC_SMT_SOLVER); skipping"),
        Err(e) => panic!("{e}"),
    }
}
