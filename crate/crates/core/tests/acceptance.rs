//! Acceptance suite: one test per criterion, each printing its pass/fail
//! line. `pwlab suite` runs the same checks through the same code path.

use pwlab_core::suite::{run_criterion, CriterionResult};

fn run(id: usize) -> CriterionResult {
    let result = run_criterion(id, 0);
    println!("{}", result.line());
    result
}

macro_rules! criterion_test {
    ($name:ident, $id:expr) => {
        #[test]
        fn $name() {
            let result = run($id);
            assert!(result.pass, "{}", result.line());
        }
    };
}

criterion_test!(criterion_01_two_qubit_example_reproduction, 1);
criterion_test!(criterion_02_finite_maximal_ambiguity_grid, 2);
criterion_test!(criterion_03_controlled_power_trivializer, 3);
criterion_test!(criterion_04_same_law_history_intertwiner, 4);
criterion_test!(criterion_05_arbitrary_history_retargeting, 5);
criterion_test!(criterion_06_spectral_washing, 6);
criterion_test!(criterion_07_noninteraction_insufficiency, 7);
criterion_test!(criterion_08_records_no_go, 8);
criterion_test!(criterion_09_windowed_construction, 9);
criterion_test!(criterion_10_tps_recovery, 10);
