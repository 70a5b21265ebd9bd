use std::time::Instant;

use tas_core::reductions::{aesat_to_staged_uav, eval_aesat, small_family, Formula};
use tas_core::shape_of;
use tas_core::verifiers::{staged_uav, staged_usv, Finding};
use tas_core::Answer;

#[test]
fn true_instance() {
    let f = Formula::from_ints(2, &[[1, 2, 2]], 1).unwrap();
    let out = aesat_to_staged_uav(&f).unwrap();
    let sys = out.staged().unwrap();
    assert_eq!(sys.mix.stages(), 7);
    let t = Instant::now();
    let v = staged_uav(sys, out.target_assembly().unwrap()).unwrap();
    eprintln!("{:?} {:?}", v.finding, t.elapsed());
    assert_eq!(v.answer, Answer::Yes);
}

#[test]
fn false_instance_leaves_a_test() {
    let f = Formula::from_ints(1, &[[1, 1, 1]], 1).unwrap();
    let out = aesat_to_staged_uav(&f).unwrap();
    let v = staged_uav(out.staged().unwrap(), out.target_assembly().unwrap()).unwrap();
    assert_eq!(v.answer, Answer::No);
    assert_eq!(v.finding, Finding::OtherTerminal);
    let w = v.witness.unwrap();
    assert!(out.meta.pieces["test 0"].is_subassembly_of(&w));
    assert!(w.size() < out.target_assembly().unwrap().size());
}

#[test]
fn exhaustive_small_family() {
    let t = Instant::now();
    let mut count = 0;
    for k in 1..=2 {
        for f in small_family(2, 2, k).into_iter().filter(|f| f.clauses.len() == 1) {
            let out = aesat_to_staged_uav(&f).unwrap();
            let sys = out.staged().unwrap();
            let a = out.target_assembly().unwrap();
            let uav = staged_uav(sys, a).unwrap();
            let expect = if eval_aesat(&f) { Answer::Yes } else { Answer::No };
            assert_eq!(uav.answer, expect, "{f}: {}", uav.finding);
            let usv = staged_usv(sys, &shape_of(a)).unwrap();
            assert_eq!(usv.answer, uav.answer, "{f}: usv {}", usv.finding);
            count += 1;
        }
    }
    eprintln!("{count} formulas in {:?}", t.elapsed());
}

