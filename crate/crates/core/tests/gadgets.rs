use tas_core::reductions::{
    aesat_to_2ham_usv, aesat_to_staged_uav, assignments, eval_3sat, sat_to_staged_uav, small_family, Formula,
};
use tas_core::combine;

fn bits(a: &[bool]) -> String {
    a.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[test]
fn rows_stack_only_when_consistent_and_satisfied() {
    for f in small_family(2, 2, 0) {
        let out = sat_to_staged_uav(&f).unwrap();
        let ts = out.tiles();
        let (n, m) = (f.num_vars, f.clauses.len());
        let all: Vec<Vec<bool>> = assignments(n).collect();
        // Clause j+1 sits between rows j and j+1.
        let sat = |j: usize, a: &[bool]| eval_3sat(&Formula::new(n, vec![f.clauses[j]], 0).unwrap(), a);
        for j in 0..=m {
            for j2 in 0..=m {
                for a in &all {
                    for b in &all {
                        let r1 = &out.meta.pieces[&format!("row {j} {}", bits(a))];
                        let r2 = &out.meta.pieces[&format!("row {j2} {}", bits(b))];
                        let joined = !combine(r1, r2, ts, 2).unwrap().is_empty();
                        let low = j.min(j2);
                        let expect = a == b && j.abs_diff(j2) == 1 && sat(low, a);
                        assert_eq!(joined, expect, "{f}: row {j} {a:?} with row {j2} {b:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn two_handed_tests_fit_only_matching_true_assemblies() {
    for k in 1..=2 {
        for f in small_family(2, 1, k) {
            let out = aesat_to_2ham_usv(&f).unwrap();
            let ts = out.tiles();
            for beta in assignments(k) {
                let test = &out.meta.pieces[&format!("test {}", bits(&beta))];
                for alpha in assignments(f.num_vars) {
                    let truth = eval_3sat(&f, &alpha);
                    let key = format!("{} {}", if truth { "true" } else { "false" }, bits(&alpha));
                    let Some(grown) = out.meta.pieces.get(&key) else { continue };
                    let fits = !combine(grown, test, ts, 2).unwrap().is_empty();
                    assert_eq!(fits, truth && alpha[..k] == beta[..], "{f}: test {beta:?} on {key}");
                }
            }
        }
    }
}

#[test]
fn staged_tests_fit_only_matching_full_stacks() {
    for k in 1..=2 {
        for f in small_family(2, 2, k) {
            let out = aesat_to_staged_uav(&f).unwrap();
            let ts = out.tiles();
            for beta in assignments(k) {
                let test = &out.meta.pieces[&format!("test {}", bits(&beta))];
                for alpha in assignments(f.num_vars) {
                    let row0 = &out.meta.pieces[&format!("row 0 {}", bits(&alpha))];
                    assert!(combine(row0, test, ts, 2).unwrap().is_empty());
                    if let Some(stack) = out.meta.pieces.get(&format!("stack {}", bits(&alpha))) {
                        assert!(eval_3sat(&f, &alpha));
                        let fits = !combine(stack, test, ts, 2).unwrap().is_empty();
                        assert_eq!(fits, alpha[..k] == beta[..], "{f}: test {beta:?} on {alpha:?}");
                    }
                }
            }
        }
    }
}
