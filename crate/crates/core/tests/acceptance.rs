//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use std::fmt::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tas_core::reductions::{
    aesat_to_2ham_usv, aesat_to_staged_uav, eval_aesat, is_satisfiable, sat_to_staged_uav, small_family,
};
use tas_core::twohanded::{is_producible, producibles};
use tas_core::verifiers::{staged_uav, staged_usv, usv_2ham};
use tas_core::{canonicalize, is_tau_stable, shape_of, Answer};

use common::*;

/// Outcome of one suite: pass/fail, a one-line summary, and a report that
/// must not depend on timing or worker count.
struct Suite {
    ok: bool,
    summary: String,
    report: String,
}

fn stability() -> Suite {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let (mut agree, mut stable, mut report) = (0, 0, String::new());
    let total = 600;
    for i in 0..total {
        let n = 1 + i % 10;
        let (ts, a, edges) = weighted_assembly(&mut r, n);
        let want = brute_min_cut(n, &edges).map_or(true, |c| c >= 2);
        let got = is_tau_stable(&a, &ts, 2).unwrap();
        agree += usize::from(got == want);
        stable += usize::from(got);
        let _ = writeln!(report, "{i} n={n} stable={got}");
    }
    Suite {
        ok: agree == total,
        summary: format!("{agree}/{total} agree ({stable} stable)"),
        report,
    }
}

fn producibility() -> Suite {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let (mut checks, mut wrong, mut report) = (0, 0, String::new());
    let bins = 110;
    for i in 0..bins {
        let bin = random_bin(&mut r);
        let types = bin.tiles().len();
        let res = producibles(&bin, 8).unwrap();
        // Every member, every placement of at most three tiles, and random
        // placements of four to eight tiles.
        let mut candidates = res.producibles.clone();
        candidates.extend(all_assemblies(types, 3));
        for _ in 0..40 {
            let size = r.gen_range(4..=8);
            let cells = polyomino(&mut r, size);
            candidates.push(canonicalize(cells.into_iter().map(|p| (p, r.gen_range(0..types as u32)))).unwrap());
        }
        let mut members = 0;
        for a in &candidates {
            let m = res.is_producible(a);
            members += usize::from(m);
            checks += 1;
            if is_producible(&bin, a) != m {
                wrong += 1;
            }
        }
        let _ = writeln!(report, "{i} types={types} producibles={} members={members}", res.producibles.len());
    }
    Suite {
        ok: wrong == 0,
        summary: format!("{bins} bins, {checks} assemblies, {wrong} disagreements"),
        report,
    }
}

fn sat_family() -> Suite {
    let fam = small_family(2, 2, 0);
    let (mut wrong, mut undecided, mut report) = (0, 0, String::new());
    for f in &fam {
        let out = sat_to_staged_uav(f).unwrap();
        let v = staged_uav(out.staged().unwrap(), out.target_assembly().unwrap()).unwrap();
        undecided += usize::from(v.answer == Answer::Undecided);
        wrong += usize::from(v.answer != Answer::from_bool(!is_satisfiable(f)));
        let _ = writeln!(report, "{f}: {} ({})", v.answer, v.finding);
    }
    Suite {
        ok: wrong == 0 && undecided == 0,
        summary: format!("{} formulas, {wrong} wrong, {undecided} undecided", fam.len()),
        report,
    }
}

fn aesat_2ham_family() -> Suite {
    let (mut n, mut wrong, mut undecided, mut report) = (0, 0, 0, String::new());
    for k in 1..=2 {
        for f in small_family(2, 2, k) {
            let out = aesat_to_2ham_usv(&f).unwrap();
            let v = usv_2ham(out.bin().unwrap(), out.target_shape().unwrap()).unwrap();
            n += 1;
            undecided += usize::from(v.answer == Answer::Undecided);
            wrong += usize::from(v.answer != Answer::from_bool(eval_aesat(&f)));
            let _ = writeln!(report, "k={k} {f}: {} ({})", v.answer, v.finding);
        }
    }
    Suite {
        ok: wrong == 0 && undecided == 0,
        summary: format!("{n} formulas, {wrong} wrong, {undecided} undecided"),
        report,
    }
}

fn aesat_staged_family() -> Suite {
    let (mut n, mut wrong, mut undecided, mut split, mut report) = (0, 0, 0, 0, String::new());
    for k in 1..=2 {
        for f in small_family(2, 2, k) {
            let out = aesat_to_staged_uav(&f).unwrap();
            let (sys, a) = (out.staged().unwrap(), out.target_assembly().unwrap());
            let uav = staged_uav(sys, a).unwrap();
            let usv = staged_usv(sys, &shape_of(a)).unwrap();
            n += 1;
            undecided += usize::from(uav.answer == Answer::Undecided);
            wrong += usize::from(uav.answer != Answer::from_bool(eval_aesat(&f)));
            split += usize::from(usv.answer != uav.answer);
            let _ = writeln!(report, "k={k} {f}: uav {} ({}), usv {}", uav.answer, uav.finding, usv.answer);
        }
    }
    Suite {
        ok: wrong == 0 && undecided == 0 && split == 0,
        summary: format!("{n} formulas, {wrong} wrong, {undecided} undecided, {split} usv mismatches"),
        report,
    }
}

fn structure() -> Suite {
    let mut bad = Vec::new();
    let mut report = String::new();
    let mut checked = 0;
    for f in small_family(2, 2, 0) {
        let out = sat_to_staged_uav(&f).unwrap();
        let sys = out.staged().unwrap();
        let m = f.clauses.len();
        let bar = out.meta.pieces["green bar"].size();
        checked += 1;
        if sys.mix.stages() != 4 || sys.mix.bins[0] != 22 || bar != 4 * m {
            bad.push(format!("sat {f}: {} stages, {} stage-1 bins, green bar {bar}", sys.mix.stages(), sys.mix.bins[0]));
        }
        let _ = writeln!(report, "sat {f}: stages={} bins={:?} bar={bar}", sys.mix.stages(), sys.mix.bins);
    }
    for k in 1..=2 {
        for f in small_family(2, 2, k) {
            let m = f.clauses.len();
            let out = aesat_to_staged_uav(&f).unwrap();
            let sys = out.staged().unwrap();
            let green = out.meta.pieces["green bar"].size();
            checked += 1;
            if sys.mix.stages() != 7 || green != 4 * m {
                bad.push(format!("staged {f}: {} stages, green bar {green}", sys.mix.stages()));
            }
            let out2 = aesat_to_2ham_usv(&f).unwrap();
            let bar = out2.meta.pieces["assignment bar"].size();
            checked += 1;
            if bar != 4 * f.num_vars {
                bad.push(format!("2ham {f}: assignment bar {bar}"));
            }
            let _ = writeln!(report, "k={k} {f}: stages={} green={green} bar={bar}", sys.mix.stages());
        }
    }
    Suite {
        ok: bad.is_empty(),
        summary: if bad.is_empty() { format!("{checked} outputs checked") } else { bad.join("; ") },
        report,
    }
}

fn deciders() -> Suite {
    let mut r = ChaCha8Rng::seed_from_u64(7);
    let (mut checks, mut failures, mut report) = (0, Vec::new(), String::new());
    let systems = 60;
    for i in 0..systems {
        let (sys, run) = small_staged(&mut r, 8);
        match check_deciders(&sys, &run, 20) {
            Ok(c) => {
                checks += c;
                let _ = writeln!(report, "{i} stages={:?} outputs={} checks={c}", sys.mix.bins, run.output.len());
            }
            Err(e) => {
                let _ = writeln!(report, "{i} FAIL {e}");
                failures.push(format!("system {i}: {e}"));
            }
        }
    }
    Suite {
        ok: failures.is_empty(),
        summary: if failures.is_empty() {
            format!("{systems} systems, {checks} comparisons")
        } else {
            failures.join("; ")
        },
        report,
    }
}

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Suite,
}

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap().install(f)
}

fn main() {
    // Nothing to enumerate for test discovery.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria = [
        Criterion { name: "stability oracle", limit: Duration::from_secs(10), run: stability },
        Criterion { name: "producibility oracle", limit: Duration::from_secs(60), run: producibility },
        Criterion { name: "3-SAT staged family", limit: Duration::from_secs(600), run: sat_family },
        Criterion { name: "forall-exists 2HAM family", limit: Duration::from_secs(600), run: aesat_2ham_family },
        Criterion { name: "forall-exists staged family", limit: Duration::from_secs(1200), run: aesat_staged_family },
        Criterion { name: "structural counts", limit: Duration::from_secs(600), run: structure },
        Criterion { name: "decider oracle", limit: Duration::from_secs(600), run: deciders },
    ];
    let mut all_ok = true;
    let mut first_reports = Vec::new();
    for (i, c) in criteria.iter().enumerate() {
        let t = Instant::now();
        let s = in_pool(1, c.run);
        let took = t.elapsed();
        let ok = s.ok && took <= c.limit;
        all_ok &= ok;
        println!(
            "{} {}. {}: {} in {:.1}s (limit {}s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            c.name,
            s.summary,
            took.as_secs_f64(),
            c.limit.as_secs()
        );
        first_reports.push(s.report);
    }
    let mut same = 0;
    let mut differing = Vec::new();
    for (i, c) in criteria.iter().enumerate() {
        let again = in_pool(4, c.run);
        if again.report == first_reports[i] {
            same += 1;
        } else {
            differing.push(c.name);
        }
    }
    let ok = differing.is_empty();
    all_ok &= ok;
    println!(
        "{} 8. determinism: {same}/{} suite reports identical at 1 and 4 workers{}",
        if ok { "PASS" } else { "FAIL" },
        criteria.len(),
        if ok { String::new() } else { format!(" (differ: {})", differing.join(", ")) }
    );
    if !all_ok {
        std::process::exit(1);
    }
}
