//! One PASS/FAIL line per acceptance criterion, exact equality at every
//! stated order.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qseries::qlaurent::exp_int;
use qseries::verify::{builtin_registry, run_instance, run_suite, Binding, IdentityRecord, ParamValue, Status, VerifyReport};

const SEED: u64 = 20_251_016;
const LAWS: &[&str] = &[
    "theta-law-3.1a",
    "theta-law-3.1b",
    "theta-law-3.1b-reflect",
    "theta-law-3.1c",
    "theta-law-3.1d",
    "theta-law-3.1d-n3",
    "theta-law-3.1d-n4",
    "theta-law-3.1e",
    "theta-law-3.1f",
    "theta-law-3.1f-alt",
    "appell-law-3.2a",
    "appell-law-3.2b",
    "appell-law-3.2c",
];
const UNCORRECTED_KP: &[&str] = &["eta-KP-4022", "eta-KP-40diff"];

fn jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn say(ok: bool, n: u32, desc: &str, detail: &str) {
    let mut out = std::io::stdout().lock();
    let tag = if ok { "PASS" } else { "FAIL" };
    writeln!(out, "{tag} {n}. {desc} ({detail})").unwrap();
}

fn note(text: &str) {
    writeln!(std::io::stdout().lock(), "       {text}").unwrap();
}

/// Run every glob at the given order; report the failing labels.
fn run(recs: &[IdentityRecord], globs: &[&str], order: i64) -> (Vec<VerifyReport>, Duration) {
    let start = Instant::now();
    let mut all = Vec::new();
    for g in globs {
        let rep = run_suite(recs, g, Some(exp_int(order)), jobs()).unwrap();
        assert!(!rep.reports.is_empty(), "`{g}` matches nothing");
        all.extend(rep.reports);
    }
    (all, start.elapsed())
}

fn failing(reports: &[VerifyReport]) -> Vec<String> {
    reports.iter().filter(|r| !r.passed()).map(|r| r.to_string()).collect()
}

fn summary(reports: &[VerifyReport], order: i64) -> String {
    let bad = failing(reports);
    if bad.is_empty() {
        format!("{} instances through q^{order}", reports.len())
    } else {
        format!("{} of {} instances fail; first: {}", bad.len(), reports.len(), bad[0])
    }
}

fn criterion(n: u32, desc: &str, recs: &[IdentityRecord], globs: &[&str], order: i64) -> bool {
    let (reports, _) = run(recs, globs, order);
    let ok = failing(&reports).is_empty();
    say(ok, n, desc, &summary(&reports, order));
    ok
}

/// `c*q^(a/b)` with `c` in {-3,-2,-1,2,3} and `lo <= a/b <= hi`.
fn monomial(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> String {
    let c = *[-3i64, -2, -1, 2, 3].choose(rng).unwrap();
    let b = rng.gen_range(1..=6i64);
    let a = rng.gen_range(lo * b..=hi * b);
    format!("({c}*q^({a}/{b}))")
}

fn random_binding(rec: &IdentityRecord, rng: &mut ChaCha8Rng) -> Binding {
    rec.params
        .iter()
        .map(|p| {
            let v = match p.name.as_str() {
                "x" | "z" => ParamValue::Text(monomial(rng, -1, 2)),
                _ => p.values.choose(rng).unwrap().clone(),
            };
            (p.name.clone(), v)
        })
        .collect()
}

fn on_pole_locus(r: &VerifyReport) -> bool {
    r.status == Status::Error && r.error.as_deref().is_some_and(|e| e.contains("non-generic"))
}

/// `count` generic random instances of `rec` through `q^order`.
fn random_instances(rec: &IdentityRecord, rng: &mut ChaCha8Rng, count: usize, order: i64) -> Vec<VerifyReport> {
    let mut out = Vec::new();
    let mut draws = 0;
    while out.len() < count {
        draws += 1;
        assert!(draws < 50 * count, "{}: too many instances on a pole locus", rec.name);
        let rep = run_instance(rec, &random_binding(rec, rng), Some(exp_int(order)));
        if !on_pole_locus(&rep) {
            out.push(rep);
        }
    }
    out
}

#[test]
fn acceptance() {
    let recs = builtin_registry();
    let find = |n: &str| recs.iter().find(|r| r.name == n).unwrap_or_else(|| panic!("missing {n}"));
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut passed = BTreeSet::new();
    writeln!(std::io::stdout().lock()).unwrap();

    // anchoring runs first so its outcome can gate the 2/5-level lines
    let kp = run(&recs, &["eta-KP-*"], 300).0;
    let (anchors, _) = run(&recs, &["intlevel-*", "quasi-period-*", "cross-spin-*"], 60);
    let kp_fail: BTreeSet<&str> = kp.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect();
    let corrected_ok = kp.iter().filter(|r| !UNCORRECTED_KP.contains(&r.name.as_str())).all(|r| r.passed());
    let anchored = corrected_ok && failing(&anchors).is_empty();
    let gate = if anchored { "oracle anchored by corrected Kac-Peterson forms" } else { "ORACLE NOT ANCHORED" };

    let (r1, t1) = run(&recs, &["thm-2of5-m0"], 300);
    let ok1 = failing(&r1).is_empty() && t1 <= Duration::from_secs(120) && anchored;
    say(ok1, 1, "2/5-level m=0, r=0..5", &format!("{}; {:.1}s of 120s; {gate}", summary(&r1, 300), t1.as_secs_f64()));
    let (r2, t2) = run(&recs, &["thm-2of5-m2"], 300);
    let ok2 = failing(&r2).is_empty() && t2 <= Duration::from_secs(120) && anchored;
    say(ok2, 2, "2/5-level m=2, r=0..5", &format!("{}; {:.1}s of 120s; {gate}", summary(&r2, 300), t2.as_secs_f64()));
    let (r3, _) = run(&recs, &["thm-1of3", "thm-2of3-*", "thm-1of5"], 300);
    let ok3 = failing(&r3).is_empty() && anchored;
    say(ok3, 3, "1/3, 2/3 and 1/5 levels", &format!("{}; {gate}", summary(&r3, 300)));
    for (n, ok) in [(1, ok1), (2, ok2), (3, ok3)] {
        if ok {
            passed.insert(n);
        }
    }

    if criterion(4, "mock theta conjectures f0, f1", &recs, &["mock-conj-f*"], 500) {
        passed.insert(4);
    }
    if criterion(5, "tenth-order omega identity over Q(w)", &recs, &["tenth-omega"], 300) {
        passed.insert(5);
    }
    if criterion(6, "characters at z=i and z=i*q^5 over Q(i)", &recs, &["prop-6.3-*"], 200) {
        passed.insert(6);
    }

    let (r7, _) = run(&recs, &["prop-master-*"], 300);
    let ok7 = failing(&r7).is_empty();
    say(ok7, 7, "master theta identities, both families", &summary(&r7, 300));
    for family in ["prop-master-m0", "prop-master-m2"] {
        let per_r: Vec<String> = r7
            .iter()
            .filter(|r| r.name == family)
            .map(|r| format!("r={}:{}", r.params["r"], if r.passed() { "ok" } else { "FAIL" }))
            .collect();
        note(&format!("{family}: {}", per_r.join(" ")));
    }
    if ok7 {
        passed.insert(7);
    }

    let forms: Vec<String> = (5..=8).map(|k| format!("prop-appell-forms-4.{k}")).collect();
    let forms: Vec<&str> = forms.iter().map(String::as_str).collect();
    if criterion(8, "alternate Appell forms of the mock theta functions", &recs, &forms, 300) {
        passed.insert(8);
    }
    if criterion(9, "bilateral sums for e in {2,4,6,8,12,14,16,18}", &recs, &["lemma-6.2-bsum"], 300) {
        passed.insert(9);
    }

    let mut r10 = kp.clone();
    r10.extend(anchors.iter().cloned());
    let ok10 = failing(&r10).is_empty();
    say(ok10, 10, "oracle anchoring", &summary(&r10, 300));
    for r in r10.iter().filter(|r| !r.passed()) {
        note(&r.to_string());
    }
    note(&format!(
        "corrected Kac-Peterson variants {}; integral level, quasi-periodicity and cross-spin {}",
        if corrected_ok { "pass" } else { "FAIL" },
        if failing(&anchors).is_empty() { "pass" } else { "FAIL" },
    ));
    if ok10 {
        passed.insert(10);
    }

    let jtp = find("jtp");
    let mut r11: Vec<VerifyReport> = (0..10)
        .map(|_| {
            let x = monomial(&mut rng, 0, 1);
            run_instance(jtp, &vec![("x".to_string(), ParamValue::Text(x))], Some(exp_int(1000)))
        })
        .collect();
    let n_jtp = r11.len();
    for name in LAWS {
        r11.extend(random_instances(find(name), &mut rng, 20, 80));
    }
    let n_laws = r11.len() - n_jtp;
    let appell: Vec<String> = (1..=4).map(|k| format!("prop-appell-forms-4.{k}")).collect();
    let appell: Vec<&str> = appell.iter().map(String::as_str).collect();
    r11.extend(run(&recs, &appell, 300).0);
    r11.extend(run(&recs, &["polar-finite-z-*"], 60).0);
    let ok11 = failing(&r11).is_empty();
    say(ok11, 11, "property suites", &format!("{n_jtp} triple products to q^1000, {n_laws} random law instances to q^80, Eulerian vs Appell forms to q^300, polar-finite to q^60; {} failing", failing(&r11).len()));
    for r in r11.iter().filter(|r| !r.passed()).take(5) {
        note(&r.to_string());
    }
    if ok11 {
        passed.insert(11);
    }

    let serial = run_suite(&recs, "*", None, 1).unwrap().to_json();
    let parallel = run_suite(&recs, "*", None, 8).unwrap().to_json();
    let ok12 = serial == parallel;
    say(ok12, 12, "suite report identical for jobs 1 and 8", &format!("{} bytes", serial.len()));
    if ok12 {
        passed.insert(12);
    }

    // the uncorrected Kac-Peterson forms are the only expected failures
    let expected: BTreeSet<u32> = (1..=12).filter(|&n| n != 10).collect();
    assert_eq!(passed.difference(&BTreeSet::from([10])).copied().collect::<BTreeSet<_>>(), expected);
    assert_eq!(kp_fail, UNCORRECTED_KP.iter().copied().collect::<BTreeSet<_>>());
    assert!(corrected_ok && failing(&anchors).is_empty());
}
