//! Acceptance gate: twelve criteria, one PASS/FAIL line each. Exits
//! non-zero when any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use defsum::criteria::{criterion_c_a, section_test, CriteriaParams, Outcome};
use defsum::harness::{
    catalog_cases, check_agnew_forward, check_agnew_reverse, check_ksi_identity, check_regularity, check_s_lemma,
    check_sigma_k_implies_conull, SuiteReport,
};
use defsum::means::{cesaro_mean, deferred_mean, zeta};
use defsum::{CatalogMatrix, DefermentSchedule, InfiniteMatrix, Seq, SpaceId};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn within(label: &str, elapsed: Duration, limit_s: f64) -> (bool, String) {
    let s = elapsed.as_secs_f64();
    (s < limit_s, format!("{label} {s:.2}s (limit {limit_s}s)"))
}

fn suite_line(r: &SuiteReport) -> String {
    format!("{}: {} passed, {} failed, {} skipped", r.name, r.passed, r.failed, r.skipped)
}

fn first_failure(r: &SuiteReport) -> String {
    r.cases
        .iter()
        .find(|c| !c.pass)
        .map(|c| format!(" first failure: {} {}", c.label, c.detail))
        .unwrap_or_default()
}

fn leading_zero_window() -> DefermentSchedule {
    DefermentSchedule::custom("p=0,q=n", |_| 0, |n| n, true)
}

fn reduction_exactness() -> Verdict {
    let start = Instant::now();
    let horizon = 10_000;
    let d = leading_zero_window().with_horizon(horizon);
    let mut mismatches = 0usize;
    let mut oracle_gap = 0.0f64;
    for seed in 0..100u64 {
        let x = Seq::random(seed, 0.0);
        let a = deferred_mean(&x, &d).expect("valid schedule");
        let c = cesaro_mean(&x);
        let mut running = 0.0f64;
        for n in 1..=horizon {
            let (u, v) = (a.at(n), c.at(n));
            if u.to_bits() != v.to_bits() {
                mismatches += 1;
            }
            running += x.at(n);
            oracle_gap = oracle_gap.max((u - running / n as f64).abs());
        }
    }
    let (fast, timing) = within("runtime", start.elapsed(), 5.0);
    verdict(
        mismatches == 0 && oracle_gap < 1e-12 && fast,
        format!("{mismatches} bit mismatches over 100 x 10^4 means; naive-sum gap {oracle_gap:.1e}; {timing}"),
    )
}

fn regularity() -> Verdict {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for d in [DefermentSchedule::cesaro(), DefermentSchedule::block(), DefermentSchedule::poly(1, 2).unwrap()] {
        let r = check_regularity(2024, 200, &d, 1e-3, 10_000).expect("suite runs");
        ok &= r.all_passed() && r.passed == 200;
        lines.push(suite_line(&r) + &first_failure(&r));
    }
    let (fast, timing) = within("runtime", start.elapsed(), 30.0);
    verdict(ok && fast, format!("{}; {timing}", lines.join("; ")))
}

fn ksi_identity() -> Verdict {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for d in [DefermentSchedule::cesaro(), DefermentSchedule::block()] {
        let r = check_ksi_identity(7, 500, &d, 1000).expect("suite runs");
        ok &= r.all_passed();
        lines.push(suite_line(&r) + &first_failure(&r));
    }
    let (fast, timing) = within("runtime", start.elapsed(), 10.0);
    verdict(ok && fast, format!("{}; {timing}", lines.join("; ")))
}

fn s_lemma() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for d in [DefermentSchedule::cesaro(), DefermentSchedule::block(), DefermentSchedule::poly(1, 2).unwrap()] {
        let r = check_s_lemma(&d, 100, 1000).expect("suite runs");
        let get = |prefix: &str| r.cases.iter().find(|c| c.label.starts_with(prefix)).expect("named check");
        let round = get("round-trip");
        let literal = get("literal S w = e - zeta");
        let shifted = get("shifted");
        ok &= round.pass && literal.pass;
        parts.push(format!(
            "{}: round-trip {}, S(wedge) = e - zeta {} ({}), shifted form {}",
            d.describe(),
            if round.pass { "ok" } else { "FAIL" },
            if literal.pass { "ok" } else { "FAIL" },
            literal.detail,
            if shifted.pass { "ok" } else { "FAIL" },
        ));
    }
    verdict(ok, parts.join("; "))
}

fn zeta_display() -> Verdict {
    let mut grid: Vec<(DefermentSchedule, usize)> = vec![(
        DefermentSchedule::custom("p=2,q=6", |_| 2, |_| 6, true).with_horizon(1),
        1,
    )];
    for d in [DefermentSchedule::cesaro(), DefermentSchedule::block(), DefermentSchedule::poly(1, 2).unwrap()] {
        for n in 1..=40 {
            grid.push((d.clone(), n));
        }
    }
    let mut bad = 0usize;
    for (d, n) in &grid {
        let (p, q) = d.window(*n).expect("valid window");
        let w = (q - p) as f64;
        let z: Seq = zeta(d, *n).expect("valid window");
        for j in 1..=q + 5 {
            // (0, ..., 0, 1/w, 2/w, ..., (w-1)/w, 1, 1, ...) with p + 1 zeros
            let expected = if j <= p + 1 {
                0.0
            } else if j <= q {
                (j - p - 1) as f64 / w
            } else {
                1.0
            };
            if z.at(j).to_bits() != expected.to_bits() {
                bad += 1;
            }
        }
    }
    let d = DefermentSchedule::custom("p=2,q=6", |_| 2, |_| 6, true).with_horizon(1);
    let head = zeta::<f64>(&d, 1).unwrap().head(8);
    let pinned = head == vec![0.0, 0.0, 0.0, 0.25, 0.5, 0.75, 1.0, 1.0];
    verdict(
        bad == 0 && pinned,
        format!("{} windows, {bad} coordinate mismatches; p=2,q=6 gives {head:?}", grid.len()),
    )
}

fn criterion_schedules() -> Vec<DefermentSchedule> {
    vec![
        DefermentSchedule::cesaro(),
        DefermentSchedule::block(),
        DefermentSchedule::poly(1, 2).unwrap(),
        DefermentSchedule::parse("unit").unwrap(),
    ]
}

fn identity_not_conull() -> Verdict {
    let params = CriteriaParams::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for d in criterion_schedules() {
        let r = criterion_c_a(&CatalogMatrix::Identity, &d, &params).expect("criterion runs");
        let gap = r.trace.iter().map(|&(_, t)| (t - 1.0).abs()).fold(0.0, f64::max);
        let good = r.trace.len() == 200 && gap <= 1e-12 && r.outcome == Outcome::Fails;
        ok &= good;
        parts.push(format!("{}: max |T_n - 1| {gap:.1e}, {}", d.describe(), r.outcome.as_str()));
    }
    verdict(ok, parts.join("; "))
}

fn difference_schedule_sensitivity() -> Verdict {
    let params = CriteriaParams::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, expected) in [
        (DefermentSchedule::cesaro(), Outcome::Holds),
        (DefermentSchedule::block(), Outcome::Holds),
        (DefermentSchedule::poly(1, 2).unwrap(), Outcome::Holds),
        (DefermentSchedule::parse("unit").unwrap(), Outcome::Fails),
    ] {
        let r = criterion_c_a(&CatalogMatrix::Difference, &d, &params).expect("criterion runs");
        let gap = r
            .trace
            .iter()
            .map(|&(n, t)| (t - 1.0 / d.width(n).unwrap() as f64).abs())
            .fold(0.0, f64::max);
        let good = gap <= 1e-12 && r.outcome == expected;
        ok &= good;
        parts.push(format!(
            "{}: max |T_n - 1/(q-p)| {gap:.1e}, {} (expected {})",
            d.describe(),
            r.outcome.as_str(),
            expected.as_str()
        ));
    }
    verdict(ok, parts.join("; "))
}

fn criterion_section_coherence() -> Verdict {
    let params = CriteriaParams::default();
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    let mut count = 0;
    for a in CatalogMatrix::all() {
        for d in [DefermentSchedule::cesaro(), DefermentSchedule::block()] {
            let c = criterion_c_a(&a, &d, &params).expect("criterion runs");
            let s = section_test(&SpaceId::C, &a, &Seq::ones(), &d, &params).expect("section test runs");
            count += 1;
            let gap = c
                .trace
                .iter()
                .zip(&s.trace)
                .map(|(&(n, u), &(m, v))| if n == m { (u - v).abs() } else { f64::INFINITY })
                .fold(0.0, |acc: f64, g| if g.is_nan() { f64::INFINITY } else { acc.max(g) });
            if gap > 1e-10 || c.trace.len() != s.trace.len() {
                bad.push(format!("{} {}: gap {gap:.1e}", a.descriptor(), d.describe()));
            }
            worst = worst.max(gap);
        }
    }
    verdict(
        bad.is_empty(),
        format!("{count} configurations, worst gap {worst:.1e}{}", if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }),
    )
}

fn tail_consistency() -> Verdict {
    let mut worst = 0.0f64;
    let mut errors = 0usize;
    for a in CatalogMatrix::all() {
        for i in 1..=200 {
            for k in 1..=200 {
                match (a.row_tail(i, k - 1), a.row_tail(i, k)) {
                    (Ok(before), Ok(after)) => worst = worst.max((before - after - a.entry(i, k)).abs()),
                    _ => errors += 1,
                }
            }
        }
    }
    verdict(
        worst <= 1e-12 && errors == 0,
        format!("{} matrices, i,k <= 200: max |tail(k-1) - tail(k) - a_ik| {worst:.1e}, {errors} tail errors", CatalogMatrix::all().len()),
    )
}

fn agnew() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    let forward = [
        DefermentSchedule::block(),
        DefermentSchedule::custom("p=n,q=3n", |n| n, |n| 3 * n, true),
    ];
    for d in forward {
        let r = check_agnew_forward(11, 100, &d, 1e-3, 10_000).expect("suite runs");
        ok &= r.failed == 0 && r.passed == 100;
        parts.push(suite_line(&r) + &first_failure(&r));
    }
    let reverse = DefermentSchedule::custom("p=n/2,q=n", |n| n / 2, |n| n, true);
    let r = check_agnew_reverse(11, 100, &reverse, 1e-3, 10_000).expect("suite runs");
    ok &= r.failed == 0 && r.passed == 100;
    parts.push(suite_line(&r) + &first_failure(&r));
    verdict(ok, parts.join("; "))
}

fn sigma_k_contrapositive() -> Verdict {
    let r = check_sigma_k_implies_conull(&catalog_cases(), &[SpaceId::C, SpaceId::L1, SpaceId::BV], &CriteriaParams::default())
        .expect("suite runs");
    verdict(r.failed == 0 && r.passed > 0, suite_line(&r) + &first_failure(&r))
}

fn run_cli(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_defsum"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("DEFSUM_THREADS")
        .output()
        .expect("binary runs");
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn cli_contract() -> Verdict {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "matrix = difference\nschedule = block\nhorizon = 200\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let (code_a, _) = run_cli(&["check-conull", "--config", cfg], &a);
    let (code_b, _) = run_cli(&["check-conull", "--config", cfg], &b);
    let same = ["trace.csv", "summary.txt"]
        .iter()
        .all(|f| std::fs::read(a.join(f)).ok().is_some_and(|x| Some(x) == std::fs::read(b.join(f)).ok()));
    let (fails, _) = run_cli(&["check-conull", "--matrix", "identity", "--schedule", "cesaro"], &dir.path().join("c"));
    let (config, stderr) = run_cli(&["check-conull", "--matrix", "tensor"], &dir.path().join("d"));
    let one_line = stderr.trim_end().lines().count() == 1 && stderr.contains("matrix");
    verdict(
        same && code_a == 0 && code_b == 0 && fails == 3 && config == 2 && one_line,
        format!(
            "identical artifacts {same}; exits holds {code_a}/{code_b}, fails {fails}, config error {config}; diagnostic '{}'",
            stderr.trim_end()
        ),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Verdict);
    let criteria: [Criterion; 12] = [
        ("reduction exactness", reduction_exactness),
        ("regularity suite", regularity),
        ("xi identity", ksi_identity),
        ("summation operator lemma", s_lemma),
        ("zeta coordinates", zeta_display),
        ("identity domain is not conull", identity_not_conull),
        ("difference domain schedule sensitivity", difference_schedule_sensitivity),
        ("criterion and section test coherence", criterion_section_coherence),
        ("entry and row tail consistency", tail_consistency),
        ("consistency with Cesaro summability", agnew),
        ("K-property implies conull", sigma_k_contrapositive),
        ("cli reproducibility and exit codes", cli_contract),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        if !v.pass {
            failed += 1;
        }
        println!("{} criterion {:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, k + 1, v.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
