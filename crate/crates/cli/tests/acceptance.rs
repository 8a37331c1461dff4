//! End-to-end acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary so the lines always show in `cargo test` output.
//! `CONETRI_MAX_CONES` overrides the per-run cone limit of the random
//! campaign (default 250000).
//!
//! The process exits nonzero when any certificate is violated or any oracle
//! disagrees. A criterion that fails only because some runs hit the cone
//! limit is printed as FAIL with its coverage, and does not by itself fail
//! the process.

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::time::Instant;

use conetri::run::{execute, Format, RandomSpec, RunConfig, RunOptions, Source};
use conetri::{campaign_rng, random_cone, run_campaign, RunReport, Status};
use conetri_core::number_theory::{odd_adjust, prime_pi, rosser_bound, sieve, TAU};
use conetri_core::pow2::final_generator_bound;
use conetri_core::pow2::refine_isolated;
use conetri_core::verify::audit_isolated;
use conetri_core::{triangulate, LatticeVector, SimplicialCone};

const SEED: u64 = 20_240_601;
const DIMS: [usize; 4] = [2, 3, 4, 5];
const PER_DIM: u64 = 125;
const BOUND: i64 = 7;

#[derive(PartialEq, Eq)]
enum Verdict {
    Pass,
    /// Everything checked was correct, but not every run finished.
    Incomplete,
    Fail,
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

impl Outcome {
    fn new(ok: bool, detail: String) -> Self {
        let verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        Self { verdict, detail }
    }
}

fn report(n: usize, name: &str, o: &Outcome, secs: f64) {
    let tag = match o.verdict {
        Verdict::Pass => "PASS",
        Verdict::Incomplete => "FAIL (cone limit)",
        Verdict::Fail => "FAIL",
    };
    println!("criterion {n:>2} {tag:<17} {name}: {} [{secs:.1}s]", o.detail);
}

fn max_cones() -> usize {
    std::env::var("CONETRI_MAX_CONES")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(250_000)
}

fn campaign(limit: usize) -> Vec<RunReport> {
    let options = RunOptions {
        verify: true,
        trace: false,
        isolated: false,
        include_cones: false,
        max_cones: Some(limit),
    };
    DIMS.iter()
        .enumerate()
        .flat_map(|(i, &d)| {
            let spec = RandomSpec {
                dimension: d,
                bound: BOUND,
                count: PER_DIM,
            };
            run_campaign(spec, SEED + i as u64, &options)
                .expect("campaign runs")
                .runs
        })
        .collect()
}

fn criterion_1(runs: &[RunReport], limit: usize) -> Outcome {
    let mut complete = 0;
    let mut bad = Vec::new();
    let mut over: Vec<String> = Vec::new();
    for r in runs {
        let c = r.certificates.as_ref().expect("verified");
        match r.status {
            Status::BudgetExceeded => over.push(format!("d={} mu={}", r.dimension, r.mu)),
            _ => {
                complete += 1;
                if c.volume_ok != Some(true) || c.containment_ok != Some(true) || c.all_unimodular != Some(true) {
                    bad.push(format!("d={} run {:?}", r.dimension, r.index));
                }
            }
        }
    }
    let per_dim: Vec<String> = DIMS
        .iter()
        .map(|&d| {
            let done = runs
                .iter()
                .filter(|r| r.dimension == d && r.status != Status::BudgetExceeded)
                .count();
            format!("d={d}: {done}/{PER_DIM}")
        })
        .collect();
    let detail = format!(
        "{complete}/{} runs triangulated and verified ({}), {} certificate failures, {} over the {limit}-cone limit",
        runs.len(),
        per_dim.join(", "),
        bad.len(),
        over.len()
    );
    let verdict = if !bad.is_empty() {
        Verdict::Fail
    } else if over.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Incomplete
    };
    Outcome { verdict, detail }
}

fn trace_flag(runs: &[RunReport], name: &str, flag: impl Fn(&conetri::report::Certificates) -> bool) -> Outcome {
    let failing: Vec<String> = runs
        .iter()
        .filter(|r| !flag(r.certificates.as_ref().expect("verified")))
        .map(|r| format!("d={} run {:?}: {:?}", r.dimension, r.index, r.violations.first()))
        .collect();
    let events: usize = runs.iter().map(|r| r.trace_events).sum();
    Outcome::new(
        failing.is_empty(),
        format!(
            "{name} holds on {}/{} runs ({events} trace events){}",
            runs.len() - failing.len(),
            runs.len(),
            failing.first().map(|f| format!("; first failure {f}")).unwrap_or_default()
        ),
    )
}

fn criterion_5(runs: &[RunReport]) -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    let mut min_slack = f64::INFINITY;
    for r in runs.iter().filter(|r| r.status != Status::BudgetExceeded) {
        checked += 1;
        let c = r.certificates.as_ref().expect("verified");
        if c.final_bound_ok != Some(true) {
            bad.push(format!("d={} run {:?} max {:?}", r.dimension, r.index, r.max_dilation));
        }
        if let (Some(s), true) = (r.slack_ratio, r.mu > 1) {
            min_slack = min_slack.min(s);
        }
    }
    let detail = format!(
        "max_dilation within both bounds on {}/{checked} finished runs of {}, smallest bound/max ratio for mu > 1 is {min_slack:.3e}{}",
        checked - bad.len(),
        runs.len(),
        bad.first().map(|b| format!("; first failure {b}")).unwrap_or_default()
    );
    let verdict = if !bad.is_empty() {
        Verdict::Fail
    } else if checked == runs.len() {
        Verdict::Pass
    } else {
        Verdict::Incomplete
    };
    Outcome { verdict, detail }
}

fn criterion_6() -> Outcome {
    let mut sampled = 0u64;
    let mut bad = Vec::new();
    let mut by_l = [0usize; 7];
    let mut stream = 0u64;
    while sampled < 200 {
        let d = [3, 4, 5][(sampled % 3) as usize];
        let cone = random_cone(d, BOUND, &mut campaign_rng(SEED ^ 0x2_0000, stream));
        stream += 1;
        let mu = cone.multiplicity_u64().expect("small multiplicity");
        if !mu.is_power_of_two() || mu < 2 || mu > 64 {
            continue;
        }
        sampled += 1;
        let l = mu.trailing_zeros();
        by_l[l as usize] += 1;
        let r = refine_isolated(&cone).expect("isolated refinement");
        let audit = audit_isolated(&r).expect("isolated audit");
        let bound = final_generator_bound(d, l);
        if !(audit.final_ok && audit.generation_ok && audit.max_dilation <= bound) {
            bad.push(format!("d={d} mu={mu}: {:?}", audit.violations.first()));
        }
    }
    Outcome::new(
        bad.is_empty(),
        format!(
            "{}/200 cones with mu = 2^l (counts for l = 1..6: {:?}) keep every final generator within (d/2)(3/2)^l and every generation-k vector within h_k{}",
            200 - bad.len(),
            &by_l[1..],
            bad.first().map(|b| format!("; first failure {b}")).unwrap_or_default()
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut cases = 0;
    let mut bad = Vec::new();
    for p in (3..=1001u64).step_by(2) {
        for m in (p / 2 + 1..p).filter(|m| m % 2 == 1) {
            cases += 1;
            let a = match odd_adjust(m, p) {
                Ok(a) => a,
                Err(e) => {
                    bad.push(format!("p={p} m={m}: {e}"));
                    continue;
                }
            };
            let s_ok = (a.s as f64) <= (p as f64).log2();
            let t_ok = 2 * a.t < p;
            let id_ok = (1u128 << a.s) * u128::from(a.t)
                == ((1u128 << (a.s - 1)) - 1) * u128::from(p) + u128::from(m);
            if !(s_ok && t_ok && id_ok) {
                bad.push(format!("p={p} m={m}: s={} t={} k={}", a.s, a.t, a.k));
            }
        }
    }
    Outcome::new(
        bad.is_empty(),
        format!(
            "{}/{cases} (p, m) pairs satisfy s <= log2 p, t < p/2 and 2^s t = (2^(s-1) - 1) p + m{}",
            cases - bad.len(),
            bad.first().map(|b| format!("; first failure {b}")).unwrap_or_default()
        ),
    )
}

fn criterion_8() -> Outcome {
    const LIMIT: usize = 1_000_000;
    let flags = sieve(LIMIT + 1);
    let mut below = 0usize;
    let mut bad = Vec::new();
    let mut tightest = f64::INFINITY;
    for x in 2..=LIMIT {
        // primes strictly below x
        if flags[x - 1] {
            below += 1;
        }
        let bound = rosser_bound(x as f64).expect("x > 1");
        if (below as f64) >= bound {
            bad.push(x);
        }
        tightest = tightest.min(bound - below as f64);
    }
    let spot = [2usize, 10, 100, 1000, 65_536, LIMIT];
    let spot_ok = spot.iter().all(|&x| {
        let direct = (2..x).filter(|&k| flags[k]).count();
        prime_pi(x as f64) == direct
    });
    Outcome::new(
        bad.is_empty() && spot_ok,
        format!(
            "pi(x) < {TAU} x / ln x for {}/{} integers in [2, 10^6] (smallest gap {tightest:.3}), library pi agrees with the sieve at {spot:?}: {spot_ok}",
            LIMIT - 1 - bad.len(),
            LIMIT - 1
        ),
    )
}

/// Brute-force check of a plane triangulation of the cone spanned by (1,0)
/// and (1,n): every cone unimodular, inside the base, and the cones tile the
/// base without gaps or overlaps, both by an angular sweep and by exact
/// section volumes. Works on plain integer pairs only.
fn plane_oracle(n: i64, cones: &[[(i64, i64); 2]]) -> Result<(), String> {
    let cross = |a: (i64, i64), b: (i64, i64)| a.0 * b.1 - a.1 * b.0;
    let mut edges = Vec::new();
    for c in cones {
        let [a, b] = *c;
        for g in [a, b] {
            if g.0 <= 0 || g.1 < 0 || g.1 > n * g.0 {
                return Err(format!("generator {g:?} outside the base"));
            }
        }
        let det = cross(a, b);
        if det.abs() != 1 {
            return Err(format!("cone {c:?} has multiplicity {}", det.abs()));
        }
        edges.push(if det > 0 { (a, b) } else { (b, a) });
    }
    // sweep counterclockwise from (1,0) to (1,n)
    edges.sort_by(|x, y| {
        let c = cross(x.0, y.0);
        0.cmp(&c)
    });
    let mut at = (1, 0);
    for (lo, hi) in &edges {
        if *lo != at {
            return Err(format!("gap or overlap at {at:?}, next cone starts at {lo:?}"));
        }
        at = *hi;
    }
    if at != (1, n) {
        return Err(format!("sweep ends at {at:?}"));
    }
    // base dilation of (x, y) is x; section volume of a cone is |det| / (x1 x2)
    let (mut num, mut den) = (0i128, 1i128);
    for (a, b) in &edges {
        let d = i128::from(a.0) * i128::from(b.0);
        num = num * d + den;
        den *= d;
        let g = gcd(num, den);
        num /= g;
        den /= g;
    }
    if den != 1 || num != i128::from(n) {
        return Err(format!("section volumes sum to {num}/{den}, expected {n}"));
    }
    Ok(())
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn criterion_9() -> Outcome {
    let mut bad = Vec::new();
    let mut staircase_runs = 0;
    for n in 2..=64i64 {
        let base = SimplicialCone::new(vec![LatticeVector::from([1, 0]), LatticeVector::from([1, n])])
            .expect("base cone");
        let run = triangulate(base).expect("pipeline");
        let cones: Vec<[(i64, i64); 2]> = run
            .unimodular
            .cones()
            .map(|c| {
                let g: Vec<(i64, i64)> = c
                    .generators()
                    .iter()
                    .map(|v| {
                        let x = v.coords();
                        (
                            i64::try_from(&x[0]).expect("small"),
                            i64::try_from(&x[1]).expect("small"),
                        )
                    })
                    .collect();
                [g[0], g[1]]
            })
            .collect();
        if let Err(e) = plane_oracle(n, &cones) {
            bad.push(format!("n={n}: {e}"));
            continue;
        }
        // every subdividing vector on the segment x = 1 forces the staircase
        let on_segment = run.p2t.trace.iter().all(|ev| ev.x_prime.coords()[0] == 1.into());
        if on_segment {
            staircase_runs += 1;
            let got: BTreeSet<[(i64, i64); 2]> = cones
                .iter()
                .map(|c| {
                    let mut c = *c;
                    c.sort();
                    c
                })
                .collect();
            let want: BTreeSet<[(i64, i64); 2]> = (0..n).map(|k| [(1, k), (1, k + 1)]).collect();
            if got != want {
                bad.push(format!("n={n}: not the staircase"));
            }
        }
    }
    Outcome::new(
        bad.is_empty(),
        format!(
            "{}/63 plane cones ((1,0),(1,n)) pass the brute-force oracle; {staircase_runs} runs with all subdividing vectors on x = 1 equal the staircase exactly{}",
            63 - bad.len(),
            bad.first().map(|b| format!("; first mismatch {b}")).unwrap_or_default()
        ),
    )
}

fn criterion_10() -> Outcome {
    let cfg = |dimension, count, seed| RunConfig {
        source: Source::Random(RandomSpec {
            dimension,
            bound: BOUND,
            count,
        }),
        seed,
        format: Format::Json,
        options: RunOptions {
            verify: true,
            trace: true,
            isolated: false,
            include_cones: true,
            max_cones: Some(50_000),
        },
    };
    let mut same = 0;
    let mut total = 0;
    for c in [cfg(2, 50, 1), cfg(3, 40, 2), cfg(4, 10, 3)] {
        total += 1;
        let a = execute(&c).expect("run").document;
        let b = execute(&c).expect("run").document;
        if a == b {
            same += 1;
        }
    }
    let binary = || {
        Command::new(env!("CARGO_BIN_EXE_conetri"))
            .args(["random", "--dim", "3", "--bound", "7", "--count", "30", "--seed", "99", "--verify", "--cones"])
            .output()
            .expect("binary runs")
            .stdout
    };
    total += 1;
    let first = binary();
    if !first.is_empty() && first == binary() {
        same += 1;
    }
    Outcome::new(
        same == total,
        format!("{same}/{total} repeated seeded runs produced byte-identical JSON reports"),
    )
}

fn main() -> ExitCode {
    let limit = max_cones();
    let mut outcomes = Vec::new();

    let t = Instant::now();
    let runs = campaign(limit);
    let campaign_secs = t.elapsed().as_secs_f64();
    let o = criterion_1(&runs, limit);
    report(1, "end-to-end correctness", &o, campaign_secs);
    outcomes.push(o);

    let checks: [(usize, &str, fn(&conetri::report::Certificates) -> bool); 3] = [
        (2, "phi descent", |c| c.phi_descent_ok),
        (3, "multiplicity ceiling", |c| c.mu_bound_ok && c.label_depth_ok),
        (4, "label length", |c| c.xi_length_ok),
    ];
    for (n, name, flag) in checks {
        let t = Instant::now();
        let o = trace_flag(&runs, name, flag);
        report(n, name, &o, t.elapsed().as_secs_f64());
        outcomes.push(o);
    }

    let t = Instant::now();
    let o = criterion_5(&runs);
    report(5, "final length bound", &o, t.elapsed().as_secs_f64());
    outcomes.push(o);

    type Check = fn() -> Outcome;
    let rest: [(usize, &str, Check); 5] = [
        (6, "power-of-two refinement", criterion_6),
        (7, "odd adjustment", criterion_7),
        (8, "prime counting bound", criterion_8),
        (9, "plane oracle", criterion_9),
        (10, "determinism", criterion_10),
    ];
    for (n, name, f) in rest {
        let t = Instant::now();
        let o = f();
        report(n, name, &o, t.elapsed().as_secs_f64());
        outcomes.push(o);
    }

    let failed = outcomes.iter().filter(|o| o.verdict == Verdict::Fail).count();
    let incomplete = outcomes.iter().filter(|o| o.verdict == Verdict::Incomplete).count();
    println!(
        "acceptance: {} passed, {failed} failed, {incomplete} failed on the cone limit only",
        outcomes.len() - failed - incomplete
    );
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
