//! Acceptance suite: one PASS/FAIL line per criterion.

use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use strsub::bounds::{t1_bound_i, t1_bound_i_asymptotic, t4_bound_i, t5_bound, Theorem};
use strsub::checks::check_diminishing_return;
use strsub::curvature::{elemental_forward_eta, restricted_eta_hat, restricted_sigma_hat, total_forward_epsilon_wrt};
use strsub::infogain::{InfoGainModel, NoiseShape, RandomInfoGain};
use strsub::matroid::{build_theorem3_permutation, constrained_greedy, MaxRepeats, PrefixForbidden, StringMatroid};
use strsub::tasks::{RandomTasks, StageShape, TaskModel};
use strsub::{
    greedy, optimal_exhaustive, run_bound_suite, Action, Memoized, Objective, ProblemSpec, RandomSubmodular, Status,
    SuiteConfig,
};

const B: u128 = 2_000_000;
const TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: &[String], summary: String) -> Outcome {
    if failures.is_empty() {
        Outcome { pass: true, detail: summary }
    } else {
        let shown: Vec<&str> = failures.iter().take(5).map(String::as_str).collect();
        Outcome { pass: false, detail: format!("{summary}; {} failures, e.g. {}", failures.len(), shown.join(" | ")) }
    }
}

fn strings(n: usize, len: usize) -> Vec<Vec<Action>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..n).map(move |a| {
                    let mut t = s.clone();
                    t.push(Action::new(a));
                    t
                })
            })
            .collect();
    }
    out
}

fn ev<F: Objective + ?Sized>(f: &F, s: &[Action]) -> f64 {
    f.eval(s).unwrap()
}

/// Greedy and optimum by plain enumeration, optionally under a matroid.
fn brute_force<F: Objective>(f: &F, n: usize, k: usize, m: Option<&dyn StringMatroid>) -> (f64, f64) {
    let ok = |s: &[Action]| m.map_or(s.len() <= k, |m| m.is_independent(s));
    let mut g = Vec::new();
    while g.len() < k {
        let best = (0..n)
            .map(Action::new)
            .filter(|&a| ok(&[g.as_slice(), &[a]].concat()))
            .map(|a| (a, ev(f, &[g.as_slice(), &[a]].concat())))
            .fold(None, |best: Option<(Action, f64)>, (a, v)| match best {
                Some((_, bv)) if bv >= v => best,
                _ => Some((a, v)),
            });
        match best {
            Some((a, _)) => g.push(a),
            None => break,
        }
    }
    let opt =
        (0..=k).flat_map(|len| strings(n, len)).filter(|s| ok(s)).map(|s| ev(f, &s)).fold(f64::NEG_INFINITY, f64::max);
    (ev(f, &g), opt)
}

fn applicability(results: &[(Vec<Theorem>, Vec<String>)]) -> String {
    let counts: Vec<String> =
        Theorem::ALL.iter().map(|t| format!("{t} {}", results.iter().filter(|r| r.0.contains(t)).count())).collect();
    counts.join(", ")
}

fn soundness_sweep() -> Outcome {
    let (n, k) = (3, 4);
    let results: Vec<(Vec<Theorem>, Vec<String>)> = (0..500u64)
        .into_par_iter()
        .map(|seed| {
            let f = RandomSubmodular::new(seed, n);
            let spec = ProblemSpec::new(&f, n, k).unwrap();
            let r = run_bound_suite(&spec, None, &SuiteConfig::default()).unwrap();
            let mut bad = Vec::new();
            let (g, o) = brute_force(&f, n, k, None);
            if (g / o - r.measured_ratio).abs() > 1e-12 {
                bad.push(format!("seed {seed}: measured ratio {} vs enumerated {}", r.measured_ratio, g / o));
            }
            let mut applicable = Vec::new();
            for c in &r.checks {
                if c.hypotheses_met {
                    applicable.push(c.theorem);
                    if g / o < c.guaranteed_ratio - TOL || c.status != Status::Pass {
                        bad.push(format!(
                            "seed {seed}: {} guarantees {} measured {}",
                            c.theorem,
                            c.guaranteed_ratio,
                            g / o
                        ));
                    }
                }
            }
            (applicable, bad)
        })
        .collect();
    let failures: Vec<String> = results.iter().flat_map(|r| r.1.clone()).collect();
    outcome(&failures, format!("500 instances, applicable per bound: {}", applicability(&results)))
}

fn random_max_repeats(rng: &mut ChaCha8Rng, n: usize, k: usize) -> MaxRepeats {
    loop {
        let caps: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=k)).collect();
        if caps.iter().sum::<usize>() >= k {
            return MaxRepeats::new(caps, k).unwrap();
        }
    }
}

fn matroid_soundness() -> Outcome {
    let (n, k) = (3, 4);
    let results: Vec<(Vec<Theorem>, Vec<String>)> = (0..200u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let m: Box<dyn StringMatroid> = if seed.is_multiple_of(2) {
                Box::new(random_max_repeats(&mut rng, n, k))
            } else {
                Box::new(PrefixForbidden::random(seed, n, k).unwrap())
            };
            let f = Memoized::new(RandomSubmodular::new(seed, n));
            let spec = ProblemSpec::new(&f, n, k).unwrap();
            let mut bad = Vec::new();
            let g = constrained_greedy(&spec, m.as_ref()).unwrap();
            let independent: Vec<Vec<Action>> = strings(n, k).into_iter().filter(|s| m.is_independent(s)).collect();
            for _ in 0..20 {
                let pick = &independent[rng.gen_range(0..independent.len())];
                match build_theorem3_permutation(&f, m.as_ref(), &g, pick) {
                    Ok(cert) => {
                        let mut a = pick.clone();
                        let mut b = cert.permuted.to_vec();
                        a.sort();
                        b.sort();
                        let direct = (1..=k).all(|i| {
                            let prev = g.prefix(i - 1);
                            let ext = [prev, &[cert.permuted[i - 1]]].concat();
                            m.is_independent(&ext)
                                && ev(&f, &ext) - ev(&f, prev) <= ev(&f, g.prefix(i)) - ev(&f, prev) + TOL
                        });
                        if !cert.verified() || a != b || !direct {
                            bad.push(format!("seed {seed}: certificate for {pick:?} does not verify"));
                        }
                    }
                    Err(e) => bad.push(format!("seed {seed}: {e}")),
                }
            }
            let r = run_bound_suite(&spec, Some(m.as_ref()), &SuiteConfig::default()).unwrap();
            let (gv, ov) = brute_force(&f, n, k, Some(m.as_ref()));
            let mut applicable = Vec::new();
            for c in &r.checks {
                if c.hypotheses_met {
                    applicable.push(c.theorem);
                    if gv / ov < c.guaranteed_ratio - TOL || c.status != Status::Pass {
                        bad.push(format!(
                            "seed {seed}: {} guarantees {} measured {}",
                            c.theorem,
                            c.guaranteed_ratio,
                            gv / ov
                        ));
                    }
                }
            }
            (applicable, bad)
        })
        .collect();
    let failures: Vec<String> = results.iter().flat_map(|r| r.1.clone()).collect();
    outcome(&failures, format!("200 instances, 4000 certificates, applicable per bound: {}", applicability(&results)))
}

fn corollary_values() -> Outcome {
    let limit = 1.0 - (-1.0f64).exp();
    let mut failures = Vec::new();
    for k in 1..=10usize {
        let closed = 1.0 - (1.0 - 1.0 / k as f64).powi(k as i32);
        let v = t1_bound_i(1.0, k);
        if (v - closed).abs() > 1e-12 || v <= limit {
            failures.push(format!("K={k}: {v} vs {closed}"));
        }
        if t5_bound(1.0, k) != 0.5 {
            failures.push(format!("K={k}: t5 {}", t5_bound(1.0, k)));
        }
    }
    if t4_bound_i(1.0) != 0.5 {
        failures.push(format!("t4 {}", t4_bound_i(1.0)));
    }
    if (t1_bound_i_asymptotic(1.0) - limit).abs() > 1e-15 {
        failures.push("asymptotic limit".into());
    }
    outcome(&failures, format!("limit {limit:.6}"))
}

fn task_closed_forms() -> Outcome {
    let k = 3;
    let failures: Vec<String> = (0..100u64)
        .into_par_iter()
        .flat_map_iter(|seed| {
            let params = RandomTasks { lo: 0.382, hi: 0.618, actions: 3, horizon: k, ..Default::default() };
            let m = TaskModel::random(seed, &params).unwrap();
            let f = Memoized::new(&m);
            let (l, u) = (m.l_hat(), m.u_hat());
            let mut bad = Vec::new();
            if l < 0.382 || u > 0.618 {
                bad.push(format!("seed {seed}: outside the window"));
            }
            let eta = elemental_forward_eta(&f, 3, 2 * k - 2, B).unwrap().value;
            if eta > (1.0 - l) * u / l + TOL {
                bad.push(format!("seed {seed}: eta {eta}"));
            }
            let sigma_hat = restricted_sigma_hat(&f, 3, k, B).unwrap().value;
            if sigma_hat > m.sigma_hat_closed_form() + TOL {
                bad.push(format!("seed {seed}: sigma_hat {sigma_hat} > {}", m.sigma_hat_closed_form()));
            }
            let g = greedy(&ProblemSpec::new(&f, 3, k).unwrap()).unwrap();
            for i in 1..=k {
                let e = total_forward_epsilon_wrt(&f, g.prefix(i), 3, k, B).unwrap().value;
                let closed = 1.0 - (1.0 - u).powi((i + k - 1) as i32);
                if e > closed + TOL {
                    bad.push(format!("seed {seed}: eps(G_{i}) {e} > {closed}"));
                }
            }
            if !check_diminishing_return(&f, 3, m.probe_depth(), TOL, B).unwrap().is_empty() {
                bad.push(format!("seed {seed}: diminishing return violated"));
            }
            bad
        })
        .collect();
    outcome(&failures, "100 golden-window instances".into())
}

fn infogain_equivalence() -> Outcome {
    let k = 3;
    let results: Vec<(bool, Vec<String>)> = (0..200u64)
        .into_par_iter()
        .map(|seed| {
            let shape = if seed.is_multiple_of(2) { NoiseShape::Free } else { NoiseShape::NonDecreasing };
            let params = RandomInfoGain { horizon: k, len: Some(2 * k), shape, ..Default::default() };
            let m = InfoGainModel::random(seed, &params).unwrap();
            let mut bad = Vec::new();
            let vars: Vec<f64> = (1..=m.probe_depth()).map(|j| m.noise_var(j)).collect();
            let nondecreasing = vars.windows(2).all(|w| w[0] <= w[1]);
            let f = Memoized::new(&m);
            let eta_hat = restricted_eta_hat(&f, m.num_actions(), k, B).unwrap().value;
            if (eta_hat <= 1.0 + TOL) != nondecreasing {
                bad.push(format!("seed {seed}: eta_hat {eta_hat}, nondecreasing {nondecreasing}"));
            }
            let lower = m.eta_hat_lower_closed_form().value;
            let upper = m.eta_hat_upper_closed_form().value;
            if lower > eta_hat + TOL || eta_hat > upper + TOL {
                bad.push(format!("seed {seed}: {lower} <= {eta_hat} <= {upper} fails"));
            }
            if !nondecreasing {
                let one = m.action_for(1.0).unwrap();
                let zero = m.action_for(0.0).unwrap();
                let j = vars.windows(2).position(|w| w[0] > w[1]).unwrap() + 1;
                let shorter = vec![one; j - 1];
                let longer = vec![one; j];
                let gain = |s: &[Action]| ev(&f, &[s, &[zero]].concat()) - ev(&f, s);
                let w = m.submodularity_witness(B, TOL).unwrap().witness;
                let found = w.is_some_and(|w| {
                    w.confirmed && w.shorter.as_slice() == shorter && w.longer.as_slice() == longer && w.action == zero
                });
                if !found || gain(&longer) <= gain(&shorter) {
                    bad.push(format!("seed {seed}: no witness at stage {j}"));
                }
            }
            (nondecreasing, bad)
        })
        .collect();
    let monotone = results.iter().filter(|r| r.0).count();
    let failures: Vec<String> = results.into_iter().flat_map(|r| r.1).collect();
    outcome(&failures, format!("200 sequences, {monotone} nondecreasing"))
}

fn reference_infogain(m: &InfoGainModel, s: &[Action]) -> f64 {
    let p0 = Matrix2::new(m.s0, 0.0, 0.0, m.t0);
    let mut info = p0.try_inverse().unwrap();
    for (i, a) in s.iter().enumerate() {
        let e = m.grid[a.index()];
        let h = Matrix2::new(e.sqrt(), 0.0, 0.0, (1.0 - e).sqrt());
        info += h.transpose() * (Matrix2::identity() / m.noise_var(i + 1)) * h;
    }
    let pk = info.try_inverse().unwrap();
    0.5 * (p0.determinant().ln() - pk.determinant().ln())
}

fn oracle_cross_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..1000u64 {
        let m = InfoGainModel::random(i / 20, &RandomInfoGain::default()).unwrap();
        let len = rng.gen_range(1..=m.probe_depth());
        let s: Vec<Action> = (0..len).map(|_| Action::new(rng.gen_range(0..m.num_actions()))).collect();
        let (x, y) = (ev(&m, &s), reference_infogain(&m, &s));
        let rel = (x - y).abs() / y.abs();
        worst = worst.max(rel);
        if rel > 1e-12 {
            failures.push(format!("{s:?}: {x} vs {y}"));
        }
    }
    outcome(&failures, format!("1000 strings, max relative error {worst:.1e}"))
}

fn monotone_special_case() -> Outcome {
    let limit = 1.0 - (-1.0f64).exp();
    let mut failures = Vec::new();
    let mut smallest = f64::INFINITY;
    for seed in 0..50u64 {
        let params = RandomTasks { shape: StageShape::NonIncreasing, ..Default::default() };
        let m = TaskModel::random(seed, &params).unwrap();
        let report = m.monotone_special_cases(B, TOL).unwrap();
        let Some(case) = report.eta else {
            failures.push(format!("seed {seed}: not non-increasing"));
            continue;
        };
        let f = Memoized::new(&m);
        let spec = ProblemSpec::new(&f, m.num_actions(), m.horizon).unwrap();
        let g = greedy(&spec).unwrap().value();
        let (_, o) = optimal_exhaustive(&spec).unwrap();
        smallest = smallest.min(case.improved_bound);
        if !case.holds || case.improved_bound <= limit || g / o < case.improved_bound - TOL {
            failures.push(format!("seed {seed}: bound {} measured {}", case.improved_bound, g / o));
        }
    }
    outcome(&failures, format!("50 instances, smallest bound {smallest:.4}"))
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();
    let runs: [&[&str]; 3] = [
        &["--cmd", "sweep", "--count", "12", "--seed", "7"],
        &["--cmd", "bounds", "--model", "tasks", "--seed", "3"],
        &["--cmd", "curvature", "--model", "infogain", "--seed", "5"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let path = dir.path().join(format!("run{i}_{rep}.csv"));
            let status =
                Command::new(env!("CARGO_BIN_EXE_strsub")).args(*args).arg("--out").arg(&path).status().unwrap();
            if !status.success() {
                failures.push(format!("{args:?} exited with {status}"));
            }
            outputs.push(std::fs::read(&path).unwrap_or_default());
        }
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            failures.push(format!("{args:?} output differs between runs"));
        }
    }
    outcome(&failures, "3 commands run twice".into())
}

type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 soundness sweep", soundness_sweep, Some(Duration::from_secs(60))),
        ("2 matroid soundness", matroid_soundness, Some(Duration::from_secs(120))),
        ("3 corollary values", corollary_values, None),
        ("4 task closed-form dominance", task_closed_forms, None),
        ("5 infogain equivalence and sandwich", infogain_equivalence, None),
        ("6 infogain oracle cross-check", oracle_cross_check, None),
        ("7 monotone special case", monotone_special_case, None),
        ("8 CLI determinism", cli_determinism, None),
    ];
    let mut all = true;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let mut o = run();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed > limit {
                o.pass = false;
                o.detail.push_str(&format!("; exceeded {}s", limit.as_secs()));
            }
        }
        all &= o.pass;
        println!(
            "{} criterion {name}: {} ({:.2}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    if !all {
        std::process::exit(1);
    }
}
