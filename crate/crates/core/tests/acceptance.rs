//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed. The
//! process fails if any criterion fails, except criterion 6's literal
//! tightness clause, which cannot hold in general and is reported as such.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use gap_core::capacitated::{
    dual_violations, pair_capacity_duals, solve_ga, solve_lca, SolveError,
};
use gap_core::hungarian::{apply_dual_update, compute_alpha_l, HungarianSolver, Step};
use gap_core::model::{validate_instance, Instance};
use gap_core::oracles::{
    brute_force_optimum, check_assignment, feasibility_check, random_feasible_instance,
    solve_flow_reference, GenParams,
};
use gap_core::{solve_max_weight_perfect, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
    /// Failure is expected and documented.
    known_gap: bool,
}

impl Outcome {
    fn check(pass: bool, detail: String) -> Self {
        Self {
            pass,
            detail,
            known_gap: false,
        }
    }
}

fn corpus_small(n: usize, seed: u64) -> Vec<Instance<i64>> {
    let p = GenParams::up_to(4, 4, 20, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| random_feasible_instance(&p, &mut rng))
        .collect()
}

fn corpus_medium(n: usize, seed: u64) -> Vec<Instance<i64>> {
    let mut p = GenParams::up_to(12, 12, 20, 6);
    p.s = 5..=12;
    p.t = 5..=12;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| random_feasible_instance(&p, &mut rng))
        .collect()
}

fn ga_cost(inst: &Instance<i64>) -> Result<i64, String> {
    let sol = solve_ga(inst).map_err(|e| e.to_string())?;
    let v = check_assignment(inst, &sol.assignment);
    if !v.feasible || v.recomputed_cost != sol.assignment.total_cost {
        return Err(format!("ga output fails check_assignment: {v:?}"));
    }
    Ok(sol.assignment.total_cost)
}

fn c1_brute_force() -> Outcome {
    let corpus = corpus_small(1000, 1);
    let mut bad = Vec::new();
    for (k, inst) in corpus.iter().enumerate() {
        let brute = brute_force_optimum(inst)
            .map(|a| a.total_cost)
            .map_err(|e| e.to_string());
        let ga = ga_cost(inst);
        if ga.is_err() || ga != brute {
            bad.push(format!("#{k}: ga {ga:?} brute {brute:?}"));
        }
    }
    Outcome::check(
        bad.is_empty(),
        format!(
            "GA = brute force on {}/{} instances (s,t<=4, caps<=3, costs 0..=20) {}",
            corpus.len() - bad.len(),
            corpus.len(),
            bad.join("; ")
        ),
    )
}

fn c2_flow() -> Outcome {
    let small = corpus_small(1000, 1);
    let medium = corpus_medium(200, 2);
    let mut bad = Vec::new();
    for (k, inst) in small.iter().chain(&medium).enumerate() {
        let flow = solve_flow_reference(inst)
            .map(|a| a.total_cost)
            .map_err(|e| e.to_string());
        let ga = ga_cost(inst);
        if ga.is_err() || ga != flow {
            bad.push(format!("#{k}: ga {ga:?} flow {flow:?}"));
        }
    }
    let n = small.len() + medium.len();
    Outcome::check(
        bad.is_empty(),
        format!(
            "GA = flow reference on {}/{n} instances ({} with 5<=s,t<=12) {}",
            n - bad.len(),
            medium.len(),
            bad.join("; ")
        ),
    )
}

fn c3_lca() -> Outcome {
    let p = GenParams::up_to(8, 8, 20, 4).demands_one();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad = Vec::new();
    let n = 500;
    for k in 0..n {
        let inst = random_feasible_instance(&p, &mut rng);
        let ga = solve_ga(&inst);
        let lca = solve_lca(&inst);
        let ok = match (&ga, &lca) {
            (Ok(g), Ok(l)) => {
                g.assignment.total_cost == l.assignment.total_cost
                    && check_assignment(&inst, &g.assignment).feasible
                    && check_assignment(&inst, &l.assignment).feasible
            }
            _ => false,
        };
        if !ok {
            bad.push(format!("#{k}"));
        }
    }
    Outcome::check(
        bad.is_empty(),
        format!(
            "LCA = GA and both verified on {}/{n} unit-demand instances {}",
            n - bad.len(),
            bad.join(",")
        ),
    )
}

fn c4_classical() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut bad = Vec::new();
    let n = 200;
    for k in 0..n {
        let size = rng.gen_range(1..=50);
        let cost: Vec<Vec<i64>> = (0..size)
            .map(|_| (0..size).map(|_| rng.gen_range(0..=100)).collect())
            .collect();
        let inst = Instance::one_to_one(cost.clone());
        let offset = inst.max_cost() + 1;
        let w: Vec<Vec<i64>> = cost
            .iter()
            .map(|r| r.iter().map(|c| offset - c).collect())
            .collect();
        let (m, _) = solve_max_weight_perfect(&w).expect("square");
        let expected = offset * size as i64 - m.weight;
        match ga_cost(&inst) {
            Ok(c) if c == expected => {}
            other => bad.push(format!("#{k} n={size}: ga {other:?} expected {expected}")),
        }
    }
    Outcome::check(
        bad.is_empty(),
        format!(
            "GA = offset*n - max weight on {}/{n} permutation instances (n<=50) {}",
            n - bad.len(),
            bad.join("; ")
        ),
    )
}

fn c5_lemma() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut states, mut bad) = (0usize, Vec::new());
    while states < 1000 {
        let n = rng.gen_range(2..=6);
        let w: Vec<Vec<i64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(0..=20)).collect())
            .collect();
        let mut solver = HungarianSolver::new(&w).expect("square");
        loop {
            if !solver.ensure_phase() {
                break;
            }
            let st = solver.state();
            if st.next_tight().is_none() && st.in_t.iter().any(|x| !x) {
                states += 1;
                let mut after = st.clone();
                let tight_before: Vec<_> = st
                    .tree_edges()
                    .into_iter()
                    .filter(|&(i, j)| st.is_tight(&w, i, j))
                    .collect();
                let alpha = compute_alpha_l(st).expect("T != B");
                apply_dual_update(&mut after, alpha);
                let ok = alpha > 0
                    && after.is_feasible(&w)
                    && tight_before.len() == st.tree_edges().len()
                    && tight_before.iter().all(|&(i, j)| after.is_tight(&w, i, j));
                if !ok {
                    bad.push(format!("{w:?} alpha {alpha}"));
                }
            }
            if solver.step().expect("step") == Step::Done {
                break;
            }
        }
    }
    Outcome::check(
        bad.is_empty(),
        format!(
            "{} mid-solve dual states: alpha>0, feasibility and tree tightness kept {}",
            states,
            bad.join("; ")
        ),
    )
}

/// `2x2` with every bound 2 forces all four pairs; with vertex labels alone
/// they are all tight only if `W11 + W22 = W12 + W21`.
fn literal_tightness_counterexample() -> bool {
    let inst = Instance::new(
        vec![vec![0i64, 1], vec![0, 0]],
        vec![2, 2],
        vec![2, 2],
        vec![2, 2],
        vec![2, 2],
    );
    let sol = solve_ga(&inst).expect("feasible");
    let w = &sol.graph.weights;
    sol.assignment.len() == 4 && w[0][0] + w[1][1] != w[0][1] + w[1][0]
}

fn c6_certificates() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut hung_bad = 0;
    let hung_runs = 500;
    for k in 0..hung_runs {
        let n = rng.gen_range(1..=30);
        let ok = if k % 5 == 0 {
            let w: Vec<Vec<Rational>> = (0..n)
                .map(|_| {
                    (0..n)
                        .map(|_| Rational::new(rng.gen_range(0..=60), rng.gen_range(1..=6)))
                        .collect()
                })
                .collect();
            solve_max_weight_perfect(&w)
                .map(|(m, st)| m.weight == st.label_sum())
                .unwrap_or(false)
        } else {
            let w: Vec<Vec<i64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(0..=100)).collect())
                .collect();
            solve_max_weight_perfect(&w)
                .map(|(m, st)| m.weight == st.label_sum())
                .unwrap_or(false)
        };
        hung_bad += usize::from(!ok);
    }

    let corpus: Vec<_> = corpus_small(600, 61)
        .into_iter()
        .chain(corpus_medium(200, 62))
        .collect();
    let (mut ext_bad, mut literal) = (0, 0);
    for inst in &corpus {
        let Ok(sol) = solve_ga(inst) else {
            ext_bad += 1;
            continue;
        };
        let duals = pair_capacity_duals(&sol.graph, &sol.matching, &sol.dual);
        let tight_with_duals = duals.iter().all(|&((i, j), z)| {
            z >= 0 && sol.dual.label_a[i] + sol.dual.label_b[j] + z == sol.graph.weights[i][j]
        });
        let ok = tight_with_duals
            && dual_violations(&sol.graph, &sol.matching, &sol.dual).is_empty()
            && sol.dual.objective(&sol.graph) == sol.assignment.total_cost;
        ext_bad += usize::from(!ok);
        literal += usize::from(duals.iter().all(|&(_, z)| z == 0));
    }
    let counterexample = literal_tightness_counterexample();
    let n = corpus.len();
    let certified = hung_bad == 0 && ext_bad == 0;
    let detail = format!(
        "Hungarian weight = label sum on {}/{hung_runs}; GA extended certificate (labels + pair capacity duals, dual objective = cost) on {}/{n}; \
         literal vertex-label tightness on {literal}/{n} (unattainable in general: forced 2x2 counterexample {})",
        hung_runs - hung_bad,
        n - ext_bad,
        if counterexample { "confirmed" } else { "NOT confirmed" }
    );
    let literal_holds = literal == n;
    Outcome {
        pass: certified && literal_holds,
        detail,
        known_gap: certified && counterexample && !literal_holds,
    }
}

fn c7_infeasible() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut cases, mut hidden, mut unit, mut bad) = (0usize, 0usize, 0usize, Vec::new());
    let mut attempts = 0;
    while (cases < 300 || hidden < 60 || unit < 40) && attempts < 200_000 {
        attempts += 1;
        let s = rng.gen_range(1..=5);
        let t = rng.gen_range(1..=5);
        let demands_one = attempts % 3 == 0;
        let cost: Vec<Vec<i64>> = (0..s)
            .map(|_| (0..t).map(|_| rng.gen_range(0..=20)).collect())
            .collect();
        let mut bounds = |n: usize, partners: usize| -> (Vec<usize>, Vec<usize>) {
            let caps: Vec<usize> = (0..n)
                .map(|_| rng.gen_range(usize::from(demands_one)..=partners))
                .collect();
            let dem = caps
                .iter()
                .map(|&c| {
                    if demands_one {
                        1
                    } else {
                        rng.gen_range(0..=(c + 1).min(partners + 1))
                    }
                })
                .collect();
            (dem, caps)
        };
        let (ad, ac) = bounds(s, t);
        let (bd, bc) = bounds(t, s);
        let inst = Instance::new(cost, ad, ac, bd, bc);
        if feasibility_check(&inst).feasible {
            continue;
        }
        cases += 1;
        hidden += usize::from(validate_instance(&inst).violations.is_empty());
        if !matches!(solve_ga(&inst), Err(SolveError::Infeasible(_))) {
            bad.push(format!("ga accepted {inst:?}"));
        }
        if inst.has_unit_demands() {
            unit += 1;
            if !matches!(solve_lca(&inst), Err(SolveError::Infeasible(_))) {
                bad.push(format!("lca accepted {inst:?}"));
            }
        }
    }
    Outcome::check(
        bad.is_empty() && cases >= 200,
        format!("{cases} infeasible instances ({hidden} pass every necessary check, {unit} unit-demand): all rejected as infeasible {}", bad.join("; ")),
    )
}

fn bench_lines(args: &[&str]) -> Result<(Vec<serde_json::Value>, f64), String> {
    let started = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_gap"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = started.elapsed().as_secs_f64();
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let lines = String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((lines, elapsed))
}

fn largest_ms(lines: &[serde_json::Value], n: u64) -> Option<f64> {
    lines
        .iter()
        .find(|l| l["n"] == n)
        .and_then(|l| l["wall_time_ms"].as_f64())
}

fn c8_scaling() -> Outcome {
    let runs = [
        (
            "hungarian",
            vec![
                "bench",
                "--algorithm",
                "hungarian",
                "--sizes",
                "25,50,100,200",
                "--seed",
                "8",
            ],
            200,
            5.0,
        ),
        (
            "lca",
            vec![
                "bench",
                "--algorithm",
                "lca",
                "--one-to-one",
                "--sizes",
                "25,50,100,200",
                "--seed",
                "8",
            ],
            200,
            5.0,
        ),
        (
            "ga",
            vec![
                "bench",
                "--algorithm",
                "ga",
                "--sizes",
                "15,30,45,60",
                "--cap-max",
                "4",
                "--seed",
                "8",
            ],
            60,
            30.0,
        ),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, args, n, limit) in runs {
        match bench_lines(&args) {
            Ok((lines, elapsed)) => {
                let ms = largest_ms(&lines, n).unwrap_or(f64::INFINITY);
                let fit = lines.last().cloned().unwrap_or_default();
                let ok = ms / 1e3 < limit && elapsed < limit;
                pass &= ok;
                parts.push(format!(
                    "{name} n={n}: {ms:.1} ms (limit {limit} s), slope {} vs claimed {}",
                    fit["fitted_slope"]
                        .as_f64()
                        .map_or("n/a".into(), |s| format!("{s:.2}")),
                    fit["claimed_exponent"]
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: bench failed: {e}"));
            }
        }
    }
    Outcome::check(pass, parts.join("; "))
}

type Criterion = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Criterion); 8] = [
        ("oracle equivalence, brute force", c1_brute_force),
        ("oracle equivalence, flow reference", c2_flow),
        ("LCA consistency", c3_lca),
        ("classical reduction", c4_classical),
        ("dual update lemma", c5_lemma),
        ("optimality certificates", c6_certificates),
        ("infeasibility handling", c7_infeasible),
        ("scaling smoke", c8_scaling),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| Outcome {
            pass: false,
            detail: format!(
                "panicked: {:?}",
                p.downcast_ref::<String>()
                    .map(String::as_str)
                    .or(p.downcast_ref::<&str>().copied())
            ),
            known_gap: false,
        });
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        let note = if !outcome.pass && outcome.known_gap {
            " [documented limitation]"
        } else {
            ""
        };
        println!(
            "{verdict} criterion {} ({name}){note}: {} [{:.1}s]",
            k + 1,
            outcome.detail,
            started.elapsed().as_secs_f64()
        );
        if !outcome.pass && !outcome.known_gap {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
