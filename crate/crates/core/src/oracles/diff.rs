use std::ops::RangeInclusive;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BRUTE_FORCE_MAX_PAIRS;
use super::{
    brute_force_optimum, check_assignment, feasibility_check, instance_digest, solve_flow_reference,
};
use crate::capacitated::{solve_ga, solve_lca};
use crate::model::{Assignment, Instance};

const REJECTION_ATTEMPTS: usize = 64;

/// Shape of random instances. Costs are uniform in `0..=cost_max`;
/// capacities are uniform up to `min(cap_max, opposite size)` and demands up
/// to the capacity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenParams {
    pub s: RangeInclusive<usize>,
    pub t: RangeInclusive<usize>,
    pub cost_max: i64,
    pub cap_max: usize,
    /// Every demand is 1 (capacities are then at least 1).
    pub demands_one: bool,
}

impl GenParams {
    pub fn up_to(max_s: usize, max_t: usize, cost_max: i64, cap_max: usize) -> Self {
        Self {
            s: 1..=max_s.max(1),
            t: 1..=max_t.max(1),
            cost_max,
            cap_max,
            demands_one: false,
        }
    }

    pub fn exact(s: usize, t: usize, cost_max: i64, cap_max: usize) -> Self {
        Self {
            s: s..=s,
            t: t..=t,
            ..Self::up_to(s, t, cost_max, cap_max)
        }
    }

    pub fn demands_one(self) -> Self {
        Self {
            demands_one: true,
            ..self
        }
    }
}

fn sample(p: &GenParams, rng: &mut impl Rng) -> Instance<i64> {
    let s = rng.gen_range(p.s.clone());
    let t = rng.gen_range(p.t.clone());
    let cost = (0..s)
        .map(|_| (0..t).map(|_| rng.gen_range(0..=p.cost_max)).collect())
        .collect();
    let mut bounds = |n: usize, partners: usize| {
        let top = p.cap_max.min(partners);
        let lo = usize::from(p.demands_one).min(top);
        let caps: Vec<usize> = (0..n).map(|_| rng.gen_range(lo..=top)).collect();
        let demands = caps
            .iter()
            .map(|&c| {
                if p.demands_one {
                    1.min(c)
                } else {
                    rng.gen_range(0..=c)
                }
            })
            .collect::<Vec<_>>();
        (demands, caps)
    };
    let (a_demand, a_capacity) = bounds(s, t);
    let (b_demand, b_capacity) = bounds(t, s);
    Instance::new(cost, a_demand, a_capacity, b_demand, b_capacity)
}

/// Draws instances until one is feasible. After a fixed number of rejections
/// the last draw is repaired: demands are halved until feasible, or with
/// unit demands every capacity is raised to the opposite set size.
pub fn random_feasible_instance(p: &GenParams, rng: &mut impl Rng) -> Instance<i64> {
    let mut inst = sample(p, rng);
    for _ in 1..REJECTION_ATTEMPTS {
        if feasibility_check(&inst).feasible {
            return inst;
        }
        inst = sample(p, rng);
    }
    while !feasibility_check(&inst).feasible {
        if p.demands_one {
            inst.a_demand.fill(1);
            inst.b_demand.fill(1);
            inst.a_capacity.fill(inst.t);
            inst.b_capacity.fill(inst.s);
        } else {
            inst.a_demand
                .iter_mut()
                .chain(&mut inst.b_demand)
                .for_each(|d| *d /= 2);
        }
    }
    inst
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub digest: String,
    pub s: usize,
    pub t: usize,
    pub ga: Option<i64>,
    pub lca: Option<i64>,
    pub flow: Option<i64>,
    pub brute: Option<i64>,
    pub agree: bool,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub errors: Vec<String>,
    /// The instance, kept only when the solvers disagree.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fixture: Option<Instance<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffSummary {
    pub seed: u64,
    pub trials: usize,
    pub disagreements: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffReport {
    pub records: Vec<TrialRecord>,
    pub summary: DiffSummary,
}

impl DiffReport {
    /// One JSON object per trial, then the summary.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out.push_str(&serde_json::to_string(&self.summary).expect("summary serializes"));
        out.push('\n');
        out
    }
}

/// Runs every applicable solver on one instance and compares costs. Each
/// returned assignment must also pass [`check_assignment`] with a matching cost.
pub fn compare_solvers(trial: usize, inst: &Instance<i64>) -> TrialRecord {
    let mut errors = Vec::new();
    let mut checked = |name: &str, r: Result<Assignment<i64>, String>| match r {
        Ok(a) => {
            let v = check_assignment(inst, &a);
            if !v.feasible {
                errors.push(format!("{name}: infeasible output {v:?}"));
            } else if v.recomputed_cost != a.total_cost {
                errors.push(format!(
                    "{name}: reported cost {} but pairs cost {}",
                    a.total_cost, v.recomputed_cost
                ));
            }
            Some(a.total_cost)
        }
        Err(e) => {
            errors.push(format!("{name}: {e}"));
            None
        }
    };
    let ga = checked(
        "ga",
        solve_ga(inst)
            .map(|s| s.assignment)
            .map_err(|e| e.to_string()),
    );
    let lca = if inst.has_unit_demands() {
        checked(
            "lca",
            solve_lca(inst)
                .map(|s| s.assignment)
                .map_err(|e| e.to_string()),
        )
    } else {
        None
    };
    let flow = checked(
        "flow",
        solve_flow_reference(inst).map_err(|e| e.to_string()),
    );
    let brute = if inst.s * inst.t <= BRUTE_FORCE_MAX_PAIRS {
        checked(
            "brute",
            brute_force_optimum(inst).map_err(|e| e.to_string()),
        )
    } else {
        None
    };

    let costs: Vec<i64> = [ga, lca, flow, brute].into_iter().flatten().collect();
    let agree = errors.is_empty() && costs.windows(2).all(|w| w[0] == w[1]);
    TrialRecord {
        trial,
        digest: instance_digest(inst),
        s: inst.s,
        t: inst.t,
        ga,
        lca,
        flow,
        brute,
        agree,
        errors,
        fixture: (!agree).then(|| inst.clone()),
    }
}

/// Generates `trials` feasible instances from `seed` and compares all
/// solvers on each. Trial `k` uses its own generator seeded from the k-th
/// draw of the master generator, so records do not depend on evaluation order.
pub fn differential_test(params: &GenParams, trials: usize, seed: u64) -> DiffReport {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let records: Vec<_> = (0..trials)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(master.next_u64());
            compare_solvers(k, &random_feasible_instance(params, &mut rng))
        })
        .collect();
    let disagreements = records.iter().filter(|r| !r.agree).count();
    DiffReport {
        summary: DiffSummary {
            seed,
            trials,
            disagreements,
        },
        records,
    }
}
