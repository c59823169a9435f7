//! One function per experiment. Each returns the report body lines.

use serde_json::{json, Value};

use elliott_core::cuntz::{dim_function, dimension_drop_model, dimension_drop_unit, k1_trivial, nccw_check, DimMeasure};
use elliott_core::ktheory::{dimension_drop_problem, explicit_exactness_audit, solve_six_term, toeplitz_problem};
use elliott_core::rng::{mix, trial_stream};
use elliott_core::sampler::{
    classify_trace_space, estimate_prob_jiang_su, estimate_sup_histogram, sample_algebra, COVERING_BASES,
};
use elliott_core::simplex::{build_tower, covering_radius};
use elliott_core::stats::{wilson_interval, Z95};
use elliott_core::transport::weyl::weyl_table;
use elliott_core::walk::{classify_walk, hit_zero_probability, sample_trajectory, Barrier, WalkParams, Walker};

use crate::config::{ExperimentConfig, Format, GridSettings, Parameters, SampleSettings, SimplexSettings, WalkSettings, WeylSettings};

pub struct Body {
    pub lines: Vec<String>,
    /// Some numerical result did not meet its convergence criterion.
    pub non_converged: bool,
}

impl Body {
    fn records(records: Vec<Value>) -> Self {
        Body { lines: records.iter().map(Value::to_string).collect(), non_converged: false }
    }
}

fn walk_params(p: f64, barrier: Barrier, start: u64) -> Result<WalkParams, String> {
    WalkParams::from_start(p, barrier, start).map_err(|e| e.to_string())
}

pub fn run(c: &ExperimentConfig) -> Result<Body, String> {
    match &c.parameters {
        Parameters::Walk(s) => walk(c, s),
        Parameters::Sample(s) => sample(c, s),
        Parameters::Simplex(s) => simplex(c, s),
        Parameters::Weyl(s) => weyl(c, s),
        Parameters::Grid(s) if c.command == "cuntz" => Ok(cuntz(s)),
        Parameters::Grid(s) => ktheory(s),
    }
}

fn walk(c: &ExperimentConfig, s: &WalkSettings) -> Result<Body, String> {
    let params = walk_params(s.p, s.barrier, s.start)?;
    let mut records = Vec::new();
    let mut hits = 0;
    for trial in 0..c.trials {
        let (mut max, mut last, mut hit) = (0, 0, None);
        for (n, y) in Walker::new(&params, trial_stream(c.seed, trial)).take(c.horizon as usize + 1).enumerate() {
            max = max.max(y);
            last = y;
            if n > 0 && y == 0 && hit.is_none() {
                hit = Some(n);
            }
        }
        hits += u64::from(hit.is_some());
        records.push(json!({ "record": "trial", "trial": trial, "hit_zero_at": hit, "max": max, "final": last }));
    }
    // From 0 the reflecting walk first steps to 1.
    let oracle_from = if s.start == 0 && s.barrier == Barrier::Reflecting { 1 } else { s.start };
    records.push(json!({
        "record": "summary",
        "trials": c.trials,
        "horizon": c.horizon,
        "recurrence": classify_walk(&params).ok(),
        "hits": hits,
        "estimate": hits as f64 / c.trials as f64,
        "ci": wilson_interval(hits, c.trials, Z95),
        "oracle": hit_zero_probability(&params, oracle_from),
    }));
    Ok(Body::records(records))
}

fn sample(c: &ExperimentConfig, s: &SampleSettings) -> Result<Body, String> {
    let params = walk_params(s.p, s.barrier, s.start)?;
    let mut records = Vec::new();
    for trial in 0..c.trials {
        let (d, diag) = sample_algebra(&params, s.scheme, c.horizon, mix(c.seed, trial)).map_err(|e| e.to_string())?;
        records.push(json!({
            "record": "trial",
            "trial": trial,
            "model": d.model_label(),
            "trace_space": d.trace_space,
            "censored": d.censored,
            "visits_to_zero": diag.visits_to_zero,
            "max_dimension": diag.max_dimension,
            "final_dimension": diag.final_dimension,
            "absorbed_at": diag.absorbed_at,
            "covering": diag.covering,
        }));
    }
    let est = estimate_prob_jiang_su(&params, c.trials, c.horizon, c.seed).map_err(|e| e.to_string())?;
    let event = match s.barrier {
        Barrier::Reflecting => "returned_to_zero",
        Barrier::Absorbing => "absorbed",
    };
    records.push(json!({
        "record": "summary",
        "event": event,
        "trials": est.trials,
        "horizon": est.horizon,
        "successes": est.successes,
        "estimate": est.estimate,
        "ci": est.ci,
        "almost_sure_trace_space": classify_trace_space(&params, s.scheme).ok(),
    }));
    if s.barrier == Barrier::Absorbing {
        let h = estimate_sup_histogram(&params, s.k_max, c.trials, c.horizon, c.seed).map_err(|e| e.to_string())?;
        let cdf: Vec<f64> = (1..=s.k_max).map(|k| h.cdf(k)).collect();
        records.push(json!({ "record": "sup_histogram", "histogram": h, "cdf": cdf }));
    }
    Ok(Body::records(records))
}

fn simplex(c: &ExperimentConfig, s: &SimplexSettings) -> Result<Body, String> {
    let params = walk_params(s.p, s.barrier, s.start)?;
    let mut records = Vec::new();
    for trial in 0..c.trials {
        let err = |e: elliott_core::simplex::SimplexError| e.to_string();
        let path = sample_trajectory(&params, c.horizon as usize + 1, mix(c.seed, 2 * trial)).map_err(|e| e.to_string())?;
        let tower = build_tower(&path, s.scheme, mix(c.seed, 2 * trial + 1)).map_err(err)?;
        tower.validate().map_err(err)?;
        let mut covering = Vec::new();
        for base in COVERING_BASES {
            if let Some(level) = tower.dims().iter().position(|&d| d as usize == base) {
                covering.push(json!({ "base_dim": base, "level": level, "radius": covering_radius(&tower, level).map_err(err)? }));
            }
        }
        records.push(json!({
            "record": "tower",
            "trial": trial,
            "levels": tower.len(),
            "max_dimension": tower.dims().iter().max(),
            "final_dimension": tower.dims().last(),
            "covering": covering,
        }));
    }
    Ok(Body::records(records))
}

fn weyl(c: &ExperimentConfig, s: &WeylSettings) -> Result<Body, String> {
    let rows = weyl_table(s.kind, s.n, c.trials, c.seed, s.tol).map_err(|e| e.to_string())?;
    let non_converged = rows.iter().any(|r| !r.converged);
    let lines = match c.format {
        Format::Json => rows.iter().map(|r| serde_json::to_string(r).expect("rows serialize")).collect(),
        Format::Csv => std::iter::once("trial,delta,d_u,gap,w_inf,converged,certified".to_string())
            .chain(rows.iter().map(|r| {
                format!("{},{},{},{},{},{},{}", r.trial, r.delta, r.d_u, r.gap, r.w_inf, r.converged, r.certified)
            }))
            .collect(),
    };
    Ok(Body { lines, non_converged })
}

fn pairs(max: u64) -> impl Iterator<Item = (u64, u64)> {
    (1..=max).flat_map(move |p| (1..=max).map(move |q| (p, q)))
}

fn cuntz(s: &GridSettings) -> Body {
    let records = pairs(s.max)
        .map(|(p, q)| {
            let (m0, m1) = dimension_drop_model(p, q);
            let unit = dimension_drop_unit(p, q);
            json!({
                "record": "dimension_drop",
                "p": p,
                "q": q,
                "k1_trivial": k1_trivial(&m0, &m1).expect("model shapes agree"),
                "unit_valid": nccw_check(&unit).expect("model shapes agree"),
                "unit_lebesgue_dimension": dim_function(&unit.f[0], &DimMeasure::Lebesgue).to_string(),
            })
        })
        .collect();
    Body::records(records)
}

fn ktheory(s: &GridSettings) -> Result<Body, String> {
    let mut records = Vec::new();
    let mut push = |name: &str, p: Option<u64>, q: Option<u64>, problem| -> Result<(), String> {
        let solution = solve_six_term(&problem).map_err(|e| e.to_string())?;
        let (k0, k1) = solution.groups().map(|(a, b)| (a.to_string(), b.to_string())).unzip();
        records.push(json!({
            "record": name,
            "p": p,
            "q": q,
            "k0": k0,
            "k1": k1,
            "solution": solution.to_string(),
            "exactness_audit": explicit_exactness_audit(&problem, &solution),
        }));
        Ok(())
    };
    push("toeplitz", None, None, toeplitz_problem())?;
    for (p, q) in pairs(s.max) {
        push("dimension_drop", Some(p), Some(q), dimension_drop_problem(p, q))?;
    }
    Ok(Body::records(records))
}
