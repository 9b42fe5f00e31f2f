use std::fs;
use std::path::Path;

use anneal::simulate::{run_replicas, simulate_replica};
use anneal::spectral::GapBoundCertificate;
use anneal::{
    check_entropy_conditions, check_fastcool, ergodicity_audit, escape_bounds, gap_bound_constant, hill_constants,
    load_landscape, local_min_classes, m_at, miss_probability, run_ensemble, spectral_gap, summary_constants,
    validate, wilson_interval, FiniteTimeBound, Landscape, Schedule, Variant,
};
use serde_json::{json, Value};

use crate::csv::{render, Cell, Row};
use crate::{AnalyzeArgs, BoundsArgs, Common, Failure, RunArgs, SimulateArgs, VariantArg};

fn load(common: &Common) -> Result<Landscape, Failure> {
    let path = &common.landscape;
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    load_landscape(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// JSON number, or a string for non-finite values.
fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

fn names(l: &Landscape, xs: &[usize]) -> Value {
    json!(xs.iter().map(|&x| l.state_name(x)).collect::<Vec<_>>())
}

fn gap_entry(l: &Landscape, variant: Variant, temperature: f64) -> (Value, Option<String>) {
    match m_at(l, variant, temperature).and_then(|m| spectral_gap(&m)) {
        Ok(g) => (num(g), None),
        Err(e) => (Value::Null, Some(format!("{variant}: {e}"))),
    }
}

pub fn analyze(args: &AnalyzeArgs) -> Result<(), Failure> {
    let l = load(&args.common)?;
    if args.temperatures.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Failure::Input("temperatures must be positive".into()));
    }
    let constants = summary_constants(&l);
    let hill = hill_constants(&l);
    let certificate: Option<GapBoundCertificate> = if l.len() > 1 { Some(gap_bound_constant(&l)?) } else { None };
    let a = certificate.as_ref().map(|c| c.a_constant);

    let mut table = Vec::new();
    for &t in &args.temperatures {
        let (g1, note1) = gap_entry(&l, anneal::Variant::M1, t);
        let (g2, note2) = gap_entry(&l, anneal::Variant::M2, t);
        let bound = a.map(|a| a * (-hill.c_m2 / t).exp());
        let margin = match (g2.as_f64(), bound) {
            (Some(g), Some(b)) => num(g - b),
            _ => Value::Null,
        };
        let notes: Vec<String> = note1.into_iter().chain(note2).collect();
        table.push(json!({
            "temperature": t,
            "gap_m1": g1,
            "gap_m2": g2,
            "bound": bound.map_or(Value::Null, num),
            "margin": margin,
            "notes": notes,
        }));
    }

    let mut report = json!({
        "name": l.name(),
        "states": l.states(),
        "u_offset": l.u_offset(),
        "validation": validate(&l),
        "constants": {
            "R": num(constants.r),
            "K": num(constants.k),
            "B": num(constants.b),
            "delta": num(constants.delta),
            "U_min": names(&l, &constants.u_min),
            "U_min_loc": names(&l, &constants.u_min_loc),
            "pi_min": constants.pi_min,
        },
        "hill_constants": {
            "c_M1": num(hill.c_m1),
            "c_M2": num(hill.c_m2),
            "witness_m1": {
                "pair": names(&l, &[hill.witness_pair_m1.0, hill.witness_pair_m1.1]),
                "path": names(&l, &hill.witness_path_m1),
            },
            "witness_m2": {
                "pair": names(&l, &[hill.witness_pair_m2.0, hill.witness_pair_m2.1]),
                "path": names(&l, &hill.witness_path_m2),
            },
        },
        "local_minimum_classes": local_min_classes(&l)
            .classes
            .iter()
            .map(|c| names(&l, c))
            .collect::<Vec<_>>(),
        "gap_bound": certificate.as_ref().map(|c| json!({
            "A": num(c.a_constant),
            "N": c.n_max,
            "binding_edge": names(&l, &[c.binding_edge.0, c.binding_edge.1]),
            "binding_sum": num(c.binding_sum),
        })),
        "gap_table": table,
    });

    if let Some(s) = &args.schedule {
        let conditions = |check: fn(&Schedule, f64) -> anneal::Result<anneal::ConditionReport>| {
            if hill.c_m2 <= 0.0 {
                check(s, hill.c_m2).map(|r| json!(r))
            } else {
                Ok(json!("requires c_M2 ≤ 0"))
            }
        };
        let gap_fn = |t: f64| m_at(&l, Variant::M2, t).and_then(|m| spectral_gap(&m));
        report["schedule"] = json!({
            "literal": s.to_string(),
            "fastcool": conditions(check_fastcool)?,
            "entropy_conditions": conditions(check_entropy_conditions)?,
            "ergodicity": ergodicity_audit(s, &l, &gap_fn)?,
        });
    }

    let mut text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Runtime(e.to_string()))?;
    text.push('\n');
    emit(args.common.out.as_deref(), &text)
}

/// Validated run parameters shared by `simulate` and `bounds`.
struct Plan {
    x0: usize,
    checkpoints: Vec<f64>,
}

fn plan(l: &Landscape, run: &RunArgs) -> Result<Plan, Failure> {
    if run.replicas == 0 {
        return Err(Failure::Input("--replicas must be at least 1".into()));
    }
    let x0 = l.index_of(&run.x0)?;
    let mut checkpoints = run.checkpoints.clone();
    match (run.t1, checkpoints.last().copied()) {
        (None, None) => return Err(Failure::Input("give --t1 or --checkpoints".into())),
        (Some(t1), None) => checkpoints.push(t1),
        (Some(t1), Some(last)) if t1 > last => checkpoints.push(t1),
        (Some(t1), Some(last)) if t1 < last => {
            return Err(Failure::Input(format!("checkpoint {last} lies beyond --t1 {t1}")))
        }
        _ => {}
    }
    if checkpoints.iter().any(|c| !c.is_finite()) || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Failure::Input("checkpoints must be finite and strictly increasing".into()));
    }
    if !(run.t0.is_finite() && run.t0 >= 0.0 && checkpoints[0] >= run.t0) {
        return Err(Failure::Input(format!("checkpoints must not precede --t0 {}", run.t0)));
    }
    Ok(Plan { x0, checkpoints })
}

fn variants(v: VariantArg) -> Vec<Variant> {
    match v {
        VariantArg::M1 => vec![Variant::M1],
        VariantArg::M2 => vec![Variant::M2],
        VariantArg::Both => vec![Variant::M1, Variant::M2],
    }
}

fn required_schedule(run: &RunArgs) -> Result<Schedule, Failure> {
    run.schedule.ok_or_else(|| Failure::Input("--schedule is required".into()))
}

pub fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let l = load(&args.common)?;
    let run = &args.run;
    let p = plan(&l, run)?;
    let schedule = required_schedule(run)?;
    let constants = summary_constants(&l);
    let mut rows = Vec::new();
    let mut paths = String::from("variant,time,state\n");
    for variant in variants(args.variant) {
        let summary =
            run_ensemble(&l, &schedule, variant, p.x0, run.t0, &p.checkpoints, run.replicas, run.seed, run.engine.into())?;
        let name = variant.name();
        for (k, miss) in miss_probability(&summary, &constants).into_iter().enumerate() {
            rows.push(Row::estimate(miss.t, name, "miss_probability", miss.estimate, (miss.ci_low, miss.ci_high)));
            for (x, &count) in summary.counts[k].iter().enumerate() {
                let fraction = count as f64 / run.replicas as f64;
                let metric = format!("occupancy:{}", l.state_name(x));
                rows.push(Row::estimate(miss.t, name, metric, fraction, wilson_interval(count, run.replicas)));
            }
        }
        if args.trajectory.is_some() {
            let last = *p.checkpoints.last().expect("plan has a checkpoint");
            let path = simulate_replica(&l, &schedule, variant, p.x0, run.t0, last, run.seed, 0, run.engine.into())?;
            paths += &format!("{name},{},{}\n", run.t0, l.state_name(path.initial));
            for (t, y) in &path.jumps {
                paths += &format!("{name},{t},{}\n", l.state_name(*y));
            }
        }
    }
    if let Some(file) = &args.trajectory {
        emit(Some(file), &paths)?;
    }
    emit(args.common.out.as_deref(), &render(&rows))
}

/// Never-left fractions at each checkpoint from first-jump times.
fn stay_counts(
    l: &Landscape,
    schedule: &Schedule,
    variant: Variant,
    p: &Plan,
    run: &RunArgs,
) -> Result<Vec<u64>, Failure> {
    let last = *p.checkpoints.last().expect("plan has a checkpoint");
    let first_jumps = run_replicas(l, schedule, variant, p.x0, run.t0, last, run.replicas, run.seed, run.engine.into(), |path| {
        path.jumps.first().map_or(f64::INFINITY, |&(t, _)| t)
    })?;
    Ok(p.checkpoints.iter().map(|&c| first_jumps.iter().filter(|&&t| t > c).count() as u64).collect())
}

pub fn bounds(args: &BoundsArgs) -> Result<(), Failure> {
    let l = load(&args.common)?;
    let run = &args.run;
    let p = plan(&l, run)?;
    let finite = FiniteTimeBound::new(&l)?;
    let schedule = match (run.schedule, finite.schedule()) {
        (Some(s), _) => s,
        (None, Some(s)) => s,
        (None, None) => {
            return Err(Failure::Input(format!(
                "--schedule is required: the finite-time schedule is unavailable ({})",
                finite.reason.as_deref().unwrap_or("inapplicable")
            )))
        }
    };
    let constants = summary_constants(&l);
    let n = run.replicas;
    let mut rows = Vec::new();

    let summary = run_ensemble(&l, &schedule, Variant::M2, p.x0, run.t0, &p.checkpoints, n, run.seed, run.engine.into())?;
    for miss in miss_probability(&summary, &constants) {
        let eval = finite.at(p.x0, miss.t);
        rows.push(
            Row::estimate(miss.t, "m2", "miss_probability", miss.estimate, (miss.ci_low, miss.ci_high))
                .with_bound(eval.value, eval.reason.as_deref()),
        );
    }

    if !constants.u_min_loc.contains(&p.x0) {
        let reason = format!("{} is not a local minimum", l.state_name(p.x0));
        for &t in &p.checkpoints {
            for (variant, metric) in [("m2", "stay_probability"), ("m1", "stay_probability")] {
                rows.push(not_applicable(t, variant, metric, &reason));
            }
        }
    } else {
        let epsilon = args.epsilon.unwrap_or(0.5 * constants.delta);
        let m2_stays = stay_counts(&l, &schedule, Variant::M2, &p, run)?;
        let probe = escape_bounds(&l, p.x0, epsilon, 0.0)?;
        let m1_stays = match probe.m1_schedule {
            Some(s) => Some(stay_counts(&l, &s, Variant::M1, &p, run)?),
            None => None,
        };
        for (k, &t) in p.checkpoints.iter().enumerate() {
            let e = escape_bounds(&l, p.x0, epsilon, t - run.t0)?;
            let stayed = m2_stays[k];
            rows.push(
                Row::estimate(t, "m2", "stay_probability", stayed as f64 / n as f64, wilson_interval(stayed, n))
                    .with_bound(Some(e.m2_stay_probability), None),
            );
            match &m1_stays {
                Some(counts) => rows.push(
                    Row::estimate(t, "m1", "stay_probability", counts[k] as f64 / n as f64, wilson_interval(counts[k], n))
                        .with_bound(e.m1_stay_lower_bound_at_t, None),
                ),
                None => rows.push(not_applicable(t, "m1", "stay_probability", e.m1_reason.as_deref().unwrap_or(""))),
            }
        }
    }
    emit(args.common.out.as_deref(), &render(&rows))
}

fn not_applicable(t: f64, variant: &str, metric: &str, reason: &str) -> Row {
    Row {
        time: t,
        variant: variant.into(),
        metric: metric.into(),
        value: Cell::Na,
        ci: None,
        bound: Cell::Na,
        applicable: Some(false),
        reason: reason.into(),
    }
}
