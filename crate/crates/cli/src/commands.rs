use std::path::Path;

use weakshift_core::bounds::{optimize_pps, Extremum, Objective, PpsSearch};
use weakshift_core::engine::grid_shifts;
use weakshift_core::verify::{run_suite, Suite, VerifyConfig, Witness};
use weakshift_core::{
    exact_shifts, info_curve, jozsa_shifts, probability_curve, second_order_shifts, weak_moments, GaussianPointer,
    HermitianObservable, Spacing, StateVector,
};

use crate::output::{emit, num, opt, Csv, Report};
use crate::scenario::ScenarioFile;
use crate::{CliError, ObjectiveArg, ObservableArg, SpacingArg, SuiteArg};

fn spacing(s: SpacingArg) -> Spacing {
    match s {
        SpacingArg::Lin => Spacing::Linear,
        SpacingArg::Log => Spacing::Log,
    }
}

pub fn run(path: &Path) -> Result<(), CliError> {
    let scenario = ScenarioFile::load(path)?.validate()?;
    let setup = &scenario.setup;
    let (g, pointer) = (setup.g(), setup.pointer());
    let exact = exact_shifts(setup)?;
    let moments = weak_moments(setup.rho_s(), setup.pi_f(), setup.observable()).ok();
    let first = moments.map(|m| jozsa_shifts(m.weak_value, g, pointer));
    let second = moments.and_then(|m| second_order_shifts(&m, g, pointer).ok());

    let mut r = Report::default();
    r.push("dimension", setup.dim().to_string())
        .push("g", num(g))
        .push("delta", num(pointer.delta()))
        .push("selection_prob", num(setup.selection_prob()))
        .push("postselect_prob", num(exact.postselect_prob))
        .push("delta_q", num(exact.delta_q))
        .push("delta_p", num(exact.delta_p))
        .push("weak_value_re", opt(moments.map(|m| m.weak_value.re)))
        .push("weak_value_im", opt(moments.map(|m| m.weak_value.im)))
        .push("first_order_delta_q", opt(first.map(|s| s.delta_q)))
        .push("first_order_delta_p", opt(first.map(|s| s.delta_p)))
        .push("second_order_delta_q", opt(second.map(|s| s.delta_q)))
        .push("second_order_delta_p", opt(second.map(|s| s.delta_p)));
    if let Some(grid) = &scenario.grid {
        let oracle = grid_shifts(setup, grid)?;
        r.push("grid_delta_q", num(oracle.delta_q))
            .push("grid_delta_p", num(oracle.delta_p))
            .push("grid_postselect_prob", num(oracle.postselect_prob));
    }
    emit(&r.render(), None)
}

pub fn hardy_sweep(
    g_min: f64,
    g_max: f64,
    points: usize,
    delta: f64,
    s: SpacingArg,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let curve = probability_curve(g_min, g_max, points, delta, spacing(s))?;
    let mut csv = Csv::new(&[
        "g[length]",
        "prob_oo[1]",
        "prob_ono[1]",
        "prob_noo[1]",
        "prob_nono[1]",
        "prob_sum[1]",
    ]);
    for p in &curve {
        csv.row(&[p.g, p.prob_oo, p.prob_ono, p.prob_noo, p.prob_nono, p.sum()].map(num));
    }
    emit(&csv.into_string(), out)
}

pub fn info_sweep(
    g_min: f64,
    g_max: f64,
    points: usize,
    delta: f64,
    s: SpacingArg,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let curve = info_curve(g_min, g_max, points, delta, spacing(s))?;
    let mut csv = Csv::new(&["g[length]", "lambda[1]", "i_a_bits[bit]", "q_min[length]"]);
    for r in &curve {
        // q_min is undefined at zero coupling: empty cell
        csv.row(&[
            num(r.g),
            num(r.lambda),
            num(r.i_a),
            r.q_min.map(num).unwrap_or_default(),
        ]);
    }
    emit(&csv.into_string(), out)
}

fn state_text(s: &StateVector) -> String {
    let parts: Vec<String> = s
        .amplitudes()
        .iter()
        .map(|z| format!("[{},{}]", num(z.re), num(z.im)))
        .collect();
    format!("[{}]", parts.join(","))
}

fn relative_gap(found: f64, target: f64) -> f64 {
    if target == 0.0 {
        (found - target).abs()
    } else {
        ((found - target) / target).abs()
    }
}

#[allow(clippy::too_many_arguments)]
pub fn bounds_optimize(
    dim: usize,
    g: f64,
    delta: f64,
    objective: ObjectiveArg,
    restarts: usize,
    seed: u64,
    which: ObservableArg,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let observable = match which {
        ObservableArg::Projector => HermitianObservable::from_projector(&StateVector::basis(dim, 0)?.projector())?,
        ObservableArg::Identity => HermitianObservable::identity(dim)?,
    };
    let pointer = GaussianPointer::new(delta)?;
    let objective = match objective {
        ObjectiveArg::Max => Objective::Max,
        ObjectiveArg::Min => Objective::Min,
        ObjectiveArg::Both => Objective::Both,
    };
    let pair = optimize_pps(&observable, g, pointer, objective, &PpsSearch::new(restarts, seed))?;

    let mut r = Report::default();
    r.push(
        "observable",
        match which {
            ObservableArg::Projector => "projector",
            ObservableArg::Identity => "identity",
        },
    )
    .push("dim", dim.to_string())
    .push("g", num(g))
    .push("delta", num(delta))
    .push("restarts", restarts.to_string())
    .push("seed", seed.to_string())
    .push("evaluations", pair.evaluations.to_string())
    .push("envelope_q_max", opt(pair.envelope.map(|e| e.q_max)))
    .push("envelope_q_min", opt(pair.envelope.map(|e| e.q_min)));
    let mut section = |name: &str, ext: &Option<Extremum>, target: Option<f64>| {
        if let Some(e) = ext {
            r.push(format!("{name}_delta_q"), num(e.delta_q))
                .push(format!("{name}_delta_p"), num(e.delta_p))
                .push(format!("{name}_postselect_prob"), num(e.postselect_prob))
                .push(format!("{name}_gap"), opt(target.map(|t| relative_gap(e.delta_q, t))))
                .push(format!("{name}_preselection"), state_text(&e.preselection))
                .push(format!("{name}_postselection"), state_text(&e.postselection));
        }
    };
    section("best_max", &pair.best_max, pair.envelope.map(|e| e.q_max));
    section("best_min", &pair.best_min, pair.envelope.map(|e| e.q_min));
    r.push("max_envelope_excess", opt(pair.max_envelope_excess));
    emit(&r.render(), out)
}

fn witness_json(w: &Witness) -> String {
    match w {
        Witness::Setup(s) => ScenarioFile::from_setup(s).to_json(),
        Witness::Coupling { g, delta } => serde_json::json!({ "g": g, "delta": delta }).to_string(),
    }
}

pub fn verify(suite: SuiteArg, seed: u64, quick: bool, replay_dir: Option<&Path>) -> Result<(), CliError> {
    let suites: Vec<Suite> = match suite {
        SuiteArg::Schwarz => vec![Suite::Schwarz],
        SuiteArg::Bounds => vec![Suite::Bounds],
        SuiteArg::Oracle => vec![Suite::Oracle],
        SuiteArg::Hardy => vec![Suite::Hardy],
        SuiteArg::Info => vec![Suite::Info],
        SuiteArg::All => Suite::ALL.to_vec(),
    };
    let config = if quick {
        VerifyConfig::quick(seed)
    } else {
        VerifyConfig {
            seed,
            ..Default::default()
        }
    };
    if let Some(dir) = replay_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("--replay-dir {}: {e}", dir.display())))?;
    }

    let (mut passed, mut failed) = (0usize, 0usize);
    let mut text = String::new();
    for s in suites {
        let report = run_suite(s, &config)?;
        text.push_str(&format!("suite {}\n", s.name()));
        for c in &report.checks {
            text.push_str(&format!("  {}\n", c.summary()));
            if c.passed() {
                passed += 1;
                continue;
            }
            failed += 1;
            text.push_str(&format!("    {}\n", c.description));
            if let Some(w) = &c.witness {
                let json = witness_json(w);
                text.push_str(&format!("    replay: {json}\n"));
                if let Some(dir) = replay_dir {
                    let path = dir.join(format!("{}.json", c.name));
                    std::fs::write(&path, format!("{json}\n"))
                        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                }
            }
        }
    }
    text.push_str(&format!("checks passed {passed}, failed {failed}\n"));
    emit(&text, None)?;
    if failed > 0 {
        return Err(CliError::Invariant(format!("{failed} check(s) failed")));
    }
    Ok(())
}
