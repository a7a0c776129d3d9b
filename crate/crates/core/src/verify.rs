//! Randomized sweeps and parameter scans of the library's invariants,
//! grouped into suites. Every suite is deterministic for a given seed; each
//! randomized check draws from its own substream so adding a check never
//! perturbs the others.

use crate::bounds::{
    check_weak_bounds, extreme_shifts_projector, k_unchecked, optimize_pps, Objective, PpsSearch, WEAK_REGIME_LIMIT,
};
use crate::engine::{exact_shifts, grid_shifts, GaussianPointer, GridSpec, MeasurementSetup, DEFAULT_GRID_POINTS};
use crate::error::Result;
use crate::hardy::{build_hardy, closed_form_gap, closed_form_shift, hardy_probabilities, Occupation};
use crate::infogain::{information_gain, information_gain_entropy_route};
use crate::qcore::{CMatrix, HermitianObservable, StateVector, C64};
use crate::sampling::{random_observable, rescale_to_unit_interval, substream, ObservableKind, SetupDistribution};
use crate::sweep::{coupling_grid, Spacing};
use crate::weakvalue::{schwarz_gap, weak_moments};

pub const DEFAULT_SEED: u64 = 0x5eed_2011;

pub const SCHWARZ_TOL: f64 = 1e-10;
pub const ORACLE_TOL: f64 = 1e-8;
pub const HARDY_RTOL: f64 = 1e-12;
pub const LIMIT_TOL: f64 = 1e-5;
pub const ROUTE_TOL: f64 = 1e-12;
pub const K_TOL: f64 = 1e-10;
pub const WEAK_BOUND_RTOL: f64 = 1e-6;
pub const ENVELOPE_TOL: f64 = 1e-9;
pub const SATURATION_FRACTION: f64 = 0.98;
pub const GENERAL_BOUND_SLACK: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Schwarz,
    Bounds,
    Oracle,
    Hardy,
    Info,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Schwarz, Suite::Bounds, Suite::Oracle, Suite::Hardy, Suite::Info];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Schwarz => "schwarz",
            Suite::Bounds => "bounds",
            Suite::Oracle => "oracle",
            Suite::Hardy => "hardy",
            Suite::Info => "info",
        }
    }
}

/// How `worst` must compare with `limit` for a check to pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    AtMost,
    AtLeast,
    /// Strictly greater.
    Above,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::AtMost => "<=",
            Sense::AtLeast => ">=",
            Sense::Above => ">",
        }
    }

    fn worse(self, value: f64, than: f64) -> bool {
        value.is_nan()
            || match self {
                Sense::AtMost => value > than,
                Sense::AtLeast | Sense::Above => value < than,
            }
    }

    fn holds(self, value: f64, limit: f64) -> bool {
        match self {
            Sense::AtMost => value <= limit,
            Sense::AtLeast => value >= limit,
            Sense::Above => value > limit,
        }
    }
}

/// The input that produced a check's worst value.
#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    Setup(MeasurementSetup),
    Coupling { g: f64, delta: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub description: &'static str,
    pub instances: usize,
    /// Instances that could not be evaluated (for example an orthogonal
    /// random selection).
    pub skipped: usize,
    pub worst: Option<f64>,
    pub limit: f64,
    pub sense: Sense,
    pub seed: Option<u64>,
    pub witness: Option<Witness>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.worst.is_none_or(|w| self.sense.holds(w, self.limit))
    }

    /// Distance from the limit, positive when passing.
    pub fn margin(&self) -> Option<f64> {
        self.worst.map(|w| match self.sense {
            Sense::AtMost => self.limit - w,
            Sense::AtLeast | Sense::Above => w - self.limit,
        })
    }

    pub fn summary(&self) -> String {
        let worst = self.worst.map_or_else(|| "n/a".to_string(), |w| format!("{w:.6e}"));
        let seed = self.seed.map_or_else(String::new, |s| format!(" seed={s}"));
        format!(
            "{} {}: n={} skipped={} worst={} {} {:e}{seed}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.instances,
            self.skipped,
            worst,
            self.sense.symbol(),
            self.limit,
        )
    }
}

struct Tracker {
    check: Check,
}

impl Tracker {
    fn new(name: &'static str, description: &'static str, sense: Sense, limit: f64, seed: Option<u64>) -> Self {
        Self {
            check: Check {
                name,
                description,
                instances: 0,
                skipped: 0,
                worst: None,
                limit,
                sense,
                seed,
                witness: None,
            },
        }
    }

    fn record(&mut self, value: f64, witness: impl FnOnce() -> Witness) {
        let c = &mut self.check;
        c.instances += 1;
        if c.worst.is_none_or(|w| c.sense.worse(value, w) && !w.is_nan()) {
            c.worst = Some(value);
            c.witness = Some(witness());
        }
    }

    fn skip(&mut self) {
        self.check.skipped += 1;
    }

    fn finish(mut self) -> Check {
        if self.check.passed() {
            self.check.witness = None;
        }
        self.check
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

/// Instance counts for every suite. The defaults are the full sweeps.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    pub schwarz_instances: usize,
    pub rank_one_instances: usize,
    pub oracle_setups: usize,
    pub grid_points: usize,
    pub k_setups: usize,
    pub bound_setups: usize,
    pub restarts: usize,
    pub general_observables: usize,
    pub general_restarts: usize,
    pub closed_form_points: usize,
    pub sweep_points: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            schwarz_instances: 10_000,
            rank_one_instances: 1_000,
            oracle_setups: 200,
            grid_points: DEFAULT_GRID_POINTS,
            k_setups: 10_000,
            bound_setups: 10_000,
            restarts: 64,
            general_observables: 500,
            general_restarts: 2,
            closed_form_points: 50,
            sweep_points: 200,
        }
    }
}

impl VerifyConfig {
    /// Reduced counts for smoke tests.
    pub fn quick(seed: u64) -> Self {
        Self {
            seed,
            schwarz_instances: 500,
            rank_one_instances: 100,
            oracle_setups: 10,
            grid_points: 2048,
            k_setups: 500,
            bound_setups: 500,
            restarts: 8,
            general_observables: 3,
            general_restarts: 1,
            closed_form_points: 20,
            sweep_points: 50,
        }
    }
}

pub fn run_suite(suite: Suite, config: &VerifyConfig) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Schwarz => schwarz_suite(config),
        Suite::Bounds => bounds_suite(config)?,
        Suite::Oracle => oracle_suite(config),
        Suite::Hardy => hardy_suite(config)?,
        Suite::Info => info_suite(config)?,
    };
    Ok(SuiteReport { suite, checks })
}

// stream ids, one per randomized check
const STREAM_SCHWARZ: u64 = 1;
const STREAM_RANK_ONE: u64 = 2;
const STREAM_ORACLE: u64 = 3;
const STREAM_K: u64 = 4;
const STREAM_WEAK: u64 = 5;
const STREAM_GENERAL: u64 = 6;

fn schwarz_suite(config: &VerifyConfig) -> Vec<Check> {
    let mut gap = Tracker::new(
        "schwarz_gap",
        "min a11 - |A_w|^2 over mixed and pure random selections, d <= 6",
        Sense::AtLeast,
        -SCHWARZ_TOL,
        Some(config.seed),
    );
    let dist = SetupDistribution {
        min_dim: 2,
        max_dim: 6,
        ..Default::default()
    };
    let mut rng = substream(config.seed, STREAM_SCHWARZ);
    for _ in 0..config.schwarz_instances {
        let s = dist.sample(&mut rng);
        match schwarz_gap(s.rho_s(), s.pi_f(), s.observable()) {
            Ok(c) => gap.record(c, || Witness::Setup(s.clone())),
            Err(_) => gap.skip(),
        }
    }

    let mut equality = Tracker::new(
        "schwarz_rank_one_equality",
        "max |a11 - |A_w|^2| for pure preselection and rank-one postselection",
        Sense::AtMost,
        SCHWARZ_TOL,
        Some(config.seed),
    );
    let dist = SetupDistribution {
        min_dim: 2,
        max_dim: 6,
        mixed_selection: false,
        ..Default::default()
    };
    let mut rng = substream(config.seed, STREAM_RANK_ONE);
    for _ in 0..config.rank_one_instances {
        let s = dist.sample(&mut rng);
        match schwarz_gap(s.rho_s(), s.pi_f(), s.observable()) {
            Ok(c) => equality.record(c.abs(), || Witness::Setup(s.clone())),
            Err(_) => equality.skip(),
        }
    }
    vec![gap.finish(), equality.finish()]
}

fn oracle_suite(config: &VerifyConfig) -> Vec<Check> {
    let seed = Some(config.seed);
    let mut dq = Tracker::new(
        "oracle_delta_q",
        "max |exact - grid| dq / D",
        Sense::AtMost,
        ORACLE_TOL,
        seed,
    );
    let mut dp = Tracker::new(
        "oracle_delta_p",
        "max |exact - grid| dp * D",
        Sense::AtMost,
        ORACLE_TOL,
        seed,
    );
    let mut norm = Tracker::new(
        "oracle_postselect_prob",
        "max |exact - grid| post-selection probability",
        Sense::AtMost,
        ORACLE_TOL,
        seed,
    );
    let dist = SetupDistribution::default();
    let mut rng = substream(config.seed, STREAM_ORACLE);
    for _ in 0..config.oracle_setups {
        let s = dist.sample(&mut rng);
        let pair = GridSpec::for_setup(&s, config.grid_points)
            .and_then(|grid| Ok((exact_shifts(&s)?, grid_shifts(&s, &grid)?)));
        let Ok((exact, grid)) = pair else {
            dq.skip();
            dp.skip();
            norm.skip();
            continue;
        };
        let delta = s.pointer().delta();
        dq.record((exact.delta_q - grid.delta_q).abs() / delta, || {
            Witness::Setup(s.clone())
        });
        dp.record((exact.delta_p - grid.delta_p).abs() * delta, || {
            Witness::Setup(s.clone())
        });
        norm.record((exact.postselect_prob - grid.postselect_prob).abs(), || {
            Witness::Setup(s.clone())
        });
    }
    vec![dq.finish(), dp.finish(), norm.finish()]
}

fn hardy_suite(config: &VerifyConfig) -> Result<Vec<Check>> {
    let delta = 1.0;
    let pointer = GaussianPointer::new(delta)?;
    let scenario = build_hardy();

    let mut closed = Tracker::new(
        "hardy_closed_form",
        "max relative gap between engine and closed-form shifts, all four occupations",
        Sense::AtMost,
        HARDY_RTOL,
        None,
    );
    for g in coupling_grid(0.01, 10.0, config.closed_form_points, Spacing::Log)? {
        for which in Occupation::ALL {
            let setup = scenario.setup(which, g, pointer)?;
            let engine = exact_shifts(&setup)?.delta_q;
            closed.record(closed_form_gap(engine, closed_form_shift(which, g, delta)), || {
                Witness::Setup(setup.clone())
            });
        }
    }

    let mut limits = Tracker::new(
        "hardy_nono_limits",
        "max |prob_nono + 1| at g/D = 1e-3 and |prob_nono - 1/5| at g/D = 10",
        Sense::AtMost,
        LIMIT_TOL,
        None,
    );
    for (g, target) in [(1e-3, -1.0), (10.0, 0.2)] {
        let p = hardy_probabilities(g, delta)?;
        limits.record((p.prob_nono - target).abs(), || Witness::Coupling { g, delta });
    }

    let mut monotone = Tracker::new(
        "hardy_nono_monotone",
        "min consecutive increase of prob_nono over a log sweep g/D in [1e-3, 10]",
        Sense::Above,
        0.0,
        None,
    );
    let mut prev: Option<f64> = None;
    for g in coupling_grid(1e-3, 10.0, config.sweep_points, Spacing::Log)? {
        let p = hardy_probabilities(g, delta)?.prob_nono;
        if let Some(q) = prev {
            monotone.record(p - q, || Witness::Coupling { g, delta });
        }
        prev = Some(p);
    }
    Ok(vec![closed.finish(), limits.finish(), monotone.finish()])
}

fn info_suite(config: &VerifyConfig) -> Result<Vec<Check>> {
    let delta = 1.0;
    let mut route = Tracker::new(
        "info_route_agreement",
        "max |entropy route - closed form| information gain",
        Sense::AtMost,
        ROUTE_TOL,
        None,
    );
    let mut monotone = Tracker::new(
        "info_monotone",
        "min consecutive increase of I_a",
        Sense::Above,
        0.0,
        None,
    );
    let mut weak = Tracker::new(
        "info_weak_negative_shifts",
        "max q_min / D where I_a < 0.01 bits",
        Sense::AtMost,
        -0.9,
        None,
    );
    let mut strong = Tracker::new(
        "info_strong_no_negative_shifts",
        "min q_min / D where I_a > 0.99 bits",
        Sense::AtLeast,
        -0.01,
        None,
    );
    let mut prev: Option<f64> = None;
    for g in coupling_grid(0.01, 10.0, config.sweep_points, Spacing::Log)? {
        let witness = || Witness::Coupling { g, delta };
        let r = information_gain(g, delta)?;
        route.record((information_gain_entropy_route(g, delta)? - r.i_a).abs(), witness);
        if let Some(p) = prev {
            monotone.record(r.i_a - p, witness);
        }
        prev = Some(r.i_a);
        let q_min = r.q_min.unwrap_or(f64::NAN) / delta;
        if r.i_a < 0.01 {
            weak.record(q_min, witness);
        }
        if r.i_a > 0.99 {
            strong.record(q_min, witness);
        }
    }

    let mut limit = Tracker::new(
        "info_strong_limit",
        "|I_a - 1| at g/D = 10",
        Sense::AtMost,
        LIMIT_TOL,
        None,
    );
    limit.record((information_gain(10.0, delta)?.i_a - 1.0).abs(), || Witness::Coupling {
        g: 10.0,
        delta,
    });
    Ok(vec![
        route.finish(),
        monotone.finish(),
        limit.finish(),
        weak.finish(),
        strong.finish(),
    ])
}

fn qubit_projector() -> HermitianObservable {
    HermitianObservable::from_projector(&StateVector::basis(2, 0).expect("basis").projector()).expect("projector")
}

fn pauli_z() -> HermitianObservable {
    let mut m = CMatrix::identity(2, 2);
    m[(1, 1)] = C64::new(-1.0, 0.0);
    HermitianObservable::new(m).expect("diagonal")
}

fn bounds_suite(config: &VerifyConfig) -> Result<Vec<Check>> {
    let seed = Some(config.seed);
    let delta = 1.0;
    let pointer = GaussianPointer::new(delta)?;
    // g dp = g / (2 D)
    let weak_g = 2.0 * WEAK_REGIME_LIMIT * delta;

    let mut k = Tracker::new(
        "k_positivity",
        "min K over random projector setups with g dp <= 1",
        Sense::AtLeast,
        -K_TOL,
        seed,
    );
    let dist = SetupDistribution {
        observable: ObservableKind::Projector,
        g_over_delta: (1e-3, 2.0),
        ..Default::default()
    };
    let mut rng = substream(config.seed, STREAM_K);
    for _ in 0..config.k_setups {
        let s = dist.sample(&mut rng);
        match weak_moments(s.rho_s(), s.pi_f(), s.observable()) {
            Ok(m) => k.record(k_unchecked(&m, s.g(), s.pointer()), || Witness::Setup(s.clone())),
            Err(_) => k.skip(),
        }
    }

    let mut weak_q = Tracker::new(
        "weak_bound_random_q",
        "max |dq| / dq_bound over random setups with g dp <= 0.01",
        Sense::AtMost,
        1.0 + WEAK_BOUND_RTOL,
        seed,
    );
    let mut weak_p = Tracker::new(
        "weak_bound_random_p",
        "max |dp| / dp_bound over random setups with g dp <= 0.01",
        Sense::AtMost,
        1.0 + WEAK_BOUND_RTOL,
        seed,
    );
    let dist = SetupDistribution {
        g_over_delta: (1e-4, weak_g / delta),
        ..Default::default()
    };
    let mut rng = substream(config.seed, STREAM_WEAK);
    for _ in 0..config.bound_setups {
        let s = dist.sample(&mut rng);
        match check_weak_bounds(&s) {
            Ok(r) => {
                weak_q.record(r.q_ratio(), || Witness::Setup(s.clone()));
                weak_p.record(r.p_ratio(), || Witness::Setup(s.clone()));
            }
            Err(_) => {
                weak_q.skip();
                weak_p.skip();
            }
        }
    }

    let search = PpsSearch::new(config.restarts, config.seed);
    let mut sat_q = Tracker::new(
        "weak_bound_saturated_q",
        "max |dq| / dq_bound over optimizer-saturated selections at g dp = 0.01",
        Sense::AtMost,
        1.0 + WEAK_BOUND_RTOL,
        seed,
    );
    let mut sat_p = Tracker::new(
        "weak_bound_saturated_p",
        "max |dp| / dp_bound at the optimizer-saturated selections",
        Sense::AtMost,
        1.0 + WEAK_BOUND_RTOL,
        seed,
    );
    let mut reach = Tracker::new(
        "weak_bound_saturation_reach",
        "min over observables of the best |dq| / dq_bound found",
        Sense::AtLeast,
        SATURATION_FRACTION,
        seed,
    );
    for obs in [qubit_projector(), pauli_z()] {
        let pair = optimize_pps(&obs, weak_g, pointer, Objective::Both, &search)?;
        let mut best = 0.0f64;
        for ext in [&pair.best_max, &pair.best_min].into_iter().flatten() {
            let setup = ext.setup(&obs, weak_g, pointer)?;
            let r = check_weak_bounds(&setup)?;
            sat_q.record(r.q_ratio(), || Witness::Setup(setup.clone()));
            sat_p.record(r.p_ratio(), || Witness::Setup(setup.clone()));
            best = best.max(r.q_ratio());
        }
        let setup = pair
            .best_max
            .as_ref()
            .map(|e| e.setup(&obs, weak_g, pointer))
            .transpose()?;
        reach.record(best, || Witness::Setup(setup.expect("max objective requested")));
    }

    let mut excess = Tracker::new(
        "envelope_containment",
        "max amount (units of D) any optimizer sample leaves the projector envelope",
        Sense::AtMost,
        ENVELOPE_TOL,
        seed,
    );
    let mut attained = Tracker::new(
        "envelope_attainment",
        "max relative gap to the envelope divided by its tolerance (0.5%, 1% at g/D = 0.1)",
        Sense::AtMost,
        1.0,
        seed,
    );
    let rank_two = {
        let mut m = CMatrix::identity(3, 3);
        m[(2, 2)] = C64::new(0.0, 0.0);
        HermitianObservable::new(m)?
    };
    for (obs, g) in [
        (qubit_projector(), 0.1),
        (qubit_projector(), 1.0),
        (qubit_projector(), 10.0),
        (rank_two, 1.0),
    ] {
        let g = g * delta;
        let pair = optimize_pps(&obs, g, pointer, Objective::Both, &search)?;
        let env = extreme_shifts_projector(g, delta)?;
        let witness = |e: &Option<crate::bounds::Extremum>| e.as_ref().and_then(|e| e.setup(&obs, g, pointer).ok());
        if let Some(x) = pair.max_envelope_excess {
            let w = witness(&pair.best_max);
            excess.record(x / delta, || w.map_or(Witness::Coupling { g, delta }, Witness::Setup));
        }
        let tol = if (g / delta - 0.1).abs() < 1e-12 { 0.01 } else { 0.005 };
        for (ext, target) in [(&pair.best_max, env.q_max), (&pair.best_min, env.q_min)] {
            let gap = ext
                .as_ref()
                .map_or(f64::INFINITY, |e| ((e.delta_q - target) / target).abs());
            let w = witness(ext);
            attained.record(gap / tol, || w.map_or(Witness::Coupling { g, delta }, Witness::Setup));
        }
    }

    let mut general = Tracker::new(
        "general_observable_weak_bound",
        "max optimized |dq| / dq_bound, random Hermitian spectra in [-1, 1], d <= 4, g dp = 0.01",
        Sense::AtMost,
        1.0 + GENERAL_BOUND_SLACK,
        seed,
    );
    let general_search = PpsSearch::new(config.general_restarts, config.seed);
    let mut rng = substream(config.seed, STREAM_GENERAL);
    for i in 0..config.general_observables {
        let dim = 2 + i % 3;
        let obs = rescale_to_unit_interval(&random_observable(dim, &mut rng))?;
        let pair = optimize_pps(&obs, weak_g, pointer, Objective::Both, &general_search)?;
        for ext in [&pair.best_max, &pair.best_min].into_iter().flatten() {
            let ratio = ext.delta_q.abs() * 2.0 * pointer.delta_p();
            general.record(ratio, || {
                ext.setup(&obs, weak_g, pointer)
                    .map_or(Witness::Coupling { g: weak_g, delta }, Witness::Setup)
            });
        }
    }

    Ok(vec![
        k.finish(),
        weak_q.finish(),
        weak_p.finish(),
        sat_q.finish(),
        sat_p.finish(),
        reach.finish(),
        excess.finish(),
        attained.finish(),
        general.finish(),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracker_keeps_worst_and_drops_passing_witness() {
        let mut t = Tracker::new("t", "", Sense::AtMost, 1.0, None);
        for v in [0.2, 0.7, 0.5] {
            t.record(v, || Witness::Coupling { g: v, delta: 1.0 });
        }
        let c = t.finish();
        assert_eq!(c.worst, Some(0.7));
        assert!(c.passed() && c.witness.is_none());
        assert!((c.margin().unwrap() - 0.3).abs() < 1e-15);

        let mut t = Tracker::new("t", "", Sense::Above, 0.0, None);
        t.record(1.0, || Witness::Coupling { g: 1.0, delta: 1.0 });
        t.record(0.0, || Witness::Coupling { g: 2.0, delta: 1.0 });
        let c = t.finish();
        assert!(!c.passed());
        assert_eq!(c.witness, Some(Witness::Coupling { g: 2.0, delta: 1.0 }));
    }

    #[test]
    fn nan_counts_as_failure() {
        let mut t = Tracker::new("t", "", Sense::AtLeast, 0.0, None);
        t.record(1.0, || Witness::Coupling { g: 1.0, delta: 1.0 });
        t.record(f64::NAN, || Witness::Coupling { g: 2.0, delta: 1.0 });
        t.record(-5.0, || Witness::Coupling { g: 3.0, delta: 1.0 });
        assert!(!t.finish().passed());
    }

    #[test]
    fn quick_suites_pass_where_expected() {
        let config = VerifyConfig::quick(11);
        for suite in [Suite::Schwarz, Suite::Oracle, Suite::Hardy] {
            let report = run_suite(suite, &config).unwrap();
            for c in &report.checks {
                assert!(c.passed(), "{}", c.summary());
                assert!(c.instances > 0);
            }
        }
    }

    #[test]
    fn suites_are_deterministic() {
        let config = VerifyConfig::quick(5);
        let a = run_suite(Suite::Schwarz, &config).unwrap();
        let b = run_suite(Suite::Schwarz, &config).unwrap();
        assert_eq!(a, b);
    }
}
