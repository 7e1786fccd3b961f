use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{AlphaSpec, ExperimentConfig};
use super::plot::gnuplot_script;
use super::CHECK_TOL;
use crate::analysis::{self, EnvelopeCheck, LinearFit};
use crate::dynamics::{self, EstimationMatrix, IterationTrace, RunSettings};
use crate::error::{Error, Result};
use crate::game::{GameConstants, QuadraticGame};
use crate::linalg::fmt_f64;
use crate::network::{Graph, MixingMatrix};
use crate::theory::{BoundInputs, StepSizePlan, DEFAULT_ALPHA_FRACTION};

const RELATIVE_ERROR_NOTE: &str =
    "relative error = ||x(t) - x*||_F / ||x(0) - x*||_F, x* the consensual equilibrium matrix";

/// First failed check of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub t: usize,
    pub relative_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub relative_error_definition: String,
    pub iterations: usize,
    pub converged: bool,
    pub final_relative_error: f64,
    pub alpha: f64,
    pub alpha_max: Option<f64>,
    pub alpha_admissible: bool,
    pub q: Option<f64>,
    /// `exp(slope)` of the log-linear fit of the squared error over the
    /// second half of the trace: the empirical per-step contraction.
    pub fitted_contraction: Option<f64>,
    pub fit: Option<LinearFit>,
    pub lemma1_min_relative_slack: f64,
    pub lemma2_min_relative_slack: f64,
    pub lemma3_min_relative_slack: Option<f64>,
    pub z_min_relative_slack: Option<f64>,
    pub running_average_max_residual: f64,
    pub triangle_min_gap: f64,
    pub envelope: Option<EnvelopeCheck>,
    pub monotone_from: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub game: QuadraticGame,
    pub graph: Graph,
    pub mixing: MixingMatrix,
    pub constants: GameConstants,
    pub plan: Option<StepSizePlan>,
    pub notes: Vec<String>,
    pub summary: Summary,
    pub trace: Vec<IterationTrace>,
    pub violation: Option<Violation>,
}

#[derive(Serialize)]
struct SummaryDocument<'a> {
    config: &'a ExperimentConfig,
    sigma: f64,
    constants: &'a GameConstants,
    plan: &'a Option<StepSizePlan>,
    notes: &'a [String],
    summary: &'a Summary,
    violation: &'a Option<Violation>,
    passed: bool,
}

impl ExperimentReport {
    /// True iff every enabled check passed.
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }

    pub fn summary_text(&self) -> String {
        let s = &self.summary;
        let mut out = format!("# {RELATIVE_ERROR_NOTE}\n");
        for note in &self.notes {
            out.push_str(&format!("# note: {note}\n"));
        }
        let mut line = |k: &str, v: String| out.push_str(&format!("{k}: {v}\n"));
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_else(|| "n/a".into());
        line("n", self.config.n.to_string());
        line("topology", self.config.topology.to_string());
        line("mu", fmt_f64(self.constants.mu));
        line("L", fmt_f64(self.constants.l));
        line("kappa", fmt_f64(self.constants.kappa));
        line("sigma", fmt_f64(self.mixing.sigma()));
        line("alpha", fmt_f64(s.alpha));
        line("alpha_max", opt(s.alpha_max));
        line("alpha_admissible", s.alpha_admissible.to_string());
        line("q", opt(s.q));
        line("iterations", s.iterations.to_string());
        line("converged", s.converged.to_string());
        line("final_relative_error", fmt_f64(s.final_relative_error));
        line("fitted_contraction", opt(s.fitted_contraction));
        line("fit_r_squared", opt(s.fit.map(|f| f.r_squared)));
        line("lemma1_min_relative_slack", fmt_f64(s.lemma1_min_relative_slack));
        line("lemma2_min_relative_slack", fmt_f64(s.lemma2_min_relative_slack));
        line("lemma3_min_relative_slack", opt(s.lemma3_min_relative_slack));
        line("z_min_relative_slack", opt(s.z_min_relative_slack));
        line("running_average_max_residual", fmt_f64(s.running_average_max_residual));
        line("envelope_worst_ratio", opt(s.envelope.as_ref().map(|e| e.worst_ratio)));
        line(
            "monotone_from",
            s.monotone_from.map(|t| t.to_string()).unwrap_or_else(|| "n/a".into()),
        );
        match &self.violation {
            Some(v) => line("violation", format!("{} at t = {}", v.check, v.t)),
            None => line("violation", "none".into()),
        }
        line("passed", self.passed().to_string());
        out
    }

    pub fn summary_json(&self) -> String {
        let doc = SummaryDocument {
            config: &self.config,
            sigma: self.mixing.sigma(),
            constants: &self.constants,
            plan: &self.plan,
            notes: &self.notes,
            summary: &self.summary,
            violation: &self.violation,
            passed: self.passed(),
        };
        serde_json::to_string_pretty(&doc).expect("summary serialises")
    }

    pub fn trace_csv(&self) -> String {
        dynamics::trace_csv(&self.trace)
    }

    /// Writes `trace.csv`, `summary.txt`, `summary.json`, `plot.gp` and the
    /// generated inputs (`config.toml`, `game.json`, `graph.txt`, `mixing.csv`).
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("trace.csv"), self.trace_csv())?;
        fs::write(dir.join("summary.txt"), self.summary_text())?;
        fs::write(dir.join("summary.json"), self.summary_json())?;
        let d0 = self.trace.first().map(|e| e.distance_to_ne).unwrap_or(0.0);
        fs::write(dir.join("plot.gp"), gnuplot_script("trace.csv", "plot.svg", d0))?;
        fs::write(dir.join("config.toml"), self.config.to_toml())?;
        fs::write(dir.join("game.json"), self.game.to_json())?;
        fs::write(dir.join("graph.txt"), self.graph.to_edge_list())?;
        fs::write(dir.join("mixing.csv"), self.mixing.to_csv())?;
        Ok(())
    }
}

/// Builds the game and network described by `config`, resolves the step
/// size, runs gradient play with full tracing and audits the trace.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let game = QuadraticGame::random(config.n, config.game_seed, config.coupling_scale)?;
    let graph = Graph::build(config.topology, config.n, config.graph_seed)?;
    let mixing = MixingMatrix::metropolis(&graph)?;
    let constants = game.constants()?;
    let inputs = BoundInputs::new(constants.mu, constants.l, mixing.sigma(), config.n);
    let mut notes = Vec::new();

    let alpha_max = match inputs.alpha_max() {
        Ok(a) => Some(a),
        Err(e @ Error::DegenerateMixing) => {
            if config.alpha == AlphaSpec::Auto {
                return Err(e);
            }
            notes.push(format!("{e}; no admissible step-size ceiling"));
            None
        }
        Err(e) => return Err(e),
    };

    let alpha = match (config.alpha, alpha_max) {
        (AlphaSpec::Auto, Some(amax)) => DEFAULT_ALPHA_FRACTION * amax,
        (AlphaSpec::Fixed(v), _) => v,
        (AlphaSpec::Capped(v), Some(amax)) => {
            let cap = DEFAULT_ALPHA_FRACTION * amax;
            if v > amax {
                notes.push(format!(
                    "requested step size {} exceeds alpha_max = {}; using {}",
                    fmt_f64(v),
                    fmt_f64(amax),
                    fmt_f64(cap)
                ));
            }
            v.min(cap)
        }
        (AlphaSpec::Capped(v), None) => v,
        (AlphaSpec::Auto, None) => unreachable!("auto with degenerate mixing returned above"),
    };
    let alpha_admissible = alpha_max.is_some_and(|amax| alpha > 0.0 && alpha < amax);
    if let (false, Some(amax)) = (alpha_admissible, alpha_max) {
        notes.push(format!(
            "step size {} is outside (0, {}); geometric convergence is not certified",
            fmt_f64(alpha),
            fmt_f64(amax)
        ));
    }
    let plan = if alpha_admissible {
        Some(StepSizePlan::new(inputs, Some(alpha))?)
    } else {
        None
    };
    let descent_valid = alpha <= constants.mu / (constants.l * constants.l);
    if !descent_valid {
        notes.push("step size exceeds mu/L^2; average-descent and Z checks are not applicable".into());
    }

    let x0 = EstimationMatrix::init(config.init, config.n, config.init_seed);
    let settings = RunSettings {
        alpha,
        max_iters: config.max_iters,
        tol: config.tol,
        record: true,
        theta: None,
    };
    let outcome = dynamics::run(&game, &mixing, x0, &settings)?;
    let trace = outcome.trace;

    let min_rel = |f: &dyn Fn(&IterationTrace) -> Option<f64>| {
        trace.iter().filter_map(f).fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.min(v)))
        })
    };
    let lemma1_min = min_rel(&|e| Some(e.lemma1.relative_slack())).unwrap_or(f64::INFINITY);
    let lemma2_min = min_rel(&|e| Some(e.lemma2.relative_slack())).unwrap_or(f64::INFINITY);
    let lemma3_min = descent_valid
        .then(|| min_rel(&|e| Some(e.lemma3.relative_slack())))
        .flatten();
    let z_min = descent_valid
        .then(|| {
            min_rel(&|e| {
                e.z_domination
                    .map(|z| z[0].relative_slack().min(z[1].relative_slack()))
            })
        })
        .flatten();
    let eq9_max = trace
        .iter()
        .map(|e| e.running_average_residual)
        .fold(0.0, f64::max);
    let triangle_min = trace
        .iter()
        .map(|e| e.triangle_gap())
        .fold(f64::INFINITY, f64::min);

    let violation = if config.check_lemmas {
        first_violation(&trace, descent_valid)
    } else {
        None
    };

    let envelope = match (&plan, trace.first()) {
        (Some(p), Some(first)) => {
            let c = analysis::envelope_constant(&inputs, alpha, first)?;
            Some(analysis::check_envelope(&trace, c, p.q))
        }
        _ => None,
    };
    let fit = analysis::tail_fit_half(&trace).ok();
    let violation = match (violation, &envelope) {
        (None, Some(env)) if config.check_lemmas && !env.holds() => Some(Violation {
            check: "envelope".into(),
            t: env.violations[0],
            relative_slack: 1.0 - env.worst_ratio,
        }),
        (v, _) => v,
    };

    let summary = Summary {
        relative_error_definition: RELATIVE_ERROR_NOTE.into(),
        iterations: outcome.iterations,
        converged: outcome.converged,
        final_relative_error: analysis::relative_errors(&trace).last().copied().unwrap_or(0.0),
        alpha,
        alpha_max,
        alpha_admissible,
        q: plan.as_ref().map(|p| p.q),
        fitted_contraction: fit.map(|f| f.slope.exp()),
        fit,
        lemma1_min_relative_slack: lemma1_min,
        lemma2_min_relative_slack: lemma2_min,
        lemma3_min_relative_slack: lemma3_min,
        z_min_relative_slack: z_min,
        running_average_max_residual: eq9_max,
        triangle_min_gap: triangle_min,
        envelope,
        monotone_from: analysis::monotone_from(&trace),
    };

    Ok(ExperimentReport {
        config: config.clone(),
        game,
        graph,
        mixing,
        constants,
        plan,
        notes,
        summary,
        trace,
        violation,
    })
}

fn first_violation(trace: &[IterationTrace], descent_valid: bool) -> Option<Violation> {
    for e in trace {
        let mut checks = vec![("lemma1", e.lemma1.relative_slack()), ("lemma2", e.lemma2.relative_slack())];
        if descent_valid {
            checks.push(("lemma3", e.lemma3.relative_slack()));
            if let Some(z) = e.z_domination {
                checks.push(("z_domination", z[0].relative_slack().min(z[1].relative_slack())));
            }
        }
        checks.push(("running_average", -e.running_average_residual));
        checks.push(("triangle", e.triangle_gap() / (1.0 + e.distance_to_ne)));
        if let Some((name, slack)) = checks.into_iter().find(|(_, s)| *s < -CHECK_TOL) {
            return Some(Violation {
                check: name.into(),
                t: e.t,
                relative_slack: slack,
            });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Topology;

    fn small(topology: Topology) -> ExperimentConfig {
        ExperimentConfig {
            n: 5,
            topology,
            max_iters: 200,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn auto_run_passes() {
        let r = run_experiment(&small(Topology::Ring)).unwrap();
        assert!(r.passed(), "{:?}", r.violation);
        assert!(r.summary.alpha_admissible);
        assert_eq!(r.trace.len(), 201);
        assert!(r.summary.envelope.as_ref().unwrap().holds());
        assert!(r.summary_text().contains("passed: true"));
    }

    #[test]
    fn capped_alpha_is_reported() {
        let cfg = ExperimentConfig {
            alpha: AlphaSpec::Capped(0.05),
            ..small(Topology::Tree)
        };
        let r = run_experiment(&cfg).unwrap();
        let amax = r.summary.alpha_max.unwrap();
        assert!(amax < 0.05);
        assert_eq!(r.summary.alpha, 0.9 * amax);
        assert!(r.notes.iter().any(|n| n.contains("exceeds alpha_max")));
    }

    #[test]
    fn auto_alpha_with_perfect_mixing_is_an_error() {
        let cfg = ExperimentConfig {
            n: 2,
            topology: Topology::Complete,
            ..ExperimentConfig::default()
        };
        assert!(matches!(run_experiment(&cfg), Err(Error::DegenerateMixing)));
        let fixed = ExperimentConfig {
            alpha: AlphaSpec::Fixed(0.1),
            ..cfg
        };
        let r = run_experiment(&fixed).unwrap();
        assert!(r.summary.alpha_max.is_none());
        assert!(r.passed());
    }

    #[test]
    fn explicit_large_alpha_is_not_certified() {
        let cfg = ExperimentConfig {
            alpha: AlphaSpec::Fixed(0.05),
            ..small(Topology::Star)
        };
        let r = run_experiment(&cfg).unwrap();
        assert!(!r.summary.alpha_admissible);
        assert!(r.summary.q.is_none());
        assert!(r.summary.envelope.is_none());
    }

    #[test]
    fn outputs_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let r = run_experiment(&small(Topology::Ring)).unwrap();
        r.write_outputs(dir.path()).unwrap();
        for f in ["trace.csv", "summary.txt", "summary.json", "plot.gp", "game.json", "graph.txt", "mixing.csv", "config.toml"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(json["passed"], serde_json::Value::Bool(true));
        let game = QuadraticGame::from_json(&fs::read_to_string(dir.path().join("game.json")).unwrap()).unwrap();
        assert_eq!(game, r.game);
    }
}
