use std::collections::BTreeMap;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CHECK_TOL;
use crate::analysis;
use crate::dynamics::{self, EstimationMatrix, Initializer, IterationTrace, RunSettings};
use crate::error::{Error, Result};
use crate::game::QuadraticGame;
use crate::linalg::fmt_f64;
use crate::network::{Graph, MixingMatrix, Topology, STOCHASTIC_TOL};
use crate::theory::{BoundInputs, DEFAULT_ALPHA_FRACTION};

/// Relative tolerance for the two derivations of the fifth ceiling term.
const ROOT_EQUIVALENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub sizes: Vec<usize>,
    pub topologies: Vec<Topology>,
    pub seeds: Vec<u64>,
    pub coupling_scale: f64,
    pub max_iters: usize,
    /// Run every cell with this step size instead of the automatic one.
    pub alpha_override: Option<f64>,
    /// Random vectors or pairs drawn per sampled check.
    pub samples: usize,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            sizes: vec![2, 5, 10, 20],
            topologies: Topology::ALL.to_vec(),
            seeds: (0..5).collect(),
            coupling_scale: 0.2,
            max_iters: 500,
            alpha_override: None,
            samples: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum CheckOutcome {
    /// `worst` is the smallest relative slack seen.
    Pass { worst: f64 },
    Fail { worst: f64, detail: String },
    Skipped { reason: String },
}

impl CheckOutcome {
    fn from_slack(worst: f64, detail: impl FnOnce() -> String) -> Self {
        if worst >= -CHECK_TOL {
            CheckOutcome::Pass { worst }
        } else {
            CheckOutcome::Fail {
                worst,
                detail: detail(),
            }
        }
    }

    fn from_bool(ok: bool, worst: f64, detail: impl FnOnce() -> String) -> Self {
        if ok {
            CheckOutcome::Pass { worst }
        } else {
            CheckOutcome::Fail {
                worst,
                detail: detail(),
            }
        }
    }

    fn skipped(reason: impl Into<String>) -> Self {
        CheckOutcome::Skipped {
            reason: reason.into(),
        }
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, CheckOutcome::Fail { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub n: usize,
    pub topology: Topology,
    pub seed: u64,
    pub sigma: f64,
    pub alpha: f64,
    pub alpha_source: String,
    pub checks: BTreeMap<String, CheckOutcome>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub worst: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub check: String,
    pub n: usize,
    pub topology: Topology,
    pub seed: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub cells: Vec<CellReport>,
    pub summary: BTreeMap<String, CheckSummary>,
    pub failures: Vec<Failure>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# {} cells\n", self.cells.len());
        for (name, s) in &self.summary {
            let verdict = if s.failed == 0 { "PASS" } else { "FAIL" };
            let worst = s.worst.map(fmt_f64).unwrap_or_else(|| "n/a".into());
            out.push_str(&format!(
                "{verdict} {name}: passed {} failed {} skipped {} worst_slack {worst}\n",
                s.passed, s.failed, s.skipped
            ));
        }
        for f in &self.failures {
            out.push_str(&format!(
                "failure {} n={} topology={} seed={}: {}\n",
                f.check, f.n, f.topology, f.seed, f.detail
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("audit report serialises")
    }
}

/// Runs the invariant suite over every (size, topology, seed) cell. Ring
/// cells below three nodes are omitted.
pub fn audit(config: &AuditConfig) -> Result<AuditReport> {
    if let Some(a) = config.alpha_override {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::input(format!("step size must be positive, got {a}")));
        }
    }
    let cells: Vec<(usize, Topology, u64)> = config
        .sizes
        .iter()
        .flat_map(|&n| {
            config
                .topologies
                .iter()
                .filter(move |t| n >= t.min_nodes())
                .flat_map(move |&t| config.seeds.iter().map(move |&s| (n, t, s)))
        })
        .collect();
    if cells.is_empty() {
        return Err(Error::input("audit matrix is empty"));
    }

    let workers = thread::available_parallelism().map_or(1, |p| p.get()).min(cells.len());
    let chunk = cells.len().div_ceil(workers);
    let results: Vec<Result<CellReport>> = thread::scope(|scope| {
        let handles: Vec<_> = cells
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|&(n, t, s)| audit_cell(config, n, t, s))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("audit worker panicked"))
            .collect()
    });
    let cells = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut summary: BTreeMap<String, CheckSummary> = BTreeMap::new();
    let mut failures = Vec::new();
    for cell in &cells {
        for (name, outcome) in &cell.checks {
            let s = summary.entry(name.clone()).or_default();
            let worst = match outcome {
                CheckOutcome::Pass { worst } => {
                    s.passed += 1;
                    Some(*worst)
                }
                CheckOutcome::Fail { worst, detail } => {
                    s.failed += 1;
                    failures.push(Failure {
                        check: name.clone(),
                        n: cell.n,
                        topology: cell.topology,
                        seed: cell.seed,
                        detail: detail.clone(),
                    });
                    Some(*worst)
                }
                CheckOutcome::Skipped { .. } => {
                    s.skipped += 1;
                    None
                }
            };
            if let Some(w) = worst {
                s.worst = Some(s.worst.map_or(w, |v| v.min(w)));
            }
        }
    }
    Ok(AuditReport {
        cells,
        summary,
        failures,
    })
}

fn audit_cell(config: &AuditConfig, n: usize, topology: Topology, seed: u64) -> Result<CellReport> {
    let game = QuadraticGame::random(n, seed, config.coupling_scale)?;
    let graph = Graph::build(topology, n, seed)?;
    let mixing = MixingMatrix::metropolis(&graph)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_a0d1);
    let mut checks = BTreeMap::new();

    let constants = match game.constants() {
        Ok(k) => k,
        Err(e) => {
            checks.insert(
                "assumption1_monotone".into(),
                CheckOutcome::Fail {
                    worst: f64::NEG_INFINITY,
                    detail: e.to_string(),
                },
            );
            return Ok(CellReport {
                n,
                topology,
                seed,
                sigma: mixing.sigma(),
                alpha: f64::NAN,
                alpha_source: "none".into(),
                checks,
            });
        }
    };
    let (mu, l) = (constants.mu, constants.l);
    let samples = config.samples.max(1);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-5.0..=5.0)).collect() };

    // strong monotonicity and per-player Lipschitz continuity, sampled
    let (mut mono, mut lip) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..samples {
        let (u, v) = (draw(&mut rng), draw(&mut rng));
        let (fu, fv) = (game.mapping(&u)?, game.mapping(&v)?);
        let diff2: f64 = u.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum();
        let inner: f64 = (0..n).map(|i| (fu[i] - fv[i]) * (u[i] - v[i])).sum();
        mono = mono.min((inner - mu * diff2) / (1.0 + inner.abs()));
        for i in 0..n {
            let rhs = constants.l_per_player[i] * diff2.sqrt();
            lip = lip.min((rhs - (fu[i] - fv[i]).abs()) / (1.0 + rhs));
        }
    }
    checks.insert(
        "assumption1_monotone".into(),
        CheckOutcome::from_slack(mono, || format!("monotonicity slack {mono:e}")),
    );
    checks.insert(
        "assumption2_lipschitz".into(),
        CheckOutcome::from_slack(lip, || format!("Lipschitz slack {lip:e}")),
    );

    let (rows, cols) = mixing.stochastic_defects();
    let sigma = mixing.sigma();
    let mixing_ok = graph.is_connected()
        && rows <= STOCHASTIC_TOL
        && cols <= STOCHASTIC_TOL
        && mixing.matches_graph(&graph)
        && sigma < 1.0;
    checks.insert(
        "assumption3_mixing".into(),
        CheckOutcome::from_bool(mixing_ok, -(rows.max(cols)), || {
            format!("row defect {rows:e}, column defect {cols:e}, sigma {sigma}")
        }),
    );

    let mut avg_prop = f64::INFINITY;
    for _ in 0..samples {
        let (lhs, rhs) = mixing.average_property(&draw(&mut rng))?;
        avg_prop = avg_prop.min((rhs - lhs) / (1.0 + rhs));
    }
    checks.insert(
        "average_property".into(),
        CheckOutcome::from_slack(avg_prop, || format!("average property slack {avg_prop:e}")),
    );

    let inputs = BoundInputs::new(mu, l, sigma, n);
    let alpha_max = match inputs.step_size_terms() {
        Ok(terms) => {
            let amax = terms.iter().copied().fold(f64::INFINITY, f64::min);
            checks.insert(
                "step_size_terms".into(),
                CheckOutcome::from_bool(terms.iter().all(|&t| t > 0.0), amax, || format!("terms {terms:?}")),
            );
            let root = inputs.quadratic_root_alpha_bound()?;
            let rel = (terms[4] - root).abs() / terms[4];
            checks.insert(
                "quadratic_root_equivalence".into(),
                CheckOutcome::from_bool(rel <= ROOT_EQUIVALENCE_TOL, -rel, || {
                    format!("term5 {} vs root {}", fmt_f64(terms[4]), fmt_f64(root))
                }),
            );
            Some(amax)
        }
        Err(e @ Error::DegenerateMixing) => {
            checks.insert("step_size_terms".into(), CheckOutcome::skipped(e.to_string()));
            checks.insert("quadratic_root_equivalence".into(), CheckOutcome::skipped(e.to_string()));
            None
        }
        Err(e) => return Err(e),
    };

    let (alpha, alpha_source) = match (config.alpha_override, alpha_max) {
        (Some(a), _) => (a, "override"),
        (None, Some(amax)) => (DEFAULT_ALPHA_FRACTION * amax, "auto"),
        // without a ceiling, stay inside the range where the trace inequalities apply
        (None, None) => (DEFAULT_ALPHA_FRACTION * (0.5 * mu / (l * l)).min(1.0), "descent-fallback"),
    };
    let admissible = alpha_max.is_some_and(|amax| alpha < amax);

    match (alpha_max, admissible) {
        (Some(_), true) => {
            let rate = inputs.rate_bound(alpha)?;
            let ok = rate.q < 1.0 && rate.lambda1 > rate.lambda2.abs();
            checks.insert(
                "rate_below_one".into(),
                CheckOutcome::from_bool(ok, 1.0 - rate.q, || {
                    format!("q {} lambda2 {}", fmt_f64(rate.q), fmt_f64(rate.lambda2))
                }),
            );
            let chain = inputs.contraction_chain(alpha)?;
            checks.insert(
                "contraction_chain".into(),
                CheckOutcome::from_bool(chain.holds(), 1.0 - chain.lambda1_ceiling, || format!("{chain:?}")),
            );
        }
        (Some(amax), false) => {
            let detail = format!("step size {} outside (0, {})", fmt_f64(alpha), fmt_f64(amax));
            checks.insert(
                "rate_below_one".into(),
                CheckOutcome::Fail {
                    worst: amax - alpha,
                    detail: detail.clone(),
                },
            );
            checks.insert("contraction_chain".into(), CheckOutcome::skipped(detail));
        }
        (None, _) => {
            checks.insert("rate_below_one".into(), CheckOutcome::skipped("no step-size ceiling"));
            checks.insert("contraction_chain".into(), CheckOutcome::skipped("no step-size ceiling"));
        }
    }

    let x0 = EstimationMatrix::init(Initializer::Uniform, n, seed);
    let settings = RunSettings::new(alpha, config.max_iters);
    let trace = match dynamics::run(&game, &mixing, x0, &settings) {
        Ok(out) => {
            checks.insert("divergence".into(), CheckOutcome::Pass { worst: 0.0 });
            out.trace
        }
        Err(e @ Error::Diverged { .. }) => {
            checks.insert(
                "divergence".into(),
                CheckOutcome::Fail {
                    worst: f64::NEG_INFINITY,
                    detail: e.to_string(),
                },
            );
            for name in ["lemma1", "lemma2", "lemma3", "running_average", "z_domination", "triangle", "envelope"] {
                checks.insert(name.into(), CheckOutcome::skipped("run diverged"));
            }
            return Ok(CellReport {
                n,
                topology,
                seed,
                sigma,
                alpha,
                alpha_source: alpha_source.into(),
                checks,
            });
        }
        Err(e) => return Err(e),
    };

    let descent_valid = alpha <= mu / (l * l);
    let worst = |f: &dyn Fn(&IterationTrace) -> f64| -> (f64, usize) {
        trace
            .iter()
            .map(|e| (f(e), e.t))
            .fold((f64::INFINITY, 0), |acc, v| if v.0 < acc.0 { v } else { acc })
    };
    let mut trace_check = |name: &str, (w, t): (f64, usize)| {
        checks.insert(
            name.into(),
            CheckOutcome::from_slack(w, || format!("relative slack {w:e} at t = {t}")),
        );
    };
    trace_check("lemma1", worst(&|e| e.lemma1.relative_slack()));
    trace_check("lemma2", worst(&|e| e.lemma2.relative_slack()));
    trace_check("running_average", worst(&|e| -e.running_average_residual));
    trace_check("triangle", worst(&|e| e.triangle_gap() / (1.0 + e.distance_to_ne)));
    if descent_valid {
        trace_check("lemma3", worst(&|e| e.lemma3.relative_slack()));
        if sigma > 0.0 {
            trace_check(
                "z_domination",
                worst(&|e| {
                    e.z_domination
                        .map_or(f64::INFINITY, |z| z[0].relative_slack().min(z[1].relative_slack()))
                }),
            );
        } else {
            checks.insert("z_domination".into(), CheckOutcome::skipped("sigma = 0"));
        }
    } else {
        checks.insert("lemma3".into(), CheckOutcome::skipped("step size above mu/L^2"));
        checks.insert("z_domination".into(), CheckOutcome::skipped("step size above mu/L^2"));
    }

    let envelope = match (alpha_max, admissible, trace.first()) {
        (Some(_), true, Some(first)) => {
            let q = inputs.rate_bound(alpha)?.q;
            let c = analysis::envelope_constant(&inputs, alpha, first)?;
            let check = analysis::check_envelope(&trace, c, q);
            CheckOutcome::from_bool(check.holds(), 1.0 - check.worst_ratio, || {
                format!("envelope exceeded at t = {:?}", check.violations.first())
            })
        }
        (Some(amax), false, _) => CheckOutcome::Fail {
            worst: amax - alpha,
            detail: format!("no envelope: step size {} outside (0, {})", fmt_f64(alpha), fmt_f64(amax)),
        },
        _ => CheckOutcome::skipped("no step-size ceiling"),
    };
    checks.insert("envelope".into(), envelope);

    Ok(CellReport {
        n,
        topology,
        seed,
        sigma,
        alpha,
        alpha_source: alpha_source.into(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> AuditConfig {
        AuditConfig {
            sizes: vec![2, 4],
            seeds: vec![0, 1],
            max_iters: 60,
            samples: 20,
            ..AuditConfig::default()
        }
    }

    #[test]
    fn small_matrix_passes() {
        let report = audit(&tiny()).unwrap();
        // ring is absent for n = 2
        assert_eq!(report.cells.len(), 2 * 3 + 2 * 4);
        assert!(report.passed(), "{}", report.to_text());
    }

    #[test]
    fn perfect_mixing_reports_degenerate_terms() {
        let report = audit(&tiny()).unwrap();
        let cell = report
            .cells
            .iter()
            .find(|c| c.n == 2 && c.topology == Topology::Complete)
            .unwrap();
        assert_eq!(cell.sigma, 0.0);
        assert_eq!(cell.alpha_source, "descent-fallback");
        match &cell.checks["step_size_terms"] {
            CheckOutcome::Skipped { reason } => assert!(reason.contains("perfect mixing")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn oversized_alpha_fails() {
        let cfg = AuditConfig {
            alpha_override: Some(0.5),
            ..tiny()
        };
        let report = audit(&cfg).unwrap();
        assert!(!report.passed());
        assert!(report
            .failures
            .iter()
            .any(|f| f.check == "envelope" || f.check == "divergence"));
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert!(json["failures"].as_array().unwrap().len() > 0);
        assert!(audit(&AuditConfig {
            alpha_override: Some(-1.0),
            ..tiny()
        })
        .is_err());
    }
}
