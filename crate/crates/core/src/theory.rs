//! Closed-form step-size ceilings and contraction rates for gradient play.
//!
//! The analysis tracks `z(t) = (||xbar(t) - x*||^2, ||x(t) - xbar(t)||^2)`
//! (distance of the running average to the equilibrium, and disagreement)
//! and shows `z(t+1) <= Z z(t)` for a positive 2x2 matrix `Z`. The spectral
//! radius of `Z` is the rate `q(alpha)`; it is below one whenever the step size
//! is under the five-term ceiling returned by [`BoundInputs::step_size_terms`].
//!
//! Throughout, `beta = (1/sigma^2 - 1) / 2` and `gamma = 1 / (1 + mu alpha / n)`.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction of the step-size ceiling used when no step size is given.
pub const DEFAULT_ALPHA_FRACTION: f64 = 0.9;

/// Smallest `n` for which the asymptotic rate comparison is reported as
/// being inside its regime.
pub const ASYMPTOTIC_MIN_N: usize = 10;

/// Game and network constants entering every bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub mu: f64,
    pub l: f64,
    pub sigma: f64,
    pub n: usize,
}

/// Eigen-structure of `Z` at a given step size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBound {
    pub q: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub d: f64,
    pub gamma: f64,
    pub beta: f64,
}

/// Intermediate quantities of the argument that `lambda1 < 1`.
///
/// With `alpha` under the ceiling:
/// `disagreement_factor < disagreement_ceiling <= gamma` and
/// `lambda1 <= lambda1_ceiling < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionChain {
    /// `(1 + beta) (sigma + alpha sqrt((n-1)/n) L)^2`, the bottom-right entry of `Z`.
    pub disagreement_factor: f64,
    /// `(sigma sqrt(1 + beta) + 1)^2 / 4`.
    pub disagreement_ceiling: f64,
    pub gamma: f64,
    pub lambda1: f64,
    /// `gamma + sqrt(gamma (2 alpha^3 / mu) ((1+beta)/beta) ((n-1)/n) L^4)`.
    pub lambda1_ceiling: f64,
}

impl ContractionChain {
    pub fn holds(&self) -> bool {
        self.disagreement_factor < self.disagreement_ceiling
            && self.disagreement_ceiling <= self.gamma
            && self.lambda1 <= self.lambda1_ceiling
            && self.lambda1_ceiling < 1.0
    }
}

impl BoundInputs {
    pub fn new(mu: f64, l: f64, sigma: f64, n: usize) -> Self {
        Self { mu, l, sigma, n }
    }

    fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::input(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(Error::input(format!("L must be positive, got {}", self.l)));
        }
        if self.n < 2 {
            return Err(Error::input(format!("n must be at least 2, got {}", self.n)));
        }
        if self.sigma.is_nan() || self.sigma < 0.0 {
            return Err(Error::input(format!("sigma must lie in [0, 1), got {}", self.sigma)));
        }
        if self.sigma == 0.0 {
            return Err(Error::DegenerateMixing);
        }
        if self.sigma >= 1.0 {
            return Err(Error::NoContraction { sigma: self.sigma });
        }
        Ok(())
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// The five terms whose minimum bounds the admissible step size, in order:
    ///
    /// 1. `1`
    /// 2. `mu / (2 L^2)`
    /// 3. `(sigma / 2L) sqrt(n/(n-1)) (sqrt(2)/sqrt(1+sigma^2) - 1)`
    /// 4. `(n/mu) (8 / (sqrt(1+sigma^2) - sqrt(2))^2 - 1)`
    /// 5. `(sqrt(n^2 + 2 mu^4 (1-sigma^2) / ((n-1) L^4 (1+sigma^2))) - n) / (2 mu)`
    ///
    /// Term 5 is evaluated as `eps / (2 mu (sqrt(n^2 + eps) + n))`, the same
    /// quantity without the cancellation between `sqrt(n^2 + eps)` and `n`.
    pub fn step_size_terms(&self) -> Result<[f64; 5]> {
        self.validate()?;
        let (mu, l, s, n) = (self.mu, self.l, self.sigma, self.nf());
        let s2 = s * s;
        let t1 = 1.0;
        let t2 = mu / (2.0 * l * l);
        let t3 = (s / (2.0 * l))
            * (n / (n - 1.0)).sqrt()
            * (std::f64::consts::SQRT_2 / (1.0 + s2).sqrt() - 1.0);
        let gap = (1.0 + s2).sqrt() - std::f64::consts::SQRT_2;
        let t4 = (n / mu) * (8.0 / (gap * gap) - 1.0);
        let eps = 2.0 * mu.powi(4) * (1.0 - s2) / ((n - 1.0) * l.powi(4) * (1.0 + s2));
        let t5 = eps / (2.0 * mu * ((n * n + eps).sqrt() + n));
        Ok([t1, t2, t3, t4, t5])
    }

    /// Supremum of admissible step sizes (the minimum of the five terms).
    pub fn alpha_max(&self) -> Result<f64> {
        Ok(self
            .step_size_terms()?
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min))
    }

    /// The fifth ceiling term derived as the positive root of
    /// `c mu alpha^2 + n c alpha - 1 = 0`, where
    /// `c = (2(n-1)/mu^3) ((1+sigma^2)/(1-sigma^2)) L^4`.
    ///
    /// Agrees with the fifth entry of [`BoundInputs::step_size_terms`].
    pub fn quadratic_root_alpha_bound(&self) -> Result<f64> {
        self.validate()?;
        let (mu, l, s, n) = (self.mu, self.l, self.sigma, self.nf());
        let s2 = s * s;
        let c = (2.0 * (n - 1.0) / mu.powi(3)) * ((1.0 + s2) / (1.0 - s2)) * l.powi(4);
        // (-n + sqrt(n^2 + 4mu/c)) / (2mu), rationalised
        let d = 4.0 * mu / c;
        Ok(d / (2.0 * mu * ((n * n + d).sqrt() + n)))
    }

    fn check_alpha(&self, alpha: f64) -> Result<()> {
        let alpha_max = self.alpha_max()?;
        if !(alpha > 0.0 && alpha < alpha_max) {
            return Err(Error::InadmissibleStepSize { alpha, alpha_max });
        }
        Ok(())
    }

    /// `q(alpha) = lambda1`, the spectral radius of `Z`, with the other
    /// eigenvalue and the discriminant of the characteristic polynomial.
    pub fn rate_bound(&self, alpha: f64) -> Result<RateBound> {
        self.check_alpha(alpha)?;
        Ok(self.rate_unchecked(alpha))
    }

    pub(crate) fn rate_unchecked(&self, alpha: f64) -> RateBound {
        let (mu, l, s, n) = (self.mu, self.l, self.sigma, self.nf());
        let s2 = s * s;
        let gamma = 1.0 / (1.0 + mu * alpha / n);
        let beta = 0.5 * (1.0 / s2 - 1.0);
        let shifted = s + alpha * ((n - 1.0) / n).sqrt() * l;
        let p = (1.0 + s2) / (2.0 * s2) * shifted * shifted;
        let d = (gamma - p).powi(2)
            + 8.0
                * ((n - 1.0) / (n + mu * alpha))
                * (alpha.powi(3) / mu)
                * ((1.0 + s2) / (1.0 - s2))
                * l.powi(4);
        let root = d.sqrt();
        let lambda1 = 0.5 * (gamma + p + root);
        let lambda2 = 0.5 * (gamma + p - root);
        RateBound {
            q: lambda1,
            lambda1,
            lambda2,
            d,
            gamma,
            beta,
        }
    }

    /// The comparison matrix `Z` bounding one step of `z(t)`.
    pub fn z_matrix(&self, alpha: f64) -> Result<Matrix2<f64>> {
        self.check_alpha(alpha)?;
        Ok(self.z_unchecked(alpha))
    }

    /// `Z` without the admissibility check. The domination `z(t+1) <= Z z(t)`
    /// itself only needs `sigma` in `(0, 1)` and `alpha <= mu / L^2`.
    pub(crate) fn z_unchecked(&self, alpha: f64) -> Matrix2<f64> {
        let (mu, l, s, n) = (self.mu, self.l, self.sigma, self.nf());
        let beta = 0.5 * (1.0 / (s * s) - 1.0);
        let gamma = 1.0 / (1.0 + mu * alpha / n);
        let shifted = s + alpha * ((n - 1.0) / n).sqrt() * l;
        Matrix2::new(
            gamma,
            gamma * 2.0 * l * l * alpha / mu,
            ((1.0 + beta) / beta) * ((n - 1.0) / n) * alpha * alpha * l * l,
            (1.0 + beta) * shifted * shifted,
        )
    }

    /// Quantities of the argument that `q(alpha) < 1`, for auditing.
    pub fn contraction_chain(&self, alpha: f64) -> Result<ContractionChain> {
        self.check_alpha(alpha)?;
        let (mu, l, s, n) = (self.mu, self.l, self.sigma, self.nf());
        let rate = self.rate_unchecked(alpha);
        let beta = rate.beta;
        let shifted = s + alpha * ((n - 1.0) / n).sqrt() * l;
        let ceiling_root = s * (1.0 + beta).sqrt() + 1.0;
        let coupling = rate.gamma
            * (2.0 * alpha.powi(3) / mu)
            * ((1.0 + beta) / beta)
            * ((n - 1.0) / n)
            * l.powi(4);
        Ok(ContractionChain {
            disagreement_factor: (1.0 + beta) * shifted * shifted,
            disagreement_ceiling: 0.25 * ceiling_root * ceiling_root,
            gamma: rate.gamma,
            lambda1: rate.lambda1,
            lambda1_ceiling: rate.gamma + coupling.sqrt(),
        })
    }

    /// `q(alpha)` on `points` evenly spaced step sizes strictly inside
    /// `(0, alpha_max)`. A coarse search aid; it carries no optimality claim.
    pub fn rate_grid(&self, points: usize) -> Result<Vec<(f64, f64)>> {
        let alpha_max = self.alpha_max()?;
        Ok((1..=points)
            .map(|k| {
                let alpha = alpha_max * k as f64 / (points + 1) as f64;
                (alpha, self.rate_unchecked(alpha).q)
            })
            .collect())
    }
}

/// A step size together with every quantity of its convergence certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSizePlan {
    pub mu: f64,
    pub l: f64,
    pub sigma: f64,
    pub n: usize,
    pub terms: [f64; 5],
    pub alpha_max: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub theta: f64,
    pub d: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub q: f64,
}

impl StepSizePlan {
    /// Builds the plan. Without an explicit `alpha` the step size is
    /// `DEFAULT_ALPHA_FRACTION * alpha_max`.
    pub fn new(inputs: BoundInputs, alpha: Option<f64>) -> Result<Self> {
        let terms = inputs.step_size_terms()?;
        let alpha_max = terms.iter().copied().fold(f64::INFINITY, f64::min);
        let alpha = alpha.unwrap_or(DEFAULT_ALPHA_FRACTION * alpha_max);
        let rate = inputs.rate_bound(alpha)?;
        Ok(Self {
            mu: inputs.mu,
            l: inputs.l,
            sigma: inputs.sigma,
            n: inputs.n,
            terms,
            alpha_max,
            alpha,
            beta: rate.beta,
            gamma: rate.gamma,
            theta: inputs.mu,
            d: rate.d,
            lambda1: rate.lambda1,
            lambda2: rate.lambda2,
            q: rate.q,
        })
    }

    pub fn inputs(&self) -> BoundInputs {
        BoundInputs::new(self.mu, self.l, self.sigma, self.n)
    }

    pub fn binding_term(&self) -> usize {
        self.terms
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i + 1)
            .unwrap_or(1)
    }

    /// `key: value` lines, full precision.
    pub fn to_report(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k}: {v}\n"));
        line("mu", fmt(self.mu));
        line("L", fmt(self.l));
        line("sigma", fmt(self.sigma));
        line("n", self.n.to_string());
        for (i, t) in self.terms.iter().enumerate() {
            line(&format!("term{}", i + 1), fmt(*t));
        }
        line("binding_term", self.binding_term().to_string());
        line("alpha_max", fmt(self.alpha_max));
        line("alpha", fmt(self.alpha));
        line("beta", fmt(self.beta));
        line("gamma", fmt(self.gamma));
        line("theta", fmt(self.theta));
        line("D", fmt(self.d));
        line("lambda1", fmt(self.lambda1));
        line("lambda2", fmt(self.lambda2));
        line("q", fmt(self.q));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serialises")
    }
}

/// Asymptotic contraction gaps (`1 - rate`) of gradient play and GRANE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateComparison {
    pub mu: f64,
    pub l: f64,
    pub n: usize,
    /// `mu^6 / (L^6 n^6)`.
    pub grane_gap: f64,
    /// `mu^4 / (L^4 n^2 (n-1))`.
    pub play_gap: f64,
    /// `mu^3 (1 - sigma^2) / (2 n (n-1) L^4 (1 + sigma^2))`, when sigma is known.
    pub alpha_asymptotic: Option<f64>,
    pub kappa: f64,
    pub play_faster: bool,
    /// False for `n < ASYMPTOTIC_MIN_N`, where the order-of-magnitude gaps are
    /// not expected to be meaningful.
    pub asymptotic_regime: bool,
}

impl RateComparison {
    pub fn ratio(&self) -> f64 {
        self.play_gap / self.grane_gap
    }

    pub fn to_report(&self) -> String {
        let mut out = String::from("# asymptotic comparison: gaps are order-of-magnitude expressions\n");
        let mut line = |k: &str, v: String| out.push_str(&format!("{k}: {v}\n"));
        line("mu", fmt(self.mu));
        line("L", fmt(self.l));
        line("n", self.n.to_string());
        line("kappa", fmt(self.kappa));
        line("grane_gap", fmt(self.grane_gap));
        line("play_gap", fmt(self.play_gap));
        line("ratio", fmt(self.ratio()));
        if let Some(a) = self.alpha_asymptotic {
            line("alpha_asymptotic", fmt(a));
        }
        line("play_faster", self.play_faster.to_string());
        line("asymptotic_regime", self.asymptotic_regime.to_string());
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison serialises")
    }
}

/// Compares the contraction gap of gradient play against the published
/// GRANE rate for the same constants.
pub fn grane_rate_comparison(mu: f64, l: f64, n: usize, sigma: Option<f64>) -> Result<RateComparison> {
    if !(mu > 0.0 && mu.is_finite() && l > 0.0 && l.is_finite()) {
        return Err(Error::input("mu and L must be positive and finite"));
    }
    if n < 2 {
        return Err(Error::input(format!("n must be at least 2, got {n}")));
    }
    let nf = n as f64;
    let kappa = l * nf.sqrt() / mu;
    // L sqrt(n) / mu >= 1 holds for every game; allow for rounding at equality
    if kappa < 1.0 - 1e-12 {
        return Err(Error::ConditionNumber { kappa });
    }
    let ratio = mu / l;
    let grane_gap = (ratio / nf).powi(6);
    let play_gap = ratio.powi(4) / (nf * nf * (nf - 1.0));
    let alpha_asymptotic = match sigma {
        Some(s) if (0.0..1.0).contains(&s) => {
            let s2 = s * s;
            Some(mu.powi(3) * (1.0 - s2) / (2.0 * nf * (nf - 1.0) * l.powi(4) * (1.0 + s2)))
        }
        Some(s) => return Err(Error::input(format!("sigma must lie in [0, 1), got {s}"))),
        None => None,
    };
    Ok(RateComparison {
        mu,
        l,
        n,
        grane_gap,
        play_gap,
        alpha_asymptotic,
        kappa,
        play_faster: play_gap > grane_gap,
        asymptotic_regime: n >= ASYMPTOTIC_MIN_N,
    })
}

/// The GRANE condition factor `gamma_r` for large `n`, informational only:
/// `2n [L/mu + (L/mu)(1 + n^2 L^2 / mu^2) smax / lmin]`, where `smax` is the
/// largest singular value of `I - W` and `lmin` its smallest nonzero eigenvalue.
pub fn grane_condition_factor(mu: f64, l: f64, n: usize, smax: f64, lmin: f64) -> f64 {
    let nf = n as f64;
    let k = l / mu;
    2.0 * nf * (k + k * (1.0 + nf * nf * k * k) * smax / lmin)
}

fn fmt(x: f64) -> String {
    crate::linalg::fmt_f64(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Frozen from 50-digit evaluations of the closed forms.
    const UNIT: BoundInputs = BoundInputs {
        mu: 1.0,
        l: 1.0,
        sigma: 0.5,
        n: 2,
    };

    #[test]
    fn unit_terms() {
        let t = UNIT.step_size_terms().unwrap();
        assert_eq!(t[0], 1.0);
        assert_eq!(t[1], 0.5);
        assert_relative_eq!(t[2], 0.093660204906684177081, max_relative = 1e-14);
        assert_relative_eq!(t[3], 180.39367566701167878, max_relative = 1e-14);
        assert_relative_eq!(t[4], 0.14017542509913797914, max_relative = 1e-14);
        assert_relative_eq!(UNIT.alpha_max().unwrap(), t[2]);
    }

    #[test]
    fn second_term_scales_with_inverse_square_of_l() {
        let a = BoundInputs::new(0.7, 1.3, 0.6, 5).step_size_terms().unwrap()[1];
        let b = BoundInputs::new(0.7, 2.6, 0.6, 5).step_size_terms().unwrap()[1];
        assert_eq!(a / 4.0, b);
    }

    #[test]
    fn quadratic_root_by_hand() {
        // c = 2 * (1.25 / 0.75) = 10/3, root = (-2 + sqrt(4 + 1.2)) / 2
        let naive = (-2.0 + (4.0f64 + 4.0 / (10.0 / 3.0)).sqrt()) / 2.0;
        let v = UNIT.quadratic_root_alpha_bound().unwrap();
        assert_relative_eq!(v, naive, max_relative = 1e-13);
        assert_relative_eq!(v, UNIT.step_size_terms().unwrap()[4], max_relative = 1e-14);
    }

    #[test]
    fn quadratic_root_grows_as_sigma_shrinks() {
        let mut prev = 0.0;
        for s in [0.95, 0.8, 0.6, 0.4, 0.2] {
            let v = BoundInputs::new(0.5, 1.5, s, 6).quadratic_root_alpha_bound().unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn degenerate_sigma() {
        assert!(matches!(
            BoundInputs::new(1.0, 1.0, 0.0, 3).step_size_terms(),
            Err(Error::DegenerateMixing)
        ));
        assert!(matches!(
            BoundInputs::new(1.0, 1.0, 1.0, 3).step_size_terms(),
            Err(Error::NoContraction { .. })
        ));
        assert!(BoundInputs::new(1.0, 1.0, 1.0, 3).quadratic_root_alpha_bound().is_err());
        assert!(BoundInputs::new(0.0, 1.0, 0.5, 3).step_size_terms().is_err());
        assert!(BoundInputs::new(1.0, 1.0, 0.5, 1).step_size_terms().is_err());
    }

    #[test]
    fn unit_rate_at_half_ceiling() {
        let alpha = 0.04683010245334208854070628;
        let r = UNIT.rate_bound(alpha).unwrap();
        assert_relative_eq!(r.gamma, 0.97712066946972723139, max_relative = 1e-14);
        assert_relative_eq!(r.beta, 1.5, max_relative = 1e-15);
        assert_relative_eq!(r.d, 0.071741710921632706941, max_relative = 1e-12);
        assert_relative_eq!(r.lambda1, 0.97774656585598370579, max_relative = 1e-14);
        assert_relative_eq!(r.lambda2, 0.70990013425452908798, max_relative = 1e-13);
        assert!(r.q < 1.0);
    }

    #[test]
    fn rate_tends_to_one_as_alpha_vanishes() {
        let r = UNIT.rate_unchecked(1e-12);
        assert_relative_eq!(r.q, 1.0, epsilon = 1e-10);
        let limit_d = ((1.0 - 0.25) / 2.0f64).powi(2);
        assert_relative_eq!(r.d, limit_d, epsilon = 1e-10);
    }

    #[test]
    fn inadmissible_alpha() {
        let amax = UNIT.alpha_max().unwrap();
        for a in [0.0, -0.1, amax, 2.0 * amax, f64::NAN] {
            assert!(matches!(UNIT.rate_bound(a), Err(Error::InadmissibleStepSize { .. })));
            assert!(UNIT.z_matrix(a).is_err());
        }
    }

    #[test]
    fn z_trace_and_determinant() {
        let inputs = BoundInputs::new(0.7, 2.3, 0.83, 7);
        let alpha = 0.5 * inputs.alpha_max().unwrap();
        let z = inputs.z_matrix(alpha).unwrap();
        let r = inputs.rate_bound(alpha).unwrap();
        assert!(z.iter().all(|&v| v > 0.0));
        assert_relative_eq!(z.trace(), r.lambda1 + r.lambda2, epsilon = 1e-12);
        assert_relative_eq!(z.determinant(), r.lambda1 * r.lambda2, epsilon = 1e-12);
        assert_relative_eq!(r.lambda1, 0.99999865610313167287, max_relative = 1e-14);
        assert_relative_eq!(r.lambda2, 0.84450823125234904073, max_relative = 1e-12);
    }

    #[test]
    fn contraction_chain_holds_inside_ceiling() {
        let inputs = BoundInputs::new(0.35, 1.9, 0.97, 20);
        let amax = inputs.alpha_max().unwrap();
        for f in [1e-6, 0.1, 0.5, 0.9, 0.999] {
            let chain = inputs.contraction_chain(f * amax).unwrap();
            assert!(chain.holds(), "{chain:?}");
        }
    }

    #[test]
    fn plan_defaults_to_fraction_of_ceiling() {
        let plan = StepSizePlan::new(UNIT, None).unwrap();
        assert_eq!(plan.alpha, DEFAULT_ALPHA_FRACTION * plan.alpha_max);
        assert_eq!(plan.binding_term(), 3);
        assert_eq!(plan.theta, plan.mu);
        assert!(plan.q < 1.0 && plan.lambda1 > plan.lambda2.abs());
        let report = plan.to_report();
        assert!(report.contains("alpha_max: 0.0936602049066842"));
        let back: StepSizePlan = serde_json::from_str(&plan.to_json()).unwrap();
        assert_eq!(back, plan);
        assert!(StepSizePlan::new(UNIT, Some(1.0)).is_err());
    }

    #[test]
    fn rate_grid_stays_below_one() {
        let grid = UNIT.rate_grid(50).unwrap();
        assert_eq!(grid.len(), 50);
        assert!(grid.iter().all(|&(a, q)| a > 0.0 && q < 1.0));
    }

    #[test]
    fn comparison_unit_constants() {
        let c = grane_rate_comparison(1.0, 1.0, 20, None).unwrap();
        assert_relative_eq!(c.grane_gap, 1.5625e-8, max_relative = 1e-14);
        assert_relative_eq!(c.play_gap, 1.0 / 7600.0, max_relative = 1e-14);
        assert!((c.play_gap - 1.3158e-4).abs() < 5e-9);
        assert!(c.play_faster);
        assert!(c.asymptotic_regime);
        assert!(c.alpha_asymptotic.is_none());
        assert!(c.to_report().contains("play_faster: true"));
    }

    #[test]
    fn comparison_rejects_inconsistent_condition_number() {
        assert!(matches!(
            grane_rate_comparison(10.0, 1.0, 4, None),
            Err(Error::ConditionNumber { .. })
        ));
        // kappa == 1 exactly
        let c = grane_rate_comparison(2.0, 1.0, 4, Some(0.5)).unwrap();
        assert_relative_eq!(c.ratio(), 64.0 / 3.0, max_relative = 1e-12);
        assert!(c.play_faster);
        assert!(!c.asymptotic_regime);
        assert!(c.alpha_asymptotic.unwrap() > 0.0);
    }

    #[test]
    fn grane_condition_factor_by_hand() {
        // 2n [k + k (1 + n^2 k^2) smax / lmin] with n = 2, k = 2, smax = 1, lmin = 0.5
        let v = grane_condition_factor(1.0, 2.0, 2, 1.0, 0.5);
        assert_relative_eq!(v, 4.0 * (2.0 + 2.0 * 17.0 * 2.0));
    }
}
