//! Initialization distributions: seeded sampling plus maximum-likelihood
//! fitting for beta, uniform, and normal families.
//!
//! The beta fit solves the log-likelihood stationarity conditions
//! `ψ(α) − ψ(α+β) = mean(ln xᵢ)` and `ψ(β) − ψ(α+β) = mean(ln(1−xᵢ))`
//! by Newton iteration seeded with the method-of-moments estimate.

use rand::Rng;
use rand_distr::Distribution as _;

use crate::error::Error;
use crate::rng::seeded_rng;
use crate::Result;

/// Shape parameters of a beta distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta shape parameters must be finite and positive, got ({alpha}, {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }
}

/// A parameterized initialization distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec {
    /// Support (0, 1).
    Beta { alpha: f64, beta: f64 },
    /// Half-open support [lo, hi).
    Uniform { lo: f64, hi: f64 },
    /// Parameterized by mean and **variance**.
    Normal { mean: f64, variance: f64 },
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DistributionSpec::Beta { alpha, beta } => {
                BetaParams::new(alpha, beta)?;
            }
            DistributionSpec::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::InvalidParameter(format!(
                        "uniform bounds must satisfy lo < hi, got ({lo}, {hi})"
                    )));
                }
            }
            DistributionSpec::Normal { mean, variance } => {
                if !(mean.is_finite() && variance.is_finite() && variance > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "normal variance must be positive, got N({mean}, {variance})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `n` i.i.d. draws, deterministic per seed.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::EmptyInput("sample count"));
        }
        self.validate()?;
        let mut rng = seeded_rng(seed);
        let draws = match *self {
            DistributionSpec::Beta { alpha, beta } => {
                let dist = rand_distr::Beta::new(alpha, beta)
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?;
                (0..n).map(|_| dist.sample(&mut rng)).collect()
            }
            DistributionSpec::Uniform { lo, hi } => {
                (0..n).map(|_| rng.gen_range(lo..hi)).collect()
            }
            DistributionSpec::Normal { mean, variance } => {
                let dist = rand_distr::Normal::new(mean, variance.sqrt())
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?;
                (0..n).map(|_| dist.sample(&mut rng)).collect()
            }
        };
        Ok(draws)
    }
}

/// Digamma ψ(x) = Γ'(x)/Γ(x) for x > 0.
///
/// Shifts with the recurrence ψ(x) = ψ(x+1) − 1/x until x ≥ 6, then applies
/// the asymptotic series; accurate to better than 1e-10 on the positive axis.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "digamma requires x > 0, got {x}"
        )));
    }
    let mut shift = 0.0;
    let mut y = x;
    while y < 6.0 {
        shift -= 1.0 / y;
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    // ln y − 1/(2y) − Σ B₂ₙ/(2n·y²ⁿ), truncated after the y⁻¹² term.
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    Ok(shift + y.ln() - 0.5 * inv - series)
}

/// Trigamma ψ'(x); same recurrence-plus-asymptotics scheme as [`digamma`].
/// Used for the Newton steps of the beta fit.
fn trigamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut shift = 0.0;
    let mut y = x;
    while y < 6.0 {
        shift += 1.0 / (y * y);
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let series = inv
        * (1.0
            + inv * (0.5
                + inv * (1.0 / 6.0
                    - inv2
                        * (1.0 / 30.0
                            - inv2
                                * (1.0 / 42.0
                                    - inv2 * (1.0 / 30.0 - inv2 * (5.0 / 66.0)))))));
    shift + series
}

/// Result of the beta maximum-likelihood fit. `converged == false` flags the
/// method-of-moments fallback after Newton failed to reach tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaMleFit {
    pub params: BetaParams,
    pub converged: bool,
    pub iterations: usize,
}

const BETA_MLE_TOLERANCE: f64 = 1e-10;
const BETA_MLE_MAX_ITERATIONS: usize = 200;

/// Method-of-moments seed for the Newton iteration:
/// `α₀ = m̄·(m̄(1−m̄)/v − 1)`, `β₀ = (1−m̄)·(m̄(1−m̄)/v − 1)`.
fn method_of_moments(data: &[f64]) -> Result<BetaParams> {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let variance = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let common = mean * (1.0 - mean) / variance - 1.0;
    BetaParams::new(mean * common, (1.0 - mean) * common)
}

fn reject_constant(data: &[f64], what: &str) -> Result<()> {
    let first = data[0];
    if data.iter().all(|&x| x == first) {
        return Err(Error::DegenerateData(format!(
            "{what} fit needs non-constant data"
        )));
    }
    Ok(())
}

/// Fits Beta(α, β) by maximum likelihood on data strictly inside (0, 1).
pub fn fit_beta_mle(data: &[f64]) -> Result<BetaMleFit> {
    if data.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: data.len(),
        });
    }
    for &x in data {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::OutOfDomain {
                value: x,
                lo: 0.0,
                hi: 1.0,
            });
        }
    }
    reject_constant(data, "beta")?;
    let n = data.len() as f64;
    let mean_ln_x = data.iter().map(|x| x.ln()).sum::<f64>() / n;
    let mean_ln_1mx = data.iter().map(|x| (1.0 - x).ln()).sum::<f64>() / n;

    let start = method_of_moments(data)?;
    let mut alpha = start.alpha;
    let mut beta = start.beta;

    for iteration in 1..=BETA_MLE_MAX_ITERATIONS {
        let psi_ab = digamma(alpha + beta)?;
        let g1 = digamma(alpha)? - psi_ab - mean_ln_x;
        let g2 = digamma(beta)? - psi_ab - mean_ln_1mx;
        if g1.abs() < BETA_MLE_TOLERANCE && g2.abs() < BETA_MLE_TOLERANCE {
            return Ok(BetaMleFit {
                params: BetaParams::new(alpha, beta)?,
                converged: true,
                iterations: iteration - 1,
            });
        }

        // Jacobian of (g1, g2) in (α, β).
        let t_ab = trigamma(alpha + beta);
        let j11 = trigamma(alpha) - t_ab;
        let j22 = trigamma(beta) - t_ab;
        let j12 = -t_ab;
        let det = j11 * j22 - j12 * j12;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let mut step_a = -(j22 * g1 - j12 * g2) / det;
        let mut step_b = -(j11 * g2 - j12 * g1) / det;

        // Halve any step that would leave the positive orthant.
        let mut halvings = 0;
        while (alpha + step_a <= 0.0 || beta + step_b <= 0.0) && halvings < 60 {
            step_a *= 0.5;
            step_b *= 0.5;
            halvings += 1;
        }
        if halvings == 60 {
            break;
        }
        alpha += step_a;
        beta += step_b;
    }

    // Newton did not reach tolerance; report the moment estimate instead.
    Ok(BetaMleFit {
        params: start,
        converged: false,
        iterations: BETA_MLE_MAX_ITERATIONS,
    })
}

/// Uniform MLE: the sample extremes.
pub fn fit_uniform(data: &[f64]) -> Result<DistributionSpec> {
    if data.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: data.len(),
        });
    }
    let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Err(Error::DegenerateData(
            "uniform fit needs non-constant data".into(),
        ));
    }
    Ok(DistributionSpec::Uniform { lo, hi })
}

/// Normal MLE: sample mean and biased (divisor n) variance.
pub fn fit_normal(data: &[f64]) -> Result<DistributionSpec> {
    if data.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: data.len(),
        });
    }
    reject_constant(data, "normal")?;
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let variance = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Ok(DistributionSpec::Normal { mean, variance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    // Closed forms evaluated with the published Euler–Mascheroni constant;
    // independent of the recurrence/asymptotic implementation above.
    const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

    #[test]
    fn digamma_at_one_is_minus_euler_mascheroni() {
        assert!((digamma(1.0).unwrap() + EULER_MASCHERONI).abs() < 1e-10);
    }

    #[test]
    fn digamma_at_two() {
        assert!((digamma(2.0).unwrap() - (1.0 - EULER_MASCHERONI)).abs() < 1e-10);
    }

    #[test]
    fn digamma_at_half() {
        let reference = -EULER_MASCHERONI - 2.0 * 2.0_f64.ln();
        assert!((digamma(0.5).unwrap() - reference).abs() < 1e-10);
        assert!((reference + 1.963_510_026_0).abs() < 1e-9);
    }

    #[test]
    fn digamma_recurrence_holds() {
        for &x in &[0.1, 1.0, 5.0, 50.0] {
            let lhs = digamma(x + 1.0).unwrap() - digamma(x).unwrap();
            assert!((lhs - 1.0 / x).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn digamma_rejects_nonpositive_input() {
        assert!(digamma(0.0).is_err());
        assert!(digamma(-1.0).is_err());
    }

    #[test]
    fn trigamma_recurrence_holds() {
        // ψ'(x) − ψ'(x+1) = 1/x²
        for &x in &[0.2, 1.0, 3.5, 40.0] {
            let lhs = trigamma(x) - trigamma(x + 1.0);
            assert!((lhs - 1.0 / (x * x)).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn beta_one_one_sampling_matches_uniform_mean() {
        let dist = DistributionSpec::Beta {
            alpha: 1.0,
            beta: 1.0,
        };
        let draws = dist.sample(10_000, 11).unwrap();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - 0.5).abs() < 0.02);
        assert!(draws.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn uniform_sampling_respects_support() {
        let dist = DistributionSpec::Uniform { lo: 0.0, hi: TAU };
        let draws = dist.sample(10_000, 5).unwrap();
        assert!(draws.iter().all(|&x| (0.0..TAU).contains(&x)));
    }

    #[test]
    fn normal_sampling_matches_declared_variance() {
        let dist = DistributionSpec::Normal {
            mean: 0.0,
            variance: TAU,
        };
        let draws = dist.sample(100_000, 9).unwrap();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / draws.len() as f64;
        assert!((var - TAU).abs() / TAU < 0.05);
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let dist = DistributionSpec::Beta {
            alpha: 2.0,
            beta: 5.0,
        };
        assert_eq!(dist.sample(64, 123).unwrap(), dist.sample(64, 123).unwrap());
        assert_ne!(dist.sample(64, 123).unwrap(), dist.sample(64, 124).unwrap());
    }

    #[test]
    fn sampling_rejects_invalid_params() {
        assert!(DistributionSpec::Beta {
            alpha: 0.0,
            beta: 1.0
        }
        .sample(4, 1)
        .is_err());
        assert!(DistributionSpec::Uniform { lo: 1.0, hi: 1.0 }.sample(4, 1).is_err());
        assert!(DistributionSpec::Normal {
            mean: 0.0,
            variance: 0.0
        }
        .sample(4, 1)
        .is_err());
    }

    #[test]
    fn beta_mle_recovers_generating_parameters() {
        let dist = DistributionSpec::Beta {
            alpha: 2.0,
            beta: 5.0,
        };
        let draws = dist.sample(100_000, 42).unwrap();
        let fit = fit_beta_mle(&draws).unwrap();
        assert!(fit.converged);
        assert!((fit.params.alpha - 2.0).abs() / 2.0 < 0.05, "{:?}", fit);
        assert!((fit.params.beta - 5.0).abs() / 5.0 < 0.05, "{:?}", fit);
    }

    #[test]
    fn beta_mle_on_uniform_data_is_near_one_one() {
        let dist = DistributionSpec::Uniform { lo: 0.0, hi: 1.0 };
        let draws = dist.sample(100_000, 7).unwrap();
        let fit = fit_beta_mle(&draws).unwrap();
        assert!((fit.params.alpha - 1.0).abs() < 0.05, "{:?}", fit);
        assert!((fit.params.beta - 1.0).abs() < 0.05, "{:?}", fit);
    }

    #[test]
    fn beta_mle_residuals_satisfy_stationarity() {
        let dist = DistributionSpec::Beta {
            alpha: 0.7,
            beta: 3.3,
        };
        let draws = dist.sample(20_000, 17).unwrap();
        let fit = fit_beta_mle(&draws).unwrap();
        let n = draws.len() as f64;
        let mean_ln_x = draws.iter().map(|x| x.ln()).sum::<f64>() / n;
        let mean_ln_1mx = draws.iter().map(|x| (1.0 - x).ln()).sum::<f64>() / n;
        let psi_ab = digamma(fit.params.alpha + fit.params.beta).unwrap();
        let r1 = digamma(fit.params.alpha).unwrap() - psi_ab - mean_ln_x;
        let r2 = digamma(fit.params.beta).unwrap() - psi_ab - mean_ln_1mx;
        assert!(r1.abs() < 1e-8 && r2.abs() < 1e-8, "residuals ({r1}, {r2})");
    }

    #[test]
    fn beta_mle_rejects_boundary_values() {
        assert!(matches!(
            fit_beta_mle(&[0.0, 0.5, 0.9]),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            fit_beta_mle(&[0.2, 1.0]),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn beta_mle_rejects_constant_data() {
        assert!(matches!(
            fit_beta_mle(&[0.4, 0.4, 0.4]),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn uniform_fit_is_min_max() {
        let fitted = fit_uniform(&[0.2, 0.5, 0.9]).unwrap();
        assert_eq!(fitted, DistributionSpec::Uniform { lo: 0.2, hi: 0.9 });
        assert!(fit_uniform(&[0.4, 0.4]).is_err());
    }

    #[test]
    fn normal_fit_uses_biased_variance() {
        let fitted = fit_normal(&[0.0, 1.0]).unwrap();
        assert_eq!(
            fitted,
            DistributionSpec::Normal {
                mean: 0.5,
                variance: 0.25
            }
        );
        assert!(fit_normal(&[2.0, 2.0, 2.0]).is_err());
    }

    #[test]
    fn normal_fit_is_translation_equivariant() {
        let base = [0.3, 0.9, 0.1, 0.7];
        let shifted: Vec<f64> = base.iter().map(|x| x + 2.5).collect();
        let (DistributionSpec::Normal { mean: m0, variance: v0 },
             DistributionSpec::Normal { mean: m1, variance: v1 }) =
            (fit_normal(&base).unwrap(), fit_normal(&shifted).unwrap())
        else {
            panic!("expected normal fits");
        };
        assert!((m1 - m0 - 2.5).abs() < 1e-12);
        assert!((v1 - v0).abs() < 1e-12);
    }
}
