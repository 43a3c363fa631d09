//! Monte Carlo validation of the tail approximation.
//!
//! One engine drives both estimators so they differ only in the proposal:
//!
//! * crude: sample `xi ~ N(0, C)`, count `{G(sigma xi) > b}`; every
//!   log-weight is exactly `0.0`, so the generic weighted reduction
//!   degenerates bit-for-bit to hit counting.
//! * importance: shift the proposal mean to `C xi*` (the optimizer's change
//!   of measure) and weight hits by `dP/dQ`.
//!
//! Determinism: worker `k` draws from `ChaCha12` seeded with the run seed on
//! stream `k`, samples are split into contiguous index chunks, and the
//! reduction folds the per-worker outputs in worker order on one thread. A
//! fixed `(seed, n, workers)` triple therefore reproduces results exactly,
//! independent of scheduling.
//!
//! Weighted sums are accumulated after subtracting the max log-weight, so
//! deep-tail runs whose raw weights under- or overflow still reduce stably.

use std::thread;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::functional::{eval_g, Problem};
use crate::optimizer::AsymptoticParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McMethod {
    Crude,
    Importance,
}

#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    /// Total number of samples.
    pub n: usize,
    pub seed: u64,
    /// Worker threads; each owns one RNG stream and one contiguous chunk.
    pub workers: usize,
}

/// Per-sample trace, in sample-index order.
#[derive(Debug, Clone, Copy)]
pub struct SampleRecord {
    pub index: usize,
    /// `G(sigma xi)` for this draw.
    pub g_value: f64,
    pub hit: bool,
    /// `ln dP/dQ`; exactly `0.0` for the crude estimator.
    pub log_weight: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub method: McMethod,
    pub mean: f64,
    pub std_error: f64,
    pub hits: usize,
    pub n: usize,
    /// Effective sample size `(sum w)^2 / sum w^2` over all draws.
    pub ess: f64,
    /// Spread `max - min` of hit log-weights (0 with fewer than two hits).
    pub log_weight_spread: f64,
    /// Set when `ess < 0.01 n`: the proposal barely overlaps the target.
    pub ess_warning: bool,
}

#[derive(Debug, Clone)]
pub struct McRun {
    pub estimate: McEstimate,
    pub samples: Vec<SampleRecord>,
}

/// Crude estimator of `P{G(sigma xi) > b}`.
pub fn crude_mc(problem: &Problem, params: &AsymptoticParams, config: &McConfig) -> Result<McRun> {
    engine(problem, params, None, config)
}

/// Importance-sampling estimator with the proposal mean shifted to `C xi*`.
pub fn importance_sampling(
    problem: &Problem,
    params: &AsymptoticParams,
    xi_star: &ScalarField,
    config: &McConfig,
) -> Result<McRun> {
    engine(problem, params, Some(xi_star), config)
}

/// Natural log of the Radon-Nikodym derivative `dP/dQ` at the field `x`,
/// where `Q` shifts the mean of `P = N(0, C)` to `C xi*`:
///
/// ```text
/// ln dP/dQ (x) = -<xi*, x> + K(xi*)/2
/// ```
///
/// with the quadrature pairing `<.,.>` and energy `K` shared with the
/// optimizer, so no covariance inverse is ever formed.
pub fn likelihood_ratio(problem: &Problem, xi_star: &ScalarField, x: &ScalarField) -> Result<f64> {
    let grid = problem.grid();
    let pairing = grid.inner_product(xi_star, x)?;
    let energy = problem.covariance().k_energy(grid, xi_star)?;
    Ok(-pairing + 0.5 * energy)
}

fn engine(
    problem: &Problem,
    params: &AsymptoticParams,
    xi_star: Option<&ScalarField>,
    config: &McConfig,
) -> Result<McRun> {
    if config.n == 0 {
        return Err(Error::InvalidParameter {
            name: "mc.n".into(),
            message: "sample count must be positive".into(),
        });
    }
    if config.workers == 0 {
        return Err(Error::InvalidParameter {
            name: "mc.workers".into(),
            message: "worker count must be positive".into(),
        });
    }
    let method = if xi_star.is_some() {
        McMethod::Importance
    } else {
        McMethod::Crude
    };
    let shift = match xi_star {
        Some(xi) => {
            problem.grid().check_binding(xi)?;
            Some(problem.covariance().apply_c(problem.grid(), xi)?)
        }
        None => None,
    };

    let workers = config.workers;
    let base = config.n / workers;
    let remainder = config.n % workers;
    let mut chunks = Vec::with_capacity(workers);
    let mut start = 0;
    for k in 0..workers {
        let len = base + usize::from(k < remainder);
        chunks.push((k, start, len));
        start += len;
    }

    let worker_outputs: Vec<Result<Vec<SampleRecord>>> = thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|&(k, start, len)| {
                let shift = shift.as_ref();
                scope.spawn(move || {
                    worker_chunk(problem, params, xi_star, shift, config.seed, k, start, len)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("monte carlo worker panicked"))
            .collect()
    });

    let mut samples = Vec::with_capacity(config.n);
    for output in worker_outputs {
        samples.extend(output?);
    }
    let estimate = reduce(method, &samples, config.n);
    if !estimate.mean.is_finite() || !estimate.std_error.is_finite() {
        return Err(Error::NonFinite {
            context: "monte carlo reduction".into(),
            node: None,
        });
    }
    Ok(McRun { estimate, samples })
}

#[allow(clippy::too_many_arguments)]
fn worker_chunk(
    problem: &Problem,
    params: &AsymptoticParams,
    xi_star: Option<&ScalarField>,
    shift: Option<&ScalarField>,
    seed: u64,
    worker: usize,
    start: usize,
    len: usize,
) -> Result<Vec<SampleRecord>> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(worker as u64);
    let grid = problem.grid();
    let covariance = problem.covariance();
    let mut records = Vec::with_capacity(len);
    for offset in 0..len {
        let noise = covariance.sample(grid, &mut rng)?;
        let x = match shift {
            Some(m) => m.add(&noise)?,
            None => noise,
        };
        let g_value = eval_g(problem, &x.scale(params.sigma))?;
        let log_weight = match xi_star {
            Some(xi) => likelihood_ratio(problem, xi, &x)?,
            None => 0.0,
        };
        records.push(SampleRecord {
            index: start + offset,
            g_value,
            hit: g_value > params.b,
            log_weight,
        });
    }
    Ok(records)
}

/// Single-threaded weighted reduction with max-log-weight shifting.
fn reduce(method: McMethod, samples: &[SampleRecord], n: usize) -> McEstimate {
    let max_lw = samples
        .iter()
        .map(|s| s.log_weight)
        .fold(f64::NEG_INFINITY, f64::max);

    let mut sum_hit = 0.0; // sum of shifted weights over hits
    let mut sum_hit_sq = 0.0; // sum of squared shifted weights over hits
    let mut sum_all = 0.0; // sum of shifted weights over all draws
    let mut sum_all_sq = 0.0;
    let mut hits = 0usize;
    let mut hit_lw_min = f64::INFINITY;
    let mut hit_lw_max = f64::NEG_INFINITY;
    for s in samples {
        let w = (s.log_weight - max_lw).exp();
        sum_all += w;
        sum_all_sq += w * w;
        if s.hit {
            hits += 1;
            sum_hit += w;
            sum_hit_sq += w * w;
            hit_lw_min = hit_lw_min.min(s.log_weight);
            hit_lw_max = hit_lw_max.max(s.log_weight);
        }
    }

    let scale = max_lw.exp();
    let nf = n as f64;
    let mean = scale * sum_hit / nf;
    let second_moment = scale * scale * sum_hit_sq / nf;
    let variance = (second_moment - mean * mean).max(0.0);
    let std_error = (variance / nf).sqrt();
    let ess = if sum_all_sq > 0.0 {
        sum_all * sum_all / sum_all_sq
    } else {
        0.0
    };
    let log_weight_spread = if hits >= 2 {
        hit_lw_max - hit_lw_min
    } else {
        0.0
    };
    McEstimate {
        method,
        mean,
        std_error,
        hits,
        n,
        ess,
        log_weight_spread,
        ess_warning: ess < 0.01 * nf,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::{CovarianceKernel, CovarianceModel};
    use crate::functional::FunctionalSpec;
    use crate::grid::Grid;
    use crate::optimizer::{solve_kkt, OptimizerOptions};

    fn exp_problem(n: usize, length_scale: f64) -> Problem {
        let grid = Grid::new(&[(0.0, 1.0)], &[n]).unwrap();
        let cov =
            CovarianceModel::assemble(&grid, CovarianceKernel::SquaredExponential { length_scale })
                .unwrap();
        let mu = ScalarField::constant(&grid, 0.0);
        Problem::new(grid, cov, FunctionalSpec::ExpIntegral { mu }, None).unwrap()
    }

    #[test]
    fn same_seed_reproduces_bitwise() {
        let p = exp_problem(17, 0.5);
        let params = AsymptoticParams::new(0.3, 0.5, 1.0, 0.05).unwrap();
        let config = McConfig {
            n: 500,
            seed: 42,
            workers: 3,
        };
        let a = crude_mc(&p, &params, &config).unwrap();
        let b = crude_mc(&p, &params, &config).unwrap();
        assert_eq!(a.estimate.mean.to_bits(), b.estimate.mean.to_bits());
        assert_eq!(
            a.estimate.std_error.to_bits(),
            b.estimate.std_error.to_bits()
        );
        assert_eq!(a.estimate.hits, b.estimate.hits);
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(x.index, y.index);
            assert_eq!(x.g_value.to_bits(), y.g_value.to_bits());
        }
        // a different seed produces a different sample path
        let c = crude_mc(&p, &params, &McConfig { seed: 43, ..config }).unwrap();
        assert!(a.samples[0].g_value != c.samples[0].g_value);
    }

    #[test]
    fn chunking_covers_all_indices_without_overlap() {
        let p = exp_problem(9, 0.5);
        let params = AsymptoticParams::new(0.3, 0.5, 1.0, 0.05).unwrap();
        let config = McConfig {
            n: 103,
            seed: 7,
            workers: 4,
        };
        let run = crude_mc(&p, &params, &config).unwrap();
        assert_eq!(run.samples.len(), 103);
        for (i, s) in run.samples.iter().enumerate() {
            assert_eq!(s.index, i);
            assert_eq!(s.log_weight, 0.0);
        }
    }

    #[test]
    fn crude_matches_near_scalar_gaussian_tail() {
        // near-constant kernel collapses the field to one standard normal s:
        // G(sigma s) = exp(sigma s) - 1 > b iff s > ln(1+b)/sigma; at
        // sigma = 0.5, b = sqrt(0.5) the tail is Phi-bar(1.0696) = 0.1424
        let p = exp_problem(17, 1e6);
        let params = AsymptoticParams::new(0.5, 0.5, 1.0, 0.05).unwrap();
        let config = McConfig {
            n: 20_000,
            seed: 11,
            workers: 2,
        };
        let run = crude_mc(&p, &params, &config).unwrap();
        let expected = 0.1424;
        let tol = 4.0 * (expected * (1.0 - expected) / 20_000f64).sqrt() + 5e-4;
        assert!(
            (run.estimate.mean - expected).abs() <= tol,
            "estimate {} vs {expected}",
            run.estimate.mean
        );
        // crude reduction degenerates to hit counting
        let by_hand = run.estimate.hits as f64 / 20_000.0;
        assert_eq!(run.estimate.mean.to_bits(), by_hand.to_bits());
        let p_hat = run.estimate.mean;
        let se_by_hand = (p_hat * (1.0 - p_hat) / 20_000.0).sqrt();
        assert!((run.estimate.std_error - se_by_hand).abs() <= 1e-15);
        assert_eq!(run.estimate.ess, 20_000.0);
        assert!(!run.estimate.ess_warning);
        assert_eq!(run.estimate.log_weight_spread, 0.0);
    }

    #[test]
    fn likelihood_ratio_at_the_shift_is_minus_half_energy() {
        let p = exp_problem(17, 0.5);
        let params = AsymptoticParams::new(0.2, 0.5, 1.0, 0.05).unwrap();
        let sol = solve_kkt(&p, &params, &OptimizerOptions::default()).unwrap();
        let shift = p.covariance().apply_c(p.grid(), &sol.xi_star).unwrap();
        let lw = likelihood_ratio(&p, &sol.xi_star, &shift).unwrap();
        let energy = p.covariance().k_energy(p.grid(), &sol.xi_star).unwrap();
        assert!(
            (lw + 0.5 * energy).abs() <= 1e-12 * energy.max(1.0),
            "log ratio {lw} vs {}",
            -0.5 * energy
        );
    }

    #[test]
    fn importance_weights_average_to_one() {
        // E_Q[dP/dQ] = 1 over all draws, hit or not
        let p = exp_problem(17, 0.5);
        let params = AsymptoticParams::new(0.3, 0.5, 1.0, 0.05).unwrap();
        let sol = solve_kkt(&p, &params, &OptimizerOptions::default()).unwrap();
        let config = McConfig {
            n: 5_000,
            seed: 3,
            workers: 2,
        };
        let run = importance_sampling(&p, &params, &sol.xi_star, &config).unwrap();
        let mean_w: f64 = run.samples.iter().map(|s| s.log_weight.exp()).sum::<f64>() / 5_000.0;
        assert!((mean_w - 1.0).abs() < 0.2, "mean weight {mean_w}");
        assert!(run.estimate.ess > 0.0 && run.estimate.ess <= 5_000.0);
    }

    #[test]
    fn importance_and_crude_agree_within_joint_error() {
        let p = exp_problem(17, 0.5);
        let params = AsymptoticParams::new(0.3, 0.5, 1.0, 0.05).unwrap();
        let sol = solve_kkt(&p, &params, &OptimizerOptions::default()).unwrap();
        let n = 30_000;
        let config = McConfig {
            n,
            seed: 19,
            workers: 4,
        };
        let crude = crude_mc(&p, &params, &config).unwrap();
        let is = importance_sampling(&p, &params, &sol.xi_star, &config).unwrap();
        assert!(crude.estimate.hits > 100, "tail not reachable by crude mc");
        let gap = (crude.estimate.mean - is.estimate.mean).abs();
        let joint = 4.0 * (crude.estimate.std_error + is.estimate.std_error);
        assert!(
            gap <= joint,
            "crude {} vs importance {} (allowance {joint})",
            crude.estimate.mean,
            is.estimate.mean
        );
        assert!(is.estimate.log_weight_spread > 0.0);
    }

    #[test]
    fn zero_hits_reduce_cleanly() {
        let p = exp_problem(9, 0.5);
        // kappa far out of reach for sigma this small without tilting
        let params = AsymptoticParams::new(0.01, 0.5, 5.0, 0.05).unwrap();
        let config = McConfig {
            n: 200,
            seed: 1,
            workers: 1,
        };
        let run = crude_mc(&p, &params, &config).unwrap();
        assert_eq!(run.estimate.hits, 0);
        assert_eq!(run.estimate.mean, 0.0);
        assert_eq!(run.estimate.std_error, 0.0);
        assert_eq!(run.estimate.log_weight_spread, 0.0);
    }

    #[test]
    fn certain_event_hits_every_sample() {
        // A negative threshold cannot come out of the validated constructor,
        // so build the parameter struct literally: every draw then exceeds
        // the level and the estimator degenerates to mean 1, zero error.
        let p = exp_problem(9, 0.5);
        let params = AsymptoticParams {
            sigma: 0.1,
            alpha: 0.5,
            kappa: -1.0,
            epsilon: 0.05,
            b: -1e6,
        };
        let config = McConfig {
            n: 150,
            seed: 4,
            workers: 2,
        };
        let run = crude_mc(&p, &params, &config).unwrap();
        assert_eq!(run.estimate.hits, config.n);
        assert_eq!(run.estimate.mean, 1.0);
        assert_eq!(run.estimate.std_error, 0.0);
        assert!(run.samples.iter().all(|s| s.hit && s.log_weight == 0.0));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let p = exp_problem(9, 0.5);
        let params = AsymptoticParams::new(0.3, 0.5, 1.0, 0.05).unwrap();
        let bad_n = McConfig {
            n: 0,
            seed: 0,
            workers: 1,
        };
        assert!(crude_mc(&p, &params, &bad_n).is_err());
        let bad_workers = McConfig {
            n: 10,
            seed: 0,
            workers: 0,
        };
        assert!(crude_mc(&p, &params, &bad_workers).is_err());
    }
}
