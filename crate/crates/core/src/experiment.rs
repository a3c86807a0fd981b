//! Convergence study on a skewed-t mixture: sample from a known model, fit,
//! and track the objective and the distance to the truth as `N` grows.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::basis::{fmt_f64, make_skewed_t, BasisFunction};
use crate::design::{build_problem, plugin_normal_weights, PlottingScheme, WeightSpec};
use crate::error::{Error, Result};
use crate::metrics::wasserstein;
use crate::model::FittedModel;
use crate::par::Exec;
use crate::solve::{fit, ConstraintSet, ErrorNorm};

/// Fitting recipe and the matching distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pipeline {
    /// Squared error with plug-in normal weights; weighted 2-Wasserstein.
    L2PluginNormal,
    /// Absolute error with equal weights; 1-Wasserstein.
    L1Equal,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::L2PluginNormal => "l2-plugin",
            Pipeline::L1Equal => "l1-equal",
        }
    }

    fn norm(self) -> ErrorNorm {
        match self {
            Pipeline::L2PluginNormal => ErrorNorm::L2,
            Pipeline::L1Equal => ErrorNorm::L1,
        }
    }

    fn weights(self) -> WeightSpec {
        match self {
            Pipeline::L2PluginNormal => WeightSpec::DiagonalPluginNormal,
            Pipeline::L1Equal => WeightSpec::Equal,
        }
    }

    /// Distance between a fitted and the true quantile function.
    pub fn distance(self, fitted: &FittedModel, truth: &FittedModel) -> Result<f64> {
        match self {
            Pipeline::L2PluginNormal => wasserstein(
                |p| fitted.evaluate(p),
                |p| truth.evaluate(p),
                |p| plugin_normal_weights(&[p]).map_or(0.0, |w| w[0]),
                2.0,
            ),
            Pipeline::L1Equal => {
                wasserstein(|p| fitted.evaluate(p), |p| truth.evaluate(p), |_| 1.0, 1.0)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceSpec {
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub gammas: Vec<f64>,
    pub nus: Vec<f64>,
    pub seed: u64,
    /// Lower tail probability of the reported band; the upper is `1 - band`.
    pub band: f64,
}

impl ConvergenceSpec {
    /// Three sizes, 20 repetitions, 12 basis functions.
    pub fn reduced(seed: u64) -> Self {
        ConvergenceSpec {
            sizes: vec![100, 1000, 10_000],
            reps: 20,
            gammas: vec![0.5, 1.0 / 1.4, 1.4, 2.0],
            nus: vec![5.0, 13.0, 25.0],
            seed,
            band: 0.05,
        }
    }

    /// `floor(10^(2 + k/4))` for `k = 0..=8`, 100 repetitions, the full
    /// 11 x 11 grid.
    pub fn full(seed: u64) -> Self {
        let up: Vec<f64> = (0..=5).map(|k| (5 + k) as f64 / 5.0).collect();
        let mut gammas: Vec<f64> = up.iter().rev().filter(|&&g| g > 1.0).map(|g| 1.0 / g).collect();
        gammas.extend(up);
        ConvergenceSpec {
            sizes: (0..=8).map(|k| 10f64.powf(2.0 + k as f64 / 4.0).floor() as usize).collect(),
            reps: 100,
            gammas,
            nus: (0..=10).map(|k| 5.0 + 2.0 * k as f64).collect(),
            seed,
            band: 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sizes.iter().any(|&n| n < 2) {
            return Err(Error::Parameter("sample sizes must be at least 2".into()));
        }
        if self.reps == 0 {
            return Err(Error::Parameter("at least one repetition".into()));
        }
        if !(self.band > 0.0 && self.band < 0.5) {
            return Err(Error::Parameter(format!("band level {} not in (0, 0.5)", self.band)));
        }
        if self.gammas.is_empty() || self.nus.is_empty() {
            return Err(Error::Parameter("empty skewed-t grid".into()));
        }
        Ok(())
    }

    /// Constant first, then one member per `(gamma, nu)`, gamma-major.
    pub fn catalog(&self) -> Result<Vec<BasisFunction>> {
        let mut cat = vec![BasisFunction::constant()];
        for &g in &self.gammas {
            for &nu in &self.nus {
                cat.push(make_skewed_t(g, nu)?);
            }
        }
        Ok(cat)
    }

    /// Intercept 1; members with `gamma > 1` get 1, the rest 0.2.
    pub fn truth(&self) -> Result<FittedModel> {
        let mut theta = vec![1.0];
        for &g in &self.gammas {
            theta.extend(std::iter::repeat_n(if g > 1.0 { 1.0 } else { 0.2 }, self.nus.len()));
        }
        FittedModel::new(self.catalog()?, theta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Trial {
    pub n: usize,
    pub rep: usize,
    pub objective: f64,
    pub distance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SizeSummary {
    pub n: usize,
    pub mean_objective: f64,
    pub objective_lo: f64,
    pub objective_hi: f64,
    pub mean_distance: f64,
    pub distance_lo: f64,
    pub distance_hi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub pipeline: Pipeline,
    pub trials: Vec<Trial>,
    pub summary: Vec<SizeSummary>,
}

/// Independent stream per `(n, rep)`, so results do not depend on the
/// order in which trials run.
fn trial_rng(seed: u64, n: usize, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 24) ^ rep as u64);
    rng
}

pub fn run_convergence(spec: &ConvergenceSpec, pipeline: Pipeline, exec: Exec) -> Result<ConvergenceReport> {
    spec.validate()?;
    let truth = spec.truth()?;
    let catalog = spec.catalog()?;
    let jobs: Vec<(usize, usize)> =
        spec.sizes.iter().flat_map(|&n| (0..spec.reps).map(move |r| (n, r))).collect();
    let results = exec.map(&jobs, |&(n, rep)| -> Result<Trial> {
        let mut rng = trial_rng(spec.seed, n, rep);
        let sample = truth.sample_with(&mut rng, n)?;
        let prob = build_problem(&sample, &catalog, &PlottingScheme::Standard, &pipeline.weights(), Exec::Sequential)?;
        let f = fit(&prob, &ConstraintSet::nonneg(), pipeline.norm())?;
        let model = FittedModel::from_fit(&catalog, &f)?;
        let distance = pipeline.distance(&model, &truth)?;
        Ok(Trial { n, rep, objective: f.objective, distance })
    });
    let trials = results.into_iter().collect::<Result<Vec<_>>>()?;
    let summary = spec
        .sizes
        .iter()
        .map(|&n| {
            let obj: Vec<f64> = trials.iter().filter(|t| t.n == n).map(|t| t.objective).collect();
            let dist: Vec<f64> = trials.iter().filter(|t| t.n == n).map(|t| t.distance).collect();
            SizeSummary {
                n,
                mean_objective: mean(&obj),
                objective_lo: quantile(&obj, spec.band),
                objective_hi: quantile(&obj, 1.0 - spec.band),
                mean_distance: mean(&dist),
                distance_lo: quantile(&dist, spec.band),
                distance_hi: quantile(&dist, 1.0 - spec.band),
            }
        })
        .collect();
    Ok(ConvergenceReport { pipeline, trials, summary })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Linear interpolation between order statistics.
fn quantile(v: &[f64], p: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let h = p * (s.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(s.len() - 1);
    s[lo] + (h - lo as f64) * (s[hi] - s[lo])
}

impl ConvergenceReport {
    pub fn summary_csv(&self) -> String {
        let mut s = String::from(
            "pipeline,n,mean_objective,objective_lo,objective_hi,mean_distance,distance_lo,distance_hi\n",
        );
        for r in &self.summary {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                self.pipeline.name(),
                r.n,
                fmt_f64(r.mean_objective),
                fmt_f64(r.objective_lo),
                fmt_f64(r.objective_hi),
                fmt_f64(r.mean_distance),
                fmt_f64(r.distance_lo),
                fmt_f64(r.distance_hi)
            ));
        }
        s
    }

    pub fn trials_csv(&self) -> String {
        let mut s = String::from("pipeline,n,rep,objective,distance\n");
        for t in &self.trials {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                self.pipeline.name(),
                t.n,
                t.rep,
                fmt_f64(t.objective),
                fmt_f64(t.distance)
            ));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let r = ConvergenceSpec::reduced(1);
        assert_eq!(r.catalog().unwrap().len(), 13);
        let t = r.truth().unwrap();
        assert_eq!(&t.theta()[..4], &[1.0, 0.2, 0.2, 0.2]);
        assert_eq!(t.theta()[12], 1.0);
        let f = ConvergenceSpec::full(1);
        assert_eq!(f.sizes, vec![100, 177, 316, 562, 1000, 1778, 3162, 5623, 10000]);
        assert_eq!(f.gammas.len(), 11);
        assert!((f.gammas[0] - 0.5).abs() < 1e-15 && f.gammas[10] == 2.0);
    }

    #[test]
    fn band_quantile() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
        assert!((quantile(&[0.0, 10.0], 0.05) - 0.5).abs() < 1e-12);
    }
}
