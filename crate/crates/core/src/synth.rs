//! TvS synthetic distributions.
//!
//! Healthy data follow a three-mode isotropic Gaussian mixture with means at
//! `0`, `+mu_a * 1` and `-mu_a * 1` where `mu_a = sqrt(mu^2 / d)`. Faulty data
//! follow an equal-weight mixture of `n_clusters` isotropic Gaussians whose
//! centres lie on the sphere of radius `mu / 2`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{Class, LabeledDataset, Points};
use crate::error::{Error, Result};
use crate::seed;

/// Lower bound (exclusive) on the healthy component variance.
pub const MIN_HEALTHY_VARIANCE: f64 = 0.01;
/// Lower bound (exclusive) on the faulty component variance. The S2 preset
/// uses 0.04, so the bound is the same floor as the healthy one.
pub const MIN_FAULTY_VARIANCE: f64 = 0.01;
pub const DEFAULT_FAULTY_CLUSTERS: usize = 200;

fn default_clusters() -> usize {
    DEFAULT_FAULTY_CLUSTERS
}

/// Parameters of one TvS scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    /// Feature count.
    pub d: usize,
    /// Offset between healthy modes; the faulty shell has radius `mu / 2`.
    pub mu: f64,
    /// Healthy per-coordinate variance.
    pub sigma2_a: f64,
    /// Faulty per-coordinate variance.
    pub sigma2_b: f64,
    #[serde(default = "default_clusters")]
    pub n_clusters: usize,
    /// Fixes the faulty cluster centres.
    #[serde(default)]
    pub placement_seed: u64,
}

impl ScenarioSpec {
    /// Two features, `mu = 2.8`, `sigma2_a = 0.05`, `sigma2_b = 0.4`.
    pub fn s1() -> Self {
        Self { d: 2, mu: 2.8, sigma2_a: 0.05, sigma2_b: 0.4, n_clusters: 200, placement_seed: 0 }
    }

    /// Ten features, `mu = 1.05`, `sigma2_a = 0.02`, `sigma2_b = 0.04`.
    pub fn s2() -> Self {
        Self { d: 10, mu: 1.05, sigma2_a: 0.02, sigma2_b: 0.04, n_clusters: 200, placement_seed: 0 }
    }

    /// Shipped presets by name (`S1`, `S2`, case-insensitive).
    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "S1" => Some(Self::s1()),
            "S2" => Some(Self::s2()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.d < 1 {
            return bad("d must be at least 1".into());
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return bad(format!("mu must be positive, got {}", self.mu));
        }
        if !(self.sigma2_a > MIN_HEALTHY_VARIANCE) || !self.sigma2_a.is_finite() {
            return bad(format!("sigma2_a must exceed {MIN_HEALTHY_VARIANCE}, got {}", self.sigma2_a));
        }
        if !(self.sigma2_b > MIN_FAULTY_VARIANCE) || !self.sigma2_b.is_finite() {
            return bad(format!("sigma2_b must exceed {MIN_FAULTY_VARIANCE}, got {}", self.sigma2_b));
        }
        if self.n_clusters < 1 {
            return bad("n_clusters must be at least 1".into());
        }
        Ok(())
    }

    /// Healthy mode offset `sqrt(mu^2 / d)`.
    pub fn mu_a(&self) -> f64 {
        (self.mu * self.mu / self.d as f64).sqrt()
    }

    /// Faulty shell radius `mu / 2`.
    pub fn r_b(&self) -> f64 {
        self.mu / 2.0
    }
}

/// Mixture of isotropic Gaussians sharing one variance.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicGaussianMixture {
    means: Points,
    variance: f64,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
    log_norm: f64,
}

impl IsotropicGaussianMixture {
    pub fn new(means: Points, variance: f64, weights: Vec<f64>) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::InvalidScenario("mixture needs at least one component".into()));
        }
        if weights.len() != means.len() {
            return Err(Error::Shape { expected: means.len(), got: weights.len() });
        }
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::InvalidScenario(format!("variance must be positive, got {variance}")));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidScenario("weights must be nonnegative and sum to 1".into()));
        }
        let d = means.dim() as f64;
        let log_weights = weights.iter().map(|w| w.ln()).collect();
        let log_norm = -0.5 * d * (2.0 * std::f64::consts::PI * variance).ln();
        Ok(Self { means, variance, weights, log_weights, log_norm })
    }

    pub fn equal_weights(means: Points, variance: f64) -> Result<Self> {
        let k = means.len();
        let w = if k == 0 { Vec::new() } else { vec![1.0 / k as f64; k] };
        Self::new(means, variance, w)
    }

    pub fn dim(&self) -> usize {
        self.means.dim()
    }

    pub fn means(&self) -> &Points {
        &self.means
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n_components(&self) -> usize {
        self.means.len()
    }

    /// `log sum_i w_i N(x; m_i, variance I)` via log-sum-exp.
    pub fn log_pdf(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Shape { expected: self.dim(), got: x.len() });
        }
        Ok(self.log_pdf_unchecked(x))
    }

    pub(crate) fn log_pdf_unchecked(&self, x: &[f64]) -> f64 {
        let inv = -0.5 / self.variance;
        // streaming log-sum-exp: `sum` is relative to the running maximum
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for (m, lw) in self.means.rows().zip(&self.log_weights) {
            let d2: f64 = m.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            let t = lw + inv * d2;
            if t > max {
                sum = sum * (max - t).exp() + 1.0;
                max = t;
            } else {
                sum += (t - max).exp();
            }
        }
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + sum.ln() + self.log_norm
    }

    /// Draw one point: component by weight, then isotropic perturbation.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut comp = self.weights.len() - 1;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                comp = i;
                break;
            }
        }
        let sd = self.variance.sqrt();
        for (o, m) in out.iter_mut().zip(self.means.row(comp)) {
            let z: f64 = rng.sample(StandardNormal);
            *o = m + sd * z;
        }
    }
}

/// Exact two-class TvS model.
#[derive(Debug, Clone, PartialEq)]
pub struct TvsDistribution {
    pub healthy: IsotropicGaussianMixture,
    pub faulty: IsotropicGaussianMixture,
    pub scenario: ScenarioSpec,
}

/// Construct the healthy and faulty mixtures of a scenario.
///
/// Faulty centres are standard Gaussian vectors normalised to radius `r_b`,
/// drawn from the `placement` stream of `placement_seed`.
pub fn build_tvs(spec: &ScenarioSpec) -> Result<TvsDistribution> {
    spec.validate()?;
    let d = spec.d;
    let mu_a = spec.mu_a();
    let healthy_means = Points::from_rows(
        d,
        &[vec![0.0; d], vec![mu_a; d], vec![-mu_a; d]],
    )?;
    let healthy = IsotropicGaussianMixture::equal_weights(healthy_means, spec.sigma2_a)?;

    let r_b = spec.r_b();
    let mut rng = seed::stream(spec.placement_seed, "placement", 0);
    let mut centres = Points::with_capacity(d, spec.n_clusters);
    let mut v = vec![0.0; d];
    while centres.len() < spec.n_clusters {
        for c in v.iter_mut() {
            *c = rng.sample(StandardNormal);
        }
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        for c in v.iter_mut() {
            *c *= r_b / norm;
        }
        centres.push(&v)?;
    }
    let faulty = IsotropicGaussianMixture::equal_weights(centres, spec.sigma2_b)?;
    Ok(TvsDistribution { healthy, faulty, scenario: spec.clone() })
}

impl TvsDistribution {
    pub fn dim(&self) -> usize {
        self.scenario.d
    }

    pub fn mixture(&self, class: Class) -> &IsotropicGaussianMixture {
        match class {
            Class::Healthy => &self.healthy,
            Class::Faulty => &self.faulty,
        }
    }
}

/// `n` i.i.d. draws of one class; a pure function of `(dist, class, n, seed)`.
pub fn sample(dist: &TvsDistribution, class: Class, n: usize, seed: u64) -> LabeledDataset {
    let d = dist.dim();
    let mix = dist.mixture(class);
    let mut rng = seed::stream(seed, class.as_str(), 0);
    let mut data = vec![0.0; n * d];
    for row in data.chunks_exact_mut(d) {
        mix.sample_one(&mut rng, row);
    }
    let points = Points::from_flat(d, data).expect("consistent shape");
    LabeledDataset { points, labels: vec![class; n], seed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn s1_healthy_means() {
        let dist = build_tvs(&ScenarioSpec::s1()).unwrap();
        let m = dist.healthy.means();
        let mu_a = 2.8 / 2f64.sqrt();
        assert_eq!(m.row(0), &[0.0, 0.0]);
        assert_abs_diff_eq!(m.row(1)[0], mu_a, epsilon = 1e-15);
        assert_abs_diff_eq!(m.row(1)[1], 1.9799, epsilon = 1e-4);
        assert_abs_diff_eq!(m.row(2)[0], -1.9799, epsilon = 1e-4);
        assert_eq!(dist.healthy.variance(), 0.05);
    }

    #[test]
    fn s1_faulty_radius() {
        let dist = build_tvs(&ScenarioSpec::s1()).unwrap();
        assert_eq!(dist.faulty.n_components(), 200);
        for m in dist.faulty.means().rows() {
            let r = m.iter().map(|c| c * c).sum::<f64>().sqrt();
            assert!((r - 1.4).abs() <= 1e-9);
        }
    }

    #[test]
    fn s2_mu_a() {
        let s = ScenarioSpec::s2();
        assert_abs_diff_eq!(s.mu_a(), 1.05 / 10f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.mu_a(), 0.33204, epsilon = 1e-5);
        let dist = build_tvs(&s).unwrap();
        let worst = dist
            .faulty
            .means()
            .rows()
            .map(|m| (m.iter().map(|c| c * c).sum::<f64>().sqrt() - 0.525).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-9);
    }

    #[test]
    fn constraint_violations_rejected() {
        let base = ScenarioSpec::s1();
        for bad in [
            ScenarioSpec { sigma2_a: 0.01, ..base.clone() },
            ScenarioSpec { sigma2_b: 0.0, ..base.clone() },
            ScenarioSpec { mu: 0.0, ..base.clone() },
            ScenarioSpec { mu: -1.0, ..base.clone() },
            ScenarioSpec { d: 0, ..base.clone() },
            ScenarioSpec { n_clusters: 0, ..base.clone() },
        ] {
            assert!(matches!(build_tvs(&bad), Err(Error::InvalidScenario(_))), "{bad:?}");
        }
    }

    #[test]
    fn build_is_deterministic() {
        let a = build_tvs(&ScenarioSpec::s2()).unwrap();
        let b = build_tvs(&ScenarioSpec::s2()).unwrap();
        assert_eq!(a, b);
        let c = build_tvs(&ScenarioSpec { placement_seed: 1, ..ScenarioSpec::s2() }).unwrap();
        assert_ne!(a.faulty, c.faulty);
        assert_eq!(a.healthy, c.healthy);
    }

    #[test]
    fn standard_normal_mode() {
        let m = IsotropicGaussianMixture::equal_weights(Points::from_rows(1, &[[0.0]]).unwrap(), 1.0).unwrap();
        assert_abs_diff_eq!(m.log_pdf(&[0.0]).unwrap(), -0.918_938_533_204_672_7, epsilon = 1e-12);
    }

    #[test]
    fn duplicate_components_collapse() {
        let one = IsotropicGaussianMixture::equal_weights(Points::from_rows(2, &[[0.3, -1.0]]).unwrap(), 0.7).unwrap();
        let two = IsotropicGaussianMixture::equal_weights(
            Points::from_rows(2, &[[0.3, -1.0], [0.3, -1.0]]).unwrap(),
            0.7,
        )
        .unwrap();
        for x in [[0.0, 0.0], [1.0, 2.0], [-3.0, 0.5]] {
            assert_abs_diff_eq!(one.log_pdf(&x).unwrap(), two.log_pdf(&x).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn log_pdf_matches_direct_sum() {
        let dist = build_tvs(&ScenarioSpec::s1()).unwrap();
        let x = [0.0, 0.0];
        let var = 0.05;
        let direct: f64 = dist
            .healthy
            .means()
            .rows()
            .map(|m| {
                let d2: f64 = m.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum();
                (1.0 / 3.0) * (-(d2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var)
            })
            .sum();
        let got = dist.healthy.log_pdf(&x).unwrap();
        assert_abs_diff_eq!(got, direct.ln(), epsilon = 1e-12);
    }

    #[test]
    fn log_pdf_finite_far_away() {
        let dist = build_tvs(&ScenarioSpec::s2()).unwrap();
        let x = vec![1e3; 10];
        let v = dist.healthy.log_pdf(&x).unwrap();
        assert!(v.is_finite() && v < -1e6);
        assert!(dist.faulty.log_pdf(&x).unwrap().is_finite());
    }

    #[test]
    fn log_pdf_shape_error() {
        let dist = build_tvs(&ScenarioSpec::s1()).unwrap();
        assert!(matches!(dist.healthy.log_pdf(&[1.0]), Err(Error::Shape { expected: 2, got: 1 })));
    }

    #[test]
    fn healthy_density_is_symmetric() {
        let dist = build_tvs(&ScenarioSpec::s2()).unwrap();
        let mut rng = seed::stream(11, "sym", 0);
        for _ in 0..200 {
            let x: Vec<f64> = (0..10).map(|_| rng.random_range(-2.0..2.0)).collect();
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            let a = dist.healthy.log_pdf(&x).unwrap();
            let b = dist.healthy.log_pdf(&neg).unwrap();
            assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn density_integrates_to_one_in_2d() {
        // midpoint rule over a box holding all the mass
        let dist = build_tvs(&ScenarioSpec::s1()).unwrap();
        for mix in [&dist.healthy, &dist.faulty] {
            let (lo, hi, n) = (-6.0, 6.0, 600);
            let h = (hi - lo) / n as f64;
            let mut total = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let x = [lo + (i as f64 + 0.5) * h, lo + (j as f64 + 0.5) * h];
                    total += mix.log_pdf(&x).unwrap().exp() * h * h;
                }
            }
            assert!((total - 1.0).abs() < 1e-2, "integral {total}");
        }
    }

    #[test]
    fn sample_empty_and_deterministic() {
        let dist = build_tvs(&ScenarioSpec::s1()).unwrap();
        let e = sample(&dist, Class::Healthy, 0, 1);
        assert!(e.is_empty());
        let a = sample(&dist, Class::Faulty, 50, 9);
        let b = sample(&dist, Class::Faulty, 50, 9);
        assert_eq!(a, b);
        assert!(a.labels.iter().all(|c| *c == Class::Faulty));
        assert_ne!(sample(&dist, Class::Faulty, 50, 10), a);
    }

    #[test]
    fn healthy_sample_mean_near_zero() {
        let dist = build_tvs(&ScenarioSpec::s1()).unwrap();
        let s = sample(&dist, Class::Healthy, 100_000, 5);
        for j in 0..2 {
            let mean: f64 = s.points.rows().map(|r| r[j]).sum::<f64>() / 1e5;
            assert!(mean.abs() < 0.02, "coordinate {j} mean {mean}");
        }
    }

    #[test]
    fn faulty_mean_norm_matches_independent_draw() {
        // oracle: pick a random centre by index and add noise, with an unrelated generator
        let dist = build_tvs(&ScenarioSpec::s1()).unwrap();
        let n = 100_000;
        let s = sample(&dist, Class::Faulty, n, 21);
        let got: f64 = s.points.rows().map(|r| (r[0] * r[0] + r[1] * r[1]).sqrt()).sum::<f64>() / n as f64;

        let mut rng = rand::rngs::StdRng::seed_from_u64(12345);
        let sd = 0.4f64.sqrt();
        let mut acc = 0.0;
        for _ in 0..n {
            let c = dist.faulty.means().row(rng.random_range(0..200));
            let x: f64 = c[0] + sd * rng.sample::<f64, _>(StandardNormal);
            let y: f64 = c[1] + sd * rng.sample::<f64, _>(StandardNormal);
            acc += (x * x + y * y).sqrt();
        }
        let oracle = acc / n as f64;
        // both estimates have standard error below 0.003
        assert!((got - oracle).abs() < 0.015, "got {got}, oracle {oracle}");
    }

    use rand::SeedableRng;

    #[test]
    fn spec_json_field_names() {
        let json = serde_json::to_string(&ScenarioSpec::s1()).unwrap();
        assert_eq!(
            json,
            r#"{"d":2,"mu":2.8,"sigma2_a":0.05,"sigma2_b":0.4,"n_clusters":200,"placement_seed":0}"#
        );
        let back: ScenarioSpec = serde_json::from_str(r#"{"d":2,"mu":2.8,"sigma2_a":0.05,"sigma2_b":0.4}"#).unwrap();
        assert_eq!(back, ScenarioSpec::s1());
        assert!(serde_json::from_str::<ScenarioSpec>(r#"{"d":2,"mu":2.8,"sigma2_a":0.05,"sigma2_b":0.4,"x":1}"#).is_err());
    }
}
