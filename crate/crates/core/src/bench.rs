//! Point generators and the timed benchmark driver.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::apply::{fmm_apply, translation_counts, FmmContext, TranslationCounts};
use crate::error::{FmmError, Result};
use crate::kernel::{dispatch, Kernel, KernelFamily, KernelSpec, KernelVisitor};
use crate::oracle::{direct_sum, max_rel_err};
use crate::points::PointSet;
use crate::scalar::Scalar;
use crate::skeleton::{build_skeletons, ProxyConfig};
use crate::tree::{build_balanced_tree, compute_neighbor_lists};

/// Stream offsets so points, charges and check targets never share draws.
const CHARGE_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;
const CHECK_STREAM: u64 = 0xc2b2_ae3d_27d4_eb4f;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    /// Uniform in `[0, 1]^2`.
    Square,
    /// Uniform in `[0, 1]^3`.
    Cube,
    /// Five-lobed perturbed circle `r = 1 + 0.25 cos(5 theta) + eta`.
    Annulus,
    /// Uniform on the unit sphere surface.
    Sphere,
}

impl Distribution {
    pub fn dim(self) -> usize {
        match self {
            Distribution::Square | Distribution::Annulus => 2,
            Distribution::Cube | Distribution::Sphere => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Distribution::Square => "square",
            Distribution::Cube => "cube",
            Distribution::Annulus => "annulus",
            Distribution::Sphere => "sphere",
        }
    }

    pub fn default_leaf_size(self) -> usize {
        match self {
            Distribution::Square | Distribution::Annulus => 100,
            Distribution::Cube => 320,
            Distribution::Sphere => 200,
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Distribution {
    type Err = FmmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(Distribution::Square),
            "cube" => Ok(Distribution::Cube),
            "annulus" => Ok(Distribution::Annulus),
            "sphere" => Ok(Distribution::Sphere),
            other => Err(FmmError::InvalidParameter(format!(
                "unknown distribution '{other}'"
            ))),
        }
    }
}

pub fn generate_points(dist: Distribution, n: usize, seed: u64) -> Result<PointSet> {
    if n == 0 {
        return Err(FmmError::InvalidParameter("need at least one point".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = dist.dim();
    let mut coords = Vec::with_capacity(n * dim);
    for _ in 0..n {
        match dist {
            Distribution::Square | Distribution::Cube => {
                for _ in 0..dim {
                    coords.push(rng.random::<f64>());
                }
            }
            Distribution::Annulus => {
                let theta = rng.random_range(0.0..2.0 * PI);
                let eta = rng.random_range(-0.05..=0.05);
                let r = 1.0 + 0.25 * (5.0 * theta).cos() + eta;
                coords.push(r * theta.cos());
                coords.push(r * theta.sin());
            }
            Distribution::Sphere => {
                let v: [f64; 3] = UnitSphere.sample(&mut rng);
                coords.extend_from_slice(&v);
            }
        }
    }
    PointSet::new(dim, coords)
}

/// Unit-variance charges: standard normal for real kernels, circular complex
/// normal for Helmholtz.
pub fn generate_charges<T: Scalar>(n: usize, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ CHARGE_STREAM);
    (0..n)
        .map(|_| {
            if T::IS_COMPLEX {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                T::from_complex(Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2)
            } else {
                T::from_real(StandardNormal.sample(&mut rng))
            }
        })
        .collect()
}

/// Sorted target subset of size `min(n_check, n)` drawn from the seed.
pub fn check_targets(n: usize, n_check: usize, seed: u64) -> Vec<usize> {
    if n_check >= n {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ CHECK_STREAM);
    let mut idx = sample(&mut rng, n, n_check).into_vec();
    idx.sort_unstable();
    idx
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub kernel: KernelFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(rename = "N")]
    pub n: usize,
    pub distribution: Distribution,
    pub epsilon: f64,
    #[serde(rename = "b")]
    pub leaf_size: usize,
    pub seed: u64,
    pub n_check: usize,
    /// Proxy nodes per edge (2D) or per face direction (3D).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proxy: Option<usize>,
    /// Read coordinates from this CSV instead of generating them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Number of timed applies; `T_apply` is the fastest.
    #[serde(default = "one")]
    pub repeats: usize,
}

fn one() -> usize {
    1
}

impl BenchConfig {
    pub fn new(kernel: KernelFamily, distribution: Distribution, n: usize, epsilon: f64) -> Self {
        Self {
            kernel,
            kappa: None,
            n,
            distribution,
            epsilon,
            leaf_size: distribution.default_leaf_size(),
            seed: 0,
            n_check: 1000,
            proxy: None,
            points_file: None,
            out: None,
            repeats: 1,
        }
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec> {
        KernelSpec::new(self.kernel, self.kappa)
    }

    pub fn proxy_config(&self) -> ProxyConfig {
        let base = ProxyConfig::for_dim(self.kernel.dim());
        match self.proxy {
            Some(p) => base.with_nodes(p),
            None => base,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel_spec()?;
        if self.n == 0 {
            return Err(FmmError::InvalidParameter("N must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(FmmError::InvalidParameter(format!(
                "tolerance must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.leaf_size == 0 {
            return Err(FmmError::InvalidParameter(
                "leaf size must be at least 1".into(),
            ));
        }
        if self.repeats == 0 {
            return Err(FmmError::InvalidParameter(
                "repeats must be at least 1".into(),
            ));
        }
        if self.points_file.is_none() && self.distribution.dim() != self.kernel.dim() {
            return Err(FmmError::InvalidParameter(format!(
                "distribution {} is {}D but kernel {} is {}D",
                self.distribution,
                self.distribution.dim(),
                self.kernel,
                self.kernel.dim()
            )));
        }
        self.proxy_config().validate()
    }

    pub fn load_points(&self) -> Result<PointSet> {
        match &self.points_file {
            Some(path) => PointSet::from_csv_path(path, self.kernel.dim()),
            None => generate_points(self.distribution, self.n, self.seed),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationWork {
    pub ifo: usize,
    pub ifs: usize,
    pub tfo: usize,
    pub level1: usize,
}

impl From<TranslationCounts> for TranslationWork {
    fn from(c: TranslationCounts) -> Self {
        Self {
            ifo: c.ifo,
            ifs: c.ifs,
            tfo: c.tfo,
            level1: c.level1,
        }
    }
}

/// Timings are in seconds and `M_proj` in bytes. `T_tree` covers
/// partitioning, balancing and the neighbor lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "b")]
    pub leaf_size: usize,
    pub k_max: usize,
    #[serde(rename = "T_tree")]
    pub t_tree: f64,
    #[serde(rename = "T_skel")]
    pub t_skel: f64,
    #[serde(rename = "M_proj")]
    pub m_proj: usize,
    #[serde(rename = "T_apply")]
    pub t_apply: f64,
    pub relerr: Option<f64>,
    pub relerr_definition: String,
    pub n_checked: usize,
    pub n_boxes: usize,
    pub n_leaf: usize,
    #[serde(rename = "L")]
    pub depth: u32,
    pub boxes_per_level: Vec<usize>,
    pub leaf_levels: Vec<u32>,
    pub translations: TranslationWork,
    pub warnings: Vec<String>,
}

impl BenchReport {
    pub fn summary(&self) -> String {
        let c = &self.config;
        let kappa = c.kappa.map(|k| format!(" kappa={k}")).unwrap_or_default();
        let relerr = match self.relerr {
            Some(e) => format!("{e:.3e} ({} targets)", self.n_checked),
            None => "skipped".to_string(),
        };
        let mut s = format!(
            "kernel={}{kappa} dist={} N={} b={} eps={:e}\n\
             k_max   {}\n\
             T_tree  {:.3} s\n\
             T_skel  {:.3} s\n\
             M_proj  {:.2} MB\n\
             T_apply {:.3} s\n\
             relerr  {relerr}\n\
             tree    L={} boxes={} leaves={} leaf levels={:?}\n\
             work    ifo={} ifs={} tfo={} level1={}",
            c.kernel,
            c.distribution,
            self.n,
            self.leaf_size,
            c.epsilon,
            self.k_max,
            self.t_tree,
            self.t_skel,
            self.m_proj as f64 / 1e6,
            self.t_apply,
            self.depth,
            self.n_boxes,
            self.n_leaf,
            self.leaf_levels,
            self.translations.ifo,
            self.translations.ifs,
            self.translations.tfo,
            self.translations.level1,
        );
        for w in &self.warnings {
            s.push_str("\nwarning: ");
            s.push_str(w);
        }
        s
    }
}

pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate().map_err(|e| e.at_stage("config"))?;
    let points = cfg.load_points().map_err(|e| e.at_stage("points"))?;
    let report = run_on_points(cfg, &points)?;
    if let Some(path) = &cfg.out {
        let json =
            serde_json::to_string_pretty(&report).map_err(|e| FmmError::Parse(e.to_string()))?;
        std::fs::write(path, json).map_err(|e| FmmError::from(e).at_stage("report"))?;
    }
    Ok(report)
}

/// Runs the timed pipeline on caller-supplied points.
pub fn run_on_points(cfg: &BenchConfig, points: &PointSet) -> Result<BenchReport> {
    cfg.validate().map_err(|e| e.at_stage("config"))?;
    let spec = cfg.kernel_spec()?;
    if points.dim() != spec.dim() {
        return Err(FmmError::DimensionMismatch {
            expected: spec.dim(),
            got: points.dim(),
        }
        .at_stage("points"));
    }
    dispatch(&spec, Runner { cfg, points })
}

struct Runner<'a> {
    cfg: &'a BenchConfig,
    points: &'a PointSet,
}

impl KernelVisitor for Runner<'_> {
    type Output = Result<BenchReport>;

    fn visit<K: Kernel>(self, kernel: &K) -> Result<BenchReport> {
        let Runner { cfg, points } = self;
        let n = points.len();
        let mut warnings = Vec::new();

        let t0 = Instant::now();
        let tree = build_balanced_tree(points, cfg.leaf_size).map_err(|e| e.at_stage("tree"))?;
        let neighbors = compute_neighbor_lists(&tree);
        let t_tree = t0.elapsed().as_secs_f64();

        let t0 = Instant::now();
        let skeletons = build_skeletons(&tree, points, kernel, cfg.epsilon, &cfg.proxy_config())
            .map_err(|e| e.at_stage("skeletonize"))?;
        let t_skel = t0.elapsed().as_secs_f64();
        warnings.extend(skeletons.warnings.iter().cloned());

        let q: Vec<K::Scalar> = generate_charges(n, cfg.seed);
        let ctx = FmmContext {
            tree: &tree,
            neighbors: &neighbors,
            skeletons: &skeletons,
            points,
            kernel,
        };
        let mut t_apply = f64::INFINITY;
        let mut u = Vec::new();
        for _ in 0..cfg.repeats {
            let t0 = Instant::now();
            u = fmm_apply(ctx, &q).map_err(|e| e.at_stage("apply"))?;
            t_apply = t_apply.min(t0.elapsed().as_secs_f64());
        }

        let (relerr, n_checked) = if cfg.n_check == 0 {
            (None, 0)
        } else if n == 1 {
            warnings.push("single point: the sum is empty, error check skipped".into());
            (None, 0)
        } else {
            let targets = check_targets(n, cfg.n_check, cfg.seed);
            let reference =
                direct_sum(kernel, points, &q, &targets).map_err(|e| e.at_stage("check"))?;
            let computed: Vec<K::Scalar> = targets.iter().map(|&i| u[i]).collect();
            let rep = max_rel_err(&computed, &reference).map_err(|e| e.at_stage("check"))?;
            (Some(rep.relerr), rep.n_checked)
        };

        let mut leaf_levels: Vec<u32> = tree.leaves().map(|b| b.level).collect();
        leaf_levels.sort_unstable();
        leaf_levels.dedup();

        Ok(BenchReport {
            config: cfg.clone(),
            n,
            leaf_size: cfg.leaf_size,
            k_max: skeletons.k_max(),
            t_tree,
            t_skel,
            m_proj: skeletons.proj_bytes(),
            t_apply,
            relerr,
            relerr_definition: "max_i |u_i - ref_i| / max_i |ref_i| over checked targets".into(),
            n_checked,
            n_boxes: tree.n_boxes(),
            n_leaf: tree.n_leaves(),
            depth: tree.depth(),
            boxes_per_level: tree.boxes_per_level(),
            leaf_levels,
            translations: translation_counts(&tree, &neighbors).into(),
            warnings,
        })
    }
}
