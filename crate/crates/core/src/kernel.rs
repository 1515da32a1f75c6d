//! Laplace and Helmholtz fundamental solutions and dense kernel blocks.
//!
//! Blocks follow the zero-diagonal convention of the summation problem:
//! the entry for a target/source pair with the same global index is 0.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::j0_y0;
use crate::error::{FmmError, Result};
use crate::linalg::Mat;
use crate::points::PointSet;
use crate::scalar::Scalar;

const INV_2PI: f64 = 1.0 / (2.0 * PI);
const INV_4PI: f64 = 1.0 / (4.0 * PI);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Laplace2d,
    Laplace3d,
    Helmholtz2d,
    Helmholtz3d,
}

impl KernelFamily {
    pub fn dim(self) -> usize {
        match self {
            KernelFamily::Laplace2d | KernelFamily::Helmholtz2d => 2,
            KernelFamily::Laplace3d | KernelFamily::Helmholtz3d => 3,
        }
    }

    pub fn is_helmholtz(self) -> bool {
        matches!(self, KernelFamily::Helmholtz2d | KernelFamily::Helmholtz3d)
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Laplace2d => "laplace2d",
            KernelFamily::Laplace3d => "laplace3d",
            KernelFamily::Helmholtz2d => "helmholtz2d",
            KernelFamily::Helmholtz3d => "helmholtz3d",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = FmmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "laplace2d" => Ok(KernelFamily::Laplace2d),
            "laplace3d" => Ok(KernelFamily::Laplace3d),
            "helmholtz2d" => Ok(KernelFamily::Helmholtz2d),
            "helmholtz3d" => Ok(KernelFamily::Helmholtz3d),
            other => Err(FmmError::InvalidParameter(format!(
                "unknown kernel '{other}'"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarKind {
    Real,
    Complex,
}

/// Runtime description of a kernel: family plus wavenumber for Helmholtz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, kappa: Option<f64>) -> Result<Self> {
        if family.is_helmholtz() {
            match kappa {
                Some(k) if k > 0.0 && k.is_finite() => Ok(Self { family, kappa }),
                _ => Err(FmmError::InvalidParameter(
                    "Helmholtz kernels need a positive finite wavenumber".into(),
                )),
            }
        } else {
            Ok(Self {
                family,
                kappa: None,
            })
        }
    }

    pub fn laplace2d() -> Self {
        Self {
            family: KernelFamily::Laplace2d,
            kappa: None,
        }
    }

    pub fn laplace3d() -> Self {
        Self {
            family: KernelFamily::Laplace3d,
            kappa: None,
        }
    }

    pub fn helmholtz2d(kappa: f64) -> Result<Self> {
        Self::new(KernelFamily::Helmholtz2d, Some(kappa))
    }

    pub fn helmholtz3d(kappa: f64) -> Result<Self> {
        Self::new(KernelFamily::Helmholtz3d, Some(kappa))
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn scalar_kind(&self) -> ScalarKind {
        if self.family.is_helmholtz() {
            ScalarKind::Complex
        } else {
            ScalarKind::Real
        }
    }

    fn kappa_or_zero(&self) -> f64 {
        self.kappa.unwrap_or(0.0)
    }

    /// G(x, y) as a complex number (imaginary part 0 for Laplace).
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<Complex64> {
        let d = self.dim();
        for p in [x, y] {
            if p.len() != d {
                return Err(FmmError::DimensionMismatch {
                    expected: d,
                    got: p.len(),
                });
            }
        }
        let r = distance(x, y);
        if r == 0.0 {
            return Err(FmmError::CoincidentPoints);
        }
        let k = self.kappa_or_zero();
        Ok(match self.family {
            KernelFamily::Laplace2d => Laplace2d.eval_r(r).to_complex(),
            KernelFamily::Laplace3d => Laplace3d.eval_r(r).to_complex(),
            KernelFamily::Helmholtz2d => Helmholtz2d { kappa: k }.eval_r(r),
            KernelFamily::Helmholtz3d => Helmholtz3d { kappa: k }.eval_r(r),
        })
    }
}

#[inline]
pub(crate) fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let t = a - b;
            t * t
        })
        .sum::<f64>()
        .sqrt()
}

/// A radially symmetric fundamental solution with a statically known field.
pub trait Kernel: Send + Sync {
    type Scalar: Scalar;

    fn dim(&self) -> usize;

    /// Kernel value as a function of distance `r > 0`.
    fn eval_r(&self, r: f64) -> Self::Scalar;

    #[inline]
    fn eval(&self, x: &[f64], y: &[f64]) -> Self::Scalar {
        self.eval_r(distance(x, y))
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Laplace2d;

#[derive(Clone, Copy, Debug, Default)]
pub struct Laplace3d;

#[derive(Clone, Copy, Debug)]
pub struct Helmholtz2d {
    pub kappa: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct Helmholtz3d {
    pub kappa: f64,
}

impl Kernel for Laplace2d {
    type Scalar = f64;

    fn dim(&self) -> usize {
        2
    }

    #[inline]
    fn eval_r(&self, r: f64) -> f64 {
        -INV_2PI * r.ln()
    }
}

impl Kernel for Laplace3d {
    type Scalar = f64;

    fn dim(&self) -> usize {
        3
    }

    #[inline]
    fn eval_r(&self, r: f64) -> f64 {
        INV_4PI / r
    }
}

impl Kernel for Helmholtz2d {
    type Scalar = Complex64;

    fn dim(&self) -> usize {
        2
    }

    /// (i/4) H0^(1)(kappa r)
    #[inline]
    fn eval_r(&self, r: f64) -> Complex64 {
        let (j0, y0) = j0_y0(self.kappa * r);
        Complex64::new(-0.25 * y0, 0.25 * j0)
    }
}

impl Kernel for Helmholtz3d {
    type Scalar = Complex64;

    fn dim(&self) -> usize {
        3
    }

    #[inline]
    fn eval_r(&self, r: f64) -> Complex64 {
        let (s, c) = (self.kappa * r).sin_cos();
        Complex64::new(c, s) * (INV_4PI / r)
    }
}

/// Dense block `A[targets, sources]` with global-index zero diagonal,
/// rejecting coincident coordinates that carry distinct indices.
pub fn eval_block<K: Kernel>(
    kernel: &K,
    points: &PointSet,
    targets: &[usize],
    sources: &[usize],
) -> Result<Mat<K::Scalar>> {
    if points.dim() != kernel.dim() {
        return Err(FmmError::DimensionMismatch {
            expected: kernel.dim(),
            got: points.dim(),
        });
    }
    let mut out = Mat::zeros(targets.len(), sources.len());
    for (c, &s) in sources.iter().enumerate() {
        let y = points.point(s);
        for (r, &t) in targets.iter().enumerate() {
            if t == s {
                continue;
            }
            let d = distance(points.point(t), y);
            if d == 0.0 {
                return Err(FmmError::DuplicatePoint {
                    first: t.min(s),
                    second: t.max(s),
                });
            }
            out[(r, c)] = kernel.eval_r(d);
        }
    }
    Ok(out)
}

/// Runs `f` with the statically typed kernel selected by `spec`.
pub fn dispatch<R>(spec: &KernelSpec, f: impl KernelVisitor<Output = R>) -> R {
    let k = spec.kappa_or_zero();
    match spec.family {
        KernelFamily::Laplace2d => f.visit(&Laplace2d),
        KernelFamily::Laplace3d => f.visit(&Laplace3d),
        KernelFamily::Helmholtz2d => f.visit(&Helmholtz2d { kappa: k }),
        KernelFamily::Helmholtz3d => f.visit(&Helmholtz3d { kappa: k }),
    }
}

/// Generic callback for [`dispatch`].
pub trait KernelVisitor {
    type Output;
    fn visit<K: Kernel>(self, kernel: &K) -> Self::Output;
}
