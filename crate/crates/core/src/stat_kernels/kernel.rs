use serde::{Deserialize, Serialize};

use crate::stat_kernels::normal_cdf;

/// Mass of the standard normal on [-3, 3]; normalizes the truncated weight.
const GAUSS_MASS_3: f64 = 0.997_300_203_936_739_8;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Covariate weight kernel `w`: a symmetric density with bounded support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKernel {
    /// `0.75 (1 - u^2)` on [-1, 1].
    #[default]
    Epanechnikov,
    /// Standard normal density truncated to [-3, 3] and renormalized.
    GaussianTruncated,
}

impl WeightKernel {
    #[inline]
    pub fn eval(self, u: f64) -> f64 {
        match self {
            WeightKernel::Epanechnikov => {
                if u.abs() < 1.0 {
                    0.75 * (1.0 - u * u)
                } else {
                    0.0
                }
            }
            WeightKernel::GaussianTruncated => {
                if u.abs() <= 3.0 {
                    INV_SQRT_2PI * (-0.5 * u * u).exp() / GAUSS_MASS_3
                } else {
                    0.0
                }
            }
        }
    }

    /// Half-width of the support, in units of the bandwidth.
    pub fn support_radius(self) -> f64 {
        match self {
            WeightKernel::Epanechnikov => 1.0,
            WeightKernel::GaussianTruncated => 3.0,
        }
    }
}

/// Response smoother `K`: a proper CDF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CdfKernel {
    #[default]
    GaussianCdf,
    /// Integral of the Epanechnikov density, supported on [-1, 1].
    IntegratedEpanechnikov,
    /// Limit `h0 -> 0`: a unit step with `K(0) = 1/2`.
    Step,
}

impl CdfKernel {
    #[inline]
    pub fn cdf(self, v: f64) -> f64 {
        match self {
            CdfKernel::GaussianCdf => normal_cdf(v),
            CdfKernel::IntegratedEpanechnikov => {
                if v <= -1.0 {
                    0.0
                } else if v >= 1.0 {
                    1.0
                } else {
                    0.5 + 0.75 * (v - v * v * v / 3.0)
                }
            }
            CdfKernel::Step => {
                if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    0.0
                } else {
                    0.5
                }
            }
        }
    }

    /// Derivative of [`CdfKernel::cdf`]; zero almost everywhere for `Step`.
    #[inline]
    pub fn density(self, v: f64) -> f64 {
        match self {
            CdfKernel::GaussianCdf => INV_SQRT_2PI * (-0.5 * v * v).exp(),
            CdfKernel::IntegratedEpanechnikov => {
                if v.abs() < 1.0 {
                    0.75 * (1.0 - v * v)
                } else {
                    0.0
                }
            }
            CdfKernel::Step => 0.0,
        }
    }
}

/// Kernel pair used by the kernel conditional CDF estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KernelSpec {
    pub weight: WeightKernel,
    pub cdf: CdfKernel,
}

impl KernelSpec {
    pub fn new(weight: WeightKernel, cdf: CdfKernel) -> Self {
        Self { weight, cdf }
    }
}

/// Weight kernel `w(u)`.
pub fn kernel_weight(u: f64, spec: KernelSpec) -> f64 {
    spec.weight.eval(u)
}

/// Response smoother `K(v)`, with the limits at `±inf` handled exactly.
pub fn smooth_cdf(v: f64, spec: KernelSpec) -> f64 {
    if v == f64::INFINITY {
        1.0
    } else if v == f64::NEG_INFINITY {
        0.0
    } else {
        spec.cdf.cdf(v)
    }
}
