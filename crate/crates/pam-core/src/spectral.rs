//! Mollified spectral measures of the driving noise: densities, exact
//! masses, covariance kernels, and a self-normalized sampler.
//!
//! The time variable carries the density `c0 |lambda|^{1-2 h0}
//! e^{-eps0 lambda^2}` and each spatial coordinate an independent
//! `c_j |xi_j|^{1-2 h_j} e^{-eps xi_j^2}`, with the constants of
//! [`crate::special`]. The degenerate value `h0 = 1` replaces the time
//! factor by a unit point mass at zero (noise constant in time); all
//! formulas below are its continuous `h0 -> 1` limits.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

use crate::error::{PamError, Result};
use crate::hurst::HurstParams;
use crate::special;

/// One draw from the normalized mollified measure, together with the
/// total mass so that `weight * mean(test function)` estimates the
/// unnormalized integral.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralSample {
    pub lambda: f64,
    pub xi: Vec<f64>,
    pub weight: f64,
}

/// The product measure `mu0^{eps0} x mu^{eps}` described above.
#[derive(Clone, Debug)]
pub struct MollifiedSpectralMeasure {
    params: HurstParams,
    eps_time: f64,
    eps_space: f64,
    c0: f64,
    c_spatial: Vec<f64>,
    time_magnitude: Option<Gamma<f64>>,
    spatial_magnitude: Vec<Gamma<f64>>,
}

impl MollifiedSpectralMeasure {
    /// Builds the measure. Mollification parameters may be zero here;
    /// operations that need finite mass check positivity themselves.
    pub fn new(params: HurstParams, eps_time: f64, eps_space: f64) -> Result<Self> {
        if !(eps_time >= 0.0) || !(eps_space >= 0.0) {
            return Err(PamError::invalid(
                "mollification parameters must be nonnegative",
            ));
        }
        let h0 = params.h0_f64();
        let time_independent = h0 == 1.0;
        let c0 = if time_independent {
            1.0
        } else {
            special::fbm_spectral_constant(h0)
        };
        let c_spatial: Vec<f64> = params
            .spatial_f64()
            .iter()
            .map(|&h| special::fbm_spectral_constant(h))
            .collect();
        let time_magnitude = if time_independent {
            None
        } else {
            Some(
                Gamma::new(1.0 - h0, 1.0)
                    .map_err(|e| PamError::invalid(format!("time magnitude law: {e}")))?,
            )
        };
        let spatial_magnitude = params
            .spatial_f64()
            .iter()
            .map(|&h| {
                Gamma::new(1.0 - h, 1.0)
                    .map_err(|e| PamError::invalid(format!("spatial magnitude law: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MollifiedSpectralMeasure {
            params,
            eps_time,
            eps_space,
            c0,
            c_spatial,
            time_magnitude,
            spatial_magnitude,
        })
    }

    pub fn params(&self) -> &HurstParams {
        &self.params
    }

    pub fn eps_time(&self) -> f64 {
        self.eps_time
    }

    pub fn eps_space(&self) -> f64 {
        self.eps_space
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn c_spatial(&self) -> &[f64] {
        &self.c_spatial
    }

    pub fn time_independent(&self) -> bool {
        self.time_magnitude.is_none()
    }

    /// Joint density at `(lambda, xi)`. Undefined (infinite) on the
    /// coordinate hyperplanes when an index exceeds 1/2; callers doing
    /// quadrature handle those singularities via substitution. Not
    /// available for `h0 = 1` (the time factor is then a point mass).
    pub fn density(&self, lambda: f64, xi: &[f64]) -> Result<f64> {
        if self.time_independent() {
            return Err(PamError::invalid(
                "time-independent noise has no joint density in lambda",
            ));
        }
        if xi.len() != self.params.d() {
            return Err(PamError::invalid("dimension mismatch in density argument"));
        }
        let h0 = self.params.h0_f64();
        let mut dens = self.c0
            * lambda.abs().powf(1.0 - 2.0 * h0)
            * (-self.eps_time * lambda * lambda).exp();
        for (j, &x) in xi.iter().enumerate() {
            let h = self.params.spatial_f64()[j];
            dens *= self.c_spatial[j] * x.abs().powf(1.0 - 2.0 * h)
                * (-self.eps_space * x * x).exp();
        }
        Ok(dens)
    }

    /// Total mass `int density`, in closed form: each one-dimensional
    /// factor is `2 int_0^inf c r^{1-2h} e^{-eps r^2} dr
    /// = c Gamma(1-h) eps^{h-1}`; the `h0 = 1` time factor is 1.
    pub fn spectral_mass(&self) -> Result<f64> {
        let mut mass = self.time_mass()?;
        if !(self.eps_space > 0.0) {
            return Err(PamError::invalid(
                "spatial mass is infinite without mollification",
            ));
        }
        for (j, &h) in self.params.spatial_f64().iter().enumerate() {
            mass *= self.c_spatial[j]
                * special::gamma(1.0 - h)
                * self.eps_space.powf(h - 1.0);
        }
        Ok(mass)
    }

    fn time_mass(&self) -> Result<f64> {
        if self.time_independent() {
            return Ok(1.0);
        }
        if !(self.eps_time > 0.0) {
            return Err(PamError::invalid(
                "time mass is infinite without mollification",
            ));
        }
        let h0 = self.params.h0_f64();
        Ok(self.c0 * special::gamma(1.0 - h0) * self.eps_time.powf(h0 - 1.0))
    }

    /// Draw one point from the mass-normalized measure. Squared
    /// magnitudes follow Gamma laws (shape `1-h`, rate `eps`), obtained
    /// from the substitution `y = lambda^2` in the density; signs are
    /// symmetric. The returned weight is [`Self::spectral_mass`].
    ///
    /// Unit-rate Gamma draws are scaled by `1/eps` afterwards, so runs
    /// at different mollification levels driven by the same stream use
    /// common random numbers.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SpectralSample> {
        let weight = self.spectral_mass()?;
        let lambda = match &self.time_magnitude {
            None => 0.0,
            Some(law) => signed_sqrt_draw(rng, law, self.eps_time),
        };
        let xi: Vec<f64> = self
            .spatial_magnitude
            .iter()
            .map(|law| signed_sqrt_draw(rng, law, self.eps_space))
            .collect();
        Ok(SpectralSample { lambda, xi, weight })
    }

    /// Time covariance kernel of the mollified noise:
    /// `k0(v) = c0 int e^{-eps0 lambda^2} cos(v lambda) |lambda|^{1-2h0}
    /// d lambda`, evaluated through the exact rescaling onto
    /// [`special::phi_kernel`]. For `h0 = 1` it is identically 1; for
    /// `eps0 = 0` it needs `h0 > 1/2` and equals
    /// `h0 (2 h0 - 1) |v|^{2 h0 - 2}`.
    pub fn time_kernel(&self, v: f64) -> Result<f64> {
        if self.time_independent() {
            return Ok(1.0);
        }
        let h0 = self.params.h0_f64();
        if self.eps_time > 0.0 {
            let scaled = special::phi_kernel(h0, v / self.eps_time.sqrt())?;
            return Ok(self.c0 * self.eps_time.powf(h0 - 1.0) * scaled);
        }
        if h0 <= 0.5 {
            return Err(PamError::invalid(
                "unmollified time kernel needs h0 > 1/2",
            ));
        }
        if v == 0.0 {
            return Err(PamError::numerical(
                "unmollified time kernel diverges at zero separation",
            ));
        }
        Ok(self.c0 * special::power_cosine_constant(h0) * v.abs().powf(2.0 * h0 - 2.0))
    }

    /// Spatial covariance kernel of the mollified noise, one factor per
    /// coordinate: `prod_j c_j int e^{-eps xi^2} cos(x_j xi)
    /// |xi|^{1-2 h_j} d xi`. Requires `eps > 0`.
    pub fn spatial_kernel(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.params.d() {
            return Err(PamError::invalid("dimension mismatch in kernel argument"));
        }
        if !(self.eps_space > 0.0) {
            return Err(PamError::invalid(
                "mollified spatial kernel needs eps > 0",
            ));
        }
        let mut prod = 1.0;
        for (j, &h) in self.params.spatial_f64().iter().enumerate() {
            let scaled = special::phi_kernel(h, x[j] / self.eps_space.sqrt())?;
            prod *= self.c_spatial[j] * self.eps_space.powf(h - 1.0) * scaled;
        }
        Ok(prod)
    }

    /// `int prod_j e^{-variance xi_j^2 / 2} d mu^eps(xi)`: the spatial
    /// mass seen through a centered Gaussian of the given variance,
    /// which is the measure with `eps` shifted to `eps + variance/2`:
    /// `prod_j c_j Gamma(1-h_j) (eps + variance/2)^{h_j - 1}`.
    pub fn spatial_mass_smoothed(&self, variance: f64) -> Result<f64> {
        let eff = self.eps_space + 0.5 * variance;
        if !(eff > 0.0) {
            return Err(PamError::invalid(
                "smoothed spatial mass needs eps + variance/2 > 0",
            ));
        }
        let mut mass = 1.0;
        for (j, &h) in self.params.spatial_f64().iter().enumerate() {
            mass *= self.c_spatial[j] * special::gamma(1.0 - h) * eff.powf(h - 1.0);
        }
        Ok(mass)
    }
}

fn signed_sqrt_draw<R: Rng + ?Sized>(rng: &mut R, law: &Gamma<f64>, eps: f64) -> f64 {
    let negative: bool = rng.random();
    let magnitude = (law.sample(rng) / eps).sqrt();
    if negative {
        -magnitude
    } else {
        magnitude
    }
}

/// Pointwise spatial covariance `prod_j h_j (2 h_j - 1) |x_j|^{2 h_j - 2}`
/// of the unmollified noise. Only exists as a function when every
/// `h_j > 1/2` and every `x_j != 0`.
pub fn covariance_gamma(x: &[f64], params: &HurstParams) -> Result<f64> {
    if x.len() != params.d() {
        return Err(PamError::invalid("dimension mismatch in covariance point"));
    }
    let mut prod = 1.0;
    for (j, &h) in params.spatial_f64().iter().enumerate() {
        if h <= 0.5 {
            return Err(PamError::invalid(format!(
                "pointwise covariance needs h_{j} > 1/2; use the spectral representation instead"
            )));
        }
        if x[j] == 0.0 {
            return Err(PamError::invalid(
                "pointwise covariance diverges on coordinate hyperplanes",
            ));
        }
        prod *= h * (2.0 * h - 1.0) * x[j].abs().powf(2.0 * h - 2.0);
    }
    Ok(prod)
}

/// Time analogue `h0 (2 h0 - 1) |u|^{2 h0 - 2}`; identically 1 for the
/// time-independent case `h0 = 1`.
pub fn covariance_gamma0(u: f64, params: &HurstParams) -> Result<f64> {
    let h0 = params.h0_f64();
    if h0 == 1.0 {
        return Ok(1.0);
    }
    if h0 <= 0.5 {
        return Err(PamError::invalid(
            "pointwise time covariance needs h0 > 1/2",
        ));
    }
    if u == 0.0 {
        return Err(PamError::invalid(
            "pointwise time covariance diverges at zero",
        ));
    }
    Ok(h0 * (2.0 * h0 - 1.0) * u.abs().powf(2.0 * h0 - 2.0))
}
