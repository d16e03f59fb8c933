use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::spectral::{BoundaryCondition, Field, Grid, SpectralField};

/// One linear IMEX step
/// `(u⁺ - u)/δt + A²u⁺ + A f(u) + g(u) = 0`, solved mode by mode.
///
/// The nonlinear terms are evaluated at the grid samples and transformed
/// (collocation).
#[derive(Clone, Debug)]
pub struct ImexStepper {
    grid: Arc<Grid>,
    params: ModelParams,
    dt: f64,
    dealias: Option<Vec<bool>>,
}

impl ImexStepper {
    /// Builds a stepper. With `strict_guard`, a step larger than
    /// `1/(2 L_g)` is rejected.
    pub fn new(grid: &Arc<Grid>, params: &ModelParams, dt: f64, strict_guard: bool) -> Result<Self> {
        params.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::NonPositiveTimeStep(dt));
        }
        if grid.bc() == BoundaryCondition::NeumannCosine && params.has_source() {
            return Err(Error::Unsupported(
                "neumann_cosine requires source = none (mass is not conserved otherwise)".into(),
            ));
        }
        if strict_guard && params.has_source() && dt > params.dt_guard() {
            return Err(Error::GuardViolation {
                dt,
                limit: params.dt_guard(),
            });
        }
        Ok(ImexStepper {
            grid: Arc::clone(grid),
            params: *params,
            dt,
            dealias: None,
        })
    }

    /// Zeroes the upper third of the spectrum of `f(u)` and `g(u)` before use.
    pub fn with_two_thirds_dealiasing(mut self) -> Self {
        let g = &self.grid;
        let mask = (0..g.len())
            .map(|flat| {
                g.unflatten(flat)
                    .iter()
                    .zip(g.shape())
                    .all(|(&i, &n)| 3 * (i + 1) <= 2 * n)
            })
            .collect();
        self.dealias = Some(mask);
        self
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, u: &Field) -> Result<Field> {
        Ok(self.step_spectral(u, &u.forward())?.inverse())
    }

    /// Step given both representations of `uⁿ` (`coeffs` must equal
    /// `u.forward()`); returns the coefficients of `uⁿ⁺¹`.
    pub fn step_spectral(&self, u: &Field, coeffs: &SpectralField) -> Result<SpectralField> {
        if !u.grid().compatible(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let mut f_hat = self.params.apply_f(u).forward();
        let mut g_hat = self
            .params
            .has_source()
            .then(|| self.params.apply_g(u).forward());
        if let Some(mask) = &self.dealias {
            filter(&mut f_hat, mask);
            if let Some(g_hat) = g_hat.as_mut() {
                filter(g_hat, mask);
            }
        }
        let dt = self.dt;
        let mut rhs = coeffs.clone();
        let eig = self.grid.eigenvalues();
        for (i, r) in rhs.coeffs_mut().iter_mut().enumerate() {
            let g_i = g_hat.as_ref().map_or(0.0, |g| g.coeffs()[i]);
            *r -= dt * (eig[i] * f_hat.coeffs()[i] + g_i);
        }
        rhs.solve_implicit(dt)
    }

    /// `‖(uⁿ⁺¹ - uⁿ)/δt + A²uⁿ⁺¹ + A f(uⁿ) + g(uⁿ)‖_{-2}` relative to the
    /// size of its terms.
    pub fn relative_residual(&self, u: &Field, next: &Field) -> Result<f64> {
        let c = u.forward();
        let cn = next.forward();
        let f_hat = self.params.apply_f(u).forward();
        let g_hat = self.params.apply_g(u).forward();
        let eig = self.grid.eigenvalues();
        let w = self.grid.coeff_weights();
        let (mut res, mut scale) = (0.0, 0.0);
        for i in 0..eig.len() {
            let lam = eig[i];
            let terms = [
                cn.coeffs()[i],
                -c.coeffs()[i],
                self.dt * lam * lam * cn.coeffs()[i],
                self.dt * lam * f_hat.coeffs()[i],
                self.dt * g_hat.coeffs()[i],
            ];
            let inv = if lam == 0.0 { 1.0 } else { 1.0 / (lam * lam) };
            let r: f64 = terms.iter().sum();
            res += w[i] * (r * inv).powi(2);
            scale += w[i] * (terms.iter().map(|t| t.abs()).sum::<f64>() * inv).powi(2);
        }
        Ok(if scale == 0.0 { 0.0 } else { (res / scale).sqrt() })
    }
}

fn filter(s: &mut SpectralField, mask: &[bool]) {
    for (c, &keep) in s.coeffs_mut().iter_mut().zip(mask) {
        if !keep {
            *c = 0.0;
        }
    }
}

/// Convenience wrapper: one step without the Lipschitz guard.
pub fn imex_step(u: &Field, params: &ModelParams, dt: f64) -> Result<Field> {
    ImexStepper::new(u.grid(), params, dt, false)?.step(u)
}
