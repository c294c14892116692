//! The boundary value problem on a bounded interval `[a, b)`.
//!
//! Separated boundary conditions with angles `α, β ∈ [0, π)`:
//!
//! ```text
//! z f(a) cos α - f'(a) sin α = 0,      z f(b) cos β - f'(b) sin β = 0.
//! ```
//!
//! Nonzero eigenvalues are the nonzero roots of an entire characteristic
//! function; whether zero is an eigenvalue (and its multiplicity) is decided
//! by a closed-form kernel-dimension table, never by the root scan.

use crate::error::{Error, Result};
use crate::measure::Coefficients;
use crate::propagate::{wronskian, Propagator};
use crate::scalar::{cplx, Real};
use crate::scan::find_real_zeros;
use num_complex::Complex;

/// Spectral problem on `[a, b)` with boundary angles `alpha`, `beta`.
#[derive(Debug, Clone)]
pub struct BoundedProblem<T: Real> {
    coeffs: Coefficients<T>,
    a: T,
    b: T,
    alpha: T,
    beta: T,
}

/// Kernel dimension of the relation at z = 0: `2` if both angles vanish,
/// `1` if exactly one does, `0` otherwise.
pub fn kernel_dim_zero<T: Real>(alpha: T, beta: T) -> usize {
    usize::from(alpha == T::zero()) + usize::from(beta == T::zero())
}

/// `Λ_β` of the small-z asymptotics of the Weyl function:
/// `coth((b-a)/2)` for β = 0 and `tanh((b-a)/2)` for β ∈ (0, π).
pub fn lambda_beta<T: Real>(a: T, b: T, beta: T) -> T {
    let t = ((b - a) * T::of(0.5)).tanh();
    if beta == T::zero() {
        t.recip()
    } else {
        t
    }
}

/// Resolvent kernel of the Dirichlet relation at z = 0:
/// `K₀(x,s) = 2 sinh((b - x∨s)/2) sinh((x∧s - a)/2) / sinh((b-a)/2)`.
pub fn k0_kernel<T: Real>(a: T, b: T, x: T, s: T) -> Result<T> {
    if !(a <= x && x <= b && a <= s && s <= b) {
        return Err(Error::OutOfDomain(format!("({x}, {s}) outside [{a}, {b}]")));
    }
    let half = T::of(0.5);
    let (hi, lo) = (x.max(s), x.min(s));
    Ok(T::of(2.0) * ((b - hi) * half).sinh() * ((lo - a) * half).sinh()
        / ((b - a) * half).sinh())
}

impl<T: Real> BoundedProblem<T> {
    /// Coefficients are restricted to `[a, b)`.
    pub fn new(coeffs: Coefficients<T>, a: T, b: T, alpha: T, beta: T) -> Result<Self> {
        if !(a < b) {
            return Err(Error::invalid(format!("interval needs a < b, got [{a}, {b})")));
        }
        for (name, angle) in [("alpha", alpha), ("beta", beta)] {
            if !(T::zero() <= angle && angle < T::PI()) {
                return Err(Error::invalid(format!("{name} = {angle} outside [0, π)")));
            }
        }
        Ok(BoundedProblem { coeffs: coeffs.restricted(a, b), a, b, alpha, beta })
    }

    pub fn coefficients(&self) -> &Coefficients<T> {
        &self.coeffs
    }

    pub fn interval(&self) -> (T, T) {
        (self.a, self.b)
    }

    pub fn angles(&self) -> (T, T) {
        (self.alpha, self.beta)
    }

    /// φ_α at `b`: the solution with `φ(a) = sin α`, `φ'(a) = z cos α`.
    fn phi_alpha_at_b(&self, z: Complex<T>) -> (Complex<T>, Complex<T>) {
        let prop = Propagator::new(&self.coeffs);
        let fr = prop.solve_ivp(z, self.a, cplx(self.alpha.sin()), z * self.alpha.cos(), &[self.b]);
        (fr[0].f, fr[0].df_left)
    }

    /// θ_α at `b`: the solution with `θ(a) = cos α`, `θ'(a) = -z sin α`.
    fn theta_alpha_at_b(&self, z: Complex<T>) -> (Complex<T>, Complex<T>) {
        let prop = Propagator::new(&self.coeffs);
        let fr = prop.solve_ivp(z, self.a, cplx(self.alpha.cos()), -z * self.alpha.sin(), &[self.b]);
        (fr[0].f, fr[0].df_left)
    }

    /// ψ_β at `a`: the solution with `ψ(b) = sin β`, `ψ'(b) = z cos β`.
    fn psi_beta_at_a(&self, z: Complex<T>) -> (Complex<T>, Complex<T>) {
        let prop = Propagator::new(&self.coeffs);
        let fr = prop.solve_ivp(z, self.b, cplx(self.beta.sin()), z * self.beta.cos(), &[self.a]);
        (fr[0].f, fr[0].df_left)
    }

    /// Entire characteristic function `z φ_α(z,b) cos β - φ_α'(z,b) sin β`;
    /// its nonzero roots are exactly the nonzero eigenvalues.
    pub fn characteristic(&self, z: Complex<T>) -> Complex<T> {
        let (f, df) = self.phi_alpha_at_b(z);
        z * f * self.beta.cos() - df * self.beta.sin()
    }

    /// All eigenvalues in the window as `(λ, multiplicity)`, ascending.
    ///
    /// Membership of z = 0 comes solely from [`kernel_dim_zero`]; the root
    /// count of the characteristic is certified by the argument principle.
    /// `window = None` derives a window from the Galerkin oracle radius
    /// (atomic coefficients only).
    pub fn eigenvalues(&self, window: Option<(T, T)>, tol: T) -> Result<Vec<(T, usize)>> {
        if tol <= T::zero() {
            return Err(Error::invalid("tol must be positive"));
        }
        let (lo, hi) = match window {
            Some(w) => w,
            None => self.default_window()?,
        };
        let mult0 = kernel_dim_zero(self.alpha, self.beta);
        let f = |z: Complex<T>| self.characteristic(z);
        let n_atoms = self.coeffs.atom_positions().len();
        let width = num_traits::cast::<T, f64>(hi - lo).unwrap_or(1.0);
        let samples = ((8 * (2 * n_atoms + 2)) as f64 * width.max(1.0)).ceil() as usize;
        let roots = find_real_zeros(&f, lo, hi, samples, mult0)?;
        let mut out: Vec<(T, usize)> = Vec::new();
        for r in roots {
            // Polish acceptance: |F| small relative to the local derivative scale.
            let fr = self.characteristic(Complex::new(r, T::zero())).norm();
            let h = T::of(1e-6) * (T::one() + r.abs());
            let d = (self.characteristic(Complex::new(r + h, T::zero()))
                - self.characteristic(Complex::new(r - h, T::zero())))
            .norm()
                / (h + h);
            if fr > tol.max(T::of(1e-10)) * (T::one() + d * (T::one() + r.abs())) {
                return Err(Error::NonConvergence(format!(
                    "root candidate {r} failed the residual test"
                )));
            }
            out.push((r, 1));
        }
        if mult0 > 0 && lo < T::zero() && T::zero() < hi {
            out.push((T::zero(), mult0));
            out.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        }
        Ok(out)
    }

    /// Window guaranteed (for atomic coefficients) to contain all
    /// eigenvalues: Galerkin oracle spectral radius plus one.
    pub fn default_window(&self) -> Result<(T, T)> {
        let r = crate::pencil::spectral_radius(
            &self.coeffs,
            crate::pencil::PencilGeometry::Bounded { a: self.a, b: self.b },
        )? + T::one();
        Ok((-r, r))
    }

    /// Green's function `G(x,s) = ψ(x∨s) φ(x∧s) / W(ψ, φ)` of the resolvent.
    pub fn greens_value(&self, z: Complex<T>, x: T, s: T) -> Result<Complex<T>> {
        if !(self.a <= x && x < self.b && self.a <= s && s < self.b) {
            return Err(Error::OutOfDomain(format!("({x}, {s}) outside [{}, {})", self.a, self.b)));
        }
        let scale = self.characteristic_scale(z);
        if self.characteristic(z).norm() <= T::of(1e-12) * scale {
            return Err(Error::SingularParameter(format!("{z} is an eigenvalue")));
        }
        if z.norm() == T::zero() && kernel_dim_zero(self.alpha, self.beta) > 0 {
            return Err(Error::SingularParameter("z = 0 is an eigenvalue".into()));
        }
        let prop = Propagator::new(&self.coeffs);
        let (lo, hi) = (x.min(s), x.max(s));
        let phi = prop.solve_ivp(z, self.a, cplx(self.alpha.sin()), z * self.alpha.cos(), &[lo, hi]);
        let psi = prop.solve_ivp(z, self.b, cplx(self.beta.sin()), z * self.beta.cos(), &[lo, hi]);
        let w = wronskian(&psi[0], &phi[0])?;
        if w.norm() == T::zero() {
            return Err(Error::SingularParameter(format!("{z} is an eigenvalue")));
        }
        Ok(psi[1].f * phi[0].f / w)
    }

    fn characteristic_scale(&self, z: Complex<T>) -> T {
        // Local derivative scale for the singularity test.
        let h = T::of(1e-4) * (T::one() + z.norm());
        let d = (self.characteristic(z + cplx(h)) - self.characteristic(z - cplx(h))).norm()
            / (h + h);
        T::of(1e-30).max(d * (T::one() + z.norm()))
    }

    /// Weyl–Titchmarsh function via the boundary data of ψ_β at `a`:
    /// `m = (z ψ sin α + ψ' cos α) / (z ψ cos α - ψ' sin α)`.
    pub fn weyl_m(&self, z: Complex<T>) -> Result<Complex<T>> {
        if z.norm() == T::zero() {
            return Err(Error::SingularParameter("m is not defined at z = 0".into()));
        }
        let (psi, dpsi) = self.psi_beta_at_a(z);
        let den = z * psi * self.alpha.cos() - dpsi * self.alpha.sin();
        if den.norm() <= T::of(1e-13) * (z * psi).norm().max(dpsi.norm()) {
            return Err(Error::SingularParameter(format!("{z} is an eigenvalue")));
        }
        Ok((z * psi * self.alpha.sin() + dpsi * self.alpha.cos()) / den)
    }

    /// The same function from the fundamental pair at `b`:
    /// `m = -(z θ_α(b) cos β - θ_α'(b) sin β) / (z φ_α(b) cos β - φ_α'(b) sin β)`.
    /// Used as an internal cross-check of [`Self::weyl_m`].
    pub fn weyl_m_via_fundamental(&self, z: Complex<T>) -> Result<Complex<T>> {
        if z.norm() == T::zero() {
            return Err(Error::SingularParameter("m is not defined at z = 0".into()));
        }
        let (tf, tdf) = self.theta_alpha_at_b(z);
        let den = self.characteristic(z);
        if den.norm() <= T::of(1e-13) * self.characteristic_scale(z) {
            return Err(Error::SingularParameter(format!("{z} is an eigenvalue")));
        }
        Ok(-(z * tf * self.beta.cos() - tdf * self.beta.sin()) / den)
    }
}
