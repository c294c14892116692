//! Exact propagation of solutions of `-f'' + ¼f = zωf + z²υf (+ χ)`.
//!
//! Between breakpoints both densities are constant and the solution advances
//! by the unimodular cell matrix `[[C, S], [κ²S, C]]`; an atom of mass
//! `(w, v)` at `p` leaves the value alone and kicks the derivative by
//! `-(z·w + z²·v)·f(p)`.  The derivative representative is left-continuous:
//! states carry `f'(x-)`, and the atom sitting at a point acts when moving to
//! the right of it.

use crate::entire::{cell_basis_integrals, cell_entries, pair_integrals, CellState};
use crate::error::{Error, Result};
use crate::measure::{support_mesh, Coefficients, ComplexMeasure};
use crate::scalar::{cplx, Real};
use num_complex::Complex;

/// Solution data at a point: value and both one-sided derivatives.
///
/// `df_left` is the canonical left-continuous representative; the two sides
/// differ only at atoms of the coefficients (or of the inhomogeneity).
#[derive(Debug, Clone, Copy)]
pub struct SolutionFrame<T: Real> {
    pub x: T,
    pub f: Complex<T>,
    pub df_left: Complex<T>,
    pub df_right: Complex<T>,
}

/// 2×2 complex matrix mapping `(f, f')` across a cell or an atom.
#[derive(Debug, Clone, Copy)]
pub struct TransferMatrix<T: Real> {
    pub m: [[Complex<T>; 2]; 2],
}

impl<T: Real> TransferMatrix<T> {
    pub fn identity() -> Self {
        let o = Complex::new(T::one(), T::zero());
        let z = Complex::new(T::zero(), T::zero());
        TransferMatrix { m: [[o, z], [z, o]] }
    }

    /// Transfer across a cell of width `dx` with constant densities `w`, `v`:
    /// `[[cosh(κ dx), sinh(κ dx)/κ], [κ² sinh(κ dx)/κ, cosh(κ dx)]]`
    /// with `κ² = ¼ - z·w - z²·v`, evaluated as entire functions of `κ²`.
    pub fn piece(z: Complex<T>, w: T, v: T, dx: T) -> Self {
        let ksq = kappa_sq(z, w, v);
        let (c, s) = cell_entries(ksq * (dx * dx), dx);
        TransferMatrix { m: [[c, s], [ksq * s, c]] }
    }

    /// Transfer across an atom with masses `w_p` of ω and `v_p` of υ.
    pub fn atom(z: Complex<T>, w_p: T, v_p: T) -> Self {
        let o = Complex::new(T::one(), T::zero());
        let zero = Complex::new(T::zero(), T::zero());
        TransferMatrix { m: [[o, zero], [-(z * w_p + z * z * v_p), o]] }
    }

    pub fn det(&self) -> Complex<T> {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Exact inverse of a unimodular matrix.
    pub fn inverse(&self) -> Self {
        TransferMatrix {
            m: [[self.m[1][1], -self.m[0][1]], [-self.m[1][0], self.m[0][0]]],
        }
    }

    pub fn apply(&self, f: Complex<T>, df: Complex<T>) -> (Complex<T>, Complex<T>) {
        (
            self.m[0][0] * f + self.m[0][1] * df,
            self.m[1][0] * f + self.m[1][1] * df,
        )
    }

    /// `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Self) -> Self {
        let mut out = [[Complex::new(T::zero(), T::zero()); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] =
                    self.m[i][0] * rhs.m[0][j] + self.m[i][1] * rhs.m[1][j];
            }
        }
        TransferMatrix { m: out }
    }
}

/// `κ² = ¼ - z·w - z²·v` on a cell.
pub fn kappa_sq<T: Real>(z: Complex<T>, w: T, v: T) -> Complex<T> {
    cplx(T::of(0.25)) - z * w - z * z * v
}

/// Fundamental pair θ, φ with the angle-parameterized initial data
/// `φ(c) = sin γ, φ'(c) = z cos γ` and `θ(c) = cos γ, θ'(c) = -z sin γ`,
/// so that `W(θ, φ) = z`.
#[derive(Debug, Clone)]
pub struct FundamentalPair<T: Real> {
    pub z: Complex<T>,
    pub base: T,
    pub angle: T,
    pub theta: Vec<SolutionFrame<T>>,
    pub phi: Vec<SolutionFrame<T>>,
}

/// Propagates solutions for a fixed coefficient pair.
#[derive(Debug, Clone, Copy)]
pub struct Propagator<'a, T: Real> {
    coeffs: &'a Coefficients<T>,
}

/// States (f, f'(x-)) along a station list; internal working form.
#[derive(Debug, Clone)]
pub(crate) struct Profile<T: Real> {
    pub points: Vec<T>,
    pub states: Vec<(Complex<T>, Complex<T>)>,
}

impl<T: Real> Profile<T> {
    pub fn index_of(&self, x: T) -> usize {
        self.points
            .binary_search_by(|p| p.partial_cmp(&x).unwrap())
            .expect("station present")
    }

    pub fn state(&self, x: T) -> (Complex<T>, Complex<T>) {
        self.states[self.index_of(x)]
    }
}

impl<'a, T: Real> Propagator<'a, T> {
    pub fn new(coeffs: &'a Coefficients<T>) -> Self {
        Propagator { coeffs }
    }

    pub fn coefficients(&self) -> &Coefficients<T> {
        self.coeffs
    }

    fn jump(&self, z: Complex<T>, p: T) -> Complex<T> {
        let w = self.coeffs.omega.mass_at(p);
        let v = self.coeffs.upsilon.mass_at(p);
        z * w + z * z * v
    }

    /// Station list: all coefficient breakpoints between the extreme
    /// evaluation points, plus the evaluation points themselves.
    fn stations(&self, c: T, targets: &[T], extra: &[T]) -> Vec<T> {
        let mut lo = c;
        let mut hi = c;
        for &t in targets.iter().chain(extra.iter()) {
            lo = lo.min(t);
            hi = hi.max(t);
        }
        let mesh = support_mesh(&self.coeffs.omega, &self.coeffs.upsilon, &[]);
        let mut pts: Vec<T> =
            mesh.points().iter().copied().filter(|&p| lo <= p && p <= hi).collect();
        pts.push(c);
        pts.extend_from_slice(targets);
        pts.extend_from_slice(extra);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }

    fn cell_densities(&self, a: T, b: T) -> (T, T) {
        let mid = (a + b) * T::of(0.5);
        (self.coeffs.omega.density_at(mid), self.coeffs.upsilon.density_at(mid))
    }

    /// March the homogeneous equation from `(c, d1, d2)` over the stations.
    pub(crate) fn profile(
        &self,
        z: Complex<T>,
        c: T,
        d1: Complex<T>,
        d2: Complex<T>,
        stations: Vec<T>,
    ) -> Profile<T> {
        let n = stations.len();
        let mut states = vec![(Complex::new(T::zero(), T::zero()), Complex::new(T::zero(), T::zero())); n];
        let idx = stations
            .binary_search_by(|p| p.partial_cmp(&c).unwrap())
            .expect("base point is a station");
        states[idx] = (d1, d2);
        // Rightward: atom at the current point acts first, then the cell.
        for k in idx..n.saturating_sub(1) {
            let (f, dl) = states[k];
            let dr = dl - self.jump(z, stations[k]) * f;
            let (w, v) = self.cell_densities(stations[k], stations[k + 1]);
            let t = TransferMatrix::piece(z, w, v, stations[k + 1] - stations[k]);
            states[k + 1] = t.apply(f, dr);
        }
        // Leftward: invert the cell, then the atom at the destination.
        for k in (0..idx).rev() {
            let (f, dl) = states[k + 1];
            let (w, v) = self.cell_densities(stations[k], stations[k + 1]);
            let t = TransferMatrix::piece(z, w, v, stations[k + 1] - stations[k]).inverse();
            let (g, dr) = t.apply(f, dl);
            states[k] = (g, dr + self.jump(z, stations[k]) * g);
        }
        Profile { points: stations, states }
    }

    fn frame_at(&self, z: Complex<T>, profile: &Profile<T>, x: T) -> SolutionFrame<T> {
        let (f, dl) = profile.state(x);
        SolutionFrame { x, f, df_left: dl, df_right: dl - self.jump(z, x) * f }
    }

    /// Unique solution with `f(c) = d1`, `f'(c) = d2` (left-continuous
    /// derivative), evaluated at the targets.
    pub fn solve_ivp(
        &self,
        z: Complex<T>,
        c: T,
        d1: Complex<T>,
        d2: Complex<T>,
        targets: &[T],
    ) -> Vec<SolutionFrame<T>> {
        let profile = self.profile(z, c, d1, d2, self.stations(c, targets, &[]));
        targets.iter().map(|&x| self.frame_at(z, &profile, x)).collect()
    }

    /// Variation of constants for the inhomogeneous equation:
    /// `f(x) = d1·θ(x) + d2·φ(x) + ∫_c^x (θ(x)φ(s) - θ(s)φ(x)) dχ(s)`
    /// with the unit-Wronskian pair `θ(c) = 1, θ'(c) = 0`, `φ(c) = 0, φ'(c) = 1`.
    pub fn solve_inhomogeneous(
        &self,
        z: Complex<T>,
        chi: &ComplexMeasure<T>,
        c: T,
        d1: Complex<T>,
        d2: Complex<T>,
        targets: &[T],
    ) -> Vec<SolutionFrame<T>> {
        let one = Complex::new(T::one(), T::zero());
        let zero = Complex::new(T::zero(), T::zero());
        let stations = self.stations(c, targets, &chi.breakpoints());
        let theta = self.profile(z, c, one, zero, stations.clone());
        let phi = self.profile(z, c, zero, one, stations.clone());

        // Cumulative oriented integrals ∫_c^{x_k} θ dχ and ∫_c^{x_k} φ dχ.
        let n = stations.len();
        let idx = theta.index_of(c);
        let mut int_theta = vec![zero; n];
        let mut int_phi = vec![zero; n];
        let cell = |k: usize| -> (Complex<T>, Complex<T>) {
            // ∫ over the open cell (x_k, x_{k+1}) against the χ density.
            let (a, b) = (stations[k], stations[k + 1]);
            let mut rho = zero;
            for &(l, r, d) in &chi.pieces {
                let mid = (a + b) * T::of(0.5);
                if l <= mid && mid < r {
                    rho = d;
                }
            }
            if rho == zero {
                return (zero, zero);
            }
            let (w, v) = self.cell_densities(a, b);
            let ksq = kappa_sq(z, w, v);
            let dx = b - a;
            let (ic, is) = cell_basis_integrals(ksq * (dx * dx), dx);
            let jt = self.jump(z, a);
            let (tf, tdl) = theta.states[k];
            let (pf, pdl) = phi.states[k];
            (
                rho * (tf * ic + (tdl - jt * tf) * is),
                rho * (pf * ic + (pdl - jt * pf) * is),
            )
        };
        for k in idx..n - 1 {
            let p = stations[k];
            let chi_p = chi_mass(chi, p);
            let (tc, pc) = cell(k);
            int_theta[k + 1] = int_theta[k] + theta.states[k].0 * chi_p + tc;
            int_phi[k + 1] = int_phi[k] + phi.states[k].0 * chi_p + pc;
        }
        for k in (0..idx).rev() {
            let p = stations[k];
            let chi_p = chi_mass(chi, p);
            let (tc, pc) = cell(k);
            int_theta[k] = int_theta[k + 1] - theta.states[k].0 * chi_p - tc;
            int_phi[k] = int_phi[k + 1] - phi.states[k].0 * chi_p - pc;
        }

        targets
            .iter()
            .map(|&x| {
                let k = theta.index_of(x);
                let (tf, tdl) = theta.states[k];
                let (pf, pdl) = phi.states[k];
                let j = self.jump(z, x);
                let (tdr, pdr) = (tdl - j * tf, pdl - j * pf);
                let f = d1 * tf + d2 * pf + tf * int_phi[k] - pf * int_theta[k];
                let df_left = d1 * tdl + d2 * pdl + tdl * int_phi[k] - pdl * int_theta[k];
                // Right representative: right-continuous θ', φ' and the χ atom at x.
                let chi_x = chi_mass(chi, x);
                let ipr = int_phi[k] + pf * chi_x;
                let itr = int_theta[k] + tf * chi_x;
                let df_right = d1 * tdr + d2 * pdr + tdr * ipr - pdr * itr;
                SolutionFrame { x, f, df_left, df_right }
            })
            .collect()
    }

    /// The pair θ_γ, φ_γ of the angle parameterization.
    pub fn fundamental_pair(
        &self,
        z: Complex<T>,
        base: T,
        angle: T,
        targets: &[T],
    ) -> Result<FundamentalPair<T>> {
        if angle < T::zero() || angle >= T::PI() {
            return Err(Error::invalid(format!("angle {angle} outside [0, π)")));
        }
        let (s, c) = (angle.sin(), angle.cos());
        let phi = self.solve_ivp(z, base, cplx(s), z * c, targets);
        let theta = self.solve_ivp(z, base, cplx(c), -z * s, targets);
        Ok(FundamentalPair { z, base, angle, theta, phi })
    }

    /// Transfer matrix over `[x, y]` mapping `(f(x), f'(x-))` to
    /// `(f(y), f'(y-))`; atoms at `x` (inclusive) up to `y` (exclusive) act.
    pub fn transfer(&self, z: Complex<T>, x: T, y: T) -> TransferMatrix<T> {
        if x == y {
            return TransferMatrix::identity();
        }
        if y < x {
            return self.transfer(z, y, x).inverse();
        }
        let stations = self.stations(x, &[y], &[]);
        let (i0, i1) = (
            stations.binary_search_by(|p| p.partial_cmp(&x).unwrap()).unwrap(),
            stations.binary_search_by(|p| p.partial_cmp(&y).unwrap()).unwrap(),
        );
        let mut acc = TransferMatrix::identity();
        for k in i0..i1 {
            let p = stations[k];
            let atom = TransferMatrix::atom(
                z,
                self.coeffs.omega.mass_at(p),
                self.coeffs.upsilon.mass_at(p),
            );
            let (w, v) = self.cell_densities(stations[k], stations[k + 1]);
            let piece = TransferMatrix::piece(z, w, v, stations[k + 1] - stations[k]);
            acc = piece.compose(&atom).compose(&acc);
        }
        acc
    }
}

fn chi_mass<T: Real>(chi: &ComplexMeasure<T>, p: T) -> Complex<T> {
    for &(x, m) in &chi.atoms {
        if x == p {
            return m;
        }
    }
    Complex::new(T::zero(), T::zero())
}

/// Wronskian `W(a, b) = a.f·b.f' - a.f'·b.f` of two frames at the same point,
/// using the left-continuous representatives (the right ones give the same
/// value).  Constant in `x` for two solutions at the same `z`.
pub fn wronskian<T: Real>(a: &SolutionFrame<T>, b: &SolutionFrame<T>) -> Result<Complex<T>> {
    if a.x != b.x {
        return Err(Error::invalid(format!(
            "wronskian needs frames at equal points, got {} and {}",
            a.x, b.x
        )));
    }
    Ok(a.f * b.df_left - a.df_left * b.f)
}

/// Both sides of the Lagrange identity for the eigen-pairs `(f, z1·f)`,
/// `(g, z2·g)`:
///
/// ```text
/// V(y) - V(x) = (z1-z2)·(¼∫ₓʸ f g ds + ∫ₓʸ f'g' ds + z1·z2·∫ₓʸ f g dυ)
/// ```
///
/// with the modified Wronskian `V = z1·f·g' - z2·f'·g`; returns |LHS - RHS|.
pub fn lagrange_residual<T: Real>(
    coeffs: &Coefficients<T>,
    z1: Complex<T>,
    f_init: (T, Complex<T>, Complex<T>),
    z2: Complex<T>,
    g_init: (T, Complex<T>, Complex<T>),
    x: T,
    y: T,
) -> T {
    let (x, y) = if x <= y { (x, y) } else { (y, x) };
    let prop = Propagator::new(coeffs);
    let mut stations: Vec<T> = vec![x, y, f_init.0, g_init.0];
    let mesh = support_mesh(&coeffs.omega, &coeffs.upsilon, &[]);
    stations.extend(mesh.points().iter().copied());
    stations.sort_by(|a, b| a.partial_cmp(b).unwrap());
    stations.dedup();
    let f = prop.profile(z1, f_init.0, f_init.1, f_init.2, stations.clone());
    let g = prop.profile(z2, g_init.0, g_init.1, g_init.2, stations.clone());

    let v_at = |k: usize| {
        let (fv, fd) = f.states[k];
        let (gv, gd) = g.states[k];
        z1 * fv * gd - z2 * fd * gv
    };
    let (ix, iy) = (f.index_of(x), f.index_of(y));
    let lhs = v_at(iy) - v_at(ix);

    let mut int_fg = Complex::new(T::zero(), T::zero());
    let mut int_dfdg = int_fg;
    let mut int_fg_upsilon = int_fg;
    for k in ix..iy {
        let (a, b) = (stations[k], stations[k + 1]);
        let (w, v) = prop.cell_densities(a, b);
        let k1 = kappa_sq(z1, w, v);
        let k2 = kappa_sq(z2, w, v);
        let jf = prop.jump(z1, a);
        let jg = prop.jump(z2, a);
        let (fv, fd) = f.states[k];
        let (gv, gd) = g.states[k];
        let pi = pair_integrals(
            k1,
            k2,
            b - a,
            CellState { value: fv, deriv: fd - jf * fv },
            CellState { value: gv, deriv: gd - jg * gv },
        );
        int_fg += pi.fg;
        int_dfdg += pi.dfdg;
        int_fg_upsilon += pi.fg * v;
        // υ atom at the cell's left station, [x, y) convention.
        let vm = coeffs.upsilon.mass_at(a);
        int_fg_upsilon += fv * gv * vm;
    }
    let quarter = cplx(T::of(0.25));
    let rhs = (z1 - z2) * (quarter * int_fg + int_dfdg + z1 * z2 * int_fg_upsilon);
    (lhs - rhs).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::CoefficientMeasure;
    use approx::assert_relative_eq;

    type C = Complex<f64>;
    type M = CoefficientMeasure<f64>;

    fn comb(omega: Vec<(f64, f64)>, upsilon: Vec<(f64, f64)>) -> Coefficients<f64> {
        Coefficients::new(
            M::signed(omega, vec![]).unwrap(),
            M::non_negative(upsilon, vec![]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn piece_transfer_at_z_zero() {
        // κ² = ¼ independent of the coefficients.
        let t = TransferMatrix::<f64>::piece(C::new(0.0, 0.0), 3.0, 5.0, 1.0);
        assert_relative_eq!(t.m[0][0].re, 0.5f64.cosh(), max_relative = 1e-15);
        assert_relative_eq!(t.m[0][1].re, 2.0 * 0.5f64.sinh(), max_relative = 1e-15);
        assert_relative_eq!(t.m[1][0].re, 0.5 * 0.5f64.sinh(), max_relative = 1e-15);
        assert_relative_eq!(t.m[1][1].re, 0.5f64.cosh(), max_relative = 1e-15);
    }

    #[test]
    fn piece_transfer_degenerate_shear() {
        // κ² = 0 at z·w = ¼, v = 0.
        let t = TransferMatrix::<f64>::piece(C::new(0.25, 0.0), 1.0, 0.0, 1.5);
        assert_relative_eq!(t.m[0][0].re, 1.0);
        assert_relative_eq!(t.m[0][1].re, 1.5);
        assert!(t.m[1][0].norm() < 1e-16);
        assert_relative_eq!(t.m[1][1].re, 1.0);
    }

    #[test]
    fn piece_transfer_against_ode_integration() {
        // κ² = -3/4 at z = 1, w = 1, v = 0; oracle: fine RK4 on f'' = κ²f.
        let z = C::new(1.0, 0.0);
        let t = TransferMatrix::<f64>::piece(z, 1.0, 0.0, 1.0);
        assert!((t.det() - C::new(1.0, 0.0)).norm() < 1e-13);
        let ksq = -0.75;
        let (mut f, mut df) = (1.0f64, 0.3f64);
        let n = 20_000;
        let h = 1.0 / n as f64;
        for _ in 0..n {
            // Classical RK4 on (f, f')' = (f', κ²f).
            let k1 = (df, ksq * f);
            let k2 = (df + 0.5 * h * k1.1, ksq * (f + 0.5 * h * k1.0));
            let k3 = (df + 0.5 * h * k2.1, ksq * (f + 0.5 * h * k2.0));
            let k4 = (df + h * k3.1, ksq * (f + h * k3.0));
            f += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            df += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        let (gf, gdf) = t.apply(C::new(1.0, 0.0), C::new(0.3, 0.0));
        assert_relative_eq!(gf.re, f, max_relative = 1e-12);
        assert_relative_eq!(gdf.re, df, max_relative = 1e-12);
    }

    #[test]
    fn atom_transfer_values() {
        let t = TransferMatrix::<f64>::atom(C::new(0.0, 0.0), 2.0, 3.0);
        assert!((t.m[1][0]).norm() == 0.0);
        let t = TransferMatrix::<f64>::atom(C::new(1.0, 0.0), 2.0, 0.0);
        assert_relative_eq!(t.m[1][0].re, -2.0);
        let t = TransferMatrix::<f64>::atom(C::new(0.0, 1.0), 0.0, 1.0);
        assert_relative_eq!(t.m[1][0].re, 1.0);
        assert!(t.m[1][0].im.abs() < 1e-16);
    }

    #[test]
    fn ivp_constant_coefficients() {
        // d1 = 0, d2 = z gives f(x) = 2z sinh(x/2).
        let coeffs = Coefficients::zero();
        let prop = Propagator::new(&coeffs);
        for &(re, im) in &[(0.7, 0.0), (1.3, -2.1), (0.0, 0.0)] {
            let z = C::new(re, im);
            let frames = prop.solve_ivp(z, 0.0, C::new(0.0, 0.0), z, &[-1.2, 0.4, 2.0]);
            for fr in frames {
                let expect = z * 2.0 * (fr.x / 2.0).sinh();
                assert!((fr.f - expect).norm() <= 1e-14 * (1.0 + expect.norm()));
                assert_eq!(fr.df_left, fr.df_right);
            }
        }
    }

    #[test]
    fn ivp_atom_jump_matches_hand_computation() {
        // ω = 2δ₀, z = 1: propagate e^{x/2} from c = -1.
        let coeffs = comb(vec![(0.0, 2.0)], vec![]);
        let prop = Propagator::new(&coeffs);
        let d1 = C::new((-0.5f64).exp(), 0.0);
        let d2 = d1 * 0.5;
        let frames = prop.solve_ivp(C::new(1.0, 0.0), -1.0, d1, d2, &[0.0]);
        assert_relative_eq!(frames[0].f.re, 1.0, max_relative = 1e-14);
        assert_relative_eq!(frames[0].df_left.re, 0.5, max_relative = 1e-14);
        assert_relative_eq!(frames[0].df_right.re, -1.5, max_relative = 1e-14);
    }

    #[test]
    fn ivp_z_zero_ignores_coefficients() {
        let coeffs = comb(vec![(0.0, 2.0), (1.0, -1.0)], vec![(0.5, 3.0)]);
        let prop = Propagator::new(&coeffs);
        let c = 0.3;
        let frames = prop.solve_ivp(
            C::new(0.0, 0.0),
            c,
            C::new(1.0, 0.0),
            C::new(-0.5, 0.0),
            &[-2.0, 0.0, 1.7],
        );
        for fr in frames {
            let expect = (-(fr.x - c) / 2.0).exp();
            assert_relative_eq!(fr.f.re, expect, max_relative = 1e-14);
            assert_relative_eq!(fr.df_left.re, -0.5 * expect, max_relative = 1e-14);
        }
    }

    #[test]
    fn inhomogeneous_single_atom() {
        // Zero coefficients, χ = δ₁, zero data: f = 0 left of 1,
        // f(x) = -2 sinh((x-1)/2) to the right, derivative jump -1.
        let coeffs = Coefficients::zero();
        let prop = Propagator::new(&coeffs);
        let chi = ComplexMeasure::new(vec![(1.0, C::new(1.0, 0.0))], vec![]).unwrap();
        let z = C::new(0.8, 0.3);
        let zero = C::new(0.0, 0.0);
        let frames = prop.solve_inhomogeneous(z, &chi, 0.0, zero, zero, &[0.5, 1.0, 2.5]);
        assert!(frames[0].f.norm() < 1e-15);
        assert!(frames[1].f.norm() < 1e-15);
        assert!((frames[1].df_right - frames[1].df_left + C::new(1.0, 0.0)).norm() < 1e-15);
        let expect = -2.0 * (1.5f64 / 2.0).sinh();
        assert_relative_eq!(frames[2].f.re, expect, max_relative = 1e-13);
        assert!(frames[2].f.im.abs() < 1e-15);
    }

    #[test]
    fn inhomogeneous_zero_chi_equals_ivp() {
        let coeffs = comb(vec![(0.0, 1.5), (0.8, -0.7)], vec![(0.3, 2.0)]);
        let prop = Propagator::new(&coeffs);
        let z = C::new(1.1, -0.4);
        let (d1, d2) = (C::new(0.2, 0.5), C::new(-1.0, 0.1));
        let a = prop.solve_ivp(z, 0.1, d1, d2, &[-1.0, 0.5, 2.0]);
        let b = prop.solve_inhomogeneous(z, &ComplexMeasure::zero(), 0.1, d1, d2, &[-1.0, 0.5, 2.0]);
        for (x, y) in a.iter().zip(&b) {
            assert!((x.f - y.f).norm() <= 1e-13 * (1.0 + x.f.norm()));
            assert!((x.df_left - y.df_left).norm() <= 1e-13 * (1.0 + x.df_left.norm()));
        }
    }

    #[test]
    fn inhomogeneous_density_against_quadrature() {
        // Zero coefficients, χ = 1 on [0,1): compare with direct quadrature of
        // the variation-of-constants formula using θ = cosh(x/2), φ = 2sinh(x/2).
        let coeffs = Coefficients::zero();
        let prop = Propagator::new(&coeffs);
        let chi = ComplexMeasure::new(vec![], vec![(0.0, 1.0, C::new(1.0, 0.0))]).unwrap();
        let z = C::new(0.0, 0.0);
        let zero = C::new(0.0, 0.0);
        let x = 2.0;
        let frames = prop.solve_inhomogeneous(z, &chi, 0.0, zero, zero, &[x]);
        let theta = |s: f64| (s / 2.0).cosh();
        let phi = |s: f64| 2.0 * (s / 2.0).sinh();
        // 2000-point midpoint rule is plenty to certify 1e-12 here.
        let n = 200_000;
        let mut quad = 0.0;
        for i in 0..n {
            let s = (i as f64 + 0.5) / n as f64;
            quad += (theta(x) * phi(s) - theta(s) * phi(x)) / n as f64;
        }
        assert_relative_eq!(frames[0].f.re, quad, max_relative = 1e-9);
    }

    #[test]
    fn fundamental_pair_initial_data_and_wronskian() {
        let coeffs = comb(vec![(0.2, 1.0)], vec![(0.9, 0.5)]);
        let prop = Propagator::new(&coeffs);
        let z = C::new(0.7, 1.1);
        let pair = prop.fundamental_pair(z, 0.4, std::f64::consts::FRAC_PI_2, &[0.4, 1.5]).unwrap();
        assert!((pair.phi[0].f - C::new(1.0, 0.0)).norm() < 1e-15);
        assert!(pair.phi[0].df_left.norm() < 1e-15);
        let w = wronskian(&pair.theta[0], &pair.phi[0]).unwrap();
        assert!((w - z).norm() < 1e-14 * (1.0 + z.norm()));
        // Constancy away from the base point.
        let w1 = wronskian(&pair.theta[1], &pair.phi[1]).unwrap();
        assert!((w1 - z).norm() < 1e-13 * (1.0 + z.norm()));
    }

    #[test]
    fn fundamental_pair_zero_coefficients_explicit() {
        let coeffs = Coefficients::zero();
        let prop = Propagator::new(&coeffs);
        let z = C::new(1.4, -0.6);
        let (base, len) = (0.3, 1.9);
        let pair = prop.fundamental_pair(z, base, 0.0, &[base + len]).unwrap();
        let phi_exp = z * 2.0 * (len / 2.0).sinh();
        let theta_exp = C::new((len / 2.0).cosh(), 0.0);
        assert!((pair.phi[0].f - phi_exp).norm() < 1e-14 * (1.0 + phi_exp.norm()));
        assert!((pair.theta[0].f - theta_exp).norm() < 1e-14 * (1.0 + theta_exp.norm()));
    }

    #[test]
    fn wronskian_mismatched_points_errors() {
        let a = SolutionFrame { x: 0.0, f: C::new(1.0, 0.0), df_left: C::new(0.0, 0.0), df_right: C::new(0.0, 0.0) };
        let b = SolutionFrame { x: 1.0, ..a };
        assert!(wronskian(&a, &b).is_err());
    }

    #[test]
    fn wronskian_constancy_on_random_combs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(1..=5);
            let mut om = vec![];
            let mut up = vec![];
            for i in 0..n {
                let x = -2.0 + 4.0 * (i as f64 + rng.gen::<f64>() * 0.8) / n as f64;
                om.push((x, rng.gen_range(-2.0..2.0)));
                if rng.gen_bool(0.5) {
                    up.push((x, rng.gen_range(0.0..2.0)));
                }
            }
            let coeffs = comb(om, up);
            let prop = Propagator::new(&coeffs);
            let z = C::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let targets: Vec<f64> = (0..8).map(|k| -3.0 + k as f64 * 0.9).collect();
            let a = prop.solve_ivp(z, 0.0, C::new(0.3, 0.1), C::new(-0.2, 0.9), &targets);
            let b = prop.solve_ivp(z, 0.0, C::new(1.1, -0.4), C::new(0.6, 0.2), &targets);
            let w0 = wronskian(&a[0], &b[0]).unwrap();
            for k in 1..targets.len() {
                let wk = wronskian(&a[k], &b[k]).unwrap();
                assert!((wk - w0).norm() <= 1e-12 * w0.norm(), "{wk} vs {w0}");
            }
        }
    }

    #[test]
    fn lagrange_identity_residuals() {
        // Equal parameters: both sides vanish identically.
        let coeffs = comb(vec![(0.0, 1.0)], vec![]);
        let z = C::new(1.3, 0.4);
        let r = lagrange_residual(
            &coeffs,
            z,
            (0.0, C::new(1.0, 0.0), C::new(0.2, 0.0)),
            z,
            (0.0, C::new(0.4, 0.1), C::new(1.0, 0.0)),
            -2.0,
            2.0,
        );
        assert!(r < 1e-13);

        // Zero coefficients, distinct z.
        let zero = Coefficients::zero();
        let r = lagrange_residual(
            &zero,
            C::new(1.0, 0.0),
            (0.0, C::new(1.0, 0.0), C::new(0.0, 0.0)),
            C::new(2.0, 0.0),
            (0.0, C::new(0.0, 0.0), C::new(1.0, 0.0)),
            -1.5,
            2.5,
        );
        assert!(r < 1e-12);

        // One-atom problem with the window endpoint on the atom.
        let r = lagrange_residual(
            &coeffs,
            C::new(1.0, 0.0),
            (-1.0, C::new(1.0, 0.0), C::new(0.5, 0.0)),
            C::new(2.0, 0.0),
            (-1.0, C::new(1.0, 0.0), C::new(0.5, 0.0)),
            0.0,
            1.0,
        );
        assert!(r < 1e-10);
    }

    #[test]
    fn transfer_composition_and_unimodularity() {
        let coeffs = comb(vec![(-0.5, 1.2), (0.7, -0.8)], vec![(0.0, 0.6)]);
        let prop = Propagator::new(&coeffs);
        let z = C::new(0.9, -1.4);
        let full = prop.transfer(z, -1.0, 2.0);
        let split = prop.transfer(z, 0.3, 2.0).compose(&prop.transfer(z, -1.0, 0.3));
        for i in 0..2 {
            for j in 0..2 {
                assert!((full.m[i][j] - split.m[i][j]).norm() <= 1e-13 * (1.0 + full.m[i][j].norm()));
            }
        }
        assert!((full.det() - C::new(1.0, 0.0)).norm() < 1e-13);
        let inv = full.inverse().compose(&full);
        assert!((inv.m[0][0] - C::new(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn realness_of_real_data() {
        let coeffs = comb(vec![(0.0, -1.3), (1.1, 0.8)], vec![(0.4, 1.7)]);
        let prop = Propagator::new(&coeffs);
        let frames = prop.solve_ivp(
            C::new(1.7, 0.0),
            -0.5,
            C::new(0.3, 0.0),
            C::new(-0.9, 0.0),
            &[-2.0, 0.0, 0.4, 3.0],
        );
        for fr in frames {
            assert_eq!(fr.f.im, 0.0);
            assert_eq!(fr.df_left.im, 0.0);
        }
    }

    #[test]
    fn entirety_cauchy_circle_average() {
        // f(x) at z₀ equals the average over a small circle of z values.
        let coeffs = comb(vec![(0.0, 1.0), (0.9, -0.5)], vec![(0.5, 0.7)]);
        let prop = Propagator::new(&coeffs);
        let z0 = C::new(0.4, 0.2);
        let x = 1.7;
        let value = |z: C| prop.solve_ivp(z, -0.3, C::new(1.0, 0.0), C::new(0.5, 0.0), &[x])[0].f;
        let center = value(z0);
        let n = 24;
        let mut avg = C::new(0.0, 0.0);
        for k in 0..n {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            avg += value(z0 + C::new(0.5 * th.cos(), 0.5 * th.sin()));
        }
        avg /= n as f64;
        assert!((avg - center).norm() <= 1e-8 * (1.0 + center.norm()));
    }

    #[test]
    fn ivp_works_in_f32() {
        let coeffs = Coefficients::<f32>::new(
            CoefficientMeasure::dirac(0.0f32, 2.0, true).unwrap(),
            CoefficientMeasure::zero(false),
        )
        .unwrap();
        let prop = Propagator::new(&coeffs);
        let t = prop.transfer(Complex::new(0.5f32, 0.0), -1.0, 1.0);
        assert!((t.det() - Complex::new(1.0f32, 0.0)).norm() < 1e-5);
    }
}
