//! Semi-axis and whole-line spectral theory for compactly supported
//! coefficients: Weyl solutions, Weyl–Titchmarsh functions, the singular
//! Weyl function, eigenvalues, the spectral measure, and the generalized
//! Fourier transform with its Parseval identity.
//!
//! Outside the support every solution is a combination of `e^{±x/2}`, so the
//! Weyl solutions are constructed by prescribing the decaying exponential as
//! the exact tail and propagating inward; all integrals over the line reduce
//! to closed-form segment integrals plus explicit tail terms.

use crate::entire::{pair_integrals, CellState};
use crate::error::{Error, Result};
use crate::measure::{Coefficients, Mesh};
use crate::propagate::{kappa_sq, Propagator, SolutionFrame};
use crate::scalar::{cplx, Real};
use crate::scan::find_real_zeros;
use num_complex::Complex;

/// Which infinite endpoint a half-line object is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// One point of the spectral measure: an eigenvalue and its mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDatum<T: Real> {
    pub lambda: T,
    pub mass: T,
}

/// Weyl solution ψ_±: the solution lying in the Hilbert space near ±∞,
/// normalized so the tail is exactly `e^{∓x/2}` outside the support.
#[derive(Debug, Clone)]
pub struct WeylSolution<T: Real> {
    pub side: Side,
    pub z: Complex<T>,
    /// Frames at the support mesh points (a single anchor if the support is empty).
    pub frames: Vec<SolutionFrame<T>>,
    /// Interval outside of which the tail law holds.
    pub support: (T, T),
}

/// Whole-line problem with compactly supported coefficients.
#[derive(Debug, Clone)]
pub struct LineProblem<T: Real> {
    coeffs: Coefficients<T>,
}

/// The point-evaluation element `δ_c = (e^{-|x-c|/2}, 0)`.
pub fn delta_element<T: Real>(c: T) -> HilbertElement<T> {
    HilbertElement {
        breakpoints: vec![c],
        segments: Vec::new(),
        left_tail: Complex::new(T::one(), T::zero()),
        right_tail: Complex::new(T::one(), T::zero()),
        second: Vec::new(),
    }
}

/// Element of `H¹(ℝ) × L²(υ)`: a continuous piecewise-exponential first
/// component (rates ±½) with decaying or zero tails, and values on the atoms
/// of υ as the second component.
#[derive(Debug, Clone)]
pub struct HilbertElement<T: Real> {
    /// Breakpoints x₀ < … < x_m.
    breakpoints: Vec<T>,
    /// On `[x_i, x_{i+1}]`: `f(x) = p_i e^{(x-x_i)/2} + q_i e^{-(x-x_i)/2}`.
    segments: Vec<(Complex<T>, Complex<T>)>,
    /// `f(x) = L e^{(x-x₀)/2}` for x ≤ x₀.
    left_tail: Complex<T>,
    /// `f(x) = R e^{-(x-x_m)/2}` for x ≥ x_m.
    right_tail: Complex<T>,
    /// Second component values at υ-atom positions (missing = 0).
    second: Vec<(T, Complex<T>)>,
}

#[derive(Debug, Clone, Copy)]
enum Region {
    LeftTail,
    Segment(usize),
    RightTail,
}

impl<T: Real> HilbertElement<T> {
    pub fn from_segments(
        breakpoints: Vec<T>,
        segments: Vec<(Complex<T>, Complex<T>)>,
        left_tail: Complex<T>,
        right_tail: Complex<T>,
        second: Vec<(T, Complex<T>)>,
    ) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::invalid("element needs at least one breakpoint"));
        }
        if segments.len() + 1 != breakpoints.len() {
            return Err(Error::invalid("need one segment per breakpoint pair"));
        }
        for w in breakpoints.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::invalid("breakpoints must be strictly increasing"));
            }
        }
        let el = HilbertElement { breakpoints, segments, left_tail, right_tail, second };
        // Continuity of the first component.
        let mut prev = el.left_tail;
        for i in 0..el.segments.len() + 1 {
            let here = if i < el.segments.len() {
                el.segments[i].0 + el.segments[i].1
            } else {
                el.right_tail
            };
            let scale = T::one() + prev.norm() + here.norm();
            if (here - prev).norm() > T::of(1e-9) * scale {
                return Err(Error::invalid(format!(
                    "discontinuous first component at breakpoint {}",
                    el.breakpoints[i]
                )));
            }
            if i < el.segments.len() {
                let (p, q) = el.segments[i];
                let d = el.breakpoints[i + 1] - el.breakpoints[i];
                let half = T::of(0.5);
                prev = p * (d * half).exp() + q * (-d * half).exp();
            }
        }
        Ok(el)
    }

    /// Compactly supported exponential spline through real nodal values
    /// (first and last value must be zero).
    pub fn from_node_values(breakpoints: Vec<T>, values: Vec<T>, second: Vec<(T, Complex<T>)>) -> Result<Self> {
        if breakpoints.len() != values.len() || breakpoints.len() < 2 {
            return Err(Error::invalid("need matching breakpoints and values, at least two"));
        }
        if values[0] != T::zero() || *values.last().unwrap() != T::zero() {
            return Err(Error::invalid("compact support requires zero endpoint values"));
        }
        let zero = Complex::new(T::zero(), T::zero());
        let half = T::of(0.5);
        let mut segments = Vec::new();
        for i in 0..breakpoints.len() - 1 {
            let d = breakpoints[i + 1] - breakpoints[i];
            let (u, v) = (values[i], values[i + 1]);
            let (ep, em) = ((d * half).exp(), (-d * half).exp());
            let p = (v - u * em) / (ep - em);
            let q = u - p;
            segments.push((cplx(p), cplx(q)));
        }
        let mut el = HilbertElement {
            breakpoints,
            segments,
            left_tail: zero,
            right_tail: zero,
            second,
        };
        el.second.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(el)
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    fn region_of(&self, x: T) -> Region {
        if x < self.breakpoints[0] {
            return Region::LeftTail;
        }
        if x >= *self.breakpoints.last().unwrap() {
            if self.segments.is_empty() || x > *self.breakpoints.last().unwrap() {
                return Region::RightTail;
            }
        }
        for i in (0..self.segments.len()).rev() {
            if x >= self.breakpoints[i] {
                return Region::Segment(i);
            }
        }
        Region::RightTail
    }

    /// (p, q) relative to `origin` for the region containing `probe`.
    fn rep_at(&self, origin: T, probe: T) -> (Complex<T>, Complex<T>) {
        let half = T::of(0.5);
        let zero = Complex::new(T::zero(), T::zero());
        match self.region_of(probe) {
            Region::LeftTail => {
                let shift = ((origin - self.breakpoints[0]) * half).exp();
                (self.left_tail * shift, zero)
            }
            Region::RightTail => {
                let shift = ((*self.breakpoints.last().unwrap() - origin) * half).exp();
                (zero, self.right_tail * shift)
            }
            Region::Segment(i) => {
                let (p, q) = self.segments[i];
                let d = origin - self.breakpoints[i];
                (p * (d * half).exp(), q * (-d * half).exp())
            }
        }
    }

    /// First component value.
    pub fn value_at(&self, x: T) -> Complex<T> {
        let (p, q) = self.rep_at(x, x);
        p + q
    }

    /// Second component value at a υ atom (0 when absent).
    pub fn second_at(&self, x: T) -> Complex<T> {
        for &(p, v) in &self.second {
            if p == x {
                return v;
            }
        }
        Complex::new(T::zero(), T::zero())
    }

    pub fn conjugated(&self) -> Self {
        HilbertElement {
            breakpoints: self.breakpoints.clone(),
            segments: self.segments.iter().map(|&(p, q)| (p.conj(), q.conj())).collect(),
            left_tail: self.left_tail.conj(),
            right_tail: self.right_tail.conj(),
            second: self.second.iter().map(|&(x, v)| (x, v.conj())).collect(),
        }
    }
}

/// A function on a mesh given per cell by `f'' = κ²f` data, with explicit
/// `(p, q)` exponential coefficients on both tails.
pub(crate) struct LineFn<T: Real> {
    pub(crate) points: Vec<T>,
    pub(crate) values: Vec<Complex<T>>,
    pub(crate) cells: Vec<(Complex<T>, CellState<T>)>,
    pub(crate) p_left: Complex<T>,
    #[allow(dead_code)]
    pub(crate) q_left: Complex<T>,
    pub(crate) q_right: Complex<T>,
    #[allow(dead_code)]
    pub(crate) p_right: Complex<T>,
}

impl<T: Real> LineProblem<T> {
    pub fn new(coeffs: Coefficients<T>) -> Result<Self> {
        Ok(LineProblem { coeffs })
    }

    pub fn coefficients(&self) -> &Coefficients<T> {
        &self.coeffs
    }

    fn support_or_origin(&self) -> (T, T) {
        self.coeffs.support().unwrap_or((T::zero(), T::zero()))
    }

    fn mesh_with(&self, extra: &[T]) -> Vec<T> {
        let mesh: Mesh<T> =
            crate::measure::support_mesh(&self.coeffs.omega, &self.coeffs.upsilon, extra);
        if mesh.is_empty() {
            vec![T::zero()]
        } else {
            mesh.points().to_vec()
        }
    }

    /// Support mesh (a single origin point for empty coefficients).
    pub(crate) fn mesh_points(&self) -> Vec<T> {
        self.mesh_with(&[])
    }

    /// Frames of ψ_side at the given targets (tail coefficient 1).
    pub(crate) fn weyl_frames(&self, z: Complex<T>, side: Side, targets: &[T]) -> Vec<SolutionFrame<T>> {
        let (lo, hi) = self.support_or_origin();
        let prop = Propagator::new(&self.coeffs);
        let half = T::of(0.5);
        match side {
            Side::Plus => {
                // f = e^{-x/2} for x ≥ hi; seed the left-continuous state at hi.
                let f = cplx((-hi * half).exp());
                let df_right = -f * half;
                let jump = z * self.coeffs.omega.mass_at(hi) + z * z * self.coeffs.upsilon.mass_at(hi);
                prop.solve_ivp(z, hi, f, df_right + jump * f, targets)
            }
            Side::Minus => {
                // f = e^{x/2} for x ≤ lo; the atom at lo acts only to its right.
                let f = cplx((lo * half).exp());
                prop.solve_ivp(z, lo, f, f * half, targets)
            }
        }
    }

    /// θ-frames: tail `e^{x/2}` to the right of the support, so `W(φ, θ) = 1`
    /// with φ = ψ₊ for every z.
    fn theta_frames(&self, z: Complex<T>, targets: &[T]) -> Vec<SolutionFrame<T>> {
        let (_, hi) = self.support_or_origin();
        let prop = Propagator::new(&self.coeffs);
        let half = T::of(0.5);
        let f = cplx((hi * half).exp());
        let df_right = f * half;
        let jump = z * self.coeffs.omega.mass_at(hi) + z * z * self.coeffs.upsilon.mass_at(hi);
        prop.solve_ivp(z, hi, f, df_right + jump * f, targets)
    }

    /// Weyl solution with frames on the support mesh.
    pub fn weyl_solution(&self, z: Complex<T>, side: Side) -> WeylSolution<T> {
        let mesh = self.mesh_with(&[]);
        WeylSolution {
            side,
            z,
            frames: self.weyl_frames(z, side, &mesh),
            support: self.support_or_origin(),
        }
    }

    /// Half-line Weyl–Titchmarsh function `m_{γ,±}` at base point `c`:
    /// `±m = (zψ sin γ + ψ' cos γ)/(zψ cos γ - ψ' sin γ)` with ψ = ψ_±.
    pub fn m_halfline(&self, z: Complex<T>, c: T, gamma: T, side: Side) -> Result<Complex<T>> {
        if !(T::zero() <= gamma && gamma < T::PI()) {
            return Err(Error::invalid(format!("gamma = {gamma} outside [0, π)")));
        }
        if z.norm() == T::zero() {
            return Err(Error::SingularParameter("m is not defined at z = 0".into()));
        }
        let fr = &self.weyl_frames(z, side, &[c])[0];
        let (s, co) = (gamma.sin(), gamma.cos());
        let num = z * fr.f * s + fr.df_left * co;
        let den = z * fr.f * co - fr.df_left * s;
        if den.norm() <= T::of(1e-13) * (z * fr.f).norm().max(fr.df_left.norm()) {
            return Err(Error::SingularParameter(format!("{z} is an eigenvalue of the half-line relation")));
        }
        let ratio = num / den;
        Ok(match side {
            Side::Plus => ratio,
            Side::Minus => -ratio,
        })
    }

    /// Singular Weyl function `M(z) = W(ψ₋, θ)/W(φ, ψ₋)` with the real entire
    /// system φ = ψ₊ (tail `e^{-x/2}`), θ (tail `e^{x/2}`), `W(φ, θ) = 1`.
    pub fn singular_m(&self, z: Complex<T>) -> Result<Complex<T>> {
        self.singular_m_scaled(z, T::one())
    }

    /// `M` for the rescaled system `φ̃ = s·φ`, `θ̃ = θ/s` (still `W(φ̃, θ̃) = 1`).
    pub fn singular_m_scaled(&self, z: Complex<T>, scale: T) -> Result<Complex<T>> {
        if scale == T::zero() {
            return Err(Error::invalid("normalization scale must be nonzero"));
        }
        if z.norm() == T::zero() {
            // 0 is in the resolvent set for compactly supported coefficients
            // and the normalization forces M(0) = 0.
            return Ok(Complex::new(T::zero(), T::zero()));
        }
        let (_, hi) = self.support_or_origin();
        let psi = &self.weyl_frames(z, Side::Minus, &[hi])[0];
        let phi = &self.weyl_frames(z, Side::Plus, &[hi])[0];
        let theta = &self.theta_frames(z, &[hi])[0];
        let w_phi_psi = crate::propagate::wronskian(phi, psi)?;
        let scale_w = phi.f.norm().max(psi.f.norm()) + phi.df_left.norm().max(psi.df_left.norm());
        if w_phi_psi.norm() <= T::of(1e-13) * scale_w * scale_w.max(T::one()) {
            return Err(Error::SingularParameter(format!("{z} is an eigenvalue")));
        }
        let w_psi_theta = crate::propagate::wronskian(psi, theta)?;
        let s2 = scale * scale;
        Ok(w_psi_theta / w_phi_psi / s2)
    }

    /// Entire function whose real zeros are the whole-line eigenvalues.
    pub fn eigenvalue_function(&self, z: Complex<T>) -> Complex<T> {
        let (_, hi) = self.support_or_origin();
        let psi_p = &self.weyl_frames(z, Side::Plus, &[hi])[0];
        let psi_m = &self.weyl_frames(z, Side::Minus, &[hi])[0];
        crate::propagate::wronskian(psi_p, psi_m).expect("same point")
    }

    /// Whole-line eigenvalues in the window (simple, real); certified by the
    /// argument principle.
    pub fn eigenvalues(&self, window: Option<(T, T)>) -> Result<Vec<T>> {
        let (lo, hi) = match window {
            Some(w) => w,
            None => self.default_window()?,
        };
        let f = |z: Complex<T>| self.eigenvalue_function(z);
        let n_atoms = self.coeffs.atom_positions().len();
        let width = num_traits::cast::<T, f64>(hi - lo).unwrap_or(1.0);
        let samples = ((8 * (2 * n_atoms + 2)) as f64 * width.max(1.0)).ceil() as usize;
        find_real_zeros(&f, lo, hi, samples, 0)
    }

    /// Window from the Galerkin oracle radius plus one (atomic coefficients).
    pub fn default_window(&self) -> Result<(T, T)> {
        let r = crate::pencil::spectral_radius(&self.coeffs, crate::pencil::PencilGeometry::WholeLine)?
            + T::one();
        Ok((-r, r))
    }

    pub(crate) fn line_fn_from_profile(
        &self,
        z: Complex<T>,
        frames: &[SolutionFrame<T>],
        points: &[T],
    ) -> LineFn<T> {
        let half = T::of(0.5);
        let n = points.len();
        let values: Vec<Complex<T>> = frames.iter().map(|f| f.f).collect();
        let mut cells = Vec::with_capacity(n.saturating_sub(1));
        for k in 0..n - 1 {
            let mid = (points[k] + points[k + 1]) * half;
            let w = self.coeffs.omega.density_at(mid);
            let v = self.coeffs.upsilon.density_at(mid);
            cells.push((
                kappa_sq(z, w, v),
                CellState { value: frames[k].f, deriv: frames[k].df_right },
            ));
        }
        LineFn {
            points: points.to_vec(),
            p_left: values[0] * half + frames[0].df_left,
            q_left: values[0] * half - frames[0].df_left,
            q_right: values[n - 1] * half - frames[n - 1].df_right,
            p_right: values[n - 1] * half + frames[n - 1].df_right,
            values,
            cells,
        }
    }

    fn line_fn_from_element(&self, el: &HilbertElement<T>, points: &[T]) -> LineFn<T> {
        let half = T::of(0.5);
        let quarter = cplx(T::of(0.25));
        let n = points.len();
        let values: Vec<Complex<T>> = points.iter().map(|&x| el.value_at(x)).collect();
        let mut cells = Vec::with_capacity(n - 1);
        for k in 0..n - 1 {
            let mid = (points[k] + points[k + 1]) * half;
            let (p, q) = el.rep_at(points[k], mid);
            cells.push((
                quarter,
                CellState { value: p + q, deriv: (p - q) * half },
            ));
        }
        let (pl, ql) = el.rep_at(points[0], points[0] - T::one());
        let (pr, qr) = el.rep_at(points[n - 1], points[n - 1] + T::one());
        LineFn { points: points.to_vec(), values, cells, p_left: pl, q_left: ql, q_right: qr, p_right: pr }
    }

    /// `¼∫fg + ∫f'g'` over the mesh plus the requested tails.  A tail term is
    /// `½·p·p` (left) or `½·q·q` (right); it is the exact value of the tail
    /// integral whenever the product has no growing part there.
    pub(crate) fn h1_pairing(
        a: &LineFn<T>,
        b: &LineFn<T>,
        left_tail: bool,
        right_tail: bool,
    ) -> Complex<T> {
        let quarter = cplx(T::of(0.25));
        let half = cplx(T::of(0.5));
        let mut acc = Complex::new(T::zero(), T::zero());
        for k in 0..a.cells.len() {
            let d = a.points[k + 1] - a.points[k];
            let pi = pair_integrals(a.cells[k].0, b.cells[k].0, d, a.cells[k].1, b.cells[k].1);
            acc += quarter * pi.fg + pi.dfdg;
        }
        if left_tail {
            acc += half * a.p_left * b.p_left;
        }
        if right_tail {
            acc += half * a.q_right * b.q_right;
        }
        acc
    }

    /// `∫ f g dυ` over cells (density part only), same mesh.
    pub(crate) fn upsilon_density_pairing(&self, a: &LineFn<T>, b: &LineFn<T>) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        if self.coeffs.upsilon.is_atomic() {
            return acc;
        }
        let half = T::of(0.5);
        for k in 0..a.cells.len() {
            let mid = (a.points[k] + a.points[k + 1]) * half;
            let v = self.coeffs.upsilon.density_at(mid);
            if v != T::zero() {
                let d = a.points[k + 1] - a.points[k];
                let pi = pair_integrals(a.cells[k].0, b.cells[k].0, d, a.cells[k].1, b.cells[k].1);
                acc += pi.fg * v;
            }
        }
        acc
    }

    /// Norming constant: `μ({λ₀})⁻¹ = ¼∫φ² + ∫(φ')² + λ₀²∫φ² dυ` for the
    /// tail-normalized real entire solution φ at an eigenvalue λ₀.
    pub fn norming_constant(&self, lambda0: T) -> Result<T> {
        let z = Complex::new(lambda0, T::zero());
        let w = self.eigenvalue_function(z);
        let h = T::of(1e-6) * (T::one() + lambda0.abs());
        let dw = (self.eigenvalue_function(cplx(lambda0 + h))
            - self.eigenvalue_function(cplx(lambda0 - h)))
        .norm()
            / (h + h);
        if w.norm() > T::of(1e-7) * (T::one() + dw * (T::one() + lambda0.abs())) {
            return Err(Error::Precondition(format!("{lambda0} is not an eigenvalue")));
        }
        let points = self.mesh_with(&[]);
        let frames = self.weyl_frames(z, Side::Plus, &points);
        let phi = self.line_fn_from_profile(z, &frames, &points);
        let mut inv = Self::h1_pairing(&phi, &phi, true, true);
        // υ terms: atoms plus density pieces, weighted by λ₀².
        let z2 = z * z;
        for &(q, v) in self.coeffs.upsilon.atoms() {
            let val = phi.values[index_of(&points, q)];
            inv += z2 * v * val * val;
        }
        inv += z2 * self.upsilon_density_pairing(&phi, &phi);
        let mass = T::one() / inv.re;
        if !(mass > T::zero()) {
            return Err(Error::NonConvergence(format!("non-positive norming mass at {lambda0}")));
        }
        Ok(mass)
    }

    /// Spectral measure: eigenvalues with their norming-constant masses.
    pub fn spectral_measure(&self, window: Option<(T, T)>) -> Result<Vec<SpectralDatum<T>>> {
        self.eigenvalues(window)?
            .into_iter()
            .map(|lambda| Ok(SpectralDatum { lambda, mass: self.norming_constant(lambda)? }))
            .collect()
    }

    /// `-Res_{z=λ₀} M(z)/z` by 64-point trapezoid quadrature on a circle of
    /// radius 1e-3; equals the spectral mass at λ₀.
    pub fn residue_mass(&self, lambda0: T) -> Result<T> {
        let n = 64;
        let r = T::of(1e-3);
        let mut acc = Complex::new(T::zero(), T::zero());
        for k in 0..n {
            let th = T::of(2.0) * T::PI() * T::of(k as f64) / T::of(n as f64);
            let dir = Complex::new(th.cos(), th.sin());
            let z = cplx(lambda0) + dir * r;
            acc += self.singular_m(z)? / z * dir;
        }
        Ok(-(acc * r / T::of(n as f64)).re)
    }

    fn require_atomic_upsilon(&self) -> Result<()> {
        if !self.coeffs.upsilon.is_atomic() {
            return Err(Error::Precondition(
                "Hilbert-space element operations require atomic υ".into(),
            ));
        }
        Ok(())
    }

    /// Generalized Fourier transform
    /// `f̂(z) = ¼∫φ f₁ + ∫φ' f₁' + z∫φ f₂ dυ` with φ the tail-normalized
    /// real entire solution.  Exact for elements with decaying tails.
    pub fn transform(&self, f: &HilbertElement<T>, z: Complex<T>) -> Result<Complex<T>> {
        self.require_atomic_upsilon()?;
        let mut extra = f.breakpoints.to_vec();
        extra.extend(self.mesh_with(&[]));
        extra.sort_by(|a, b| a.partial_cmp(b).unwrap());
        extra.dedup();
        let points = extra;
        let frames = self.weyl_frames(z, Side::Plus, &points);
        let phi = self.line_fn_from_profile(z, &frames, &points);
        let fel = self.line_fn_from_element(f, &points);
        let mut acc = Self::h1_pairing(&phi, &fel, true, true);
        for &(q, v) in self.coeffs.upsilon.atoms() {
            acc += z * v * phi.values[index_of(&points, q)] * f.second_at(q);
        }
        Ok(acc)
    }

    /// `⟨f, g⟩` in `H¹(ℝ) × L²(υ)` (antilinear in `g`).
    pub fn inner(&self, f: &HilbertElement<T>, g: &HilbertElement<T>) -> Result<Complex<T>> {
        self.require_atomic_upsilon()?;
        let g = g.conjugated();
        let mut points = f.breakpoints.to_vec();
        points.extend_from_slice(&g.breakpoints);
        points.extend(self.mesh_with(&[]));
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        points.dedup();
        let fa = self.line_fn_from_element(f, &points);
        let fb = self.line_fn_from_element(&g, &points);
        let mut acc = Self::h1_pairing(&fa, &fb, true, true);
        for &(q, v) in self.coeffs.upsilon.atoms() {
            acc += f.second_at(q) * g.second_at(q) * v;
        }
        Ok(acc)
    }

    /// `‖Pf‖²` for the projection onto the closed span of the δ-elements at
    /// the support atoms times `L²(υ)`:
    /// `v* G⁻¹ v + ‖f₂‖²` with `G_ij = e^{-|x_i - x_j|/2}`.
    pub fn projection_norm_sq(&self, f: &HilbertElement<T>) -> Result<T> {
        self.require_atomic_upsilon()?;
        if !self.coeffs.omega.is_atomic() {
            return Err(Error::Precondition("projection requires atomic coefficients".into()));
        }
        let sites = self.coeffs.atom_positions();
        let half = T::of(0.5);
        let mut total = T::zero();
        if !sites.is_empty() {
            let n = sites.len();
            let g: Vec<Vec<T>> = (0..n)
                .map(|i| (0..n).map(|j| (-(sites[i] - sites[j]).abs() * half).exp()).collect())
                .collect();
            let v: Vec<Complex<T>> = sites.iter().map(|&x| f.value_at(x)).collect();
            let y = spd_solve(&g, &v)?;
            for i in 0..n {
                total = total + (v[i].conj() * y[i]).re;
            }
        }
        for &(q, v) in self.coeffs.upsilon.atoms() {
            total = total + v * f.second_at(q).norm_sqr();
        }
        Ok(total)
    }

    /// Parseval pair: `(Σ|f̂(λᵢ)|²μᵢ, ‖Pf‖²)`.
    pub fn parseval(&self, f: &HilbertElement<T>, spectral: &[SpectralDatum<T>]) -> Result<(T, T)> {
        let mut lhs = T::zero();
        for d in spectral {
            let v = self.transform(f, cplx(d.lambda))?;
            lhs = lhs + v.norm_sqr() * d.mass;
        }
        Ok((lhs, self.projection_norm_sq(f)?))
    }

    /// The eigen-element `Φ = (φ(λ₀,·), λ₀ φ(λ₀,·))` as a Hilbert element
    /// (atomic coefficients only; tails are the exact exponentials).
    pub fn eigen_element(&self, lambda0: T) -> Result<HilbertElement<T>> {
        if !self.coeffs.is_atomic() {
            return Err(Error::Precondition("eigen elements require atomic coefficients".into()));
        }
        let z = cplx(lambda0);
        let points = self.mesh_with(&[]);
        let frames = self.weyl_frames(z, Side::Plus, &points);
        let half = T::of(0.5);
        let mut segments = Vec::new();
        for k in 0..points.len() - 1 {
            let f = &frames[k];
            let p = f.f * half + f.df_right;
            let q = f.f * half - f.df_right;
            segments.push((p, q));
        }
        let first = &frames[0];
        let last = frames.last().unwrap();
        let second = self
            .coeffs
            .upsilon
            .atoms()
            .iter()
            .map(|&(q, _)| (q, z * frames[index_of(&points, q)].f))
            .collect();
        HilbertElement::from_segments(
            points,
            segments,
            first.f * half + first.df_left,
            last.f * half - last.df_right,
            second,
        )
    }
}

fn index_of<T: Real>(points: &[T], x: T) -> usize {
    points.binary_search_by(|p| p.partial_cmp(&x).unwrap()).expect("point on mesh")
}

/// Cholesky solve for a small SPD real matrix with complex right-hand side.
fn spd_solve<T: Real>(g: &[Vec<T>], rhs: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    let n = g.len();
    let mut l = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = g[i][j];
            for k in 0..j {
                sum = sum - l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= T::zero() {
                    return Err(Error::NonConvergence("Gram matrix not positive definite".into()));
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    let mut y = rhs.to_vec();
    for i in 0..n {
        for k in 0..i {
            let t = y[k] * l[i][k];
            y[i] -= t;
        }
        y[i] /= l[i][i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let t = y[k] * l[k][i];
            y[i] -= t;
        }
        y[i] /= l[i][i];
    }
    Ok(y)
}
