//! Entire building blocks for cell propagation and closed-form integrals.
//!
//! On a mesh cell of width `Δ` both coefficient densities are constant, so a
//! solution obeys `f'' = κ² f` with `κ² = ¼ - z·w - z²·v`.  Everything is
//! expressed through the even entire functions
//!
//! ```text
//! c0(u) = cosh(√u),   c1(u) = sinh(√u)/√u,   c2(u) = (cosh(√u) - 1)/u
//! ```
//!
//! of `u = κ²Δ²`, which never take a square root branch cut: below a small
//! threshold they are evaluated by their power series, above it by standard
//! functions (the two branches of `√u` give the same value).  Products of two
//! solutions at different spectral parameters are integrated exactly by a
//! bivariate power series after splitting the cell until `|u| ≤ 9`.

use crate::scalar::Real;
use num_complex::Complex;

/// Series/standard-function crossover for `|u|`.
const SERIES_THRESHOLD: f64 = 1e-2;
/// Bivariate series is used once both arguments satisfy `|u| ≤ BIVAR_MAX`.
const BIVAR_MAX: f64 = 9.0;

fn abs1<T: Real>(z: Complex<T>) -> T {
    z.re.abs() + z.im.abs()
}

/// cosh(√u) for real u.
pub fn c0_real<T: Real>(u: T) -> T {
    if u.abs() < T::of(SERIES_THRESHOLD) {
        // Σ u^k/(2k)!
        let mut term = T::one();
        let mut sum = T::one();
        for k in 0..10u32 {
            term = term * u / T::of(((2 * k + 1) * (2 * k + 2)) as f64);
            sum = sum + term;
            if term.abs() <= T::epsilon() * sum.abs() {
                break;
            }
        }
        sum
    } else if u > T::zero() {
        u.sqrt().cosh()
    } else {
        (-u).sqrt().cos()
    }
}

/// sinh(√u)/√u for real u.
pub fn c1_real<T: Real>(u: T) -> T {
    if u.abs() < T::of(SERIES_THRESHOLD) {
        // Σ u^k/(2k+1)!
        let mut term = T::one();
        let mut sum = T::one();
        for k in 0..10u32 {
            term = term * u / T::of(((2 * k + 2) * (2 * k + 3)) as f64);
            sum = sum + term;
            if term.abs() <= T::epsilon() * sum.abs() {
                break;
            }
        }
        sum
    } else if u > T::zero() {
        let w = u.sqrt();
        w.sinh() / w
    } else {
        let w = (-u).sqrt();
        w.sin() / w
    }
}

/// cosh(√u) as an entire function of complex u.
///
/// Real arguments take the real path so that real data stays exactly real.
pub fn c0<T: Real>(u: Complex<T>) -> Complex<T> {
    if u.im == T::zero() {
        return Complex::new(c0_real(u.re), T::zero());
    }
    if abs1(u) < T::of(SERIES_THRESHOLD) {
        let mut term = Complex::new(T::one(), T::zero());
        let mut sum = term;
        for k in 0..10u32 {
            term = term * u / T::of(((2 * k + 1) * (2 * k + 2)) as f64);
            sum += term;
        }
        sum
    } else {
        u.sqrt().cosh()
    }
}

/// sinh(√u)/√u as an entire function of complex u.
pub fn c1<T: Real>(u: Complex<T>) -> Complex<T> {
    if u.im == T::zero() {
        return Complex::new(c1_real(u.re), T::zero());
    }
    if abs1(u) < T::of(SERIES_THRESHOLD) {
        let mut term = Complex::new(T::one(), T::zero());
        let mut sum = term;
        for k in 0..10u32 {
            term = term * u / T::of(((2 * k + 2) * (2 * k + 3)) as f64);
            sum += term;
        }
        sum
    } else {
        let w = u.sqrt();
        w.sinh() / w
    }
}

/// (cosh(√u) - 1)/u as an entire function of complex u.
pub fn c2<T: Real>(u: Complex<T>) -> Complex<T> {
    if abs1(u) < T::of(0.5) {
        // Σ u^k/(2k+2)!
        let mut term = Complex::new(T::of(0.5), T::zero());
        let mut sum = term;
        for k in 0..14u32 {
            term = term * u / T::of(((2 * k + 3) * (2 * k + 4)) as f64);
            sum += term;
        }
        sum
    } else {
        (c0(u) - T::one()) / u
    }
}

/// Cell propagation entries: `C = cosh(κΔ)` and `S = sinh(κΔ)/κ` from
/// `u = κ²Δ²`.  The solution advances as `(f, f') ↦ (C·f + S·f', κ²S·f + C·f')`.
pub fn cell_entries<T: Real>(u: Complex<T>, delta: T) -> (Complex<T>, Complex<T>) {
    (c0(u), c1(u) * delta)
}

/// `(∫₀^Δ C, ∫₀^Δ S) = (Δ·c1(u), Δ²·c2(u))` — antiderivatives of the cell basis.
pub fn cell_basis_integrals<T: Real>(u: Complex<T>, delta: T) -> (Complex<T>, Complex<T>) {
    (c1(u) * delta, c2(u) * (delta * delta))
}

/// Value/derivative data of one solution at the entry of a cell interior.
#[derive(Debug, Clone, Copy)]
pub struct CellState<T: Real> {
    pub value: Complex<T>,
    pub deriv: Complex<T>,
}

/// `∫ f g dt` and `∫ f' g' dt` over one cell.
#[derive(Debug, Clone, Copy)]
pub struct PairIntegrals<T: Real> {
    pub fg: Complex<T>,
    pub dfdg: Complex<T>,
}

impl<T: Real> std::ops::AddAssign for PairIntegrals<T> {
    fn add_assign(&mut self, o: Self) {
        self.fg += o.fg;
        self.dfdg += o.dfdg;
    }
}

/// Bivariate series Σ_{j,k} u1^j u2^k · a_j(u1) b_k(u2) / (2j + 2k + 1 + s1 + s2)
/// where the `a`/`b` factors are reciprocal factorials of cosh (s = 0) or
/// sinh/√ (s = 1) type.  Covers the four basis products on the unit cell.
fn bivar<T: Real>(u1: Complex<T>, u2: Complex<T>, s1: u32, s2: u32) -> Complex<T> {
    let eps = T::epsilon() * T::of(0.25);
    let mut sum = Complex::new(T::zero(), T::zero());
    let mut tj = Complex::new(T::one(), T::zero());
    for j in 0..40u32 {
        let mut tk = tj;
        let mut inner = Complex::new(T::zero(), T::zero());
        for k in 0..40u32 {
            inner += tk / T::of((2 * j + 2 * k + 1 + s1 + s2) as f64);
            tk = tk * u2 / T::of(((2 * k + 1 + s2) * (2 * k + 2 + s2)) as f64);
            if abs1(tk) <= eps * (T::one() + abs1(inner)) {
                break;
            }
        }
        sum += inner;
        let scale = T::one() + abs1(sum);
        tj = tj * u1 / T::of(((2 * j + 1 + s1) * (2 * j + 2 + s1)) as f64);
        if abs1(tj) <= eps * scale {
            break;
        }
    }
    sum
}

/// Exact `∫₀^Δ f g dt` and `∫₀^Δ f' g' dt` for two cell solutions
/// `f'' = κ₁² f`, `g'' = κ₂² g` given by their entry states.
pub fn pair_integrals<T: Real>(
    k1sq: Complex<T>,
    k2sq: Complex<T>,
    delta: T,
    f: CellState<T>,
    g: CellState<T>,
) -> PairIntegrals<T> {
    let u1 = k1sq * (delta * delta);
    let u2 = k2sq * (delta * delta);
    let umax = abs1(u1).max(abs1(u2));
    // Split until the bivariate series converges fast; sub-cell u scales by 1/m².
    let m = if umax <= T::of(BIVAR_MAX) {
        1usize
    } else {
        let r = (umax / T::of(BIVAR_MAX)).sqrt();
        num_traits::cast::<T, f64>(r).map(|x| x.ceil() as usize).unwrap_or(1).max(1)
    };
    let dsub = delta / T::of(m as f64);
    let d2 = dsub * dsub;
    let v1 = k1sq * d2;
    let v2 = k2sq * d2;

    let cc = bivar(v1, v2, 0, 0) * dsub;
    let cs = bivar(v1, v2, 0, 1) * d2;
    let sc = bivar(v1, v2, 1, 0) * d2;
    let ss = bivar(v1, v2, 1, 1) * (d2 * dsub);

    let (cf, sf) = cell_entries(v1, dsub);
    let (cg, sg) = cell_entries(v2, dsub);

    let mut out = PairIntegrals {
        fg: Complex::new(T::zero(), T::zero()),
        dfdg: Complex::new(T::zero(), T::zero()),
    };
    let (mut a, mut b) = (f.value, f.deriv);
    let (mut ap, mut bp) = (g.value, g.deriv);
    for _ in 0..m {
        out.fg += a * ap * cc + a * bp * cs + b * ap * sc + b * bp * ss;
        out.dfdg +=
            a * ap * (k1sq * k2sq) * ss + a * bp * k1sq * sc + b * ap * k2sq * cs + b * bp * cc;
        let (na, nb) = (cf * a + sf * b, k1sq * sf * a + cf * b);
        let (nap, nbp) = (cg * ap + sg * bp, k2sq * sg * ap + cg * bp);
        a = na;
        b = nb;
        ap = nap;
        bp = nbp;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    type C = Complex<f64>;

    fn gl_quad(f: impl Fn(f64) -> C, a: f64, b: f64) -> C {
        // 40-panel 16-point Gauss-Legendre, plenty for these entire integrands.
        const X: [f64; 8] = [
            0.0950125098376374,
            0.2816035507792589,
            0.4580167776572274,
            0.6178762444026438,
            0.7554044083550030,
            0.8656312023878318,
            0.9445750230732326,
            0.9894009349916499,
        ];
        const W: [f64; 8] = [
            0.1894506104550685,
            0.1826034150449236,
            0.1691565193950025,
            0.1495959888165767,
            0.1246289712555339,
            0.0951585116824928,
            0.0622535239386479,
            0.0271524594117541,
        ];
        let mut sum = C::new(0.0, 0.0);
        let n = 40;
        for p in 0..n {
            let lo = a + (b - a) * p as f64 / n as f64;
            let hi = a + (b - a) * (p + 1) as f64 / n as f64;
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            for i in 0..8 {
                sum += (f(mid + half * X[i]) + f(mid - half * X[i])) * W[i] * half;
            }
        }
        sum
    }

    fn sol(k2: C, st: CellState<f64>, t: f64) -> (C, C) {
        let u = k2 * t * t;
        let (c, s) = cell_entries(u, t);
        (c * st.value + s * st.deriv, k2 * s * st.value + c * st.deriv)
    }

    #[test]
    fn c0_c1_match_standard_functions() {
        for &u in &[1e-8f64, 1e-3, 0.04, 1.0, 10.0, 300.0] {
            assert_relative_eq!(c0_real(u), u.sqrt().cosh(), max_relative = 1e-14);
            assert_relative_eq!(c1_real(u), u.sqrt().sinh() / u.sqrt(), max_relative = 1e-14);
            assert_relative_eq!(c0_real(-u), u.sqrt().cos(), max_relative = 1e-13);
        }
        let u = C::new(0.3, -1.7);
        let w = u.sqrt();
        assert!((c0(u) - w.cosh()).norm() < 1e-14 * w.cosh().norm());
        assert!((c1(u) - w.sinh() / w).norm() < 1e-14);
        // Entire at the origin.
        assert_relative_eq!(c0_real(0.0), 1.0);
        assert_relative_eq!(c1_real(0.0), 1.0);
        assert!((c2(C::new(0.0, 0.0)) - C::new(0.5, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn real_input_stays_exactly_real() {
        for &u in &[-25.0, -0.3, 0.0, 0.7, 40.0] {
            assert_eq!(c0(C::new(u, 0.0)).im, 0.0);
            assert_eq!(c1(C::new(u, 0.0)).im, 0.0);
        }
    }

    #[test]
    fn pair_integrals_match_quadrature() {
        let cases = [
            (C::new(0.25, 0.0), C::new(0.25, 0.0)),
            (C::new(-3.0, 0.5), C::new(0.25, 0.0)),
            (C::new(2.0, -1.0), C::new(-7.0, 3.0)),
            (C::new(30.0, 0.0), C::new(28.0, 0.1)),
            (C::new(-40.0, 0.0), C::new(-40.0, 0.0)),
        ];
        let f0 = CellState { value: C::new(0.8, -0.1), deriv: C::new(-0.3, 0.45) };
        let g0 = CellState { value: C::new(-1.1, 0.7), deriv: C::new(0.9, 0.2) };
        for &(k1, k2) in &cases {
            for &delta in &[0.3, 1.7] {
                let got = pair_integrals(k1, k2, delta, f0, g0);
                let fg = gl_quad(|t| sol(k1, f0, t).0 * sol(k2, g0, t).0, 0.0, delta);
                let dd = gl_quad(|t| sol(k1, f0, t).1 * sol(k2, g0, t).1, 0.0, delta);
                assert!((got.fg - fg).norm() <= 1e-12 * (1.0 + fg.norm()), "fg {k1} {k2} {delta}");
                assert!((got.dfdg - dd).norm() <= 1e-12 * (1.0 + dd.norm()), "dd {k1} {k2} {delta}");
            }
        }
    }

    #[test]
    fn basis_integrals_are_antiderivatives() {
        let u = C::new(-2.3, 0.4);
        let delta = 0.9;
        let k2 = u / (delta * delta);
        let (ic, is) = cell_basis_integrals(u, delta);
        let qc = gl_quad(|t| sol(k2, CellState { value: C::new(1.0, 0.0), deriv: C::new(0.0, 0.0) }, t).0, 0.0, delta);
        let qs = gl_quad(|t| sol(k2, CellState { value: C::new(0.0, 0.0), deriv: C::new(1.0, 0.0) }, t).0, 0.0, delta);
        assert!((ic - qc).norm() < 1e-13);
        assert!((is - qs).norm() < 1e-13);
    }
}
