//! Structure functions `E(z,c) = zφ(z,c) - iφ'(z,c)` and reproducing kernels
//! of the associated spaces of entire functions, with numerical verification
//! of the embedding identity into `L²(μ)` and the base-point formula.
//!
//! The kernel has two independent representations — the quotient of structure
//! functions and a half-line integral of φ products — whose agreement is the
//! module's core Lagrange-identity regression.

use crate::error::{Error, Result};
use crate::line::{LineProblem, Side, SpectralDatum};
use crate::scalar::{cplx, Real};
use num_complex::Complex;

/// Closed (`φ'(c)`) or open (`φ'(c+)`) derivative variant; the two differ
/// only when a coefficient atom sits exactly at `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EVariant {
    Closed,
    Open,
}

/// de Branges structure data for a whole-line problem, carrying the spectral
/// measure needed by the embedding tests.
pub struct DeBranges<'a, T: Real> {
    problem: &'a LineProblem<T>,
    spectral: Vec<SpectralDatum<T>>,
}

impl<'a, T: Real> DeBranges<'a, T> {
    /// Computes the spectral measure over `window` (default policy if `None`).
    pub fn new(problem: &'a LineProblem<T>, window: Option<(T, T)>) -> Result<Self> {
        let spectral = problem.spectral_measure(window)?;
        Ok(DeBranges { problem, spectral })
    }

    pub fn with_spectral(problem: &'a LineProblem<T>, spectral: Vec<SpectralDatum<T>>) -> Self {
        DeBranges { problem, spectral }
    }

    pub fn spectral(&self) -> &[SpectralDatum<T>] {
        &self.spectral
    }

    /// φ frame at `c` (value and both one-sided derivatives).
    fn phi_frame(&self, z: Complex<T>, c: T) -> crate::propagate::SolutionFrame<T> {
        self.problem.weyl_frames(z, Side::Plus, &[c])[0]
    }

    /// `E(z,c) = zφ(z,c) - iφ'(z,c)` (closed) or with `φ'(z,c+)` (open).
    pub fn structure_e(&self, z: Complex<T>, c: T, variant: EVariant) -> Complex<T> {
        let fr = self.phi_frame(z, c);
        let dphi = match variant {
            EVariant::Closed => fr.df_left,
            EVariant::Open => fr.df_right,
        };
        z * fr.f - T::i() * dphi
    }

    /// Kernel by the structure-function quotient
    /// `K(ζ,z,c) = [E(z,c)E(ζ,c)* - E(ζ*,c)E(z*,c)*] / (2i(ζ* - z))`.
    pub fn kernel_quotient(
        &self,
        zeta: Complex<T>,
        z: Complex<T>,
        c: T,
        variant: EVariant,
    ) -> Complex<T> {
        let e_z = self.structure_e(z, c, variant);
        let e_zeta = self.structure_e(zeta, c, variant);
        let e_zeta_star = self.structure_e(zeta.conj(), c, variant);
        let e_z_star = self.structure_e(z.conj(), c, variant);
        let num = e_z * e_zeta.conj() - e_zeta_star * e_z_star.conj();
        let den = T::i() * T::of(2.0) * (zeta.conj() - z);
        num / den
    }

    /// Kernel by the half-line integral
    /// `¼∫_c^∞ φ(z)φ(ζ*) + ∫_c^∞ φ'(z)φ'(ζ*) + zζ* ∫_c^∞ φ(z)φ(ζ*) dυ`,
    /// the open variant dropping the υ atom at `c`.
    pub fn kernel_integral(
        &self,
        zeta: Complex<T>,
        z: Complex<T>,
        c: T,
        variant: EVariant,
    ) -> Complex<T> {
        let zeta_s = zeta.conj();
        let mut points: Vec<T> = self
            .problem
            .mesh_points()
            .into_iter()
            .filter(|&p| p > c)
            .collect();
        points.push(c);
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        points.dedup();
        let fz = self.problem.weyl_frames(z, Side::Plus, &points);
        let fzs = self.problem.weyl_frames(zeta_s, Side::Plus, &points);
        let a = self.problem.line_fn_from_profile(z, &fz, &points);
        let b = self.problem.line_fn_from_profile(zeta_s, &fzs, &points);
        let mut acc = LineProblem::h1_pairing(&a, &b, false, true);
        let weight = z * zeta_s;
        for &(q, v) in self.problem.coefficients().upsilon.atoms() {
            let include = q > c || (q == c && variant == EVariant::Closed);
            if include {
                let i = points.binary_search_by(|p| p.partial_cmp(&q).unwrap()).unwrap();
                acc += weight * v * a.values[i] * b.values[i];
            }
        }
        // The mesh starts at c, so the density part is already restricted.
        acc += weight * self.problem.upsilon_density_pairing(&a, &b);
        acc
    }

    /// Kernel value: quotient form away from the diagonal `ζ* = z`, integral
    /// form on it.
    pub fn kernel(&self, zeta: Complex<T>, z: Complex<T>, c: T, variant: EVariant) -> Complex<T> {
        let scale = T::one() + zeta.norm() + z.norm();
        if (zeta.conj() - z).norm() > T::of(1e-6) * scale {
            self.kernel_quotient(zeta, z, c, variant)
        } else {
            self.kernel_integral(zeta, z, c, variant)
        }
    }

    fn require_on_support(&self, c: T) -> Result<()> {
        if !self.problem.coefficients().atom_positions().contains(&c) {
            return Err(Error::Precondition(format!(
                "base point {c} is not in the support of |ω| + υ"
            )));
        }
        Ok(())
    }

    /// Residual of the embedding identity
    /// `⟨F,G⟩_{L²(μ)} = ⟨F,G⟩_{B(c)} - e^c F(0)G(0)*`
    /// for `F = K(ζ₁,·,c)`, `G = K(ζ₂,·,c)`; requires `c` in the support.
    pub fn embedding_residual(&self, zeta1: Complex<T>, zeta2: Complex<T>, c: T) -> Result<T> {
        self.require_on_support(c)?;
        let mut lhs = Complex::new(T::zero(), T::zero());
        for d in &self.spectral {
            let lam = cplx(d.lambda);
            lhs += self.kernel(zeta1, lam, c, EVariant::Closed)
                * self.kernel(zeta2, lam, c, EVariant::Closed).conj()
                * d.mass;
        }
        let zero = Complex::new(T::zero(), T::zero());
        let rhs = self.kernel(zeta1, zeta2, c, EVariant::Closed)
            - self.kernel(zeta1, zero, c, EVariant::Closed)
                * self.kernel(zeta2, zero, c, EVariant::Closed).conj()
                * c.exp();
        Ok((lhs - rhs).norm())
    }

    /// Numerical supremum of `|F(0)|²` over `F` in the kernel span with
    /// `‖F‖_{L²(μ)} = 1`; equals `e^{-c}` for `c` in the support.
    pub fn base_point_estimate(&self, c: T) -> Result<T> {
        self.require_on_support(c)?;
        let n_atoms = self.problem.coefficients().atom_positions().len();
        let m = 2 * n_atoms + 2;
        for attempt in 0..3 {
            let radius = T::of(1.0 + 0.3 * attempt as f64);
            let center = Complex::new(T::zero(), T::of(0.7));
            let zetas: Vec<Complex<T>> = (0..m)
                .map(|j| {
                    let th = T::of(2.0) * T::PI() * T::of(j as f64 + 0.37) / T::of(m as f64);
                    center + Complex::new(th.cos(), th.sin()) * radius
                })
                .collect();
            // K_{ji} = K(ζ_j, λ_i); B = K diag(μ) K^H; w_j = conj(K(ζ_j, 0)).
            let k: Vec<Vec<Complex<T>>> = zetas
                .iter()
                .map(|&zj| {
                    self.spectral
                        .iter()
                        .map(|d| self.kernel(zj, cplx(d.lambda), c, EVariant::Closed))
                        .collect()
                })
                .collect();
            let zero = Complex::new(T::zero(), T::zero());
            let w: Vec<Complex<T>> =
                zetas.iter().map(|&zj| self.kernel(zj, zero, c, EVariant::Closed).conj()).collect();
            let mut b = vec![vec![zero; m]; m];
            for (j, kj) in k.iter().enumerate() {
                for (l, kl) in k.iter().enumerate() {
                    let mut acc = zero;
                    for (i, d) in self.spectral.iter().enumerate() {
                        acc += kl[i].conj() * kj[i] * d.mass;
                    }
                    b[l][j] = acc;
                }
            }
            if let Some(v) = hermitian_quadratic_sup(&b, &w) {
                return Ok(v);
            }
        }
        Err(Error::NonConvergence("degenerate kernel Gram for the base-point estimate".into()))
    }
}

/// `sup |w^H a|² / (a^H B a)` = `w^H B⁺ w` for Hermitian PSD `B`, via the
/// real symmetric embedding and a Jacobi eigendecomposition with a relative
/// rank cutoff.  Returns `None` when `B` is numerically zero.
fn hermitian_quadratic_sup<T: Real>(b: &[Vec<Complex<T>>], w: &[Complex<T>]) -> Option<T> {
    let n = b.len();
    let m = 2 * n;
    let mut a = vec![vec![T::zero(); m]; m];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = b[i][j].re;
            a[i][n + j] = -b[i][j].im;
            a[n + i][j] = b[i][j].im;
            a[n + i][n + j] = b[i][j].re;
        }
    }
    let (eigvals, eigvecs) = jacobi_symmetric(&mut a);
    let lam_max = eigvals.iter().copied().fold(T::zero(), T::max);
    if lam_max <= T::zero() {
        return None;
    }
    let cutoff = lam_max * T::of(1e-11);
    let mut wt = vec![T::zero(); m];
    for i in 0..n {
        wt[i] = w[i].re;
        wt[n + i] = w[i].im;
    }
    let mut sup = T::zero();
    for k in 0..m {
        if eigvals[k] > cutoff {
            let mut proj = T::zero();
            for i in 0..m {
                proj = proj + eigvecs[i][k] * wt[i];
            }
            sup = sup + proj * proj / eigvals[k];
        }
    }
    Some(sup)
}

/// Cyclic Jacobi eigendecomposition of a small real symmetric matrix.
/// Returns (eigenvalues, eigenvector columns).
fn jacobi_symmetric<T: Real>(a: &mut [Vec<T>]) -> (Vec<T>, Vec<Vec<T>>) {
    let n = a.len();
    let mut v = vec![vec![T::zero(); n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    for _sweep in 0..64 {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off = off + a[i][j] * a[i][j];
            }
        }
        if off <= T::epsilon() * T::epsilon() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() <= T::epsilon() * (a[p][p].abs() + a[q][q].abs() + T::epsilon()) {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::of(2.0) * a[p][q]);
                let t = {
                    let s = if theta >= T::zero() { T::one() } else { -T::one() };
                    s / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| a[i][i]).collect();
    (vals, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{CoefficientMeasure, Coefficients};
    use approx::assert_relative_eq;

    type C = Complex<f64>;
    type M = CoefficientMeasure<f64>;

    fn line(omega: Vec<(f64, f64)>, upsilon: Vec<(f64, f64)>) -> LineProblem<f64> {
        LineProblem::new(
            Coefficients::new(
                M::signed(omega, vec![]).unwrap(),
                M::non_negative(upsilon, vec![]).unwrap(),
            )
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn structure_e_zero_coefficients() {
        let p = line(vec![], vec![]);
        let db = DeBranges::with_spectral(&p, vec![]);
        for &(z, c) in &[(C::new(0.7, -0.2), 0.0), (C::new(1.0, 2.0), 1.3)] {
            let e = db.structure_e(z, c, EVariant::Closed);
            let expect = (z + C::new(0.0, 0.5)) * (-c / 2.0_f64).exp();
            assert!((e - expect).norm() <= 1e-14 * expect.norm());
        }
        let e_up = db.structure_e(C::new(0.0, 1.0), 0.0, EVariant::Closed);
        let e_dn = db.structure_e(C::new(0.0, -1.0), 0.0, EVariant::Closed);
        assert_relative_eq!(e_up.norm_sqr(), 2.25, max_relative = 1e-14);
        assert_relative_eq!(e_dn.norm_sqr(), 0.25, max_relative = 1e-14);
    }

    #[test]
    fn de_branges_inequality_sampled() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p = line(vec![(-0.4, 1.3), (0.9, -0.8)], vec![(0.2, 1.5)]);
        let db = DeBranges::with_spectral(&p, vec![]);
        for _ in 0..100 {
            let z = C::new(rng.gen_range(-2.0..2.0), rng.gen_range(1e-2..2.0));
            let c = rng.gen_range(-1.0..1.5);
            let e = db.structure_e(z, c, EVariant::Closed).norm();
            let es = db.structure_e(z.conj(), c, EVariant::Closed).norm();
            assert!(e > es, "|E({z})| = {e} not above |E(conj)| = {es}");
        }
    }

    #[test]
    fn open_variant_shifts_by_atom_jump() {
        let (w, v) = (1.1, 0.7);
        let p = line(vec![(0.4, w)], vec![(0.4, v)]);
        let db = DeBranges::with_spectral(&p, vec![]);
        let z = C::new(0.8, -1.2);
        let closed = db.structure_e(z, 0.4, EVariant::Closed);
        let open = db.structure_e(z, 0.4, EVariant::Open);
        let phi = p.weyl_frames(z, Side::Plus, &[0.4])[0].f;
        let expect = closed + C::new(0.0, 1.0) * (z * w + z * z * v) * phi;
        assert!((open - expect).norm() <= 1e-13 * (1.0 + expect.norm()));
        // Away from atoms the variants agree.
        let a = db.structure_e(z, 1.0, EVariant::Closed);
        let b = db.structure_e(z, 1.0, EVariant::Open);
        assert!((a - b).norm() < 1e-15);
    }

    #[test]
    fn quotient_equals_integral() {
        let p = line(vec![(-0.6, 1.4), (0.5, -0.9)], vec![(0.5, 1.2)]);
        let db = DeBranges::with_spectral(&p, vec![]);
        let cases = [
            (C::new(0.3, 0.8), C::new(-0.7, 1.1), 0.5),
            (C::new(1.2, -0.4), C::new(0.2, 0.6), -0.6),
            (C::new(0.0, 1.0), C::new(0.9, 0.2), 1.7),
        ];
        for &(zeta, z, c) in &cases {
            for variant in [EVariant::Closed, EVariant::Open] {
                let q = db.kernel_quotient(zeta, z, c, variant);
                let i = db.kernel_integral(zeta, z, c, variant);
                assert!((q - i).norm() <= 1e-10 * (1.0 + q.norm()), "{q} vs {i} at c={c}");
            }
        }
    }

    #[test]
    fn kernel_hermitian_symmetry_and_diagonal() {
        let p = line(vec![(0.0, 1.8)], vec![(0.0, 0.6)]);
        let db = DeBranges::with_spectral(&p, vec![]);
        let (zeta, z, c) = (C::new(0.4, 0.9), C::new(-0.8, 0.3), 0.0);
        let k1 = db.kernel(zeta, z, c, EVariant::Closed);
        let k2 = db.kernel(z, zeta, c, EVariant::Closed);
        assert!((k1 - k2.conj()).norm() <= 1e-12 * (1.0 + k1.norm()));
        // Positive diagonal off the real axis.
        let kd = db.kernel_integral(zeta, zeta, c, EVariant::Closed);
        assert!(kd.re > 0.0 && kd.im.abs() <= 1e-12 * kd.re);
        // The dispatching kernel handles the diagonal ζ* = z.
        let kdisp = db.kernel(zeta, zeta.conj(), c, EVariant::Closed);
        assert!(kdisp.is_finite() && (kdisp - db.kernel_integral(zeta, zeta.conj(), c, EVariant::Closed)).norm() < 1e-12);
    }

    #[test]
    fn kernel_k0_slice_is_phi() {
        // K(0, z, c) = ½ e^{-c/2} φ(z, c).
        let p = line(vec![(-0.2, 1.1), (0.8, 0.7)], vec![(0.8, 0.5)]);
        let db = DeBranges::with_spectral(&p, vec![]);
        for &(z, c) in &[(C::new(0.9, 0.4), 0.3), (C::new(-1.1, 0.6), 0.8), (C::new(0.5, 0.0), 2.0)] {
            let k = db.kernel(C::new(0.0, 0.0), z, c, EVariant::Closed);
            let phi = p.weyl_frames(z, Side::Plus, &[c])[0].f;
            let expect = phi * 0.5 * (-c / 2.0_f64).exp();
            assert!((k - expect).norm() <= 1e-11 * (1.0 + expect.norm()), "{k} vs {expect}");
        }
    }

    #[test]
    fn variant_difference_is_rank_one() {
        // K(ζ,z,c) - K(ζ,z,c+) = υ({c}) zφ(z,c) ζ*φ(ζ,c)*, also with an ω atom present.
        let p = line(vec![(0.3, -0.9)], vec![(0.3, 1.4)]);
        let db = DeBranges::with_spectral(&p, vec![]);
        let (zeta, z, c) = (C::new(0.7, 1.2), C::new(-0.4, 0.8), 0.3);
        let diff = db.kernel_quotient(zeta, z, c, EVariant::Closed)
            - db.kernel_quotient(zeta, z, c, EVariant::Open);
        let phi_z = p.weyl_frames(z, Side::Plus, &[c])[0].f;
        let phi_zeta = p.weyl_frames(zeta, Side::Plus, &[c])[0].f;
        let expect = (z * phi_z) * (zeta * phi_zeta).conj() * 1.4;
        assert!((diff - expect).norm() <= 1e-11 * (1.0 + expect.norm()), "{diff} vs {expect}");
    }

    #[test]
    fn chain_inclusion_psd_spot_check() {
        let p = line(vec![], vec![(0.1, 1.3)]);
        let db = DeBranges::with_spectral(&p, vec![]);
        let c = 0.1;
        let zs = [C::new(0.4, 0.7), C::new(-0.9, 1.1)];
        let d = |i: usize, j: usize| {
            db.kernel(zs[i], zs[j], c, EVariant::Closed) - db.kernel(zs[i], zs[j], c, EVariant::Open)
        };
        let d00 = d(0, 0);
        let d11 = d(1, 1);
        let d01 = d(0, 1);
        assert!(d00.re >= -1e-10 && d11.re >= -1e-10);
        let det = d00.re * d11.re - d01.norm_sqr();
        assert!(det >= -1e-10, "2x2 minor {det}");
    }

    #[test]
    fn embedding_identity_and_base_point() {
        let p = line(vec![(-0.5, 1.6), (0.4, 0.9)], vec![(0.4, 0.8)]);
        let db = DeBranges::new(&p, None).unwrap();
        // Chained identity at ζ₁ = ζ₂ = 0: both sides equal ¼e^{-c}.
        for &c in &[-0.5, 0.4] {
            let zero = C::new(0.0, 0.0);
            let mut lhs = 0.0;
            for d in db.spectral() {
                lhs += db.kernel(zero, C::new(d.lambda, 0.0), c, EVariant::Closed).norm_sqr()
                    * d.mass;
            }
            assert_relative_eq!(lhs, 0.25 * (-c as f64).exp(), max_relative = 1e-8);
            let r = db.embedding_residual(zero, zero, c).unwrap();
            assert!(r <= 1e-10);
            // Random ζ pairs.
            let r = db
                .embedding_residual(C::new(0.6, 0.9), C::new(-0.3, 1.4), c)
                .unwrap();
            assert!(r <= 1e-8, "residual {r} at c = {c}");
            // Base point formula.
            let est = db.base_point_estimate(c).unwrap();
            assert_relative_eq!(est, (-c as f64).exp(), max_relative = 1e-6);
        }
        // Monotonicity between the two support points.
        let e1 = db.base_point_estimate(-0.5).unwrap();
        let e2 = db.base_point_estimate(0.4).unwrap();
        assert!(e1 > e2);
        // Off-support base points are rejected.
        assert!(db.embedding_residual(C::new(0.0, 0.0), C::new(0.0, 0.0), 2.0).is_err());
        assert!(db.base_point_estimate(0.0).is_err());
    }

    #[test]
    fn base_point_table() {
        // sup = e^{-c}: c = 0 → 1 and c = ln 4 → 0.25.
        let c2 = 4.0f64.ln();
        let p = line(vec![(0.0, 1.5), (c2, 0.8)], vec![]);
        let db = DeBranges::new(&p, None).unwrap();
        assert_relative_eq!(db.base_point_estimate(0.0).unwrap(), 1.0, max_relative = 1e-6);
        assert_relative_eq!(db.base_point_estimate(c2).unwrap(), 0.25, max_relative = 1e-6);
    }
}
