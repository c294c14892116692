//! Independent finite-matrix oracle for the quadratic pencil
//! `L(z) = M_I - z·M_Ω - z²·M_Υ`.
//!
//! The Galerkin basis consists of exponential "hats": continuous functions
//! that solve `-f'' + ¼f = 0` between nodes, take the value 1 at their own
//! node and 0 at the neighbouring ones, and obey the geometry's boundary
//! behaviour (decay on infinite ends, zero at Dirichlet ends, natural at
//! Neumann ends).  For purely atomic coefficients the eigenfunctions lie in
//! this span, so the matrix pencil reproduces the spectrum exactly — that is
//! what qualifies the module as a brute-force oracle for the shooting side.
//!
//! Matrix assembly is exact in the generic scalar; the dense companion
//! eigensolve and the singular-value residual run in `f64`.

use crate::error::{Error, Result};
use crate::line::Side;
use crate::measure::{CoefficientMeasure, Coefficients};
use crate::scalar::Real;
use nalgebra::{Complex as NaComplex, DMatrix};
use num_complex::Complex;

/// Geometry of the pencil: which self-adjoint relation the oracle targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PencilGeometry<T: Real> {
    /// Dirichlet pencil on `[a, b)`.
    Bounded { a: T, b: T },
    /// Natural (Neumann-type) pencil on `[a, b)`, the α = β = π/2 relation.
    BoundedNeumann { a: T, b: T },
    /// Dirichlet pencil on the semi-axis from `c`.
    HalfLine { c: T, side: Side },
    /// The whole-line relation.
    WholeLine,
}

/// Galerkin matrices of the pencil on the exponential-hat basis.
#[derive(Debug, Clone)]
pub struct PencilMatrices<T: Real> {
    pub nodes: Vec<T>,
    pub m_i: Vec<Vec<T>>,
    pub m_omega: Vec<Vec<T>>,
    pub m_upsilon: Vec<Vec<T>>,
}

/// Resolvent kernel of the geometry's relation at z = 0, i.e. the reproducing
/// kernel of the underlying modified `H¹` space.
pub fn resolvent_kernel<T: Real>(geom: PencilGeometry<T>, x: T, s: T) -> Result<T> {
    let half = T::of(0.5);
    let two = T::of(2.0);
    match geom {
        PencilGeometry::Bounded { a, b } => crate::bounded::k0_kernel(a, b, x, s),
        PencilGeometry::BoundedNeumann { a, b } => {
            if !(a <= x && x <= b && a <= s && s <= b) {
                return Err(Error::OutOfDomain(format!("({x}, {s}) outside [{a}, {b}]")));
            }
            let (hi, lo) = (x.max(s), x.min(s));
            Ok(two * ((b - hi) * half).cosh() * ((lo - a) * half).cosh() / ((b - a) * half).sinh())
        }
        PencilGeometry::HalfLine { c, side: Side::Plus } => {
            if x < c || s < c {
                return Err(Error::OutOfDomain(format!("({x}, {s}) outside [{c}, ∞)")));
            }
            let (hi, lo) = (x.max(s), x.min(s));
            Ok(two * (-(hi - c) * half).exp() * ((lo - c) * half).sinh())
        }
        PencilGeometry::HalfLine { c, side: Side::Minus } => {
            if x > c || s > c {
                return Err(Error::OutOfDomain(format!("({x}, {s}) outside (-∞, {c}]")));
            }
            let (hi, lo) = (x.max(s), x.min(s));
            Ok(two * ((lo - c) * half).exp() * ((c - hi) * half).sinh())
        }
        PencilGeometry::WholeLine => Ok((-(x - s).abs() * half).exp()),
    }
}

fn nodes_for<T: Real>(coeffs: &Coefficients<T>, geom: PencilGeometry<T>) -> Vec<T> {
    let atoms = coeffs.atom_positions();
    match geom {
        // Dirichlet hats vanish at the endpoints, so an atom exactly at `a`
        // has no effect (the eigenfunction vanishes there too).
        PencilGeometry::Bounded { a, b } => {
            atoms.into_iter().filter(|&x| a < x && x < b).collect()
        }
        PencilGeometry::BoundedNeumann { a, b } => {
            atoms.into_iter().filter(|&x| a <= x && x < b).collect()
        }
        PencilGeometry::HalfLine { c, side: Side::Plus } => {
            atoms.into_iter().filter(|&x| x > c).collect()
        }
        PencilGeometry::HalfLine { c, side: Side::Minus } => {
            atoms.into_iter().filter(|&x| x < c).collect()
        }
        PencilGeometry::WholeLine => atoms,
    }
}

/// Assemble the pencil matrices.  Exact for purely atomic coefficients;
/// densities are rejected (see [`assemble_approx`]).
pub fn assemble<T: Real>(
    coeffs: &Coefficients<T>,
    geom: PencilGeometry<T>,
) -> Result<PencilMatrices<T>> {
    if !coeffs.is_atomic() {
        return Err(Error::Precondition(
            "pencil assembly is exact only for atomic coefficients; \
             use assemble_approx to discretize densities"
            .into(),
        ));
    }
    assemble_atomic(coeffs, geom)
}

/// Assemble after replacing each density piece by midpoint atoms of spacing
/// at most `max_step`.  This is an approximation: the Galerkin exactness
/// contract holds for atomic coefficients only.
pub fn assemble_approx<T: Real>(
    coeffs: &Coefficients<T>,
    geom: PencilGeometry<T>,
    max_step: T,
) -> Result<PencilMatrices<T>> {
    if max_step <= T::zero() {
        return Err(Error::invalid("max_step must be positive"));
    }
    let discretize = |m: &CoefficientMeasure<T>| -> Result<CoefficientMeasure<T>> {
        let mut atoms: Vec<(T, T)> = m.atoms().to_vec();
        for &(l, r, d) in m.pieces() {
            let n = num_traits::cast::<T, f64>((r - l) / max_step)
                .map(|x| x.ceil() as usize)
                .unwrap_or(1)
                .max(1);
            let h = (r - l) / T::of(n as f64);
            for k in 0..n {
                let x = l + h * T::of(k as f64 + 0.5);
                atoms.push((x, d * h));
            }
        }
        if m.is_signed() {
            CoefficientMeasure::signed(atoms, vec![])
        } else {
            CoefficientMeasure::non_negative(atoms, vec![])
        }
    };
    let coeffs = Coefficients::new(discretize(&coeffs.omega)?, discretize(&coeffs.upsilon)?)?;
    assemble_atomic(&coeffs, geom)
}

fn assemble_atomic<T: Real>(
    coeffs: &Coefficients<T>,
    geom: PencilGeometry<T>,
) -> Result<PencilMatrices<T>> {
    let nodes = nodes_for(coeffs, geom);
    let n = nodes.len();
    let mut m_i = vec![vec![T::zero(); n]; n];
    let mut m_omega = vec![vec![T::zero(); n]; n];
    let mut m_upsilon = vec![vec![T::zero(); n]; n];
    let half = T::of(0.5);

    // Nodal hats: b_i(x_j) = δ_ij, so the measure forms are diagonal.
    for (i, &x) in nodes.iter().enumerate() {
        m_omega[i][i] = coeffs.omega.mass_at(x);
        m_upsilon[i][i] = coeffs.upsilon.mass_at(x);
    }

    // Interior segments: ¼∫b_i b_j + ∫b_i'b_j' = [b_i' b_j] at the segment
    // ends, which for the sinh-shaped two-node interpolants gives
    // ½coth(d/2) on the diagonal and -1/(2 sinh(d/2)) off it.
    for k in 0..n.saturating_sub(1) {
        let d = (nodes[k + 1] - nodes[k]) * half;
        m_i[k][k] = m_i[k][k] + half / d.tanh();
        m_i[k + 1][k + 1] = m_i[k + 1][k + 1] + half / d.tanh();
        m_i[k][k + 1] = m_i[k][k + 1] - half / d.sinh();
        m_i[k + 1][k] = m_i[k][k + 1];
    }

    // End segments / tails.
    if n > 0 {
        match geom {
            PencilGeometry::Bounded { a, b } => {
                m_i[0][0] = m_i[0][0] + half / ((nodes[0] - a) * half).tanh();
                m_i[n - 1][n - 1] = m_i[n - 1][n - 1] + half / ((b - nodes[n - 1]) * half).tanh();
            }
            PencilGeometry::BoundedNeumann { a, b } => {
                if nodes[0] > a {
                    m_i[0][0] = m_i[0][0] + half * ((nodes[0] - a) * half).tanh();
                }
                m_i[n - 1][n - 1] = m_i[n - 1][n - 1] + half * ((b - nodes[n - 1]) * half).tanh();
            }
            PencilGeometry::HalfLine { c, side: Side::Plus } => {
                m_i[0][0] = m_i[0][0] + half / ((nodes[0] - c) * half).tanh();
                m_i[n - 1][n - 1] = m_i[n - 1][n - 1] + half;
            }
            PencilGeometry::HalfLine { c, side: Side::Minus } => {
                m_i[0][0] = m_i[0][0] + half;
                m_i[n - 1][n - 1] = m_i[n - 1][n - 1] + half / ((c - nodes[n - 1]) * half).tanh();
            }
            PencilGeometry::WholeLine => {
                m_i[0][0] = m_i[0][0] + half;
                m_i[n - 1][n - 1] = m_i[n - 1][n - 1] + half;
            }
        }
    }

    Ok(PencilMatrices { nodes, m_i, m_omega, m_upsilon })
}

fn to_f64_matrix<T: Real>(m: &[Vec<T>]) -> DMatrix<f64> {
    let n = m.len();
    DMatrix::from_fn(n, n, |i, j| num_traits::cast::<T, f64>(m[i][j]).unwrap())
}

/// Pencil evaluated at `z`, in `f64`.
fn pencil_at<T: Real>(m: &PencilMatrices<T>, z: Complex<f64>) -> DMatrix<NaComplex<f64>> {
    let (mi, mo, mu) = (to_f64_matrix(&m.m_i), to_f64_matrix(&m.m_omega), to_f64_matrix(&m.m_upsilon));
    let n = m.nodes.len();
    DMatrix::from_fn(n, n, |i, j| {
        NaComplex::new(mi[(i, j)], 0.0) - z * mo[(i, j)] - z * z * mu[(i, j)]
    })
}

/// All finite spectral points of the pencil, via first-companion
/// linearization in `s = 1/z`; infinite eigenvalues (|z| > 1e12) are dropped
/// and every root must pass a smallest-singular-value residual test.
pub fn spectrum<T: Real>(m: &PencilMatrices<T>) -> Result<Vec<Complex<T>>> {
    let n = m.nodes.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mi = to_f64_matrix(&m.m_i);
    let mo = to_f64_matrix(&m.m_omega);
    let mu = to_f64_matrix(&m.m_upsilon);
    let chol = nalgebra::Cholesky::new(mi.clone())
        .ok_or_else(|| Error::NonConvergence("Gram matrix M_I is not positive definite".into()))?;
    let a = chol.solve(&mu);
    let b = chol.solve(&mo);
    // s²I - s·M_I⁻¹M_Ω - M_I⁻¹M_Υ = 0 on the companion block matrix.
    let mut comp = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            comp[(i, n + j)] = if i == j { 1.0 } else { 0.0 };
            comp[(n + i, j)] = a[(i, j)];
            comp[(n + i, n + j)] = b[(i, j)];
        }
    }
    let eig = comp.complex_eigenvalues();
    let mut out: Vec<Complex<T>> = Vec::new();
    for s in eig.iter() {
        let s = Complex::new(s.re, s.im);
        if s.norm() <= 1e-12 {
            continue;
        }
        let z = Complex::new(1.0, 0.0) / s;
        let l = pencil_at(m, z);
        // Pencil scale: never the evaluated ‖L(z)‖, which vanishes at a root.
        let scale = mi.norm() + z.norm() * mo.norm() + z.norm_sqr() * mu.norm();
        let sigma_min =
            l.svd(false, false).singular_values.iter().copied().fold(f64::INFINITY, f64::min);
        if sigma_min <= 1e-10 * scale.max(1e-300) {
            out.push(Complex::new(T::of(z.re), T::of(z.im)));
        }
    }
    out.sort_by(|p, q| (p.re, p.im).partial_cmp(&(q.re, q.im)).unwrap());
    Ok(out)
}

/// `‖(M_I - z·M_Ω - z²·M_Υ)·coeffs‖ / ‖coeffs‖`.
pub fn residual<T: Real>(m: &PencilMatrices<T>, z: Complex<T>, coeffs: &[Complex<T>]) -> T {
    let n = m.nodes.len();
    assert_eq!(coeffs.len(), n, "coefficient vector length");
    let mut num = T::zero();
    let mut den = T::zero();
    for i in 0..n {
        let mut acc = Complex::new(T::zero(), T::zero());
        for j in 0..n {
            let lij = Complex::new(m.m_i[i][j], T::zero())
                - z * m.m_omega[i][j]
                - z * z * m.m_upsilon[i][j];
            acc += lij * coeffs[j];
        }
        num = num + acc.norm_sqr();
        den = den + coeffs[i].norm_sqr();
    }
    if den == T::zero() {
        return T::zero();
    }
    (num / den).sqrt()
}

/// Largest |z| over the pencil spectrum (0 for an empty spectrum).
pub fn spectral_radius<T: Real>(
    coeffs: &Coefficients<T>,
    geom: PencilGeometry<T>,
) -> Result<T> {
    let spec = spectrum(&assemble(coeffs, geom)?)?;
    Ok(spec.iter().map(|z| z.norm()).fold(T::zero(), T::max))
}
