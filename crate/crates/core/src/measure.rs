//! Coefficient measures and oriented Stieltjes integration.
//!
//! A coefficient is a compactly supported Borel measure made of finitely many
//! point masses plus a piecewise-constant density.  Integrals follow the
//! left-continuous orientation convention
//!
//! ```text
//! ∫ₓʸ f dμ = ∫_{[x,y)} f dμ   (y > x),   0   (y = x),   -∫_{[y,x)} f dμ   (y < x),
//! ```
//!
//! so an atom at the lower endpoint is included and one at the upper endpoint
//! is excluded.

use crate::error::{Error, Result};
use crate::scalar::{cplx, Real};
use num_complex::Complex;

/// Real coefficient measure: atoms plus piecewise-constant density.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMeasure<T: Real> {
    atoms: Vec<(T, T)>,
    pieces: Vec<(T, T, T)>,
    signed: bool,
}

impl<T: Real> CoefficientMeasure<T> {
    /// Real-valued measure (allowed to change sign), e.g. the coefficient ω.
    pub fn signed(atoms: Vec<(T, T)>, pieces: Vec<(T, T, T)>) -> Result<Self> {
        Self::build(atoms, pieces, true)
    }

    /// Non-negative measure, e.g. the coefficient υ.
    pub fn non_negative(atoms: Vec<(T, T)>, pieces: Vec<(T, T, T)>) -> Result<Self> {
        Self::build(atoms, pieces, false)
    }

    pub fn zero(signed: bool) -> Self {
        CoefficientMeasure { atoms: Vec::new(), pieces: Vec::new(), signed }
    }

    /// Single point mass `m·δ_x`.
    pub fn dirac(x: T, m: T, signed: bool) -> Result<Self> {
        Self::build(vec![(x, m)], Vec::new(), signed)
    }

    fn build(mut atoms: Vec<(T, T)>, mut pieces: Vec<(T, T, T)>, signed: bool) -> Result<Self> {
        for (x, m) in &atoms {
            if !x.is_finite() || !m.is_finite() {
                return Err(Error::invalid("non-finite atom"));
            }
            if !signed && *m < T::zero() {
                return Err(Error::invalid(format!("negative mass {m} at atom {x}")));
            }
        }
        for (l, r, d) in &pieces {
            if !l.is_finite() || !r.is_finite() || !d.is_finite() {
                return Err(Error::invalid("non-finite piece"));
            }
            if *l >= *r {
                return Err(Error::invalid(format!("piece [{l}, {r}) needs left < right")));
            }
            if !signed && *d < T::zero() {
                return Err(Error::invalid(format!("negative density {d} on [{l}, {r})")));
            }
        }
        // Zero masses and densities carry no support.
        atoms.retain(|&(_, m)| m != T::zero());
        pieces.retain(|&(_, _, d)| d != T::zero());
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        pieces.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in atoms.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::invalid(format!("duplicate atom position {}", w[0].0)));
            }
        }
        for w in pieces.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(Error::invalid(format!(
                    "overlapping pieces at [{}, {}) and [{}, {})",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(CoefficientMeasure { atoms, pieces, signed })
    }

    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    pub fn pieces(&self) -> &[(T, T, T)] {
        &self.pieces
    }

    pub fn is_signed(&self) -> bool {
        self.signed
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.pieces.is_empty()
    }

    /// Pure Dirac comb (no density part)?
    pub fn is_atomic(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Mass of the atom at `x` (0 if none).
    pub fn mass_at(&self, x: T) -> T {
        match self.atoms.binary_search_by(|p| p.0.partial_cmp(&x).unwrap()) {
            Ok(i) => self.atoms[i].1,
            Err(_) => T::zero(),
        }
    }

    /// Density at `x` under the `[l, r)` convention.
    pub fn density_at(&self, x: T) -> T {
        for &(l, r, d) in &self.pieces {
            if l <= x && x < r {
                return d;
            }
        }
        T::zero()
    }

    /// Smallest interval `[min, max]` containing the support, if non-empty.
    pub fn support(&self) -> Option<(T, T)> {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for &(x, _) in &self.atoms {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        for &(l, r, _) in &self.pieces {
            lo = lo.min(l);
            hi = hi.max(r);
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// All breakpoints: atom positions and piece endpoints.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut pts: Vec<T> = self.atoms.iter().map(|a| a.0).collect();
        for &(l, r, _) in &self.pieces {
            pts.push(l);
            pts.push(r);
        }
        pts
    }

    /// Restriction to `[lo, hi)`.
    pub fn restricted(&self, lo: T, hi: T) -> Self {
        let atoms = self.atoms.iter().copied().filter(|&(x, _)| lo <= x && x < hi).collect();
        let pieces = self
            .pieces
            .iter()
            .filter_map(|&(l, r, d)| {
                let (cl, cr) = (l.max(lo), r.min(hi));
                (cl < cr).then_some((cl, cr, d))
            })
            .collect();
        CoefficientMeasure { atoms, pieces, signed: self.signed }
    }

    /// Oriented integral `∫ₓʸ g dμ` with the `[x, y)` convention.
    pub fn integrate_oriented(
        &self,
        g: impl Fn(T) -> Complex<T>,
        x: T,
        y: T,
    ) -> Complex<T> {
        self.integrate_with_breaks(&g, x, y, &[])
    }

    /// Same, with extra panel breakpoints for integrands with known kinks.
    pub(crate) fn integrate_with_breaks(
        &self,
        g: &impl Fn(T) -> Complex<T>,
        x: T,
        y: T,
        extra_breaks: &[T],
    ) -> Complex<T> {
        if x == y {
            return Complex::new(T::zero(), T::zero());
        }
        if y < x {
            return -self.integrate_with_breaks(g, y, x, extra_breaks);
        }
        let mut sum = Complex::new(T::zero(), T::zero());
        for &(p, m) in &self.atoms {
            if x <= p && p < y {
                sum += g(p) * m;
            }
        }
        for &(l, r, d) in &self.pieces {
            let (lo, hi) = (l.max(x), r.min(y));
            if lo < hi {
                sum += gauss_panels(g, lo, hi, extra_breaks) * d;
            }
        }
        sum
    }

    /// Left-continuous distribution function `F(x) = μ((-∞, x))`.
    pub fn distribution(&self, x: T) -> T {
        let mut f = T::zero();
        for &(p, m) in &self.atoms {
            if p < x {
                f = f + m;
            }
        }
        for &(l, r, d) in &self.pieces {
            let hi = r.min(x);
            if l < hi {
                f = f + d * (hi - l);
            }
        }
        f
    }

    /// Right limit `F(x+) = μ((-∞, x])`.
    pub fn distribution_right(&self, x: T) -> T {
        self.distribution(x) + self.mass_at(x)
    }
}

/// 16-point Gauss–Legendre over panels of width ≤ ¼, split at `breaks`.
fn gauss_panels<T: Real>(
    g: &impl Fn(T) -> Complex<T>,
    lo: T,
    hi: T,
    breaks: &[T],
) -> Complex<T> {
    const X: [f64; 8] = [
        0.09501250983763744,
        0.2816035507792589,
        0.45801677765722737,
        0.6178762444026438,
        0.755404408355003,
        0.8656312023878318,
        0.9445750230732326,
        0.9894009349916499,
    ];
    const W: [f64; 8] = [
        0.18945061045506848,
        0.18260341504492358,
        0.16915651939500254,
        0.14959598881657674,
        0.12462897125553388,
        0.09515851168249279,
        0.062253523938647894,
        0.027152459411754096,
    ];
    let mut edges: Vec<T> = vec![lo, hi];
    for &b in breaks {
        if lo < b && b < hi {
            edges.push(b);
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut sum = Complex::new(T::zero(), T::zero());
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == b {
            continue;
        }
        let width = b - a;
        let n = num_traits::cast::<T, f64>(width / T::of(0.25))
            .map(|x| x.ceil() as usize)
            .unwrap_or(1)
            .max(1);
        for p in 0..n {
            let pa = a + width * T::of(p as f64 / n as f64);
            let pb = a + width * T::of((p + 1) as f64 / n as f64);
            let mid = (pa + pb) * T::of(0.5);
            let half = (pb - pa) * T::of(0.5);
            for i in 0..8 {
                let (xi, wi) = (T::of(X[i]), T::of(W[i]));
                sum += (g(mid + half * xi) + g(mid - half * xi)) * cplx(wi * half);
            }
        }
    }
    sum
}

/// Both sides of the integration by parts identity
/// `∫ₓʸ F dν = (FG)|ₓʸ - ∫ₓʸ G(s+) dμ`
/// for left-continuous distribution functions `F` of μ and `G` of ν; returns
/// the absolute difference.
pub fn integration_by_parts_residual<T: Real>(
    mu: &CoefficientMeasure<T>,
    nu: &CoefficientMeasure<T>,
    x: T,
    y: T,
) -> T {
    let mut breaks = mu.breakpoints();
    breaks.extend(nu.breakpoints());
    let lhs = nu.integrate_with_breaks(&|s| cplx(mu.distribution(s)), x, y, &breaks);
    let boundary =
        mu.distribution(y) * nu.distribution(y) - mu.distribution(x) * nu.distribution(x);
    let rhs = cplx(boundary)
        - mu.integrate_with_breaks(&|s| cplx(nu.distribution_right(s)), x, y, &breaks);
    (lhs - rhs).norm()
}

/// A complex-valued measure of the same shape, used for inhomogeneities.
#[derive(Debug, Clone)]
pub struct ComplexMeasure<T: Real> {
    pub atoms: Vec<(T, Complex<T>)>,
    pub pieces: Vec<(T, T, Complex<T>)>,
}

impl<T: Real> ComplexMeasure<T> {
    pub fn new(atoms: Vec<(T, Complex<T>)>, pieces: Vec<(T, T, Complex<T>)>) -> Result<Self> {
        let mut m = ComplexMeasure { atoms, pieces };
        m.atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        m.pieces.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in m.atoms.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::invalid("duplicate atom position"));
            }
        }
        for &(l, r, _) in &m.pieces {
            if l >= r {
                return Err(Error::invalid("piece needs left < right"));
            }
        }
        Ok(m)
    }

    pub fn zero() -> Self {
        ComplexMeasure { atoms: Vec::new(), pieces: Vec::new() }
    }

    pub fn breakpoints(&self) -> Vec<T> {
        let mut pts: Vec<T> = self.atoms.iter().map(|a| a.0).collect();
        for &(l, r, _) in &self.pieces {
            pts.push(l);
            pts.push(r);
        }
        pts
    }
}

impl<T: Real> From<&CoefficientMeasure<T>> for ComplexMeasure<T> {
    fn from(m: &CoefficientMeasure<T>) -> Self {
        ComplexMeasure {
            atoms: m.atoms.iter().map(|&(x, v)| (x, cplx(v))).collect(),
            pieces: m.pieces.iter().map(|&(l, r, v)| (l, r, cplx(v))).collect(),
        }
    }
}

/// The coefficient pair (ω, υ) of the differential equation.
#[derive(Debug, Clone)]
pub struct Coefficients<T: Real> {
    pub omega: CoefficientMeasure<T>,
    pub upsilon: CoefficientMeasure<T>,
}

impl<T: Real> Coefficients<T> {
    pub fn new(omega: CoefficientMeasure<T>, upsilon: CoefficientMeasure<T>) -> Result<Self> {
        if upsilon.is_signed() {
            return Err(Error::invalid("upsilon must be a non-negative measure"));
        }
        Ok(Coefficients { omega, upsilon })
    }

    pub fn zero() -> Self {
        Coefficients {
            omega: CoefficientMeasure::zero(true),
            upsilon: CoefficientMeasure::zero(false),
        }
    }

    /// Support interval of |ω| + υ.
    pub fn support(&self) -> Option<(T, T)> {
        match (self.omega.support(), self.upsilon.support()) {
            (None, s) | (s, None) => s,
            (Some((a, b)), Some((c, d))) => Some((a.min(c), b.max(d))),
        }
    }

    pub fn is_atomic(&self) -> bool {
        self.omega.is_atomic() && self.upsilon.is_atomic()
    }

    /// Positions carrying an atom of |ω| + υ, ascending.
    pub fn atom_positions(&self) -> Vec<T> {
        let mut pts: Vec<T> = self.omega.atoms().iter().map(|a| a.0).collect();
        pts.extend(self.upsilon.atoms().iter().map(|a| a.0));
        dedup_sorted(&mut pts);
        pts
    }

    pub fn restricted(&self, lo: T, hi: T) -> Self {
        Coefficients {
            omega: self.omega.restricted(lo, hi),
            upsilon: self.upsilon.restricted(lo, hi),
        }
    }
}

/// Strictly increasing list of breakpoints; between consecutive points the
/// densities are constant and no atom lies in the open cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T: Real> {
    points: Vec<T>,
}

impl<T: Real> Mesh<T> {
    pub fn from_points(mut points: Vec<T>) -> Self {
        dedup_sorted(&mut points);
        Mesh { points }
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn dedup_sorted<T: Real>(pts: &mut Vec<T>) {
    pts.retain(|x| x.is_finite());
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
}

/// Mesh covering the supports of both coefficients and the extra points.
pub fn support_mesh<T: Real>(
    omega: &CoefficientMeasure<T>,
    upsilon: &CoefficientMeasure<T>,
    extra: &[T],
) -> Mesh<T> {
    let mut pts = omega.breakpoints();
    pts.extend(upsilon.breakpoints());
    pts.extend_from_slice(extra);
    Mesh::from_points(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    type M = CoefficientMeasure<f64>;
    type C = Complex<f64>;

    fn one(_: f64) -> C {
        C::new(1.0, 0.0)
    }

    #[test]
    fn atom_at_left_endpoint_included_right_excluded() {
        let mu = M::dirac(0.0, 2.0, true).unwrap();
        assert_eq!(mu.integrate_oriented(one, 0.0, 1.0), C::new(2.0, 0.0));
        let mu = M::dirac(1.0, 2.0, true).unwrap();
        assert_eq!(mu.integrate_oriented(one, 0.0, 1.0), C::new(0.0, 0.0));
    }

    #[test]
    fn orientation_flip() {
        let mu = M::signed(vec![], vec![(0.0, 1.0, 1.0)]).unwrap();
        let v = mu.integrate_oriented(|s| C::new(s, 0.0), 1.0, 0.0);
        assert!((v.re + 0.5).abs() < 1e-15, "{v}");
        assert_eq!(mu.integrate_oriented(one, 0.5, 0.5), C::new(0.0, 0.0));
    }

    #[test]
    fn distribution_conventions() {
        let mu = M::signed(vec![(0.0, 1.0)], vec![(0.0, 1.0, 2.0)]).unwrap();
        assert_eq!(mu.distribution(0.0), 0.0);
        assert_eq!(mu.distribution_right(0.0), 1.0);
        assert_eq!(mu.distribution(0.5), 2.0);
        assert_eq!(mu.distribution(2.0), 3.0);
    }

    #[test]
    fn by_parts_single_shared_atom() {
        let mu = M::dirac(0.0, 1.0, true).unwrap();
        let nu = M::dirac(0.0, 1.0, true).unwrap();
        assert!(integration_by_parts_residual(&mu, &nu, -1.0, 1.0) < 1e-15);
    }

    #[test]
    fn by_parts_smooth_and_mixed() {
        let mu = M::signed(vec![], vec![(-0.5, 0.75, 1.25)]).unwrap();
        let nu = M::signed(vec![], vec![(0.0, 2.0, -0.4)]).unwrap();
        assert!(integration_by_parts_residual(&mu, &nu, -1.0, 2.5) < 1e-13);

        // Hand-checkable mixed case: μ = δ₀ + 1 on [0,1), ν = δ_{1/2}, on [-1, 2).
        // LHS = F(1/2)·1 = 1.5; RHS = F(2)G(2) - F(-1)G(-1) - ∫G(s+)dμ
        //     = 2·1 - 0 - (G(0+)·1 + ∫₀¹G(s+)ds) = 2 - (0 + 1/2) = 1.5.
        let mu = M::signed(vec![(0.0, 1.0)], vec![(0.0, 1.0, 1.0)]).unwrap();
        let nu = M::signed(vec![(0.5, 1.0)], vec![]).unwrap();
        assert!(integration_by_parts_residual(&mu, &nu, -1.0, 2.0) < 1e-13);
    }

    #[test]
    fn support_mesh_examples() {
        let omega = M::dirac(0.0, 1.0, true).unwrap();
        let upsilon = M::dirac(1.0, 1.0, false).unwrap();
        let mesh = support_mesh(&omega, &upsilon, &[-1.0]);
        assert_eq!(mesh.points(), &[-1.0, 0.0, 1.0]);

        let omega = M::signed(vec![], vec![(0.0, 1.0, 1.0), (1.0, 2.0, 2.0)]).unwrap();
        let mesh = support_mesh(&omega, &M::zero(false), &[]);
        assert_eq!(mesh.points(), &[0.0, 1.0, 2.0]);

        let omega = M::dirac(0.0, 1.0, true).unwrap();
        let upsilon = M::non_negative(vec![], vec![(-1.0, 1.0, 1.0)]).unwrap();
        let mesh = support_mesh(&omega, &upsilon, &[0.5]);
        assert_eq!(mesh.points(), &[-1.0, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn validation_errors() {
        assert!(M::non_negative(vec![(0.0, -1.0)], vec![]).is_err());
        assert!(M::signed(vec![(0.0, 1.0), (0.0, 2.0)], vec![]).is_err());
        assert!(M::signed(vec![], vec![(0.0, 0.0, 1.0)]).is_err());
        assert!(M::signed(vec![], vec![(0.0, 1.0, 1.0), (0.5, 2.0, 1.0)]).is_err());
    }

    #[test]
    fn chasles_and_antisymmetry() {
        let mu = M::signed(vec![(-0.3, 1.5), (0.7, -0.25)], vec![(-1.0, 0.5, 0.8)]).unwrap();
        let g = |s: f64| C::new((0.5 * s).exp(), (-0.25 * s).exp());
        let pts = [-1.5, -0.3, 0.1, 0.7, 1.2];
        for &x in &pts {
            for &y in &pts {
                let fwd = mu.integrate_oriented(g, x, y);
                let bwd = mu.integrate_oriented(g, y, x);
                assert!((fwd + bwd).norm() < 1e-14 * (1.0 + fwd.norm()));
                for &w in &pts {
                    let lhs = mu.integrate_oriented(g, x, y) + mu.integrate_oriented(g, y, w);
                    let rhs = mu.integrate_oriented(g, x, w);
                    assert!((lhs - rhs).norm() < 1e-13 * (1.0 + rhs.norm()));
                }
            }
        }
    }
}
