//! Real root scanning for real-entire functions, certified by the argument
//! principle on a rectangle around the search window.

use crate::error::{Error, Result};
use crate::scalar::Real;
use num_complex::Complex;

/// Roots of a real-entire function on `[lo, hi]`, all of which are known to be
/// real and (apart from a possible zero of order `origin_mult` at the origin)
/// simple.  The count is certified by the winding number over
/// `[lo, hi] × [-i, i]`; on mismatch the grid is refined.
pub(crate) fn find_real_zeros<T: Real>(
    f: &dyn Fn(Complex<T>) -> Complex<T>,
    lo: T,
    hi: T,
    min_samples: usize,
    origin_mult: usize,
) -> Result<Vec<T>> {
    if !(lo < hi) {
        return Err(Error::invalid(format!("empty window [{lo}, {hi}]")));
    }
    let origin_inside = lo < T::zero() && T::zero() < hi;
    let scale = T::one() + lo.abs().max(hi.abs());
    let btol = T::of(1e-9) * scale;
    if origin_mult > 0 && (lo.abs() < btol || hi.abs() < btol) && !origin_inside {
        return Err(Error::BoundaryCollision { at: 0.0 });
    }

    let mut samples = min_samples.max(64);
    for _attempt in 0..4 {
        let roots = sign_change_roots(f, lo, hi, samples, origin_mult > 0, btol)?;
        for &r in &roots {
            if (r - lo).abs() < btol || (r - hi).abs() < btol {
                return Err(Error::BoundaryCollision {
                    at: num_traits::cast(r).unwrap_or(f64::NAN),
                });
            }
        }
        let expected = roots.len() + if origin_inside { origin_mult } else { 0 };
        let count = winding_rectangle(f, lo, hi, T::one(), samples)?;
        if count == expected as isize {
            return Ok(roots);
        }
        samples *= 4;
    }
    Err(Error::NonConvergence(
        "argument-principle count does not match the roots found".into(),
    ))
}

/// Bisection roots from sign changes of the (real) restriction to the axis.
fn sign_change_roots<T: Real>(
    f: &dyn Fn(Complex<T>) -> Complex<T>,
    lo: T,
    hi: T,
    samples: usize,
    skip_origin: bool,
    btol: T,
) -> Result<Vec<T>> {
    let n = samples.max(8);
    let step = (hi - lo) / T::of(n as f64);
    let eval = |x: T| -> Result<T> {
        let v = f(Complex::new(x, T::zero()));
        if !v.re.is_finite() {
            return Err(Error::NonConvergence(format!("non-finite value at {x}")));
        }
        Ok(v.re)
    };
    let mut roots = Vec::new();
    let mut x_prev = lo;
    let mut v_prev = eval(lo)?;
    for k in 1..=n {
        let x = if k == n { hi } else { lo + step * T::of(k as f64) };
        let v = eval(x)?;
        if v_prev == T::zero() {
            push_root(&mut roots, x_prev, skip_origin, btol);
        } else if v_prev.signum() != v.signum() && v != T::zero() {
            let r = bisect(&eval, x_prev, x, v_prev)?;
            push_root(&mut roots, r, skip_origin, btol);
        }
        x_prev = x;
        v_prev = v;
    }
    if v_prev == T::zero() {
        push_root(&mut roots, x_prev, skip_origin, btol);
    }
    roots.dedup_by(|a, b| (*a - *b).abs() <= btol);
    Ok(roots)
}

fn push_root<T: Real>(roots: &mut Vec<T>, r: T, skip_origin: bool, btol: T) {
    if skip_origin && r.abs() < btol {
        return;
    }
    roots.push(r);
}

fn bisect<T: Real>(eval: &dyn Fn(T) -> Result<T>, mut a: T, mut b: T, mut va: T) -> Result<T> {
    for _ in 0..200 {
        let mid = (a + b) * T::of(0.5);
        if mid == a || mid == b {
            break;
        }
        let vm = eval(mid)?;
        if vm == T::zero() {
            return Ok(mid);
        }
        if vm.signum() == va.signum() {
            a = mid;
            va = vm;
        } else {
            b = mid;
        }
    }
    Ok((a + b) * T::of(0.5))
}

/// Number of zeros inside the rectangle `[x0, x1] × [-h, h]` by tracking the
/// phase of `f` along the boundary.
pub(crate) fn winding_rectangle<T: Real>(
    f: &dyn Fn(Complex<T>) -> Complex<T>,
    x0: T,
    x1: T,
    h: T,
    samples_per_edge: usize,
) -> Result<isize> {
    let corners = [
        Complex::new(x0, -h),
        Complex::new(x1, -h),
        Complex::new(x1, h),
        Complex::new(x0, h),
        Complex::new(x0, -h),
    ];
    let mut total = T::zero();
    for seg in corners.windows(2) {
        let n = samples_per_edge.max(16);
        let mut z_prev = seg[0];
        let mut v_prev = eval_c(f, z_prev)?;
        for k in 1..=n {
            let t = T::of(k as f64 / n as f64);
            let z = seg[0] + (seg[1] - seg[0]) * t;
            let v = eval_c(f, z)?;
            total = total + phase_step(f, z_prev, v_prev, z, v, 0)?;
            z_prev = z;
            v_prev = v;
        }
    }
    let two_pi = T::PI() + T::PI();
    let winding = total / two_pi;
    let rounded = winding.round();
    if (winding - rounded).abs() > T::of(0.25) {
        return Err(Error::NonConvergence(format!(
            "winding number {winding} is not close to an integer"
        )));
    }
    Ok(num_traits::cast::<T, f64>(rounded).unwrap_or(0.0) as isize)
}

fn eval_c<T: Real>(
    f: &dyn Fn(Complex<T>) -> Complex<T>,
    z: Complex<T>,
) -> Result<Complex<T>> {
    let v = f(z);
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(Error::NonConvergence(format!("non-finite value on contour at {z}")));
    }
    if v.re == T::zero() && v.im == T::zero() {
        return Err(Error::NonConvergence(format!("zero on the contour at {z}")));
    }
    Ok(v)
}

/// Phase increment from `a` to `b`, subdividing until each step turns < π/2.
fn phase_step<T: Real>(
    f: &dyn Fn(Complex<T>) -> Complex<T>,
    za: Complex<T>,
    va: Complex<T>,
    zb: Complex<T>,
    vb: Complex<T>,
    depth: usize,
) -> Result<T> {
    let d = (vb / va).arg();
    if d.abs() <= T::FRAC_PI_2() {
        return Ok(d);
    }
    if depth > 48 {
        return Err(Error::NonConvergence(
            "phase tracking did not resolve; zero too close to the contour".into(),
        ));
    }
    let zm = (za + zb) * T::of(0.5);
    let vm = eval_c(f, zm)?;
    Ok(phase_step(f, za, va, zm, vm, depth + 1)? + phase_step(f, zm, vm, zb, vb, depth + 1)?)
}
