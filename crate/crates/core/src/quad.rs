//! Composite midpoint quadrature on dedicated high-resolution grids.
//!
//! Kernel normalization constants, Fourier coefficients and moment integrals
//! all run through these sums, on a grid independent of the simulation grid,
//! so discretization error of the operator never contaminates kernel
//! constants. Summation order is fixed (ascending index) for bitwise
//! reproducibility.

/// Default midpoint points per dimension for 1D kernel integrals.
pub const DEFAULT_QUAD_POINTS_1D: usize = 1 << 14;

/// Default midpoint points per dimension for 2D kernel integrals. Kept lower
/// than the 1D default so a full 2D sweep stays around a million evaluations.
pub const DEFAULT_QUAD_POINTS_2D: usize = 1 << 10;

/// Midpoint rule for `f` on `[lo, hi]` with `n` cells.
pub fn midpoint_1d(lo: f64, hi: f64, n: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    assert!(n > 0 && hi > lo);
    let h = (hi - lo) / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let x = lo + (i as f64 + 0.5) * h;
        acc += f(x);
    }
    acc * h
}

/// Midpoint rule on the square `[lo, hi]^2` with `n` cells per side.
pub fn midpoint_2d(lo: f64, hi: f64, n: usize, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
    assert!(n > 0 && hi > lo);
    let h = (hi - lo) / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let x = lo + (i as f64 + 0.5) * h;
        for j in 0..n {
            let y = lo + (j as f64 + 0.5) * h;
            acc += f(x, y);
        }
    }
    acc * h * h
}

/// Midpoint rule on `[-w, w]^dim` (dim = 1 or 2).
pub fn midpoint_sym(dim: usize, w: f64, n: usize, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    match dim {
        1 => midpoint_1d(-w, w, n, |x| f(&[x])),
        2 => midpoint_2d(-w, w, n, |x, y| f(&[x, y])),
        _ => panic!("unsupported dimension {dim}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_exact() {
        let v = midpoint_1d(-1.0, 1.0, 128, |_| 3.0);
        assert!((v - 6.0).abs() < 1e-14);
    }

    #[test]
    fn quadratic_converges() {
        let v = midpoint_1d(0.0, 1.0, 1 << 12, |x| x * x);
        assert!((v - 1.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn square_area() {
        let v = midpoint_2d(-1.0, 1.0, 64, |_, _| 1.0);
        assert!((v - 4.0).abs() < 1e-13);
    }
}
