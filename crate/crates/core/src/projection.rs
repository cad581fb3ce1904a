//! Weighted least-squares projection onto polyhedra.
//!
//! [`project`] solves `min sum w_i (x_i - t_i)^2` subject to `A x <= b` with
//! the Goldfarb-Idnani dual active-set method. After rescaling
//! `y = sqrt(w) x` the Hessian is the identity, so the method reduces to
//! adding violated constraints one at a time while keeping the active
//! normals linearly independent.
//!
//! [`minmax_isotonic`] is the closed-form min-max characterization for
//! partial-order isotonic regression capped from above. It enumerates
//! upper and lower sets and is only usable for a handful of variables; it
//! serves as the reference solution in tests.

use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `sum coef * x[idx] <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Inequality<T> {
    pub terms: Vec<(usize, T)>,
    pub rhs: T,
}

impl<T: Real> Inequality<T> {
    pub fn lhs(&self, x: &[T]) -> T {
        self.terms.iter().fold(T::zero(), |acc, &(i, c)| acc + c * x[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection<T> {
    pub x: Vec<T>,
    /// Indices of the constraints in the final active set.
    pub active: Vec<usize>,
    /// Lagrange multipliers of `active`, in the same order (rescaled space).
    pub multipliers: Vec<T>,
}

fn tolerance<T: Real>() -> T {
    T::epsilon() * T::from_f64(1e4).unwrap()
}

/// Projects `target` onto `{x : rows}` in the `weights`-weighted norm.
pub fn project<T: Real>(target: &[T], weights: &[T], rows: &[Inequality<T>]) -> Result<Projection<T>> {
    let n = target.len();
    if weights.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: weights.len() });
    }
    if weights.iter().any(|&w| w.is_nan() || w <= T::zero() || !w.is_finite()) {
        return Err(Error::InvalidArgument("weights must be positive and finite".into()));
    }
    let scale: Vec<T> = weights.iter().map(|w| w.sqrt()).collect();
    // GI form: c . y >= d with unit normals.
    let mut normals: Vec<Vec<T>> = Vec::with_capacity(rows.len());
    let mut offsets: Vec<T> = Vec::with_capacity(rows.len());
    for row in rows {
        let mut c = vec![T::zero(); n];
        for &(i, a) in &row.terms {
            if i >= n {
                return Err(Error::InvalidArgument(format!("constraint references x[{i}]")));
            }
            c[i] = c[i] - a / scale[i];
        }
        let norm = c.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt();
        if norm == T::zero() {
            // 0 <= rhs: either vacuous or infeasible.
            if row.rhs < T::zero() {
                return Err(Error::Infeasible);
            }
            normals.push(c);
            offsets.push(T::neg_infinity());
            continue;
        }
        normals.push(c.iter().map(|&v| v / norm).collect());
        offsets.push(-row.rhs / norm);
    }

    let y0: Vec<T> = target.iter().zip(&scale).map(|(&t, &s)| t * s).collect();
    let (y, active, multipliers) = dual_active_set(y0, &normals, &offsets)?;
    let x = y.iter().zip(&scale).map(|(&v, &s)| v / s).collect();
    Ok(Projection { x, active, multipliers })
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn dual_active_set<T: Real>(
    mut y: Vec<T>,
    normals: &[Vec<T>],
    offsets: &[T],
) -> Result<(Vec<T>, Vec<usize>, Vec<T>)> {
    let tol = tolerance::<T>();
    let m = normals.len();
    let mut active: Vec<usize> = Vec::new();
    let mut u: Vec<T> = Vec::new();
    let slack = |y: &[T], j: usize| dot(&normals[j], y) - offsets[j];
    let max_steps = 50 * (m + y.len() + 1);
    let mut steps = 0;

    loop {
        let violated = (0..m)
            .filter(|j| !active.contains(j))
            .map(|j| (j, slack(&y, j)))
            .filter(|&(_, s)| s < -tol)
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite slack"));
        let Some((p, _)) = violated else {
            return Ok((y, active, u));
        };
        let mut u_new = T::zero();
        loop {
            steps += 1;
            if steps > max_steps {
                return Err(Error::NoConvergence("active-set projection"));
            }
            let np = &normals[p];
            let (z, r) = split_direction(np, &active, normals)?;
            let mut t1 = T::infinity();
            let mut drop = None;
            for (idx, &rj) in r.iter().enumerate() {
                if rj > tol {
                    let ratio = u[idx] / rj;
                    if ratio < t1 {
                        t1 = ratio;
                        drop = Some(idx);
                    }
                }
            }
            let zz = dot(&z, np);
            let t2 = if zz > tol { -slack(&y, p) / zz } else { T::infinity() };
            let t = t1.min(t2);
            if t.is_infinite() {
                return Err(Error::Infeasible);
            }
            for (uj, &rj) in u.iter_mut().zip(&r) {
                *uj = *uj - t * rj;
            }
            u_new = u_new + t;
            if t2.is_finite() {
                for (yi, &zi) in y.iter_mut().zip(&z) {
                    *yi = *yi + t * zi;
                }
            }
            if t2 <= t1 {
                active.push(p);
                u.push(u_new);
                break;
            }
            let k = drop.expect("finite t1 has an index");
            active.remove(k);
            u.remove(k);
        }
    }
}

/// Splits `np` into its component `z` orthogonal to the active normals and
/// the coefficients `r` of its projection onto them.
fn split_direction<T: Real>(np: &[T], active: &[usize], normals: &[Vec<T>]) -> Result<(Vec<T>, Vec<T>)> {
    let k = active.len();
    if k == 0 {
        return Ok((np.to_vec(), Vec::new()));
    }
    let mut gram = vec![vec![T::zero(); k]; k];
    let mut rhs = vec![T::zero(); k];
    for (a, &ja) in active.iter().enumerate() {
        rhs[a] = dot(&normals[ja], np);
        for (b, &jb) in active.iter().enumerate() {
            gram[a][b] = dot(&normals[ja], &normals[jb]);
        }
    }
    let r = solve_linear(gram, rhs)?;
    let mut z = np.to_vec();
    for (&coef, &j) in r.iter().zip(active) {
        for (zi, &ni) in z.iter_mut().zip(&normals[j]) {
            *zi = *zi - coef * ni;
        }
    }
    Ok((z, r))
}

/// Gaussian elimination with partial pivoting.
fn solve_linear<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).expect("finite"))
            .expect("nonempty");
        if a[pivot][col].abs() <= T::epsilon() {
            return Err(Error::NoConvergence("active-set projection (singular active set)"));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (top, rest) = a.split_at_mut(row);
            for (x, &y) in rest[0][col..].iter_mut().zip(&top[col][col..]) {
                *x = *x - f * y;
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let s = (row + 1..n).fold(b[row], |acc, c| acc - a[row][c] * x[c]);
        x[row] = s / a[row][row];
    }
    Ok(x)
}

/// Largest number of variables accepted by [`minmax_isotonic`].
pub const MINMAX_LIMIT: usize = 16;

/// Isotonic regression under the partial order generated by `order`
/// (`(a, b)` means `x_a <= x_b`), then capped at `cap`:
///
/// `x*_i = min(cap, max_{U upper, i in U} min_{L lower, i in L} Av_w(L ∩ U))`.
pub fn minmax_isotonic<T: Real>(values: &[T], weights: &[T], order: &[(usize, usize)], cap: T) -> Result<Vec<T>> {
    let n = values.len();
    if n > MINMAX_LIMIT {
        return Err(Error::CapExceeded {
            what: "min-max variables",
            size: n as u128,
            cap: MINMAX_LIMIT as u128,
        });
    }
    // Reflexive-transitive closure as bitmasks: above[i] = {j : i <= j}.
    let mut above: Vec<u32> = (0..n).map(|i| 1u32 << i).collect();
    for &(a, b) in order {
        above[a] |= 1 << b;
    }
    for k in 0..n {
        for i in 0..n {
            if above[i] & (1 << k) != 0 {
                above[i] |= above[k];
            }
        }
    }
    let is_upper = |s: u32| (0..n).all(|i| s & (1 << i) == 0 || above[i] & !s == 0);
    let is_lower = |s: u32| (0..n).all(|i| s & (1 << i) != 0 || above[i] & s == 0);
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let uppers: Vec<u32> = (1..=full).filter(|&s| is_upper(s)).collect();
    let lowers: Vec<u32> = (1..=full).filter(|&s| is_lower(s)).collect();
    let average = |s: u32| {
        let (mut num, mut den) = (T::zero(), T::zero());
        for i in 0..n {
            if s & (1 << i) != 0 {
                num = num + weights[i] * values[i];
                den = den + weights[i];
            }
        }
        num / den
    };
    let out = (0..n)
        .map(|i| {
            let bit = 1u32 << i;
            let best = uppers
                .iter()
                .filter(|&&u| u & bit != 0)
                .map(|&u| {
                    lowers
                        .iter()
                        .filter(|&&l| l & bit != 0)
                        .map(|&l| average(u & l))
                        .fold(T::infinity(), Float::min)
                })
                .fold(T::neg_infinity(), Float::max);
            best.min(cap)
        })
        .collect();
    Ok(out)
}
