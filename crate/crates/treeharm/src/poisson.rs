//! The Poisson kernel and transform, the sector and ball maximal
//! operators, and recovery of boundary data from an eigenfunction.
//!
//! The kernel against a boundary ray through `omega` is `q^h(x, omega)`
//! with integer height `h = 2 <x, omega> - |x|`, so the complex power
//! `p^(1/2 + iz)(x, .)` only ever takes the values `q^((1/2 + iz) h)` for
//! `|h| <= |x|`. Everything in this module reads those powers from one
//! shared table per parameter, which keeps different evaluation routes of
//! the same quantity bit-identical and makes the transform cheap.
//!
//! The transform itself is evaluated by geodesic decomposition: the
//! boundary splits along the root geodesic of `x` into the rings
//! `E(x_j) \ E(x_(j+1))` on which the height is constant, so
//!
//! ```text
//! P_z F(x) = sum_j q^((1/2 + iz)(2j - |x|)) (J_j - J_(j+1)),
//! J_j = integral of F over E(x_j),
//! ```
//!
//! and the cylinder integrals `J_j` come from one prefix-sum pass over the
//! refined values of `F`. One evaluation costs `O(|x|)` after `O(#F)`
//! preparation — the naive sum over all cylinders is kept in the tests as
//! the oracle.

use num_complex::Complex64;

use crate::boundary::{cylinder_measure_f64, CylinderFunction, Martingale};
use crate::error::{Error, Result};
use crate::spectral::{q_pow, SpectralParam};
use crate::tree::{ancestor_index, index_lcp, sector_range, TreeParams, Vertex};
use crate::treefn::TreeFunction;

/// Dimension cap for the dense recovery solves.
pub const MAX_RECOVERY_SYSTEM: usize = 2048;

/// An eigenfunction handed to the recovery map must satisfy the eigen
/// equation on the interior to this accuracy.
const EIGEN_TOL: f64 = 1e-10;

/// Relative pivot threshold below which a recovery system is reported
/// singular rather than solved.
const PIVOT_TOL: f64 = 1e-12;

/// Table of the kernel powers `q^((1/2 + iz) h)` for `|h| <= hmax`.
pub(crate) struct KernelPowers {
    offset: i64,
    table: Vec<Complex64>,
}

impl KernelPowers {
    pub(crate) fn new(z: &SpectralParam, hmax: usize) -> Self {
        let w = Complex64::new(0.5, 0.0) + Complex64::I * z.z();
        let hmax = hmax as i64;
        let table = (-hmax..=hmax)
            .map(|h| q_pow(z.params(), w * h as f64))
            .collect();
        KernelPowers {
            offset: hmax,
            table,
        }
    }

    pub(crate) fn value(&self, h: i64) -> Complex64 {
        self.table[(h + self.offset) as usize]
    }
}

/// The kernel power `p^(1/2 + iz)(x, .)` as a cylinder function of depth
/// `|x|` (the height is constant on every cylinder of that depth).
pub fn poisson_kernel_power(z: SpectralParam, x: &Vertex) -> Result<CylinderFunction> {
    let params = z.params();
    let n = x.len();
    let len = params.checked_sphere_len(n)?;
    let powers = KernelPowers::new(&z, n);
    let ix = x.sphere_index(params);
    let values = (0..len)
        .map(|i| powers.value(2 * index_lcp(params, (n, ix), (n, i)) as i64 - n as i64))
        .collect();
    CylinderFunction::new(params, n, values)
}

/// Shared state for evaluating `P_z F` at many vertices: the power table
/// and one prefix-sum pass over `F` refined to the working depth.
struct TransformPlan {
    params: TreeParams,
    depth: usize,
    prefix: Vec<Complex64>,
    powers: KernelPowers,
}

impl TransformPlan {
    fn new(z: &SpectralParam, f: &CylinderFunction, max_level: usize) -> Result<Self> {
        let params = z.params();
        if params.q() != f.params().q() {
            return Err(Error::BranchingMismatch(params.q(), f.params().q()));
        }
        let depth = f.depth().max(max_level);
        let refined = f.refine(depth)?;
        let mut prefix = Vec::with_capacity(refined.values().len() + 1);
        let mut acc = Complex64::ZERO;
        prefix.push(acc);
        for &v in refined.values() {
            acc += v;
            prefix.push(acc);
        }
        Ok(TransformPlan {
            params,
            depth,
            prefix,
            powers: KernelPowers::new(z, max_level),
        })
    }

    /// Integral of `F` over the cylinder below the level-`j` ancestor of
    /// the level-`n` vertex with the given sphere index.
    fn cylinder_integral(&self, n: usize, index: usize, j: usize) -> Complex64 {
        let count = self.prefix.len() - 1;
        let (a, b) = if j == 0 {
            (0, count)
        } else {
            let anc = ancestor_index(self.params, n, index, j);
            let block = self.params.pow(self.depth - j);
            (anc * block, (anc + 1) * block)
        };
        (self.prefix[b] - self.prefix[a]) / count as f64
    }

    fn eval(&self, n: usize, index: usize) -> Complex64 {
        let mut total = Complex64::ZERO;
        let mut deeper = Complex64::ZERO;
        for j in (0..=n).rev() {
            let here = self.cylinder_integral(n, index, j);
            total += self.powers.value(2 * j as i64 - n as i64) * (here - deeper);
            deeper = here;
        }
        total
    }
}

/// The Poisson transform `P_z F(x) = integral of p^(1/2 + iz)(x, .) F`
/// at one vertex.
pub fn poisson_transform(z: SpectralParam, f: &CylinderFunction, x: &Vertex) -> Result<Complex64> {
    let plan = TransformPlan::new(&z, f, x.len())?;
    Ok(plan.eval(x.len(), x.sphere_index(z.params())))
}

/// The Poisson transform on the whole ball `B(o, radius)`.
pub fn poisson_transform_ball(
    z: SpectralParam,
    f: &CylinderFunction,
    radius: usize,
) -> Result<TreeFunction> {
    let plan = TransformPlan::new(&z, f, radius)?;
    let params = z.params();
    let mut levels = Vec::with_capacity(radius + 1);
    for n in 0..=radius {
        let len = params.checked_sphere_len(n)?;
        levels.push((0..len).map(|i| plan.eval(n, i)).collect());
    }
    TreeFunction::from_levels(params, levels)
}

fn prefix_sums(values: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(values.len() + 1);
    let mut acc = Complex64::ZERO;
    out.push(acc);
    for &v in values {
        acc += v;
        out.push(acc);
    }
    out
}

/// The resolution-`n` sector average: the identity up to level `n`, and at
/// each deeper vertex the mean of `u` over the sector of its level-`n`
/// ancestor.
pub fn sector_average(u: &TreeFunction, n: usize) -> TreeFunction {
    let params = u.params();
    let mut levels = Vec::with_capacity(u.radius() + 1);
    for (m, level) in u.levels().iter().enumerate() {
        if m <= n {
            levels.push(level.clone());
            continue;
        }
        let prefix = prefix_sums(level);
        levels.push(
            (0..level.len())
                .map(|i| {
                    let range = sector_range(params, n, m, i);
                    (prefix[range.end] - prefix[range.start]) / range.len() as f64
                })
                .collect(),
        );
    }
    TreeFunction::from_levels(params, levels).expect("level shapes preserved")
}

/// The sector maximal function: at `x`, the largest modulus of any sector
/// average `(resolution 0 through |x|)` of `u` at `x`. Values are real and
/// returned in the real part.
pub fn sector_maximal(u: &TreeFunction) -> TreeFunction {
    let params = u.params();
    let mut levels = Vec::with_capacity(u.radius() + 1);
    for (m, level) in u.levels().iter().enumerate() {
        let prefix = prefix_sums(level);
        let mut best = vec![0.0f64; level.len()];
        for n in 0..=m {
            for (i, slot) in best.iter_mut().enumerate() {
                let range = if n == m {
                    i..i + 1
                } else {
                    sector_range(params, n, m, i)
                };
                let avg = (prefix[range.end] - prefix[range.start]) / range.len() as f64;
                *slot = slot.max(avg.norm());
            }
        }
        levels.push(best.into_iter().map(|b| Complex64::new(b, 0.0)).collect());
    }
    TreeFunction::from_levels(params, levels).expect("level shapes preserved")
}

/// Square-root-normalised sums of `|u|` over tree balls — the centered
/// maximal operator `sup_r #B(x,r)^(-1/2) sum_{B(x,r)} |u|` — evaluated
/// by decomposing each ball along the root geodesic of its centre.
/// Building the operator costs one pass over `u`; each query costs
/// `O(|x| * radius)`.
pub struct BallMaximal {
    params: TreeParams,
    radius: usize,
    prefixes: Vec<Vec<f64>>,
}

impl BallMaximal {
    pub fn new(u: &TreeFunction) -> Self {
        let prefixes = u
            .levels()
            .iter()
            .map(|level| {
                let mut p = Vec::with_capacity(level.len() + 1);
                let mut acc = 0.0;
                p.push(acc);
                for v in level {
                    acc += v.norm();
                    p.push(acc);
                }
                p
            })
            .collect();
        BallMaximal {
            params: u.params(),
            radius: u.radius(),
            prefixes,
        }
    }

    /// Sum of `|u|` over the level-`m` slice of vertices whose confluence
    /// with `x` is exactly its level-`j` ancestor.
    fn slice_sum(&self, lx: usize, ix: usize, j: usize, m: usize) -> f64 {
        let range = |anc_level: usize| -> (usize, usize) {
            if anc_level == 0 {
                (0, self.prefixes[m].len() - 1)
            } else {
                let a = ancestor_index(self.params, lx, ix, anc_level);
                let block = self.params.pow(m - anc_level);
                (a * block, (a + 1) * block)
            }
        };
        let (a, b) = range(j);
        let mut total = self.prefixes[m][b] - self.prefixes[m][a];
        if j < lx && m > j {
            let (a, b) = range(j + 1);
            total -= self.prefixes[m][b] - self.prefixes[m][a];
        }
        total
    }

    /// The largest average of `|u|` over the balls `B(x, r)` for
    /// `1 <= r <= r_max`. The whole largest ball must sit inside the
    /// stored domain.
    pub fn at(&self, x: &Vertex, r_max: usize) -> Result<f64> {
        if r_max == 0 {
            return Err(Error::InvalidData(
                "ball maximal function needs at least radius 1".into(),
            ));
        }
        if x.len() + r_max > self.radius {
            return Err(Error::BallExceedsDomain {
                radius: r_max,
                level: x.len(),
                domain: self.radius,
            });
        }
        let lx = x.len();
        let ix = x.sphere_index(self.params);
        let mut by_distance = vec![0.0f64; r_max + 1];
        for j in 0..=lx {
            let hi = r_max as i64 + 2 * j as i64 - lx as i64;
            if hi < j as i64 {
                continue;
            }
            let m_hi = hi as usize;
            for m in j..=m_hi {
                let d = lx + m - 2 * j;
                debug_assert!(d <= r_max && m <= self.radius);
                by_distance[d] += self.slice_sum(lx, ix, j, m);
            }
        }
        let mut best = 0.0f64;
        let mut running = by_distance[0];
        for (r, &shell) in by_distance.iter().enumerate().skip(1) {
            running += shell;
            best = best.max(running / (self.params.ball_size(r) as f64).sqrt());
        }
        Ok(best)
    }
}

/// Solve a dense complex system by Gaussian elimination with partial
/// pivoting; `level` only labels the error on failure.
fn solve_dense(
    mut a: Vec<Vec<Complex64>>,
    mut b: Vec<Complex64>,
    level: usize,
) -> Result<Vec<Complex64>> {
    let n = b.len();
    let scale = a.iter().flatten().map(|v| v.norm()).fold(0.0f64, f64::max);
    if scale == 0.0 {
        return Err(Error::SingularSystem { level });
    }
    for col in 0..n {
        let (best_row, best_mag) = (col..n)
            .map(|r| (r, a[r][col].norm()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).expect("finite pivots"))
            .expect("non-empty pivot column");
        if best_mag < PIVOT_TOL * scale {
            return Err(Error::SingularSystem { level });
        }
        a.swap(col, best_row);
        b.swap(col, best_row);
        let (pivot_rows, lower_rows) = a.split_at_mut(col + 1);
        let pivot_row = &pivot_rows[col];
        let pivot = pivot_row[col];
        let (b_pivot, b_lower) = b.split_at_mut(col + 1);
        let b_head = b_pivot[col];
        for (row_vec, b_row) in lower_rows.iter_mut().zip(b_lower.iter_mut()) {
            let factor = row_vec[col] / pivot;
            if factor == Complex64::ZERO {
                continue;
            }
            for (entry, head) in row_vec[col..].iter_mut().zip(&pivot_row[col..]) {
                *entry -= factor * *head;
            }
            *b_row -= factor * b_head;
        }
    }
    let mut x = vec![Complex64::ZERO; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Reconstruct the boundary martingale of an eigenfunction: for each level
/// `n` up to `depth`, solve for the cylinder function `F_n` whose
/// transform matches `u` on `S(o, n)`. For a genuine transform
/// `u = P_z F` this returns the conditional expectations of `F`.
///
/// The input is first checked to satisfy the eigen equation for
/// `gamma(z)` on the interior of its ball.
///
/// A single sphere does not always determine its level: isolated real
/// parameters make the one-sphere matrix singular (the sector-difference
/// eigenvalue of the `t^lcp` pattern, `t = q^(1 + 2iz)`, has zeros — at
/// `q^(2iz) = i` every level from 4 on degenerates). An eigenfunction still
/// determines the level through deeper spheres, so those solves fall back
/// to least squares over every stored sphere when the ball extends past
/// `n`. At the parameters `(k tau + i)/2` the kernel power collapses on
/// whole spheres and no amount of stacking helps; those solves fail with
/// [`Error::SingularSystem`].
pub fn recover_boundary_martingale(
    z: SpectralParam,
    u: &TreeFunction,
    depth: usize,
) -> Result<Martingale> {
    let params = z.params();
    if params.q() != u.params().q() {
        return Err(Error::BranchingMismatch(params.q(), u.params().q()));
    }
    if depth > u.radius() {
        return Err(Error::DomainTooSmall {
            needed: depth,
            have: u.radius(),
        });
    }
    let residual = u.eigen_residual(z.eigenvalue());
    if residual > EIGEN_TOL {
        return Err(Error::NotEigenfunction {
            residual,
            tol: EIGEN_TOL,
        });
    }
    let powers = KernelPowers::new(&z, depth);
    let mut levels = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        let len = params.checked_sphere_len(n)?;
        if len > MAX_RECOVERY_SYSTEM {
            return Err(Error::SystemTooLarge {
                size: len,
                cap: MAX_RECOVERY_SYSTEM,
            });
        }
        let mass = cylinder_measure_f64(params, n);
        let mut matrix = vec![vec![Complex64::ZERO; len]; len];
        for (r, row) in matrix.iter_mut().enumerate() {
            for (c, slot) in row.iter_mut().enumerate() {
                let h = 2 * index_lcp(params, (n, r), (n, c)) as i64 - n as i64;
                *slot = powers.value(h) * mass;
            }
        }
        let solution = match solve_dense(matrix, u.level(n).to_vec(), n) {
            Ok(solution) => solution,
            Err(Error::SingularSystem { .. }) if n < u.radius() => recover_level_stacked(&z, u, n)?,
            Err(err) => return Err(err),
        };
        levels.push(CylinderFunction::new(params, n, solution)?);
    }
    Martingale::new(levels)
}

/// Level recovery through every stored sphere at once: the transform of
/// each depth-`n` basis cylinder is matched against `u` on the spheres
/// `n..=radius` and the normal equations are solved. Used when the
/// one-sphere system is singular; still singular exactly when the stacked
/// columns are dependent, as at the parameters `(k tau + i)/2`.
fn recover_level_stacked(z: &SpectralParam, u: &TreeFunction, n: usize) -> Result<Vec<Complex64>> {
    let params = z.params();
    let len = params.checked_sphere_len(n)?;
    let radius = u.radius();
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(len);
    for j in 0..len {
        let mut values = vec![Complex64::ZERO; len];
        values[j] = Complex64::ONE;
        let basis = CylinderFunction::new(params, n, values)?;
        let plan = TransformPlan::new(z, &basis, radius)?;
        let mut column = Vec::new();
        for m in n..=radius {
            let count = params.checked_sphere_len(m)?;
            column.extend((0..count).map(|i| plan.eval(m, i)));
        }
        columns.push(column);
    }
    let mut rhs = Vec::new();
    for m in n..=radius {
        rhs.extend_from_slice(u.level(m));
    }
    let mut matrix = vec![vec![Complex64::ZERO; len]; len];
    let mut b = vec![Complex64::ZERO; len];
    for r in 0..len {
        for c in 0..len {
            matrix[r][c] = columns[r]
                .iter()
                .zip(&columns[c])
                .map(|(a, v)| a.conj() * v)
                .sum();
        }
        b[r] = columns[r].iter().zip(&rhs).map(|(a, v)| a.conj() * v).sum();
    }
    solve_dense(matrix, b, n)
}

/// The growth-normalised coefficient `B'(n, m, z) = q^(m/2) B(n, m, z)`,
/// a bounded oscillation in `m`. Computed directly (never as
/// `q^(m/2) * B`), so it stays finite for arbitrarily large `m`.
fn b_prime(n: usize, m: usize, z: &SpectralParam) -> Result<Complex64> {
    if z.z().im != 0.0 {
        return Err(Error::InvalidData(
            "transform coefficients are defined for real spectral parameters".into(),
        ));
    }
    let c = z.c_function()?;
    if m < n {
        return Ok(Complex64::ZERO);
    }
    let params = z.params();
    let is = Complex64::I * z.z();
    let phase = |k: f64| q_pow(params, is * k);
    if n == 0 {
        Ok(phase(-(m as f64)) + c * (phase(m as f64) - phase(-(m as f64))))
    } else {
        let k = (m - n + 1) as f64;
        Ok(c * phase(n as f64 - 1.0) * (phase(k) - phase(-k)))
    }
}

/// Coefficient through which the Poisson transform of a depth-`n`
/// martingale difference shows up at distance `m` along a boundary ray:
/// `P_z(diff_n F)` at the `m`-th vertex of the ray equals
/// `b_coeff(n, m, z)` times the difference's value on the ray. Defined
/// for real non-degenerate `z`; vanishes for `m < n`.
pub fn b_coeff(n: usize, m: usize, z: &SpectralParam) -> Result<Complex64> {
    let prime = b_prime(n, m, z)?;
    Ok(q_pow(z.params(), Complex64::new(-(m as f64) / 2.0, 0.0)) * prime)
}

/// Direct partial sum `sum_{m=n}^{big_n} |B'(n, m, z)|^2`. Empty (zero)
/// when `big_n < n`. Divided by `big_n` this converges to `2|c(z)|^2`,
/// which is what keeps the martingale levels of a weak-type eigenfunction
/// uniformly bounded.
pub fn b_prime_sumsq(n: usize, big_n: usize, z: &SpectralParam) -> Result<f64> {
    if big_n < n {
        // validate the parameter even for the empty sum
        b_prime(n, n, z)?;
        return Ok(0.0);
    }
    let mut total = 0.0;
    for m in n..=big_n {
        total += b_prime(n, m, z)?.norm_sqr();
    }
    Ok(total)
}

/// The same partial sum in closed form, via the geometric series of the
/// squared phases. Agrees with the direct route to rounding error and
/// costs `O(1)`.
pub fn b_prime_sumsq_closed(n: usize, big_n: usize, z: &SpectralParam) -> Result<f64> {
    // same validation path as the direct sum
    b_prime(n, n.max(1), z)?;
    if big_n < n {
        return Ok(0.0);
    }
    let params = z.params();
    let c = z.c_function()?;
    let is2 = Complex64::new(0.0, 2.0 * z.z().re);
    let t = q_pow(params, is2);
    let total = if n == 0 {
        let nf = big_n as f64;
        // geometric sum of q^(2ism) over 1 <= m <= big_n
        let g = t * (Complex64::ONE - q_pow(params, is2 * nf)) / (Complex64::ONE - t);
        Complex64::from(nf + 1.0)
            + c.norm_sqr() * (Complex64::from(2.0 * nf) - g - g.conj())
            + c * (g - nf)
            + c.conj() * (g.conj() - nf)
    } else {
        let k = (big_n - n + 1) as f64;
        // geometric sum over the k phase steps of the difference term
        let g = t / (Complex64::ONE - t) * (Complex64::ONE - q_pow(params, is2 * k));
        c.norm_sqr() * (Complex64::from(2.0 * k) - g - g.conj())
    };
    debug_assert!(total.im.abs() < 1e-9 * total.re.abs().max(1.0));
    Ok(total.re)
}

/// Largest deviation, over one ray per deepest cylinder, between the
/// Poisson transform of the level-`n` martingale difference of `F` at the
/// ray's depth-`m` vertex and `b_coeff(n, m, z)` times the difference's
/// value on the ray. Rays through a common depth-`m` vertex give equal
/// deviations, so the maximum is taken over the depth-`m` sphere.
pub fn poisson_of_diff_check(
    f: &CylinderFunction,
    n: usize,
    m: usize,
    z: &SpectralParam,
) -> Result<f64> {
    let coeff = b_coeff(n, m, z)?;
    if f.params().q() != z.params().q() {
        return Err(Error::BranchingMismatch(z.params().q(), f.params().q()));
    }
    let diff = f.diff(n)?;
    let plan = TransformPlan::new(z, &diff, m)?;
    let side = if m < n { None } else { Some(diff.refine(m)?) };
    let len = f.params().checked_sphere_len(m)?;
    let mut worst = 0.0f64;
    for i in 0..len {
        let lhs = plan.eval(m, i);
        let rhs = match &side {
            Some(refined) => coeff * refined.values()[i],
            None => Complex64::ZERO,
        };
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}
