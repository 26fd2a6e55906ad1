//! The boundary at infinity and simple functions on it.
//!
//! A boundary point is an infinite non-backtracking ray from the root; the
//! cylinder `E(x)` collects the rays passing through `x`. The harmonic
//! measure seen from the root gives every depth-`j` cylinder the same mass
//! `q / ((q+1) q^j)`, so a "simple function of depth `n`" — one value per
//! depth-`n` cylinder — integrates as a plain average. Conditional
//! expectation onto coarser cylinder algebras, martingale differences and
//! the associated maximal function are all exact block operations on the
//! lexicographically ordered value vector.

use num_complex::Complex64;
use num_rational::Ratio;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tree::{TreeParams, Vertex};

/// Harmonic measure of a depth-`level` cylinder, as an exact rational:
/// the whole boundary has mass 1, and `nu(E(x)) = q / ((q+1) q^{|x|})`
/// for `|x| >= 1`.
pub fn cylinder_measure(params: TreeParams, level: usize) -> Ratio<i128> {
    if level == 0 {
        return Ratio::from_integer(1);
    }
    let q = params.q() as i128;
    Ratio::new(q, (q + 1) * q.pow(level as u32))
}

/// `cylinder_measure` as a float, for weighting complex values.
pub fn cylinder_measure_f64(params: TreeParams, level: usize) -> f64 {
    let m = cylinder_measure(params, level);
    *m.numer() as f64 / *m.denom() as f64
}

/// A simple function on the boundary, constant on depth-`n` cylinders.
///
/// `values[i]` is the value on the cylinder of the `i`-th vertex of
/// `S(o, n)` in lexicographic order. Depth 0 means a constant function.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderFunction {
    params: TreeParams,
    depth: usize,
    values: Vec<Complex64>,
}

impl CylinderFunction {
    /// Wrap an explicit value vector; its length must match `S(o, depth)`.
    pub fn new(params: TreeParams, depth: usize, values: Vec<Complex64>) -> Result<Self> {
        let expected = params.checked_sphere_len(depth)?;
        if values.len() != expected {
            return Err(Error::InvalidData(format!(
                "depth {depth} needs {expected} values, got {}",
                values.len()
            )));
        }
        Ok(CylinderFunction {
            params,
            depth,
            values,
        })
    }

    /// The constant function (depth 0).
    pub fn constant(params: TreeParams, value: Complex64) -> Self {
        CylinderFunction {
            params,
            depth: 0,
            values: vec![value],
        }
    }

    /// Indicator of the cylinder `E(x)`, at depth `|x|`.
    pub fn indicator(params: TreeParams, x: &Vertex) -> Result<Self> {
        let len = params.checked_sphere_len(x.len())?;
        let mut values = vec![Complex64::ZERO; len];
        values[x.sphere_index(params)] = Complex64::ONE;
        CylinderFunction::new(params, x.len(), values)
    }

    pub fn params(&self) -> TreeParams {
        self.params
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Value on the cylinder `E(x)`; `x` must lie at the storage depth.
    pub fn value_at(&self, x: &Vertex) -> Complex64 {
        assert_eq!(x.len(), self.depth, "vertex not at the storage depth");
        self.values[x.sphere_index(self.params)]
    }

    fn check_same_tree(&self, other: &CylinderFunction) -> Result<()> {
        if self.params.q() != other.params.q() {
            return Err(Error::BranchingMismatch(self.params.q(), other.params.q()));
        }
        Ok(())
    }

    /// Boundary integral against harmonic measure. Equal cylinder masses
    /// make this the arithmetic mean of the stored values.
    pub fn integrate(&self) -> Complex64 {
        mean(&self.values)
    }

    /// `L^r` norm with respect to the boundary measure, `r` in `[1, inf]`
    /// (`inf` gives the sup of the moduli). Since all cylinders of one
    /// depth carry equal mass, the integral of `|f|^r` is a plain mean.
    pub fn lp_norm(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 1.0 {
            return Err(Error::InvalidExponent {
                value: r,
                expected: "exponent in [1, inf]",
            });
        }
        if r.is_infinite() {
            return Ok(self.values.iter().map(|v| v.norm()).fold(0.0, f64::max));
        }
        let total: f64 = self.values.iter().map(|v| v.norm().powf(r)).sum();
        Ok((total / self.values.len() as f64).powf(1.0 / r))
    }

    /// Re-express the function at a finer depth `m >= depth` (values repeat
    /// across descendant blocks; the function itself is unchanged).
    pub fn refine(&self, m: usize) -> Result<CylinderFunction> {
        if m < self.depth {
            return Err(Error::RefineDepth {
                from: self.depth,
                to: m,
            });
        }
        let target = self.params.checked_sphere_len(m)?;
        if m == self.depth {
            return Ok(self.clone());
        }
        let block = target / self.values.len();
        let mut values = Vec::with_capacity(target);
        for v in &self.values {
            values.extend(std::iter::repeat_n(*v, block));
        }
        CylinderFunction::new(self.params, m, values)
    }

    /// Conditional expectation onto depth-`m` cylinders. For `m >= depth`
    /// this is `refine`; for `m < depth` each coarse value is the plain
    /// average over its descendant block (equal masses, equal weights).
    pub fn cond_expect(&self, m: usize) -> Result<CylinderFunction> {
        if m >= self.depth {
            return self.refine(m);
        }
        if m == 0 {
            return Ok(CylinderFunction::constant(self.params, self.integrate()));
        }
        let coarse_len = self.params.checked_sphere_len(m)?;
        let block = self.values.len() / coarse_len;
        let values = (0..coarse_len)
            .map(|i| mean(&self.values[i * block..(i + 1) * block]))
            .collect();
        CylinderFunction::new(self.params, m, values)
    }

    /// Martingale difference: `diff(n) = cond_expect(n) - cond_expect(n-1)`
    /// at depth `n`, with `diff(0) = cond_expect(0)`.
    pub fn diff(&self, n: usize) -> Result<CylinderFunction> {
        let fine = self.cond_expect(n)?;
        if n == 0 {
            return Ok(fine);
        }
        let coarse = self.cond_expect(n - 1)?.refine(n)?;
        let values = fine
            .values
            .iter()
            .zip(coarse.values.iter())
            .map(|(a, b)| a - b)
            .collect();
        CylinderFunction::new(self.params, n, values)
    }

    /// `L^2` inner product `∫ F conj(G) dnu`, conjugate-linear in `G`.
    pub fn inner(&self, other: &CylinderFunction) -> Result<Complex64> {
        self.check_same_tree(other)?;
        let depth = self.depth.max(other.depth);
        let a = self.refine(depth)?;
        let b = other.refine(depth)?;
        let products: Vec<Complex64> = a
            .values
            .iter()
            .zip(b.values.iter())
            .map(|(x, y)| x * y.conj())
            .collect();
        Ok(mean(&products))
    }

    /// Bilinear pairing `∫ F G dnu` (no conjugation).
    pub fn pairing(&self, other: &CylinderFunction) -> Result<Complex64> {
        self.check_same_tree(other)?;
        let depth = self.depth.max(other.depth);
        let a = self.refine(depth)?;
        let b = other.refine(depth)?;
        let products: Vec<Complex64> = a
            .values
            .iter()
            .zip(b.values.iter())
            .map(|(x, y)| x * y)
            .collect();
        Ok(mean(&products))
    }

    /// All conditional expectations at once: entry `n` holds the value
    /// vector of `cond_expect(n)`. Built by one bottom-up averaging pass.
    fn level_averages(&self) -> Vec<Vec<Complex64>> {
        let q = self.params.q() as usize;
        let mut levels = vec![Vec::new(); self.depth + 1];
        levels[self.depth] = self.values.clone();
        for n in (0..self.depth).rev() {
            let finer = &levels[n + 1];
            let len = self.params.sphere_size(n) as usize;
            let block = finer.len() / len;
            levels[n] = (0..len)
                .map(|i| mean(&finer[i * block..(i + 1) * block]))
                .collect();
            debug_assert!(n == 0 || block == q);
        }
        levels
    }

    /// The martingale maximal function `sup_n |E_n F|`, evaluated on the
    /// finest cylinders (depth of `F`). Values are real, stored in the
    /// real part.
    pub fn maximal(&self) -> CylinderFunction {
        let levels = self.level_averages();
        let mut running: Vec<f64> = vec![levels[0][0].norm()];
        for level in levels.iter().skip(1) {
            let block = level.len() / running.len();
            let next = level
                .iter()
                .enumerate()
                .map(|(i, v)| running[i / block].max(v.norm()))
                .collect();
            running = next;
        }
        CylinderFunction {
            params: self.params,
            depth: self.depth,
            values: running
                .into_iter()
                .map(|r| Complex64::new(r, 0.0))
                .collect(),
        }
    }
}

fn mean(values: &[Complex64]) -> Complex64 {
    let sum: Complex64 = values.iter().sum();
    sum / values.len() as f64
}

/// A compatible sequence of cylinder functions `(F_n)`, with `F_n` stored
/// at depth `n`. Compatibility (`cond_expect(F_n, m) = F_m`) is the
/// defining property; [`Martingale::compatibility_residual`] measures how
/// far a candidate sequence is from satisfying it.
#[derive(Debug, Clone)]
pub struct Martingale {
    levels: Vec<CylinderFunction>,
}

impl Martingale {
    /// Wrap a sequence; entry `n` must be stored at depth `n` and all
    /// entries must live on the same tree.
    pub fn new(levels: Vec<CylinderFunction>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidData(
                "martingale needs at least level 0".into(),
            ));
        }
        let q = levels[0].params().q();
        for (n, f) in levels.iter().enumerate() {
            if f.depth() != n {
                return Err(Error::InvalidData(format!(
                    "martingale level {n} stored at depth {}",
                    f.depth()
                )));
            }
            if f.params().q() != q {
                return Err(Error::BranchingMismatch(q, f.params().q()));
            }
        }
        Ok(Martingale { levels })
    }

    /// The canonical martingale of a simple function: `F_n = E_n F`.
    pub fn from_function(f: &CylinderFunction) -> Martingale {
        let levels = f
            .level_averages()
            .into_iter()
            .enumerate()
            .map(|(n, values)| CylinderFunction {
                params: f.params(),
                depth: n,
                values,
            })
            .collect();
        Martingale { levels }
    }

    /// Number of stored levels (final depth + 1).
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, n: usize) -> &CylinderFunction {
        &self.levels[n]
    }

    pub fn levels(&self) -> &[CylinderFunction] {
        &self.levels
    }

    /// Largest deviation from the tower property across all level pairs:
    /// `max_{m <= n} ||E_m F_n - F_m||_inf`. Zero (up to rounding) for a
    /// genuine martingale.
    pub fn compatibility_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for n in 0..self.levels.len() {
            for m in 0..n {
                let pooled = self.levels[n].cond_expect(m).expect("depths validated");
                for (a, b) in pooled.values.iter().zip(self.levels[m].values.iter()) {
                    worst = worst.max((a - b).norm());
                }
            }
        }
        worst
    }
}

#[derive(Serialize, Deserialize)]
struct CylinderFunctionData {
    q: u32,
    depth: usize,
    values: Vec<[f64; 2]>,
}

impl Serialize for CylinderFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CylinderFunctionData {
            q: self.params.q(),
            depth: self.depth,
            values: self.values.iter().map(|v| [v.re, v.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CylinderFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let data = CylinderFunctionData::deserialize(deserializer)?;
        let params = TreeParams::new(data.q).map_err(D::Error::custom)?;
        let values = data
            .values
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        CylinderFunction::new(params, data.depth, values).map_err(D::Error::custom)
    }
}
