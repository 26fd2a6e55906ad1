//! Functions on finite balls of the tree.
//!
//! A [`TreeFunction`] stores one complex value per vertex of `B(o, R)`,
//! level by level in sphere order — the dense counterpart of the sparse
//! entry list used on disk. It does double duty: as a finitely supported
//! function (zero outside the ball) and as the restriction of a global
//! eigenfunction to a ball (undefined outside). The neighbour-averaging
//! Laplacian and the eigenfunction residual live here too, since they
//! only need the container and the index arithmetic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{TreeParams, Vertex};

/// A complex-valued function on a ball `B(o, R)`, stored per level in
/// sphere order.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeFunction {
    params: TreeParams,
    levels: Vec<Vec<Complex64>>,
}

impl TreeFunction {
    /// The zero function on `B(o, radius)`.
    pub fn zero(params: TreeParams, radius: usize) -> Result<Self> {
        let mut levels = Vec::with_capacity(radius + 1);
        for n in 0..=radius {
            levels.push(vec![Complex64::ZERO; params.checked_sphere_len(n)?]);
        }
        Ok(TreeFunction { params, levels })
    }

    /// Wrap explicit per-level values; every level must have the sphere's
    /// cardinality and at least the root level must be present.
    pub fn from_levels(params: TreeParams, levels: Vec<Vec<Complex64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidData(
                "a tree function needs at least the root level".into(),
            ));
        }
        for (n, level) in levels.iter().enumerate() {
            let expected = params.checked_sphere_len(n)?;
            if level.len() != expected {
                return Err(Error::InvalidData(format!(
                    "level {n} has {} values, sphere has {expected}",
                    level.len()
                )));
            }
        }
        Ok(TreeFunction { params, levels })
    }

    /// Evaluate a closure on every vertex of the ball.
    pub fn from_fn(
        params: TreeParams,
        radius: usize,
        mut f: impl FnMut(&Vertex) -> Complex64,
    ) -> Result<Self> {
        let mut levels = Vec::with_capacity(radius + 1);
        for n in 0..=radius {
            let len = params.checked_sphere_len(n)?;
            let mut level = Vec::with_capacity(len);
            for i in 0..len {
                level.push(f(&Vertex::from_sphere_index(params, n, i)));
            }
            levels.push(level);
        }
        Ok(TreeFunction { params, levels })
    }

    /// The function that is 1 at `x` and 0 elsewhere, on `B(o, |x|)`.
    pub fn delta(params: TreeParams, x: &Vertex) -> Result<Self> {
        let mut f = TreeFunction::zero(params, x.len())?;
        f.levels[x.len()][x.sphere_index(params)] = Complex64::ONE;
        Ok(f)
    }

    pub fn params(&self) -> TreeParams {
        self.params
    }

    /// Radius of the ball the values cover.
    pub fn radius(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[Vec<Complex64>] {
        &self.levels
    }

    /// Values on `S(o, n)` in sphere order.
    pub fn level(&self, n: usize) -> &[Complex64] {
        &self.levels[n]
    }

    /// Value at a vertex, `None` outside the stored ball.
    pub fn value(&self, x: &Vertex) -> Option<Complex64> {
        self.levels
            .get(x.len())
            .map(|level| level[x.sphere_index(self.params)])
    }

    /// Value under the finitely-supported reading: zero off the ball.
    pub fn value_or_zero(&self, x: &Vertex) -> Complex64 {
        self.value(x).unwrap_or(Complex64::ZERO)
    }

    pub fn at(&self, level: usize, index: usize) -> Complex64 {
        self.levels[level][index]
    }

    pub fn set_at(&mut self, level: usize, index: usize, value: Complex64) {
        self.levels[level][index] = value;
    }

    pub fn set(&mut self, x: &Vertex, value: Complex64) -> Result<()> {
        if x.len() > self.radius() {
            return Err(Error::DomainTooSmall {
                needed: x.len(),
                have: self.radius(),
            });
        }
        self.levels[x.len()][x.sphere_index(self.params)] = value;
        Ok(())
    }

    /// Neighbour average `(1/(q+1)) sum_{y ~ x} u(y)` at the vertex with
    /// the given level and sphere index; defined for `level < radius`.
    pub fn laplacian_at(&self, level: usize, index: usize) -> Complex64 {
        let q = self.params.q() as usize;
        let mut total = Complex64::ZERO;
        if level == 0 {
            for &v in &self.levels[1] {
                total += v;
            }
        } else {
            total += if level == 1 {
                self.levels[0][0]
            } else {
                self.levels[level - 1][index / q]
            };
            for child in 0..q {
                total += self.levels[level + 1][index * q + child];
            }
        }
        total / (q as f64 + 1.0)
    }

    /// The neighbour average on the whole interior, as a function on the
    /// ball one radius smaller.
    pub fn laplacian(&self) -> Result<TreeFunction> {
        if self.radius() == 0 {
            return Err(Error::DomainTooSmall { needed: 1, have: 0 });
        }
        let levels = (0..self.radius())
            .map(|n| {
                (0..self.levels[n].len())
                    .map(|i| self.laplacian_at(n, i))
                    .collect()
            })
            .collect();
        TreeFunction::from_levels(self.params, levels)
    }

    /// Largest deviation `|Lu - gamma u|` over the interior of the ball
    /// (all vertices whose neighbours are all stored).
    pub fn eigen_residual(&self, gamma: Complex64) -> f64 {
        let mut worst = 0.0f64;
        for level in 0..self.radius() {
            for index in 0..self.levels[level].len() {
                let gap =
                    (self.laplacian_at(level, index) - gamma * self.levels[level][index]).norm();
                worst = worst.max(gap);
            }
        }
        worst
    }

    /// Sum of `|u|^2` over the ball (the counting-measure square norm).
    pub fn norm_sq(&self) -> f64 {
        self.levels.iter().flatten().map(|v| v.norm_sqr()).sum()
    }
}

/// Disk form: branching number plus the nonzero entries, each a
/// digit-string vertex with real and imaginary parts.
#[derive(Serialize, Deserialize)]
struct SparseEntry {
    v: String,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct TreeFunctionData {
    q: u32,
    entries: Vec<SparseEntry>,
}

impl Serialize for TreeFunction {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let mut entries = Vec::new();
        for (n, level) in self.levels.iter().enumerate() {
            for (i, &value) in level.iter().enumerate() {
                if value != Complex64::ZERO {
                    entries.push(SparseEntry {
                        v: Vertex::from_sphere_index(self.params, n, i).to_digits(),
                        re: value.re,
                        im: value.im,
                    });
                }
            }
        }
        TreeFunctionData {
            q: self.params.q(),
            entries,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TreeFunction {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let data = TreeFunctionData::deserialize(deserializer)?;
        let params = TreeParams::new(data.q).map_err(DeError::custom)?;
        let mut parsed = Vec::with_capacity(data.entries.len());
        let mut radius = 0usize;
        for entry in &data.entries {
            let x = Vertex::parse(&entry.v)
                .and_then(|x| Vertex::from_word(x.word(), params))
                .map_err(DeError::custom)?;
            radius = radius.max(x.len());
            parsed.push((x, Complex64::new(entry.re, entry.im)));
        }
        let mut f = TreeFunction::zero(params, radius).map_err(DeError::custom)?;
        let mut seen = std::collections::HashSet::new();
        for (x, value) in parsed {
            if !seen.insert(x.clone()) {
                return Err(DeError::custom(format!(
                    "duplicate entry for vertex \"{x}\""
                )));
            }
            f.set(&x, value).map_err(DeError::custom)?;
        }
        Ok(f)
    }
}
