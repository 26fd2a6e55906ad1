//! Geometry of the homogeneous tree.
//!
//! The tree of degree `q + 1` is encoded by words over edge labels: a
//! vertex is the label sequence of its geodesic from the root `o`. The
//! first step can take any of the `q + 1` edges at the root, every later
//! step any of the `q` edges that do not backtrack, so a word is a first
//! letter in `0..=q` followed by letters in `0..q`. The empty word is the
//! root. Lexicographic order on words of a fixed length is the canonical
//! enumeration order used everywhere in this crate; all index arithmetic
//! (ancestors, descendant blocks) is relative to that order.

use crate::error::{Error, Result};

/// Default cylinder budget: the sphere of depth 22 over `q = 2`.
pub const DEFAULT_CYLINDER_CAP: u64 = 3 * (1 << 21);

/// The tree degree parameter together with the enumeration budget.
///
/// `q` is the branching number: every vertex has `q + 1` neighbours. The
/// budget caps how many same-level vertices an operation may enumerate or
/// store, so that a mistyped depth fails fast instead of exhausting memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    q: u32,
    cylinder_cap: u64,
}

impl TreeParams {
    /// Tree with branching number `q`, i.e. degree `q + 1`.
    pub fn new(q: u32) -> Result<Self> {
        if !(2..=9).contains(&q) {
            return Err(Error::InvalidBranching(q));
        }
        Ok(TreeParams {
            q,
            cylinder_cap: DEFAULT_CYLINDER_CAP,
        })
    }

    /// Replace the default enumeration budget.
    pub fn with_cylinder_cap(mut self, cap: u64) -> Self {
        self.cylinder_cap = cap;
        self
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of neighbours of any vertex.
    pub fn degree(&self) -> u32 {
        self.q + 1
    }

    pub fn cylinder_cap(&self) -> u64 {
        self.cylinder_cap
    }

    /// `#S(o, n)`: 1 at the root, `(q + 1) q^{n-1}` for `n >= 1`.
    pub fn sphere_size(&self, n: usize) -> u128 {
        if n == 0 {
            1
        } else {
            (self.q as u128 + 1) * (self.q as u128).pow(n as u32 - 1)
        }
    }

    /// `#B(o, n) = 1 + (q + 1)(q^n - 1)/(q - 1)`.
    pub fn ball_size(&self, n: usize) -> u128 {
        let q = self.q as u128;
        1 + (q + 1) * (q.pow(n as u32) - 1) / (q - 1)
    }

    /// Sphere size as a usize, checked against the cylinder budget.
    pub fn checked_sphere_len(&self, n: usize) -> Result<usize> {
        let size = self.sphere_size(n);
        if size > self.cylinder_cap as u128 {
            return Err(Error::DepthBudget {
                depth: n,
                cylinders: size,
                cap: self.cylinder_cap,
            });
        }
        Ok(size as usize)
    }

    /// Mixed powers of `q` as usize; callers guarantee the exponent is small
    /// enough (they hold a checked sphere length that dominates it).
    pub(crate) fn pow(&self, e: usize) -> usize {
        (self.q as usize).pow(e as u32)
    }
}

/// A vertex, stored as the label word of its root geodesic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    word: Vec<u8>,
}

impl Vertex {
    /// The root `o` (empty word).
    pub fn root() -> Self {
        Vertex { word: Vec::new() }
    }

    /// Build a vertex from an explicit word, validated against `params`.
    pub fn from_word(word: &[u8], params: TreeParams) -> Result<Self> {
        for (pos, &label) in word.iter().enumerate() {
            let bound = if pos == 0 { params.q() } else { params.q() - 1 };
            if u32::from(label) > bound {
                return Err(Error::InvalidWord {
                    label,
                    pos,
                    q: params.q(),
                });
            }
        }
        Ok(Vertex {
            word: word.to_vec(),
        })
    }

    /// Parse the digit-string form: `""` is the root, `"210"` the word
    /// `[2, 1, 0]`. Labels are single decimal digits.
    pub fn parse(s: &str) -> Result<Self> {
        let mut word = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch.to_digit(10) {
                Some(d) => word.push(d as u8),
                None => return Err(Error::VertexParse(s.to_string())),
            }
        }
        Ok(Vertex { word })
    }

    /// Digit-string form of the word; empty for the root.
    pub fn to_digits(&self) -> String {
        self.word.iter().map(|d| char::from(b'0' + d)).collect()
    }

    /// Distance from the root.
    #[allow(clippy::len_without_is_empty)] // `is_root` is the emptiness test
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_root(&self) -> bool {
        self.word.is_empty()
    }

    pub fn word(&self) -> &[u8] {
        &self.word
    }

    /// The neighbour towards the root; `None` at the root itself.
    pub fn parent(&self) -> Option<Vertex> {
        if self.word.is_empty() {
            None
        } else {
            Some(Vertex {
                word: self.word[..self.word.len() - 1].to_vec(),
            })
        }
    }

    /// The ancestor at distance `j` from the root (`j <= len`).
    pub fn prefix(&self, j: usize) -> Vertex {
        assert!(j <= self.len(), "prefix length beyond the word");
        Vertex {
            word: self.word[..j].to_vec(),
        }
    }

    /// Children in lexicographic order: `q + 1` of them at the root,
    /// `q` elsewhere.
    pub fn children(&self, params: TreeParams) -> Vec<Vertex> {
        let count = if self.is_root() {
            params.q() + 1
        } else {
            params.q()
        };
        (0..count as u8)
            .map(|label| {
                let mut word = self.word.clone();
                word.push(label);
                Vertex { word }
            })
            .collect()
    }

    /// Position of this vertex in the lexicographic enumeration of its
    /// sphere `S(o, len)`.
    pub fn sphere_index(&self, params: TreeParams) -> usize {
        let q = params.q() as usize;
        let mut index = 0usize;
        for (pos, &label) in self.word.iter().enumerate() {
            if pos == 0 {
                index = label as usize;
            } else {
                index = index * q + label as usize;
            }
        }
        index
    }

    /// Inverse of [`Vertex::sphere_index`].
    pub fn from_sphere_index(params: TreeParams, level: usize, index: usize) -> Vertex {
        if level == 0 {
            return Vertex::root();
        }
        let q = params.q() as usize;
        let mut word = vec![0u8; level];
        let mut rest = index;
        for pos in (1..level).rev() {
            word[pos] = (rest % q) as u8;
            rest /= q;
        }
        debug_assert!(rest <= q);
        word[0] = rest as u8;
        Vertex { word }
    }
}

impl std::fmt::Display for Vertex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_digits())
    }
}

/// Length of the longest common prefix of the two root geodesics. This is
/// the depth of the confluence point.
pub fn lcp_len(x: &Vertex, y: &Vertex) -> usize {
    x.word
        .iter()
        .zip(y.word.iter())
        .take_while(|(a, b)| a == b)
        .count()
}

/// The confluence `c(x, y)`: the point where the root geodesics of `x`
/// and `y` separate (equivalently, the point of `[x, y]` closest to `o`).
pub fn confluence(x: &Vertex, y: &Vertex) -> Vertex {
    x.prefix(lcp_len(x, y))
}

/// Geodesic distance: `|x| + |y| - 2 |c(x, y)|`.
pub fn distance(x: &Vertex, y: &Vertex) -> usize {
    x.len() + y.len() - 2 * lcp_len(x, y)
}

/// The sphere `S(o, n)` in lexicographic order.
pub fn sphere(params: TreeParams, n: usize) -> Result<Vec<Vertex>> {
    let len = params.checked_sphere_len(n)?;
    Ok((0..len)
        .map(|i| Vertex::from_sphere_index(params, n, i))
        .collect())
}

/// The ball `B(o, n)`, enumerated level by level (each level lexicographic).
pub fn ball(params: TreeParams, n: usize) -> Result<Vec<Vertex>> {
    let mut out = Vec::new();
    for level in 0..=n {
        out.extend(sphere(params, level)?);
    }
    Ok(out)
}

/// The sector of `x` at resolution `n`: all vertices of `S(o, |x|)` whose
/// root geodesic passes through `x`'s level-`n` ancestor. For `|x| <= n`
/// this is `{x}`; for `n = 0` it is the whole sphere; for `n >= 1` it has
/// exactly `q^{|x| - n}` elements, contiguous in sphere order.
pub fn sector(params: TreeParams, n: usize, x: &Vertex) -> Result<Vec<Vertex>> {
    let m = x.len();
    if m <= n {
        return Ok(vec![x.clone()]);
    }
    params.checked_sphere_len(m)?;
    let range = sector_range(params, n, m, x.sphere_index(params));
    Ok(range
        .map(|i| Vertex::from_sphere_index(params, m, i))
        .collect())
}

/// Index range of the sector of the level-`m` vertex with sphere index
/// `index`, at resolution `n < m`.
pub(crate) fn sector_range(
    params: TreeParams,
    n: usize,
    m: usize,
    index: usize,
) -> std::ops::Range<usize> {
    debug_assert!(n < m);
    if n == 0 {
        let len = params.sphere_size(m) as usize;
        0..len
    } else {
        let block = params.pow(m - n);
        let a = index / block;
        a * block..(a + 1) * block
    }
}

/// Sphere index of the level-`j` ancestor of the level-`n` vertex with
/// sphere index `index` (`1 <= j <= n`).
pub(crate) fn ancestor_index(params: TreeParams, n: usize, index: usize, j: usize) -> usize {
    debug_assert!(j >= 1 && j <= n);
    index / params.pow(n - j)
}

/// Longest-common-prefix length between the level-`n` vertex `i` and the
/// level-`m` vertex `k`, working purely on sphere indices.
pub(crate) fn index_lcp(
    params: TreeParams,
    (n, i): (usize, usize),
    (m, k): (usize, usize),
) -> usize {
    let top = n.min(m);
    for j in (1..=top).rev() {
        if ancestor_index(params, n, i, j) == ancestor_index(params, m, k, j) {
            return j;
        }
    }
    0
}
