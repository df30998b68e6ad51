//! Step graphons on the uniform m-grid of [0,1]^2 and the cut-type transforms
//! that stay inside the step-function class: the triangular cut w·χ with
//! χ(x,y) = 1 iff x ≤ y, the banded cut w·χ_λ with χ_λ(x,y) = 1 iff
//! |x−y| ≤ 1−λ, corner embeddings, and L¹ normalization.
//!
//! Everything reduces exactly to the value matrix: the cut norm of a step
//! graphon is the matrix cut norm with the same 1/m² normalization, because
//! per-cell occupation fractions maximize at the {0, 1/m} vertices.

use crate::exact::{self, CutWitness, ExactError};
use crate::matrix::{Matrix, MatrixError};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphonError {
    #[error(
        "diagonal cell ({0},{0}) is nonzero; the triangular cut is only a step \
         function when the cells crossed by the line x = y carry zero"
    )]
    NonzeroDiagonalCell(usize),
    #[error(
        "cell ({i},{j}) sits on the band boundary |x-y| = 1-lambda and is nonzero; \
         the banded cut is only a step function when boundary cells carry zero"
    )]
    NonzeroBandBoundary { i: usize, j: usize },
    #[error(
        "corner embedding at lambda {num}/{den} needs a resolution divisible by \
         {num} (output grid is m/lambda), got m = {m}"
    )]
    CornerMisaligned { m: usize, num: u64, den: u64 },
    #[error(
        "banded cut at lambda {num}/{den} needs a resolution divisible by {den} \
         (lambda*m must be a whole number of cells), got m = {m}"
    )]
    BandMisaligned { m: usize, num: u64, den: u64 },
    #[error("cannot normalize the zero graphon")]
    ZeroGraphon,
    #[error("edge list line {line}: {msg}")]
    BadEdgeList { line: usize, msg: String },
    #[error("bad lambda {0:?}: expected a fraction P/Q with 0 < P < Q")]
    BadLambda(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Band parameter λ in (0,1), kept as a reduced fraction so grid alignment
/// checks are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandParams {
    num: u64,
    den: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl BandParams {
    pub fn new(num: u64, den: u64) -> Result<Self, GraphonError> {
        if num == 0 || den == 0 || num >= den {
            return Err(GraphonError::BadLambda(format!("{num}/{den}")));
        }
        let g = gcd(num, den);
        Ok(BandParams { num: num / g, den: den / g })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for BandParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for BandParams {
    type Err = GraphonError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GraphonError::BadLambda(s.to_string());
        let (p, q) = s.split_once('/').ok_or_else(bad)?;
        let num: u64 = p.trim().parse().map_err(|_| bad())?;
        let den: u64 = q.trim().parse().map_err(|_| bad())?;
        BandParams::new(num, den).map_err(|_| bad())
    }
}

/// Piecewise-constant symmetric-or-not function on the m×m grid of [0,1]²,
/// cell (i,j) covering I_i × I_j with I_i = ((i−1)/m, i/m].
#[derive(Debug, Clone, PartialEq)]
pub struct StepGraphon {
    values: Matrix,
}

impl StepGraphon {
    /// Uses the matrix entries as cell values; `double_diagonal` doubles the
    /// diagonal cells (the adjacency-to-graphon convention for graphs where a
    /// loop contributes twice).
    pub fn from_matrix(m: &Matrix, double_diagonal: bool) -> StepGraphon {
        let values = if double_diagonal {
            Matrix::from_fn(m.n(), |i, j| if i == j { 2.0 * m.get(i, j) } else { m.get(i, j) })
        } else {
            m.clone()
        };
        StepGraphon { values }
    }

    /// Associated graphon of a simple undirected graph given as "u v" lines,
    /// 1-based vertex labels. Resolution = largest label seen.
    pub fn from_edge_list(text: &str) -> Result<StepGraphon, GraphonError> {
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut max_v = 0usize;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let mut it = body.split_whitespace();
            let (u, v) = match (it.next(), it.next(), it.next()) {
                (Some(u), Some(v), None) => (u, v),
                _ => {
                    return Err(GraphonError::BadEdgeList {
                        line,
                        msg: format!("expected two vertex labels, got {body:?}"),
                    })
                }
            };
            let parse = |tok: &str| {
                tok.parse::<usize>().map_err(|_| GraphonError::BadEdgeList {
                    line,
                    msg: format!("bad vertex label {tok:?}"),
                })
            };
            let (u, v) = (parse(u)?, parse(v)?);
            if u == 0 || v == 0 {
                return Err(GraphonError::BadEdgeList {
                    line,
                    msg: "vertex labels are 1-based".into(),
                });
            }
            if u == v {
                return Err(GraphonError::BadEdgeList {
                    line,
                    msg: format!("loop at vertex {u} not allowed in a simple graph"),
                });
            }
            max_v = max_v.max(u).max(v);
            edges.push((u - 1, v - 1));
        }
        if edges.is_empty() {
            return Err(GraphonError::BadEdgeList { line: 0, msg: "no edges".into() });
        }
        let mut data = vec![0.0; max_v * max_v];
        for (u, v) in edges {
            data[u * max_v + v] = 1.0;
            data[v * max_v + u] = 1.0;
        }
        let values = Matrix::from_fn(max_v, |i, j| data[i * max_v + j]);
        Ok(StepGraphon { values })
    }

    pub fn m(&self) -> usize {
        self.values.n()
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn is_symmetric(&self) -> bool {
        self.values.is_symmetric()
    }

    /// (1/m²)·Σ|cell values|; exact for step functions.
    pub fn l1_norm(&self) -> f64 {
        let m = self.m();
        self.values.abs_sum() / (m * m) as f64
    }

    /// Cut norm with witness, by enumeration over the value matrix. The
    /// witness subsets are unions of grid cells (1-based cell indices).
    pub fn cut_norm(&self, cap: usize) -> Result<(f64, CutWitness), ExactError> {
        exact::cut_norm_exact_capped(&self.values, cap)
    }

    /// w·χ with χ(x,y) = 1 iff x ≤ y: keeps cells above the diagonal
    /// (i < j), zeroes cells below, requires zero diagonal cells.
    pub fn triangular_cut(&self) -> Result<StepGraphon, GraphonError> {
        let m = self.m();
        for i in 0..m {
            if self.values.get(i, i) != 0.0 {
                return Err(GraphonError::NonzeroDiagonalCell(i + 1));
            }
        }
        let values = Matrix::from_fn(m, |i, j| if i < j { self.values.get(i, j) } else { 0.0 });
        Ok(StepGraphon { values })
    }

    /// w_λ: the λ-scaled copy of w placed in the top-right corner
    /// [0,λ]×[1−λ,1] of a grid of resolution m/λ, zero elsewhere.
    pub fn corner_embed(&self, lambda: BandParams) -> Result<StepGraphon, GraphonError> {
        let m = self.m();
        let (num, den) = (lambda.num as usize, lambda.den as usize);
        if m % num != 0 {
            return Err(GraphonError::CornerMisaligned { m, num: lambda.num, den: lambda.den });
        }
        let mp = m / num * den;
        let offset = mp - m;
        let values = Matrix::from_fn(mp, |i, j| {
            if i < m && j >= offset {
                self.values.get(i, j - offset)
            } else {
                0.0
            }
        });
        Ok(StepGraphon { values })
    }

    /// Reflection across the diagonal: value matrix transposed.
    pub fn reflect(&self) -> StepGraphon {
        StepGraphon { values: self.values.transpose() }
    }

    /// w_λ + w̄_λ: the corner copy plus its reflection.
    pub fn corner_embed_sum(&self, lambda: BandParams) -> Result<StepGraphon, GraphonError> {
        let embedded = self.corner_embed(lambda)?;
        let values = embedded.values.add(&embedded.values.transpose())?;
        Ok(StepGraphon { values })
    }

    /// w·χ_λ with χ_λ(x,y) = 1 iff |x−y| ≤ 1−λ: keeps cells with
    /// |i−j| ≤ m−λm−1, zeroes cells beyond the band, and requires the
    /// straddled boundary cells |i−j| = m−λm to be zero.
    pub fn banded_cut(&self, lambda: BandParams) -> Result<StepGraphon, GraphonError> {
        let m = self.m();
        let (num, den) = (lambda.num as usize, lambda.den as usize);
        if m % den != 0 {
            return Err(GraphonError::BandMisaligned { m, num: lambda.num, den: lambda.den });
        }
        let k = m - m / den * num;
        for i in 0..m {
            for j in 0..m {
                let d = i.abs_diff(j);
                if d == k && self.values.get(i, j) != 0.0 {
                    return Err(GraphonError::NonzeroBandBoundary { i: i + 1, j: j + 1 });
                }
            }
        }
        let values =
            Matrix::from_fn(m, |i, j| if i.abs_diff(j) < k { self.values.get(i, j) } else { 0.0 });
        Ok(StepGraphon { values })
    }

    /// Scales so the L¹ norm becomes 1.
    pub fn l1_normalize(&self) -> Result<StepGraphon, GraphonError> {
        let norm = self.l1_norm();
        if norm == 0.0 {
            return Err(GraphonError::ZeroGraphon);
        }
        Ok(StepGraphon { values: self.values.scale(1.0 / norm) })
    }

    /// Subdivides every cell into k×k equal cells with the same value. The
    /// function on [0,1]² is unchanged, so every norm is too.
    pub fn refine(&self, k: usize) -> StepGraphon {
        assert!(k >= 1, "refinement factor must be positive");
        let m = self.m();
        let values = Matrix::from_fn(m * k, |i, j| self.values.get(i / k, j / k));
        StepGraphon { values }
    }
}
