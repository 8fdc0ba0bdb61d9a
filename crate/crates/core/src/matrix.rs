//! Square polyphase matrices over the Laurent ring and the lifting templates
//! built from them.
//!
//! 4x4 matrices act on the polyphase components in the order
//! `(ee, oe, eo, oo)`: the first letter is the column parity, the second the
//! row parity. 2x2 matrices act on `(even, odd)`. Columns of a matrix are
//! inputs, rows are outputs, and `M2 * M1` applies `M1` first.

use std::fmt;

use crate::error::{Error, Result};
use crate::laurent::{Axis, Coeff, LaurentPoly};

pub const EE: usize = 0;
pub const OE: usize = 1;
pub const EO: usize = 2;
pub const OO: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyMatrix {
    dim: usize,
    entries: Vec<LaurentPoly>,
}

impl PolyMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, LaurentPoly::one());
        }
        m
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![LaurentPoly::zero(); dim * dim],
        }
    }

    /// Row-major construction; `entries.len()` must be a perfect square.
    pub fn from_rows(entries: Vec<LaurentPoly>) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim * dim != entries.len() || dim == 0 {
            return Err(Error::DimensionMismatch {
                left_rows: entries.len(),
                left_cols: 1,
                right_rows: dim,
                right_cols: dim,
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn diagonal(values: Vec<LaurentPoly>) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.into_iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.dim
    }

    pub fn cols(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &LaurentPoly {
        &self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: LaurentPoly) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[LaurentPoly] {
        &self.entries
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    /// `self * rhs`: `rhs` is applied first.
    pub fn mat_mul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                left_rows: self.dim,
                left_cols: self.dim,
                right_rows: rhs.dim,
                right_cols: rhs.dim,
            });
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = LaurentPoly::zero();
                for k in 0..n {
                    let a = self.get(i, k);
                    let b = rhs.get(k, j);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = &acc + &(a * b);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Polynomial terms an application of this matrix evaluates: for each
    /// column, the terms of every off-diagonal entry plus the terms of the
    /// diagonal entry minus one.
    pub fn operation_count(&self) -> usize {
        let one = LaurentPoly::one();
        let mut total = 0;
        for j in 0..self.dim {
            for i in 0..self.dim {
                let e = self.get(i, j);
                total += if i == j {
                    (e - &one).term_count()
                } else {
                    e.term_count()
                };
            }
        }
        total
    }

    /// Image-domain filter support `(width, height)` of output row `row`,
    /// taking the parity of each input component into account. `None` when
    /// the row is identically zero.
    pub fn row_support(&self, row: usize) -> Option<(usize, usize)> {
        let (mut min_x, mut max_x, mut min_y, mut max_y) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
        for col in 0..self.dim {
            let (px, py) = match self.dim {
                4 => ((col & 1) as i64, (col >> 1) as i64),
                _ => (col as i64, 0),
            };
            for (&(km, kn), _) in self.get(row, col).terms() {
                let x = 2 * km as i64 + px;
                let y = 2 * kn as i64 + py;
                min_x = min_x.min(x);
                max_x = max_x.max(x);
                min_y = min_y.min(y);
                max_y = max_y.max(y);
            }
        }
        (min_x <= max_x).then(|| ((max_x - min_x + 1) as usize, (max_y - min_y + 1) as usize))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            f.write_str("[")?;
            for j in 0..self.dim {
                if j > 0 {
                    f.write_str(" | ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            f.write_str("]\n")?;
        }
        Ok(())
    }
}

fn horizontal_and_transposed(p: &LaurentPoly) -> Result<(LaurentPoly, LaurentPoly)> {
    let h = p.embed(Axis::Horizontal)?;
    let v = h.transpose();
    Ok((h, v))
}

/// 2x2 predict factor `[1 0; P 1]`.
pub fn predict_1d(p: &LaurentPoly) -> Result<PolyMatrix> {
    let p = p.embed(Axis::Horizontal)?;
    let mut m = PolyMatrix::identity(2);
    m.set(1, 0, p);
    Ok(m)
}

/// 2x2 update factor `[1 U; 0 1]`.
pub fn update_1d(u: &LaurentPoly) -> Result<PolyMatrix> {
    let u = u.embed(Axis::Horizontal)?;
    let mut m = PolyMatrix::identity(2);
    m.set(0, 1, u);
    Ok(m)
}

/// The four separable 2-D lifting factors of one predict/update pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftingSteps2d {
    pub predict_h: PolyMatrix,
    pub predict_v: PolyMatrix,
    pub update_h: PolyMatrix,
    pub update_v: PolyMatrix,
}

pub fn lifting_steps_2d(p: &LaurentPoly, u: &LaurentPoly) -> Result<LiftingSteps2d> {
    Ok(LiftingSteps2d {
        predict_h: predict_h(p)?,
        predict_v: predict_v(p)?,
        update_h: update_h(u)?,
        update_v: update_v(u)?,
    })
}

pub fn predict_h(p: &LaurentPoly) -> Result<PolyMatrix> {
    let (h, _) = horizontal_and_transposed(p)?;
    let mut m = PolyMatrix::identity(4);
    m.set(OE, EE, h.clone());
    m.set(OO, EO, h);
    Ok(m)
}

pub fn predict_v(p: &LaurentPoly) -> Result<PolyMatrix> {
    let (_, v) = horizontal_and_transposed(p)?;
    let mut m = PolyMatrix::identity(4);
    m.set(EO, EE, v.clone());
    m.set(OO, OE, v);
    Ok(m)
}

pub fn update_h(u: &LaurentPoly) -> Result<PolyMatrix> {
    let (h, _) = horizontal_and_transposed(u)?;
    let mut m = PolyMatrix::identity(4);
    m.set(EE, OE, h.clone());
    m.set(EO, OO, h);
    Ok(m)
}

pub fn update_v(u: &LaurentPoly) -> Result<PolyMatrix> {
    let (_, v) = horizontal_and_transposed(u)?;
    let mut m = PolyMatrix::identity(4);
    m.set(EE, EO, v.clone());
    m.set(OE, OO, v);
    Ok(m)
}

/// Spatial predict `T[P]`.
pub fn spatial_predict(p: &LaurentPoly) -> Result<PolyMatrix> {
    let (h, v) = horizontal_and_transposed(p)?;
    let mut m = PolyMatrix::identity(4);
    m.set(OE, EE, h.clone());
    m.set(EO, EE, v.clone());
    m.set(OO, EE, &h * &v);
    m.set(OO, OE, v);
    m.set(OO, EO, h);
    Ok(m)
}

/// Spatial update `S[U]`.
pub fn spatial_update(u: &LaurentPoly) -> Result<PolyMatrix> {
    let (h, v) = horizontal_and_transposed(u)?;
    let mut m = PolyMatrix::identity(4);
    m.set(EE, OE, h.clone());
    m.set(EE, EO, v.clone());
    m.set(EE, OO, &h * &v);
    m.set(OE, OO, v);
    m.set(EO, OO, h);
    Ok(m)
}

/// Polyconvolution `N[P, U]` with `V = PU + 1`, filled in entry by entry.
pub fn polyconvolution(p: &LaurentPoly, u: &LaurentPoly) -> Result<PolyMatrix> {
    let (p, ps) = horizontal_and_transposed(p)?;
    let (u, us) = horizontal_and_transposed(u)?;
    let v = &(&p * &u) + &LaurentPoly::one();
    let vs = v.transpose();
    PolyMatrix::from_rows(vec![
        &vs * &v,
        &vs * &u,
        &us * &v,
        &us * &u,
        &vs * &p,
        vs.clone(),
        &us * &p,
        us.clone(),
        &ps * &v,
        &ps * &u,
        v,
        u,
        &ps * &p,
        ps,
        p,
        LaurentPoly::one(),
    ])
}

/// Subband scaling `diag(z^2, 1, 1, z^-2)` for a 1-D low/high gain `z`.
pub fn scaling_2d(zeta: &Coeff) -> PolyMatrix {
    let sq = zeta * zeta;
    PolyMatrix::diagonal(vec![
        LaurentPoly::constant(sq.clone()),
        LaurentPoly::one(),
        LaurentPoly::one(),
        LaurentPoly::constant(num_traits::Inv::inv(sq)),
    ])
}
