use std::fmt;

use num::complex::Complex64;

use crate::error::{bail, Result};
use crate::field::Field;

use super::SuperScalar;

/// Block matrix with parity-labelled rows and columns.
#[derive(Clone, PartialEq)]
pub struct SuperMatrix<R> {
    row_par: Vec<bool>,
    col_par: Vec<bool>,
    entries: Vec<R>,
}

impl<R: SuperScalar> SuperMatrix<R> {
    /// Build from rows of entries. Only the shape is checked.
    pub fn new(row_par: Vec<bool>, col_par: Vec<bool>, rows: Vec<Vec<R>>) -> Result<Self> {
        if rows.len() != row_par.len() {
            bail!(Shape, "{} rows for {} row parities", rows.len(), row_par.len());
        }
        let mut entries = Vec::with_capacity(row_par.len() * col_par.len());
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != col_par.len() {
                bail!(Shape, "row {i} has {} entries, expected {}", r.len(), col_par.len());
            }
            entries.extend(r);
        }
        Ok(SuperMatrix { row_par, col_par, entries })
    }

    /// Build and require the matrix to be even.
    pub fn new_even(row_par: Vec<bool>, col_par: Vec<bool>, rows: Vec<Vec<R>>) -> Result<Self> {
        let m = Self::new(row_par, col_par, rows)?;
        if let Some((i, j)) = m.parity_violation(false) {
            bail!(Parity, "entry ({i},{j}) has the wrong parity for an even supermatrix");
        }
        Ok(m)
    }

    pub fn zero(row_par: Vec<bool>, col_par: Vec<bool>, proto: &R) -> Self {
        let n = row_par.len() * col_par.len();
        SuperMatrix { row_par, col_par, entries: vec![proto.zero_like(); n] }
    }

    pub fn identity(par: Vec<bool>, proto: &R) -> Self {
        let mut m = Self::zero(par.clone(), par, proto);
        for i in 0..m.rows() {
            m.set(i, i, proto.one_like());
        }
        m
    }

    /// Matrix from a generator `f(i, j)`.
    pub fn from_fn(row_par: Vec<bool>, col_par: Vec<bool>, mut f: impl FnMut(usize, usize) -> R) -> Self {
        let mut entries = Vec::with_capacity(row_par.len() * col_par.len());
        for i in 0..row_par.len() {
            for j in 0..col_par.len() {
                entries.push(f(i, j));
            }
        }
        SuperMatrix { row_par, col_par, entries }
    }

    pub fn rows(&self) -> usize {
        self.row_par.len()
    }

    pub fn cols(&self) -> usize {
        self.col_par.len()
    }

    pub fn row_parities(&self) -> &[bool] {
        &self.row_par
    }

    pub fn col_parities(&self) -> &[bool] {
        &self.col_par
    }

    pub fn get(&self, i: usize, j: usize) -> &R {
        &self.entries[i * self.cols() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: R) {
        let c = self.cols();
        self.entries[i * c + j] = v;
    }

    pub fn is_square(&self) -> bool {
        self.row_par == self.col_par
    }

    fn parity_violation(&self, odd: bool) -> Option<(usize, usize)> {
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let e = self.get(i, j);
                if e.is_zero() {
                    continue;
                }
                if e.parity() != Some(self.row_par[i] ^ self.col_par[j] ^ odd) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn is_even(&self) -> bool {
        self.parity_violation(false).is_none()
    }

    pub fn is_odd(&self) -> bool {
        self.parity_violation(true).is_none()
    }

    /// Parity of the matrix as a whole, if homogeneous (zero counts as even).
    pub fn parity(&self) -> Option<bool> {
        if self.is_even() {
            Some(false)
        } else if self.is_odd() {
            Some(true)
        } else {
            None
        }
    }

    fn proto(&self) -> Result<&R> {
        match self.entries.first() {
            Some(e) => Ok(e),
            None => bail!(Shape, "empty supermatrix has no coefficient context"),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.row_par != other.row_par || self.col_par != other.col_par {
            bail!(Shape, "adding supermatrices of different formats");
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect();
        Ok(SuperMatrix { row_par: self.row_par.clone(), col_par: self.col_par.clone(), entries })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|e| e.neg())
    }

    pub fn scale(&self, c: &R::Coeff) -> Self {
        self.map(|e| e.scale(c))
    }

    /// Left multiplication of every entry by a ring element.
    pub fn left_mul(&self, r: &R) -> Self {
        self.map(|e| r.mul(e))
    }

    pub fn map(&self, f: impl Fn(&R) -> R) -> Self {
        SuperMatrix { row_par: self.row_par.clone(), col_par: self.col_par.clone(), entries: self.entries.iter().map(f).collect() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.col_par != other.row_par {
            bail!(Shape, "column parities {:?} do not match row parities {:?}", self.col_par, other.row_par);
        }
        if self.cols() == 0 {
            bail!(Shape, "inner dimension zero");
        }
        let proto = self.get(0, 0).zero_like();
        Ok(Self::from_fn(self.row_par.clone(), other.col_par.clone(), |i, j| {
            (0..self.cols()).fold(proto.clone(), |acc, k| acc.add(&self.get(i, k).mul(other.get(k, j))))
        }))
    }

    pub fn pow(&self, n: u32) -> Result<Self> {
        if !self.is_square() {
            bail!(Shape, "power of a non-square supermatrix");
        }
        let mut out = Self::identity(self.row_par.clone(), self.proto()?);
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// `[A, B] = AB − (−1)^{|A||B|} BA` for homogeneous square matrices.
    pub fn supercommutator(&self, other: &Self) -> Result<Self> {
        let (Some(pa), Some(pb)) = (self.parity(), other.parity()) else {
            bail!(Parity, "supercommutator of inhomogeneous supermatrices")
        };
        let ab = self.mul(other)?;
        let ba = other.mul(self)?;
        if pa && pb {
            ab.add(&ba)
        } else {
            ab.sub(&ba)
        }
    }

    /// `str A = Σ (−1)^{parity(i)} A_ii` for even `A`; an odd matrix uses the
    /// unsigned trace, `(−1)^{p(i)(|A|+1)}` in general.
    pub fn supertrace(&self) -> Result<R> {
        if !self.is_square() {
            bail!(Shape, "supertrace of a non-square supermatrix");
        }
        let odd = !self.is_even() && self.is_odd();
        let mut acc = self.proto()?.zero_like();
        for i in 0..self.rows() {
            acc = if self.row_par[i] && !odd { acc.sub(self.get(i, i)) } else { acc.add(self.get(i, i)) };
        }
        Ok(acc)
    }

    fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<R>> {
        rows.iter().map(|&i| cols.iter().map(|&j| self.get(i, j).clone()).collect()).collect()
    }

    fn blocks(&self) -> Result<[Vec<Vec<R>>; 4]> {
        if !self.is_square() {
            bail!(Shape, "Berezinian of a non-square supermatrix");
        }
        if let Some((i, j)) = self.parity_violation(false) {
            bail!(Parity, "Berezinian needs an even supermatrix; entry ({i},{j}) has the wrong parity");
        }
        let even: Vec<usize> = (0..self.rows()).filter(|&i| !self.row_par[i]).collect();
        let odd: Vec<usize> = (0..self.rows()).filter(|&i| self.row_par[i]).collect();
        Ok([
            self.submatrix(&even, &even),
            self.submatrix(&even, &odd),
            self.submatrix(&odd, &even),
            self.submatrix(&odd, &odd),
        ])
    }

    /// `Ber A = det(P − Q T⁻¹ R) · det(T)⁻¹`.
    pub fn berezinian(&self) -> Result<R> {
        let proto = self.proto()?.clone();
        let [p, q, r, t] = self.blocks()?;
        if t.is_empty() {
            return even_det(&p, &proto);
        }
        let t_inv = even_inverse(&t, &proto).map_err(|_| crate::error::Error::Singular("odd-odd block has a non-invertible body".into()))?;
        let schur = sub(&p, &mat_mul(&mat_mul(&q, &t_inv, &proto), &r, &proto));
        Ok(even_det(&schur, &proto)?.mul(&even_det(&t, &proto)?.inverse()?))
    }

    /// `Ber A = det(P) · det(T − R P⁻¹ Q)⁻¹`, needs an invertible even-even body.
    pub fn berezinian_p_block(&self) -> Result<R> {
        let proto = self.proto()?.clone();
        let [p, q, r, t] = self.blocks()?;
        if p.is_empty() {
            return even_det(&t, &proto)?.inverse();
        }
        let p_inv = even_inverse(&p, &proto)?;
        let schur = sub(&t, &mat_mul(&mat_mul(&r, &p_inv, &proto), &q, &proto));
        let d = even_det(&schur, &proto).map_err(|_| crate::error::Error::Singular("Schur complement of P has a non-invertible body".into()))?;
        Ok(even_det(&p, &proto)?.mul(&d.inverse()?))
    }

    /// Inverse of an even square supermatrix, by Schur complements.
    pub fn inverse(&self) -> Result<Self> {
        let proto = self.proto()?.clone();
        let [p, q, r, t] = self.blocks()?;
        let even: Vec<usize> = (0..self.rows()).filter(|&i| !self.row_par[i]).collect();
        let odd: Vec<usize> = (0..self.rows()).filter(|&i| self.row_par[i]).collect();
        let (a11, a12, a21, a22) = if odd.is_empty() {
            (even_inverse(&p, &proto)?, vec![], vec![], vec![])
        } else if even.is_empty() {
            (vec![], vec![], vec![], even_inverse(&t, &proto)?)
        } else {
            let t_inv = even_inverse(&t, &proto)?;
            let s_inv = even_inverse(&sub(&p, &mat_mul(&mat_mul(&q, &t_inv, &proto), &r, &proto)), &proto)?;
            let neg = |m: Vec<Vec<R>>| m.into_iter().map(|row| row.into_iter().map(|e| e.neg()).collect()).collect::<Vec<Vec<R>>>();
            let a12 = neg(mat_mul(&mat_mul(&s_inv, &q, &proto), &t_inv, &proto));
            let a21 = neg(mat_mul(&mat_mul(&t_inv, &r, &proto), &s_inv, &proto));
            let corr = mat_mul(&mat_mul(&a21, &q, &proto), &t_inv, &proto);
            let a22 = sub(&t_inv, &corr);
            (s_inv, a12, a21, a22)
        };
        let mut out = Self::zero(self.row_par.clone(), self.col_par.clone(), &proto);
        for (bi, &i) in even.iter().enumerate() {
            for (bj, &j) in even.iter().enumerate() {
                out.set(i, j, a11[bi][bj].clone());
            }
            for (bj, &j) in odd.iter().enumerate() {
                out.set(i, j, a12[bi][bj].clone());
            }
        }
        for (bi, &i) in odd.iter().enumerate() {
            for (bj, &j) in even.iter().enumerate() {
                out.set(i, j, a21[bi][bj].clone());
            }
            for (bj, &j) in odd.iter().enumerate() {
                out.set(i, j, a22[bi][bj].clone());
            }
        }
        Ok(out)
    }

    /// Matrix of bodies.
    pub fn body(&self) -> Vec<Vec<R::Coeff>> {
        (0..self.rows()).map(|i| (0..self.cols()).map(|j| self.get(i, j).body()).collect()).collect()
    }

    /// Exponential series; the body must be nilpotent so the series terminates.
    pub fn exp(&self) -> Result<Self> {
        if !self.is_square() {
            bail!(Shape, "exp of a non-square supermatrix");
        }
        let proto = self.proto()?.clone();
        let mut acc = Self::identity(self.row_par.clone(), &proto);
        let mut term = acc.clone();
        for k in 1..=256i64 {
            term = term.mul(self)?.scale(&R::Coeff::from_ratio(1, k));
            if term.entries.iter().all(|e| e.is_zero()) {
                return Ok(acc);
            }
            acc = acc.add(&term)?;
        }
        bail!(Domain, "matrix exponential series does not terminate; body is not nilpotent")
    }

    /// `−Σ_{n=1..N} (1/n) str Aⁿ`, i.e. the supertrace of `ln(1 − A)`.
    pub fn str_log_one_minus(&self, order: u32) -> Result<R> {
        if !self.is_square() {
            bail!(Shape, "str ln(1 − A) of a non-square supermatrix");
        }
        if !self.is_even() {
            bail!(Parity, "str ln(1 − A) needs an even supermatrix");
        }
        let rho = spectral_radius(&self.body().iter().map(|r| r.iter().map(Field::to_c64).collect()).collect::<Vec<_>>());
        if rho >= 1.0 - 1e-12 {
            bail!(Domain, "series for ln(1 − A) diverges: body spectral radius {rho:.6} ≥ 1");
        }
        let proto = self.proto()?.clone();
        let mut acc = proto.zero_like();
        let mut power = self.clone();
        for n in 1..=order {
            if n > 1 {
                power = power.mul(self)?;
            }
            if power.entries.iter().all(|e| e.is_zero()) {
                break;
            }
            acc = acc.sub(&power.supertrace()?.scale(&R::Coeff::from_ratio(1, i64::from(n))));
        }
        Ok(acc)
    }
}

/// Spectral radius estimate by repeated squaring with renormalisation.
pub fn spectral_radius(m: &[Vec<Complex64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 0.0;
    }
    let norm = |a: &[Vec<Complex64>]| a.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut a: Vec<Vec<Complex64>> = m.to_vec();
    let mut log_scale = 0.0f64;
    let steps = 40;
    for _ in 0..steps {
        let s = norm(&a);
        if s == 0.0 {
            return 0.0;
        }
        for z in a.iter_mut().flatten() {
            *z /= s;
        }
        log_scale += s.ln();
        let sq: Vec<Vec<Complex64>> = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * a[k][j]).sum()).collect())
            .collect();
        a = sq;
        log_scale *= 2.0;
    }
    let s = norm(&a);
    if s == 0.0 {
        return 0.0;
    }
    ((log_scale + s.ln()) / 2f64.powi(steps)).exp()
}

fn mat_mul<R: SuperScalar>(a: &[Vec<R>], b: &[Vec<R>], proto: &R) -> Vec<Vec<R>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| (0..cols).map(|j| (0..inner).fold(proto.zero_like(), |acc, k| acc.add(&row[k].mul(&b[k][j])))).collect())
        .collect()
}

fn sub<R: SuperScalar>(a: &[Vec<R>], b: &[Vec<R>]) -> Vec<Vec<R>> {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u.sub(v)).collect()).collect()
}

fn pivot_row<R: SuperScalar>(m: &[Vec<R>], col: usize) -> Option<usize> {
    (col..m.len())
        .filter(|&i| !m[i][col].body().is_zero())
        .max_by(|&i, &j| m[i][col].body().magnitude().total_cmp(&m[j][col].body().magnitude()))
}

/// Determinant of a square matrix with even (commuting) entries.
pub fn even_det<R: SuperScalar>(m: &[Vec<R>], proto: &R) -> Result<R> {
    let n = m.len();
    let mut a = m.to_vec();
    let mut acc = proto.one_like();
    for c in 0..n {
        let Some(p) = pivot_row(&a, c) else { bail!(Singular, "determinant: no pivot with invertible body in column {c}") };
        if p != c {
            a.swap(p, c);
            acc = acc.neg();
        }
        let inv = a[c][c].inverse()?;
        acc = acc.mul(&a[c][c]);
        for i in c + 1..n {
            let f = a[i][c].mul(&inv);
            if f.is_zero() {
                continue;
            }
            for j in c..n {
                let v = a[i][j].sub(&f.mul(&a[c][j]));
                a[i][j] = v;
            }
        }
    }
    Ok(acc)
}

/// Inverse of a matrix with even entries, by Gauss–Jordan elimination.
pub fn even_inverse<R: SuperScalar>(m: &[Vec<R>], proto: &R) -> Result<Vec<Vec<R>>> {
    let n = m.len();
    let mut a = m.to_vec();
    let mut b: Vec<Vec<R>> = (0..n).map(|i| (0..n).map(|j| if i == j { proto.one_like() } else { proto.zero_like() }).collect()).collect();
    for c in 0..n {
        let Some(p) = pivot_row(&a, c) else { bail!(Singular, "matrix body is not invertible") };
        a.swap(p, c);
        b.swap(p, c);
        let inv = a[c][c].inverse()?;
        for j in 0..n {
            a[c][j] = a[c][j].mul(&inv);
            b[c][j] = b[c][j].mul(&inv);
        }
        for i in 0..n {
            if i == c || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for j in 0..n {
                a[i][j] = a[i][j].sub(&f.mul(&a[c][j]));
                b[i][j] = b[i][j].sub(&f.mul(&b[c][j]));
            }
        }
    }
    Ok(b)
}

impl<R: SuperScalar> fmt::Debug for SuperMatrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SuperMatrix rows {:?} cols {:?}", self.row_par, self.col_par)?;
        for i in 0..self.rows() {
            let row: Vec<String> = (0..self.cols()).map(|j| format!("{:?}", self.get(i, j))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}
