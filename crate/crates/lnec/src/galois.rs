//! Exact arithmetic over prime fields GF(p) and binary extension fields
//! GF(2^m), plus the matrix-rank / solve / subspace primitives everything
//! else is built on.
//!
//! Elements are plain integers in `[0, q)`: the residue for a prime field,
//! or the polynomial's coefficient bits for GF(2^m). All elimination is
//! exact with first-nonzero pivoting; there is no floating point anywhere.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A field element encoded as an integer in `[0, q)`.
pub type Elem = u32;

/// Largest supported prime characteristic (exclusive).
pub const MAX_PRIME: u64 = 1 << 16;
/// Largest supported binary extension degree.
pub const MAX_DEGREE: u32 = 16;

/// Field description as it appears in JSON artifacts.
///
/// `modulus` lists the coefficients of a degree-`m` irreducible polynomial
/// over GF(p), lowest degree first (length `m + 1`). It is required exactly
/// when `m > 1`; when omitted for GF(2^m), a fixed default is used.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u64,
    #[serde(default = "default_degree")]
    pub m: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u8>>,
}

fn default_degree() -> u32 {
    1
}

impl FieldSpec {
    pub fn prime(p: u64) -> Self {
        FieldSpec {
            p,
            m: 1,
            modulus: None,
        }
    }

    pub fn binary(m: u32) -> Self {
        FieldSpec {
            p: 2,
            m,
            modulus: None,
        }
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.m)
    }
}

/// Default irreducible polynomials for GF(2^m), as bit masks (bit i is the
/// coefficient of x^i). Standard table entries; each is checked by the
/// irreducibility test in this module's unit tests.
const DEFAULT_MODULI: [u64; 17] = [
    0,       // unused
    0b11,    // x + 1 (degenerate; m = 1 is handled as a prime field)
    0b111,   // x^2 + x + 1
    0b1011,  // x^3 + x + 1
    0b10011, // x^4 + x + 1
    0b100101,
    0b1000011,
    0b10000011,
    0b100011011, // x^8 + x^4 + x^3 + x + 1
    0b1000010001,
    0b10000001001,
    0b100000000101,
    0b1000001010011,
    0b10000000011011,
    0b100010001000011,
    0b1000000000000011,
    0b10001000000001011, // x^16 + x^12 + x^3 + x + 1
];

/// A validated field, ready for arithmetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Field {
    spec: FieldSpec,
    q: u64,
    /// GF(2^m) modulus as a bit mask; 0 for prime fields.
    modulus_mask: u64,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Polynomial remainder over GF(2), operands as bit masks.
fn poly2_rem(mut a: u64, b: u64) -> u64 {
    let db = 63 - b.leading_zeros() as i32;
    loop {
        let da = if a == 0 {
            return 0;
        } else {
            63 - a.leading_zeros() as i32
        };
        if da < db {
            return a;
        }
        a ^= b << (da - db);
    }
}

/// Exhaustive trial division; cheap for degrees up to 16.
fn poly2_irreducible(mask: u64, degree: u32) -> bool {
    for d in 1..=(degree / 2) {
        for low in 0..(1u64 << d) {
            let divisor = (1u64 << d) | low;
            if poly2_rem(mask, divisor) == 0 {
                return false;
            }
        }
    }
    true
}

impl Field {
    pub fn new(spec: &FieldSpec) -> Result<Self> {
        if !is_prime(spec.p) || spec.p >= MAX_PRIME {
            return Err(Error::InvalidField(format!(
                "characteristic {} must be a prime below 2^16",
                spec.p
            )));
        }
        if spec.m == 0 {
            return Err(Error::InvalidField("degree must be >= 1".into()));
        }
        if spec.m == 1 {
            if spec.modulus.is_some() {
                return Err(Error::InvalidField(
                    "modulus is only meaningful for extension fields (m > 1)".into(),
                ));
            }
            return Ok(Field {
                spec: spec.clone(),
                q: spec.p,
                modulus_mask: 0,
            });
        }
        if spec.p != 2 {
            return Err(Error::InvalidField(format!(
                "extension fields are supported for characteristic 2 only, got GF({}^{})",
                spec.p, spec.m
            )));
        }
        if spec.m > MAX_DEGREE {
            return Err(Error::InvalidField(format!(
                "degree {} exceeds the supported maximum {}",
                spec.m, MAX_DEGREE
            )));
        }
        let mask = match &spec.modulus {
            None => DEFAULT_MODULI[spec.m as usize],
            Some(coeffs) => {
                if coeffs.len() != spec.m as usize + 1 {
                    return Err(Error::InvalidField(format!(
                        "modulus must list {} coefficients (degree {}), got {}",
                        spec.m + 1,
                        spec.m,
                        coeffs.len()
                    )));
                }
                if coeffs.iter().any(|&c| c > 1) {
                    return Err(Error::InvalidField(
                        "modulus coefficients over GF(2) must be 0 or 1".into(),
                    ));
                }
                if coeffs[spec.m as usize] != 1 {
                    return Err(Error::InvalidField("modulus must be monic".into()));
                }
                coeffs
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (i, &c)| acc | ((c as u64) << i))
            }
        };
        if !poly2_irreducible(mask, spec.m) {
            return Err(Error::InvalidField(format!(
                "modulus {:#b} is reducible over GF(2)",
                mask
            )));
        }
        Ok(Field {
            spec: spec.clone(),
            q: 1u64 << spec.m,
            modulus_mask: mask,
        })
    }

    pub fn prime(p: u64) -> Result<Self> {
        Field::new(&FieldSpec::prime(p))
    }

    pub fn binary(m: u32) -> Result<Self> {
        Field::new(&FieldSpec::binary(m))
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    pub fn characteristic(&self) -> u64 {
        self.spec.p
    }

    fn is_binary_ext(&self) -> bool {
        self.spec.m > 1
    }

    /// Validates an integer encoding.
    pub fn elem(&self, value: u64) -> Result<Elem> {
        if value < self.q {
            Ok(value as Elem)
        } else {
            Err(Error::ElementOutOfRange {
                value,
                order: self.q,
            })
        }
    }

    /// All field elements in encoding order.
    pub fn elems(&self) -> impl Iterator<Item = Elem> {
        (0..self.q).map(|v| v as Elem)
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if self.is_binary_ext() {
            a ^ b
        } else {
            ((a as u64 + b as u64) % self.q) as Elem
        }
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        if self.is_binary_ext() {
            a ^ b
        } else {
            ((a as u64 + self.q - b as u64) % self.q) as Elem
        }
    }

    pub fn neg(&self, a: Elem) -> Elem {
        self.sub(0, a)
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if self.is_binary_ext() {
            let m = self.spec.m;
            let mut acc = 0u64;
            let mut a = a as u64;
            let mut b = b as u64;
            while b != 0 {
                if b & 1 == 1 {
                    acc ^= a;
                }
                b >>= 1;
                a <<= 1;
                if (a >> m) & 1 == 1 {
                    a ^= self.modulus_mask;
                }
            }
            acc as Elem
        } else {
            ((a as u64 * b as u64) % self.q) as Elem
        }
    }

    pub fn pow(&self, a: Elem, mut exp: u64) -> Elem {
        let mut base = a;
        let mut acc: Elem = 1;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.q - 2))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }
}

/// A dense row-major matrix of field elements.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Elem>>) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let n = rows.len();
        Ok(Matrix {
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Elem {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Elem) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[Elem]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// Rows of `self` followed by rows of `below`.
    pub fn stack(&self, below: &Matrix) -> Result<Matrix> {
        if self.cols != below.cols {
            return Err(Error::Dimension(format!(
                "cannot stack {} columns on {} columns",
                below.cols, self.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&below.data);
        Ok(Matrix {
            rows: self.rows + below.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn mul(&self, rhs: &Matrix, f: &Field) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::zero(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    let v = f.add(out.get(r, c), f.mul(a, rhs.get(k, c)));
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    /// Rank over `f` by Gaussian elimination with first-nonzero pivoting.
    pub fn rank(&self, f: &Field) -> usize {
        let mut basis = RowBasis::new(self.cols);
        for r in self.iter_rows() {
            basis.insert(r, f);
        }
        basis.rank()
    }

    /// Solves `x * self = rhs` for a row vector `x`, if a solution exists.
    /// When `rank(self) == self.rows()` the solution is unique.
    pub fn solve_left(&self, rhs: &[Elem], f: &Field) -> Result<Option<Vec<Elem>>> {
        if rhs.len() != self.cols {
            return Err(Error::Dimension(format!(
                "solve_left: rhs length {} != {} columns",
                rhs.len(),
                self.cols
            )));
        }
        // Gaussian elimination on the transposed system self^T * x^T = rhs^T,
        // carried on an augmented k x (rows + 1) working matrix.
        let k = self.rows;
        let n = self.cols;
        let mut aug: Vec<Vec<Elem>> = (0..n)
            .map(|c| {
                let mut row: Vec<Elem> = (0..k).map(|r| self.get(r, c)).collect();
                row.push(rhs[c]);
                row
            })
            .collect();
        let mut pivot_row = 0;
        let mut pivot_cols = Vec::new();
        for col in 0..k {
            let Some(src) = (pivot_row..n).find(|&r| aug[r][col] != 0) else {
                continue;
            };
            aug.swap(pivot_row, src);
            let inv = f.inv(aug[pivot_row][col]).expect("pivot is nonzero");
            for v in aug[pivot_row].iter_mut() {
                *v = f.mul(*v, inv);
            }
            for r in 0..n {
                if r != pivot_row && aug[r][col] != 0 {
                    let factor = aug[r][col];
                    for c in 0..=k {
                        let sub = f.mul(factor, aug[pivot_row][c]);
                        aug[r][c] = f.sub(aug[r][c], sub);
                    }
                }
            }
            pivot_cols.push(col);
            pivot_row += 1;
            if pivot_row == n {
                break;
            }
        }
        // Inconsistent if a zero row has a nonzero augment.
        for r in pivot_row..n {
            if aug[r][k] != 0 {
                return Ok(None);
            }
        }
        let mut x = vec![0; k];
        for (r, &col) in pivot_cols.iter().enumerate() {
            x[col] = aug[r][k];
        }
        Ok(Some(x))
    }
}

/// An incremental row-echelon basis: the workhorse behind rank queries,
/// membership tests, and the construction's independence checks.
#[derive(Clone, Debug)]
pub struct RowBasis {
    cols: usize,
    /// Echelon rows, each normalized to a unit leading entry.
    rows: Vec<Vec<Elem>>,
    /// Leading column of each row, strictly increasing is not required;
    /// rows are kept in insertion-reduction order.
    pivots: Vec<usize>,
}

impl RowBasis {
    pub fn new(cols: usize) -> Self {
        RowBasis {
            cols,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn from_rows<'a, I: IntoIterator<Item = &'a [Elem]>>(
        cols: usize,
        rows: I,
        f: &Field,
    ) -> Self {
        let mut b = RowBasis::new(cols);
        for r in rows {
            b.insert(r, f);
        }
        b
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[Elem], f: &Field) -> Vec<Elem> {
        let mut v = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = v[p];
            if c != 0 {
                for i in 0..self.cols {
                    let sub = f.mul(c, row[i]);
                    v[i] = f.sub(v[i], sub);
                }
            }
        }
        v
    }

    /// Adds `v` to the span. Returns true when the rank grew.
    pub fn insert(&mut self, v: &[Elem], f: &Field) -> bool {
        assert_eq!(v.len(), self.cols, "row length mismatch");
        let mut red = self.reduce(v, f);
        match red.iter().position(|&x| x != 0) {
            None => false,
            Some(p) => {
                let inv = f.inv(red[p]).expect("leading entry is nonzero");
                for x in red.iter_mut() {
                    *x = f.mul(*x, inv);
                }
                self.rows.push(red);
                self.pivots.push(p);
                true
            }
        }
    }

    pub fn contains(&self, v: &[Elem], f: &Field) -> bool {
        assert_eq!(v.len(), self.cols, "row length mismatch");
        self.reduce(v, f).iter().all(|&x| x == 0)
    }
}

/// True iff the row spaces of `a` and `b` share a nonzero vector, computed
/// as `rank(a) + rank(b) > rank(a stacked on b)`.
pub fn spaces_intersect_nontrivially(a: &Matrix, b: &Matrix, f: &Field) -> Result<bool> {
    if a.cols() != b.cols() {
        return Err(Error::Dimension(format!(
            "row spaces live in different dimensions: {} vs {}",
            a.cols(),
            b.cols()
        )));
    }
    let ra = a.rank(f);
    let rb = b.rank(f);
    let stacked = a.stack(b)?.rank(f);
    Ok(ra + rb > stacked)
}

/// True iff `v` lies in rowspace(u) + rowspace(w), computed as
/// `rank(u; w) == rank(u; w; v)`.
pub fn member_of_subspace_sum(v: &[Elem], u: &Matrix, w: &Matrix, f: &Field) -> Result<bool> {
    if u.cols() != w.cols() || v.len() != u.cols() {
        return Err(Error::Dimension(format!(
            "subspace-sum membership needs equal widths: v={}, u={}, w={}",
            v.len(),
            u.cols(),
            w.cols()
        )));
    }
    let mut basis = RowBasis::new(u.cols());
    for r in u.iter_rows() {
        basis.insert(r, f);
    }
    for r in w.iter_rows() {
        basis.insert(r, f);
    }
    Ok(basis.contains(v, f))
}
