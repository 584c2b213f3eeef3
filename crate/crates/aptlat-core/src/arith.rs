//! Exact arithmetic over the rationals and real quadratic fields `Q(sqrt(D))`,
//! plus the small exact linear algebra everything else stands on.
//!
//! All boundary and membership decisions in this crate go through [`QuadRat`];
//! floating point appears only in the separate [`QuadRat::to_f64`] embedding,
//! which is documented as approximate and is never used to decide anything.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{CoreError, Result};

/// An exact number `a + b*sqrt(D)` with rational `a`, `b` and squarefree `D >= 1`.
///
/// `D = 1` encodes a plain rational; in canonical form `b` is then merged into
/// `a`. Likewise `b = 0` forces `D = 1`, so equality is structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadRat {
    a: BigRational,
    b: BigRational,
    d: u64,
}

fn squarefree_check(d: u64) -> Result<()> {
    if d == 0 {
        return Err(CoreError::NotSquarefree(0, 0));
    }
    let mut rest = d;
    let mut p = 2u64;
    while p * p <= rest {
        if rest % p == 0 {
            rest /= p;
            if rest % p == 0 {
                return Err(CoreError::NotSquarefree(d, p));
            }
        }
        p += 1;
    }
    Ok(())
}

impl QuadRat {
    /// Builds `a + b*sqrt(d)`, validating that `d` is squarefree and reducing
    /// to canonical form.
    pub fn new(a: BigRational, b: BigRational, d: u64) -> Result<Self> {
        squarefree_check(d)?;
        let mut q = QuadRat { a, b, d };
        q.canonicalize();
        Ok(q)
    }

    fn canonicalize(&mut self) {
        if self.d == 1 {
            let b = std::mem::replace(&mut self.b, BigRational::zero());
            self.a += b;
        } else if self.b.is_zero() {
            self.d = 1;
        }
    }

    pub fn zero() -> Self {
        QuadRat { a: BigRational::zero(), b: BigRational::zero(), d: 1 }
    }

    pub fn one() -> Self {
        QuadRat { a: BigRational::one(), b: BigRational::zero(), d: 1 }
    }

    pub fn from_int(n: i64) -> Self {
        QuadRat { a: BigRational::from_integer(n.into()), b: BigRational::zero(), d: 1 }
    }

    /// `p/q` as an exact rational. Panics if `q == 0`.
    pub fn rational(p: i64, q: i64) -> Self {
        QuadRat {
            a: BigRational::new(p.into(), q.into()),
            b: BigRational::zero(),
            d: 1,
        }
    }

    /// `sqrt(d)` for squarefree `d`.
    pub fn sqrt(d: u64) -> Result<Self> {
        QuadRat::new(BigRational::zero(), BigRational::one(), d)
    }

    /// `(p/q) * sqrt(d)`.
    pub fn rational_sqrt(p: i64, q: i64, d: u64) -> Result<Self> {
        QuadRat::new(BigRational::zero(), BigRational::new(p.into(), q.into()), d)
    }

    pub fn from_rational(a: BigRational) -> Self {
        QuadRat { a, b: BigRational::zero(), d: 1 }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn radical_part(&self) -> &BigRational {
        &self.b
    }

    pub fn radicand(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.d == 1
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Galois conjugate `a - b*sqrt(D)`.
    pub fn conj(&self) -> Self {
        QuadRat { a: self.a.clone(), b: -self.b.clone(), d: self.d }.reduced()
    }

    fn reduced(mut self) -> Self {
        self.canonicalize();
        self
    }

    /// The common field of two values, or an error when both carry distinct
    /// radicands `> 1`.
    pub fn common_field(x: &QuadRat, y: &QuadRat) -> Result<u64> {
        match (x.d, y.d) {
            (1, d) | (d, 1) => Ok(d),
            (d1, d2) if d1 == d2 => Ok(d1),
            (d1, d2) => Err(CoreError::MixedRadicands(d1, d2)),
        }
    }

    /// Exact sign: `-1`, `0` or `1`. Never consults floating point.
    pub fn sign(&self) -> i8 {
        let sa = rational_sign(&self.a);
        let sb = rational_sign(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 {
            return sb;
        }
        if sa == sb {
            return sa;
        }
        // Opposite signs: compare a^2 against b^2 * D. Equality would force
        // sqrt(D) rational, impossible for squarefree D > 1.
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * BigRational::from_integer(BigInt::from(self.d));
        match a2.cmp(&b2d) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => {
                debug_assert!(false, "sqrt({}) cannot be rational", self.d);
                0
            }
        }
    }

    /// Exact comparison. Errors on incompatible radicands.
    pub fn try_cmp(&self, other: &QuadRat) -> Result<Ordering> {
        QuadRat::common_field(self, other)?;
        let diff = self.clone() - other.clone();
        Ok(match diff.sign() {
            1 => Ordering::Greater,
            -1 => Ordering::Less,
            _ => Ordering::Equal,
        })
    }

    pub fn abs(&self) -> QuadRat {
        if self.sign() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn min_of(x: QuadRat, y: QuadRat) -> Result<QuadRat> {
        Ok(match x.try_cmp(&y)? {
            Ordering::Greater => y,
            _ => x,
        })
    }

    pub fn max_of(x: QuadRat, y: QuadRat) -> Result<QuadRat> {
        Ok(match x.try_cmp(&y)? {
            Ordering::Less => y,
            _ => x,
        })
    }

    /// Exact floor. For irrational values the float estimate is corrected by
    /// exact sign tests, so the result is always the true floor.
    pub fn floor(&self) -> BigInt {
        if self.d == 1 {
            return self.a.floor().to_integer();
        }
        let mut n = BigInt::from(self.to_f64().floor() as i64);
        // self - n >= 0 and self - (n+1) < 0 pin the floor exactly.
        loop {
            let lo = self.clone() - QuadRat::from_rational(BigRational::from_integer(n.clone()));
            if lo.sign() < 0 {
                n -= 1;
                continue;
            }
            let hi = self.clone()
                - QuadRat::from_rational(BigRational::from_integer(&n + BigInt::one()));
            if hi.sign() >= 0 {
                n += 1;
                continue;
            }
            return n;
        }
    }

    /// Fractional part in `[0, 1)`.
    pub fn frac(&self) -> QuadRat {
        let f = self.floor();
        self.clone() - QuadRat::from_rational(BigRational::from_integer(f))
    }

    /// Approximate float embedding. For metrics and quadrature only.
    pub fn to_f64(&self) -> f64 {
        let fa = self.a.to_f64().unwrap_or(f64::NAN);
        if self.d == 1 {
            return fa;
        }
        fa + self.b.to_f64().unwrap_or(f64::NAN) * (self.d as f64).sqrt()
    }

    /// Multiplicative inverse; errors on zero.
    pub fn inverse(&self) -> Result<QuadRat> {
        if self.is_zero() {
            return Err(CoreError::DivisionByZero);
        }
        if self.d == 1 {
            return Ok(QuadRat::from_rational(self.a.recip()));
        }
        // 1/(a + b sqrt(D)) = (a - b sqrt(D)) / (a^2 - b^2 D)
        let norm = &self.a * &self.a
            - &self.b * &self.b * BigRational::from_integer(BigInt::from(self.d));
        debug_assert!(!norm.is_zero());
        Ok(QuadRat {
            a: &self.a / &norm,
            b: -(&self.b / &norm),
            d: self.d,
        }
        .reduced())
    }
}

fn rational_sign(r: &BigRational) -> i8 {
    match r.numer().sign() {
        Sign::Plus => 1,
        Sign::Minus => -1,
        Sign::NoSign => 0,
    }
}

/// Exact sign of `x - y`; the spec-level comparison operation.
pub fn quad_cmp(x: &QuadRat, y: &QuadRat) -> Result<Ordering> {
    x.try_cmp(y)
}

impl Add for QuadRat {
    type Output = QuadRat;
    fn add(self, rhs: QuadRat) -> QuadRat {
        let d = QuadRat::common_field(&self, &rhs)
            .expect("addition requires a common quadratic field");
        QuadRat { a: self.a + rhs.a, b: self.b + rhs.b, d }.reduced()
    }
}

impl AddAssign for QuadRat {
    fn add_assign(&mut self, rhs: QuadRat) {
        *self = self.clone() + rhs;
    }
}

impl Sub for QuadRat {
    type Output = QuadRat;
    fn sub(self, rhs: QuadRat) -> QuadRat {
        self + (-rhs)
    }
}

impl SubAssign for QuadRat {
    fn sub_assign(&mut self, rhs: QuadRat) {
        *self = self.clone() - rhs;
    }
}

impl Neg for QuadRat {
    type Output = QuadRat;
    fn neg(self) -> QuadRat {
        QuadRat { a: -self.a, b: -self.b, d: self.d }
    }
}

impl Mul for QuadRat {
    type Output = QuadRat;
    fn mul(self, rhs: QuadRat) -> QuadRat {
        let d = QuadRat::common_field(&self, &rhs)
            .expect("multiplication requires a common quadratic field");
        let dd = BigRational::from_integer(BigInt::from(d));
        QuadRat {
            a: &self.a * &rhs.a + &self.b * &rhs.b * dd,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
            d,
        }
        .reduced()
    }
}

impl Div for QuadRat {
    type Output = QuadRat;
    fn div(self, rhs: QuadRat) -> QuadRat {
        self * rhs.inverse().expect("division by zero")
    }
}

impl fmt::Display for QuadRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.d == 1 {
            return write!(f, "{}", self.a);
        }
        let sqrt_term = |b: &BigRational| -> String {
            if b.is_one() {
                format!("sqrt({})", self.d)
            } else if (-b).is_one() {
                format!("-sqrt({})", self.d)
            } else {
                format!("{}*sqrt({})", b, self.d)
            }
        };
        if self.a.is_zero() {
            return write!(f, "{}", sqrt_term(&self.b));
        }
        if self.b.is_positive() {
            write!(f, "{}+{}", self.a, sqrt_term(&self.b))
        } else {
            write!(f, "{}{}", self.a, sqrt_term(&self.b))
        }
    }
}

impl fmt::Debug for QuadRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let err = |msg: &str| CoreError::Parse { input: s.to_string(), msg: msg.to_string() };
    let s = s.trim();
    if s.is_empty() {
        return Err(err("empty rational"));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err("bad numerator"))?;
        let q: BigInt = q.trim().parse().map_err(|_| err("bad denominator"))?;
        if q.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        // Decimal notation: an exactly representable rational.
        let neg = int.trim_start().starts_with('-');
        let int: BigInt = if int == "-" || int.is_empty() {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| err("bad integer part"))?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("bad decimal part"));
        }
        let num: BigInt = frac.parse().map_err(|_| err("bad decimal part"))?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let mag = int.abs() * &den + num;
        let signed = if neg { -mag } else { mag };
        return Ok(BigRational::new(signed, den));
    }
    let p: BigInt = s.parse().map_err(|_| err("bad integer"))?;
    Ok(BigRational::from_integer(p))
}

impl FromStr for QuadRat {
    type Err = CoreError;

    /// Parses the canonical text encoding `p/q+r/s*sqrt(D)`, with either term
    /// optional, unit coefficients elided (`sqrt(2)`), and decimal rationals
    /// accepted (`0.5`).
    fn from_str(s: &str) -> Result<QuadRat> {
        let err = |msg: &str| CoreError::Parse { input: s.to_string(), msg: msg.to_string() };
        let t = s.trim().replace(' ', "");
        if t.is_empty() {
            return Err(err("empty input"));
        }
        // Find the top-level separator between the rational and radical terms.
        let bytes = t.as_bytes();
        let mut depth = 0i32;
        let mut split = None;
        for (i, &c) in bytes.iter().enumerate() {
            match c {
                b'(' => depth += 1,
                b')' => depth -= 1,
                b'+' | b'-' if i > 0 && depth == 0 => {
                    let prev = bytes[i - 1];
                    if prev != b'*' && prev != b'/' && prev != b'(' {
                        split = Some(i);
                        break;
                    }
                }
                _ => {}
            }
        }
        let parse_sqrt_term = |term: &str| -> Result<(BigRational, u64)> {
            let (coeff, rest) = match term.find("sqrt(") {
                Some(0) => (BigRational::one(), &term[0..]),
                Some(1) if term.starts_with('-') => (-BigRational::one(), &term[1..]),
                Some(k) => {
                    let c = &term[..k];
                    let c = c.strip_suffix('*').ok_or_else(|| err("expected '*' before sqrt"))?;
                    (parse_rational(c)?, &term[k..])
                }
                None => return Err(err("expected sqrt term")),
            };
            let inner = rest
                .strip_prefix("sqrt(")
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| err("malformed sqrt(...)"))?;
            let d: u64 = inner.parse().map_err(|_| err("radicand must be a positive integer"))?;
            Ok((coeff, d))
        };
        match split {
            Some(i) => {
                let a = parse_rational(&t[..i])?;
                let sign = if bytes[i] == b'-' { -BigRational::one() } else { BigRational::one() };
                let (coeff, d) = parse_sqrt_term(&t[i + 1..])?;
                QuadRat::new(a, sign * coeff, d)
            }
            None => {
                if t.contains("sqrt(") {
                    let (coeff, d) = parse_sqrt_term(&t)?;
                    QuadRat::new(BigRational::zero(), coeff, d)
                } else {
                    Ok(QuadRat::from_rational(parse_rational(&t)?))
                }
            }
        }
    }
}

impl serde::Serialize for QuadRat {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for QuadRat {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An exact number together with its float shadow, for report output.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ExactF64 {
    pub exact: String,
    pub float: f64,
}

impl From<&QuadRat> for ExactF64 {
    fn from(q: &QuadRat) -> Self {
        ExactF64 { exact: q.to_string(), float: q.to_f64() }
    }
}

// ---------------------------------------------------------------------------
// Exact vectors
// ---------------------------------------------------------------------------

pub fn vec_add(x: &[QuadRat], y: &[QuadRat]) -> Vec<QuadRat> {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.clone() + b.clone()).collect()
}

pub fn vec_sub(x: &[QuadRat], y: &[QuadRat]) -> Vec<QuadRat> {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.clone() - b.clone()).collect()
}

pub fn vec_neg(x: &[QuadRat]) -> Vec<QuadRat> {
    x.iter().map(|a| -a.clone()).collect()
}

pub fn vec_floor(x: &[QuadRat]) -> Vec<BigInt> {
    x.iter().map(|a| a.floor()).collect()
}

pub fn vec_frac(x: &[QuadRat]) -> Vec<QuadRat> {
    x.iter().map(|a| a.frac()).collect()
}

pub fn vec_to_f64(x: &[QuadRat]) -> Vec<f64> {
    x.iter().map(|a| a.to_f64()).collect()
}

pub fn vec_from_i64(z: &[i64]) -> Vec<QuadRat> {
    z.iter().map(|&k| QuadRat::from_int(k)).collect()
}

/// Exact squared Euclidean norm.
pub fn vec_norm_sq(x: &[QuadRat]) -> QuadRat {
    let mut acc = QuadRat::zero();
    for a in x {
        acc += a.clone() * a.clone();
    }
    acc
}

// ---------------------------------------------------------------------------
// Exact matrices
// ---------------------------------------------------------------------------

/// A small dense matrix over `Q(sqrt(D))`, at most 8x8.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMat {
    rows: usize,
    cols: usize,
    data: Vec<QuadRat>,
}

pub const MAX_DIM: usize = 8;

impl ExactMat {
    pub fn new(rows: usize, cols: usize, data: Vec<QuadRat>) -> Result<Self> {
        if rows > MAX_DIM || cols > MAX_DIM {
            return Err(CoreError::TooLarge(rows.max(cols)));
        }
        if data.len() != rows * cols {
            return Err(CoreError::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(ExactMat { rows, cols, data })
    }

    /// Builds a square matrix from its columns.
    pub fn from_columns(cols: &[Vec<QuadRat>]) -> Result<Self> {
        let n = cols.len();
        if n == 0 || cols.iter().any(|c| c.len() != n) {
            return Err(CoreError::Dimension("columns must form a square matrix".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for col in cols {
                data.push(col[i].clone());
            }
        }
        ExactMat::new(n, n, data)
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut data = vec![QuadRat::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = QuadRat::one();
        }
        ExactMat::new(n, n, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> &QuadRat {
        &self.data[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> Vec<QuadRat> {
        (0..self.rows).map(|i| self.entry(i, j).clone()).collect()
    }

    pub fn mul_vec(&self, v: &[QuadRat]) -> Vec<QuadRat> {
        assert_eq!(v.len(), self.cols, "matrix/vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = QuadRat::zero();
                for j in 0..self.cols {
                    acc += self.entry(i, j).clone() * v[j].clone();
                }
                acc
            })
            .collect()
    }

    pub fn mul_int_vec(&self, z: &[i64]) -> Vec<QuadRat> {
        self.mul_vec(&vec_from_i64(z))
    }

    /// Exact determinant by Gaussian elimination with exact division.
    pub fn det(&self) -> Result<QuadRat> {
        if self.rows != self.cols {
            return Err(CoreError::Dimension("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut m = self.data.clone();
        let at = |m: &Vec<QuadRat>, i: usize, j: usize| m[i * n + j].clone();
        let mut det = QuadRat::one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| at(&m, r, col).sign() != 0);
            let Some(p) = pivot else {
                return Ok(QuadRat::zero());
            };
            if p != col {
                for j in 0..n {
                    m.swap(col * n + j, p * n + j);
                }
                det = -det;
            }
            let pv = at(&m, col, col);
            det = det * pv.clone();
            let inv = pv.inverse()?;
            for r in col + 1..n {
                let factor = at(&m, r, col) * inv.clone();
                if factor.sign() == 0 {
                    continue;
                }
                for j in col..n {
                    let x = at(&m, r, j) - factor.clone() * at(&m, col, j);
                    m[r * n + j] = x;
                }
            }
        }
        Ok(det)
    }

    /// Solves `M x = v` exactly. Errors when `M` is singular.
    pub fn solve(&self, v: &[QuadRat]) -> Result<Vec<QuadRat>> {
        if self.rows != self.cols {
            return Err(CoreError::Dimension("solve requires a square matrix".into()));
        }
        if v.len() != self.rows {
            return Err(CoreError::Dimension("right-hand side has the wrong length".into()));
        }
        let n = self.rows;
        let mut m = self.data.clone();
        let mut rhs: Vec<QuadRat> = v.to_vec();
        for col in 0..n {
            let pivot = (col..n).find(|&r| m[r * n + col].sign() != 0);
            let Some(p) = pivot else {
                return Err(CoreError::DegenerateLattice);
            };
            if p != col {
                for j in 0..n {
                    m.swap(col * n + j, p * n + j);
                }
                rhs.swap(col, p);
            }
            let inv = m[col * n + col].inverse()?;
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = m[r * n + col].clone() * inv.clone();
                if factor.sign() == 0 {
                    continue;
                }
                for j in col..n {
                    let x = m[r * n + j].clone() - factor.clone() * m[col * n + j].clone();
                    m[r * n + j] = x;
                }
                let x = rhs[r].clone() - factor * rhs[col].clone();
                rhs[r] = x;
            }
        }
        for i in 0..n {
            rhs[i] = rhs[i].clone() * m[i * n + i].inverse()?;
        }
        Ok(rhs)
    }

    pub fn inverse(&self) -> Result<ExactMat> {
        let n = self.rows;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![QuadRat::zero(); n];
            e[j] = QuadRat::one();
            cols.push(self.solve(&e)?);
        }
        ExactMat::from_columns(&cols)
    }
}

/// Spec-level alias: exact solve of `M x = v`.
pub fn mat_solve(m: &ExactMat, v: &[QuadRat]) -> Result<Vec<QuadRat>> {
    m.solve(v)
}

// ---------------------------------------------------------------------------
// Integer lattice algebra (Hermite normal form)
// ---------------------------------------------------------------------------

/// Column-style Hermite normal form of an integer matrix whose columns
/// generate a subgroup of Z^n. Returns the reduced column basis (rank many
/// columns, lower-triangular staircase).
pub fn hnf_columns(n: usize, generators: &[Vec<i64>]) -> Vec<Vec<i128>> {
    let mut cols: Vec<Vec<i128>> = generators
        .iter()
        .map(|g| {
            assert_eq!(g.len(), n, "generator has wrong length");
            g.iter().map(|&x| x as i128).collect()
        })
        .collect();
    let mut basis: Vec<Vec<i128>> = Vec::new();
    let mut row = 0;
    while row < n && !cols.is_empty() {
        // Euclidean reduction on the current row across all columns.
        loop {
            cols.retain(|c| c.iter().any(|&x| x != 0));
            let mut idx: Vec<usize> =
                (0..cols.len()).filter(|&j| cols[j][row] != 0).collect();
            if idx.is_empty() {
                break;
            }
            idx.sort_by_key(|&j| cols[j][row].unsigned_abs());
            let p = idx[0];
            if idx.len() == 1 {
                if cols[p][row] < 0 {
                    for x in cols[p].iter_mut() {
                        *x = -*x;
                    }
                }
                let pivot = cols.remove(p);
                // Reduce earlier basis entries against the new pivot later;
                // for index computation the staircase itself is enough.
                basis.push(pivot);
                break;
            }
            let q_val = cols[p][row];
            for &j in &idx[1..] {
                let k = cols[j][row] / q_val;
                if k != 0 {
                    let pcol = cols[p].clone();
                    for (x, pv) in cols[j].iter_mut().zip(&pcol) {
                        *x -= k * pv;
                    }
                }
            }
        }
        row += 1;
    }
    basis
}

/// Index of the subgroup of Z^n generated by the given vectors: the product
/// of the HNF staircase pivots when full rank, `None` (infinite) otherwise.
pub fn lattice_index(n: usize, generators: &[Vec<i64>]) -> Option<u128> {
    let basis = hnf_columns(n, generators);
    if basis.len() < n {
        return None;
    }
    // Staircase pivots: for each basis column, its first nonzero entry.
    let mut index: u128 = 1;
    for col in &basis {
        let pivot = col.iter().find(|&&x| x != 0).copied().unwrap_or(0);
        index = index.checked_mul(pivot.unsigned_abs().try_into().ok()?)?;
    }
    Some(index)
}

/// Decides membership of `target` in the Z-span of `generators` (vectors over
/// the rationals), returning integer coefficients when it is a member.
pub fn zspan_solve(generators: &[Vec<BigRational>], target: &[BigRational]) -> Option<Vec<BigInt>> {
    let rows = target.len();
    let cols = generators.len();
    if generators.iter().any(|g| g.len() != rows) {
        return None;
    }
    // Clear denominators row by row.
    let mut a: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); cols]; rows];
    let mut b: Vec<BigInt> = vec![BigInt::zero(); rows];
    for i in 0..rows {
        let mut lcm = target[i].denom().clone();
        for g in generators {
            lcm = num_integer::lcm(lcm, g[i].denom().clone());
        }
        for (j, g) in generators.iter().enumerate() {
            a[i][j] = (&g[i] * BigRational::from_integer(lcm.clone())).to_integer();
        }
        b[i] = (&target[i] * BigRational::from_integer(lcm)).to_integer();
    }
    // Integer Gaussian elimination tracking the transformation: solve A x = b
    // over Z by column HNF with a unimodular record.
    let mut cols_m: Vec<Vec<BigInt>> = (0..cols)
        .map(|j| (0..rows).map(|i| a[i][j].clone()).collect())
        .collect();
    let mut trans: Vec<Vec<BigInt>> = (0..cols)
        .map(|j| {
            let mut e = vec![BigInt::zero(); cols];
            e[j] = BigInt::one();
            e
        })
        .collect();
    let mut x = vec![BigInt::zero(); cols];
    let mut r = 0usize;
    let mut used = vec![false; cols];
    for row in 0..rows {
        // Reduce all unused columns on this row to a single pivot.
        loop {
            let mut idx: Vec<usize> = (0..cols)
                .filter(|&j| !used[j] && !cols_m[j][row].is_zero())
                .collect();
            if idx.is_empty() {
                break;
            }
            idx.sort_by_key(|&j| cols_m[j][row].abs());
            let p = idx[0];
            if idx.len() == 1 {
                break;
            }
            let q_val = cols_m[p][row].clone();
            for &j in &idx[1..] {
                let k = &cols_m[j][row] / &q_val;
                if !k.is_zero() {
                    for i in 0..rows {
                        let sub = &k * &cols_m[p][i];
                        cols_m[j][i] -= sub;
                    }
                    for i in 0..cols {
                        let sub = &k * &trans[p][i];
                        trans[j][i] -= sub;
                    }
                }
            }
        }
        let pivot = (0..cols).find(|&j| !used[j] && !cols_m[j][row].is_zero());
        if let Some(p) = pivot {
            let pv = cols_m[p][row].clone();
            let (q_val, rem) = num_integer::div_rem(b[row].clone(), pv.clone());
            if !rem.is_zero() {
                return None;
            }
            for i in 0..rows {
                let sub = &q_val * &cols_m[p][i];
                b_sub(&mut b, i, sub);
            }
            for i in 0..cols {
                x[i] += &q_val * &trans[p][i];
            }
            used[p] = true;
            r += 1;
            if r == cols {
                // Remaining rows must already be consistent.
            }
        } else if !b[row].is_zero() {
            return None;
        }
    }
    if b.iter().any(|v| !v.is_zero()) {
        return None;
    }
    Some(x)
}

fn b_sub(b: &mut [BigInt], i: usize, sub: BigInt) {
    b[i] -= sub;
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> QuadRat {
        s.parse().unwrap()
    }

    /// Integer-only oracle: sign of `p + q*sqrt(2)` scaled by a positive
    /// denominator, via squaring. Independent of QuadRat internals.
    fn sign_int_sqrt2(p: i64, q_c: i64) -> i8 {
        if q_c == 0 {
            return p.signum() as i8;
        }
        if p == 0 {
            return q_c.signum() as i8;
        }
        if p > 0 && q_c > 0 {
            return 1;
        }
        if p < 0 && q_c < 0 {
            return -1;
        }
        let p2 = (p as i128) * (p as i128);
        let q2 = 2 * (q_c as i128) * (q_c as i128);
        match p2.cmp(&q2) {
            Ordering::Greater => p.signum() as i8,
            Ordering::Less => q_c.signum() as i8,
            Ordering::Equal => 0,
        }
    }

    #[test]
    fn cmp_examples() {
        // cmp(1+1*sqrt(2), 5/2) -> Less, by the cross-multiplied oracle:
        // 1 + sqrt(2) vs 5/2  <=>  2 + 2 sqrt(2) vs 5  <=>  sign(-3 + 2 sqrt(2))
        assert_eq!(sign_int_sqrt2(-3, 2), -1);
        assert_eq!(quad_cmp(&q("1+sqrt(2)"), &q("5/2")).unwrap(), Ordering::Less);

        let x = q("7/3-2*sqrt(5)");
        assert_eq!(quad_cmp(&x, &x).unwrap(), Ordering::Equal);

        // cmp(3-2*sqrt(2), 0) -> Greater: 3^2 > (2 sqrt 2)^2 = 8.
        assert_eq!(sign_int_sqrt2(3, -2), 1);
        assert_eq!(quad_cmp(&q("3-2*sqrt(2)"), &QuadRat::zero()).unwrap(), Ordering::Greater);
    }

    #[test]
    fn cmp_mixed_radicands_is_an_error() {
        let e = quad_cmp(&q("sqrt(2)"), &q("sqrt(3)"));
        assert!(matches!(e, Err(CoreError::MixedRadicands(2, 3))));
        // One rational side is fine.
        assert!(quad_cmp(&q("sqrt(2)"), &q("3/2")).is_ok());
    }

    #[test]
    fn non_squarefree_rejected() {
        assert!(matches!(QuadRat::sqrt(12), Err(CoreError::NotSquarefree(12, 2))));
        assert!(QuadRat::sqrt(10).is_ok());
    }

    #[test]
    fn sign_agrees_with_integer_oracle() {
        for p in -20i64..=20 {
            for qc in -20i64..=20 {
                let x = QuadRat::new(
                    BigRational::from_integer(p.into()),
                    BigRational::from_integer(qc.into()),
                    2,
                )
                .unwrap();
                assert_eq!(x.sign(), sign_int_sqrt2(p, qc), "p={p} q={qc}");
            }
        }
    }

    #[test]
    fn floor_and_frac() {
        assert_eq!(q("sqrt(2)").floor(), BigInt::from(1));
        assert_eq!(q("-sqrt(2)").floor(), BigInt::from(-2));
        assert_eq!(q("7/2").floor(), BigInt::from(3));
        assert_eq!(q("-7/2").floor(), BigInt::from(-4));
        let f = q("3-2*sqrt(2)").frac(); // 0.1715...
        assert_eq!(f, q("3-2*sqrt(2)"));
        let f = q("2*sqrt(2)").frac(); // 2.828... -> 2 sqrt(2) - 2
        assert_eq!(f, q("-2+2*sqrt(2)"));
    }

    #[test]
    fn mat_solve_examples() {
        let id = ExactMat::identity(3).unwrap();
        let v = vec![q("1/2"), q("sqrt(2)"), q("-3")];
        assert_eq!(id.solve(&v).unwrap(), v);

        // Silver basis: columns (1,1) and (sqrt 2, -sqrt 2).
        let b = ExactMat::from_columns(&[
            vec![q("1"), q("1")],
            vec![q("sqrt(2)"), q("-sqrt(2)")],
        ])
        .unwrap();
        let x = b.solve(&[q("1"), q("0")]).unwrap();
        assert_eq!(x, vec![q("1/2"), q("1/4*sqrt(2)")]);
        // Multiply back reproduces v exactly.
        assert_eq!(b.mul_vec(&x), vec![q("1"), q("0")]);

        let zero = b.solve(&[q("0"), q("0")]).unwrap();
        assert_eq!(zero, vec![q("0"), q("0")]);
    }

    #[test]
    fn singular_matrix_is_an_error() {
        let m = ExactMat::from_columns(&[
            vec![q("1"), q("sqrt(2)")],
            vec![q("1"), q("sqrt(2)")],
        ])
        .unwrap();
        assert!(matches!(m.solve(&[q("1"), q("0")]), Err(CoreError::DegenerateLattice)));
        assert_eq!(m.det().unwrap(), QuadRat::zero());
    }

    #[test]
    fn det_silver() {
        let b = ExactMat::from_columns(&[
            vec![q("1"), q("1")],
            vec![q("sqrt(2)"), q("-sqrt(2)")],
        ])
        .unwrap();
        assert_eq!(b.det().unwrap(), q("-2*sqrt(2)"));
    }

    #[test]
    fn parse_display_examples() {
        for s in [
            "0",
            "1/2",
            "-3/2",
            "sqrt(2)",
            "-sqrt(2)",
            "1/4*sqrt(2)",
            "1+sqrt(2)",
            "3-2*sqrt(2)",
            "-5/3+7/2*sqrt(5)",
        ] {
            let x = q(s);
            assert_eq!(x.to_string(), s, "canonical form of {s}");
        }
        // Decimal ingestion.
        assert_eq!(q("0.5"), q("1/2"));
        assert_eq!(q("-2.25"), q("-9/4"));
        // Non-canonical but accepted forms.
        assert_eq!(q("1*sqrt(2)"), q("sqrt(2)"));
        assert_eq!(q("0+1/1*sqrt(2)"), q("sqrt(2)"));
    }

    #[test]
    fn hnf_index_examples() {
        assert_eq!(lattice_index(2, &[vec![1, 0], vec![0, 1]]), Some(1));
        assert_eq!(lattice_index(2, &[vec![2, 0], vec![0, 2]]), Some(4));
        assert_eq!(lattice_index(2, &[vec![2, 0]]), None);
        assert_eq!(lattice_index(2, &[vec![2, 0], vec![0, 2], vec![1, 1]]), Some(2));
    }

    #[test]
    fn zspan_membership() {
        let g = vec![
            vec![BigRational::from_integer(2.into()), BigRational::zero()],
            vec![BigRational::zero(), BigRational::from_integer(3.into())],
        ];
        let inside = vec![
            BigRational::from_integer(4.into()),
            BigRational::from_integer((-3).into()),
        ];
        let x = zspan_solve(&g, &inside).unwrap();
        assert_eq!(x, vec![BigInt::from(2), BigInt::from(-1)]);
        let outside = vec![BigRational::from_integer(1.into()), BigRational::zero()];
        assert!(zspan_solve(&g, &outside).is_none());
    }

    proptest! {
        #[test]
        fn parse_roundtrip(a_n in -50i64..50, a_d in 1i64..20, b_n in -50i64..50, b_d in 1i64..20, d in prop::sample::select(vec![1u64,2,3,5,7,10])) {
            let x = QuadRat::new(
                BigRational::new(a_n.into(), a_d.into()),
                BigRational::new(b_n.into(), b_d.into()),
                d,
            ).unwrap();
            let back: QuadRat = x.to_string().parse().unwrap();
            prop_assert_eq!(back, x);
        }

        #[test]
        fn cmp_agrees_with_floats_when_gap_is_large(
            an in -30i64..30, bn in -30i64..30, cn in -30i64..30, dn in -30i64..30,
        ) {
            let x = QuadRat::new(BigRational::new(an.into(), 7.into()), BigRational::new(bn.into(), 5.into()), 2).unwrap();
            let y = QuadRat::new(BigRational::new(cn.into(), 7.into()), BigRational::new(dn.into(), 5.into()), 2).unwrap();
            let fx = x.to_f64();
            let fy = y.to_f64();
            if (fx - fy).abs() > 2f64.powi(-40) {
                let expect = if fx < fy { Ordering::Less } else { Ordering::Greater };
                prop_assert_eq!(quad_cmp(&x, &y).unwrap(), expect);
            }
        }

        #[test]
        fn solve_multiply_back_is_exact(
            entries in prop::collection::vec((-9i64..9, -9i64..9), 4),
            rhs in prop::collection::vec((-9i64..9, -9i64..9), 2),
        ) {
            let data: Vec<QuadRat> = entries.iter().map(|&(a, b)| QuadRat::new(
                BigRational::from_integer(a.into()),
                BigRational::from_integer(b.into()), 2).unwrap()).collect();
            let m = ExactMat::new(2, 2, data).unwrap();
            let v: Vec<QuadRat> = rhs.iter().map(|&(a, b)| QuadRat::new(
                BigRational::from_integer(a.into()),
                BigRational::from_integer(b.into()), 2).unwrap()).collect();
            if m.det().unwrap().sign() != 0 {
                let x = m.solve(&v).unwrap();
                prop_assert_eq!(m.mul_vec(&x), v);
            }
        }

        #[test]
        fn floor_is_correct(an in -500i64..500, bn in -500i64..500) {
            let x = QuadRat::new(BigRational::new(an.into(), 13.into()), BigRational::new(bn.into(), 11.into()), 2).unwrap();
            let f = x.floor();
            let fq = QuadRat::from_rational(BigRational::from_integer(f.clone()));
            prop_assert!((x.clone() - fq.clone()).sign() >= 0);
            let fq1 = QuadRat::from_rational(BigRational::from_integer(f + 1));
            prop_assert!((x - fq1).sign() < 0);
        }
    }
}
