//! Generalized Pauli basis on `n` qubits.
//!
//! Strings are identified by a base-4 index whose most significant digit is
//! qubit 0, with digits `I=0, X=1, Y=2, Z=3`. In matrix form qubit 0 is the
//! leftmost tensor factor, i.e. the most significant bit of a row index.
//!
//! The tangent basis excludes the all-`I` string and is ordered by weight
//! first, then by index, so that the first `k` coordinates are exactly the
//! strings of weight at most two.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, validation, Error, Result};

pub const MAX_QUBITS: usize = 6;

/// Max |H - H^dagger| entry and max |tr H| accepted by [`decompose`].
pub const HERMITIAN_TOL: f64 = 1e-10;

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn digit(self) -> usize {
        match self {
            Letter::I => 0,
            Letter::X => 1,
            Letter::Y => 2,
            Letter::Z => 3,
        }
    }

    fn from_digit(d: usize) -> Self {
        match d {
            0 => Letter::I,
            1 => Letter::X,
            2 => Letter::Y,
            _ => Letter::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// One `n`-fold tensor word over `{I, X, Y, Z}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    index: usize,
    // bit masks in matrix-row bit order (qubit 0 = bit n-1)
    x_mask: usize,
    z_mask: usize,
    y_count: u32,
    weight: usize,
}

impl PauliString {
    pub fn from_index(n: usize, index: usize) -> Result<Self> {
        check_qubits(n)?;
        if index >= 1 << (2 * n) {
            return Err(domain(format!("pauli index {index} out of range for n = {n}")));
        }
        let (mut x_mask, mut z_mask, mut y_count, mut weight) = (0, 0, 0, 0);
        for q in 0..n {
            let bit = 1 << (n - 1 - q);
            match Letter::from_digit((index >> (2 * (n - 1 - q))) & 3) {
                Letter::I => continue,
                Letter::X => x_mask |= bit,
                Letter::Y => {
                    x_mask |= bit;
                    z_mask |= bit;
                    y_count += 1;
                }
                Letter::Z => z_mask |= bit,
            }
            weight += 1;
        }
        Ok(Self {
            n,
            index,
            x_mask,
            z_mask,
            y_count,
            weight,
        })
    }

    pub fn from_letters(letters: &[Letter]) -> Result<Self> {
        let index = letters.iter().fold(0usize, |acc, l| acc * 4 + l.digit());
        Self::from_index(letters.len(), index)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn is_identity(&self) -> bool {
        self.index == 0
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.n)
            .map(|q| Letter::from_digit((self.index >> (2 * (self.n - 1 - q))) & 3))
            .collect()
    }

    /// Phase `p` with `sigma |j> = p |j ^ x_mask>`.
    #[inline]
    fn phase(&self, j: usize) -> Complex64 {
        let sign = if (j & self.z_mask).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        match self.y_count % 4 {
            0 => Complex64::new(sign, 0.0),
            1 => Complex64::new(0.0, sign),
            2 => Complex64::new(-sign, 0.0),
            _ => Complex64::new(0.0, -sign),
        }
    }

    /// Dense `2^n x 2^n` matrix.
    pub fn matrix(&self) -> CMatrix {
        let dim = 1 << self.n;
        let mut m = CMatrix::zeros(dim, dim);
        for j in 0..dim {
            m[(j ^ self.x_mask, j)] = self.phase(j);
        }
        m
    }

    /// `tr(sigma * a)`, computed from the sparse structure of `sigma`.
    pub fn trace_product(&self, a: &CMatrix) -> Complex64 {
        let dim = 1 << self.n;
        (0..dim).map(|j| self.phase(j) * a[(j, j ^ self.x_mask)]).sum()
    }

    /// `sigma * a`.
    pub fn mul_left(&self, a: &CMatrix) -> CMatrix {
        let dim = 1 << self.n;
        let mut out = CMatrix::zeros(dim, a.ncols());
        for j in 0..dim {
            let ph = self.phase(j);
            let row = j ^ self.x_mask;
            for c in 0..a.ncols() {
                out[(row, c)] = ph * a[(j, c)];
            }
        }
        out
    }

    /// `exp(-i * angle * sigma) * a`, using `sigma^2 = I`.
    pub fn rotate_left(&self, angle: f64, a: &CMatrix) -> CMatrix {
        let (s, c) = angle.sin_cos();
        let sa = self.mul_left(a);
        a * Complex64::new(c, 0.0) + sa * Complex64::new(0.0, -s)
    }

    /// `exp(-i * angle * sigma)` as a dense matrix.
    pub fn rotation(&self, angle: f64) -> CMatrix {
        self.rotate_left(angle, &CMatrix::identity(1 << self.n, 1 << self.n))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.letters() {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Letter::I),
                'X' => Ok(Letter::X),
                'Y' => Ok(Letter::Y),
                'Z' => Ok(Letter::Z),
                other => Err(validation(format!("invalid pauli letter '{other}' in \"{s}\""))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_letters(&letters)
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The ordered tangent basis for one qubit count.
#[derive(Debug)]
pub struct PauliBasis {
    n: usize,
    strings: Vec<PauliString>,
    // canonical index -> position in `strings` (identity maps to usize::MAX)
    position: Vec<usize>,
    k: usize,
}

impl PauliBasis {
    fn build(n: usize) -> Self {
        let total = 1usize << (2 * n);
        let mut strings: Vec<PauliString> = (1..total)
            .map(|i| PauliString::from_index(n, i).expect("index in range"))
            .collect();
        strings.sort_by_key(|s| (s.weight(), s.index()));
        let mut position = vec![usize::MAX; total];
        for (pos, s) in strings.iter().enumerate() {
            position[s.index()] = pos;
        }
        let k = strings.iter().take_while(|s| s.weight() <= 2).count();
        Self {
            n,
            strings,
            position,
            k,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of the tangent space, `4^n - 1`.
    pub fn dim(&self) -> usize {
        self.strings.len()
    }

    /// Number of leading strings with weight at most two.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn strings(&self) -> &[PauliString] {
        &self.strings
    }

    pub fn get(&self, pos: usize) -> PauliString {
        self.strings[pos]
    }

    /// Position of `s` in the tangent ordering; `None` for the identity.
    pub fn position_of(&self, s: &PauliString) -> Option<usize> {
        if s.n() != self.n {
            return None;
        }
        match self.position[s.index()] {
            usize::MAX => None,
            p => Some(p),
        }
    }
}

/// Shared, lazily built basis for `n` qubits.
pub fn basis(n: usize) -> Result<&'static PauliBasis> {
    static CACHE: [OnceLock<PauliBasis>; MAX_QUBITS + 1] = [const { OnceLock::new() }; MAX_QUBITS + 1];
    check_qubits(n)?;
    Ok(CACHE[n].get_or_init(|| PauliBasis::build(n)))
}

pub fn enumerate_basis(n: usize) -> Result<Vec<PauliString>> {
    Ok(basis(n)?.strings().to_vec())
}

/// Count of weight-one and weight-two strings: `9(n^2 - n)/2 + 3n`.
pub fn partition_k(n: usize) -> usize {
    9 * (n * n - n) / 2 + 3 * n
}

pub(crate) fn check_qubits(n: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(domain(format!("qubit count {n} outside 1..={MAX_QUBITS}")))
    }
}

/// Real tangent coordinates in the canonical Pauli ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector {
    n: usize,
    y: Vec<f64>,
}

impl CoeffVector {
    pub fn new(n: usize, y: Vec<f64>) -> Result<Self> {
        let dim = basis(n)?.dim();
        if y.len() != dim {
            return Err(domain(format!(
                "coefficient vector has length {}, expected {dim} for n = {n}",
                y.len()
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(validation(format!("coefficient {i} is not finite")));
        }
        Ok(Self { n, y })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Ok(Self {
            n,
            y: vec![0.0; basis(n)?.dim()],
        })
    }

    /// Vector with a single nonzero coefficient on `s`.
    pub fn single(s: PauliString, value: f64) -> Result<Self> {
        let b = basis(s.n())?;
        let pos = b
            .position_of(&s)
            .ok_or_else(|| domain("identity string has no tangent coordinate"))?;
        let mut y = vec![0.0; b.dim()];
        y[pos] = value;
        Self::new(s.n(), y)
    }

    /// Builds from `(word, value)` pairs; repeated words accumulate.
    pub fn from_terms<'a>(n: usize, terms: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self> {
        let b = basis(n)?;
        let mut y = vec![0.0; b.dim()];
        for (word, value) in terms {
            let s: PauliString = word.parse()?;
            if s.n() != n {
                return Err(validation(format!("pauli word \"{word}\" does not have {n} letters")));
            }
            let pos = b
                .position_of(&s)
                .ok_or_else(|| Error::IdentityComponent { trace: value * (1 << n) as f64 })?;
            y[pos] += value;
        }
        Self::new(n, y)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.y
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.y.iter().all(|v| *v == 0.0)
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            y: self.y.iter().map(|v| v * factor).collect(),
        }
    }

    /// Nonzero `(string, coefficient)` pairs in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (PauliString, f64)> + '_ {
        let b = basis(self.n).expect("validated at construction");
        self.y
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(move |(i, v)| (b.get(i), *v))
    }
}

fn check_hermitian(h: &CMatrix, n: usize) -> Result<()> {
    let dim = 1usize << n;
    if h.nrows() != dim || h.ncols() != dim {
        return Err(domain(format!(
            "matrix is {}x{}, expected {dim}x{dim} for n = {n}",
            h.nrows(),
            h.ncols()
        )));
    }
    let mut worst = 0.0f64;
    for r in 0..dim {
        for c in 0..dim {
            worst = worst.max((h[(r, c)] - h[(c, r)].conj()).norm());
        }
    }
    if worst > HERMITIAN_TOL {
        return Err(validation(format!(
            "matrix is not Hermitian: max |H - H^dagger| = {worst:.3e}"
        )));
    }
    Ok(())
}

/// Coefficients `y_i = Re tr(sigma_i H) / 2^n` of a traceless Hermitian matrix.
pub fn decompose(h: &CMatrix, n: usize) -> Result<CoeffVector> {
    check_qubits(n)?;
    check_hermitian(h, n)?;
    let trace = h.trace();
    if trace.norm() > HERMITIAN_TOL {
        return Err(Error::IdentityComponent { trace: trace.re });
    }
    let b = basis(n)?;
    let scale = 1.0 / (1usize << n) as f64;
    let y = b
        .strings()
        .iter()
        .map(|s| s.trace_product(h).re * scale)
        .collect();
    CoeffVector::new(n, y)
}

/// `sum_i y_i sigma_i`.
pub fn reconstruct(y: &CoeffVector) -> CMatrix {
    let dim = 1usize << y.n();
    let mut h = CMatrix::zeros(dim, dim);
    for (s, v) in y.terms() {
        for j in 0..dim {
            h[(j ^ s.x_mask, j)] += s.phase(j) * v;
        }
    }
    h
}
