//! Reference implementations shared by the integration tests.
//!
//! Nothing here calls into the library's own linear algebra: Pauli matrices
//! are Kronecker products of the 2x2 matrices and exponentials use a Taylor
//! series with scaling and squaring.
#![allow(dead_code)]

use circuit_geometry::pauli::CMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn letter_matrix(ch: char) -> CMatrix {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let entries = match ch {
        'I' => [one, z, z, one],
        'X' => [z, one, one, z],
        'Y' => [z, -i, i, z],
        'Z' => [one, z, z, -one],
        _ => panic!("bad letter {ch}"),
    };
    DMatrix::from_row_slice(2, 2, &entries)
}

/// Tensor product with the first letter as the most significant factor.
pub fn pauli_oracle(word: &str) -> CMatrix {
    word.chars()
        .map(letter_matrix)
        .fold(DMatrix::from_element(1, 1, c(1.0, 0.0)), |acc, m| acc.kronecker(&m))
}

/// Words of length `n` over IXYZ, first letter most significant.
pub fn all_words(n: usize) -> Vec<String> {
    let letters = ['I', 'X', 'Y', 'Z'];
    (0..4usize.pow(n as u32))
        .map(|mut idx| {
            let mut w = vec!['I'; n];
            for slot in w.iter_mut().rev() {
                *slot = letters[idx % 4];
                idx /= 4;
            }
            w.into_iter().collect()
        })
        .collect()
}

pub fn weight(word: &str) -> usize {
    word.chars().filter(|ch| *ch != 'I').count()
}

/// `exp(a)` by Taylor series after scaling `a` below norm 1/2.
pub fn expm_oracle(a: &CMatrix) -> CMatrix {
    let norm = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let small = a * c(scale, 0.0);
    let dim = a.nrows();
    let mut term = CMatrix::identity(dim, dim);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &small * c(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `exp(-i t h)` through the Taylor oracle.
pub fn evolve_oracle(h: &CMatrix, t: f64) -> CMatrix {
    expm_oracle(&(h * c(0.0, -t)))
}

pub fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Random traceless Hermitian matrix with Gaussian entries.
pub fn random_traceless_hermitian(rng: &mut impl Rng, n: usize) -> CMatrix {
    let dim = 1usize << n;
    let a = CMatrix::from_fn(dim, dim, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let mut h = (&a + a.adjoint()) * c(0.5, 0.0);
    let shift = h.trace() / c(dim as f64, 0.0);
    for i in 0..dim {
        h[(i, i)] -= shift;
    }
    h
}

/// Gaussian vector of length `dim`, rescaled to Euclidean norm `radius`.
pub fn random_vector(rng: &mut impl Rng, dim: usize, radius: f64) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x * radius / norm).collect()
}

/// `sum_j y_j P_j` over the given words.
pub fn hamiltonian_oracle(words: &[String], y: &[f64]) -> CMatrix {
    let dim = pauli_oracle(&words[0]).nrows();
    words
        .iter()
        .zip(y)
        .fold(CMatrix::zeros(dim, dim), |acc, (w, v)| acc + pauli_oracle(w) * c(*v, 0.0))
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
