//! Oracles shared by the integration tests. Nothing here calls into the
//! signature constructors; these are independent reference computations.

#![allow(dead_code)]

use rand::Rng;
use sigtensors::{CoefMatrix, Coefficient, Rational, TensorSequence};

pub fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

/// All words of length `len` over `1..=d`, lexicographic.
pub fn words(d: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w: Vec<usize>| {
                (1..=d).map(move |letter| {
                    let mut w = w.clone();
                    w.push(letter);
                    w
                })
            })
            .collect();
    }
    out
}

/// Every interleaving of `u` and `v`, with multiplicity.
pub fn shuffles(u: &[usize], v: &[usize]) -> Vec<Vec<usize>> {
    if u.is_empty() {
        return vec![v.to_vec()];
    }
    if v.is_empty() {
        return vec![u.to_vec()];
    }
    let mut out = Vec::new();
    for mut w in shuffles(&u[..u.len() - 1], v) {
        w.push(u[u.len() - 1]);
        out.push(w);
    }
    for mut w in shuffles(u, &v[..v.len() - 1]) {
        w.push(v[v.len() - 1]);
        out.push(w);
    }
    out
}

/// Checks `S(u) S(v) = sum_{w in u ш v} S(w)` for all `|u| + |v| <= k`.
/// Returns the first failing pair.
pub fn shuffle_identity_failure(s: &TensorSequence<Rational>) -> Option<(Vec<usize>, Vec<usize>)> {
    let d = s.dimension();
    let k = s.truncation_level();
    for lu in 0..=k {
        for lv in 0..=(k - lu) {
            for u in words(d, lu) {
                for v in words(d, lv) {
                    let lhs = s.get_entry(&u).unwrap() * s.get_entry(&v).unwrap();
                    let rhs = shuffles(&u, &v)
                        .iter()
                        .fold(q(0, 1), |acc, w| acc + s.get_entry(w).unwrap());
                    if lhs != rhs {
                        return Some((u, v));
                    }
                }
            }
        }
    }
    None
}

/// Axis-path coefficient from the block-factorial closed form.
pub fn axis_closed_form(word: &[usize]) -> Rational {
    if word.windows(2).any(|p| p[0] > p[1]) {
        return q(0, 1);
    }
    let mut denom: i64 = 1;
    let mut i = 0;
    while i < word.len() {
        let mut j = i;
        while j < word.len() && word[j] == word[i] {
            j += 1;
        }
        denom *= (1..=(j - i) as i64).product::<i64>();
        i = j;
    }
    q(1, denom)
}

/// Moment-path coefficient `prod_i w_i / (w_1 + ... + w_i)`.
pub fn monomial_closed_form(word: &[usize]) -> f64 {
    let mut sum = 0;
    word.iter()
        .map(|&w| {
            sum += w;
            w as f64 / sum as f64
        })
        .product()
}

pub fn random_int_matrix<S: Coefficient>(
    rng: &mut impl Rng,
    rows: usize,
    cols: usize,
    bound: i64,
) -> CoefMatrix<S> {
    let data = (0..rows * cols)
        .map(|_| S::from_i64(rng.random_range(-bound..=bound)))
        .collect();
    CoefMatrix::new(rows, cols, data).unwrap()
}

/// Determinant by cofactor expansion, for small integer matrices.
pub fn determinant(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|c| {
            let minor: Vec<Vec<i64>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != c)
                        .map(|(_, v)| *v)
                        .collect()
                })
                .collect();
            let sign = if c % 2 == 0 { 1 } else { -1 };
            sign * m[0][c] * determinant(&minor)
        })
        .sum()
}

/// Random `n x n` integer matrix with entries in `[-bound, bound]` and nonzero determinant.
pub fn random_invertible(rng: &mut impl Rng, n: usize, bound: i64) -> Vec<Vec<i64>> {
    loop {
        let m: Vec<Vec<i64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.random_range(-bound..=bound)).collect())
            .collect();
        if determinant(&m) != 0 {
            return m;
        }
    }
}

/// Polynomial fixture path `t -> (t + 2t^2, 3t + 4t^2)`.
pub fn poly_path(t: f64) -> Vec<f64> {
    vec![t + 2.0 * t * t, 3.0 * t + 4.0 * t * t]
}
