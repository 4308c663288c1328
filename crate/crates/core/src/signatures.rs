//! Signature constructors.
//!
//! Every supported path family is the image of a *core tensor* under
//! matrix-tensor congruence: a piecewise-linear path with segment matrix `A`
//! has signature `A * sig(axis path)`, a polynomial path `t -> sum_j A[:, j] t^j`
//! has signature `A * sig(moment path)`. Piecewise-linear paths can also be
//! built directly by Chen's identity, multiplying the exponentials of the
//! segments. Both routes are exact in rational arithmetic and must agree.

use std::fmt;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::algebra::{TensorAlgebraSpace, TensorSequence};
use crate::error::{Error, Result};
use crate::field::{inverse_factorial, Coefficient};
use crate::matrix::CoefMatrix;

/// Algorithm used for piecewise-linear signatures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Left-to-right product of segment exponentials, `O(m d^k)`.
    #[default]
    Chen,
    /// Congruence of the axis core tensor, `O(m^k + m d^k)`.
    Congruence,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Chen => "chen",
            Algorithm::Congruence => "congruence",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "chen" => Ok(Algorithm::Chen),
            "congruence" => Ok(Algorithm::Congruence),
            other => Err(Error::InvalidArgument(format!(
                "unknown algorithm `{other}` (expected chen|congruence)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeomType {
    Axis,
    Pwln,
    Poly,
    Spline,
}

impl FromStr for GeomType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "axis" => Ok(GeomType::Axis),
            "pwln" => Ok(GeomType::Pwln),
            "poly" => Ok(GeomType::Poly),
            "spline" => Ok(GeomType::Spline),
            other => Err(Error::InvalidArgument(format!(
                "unknown geometry type `{other}` (expected axis|pwln|poly|spline)"
            ))),
        }
    }
}

/// Description of a path whose signature should be computed.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec<S> {
    pub geom_type: GeomType,
    pub coef: Option<CoefMatrix<S>>,
    /// Spline piece degrees; must sum to the number of columns of `coef`.
    pub composition: Option<Vec<usize>>,
    /// Spline derivative-matching order checked at interior knots.
    pub regularity: i64,
    pub algorithm: Algorithm,
}

impl<S: Coefficient> PathSpec<S> {
    pub fn axis() -> Self {
        Self {
            geom_type: GeomType::Axis,
            coef: None,
            composition: None,
            regularity: 0,
            algorithm: Algorithm::Chen,
        }
    }

    pub fn pwln(coef: CoefMatrix<S>, algorithm: Algorithm) -> Self {
        Self {
            geom_type: GeomType::Pwln,
            coef: Some(coef),
            algorithm,
            ..Self::axis()
        }
    }

    pub fn poly(coef: CoefMatrix<S>) -> Self {
        Self {
            geom_type: GeomType::Poly,
            coef: Some(coef),
            ..Self::axis()
        }
    }

    pub fn spline(coef: CoefMatrix<S>, composition: Vec<usize>, regularity: i64) -> Self {
        Self {
            geom_type: GeomType::Spline,
            coef: Some(coef),
            composition: Some(composition),
            regularity,
            ..Self::axis()
        }
    }
}

fn check_rows<S: Coefficient>(space: &TensorAlgebraSpace, coef: &CoefMatrix<S>) -> Result<()> {
    if coef.rows() != space.dimension {
        return Err(Error::Shape(format!(
            "coefficient matrix has {} rows, space dimension is {}",
            coef.rows(),
            space.dimension
        )));
    }
    Ok(())
}

/// Signature of the straight segment with increment `a`: level `l` is `a^(x)l / l!`.
pub fn sig_linear<S: Coefficient>(
    space: TensorAlgebraSpace,
    a: &[S],
) -> Result<TensorSequence<S>> {
    let d = space.dimension;
    if a.len() != d {
        return Err(Error::Shape(format!(
            "increment has {} entries, space dimension is {d}",
            a.len()
        )));
    }
    let mut levels: Vec<Vec<S>> = Vec::with_capacity(space.level + 1);
    levels.push(vec![S::one()]);
    for l in 1..=space.level {
        let factor = S::from_ratio(1, l as i64);
        let scaled: Vec<S> = a.iter().map(|x| x.times(&factor)).collect();
        let prev = &levels[l - 1];
        let mut next = Vec::with_capacity(prev.len() * d);
        for p in prev {
            next.extend(scaled.iter().map(|x| p.times(x)));
        }
        levels.push(next);
    }
    TensorSequence::from_levels(space, levels)
}

/// Signature of the axis path `e_1, e_2, ..., e_m` in `T_{m,k}`.
///
/// A word has coefficient `1 / prod(run_length!)` if it is weakly increasing
/// and `0` otherwise. Only the weakly increasing words are visited.
pub fn core_axis<S: Coefficient>(space: TensorAlgebraSpace) -> Result<TensorSequence<S>> {
    let m = space.dimension;
    let mut out = TensorSequence::<S>::one(space)?;
    // (offset, last letter, current run length, value)
    let mut frontier: Vec<(usize, usize, usize, S)> = vec![(0, 0, 0, S::one())];
    for l in 1..=space.level {
        let mut next = Vec::new();
        for (offset, last, run, value) in &frontier {
            let first = if l == 1 { 0 } else { *last };
            for letter in first..m {
                let (run, value) = if l > 1 && letter == *last {
                    (run + 1, value.times(&S::from_ratio(1, (run + 1) as i64)))
                } else {
                    (1, value.clone())
                };
                next.push((offset * m + letter, letter, run, value));
            }
        }
        let level = out.level_mut(l);
        for (offset, _, _, value) in &next {
            level[*offset] = value.clone();
        }
        frontier = next;
    }
    Ok(out)
}

/// Signature of the moment path `t -> (t, t^2, ..., t^m)` in `T_{m,k}`.
///
/// The coefficient of `(w_1, ..., w_l)` is `prod_i w_i / (w_1 + ... + w_i)`.
pub fn core_monomial<S: Coefficient>(space: TensorAlgebraSpace) -> Result<TensorSequence<S>> {
    let m = space.dimension;
    let mut out = TensorSequence::<S>::one(space)?;
    let mut prefix_sums: Vec<usize> = vec![0];
    for l in 1..=space.level {
        let mut sums = Vec::with_capacity(prefix_sums.len() * m);
        let mut values = Vec::with_capacity(prefix_sums.len() * m);
        let prev = out.level(l - 1).to_vec();
        for (p, s) in prev.iter().zip(&prefix_sums) {
            for w in 1..=m {
                let total = s + w;
                values.push(p.times(&S::from_ratio(w as i64, total as i64)));
                sums.push(total);
            }
        }
        out.level_mut(l).clone_from_slice(&values);
        prefix_sums = sums;
    }
    Ok(out)
}

/// Matrix-tensor congruence `A * C`: every mode of every level of `core`
/// (over `m` letters) is contracted against the `d x m` matrix `a`.
///
/// Modes are contracted one at a time from the left, so level `l` costs
/// `sum_j d^j m^(l-j+1)` multiply-adds instead of `d^l m^l`.
pub fn congruence<S: Coefficient>(
    a: &CoefMatrix<S>,
    core: &TensorSequence<S>,
    target: TensorAlgebraSpace,
) -> Result<TensorSequence<S>> {
    let d = target.dimension;
    let m = core.dimension();
    if a.rows() != d || a.cols() != m {
        return Err(Error::Shape(format!(
            "congruence needs a {d}x{m} matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if core.truncation_level() != target.level {
        return Err(Error::Shape(format!(
            "core truncated at level {}, target at level {}",
            core.truncation_level(),
            target.level
        )));
    }
    // at[v * d + w] = A[w][v]
    let at = a.column_major();
    let mut levels = Vec::with_capacity(target.level + 1);
    levels.push(core.level(0).to_vec());
    for l in 1..=target.level {
        let mut cur = core.level(l).to_vec();
        for j in 0..l {
            let prefix = d.pow(j as u32);
            let suffix = m.pow((l - j - 1) as u32);
            cur = contract_mode(&cur, &at, prefix, m, d, suffix);
        }
        levels.push(cur);
    }
    TensorSequence::from_levels(target, levels)
}

/// Contract the middle mode of a `[prefix][m][suffix]` tensor against
/// `at` (`m x d`, row `v` holding column `v` of `A`), giving `[prefix][d][suffix]`.
fn contract_mode<S: Coefficient>(
    src: &[S],
    at: &[S],
    prefix: usize,
    m: usize,
    d: usize,
    suffix: usize,
) -> Vec<S> {
    if suffix == 1 {
        return contract_last_mode(src, at, m, d);
    }
    let mut dst = vec![S::zero(); prefix * d * suffix];
    for (block_in, block_out) in src
        .chunks_exact(m * suffix)
        .zip(dst.chunks_exact_mut(d * suffix))
    {
        for (fiber, a_col) in block_in.chunks_exact(suffix).zip(at.chunks_exact(d)) {
            if fiber.iter().all(S::is_zero) {
                continue;
            }
            for (a, out) in a_col.iter().zip(block_out.chunks_exact_mut(suffix)) {
                if a.is_zero() {
                    continue;
                }
                for (o, f) in out.iter_mut().zip(fiber) {
                    o.mul_add_assign(a, f);
                }
            }
        }
    }
    dst
}

const LANES: usize = 8;

/// Last-mode contraction `out[p][w] = sum_v A[w][v] * src[p][v]`.
///
/// This stage produces the full `d^l` output, so each output entry is
/// accumulated in a small register block and written exactly once.
fn contract_last_mode<S: Coefficient>(src: &[S], at: &[S], m: usize, d: usize) -> Vec<S> {
    let rows = src.len() / m;
    let mut dst = Vec::with_capacity(rows * d);
    let full = d / LANES * LANES;
    for row_in in src.chunks_exact(m) {
        for w0 in (0..full).step_by(LANES) {
            let mut acc: [S; LANES] = std::array::from_fn(|_| S::zero());
            for (t, a_col) in row_in.iter().zip(at.chunks_exact(d)) {
                if t.is_zero() {
                    continue;
                }
                let a: &[S; LANES] = a_col[w0..w0 + LANES].try_into().expect("lane width");
                for (acc, a) in acc.iter_mut().zip(a) {
                    acc.mul_add_assign(a, t);
                }
            }
            dst.extend(acc);
        }
        for w in full..d {
            let mut acc = S::zero();
            for (t, a_col) in row_in.iter().zip(at.chunks_exact(d)) {
                acc.mul_add_assign(&a_col[w], t);
            }
            dst.push(acc);
        }
    }
    dst
}

/// Piecewise-linear signature by Chen's identity: the product of the
/// exponentials of the columns of `a`, left to right.
pub fn sig_pwln_chen<S: Coefficient>(
    space: TensorAlgebraSpace,
    a: &CoefMatrix<S>,
) -> Result<TensorSequence<S>> {
    check_rows(&space, a)?;
    let mut acc = TensorSequence::one(space)?;
    for j in 0..a.cols() {
        let segment = sig_linear(space, &a.column(j))?;
        if j == 0 {
            acc = segment;
        } else {
            acc.mul_assign(&segment)?;
        }
    }
    Ok(acc)
}

/// Piecewise-linear signature as `A * core_axis(T_{m,k})`.
pub fn sig_pwln_congruence<S: Coefficient>(
    space: TensorAlgebraSpace,
    a: &CoefMatrix<S>,
) -> Result<TensorSequence<S>> {
    check_rows(&space, a)?;
    if a.cols() == 0 {
        return TensorSequence::one(space);
    }
    let core = core_axis::<S>(space.with_dimension(a.cols())?)?;
    congruence(a, &core, space)
}

pub fn sig_pwln<S: Coefficient>(
    space: TensorAlgebraSpace,
    a: &CoefMatrix<S>,
    algorithm: Algorithm,
) -> Result<TensorSequence<S>> {
    match algorithm {
        Algorithm::Chen => sig_pwln_chen(space, a),
        Algorithm::Congruence => sig_pwln_congruence(space, a),
    }
}

/// Signature of `t -> sum_j A[:, j] t^j` on `[0, 1]` (column `j` is the
/// coefficient of `t^(j+1)` in 0-based column numbering).
pub fn sig_poly<S: Coefficient>(
    space: TensorAlgebraSpace,
    a: &CoefMatrix<S>,
) -> Result<TensorSequence<S>> {
    check_rows(&space, a)?;
    if a.cols() == 0 {
        return TensorSequence::one(space);
    }
    let core = core_monomial::<S>(space.with_dimension(a.cols())?)?;
    congruence(a, &core, space)
}

fn validate_composition(composition: &[usize], cols: usize) -> Result<()> {
    if composition.iter().any(|&c| c == 0) {
        return Err(Error::InvalidComposition(
            "piece degrees must be positive".into(),
        ));
    }
    let total: usize = composition.iter().sum();
    if total != cols {
        return Err(Error::InvalidComposition(format!(
            "composition sums to {total}, coefficient matrix has {cols} columns"
        )));
    }
    Ok(())
}

/// A failed derivative-matching check at an interior spline knot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularityViolation {
    /// Knot between piece `knot` and piece `knot + 1` (0-based).
    pub knot: usize,
    /// Derivative order that does not match.
    pub order: usize,
}

/// q-th derivative of `t -> sum_j c_j t^j` (degrees `1..=deg`) at `t`, where `t` is 0 or 1.
fn piece_derivative<S: Coefficient>(
    block: &CoefMatrix<S>,
    row: usize,
    order: usize,
    at_one: bool,
) -> S {
    let mut acc = S::zero();
    for col in 0..block.cols() {
        let degree = col + 1;
        if degree < order || (!at_one && degree != order) {
            continue;
        }
        // degree! / (degree - order)!
        let falling: i64 = ((degree - order + 1)..=degree).map(|x| x as i64).product();
        acc.add_assign_ref(&block.get(row, col).times(&S::from_i64(falling)));
    }
    acc
}

/// Derivative orders `1..=regularity` that do not match across interior knots,
/// with every piece parameterized on `[0, 1]`.
pub fn spline_regularity_violations<S: Coefficient>(
    a: &CoefMatrix<S>,
    composition: &[usize],
    regularity: i64,
) -> Result<Vec<RegularityViolation>> {
    if regularity < 0 {
        return Err(Error::InvalidRegularity(regularity));
    }
    validate_composition(composition, a.cols())?;
    let blocks = spline_blocks(a, composition);
    let mut violations = Vec::new();
    for (knot, pair) in blocks.windows(2).enumerate() {
        for order in 1..=regularity as usize {
            let matches = (0..a.rows()).all(|r| {
                let left = piece_derivative(&pair[0], r, order, true);
                let right = piece_derivative(&pair[1], r, order, false);
                left.close_to(&right, 1e-9, 1e-12)
            });
            if !matches {
                violations.push(RegularityViolation { knot, order });
            }
        }
    }
    Ok(violations)
}

fn spline_blocks<S: Coefficient>(a: &CoefMatrix<S>, composition: &[usize]) -> Vec<CoefMatrix<S>> {
    let mut start = 0;
    composition
        .iter()
        .map(|&len| {
            let block = a.column_block(start, start + len);
            start += len;
            block
        })
        .collect()
}

/// Piecewise-polynomial signature: the Chen product of the polynomial
/// signatures of each piece. Regularity is validated, never enforced; a
/// mismatch is logged as a warning and the coefficients are used as given.
pub fn sig_spline<S: Coefficient>(
    space: TensorAlgebraSpace,
    a: &CoefMatrix<S>,
    composition: &[usize],
    regularity: i64,
) -> Result<TensorSequence<S>> {
    check_rows(&space, a)?;
    let violations = spline_regularity_violations(a, composition, regularity)?;
    for v in &violations {
        warn!(
            "spline is not C^{} at knot {}: derivative of order {} does not match",
            regularity, v.knot, v.order
        );
    }
    let mut acc = TensorSequence::one(space)?;
    for block in spline_blocks(a, composition) {
        acc.mul_assign(&sig_poly(space, &block)?)?;
    }
    Ok(acc)
}

/// Dispatch on the geometry type of `spec`.
pub fn sig<S: Coefficient>(
    space: TensorAlgebraSpace,
    spec: &PathSpec<S>,
) -> Result<TensorSequence<S>> {
    let need_coef = || {
        spec.coef
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument(format!("{:?} path requires coef", spec.geom_type)))
    };
    match spec.geom_type {
        GeomType::Axis => {
            if spec.coef.is_some() {
                return Err(Error::InvalidArgument("axis path takes no coef".into()));
            }
            core_axis(space)
        }
        GeomType::Pwln => sig_pwln(space, need_coef()?, spec.algorithm),
        GeomType::Poly => sig_poly(space, need_coef()?),
        GeomType::Spline => {
            let composition = spec.composition.as_deref().ok_or_else(|| {
                Error::InvalidArgument("spline path requires composition".into())
            })?;
            sig_spline(space, need_coef()?, composition, spec.regularity)
        }
    }
}

/// Independent numerical signature of a sampled path: the path is evaluated at
/// `chords + 1` equispaced times on `[0, 1]` and the inscribed polygon's
/// signature is returned. Converges to the iterated integrals for smooth paths.
pub fn sig_quadrature_oracle<F>(
    space: TensorAlgebraSpace,
    sampler: F,
    chords: usize,
) -> Result<TensorSequence<f64>>
where
    F: Fn(f64) -> Vec<f64>,
{
    if chords == 0 {
        return Err(Error::InvalidArgument("need at least one chord".into()));
    }
    let d = space.dimension;
    let sample = |i: usize| -> Result<Vec<f64>> {
        let t = i as f64 / chords as f64;
        let x = sampler(t);
        if x.len() != d {
            return Err(Error::Shape(format!(
                "sampler returned {} coordinates, expected {d}",
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("sample at t = {t}")));
        }
        Ok(x)
    };
    let mut increments = CoefMatrix::<f64>::zeros(d, chords);
    let mut prev = sample(0)?;
    for j in 0..chords {
        let next = sample(j + 1)?;
        for r in 0..d {
            increments.set(r, j, next[r] - prev[r]);
        }
        prev = next;
    }
    sig_pwln_chen(space, &increments)
}

/// Closed-form axis-core coefficient of a word, used by property tests.
pub fn axis_word_coefficient<S: Coefficient>(word: &[usize]) -> S {
    if word.windows(2).any(|w| w[0] > w[1]) {
        return S::zero();
    }
    let mut value = S::one();
    let mut run = 0;
    for (i, letter) in word.iter().enumerate() {
        run += 1;
        if i + 1 == word.len() || word[i + 1] != *letter {
            value.mul_assign_ref(&inverse_factorial(run));
            run = 0;
        }
    }
    value
}
