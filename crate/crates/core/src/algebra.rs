//! The truncated tensor algebra over `R^d` up to level `k`.
//!
//! An element is stored densely, one flat row-major array per level. The word
//! `(w1, ..., wl)` (letters `1..=d`) addresses level `l` at flat offset
//! `sum_i (w_i - 1) * d^(l - i)`, so `w1` is the slowest index and the flat
//! order within a level is lexicographic in the word.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Coefficient, FieldKind};

/// The ambient space `T_{d,k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TensorAlgebraSpace {
    pub dimension: usize,
    pub level: usize,
    pub field: FieldKind,
}

impl fmt::Display for TensorAlgebraSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T(d={}, k={}, {})", self.dimension, self.level, self.field)
    }
}

impl TensorAlgebraSpace {
    pub fn new(dimension: usize, level: usize, field: FieldKind) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidSpace("dimension must be at least 1".into()));
        }
        if level == 0 {
            return Err(Error::InvalidSpace("truncation level must be at least 1".into()));
        }
        // Largest level must be addressable.
        if dimension.checked_pow(level as u32).is_none() {
            return Err(Error::InvalidSpace(format!(
                "{dimension}^{level} coefficients do not fit in memory"
            )));
        }
        Ok(Self {
            dimension,
            level,
            field,
        })
    }

    /// Space over the coefficient type `S`.
    pub fn of<S: Coefficient>(dimension: usize, level: usize) -> Result<Self> {
        Self::new(dimension, level, S::FIELD)
    }

    /// Same dimension and level, different field.
    pub fn with_field(self, field: FieldKind) -> Self {
        Self { field, ..self }
    }

    /// Same level and field over a different alphabet size.
    pub fn with_dimension(self, dimension: usize) -> Result<Self> {
        Self::new(dimension, self.level, self.field)
    }

    /// Number of coefficients at level `l`, i.e. `d^l`.
    pub fn level_len(&self, l: usize) -> usize {
        self.dimension.pow(l as u32)
    }

    /// Total coordinate count, `(d^(k+1) - 1) / (d - 1)` (or `k + 1` when `d = 1`).
    pub fn total_len(&self) -> usize {
        (0..=self.level).map(|l| self.level_len(l)).sum()
    }

    /// Flat offset of a word inside its level.
    pub fn word_offset(&self, word: &[usize]) -> Result<usize> {
        if word.len() > self.level {
            return Err(Error::WordTooLong {
                length: word.len(),
                level: self.level,
            });
        }
        let mut offset = 0usize;
        for &letter in word {
            if letter == 0 || letter > self.dimension {
                return Err(Error::LetterOutOfRange {
                    letter,
                    dimension: self.dimension,
                });
            }
            offset = offset * self.dimension + (letter - 1);
        }
        Ok(offset)
    }

    /// Inverse of [`word_offset`](Self::word_offset) for a word of length `l`.
    pub fn word_at(&self, l: usize, mut offset: usize) -> Vec<usize> {
        let mut word = vec![0; l];
        for slot in word.iter_mut().rev() {
            *slot = offset % self.dimension + 1;
            offset /= self.dimension;
        }
        word
    }
}

/// Dense element of `T_{d,k}`: one flat array per level `0..=k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSequence<S> {
    space: TensorAlgebraSpace,
    levels: Vec<Vec<S>>,
}

impl<S: Coefficient> TensorSequence<S> {
    fn check_field(space: &TensorAlgebraSpace) -> Result<()> {
        if space.field != S::FIELD {
            return Err(Error::InvalidSpace(format!(
                "space field {} does not match coefficient type {}",
                space.field,
                S::FIELD
            )));
        }
        Ok(())
    }

    pub fn zero(space: TensorAlgebraSpace) -> Result<Self> {
        Self::check_field(&space)?;
        let levels = (0..=space.level)
            .map(|l| vec![S::zero(); space.level_len(l)])
            .collect();
        Ok(Self { space, levels })
    }

    /// The unit: constant term 1, every higher level 0.
    pub fn one(space: TensorAlgebraSpace) -> Result<Self> {
        let mut t = Self::zero(space)?;
        t.levels[0][0] = S::one();
        Ok(t)
    }

    /// Build from flat per-level arrays; validates count and lengths.
    pub fn from_levels(space: TensorAlgebraSpace, levels: Vec<Vec<S>>) -> Result<Self> {
        Self::check_field(&space)?;
        if levels.len() != space.level + 1 {
            return Err(Error::Shape(format!(
                "expected {} levels, got {}",
                space.level + 1,
                levels.len()
            )));
        }
        for (l, values) in levels.iter().enumerate() {
            if values.len() != space.level_len(l) {
                return Err(Error::Shape(format!(
                    "level {l} has {} coefficients, expected {}",
                    values.len(),
                    space.level_len(l)
                )));
            }
        }
        Ok(Self { space, levels })
    }

    /// Element supported on level 1 only.
    pub fn from_vector(space: TensorAlgebraSpace, vector: &[S]) -> Result<Self> {
        if vector.len() != space.dimension {
            return Err(Error::Shape(format!(
                "vector has {} entries, space dimension is {}",
                vector.len(),
                space.dimension
            )));
        }
        let mut t = Self::zero(space)?;
        t.levels[1] = vector.to_vec();
        Ok(t)
    }

    /// Rebuild from a flat vector in [`flatten`](Self::flatten) order.
    pub fn from_flat(space: TensorAlgebraSpace, flat: Vec<S>) -> Result<Self> {
        if flat.len() != space.total_len() {
            return Err(Error::Shape(format!(
                "flat vector has {} entries, expected {}",
                flat.len(),
                space.total_len()
            )));
        }
        let mut it = flat.into_iter();
        let levels = (0..=space.level)
            .map(|l| it.by_ref().take(space.level_len(l)).collect())
            .collect();
        Self::from_levels(space, levels)
    }

    pub fn space(&self) -> TensorAlgebraSpace {
        self.space
    }

    pub fn dimension(&self) -> usize {
        self.space.dimension
    }

    pub fn truncation_level(&self) -> usize {
        self.space.level
    }

    pub fn level(&self, l: usize) -> &[S] {
        &self.levels[l]
    }

    pub fn level_mut(&mut self, l: usize) -> &mut [S] {
        &mut self.levels[l]
    }

    pub fn levels(&self) -> &[Vec<S>] {
        &self.levels
    }

    pub fn into_levels(self) -> Vec<Vec<S>> {
        self.levels
    }

    pub fn constant_term(&self) -> &S {
        &self.levels[0][0]
    }

    /// Coefficient of a word; the empty word is the constant term.
    pub fn get_entry(&self, word: &[usize]) -> Result<&S> {
        let offset = self.space.word_offset(word)?;
        Ok(&self.levels[word.len()][offset])
    }

    pub fn set_entry(&mut self, word: &[usize], value: S) -> Result<()> {
        let offset = self.space.word_offset(word)?;
        self.levels[word.len()][offset] = value;
        Ok(())
    }

    /// Level-major, lexicographic within each level.
    pub fn flatten(&self) -> Vec<S> {
        self.levels.iter().flatten().cloned().collect()
    }

    pub fn map<T: Coefficient>(&self, f: impl Fn(&S) -> T) -> TensorSequence<T> {
        TensorSequence {
            space: self.space.with_field(T::FIELD),
            levels: self
                .levels
                .iter()
                .map(|lvl| lvl.iter().map(&f).collect())
                .collect(),
        }
    }

    /// Float copy of this element.
    pub fn to_f64(&self) -> TensorSequence<f64> {
        self.map(|c| c.to_f64())
    }

    fn ensure_same_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch {
                left: self.space,
                right: other.space,
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Result<Self> {
        self.ensure_same_space(other)?;
        let levels = self
            .levels
            .iter()
            .zip(&other.levels)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(x, y)).collect())
            .collect();
        Ok(Self {
            space: self.space,
            levels,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, S::plus)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, S::minus)
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|x| x.times(c))
    }

    pub fn neg(&self) -> Self {
        self.map(S::negated)
    }

    /// Truncated tensor product: level `l` of the result is
    /// `sum_{i+j=l} x^(i) (x) y^(j)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.ensure_same_space(other)?;
        let mut out = Self::zero(self.space)?;
        for l in 0..=self.space.level {
            let target = &mut out.levels[l];
            for i in 0..=l {
                outer_add(target, &self.levels[i], &other.levels[l - i]);
            }
        }
        Ok(out)
    }

    /// In-place `self <- self * other`.
    ///
    /// Levels are rewritten from the top down; level `l` of the product only
    /// reads levels `< l` of `self`, which are still untouched at that point.
    pub fn mul_assign(&mut self, other: &Self) -> Result<()> {
        self.ensure_same_space(other)?;
        let y0 = &other.levels[0][0];
        for l in (0..=self.space.level).rev() {
            let (lower, upper) = self.levels.split_at_mut(l);
            let target = &mut upper[0];
            if !y0.is_one() {
                target.iter_mut().for_each(|c| c.mul_assign_ref(y0));
            }
            for (i, xi) in lower.iter().enumerate() {
                outer_add(target, xi, &other.levels[l - i]);
            }
        }
        Ok(())
    }

    /// `sum_{i=0}^{k} x^i / i!`; requires a zero constant term.
    pub fn exp(&self) -> Result<Self> {
        if !self.constant_term().is_zero() {
            return Err(Error::NonzeroConstantTerm(format!("{:?}", self.constant_term())));
        }
        let mut result = Self::one(self.space)?;
        let mut term = Self::one(self.space)?;
        for i in 1..=self.space.level {
            term = term.mul(self)?.scale(&S::from_ratio(1, i as i64));
            add_assign(&mut result, &term);
        }
        Ok(result)
    }

    /// `sum_{i=1}^{k} (-1)^(i+1) (g - 1)^i / i`; requires constant term 1.
    pub fn log(&self) -> Result<Self> {
        let y = self.minus_one()?;
        let mut result = Self::zero(self.space)?;
        let mut power = Self::one(self.space)?;
        for i in 1..=self.space.level {
            power = power.mul(&y)?;
            let sign = if i % 2 == 1 { 1 } else { -1 };
            add_assign(&mut result, &power.scale(&S::from_ratio(sign, i as i64)));
        }
        Ok(result)
    }

    /// Group inverse `sum_{i=0}^{k} (-1)^i (g - 1)^i`; requires constant term 1.
    pub fn inverse(&self) -> Result<Self> {
        let y = self.minus_one()?.neg();
        let mut result = Self::one(self.space)?;
        let mut power = Self::one(self.space)?;
        for _ in 1..=self.space.level {
            power = power.mul(&y)?;
            add_assign(&mut result, &power);
        }
        Ok(result)
    }

    fn minus_one(&self) -> Result<Self> {
        if !self.constant_term().is_one() {
            return Err(Error::NotGroupElement(format!("{:?}", self.constant_term())));
        }
        let mut y = self.clone();
        y.levels[0][0] = S::zero();
        Ok(y)
    }

    /// Entrywise comparison; exact for rationals, tolerance-based for floats.
    pub fn approx_equal(&self, other: &Self, rel_tol: f64, abs_tol: f64) -> Result<bool> {
        self.ensure_same_space(other)?;
        Ok(self
            .levels
            .iter()
            .flatten()
            .zip(other.levels.iter().flatten())
            .all(|(a, b)| a.close_to(b, rel_tol, abs_tol)))
    }

    /// Largest absolute entrywise difference, in floats.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.ensure_same_space(other)?;
        Ok(self
            .levels
            .iter()
            .flatten()
            .zip(other.levels.iter().flatten())
            .map(|(a, b)| (a.to_f64() - b.to_f64()).abs())
            .fold(0.0, f64::max))
    }
}

fn add_assign<S: Coefficient>(target: &mut TensorSequence<S>, other: &TensorSequence<S>) {
    for (a, b) in target.levels.iter_mut().zip(&other.levels) {
        for (x, y) in a.iter_mut().zip(b) {
            x.add_assign_ref(y);
        }
    }
}

/// `target[a * |y| + b] += x[a] * y[b]`.
#[inline]
pub(crate) fn outer_add<S: Coefficient>(target: &mut [S], x: &[S], y: &[S]) {
    let block = y.len();
    debug_assert_eq!(target.len(), x.len() * block);
    for (xa, row) in x.iter().zip(target.chunks_exact_mut(block)) {
        if xa.is_zero() {
            continue;
        }
        for (t, yb) in row.iter_mut().zip(y) {
            t.mul_add_assign(xa, yb);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn space(d: usize, k: usize) -> TensorAlgebraSpace {
        TensorAlgebraSpace::of::<Rational>(d, k).unwrap()
    }

    fn unit(t: TensorAlgebraSpace, letter: usize) -> TensorSequence<Rational> {
        let mut v = vec![q(0, 1); t.dimension];
        v[letter - 1] = q(1, 1);
        TensorSequence::from_vector(t, &v).unwrap()
    }

    #[test]
    fn one_has_unit_constant_and_zero_elsewhere() {
        let t = TensorSequence::<Rational>::one(space(2, 2)).unwrap();
        assert_eq!(t.level(0), &[q(1, 1)]);
        assert_eq!(t.level(1), &[q(0, 1), q(0, 1)]);
        assert!(t.level(2).iter().all(|c| Coefficient::is_zero(c)));
    }

    #[test]
    fn coordinate_counts() {
        assert_eq!(space(2, 4).total_len(), 31);
        assert_eq!(space(3, 2).total_len(), 13);
        assert_eq!(space(1, 5).total_len(), 6);
    }

    #[test]
    fn invalid_spaces_are_rejected() {
        assert!(TensorAlgebraSpace::new(0, 3, FieldKind::Float64).is_err());
        assert!(TensorAlgebraSpace::new(2, 0, FieldKind::Float64).is_err());
        assert!(TensorAlgebraSpace::new(usize::MAX, 5, FieldKind::Float64).is_err());
    }

    #[test]
    fn word_offsets_are_lexicographic() {
        let t = space(3, 3);
        assert_eq!(t.word_offset(&[]).unwrap(), 0);
        assert_eq!(t.word_offset(&[1, 1, 2]).unwrap(), 1);
        assert_eq!(t.word_offset(&[2, 1, 1]).unwrap(), 9);
        assert_eq!(t.word_at(3, 9), vec![2, 1, 1]);
        assert!(matches!(
            t.word_offset(&[4]),
            Err(Error::LetterOutOfRange { letter: 4, .. })
        ));
        assert!(matches!(t.word_offset(&[0]), Err(Error::LetterOutOfRange { .. })));
        assert!(matches!(
            t.word_offset(&[1, 1, 1, 1]),
            Err(Error::WordTooLong { length: 4, level: 3 })
        ));
    }

    #[test]
    fn exp_of_first_axis_vector() {
        let t = space(2, 2);
        let g = unit(t, 1).exp().unwrap();
        assert_eq!(g.level(1), &[q(1, 1), q(0, 1)]);
        assert_eq!(g.level(2), &[q(1, 2), q(0, 1), q(0, 1), q(0, 1)]);
    }

    #[test]
    fn exp_of_zero_is_one() {
        let t = space(3, 3);
        let z = TensorSequence::<Rational>::zero(t).unwrap();
        assert_eq!(z.exp().unwrap(), TensorSequence::one(t).unwrap());
    }

    #[test]
    fn exp_rejects_constant_term() {
        let t = space(2, 2);
        let one = TensorSequence::<Rational>::one(t).unwrap();
        assert!(matches!(one.exp(), Err(Error::NonzeroConstantTerm(_))));
    }

    #[test]
    fn product_of_axis_exponentials_matches_axis_fixture() {
        let t = space(2, 3);
        let g = unit(t, 1).exp().unwrap().mul(&unit(t, 2).exp().unwrap()).unwrap();
        assert_eq!(g.level(2), &[q(1, 2), q(1, 1), q(0, 1), q(1, 2)]);
        assert_eq!(g.get_entry(&[1, 1, 1]).unwrap(), &q(1, 6));
        assert_eq!(g.get_entry(&[1, 1, 2]).unwrap(), &q(1, 2));
        assert_eq!(g.get_entry(&[1, 2, 2]).unwrap(), &q(1, 2));
        assert_eq!(g.get_entry(&[2, 2, 2]).unwrap(), &q(1, 6));
        for w in [[1, 2, 1], [2, 1, 1], [2, 1, 2], [2, 2, 1]] {
            assert!(Coefficient::is_zero(g.get_entry(&w).unwrap()));
        }
    }

    #[test]
    fn log_inverts_exp_on_linear_element() {
        let t = space(2, 4);
        let e1 = unit(t, 1);
        assert_eq!(e1.exp().unwrap().log().unwrap(), e1);
        let one = TensorSequence::<Rational>::one(t).unwrap();
        assert_eq!(one.log().unwrap(), TensorSequence::zero(t).unwrap());
    }

    #[test]
    fn inverse_of_exp_is_exp_of_negation() {
        let t = space(3, 3);
        let a = TensorSequence::from_vector(t, &[q(2, 1), q(-1, 3), q(5, 7)]).unwrap();
        let g = a.exp().unwrap();
        assert_eq!(g.inverse().unwrap(), a.neg().exp().unwrap());
        assert_eq!(
            g.mul(&g.inverse().unwrap()).unwrap(),
            TensorSequence::one(t).unwrap()
        );
        let one = TensorSequence::<Rational>::one(t).unwrap();
        assert_eq!(one.inverse().unwrap(), one);
    }

    #[test]
    fn log_and_inverse_require_group_elements() {
        let t = space(2, 2);
        let z = TensorSequence::<Rational>::zero(t).unwrap();
        assert!(matches!(z.log(), Err(Error::NotGroupElement(_))));
        assert!(matches!(z.inverse(), Err(Error::NotGroupElement(_))));
    }

    #[test]
    fn in_place_product_matches_allocating_product() {
        let t = space(2, 3);
        let mut x = TensorSequence::<Rational>::zero(t).unwrap();
        let mut y = TensorSequence::<Rational>::zero(t).unwrap();
        for (i, c) in x.levels.iter_mut().flatten().enumerate() {
            *c = q(i as i64 - 3, 2);
        }
        for (i, c) in y.levels.iter_mut().flatten().enumerate() {
            *c = q(7 - 2 * i as i64, 3);
        }
        let expected = x.mul(&y).unwrap();
        x.mul_assign(&y).unwrap();
        assert_eq!(x, expected);
    }

    #[test]
    fn vector_space_operations() {
        let t = space(2, 2);
        let x = unit(t, 1).exp().unwrap();
        let z = TensorSequence::<Rational>::zero(t).unwrap();
        assert_eq!(x.add(&z).unwrap(), x);
        assert_eq!(x.scale(&q(0, 1)), z);
        assert_eq!(x.sub(&x).unwrap(), z);
    }

    #[test]
    fn mismatched_spaces_are_rejected() {
        let a = TensorSequence::<Rational>::one(space(2, 2)).unwrap();
        let b = TensorSequence::<Rational>::one(space(2, 3)).unwrap();
        let c = TensorSequence::<Rational>::one(space(3, 2)).unwrap();
        assert!(matches!(a.add(&b), Err(Error::SpaceMismatch { .. })));
        assert!(matches!(a.mul(&c), Err(Error::SpaceMismatch { .. })));
        assert!(a.approx_equal(&b, 0.0, 0.0).is_err());
    }

    #[test]
    fn field_of_space_must_match_coefficients() {
        let float_space = TensorAlgebraSpace::new(2, 2, FieldKind::Float64).unwrap();
        assert!(TensorSequence::<Rational>::zero(float_space).is_err());
    }

    #[test]
    fn approx_equal_on_floats() {
        let t = TensorAlgebraSpace::of::<f64>(2, 2).unwrap();
        let x = TensorSequence::from_vector(t, &[1.0, 2.0]).unwrap().exp().unwrap();
        let mut y = x.clone();
        y.level_mut(2)[1] += 1e-11;
        assert!(x.approx_equal(&y, 1e-9, 1e-12).unwrap());
        assert!(!x
            .approx_equal(&TensorSequence::one(t).unwrap(), 1e-9, 1e-12)
            .unwrap());
    }

    #[test]
    fn flat_round_trip_and_entry_access() {
        let t = space(2, 2);
        let x = unit(t, 2).exp().unwrap();
        let flat = x.flatten();
        assert_eq!(flat.len(), 7);
        assert_eq!(TensorSequence::from_flat(t, flat).unwrap(), x);
        assert_eq!(x.get_entry(&[]).unwrap(), &q(1, 1));
        assert!(TensorSequence::from_flat(t, vec![q(1, 1)]).is_err());
    }
}
