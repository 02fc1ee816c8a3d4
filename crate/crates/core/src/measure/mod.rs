// Copyright 2026 The ngame Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//! Finite-support probability measures on finite metric spaces.
//!
//! A [`Measure`] is a weight vector over the points of a shared
//! [`FiniteSpace`]. Products, pushforwards, empirical measures and the
//! `(a, π)_n` mixing construction are exact finite sums; the Prohorov
//! distance is computed exactly through a bipartite max-flow at every
//! candidate radius (see [`prohorov`]).

mod prohorov;
mod space;
mod text;

use std::sync::Arc;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

pub use prohorov::prohorov;
pub use space::{same_space, FiniteSpace};

#[derive(Debug, Clone)]
pub struct Measure<T> {
    space: Arc<FiniteSpace<T>>,
    weights: Vec<T>,
}

impl<T: Scalar> Measure<T> {
    /// Validates nonnegativity and total mass. Totals within the
    /// renormalization tolerance of one are rescaled, anything further off
    /// is rejected.
    pub fn new(space: Arc<FiniteSpace<T>>, weights: Vec<T>) -> Result<Self> {
        if weights.len() != space.len() {
            return invalid(format!(
                "{} weights given for a space of {} points",
                weights.len(),
                space.len()
            ));
        }
        let mut total = T::zero();
        for w in &weights {
            if !w.is_finite_value() || *w < T::zero() {
                return invalid(format!("weight {w} is not a nonnegative finite number"));
            }
            total = total + w.clone();
        }
        let err = (total.clone() - T::one()).abs_val();
        if err <= T::weight_tolerance() {
            return Ok(Self { space, weights });
        }
        if err <= T::renormalize_tolerance() {
            let weights = weights.into_iter().map(|w| w / total.clone()).collect();
            return Ok(Self { space, weights });
        }
        invalid(format!("weights sum to {total}, not one"))
    }

    pub(crate) fn from_raw(space: Arc<FiniteSpace<T>>, weights: Vec<T>) -> Self {
        debug_assert_eq!(space.len(), weights.len());
        Self { space, weights }
    }

    /// Point mass `ε(a)`.
    pub fn dirac(space: Arc<FiniteSpace<T>>, point: usize) -> Result<Self> {
        if point >= space.len() {
            return invalid(format!("point {point} is outside the space"));
        }
        let mut weights = vec![T::zero(); space.len()];
        weights[point] = T::one();
        Ok(Self { space, weights })
    }

    pub fn uniform(space: Arc<FiniteSpace<T>>) -> Self {
        let w = T::one() / T::from_count(space.len());
        let weights = vec![w; space.len()];
        Self { space, weights }
    }

    /// Empirical measure `ε(a_1, …, a_n)`: mass `1/n` per listed point,
    /// accumulated on repeats.
    pub fn empirical(space: Arc<FiniteSpace<T>>, points: &[usize]) -> Result<Self> {
        if points.is_empty() {
            return invalid("empirical measure of an empty sample");
        }
        let mut counts = vec![0usize; space.len()];
        for &p in points {
            if p >= space.len() {
                return invalid(format!("sample point {p} is outside the space"));
            }
            counts[p] += 1;
        }
        Ok(Self::from_counts(space, &counts, points.len()))
    }

    pub(crate) fn from_counts(space: Arc<FiniteSpace<T>>, counts: &[usize], total: usize) -> Self {
        let n = T::from_count(total);
        let weights = counts
            .iter()
            .map(|&c| T::from_count(c) / n.clone())
            .collect();
        Self { space, weights }
    }

    pub fn space(&self) -> &Arc<FiniteSpace<T>> {
        &self.space
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weight(&self, point: usize) -> &T {
        &self.weights[point]
    }

    pub fn total_mass(&self) -> T {
        self.weights
            .iter()
            .fold(T::zero(), |acc, w| acc + w.clone())
    }

    /// Points carrying positive mass, in index order.
    pub fn support(&self) -> impl Iterator<Item = (usize, &T)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > T::zero())
    }

    /// `(a, π)_n`: an extra `1/n` on `a` with the rest scaled by `(n-1)/n`.
    pub fn mix_in(&self, point: usize, n: usize) -> Result<Self> {
        if n < 2 {
            return invalid(format!("mixing needs n >= 2, got {n}"));
        }
        if point >= self.space.len() {
            return invalid(format!("point {point} is outside the space"));
        }
        let nn = T::from_count(n);
        let keep = T::from_count(n - 1) / nn.clone();
        let mut weights: Vec<T> = self
            .weights
            .iter()
            .map(|w| w.clone() * keep.clone())
            .collect();
        weights[point] = weights[point].clone() + T::one() / nn;
        Ok(Self::from_raw(self.space.clone(), weights))
    }

    /// Image measure `μ ∘ f⁻¹` on `target`. `f` may return `None` only
    /// off the support.
    pub fn pushforward<F>(&self, target: Arc<FiniteSpace<T>>, f: F) -> Result<Self>
    where
        F: Fn(usize) -> Option<usize>,
    {
        let mut weights = vec![T::zero(); target.len()];
        for (p, w) in self.support() {
            match f(p) {
                Some(q) if q < target.len() => weights[q] = weights[q].clone() + w.clone(),
                Some(q) => return invalid(format!("map sends {p} to {q}, outside the target")),
                None => {
                    return invalid(format!(
                        "map is undefined on support point {}",
                        self.space.label(p)
                    ))
                }
            }
        }
        Ok(Self::from_raw(target, weights))
    }

    /// Product measure on a freshly built product space.
    pub fn product(&self, other: &Self) -> Self {
        let space = Arc::new(
            FiniteSpace::product(vec![self.space.clone(), other.space.clone()])
                .expect("product of valid spaces"),
        );
        self.product_on(space, other)
            .expect("freshly built product space matches its factors")
    }

    /// Product measure on a prebuilt two-factor product space.
    pub fn product_on(&self, space: Arc<FiniteSpace<T>>, other: &Self) -> Result<Self> {
        match space.factors() {
            Some([a, b]) if same_space(a, &self.space) && same_space(b, &other.space) => {}
            _ => return Err(Error::SpaceMismatch),
        }
        let mut weights = Vec::with_capacity(space.len());
        for wa in &self.weights {
            for wb in &other.weights {
                weights.push(wa.clone() * wb.clone());
            }
        }
        Ok(Self::from_raw(space, weights))
    }

    /// Marginal on one factor of a product space.
    pub fn marginal(&self, factor: usize) -> Result<Self> {
        let factors = match self.space.factors() {
            Some(f) if factor < f.len() => f,
            _ => return invalid("marginal requested on a non-product factor"),
        };
        let target = factors[factor].clone();
        let space = self.space.clone();
        self.pushforward(target, |p| Some(space.split(p)[factor]))
    }

    /// Exact Prohorov distance to `other`.
    pub fn prohorov(&self, other: &Self) -> Result<T> {
        prohorov(self, other)
    }

    /// Entrywise comparison within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: &T) -> bool {
        same_space(&self.space, &other.space)
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| (a.clone() - b.clone()).abs_val() <= *tol)
    }

    /// Precomputed sampler for repeated i.i.d. draws.
    pub fn sampler(&self) -> Sampler {
        let w: Vec<f64> = self.weights.iter().map(|w| w.to_f64_lossy()).collect();
        Sampler {
            index: WeightedIndex::new(&w).expect("a valid measure has positive total mass"),
        }
    }

    /// `count` i.i.d. draws; deterministic given the generator state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<usize> {
        let sampler = self.sampler();
        (0..count).map(|_| sampler.draw(rng)).collect()
    }
}

impl<T: Scalar> PartialEq for Measure<T> {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.weights == other.weights
    }
}

#[derive(Debug, Clone)]
pub struct Sampler {
    index: WeightedIndex<f64>,
}

impl Sampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index.sample(rng)
    }
}
