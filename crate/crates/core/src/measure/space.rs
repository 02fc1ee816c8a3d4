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
use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
enum Metric<T> {
    /// Row-major n×n distance matrix.
    Dense(Vec<T>),
    /// Max-combination of the factor metrics; the last factor varies fastest.
    Product {
        factors: Vec<Arc<FiniteSpace<T>>>,
        strides: Vec<usize>,
    },
}

/// A finite metric space: labelled points and a distance for every pair.
#[derive(Debug, Clone)]
pub struct FiniteSpace<T> {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    metric: Metric<T>,
}

impl<T: Scalar> FiniteSpace<T> {
    /// Builds a space from a full distance matrix, checking the metric axioms.
    pub fn new(labels: Vec<String>, dist: Vec<Vec<T>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return invalid("a space needs at least one point");
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return invalid(format!("distance matrix must be {n}x{n}"));
        }
        let flat: Vec<T> = dist.into_iter().flatten().collect();
        check_metric(n, &flat)?;
        let index = build_index(&labels)?;
        Ok(Self {
            labels,
            index,
            metric: Metric::Dense(flat),
        })
    }

    /// Builds a space from the strictly lower triangle: row `i` holds
    /// `d(i, 0), …, d(i, i - 1)`.
    pub fn from_lower_triangle(labels: Vec<String>, lower: Vec<Vec<T>>) -> Result<Self> {
        let n = labels.len();
        if lower.len() != n {
            return invalid("one lower-triangle row per label is required");
        }
        let mut dist = vec![vec![T::zero(); n]; n];
        for (i, row) in lower.into_iter().enumerate() {
            if row.len() != i {
                return invalid(format!("row {i} of the lower triangle must have {i} entries"));
            }
            for (j, d) in row.into_iter().enumerate() {
                dist[i][j] = d.clone();
                dist[j][i] = d;
            }
        }
        Self::new(labels, dist)
    }

    /// Points on the real line with `d(a, b) = |a - b|`.
    pub fn line(labels: Vec<String>, coords: &[T]) -> Result<Self> {
        if labels.len() != coords.len() {
            return invalid("one coordinate per label is required");
        }
        let dist = coords
            .iter()
            .map(|a| {
                coords
                    .iter()
                    .map(|b| (a.clone() - b.clone()).abs_val())
                    .collect()
            })
            .collect();
        Self::new(labels, dist)
    }

    /// Every pair of distinct points at distance one.
    pub fn discrete(labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        let dist = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { T::zero() } else { T::one() })
                    .collect()
            })
            .collect();
        Self::new(labels, dist)
    }

    /// Points `0, 1, …, n - 1` on the line.
    pub fn integers(n: usize) -> Result<Self> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        let coords: Vec<T> = (0..n).map(T::from_count).collect();
        Self::line(labels, &coords)
    }

    /// Cartesian product with the max-combination of the factor metrics.
    pub fn product(factors: Vec<Arc<FiniteSpace<T>>>) -> Result<Self> {
        if factors.is_empty() {
            return invalid("a product needs at least one factor");
        }
        let mut strides = vec![1; factors.len()];
        for k in (0..factors.len() - 1).rev() {
            strides[k] = strides[k + 1] * factors[k + 1].len();
        }
        let total = strides[0] * factors[0].len();
        let labels: Vec<String> = (0..total)
            .map(|p| {
                let parts: Vec<&str> = factors
                    .iter()
                    .zip(&strides)
                    .map(|(f, s)| f.label((p / s) % f.len()))
                    .collect();
                format!("({})", parts.join(","))
            })
            .collect();
        let index = build_index(&labels)?;
        Ok(Self {
            labels,
            index,
            metric: Metric::Product { factors, strides },
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn dist(&self, i: usize, j: usize) -> T {
        match &self.metric {
            Metric::Dense(d) => d[i * self.len() + j].clone(),
            Metric::Product { factors, strides } => {
                let mut best = T::zero();
                for (f, s) in factors.iter().zip(strides) {
                    let (a, b) = ((i / s) % f.len(), (j / s) % f.len());
                    best = best.max_of(f.dist(a, b));
                }
                best
            }
        }
    }

    /// Factor spaces of a product; `None` for a plain space.
    pub fn factors(&self) -> Option<&[Arc<FiniteSpace<T>>]> {
        match &self.metric {
            Metric::Product { factors, .. } => Some(factors),
            Metric::Dense(_) => None,
        }
    }

    /// Coordinates of a product point, one index per factor.
    pub fn split(&self, p: usize) -> Vec<usize> {
        match &self.metric {
            Metric::Product { factors, strides } => factors
                .iter()
                .zip(strides)
                .map(|(f, s)| (p / s) % f.len())
                .collect(),
            Metric::Dense(_) => vec![p],
        }
    }

    /// Inverse of [`FiniteSpace::split`].
    pub fn join(&self, coords: &[usize]) -> usize {
        match &self.metric {
            Metric::Product { strides, .. } => coords.iter().zip(strides).map(|(c, s)| c * s).sum(),
            Metric::Dense(_) => coords[0],
        }
    }

    /// Sorted distinct pairwise distances, starting at zero.
    pub fn distance_levels(&self) -> Vec<T> {
        let mut levels: Vec<T> = Vec::new();
        for i in 0..self.len() {
            for j in 0..self.len() {
                levels.push(self.dist(i, j));
            }
        }
        sort_dedup(&mut levels);
        levels
    }
}

impl<T: Scalar> PartialEq for FiniteSpace<T> {
    fn eq(&self, other: &Self) -> bool {
        if self.labels != other.labels {
            return false;
        }
        match (&self.metric, &other.metric) {
            (Metric::Dense(a), Metric::Dense(b)) => a == b,
            (Metric::Product { factors: a, .. }, Metric::Product { factors: b, .. }) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| same_space(x, y))
            }
            _ => (0..self.len()).all(|i| (0..self.len()).all(|j| self.dist(i, j) == other.dist(i, j))),
        }
    }
}

/// Pointer equality first, structural equality otherwise.
pub fn same_space<T: Scalar>(a: &Arc<FiniteSpace<T>>, b: &Arc<FiniteSpace<T>>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn sort_dedup<T: Scalar>(v: &mut Vec<T>) {
    v.sort_by(|a, b| a.partial_cmp(b).expect("distances are comparable"));
    v.dedup();
}

fn build_index(labels: &[String]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(labels.len());
    for (i, l) in labels.iter().enumerate() {
        if index.insert(l.clone(), i).is_some() {
            return invalid(format!("duplicate point label {l:?}"));
        }
    }
    Ok(index)
}

fn check_metric<T: Scalar>(n: usize, d: &[T]) -> Result<()> {
    let at = |i: usize, j: usize| &d[i * n + j];
    for i in 0..n {
        if *at(i, i) != T::zero() {
            return invalid(format!("d({i},{i}) must be zero"));
        }
        for j in 0..n {
            let v = at(i, j);
            if !v.is_finite_value() || *v < T::zero() {
                return invalid(format!("d({i},{j}) must be finite and nonnegative"));
            }
            if v != at(j, i) {
                return invalid(format!("distance matrix is not symmetric at ({i},{j})"));
            }
            if i != j && *v == T::zero() {
                return invalid(format!("distinct points {i} and {j} are at distance zero"));
            }
        }
    }
    let slack = T::weight_tolerance();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if at(i, k).clone() > at(i, j).clone() + at(j, k).clone() + slack.clone() {
                    return invalid(format!("triangle inequality fails for ({i},{j},{k})"));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    #[test]
    fn rejects_broken_metrics() {
        let asym = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        assert!(FiniteSpace::new(labels(2), asym).is_err());
        let diag = vec![vec![1.0, 1.0], vec![1.0, 0.0]];
        assert!(FiniteSpace::new(labels(2), diag).is_err());
        let tri = vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ];
        assert!(FiniteSpace::new(labels(3), tri).is_err());
        let inf = vec![vec![0.0, f64::INFINITY], vec![f64::INFINITY, 0.0]];
        assert!(FiniteSpace::new(labels(2), inf).is_err());
        assert!(FiniteSpace::<f64>::discrete(vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn product_uses_max_metric() {
        let a = Arc::new(FiniteSpace::<f64>::integers(3).unwrap());
        let b = Arc::new(FiniteSpace::<f64>::discrete(labels(2)).unwrap());
        let p = FiniteSpace::product(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(p.len(), 6);
        let x = p.join(&[0, 0]);
        let y = p.join(&[2, 1]);
        assert_eq!(p.split(y), vec![2, 1]);
        assert_eq!(p.dist(x, y), 2.0);
        assert_eq!(p.dist(p.join(&[1, 0]), p.join(&[1, 1])), 1.0);
        assert_eq!(p.label(y), "(2,p1)");
        assert_eq!(p.index_of("(2,p1)"), Some(y));
        assert_eq!(p.distance_levels(), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn lower_triangle_round_trip() {
        let s = FiniteSpace::from_lower_triangle(
            labels(3),
            vec![vec![], vec![1.0], vec![2.0, 1.5]],
        )
        .unwrap();
        assert_eq!(s.dist(0, 2), 2.0);
        assert_eq!(s.dist(2, 1), 1.5);
    }
}
