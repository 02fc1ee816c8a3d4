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
//! Exact Prohorov distance between finite-support measures.
//!
//! For a radius `r` let `h(r) = max_A [μ(A) - ν(A^r)]` where `A^r` is the
//! closed `r`-neighbourhood. By max-flow/min-cut, `h(r) = 1 - F(r)` with
//! `F(r)` the max flow from `μ` to `ν` over edges `d(u, v) <= r`. The open
//! fattening in the definition makes the admissible set on `(d_k, d_{k+1}]`
//! depend on `h(d_k)`, so the distance is `min_k max(d_k, h(d_k))` over the
//! sorted support-to-support distances `d_k` (with `d_0 = 0`).
//! `h` is nonincreasing and `d_k` increasing, so the scan stops at the first
//! crossing. The flow is augmented incrementally as edges are added.

use std::collections::VecDeque;

use super::space::{same_space, sort_dedup};
use super::Measure;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn prohorov<T: Scalar>(mu: &Measure<T>, nu: &Measure<T>) -> Result<T> {
    if !same_space(mu.space(), nu.space()) {
        return Err(Error::SpaceMismatch);
    }
    let space = mu.space();
    let left: Vec<(usize, T)> = mu.support().map(|(p, w)| (p, w.clone())).collect();
    let right: Vec<(usize, T)> = nu.support().map(|(p, w)| (p, w.clone())).collect();

    let mut edges: Vec<(T, usize, usize)> = Vec::with_capacity(left.len() * right.len());
    for (a, (p, _)) in left.iter().enumerate() {
        for (b, (q, _)) in right.iter().enumerate() {
            edges.push((space.dist(*p, *q), a, b));
        }
    }
    edges.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("distances are comparable"));
    let mut levels: Vec<T> = edges.iter().map(|e| e.0.clone()).collect();
    levels.push(T::zero());
    sort_dedup(&mut levels);

    let mut net = Network::new(&left, &right);
    let mut next_edge = 0;
    let mut previous: Option<T> = None;
    let mut deficit = T::one();
    for level in levels {
        while next_edge < edges.len() && edges[next_edge].0 <= level {
            let (_, a, b) = edges[next_edge];
            net.open(a, b);
            next_edge += 1;
        }
        net.augment_all();
        deficit = net.unrouted();
        if deficit <= level {
            return Ok(match previous {
                Some(p) => level.min_of(p),
                None => level,
            });
        }
        previous = Some(deficit.clone());
    }
    // Only reachable through rounding: every edge is open yet a sliver of
    // mass is left over.
    Ok(deficit)
}

/// Dense residual network: source, left support, right support, sink.
struct Network<T> {
    n: usize,
    cap: Vec<T>,
    left: usize,
}

impl<T: Scalar> Network<T> {
    fn new(left: &[(usize, T)], right: &[(usize, T)]) -> Self {
        let n = left.len() + right.len() + 2;
        let mut net = Self {
            n,
            cap: vec![T::zero(); n * n],
            left: left.len(),
        };
        let sink = n - 1;
        for (a, (_, w)) in left.iter().enumerate() {
            net.cap[a + 1] = w.clone();
        }
        for (b, (_, w)) in right.iter().enumerate() {
            let v = 1 + left.len() + b;
            net.cap[v * n + sink] = w.clone();
        }
        net
    }

    fn open(&mut self, a: usize, b: usize) {
        let (u, v) = (1 + a, 1 + self.left + b);
        // Anything at least the total mass acts as unbounded.
        self.cap[u * self.n + v] = T::one() + T::one();
    }

    /// Mass still sitting on the source edges.
    fn unrouted(&self) -> T {
        (1..=self.left).fold(T::zero(), |acc, a| acc + self.cap[a].clone())
    }

    #[allow(clippy::needless_range_loop)]
    fn augment_all(&mut self) {
        let (n, sink) = (self.n, self.n - 1);
        loop {
            let mut parent = vec![usize::MAX; n];
            parent[0] = 0;
            let mut queue = VecDeque::from([0usize]);
            while let Some(u) = queue.pop_front() {
                if u == sink {
                    break;
                }
                for v in 0..n {
                    if parent[v] == usize::MAX && self.cap[u * n + v] > T::zero() {
                        parent[v] = u;
                        queue.push_back(v);
                    }
                }
            }
            if parent[sink] == usize::MAX {
                return;
            }
            let mut bottleneck: Option<T> = None;
            let mut v = sink;
            while v != 0 {
                let u = parent[v];
                let c = self.cap[u * n + v].clone();
                bottleneck = Some(match bottleneck {
                    Some(b) => b.min_of(c),
                    None => c,
                });
                v = u;
            }
            let push = bottleneck.expect("path has at least one edge");
            let mut v = sink;
            while v != 0 {
                let u = parent[v];
                self.cap[u * n + v] = self.cap[u * n + v].clone() - push.clone();
                self.cap[v * n + u] = self.cap[v * n + u].clone() + push.clone();
                v = u;
            }
        }
    }
}
