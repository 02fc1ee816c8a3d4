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

//! Numeric abstraction shared by every engine.
//!
//! Weights, distances, payoffs and values are all expressed in one scalar
//! type. Floating point types are the everyday choice; the rational types
//! let the measure and nonatomic engines run in exact arithmetic, which is
//! how the brute-force oracles in the test suites are compared bit for bit.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Num, ToPrimitive};

pub trait Scalar:
    Num
    + Clone
    + PartialOrd
    + Debug
    + Display
    + FromStr
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    /// Absolute slack accepted when checking that weights sum to one.
    fn weight_tolerance() -> Self;

    /// Inputs whose total mass is off by at most this much are renormalized.
    fn renormalize_tolerance() -> Self;

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            Self::zero() - self.clone()
        } else {
            self.clone()
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn powi_count(&self, exp: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = acc * self.clone();
        }
        acc
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn is_finite_value(&self) -> bool {
        true
    }
}

impl Scalar for f64 {
    fn weight_tolerance() -> Self {
        1e-12
    }
    fn renormalize_tolerance() -> Self {
        1e-9
    }
    fn powi_count(&self, exp: usize) -> Self {
        self.powi(exp as i32)
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f32 {
    fn weight_tolerance() -> Self {
        1e-6
    }
    fn renormalize_tolerance() -> Self {
        1e-4
    }
    fn powi_count(&self, exp: usize) -> Self {
        self.powi(exp as i32)
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Ratio<i64> {
    fn weight_tolerance() -> Self {
        Self::from_integer(0)
    }
    fn renormalize_tolerance() -> Self {
        Self::from_integer(0)
    }
}

impl Scalar for BigRational {
    fn weight_tolerance() -> Self {
        Self::from_integer(BigInt::from(0))
    }
    fn renormalize_tolerance() -> Self {
        Self::from_integer(BigInt::from(0))
    }
}
