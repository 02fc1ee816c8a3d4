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
//! Markovian nonatomic games and their n-player counterparts on finite
//! metric spaces.
//!
//! The crate is generic over a [`Scalar`]; the aliases at the root fix it
//! to `f64`, `f32` or exact rationals.

pub mod error;
pub mod finite;
pub mod measure;
pub mod model;
pub mod nonatomic;
pub mod scalar;
pub mod stationary;

pub use error::{Error, Result};
pub use measure::{prohorov, FiniteSpace as Space, Measure as GenericMeasure};
pub use model::{Dynamics, FnDynamics, GameSpaces, Policy, PolicyProfile, TableDynamics};
pub use scalar::Scalar;

pub type FiniteSpace = measure::FiniteSpace<f64>;
pub type Measure = measure::Measure<f64>;
pub type GameSpec = model::GameSpec<f64>;
pub type StationarySpec = model::StationarySpec<f64>;

pub type FiniteSpace32 = measure::FiniteSpace<f32>;
pub type Measure32 = measure::Measure<f32>;
pub type GameSpec32 = model::GameSpec<f32>;

/// Exact arithmetic with 64-bit rationals; suited to small instances.
pub type Rational = num_rational::Ratio<i64>;
pub type RationalSpace = measure::FiniteSpace<Rational>;
pub type RationalMeasure = measure::Measure<Rational>;
pub type RationalGameSpec = model::GameSpec<Rational>;

/// Exact arithmetic without overflow.
pub type BigRational = num_rational::BigRational;
pub type BigRationalMeasure = measure::Measure<BigRational>;
