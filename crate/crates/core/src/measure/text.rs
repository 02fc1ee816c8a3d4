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
//! Plain-text tables for spaces and measures.
//!
//! A space is one tab-separated row per point: the label followed by the
//! distances to every earlier point (the strict lower triangle). A measure
//! is one `label<TAB>weight` row per support point. Blank lines and lines
//! starting with `#` are ignored.

use std::sync::Arc;

use super::{FiniteSpace, Measure};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.split('\t').map(str::trim).collect()))
}

fn parse_scalar<T: Scalar>(line: usize, s: &str) -> Result<T> {
    s.parse::<T>().map_err(|_| Error::Parse {
        line,
        message: format!("{s:?} is not a number"),
    })
}

impl<T: Scalar> FiniteSpace<T> {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for i in 0..self.len() {
            out.push_str(self.label(i));
            for j in 0..i {
                out.push('\t');
                out.push_str(&self.dist(i, j).to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_table(text: &str) -> Result<Self> {
        let mut labels = Vec::new();
        let mut lower = Vec::new();
        for (line, cols) in rows(text) {
            let expected = labels.len() + 1;
            if cols.len() != expected {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {expected} columns, found {}", cols.len()),
                });
            }
            labels.push(cols[0].to_string());
            let row = cols[1..]
                .iter()
                .map(|c| parse_scalar(line, c))
                .collect::<Result<Vec<T>>>()?;
            lower.push(row);
        }
        FiniteSpace::from_lower_triangle(labels, lower)
    }
}

impl<T: Scalar> Measure<T> {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for (p, w) in self.support() {
            out.push_str(self.space().label(p));
            out.push('\t');
            out.push_str(&w.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse_table(space: Arc<FiniteSpace<T>>, text: &str) -> Result<Self> {
        let mut weights = vec![T::zero(); space.len()];
        for (line, cols) in rows(text) {
            if cols.len() != 2 {
                return Err(Error::Parse {
                    line,
                    message: "expected label and weight".into(),
                });
            }
            let p = space.index_of(cols[0]).ok_or_else(|| Error::Parse {
                line,
                message: format!("unknown point {:?}", cols[0]),
            })?;
            weights[p] = weights[p].clone() + parse_scalar::<T>(line, cols[1])?;
        }
        Measure::new(space, weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn parses_documented_layout() {
        let text = "# three points\na\nb\t1\nc\t2\t1\n";
        let s = FiniteSpace::<f64>::parse_table(text).unwrap();
        assert_eq!(s.dist(0, 2), 2.0);
        assert_eq!(s.to_table(), "a\nb\t1\nc\t2\t1\n");
        let m = Measure::parse_table(Arc::new(s), "a\t0.25\nc\t0.75\n").unwrap();
        assert_eq!(m.weights(), &[0.25, 0.0, 0.75]);
        assert_eq!(m.to_table(), "a\t0.25\nc\t0.75\n");
    }

    #[test]
    fn reports_line_numbers() {
        let err = FiniteSpace::<f64>::parse_table("a\nb\t1\t2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let s = Arc::new(FiniteSpace::<f64>::parse_table("a\nb\t1\n").unwrap());
        let err = Measure::parse_table(s.clone(), "a\t0.5\n\nz\t0.5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        assert!(Measure::parse_table(s, "a\t0.5\n").is_err());
    }

    #[test]
    fn rational_tables_stay_exact() {
        type Q = Ratio<i64>;
        let s = Arc::new(FiniteSpace::<Q>::parse_table("a\nb\t1/3\n").unwrap());
        let m = Measure::parse_table(s.clone(), "a\t1/3\nb\t2/3\n").unwrap();
        assert_eq!(Measure::parse_table(s, &m.to_table()).unwrap(), m);
    }
}
