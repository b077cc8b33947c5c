// Copyright 2026 The bellnl Authors
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
//! JSON encodings shared by every serializable type.
//!
//! Complex numbers are `[re, im]` pairs and matrices are arrays of rows.
//! Floats use the shortest representation that parses back to the same bits,
//! so encode/decode round trips are exact.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::tensor::ComplexMatrix;
use num_complex::Complex64;

type Rows = Vec<Vec<[f64; 2]>>;

fn to_rows(m: &ComplexMatrix) -> Rows {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

fn from_rows<E: serde::de::Error>(rows: Rows) -> Result<ComplexMatrix, E> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(E::custom("matrix must have at least one row and one column"));
    }
    if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != ncols) {
        return Err(E::custom(format!(
            "ragged matrix: row {r} has {} entries, expected {ncols}",
            row.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(nrows, ncols, |r, c| {
        Complex64::new(rows[r][c][0], rows[r][c][1])
    }))
}

/// `#[serde(with = "crate::json::matrix")]` for a single matrix.
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexMatrix, D::Error> {
        from_rows(Rows::deserialize(d)?)
    }
}

/// `#[serde(with = "crate::json::matrices")]` for a list of matrices.
pub mod matrices {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[ComplexMatrix], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(to_rows).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<ComplexMatrix>, D::Error> {
        Vec::<Rows>::deserialize(d)?.into_iter().map(from_rows).collect()
    }
}

/// Optional single matrix.
pub mod opt_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Option<ComplexMatrix>, s: S) -> Result<S::Ok, S::Error> {
        m.as_ref().map(to_rows).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<ComplexMatrix>, D::Error> {
        Option::<Rows>::deserialize(d)?.map(from_rows).transpose()
    }
}

/// Optional list of matrices.
pub mod opt_matrices {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &Option<Vec<ComplexMatrix>>, s: S) -> Result<S::Ok, S::Error> {
        ms.as_ref()
            .map(|v| v.iter().map(to_rows).collect::<Vec<_>>())
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<ComplexMatrix>>, D::Error> {
        Option::<Vec<Rows>>::deserialize(d)?
            .map(|v| v.into_iter().map(from_rows).collect())
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Wrapper {
        #[serde(with = "matrix")]
        m: ComplexMatrix,
    }

    #[test]
    fn rejects_ragged_rows() {
        let err = serde_json::from_str::<Wrapper>(r#"{"m": [[[1,0],[0,0]],[[1,0]]]}"#).unwrap_err();
        assert!(err.to_string().contains("ragged"));
    }

    proptest! {
        #[test]
        fn matrix_round_trip_is_bit_exact(data in proptest::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 12)) {
            let m = ComplexMatrix::from_fn(2, 3, |r, c| Complex64::new(data[2 * (r * 3 + c)], data[2 * (r * 3 + c) + 1]));
            let text = serde_json::to_string(&Wrapper { m: m.clone() }).unwrap();
            let back: Wrapper = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(&back.m, &m);
            prop_assert_eq!(serde_json::to_string(&back).unwrap(), text);
        }
    }
}
