//! Serialization helpers. Complex numbers are written as `[re, im]`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{CMatrix, C64};

pub fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Rows of `m` as nested `[re, im]` pairs.
pub fn matrix_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect())
        .collect()
}

/// Columns of `m` as nested `[re, im]` pairs.
pub fn matrix_columns(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| pair(m[(i, j)])).collect())
        .collect()
}

/// Formats a float with 17 significant digits. Non-finite values map to
/// `null` so the result is always valid JSON.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

/// `serde(with = "complex")` for a single `C64`.
pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        pair(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

/// `serde(with = "complex_vec")` for `Vec<C64>`.
pub mod complex_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().copied().map(pair).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}
