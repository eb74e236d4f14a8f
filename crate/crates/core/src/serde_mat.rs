//! Serde adapters writing matrices as row-major nested arrays and vectors
//! as plain arrays.

use ndarray::{Array1, Array2};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::Real;

pub mod matrix {
    use super::*;

    pub fn serialize<T: Real, S: Serializer>(a: &Array2<T>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<T>> = a.rows().into_iter().map(|r| r.to_vec()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, T: Real, D: Deserializer<'de>>(d: D) -> Result<Array2<T>, D::Error> {
        let rows: Vec<Vec<T>> = Vec::deserialize(d)?;
        from_rows(rows).map_err(D::Error::custom)
    }
}

pub mod vector {
    use super::*;

    pub fn serialize<T: Real, S: Serializer>(a: &Array1<T>, s: S) -> Result<S::Ok, S::Error> {
        a.to_vec().serialize(s)
    }

    pub fn deserialize<'de, T: Real, D: Deserializer<'de>>(d: D) -> Result<Array1<T>, D::Error> {
        Ok(Array1::from(Vec::<T>::deserialize(d)?))
    }
}

pub mod matrices {
    use super::*;

    pub fn serialize<T: Real, S: Serializer>(a: &[Array2<T>], s: S) -> Result<S::Ok, S::Error> {
        let all: Vec<Vec<Vec<T>>> =
            a.iter().map(|m| m.rows().into_iter().map(|r| r.to_vec()).collect()).collect();
        all.serialize(s)
    }

    pub fn deserialize<'de, T: Real, D: Deserializer<'de>>(d: D) -> Result<Vec<Array2<T>>, D::Error> {
        let all: Vec<Vec<Vec<T>>> = Vec::deserialize(d)?;
        all.into_iter().map(|rows| from_rows(rows).map_err(D::Error::custom)).collect()
    }
}

pub(crate) fn from_rows<T: Real>(rows: Vec<Vec<T>>) -> Result<Array2<T>, String> {
    let n = rows.len();
    let k = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != k) {
        return Err("ragged matrix rows".into());
    }
    Array2::from_shape_vec((n, k), rows.into_iter().flatten().collect()).map_err(|e| e.to_string())
}
