//! Serde adapters: complex matrices as nested arrays of `[re, im]` pairs.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::numerics::{self, ComplexMatrix, ComplexVector};

pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
    numerics::matrix_to_pairs(m).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexMatrix, D::Error> {
    let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
    numerics::matrix_from_pairs(&rows).map_err(D::Error::custom)
}

pub mod vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &ComplexVector, s: S) -> Result<S::Ok, S::Error> {
        numerics::vector_to_pairs(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexVector, D::Error> {
        let v = Vec::<[f64; 2]>::deserialize(d)?;
        numerics::vector_from_pairs(&v).map_err(D::Error::custom)
    }
}

pub mod vec_of_vectors {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[ComplexVector], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(numerics::vector_to_pairs)
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<ComplexVector>, D::Error> {
        let v = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        v.iter()
            .map(|x| numerics::vector_from_pairs(x).map_err(D::Error::custom))
            .collect()
    }
}
