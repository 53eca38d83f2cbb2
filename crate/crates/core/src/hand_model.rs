//! Kinematic hand layout and selection matrices.
//!
//! The joint vector is ordered as the DoF table of the 15-DoF model:
//! thumb (TA, TR, TM, TI), index (IA, IM, IP), middle (MM, MP),
//! ring (RA, RM, RP) and little finger (LA, LM, LP). Files always bind
//! columns by DoF name, so this order only matters in memory.

use std::collections::HashSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofDescriptor {
    pub name: String,
    pub description: String,
    pub index: usize,
}

/// Ordered list of joint angles making up a pose vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandModel {
    dofs: Vec<DofDescriptor>,
}

const DEFAULT_DOFS: [(&str, &str); 15] = [
    ("TA", "Thumb Abduction"),
    ("TR", "Thumb Rotation"),
    ("TM", "Thumb Metacarpal"),
    ("TI", "Thumb Interphalangeal"),
    ("IA", "Index Abduction"),
    ("IM", "Index Metacarpal"),
    ("IP", "Index Proximal"),
    ("MM", "Middle Metacarpal"),
    ("MP", "Middle Proximal"),
    ("RA", "Ring Abduction"),
    ("RM", "Ring Metacarpal"),
    ("RP", "Ring Proximal"),
    ("LA", "Little Abduction"),
    ("LM", "Little Metacarpal"),
    ("LP", "Little Proximal"),
];

/// Metacarpal joints measured by the simulated glove.
pub const METACARPAL_DOFS: [&str; 5] = ["TM", "IM", "MM", "RM", "LM"];

/// The 15-DoF hand model.
pub fn default_hand_model() -> HandModel {
    HandModel::from_names(DEFAULT_DOFS.iter().map(|(n, d)| (n.to_string(), d.to_string())))
        .expect("default DoF names are unique")
}

impl HandModel {
    /// Builds a model from `(name, description)` pairs in vector order.
    pub fn from_names<I>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut seen = HashSet::new();
        let mut dofs = Vec::new();
        for (index, (name, description)) in names.into_iter().enumerate() {
            if !seen.insert(name.clone()) {
                return Err(Error::DuplicateDof(name));
            }
            dofs.push(DofDescriptor { name, description, index });
        }
        Ok(HandModel { dofs })
    }

    pub fn n(&self) -> usize {
        self.dofs.len()
    }

    pub fn dofs(&self) -> &[DofDescriptor] {
        &self.dofs
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.dofs.iter().map(|d| d.name.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.dofs.iter().position(|d| d.name == name)
    }

    /// Indices of `names`, rejecting unknown and repeated entries.
    pub fn indices_of<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        let mut seen = HashSet::new();
        names
            .iter()
            .map(|name| {
                let name = name.as_ref();
                let idx = self
                    .index_of(name)
                    .ok_or_else(|| Error::UnknownDof(name.to_string()))?;
                if !seen.insert(idx) {
                    return Err(Error::DuplicateDof(name.to_string()));
                }
                Ok(idx)
            })
            .collect()
    }
}

/// Selection matrix whose k-th row is the canonical basis vector of `names[k]`.
pub fn selection_matrix<S: AsRef<str>>(model: &HandModel, names: &[S]) -> Result<DMatrix<f64>> {
    let indices = model.indices_of(names)?;
    let mut h = DMatrix::zeros(indices.len(), model.n());
    for (row, col) in indices.into_iter().enumerate() {
        h[(row, col)] = 1.0;
    }
    Ok(h)
}

/// If `h` is a selection matrix, the column picked by each row.
pub fn selected_columns(h: &DMatrix<f64>) -> Option<Vec<usize>> {
    let mut cols = Vec::with_capacity(h.nrows());
    let mut used = HashSet::new();
    for row in h.row_iter() {
        let mut picked = None;
        for (j, &v) in row.iter().enumerate() {
            if v == 1.0 {
                if picked.is_some() {
                    return None;
                }
                picked = Some(j);
            } else if v != 0.0 {
                return None;
            }
        }
        let j = picked?;
        if !used.insert(j) {
            return None;
        }
        cols.push(j);
    }
    Some(cols)
}
