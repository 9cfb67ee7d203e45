//! On-disk formats: space files, map files and chain directories.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use gurarii_core::convex::{Halfspace, HalfspaceSystem, Polytope, VertexSystem};
use gurarii_core::engine::ChainSpace;
use gurarii_core::rational::serde_q;
use gurarii_core::spaces::{PolyhedralSpace, SpaceRef};
use gurarii_core::{Matrix, Rational};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Vertices,
    Facets,
}

/// A unit ball given by vertices, or by facet rows `a . x <= 1` (length
/// `dimension`) or `a . x <= b` (length `dimension + 1`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    pub name: String,
    pub dimension: usize,
    pub representation: Representation,
    #[serde(with = "serde_q::vecvec")]
    pub data: Vec<Vec<Rational>>,
}

impl SpaceFile {
    pub fn polytope(&self) -> Result<Polytope, String> {
        let d = self.dimension;
        match self.representation {
            Representation::Vertices => {
                if let Some(row) = self.data.iter().find(|r| r.len() != d) {
                    return Err(format!("vertex of length {} in dimension {d}", row.len()));
                }
                Ok(Polytope::V(VertexSystem::new(d, self.data.clone())))
            }
            Representation::Facets => {
                let mut rows = Vec::with_capacity(self.data.len());
                for r in &self.data {
                    let h = if r.len() == d {
                        Halfspace::unit(r.clone())
                    } else if r.len() == d + 1 {
                        Halfspace::new(r[..d].to_vec(), r[d].clone())
                    } else {
                        return Err(format!("facet row of length {} in dimension {d}", r.len()));
                    };
                    rows.push(h);
                }
                Ok(Polytope::H(HalfspaceSystem::new(d, rows)))
            }
        }
    }

    /// Canonical facet description of a space.
    pub fn from_space(name: &str, space: &PolyhedralSpace) -> Self {
        Self {
            name: name.to_string(),
            dimension: space.dimension(),
            representation: Representation::Facets,
            data: space.ball_facets().rows.iter().map(|h| h.normal.clone()).collect(),
        }
    }
}

/// A matrix between two named spaces. With `basis`, the domain is the
/// subspace of the named space spanned by the basis vectors (in its
/// coordinates) and the matrix acts on basis coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub domain: String,
    pub codomain: String,
    #[serde(with = "serde_q::vecvec")]
    pub matrix: Vec<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_vecvec")]
    pub basis: Option<Vec<Vec<Rational>>>,
}

mod opt_vecvec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<Vec<Rational>>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(rows) => serde_q::vecvec::serialize(rows, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Vec<Rational>>>, D::Error> {
        serde_q::vecvec::deserialize(d).map(Some)
    }
}

impl MapFile {
    pub fn new(domain: &str, codomain: &str, matrix: &Matrix) -> Self {
        Self {
            domain: domain.to_string(),
            codomain: codomain.to_string(),
            matrix: matrix.to_rows(),
            basis: None,
        }
    }

    /// The matrix, shaped `codomain_dim x domain_dim`.
    pub fn matrix(&self, rows: usize, cols: usize) -> Result<Matrix, String> {
        if self.matrix.len() != rows || self.matrix.iter().any(|r| r.len() != cols) {
            return Err(format!("matrix must be {rows}x{cols}"));
        }
        Ok(Matrix::from_rows(self.matrix.clone(), cols))
    }
}

/// Index file of a chain directory. Stage paths are relative to the directory;
/// `inclusions[k]` maps stage `k` into stage `k + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainIndex {
    pub name: String,
    pub stages: Vec<String>,
    pub inclusions: Vec<MatrixRows>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixRows(#[serde(with = "serde_q::vecvec")] pub Vec<Vec<Rational>>);

pub const CHAIN_INDEX: &str = "chain.json";

fn input_error(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Input {
        path: path.to_path_buf(),
        message: message.into(),
        position: None,
    }
}

/// Reads and parses a JSON file, reporting syntax and schema errors with
/// their line and column.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<(T, String), CliError> {
    let bytes = fs::read(path).map_err(|e| input_error(path, e.to_string()))?;
    let digest = sha256_hex(&bytes);
    let value = serde_json::from_slice(&bytes).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
        position: Some((e.line(), e.column())),
    })?;
    Ok((value, digest))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Writes a JSON artifact and returns its hash.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<String, CliError> {
    let text = to_json(value);
    fs::write(path, &text).map_err(|e| CliError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(sha256_hex(text.as_bytes()))
}

/// A parsed space file together with the built space.
pub struct LoadedSpace {
    pub file: SpaceFile,
    pub space: SpaceRef,
    pub sha256: String,
}

pub fn load_space_file(path: &Path) -> Result<(SpaceFile, String), CliError> {
    let (file, digest): (SpaceFile, String) = read_json(path)?;
    Ok((file, digest))
}

pub fn load_space(path: &Path) -> Result<LoadedSpace, CliError> {
    let (file, sha256) = load_space_file(path)?;
    let poly = file.polytope().map_err(|m| input_error(path, m))?;
    let space = PolyhedralSpace::from_polytope(&poly)
        .map_err(|e| input_error(path, format!("invalid unit ball: {e}")))?;
    Ok(LoadedSpace {
        file,
        space: Arc::new(space),
        sha256,
    })
}

pub fn load_map(path: &Path) -> Result<(MapFile, String), CliError> {
    read_json(path)
}

/// Checks that a map file names the expected spaces.
pub fn check_names(path: &Path, map: &MapFile, domain: &str, codomain: &str) -> Result<(), CliError> {
    if map.domain != domain || map.codomain != codomain {
        return Err(input_error(
            path,
            format!(
                "map goes {} -> {}, expected {domain} -> {codomain}",
                map.domain, map.codomain
            ),
        ));
    }
    Ok(())
}

pub struct LoadedChain {
    pub chain: ChainSpace,
    /// Names of the stage spaces, in order.
    pub names: Vec<String>,
    /// `(path, sha256)` of the index and every stage file.
    pub hashes: Vec<(PathBuf, String)>,
}

pub fn load_chain(dir: &Path) -> Result<LoadedChain, CliError> {
    let index_path = dir.join(CHAIN_INDEX);
    let (index, digest): (ChainIndex, String) = read_json(&index_path)?;
    let mut hashes = vec![(index_path.clone(), digest)];
    let mut stages = Vec::new();
    let mut names = Vec::new();
    for rel in &index.stages {
        let loaded = load_space(&dir.join(rel))?;
        hashes.push((dir.join(rel), loaded.sha256));
        names.push(loaded.file.name);
        stages.push(loaded.space);
    }
    if stages.is_empty() {
        return Err(input_error(&index_path, "chain has no stages"));
    }
    if index.inclusions.len() + 1 != stages.len() {
        return Err(input_error(
            &index_path,
            format!("{} stages need {} inclusions", stages.len(), stages.len() - 1),
        ));
    }
    let mut matrices = Vec::new();
    for (k, m) in index.inclusions.iter().enumerate() {
        let (rows, cols) = (stages[k + 1].dimension(), stages[k].dimension());
        let file = MapFile {
            domain: String::new(),
            codomain: String::new(),
            matrix: m.0.clone(),
            basis: None,
        };
        // A zero-dimensional stage has an empty inclusion matrix.
        let matrix = if cols == 0 {
            Matrix::zeros(rows, 0)
        } else {
            file.matrix(rows, cols)
                .map_err(|e| input_error(&index_path, format!("inclusion {k}: {e}")))?
        };
        matrices.push(matrix);
    }
    let chain = ChainSpace::from_stages(index.name, stages, matrices)
        .map_err(|e| input_error(&index_path, format!("chain: {e}")))?;
    Ok(LoadedChain { chain, names, hashes })
}

/// Writes a chain directory from spaces and inclusion matrices.
pub fn write_chain(dir: &Path, name: &str, stages: &[(String, SpaceRef)], inclusions: &[Matrix]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Output {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut files = Vec::new();
    for (k, (stage_name, space)) in stages.iter().enumerate() {
        let file = format!("stage{k}.json");
        write_json(&dir.join(&file), &SpaceFile::from_space(stage_name, space))?;
        files.push(file);
    }
    let index = ChainIndex {
        name: name.to_string(),
        stages: files,
        inclusions: inclusions.iter().map(|m| MatrixRows(m.to_rows())).collect(),
    };
    write_json(&dir.join(CHAIN_INDEX), &index)?;
    Ok(())
}
