//! JSON documents for operators and states.
//!
//! Operator: `{"shape": [n1, …], "blocks": [{"re": [[…]], "im": [[…]]}, …]}`
//! with row-major matrices; a missing `"im"` means zero imaginary part.
//! State: the same layout with `"rho"` in place of `"blocks"`.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::error::{Error, Result};
use crate::states::State;
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDoc {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDoc {
    pub shape: Vec<usize>,
    pub blocks: Vec<MatrixDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDoc {
    pub shape: Vec<usize>,
    pub rho: Vec<MatrixDoc>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &DMatrix<C64>) -> Self {
        let rows = |part: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| part(&m[(i, j)])).collect())
                .collect()
        };
        let has_im = m.iter().any(|z| z.im != 0.0);
        Self {
            re: rows(|z| z.re),
            im: has_im.then(|| rows(|z| z.im)),
        }
    }

    pub fn to_matrix(&self, n: usize) -> Result<DMatrix<C64>> {
        check_square(&self.re, n, "re")?;
        if let Some(im) = &self.im {
            check_square(im, n, "im")?;
        }
        Ok(DMatrix::from_fn(n, n, |i, j| {
            let im = self.im.as_ref().map_or(0.0, |m| m[i][j]);
            C64::new(self.re[i][j], im)
        }))
    }
}

fn check_square(rows: &[Vec<f64>], n: usize, what: &str) -> Result<()> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Format(format!("`{what}` must be a {n}×{n} matrix")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Format(format!("`{what}` has non-finite entries")));
    }
    Ok(())
}

fn blocks_from_docs(shape: &[usize], docs: &[MatrixDoc]) -> Result<(AlgebraShape, Vec<DMatrix<C64>>)> {
    let shape = AlgebraShape::new(shape.to_vec()).map_err(|e| Error::Format(e.to_string()))?;
    if docs.len() != shape.num_blocks() {
        return Err(Error::Format(format!(
            "shape {shape} needs {} blocks, found {}",
            shape.num_blocks(),
            docs.len()
        )));
    }
    let blocks = docs
        .iter()
        .zip(shape.blocks())
        .map(|(d, &n)| d.to_matrix(n))
        .collect::<Result<Vec<_>>>()?;
    Ok((shape, blocks))
}

impl OperatorDoc {
    pub fn from_element(x: &AlgebraElement) -> Self {
        Self {
            shape: x.shape().blocks().to_vec(),
            blocks: x.blocks().iter().map(MatrixDoc::from_matrix).collect(),
        }
    }

    pub fn to_element(&self) -> Result<AlgebraElement> {
        let (shape, blocks) = blocks_from_docs(&self.shape, &self.blocks)?;
        AlgebraElement::new(shape, blocks)
    }
}

impl StateDoc {
    pub fn from_state(e: &State) -> Self {
        Self {
            shape: e.shape().blocks().to_vec(),
            rho: e.density().iter().map(MatrixDoc::from_matrix).collect(),
        }
    }

    /// Converts and validates the density.
    pub fn to_state(&self) -> Result<State> {
        let (shape, blocks) = blocks_from_docs(&self.shape, &self.rho)?;
        State::new(shape, blocks)
    }
}

pub fn element_to_json(x: &AlgebraElement) -> String {
    serde_json::to_string_pretty(&OperatorDoc::from_element(x)).expect("finite values serialize")
}

pub fn element_from_json(src: &str) -> Result<AlgebraElement> {
    serde_json::from_str::<OperatorDoc>(src)?.to_element()
}

pub fn state_to_json(e: &State) -> String {
    serde_json::to_string_pretty(&StateDoc::from_state(e)).expect("finite values serialize")
}

pub fn state_from_json(src: &str) -> Result<State> {
    serde_json::from_str::<StateDoc>(src)?.to_state()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn read_element(path: impl AsRef<Path>) -> Result<AlgebraElement> {
    element_from_json(&read(path.as_ref())?)
}

pub fn write_element(path: impl AsRef<Path>, x: &AlgebraElement) -> Result<()> {
    write(path.as_ref(), &element_to_json(x))
}

pub fn read_state(path: impl AsRef<Path>) -> Result<State> {
    state_from_json(&read(path.as_ref())?)
}

pub fn write_state(path: impl AsRef<Path>, e: &State) -> Result<()> {
    write(path.as_ref(), &state_to_json(e))
}
