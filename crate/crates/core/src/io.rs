//! Text records for elements, traces, weights and N-functions.
//!
//! ```text
//! element  {"dims":[2,3],"blocks":[[[re,im],...],...]}   (row-major, n_k² entries per block)
//! trace    {"weights":[w1,...]}
//! weight   {"h":<element>,"alpha":0.5}
//! phi      {"kind":"power","p":2.0} | {"kind":"logpower","beta":2.0}
//!          | {"kind":"table","points":[[s,p],...]} | {"kind":"inverse","of":<phi>}
//! ```

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{BlockElement, BlockShape, TraceSpec, C64};
use crate::nfunction::{Density, NFunction};
use crate::weighted::WeightSpec;
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementRecord {
    pub dims: Vec<usize>,
    pub blocks: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRecord {
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightRecord {
    pub h: ElementRecord,
    pub alpha: f64,
}

fn json<'a, T: Deserialize<'a>>(text: &'a str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Input(format!("{what}: {e}")))
}

impl ElementRecord {
    pub fn to_element(&self) -> Result<BlockElement> {
        if self.dims.len() != self.blocks.len() {
            return Err(Error::Input(format!(
                "{} dims but {} blocks",
                self.dims.len(),
                self.blocks.len()
            )));
        }
        BlockShape::new(self.dims.clone()).map_err(|e| Error::Input(e.to_string()))?;
        let mut mats = Vec::with_capacity(self.dims.len());
        for (k, (&n, entries)) in self.dims.iter().zip(&self.blocks).enumerate() {
            if entries.len() != n * n {
                return Err(Error::Input(format!("block {k}: expected {} entries, got {}", n * n, entries.len())));
            }
            mats.push(DMatrix::from_row_iterator(n, n, entries.iter().map(|&[re, im]| C64::new(re, im))));
        }
        BlockElement::from_blocks(mats).map_err(|e| Error::Input(e.to_string()))
    }

    pub fn from_element(x: &BlockElement) -> Self {
        ElementRecord {
            dims: x.shape().dims().to_vec(),
            blocks: x
                .blocks()
                .iter()
                .map(|b| {
                    // row-major
                    b.transpose().iter().map(|z| [z.re, z.im]).collect()
                })
                .collect(),
        }
    }
}

pub fn parse_element(text: &str) -> Result<BlockElement> {
    json::<ElementRecord>(text, "element")?.to_element()
}

pub fn element_to_json(x: &BlockElement) -> String {
    serde_json::to_string(&ElementRecord::from_element(x)).expect("finite entries serialize")
}

pub fn parse_trace(text: &str, shape: &BlockShape) -> Result<TraceSpec> {
    let rec: TraceRecord = json(text, "trace")?;
    TraceSpec::new(shape.clone(), rec.weights).map_err(|e| Error::Input(e.to_string()))
}

pub fn parse_weight(text: &str) -> Result<WeightSpec> {
    let rec: WeightRecord = json(text, "weight")?;
    WeightSpec::new(rec.h.to_element()?, rec.alpha).map_err(|e| Error::Input(e.to_string()))
}

pub fn parse_nfunction(text: &str) -> Result<NFunction> {
    Ok(NFunction::new(json::<Density>(text, "phi")?))
}
