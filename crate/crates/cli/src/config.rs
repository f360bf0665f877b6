//! JSON model configuration.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use sgfif::gasket::{Address, GasketSpec, Point, Word};
use sgfif::model::{build_model, DataSet, FifModel, ScalingCell, ScalingField};

use crate::error::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n: usize,
    #[serde(default)]
    pub gasket1: Option<[[f64; 2]; 3]>,
    #[serde(default)]
    pub gasket2: Option<[[f64; 2]; 3]>,
    pub scaling: ScalingConfig,
    pub data: Vec<DataEntry>,
}

/// Either `{"constant": c}` or `{"default": c, "cells": {"ω|η": value}}`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    #[serde(default)]
    pub constant: Option<f64>,
    #[serde(default)]
    pub default: Option<f64>,
    #[serde(default)]
    pub cells: BTreeMap<String, CellConfig>,
}

/// A constant, or corner values `v[i][j]` at `(p_i, q_j)` of the cell-pair.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum CellConfig {
    Constant(f64),
    Tensor([[f64; 3]; 3]),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataEntry {
    pub first: String,
    pub second: String,
    pub z: f64,
}

impl ModelConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        if text.trim().is_empty() {
            return Err(CliError::Config("config is empty".into()));
        }
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(&format!("reading {}", path.display()), e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn build(&self) -> CliResult<FifModel> {
        let n = self.n;
        let mut builder = DataSet::builder(n);
        for (i, e) in self.data.iter().enumerate() {
            let first = parse_address(&e.first, &format!("data[{i}].first"))?;
            let second = parse_address(&e.second, &format!("data[{i}].second"))?;
            builder.insert(&first, &second, e.z)?;
        }
        let data = builder.build()?;
        let scaling = self.scaling.field(n)?;
        let g1 = gasket(self.gasket1, "gasket1")?;
        let g2 = gasket(self.gasket2, "gasket2")?;
        Ok(build_model(data, scaling, g1, g2)?)
    }
}

impl ScalingConfig {
    fn field(&self, n: usize) -> CliResult<ScalingField> {
        match (self.constant, self.default, self.cells.is_empty()) {
            (Some(c), None, true) => Ok(ScalingField::uniform(n, c)),
            (Some(_), _, _) => Err(CliError::Config(
                "scaling: \"constant\" cannot be combined with \"default\" or \"cells\"".into(),
            )),
            (None, None, true) => Err(CliError::Config(
                "scaling: give either \"constant\" or \"default\"/\"cells\"".into(),
            )),
            (None, default, _) => {
                let mut overrides = Vec::with_capacity(self.cells.len());
                for (key, cell) in &self.cells {
                    let (w, e) = key.split_once('|').ok_or_else(|| {
                        CliError::Config(format!("scaling.cells: key {key:?} must look like \"12|31\""))
                    })?;
                    let parse = |s: &str| -> CliResult<Word> {
                        s.parse().map_err(|e| CliError::Config(format!("scaling.cells.{key}: {e}")))
                    };
                    let cell = match cell {
                        CellConfig::Constant(c) => ScalingCell::Constant(*c),
                        CellConfig::Tensor(t) => ScalingCell::CornerTensor(*t),
                    };
                    overrides.push(((parse(w)?, parse(e)?), cell));
                }
                Ok(ScalingField::from_cells(n, default.map(ScalingCell::Constant), overrides)?)
            }
        }
    }
}

fn parse_address(s: &str, field: &str) -> CliResult<Address> {
    s.parse().map_err(|e| CliError::Config(format!("{field}: {e}")))
}

fn gasket(corners: Option<[[f64; 2]; 3]>, field: &str) -> CliResult<GasketSpec> {
    match corners {
        None => Ok(GasketSpec::default()),
        Some(c) => GasketSpec::new(c.map(|[x, y]| Point::new(x, y)))
            .map_err(|e| CliError::Config(format!("{field}: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_malformed() {
        assert!(matches!(ModelConfig::parse("  \n"), Err(CliError::Config(_))));
        let e = ModelConfig::parse("{\"n\": 1,\n \"bogus\": 2}").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    fn zero_data_json() -> String {
        let entries: Vec<String> = sgfif::model::interior_vertices(1)
            .unwrap()
            .iter()
            .map(|pv| format!(r#"{{"first": "{}", "second": "{}", "z": 0}}"#, pv.first, pv.second))
            .collect();
        format!("[{}]", entries.join(","))
    }

    #[test]
    fn scaling_forms() {
        let data = zero_data_json();
        let cfg = ModelConfig::parse(&format!(
            r#"{{"n": 1, "scaling": {{"default": 0.2, "cells": {{"1|2": 0.4, "3|3": [[0,0.1,0.2],[0,0,0],[0.3,0,0]]}}}}, "data": {data}}}"#
        ))
        .unwrap();
        let m = cfg.build().unwrap();
        assert!((m.bounds().alpha_sup - 0.4).abs() < 1e-15);
        let bad = ModelConfig::parse(&format!(
            r#"{{"n": 1, "scaling": {{"constant": 0.2, "default": 0.1}}, "data": {data}}}"#
        ))
        .unwrap();
        assert!(matches!(bad.build(), Err(CliError::Config(_))));
    }

    #[test]
    fn bad_address_names_field() {
        let cfg = ModelConfig::parse(
            r#"{"n": 1, "scaling": {"constant": 0.2}, "data": [{"first": "1@4", "second": "1@2", "z": 1}]}"#,
        )
        .unwrap();
        let e = cfg.build().unwrap_err();
        assert!(e.to_string().contains("data[0].first"), "{e}");
    }
}
