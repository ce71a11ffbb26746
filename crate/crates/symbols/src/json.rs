use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use symexpr::{parse_with_nets, NetTable};

use crate::{MultiIndex, SymbolError, SymbolFamily};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolTerm {
    pub alpha: Vec<u32>,
    pub expr: String,
}

/// Interchange form `{n, m, coeffs: [{alpha, expr}]}` with DSL coefficient text.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolJson {
    pub n: usize,
    pub m: u32,
    pub coeffs: Vec<SymbolTerm>,
}

impl SymbolFamily {
    pub fn to_json_value(&self) -> SymbolJson {
        SymbolJson {
            n: self.dim(),
            m: self.degree(),
            coeffs: self.coeffs().iter().map(|(a, e)| SymbolTerm { alpha: a.0.clone(), expr: e.to_string() }).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("plain data serializes")
    }

    pub fn from_json_value(j: &SymbolJson, nets: &NetTable) -> Result<Self, SymbolError> {
        let mut map: BTreeMap<MultiIndex, symexpr::Expr> = BTreeMap::new();
        for t in &j.coeffs {
            if t.alpha.len() != j.n {
                return Err(SymbolError::Dimension { expected: j.n, got: t.alpha.len() });
            }
            let e = parse_with_nets(&t.expr, j.n, nets)
                .map_err(|source| SymbolError::Parse { alpha: t.alpha.clone(), source })?;
            let a = MultiIndex(t.alpha.clone());
            if map.contains_key(&a) {
                return Err(SymbolError::DuplicateIndex(t.alpha.clone()));
            }
            map.insert(a, e);
        }
        let s = SymbolFamily::new(j.n, map)?;
        if s.degree() != j.m {
            return Err(SymbolError::DegreeMismatch { declared: j.m, actual: s.degree() });
        }
        Ok(s)
    }

    pub fn from_json(text: &str, nets: &NetTable) -> Result<Self, SymbolError> {
        let j: SymbolJson = serde_json::from_str(text).map_err(|e| SymbolError::Json(e.to_string()))?;
        Self::from_json_value(&j, nets)
    }
}
