//! Cone documents: `{"dimension": d, "generators": [[..], ..]}`.

use conetri_core::{LatticeVector, SimplicialCone};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Deserialize)]
struct ConeDocument {
    dimension: usize,
    generators: Vec<Vec<i64>>,
}

/// A parsed base cone plus any warnings about normalized generators.
#[derive(Clone, Debug)]
pub struct ParsedCone {
    pub cone: SimplicialCone,
    pub warnings: Vec<String>,
}

pub fn parse_input(bytes: &[u8]) -> Result<ParsedCone> {
    let doc: ConeDocument =
        serde_json::from_slice(bytes).map_err(|e| CliError::Input(e.to_string()))?;
    cone_from_rows(doc.dimension, &doc.generators)
}

/// Builds a base cone from generator rows, dividing each by its content.
pub fn cone_from_rows(dimension: usize, rows: &[Vec<i64>]) -> Result<ParsedCone> {
    if dimension < 2 {
        return Err(CliError::Input(format!("dimension must be at least 2, got {dimension}")));
    }
    if rows.len() != dimension {
        return Err(CliError::Input(format!(
            "expected {dimension} generators, got {}",
            rows.len()
        )));
    }
    let mut warnings = Vec::new();
    let mut generators = Vec::with_capacity(dimension);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dimension {
            return Err(CliError::Input(format!(
                "generator {i} has {} entries, expected {dimension}",
                row.len()
            )));
        }
        let v = LatticeVector::from(row.as_slice());
        let primitive = v.primitive_part();
        if primitive != v {
            warnings.push(format!(
                "generator {i} {v} has content {}, normalized to {primitive}",
                v.content()
            ));
        }
        generators.push(primitive);
    }
    let cone = SimplicialCone::new(generators)?;
    Ok(ParsedCone { cone, warnings })
}

#[derive(Debug, Deserialize)]
struct TriangulationDocument {
    dimension: usize,
    base: Vec<Vec<i64>>,
    cones: Option<Vec<ConeRows>>,
}

#[derive(Debug, Deserialize)]
struct ConeRows {
    generators: Vec<Vec<i64>>,
}

/// Base cone and final cones read back from a run report.
pub fn parse_report_cones(bytes: &[u8]) -> Result<(SimplicialCone, Vec<Vec<LatticeVector>>)> {
    let doc: TriangulationDocument =
        serde_json::from_slice(bytes).map_err(|e| CliError::Input(e.to_string()))?;
    let base = cone_from_rows(doc.dimension, &doc.base)?.cone;
    let cones = doc
        .cones
        .ok_or_else(|| CliError::Input("report has no cone list".into()))?
        .into_iter()
        .map(|c| {
            c.generators
                .iter()
                .map(|g| LatticeVector::from(g.as_slice()))
                .collect()
        })
        .collect();
    Ok((base, cones))
}
