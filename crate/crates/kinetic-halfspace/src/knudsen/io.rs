use std::io::Write;

use serde::Serialize;

use super::mesh::EtaMesh;
use super::solve::{DomainRecord, StageRecord};
use crate::error::Result;

/// `eta, v_index, value` rows of a node-major field.
pub fn write_field_csv<W: Write>(mesh: &EtaMesh, field: &[f64], w: W) -> Result<()> {
    let nv = field.len() / mesh.nodes.len();
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["eta", "v_index", "value"])?;
    for (k, eta) in mesh.nodes.iter().enumerate() {
        for i in 0..nv {
            wr.write_record(&[
                format!("{eta:.17e}"),
                i.to_string(),
                format!("{:.17e}", field[k * nv + i]),
            ])?;
        }
    }
    wr.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct History<'a> {
    stages: &'a [StageRecord],
    domains: &'a [DomainRecord],
}

pub fn write_history_json<W: Write>(
    stages: &[StageRecord],
    domains: &[DomainRecord],
    w: W,
) -> Result<()> {
    serde_json::to_writer_pretty(w, &History { stages, domains })?;
    Ok(())
}
