use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lower_bounds::{hardness_hc, solve_low_bestset, solve_low_general};

use super::instance::Instance;

/// One lower-bound row. For Best-Set instances `low` is Low(C), `gap` the
/// optimality gap and `ratio` = Low/H_C; for General-Samp instances `low` is
/// Low(I) and `gap` the distance from the profile to the alternatives.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LbRow {
    pub kind: &'static str,
    pub n: usize,
    pub low: f64,
    pub hc: Option<f64>,
    pub gap: Option<f64>,
    pub ratio: Option<f64>,
}

pub const LB_HEADER: [&str; 6] = ["kind", "n", "low", "hc", "gap", "ratio"];

pub fn compute_lb_report(instance: &Instance) -> Result<LbRow> {
    match instance {
        Instance::BestSet(b) => {
            let low = solve_low_bestset(b)?.value;
            let hc = hardness_hc(b)?.value;
            Ok(LbRow {
                kind: "best_set",
                n: b.n(),
                low,
                hc: Some(hc),
                gap: b.optimality_gap()?,
                ratio: (hc > 0.0).then(|| low / hc),
            })
        }
        Instance::General(g) => Ok(LbRow {
            kind: "general",
            n: g.n(),
            low: solve_low_general(g)?.value,
            hc: None,
            gap: Some(g.distance_to_alt()?),
            ratio: None,
        }),
        Instance::Ball { .. } => Err(Error::InvalidInput("ball instances have no lower-bound report".into())),
    }
}

pub fn write_lb_csv<W: Write>(rows: &[LbRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(LB_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
