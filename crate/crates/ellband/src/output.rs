//! Band documents (JSON) and plot-ready tables (CSV).

use std::collections::BTreeMap;

use ellband_core::band::TestingBand;
use ellband_core::plot::{Layer, PlotSpec};
use serde::{Deserialize, Serialize};

/// JSON form of a band. Infinite endpoints (the open ends of one-sided
/// bands or unbounded supports) are written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandDocument {
    pub n: usize,
    pub alpha: f64,
    pub eta: Option<f64>,
    pub method: String,
    pub side: String,
    pub family: String,
    pub params: BTreeMap<String, f64>,
    pub estimation: String,
    pub effective_n: bool,
    pub prob_lower: Vec<Option<f64>>,
    pub prob_upper: Vec<Option<f64>>,
    pub lower: Vec<Option<f64>>,
    pub upper: Vec<Option<f64>>,
    pub expected: Vec<Option<f64>>,
    pub generated_by_path: Option<String>,
}

fn finite(v: &[f64]) -> Vec<Option<f64>> {
    v.iter().map(|&x| x.is_finite().then_some(x)).collect()
}

impl From<&TestingBand> for BandDocument {
    fn from(b: &TestingBand) -> Self {
        Self {
            n: b.n,
            alpha: b.alpha,
            eta: b.eta,
            method: b.method.name().to_string(),
            side: b.side.as_str().to_string(),
            family: b.distribution.family().name().to_string(),
            params: b
                .distribution
                .params()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            estimation: b.estimation.name().to_string(),
            effective_n: b.effective_n,
            prob_lower: finite(&b.prob_lower),
            prob_upper: finite(&b.prob_upper),
            lower: finite(&b.lower),
            upper: finite(&b.upper),
            expected: finite(&b.expected),
            generated_by_path: b.path.map(|p| p.as_str().to_string()),
        }
    }
}

pub fn band_json(band: &TestingBand) -> String {
    let mut s = serde_json::to_string_pretty(&BandDocument::from(band)).expect("band serializes");
    s.push('\n');
    s
}

/// One CSV row; `observed` is empty when no sample is attached.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub rank: usize,
    pub expected: f64,
    pub observed: Option<f64>,
    pub lower: f64,
    pub upper: f64,
}

pub const CSV_HEADER: [&str; 5] = ["rank", "expected", "observed", "lower", "upper"];

pub fn rows_csv(rows: &[TableRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("write to memory");
    for r in rows {
        let observed = r.observed.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([
            r.rank.to_string(),
            r.expected.to_string(),
            observed,
            r.lower.to_string(),
            r.upper.to_string(),
        ])
        .expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

/// Rows of a data-scale band, with the sorted sample when given.
pub fn band_rows(band: &TestingBand, observations: Option<&[f64]>) -> Vec<TableRow> {
    let sorted = observations.map(|x| {
        let mut v = x.to_vec();
        v.sort_by(f64::total_cmp);
        v
    });
    (0..band.n)
        .map(|i| TableRow {
            rank: i + 1,
            expected: band.expected[i],
            observed: sorted.as_ref().and_then(|s| s.get(i).copied()),
            lower: band.lower[i],
            upper: band.upper[i],
        })
        .collect()
}

/// Rows of a plot as displayed: after transforms and differencing, with the
/// first sample as the observed column.
pub fn spec_rows(spec: &PlotSpec) -> Vec<TableRow> {
    let band = spec.layers.iter().find_map(|l| match l {
        Layer::Band {
            x, lower, upper, ..
        } => Some((x, spec.display_y(lower), spec.display_y(upper))),
        _ => None,
    });
    let points = spec.layers.iter().find_map(|l| match l {
        Layer::Points { y, .. } => Some(spec.display_y(y)),
        _ => None,
    });
    let Some((x, lower, upper)) = band else {
        return Vec::new();
    };
    (0..x.len())
        .map(|i| TableRow {
            rank: i + 1,
            expected: x[i],
            observed: points.as_ref().and_then(|p| p.get(i).copied()),
            lower: lower[i],
            upper: upper[i],
        })
        .collect()
}

/// Parses a table written by [`rows_csv`].
pub fn parse_rows_csv(text: &str) -> Result<Vec<TableRow>, String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(CSV_HEADER) {
        return Err(format!("unexpected header {header:?}"));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| format!("{s:?}: {e}"));
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| e.to_string())?;
            Ok(TableRow {
                rank: rec[0].parse().map_err(|e| format!("rank: {e}"))?,
                expected: num(&rec[1])?,
                observed: if rec[2].is_empty() {
                    None
                } else {
                    Some(num(&rec[2])?)
                },
                lower: num(&rec[3])?,
                upper: num(&rec[4])?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ellband_core::band::{get_qq_band, BandOptions};
    use ellband_core::distributions::{EstimationMethod, ReferenceDistribution};
    use ellband_core::level_solver::Side;

    fn known() -> BandOptions {
        BandOptions {
            estimation: EstimationMethod::Known,
            ..BandOptions::default()
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        assert_eq!(rows_csv(&[]), "rank,expected,observed,lower,upper\n");
        assert_eq!(parse_rows_csv(&rows_csv(&[])).unwrap(), vec![]);
    }

    #[test]
    fn csv_round_trip_and_monotone_expected() {
        let b = get_qq_band(
            25,
            None,
            &ReferenceDistribution::standard_normal(),
            &known(),
            &[],
        )
        .unwrap();
        let obs: Vec<f64> = (0..25).map(|i| (i as f64 * 0.37).sin()).collect();
        let rows = band_rows(&b, Some(&obs));
        let back = parse_rows_csv(&rows_csv(&rows)).unwrap();
        assert_eq!(back, rows);
        assert!(back.windows(2).all(|w| w[0].expected < w[1].expected));
    }

    #[test]
    fn one_sided_json_uses_null() {
        let opts = BandOptions {
            side: Side::OneSided,
            ..known()
        };
        let b = get_qq_band(
            3,
            None,
            &ReferenceDistribution::standard_normal(),
            &opts,
            &[],
        )
        .unwrap();
        let text = band_json(&b);
        let doc: BandDocument = serde_json::from_str(&text).unwrap();
        assert!(doc.upper.iter().all(Option::is_none));
        assert_eq!(doc.prob_upper, vec![Some(1.0); 3]);
        assert_eq!(doc, BandDocument::from(&b));
    }
}
