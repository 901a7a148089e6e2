//! Dataset ingestion: CSV loading, the bundled classic datasets, and the
//! seeded generators for the simulated examples.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub const TELEPHONE_CSV: &str = include_str!("../data/telephone.csv");
pub const HAWKINS_CSV: &str = include_str!("../data/hawkins.csv");
pub const SCOTTISH_CSV: &str = include_str!("../data/scottish.csv");

/// How to pick the response column: by header name, or 1-based position.
fn response_index(header: &[String], response: &str) -> Result<usize> {
    if let Some(i) = header.iter().position(|h| h == response) {
        return Ok(i);
    }
    if let Ok(k) = response.parse::<usize>() {
        if k >= 1 && k <= header.len() {
            return Ok(k - 1);
        }
    }
    Err(Error::ResponseColumnNotFound {
        column: response.to_string(),
        header: header.to_vec(),
    })
}

fn parse_csv(source: &str, origin: &str, response: &str, delimiter: u8) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(source.as_bytes());

    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv {
            path: origin.to_string(),
            source: e,
        })?
        .iter()
        .map(|h| h.to_string())
        .collect();
    for (i, name) in header.iter().enumerate() {
        if header[..i].contains(name) {
            return Err(Error::DuplicateHeader { name: name.clone() });
        }
    }
    let resp = response_index(&header, response)?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            path: origin.to_string(),
            source: e,
        })?;
        let mut row = Vec::with_capacity(header.len());
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::BadCell {
                row: r + 1,
                col: header.get(c).cloned().unwrap_or_else(|| format!("{}", c + 1)),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::BadCell {
                    row: r + 1,
                    col: header[c].clone(),
                    value: cell.to_string(),
                });
            }
            row.push(v);
        }
        if row.len() != header.len() {
            return Err(Error::BadCell {
                row: r + 1,
                col: format!("{}", row.len() + 1),
                value: "<missing>".to_string(),
            });
        }
        rows.push(row);
    }

    let n = rows.len();
    let p = header.len() - 1;
    if n < p + 3 {
        return Err(Error::TooFewObservations { n, min: p + 3 });
    }
    let x = DMatrix::from_fn(n, p, |i, j| {
        let col = if j < resp { j } else { j + 1 };
        rows[i][col]
    });
    let y = DVector::from_fn(n, |i, _| rows[i][resp]);
    Dataset::new(x, y)
}

/// Load a dataset from a CSV file with a header row. Predictors keep file
/// column order minus the response; labels are 1-based row numbers.
pub fn load_csv(path: &Path, response: &str, delimiter: u8) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_csv(&text, &path.display().to_string(), response, delimiter)
}

/// Names of the bundled classic datasets.
pub const BUNDLED_NAMES: [&str; 3] = ["telephone", "hawkins", "scottish"];

/// Load one of the bundled classic datasets (see data/PROVENANCE.md for
/// sources and row numbering).
pub fn bundled(name: &str) -> Result<Dataset> {
    match name {
        "telephone" => parse_csv(TELEPHONE_CSV, "bundled:telephone", "calls", b','),
        "hawkins" => parse_csv(HAWKINS_CSV, "bundled:hawkins", "y", b','),
        "scottish" => parse_csv(SCOTTISH_CSV, "bundled:scottish", "time", b','),
        other => Err(Error::UnknownBundled {
            name: other.to_string(),
        }),
    }
}

const LEVERAGE_X: [f64; 3] = [25.0, 28.0, 31.0];
// Distinct shifts keep the planted outliers strictly ordered in magnitude;
// equal shifts let their score runs mask each other at some seeds.
const OUTLIER_SHIFTS: [f64; 3] = [15.0, 18.0, 21.0];

/// Simulated dataset: 50 clean rows from Y = X1 + 4 + N(0,1) with
/// X1 ~ U(0,10), rows 51-53 leverage points far out in x on the true
/// line, rows 54-56 outliers shifted 15 units up. Pure function of seed.
pub fn generate_twovariables(seed: u64) -> Dataset {
    generate_simulated(seed, 1)
}

/// Three-variable version: Y = X1 + X2 + 4 + N(0,1), the same
/// contamination applied in both predictors for the leverage rows.
pub fn generate_threevariables(seed: u64) -> Dataset {
    generate_simulated(seed, 2)
}

fn generate_simulated(seed: u64, p: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let n = 56;
    let mut x = DMatrix::zeros(n, p);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let mut mean = 4.0;
        if (50..53).contains(&i) {
            // Rotate the far positions across predictors so the three
            // leverage rows are not collinear in predictor space, which
            // would leave the anchoring hyperplane underdetermined.
            for j in 0..p {
                x[(i, j)] = LEVERAGE_X[(i - 50 + j) % 3];
                mean += x[(i, j)];
            }
        } else {
            for j in 0..p {
                x[(i, j)] = rng.gen_range(0.0..10.0);
                mean += x[(i, j)];
            }
            if i >= 53 {
                mean += OUTLIER_SHIFTS[i - 53];
            }
        }
        y[i] = mean + noise.sample(&mut rng);
    }
    Dataset::new(x, y).expect("simulated dataset is always valid")
}

/// Render a dataset as CSV with columns x1..xp,y (labels are implicit row
/// numbers).
pub fn to_csv(data: &Dataset) -> String {
    let mut out = String::new();
    for j in 0..data.p() {
        out.push_str(&format!("x{},", j + 1));
    }
    out.push_str("y\n");
    for i in 0..data.n() {
        for j in 0..data.p() {
            out.push_str(&format!("{},", data.x()[(i, j)]));
        }
        out.push_str(&format!("{}\n", data.y()[i]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_shapes() {
        let t = bundled("telephone").unwrap();
        assert_eq!((t.n(), t.p()), (24, 1));
        let h = bundled("hawkins").unwrap();
        assert_eq!((h.n(), h.p()), (75, 3));
        let s = bundled("scottish").unwrap();
        assert_eq!((s.n(), s.p()), (35, 2));
    }

    #[test]
    fn unknown_bundled_name() {
        assert!(matches!(
            bundled("nope"),
            Err(Error::UnknownBundled { .. })
        ));
    }

    #[test]
    fn csv_shape_contract() {
        let src = "a,b,y\n1,2,3\n4,5,6\n7,8,9\n1,3,5\n2,4,6\n3,5,8\n4,7,9\n5,8,1\n6,9,2\n7,1,4\n";
        let data = parse_csv(src, "test", "y", b',').unwrap();
        assert_eq!((data.n(), data.p()), (10, 2));
        assert_eq!(data.labels()[0], 1);
    }

    #[test]
    fn blank_cell_reports_row() {
        let src = "a,y\n1,2\n3,4\n5,6\n7,\n9,10\n11,12\n";
        let err = parse_csv(src, "test", "y", b',').unwrap_err();
        match err {
            Error::BadCell { row, .. } => assert_eq!(row, 4),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn duplicate_header_rejected() {
        let src = "a,a,y\n1,2,3\n4,5,6\n7,8,9\n1,2,3\n4,5,6\n7,8,9\n";
        assert!(matches!(
            parse_csv(src, "test", "y", b','),
            Err(Error::DuplicateHeader { .. })
        ));
    }

    #[test]
    fn response_by_position() {
        let src = "a,b,c\n1,2,3\n4,5,6\n7,8,9\n2,3,4\n5,6,7\n8,9,1\n3,4,5\n";
        let data = parse_csv(src, "test", "3", b',').unwrap();
        assert_eq!(data.p(), 2);
        assert_eq!(data.y()[0], 3.0);
    }

    #[test]
    fn generator_contract() {
        for seed in [0u64, 7, 99] {
            let d = generate_twovariables(seed);
            assert_eq!((d.n(), d.p()), (56, 1));
            for i in 50..53 {
                assert!(d.x()[(i, 0)] > 10.0);
            }
            for i in 53..56 {
                assert!(d.y()[i] - (d.x()[(i, 0)] + 4.0) > 10.0);
            }
            assert_eq!(d, generate_twovariables(seed));
        }
        let d3 = generate_threevariables(1);
        assert_eq!((d3.n(), d3.p()), (56, 2));
        let clean_max: f64 = (0..56)
            .filter(|i| !(50..53).contains(i))
            .map(|i| (d3.x()[(i, 0)].powi(2) + d3.x()[(i, 1)].powi(2)).sqrt())
            .fold(0.0, f64::max);
        for i in 50..53 {
            let norm = (d3.x()[(i, 0)].powi(2) + d3.x()[(i, 1)].powi(2)).sqrt();
            assert!(norm > clean_max);
        }
    }

    #[test]
    fn bundled_matches_csv_roundtrip() {
        let dir = std::env::temp_dir().join("lad_diag_roundtrip");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("telephone.csv");
        std::fs::write(&path, TELEPHONE_CSV).unwrap();
        let via_file = load_csv(&path, "calls", b',').unwrap();
        let via_bundle = bundled("telephone").unwrap();
        assert_eq!(via_file, via_bundle);
    }
}
