//! JSON forms of representations, matrices and sampled paths used by the command line.

use serde::{Deserialize, Serialize};

use crate::clifford::CliffordRep;
use crate::error::{invalid, Error, Result};
use crate::flow::SkewPath;
use crate::linalg::Mat;

/// `{"r", "s", "n", "E": [...], "F": [...]}` with each generator a row-major array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepJson {
    pub r: usize,
    pub s: usize,
    pub n: usize,
    #[serde(rename = "E")]
    pub e: Vec<Vec<f64>>,
    #[serde(rename = "F")]
    pub f: Vec<Vec<f64>>,
}

fn row_major(m: &Mat) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            // Adding zero maps −0.0 to 0.0.
            out.push(m[(i, j)] + 0.0);
        }
    }
    out
}

fn from_row_major(n: usize, data: &[f64], what: &str) -> Result<Mat> {
    if data.len() != n * n {
        return invalid(format!("{what} has {} entries, expected {}", data.len(), n * n));
    }
    Ok(Mat::from_row_slice(n, n, data))
}

impl RepJson {
    pub fn from_rep(rep: &CliffordRep) -> Self {
        RepJson {
            r: rep.sig().r,
            s: rep.sig().s,
            n: rep.n(),
            e: rep.e().iter().map(row_major).collect(),
            f: rep.f().iter().map(row_major).collect(),
        }
    }

    /// Validated at the construction tolerance.
    pub fn to_rep(&self) -> Result<CliffordRep> {
        let (e, f) = self.generators()?;
        CliffordRep::new(self.n, e, f)
    }

    /// Shape-checked only.
    pub fn to_rep_unchecked(&self) -> Result<CliffordRep> {
        let (e, f) = self.generators()?;
        CliffordRep::unchecked(self.n, e, f)
    }

    fn generators(&self) -> Result<(Vec<Mat>, Vec<Mat>)> {
        if self.e.len() != self.r || self.f.len() != self.s {
            return invalid(format!(
                "declared signature ({}, {}) but {} E and {} F generators given",
                self.r,
                self.s,
                self.e.len(),
                self.f.len()
            ));
        }
        let e = self
            .e
            .iter()
            .enumerate()
            .map(|(i, d)| from_row_major(self.n, d, &format!("E{}", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        let f = self
            .f
            .iter()
            .enumerate()
            .map(|(i, d)| from_row_major(self.n, d, &format!("F{}", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        Ok((e, f))
    }
}

pub fn rep_to_string(rep: &CliffordRep) -> String {
    serde_json::to_string(&RepJson::from_rep(rep)).expect("plain struct serializes")
}

pub fn rep_from_str(s: &str) -> Result<CliffordRep> {
    let j: RepJson =
        serde_json::from_str(s).map_err(|e| Error::Invalid(format!("representation JSON: {e}")))?;
    j.to_rep()
}

/// A matrix as nested rows or as `{"n", "data"}` in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixJson {
    Rows(Vec<Vec<f64>>),
    Flat { n: usize, data: Vec<f64> },
}

impl MatrixJson {
    pub fn to_mat(&self) -> Result<Mat> {
        match self {
            MatrixJson::Rows(rows) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return invalid("matrix rows must form a square array");
                }
                Ok(Mat::from_fn(n, n, |i, j| rows[i][j]))
            }
            MatrixJson::Flat { n, data } => from_row_major(*n, data, "matrix"),
        }
    }

    pub fn from_mat(m: &Mat) -> Self {
        MatrixJson::Rows((0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect())
    }
}

pub fn matrix_from_str(s: &str) -> Result<Mat> {
    let j: MatrixJson =
        serde_json::from_str(s).map_err(|e| Error::Invalid(format!("matrix JSON: {e}")))?;
    j.to_mat()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub t: f64,
    #[serde(rename = "T")]
    pub matrix: MatrixJson,
}

/// `{"context": rep, "samples": [{"t", "T"}, ...]}`, interpolated linearly in `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPathJson {
    pub context: RepJson,
    pub samples: Vec<PathSample>,
}

impl SampledPathJson {
    pub fn to_path(&self) -> Result<SkewPath> {
        let ctx = self.context.to_rep()?;
        if self.samples.len() < 2 {
            return invalid("a sampled path needs at least two samples");
        }
        let mut pts: Vec<(f64, Mat)> = Vec::with_capacity(self.samples.len());
        for s in &self.samples {
            let m = s.matrix.to_mat()?;
            if m.nrows() != ctx.n() {
                return invalid(format!("sample at t = {} has the wrong dimension", s.t));
            }
            pts.push((s.t, m));
        }
        if pts.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return invalid("sample times must be strictly increasing");
        }
        if pts[0].0 != 0.0 || pts[pts.len() - 1].0 != 1.0 {
            return invalid("samples must start at t = 0 and end at t = 1");
        }
        Ok(SkewPath::new(ctx, "sampled path", move |t| {
            let k = pts.partition_point(|p| p.0 <= t).clamp(1, pts.len() - 1);
            let (t0, a) = (&pts[k - 1].0, &pts[k - 1].1);
            let (t1, b) = (&pts[k].0, &pts[k].1);
            let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
            a * (1.0 - w) + b * w
        }))
    }
}

pub fn sampled_path_from_str(s: &str) -> Result<SkewPath> {
    let j: SampledPathJson =
        serde_json::from_str(s).map_err(|e| Error::Invalid(format!("path JSON: {e}")))?;
    j.to_path()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{irreducible_rep, Chirality, Signature};
    use crate::flow::{spectral_flow, FlowOptions};

    #[test]
    fn representation_round_trip() {
        let v = irreducible_rep(Signature::new(3, 2), Some(Chirality::Minus)).unwrap();
        let text = rep_to_string(&v);
        assert!(!text.contains("-0.0"));
        let back = rep_from_str(&text).unwrap();
        assert_eq!(back.e(), v.e());
        assert_eq!(back.f(), v.f());
        assert_eq!(rep_to_string(&back), text);
    }

    #[test]
    fn malformed_representations_are_invalid() {
        let wrong_count = r#"{"r":1,"s":0,"n":1,"E":[],"F":[]}"#;
        assert!(matches!(rep_from_str(wrong_count), Err(Error::Invalid(_))));
        let wrong_size = r#"{"r":1,"s":0,"n":2,"E":[[1,0,0]],"F":[]}"#;
        assert!(matches!(rep_from_str(wrong_size), Err(Error::Invalid(_))));
        let bad_relation = r#"{"r":1,"s":0,"n":1,"E":[[2]],"F":[]}"#;
        assert!(matches!(rep_from_str(bad_relation), Err(Error::Invalid(_))));
        assert!(matches!(rep_from_str("{"), Err(Error::Invalid(_))));
    }

    #[test]
    fn matrix_forms_agree() {
        let a = matrix_from_str("[[1,2],[3,4]]").unwrap();
        let b = matrix_from_str(r#"{"n":2,"data":[1,2,3,4]}"#).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[(0, 1)], 2.0);
        assert!(matrix_from_str("[[1,2],[3]]").is_err());
    }

    #[test]
    fn sampled_path_interpolates() {
        let text = r#"{"context":{"r":0,"s":0,"n":2,"E":[],"F":[]},
            "samples":[{"t":0,"T":[[0,-1],[1,0]]},{"t":1,"T":[[0,1],[-1,0]]}]}"#;
        let path = sampled_path_from_str(text).unwrap();
        assert_eq!(path.eval(0.5).unwrap(), Mat::zeros(2, 2));
        let sf = spectral_flow(&path, &FlowOptions::default()).unwrap();
        assert_eq!((sf.degree, sf.value), (2, 1));
        let unordered = text.replace(r#""t":1"#, r#""t":0"#);
        assert!(sampled_path_from_str(&unordered).is_err());
    }
}
