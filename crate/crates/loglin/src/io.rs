//! File formats: model JSON, samples CSV and JSON reports.
//!
//! Vertex ids are 1-based in every file and 0-based in memory.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Samples;
use crate::error::{Error, Result};
use crate::faces::{row_windows, Face, FaceStatus, LocalFaceReport};
use crate::model::{lattice_edges, Model};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub levels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeShape {
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variables: Vec<Variable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeShape>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generating_class: Option<Vec<Vec<usize>>>,
}

fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::Invalid(format!("unsupported format_version {v}")));
    }
    Ok(())
}

fn zero_based(ids: &[usize]) -> Result<Vec<usize>> {
    ids.iter()
        .map(|&v| v.checked_sub(1).ok_or_else(|| Error::InvalidModel("vertex ids are 1-based".into())))
        .collect()
}

impl ModelFile {
    pub fn from_model(model: &Model) -> ModelFile {
        let variables = model
            .names()
            .iter()
            .zip(model.levels())
            .map(|(n, &l)| Variable { name: n.clone(), levels: l })
            .collect();
        let lattice = model.lattice_shape().map(|(rows, cols)| LatticeShape { rows, cols });
        let (edges, generating_class) = match model.edges() {
            Some(e) => (Some(e.iter().map(|&(a, b)| [a + 1, b + 1]).collect()), None),
            None => (
                None,
                Some(
                    model
                        .generating_class()
                        .into_iter()
                        .map(|d| d.into_iter().map(|v| v + 1).collect())
                        .collect(),
                ),
            ),
        };
        ModelFile { format_version: FORMAT_VERSION, variables, lattice, edges, generating_class }
    }

    pub fn to_model(&self) -> Result<Model> {
        check_version(self.format_version)?;
        let p = match (self.variables.len(), self.lattice) {
            (0, Some(s)) => s.rows * s.cols,
            (0, None) => return Err(Error::InvalidModel("no variables".into())),
            (n, Some(s)) if n != s.rows * s.cols => {
                return Err(Error::InvalidModel(format!(
                    "{n} variables for a {}x{} lattice",
                    s.rows, s.cols
                )))
            }
            (n, _) => n,
        };
        let levels: Vec<usize> = if self.variables.is_empty() {
            vec![2; p]
        } else {
            self.variables.iter().map(|v| v.levels).collect()
        };
        let mut model = match (&self.edges, &self.generating_class, self.lattice) {
            (Some(_), Some(_), _) => {
                return Err(Error::InvalidModel("give either edges or generating_class, not both".into()))
            }
            (Some(e), None, _) => {
                let mut edges = Vec::with_capacity(e.len());
                for pair in e {
                    let z = zero_based(pair)?;
                    edges.push((z[0], z[1]));
                }
                let mut m = Model::from_graph(levels, &edges)?;
                if let Some(s) = self.lattice {
                    let mut want = lattice_edges(s.rows, s.cols);
                    want.sort_unstable();
                    if m.edges() == Some(&want[..]) {
                        m.set_lattice(s.rows, s.cols);
                    }
                }
                m
            }
            (None, Some(class), _) => {
                let class: Vec<Vec<usize>> = class.iter().map(|d| zero_based(d)).collect::<Result<_>>()?;
                Model::from_generating_class(levels, &class)?
            }
            (None, None, Some(s)) => {
                let mut m = Model::from_graph(levels, &lattice_edges(s.rows, s.cols))?;
                m.set_lattice(s.rows, s.cols);
                m
            }
            (None, None, None) => {
                return Err(Error::InvalidModel("model needs edges, generating_class or lattice".into()))
            }
        };
        if !self.variables.is_empty() {
            model = model.with_names(self.variables.iter().map(|v| v.name.clone()).collect())?;
        }
        Ok(model)
    }
}

pub fn model_from_json(s: &str) -> Result<Model> {
    serde_json::from_str::<ModelFile>(s)?.to_model()
}

pub fn model_to_json(model: &Model) -> Result<String> {
    to_json(&ModelFile::from_model(model))
}

pub fn read_model(path: impl AsRef<Path>) -> Result<Model> {
    model_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_model(path: impl AsRef<Path>, model: &Model) -> Result<()> {
    std::fs::write(path, model_to_json(model)?)?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)?)?;
    Ok(())
}

/// Samples CSV: a `# format_version=1` line, a header of variable names, then
/// one row of level indices per observation.
pub fn write_samples<W: Write>(out: W, samples: &Samples, model: &Model) -> Result<()> {
    samples.validate(model)?;
    let mut out = out;
    writeln!(out, "# format_version={FORMAT_VERSION}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(model.names())?;
    for row in samples.rows() {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn samples_to_csv(samples: &Samples, model: &Model) -> Result<String> {
    let mut buf = Vec::new();
    write_samples(&mut buf, samples, model)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn read_samples_from<R: BufRead>(mut input: R, model: &Model) -> Result<Samples> {
    let mut first = String::new();
    input.read_line(&mut first)?;
    let version = first
        .trim()
        .strip_prefix('#')
        .and_then(|s| s.trim().strip_prefix("format_version="))
        .ok_or_else(|| Error::Parse { row: 0, msg: "missing '# format_version=1' line".into() })?;
    let version: u32 = version
        .trim()
        .parse()
        .map_err(|_| Error::Parse { row: 0, msg: format!("bad format_version '{version}'") })?;
    check_version(version)?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header != model.names() {
        return Err(Error::Parse {
            row: 0,
            msg: format!("header {:?} does not match the model variables {:?}", header, model.names()),
        });
    }
    let mut samples = Samples::new(model.p());
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|x| {
                x.trim().parse::<usize>().map_err(|_| Error::Parse {
                    row: k + 1,
                    msg: format!("'{x}' is not a level index"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        samples.push(&row).map_err(|e| Error::Parse { row: k + 1, msg: e.to_string() })?;
    }
    samples.validate(model)?;
    Ok(samples)
}

pub fn read_samples(path: impl AsRef<Path>, model: &Model) -> Result<Samples> {
    let f = std::fs::File::open(path)?;
    read_samples_from(std::io::BufReader::new(f), model)
}

pub fn write_samples_file(path: impl AsRef<Path>, samples: &Samples, model: &Model) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_samples(std::io::BufWriter::new(f), samples, model)
}

/// Subset specification: `rows:k` (sliding windows of `k` lattice rows) or explicit
/// 1-based lists `1,2,3;4,5,6`.
pub fn parse_subsets(spec: &str, model: &Model) -> Result<Vec<Vec<usize>>> {
    if let Some(k) = spec.strip_prefix("rows:") {
        let k = k.parse().map_err(|_| Error::Invalid(format!("bad window size in '{spec}'")))?;
        return row_windows(model, k);
    }
    spec.split(';')
        .map(|part| {
            let ids = part
                .split(',')
                .map(|x| x.trim().parse::<usize>().map_err(|_| Error::Invalid(format!("bad vertex id '{x}'"))))
                .collect::<Result<Vec<_>>>()?;
            let mut z = zero_based(&ids)?;
            if let Some(&v) = z.iter().find(|&&v| v >= model.p()) {
                return Err(Error::UnknownVertex(v + 1));
            }
            z.sort_unstable();
            z.dedup();
            Ok(z)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceReport {
    pub format_version: u32,
    /// Lifted certificate (intercept first), as `p/q` strings.
    pub g: Vec<String>,
    pub facial_set_size: usize,
    pub cells: usize,
    pub dimension: usize,
    pub cone_dimension: usize,
    pub proper: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subsets: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub local_dimensions: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extended_dimensions: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub local_cone_dimensions: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extended_cone_dimensions: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<FaceStatus>,
}

impl FaceReport {
    pub fn from_face(face: &Face) -> FaceReport {
        FaceReport {
            format_version: FORMAT_VERSION,
            g: face.g_strings(),
            facial_set_size: face.facial_set.len(),
            cells: face.cells,
            dimension: face.dimension,
            cone_dimension: face.cone_dimension,
            proper: face.is_proper(),
            subsets: vec![],
            local_dimensions: vec![],
            extended_dimensions: vec![],
            local_cone_dimensions: vec![],
            extended_cone_dimensions: vec![],
            status: None,
        }
    }

    pub fn from_local(rep: &LocalFaceReport) -> FaceReport {
        FaceReport {
            subsets: rep.subsets.iter().map(|a| a.iter().map(|v| v + 1).collect()).collect(),
            local_dimensions: rep.local_dimensions.clone(),
            extended_dimensions: rep.extended_dimensions.clone(),
            local_cone_dimensions: rep.local_cone_dimensions.clone(),
            extended_cone_dimensions: rep.extended_cone_dimensions.clone(),
            status: Some(rep.status),
            ..FaceReport::from_face(&rep.face)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_roundtrip_graph_and_class() {
        let m = Model::from_graph(vec![2, 3, 2], &[(0, 1), (1, 2)]).unwrap();
        let back = model_from_json(&model_to_json(&m).unwrap()).unwrap();
        assert_eq!(back.levels(), m.levels());
        assert_eq!(back.edges(), m.edges());
        let c = Model::from_generating_class(vec![2; 3], &[vec![0], vec![1], vec![2], vec![0, 1]]).unwrap();
        let back = model_from_json(&model_to_json(&c).unwrap()).unwrap();
        assert_eq!(back.generating_class(), c.generating_class());
    }

    #[test]
    fn lattice_shorthand() {
        let m = model_from_json(r#"{"format_version":1,"lattice":{"rows":2,"cols":3}}"#).unwrap();
        assert_eq!(m.lattice_shape(), Some((2, 3)));
        assert_eq!(m.j_len(), 6 + 7);
        let back = model_from_json(&model_to_json(&m).unwrap()).unwrap();
        assert_eq!(back.lattice_shape(), Some((2, 3)));
    }

    #[test]
    fn model_errors() {
        assert!(model_from_json(r#"{"format_version":2,"lattice":{"rows":2,"cols":2}}"#).is_err());
        let e = model_from_json(
            r#"{"format_version":1,"variables":[{"name":"a","levels":2},{"name":"b","levels":2}],"generating_class":[[1,2]]}"#,
        );
        assert!(matches!(e, Err(Error::NotDownwardClosed { .. })));
        let e = model_from_json(r#"{"format_version":1,"variables":[{"name":"a","levels":2}],"edges":[[0,1]]}"#);
        assert!(e.is_err());
    }

    #[test]
    fn samples_roundtrip_and_errors() {
        let m = Model::from_graph(vec![2, 3], &[(0, 1)]).unwrap();
        let s = Samples::from_rows(2, &[vec![0, 2], vec![1, 1]]).unwrap();
        let text = samples_to_csv(&s, &m).unwrap();
        assert!(text.starts_with("# format_version=1\nX1,X2\n"));
        assert_eq!(read_samples_from(text.as_bytes(), &m).unwrap(), s);
        let bad = "# format_version=1\nX1,X2\n0,1\n1,3\n";
        assert!(matches!(read_samples_from(bad.as_bytes(), &m), Err(Error::Parse { row: 2, .. })));
        let bad = "# format_version=1\nX1,X2\n0,x\n";
        assert!(matches!(read_samples_from(bad.as_bytes(), &m), Err(Error::Parse { row: 1, .. })));
    }

    #[test]
    fn subset_specs() {
        let m = Model::lattice(4, 4).unwrap();
        assert_eq!(parse_subsets("rows:2", &m).unwrap().len(), 3);
        assert_eq!(parse_subsets("1,2;3", &m).unwrap(), vec![vec![0, 1], vec![2]]);
        assert!(parse_subsets("17", &m).is_err());
    }
}
