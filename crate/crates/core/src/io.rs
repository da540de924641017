//! JSON file formats for joints, channels, distortion matrices and adjacency lists.
//!
//! ```json
//! {"x_labels": ["0","1"], "y_labels": ["0","1"], "pmf": [[0.375,0.125],[0.125,0.375]]}
//! {"in_labels": ["0","1"], "out_labels": ["a","b"], "rows": [[0.9,0.1],[0.2,0.8]]}
//! {"y_labels": ["0","1"], "z_labels": ["0","1"], "d": [[0,1],[1,0]]}
//! [["00","01"], ["00","10"]]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::AdjacencyRelation;
use crate::probability::{Alphabet, Channel, JointPmf};

/// Labels may be given as strings or numbers; numbers are stored by their JSON text.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
enum Label {
    Text(String),
    Number(serde_json::Number),
}

impl Label {
    fn into_string(self) -> String {
        match self {
            Label::Text(s) => s,
            Label::Number(n) => n.to_string(),
        }
    }
}

fn alphabet(labels: Vec<Label>) -> Result<Alphabet> {
    Alphabet::new(labels.into_iter().map(Label::into_string))
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Nested {
    Two(Vec<Vec<f64>>),
    Three(Vec<Vec<Vec<f64>>>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointFile {
    x_labels: Vec<Label>,
    y_labels: Vec<Label>,
    #[serde(default)]
    w_labels: Option<Vec<Label>>,
    pmf: Nested,
}

#[derive(Debug, Serialize)]
struct JointOut<'a> {
    x_labels: &'a [String],
    y_labels: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    w_labels: Option<&'a [String]>,
    pmf: serde_json::Value,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    in_labels: Vec<Label>,
    out_labels: Vec<Label>,
    rows: Vec<Option<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistortionFile {
    y_labels: Vec<Label>,
    z_labels: Vec<Label>,
    d: Vec<Vec<f64>>,
}

/// A distortion matrix `d(y, z)` together with its alphabets.
#[derive(Clone, Debug, PartialEq)]
pub struct DistortionMatrix {
    pub y_alphabet: Alphabet,
    pub z_alphabet: Alphabet,
    pub d: Vec<Vec<f64>>,
}

pub fn joint_from_json(text: &str) -> Result<JointPmf> {
    let file: JointFile = serde_json::from_str(text)?;
    let x = alphabet(file.x_labels)?;
    let y = alphabet(file.y_labels)?;
    match (file.w_labels, file.pmf) {
        (None, Nested::Two(rows)) => JointPmf::from_rows(x, y, &rows),
        (Some(w), Nested::Three(cube)) => {
            let w = alphabet(w)?;
            let mut probs = Vec::with_capacity(x.len() * y.len() * w.len());
            if cube.len() != x.len() {
                return Err(Error::ShapeMismatch {
                    expected: x.len(),
                    got: cube.len(),
                });
            }
            for plane in cube {
                if plane.len() != y.len() {
                    return Err(Error::ShapeMismatch {
                        expected: y.len(),
                        got: plane.len(),
                    });
                }
                for row in plane {
                    if row.len() != w.len() {
                        return Err(Error::ShapeMismatch {
                            expected: w.len(),
                            got: row.len(),
                        });
                    }
                    probs.extend(row);
                }
            }
            JointPmf::new(vec![x, y, w], probs)
        }
        (None, Nested::Three(_)) => Err(Error::InvalidParameter(
            "three-deep pmf requires w_labels".into(),
        )),
        (Some(_), Nested::Two(_)) => Err(Error::InvalidParameter(
            "w_labels given but pmf is two-deep".into(),
        )),
    }
}

pub fn joint_to_json(joint: &JointPmf) -> String {
    let shape = joint.shape();
    let pmf = match joint.arity() {
        2 => serde_json::to_value(joint.rows().map(<[f64]>::to_vec).collect::<Vec<_>>()),
        _ => serde_json::to_value(
            joint
                .probs()
                .chunks(shape[1] * shape[2])
                .map(|plane| plane.chunks(shape[2]).map(<[f64]>::to_vec).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        ),
    }
    .expect("finite floats serialize");
    let out = JointOut {
        x_labels: joint.axis(0).labels(),
        y_labels: joint.axis(1).labels(),
        w_labels: (joint.arity() == 3).then(|| joint.axis(2).labels()),
        pmf,
    };
    serde_json::to_string(&out).expect("serializable")
}

pub fn channel_from_json(text: &str) -> Result<Channel> {
    let file: ChannelFile = serde_json::from_str(text)?;
    Channel::with_absent_rows(alphabet(file.in_labels)?, alphabet(file.out_labels)?, file.rows)
}

pub(crate) fn channel_to_value(channel: &Channel) -> serde_json::Value {
    let file = ChannelFile {
        in_labels: channel.input().labels().iter().cloned().map(Label::Text).collect(),
        out_labels: channel.output().labels().iter().cloned().map(Label::Text).collect(),
        rows: channel.rows().to_vec(),
    };
    serde_json::to_value(file).expect("serializable")
}

pub fn channel_to_json(channel: &Channel) -> String {
    channel_to_value(channel).to_string()
}

pub fn distortion_from_json(text: &str) -> Result<DistortionMatrix> {
    let file: DistortionFile = serde_json::from_str(text)?;
    let y_alphabet = alphabet(file.y_labels)?;
    let z_alphabet = alphabet(file.z_labels)?;
    if file.d.len() != y_alphabet.len() {
        return Err(Error::ShapeMismatch {
            expected: y_alphabet.len(),
            got: file.d.len(),
        });
    }
    for row in &file.d {
        if row.len() != z_alphabet.len() {
            return Err(Error::ShapeMismatch {
                expected: z_alphabet.len(),
                got: row.len(),
            });
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "distortion entries must be finite and nonnegative, got {v}"
            )));
        }
    }
    Ok(DistortionMatrix {
        y_alphabet,
        z_alphabet,
        d: file.d,
    })
}

/// Adjacency as a list of label pairs over `alphabet`.
pub fn adjacency_from_json(text: &str, alphabet: &Alphabet) -> Result<AdjacencyRelation> {
    let pairs: Vec<(Label, Label)> = serde_json::from_str(text)?;
    let mut idx = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let (a, b) = (a.into_string(), b.into_string());
        let ia = alphabet.index_of(&a).ok_or(Error::UnknownLabel(a))?;
        let ib = alphabet.index_of(&b).ok_or(Error::UnknownLabel(b))?;
        idx.push((ia, ib));
    }
    AdjacencyRelation::new(alphabet.len(), idx)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}
