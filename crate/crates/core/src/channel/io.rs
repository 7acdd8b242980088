//! JSON channel files and the row-list importer.

use super::{Channel, DmicChannel, Dmmac, GeneralMac};
use crate::error::{Error, Result};
use serde_json::{json, Map, Value};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Dmmac,
    GeneralMac,
    Dmic,
}

impl ChannelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::Dmmac => "dmmac",
            ChannelKind::GeneralMac => "general_mac",
            ChannelKind::Dmic => "dmic",
        }
    }
}

pub fn load(path: impl AsRef<Path>) -> Result<Channel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json_str(&text)
}

pub fn save(channel: &Channel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_json_string(channel)).map_err(|e| Error::io(path, e))
}

pub fn to_json_string(channel: &Channel) -> String {
    let v = to_value(channel);
    let mut s = serde_json::to_string_pretty(&v).expect("channel serializes");
    s.push('\n');
    s
}

fn nest(data: &[f64], shape: &[usize]) -> Value {
    if shape.len() == 1 {
        return Value::Array(data.iter().map(|&x| json!(x)).collect());
    }
    let stride: usize = shape[1..].iter().product();
    Value::Array(
        data.chunks(stride)
            .map(|c| nest(c, &shape[1..]))
            .collect(),
    )
}

fn to_value(channel: &Channel) -> Value {
    match channel {
        Channel::Dmmac(c) => {
            let shape = [2, 2, c.x3_size(), c.y_size()];
            let zshape = [2, 2, c.x3_size(), c.z_size()];
            json!({
                "kind": "dmmac",
                "alphabets": {"x1": 2, "x2": 2, "x3": c.x3_size(), "y": c.y_size(), "z": c.z_size()},
                "gamma_y": nest(c.gamma_y(), &shape),
                "gamma_z": nest(c.gamma_z(), &zshape),
            })
        }
        Channel::Dmic(c) => {
            let (r1, r2) = (c.receiver(1), c.receiver(2));
            let x3 = c.x3_size();
            json!({
                "kind": "dmic",
                "alphabets": {"x1": 2, "x2": 2, "x3": x3, "y1": r1.y_size(), "y2": r2.y_size(), "z": r1.z_size()},
                "gamma_y1": nest(r1.gamma_y(), &[2, 2, x3, r1.y_size()]),
                "gamma_y2": nest(r2.gamma_y(), &[2, 2, x3, r2.y_size()]),
                "gamma_z": nest(r1.gamma_z(), &[2, 2, x3, r1.z_size()]),
            })
        }
        Channel::General(c) => {
            let mut shape: Vec<usize> = c.covert_sizes().iter().chain(c.nc_sizes()).copied().collect();
            let mut zshape = shape.clone();
            shape.push(c.y_size());
            zshape.push(c.z_size());
            json!({
                "kind": "general_mac",
                "alphabets": {"covert": c.covert_sizes(), "non_covert": c.nc_sizes(), "y": c.y_size(), "z": c.z_size()},
                "gamma_y": nest(c.gamma_y(), &shape),
                "gamma_z": nest(c.gamma_z(), &zshape),
            })
        }
    }
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value> {
    obj.get(name)
        .ok_or_else(|| Error::Structure(format!("missing field `{name}`")))
}

fn size(obj: &Map<String, Value>, name: &str) -> Result<usize> {
    let v = field(obj, name).map_err(|_| Error::Structure(format!("missing field `alphabets.{name}`")))?;
    v.as_u64().map(|x| x as usize).ok_or_else(|| Error::Parse {
        location: format!("alphabets.{name}"),
        message: "expected a non-negative integer".into(),
    })
}

fn sizes(obj: &Map<String, Value>, name: &str) -> Result<Vec<usize>> {
    let v = field(obj, name).map_err(|_| Error::Structure(format!("missing field `alphabets.{name}`")))?;
    let arr = v.as_array().ok_or_else(|| Error::Parse {
        location: format!("alphabets.{name}"),
        message: "expected an array of sizes".into(),
    })?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_u64().map(|x| x as usize).ok_or_else(|| Error::Parse {
                location: format!("alphabets.{name}[{i}]"),
                message: "expected a non-negative integer".into(),
            })
        })
        .collect()
}

fn flatten(v: &Value, shape: &[usize], loc: &mut String, out: &mut Vec<f64>) -> Result<()> {
    let arr = v.as_array().ok_or_else(|| Error::Structure(format!("{loc} must be an array")))?;
    if arr.len() != shape[0] {
        return Err(Error::Structure(format!(
            "{loc} has length {}, expected {}",
            arr.len(),
            shape[0]
        )));
    }
    for (i, item) in arr.iter().enumerate() {
        let len = loc.len();
        loc.push_str(&format!("[{i}]"));
        if shape.len() == 1 {
            let x = item.as_f64().ok_or_else(|| Error::Parse {
                location: loc.clone(),
                message: "expected a number".into(),
            })?;
            if x < 0.0 {
                return Err(Error::Probability(format!("{loc} = {x} is negative")));
            }
            out.push(x);
        } else {
            flatten(item, &shape[1..], loc, out)?;
        }
        loc.truncate(len);
    }
    Ok(())
}

fn tensor(obj: &Map<String, Value>, name: &str, shape: &[usize]) -> Result<Vec<f64>> {
    let v = field(obj, name)?;
    let mut out = Vec::with_capacity(shape.iter().product());
    let mut loc = name.to_string();
    flatten(v, shape, &mut loc, &mut out)?;
    Ok(out)
}

/// Parses a channel document.
pub fn from_json_str(text: &str) -> Result<Channel> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Structure("channel file must be a JSON object".into()))?;
    let kind = field(obj, "kind")?.as_str().ok_or_else(|| Error::Parse {
        location: "kind".into(),
        message: "expected a string".into(),
    })?;
    let alph = field(obj, "alphabets")?
        .as_object()
        .ok_or_else(|| Error::Structure("`alphabets` must be an object".into()))?;
    match kind {
        "dmmac" => {
            binary_covert(alph)?;
            let (x3, y, z) = (size(alph, "x3")?, size(alph, "y")?, size(alph, "z")?);
            let gy = tensor(obj, "gamma_y", &[2, 2, x3, y])?;
            let gz = tensor(obj, "gamma_z", &[2, 2, x3, z])?;
            Ok(Channel::Dmmac(Dmmac::new(x3, y, z, gy, gz)?))
        }
        "dmic" => {
            binary_covert(alph)?;
            let x3 = size(alph, "x3")?;
            let (y1, y2, z) = (size(alph, "y1")?, size(alph, "y2")?, size(alph, "z")?);
            let g1 = tensor(obj, "gamma_y1", &[2, 2, x3, y1])?;
            let g2 = tensor(obj, "gamma_y2", &[2, 2, x3, y2])?;
            let gz = tensor(obj, "gamma_z", &[2, 2, x3, z])?;
            Ok(Channel::Dmic(DmicChannel::new(x3, y1, y2, z, g1, g2, gz)?))
        }
        "general_mac" => {
            let cs = sizes(alph, "covert")?;
            let ns = sizes(alph, "non_covert")?;
            let (y, z) = (size(alph, "y")?, size(alph, "z")?);
            let mut shape: Vec<usize> = cs.iter().chain(&ns).copied().collect();
            if shape.is_empty() {
                return Err(Error::Structure("general_mac needs at least one user".into()));
            }
            let mut zshape = shape.clone();
            shape.push(y);
            zshape.push(z);
            let gy = tensor(obj, "gamma_y", &shape)?;
            let gz = tensor(obj, "gamma_z", &zshape)?;
            Ok(Channel::General(GeneralMac::new(cs, ns, y, z, gy, gz)?))
        }
        other => Err(Error::Parse {
            location: "kind".into(),
            message: format!("unknown channel kind `{other}`"),
        }),
    }
}

fn binary_covert(alph: &Map<String, Value>) -> Result<()> {
    for name in ["x1", "x2"] {
        if alph.contains_key(name) && size(alph, name)? != 2 {
            return Err(Error::Structure(format!("alphabets.{name} must be 2")));
        }
    }
    Ok(())
}

/// Imports the two-matrix row layout: Γ_Y rows, then Γ_Z rows, each in
/// `(x1, x2, x3)` lexicographic order.
///
/// Two text forms are accepted: a JSON object `{"gamma_y": [rows], "gamma_z": [rows]}`,
/// or plain text with one row per line, the two matrices separated by a blank
/// line or a `---` line. `#` starts a comment.
pub fn from_rows_text(text: &str, renormalize: bool) -> Result<Dmmac> {
    let (mut y, mut z) = if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        let rows = |name: &str| -> Result<Vec<Vec<f64>>> {
            let a = v
                .get(name)
                .ok_or_else(|| Error::Structure(format!("missing field `{name}`")))?;
            serde_json::from_value(a.clone()).map_err(|e| Error::Parse {
                location: name.to_string(),
                message: e.to_string(),
            })
        };
        (rows("gamma_y")?, rows("gamma_z")?)
    } else {
        let mut blocks: Vec<Vec<Vec<f64>>> = vec![Vec::new()];
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() || line.chars().all(|c| c == '-') {
                if !blocks.last().unwrap().is_empty() {
                    blocks.push(Vec::new());
                }
                continue;
            }
            let row = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>().map_err(|e| Error::Parse {
                        location: format!("line {}", ln + 1),
                        message: format!("`{s}`: {e}"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            blocks.last_mut().unwrap().push(row);
        }
        blocks.retain(|b| !b.is_empty());
        if blocks.len() != 2 {
            return Err(Error::Structure(format!(
                "expected two row blocks (Y then Z), found {}",
                blocks.len()
            )));
        }
        let z = blocks.pop().unwrap();
        (blocks.pop().unwrap(), z)
    };
    for (name, rows) in [("Y", &y), ("Z", &z)] {
        for (r, row) in rows.iter().enumerate() {
            if let Some(x) = row.iter().find(|x| **x < 0.0) {
                return Err(Error::Probability(format!("{name} row {r} has negative entry {x}")));
            }
        }
    }
    if renormalize {
        for rows in [&mut y, &mut z] {
            for row in rows.iter_mut() {
                let s: f64 = row.iter().sum();
                if s > 0.0 {
                    row.iter_mut().for_each(|v| *v /= s);
                }
            }
        }
    }
    Dmmac::from_rows(&y, &z)
}
