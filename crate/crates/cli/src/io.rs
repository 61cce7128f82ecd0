//! The .bcf on-disk format shared by every command.
//!
//! Layout: a single textual header line
//!
//! ```text
//! BCF1 <n> <eps> <f0> <fB> <fF> <gamma> <mu> <e_p> <kind> [sigma]
//! ```
//!
//! followed by exactly n² payload elements, row-major with row 0 at the
//! minimum y: little-endian f64 for `field` kind, single bytes otherwise
//! (label codes 0..=4, or 0/1 for `edges`/`mask`). Numeric header tokens
//! use shortest round-trip formatting, so values survive write/read
//! bit-exactly. The trailing sigma token is present only for `edges`.

use ldcap::model::{EdgeMap, GridSpec, Label, LabelField, ScalarField, SystemParams};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &str = "BCF1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Field,
    Labels,
    Edges,
    Mask,
}

impl Kind {
    fn tag(self) -> &'static str {
        match self {
            Kind::Field => "field",
            Kind::Labels => "labels",
            Kind::Edges => "edges",
            Kind::Mask => "mask",
        }
    }

    fn from_tag(s: &str) -> Option<Self> {
        match s {
            "field" => Some(Kind::Field),
            "labels" => Some(Kind::Labels),
            "edges" => Some(Kind::Edges),
            "mask" => Some(Kind::Mask),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Header {
    pub n: usize,
    pub eps: f64,
    pub f0: f64,
    pub f_b: f64,
    pub f_f: f64,
    pub gamma: f64,
    pub mu: f64,
    pub e_p: f64,
    pub kind: Kind,
    pub sigma: Option<f64>,
}

#[derive(Debug)]
pub enum IoError {
    Io(std::io::Error),
    Format(String),
}

impl std::fmt::Display for IoError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IoError::Io(e) => write!(f, "{e}"),
            IoError::Format(m) => write!(f, "malformed bcf file: {m}"),
        }
    }
}

impl std::error::Error for IoError {}

impl From<std::io::Error> for IoError {
    fn from(e: std::io::Error) -> Self {
        IoError::Io(e)
    }
}

type Result<T> = std::result::Result<T, IoError>;

impl Header {
    fn to_line(&self) -> String {
        let mut line = format!(
            "{MAGIC} {} {} {} {} {} {} {} {} {}",
            self.n,
            self.eps,
            self.f0,
            self.f_b,
            self.f_f,
            self.gamma,
            self.mu,
            self.e_p,
            self.kind.tag()
        );
        if let Some(s) = self.sigma {
            line.push(' ');
            line.push_str(&s.to_string());
        }
        line.push('\n');
        line
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 10 || toks[0] != MAGIC {
            return Err(IoError::Format(format!(
                "bad header line {line:?} (expected `{MAGIC} n eps f0 fB fF gamma mu e_p kind`)"
            )));
        }
        let num = |i: usize, name: &str| -> Result<f64> {
            toks[i]
                .parse()
                .map_err(|_| IoError::Format(format!("field `{name}` = {:?}", toks[i])))
        };
        let n: usize = toks[1]
            .parse()
            .map_err(|_| IoError::Format(format!("grid size {:?}", toks[1])))?;
        if n < 2 {
            return Err(IoError::Format(format!("grid size {n} < 2")));
        }
        let kind = Kind::from_tag(toks[9])
            .ok_or_else(|| IoError::Format(format!("unknown kind {:?}", toks[9])))?;
        let sigma = if toks.len() > 10 {
            Some(num(10, "sigma")?)
        } else {
            None
        };
        Ok(Header {
            n,
            eps: num(2, "eps")?,
            f0: num(3, "f0")?,
            f_b: num(4, "fB")?,
            f_f: num(5, "fF")?,
            gamma: num(6, "gamma")?,
            mu: num(7, "mu")?,
            e_p: num(8, "e_p")?,
            kind,
            sigma,
        })
    }

    pub fn grid(&self) -> GridSpec<f64> {
        GridSpec {
            eps: self.eps,
            n: self.n,
        }
    }

    /// Same grid and reference anomaly: the precondition for combining files.
    pub fn compatible_grid(&self, other: &Header) -> bool {
        self.n == other.n && self.eps == other.eps && self.f0 == other.f0
    }
}

/// Write bytes atomically: to a temp file in the same directory, then rename.
fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp~");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(bytes)?;
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn write_payload(path: &Path, header: &Header, payload: &[u8]) -> Result<()> {
    let mut bytes = header.to_line().into_bytes();
    bytes.extend_from_slice(payload);
    atomic_write(path, &bytes)
}

fn read_file(path: &Path) -> Result<(Header, Vec<u8>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut line = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        if r.read(&mut byte)? == 0 {
            return Err(IoError::Format("missing header newline".to_string()));
        }
        if byte[0] == b'\n' {
            break;
        }
        line.push(byte[0]);
        if line.len() > 4096 {
            return Err(IoError::Format("header line too long".to_string()));
        }
    }
    let header = Header::parse_line(
        std::str::from_utf8(&line)
            .map_err(|_| IoError::Format("header is not UTF-8".to_string()))?,
    )?;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    let expected = header.n * header.n * if header.kind == Kind::Field { 8 } else { 1 };
    if payload.len() != expected {
        return Err(IoError::Format(format!(
            "payload is {} bytes, expected {expected}",
            payload.len()
        )));
    }
    Ok((header, payload))
}

pub fn write_scalar_field(
    path: &Path,
    field: &ScalarField<f64>,
    params: &SystemParams<f64>,
) -> Result<()> {
    let header = Header {
        n: field.spec.n,
        eps: field.spec.eps,
        f0: field.f0,
        f_b: field.f_b,
        f_f: field.f_f,
        gamma: field.gamma,
        mu: params.mu,
        e_p: params.e_p,
        kind: Kind::Field,
        sigma: None,
    };
    let mut payload = Vec::with_capacity(field.values.len() * 8);
    for v in &field.values {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    write_payload(path, &header, &payload)
}

pub fn read_scalar_field(path: &Path) -> Result<(Header, ScalarField<f64>)> {
    let (header, payload) = read_file(path)?;
    if header.kind != Kind::Field {
        return Err(IoError::Format(format!(
            "expected a field file, found kind `{}`",
            header.kind.tag()
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let field = ScalarField {
        spec: header.grid(),
        values,
        f0: header.f0,
        f_b: header.f_b,
        f_f: header.f_f,
        gamma: header.gamma,
    };
    Ok((header, field))
}

pub fn write_label_field(
    path: &Path,
    labels: &LabelField<f64>,
    params: &SystemParams<f64>,
) -> Result<()> {
    let header = Header {
        n: labels.spec.n,
        eps: labels.spec.eps,
        f0: labels.f0,
        f_b: if labels.ff < labels.f0 {
            labels.ff - labels.f0
        } else {
            0.0
        },
        f_f: if labels.ff > labels.f0 {
            labels.ff - labels.f0
        } else {
            0.0
        },
        gamma: 0.0,
        mu: params.mu,
        e_p: params.e_p,
        kind: Kind::Labels,
        sigma: None,
    };
    let payload: Vec<u8> = labels.labels.iter().map(|l| l.code()).collect();
    write_payload(path, &header, &payload)
}

pub fn read_label_field(path: &Path) -> Result<(Header, LabelField<f64>)> {
    let (header, payload) = read_file(path)?;
    if header.kind != Kind::Labels {
        return Err(IoError::Format(format!(
            "expected a labels file, found kind `{}`",
            header.kind.tag()
        )));
    }
    let labels = payload
        .iter()
        .map(|&c| {
            Label::from_code(c)
                .ok_or_else(|| IoError::Format(format!("invalid label code {c}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = header.n;
    let ff = header.f0 + if header.f_b < 0.0 { header.f_b } else { header.f_f };
    let field = LabelField {
        spec: header.grid(),
        labels,
        event_anomaly: vec![f64::NAN; n * n],
        f0: header.f0,
        ff,
    };
    Ok((header, field))
}

pub fn write_edge_map(
    path: &Path,
    edges: &EdgeMap<f64>,
    meta: &Header,
) -> Result<()> {
    let header = Header {
        n: edges.spec.n,
        eps: edges.spec.eps,
        kind: Kind::Edges,
        sigma: Some(edges.sigma),
        ..*meta
    };
    let payload: Vec<u8> = edges.mask.iter().map(|&m| m as u8).collect();
    write_payload(path, &header, &payload)
}

pub fn read_edge_map(path: &Path) -> Result<(Header, EdgeMap<f64>)> {
    let (header, payload) = read_file(path)?;
    if header.kind != Kind::Edges {
        return Err(IoError::Format(format!(
            "expected an edges file, found kind `{}`",
            header.kind.tag()
        )));
    }
    let mask = decode_mask(&payload)?;
    let edges = EdgeMap {
        spec: header.grid(),
        mask,
        sigma: header.sigma.unwrap_or(0.0),
    };
    Ok((header, edges))
}

pub fn write_mask(path: &Path, mask: &[bool], meta: &Header) -> Result<()> {
    let header = Header {
        kind: Kind::Mask,
        sigma: None,
        ..*meta
    };
    let payload: Vec<u8> = mask.iter().map(|&m| m as u8).collect();
    write_payload(path, &header, &payload)
}

pub fn read_mask(path: &Path) -> Result<(Header, Vec<bool>)> {
    let (header, payload) = read_file(path)?;
    if header.kind != Kind::Mask {
        return Err(IoError::Format(format!(
            "expected a mask file, found kind `{}`",
            header.kind.tag()
        )));
    }
    Ok((header, decode_mask(&payload)?))
}

fn decode_mask(payload: &[u8]) -> Result<Vec<bool>> {
    payload
        .iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(IoError::Format(format!("invalid mask byte {other}"))),
        })
        .collect()
}

/// Plain CSV view of a field, one grid row per line (row 0 = minimum y).
pub fn write_field_csv(path: &Path, field: &ScalarField<f64>) -> Result<()> {
    let mut out = String::new();
    let n = field.spec.n;
    for i in 0..n {
        for j in 0..n {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&field.get(i, j).to_string());
        }
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}
