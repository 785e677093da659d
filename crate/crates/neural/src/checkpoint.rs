//! Checkpoint container: `b"W2A1"`, a little-endian `u32` header length, a
//! JSON header, then every parameter as little-endian `f64` in declaration
//! order.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::asknet::{AskNet, NetConfig};
use crate::error::{NeuralError, Result};

pub const MAGIC: &[u8; 4] = b"W2A1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub version: u32,
    /// What the policy head means, e.g. `"ask"` or `"option_selector"`.
    pub kind: String,
    /// Option vocabulary size.
    pub k: usize,
    pub width: usize,
    pub height: usize,
    pub config: NetConfig,
    pub num_params: usize,
    #[serde(default)]
    pub meta: serde_json::Value,
}

impl CheckpointHeader {
    pub fn for_net(net: &AskNet, kind: &str, k: usize) -> Self {
        Self {
            version: FORMAT_VERSION,
            kind: kind.to_string(),
            k,
            width: net.config().width,
            height: net.config().height,
            config: net.config().clone(),
            num_params: net.num_params(),
            meta: serde_json::Value::Null,
        }
    }
}

pub fn write_to<W: Write>(mut w: W, header: &CheckpointHeader, net: &AskNet) -> Result<()> {
    if header.config != *net.config() {
        return Err(NeuralError::Checkpoint("header config does not match network".into()));
    }
    let json = serde_json::to_vec(header)?;
    w.write_all(MAGIC)?;
    w.write_all(&(json.len() as u32).to_le_bytes())?;
    w.write_all(&json)?;
    for t in &net.params {
        for v in &t.values {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_from<R: Read>(mut r: R) -> Result<(CheckpointHeader, AskNet)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(NeuralError::Checkpoint(format!("bad magic {magic:?}")));
    }
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let mut json = vec![0u8; u32::from_le_bytes(len) as usize];
    r.read_exact(&mut json)?;
    let header: CheckpointHeader = serde_json::from_slice(&json)?;
    if header.version != FORMAT_VERSION {
        return Err(NeuralError::Checkpoint(format!(
            "unsupported version {}",
            header.version
        )));
    }
    let mut net = AskNet::zeros(header.config.clone());
    if net.num_params() != header.num_params {
        return Err(NeuralError::Checkpoint(format!(
            "header declares {} parameters, architecture has {}",
            header.num_params,
            net.num_params()
        )));
    }
    let mut buf = [0u8; 8];
    for t in &mut net.params {
        for v in &mut t.values {
            r.read_exact(&mut buf)?;
            *v = f64::from_le_bytes(buf);
        }
    }
    if r.read(&mut buf)? != 0 {
        return Err(NeuralError::Checkpoint("trailing bytes after parameters".into()));
    }
    Ok((header, net))
}

pub fn save(path: impl AsRef<Path>, header: &CheckpointHeader, net: &AskNet) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_to(&mut w, header, net)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<(CheckpointHeader, AskNet)> {
    let f = std::fs::File::open(path)?;
    read_from(std::io::BufReader::new(f))
}
