//! Binary run traces: an 8-byte magic, a little-endian `u16` version, then
//! a bincode body.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compiler::{Execution, Protocol};
use crate::netsim::Topology;

pub const TRACE_MAGIC: [u8; 8] = *b"SWTRACE\0";
pub const TRACE_VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub run_id: String,
    pub protocol: Protocol,
    pub topology: Topology,
    pub execution: Execution,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("not a trace file")]
    BadMagic,
    #[error("trace version {0} is not supported")]
    Version(u16),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Codec(#[from] bincode::Error),
}

pub fn write_trace<W: Write>(mut out: W, trace: &TraceFile) -> Result<(), TraceError> {
    out.write_all(&TRACE_MAGIC)?;
    out.write_all(&TRACE_VERSION.to_le_bytes())?;
    bincode::serialize_into(&mut out, trace)?;
    Ok(())
}

pub fn read_trace<R: Read>(mut input: R) -> Result<TraceFile, TraceError> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if magic != TRACE_MAGIC {
        return Err(TraceError::BadMagic);
    }
    let mut v = [0u8; 2];
    input.read_exact(&mut v)?;
    let version = u16::from_le_bytes(v);
    if version != TRACE_VERSION {
        return Err(TraceError::Version(version));
    }
    Ok(bincode::deserialize_from(input)?)
}
