//! Binary state dumps.
//!
//! Layout, little endian: magic `TEC2`, `u32` format version, `u64`
//! triangle count, then six `f64` per triangle as produced by
//! `EdgeCut::pack`.

use std::io::{Read, Write};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use tricut::advect::InterfaceState;
use tricut::edgecut::EdgeCut;
use tricut::mesh::TriMesh;

pub const MAGIC: &[u8; 4] = b"TEC2";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_cuts<W: Write>(w: &mut W, cuts: &[EdgeCut]) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(cuts.len() as u64).to_le_bytes())?;
    for c in cuts {
        for x in c.pack() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_cuts<R: Read>(r: &mut R) -> Result<Vec<EdgeCut>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).context("reading header")?;
    if &magic != MAGIC {
        bail!("not a state dump (magic {magic:?})");
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != FORMAT_VERSION {
        bail!("unsupported dump version {version}");
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    let mut cuts = Vec::with_capacity(n.min(1 << 24));
    for t in 0..n {
        let mut rec = [0.0; 6];
        for x in &mut rec {
            r.read_exact(&mut b8).with_context(|| format!("record {t} truncated"))?;
            *x = f64::from_le_bytes(b8);
        }
        cuts.push(EdgeCut::unpack(&rec).with_context(|| format!("record {t}"))?);
    }
    Ok(cuts)
}

pub fn load_state<R: Read>(r: &mut R, mesh: Arc<TriMesh>) -> Result<InterfaceState> {
    let cuts = read_cuts(r)?;
    if cuts.len() != mesh.num_triangles() {
        bail!("dump holds {} records but the mesh has {} triangles", cuts.len(), mesh.num_triangles());
    }
    Ok(InterfaceState::try_new(mesh, cuts)?)
}
