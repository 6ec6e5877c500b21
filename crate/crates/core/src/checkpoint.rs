//! Binary checkpoint format. Little-endian throughout:
//!
//!   bytes 0..8    magic "ELBWCKPT"
//!   8..12         format version (u32)
//!   12..60        physics parameters: A, gamma, mu, lambda, rho_bar, R
//!   60..84        grid cells per axis (3 x u64)
//!   84..108       grid spacing (3 x f64)
//!   108..132      grid origin (3 x f64)
//!   132..140      grid half width
//!   140..148      state time
//!   148..         13 component blocks of n0*n1*n2 f64 each, x fastest
//!                 within a block (z index outermost)
//!
//! Round trips are bit-exact; a reloaded run reproduces the original
//! stream byte for byte.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{CheckpointError, Error, Result};
use crate::grid::Grid;
use crate::params::PhysParams;
use crate::state::{ConservedState, N_COMPS};

pub const MAGIC: [u8; 8] = *b"ELBWCKPT";
pub const VERSION: u32 = 1;
const HEADER_LEN: u64 = 148;

fn payload_len(g: &Grid) -> u64 {
    (N_COMPS * g.cell_count() * 8) as u64
}

pub fn file_len(g: &Grid) -> u64 {
    HEADER_LEN + payload_len(g)
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn f64(&mut self) -> Result<f64> {
        let mut b = [0u8; 8];
        self.inner.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    }

    fn u64(&mut self) -> Result<u64> {
        let mut b = [0u8; 8];
        self.inner.read_exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }

    fn u32(&mut self) -> Result<u32> {
        let mut b = [0u8; 4];
        self.inner.read_exact(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }
}

pub fn save(path: &Path, c: &ConservedState, p: &PhysParams, g: &Grid) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for v in [p.a, p.gamma, p.mu, p.lambda, p.rho_bar, p.r] {
        w.write_all(&v.to_le_bytes())?;
    }
    for a in 0..3 {
        w.write_all(&(g.n[a] as u64).to_le_bytes())?;
    }
    for a in 0..3 {
        w.write_all(&g.h[a].to_le_bytes())?;
    }
    for a in 0..3 {
        w.write_all(&g.origin[a].to_le_bytes())?;
    }
    w.write_all(&g.half_width.to_le_bytes())?;
    w.write_all(&c.t.to_le_bytes())?;
    let (n0, n1, n2) = g.dim();
    for comp in 0..N_COMPS {
        let arr = c.comp(comp);
        for k in 0..n2 {
            for j in 0..n1 {
                for i in 0..n0 {
                    w.write_all(&arr[[i, j, k]].to_le_bytes())?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(ConservedState, PhysParams, Grid)> {
    let meta = std::fs::metadata(path)?;
    if meta.len() < HEADER_LEN {
        return Err(CheckpointError::TruncatedFile { expected: HEADER_LEN, got: meta.len() }.into());
    }
    let f = std::fs::File::open(path)?;
    let mut r = Reader { inner: std::io::BufReader::new(f) };

    let mut magic = [0u8; 8];
    r.inner.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(CheckpointError::BadMagic.into());
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CheckpointError::VersionMismatch { found: version, expected: VERSION }.into());
    }
    let p = PhysParams {
        a: r.f64()?,
        gamma: r.f64()?,
        mu: r.f64()?,
        lambda: r.f64()?,
        rho_bar: r.f64()?,
        r: r.f64()?,
    };
    let mut n = [0usize; 3];
    for slot in &mut n {
        let raw = r.u64()?;
        if raw == 0 || raw > 1 << 20 {
            return Err(Error::InvalidParams {
                field: "n",
                message: format!("checkpoint grid extent {raw} out of range"),
            });
        }
        *slot = raw as usize;
    }
    let mut h = [0.0f64; 3];
    for slot in &mut h {
        *slot = r.f64()?;
    }
    let mut origin = [0.0f64; 3];
    for slot in &mut origin {
        *slot = r.f64()?;
    }
    let half_width = r.f64()?;
    if !(h.iter().all(|v| v.is_finite() && *v > 0.0) && half_width > 0.0) {
        return Err(Error::InvalidParams {
            field: "h",
            message: "checkpoint grid spacing must be positive and finite".into(),
        });
    }
    let g = Grid { n, h, origin, half_width };
    let t = r.f64()?;

    let expected = file_len(&g);
    if meta.len() != expected {
        return Err(CheckpointError::TruncatedFile { expected, got: meta.len() }.into());
    }
    let mut c = ConservedState::zeros(&g);
    c.t = t;
    let (n0, n1, n2) = g.dim();
    for comp in 0..N_COMPS {
        let arr = c.comp_mut(comp);
        for k in 0..n2 {
            for j in 0..n1 {
                for i in 0..n0 {
                    arr[[i, j, k]] = r.f64()?;
                }
            }
        }
    }
    Ok((c, p, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initdata::{make_bump, BumpSpec};
    use crate::state::to_conserved;

    fn sample() -> (ConservedState, PhysParams, Grid) {
        let p = PhysParams { a: 0.3, gamma: 1.4, mu: 0.01, lambda: -0.002, rho_bar: 1.1, r: 0.4 };
        let g = Grid::cube(9, 1.0).unwrap();
        let spec = BumpSpec {
            velocity_amplitude: 0.2,
            density_bump: 0.05,
            f_potential_amplitude: 0.03,
            ..Default::default()
        };
        let mut c = to_conserved(&make_bump(&spec, &p, &g).unwrap());
        c.t = 0.125;
        (c, p, g)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let (c, p, g) = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.ckpt");
        save(&path, &c, &p, &g).unwrap();
        assert_eq!(std::fs::metadata(&path).unwrap().len(), file_len(&g));
        let (c2, p2, g2) = load(&path).unwrap();
        assert_eq!(p2, p);
        assert_eq!(g2, g);
        assert_eq!(c2.t, c.t);
        for comp in 0..N_COMPS {
            assert_eq!(c2.comp(comp), c.comp(comp), "component {comp}");
        }
        // and the rewritten file is byte-identical
        let path2 = dir.path().join("again.ckpt");
        save(&path2, &c2, &p2, &g2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn payload_is_x_fastest() {
        let (c, p, g) = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.ckpt");
        save(&path, &c, &p, &g).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let at = |idx: usize| {
            let off = HEADER_LEN as usize + 8 * idx;
            f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap())
        };
        let rho = c.rho();
        assert_eq!(at(0), rho[[0, 0, 0]]);
        assert_eq!(at(1), rho[[1, 0, 0]]);
        assert_eq!(at(g.n[0]), rho[[0, 1, 0]]);
        assert_eq!(at(g.n[0] * g.n[1]), rho[[0, 0, 1]]);
    }

    #[test]
    fn bad_magic_version_and_truncation_are_distinguished() {
        let (c, p, g) = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.ckpt");
        save(&path, &c, &p, &g).unwrap();
        let good = std::fs::read(&path).unwrap();

        let mut bad = good.clone();
        bad[0] = b'X';
        let pm = dir.path().join("bad_magic.ckpt");
        std::fs::write(&pm, &bad).unwrap();
        assert!(matches!(
            load(&pm),
            Err(Error::Checkpoint(CheckpointError::BadMagic))
        ));

        let mut bumped = good.clone();
        bumped[8] = 9;
        let pv = dir.path().join("bad_version.ckpt");
        std::fs::write(&pv, &bumped).unwrap();
        assert!(matches!(
            load(&pv),
            Err(Error::Checkpoint(CheckpointError::VersionMismatch { found: 9, expected: 1 }))
        ));

        let pt = dir.path().join("cut.ckpt");
        std::fs::write(&pt, &good[..good.len() - 16]).unwrap();
        assert!(matches!(
            load(&pt),
            Err(Error::Checkpoint(CheckpointError::TruncatedFile { .. }))
        ));
    }
}
