//! Periodogram export for external plotting.

use std::io::{Read, Write};

use super::cfar::Threshold;
use super::detect::Detection;
use super::periodogram::Periodogram;
use crate::clutter::io::get_u32;
use crate::error::{Error, Result};

pub const PGRAM_MAGIC: &[u8; 8] = b"CRAPPGRM";

pub const PEAK_CSV_HEADER: &str =
    "schema,n_prime,m_prime,detected,n_frac,m_frac,range_m,velocity_mps,peak_power,threshold";

/// `CRAPPGRM`, `N'` and `M'` as u32, then `f32` values row-major, all little-endian.
pub fn write_periodogram<W: Write>(pg: &Periodogram, w: &mut W) -> Result<()> {
    w.write_all(PGRAM_MAGIC)?;
    for d in [pg.n_prime, pg.m_prime] {
        let d = u32::try_from(d).map_err(|_| Error::Format(format!("dimension {d} does not fit in u32")))?;
        w.write_all(&d.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(4 * pg.values.len().min(1 << 16));
    for chunk in pg.values.chunks(1 << 16) {
        buf.clear();
        for v in chunk {
            buf.extend_from_slice(&(*v as f32).to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

/// Reads a dump back; values come back at `f32` precision.
pub fn read_periodogram<R: Read>(r: &mut R) -> Result<Periodogram> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != PGRAM_MAGIC {
        return Err(Error::Format("not a periodogram dump".into()));
    }
    let n_prime = get_u32(r)? as usize;
    let m_prime = get_u32(r)? as usize;
    let mut bytes = vec![0u8; 4 * n_prime * m_prime];
    r.read_exact(&mut bytes).map_err(|_| Error::Format("periodogram dump is truncated".into()))?;
    let values = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
        .collect();
    Ok(Periodogram {
        values,
        n_prime,
        m_prime,
        doppler_centered: true,
    })
}

/// One CSV line (no header) describing the strongest peak.
pub fn write_peak_csv<W: Write>(w: &mut W, pg: &Periodogram, peak: &Detection, threshold: &Threshold) -> Result<()> {
    writeln!(
        w,
        "crap-peak/1,{},{},{},{},{},{},{},{:e},{:e}",
        pg.n_prime,
        pg.m_prime,
        peak.above_threshold,
        peak.n_frac,
        peak.m_frac,
        peak.range_m,
        peak.velocity_mps,
        peak.peak_power,
        threshold.eta
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trip_at_f32_precision() {
        let mut pg = Periodogram::zeros(4, 8);
        for (i, v) in pg.values.iter_mut().enumerate() {
            *v = i as f64 * 0.1;
        }
        let mut bytes = Vec::new();
        write_periodogram(&pg, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 16 + 4 * 32);
        let back = read_periodogram(&mut bytes.as_slice()).unwrap();
        assert_eq!((back.n_prime, back.m_prime), (4, 8));
        for (a, b) in pg.values.iter().zip(&back.values) {
            assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0));
        }
        // row-major: value (1, 0) is the ninth float
        let off = 16 + 4 * 8;
        assert_eq!(f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()), 0.8f32);
    }
}
