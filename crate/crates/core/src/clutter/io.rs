//! Little-endian binary persistence for snapshot sets and calibrations.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::crap::ClutterCalibration;
use super::snapshots::{ClutterSnapshots, Convention};
use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"CRAPSNAP";
pub const CALIBRATION_MAGIC: &[u8; 8] = b"CRAPCALB";
pub const FORMAT_VERSION: u32 = 1;

const IO_CHUNK: usize = 8192;

pub fn write_snapshots<W: Write>(snaps: &ClutterSnapshots, w: &mut W) -> Result<()> {
    w.write_all(SNAPSHOT_MAGIC)?;
    put_u32(w, FORMAT_VERSION)?;
    put_u32(w, to_u32(snaps.n_subcarriers())?)?;
    put_u32(w, to_u32(snaps.n_symbols())?)?;
    put_u32(w, to_u32(snaps.k())?)?;
    w.write_all(&[Convention::ColumnMajor.tag()])?;
    let mut buf = Vec::with_capacity(16 * IO_CHUNK);
    let mut err = None;
    snaps.for_each_snapshot_major(|v| {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
        if buf.len() >= 16 * IO_CHUNK && err.is_none() {
            if let Err(e) = w.write_all(&buf) {
                err = Some(e);
            }
            buf.clear();
        }
    });
    if let Some(e) = err {
        return Err(e.into());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshots<R: Read>(r: &mut R) -> Result<ClutterSnapshots> {
    expect_magic(r, SNAPSHOT_MAGIC)?;
    expect_version(r)?;
    let n = get_u32(r)? as usize;
    let m = get_u32(r)? as usize;
    let k = get_u32(r)? as usize;
    Convention::from_tag(get_u8(r)?)?;
    if n == 0 || m == 0 || k == 0 {
        return Err(Error::Format(format!("empty snapshot set {n}x{m}, K={k}")));
    }
    ClutterSnapshots::from_fn(n, m, k, |_| ComplexMatrix::new(n, m, get_complex_vec(r, n * m)?))
}

pub fn save_snapshots(snaps: &ClutterSnapshots, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_snapshots(snaps, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_snapshots(path: &Path) -> Result<ClutterSnapshots> {
    read_snapshots(&mut BufReader::new(File::open(path)?))
}

pub fn write_calibration<W: Write>(cal: &ClutterCalibration, w: &mut W) -> Result<()> {
    w.write_all(CALIBRATION_MAGIC)?;
    put_u32(w, FORMAT_VERSION)?;
    put_u32(w, to_u32(cal.n_subcarriers)?)?;
    put_u32(w, to_u32(cal.n_symbols)?)?;
    put_u32(w, to_u32(cal.order())?)?;
    put_u32(w, to_u32(cal.k)?)?;
    w.write_all(&[cal.convention.tag()])?;
    for i in 0..cal.k {
        let s = cal.singular_values.get(i).copied().unwrap_or(0.0);
        w.write_all(&s.to_le_bytes())?;
    }
    put_complex_slice(w, cal.c_hat_h.as_slice())?;
    put_complex_slice(w, cal.p_prime.as_slice())?;
    w.write_all(&cal.snapshot_hash)?;
    Ok(())
}

pub fn read_calibration<R: Read>(r: &mut R) -> Result<ClutterCalibration> {
    expect_magic(r, CALIBRATION_MAGIC)?;
    expect_version(r)?;
    let n = get_u32(r)? as usize;
    let m = get_u32(r)? as usize;
    let l = get_u32(r)? as usize;
    let k = get_u32(r)? as usize;
    let convention = Convention::from_tag(get_u8(r)?)?;
    if l > k {
        return Err(Error::Format(format!("clutter order {l} exceeds snapshot count {k}")));
    }
    let q = n * m;
    let mut singular_values = Vec::with_capacity(k);
    for _ in 0..k {
        singular_values.push(get_f64(r)?);
    }
    let c_hat_h = ComplexMatrix::new(l, q, get_complex_vec(r, l * q)?)?;
    let p_prime = ComplexMatrix::new(q, l, get_complex_vec(r, q * l)?)?;
    let mut snapshot_hash = [0u8; 32];
    r.read_exact(&mut snapshot_hash).map_err(truncated)?;
    Ok(ClutterCalibration {
        n_subcarriers: n,
        n_symbols: m,
        k,
        c_hat_h,
        p_prime,
        singular_values,
        convention,
        snapshot_hash,
        truncated: false,
    })
}

pub fn save_calibration(cal: &ClutterCalibration, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_calibration(cal, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_calibration(path: &Path) -> Result<ClutterCalibration> {
    read_calibration(&mut BufReader::new(File::open(path)?))
}

fn to_u32(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Format(format!("dimension {v} does not fit in u32")))
}

fn put_u32<W: Write>(w: &mut W, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_complex_slice<W: Write>(w: &mut W, data: &[Complex64]) -> Result<()> {
    let mut buf = Vec::with_capacity(16 * IO_CHUNK);
    for chunk in data.chunks(IO_CHUNK) {
        buf.clear();
        for v in chunk {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("file is truncated".into())
    } else {
        e.into()
    }
}

fn expect_magic<R: Read>(r: &mut R, magic: &[u8; 8]) -> Result<()> {
    let mut got = [0u8; 8];
    r.read_exact(&mut got).map_err(truncated)?;
    if &got != magic {
        return Err(Error::Format(format!(
            "bad magic: expected {:?}, found {:?}",
            String::from_utf8_lossy(magic),
            String::from_utf8_lossy(&got)
        )));
    }
    Ok(())
}

fn expect_version<R: Read>(r: &mut R) -> Result<()> {
    let v = get_u32(r)?;
    if v != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported format version {v}")));
    }
    Ok(())
}

pub(crate) fn get_u8<R: Read>(r: &mut R) -> Result<u8> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(b[0])
}

pub(crate) fn get_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

fn get_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(f64::from_le_bytes(b))
}

fn get_complex_vec<R: Read>(r: &mut R, len: usize) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(len);
    let mut buf = vec![0u8; 16 * IO_CHUNK];
    let mut left = len;
    while left > 0 {
        let take = left.min(IO_CHUNK);
        let bytes = &mut buf[..16 * take];
        r.read_exact(bytes).map_err(truncated)?;
        for c in bytes.chunks_exact(16) {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            out.push(Complex64::new(re, im));
        }
        left -= take;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clutter::crap::{calibrate, OrderSelection};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn snaps() -> ClutterSnapshots {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = ComplexMatrix::from_fn(3, 12, |_, _| Complex64::new(rng.random(), rng.random()));
        ClutterSnapshots::from_stacked(4, 3, c).unwrap()
    }

    #[test]
    fn snapshot_round_trip_is_exact() {
        let s = snaps();
        let mut bytes = Vec::new();
        write_snapshots(&s, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 8 + 4 * 4 + 1 + 3 * 12 * 16);
        let back = read_snapshots(&mut bytes.as_slice()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn payload_is_snapshot_major() {
        let s = snaps();
        let mut bytes = Vec::new();
        write_snapshots(&s, &mut bytes).unwrap();
        // second complex value in the payload is snapshot 0, subcarrier 1, symbol 0
        let off = 25 + 16;
        let re = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        assert_eq!(re, s.entry(0, 1, 0).re);
    }

    #[test]
    fn calibration_round_trip_is_exact() {
        let s = snaps();
        let cal = calibrate(&s, OrderSelection::Fixed(2)).unwrap();
        let mut bytes = Vec::new();
        write_calibration(&cal, &mut bytes).unwrap();
        let back = read_calibration(&mut bytes.as_slice()).unwrap();
        assert_eq!(back, cal);
        assert_eq!(back.snapshot_hash, s.hash());
    }

    #[test]
    fn corrupt_inputs_are_rejected() {
        let s = snaps();
        let mut bytes = Vec::new();
        write_snapshots(&s, &mut bytes).unwrap();
        assert!(matches!(read_calibration(&mut bytes.as_slice()), Err(Error::Format(_))));
        assert!(matches!(read_snapshots(&mut &bytes[..bytes.len() - 3]), Err(Error::Format(_))));
        let mut bad = bytes.clone();
        bad[8] = 9;
        assert!(matches!(read_snapshots(&mut bad.as_slice()), Err(Error::Format(_))));
        let mut bad = bytes;
        bad[24] = 7;
        assert!(matches!(read_snapshots(&mut bad.as_slice()), Err(Error::Format(_))));
    }
}
