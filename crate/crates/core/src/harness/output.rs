//! Schema-tagged, append-safe CSV output and trajectory input.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::sweep::SweepRow;
use super::track::{TrackLogRow, TrajectoryPoint};
use crate::error::{Error, Result};

pub const SWEEP_SCHEMA: &str = "crap-sweep/1";
pub const TRACK_SCHEMA: &str = "crap-track/1";

pub const SWEEP_HEADER: [&str; 9] =
    ["schema", "noise_dbm", "remover", "trials", "failures", "valid", "p_md", "rmse_range_m", "rmse_velocity_mps"];

pub const TRACK_HEADER: [&str; 11] = [
    "schema", "time_s", "r_meas", "v_meas", "r_post", "v_post", "sigma_r", "sigma_v", "reset_flag", "r_true", "v_true",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn sweep_fields(r: &SweepRow) -> Vec<String> {
    vec![
        SWEEP_SCHEMA.into(),
        r.noise_dbm.to_string(),
        r.remover.to_string(),
        r.trials.to_string(),
        r.failures.to_string(),
        r.valid.to_string(),
        r.p_md.to_string(),
        r.rmse_range_m.to_string(),
        r.rmse_velocity_mps.to_string(),
    ]
}

fn track_fields(r: &TrackLogRow) -> Vec<String> {
    vec![
        TRACK_SCHEMA.into(),
        r.time_s.to_string(),
        opt(r.r_meas),
        opt(r.v_meas),
        opt(r.r_post),
        opt(r.v_post),
        opt(r.sigma_r),
        opt(r.sigma_v),
        u8::from(r.reset).to_string(),
        opt(r.r_true),
        opt(r.v_true),
    ]
}

fn write_rows<W: Write>(w: W, header: Option<&[&str]>, rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| Error::Format(e.to_string());
    if let Some(h) = header {
        out.write_record(h).map_err(csv_err)?;
    }
    for r in rows {
        out.write_record(&r).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    write_rows(w, Some(&SWEEP_HEADER), rows.iter().map(sweep_fields))
}

pub fn write_track_csv<W: Write>(w: W, rows: &[TrackLogRow]) -> Result<()> {
    write_rows(w, Some(&TRACK_HEADER), rows.iter().map(track_fields))
}

/// Appends to `path`, writing the header only when the file is new or empty. An
/// existing file with a different header is refused.
fn append(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let expected = header.join(",");
    let existing = match std::fs::File::open(path) {
        Ok(f) => {
            let mut first = String::new();
            BufReader::new(f).read_line(&mut first)?;
            Some(first.trim_end().to_string())
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(e.into()),
    };
    let write_header = match existing.as_deref() {
        None | Some("") => true,
        Some(h) if h == expected => false,
        Some(h) => {
            return Err(Error::Format(format!(
                "{} has header {h:?}, expected {expected:?}",
                path.display()
            )))
        }
    };
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    write_rows(file, write_header.then_some(header), rows)
}

pub fn append_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    append(path, &SWEEP_HEADER, rows.iter().map(sweep_fields))
}

pub fn append_track_csv(path: &Path, rows: &[TrackLogRow]) -> Result<()> {
    append(path, &TRACK_HEADER, rows.iter().map(track_fields))
}

/// Reads `t,r,v[,present]` with a header line. `present` accepts 0/1 or true/false
/// and defaults to present.
pub fn read_trajectory_csv<R: Read>(r: R) -> Result<Vec<TrajectoryPoint>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    let headers = rdr.headers().map_err(fmt)?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (t, rr, v) = match (col("t"), col("r"), col("v")) {
        (Some(t), Some(r), Some(v)) => (t, r, v),
        _ => return Err(Error::Format(format!("trajectory header must contain t, r, v; got {headers:?}"))),
    };
    let present = col("present");
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(fmt)?;
        let num = |i: usize| -> Result<f64> {
            let s = rec.get(i).unwrap_or("");
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Format(format!("trajectory row {}: bad number {s:?}", line + 2)))
        };
        let is_present = match present.and_then(|i| rec.get(i)) {
            None | Some("") | Some("1") | Some("true") => true,
            Some("0") | Some("false") => false,
            Some(other) => return Err(Error::Format(format!("trajectory row {}: bad present flag {other:?}", line + 2))),
        };
        out.push(TrajectoryPoint { t: num(t)?, range_m: num(rr)?, velocity_mps: num(v)?, present: is_present });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clutter::RemoverKind;

    fn row(p: f64) -> SweepRow {
        SweepRow {
            noise_dbm: -100.0,
            remover: RemoverKind::EcaC,
            trials: 4,
            failures: 0,
            valid: 3,
            p_md: p,
            rmse_range_m: 0.1,
            rmse_velocity_mps: 0.05,
        }
    }

    #[test]
    fn sweep_csv_layout() {
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &[row(0.25)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SWEEP_HEADER.join(","));
        assert_eq!(lines[1], "crap-sweep/1,-100,eca-c,4,0,3,0.25,0.1,0.05");
    }

    #[test]
    fn append_writes_header_once_and_refuses_foreign_files() {
        let dir = std::env::temp_dir().join(format!("crap-out-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("r.csv");
        let _ = std::fs::remove_file(&path);
        append_sweep_csv(&path, &[row(0.1)]).unwrap();
        append_sweep_csv(&path, &[row(0.2)]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(text.matches("schema").count(), 1);
        let other = dir.join("o.csv");
        std::fs::write(&other, "a,b\n1,2\n").unwrap();
        assert!(matches!(append_sweep_csv(&other, &[row(0.1)]), Err(Error::Format(_))));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn trajectory_parsing() {
        let text = "t,r,v,present\n0.0,5.0,1.0,1\n0.01, 5.01 ,1.0,0\n";
        let pts = read_trajectory_csv(text.as_bytes()).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(pts[0].present && !pts[1].present);
        assert_eq!(pts[1].range_m, 5.01);
        let no_flag = read_trajectory_csv("t,r,v\n0,1,2\n".as_bytes()).unwrap();
        assert!(no_flag[0].present);
        assert!(read_trajectory_csv("time,r,v\n0,1,2\n".as_bytes()).is_err());
        assert!(read_trajectory_csv("t,r,v\n0,x,2\n".as_bytes()).is_err());
    }
}
