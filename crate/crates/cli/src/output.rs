//! Run directory artifacts.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use gapfield::validate::{ProfilePoint, SweepRecord};
use gapfield::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config_sha256: String,
    pub config: &'a RunConfig,
    pub threads: usize,
    pub started_unix: f64,
    pub finished_unix: f64,
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(self.path(name))?);
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn writer(&self, name: &str) -> Result<BufWriter<fs::File>> {
        let p = self.path(name);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir)?;
        }
        Ok(BufWriter::new(fs::File::create(p)?))
    }
}

pub fn write_sweep_csv<W: Write>(mut w: W, records: &[SweepRecord]) -> Result<()> {
    writeln!(w, "epsilon,Q,a11,C1,sup_grad,argmax_radius,nodes")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt(r.epsilon),
            fmt(r.q_measured),
            fmt(r.a11_measured),
            fmt(r.c1),
            fmt(r.sup_grad),
            fmt(r.argmax_radius),
            r.mesh_stats.nodes
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_profile_csv<W: Write>(mut w: W, profile: &[ProfilePoint]) -> Result<()> {
    writeln!(w, "radius,grad_u_bottom,grad_u_max_across_gap")?;
    for p in profile {
        writeln!(w, "{},{},{}", fmt(p.radius), fmt(p.bottom), fmt(p.across_gap))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        let x = std::f64::consts::PI / 7.0;
        let s = fmt(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
        assert_eq!(s.split('e').next().unwrap().len(), 18);
    }

    #[test]
    fn hash_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
