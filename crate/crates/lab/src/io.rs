//! File formats.
//!
//! * configurations: JSON `{"N": int, "a": float, "heights": [int]}`
//! * empirical measures: CSV `site,mass`
//! * trajectories: CSV `time,site,height` (or `time,site,occupancy` for `Z`)
//! * event logs: JSON lines, one object per clock ring
//! * tabulated profiles: CSV `x,u0`

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use elex_core::measure::EmpiricalMeasure;
use elex_core::profile::Profile;
use elex_core::zero_range::{EventKind, EventLogEntry, EventSink};
use elex_core::{Configuration, ExclusionConfiguration, GridDensity};
use serde::{Deserialize, Serialize};

use crate::error::{csv_err, io_err, json_err, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigRecord {
    #[serde(rename = "N")]
    pub n: usize,
    pub a: f64,
    pub heights: Vec<u32>,
}

impl ConfigRecord {
    pub fn new(c: &Configuration, a: f64) -> Self {
        Self { n: c.n(), a, heights: c.heights().to_vec() }
    }

    /// Checks the length and admissibility of the stored heights.
    pub fn configuration(&self) -> Result<Configuration> {
        if self.heights.len() != self.n {
            return Err(Error::Input(format!("N = {} but {} heights", self.n, self.heights.len())));
        }
        Ok(Configuration::admissible(self.heights.clone())?)
    }
}

pub fn read_config_json(path: &Path) -> Result<ConfigRecord> {
    let f = File::open(path).map_err(io_err(path))?;
    serde_json::from_reader(f).map_err(json_err(path))
}

pub fn write_config_json(path: &Path, rec: &ConfigRecord) -> Result<()> {
    let f = File::create(path).map_err(io_err(path))?;
    serde_json::to_writer(BufWriter::new(f), rec).map_err(json_err(path))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureRow {
    pub site: f64,
    pub mass: f64,
}

pub fn write_measure_csv<W: Write>(w: W, m: &EmpiricalMeasure) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["site", "mass"])?;
    for (site, mass) in m.atoms() {
        wr.write_record([site.to_string(), mass.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_measure_csv<R: Read>(r: R) -> std::result::Result<EmpiricalMeasure, Error> {
    let mut rd = csv::Reader::from_reader(r);
    let mut atoms = Vec::new();
    for row in rd.deserialize::<MeasureRow>() {
        let row = row.map_err(|e| Error::Input(e.to_string()))?;
        atoms.push((row.site, row.mass));
    }
    EmpiricalMeasure::from_atoms(atoms).ok_or_else(|| Error::Input("masses must be finite and non-negative".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub time: f64,
    pub site: f64,
    pub value: u32,
}

/// Writes `time,site,<column>` with one row per site and observation.
pub fn write_trajectory_csv<W: Write>(w: W, column: &str, frames: &[(f64, Vec<u32>)]) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["time", "site", column])?;
    for (t, values) in frames {
        let n = values.len();
        for (i, v) in values.iter().enumerate() {
            let site = elex_core::lattice::site_position(n, i);
            wr.write_record([t.to_string(), site.to_string(), v.to_string()])?;
        }
    }
    wr.flush()?;
    Ok(())
}

pub fn x_frames(times: &[f64], states: &[Configuration]) -> Vec<(f64, Vec<u32>)> {
    times.iter().zip(states).map(|(&t, c)| (t, c.heights().to_vec())).collect()
}

pub fn z_frames(times: &[f64], states: &[ExclusionConfiguration]) -> Vec<(f64, Vec<u32>)> {
    times.iter().zip(states).map(|(&t, z)| (t, z.occupancy().iter().map(|&b| u32::from(b)).collect())).collect()
}

pub fn read_trajectory_csv<R: Read>(r: R) -> Result<Vec<TrajectoryRow>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| Error::Input(e.to_string()))?;
        let field = |i: usize| rec.get(i).ok_or_else(|| Error::Input("short trajectory row".into()));
        let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Input(e.to_string()));
        out.push(TrajectoryRow {
            time: parse(field(0)?)?,
            site: parse(field(1)?)?,
            value: field(2)?.parse().map_err(|e: std::num::ParseIntError| Error::Input(e.to_string()))?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKindRecord {
    JumpLeft,
    JumpRight,
    Drift,
    Suppressed,
}

impl From<EventKind> for EventKindRecord {
    fn from(k: EventKind) -> Self {
        match k {
            EventKind::JumpLeft => Self::JumpLeft,
            EventKind::JumpRight => Self::JumpRight,
            EventKind::Drift => Self::Drift,
            EventKind::Suppressed => Self::Suppressed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKindRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub site: Option<usize>,
}

impl From<&EventLogEntry> for EventRecord {
    fn from(e: &EventLogEntry) -> Self {
        Self { time: e.time, kind: e.kind().into(), site: e.site }
    }
}

/// Streams events as JSON lines. The first write error is kept and later
/// events are dropped.
pub struct JsonLinesSink<W: Write> {
    out: W,
    error: Option<std::io::Error>,
    written: u64,
}

impl<W: Write> JsonLinesSink<W> {
    pub fn new(out: W) -> Self {
        Self { out, error: None, written: 0 }
    }

    pub fn written(&self) -> u64 {
        self.written
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write, S: ?Sized> EventSink<S> for JsonLinesSink<W> {
    fn record(&mut self, entry: &EventLogEntry) {
        if self.error.is_some() {
            return;
        }
        let res = serde_json::to_writer(&mut self.out, &EventRecord::from(entry))
            .map_err(std::io::Error::from)
            .and_then(|()| self.out.write_all(b"\n"));
        match res {
            Ok(()) => self.written += 1,
            Err(e) => self.error = Some(e),
        }
    }
}

pub fn read_events<R: std::io::BufRead>(r: R) -> Result<Vec<EventRecord>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line.map_err(|e| Error::Input(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Input(e.to_string()))?);
    }
    Ok(out)
}

/// A named profile (`flat`, `half-step`, `step:<h>`, `bump:<amp>`) or a CSV
/// file of `x,u0` samples.
pub fn load_profile(source: &str) -> Result<Profile> {
    if let Some(p) = Profile::named(source) {
        return Ok(p);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(Error::Input(format!("unknown profile `{source}` (not a name and no such file)")));
    }
    let mut rd = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let (mut xs, mut us) = (Vec::new(), Vec::new());
    for rec in rd.records() {
        let rec = rec.map_err(csv_err(path))?;
        let get = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Input(format!("{}: malformed row {:?}", path.display(), rec)))
        };
        xs.push(get(0)?);
        us.push(get(1)?);
    }
    let g = GridDensity::new(xs, us).ok_or_else(|| Error::Input(format!("{}: nodes must be sorted and finite", path.display())))?;
    let p = Profile::Tabulated(g);
    p.validate()?;
    Ok(p)
}

/// Initial `X` state: a configuration JSON file, or a profile sampled at `n`.
pub fn load_initial(source: &str, n: usize) -> Result<Configuration> {
    let path = Path::new(source);
    if path.extension().is_some_and(|e| e == "json") {
        let rec = read_config_json(path)?;
        if rec.n != n {
            return Err(Error::Input(format!("{} holds N = {}, expected {n}", path.display(), rec.n)));
        }
        return rec.configuration();
    }
    Ok(elex_core::sample_initial(&load_profile(source)?, n)?)
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}
