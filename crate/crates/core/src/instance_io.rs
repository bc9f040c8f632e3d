//! Line-delimited instance files.
//!
//! One JSON object per line, tagged by `kind`:
//!
//! ```text
//! {"kind":"meta","objective":"driver-profit","cost_model":{"speed_kmh":30.0,...}}
//! {"kind":"driver","id":1,"source":{"lat":41.15,"lon":-8.61},...}
//! {"kind":"task","id":1,"publish_time":0.0,...}
//! ```
//!
//! Field names are those of [`Driver`], [`Task`] and [`CostModel`]. Exactly
//! one `meta` record is required; blank lines and lines starting with `#`
//! are skipped.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::CostModel;
use crate::market::{Driver, Instance, Objective, Task};

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum Record {
    Meta { objective: Objective, cost_model: CostModel },
    Driver(Driver),
    Task(Task),
}

pub fn write_instance<W: Write>(inst: &Instance, w: W) -> Result<()> {
    let mut w = BufWriter::new(w);
    let mut line = |r: &Record| -> Result<()> {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
        Ok(())
    };
    line(&Record::Meta { objective: inst.objective, cost_model: inst.cost_model })?;
    for d in &inst.drivers {
        line(&Record::Driver(d.clone()))?;
    }
    for t in &inst.tasks {
        line(&Record::Task(t.clone()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_instance<R: Read>(r: R) -> Result<Instance> {
    let mut meta = None;
    let mut drivers = Vec::new();
    let mut tasks = Vec::new();
    for (n, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let rec: Record = serde_json::from_str(line).map_err(|e| Error::Format(format!("line {}: {e}", n + 1)))?;
        match rec {
            Record::Meta { objective, cost_model } => {
                if meta.replace((objective, cost_model)).is_some() {
                    return Err(Error::Format(format!("line {}: second meta record", n + 1)));
                }
            }
            Record::Driver(d) => drivers.push(d),
            Record::Task(t) => tasks.push(t),
        }
    }
    let (objective, cost_model) = meta.ok_or_else(|| Error::Format("missing meta record".into()))?;
    Instance::new(drivers, tasks, cost_model, objective)
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    write_instance(inst, File::create(path)?)
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    read_instance(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{small_market, SmallMarket};

    #[test]
    fn round_trip() {
        let inst = small_market(&SmallMarket::default(), 4);
        let mut buf = Vec::new();
        write_instance(&inst, &mut buf).unwrap();
        assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), 1 + inst.drivers.len() + inst.tasks.len());
        assert_eq!(read_instance(&buf[..]).unwrap(), inst);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(read_instance(&b""[..]), Err(Error::Format(_))));
        let e = read_instance(&b"{\"kind\":\"meta\"}\n"[..]).unwrap_err();
        assert!(e.to_string().contains("line 1"), "{e}");
        let mut buf = Vec::new();
        write_instance(&small_market(&SmallMarket::default(), 1), &mut buf).unwrap();
        let first = buf.split(|&b| b == b'\n').next().unwrap().to_vec();
        buf.extend_from_slice(&first);
        assert!(matches!(read_instance(&buf[..]), Err(Error::Format(_))));
    }
}
