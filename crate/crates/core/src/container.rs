//! Binary snapshot container shared by datasets, predictions and checkpoints.
//!
//! ```text
//! "QRDS" | version u32 | section count u32
//! per section: name len u32 | name utf-8 | ndims u32 | dims u64... | f64 payload
//! footer:      dt_record f64 | n_spacing u32 | spacing f64...
//! ```
//! Everything is little-endian; payloads are row-major.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::diffcore::Tensor;
use crate::pde::{Field, Grid, TimeSeriesDataset};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"QRDS";
pub const VERSION: u32 = 1;

/// One named array.
#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub name: String,
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

impl Section {
    pub fn new(name: impl Into<String>, dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let name = name.into();
        let expected: usize = dims.iter().product();
        if dims.is_empty() || expected != data.len() {
            return Err(Error::dim(format!(
                "section {name}: dims {dims:?} do not match {} values",
                data.len()
            )));
        }
        Ok(Self { name, dims, data })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotContainer {
    pub sections: Vec<Section>,
    pub dt_record: f64,
    pub spacing: Vec<f64>,
}

impl SnapshotContainer {
    /// One section per field with dims `[n_t, grid...]`.
    pub fn from_dataset(d: &TimeSeriesDataset) -> Result<Self> {
        d.validate()?;
        let sections = d
            .fields
            .iter()
            .map(|f| {
                let mut dims = vec![f.snapshots.len()];
                dims.extend(&d.grid.dims);
                Section::new(f.name.clone(), dims, f.snapshots.concat())
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            sections,
            dt_record: d.dt_record,
            spacing: d.grid.spacing.clone(),
        })
    }

    /// Inverse of [`Self::from_dataset`]. The first snapshot is placed at
    /// `t0 = dt_record`; solver metadata is not stored.
    pub fn to_dataset(&self) -> Result<TimeSeriesDataset> {
        let first = self
            .sections
            .first()
            .ok_or_else(|| Error::Format("container has no sections".into()))?;
        if first.dims.len() < 2 {
            return Err(Error::Format(format!(
                "section {} is not a time series",
                first.name
            )));
        }
        let grid_dims = first.dims[1..].to_vec();
        let n_points: usize = grid_dims.iter().product();
        let fields = self
            .sections
            .iter()
            .map(|s| {
                if s.dims[1..] != grid_dims[..] || s.dims[0] != first.dims[0] {
                    return Err(Error::Format(format!(
                        "section {} has dims {:?}, expected {:?}",
                        s.name, s.dims, first.dims
                    )));
                }
                Ok(Field {
                    name: s.name.clone(),
                    snapshots: s.data.chunks(n_points).map(<[f64]>::to_vec).collect(),
                })
            })
            .collect::<Result<_>>()?;
        let d = TimeSeriesDataset {
            fields,
            grid: Grid {
                dims: grid_dims,
                spacing: self.spacing.clone(),
            },
            dt_record: self.dt_record,
            t0: self.dt_record,
            solver: None,
        };
        d.validate()?;
        Ok(d)
    }

    /// Checkpoint layout: one section per named tensor, no footer data.
    pub fn from_tensors<'a>(named: impl IntoIterator<Item = (String, &'a Tensor)>) -> Result<Self> {
        let sections = named
            .into_iter()
            .map(|(name, t)| Section::new(name, t.shape().to_vec(), t.data().to_vec()))
            .collect::<Result<_>>()?;
        Ok(Self {
            sections,
            dt_record: 0.0,
            spacing: Vec::new(),
        })
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn tensor(&self, name: &str) -> Result<Tensor> {
        let s = self
            .section(name)
            .ok_or_else(|| Error::Format(format!("missing section {name}")))?;
        Tensor::new(s.dims.clone(), s.data.clone())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let payload: usize = self.sections.iter().map(|s| s.data.len() * 8).sum();
        let mut out = Vec::with_capacity(payload + 64);
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, VERSION);
        put_u32(&mut out, self.sections.len() as u32);
        for s in &self.sections {
            put_u32(&mut out, s.name.len() as u32);
            out.extend_from_slice(s.name.as_bytes());
            put_u32(&mut out, s.dims.len() as u32);
            for &d in &s.dims {
                out.extend_from_slice(&(d as u64).to_le_bytes());
            }
            for &v in &s.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out.extend_from_slice(&self.dt_record.to_le_bytes());
        put_u32(&mut out, self.spacing.len() as u32);
        for &h in &self.spacing {
            out.extend_from_slice(&h.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("bad magic bytes".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let n_sections = r.u32()? as usize;
        let mut sections = Vec::with_capacity(n_sections.min(1024));
        for _ in 0..n_sections {
            let len = r.u32()? as usize;
            let name = std::str::from_utf8(r.take(len)?)
                .map_err(|_| Error::Format("section name is not UTF-8".into()))?
                .to_owned();
            let ndims = r.u32()? as usize;
            let mut dims = Vec::with_capacity(ndims.min(16));
            for _ in 0..ndims {
                let d = u64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"));
                dims.push(
                    usize::try_from(d).map_err(|_| Error::Format("dimension overflow".into()))?,
                );
            }
            let count = dims
                .iter()
                .try_fold(1usize, |a, &d| a.checked_mul(d))
                .filter(|c| c.checked_mul(8).is_some_and(|b| b <= r.remaining()))
                .ok_or_else(|| Error::Format(format!("section {name} payload is truncated")))?;
            let data = r.f64s(count)?;
            sections
                .push(Section::new(name, dims, data).map_err(|e| Error::Format(e.to_string()))?);
        }
        let dt_record = r.f64s(1)?[0];
        let n_spacing = r.u32()? as usize;
        let spacing = r.f64s(n_spacing)?;
        if r.remaining() != 0 {
            return Err(Error::Format(format!("{} trailing bytes", r.remaining())));
        }
        Ok(Self {
            sections,
            dt_record,
            spacing,
        })
    }

    /// Writes to a sibling temporary file and renames it into place.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), &self.to_bytes())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

/// Write-to-temp then rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
    }
    let mut tmp_name = path
        .file_name()
        .ok_or_else(|| Error::config(format!("{} is not a file path", path.display())))?
        .to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if n > self.remaining() {
            return Err(Error::Format("unexpected end of file".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(
            n.checked_mul(8)
                .ok_or_else(|| Error::Format("size overflow".into()))?,
        )?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}
