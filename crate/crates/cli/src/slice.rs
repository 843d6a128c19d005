use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qrnn_core::container::write_atomic;
use qrnn_core::pde::TimeSeriesDataset;
use qrnn_core::Error;

/// A 2D cut through one snapshot of one field.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceSpec {
    pub field: String,
    pub time: usize,
    /// Index along the first axis of a 3D grid.
    pub layer: Option<usize>,
}

impl SliceSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| {
            p.parse::<usize>()
                .map_err(|_| format!("`{p}` is not an index"))
        };
        match parts[..] {
            [f, t] if !f.is_empty() => Ok(Self {
                field: f.into(),
                time: num(t)?,
                layer: None,
            }),
            [f, t, k] if !f.is_empty() => Ok(Self {
                field: f.into(),
                time: num(t)?,
                layer: Some(num(k)?),
            }),
            _ => Err(format!("expected FIELD:T or FIELD:T:K, got `{s}`")),
        }
    }

    pub fn stem(&self) -> String {
        match self.layer {
            Some(k) => format!("{}_t{}_k{k}", self.field, self.time),
            None => format!("{}_t{}", self.field, self.time),
        }
    }

    /// Rows of the 2D slice, one CSV line per grid row.
    pub fn extract(&self, d: &TimeSeriesDataset) -> Result<Vec<Vec<f64>>, Error> {
        let field = d
            .field(&self.field)
            .ok_or_else(|| Error::Index(format!("no field named {}", self.field)))?;
        let snap = field.snapshots.get(self.time).ok_or_else(|| {
            Error::Index(format!(
                "snapshot {} out of range ({} available)",
                self.time,
                field.snapshots.len()
            ))
        })?;
        let (offset, rows, cols) = match (&d.grid.dims[..], self.layer) {
            ([r, c], None) => (0, *r, *c),
            ([n, r, c], Some(k)) if k < *n => (k * r * c, *r, *c),
            ([_, _, _], Some(k)) => return Err(Error::Index(format!("layer {k} out of range"))),
            (dims, _) => {
                return Err(Error::Dimension(format!(
                    "slice {} does not fit grid {dims:?}",
                    self.stem()
                )))
            }
        };
        Ok((0..rows)
            .map(|i| snap[offset + i * cols..offset + (i + 1) * cols].to_vec())
            .collect())
    }

    pub fn write(&self, d: &TimeSeriesDataset, path: &Path) -> Result<(), Error> {
        let mut s = String::new();
        for row in self.extract(d)? {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        write_atomic(path, s.as_bytes())
    }
}

/// `data.qrds` → `data_u_t3.csv`
pub fn sibling(path: &Path, spec: &SliceSpec) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("slice");
    path.with_file_name(format!("{stem}_{}.csv", spec.stem()))
}
