//! Binary container for trained models and feature matrices: a text manifest
//! (metadata plus a named-array index) followed by self-describing array
//! records of 64-bit little-endian reals.
//!
//! Layout:
//!
//! ```text
//! magic "LIDM" | version u32 | manifest_len u64 | manifest utf-8
//!   | per array: name_len u32, name, ndim u32, dims u64..., data f64...
//!   | end magic "MDIL"
//! ```
//!
//! The manifest lists `key=value` metadata lines followed by
//! `array:name=dim,dim` index lines in array order. On read, every stored
//! array header is cross-checked against the index, so a manifest edited to
//! the wrong shape is rejected naming the offending array, and any length
//! discrepancy (truncation, trailing bytes) is an integrity error.

use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"LIDM";
const END_MAGIC: &[u8; 4] = b"MDIL";

/// Current container format version.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedArray {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

/// Manifest metadata plus named arrays, in a fixed serialisation order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelContainer {
    pub metadata: Vec<(String, String)>,
    pub arrays: Vec<NamedArray>,
}

impl ModelContainer {
    pub fn new() -> Self {
        ModelContainer::default()
    }

    pub fn set_meta(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        debug_assert!(!key.contains('\n') && !key.contains('=') && !value.contains('\n'));
        self.metadata.push((key.to_string(), value));
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require_meta(&self, key: &str, path: &str) -> Result<&str> {
        self.meta(key).ok_or_else(|| Error::ContainerIntegrity {
            path: path.into(),
            detail: format!("missing metadata key {key}"),
        })
    }

    pub fn push_array(&mut self, name: &str, shape: Vec<usize>, data: Vec<f64>) -> Result<()> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: data.len(),
            });
        }
        self.arrays.push(NamedArray {
            name: name.to_string(),
            shape,
            data,
        });
        Ok(())
    }

    pub fn array(&self, name: &str, path: &str) -> Result<&NamedArray> {
        self.arrays
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| Error::ContainerIntegrity {
                path: path.into(),
                detail: format!("missing array {name}"),
            })
    }

    /// Serialise to the container byte format.
    pub fn encode(&self) -> Vec<u8> {
        let mut manifest = String::new();
        for (k, v) in &self.metadata {
            manifest.push_str(&format!("{k}={v}\n"));
        }
        for a in &self.arrays {
            let dims: Vec<String> = a.shape.iter().map(|d| d.to_string()).collect();
            manifest.push_str(&format!("array:{}={}\n", a.name, dims.join(",")));
        }

        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(manifest.len() as u64).to_le_bytes());
        out.extend_from_slice(manifest.as_bytes());
        for a in &self.arrays {
            out.extend_from_slice(&(a.name.len() as u32).to_le_bytes());
            out.extend_from_slice(a.name.as_bytes());
            out.extend_from_slice(&(a.shape.len() as u32).to_le_bytes());
            for &d in &a.shape {
                out.extend_from_slice(&(d as u64).to_le_bytes());
            }
            for &v in &a.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out.extend_from_slice(END_MAGIC);
        out
    }

    /// Parse the container byte format. `path` is used only in error messages.
    pub fn decode(bytes: &[u8], path: &str) -> Result<Self> {
        let integrity = |detail: String| Error::ContainerIntegrity {
            path: path.into(),
            detail,
        };
        let mut cursor = Cursor { bytes, pos: 0 };

        let magic = cursor.take(4).map_err(|_| integrity("file shorter than header".into()))?;
        if magic != MAGIC {
            return Err(integrity("bad magic".into()));
        }
        let version = u32::from_le_bytes(
            cursor
                .take(4)
                .map_err(|_| integrity("truncated version field".into()))?
                .try_into()
                .unwrap(),
        );
        if version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let manifest_len = u64::from_le_bytes(
            cursor
                .take(8)
                .map_err(|_| integrity("truncated manifest length".into()))?
                .try_into()
                .unwrap(),
        ) as usize;
        let manifest_bytes = cursor
            .take(manifest_len)
            .map_err(|_| integrity("truncated manifest".into()))?;
        let manifest = std::str::from_utf8(manifest_bytes)
            .map_err(|_| integrity("manifest is not UTF-8".into()))?;

        let mut metadata = Vec::new();
        let mut index: Vec<(String, Vec<usize>)> = Vec::new();
        for line in manifest.lines() {
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("array:") {
                let (name, dims) = rest
                    .split_once('=')
                    .ok_or_else(|| integrity(format!("bad index line: {line}")))?;
                let shape: Vec<usize> = dims
                    .split(',')
                    .map(|d| d.parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| integrity(format!("bad shape in index line: {line}")))?;
                index.push((name.to_string(), shape));
            } else {
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| integrity(format!("bad metadata line: {line}")))?;
                metadata.push((k.to_string(), v.to_string()));
            }
        }

        let mut arrays = Vec::with_capacity(index.len());
        for (expected_name, expected_shape) in &index {
            let name_len = u32::from_le_bytes(
                cursor
                    .take(4)
                    .map_err(|_| integrity("truncated array header".into()))?
                    .try_into()
                    .unwrap(),
            ) as usize;
            let name = std::str::from_utf8(
                cursor
                    .take(name_len)
                    .map_err(|_| integrity("truncated array name".into()))?,
            )
            .map_err(|_| integrity("array name is not UTF-8".into()))?
            .to_string();
            if &name != expected_name {
                return Err(integrity(format!(
                    "array order mismatch: found {name}, manifest says {expected_name}"
                )));
            }
            let ndim = u32::from_le_bytes(
                cursor
                    .take(4)
                    .map_err(|_| integrity("truncated array rank".into()))?
                    .try_into()
                    .unwrap(),
            ) as usize;
            let mut shape = Vec::with_capacity(ndim);
            for _ in 0..ndim {
                let d = u64::from_le_bytes(
                    cursor
                        .take(8)
                        .map_err(|_| integrity("truncated array dims".into()))?
                        .try_into()
                        .unwrap(),
                ) as usize;
                shape.push(d);
            }
            if &shape != expected_shape {
                return Err(Error::ArrayShapeMismatch {
                    name,
                    expected: expected_shape.clone(),
                    actual: shape,
                });
            }
            let count: usize = shape.iter().product();
            let raw = cursor
                .take(count * 8)
                .map_err(|_| integrity(format!("truncated data for array {name}")))?;
            let data: Vec<f64> = raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            arrays.push(NamedArray { name, shape, data });
        }

        let end = cursor
            .take(4)
            .map_err(|_| integrity("missing end marker".into()))?;
        if end != END_MAGIC {
            return Err(integrity("bad end marker".into()));
        }
        if cursor.pos != bytes.len() {
            return Err(integrity(format!(
                "{} trailing bytes after end marker",
                bytes.len() - cursor.pos
            )));
        }
        Ok(ModelContainer { metadata, arrays })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.encode()).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::decode(&bytes, &path.display().to_string())
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], ()> {
        if self.pos + n > self.bytes.len() {
            return Err(());
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }
}
