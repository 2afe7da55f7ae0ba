//! Disk cache for realized groups: one binary file per (q, tower, dim,
//! flavor). Reloads are bit-exact, reproducing the identical element order
//! and class numbering, because representatives and class ids are stored
//! verbatim rather than recomputed.

use crate::forms::FormedSpace;
use crate::groups::{realize, realize_gl, ConjClass, GroupKind, GroupRealization};
use crate::scalars::FieldCtx;
use crate::{Error, Result};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

const MAGIC: &[u8; 4] = b"FQGC";
const VERSION: u32 = 1;

/// Cache directory resolution: the FQTHETA_CACHE_DIR environment variable
/// when set, otherwise `fqtheta-cache` under the system temp directory.
pub fn default_cache_dir() -> PathBuf {
    match std::env::var_os("FQTHETA_CACHE_DIR") {
        Some(d) => PathBuf::from(d),
        None => std::env::temp_dir().join("fqtheta-cache"),
    }
}

/// One cached group file as seen by maintenance commands.
#[derive(Debug, Clone)]
pub struct CacheEntry {
    pub name: String,
    pub bytes: u64,
    /// Header magic or format version does not match the current writer.
    pub stale: bool,
}

/// Deterministic listing of the cache directory, sorted by file name. A
/// missing directory lists as empty.
pub fn list_entries(dir: &Path) -> Result<Vec<CacheEntry>> {
    let mut out = Vec::new();
    let rd = match std::fs::read_dir(dir) {
        Ok(rd) => rd,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
        Err(e) => return Err(e.into()),
    };
    for entry in rd {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if !name.starts_with("group_") || !name.ends_with(".bin") {
            continue;
        }
        let bytes = entry.metadata()?.len();
        let mut head = [0u8; 8];
        let stale = match std::fs::File::open(entry.path()).and_then(|mut f| f.read_exact(&mut head)) {
            Ok(()) => &head[0..4] != MAGIC || u32::from_le_bytes(head[4..8].try_into().unwrap()) != VERSION,
            Err(_) => true,
        };
        out.push(CacheEntry { name, bytes, stale });
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

/// Remove every cached group file; returns how many were deleted.
pub fn clear_cache(dir: &Path) -> Result<usize> {
    let mut n = 0;
    for e in list_entries(dir)? {
        std::fs::remove_file(dir.join(&e.name))?;
        n += 1;
    }
    Ok(n)
}

fn kind_tag(kind: GroupKind) -> &'static str {
    match kind {
        GroupKind::Isometry => "iso",
        GroupKind::Special => "spe",
        GroupKind::GeneralLinear => "gl",
    }
}

fn file_name(q: usize, tower_label: &str, dim: usize, kind: GroupKind) -> String {
    format!("group_q{q}_{tower_label}_d{dim}_{}.bin", kind_tag(kind))
}

fn write_group(path: &Path, g: &GroupRealization) -> Result<()> {
    let mut buf: Vec<u8> = Vec::with_capacity(16 + g.elements.len() * 12);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(g.field.q as u32).to_le_bytes());
    buf.extend_from_slice(&(g.dim as u32).to_le_bytes());
    buf.extend_from_slice(&g.order.to_le_bytes());
    buf.extend_from_slice(&(g.classes.len() as u32).to_le_bytes());
    for &e in &g.elements {
        buf.extend_from_slice(&e.to_le_bytes());
    }
    for &c in &g.class_of {
        buf.extend_from_slice(&c.to_le_bytes());
    }
    let tmp = path.with_extension("tmp");
    std::fs::File::create(&tmp)?.write_all(&buf)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn read_group(
    path: &Path,
    field: &Arc<FieldCtx>,
    kind: GroupKind,
    space: Option<&FormedSpace>,
    dim: usize,
) -> Result<GroupRealization> {
    let mut raw = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut raw)?;
    let bad = |msg: &str| Error::Cache(format!("{}: {msg}", path.display()));
    if raw.len() < 28 || &raw[0..4] != MAGIC {
        return Err(bad("bad magic"));
    }
    let rd_u32 = |off: usize| u32::from_le_bytes(raw[off..off + 4].try_into().unwrap());
    let rd_u64 = |off: usize| u64::from_le_bytes(raw[off..off + 8].try_into().unwrap());
    if rd_u32(4) != VERSION {
        return Err(bad("format version mismatch"));
    }
    if rd_u32(8) as usize != field.q || rd_u32(12) as usize != dim {
        return Err(bad("header does not match requested group"));
    }
    let order = rd_u64(16);
    let n_classes = rd_u32(24) as usize;
    let n = order as usize;
    let expect_len = 28 + n * 8 + n * 4;
    if raw.len() != expect_len {
        return Err(bad("truncated body"));
    }
    let mut elements = Vec::with_capacity(n);
    for i in 0..n {
        elements.push(rd_u64(28 + i * 8));
    }
    let base = 28 + n * 8;
    let mut class_of = Vec::with_capacity(n);
    for i in 0..n {
        class_of.push(rd_u32(base + i * 4));
    }
    if elements.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("element list not sorted"));
    }
    // Reconstruct class reps (first element of each class in sorted order)
    // and sizes.
    let mut classes = vec![ConjClass { rep: u64::MAX, size: 0 }; n_classes];
    for (i, &c) in class_of.iter().enumerate() {
        let c = c as usize;
        if c >= n_classes {
            return Err(bad("class id out of range"));
        }
        if classes[c].rep == u64::MAX {
            classes[c].rep = elements[i];
        }
        classes[c].size += 1;
    }
    if classes.iter().any(|c| c.size == 0) {
        return Err(bad("empty class"));
    }
    Ok(GroupRealization {
        field: field.clone(),
        kind,
        space: space.cloned(),
        dim,
        elements,
        class_of,
        classes,
        generators: Vec::new(),
        order,
    })
}

/// Realize an isometry group, reusing a cached enumeration when available.
/// A corrupt cache entry is rebuilt, not trusted.
pub fn realize_cached(
    cache_dir: Option<&Path>,
    space: &FormedSpace,
    kind: GroupKind,
    bound: u64,
) -> Result<GroupRealization> {
    let fname = file_name(space.field.q, space.tower.label(), space.dim, kind);
    if let Some(dir) = cache_dir {
        let path: PathBuf = dir.join(&fname);
        if path.exists() {
            if let Ok(g) = read_group(&path, &space.field, kind, Some(space), space.dim) {
                return Ok(g);
            }
        }
    }
    let g = realize(space, kind, bound)?;
    if let Some(dir) = cache_dir {
        std::fs::create_dir_all(dir)?;
        write_group(&dir.join(&fname), &g)?;
    }
    Ok(g)
}

/// Cached GL realization.
pub fn realize_gl_cached(
    cache_dir: Option<&Path>,
    field: &Arc<FieldCtx>,
    n: usize,
    bound: u64,
) -> Result<GroupRealization> {
    let fname = file_name(field.q, "GL", n, GroupKind::GeneralLinear);
    if let Some(dir) = cache_dir {
        let path = dir.join(&fname);
        if path.exists() {
            if let Ok(g) = read_group(&path, field, GroupKind::GeneralLinear, None, n) {
                return Ok(g);
            }
        }
    }
    let g = realize_gl(field, n, bound)?;
    if let Some(dir) = cache_dir {
        std::fs::create_dir_all(dir)?;
        write_group(&dir.join(&fname), &g)?;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{standard_space, Tower};
    use crate::scalars::make_field;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let f = make_field(3).unwrap();
        let v = standard_space(&f, Tower::OOddPlus, 3).unwrap();
        let fresh = realize_cached(Some(dir.path()), &v, GroupKind::Isometry, 1 << 24).unwrap();
        let reloaded = realize_cached(Some(dir.path()), &v, GroupKind::Isometry, 1 << 24).unwrap();
        assert_eq!(fresh.elements, reloaded.elements);
        assert_eq!(fresh.class_of, reloaded.class_of);
        assert_eq!(fresh.order, reloaded.order);
        assert_eq!(fresh.classes.len(), reloaded.classes.len());
        for (a, b) in fresh.classes.iter().zip(&reloaded.classes) {
            assert_eq!(a.rep, b.rep);
            assert_eq!(a.size, b.size);
        }
    }

    #[test]
    fn corrupt_cache_is_rebuilt() {
        let dir = tempfile::tempdir().unwrap();
        let f = make_field(3).unwrap();
        let v = standard_space(&f, Tower::OEvenMinus, 2).unwrap();
        let fresh = realize_cached(Some(dir.path()), &v, GroupKind::Isometry, 1 << 24).unwrap();
        // Clobber the one cache file.
        let entry = std::fs::read_dir(dir.path())
            .unwrap()
            .next()
            .unwrap()
            .unwrap()
            .path();
        std::fs::write(&entry, b"garbage").unwrap();
        let rebuilt = realize_cached(Some(dir.path()), &v, GroupKind::Isometry, 1 << 24).unwrap();
        assert_eq!(fresh.elements, rebuilt.elements);
    }
}
