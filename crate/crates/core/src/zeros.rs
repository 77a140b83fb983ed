//! Zeros of `k_n` (Dirichlet poles) and `D_n` (Robin poles).
//!
//! Seeds come from the uniform asymptotic map in [`crate::special`]; each
//! seed in the lower half-plane is polished by Newton on the overflow-free
//! ratio `f / f'` and its conjugate is filled in by symmetry.

use std::cmp::Ordering;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryKind;
use crate::error::{Error, Result};
use crate::special::{dirichlet_zeta, eval_dn_log_ratio, eval_kn_log_ratio, invert_zeta, robin_xi};

/// Newton stops once `|f / f'| / |z|` drops below this.
pub const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX_ITER: usize = 40;
const MAX_HALVINGS: usize = 30;

fn kind_tag(kind: BoundaryKind) -> u8 {
    match kind {
        BoundaryKind::Dirichlet => 0,
        BoundaryKind::Robin => 1,
    }
}

fn kind_from_tag(tag: u8) -> Result<BoundaryKind> {
    match tag {
        0 => Ok(BoundaryKind::Dirichlet),
        1 => Ok(BoundaryKind::Robin),
        t => Err(Error::CacheFormat(format!("unknown kind tag {t}"))),
    }
}

/// All zeros for one `(kind, n)`, ascending by real part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroTable {
    pub n: usize,
    pub kind: BoundaryKind,
    pub zeros: Vec<Complex64>,
    /// `|f(z) / (z f'(z))|` at each zero.
    pub residuals: Vec<f64>,
    /// Newton steps spent on each zero (0 for exact or cached entries).
    #[serde(default)]
    pub iterations: Vec<usize>,
}

impl ZeroTable {
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_iterations(&self) -> usize {
        self.iterations.iter().cloned().max().unwrap_or(0)
    }
}

fn newton_ratio(kind: BoundaryKind, n: usize, z: Complex64) -> Result<Complex64> {
    match kind {
        BoundaryKind::Dirichlet => eval_kn_log_ratio(n, z),
        BoundaryKind::Robin => eval_dn_log_ratio(n, z),
    }
}

/// Relative Newton residual `|f / (z f')|`.
pub fn relative_residual(kind: BoundaryKind, n: usize, z: Complex64) -> Result<f64> {
    if z == Complex64::new(0.0, 0.0) {
        // only the conventional Robin n = 0 zero lives here
        return Ok(0.0);
    }
    Ok((newton_ratio(kind, n, z)? / z).norm())
}

/// Newton from `seed`; returns (zero, iterations, residual).
fn refine(
    kind: BoundaryKind,
    n: usize,
    seed: Complex64,
    real: bool,
    index: usize,
) -> Result<(Complex64, usize, f64)> {
    let max_step = 0.25 * n as f64;
    let mut z = seed;
    if real {
        z.im = 0.0;
    }
    let mut ratio = newton_ratio(kind, n, z)?;
    for it in 0..NEWTON_MAX_ITER {
        if ratio.norm() < NEWTON_TOL * z.norm() {
            return Ok((z, it, ratio.norm() / z.norm()));
        }
        let mut step = ratio;
        if real {
            step.im = 0.0;
        }
        let mut next = z - step;
        let mut halvings = 0;
        while (next.re >= 0.0 || step.norm() > max_step) && halvings < MAX_HALVINGS {
            step *= 0.5;
            next = z - step;
            halvings += 1;
        }
        z = next;
        ratio = newton_ratio(kind, n, z)?;
        if !z.re.is_finite() || !z.im.is_finite() {
            break;
        }
    }
    if ratio.norm() < NEWTON_TOL * z.norm() {
        return Ok((z, NEWTON_MAX_ITER, ratio.norm() / z.norm()));
    }
    Err(Error::NonConvergence {
        what: "zero refinement",
        index,
        iterations: NEWTON_MAX_ITER,
    })
}

/// Ascending real part; conjugate pairs adjacent with the positive
/// imaginary part first.
pub(crate) fn zero_order(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then_with(|| b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal))
}

fn build(kind: BoundaryKind, n: usize) -> Result<ZeroTable> {
    let count = kind.count(n);
    if kind == BoundaryKind::Robin && n == 0 {
        return Ok(ZeroTable {
            n,
            kind,
            zeros: vec![Complex64::new(0.0, 0.0)],
            residuals: vec![0.0],
            iterations: vec![0],
        });
    }
    let nu = n as f64 + 0.5;
    let seeds = count.div_ceil(2);
    let mut entries: Vec<(Complex64, f64, usize)> = Vec::with_capacity(count);
    for j in 1..=seeds {
        let real = count % 2 == 1 && j == seeds;
        let zeta = match kind {
            BoundaryKind::Dirichlet => dirichlet_zeta(n, j),
            BoundaryKind::Robin => robin_xi(n, j),
        };
        let seed = invert_zeta(zeta)? * nu;
        let (z, it, res) = refine(kind, n, seed, real, j)?;
        if real {
            entries.push((Complex64::new(z.re, 0.0), res, it));
        } else {
            // the conjugate has the same residual by symmetry
            let lower = Complex64::new(z.re, -z.im.abs());
            entries.push((lower.conj(), res, it));
            entries.push((lower, res, it));
        }
    }
    entries.sort_by(|a, b| zero_order(&a.0, &b.0));

    let tol = 1e-8 * n.max(1) as f64;
    for a in 0..entries.len() {
        for b in (a + 1)..entries.len() {
            let sep = (entries[a].0 - entries[b].0).norm();
            if sep <= tol {
                return Err(Error::DuplicateZero {
                    n,
                    first: a,
                    second: b,
                    separation: sep,
                });
            }
        }
    }
    Ok(ZeroTable {
        n,
        kind,
        zeros: entries.iter().map(|e| e.0).collect(),
        residuals: entries.iter().map(|e| e.1).collect(),
        iterations: entries.iter().map(|e| e.2).collect(),
    })
}

/// The `n` zeros of `k_n`.
pub fn dirichlet_zeros(n: usize) -> Result<ZeroTable> {
    build(BoundaryKind::Dirichlet, n)
}

/// The `n + 1` zeros of `D_n`; `{0}` for `n = 0` by convention.
pub fn robin_zeros(n: usize) -> Result<ZeroTable> {
    build(BoundaryKind::Robin, n)
}

/// Zeros of either kind.
pub fn zeros(kind: BoundaryKind, n: usize) -> Result<ZeroTable> {
    build(kind, n)
}

/// Outcome of [`validate_zero_table`].
#[derive(Debug, Clone, Serialize)]
pub struct ZeroReport {
    pub n: usize,
    pub kind: BoundaryKind,
    pub count: usize,
    pub expected_count: usize,
    pub conjugate_closed: bool,
    pub distinct: bool,
    pub left_half_plane: bool,
    pub sorted: bool,
    pub max_residual: f64,
    /// `max |z| / n`, bounded as `n` grows.
    pub max_modulus_over_n: f64,
    pub min_real_part: f64,
    /// `-min Re z / n^{1/3}`, the empirical constant in `Re z < -A n^{1/3}`.
    pub implied_a: f64,
    pub min_neighbor_spacing: f64,
    pub max_neighbor_spacing: f64,
    pub violations: Vec<String>,
}

impl ZeroReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the structural invariants of a table and recompute its residuals.
pub fn validate_zero_table(table: &ZeroTable) -> ZeroReport {
    let n = table.n;
    let zs = &table.zeros;
    let mut violations = Vec::new();
    let expected_count = table.kind.count(n);
    if zs.len() != expected_count {
        violations.push(format!("count {} != {expected_count}", zs.len()));
    }

    let sym_tol = |z: Complex64| 1e-12 * z.norm().max(1.0);
    let conjugate_closed = zs
        .iter()
        .all(|z| zs.iter().any(|w| (w - z.conj()).norm() <= sym_tol(*z)));
    if !conjugate_closed {
        violations.push("not closed under conjugation".into());
    }

    let dist_tol = 1e-10 * n.max(1) as f64;
    let mut distinct = true;
    let mut spacings = Vec::with_capacity(zs.len());
    for (a, za) in zs.iter().enumerate() {
        let mut nearest = f64::INFINITY;
        for (b, zb) in zs.iter().enumerate() {
            if a != b {
                let d = (za - zb).norm();
                nearest = nearest.min(d);
                if d <= dist_tol {
                    distinct = false;
                }
            }
        }
        if nearest.is_finite() {
            spacings.push(nearest);
        }
    }
    if !distinct {
        violations.push("coincident zeros".into());
    }

    let conventional_origin = table.kind == BoundaryKind::Robin && n == 0;
    let left_half_plane = conventional_origin || zs.iter().all(|z| z.re < 0.0);
    if !left_half_plane {
        violations.push("zero outside the open left half-plane".into());
    }
    let sorted = zs
        .windows(2)
        .all(|w| zero_order(&w[0], &w[1]) != Ordering::Greater);
    if !sorted {
        violations.push("not sorted by ascending real part".into());
    }

    let mut max_residual: f64 = 0.0;
    for (j, z) in zs.iter().enumerate() {
        match relative_residual(table.kind, n, *z) {
            Ok(r) => max_residual = max_residual.max(r),
            Err(e) => violations.push(format!("zero {j}: {e}")),
        }
    }
    if max_residual >= 1e-12 {
        violations.push(format!("residual {max_residual:e} >= 1e-12"));
    }

    let max_mod = zs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let min_re = zs.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let min_re = if min_re.is_finite() { min_re } else { 0.0 };
    ZeroReport {
        n,
        kind: table.kind,
        count: zs.len(),
        expected_count,
        conjugate_closed,
        distinct,
        left_half_plane,
        sorted,
        max_residual,
        max_modulus_over_n: if n > 0 { max_mod / n as f64 } else { 0.0 },
        min_real_part: min_re,
        implied_a: if n > 0 {
            -min_re / (n as f64).cbrt()
        } else {
            0.0
        },
        min_neighbor_spacing: spacings.iter().cloned().fold(f64::INFINITY, f64::min),
        max_neighbor_spacing: spacings.iter().cloned().fold(0.0, f64::max),
        violations,
    }
}

const CACHE_MAGIC: &[u8; 4] = b"SWZT";
const CACHE_VERSION: u32 = 1;

/// Serialize a table in the binary cache layout.
pub fn encode_table(table: &ZeroTable) -> Vec<u8> {
    let mut out = Vec::with_capacity(17 + 24 * table.zeros.len());
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    out.push(kind_tag(table.kind));
    out.extend_from_slice(&(table.n as u32).to_le_bytes());
    out.extend_from_slice(&(table.zeros.len() as u32).to_le_bytes());
    for z in &table.zeros {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    for r in &table.residuals {
        out.extend_from_slice(&r.to_le_bytes());
    }
    out
}

/// Parse the binary cache layout.
pub fn decode_table(bytes: &[u8]) -> Result<ZeroTable> {
    let bad = |m: &str| Error::CacheFormat(m.to_string());
    if bytes.len() < 17 {
        return Err(bad("truncated header"));
    }
    if &bytes[0..4] != CACHE_MAGIC {
        return Err(bad("bad magic"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != CACHE_VERSION {
        return Err(Error::CacheFormat(format!("unsupported version {version}")));
    }
    let kind = kind_from_tag(bytes[8])?;
    let n = u32_at(9) as usize;
    let count = u32_at(13) as usize;
    if count != kind.count(n) {
        return Err(Error::CacheFormat(format!("count {count} for n = {n}")));
    }
    if bytes.len() != 17 + 24 * count {
        return Err(bad("payload length mismatch"));
    }
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let zeros = (0..count)
        .map(|j| Complex64::new(f64_at(17 + 16 * j), f64_at(25 + 16 * j)))
        .collect();
    let residuals = (0..count)
        .map(|j| f64_at(17 + 16 * count + 8 * j))
        .collect();
    Ok(ZeroTable {
        n,
        kind,
        zeros,
        residuals,
        iterations: vec![0; count],
    })
}

/// Write a table atomically (temp file in the same directory, then rename).
pub fn save_table(path: &Path, table: &ZeroTable) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "zeros".into());
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&encode_table(table))?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_table(path: &Path) -> Result<ZeroTable> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_table(&bytes)
}

/// Directory of cached tables, one file per `(kind, n)`.
#[derive(Debug, Clone)]
pub struct ZeroCache {
    dir: PathBuf,
}

impl ZeroCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ZeroCache { dir: dir.into() }
    }

    pub fn path_for(&self, kind: BoundaryKind, n: usize) -> PathBuf {
        self.dir.join(format!("{}_{n}.swzt", kind.name()))
    }

    /// Load from disk, or compute and store. Unreadable files are rebuilt.
    pub fn get(&self, kind: BoundaryKind, n: usize) -> Result<ZeroTable> {
        let path = self.path_for(kind, n);
        if let Ok(t) = load_table(&path) {
            if t.kind == kind && t.n == n {
                return Ok(t);
            }
        }
        let t = zeros(kind, n)?;
        save_table(&path, &t)?;
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn low_order_dirichlet() {
        assert!(dirichlet_zeros(0).unwrap().is_empty());
        let t = dirichlet_zeros(1).unwrap();
        assert_eq!(t.zeros.len(), 1);
        assert!((t.zeros[0] - c(-1.0, 0.0)).norm() < 1e-13);
        let t = dirichlet_zeros(2).unwrap();
        let h = 3f64.sqrt() / 2.0;
        assert!((t.zeros[0] - c(-1.5, h)).norm() < 1e-13);
        assert!((t.zeros[1] - c(-1.5, -h)).norm() < 1e-13);
    }

    #[test]
    fn low_order_robin() {
        let t = robin_zeros(0).unwrap();
        assert_eq!(t.zeros, vec![c(0.0, 0.0)]);
        // roots of z^2 + z + 1
        let t = robin_zeros(1).unwrap();
        let h = 3f64.sqrt() / 2.0;
        assert!((t.zeros[0] - c(-0.5, h)).norm() < 1e-13);
        assert!((t.zeros[1] - c(-0.5, -h)).norm() < 1e-13);
    }

    #[test]
    fn small_orders_validate() {
        for n in 0..=40 {
            for kind in [BoundaryKind::Dirichlet, BoundaryKind::Robin] {
                let t = zeros(kind, n).unwrap();
                let rep = validate_zero_table(&t);
                assert!(rep.ok(), "{kind:?} n={n}: {:?}", rep.violations);
            }
        }
    }

    #[test]
    fn broken_symmetry_is_flagged() {
        let mut t = dirichlet_zeros(6).unwrap();
        t.zeros[0].im += 1e-3;
        let rep = validate_zero_table(&t);
        assert!(!rep.conjugate_closed);
        assert!(!rep.ok());
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ZeroCache::new(dir.path());
        let a = cache.get(BoundaryKind::Robin, 17).unwrap();
        let b = cache.get(BoundaryKind::Robin, 17).unwrap();
        assert_eq!(a.zeros, b.zeros);
        assert_eq!(a.residuals, b.residuals);
        let mut bytes = encode_table(&a);
        bytes[0] = b'X';
        assert!(matches!(decode_table(&bytes), Err(Error::CacheFormat(_))));
        assert!(decode_table(&encode_table(&a)[..20]).is_err());
    }

    #[test]
    fn deterministic() {
        let a = dirichlet_zeros(77).unwrap();
        let b = dirichlet_zeros(77).unwrap();
        assert_eq!(encode_table(&a), encode_table(&b));
    }
}
