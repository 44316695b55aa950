//! Compact lookup-table space decoder.
//!
//! The cache maps each full syndrome reachable by at most `t` faults to the
//! logical class and minimum weight of a fault combination producing it.
//! Building the cache is an exhaustive enumeration of subsets of the unique
//! fault-check-matrix columns; a key collision with differing logical
//! classes is a distinguishability failure and yields a witness pair of
//! fault combinations whose XOR is a nontrivial logical with trivial full
//! syndrome.
//!
//! Decoding returns the actual recovery operator `l J xor H^{-1} s` when the
//! full syndrome is cached, and falls back to the canonical recovery
//! operator otherwise. The Meet-in-the-Middle search bridges missing
//! syndromes to cached ones through fault combinations of weight up to
//! `rho`, extending useful decoding beyond the guaranteed radius.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};
use std::io::{self, Read, Write};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::codes::CssCode;
use crate::faultcode::{FaultCheckMatrix, FaultOrigin};
use crate::gf2::BitVec;

/// The pair (error syndrome, cumulative flag vector) used as a decoding key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FullSyndrome {
    s: BitVec,
    f: BitVec,
}

impl FullSyndrome {
    pub fn new(s: BitVec, f: BitVec) -> Self {
        assert_eq!(s.len(), f.len(), "syndrome and flag lengths differ");
        Self { s, f }
    }

    pub fn trivial(r: usize) -> Self {
        Self::new(BitVec::zeros(r), BitVec::zeros(r))
    }

    pub fn s(&self) -> &BitVec {
        &self.s
    }

    pub fn f(&self) -> &BitVec {
        &self.f
    }

    pub fn is_trivial(&self) -> bool {
        self.s.is_zero() && self.f.is_zero()
    }

    pub fn xor_assign(&mut self, other: &FullSyndrome) {
        self.s.xor_assign(&other.s);
        self.f.xor_assign(&other.f);
    }

    /// Pack into an integer key: syndrome bits 0..r-1, flag bits r..2r-1.
    pub fn pack(&self) -> u128 {
        let r = self.s.len();
        assert!(2 * r <= 128, "full syndrome too wide to pack");
        let mut key = 0u128;
        for i in self.s.iter_ones() {
            key |= 1 << i;
        }
        for i in self.f.iter_ones() {
            key |= 1 << (r + i);
        }
        key
    }

    pub fn unpack(key: u128, r: usize) -> Self {
        let mut s = BitVec::zeros(r);
        let mut f = BitVec::zeros(r);
        for i in 0..r {
            if key >> i & 1 == 1 {
                s.set(i, true);
            }
            if key >> (r + i) & 1 == 1 {
                f.set(i, true);
            }
        }
        Self { s, f }
    }
}

/// Cached value for one full syndrome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheEntry {
    pub logical_class: bool,
    /// Minimum fault-combination weight producing this full syndrome.
    pub weight: u8,
}

impl CacheEntry {
    fn pack(self) -> u8 {
        u8::from(self.logical_class) | (self.weight << 1)
    }

    fn unpack(byte: u8) -> Self {
        Self {
            logical_class: byte & 1 == 1,
            weight: byte >> 1,
        }
    }
}

/// Outcome of a distinguishability check.
#[derive(Debug, Clone)]
pub struct DistinguishabilityReport {
    pub distinguishable: bool,
    /// Largest verified radius: the requested `t` on success, or the last
    /// radius at which the build succeeded on failure.
    pub t_eff: usize,
    pub witness: Option<ConflictWitness>,
}

/// Two fault combinations (as circuit locations of representative columns)
/// with the same full syndrome and different logical classes.
#[derive(Debug, Clone)]
pub struct ConflictWitness {
    pub combo_a: Vec<FaultOrigin>,
    pub combo_b: Vec<FaultOrigin>,
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("fault set is not distinguishable at radius {requested}; t_eff = {}", report.t_eff)]
    Indistinguishable {
        requested: usize,
        report: Box<DistinguishabilityReport>,
    },
    #[error("cache exceeded the resource cap of {cap} entries")]
    CapExceeded { cap: usize },
    #[error("search radius must satisfy t <= 127, got {0}")]
    RadiusTooLarge(usize),
}

#[derive(Debug, Error)]
pub enum TableIoError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic bytes; not a lookup table file")]
    BadMagic,
    #[error("unsupported format version {0}")]
    BadVersion(u8),
    #[error("inconsistent header fields")]
    BadHeader,
}

// Keys are syndromes, already near-uniform in the low bits after packing;
// one splitmix64 finalizer round spreads them across the table.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Default)]
pub struct KeyHasher(u64);

impl Hasher for KeyHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for chunk in bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            self.0 = mix64(self.0 ^ u64::from_le_bytes(buf));
        }
    }

    fn write_u64(&mut self, i: u64) {
        self.0 = mix64(self.0 ^ i);
    }

    fn write_u128(&mut self, i: u128) {
        self.0 = mix64(self.0 ^ (i as u64));
        self.0 = mix64(self.0 ^ ((i >> 64) as u64));
    }
}

type KeyHash = BuildHasherDefault<KeyHasher>;

trait PackedKey: Copy + Eq + std::hash::Hash {
    const ZERO: Self;
    fn xor(self, other: Self) -> Self;
    fn from_u128(key: u128) -> Self;
    fn to_u128(self) -> u128;
}

impl PackedKey for u64 {
    const ZERO: Self = 0;
    fn xor(self, other: Self) -> Self {
        self ^ other
    }
    fn from_u128(key: u128) -> Self {
        key as u64
    }
    fn to_u128(self) -> u128 {
        self as u128
    }
}

impl PackedKey for u128 {
    const ZERO: Self = 0;
    fn xor(self, other: Self) -> Self {
        self ^ other
    }
    fn from_u128(key: u128) -> Self {
        key
    }
    fn to_u128(self) -> u128 {
        self
    }
}

enum KeyMap {
    Small(HashMap<u64, u8, KeyHash>),
    Big(HashMap<u128, u8, KeyHash>),
}

impl KeyMap {
    fn len(&self) -> usize {
        match self {
            KeyMap::Small(m) => m.len(),
            KeyMap::Big(m) => m.len(),
        }
    }

    fn get_packed(&self, key: u128) -> Option<CacheEntry> {
        let byte = match self {
            KeyMap::Small(m) => m.get(&(key as u64)),
            KeyMap::Big(m) => m.get(&key),
        };
        byte.copied().map(CacheEntry::unpack)
    }

    fn sorted_entries(&self) -> Vec<(u128, u8)> {
        let mut entries: Vec<(u128, u8)> = match self {
            KeyMap::Small(m) => m.iter().map(|(&k, &v)| (k as u128, v)).collect(),
            KeyMap::Big(m) => m.iter().map(|(&k, &v)| (k, v)).collect(),
        };
        entries.sort_unstable_by_key(|&(k, _)| k);
        entries
    }
}

/// The compact lookup table: full syndrome -> (logical class, weight).
pub struct LookupTable {
    n: usize,
    r: usize,
    t: usize,
    map: KeyMap,
    combinations: u64,
    build_time: Duration,
}

/// Metrics reported by `verify`: the fault-check-matrix column counts, the
/// number of fault combinations enumerated, the cache size, and the wall
/// time of the build.
#[derive(Debug, Clone, PartialEq)]
pub struct TableMetrics {
    pub columns: usize,
    pub unique_columns: usize,
    pub fault_combinations: u64,
    pub cache_size: usize,
    pub build_time: Duration,
}

impl LookupTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generator_rows(&self) -> usize {
        self.r
    }

    /// Search radius the table was built with.
    pub fn radius(&self) -> usize {
        self.t
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.len() == 0
    }

    pub fn get(&self, sigma: &FullSyndrome) -> Option<CacheEntry> {
        self.map.get_packed(sigma.pack())
    }

    pub fn contains(&self, sigma: &FullSyndrome) -> bool {
        self.get(sigma).is_some()
    }

    fn get_key(&self, key: u128) -> Option<CacheEntry> {
        self.map.get_packed(key)
    }

    /// Serialize: magic "FQLT", version byte, n/r/t as u32 LE, entry count
    /// as u64 LE, then entries sorted by key. Each entry is the packed key
    /// (syndrome bits 0..r-1 then flag bits r..2r-1, little-endian, padded
    /// to whole bytes) followed by one byte with the logical class in bit 0
    /// and the weight in bits 1..7.
    pub fn serialize<W: Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(b"FQLT")?;
        w.write_all(&[1u8])?;
        w.write_all(&(self.n as u32).to_le_bytes())?;
        w.write_all(&(self.r as u32).to_le_bytes())?;
        w.write_all(&(self.t as u32).to_le_bytes())?;
        w.write_all(&(self.map.len() as u64).to_le_bytes())?;
        let key_bytes = (2 * self.r).div_ceil(8);
        for (key, value) in self.map.sorted_entries() {
            w.write_all(&key.to_le_bytes()[..key_bytes])?;
            w.write_all(&[value])?;
        }
        Ok(())
    }

    pub fn deserialize<R: Read>(reader: &mut R) -> Result<LookupTable, TableIoError> {
        let mut magic = [0u8; 4];
        reader.read_exact(&mut magic)?;
        if &magic != b"FQLT" {
            return Err(TableIoError::BadMagic);
        }
        let mut version = [0u8; 1];
        reader.read_exact(&mut version)?;
        if version[0] != 1 {
            return Err(TableIoError::BadVersion(version[0]));
        }
        let mut u32buf = [0u8; 4];
        reader.read_exact(&mut u32buf)?;
        let n = u32::from_le_bytes(u32buf) as usize;
        reader.read_exact(&mut u32buf)?;
        let r = u32::from_le_bytes(u32buf) as usize;
        reader.read_exact(&mut u32buf)?;
        let t = u32::from_le_bytes(u32buf) as usize;
        if n == 0 || r != (n - 1) / 2 || 2 * r > 128 {
            return Err(TableIoError::BadHeader);
        }
        let mut u64buf = [0u8; 8];
        reader.read_exact(&mut u64buf)?;
        let count = u64::from_le_bytes(u64buf) as usize;
        let key_bytes = (2 * r).div_ceil(8);
        let mut map = if 2 * r <= 64 {
            KeyMap::Small(HashMap::with_capacity_and_hasher(count, KeyHash::default()))
        } else {
            KeyMap::Big(HashMap::with_capacity_and_hasher(count, KeyHash::default()))
        };
        let mut key_buf = [0u8; 16];
        for _ in 0..count {
            key_buf.fill(0);
            reader.read_exact(&mut key_buf[..key_bytes])?;
            let key = u128::from_le_bytes(key_buf);
            let mut value = [0u8; 1];
            reader.read_exact(&mut value)?;
            match &mut map {
                KeyMap::Small(m) => {
                    m.insert(key as u64, value[0]);
                }
                KeyMap::Big(m) => {
                    m.insert(key, value[0]);
                }
            }
        }
        Ok(LookupTable {
            n,
            r,
            t,
            map,
            combinations: 0,
            build_time: Duration::ZERO,
        })
    }
}

/// Build metrics for a constructed table. Deserialized tables report zero
/// for the build-side counters.
pub fn memory_metrics(table: &LookupTable, hf: &FaultCheckMatrix) -> TableMetrics {
    TableMetrics {
        columns: hf.columns(),
        unique_columns: hf.unique().count(),
        fault_combinations: table.combinations,
        cache_size: table.len(),
        build_time: table.build_time,
    }
}

pub const DEFAULT_ENTRY_CAP: usize = 1 << 31;

/// Build the lookup cache with search radius `t`, enumerating all fault
/// combinations of 1..=t unique columns. See [`build_cache_with_cap`].
pub fn build_cache(hf: &FaultCheckMatrix, t: usize) -> Result<LookupTable, BuildError> {
    build_cache_with_cap(hf, t, DEFAULT_ENTRY_CAP)
}

/// Build the lookup cache with an explicit entry cap.
///
/// Key conflicts resolve per the two cases: same class keeps the smaller
/// weight (the incumbent on ties), different classes abort the build with a
/// distinguishability witness.
pub fn build_cache_with_cap(
    hf: &FaultCheckMatrix,
    t: usize,
    cap: usize,
) -> Result<LookupTable, BuildError> {
    if t > 127 {
        return Err(BuildError::RadiusTooLarge(t));
    }
    let started = Instant::now();
    let r = hf.generator_rows();
    let unique = hf.unique();
    let result = if 2 * r <= 64 {
        let cols: Vec<(u64, bool)> = unique
            .keys
            .iter()
            .zip(&unique.classes)
            .map(|(&k, &c)| (u64::from_u128(k), c))
            .collect();
        build_impl::<u64>(&cols, t, cap).map(|(m, combos)| (KeyMap::Small(m), combos))
    } else {
        let cols: Vec<(u128, bool)> = unique
            .keys
            .iter()
            .zip(&unique.classes)
            .map(|(&k, &c)| (k, c))
            .collect();
        build_impl::<u128>(&cols, t, cap).map(|(m, combos)| (KeyMap::Big(m), combos))
    };
    match result {
        Ok((map, combinations)) => Ok(LookupTable {
            n: hf.n(),
            r,
            t,
            map,
            combinations,
            build_time: started.elapsed(),
        }),
        Err(BuildFailure::Cap) => Err(BuildError::CapExceeded { cap }),
        Err(BuildFailure::Conflict { combo, key, stored }) => {
            let report = conflict_report(hf, t, &combo, key, stored);
            Err(BuildError::Indistinguishable {
                requested: t,
                report: Box::new(report),
            })
        }
    }
}

enum BuildFailure {
    Cap,
    Conflict {
        /// Unique-column indices of the combination that collided.
        combo: Vec<usize>,
        key: u128,
        stored: CacheEntry,
    },
}

fn build_impl<K: PackedKey>(
    cols: &[(K, bool)],
    t: usize,
    cap: usize,
) -> Result<(HashMap<K, u8, KeyHash>, u64), BuildFailure> {
    let mut estimate: u64 = 0;
    let mut acc: u128 = 1;
    for i in 1..=t.min(cols.len()) {
        acc = acc * (cols.len() - i + 1) as u128 / i as u128;
        estimate = estimate.saturating_add(acc.min(u64::MAX as u128) as u64);
    }
    let reserve = (estimate.min(140_000_000) as usize).max(16);
    let mut map: HashMap<K, u8, KeyHash> =
        HashMap::with_capacity_and_hasher(reserve, KeyHash::default());
    map.insert(
        K::ZERO,
        CacheEntry {
            logical_class: false,
            weight: 0,
        }
        .pack(),
    );
    let mut combinations = 0u64;
    let mut path: Vec<usize> = Vec::with_capacity(t);

    #[allow(clippy::too_many_arguments)]
    fn rec<K: PackedKey>(
        cols: &[(K, bool)],
        map: &mut HashMap<K, u8, KeyHash>,
        path: &mut Vec<usize>,
        combinations: &mut u64,
        start: usize,
        key: K,
        class: bool,
        depth: usize,
        t: usize,
        cap: usize,
    ) -> Result<(), BuildFailure> {
        for i in start..cols.len() {
            let next_key = key.xor(cols[i].0);
            let next_class = class ^ cols[i].1;
            path.push(i);
            *combinations += 1;
            let weight = depth as u8 + 1;
            match map.entry(next_key) {
                std::collections::hash_map::Entry::Vacant(slot) => {
                    slot.insert(
                        CacheEntry {
                            logical_class: next_class,
                            weight,
                        }
                        .pack(),
                    );
                    if map.len() > cap {
                        return Err(BuildFailure::Cap);
                    }
                }
                std::collections::hash_map::Entry::Occupied(mut slot) => {
                    let stored = CacheEntry::unpack(*slot.get());
                    if stored.logical_class != next_class {
                        return Err(BuildFailure::Conflict {
                            combo: path.clone(),
                            key: next_key.to_u128(),
                            stored,
                        });
                    }
                    if weight < stored.weight {
                        slot.insert(
                            CacheEntry {
                                logical_class: next_class,
                                weight,
                            }
                            .pack(),
                        );
                    }
                }
            }
            if depth + 1 < t {
                rec(cols, map, path, combinations, i + 1, next_key, next_class, depth + 1, t, cap)?;
            }
            path.pop();
        }
        Ok(())
    }

    if t > 0 {
        rec(
            cols,
            &mut map,
            &mut path,
            &mut combinations,
            0,
            K::ZERO,
            false,
            0,
            t,
            cap,
        )?;
    }
    Ok((map, combinations))
}

/// On a class conflict, locate the stored partner combination by direct
/// search and assemble the witness. Also determines the largest radius that
/// still builds cleanly.
fn conflict_report(
    hf: &FaultCheckMatrix,
    t: usize,
    combo: &[usize],
    key: u128,
    stored: CacheEntry,
) -> DistinguishabilityReport {
    let unique = hf.unique();
    let partner = find_combination(
        &unique.keys,
        &unique.classes,
        key,
        stored.logical_class,
        stored.weight as usize,
        combo,
    );
    let to_origins = |indices: &[usize]| {
        indices
            .iter()
            .map(|&u| hf.provenance(unique.representatives[u]))
            .collect()
    };
    let witness = ConflictWitness {
        combo_a: to_origins(combo),
        combo_b: to_origins(&partner),
    };
    let mut t_eff = 0;
    for radius in 1..t {
        let ok = if 2 * hf.generator_rows() <= 64 {
            let cols: Vec<(u64, bool)> = unique
                .keys
                .iter()
                .zip(&unique.classes)
                .map(|(&k, &c)| (k as u64, c))
                .collect();
            build_impl::<u64>(&cols, radius, usize::MAX).is_ok()
        } else {
            let cols: Vec<(u128, bool)> = unique
                .keys
                .iter()
                .zip(&unique.classes)
                .map(|(&k, &c)| (k, c))
                .collect();
            build_impl::<u128>(&cols, radius, usize::MAX).is_ok()
        };
        if ok {
            t_eff = radius;
        } else {
            break;
        }
    }
    DistinguishabilityReport {
        distinguishable: false,
        t_eff,
        witness: Some(witness),
    }
}

/// Find a combination of up to `max_weight` unique columns with the given
/// packed key and class, preferring small weights; `exclude` is the
/// conflicting combination itself (relevant when the same subset could be
/// re-found).
fn find_combination(
    keys: &[u128],
    classes: &[bool],
    target_key: u128,
    target_class: bool,
    max_weight: usize,
    exclude: &[usize],
) -> Vec<usize> {
    if target_key == 0 && !target_class && max_weight == 0 {
        return Vec::new();
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        keys: &[u128],
        classes: &[bool],
        path: &mut Vec<usize>,
        start: usize,
        key: u128,
        class: bool,
        remaining: usize,
        target_key: u128,
        target_class: bool,
        exclude: &[usize],
    ) -> Option<Vec<usize>> {
        if key == target_key && class == target_class && !path.is_empty() && path != exclude {
            return Some(path.clone());
        }
        if remaining == 0 {
            return None;
        }
        for i in start..keys.len() {
            path.push(i);
            let found = rec(
                keys,
                classes,
                path,
                i + 1,
                key ^ keys[i],
                class ^ classes[i],
                remaining - 1,
                target_key,
                target_class,
                exclude,
            );
            path.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }
    for weight in 1..=max_weight.max(1) {
        let mut path = Vec::new();
        if let Some(found) = rec(
            keys,
            classes,
            &mut path,
            0,
            0,
            false,
            weight,
            target_key,
            target_class,
            exclude,
        ) {
            return found;
        }
    }
    Vec::new()
}

/// Decode a full syndrome: the actual recovery operator when cached, the
/// canonical recovery operator otherwise.
pub fn decode(table: &LookupTable, code: &CssCode, sigma: &FullSyndrome) -> BitVec {
    let mut recovery = code.canonical_recovery(sigma.s());
    if let Some(entry) = table.get(sigma) {
        if entry.logical_class {
            recovery.xor_assign(code.logical_j());
        }
    }
    recovery
}

/// Meet-in-the-Middle decode: search fault combinations of weight 1..=rho,
/// probing `sigma xor combination` against the table; the first hit (by
/// weight, then lexicographic column order) fixes the logical class as the
/// XOR of the entry class and the combination class. Falls back to the
/// canonical recovery operator when nothing within `rho` bridges.
pub fn mim_decode(
    table: &LookupTable,
    hf: &FaultCheckMatrix,
    code: &CssCode,
    sigma: &FullSyndrome,
    rho: usize,
) -> BitVec {
    if let Some(entry) = table.get(sigma) {
        let mut recovery = code.canonical_recovery(sigma.s());
        if entry.logical_class {
            recovery.xor_assign(code.logical_j());
        }
        return recovery;
    }
    let r = hf.generator_rows();
    let class = if 2 * r < 63 {
        mim_search_packed(table, hf, sigma.pack() as u64, rho)
    } else {
        mim_search_general(table, hf, sigma.pack(), rho)
    };
    let mut recovery = code.canonical_recovery(sigma.s());
    if class == Some(true) {
        recovery.xor_assign(code.logical_j());
    }
    recovery
}

const CLASS_BIT: u64 = 1 << 63;

/// Nonzero unique columns packed as `key | class << 63`, in provenance
/// order. The trivial column would only re-probe sigma itself.
fn packed_columns(hf: &FaultCheckMatrix) -> Vec<u64> {
    let unique = hf.unique();
    unique
        .keys
        .iter()
        .zip(&unique.classes)
        .filter(|&(&k, &c)| k != 0 || c)
        .map(|(&k, &c)| k as u64 | (u64::from(c) << 63))
        .collect()
}

/// Combination keys of one weight level in lexicographic order, built once
/// per fault check matrix. Levels beyond 3 are enumerated recursively at
/// query time instead of being materialized.
fn mim_level(hf: &FaultCheckMatrix, weight: usize) -> &[u64] {
    hf.mim_levels[weight - 1].get_or_init(|| {
        let cols = packed_columns(hf);
        let n = cols.len();
        match weight {
            1 => cols,
            2 => {
                let mut level = Vec::with_capacity(n * (n - 1) / 2);
                for i in 0..n {
                    for j in i + 1..n {
                        level.push(cols[i] ^ cols[j]);
                    }
                }
                level
            }
            3 => {
                let mut level = Vec::with_capacity(n * (n - 1) * (n - 2) / 6);
                for i in 0..n {
                    for j in i + 1..n {
                        let ij = cols[i] ^ cols[j];
                        level.extend(cols[j + 1..].iter().map(|&ck| ij ^ ck));
                    }
                }
                level
            }
            _ => unreachable!("levels beyond 3 are not materialized"),
        }
    })
}

fn mim_search_packed(table: &LookupTable, hf: &FaultCheckMatrix, target: u64, rho: usize) -> Option<bool> {
    let KeyMap::Small(map) = &table.map else {
        unreachable!("packed search requires the small key width");
    };
    let r = hf.generator_rows();
    let t = table.radius();
    let flag_mask = (((1u64 << r) - 1) << r) & !CLASS_BIT;
    for weight in 1..=rho.min(3) {
        for &packed in mim_level(hf, weight) {
            let probe = target ^ (packed & !CLASS_BIT);
            // table keys carry at most one flag bit per fault
            if ((probe & flag_mask).count_ones() as usize) > t {
                continue;
            }
            if let Some(&value) = map.get(&probe) {
                let entry = CacheEntry::unpack(value);
                return Some(entry.logical_class ^ (packed & CLASS_BIT != 0));
            }
        }
    }
    if rho < 4 {
        return None;
    }
    // deeper levels: lexicographic recursion with the same flag-weight prune
    let cols = packed_columns(hf);
    #[allow(clippy::too_many_arguments)]
    fn rec(
        map: &HashMap<u64, u8, KeyHash>,
        cols: &[u64],
        flag_mask: u64,
        t: usize,
        start: usize,
        key: u64,
        class: bool,
        depth_left: usize,
    ) -> Option<bool> {
        for i in start..cols.len() {
            let probe = key ^ (cols[i] & !CLASS_BIT);
            let combo_class = class ^ (cols[i] & CLASS_BIT != 0);
            let flags = (probe & flag_mask).count_ones() as usize;
            if depth_left == 1 {
                if flags <= t {
                    if let Some(&value) = map.get(&probe) {
                        let entry = CacheEntry::unpack(value);
                        return Some(entry.logical_class ^ combo_class);
                    }
                }
            } else if flags < t + depth_left {
                if let Some(found) =
                    rec(map, cols, flag_mask, t, i + 1, probe, combo_class, depth_left - 1)
                {
                    return Some(found);
                }
            }
        }
        None
    }
    for weight in 4..=rho {
        if let Some(found) = rec(map, &cols, flag_mask, t, 0, target, false, weight) {
            return Some(found);
        }
    }
    None
}

/// Fallback for codes too wide for packed u64 keys.
fn mim_search_general(
    table: &LookupTable,
    hf: &FaultCheckMatrix,
    target: u128,
    rho: usize,
) -> Option<bool> {
    let unique = hf.unique();
    let cols: Vec<(u128, bool)> = unique
        .keys
        .iter()
        .zip(&unique.classes)
        .filter(|&(&k, &c)| k != 0 || c)
        .map(|(&k, &c)| (k, c))
        .collect();
    fn rec(
        table: &LookupTable,
        cols: &[(u128, bool)],
        start: usize,
        key: u128,
        class: bool,
        depth_left: usize,
    ) -> Option<bool> {
        for i in start..cols.len() {
            let probe = key ^ cols[i].0;
            let combo_class = class ^ cols[i].1;
            if depth_left == 1 {
                if let Some(entry) = table.get_key(probe) {
                    return Some(entry.logical_class ^ combo_class);
                }
            } else if let Some(found) = rec(table, cols, i + 1, probe, combo_class, depth_left - 1)
            {
                return Some(found);
            }
        }
        None
    }
    for weight in 1..=rho {
        if let Some(found) = rec(table, &cols, 0, target, false, weight) {
            return Some(found);
        }
    }
    None
}
