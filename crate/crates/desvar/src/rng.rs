//! Deterministic uniform random-number streams.
//!
//! Every source of randomness in a model (an arrival process, a station's
//! service sampler, a failure clock) owns a named stream. Streams are
//! seeded independently so that experiment scenarios can synchronize them
//! (common random numbers) or complement them (antithetic variates)
//! without disturbing one another.
//!
//! The generator is SplitMix64: a 64-bit Weyl sequence with the Stafford
//! mix13 finalizer. Output is mapped to the open interval (0,1) on the
//! grid (k + 0.5) / 2^53, so the antithetic complement 1 - u lands exactly
//! on the same grid and u + u' == 1 holds bit-exactly.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifies the generator algorithm and output mapping, recorded in every
/// manifest so a run can be reproduced byte-for-byte later.
pub const GENERATOR_ID: &str = "splitmix64-u53/v1";

const WEYL_GAMMA: u64 = 0x9E3779B97F4A7C15;
const UNIT_SCALE: f64 = 1.0 / 9007199254740992.0; // 2^-53

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("manifest conflict: duplicate source name `{0}`")]
    DuplicateSource(String),
    #[error("manifest conflict: seed collision between `{0}` and `{1}`")]
    SeedCollision(String, String),
    #[error("invalid source name `{0}`: names use [A-Za-z0-9._-] only")]
    InvalidSourceName(String),
    #[error("manifest parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("generator mismatch: manifest was written by `{0}`, this build is `{1}`")]
    GeneratorMismatch(String, String),
}

/// Seed of one stream. Equal seeds produce identical draw sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StreamSeed(pub u64);

impl fmt::Display for StreamSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// Whether a stream yields the raw uniforms or their complements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StreamMode {
    Direct,
    Antithetic,
}

impl fmt::Display for StreamMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StreamMode::Direct => f.write_str("direct"),
            StreamMode::Antithetic => f.write_str("antithetic"),
        }
    }
}

/// A single-owner uniform stream. Draws lie strictly inside (0,1).
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: StreamSeed,
    mode: StreamMode,
    state: u64,
    draw_count: u64,
}

impl RandomStream {
    pub fn new(seed: StreamSeed, mode: StreamMode) -> Self {
        RandomStream {
            seed,
            mode,
            state: seed.0,
            draw_count: 0,
        }
    }

    pub fn seed(&self) -> StreamSeed {
        self.seed
    }

    pub fn mode(&self) -> StreamMode {
        self.mode
    }

    /// Number of uniforms drawn so far.
    pub fn draw_count(&self) -> u64 {
        self.draw_count
    }

    /// Next uniform in the open interval (0,1). Advances the stream by
    /// exactly one step.
    pub fn next_uniform(&mut self) -> f64 {
        self.state = self.state.wrapping_add(WEYL_GAMMA);
        self.draw_count += 1;
        let u = (mix64(self.state) >> 11) as f64;
        // (k + 0.5) * 2^-53 is in [2^-54, 1 - 2^-54]: never 0 or 1, and its
        // complement is exactly representable, so u + (1 - u) == 1.
        let direct = (u + 0.5) * UNIT_SCALE;
        match self.mode {
            StreamMode::Direct => direct,
            StreamMode::Antithetic => 1.0 - direct,
        }
    }
}

/// Stafford mix13 finalizer, the scrambling half of SplitMix64.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Derives the seed dedicated to one randomness source in one replication
/// of one scenario group. Scenario and source names are domain separators,
/// so the groups' seed spaces never overlap.
pub fn derive_seed(base: StreamSeed, scenario_tag: &str, source: &str, replication: u64) -> StreamSeed {
    let mut s = base.0;
    s = mix64(s ^ fnv1a64(scenario_tag.as_bytes()));
    s = mix64(s ^ fnv1a64(source.as_bytes()));
    s = mix64(s ^ replication.wrapping_mul(WEYL_GAMMA));
    StreamSeed(s)
}

/// The scenario treatments of the experiment design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VrtScenario {
    Base,
    Crn,
    Av,
    Cv,
}

impl VrtScenario {
    pub const ALL: [VrtScenario; 4] = [
        VrtScenario::Base,
        VrtScenario::Crn,
        VrtScenario::Av,
        VrtScenario::Cv,
    ];

    pub fn label(self) -> &'static str {
        match self {
            VrtScenario::Base => "Base",
            VrtScenario::Crn => "CRN",
            VrtScenario::Av => "AV",
            VrtScenario::Cv => "CV",
        }
    }

    fn tag(self) -> &'static str {
        match self {
            VrtScenario::Base => "base",
            VrtScenario::Crn => "crn",
            VrtScenario::Av => "av",
            VrtScenario::Cv => "cv",
        }
    }

    pub fn parse(s: &str) -> Option<VrtScenario> {
        match s.to_ascii_lowercase().as_str() {
            "base" => Some(VrtScenario::Base),
            "crn" => Some(VrtScenario::Crn),
            "av" => Some(VrtScenario::Av),
            "cv" => Some(VrtScenario::Cv),
            _ => None,
        }
    }
}

/// One manifest entry: the seed and mode dedicated to a named source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ManifestEntry {
    pub seed: StreamSeed,
    pub mode: StreamMode,
}

/// Complete record of (source name -> seed, mode) for one replication.
/// Sources that share a seed share one stream at runtime, which is how the
/// Base scenario models unsynchronized draws.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedManifest {
    generator_id: String,
    entries: Vec<(String, ManifestEntry)>,
}

fn valid_source_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'.' || b == b'_' || b == b'-')
}

impl SeedManifest {
    pub fn new() -> Self {
        SeedManifest {
            generator_id: GENERATOR_ID.to_string(),
            entries: Vec::new(),
        }
    }

    pub fn generator_id(&self) -> &str {
        &self.generator_id
    }

    pub fn insert(&mut self, source: &str, entry: ManifestEntry) -> Result<(), ManifestError> {
        if !valid_source_name(source) {
            return Err(ManifestError::InvalidSourceName(source.to_string()));
        }
        if self.entries.iter().any(|(name, _)| name == source) {
            return Err(ManifestError::DuplicateSource(source.to_string()));
        }
        self.entries.push((source.to_string(), entry));
        Ok(())
    }

    pub fn get(&self, source: &str) -> Option<&ManifestEntry> {
        self.entries
            .iter()
            .find(|(name, _)| name == source)
            .map(|(_, e)| e)
    }

    pub fn entries(&self) -> &[(String, ManifestEntry)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// All seeds appearing in the manifest, with duplicates (shared streams)
    /// collapsed.
    pub fn distinct_seeds(&self) -> Vec<StreamSeed> {
        let mut seeds: Vec<StreamSeed> = self.entries.iter().map(|(_, e)| e.seed).collect();
        seeds.sort();
        seeds.dedup();
        seeds
    }

    /// Plain-text serialization: a `generator_id` header followed by one
    /// `source=<hex seed>,<mode>` line per entry, in insertion order.
    pub fn to_text(&self) -> String {
        let mut out = format!("generator_id={}\n", self.generator_id);
        for (name, entry) in &self.entries {
            out.push_str(&format!("{}={},{}\n", name, entry.seed, entry.mode));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ManifestError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(ManifestError::Parse {
            line: 1,
            reason: "empty manifest".into(),
        })?;
        let generator_id = header
            .strip_prefix("generator_id=")
            .ok_or(ManifestError::Parse {
                line: 1,
                reason: "missing generator_id header".into(),
            })?
            .to_string();
        if generator_id != GENERATOR_ID {
            return Err(ManifestError::GeneratorMismatch(
                generator_id,
                GENERATOR_ID.to_string(),
            ));
        }
        let mut manifest = SeedManifest::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let line_no = idx + 1;
            let (name, rest) = line.split_once('=').ok_or(ManifestError::Parse {
                line: line_no,
                reason: "expected `source=seed,mode`".into(),
            })?;
            let (seed_hex, mode_str) = rest.split_once(',').ok_or(ManifestError::Parse {
                line: line_no,
                reason: "expected `seed,mode`".into(),
            })?;
            let seed = u64::from_str_radix(seed_hex, 16).map_err(|e| ManifestError::Parse {
                line: line_no,
                reason: format!("bad seed: {e}"),
            })?;
            let mode = match mode_str {
                "direct" => StreamMode::Direct,
                "antithetic" => StreamMode::Antithetic,
                other => {
                    return Err(ManifestError::Parse {
                        line: line_no,
                        reason: format!("unknown mode `{other}`"),
                    })
                }
            };
            manifest.insert(
                name,
                ManifestEntry {
                    seed: StreamSeed(seed),
                    mode,
                },
            )?;
        }
        Ok(manifest)
    }
}

impl Default for SeedManifest {
    fn default() -> Self {
        Self::new()
    }
}

/// Builds the manifest governing one replication of one scenario group.
///
/// Base maps every source to a single shared per-replication stream, so
/// all consumers interleave on one sequence (unsynchronized). CRN and CV
/// dedicate one stream per source. AV pairs replications (2k, 2k+1): both
/// members share the seeds derived for the even index and the odd member
/// runs every stream in antithetic mode.
pub fn manifest_for_scenario(
    sources: &[String],
    scenario: VrtScenario,
    base_seed: StreamSeed,
    replication_index: u64,
) -> Result<SeedManifest, ManifestError> {
    let mut manifest = SeedManifest::new();
    match scenario {
        VrtScenario::Base => {
            let shared = derive_seed(base_seed, scenario.tag(), "shared", replication_index);
            for source in sources {
                manifest.insert(
                    source,
                    ManifestEntry {
                        seed: shared,
                        mode: StreamMode::Direct,
                    },
                )?;
            }
        }
        VrtScenario::Crn | VrtScenario::Cv => {
            for source in sources {
                let seed = derive_seed(base_seed, scenario.tag(), source, replication_index);
                manifest.insert(
                    source,
                    ManifestEntry {
                        seed,
                        mode: StreamMode::Direct,
                    },
                )?;
            }
            check_distinct(&manifest)?;
        }
        VrtScenario::Av => {
            let pair_base = replication_index & !1;
            let mode = if replication_index.is_multiple_of(2) {
                StreamMode::Direct
            } else {
                StreamMode::Antithetic
            };
            for source in sources {
                let seed = derive_seed(base_seed, scenario.tag(), source, pair_base);
                manifest.insert(source, ManifestEntry { seed, mode })?;
            }
            check_distinct(&manifest)?;
        }
    }
    Ok(manifest)
}

fn check_distinct(manifest: &SeedManifest) -> Result<(), ManifestError> {
    for (i, (name_a, a)) in manifest.entries().iter().enumerate() {
        for (name_b, b) in &manifest.entries()[i + 1..] {
            if a.seed == b.seed {
                return Err(ManifestError::SeedCollision(name_a.clone(), name_b.clone()));
            }
        }
    }
    Ok(())
}

/// Runtime materialization of a manifest: one [`RandomStream`] per distinct
/// (seed, mode), with per-source draw attribution even when sources share a
/// stream.
#[derive(Debug, Clone)]
pub struct StreamSet {
    streams: Vec<RandomStream>,
    // (source name, stream index, draws attributed to this source)
    sources: Vec<(String, usize, u64)>,
}

impl StreamSet {
    pub fn from_manifest(manifest: &SeedManifest) -> Self {
        let mut streams: Vec<RandomStream> = Vec::new();
        let mut keys: Vec<(StreamSeed, StreamMode)> = Vec::new();
        let mut sources = Vec::new();
        for (name, entry) in manifest.entries() {
            let key = (entry.seed, entry.mode);
            let idx = match keys.iter().position(|k| *k == key) {
                Some(idx) => idx,
                None => {
                    keys.push(key);
                    streams.push(RandomStream::new(entry.seed, entry.mode));
                    streams.len() - 1
                }
            };
            sources.push((name.clone(), idx, 0));
        }
        StreamSet { streams, sources }
    }

    /// Index of a named source, resolved once at model bind time.
    pub fn source_index(&self, source: &str) -> Option<usize> {
        self.sources.iter().position(|(name, _, _)| name == source)
    }

    /// Draw one uniform on behalf of the source at `source_idx`.
    pub fn draw(&mut self, source_idx: usize) -> f64 {
        let (_, stream_idx, count) = &mut self.sources[source_idx];
        *count += 1;
        self.streams[*stream_idx].next_uniform()
    }

    /// Per-source draw counts, in manifest order.
    pub fn draw_counts(&self) -> Vec<(String, u64)> {
        self.sources
            .iter()
            .map(|(name, _, count)| (name.clone(), *count))
            .collect()
    }

    /// Total uniforms drawn across all streams.
    pub fn total_draws(&self) -> u64 {
        self.streams.iter().map(|s| s.draw_count()).sum()
    }
}
