//! External formats: space files (explicit matrix or generator spec), tower
//! JSON and DOT exports, CSV reports, and self-contained certificate files.
//!
//! All emitters are deterministic: identical inputs produce byte-identical
//! outputs apart from the embedded format version.

use serde::{Deserialize, Serialize};

use crate::constructions::{
    EmbeddingCertificate, EquivalenceCertificate, ScaleSchedule, SeparationRecord,
    SurjectionCertificate,
};
use crate::covers::{CapacityProfile, Classification};
use crate::distance::Distance;
use crate::metric::{FiniteMetricSpace, KappaSpec, MeshRow, MetricError};
use crate::morphisms::OscillationTable;
use crate::towers::Tower;

/// Format version stamped into every JSON artifact.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("{0}")]
    Structure(String),
}

/// On-disk space: explicit labels and matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceFile {
    pub labels: Vec<String>,
    pub dist: Vec<Vec<Distance>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KappaSpecFile {
    pub k: u64,
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<Distance>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum SpaceInput {
    Generator { kappa: KappaSpecFile },
    Matrix(SpaceFile),
}

impl KappaSpecFile {
    pub fn to_spec(&self) -> Result<KappaSpec, MetricError> {
        match &self.levels {
            Some(levels) => KappaSpec::with_levels(self.k, self.n, levels.clone()),
            None => Ok(KappaSpec::new(self.k, self.n)),
        }
    }
}

/// Parses a space file: either `{"labels", "dist"}` or `{"kappa": {...}}`.
/// Generated spaces honor `point_budget`.
pub fn space_from_json(text: &str, point_budget: u64) -> Result<FiniteMetricSpace, FormatError> {
    let input: SpaceInput = serde_json::from_str(text)?;
    match input {
        SpaceInput::Generator { kappa } => {
            let spec = kappa.to_spec()?;
            Ok(FiniteMetricSpace::gen_kappa_space(&spec, point_budget)?)
        }
        SpaceInput::Matrix(file) => space_from_file(&file),
    }
}

pub fn space_from_file(file: &SpaceFile) -> Result<FiniteMetricSpace, FormatError> {
    Ok(FiniteMetricSpace::validate_metric(
        file.labels.clone(),
        file.dist.clone(),
    )?)
}

pub fn space_to_file(space: &FiniteMetricSpace) -> SpaceFile {
    let n = space.point_count();
    SpaceFile {
        labels: space.labels().to_vec(),
        dist: (0..n)
            .map(|i| (0..n).map(|j| space.distance(i, j).clone()).collect())
            .collect(),
    }
}

pub fn space_to_json(space: &FiniteMetricSpace) -> String {
    let file = space_to_file(space);
    let value = serde_json::json!({
        "format_version": FORMAT_VERSION,
        "labels": file.labels,
        "dist": file.dist,
    });
    pretty(&value)
}

fn pretty(value: &serde_json::Value) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("serializable value");
    out.push('\n');
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TowerFile {
    pub levels: Vec<Distance>,
    pub nodes: Vec<Vec<String>>,
    pub parent: Vec<Vec<usize>>,
}

pub fn tower_to_file(tower: &Tower) -> TowerFile {
    TowerFile {
        levels: tower.level_values().to_vec(),
        nodes: (0..tower.level_count())
            .map(|l| tower.node_ids(l).to_vec())
            .collect(),
        parent: tower.parent_maps().to_vec(),
    }
}

pub fn tower_to_json(tower: &Tower) -> String {
    let file = tower_to_file(tower);
    let value = serde_json::json!({
        "format_version": FORMAT_VERSION,
        "levels": file.levels,
        "nodes": file.nodes,
        "parent": file.parent,
    });
    pretty(&value)
}

/// DOT export with one rank per level and child-to-parent edges.
pub fn tower_to_dot(tower: &Tower) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "// macrospace {} tower export\n",
        env!("CARGO_PKG_VERSION")
    ));
    out.push_str("digraph tower {\n  rankdir = BT;\n");
    for l in 0..tower.level_count() {
        out.push_str(&format!("  {{ rank = same; // level value {}\n", tower.level_value(l)));
        for id in tower.node_ids(l) {
            out.push_str(&format!("    \"L{l}:{}\";\n", escape_dot(id)));
        }
        out.push_str("  }\n");
    }
    for l in 0..tower.level_count().saturating_sub(1) {
        for (i, id) in tower.node_ids(l).iter().enumerate() {
            let p = tower.parent_of(l, i);
            out.push_str(&format!(
                "  \"L{l}:{}\" -> \"L{}:{}\";\n",
                escape_dot(id),
                l + 1,
                escape_dot(tower.node_id(l + 1, p))
            ));
        }
    }
    out.push_str("}\n");
    out
}

fn escape_dot(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// CSV report: mesh rows then capacity rows, each section with its header.
pub fn analysis_csv(mesh: &[MeshRow], profiles: &[CapacityProfile]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# macrospace {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str("epsilon,mesh,block_count\n");
    for row in mesh {
        out.push_str(&format!("{},{},{}\n", row.epsilon, row.mesh, row.block_count));
    }
    out.push_str(&capacity_csv_body(profiles));
    out
}

pub fn capacity_csv(profiles: &[CapacityProfile]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# macrospace {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&capacity_csv_body(profiles));
    out
}

fn capacity_csv_body(profiles: &[CapacityProfile]) -> String {
    let mut out = String::new();
    out.push_str("delta,epsilon,cov_min_lower,cov_min_upper,cov_max_lower,cov_max_upper,exact\n");
    for p in profiles {
        let exact = p.min_over_centers.is_exact() && p.max_over_centers.is_exact();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.delta,
            p.epsilon,
            p.min_over_centers.lower,
            p.min_over_centers.upper,
            p.max_over_centers.lower,
            p.max_over_centers.upper,
            exact
        ));
    }
    out
}

pub fn classification_to_json(c: &Classification) -> String {
    let value = serde_json::json!({
        "format_version": FORMAT_VERSION,
        "family": c.family,
        "verdict": c.verdict,
        "label": c.label,
        "diameters": c.diameters,
        "grid": c.grid,
        "grid_policy": c.grid_policy,
    });
    pretty(&value)
}

/// Label pair list of a multi-map, the on-disk relation format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiMapFile {
    pub pairs: Vec<(String, String)>,
}

pub fn multimap_pairs(map: &crate::morphisms::MultiMap) -> Vec<(String, String)> {
    map.pairs()
        .iter()
        .map(|&(s, d)| {
            (
                map.source().label(s).to_string(),
                map.target().label(d).to_string(),
            )
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceCertFile {
    pub format_version: u32,
    pub kind: String,
    pub width_k: u64,
    pub depth: u32,
    pub separating_bottom: bool,
    pub source_space: SpaceFile,
    pub target_space: SpaceFile,
    pub schedule: ScaleSchedule,
    pub tower_levels: Vec<Distance>,
    pub level_map: Vec<usize>,
    pub node_map: Vec<Vec<usize>>,
    pub pairs: Vec<(String, String)>,
    pub oscillation_fwd: OscillationTable,
    pub oscillation_bwd: OscillationTable,
    pub is_total: bool,
    pub is_surjective: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeparationRecordFile {
    pub a: String,
    pub b: String,
    pub level: u32,
    pub required: Distance,
    pub actual: Distance,
    pub meets_required: bool,
    pub floor: Distance,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingCertFile {
    pub format_version: u32,
    pub kind: String,
    pub width_k: u64,
    pub depth: u32,
    pub base_point: String,
    pub source_space: SpaceFile,
    pub target_space: SpaceFile,
    pub schedule: ScaleSchedule,
    pub pairs: Vec<(String, String)>,
    pub separation: Vec<SeparationRecordFile>,
    pub containment_bound: Distance,
    pub max_base_distance: Distance,
    pub oscillation_fwd: OscillationTable,
    pub oscillation_bwd: OscillationTable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EscapeStepFile {
    pub point: String,
    pub epsilon: Distance,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurjectionCertFile {
    pub format_version: u32,
    pub kind: String,
    pub base_point: String,
    pub source_space: SpaceFile,
    pub target_space: SpaceFile,
    pub escape_chain: Vec<EscapeStepFile>,
    pub assignment: Vec<(String, u64)>,
    pub radius: Distance,
    pub pairs: Vec<(String, String)>,
    pub oscillation_fwd: OscillationTable,
    pub oscillation_bwd: OscillationTable,
    pub is_total: bool,
    pub is_surjective: bool,
}

/// Any certificate file, dispatched on its `kind` field.
#[derive(Debug, Clone)]
pub enum CertificateFile {
    Equivalence(EquivalenceCertFile),
    Embedding(EmbeddingCertFile),
    Surjection(SurjectionCertFile),
}

pub fn equivalence_to_file(cert: &EquivalenceCertificate) -> EquivalenceCertFile {
    EquivalenceCertFile {
        format_version: FORMAT_VERSION,
        kind: "equivalence".into(),
        width_k: cert.width_k,
        depth: cert.depth,
        separating_bottom: cert.separating_bottom,
        source_space: space_to_file(cert.multimap.source()),
        target_space: space_to_file(cert.multimap.target()),
        schedule: cert.schedule.clone(),
        tower_levels: cert.tower_levels.clone(),
        level_map: cert.tower_iso.level_map.clone(),
        node_map: cert.tower_iso.node_map.clone(),
        pairs: multimap_pairs(&cert.multimap),
        oscillation_fwd: cert.oscillation_fwd.clone(),
        oscillation_bwd: cert.oscillation_bwd.clone(),
        is_total: cert.multimap.is_total(),
        is_surjective: cert.multimap.is_surjective(),
    }
}

fn separation_to_file(r: &SeparationRecord) -> SeparationRecordFile {
    SeparationRecordFile {
        a: r.a.clone(),
        b: r.b.clone(),
        level: r.level,
        required: r.required.clone(),
        actual: r.actual.clone(),
        meets_required: r.meets_required,
        floor: r.floor.clone(),
    }
}

pub fn embedding_to_file(cert: &EmbeddingCertificate) -> EmbeddingCertFile {
    EmbeddingCertFile {
        format_version: FORMAT_VERSION,
        kind: "embedding".into(),
        width_k: cert.width_k,
        depth: cert.depth,
        base_point: cert.base_point.clone(),
        source_space: space_to_file(cert.multimap.source()),
        target_space: space_to_file(cert.multimap.target()),
        schedule: cert.schedule.clone(),
        pairs: multimap_pairs(&cert.multimap),
        separation: cert.separation.iter().map(separation_to_file).collect(),
        containment_bound: cert.containment_bound.clone(),
        max_base_distance: cert.max_base_distance.clone(),
        oscillation_fwd: cert.oscillation_fwd.clone(),
        oscillation_bwd: cert.oscillation_bwd.clone(),
    }
}

pub fn surjection_to_file(cert: &SurjectionCertificate) -> SurjectionCertFile {
    SurjectionCertFile {
        format_version: FORMAT_VERSION,
        kind: "surjection".into(),
        base_point: cert.base_point.clone(),
        source_space: space_to_file(cert.multimap.source()),
        target_space: space_to_file(cert.multimap.target()),
        escape_chain: cert
            .escape_chain
            .iter()
            .map(|s| EscapeStepFile {
                point: s.point.clone(),
                epsilon: s.epsilon.clone(),
            })
            .collect(),
        assignment: cert.assignment.clone(),
        radius: cert.radius.clone(),
        pairs: multimap_pairs(&cert.multimap),
        oscillation_fwd: cert.oscillation_fwd.clone(),
        oscillation_bwd: cert.oscillation_bwd.clone(),
        is_total: cert.multimap.is_total(),
        is_surjective: cert.multimap.is_surjective(),
    }
}

pub fn certificate_to_json(cert: &CertificateFile) -> String {
    let value = match cert {
        CertificateFile::Equivalence(c) => serde_json::to_value(c),
        CertificateFile::Embedding(c) => serde_json::to_value(c),
        CertificateFile::Surjection(c) => serde_json::to_value(c),
    }
    .expect("serializable certificate");
    pretty(&value)
}

pub fn certificate_from_json(text: &str) -> Result<CertificateFile, FormatError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let kind = value
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| FormatError::Structure("certificate is missing a kind field".into()))?;
    match kind {
        "equivalence" => Ok(CertificateFile::Equivalence(serde_json::from_value(value)?)),
        "embedding" => Ok(CertificateFile::Embedding(serde_json::from_value(value)?)),
        "surjection" => Ok(CertificateFile::Surjection(serde_json::from_value(value)?)),
        other => Err(FormatError::Structure(format!(
            "unknown certificate kind {other:?}"
        ))),
    }
}
