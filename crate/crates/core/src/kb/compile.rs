use serde::{Deserialize, Serialize};

use super::{
    generate_rules, AttributeSubset, ConflictPolicy, ConflictReport, InformationSystem, KbError,
    Lattice, PhaseSpec, Rule,
};

/// Largest phase (in attributes) whose lattice is materialized.
pub const DEFAULT_ATTRIBUTE_CAP: usize = 20;

/// Version tag of [`CompiledKb::to_artifact`].
pub const ARTIFACT_FORMAT: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    pub policy: ConflictPolicy,
    pub max_attributes_per_phase: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            policy: ConflictPolicy::Strict,
            max_attributes_per_phase: DEFAULT_ATTRIBUTE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseStats {
    pub index: usize,
    pub name: String,
    pub attributes: usize,
    pub nodes: usize,
    /// Node count per lattice level, bottom first.
    pub level_sizes: Vec<usize>,
    /// Rule count per lattice level, bottom first.
    pub rules_per_level: Vec<usize>,
    pub rules: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KbStats {
    pub attributes: usize,
    pub diseases: usize,
    pub rows: usize,
    pub nodes: usize,
    pub rules: usize,
    pub resolved_conflicts: usize,
    pub phases: Vec<PhaseStats>,
}

/// An information system compiled into one rule-carrying lattice per phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledKb {
    pub system: InformationSystem,
    /// One per phase, in phase order.
    pub lattices: Vec<Lattice>,
    /// Conflicts settled by reliability.
    pub conflicts: ConflictReport,
    pub stats: KbStats,
}

#[derive(Serialize, Deserialize)]
struct Artifact {
    compiled_format: u64,
    #[serde(flatten)]
    kb: CompiledKb,
}

#[derive(Deserialize)]
struct ArtifactProbe {
    compiled_format: Option<u64>,
}

impl CompiledKb {
    pub fn compile(sys: InformationSystem, policy: ConflictPolicy) -> Result<Self, KbError> {
        Self::compile_with(
            sys,
            CompileOptions {
                policy,
                ..CompileOptions::default()
            },
        )
    }

    pub fn compile_with(sys: InformationSystem, options: CompileOptions) -> Result<Self, KbError> {
        let mut lattices = Vec::with_capacity(sys.phases.len());
        let mut report = ConflictReport::default();
        for phase in &sys.phases {
            let mut lattice = Lattice::build(
                &sys,
                phase.attributes,
                options.max_attributes_per_phase,
                &phase.name,
            )?;
            for node in &mut lattice.nodes {
                let (rules, found) = generate_rules(&sys, node, options.policy)?;
                node.rules = rules;
                report.entries.extend(found.entries);
            }
            lattices.push(lattice);
        }
        if report.has_unresolvable() {
            return Err(KbError::InconsistentKnowledge(report));
        }
        let stats = compute_stats(&sys, &lattices, &report);
        Ok(Self {
            system: sys,
            lattices,
            conflicts: report,
            stats,
        })
    }

    pub fn phase(&self, index: usize) -> Option<(&PhaseSpec, &Lattice)> {
        let p = self.system.phases.iter().position(|p| p.index == index)?;
        Some((&self.system.phases[p], &self.lattices[p]))
    }

    /// The lattice whose top element contains `subset`.
    pub fn lattice_containing(&self, subset: AttributeSubset) -> Option<&Lattice> {
        self.lattices
            .iter()
            .find(|l| subset.is_subset_of(l.attributes))
    }

    /// Rules stored at the node for exactly `subset`.
    pub fn node_rules(&self, subset: AttributeSubset) -> Option<&[Rule]> {
        self.lattice_containing(subset)?
            .node(subset)
            .map(|n| n.rules.as_slice())
    }

    pub fn to_artifact(&self) -> String {
        let artifact = Artifact {
            compiled_format: ARTIFACT_FORMAT,
            kb: self.clone(),
        };
        serde_json::to_string(&artifact).expect("compiled knowledge base serializes")
    }

    pub fn from_artifact(text: &str) -> Result<Self, KbError> {
        let syntax = |e: serde_json::Error| KbError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        };
        let probe: ArtifactProbe = serde_json::from_str(text).map_err(syntax)?;
        match probe.compiled_format {
            Some(ARTIFACT_FORMAT) => {}
            found => {
                return Err(KbError::UnsupportedArtifact {
                    found: found.unwrap_or(0),
                    expected: ARTIFACT_FORMAT,
                })
            }
        }
        let artifact: Artifact = serde_json::from_str(text).map_err(syntax)?;
        Ok(artifact.kb)
    }

    /// Whether `text` looks like a compiled artifact rather than a source file.
    pub fn is_artifact(text: &str) -> bool {
        serde_json::from_str::<ArtifactProbe>(text).is_ok_and(|p| p.compiled_format.is_some())
    }

    /// Load either a knowledge base source document or a compiled artifact.
    pub fn load(text: &str) -> Result<Self, KbError> {
        if Self::is_artifact(text) {
            Self::from_artifact(text)
        } else {
            Self::compile(
                super::parse_information_system(text)?,
                ConflictPolicy::Strict,
            )
        }
    }
}

fn compute_stats(
    sys: &InformationSystem,
    lattices: &[Lattice],
    report: &ConflictReport,
) -> KbStats {
    let phases: Vec<PhaseStats> = sys
        .phases
        .iter()
        .zip(lattices)
        .map(|(phase, lattice)| {
            let mut rules_per_level = vec![0; lattice.order() + 1];
            for node in &lattice.nodes {
                rules_per_level[node.level()] += node.rules.len();
            }
            PhaseStats {
                index: phase.index,
                name: phase.name.clone(),
                attributes: lattice.order(),
                nodes: lattice.nodes.len(),
                level_sizes: lattice.level_sizes(),
                rules: rules_per_level.iter().sum(),
                rules_per_level,
            }
        })
        .collect();
    KbStats {
        attributes: sys.attribute_count(),
        diseases: sys.disease_count(),
        rows: sys.rows.len(),
        nodes: phases.iter().map(|p| p.nodes).sum(),
        rules: phases.iter().map(|p| p.rules).sum(),
        resolved_conflicts: report.resolved().count(),
        phases,
    }
}
