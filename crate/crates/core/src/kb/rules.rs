use std::fmt;

use serde::{Deserialize, Serialize};

use super::{AttributeSubset, InformationSystem, KbError, LatticeNode};

/// Where a rule came from: the lattice node and the elementary set within it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RuleOrigin {
    pub subset: AttributeSubset,
    pub class: usize,
}

/// `(a_i is v_i) AND ... -> (disease is term)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    /// `(attribute, term)` clauses, ascending by attribute.
    pub antecedent: Vec<(usize, usize)>,
    pub disease: usize,
    pub term: usize,
    pub reliability: f64,
    pub origin: RuleOrigin,
    /// Information-system row the rule was read from.
    pub row: usize,
}

impl Rule {
    /// Human-readable form using the names of `sys`.
    pub fn display<'a>(&'a self, sys: &'a InformationSystem) -> impl fmt::Display + 'a {
        RuleDisplay { rule: self, sys }
    }
}

struct RuleDisplay<'a> {
    rule: &'a Rule,
    sys: &'a InformationSystem,
}

impl fmt::Display for RuleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sys = self.sys;
        for (k, &(a, t)) in self.rule.antecedent.iter().enumerate() {
            if k > 0 {
                write!(f, " AND ")?;
            }
            write!(
                f,
                "{}={}",
                sys.attribute_name(a),
                sys.attribute_term_name(a, t)
            )?;
        }
        write!(
            f,
            " -> {}={} (r_s {})",
            sys.disease_name(self.rule.disease),
            sys.output_term_name(self.rule.term),
            self.rule.reliability
        )
    }
}

/// What to do when an elementary set holds equally reliable but different
/// terms for the same disease. Both policies fail the build; they differ in
/// how much they report first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConflictPolicy {
    /// Stop at the first unresolvable conflict.
    #[default]
    Strict,
    /// Collect every conflict in the knowledge base, then fail.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Competitor {
    pub term: String,
    pub reliability: f64,
    /// 1-based, as in diagnostics.
    pub row: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum Resolution {
    Kept { term: String },
    Unresolvable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictEntry {
    pub node: Vec<String>,
    pub class: usize,
    pub antecedent: Vec<(String, String)>,
    pub disease: String,
    pub competitors: Vec<Competitor>,
    pub resolution: Resolution,
}

impl fmt::Display for ConflictEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "node {{{}}} class {} (",
            self.node.join(", "),
            self.class + 1
        )?;
        for (k, (a, t)) in self.antecedent.iter().enumerate() {
            if k > 0 {
                write!(f, " AND ")?;
            }
            write!(f, "{a}={t}")?;
        }
        write!(f, "): disease {} has ", self.disease)?;
        for (k, c) in self.competitors.iter().enumerate() {
            if k > 0 {
                write!(f, " vs ")?;
            }
            write!(f, "{} (row {}, r_s {})", c.term, c.row, c.reliability)?;
        }
        match &self.resolution {
            Resolution::Kept { term } => write!(f, "; kept {term}"),
            Resolution::Unresolvable => write!(f, "; tied at the highest reliability"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConflictReport {
    pub entries: Vec<ConflictEntry>,
}

impl ConflictReport {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn resolved(&self) -> impl Iterator<Item = &ConflictEntry> {
        self.entries
            .iter()
            .filter(|e| matches!(e.resolution, Resolution::Kept { .. }))
    }

    pub fn unresolvable(&self) -> impl Iterator<Item = &ConflictEntry> {
        self.entries
            .iter()
            .filter(|e| e.resolution == Resolution::Unresolvable)
    }

    pub fn has_unresolvable(&self) -> bool {
        self.unresolvable().next().is_some()
    }
}

/// Derive the production rules of one lattice node.
///
/// Every member of an elementary set yields a rule whose antecedent is the
/// set's defining values. When several members name the same disease, the
/// most reliable one survives. A tie at the top is reported as unresolvable
/// and, under [`ConflictPolicy::Strict`], returned as an error straight away.
pub fn generate_rules(
    sys: &InformationSystem,
    node: &LatticeNode,
    policy: ConflictPolicy,
) -> Result<(Vec<Rule>, ConflictReport), KbError> {
    let mut rules = Vec::new();
    let mut report = ConflictReport::default();
    if node.subset.is_empty() {
        return Ok((rules, report));
    }
    for (c, class) in node.classes.iter().enumerate() {
        let mut diseases: Vec<usize> = Vec::new();
        for &r in &class.members {
            let d = sys.rows[r].disease;
            if !diseases.contains(&d) {
                diseases.push(d);
            }
        }
        for d in diseases {
            let group: Vec<usize> = class
                .members
                .iter()
                .copied()
                .filter(|&r| sys.rows[r].disease == d)
                .collect();
            let best = group
                .iter()
                .map(|&r| sys.rows[r].reliability)
                .fold(f64::NEG_INFINITY, f64::max);
            let top: Vec<usize> = group
                .iter()
                .copied()
                .filter(|&r| sys.rows[r].reliability == best)
                .collect();
            let tied = top
                .iter()
                .any(|&r| sys.rows[r].disease_term != sys.rows[top[0]].disease_term);

            if group.len() > 1 {
                let entry = ConflictEntry {
                    node: sys
                        .subset_names(node.subset)
                        .into_iter()
                        .map(str::to_owned)
                        .collect(),
                    class: c,
                    antecedent: class
                        .defining_values
                        .iter()
                        .map(|&(a, t)| {
                            (
                                sys.attribute_name(a).to_owned(),
                                sys.attribute_term_name(a, t).to_owned(),
                            )
                        })
                        .collect(),
                    disease: sys.disease_name(d).to_owned(),
                    competitors: group
                        .iter()
                        .map(|&r| Competitor {
                            term: sys.output_term_name(sys.rows[r].disease_term).to_owned(),
                            reliability: sys.rows[r].reliability,
                            row: r + 1,
                        })
                        .collect(),
                    resolution: if tied {
                        Resolution::Unresolvable
                    } else {
                        Resolution::Kept {
                            term: sys
                                .output_term_name(sys.rows[top[0]].disease_term)
                                .to_owned(),
                        }
                    },
                };
                report.entries.push(entry);
                if tied {
                    if policy == ConflictPolicy::Strict {
                        return Err(KbError::InconsistentKnowledge(report));
                    }
                    continue;
                }
            }
            let r = top[0];
            let row = &sys.rows[r];
            rules.push(Rule {
                antecedent: class.defining_values.clone(),
                disease: row.disease,
                term: row.disease_term,
                reliability: row.reliability,
                origin: RuleOrigin {
                    subset: node.subset,
                    class: c,
                },
                row: r,
            });
        }
    }
    Ok((rules, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::firing_strength;
    use crate::fuzzy::Fuzzified;
    use crate::kb::lattice::tests::{arb_system, reference_table, synthetic};
    use crate::kb::{build_lattice, equivalence_classes};
    use proptest::prelude::*;

    fn node_for(sys: &InformationSystem, subset: AttributeSubset) -> LatticeNode {
        LatticeNode {
            subset,
            classes: equivalence_classes(sys, subset),
            rules: Vec::new(),
        }
    }

    fn summary(sys: &InformationSystem, rules: &[Rule]) -> Vec<(String, String, f64)> {
        rules
            .iter()
            .map(|r| {
                (
                    sys.disease_name(r.disease).to_owned(),
                    sys.output_term_name(r.term).to_owned(),
                    r.reliability,
                )
            })
            .collect()
    }

    #[test]
    fn top_node_rules_mirror_rows() {
        let sys = reference_table();
        let (rules, report) = generate_rules(
            &sys,
            &node_for(&sys, sys.all_attributes()),
            ConflictPolicy::Strict,
        )
        .unwrap();
        assert!(report.is_empty());
        assert_eq!(
            summary(&sys, &rules),
            vec![
                ("d1".into(), "High".into(), 0.8),
                ("d2".into(), "High".into(), 0.7),
                ("d3".into(), "Moderate".into(), 0.6),
                ("d4".into(), "High".into(), 0.6),
                ("d5".into(), "Low".into(), 0.4),
            ]
        );
        for (rule, row) in rules.iter().zip(&sys.rows) {
            let expected: Vec<(usize, usize)> =
                row.attr_terms.iter().copied().enumerate().collect();
            assert_eq!(rule.antecedent, expected);
        }
    }

    #[test]
    fn single_attribute_node() {
        let sys = reference_table();
        let a1 = AttributeSubset::from_indices([0]);
        let (rules, _) = generate_rules(&sys, &node_for(&sys, a1), ConflictPolicy::Strict).unwrap();
        assert_eq!(rules.len(), 5);
        let moderate: Vec<_> = rules
            .iter()
            .filter(|r| sys.attribute_term_name(0, r.antecedent[0].1) == "Moderate")
            .cloned()
            .collect();
        assert_eq!(
            summary(&sys, &moderate),
            vec![
                ("d1".into(), "High".into(), 0.8),
                ("d2".into(), "High".into(), 0.7),
                ("d3".into(), "Moderate".into(), 0.6),
                ("d5".into(), "Low".into(), 0.4),
            ]
        );
    }

    #[test]
    fn bottom_node_has_no_rules() {
        let sys = reference_table();
        let (rules, report) = generate_rules(
            &sys,
            &node_for(&sys, AttributeSubset::EMPTY),
            ConflictPolicy::Strict,
        )
        .unwrap();
        assert!(rules.is_empty() && report.is_empty());
    }

    // disease 0 twice in one class: terms 3 (High) and 2 (Moderate)
    fn conflicting(r_high: f64, r_other: f64, other_term: usize) -> InformationSystem {
        synthetic(
            1,
            2,
            &[
                (0, 3, vec![0], r_high),
                (0, other_term, vec![0], r_other),
                (1, 1, vec![1], 0.5),
            ],
        )
    }

    #[test]
    fn higher_reliability_wins() {
        let sys = conflicting(0.8, 0.4, 2);
        let node = node_for(&sys, sys.all_attributes());
        let (rules, report) = generate_rules(&sys, &node, ConflictPolicy::Strict).unwrap();
        let d0: Vec<_> = rules.iter().filter(|r| r.disease == 0).collect();
        assert_eq!(d0.len(), 1);
        assert_eq!((d0[0].term, d0[0].reliability), (3, 0.8));
        assert_eq!(report.entries.len(), 1);
        assert_eq!(
            report.entries[0].resolution,
            Resolution::Kept { term: "T3".into() }
        );
        assert!(!report.has_unresolvable());
    }

    #[test]
    fn equal_reliability_is_unresolvable() {
        let sys = conflicting(0.6, 0.6, 1);
        let node = node_for(&sys, sys.all_attributes());
        let err = generate_rules(&sys, &node, ConflictPolicy::Strict).unwrap_err();
        let KbError::InconsistentKnowledge(report) = &err else {
            panic!("{err:?}")
        };
        assert_eq!(report.unresolvable().count(), 1);
        let msg = err.to_string();
        assert!(msg.contains("node {x0} class 1 (x0=T0)"), "{msg}");
        assert!(msg.contains("row 1") && msg.contains("row 2"), "{msg}");

        let (rules, report) = generate_rules(&sys, &node, ConflictPolicy::Lenient).unwrap();
        assert!(report.has_unresolvable());
        assert!(rules.iter().all(|r| r.disease != 0));
    }

    proptest! {
        #[test]
        fn rules_fire_fully_on_their_own_row(sys in arb_system()) {
            let lattice = build_lattice(&sys).unwrap();
            for node in &lattice.nodes {
                let Ok((rules, _)) = generate_rules(&sys, node, ConflictPolicy::Lenient) else { continue };
                for rule in rules {
                    let row = &sys.rows[rule.row];
                    let mut fz = Fuzzified::new(sys.attributes.iter().map(|a| a.name()));
                    for (a, var) in sys.attributes.iter().enumerate() {
                        let mut d = vec![0.0; var.terms().len()];
                        d[row.term_of(a)] = 1.0;
                        fz.insert(a, d);
                    }
                    prop_assert!(!rule.antecedent.is_empty());
                    prop_assert_eq!(firing_strength(rule.antecedent.iter().copied(), &fz).unwrap(), 1.0);
                }
            }
        }

        #[test]
        fn surviving_rules_ignore_row_order(sys in arb_system(), seed in any::<u64>()) {
            let mut rows = sys.rows.clone();
            // Fisher-Yates driven by a tiny LCG so the permutation is reproducible.
            let mut state = seed | 1;
            for i in (1..rows.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                rows.swap(i, (state >> 33) as usize % (i + 1));
            }
            let shuffled = sys.with_rows(rows);
            type RuleKey = (Vec<(usize, usize)>, usize, usize, u64);
            let surviving = |s: &InformationSystem| {
                let lattice = build_lattice(s).unwrap();
                let mut out: Vec<RuleKey> = Vec::new();
                let mut failed = false;
                for node in &lattice.nodes {
                    let (rules, report) = generate_rules(s, node, ConflictPolicy::Lenient).unwrap();
                    failed |= report.has_unresolvable();
                    out.extend(rules.into_iter().map(|r| (r.antecedent, r.disease, r.term, r.reliability.to_bits())));
                }
                out.sort();
                (out, failed)
            };
            prop_assert_eq!(surviving(&sys), surviving(&shuffled));
        }
    }
}
