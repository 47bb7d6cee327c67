use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{AttributeSubset, InfoRow, InformationSystem, KbError, Rule, DEFAULT_ATTRIBUTE_CAP};

/// Rows agree on every attribute of `subset`. Vacuously true for the empty set.
pub fn indiscernible(row_i: &InfoRow, row_j: &InfoRow, subset: AttributeSubset) -> bool {
    subset.iter().all(|a| row_i.term_of(a) == row_j.term_of(a))
}

/// One block of the indiscernibility partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementarySet {
    /// `(attribute, term)` shared by every member, ascending by attribute.
    pub defining_values: Vec<(usize, usize)>,
    /// Row indices, ascending.
    pub members: Vec<usize>,
}

/// Partition the rows by their terms on `subset`. Classes are ordered by
/// their first row.
pub fn equivalence_classes(sys: &InformationSystem, subset: AttributeSubset) -> Vec<ElementarySet> {
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut classes: Vec<ElementarySet> = Vec::new();
    for (r, row) in sys.rows.iter().enumerate() {
        let key: Vec<usize> = subset.iter().map(|a| row.term_of(a)).collect();
        match index.get(&key) {
            Some(&c) => classes[c].members.push(r),
            None => {
                index.insert(key, classes.len());
                classes.push(ElementarySet {
                    defining_values: subset.iter().map(|a| (a, row.term_of(a))).collect(),
                    members: vec![r],
                });
            }
        }
    }
    classes
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeNode {
    pub subset: AttributeSubset,
    pub classes: Vec<ElementarySet>,
    pub rules: Vec<Rule>,
}

impl LatticeNode {
    pub fn level(&self) -> usize {
        self.subset.len()
    }
}

/// The power set of a group of attributes ordered by inclusion, with the
/// elementary sets of every node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    /// The top element.
    pub attributes: AttributeSubset,
    /// Indexed by local mask: bit `k` stands for the `k`-th member of `attributes`.
    pub nodes: Vec<LatticeNode>,
}

impl Lattice {
    pub fn build(
        sys: &InformationSystem,
        attributes: AttributeSubset,
        cap: usize,
        label: &str,
    ) -> Result<Self, KbError> {
        let n = attributes.len();
        if n > cap || n >= usize::BITS as usize {
            return Err(KbError::CapacityExceeded {
                phase: label.to_owned(),
                attributes: n,
                cap,
            });
        }
        let members: Vec<usize> = attributes.iter().collect();
        let nodes = (0..1usize << n)
            .map(|local| {
                let subset = AttributeSubset::from_indices(
                    members
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| local >> k & 1 == 1)
                        .map(|(_, &a)| a),
                );
                LatticeNode {
                    subset,
                    classes: equivalence_classes(sys, subset),
                    rules: Vec::new(),
                }
            })
            .collect();
        Ok(Self { attributes, nodes })
    }

    pub fn order(&self) -> usize {
        self.attributes.len()
    }

    fn local_mask(&self, subset: AttributeSubset) -> Option<usize> {
        if !subset.is_subset_of(self.attributes) {
            return None;
        }
        Some(
            self.attributes
                .iter()
                .enumerate()
                .filter(|&(_, a)| subset.contains(a))
                .fold(0, |m, (k, _)| m | 1 << k),
        )
    }

    pub fn node(&self, subset: AttributeSubset) -> Option<&LatticeNode> {
        self.local_mask(subset).map(|m| &self.nodes[m])
    }

    pub fn top(&self) -> &LatticeNode {
        &self.nodes[self.nodes.len() - 1]
    }

    pub fn bottom(&self) -> &LatticeNode {
        &self.nodes[0]
    }

    /// Nodes per level, bottom first.
    pub fn level_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.order() + 1];
        for node in &self.nodes {
            sizes[node.level()] += 1;
        }
        sizes
    }

    pub fn level(&self, k: usize) -> impl Iterator<Item = &LatticeNode> {
        self.nodes.iter().filter(move |n| n.level() == k)
    }

    pub fn meet(&self, x: AttributeSubset, y: AttributeSubset) -> Option<&LatticeNode> {
        self.node(x.meet(y))
    }

    pub fn join(&self, x: AttributeSubset, y: AttributeSubset) -> Option<&LatticeNode> {
        self.node(x.join(y))
    }
}

/// The lattice over every attribute of `sys`.
pub fn build_lattice(sys: &InformationSystem) -> Result<Lattice, KbError> {
    Lattice::build(
        sys,
        sys.all_attributes(),
        DEFAULT_ATTRIBUTE_CAP,
        "all attributes",
    )
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::fuzzy::{LinguisticTerm, LinguisticVariable, TriangularMf, VariableKind};
    use crate::kb::{parse_information_system, PhaseSpec};
    use crate::REFERENCE_KB;
    use proptest::prelude::*;

    pub(crate) fn reference_table() -> InformationSystem {
        parse_information_system(REFERENCE_KB).unwrap()
    }

    fn subset(sys: &InformationSystem, names: &[&str]) -> AttributeSubset {
        AttributeSubset::from_indices(names.iter().map(|n| sys.attribute_index(n).unwrap()))
    }

    fn diseases(sys: &InformationSystem, class: &ElementarySet) -> Vec<String> {
        class
            .members
            .iter()
            .map(|&r| sys.disease_name(sys.rows[r].disease).to_owned())
            .collect()
    }

    #[test]
    fn indiscernibility_on_reference_table() {
        let sys = reference_table();
        let (d2, d3) = (&sys.rows[1], &sys.rows[2]);
        assert!(indiscernible(
            d2,
            d3,
            subset(&sys, &["a1", "a2", "a3", "a4"])
        ));
        assert!(!indiscernible(d2, d3, subset(&sys, &["a5"])));
        assert!(indiscernible(
            &sys.rows[0],
            &sys.rows[3],
            AttributeSubset::EMPTY
        ));
    }

    #[test]
    fn classes_on_reference_table() {
        let sys = reference_table();
        let a1 = equivalence_classes(&sys, subset(&sys, &["a1"]));
        assert_eq!(a1.len(), 2);
        assert_eq!(diseases(&sys, &a1[0]), ["d1", "d2", "d3", "d5"]);
        assert_eq!(
            sys.attribute_term_name(0, a1[0].defining_values[0].1),
            "Moderate"
        );
        assert_eq!(diseases(&sys, &a1[1]), ["d4"]);
        assert_eq!(sys.attribute_term_name(0, a1[1].defining_values[0].1), "No");

        let a3 = equivalence_classes(&sys, subset(&sys, &["a3"]));
        let got: Vec<_> = a3.iter().map(|c| diseases(&sys, c)).collect();
        assert_eq!(got, vec![vec!["d1"], vec!["d2", "d3", "d4"], vec!["d5"]]);

        let empty = equivalence_classes(&sys, AttributeSubset::EMPTY);
        assert_eq!(empty.len(), 1);
        assert_eq!(empty[0].members, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn lattice_of_reference_table() {
        let sys = reference_table();
        let lattice = build_lattice(&sys).unwrap();
        assert_eq!(lattice.nodes.len(), 32);
        assert_eq!(lattice.level_sizes(), vec![1, 5, 10, 10, 5, 1]);
        let (x, y) = (subset(&sys, &["a1", "a2"]), subset(&sys, &["a2", "a3"]));
        assert_eq!(lattice.meet(x, y).unwrap().subset, subset(&sys, &["a2"]));
        assert_eq!(
            lattice.join(x, y).unwrap().subset,
            subset(&sys, &["a1", "a2", "a3"])
        );
        assert_eq!(lattice.top().classes.len(), 5);
        assert_eq!(lattice.bottom().classes.len(), 1);
    }

    #[test]
    fn lattice_cap() {
        let sys = reference_table();
        let err = Lattice::build(&sys, sys.all_attributes(), 4, "history").unwrap_err();
        assert_eq!(
            err,
            KbError::CapacityExceeded {
                phase: "history".into(),
                attributes: 5,
                cap: 4
            }
        );
    }

    #[test]
    fn empty_attribute_set_gives_single_node() {
        let sys = reference_table();
        let lattice = Lattice::build(&sys, AttributeSubset::EMPTY, 20, "none").unwrap();
        assert_eq!(lattice.nodes.len(), 1);
        assert_eq!(lattice.level_sizes(), vec![1]);
        assert_eq!(lattice.top().classes.len(), 1);
    }

    /// Random system with `n` attributes of `terms` terms each.
    pub(crate) fn synthetic(
        n: usize,
        terms: usize,
        rows: &[(usize, usize, Vec<usize>, f64)],
    ) -> InformationSystem {
        let term_names = ["T0", "T1", "T2", "T3"];
        let var = |name: String, k: usize, kind| {
            let width = 10.0;
            let step = width / (k.max(2) - 1) as f64;
            let terms = (0..k)
                .map(|i| {
                    let b = step * i as f64;
                    let mf = match (i == 0, i + 1 == k) {
                        (true, _) => TriangularMf::new(0.0, 0.0, step),
                        (false, true) => TriangularMf::new(b - step, b, b),
                        (false, false) => TriangularMf::new(b - step, b, b + step),
                    }
                    .unwrap();
                    LinguisticTerm {
                        name: term_names[i].into(),
                        mf,
                    }
                })
                .collect();
            LinguisticVariable::new(name, [0.0, width], terms, kind).unwrap()
        };
        let diseases = rows.iter().map(|r| r.0).max().unwrap_or(0) + 1;
        InformationSystem {
            name: "synthetic".into(),
            attributes: (0..n)
                .map(|i| var(format!("x{i}"), terms, VariableKind::InputAttribute))
                .collect(),
            attribute_descriptions: vec![None; n],
            output: var("out".into(), 4, VariableKind::DiseaseOutput),
            diseases: (0..diseases)
                .map(|d| crate::kb::Disease {
                    name: format!("d{d}"),
                    description: None,
                })
                .collect(),
            phases: vec![PhaseSpec {
                index: 1,
                name: "only".into(),
                attributes: AttributeSubset::from_indices(0..n),
            }],
            rows: rows
                .iter()
                .map(|(d, t, terms, r)| InfoRow {
                    disease: *d,
                    disease_term: *t,
                    attr_terms: terms.clone(),
                    reliability: *r,
                })
                .collect(),
        }
    }

    pub(crate) fn arb_system() -> impl Strategy<Value = InformationSystem> {
        (1usize..=4, 2usize..=3).prop_flat_map(|(n, k)| {
            let row = (
                0usize..4,
                0usize..4,
                proptest::collection::vec(0..k, n),
                0.0..=1.0f64,
            );
            proptest::collection::vec(row, 1..=8).prop_map(move |rows| synthetic(n, k, &rows))
        })
    }

    /// O(M²) grouping straight from the pairwise relation.
    fn brute_force_classes(sys: &InformationSystem, subset: AttributeSubset) -> Vec<Vec<usize>> {
        let m = sys.rows.len();
        let mut assigned = vec![false; m];
        let mut out = Vec::new();
        for i in 0..m {
            if assigned[i] {
                continue;
            }
            let class: Vec<usize> = (0..m)
                .filter(|&j| indiscernible(&sys.rows[i], &sys.rows[j], subset))
                .collect();
            for &j in &class {
                assigned[j] = true;
            }
            out.push(class);
        }
        out
    }

    proptest! {
        #[test]
        fn classes_partition_rows(sys in arb_system()) {
            let lattice = build_lattice(&sys).unwrap();
            for node in &lattice.nodes {
                let mut seen = vec![0; sys.rows.len()];
                for class in &node.classes {
                    for &r in &class.members {
                        seen[r] += 1;
                        for &(a, t) in &class.defining_values {
                            prop_assert_eq!(sys.rows[r].term_of(a), t);
                        }
                    }
                }
                prop_assert!(seen.iter().all(|&c| c == 1));
            }
        }

        #[test]
        fn finer_subsets_refine(sys in arb_system()) {
            let lattice = build_lattice(&sys).unwrap();
            for small in &lattice.nodes {
                for big in lattice.nodes.iter().filter(|b| small.subset.is_subset_of(b.subset)) {
                    for class in &big.classes {
                        let containing = small
                            .classes
                            .iter()
                            .filter(|c| class.members.iter().all(|r| c.members.contains(r)))
                            .count();
                        prop_assert_eq!(containing, 1);
                    }
                }
            }
        }

        #[test]
        fn matches_brute_force(sys in arb_system()) {
            for subset in sys.all_attributes().subsets() {
                let fast: Vec<Vec<usize>> =
                    equivalence_classes(&sys, subset).into_iter().map(|c| c.members).collect();
                prop_assert_eq!(fast, brute_force_classes(&sys, subset));
            }
        }
    }
}
