use super::{InferenceError, MatchingMode};
use crate::kb::{AttributeSubset, CompiledKb, Rule};

/// Rules of the lattice nodes matched by `provided` within `phase`.
///
/// Rules come out grouped by node in ascending mask order, each node's rules
/// in their stored order.
pub fn select_rules(
    kb: &CompiledKb,
    phase: usize,
    provided: AttributeSubset,
    mode: MatchingMode,
) -> Result<Vec<&Rule>, InferenceError> {
    let (spec, lattice) = kb.phase(phase).ok_or(InferenceError::UnknownPhase(phase))?;
    if provided.is_empty() {
        return Err(InferenceError::NoInputs { phase });
    }
    if let Some(a) = provided.iter().find(|&a| !spec.attributes.contains(a)) {
        return Err(InferenceError::AttributeNotInPhase {
            attribute: kb.system.attribute_name(a).to_owned(),
            phase,
        });
    }
    let node_rules = |s: AttributeSubset| lattice.node(s).into_iter().flat_map(|n| n.rules.iter());
    Ok(match mode {
        MatchingMode::StrictLevel => node_rules(provided).collect(),
        MatchingMode::SubsetClosure => provided
            .subsets()
            .filter(|s| !s.is_empty())
            .flat_map(node_rules)
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference_kb;

    #[test]
    fn strict_top_is_the_table() {
        let kb = reference_kb();
        let rules = select_rules(
            &kb,
            1,
            kb.system.all_attributes(),
            MatchingMode::StrictLevel,
        )
        .unwrap();
        assert_eq!(rules.len(), 5);
        assert!(rules.iter().all(|r| r.antecedent.len() == 5));
        let rows: Vec<usize> = rules.iter().map(|r| r.row).collect();
        assert_eq!(rows, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn closure_covers_all_nonempty_nodes() {
        let kb = reference_kb();
        let rules = select_rules(
            &kb,
            1,
            kb.system.all_attributes(),
            MatchingMode::SubsetClosure,
        )
        .unwrap();
        // Brute force: every nonempty submask of 5 attributes, each node holding 5 rules.
        let expected: usize = (1u64..32)
            .map(|m| kb.node_rules(AttributeSubset::from_mask(m)).unwrap().len())
            .sum();
        assert_eq!(expected, 31 * 5);
        assert_eq!(rules.len(), expected);
        let mut nodes: Vec<u64> = rules.iter().map(|r| r.origin.subset.mask()).collect();
        nodes.dedup();
        assert_eq!(nodes.len(), 31);
    }

    #[test]
    fn modes_coincide_for_one_attribute() {
        let kb = reference_kb();
        let a1 = AttributeSubset::from_indices([0]);
        let strict = select_rules(&kb, 1, a1, MatchingMode::StrictLevel).unwrap();
        let closure = select_rules(&kb, 1, a1, MatchingMode::SubsetClosure).unwrap();
        assert_eq!(strict.len(), 5);
        assert_eq!(strict, closure);
    }

    #[test]
    fn empty_and_foreign_inputs() {
        let kb = reference_kb();
        assert_eq!(
            select_rules(&kb, 1, AttributeSubset::EMPTY, MatchingMode::SubsetClosure),
            Err(InferenceError::NoInputs { phase: 1 })
        );
        assert_eq!(
            select_rules(
                &kb,
                2,
                AttributeSubset::from_indices([0]),
                MatchingMode::SubsetClosure
            ),
            Err(InferenceError::UnknownPhase(2))
        );
    }
}
