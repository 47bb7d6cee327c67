use serde::{Deserialize, Serialize};

use super::{FuzzyError, TriangularMf};

/// Membership degree of every term of a variable, in term declaration order.
pub type Degrees = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariableKind {
    InputAttribute,
    DiseaseOutput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticTerm {
    pub name: String,
    pub mf: TriangularMf,
}

/// A named crisp universe partitioned (loosely) by triangular terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVariable")]
pub struct LinguisticVariable {
    name: String,
    universe: [f64; 2],
    terms: Vec<LinguisticTerm>,
    kind: VariableKind,
}

#[derive(Deserialize)]
struct RawVariable {
    name: String,
    universe: [f64; 2],
    terms: Vec<LinguisticTerm>,
    kind: VariableKind,
}

impl TryFrom<RawVariable> for LinguisticVariable {
    type Error = FuzzyError;

    fn try_from(raw: RawVariable) -> Result<Self, Self::Error> {
        Self::new(raw.name, raw.universe, raw.terms, raw.kind)
    }
}

impl LinguisticVariable {
    /// Validates term uniqueness, term supports and universe coverage.
    pub fn new(
        name: impl Into<String>,
        universe: [f64; 2],
        terms: Vec<LinguisticTerm>,
        kind: VariableKind,
    ) -> Result<Self, FuzzyError> {
        let name = name.into();
        let [lo, hi] = universe;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(FuzzyError::InvalidUniverse {
                variable: name,
                lo,
                hi,
            });
        }
        if terms.is_empty() {
            return Err(FuzzyError::NoTerms { variable: name });
        }
        for (i, term) in terms.iter().enumerate() {
            if terms[..i].iter().any(|t| t.name == term.name) {
                return Err(FuzzyError::DuplicateTerm {
                    variable: name,
                    term: term.name.clone(),
                });
            }
            if term.mf.a() < lo || term.mf.c() > hi {
                return Err(FuzzyError::TermOutsideUniverse {
                    variable: name,
                    term: term.name.clone(),
                    a: term.mf.a(),
                    c: term.mf.c(),
                    lo,
                    hi,
                });
            }
        }
        let var = Self {
            name,
            universe,
            terms,
            kind,
        };
        if let Some(x) = var.coverage_gap() {
            return Err(FuzzyError::CoverageGap {
                variable: var.name,
                x,
            });
        }
        Ok(var)
    }

    /// A point of the universe where every term is zero, if there is one.
    ///
    /// Positive regions are open intervals, so any uncovered stretch either
    /// touches an interval endpoint or contains the midpoint between two
    /// consecutive endpoints. Probing those candidates is exhaustive.
    fn coverage_gap(&self) -> Option<f64> {
        let [lo, hi] = self.universe;
        let mut points = vec![lo, hi];
        for term in &self.terms {
            let (l, r) = term.mf.positive_region();
            points.extend([l, r].into_iter().filter(|p| (lo..=hi).contains(p)));
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        let mids: Vec<f64> = points.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
        points
            .into_iter()
            .chain(mids)
            .find(|&x| self.terms.iter().all(|t| t.mf.membership(x) == 0.0))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn universe(&self) -> [f64; 2] {
        self.universe
    }

    pub fn lo(&self) -> f64 {
        self.universe[0]
    }

    pub fn hi(&self) -> f64 {
        self.universe[1]
    }

    pub fn kind(&self) -> VariableKind {
        self.kind
    }

    pub fn terms(&self) -> &[LinguisticTerm] {
        &self.terms
    }

    pub fn term_index(&self, name: &str) -> Option<usize> {
        self.terms.iter().position(|t| t.name == name)
    }

    pub fn term(&self, name: &str) -> Result<&LinguisticTerm, FuzzyError> {
        self.terms
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| FuzzyError::UnknownTerm {
                variable: self.name.clone(),
                term: name.to_owned(),
            })
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.lo()..=self.hi()).contains(&x)
    }

    pub fn check_in_universe(&self, x: f64) -> Result<(), FuzzyError> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(FuzzyError::OutOfUniverse {
                variable: self.name.clone(),
                value: x,
                lo: self.lo(),
                hi: self.hi(),
            })
        }
    }

    /// Degree of `x` in every term. Degrees are not normalized.
    pub fn fuzzify(&self, x: f64) -> Result<Degrees, FuzzyError> {
        self.check_in_universe(x)?;
        Ok(self.terms.iter().map(|t| t.mf.membership(x)).collect())
    }

    /// The term with the highest degree at `crisp`; earlier terms win ties.
    pub fn label_crisp(&self, crisp: f64) -> Result<&str, FuzzyError> {
        let degrees = self.fuzzify(crisp)?;
        let mut best = 0;
        for (i, &d) in degrees.iter().enumerate() {
            if d > degrees[best] {
                best = i;
            }
        }
        Ok(&self.terms[best].name)
    }
}
