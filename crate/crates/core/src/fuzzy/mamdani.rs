use serde::{Deserialize, Serialize};

use super::{Degrees, FuzzyError, LinguisticVariable};

/// Default number of samples across an output universe.
pub const DEFAULT_RESOLUTION: usize = 1001;

/// Clip level for one output term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermActivation {
    pub term: String,
    pub level: f64,
}

impl TermActivation {
    pub fn new(term: impl Into<String>, level: f64) -> Self {
        Self {
            term: term.into(),
            level,
        }
    }
}

/// Fuzzified inputs, indexed by attribute position.
#[derive(Debug, Clone, PartialEq)]
pub struct Fuzzified {
    names: Vec<String>,
    degrees: Vec<Option<Degrees>>,
}

impl Fuzzified {
    pub fn new<I, S>(attribute_names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = attribute_names.into_iter().map(Into::into).collect();
        let degrees = vec![None; names.len()];
        Self { names, degrees }
    }

    pub fn insert(&mut self, attribute: usize, degrees: Degrees) {
        self.degrees[attribute] = Some(degrees);
    }

    pub fn get(&self, attribute: usize) -> Option<&Degrees> {
        self.degrees.get(attribute).and_then(Option::as_ref)
    }

    pub fn degree(&self, attribute: usize, term: usize) -> Result<f64, FuzzyError> {
        self.get(attribute)
            .map(|d| d[term])
            .ok_or_else(|| FuzzyError::MissingInput {
                attribute: self
                    .names
                    .get(attribute)
                    .cloned()
                    .unwrap_or_else(|| attribute.to_string()),
            })
    }

    pub fn provided(&self) -> impl Iterator<Item = usize> + '_ {
        self.degrees
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_some())
            .map(|(i, _)| i)
    }
}

/// AND over the clauses, realized as the minimum degree.
pub fn firing_strength(
    antecedent: impl IntoIterator<Item = (usize, usize)>,
    fuzzified: &Fuzzified,
) -> Result<f64, FuzzyError> {
    antecedent
        .into_iter()
        .try_fold(1.0f64, |acc, (attr, term)| {
            Ok(acc.min(fuzzified.degree(attr, term)?))
        })
}

/// Sampled output fuzzy set over the whole universe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedOutput {
    pub variable: String,
    pub samples: Vec<(f64, f64)>,
}

impl AggregatedOutput {
    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|&(_, m)| m == 0.0)
    }
}

/// Clip every activated term at its level and take the pointwise maximum.
pub fn clip_and_aggregate(
    var: &LinguisticVariable,
    activations: &[TermActivation],
    resolution: usize,
) -> Result<AggregatedOutput, FuzzyError> {
    if resolution < 2 {
        return Err(FuzzyError::InvalidResolution(resolution));
    }
    let clipped = activations
        .iter()
        .map(|act| Ok((var.term(&act.term)?.mf, act.level.clamp(0.0, 1.0))))
        .collect::<Result<Vec<_>, FuzzyError>>()?;

    let [lo, hi] = var.universe();
    let step = (hi - lo) / (resolution - 1) as f64;
    let samples = (0..resolution)
        .map(|i| {
            let x = if i == resolution - 1 {
                hi
            } else {
                lo + step * i as f64
            };
            let mu = clipped
                .iter()
                .map(|(mf, level)| mf.membership(x).min(*level))
                .fold(0.0, f64::max);
            (x, mu)
        })
        .collect();
    Ok(AggregatedOutput {
        variable: var.name().to_owned(),
        samples,
    })
}

/// Centre of area of the sampled set.
///
/// The samples are read as a piecewise-linear curve and both integrals are
/// taken exactly over it. A cell whose neighbours are straight lines with
/// different slopes is assumed to hide one kink (a clip point or a triangle
/// vertex off the grid); the kink is recovered by intersecting the two
/// neighbouring lines.
pub fn defuzz_centroid(agg: &AggregatedOutput) -> Result<f64, FuzzyError> {
    let s = &agg.samples;
    let (mut moment, mut area) = (0.0, 0.0);
    for i in 0..s.len().saturating_sub(1) {
        let ((x0, y0), (x1, y1)) = (s[i], s[i + 1]);
        let kink = (i >= 1 && i + 2 < s.len())
            .then(|| hidden_kink(s[i - 1], s[i], s[i + 1], s[i + 2]))
            .flatten();
        let pieces = match kink {
            Some(k) => [((x0, y0), k), (k, (x1, y1))],
            None => [((x0, y0), (x1, y1)), ((x1, y1), (x1, y1))],
        };
        for ((xa, ya), (xb, yb)) in pieces {
            let (a, m) = linear_integrals(xa, xb, ya, yb);
            area += a;
            moment += m;
        }
    }
    if area <= 0.0 {
        return Err(FuzzyError::NoActivation {
            variable: agg.variable.clone(),
        });
    }
    Ok(moment / area)
}

/// `(∫ y dx, ∫ x·y dx)` over a straight segment.
fn linear_integrals(x0: f64, x1: f64, y0: f64, y1: f64) -> (f64, f64) {
    let w = x1 - x0;
    (
        w * (y0 + y1) / 2.0,
        w * (x0 * (2.0 * y0 + y1) + x1 * (y0 + 2.0 * y1)) / 6.0,
    )
}

fn hidden_kink(
    (xl, yl): (f64, f64),
    (x0, y0): (f64, f64),
    (x1, y1): (f64, f64),
    (xr, yr): (f64, f64),
) -> Option<(f64, f64)> {
    const TOL: f64 = 1e-9;
    let left = (y0 - yl) / (x0 - xl);
    let mid = (y1 - y0) / (x1 - x0);
    let right = (yr - y1) / (xr - x1);
    if (left - mid).abs() <= TOL || (right - mid).abs() <= TOL || (left - right).abs() <= TOL {
        return None;
    }
    let t = (y1 - y0 - right * (x1 - x0)) / (left - right);
    let y = y0 + left * t;
    (t > 0.0 && t < x1 - x0 && (0.0..=1.0).contains(&y)).then_some((x0 + t, y))
}
