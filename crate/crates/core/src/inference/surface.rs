use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{infer_phase, InferenceError, InferenceOptions, PatientInputs};
use crate::kb::CompiledKb;

/// Crisp chance of one disease over a grid of two attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGrid {
    pub disease: String,
    pub x: String,
    pub y: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `cells[j][i]` is the value at `(xs[i], ys[j])`; `None` where no rule fired.
    pub cells: Vec<Vec<Option<f64>>>,
}

impl SurfaceGrid {
    /// Header row of x values, one row per y value, `NA` for no evidence.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\\{}", self.y, self.x);
        for x in &self.xs {
            write!(out, ",{x}").unwrap();
        }
        out.push('\n');
        for (y, row) in self.ys.iter().zip(&self.cells) {
            write!(out, "{y}").unwrap();
            for cell in row {
                match cell {
                    Some(v) => write!(out, ",{v}").unwrap(),
                    None => out.push_str(",NA"),
                }
            }
            out.push('\n');
        }
        out
    }
}

fn axis(lo: f64, hi: f64, resolution: usize) -> Vec<f64> {
    let step = (hi - lo) / (resolution - 1) as f64;
    (0..resolution)
        .map(|i| {
            if i + 1 == resolution {
                hi
            } else {
                lo + step * i as f64
            }
        })
        .collect()
}

/// Sweep `x` and `y` across their universes, holding `fixed` attributes
/// (other than the two swept ones) constant. Attributes that are neither
/// swept nor fixed are left out of the consultation.
pub fn surface_grid(
    kb: &CompiledKb,
    disease: &str,
    x: &str,
    y: &str,
    fixed: Option<&PatientInputs>,
    resolution: usize,
    options: &InferenceOptions,
) -> Result<SurfaceGrid, InferenceError> {
    let sys = &kb.system;
    if x == y {
        return Err(InferenceError::InvalidAxes(format!("both axes are `{x}`")));
    }
    if resolution < 2 {
        return Err(InferenceError::InvalidResolution(resolution));
    }
    let d = sys
        .disease_index(disease)
        .ok_or_else(|| InferenceError::UnknownDisease(disease.to_owned()))?;
    let xi = sys
        .attribute_index(x)
        .ok_or_else(|| InferenceError::UnknownAttribute(x.to_owned()))?;
    let yi = sys
        .attribute_index(y)
        .ok_or_else(|| InferenceError::UnknownAttribute(y.to_owned()))?;
    let phase = sys.phase_of(xi).expect("every attribute has a phase");
    if !phase.attributes.contains(yi) {
        return Err(InferenceError::InvalidAxes(format!(
            "`{x}` and `{y}` belong to different phases"
        )));
    }

    let xs = axis(sys.attributes[xi].lo(), sys.attributes[xi].hi(), resolution);
    let ys = axis(sys.attributes[yi].lo(), sys.attributes[yi].hi(), resolution);
    let mut inputs = fixed.cloned().unwrap_or_default();
    let mut cells = Vec::with_capacity(resolution);
    for &yv in &ys {
        let mut row = Vec::with_capacity(resolution);
        for &xv in &xs {
            inputs.values.insert(x.to_owned(), xv);
            inputs.values.insert(y.to_owned(), yv);
            let result = infer_phase(kb, phase.index, &inputs, options)?;
            let a = &result.assessments[d];
            row.push((!a.no_evidence).then_some(a.crisp_chance));
        }
        cells.push(row);
    }
    Ok(SurfaceGrid {
        disease: disease.to_owned(),
        x: x.to_owned(),
        y: y.to_owned(),
        xs,
        ys,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference_kb;

    #[test]
    fn shape_and_axes() {
        let kb = reference_kb();
        let g = surface_grid(&kb, "d1", "a1", "a4", None, 3, &InferenceOptions::default()).unwrap();
        assert_eq!(g.xs, vec![0.0, 5.0, 10.0]);
        assert_eq!(g.ys, vec![0.0, 5.0, 10.0]);
        assert_eq!(g.cells.len(), 3);
        assert!(g.cells.iter().all(|r| r.len() == 3));
        // a1=5, a4=5: the {a4} Moderate rule fires fully.
        assert!((g.cells[1][1].unwrap() - 260.0 / 3.0).abs() < 1e-3);
        // a1=0, a4=0: No/No matches nothing of d1's row.
        assert_eq!(g.cells[0][0], None);
        let csv = g.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("a4\\a1,0,5,10\n0,NA,"), "{csv}");
    }

    #[test]
    fn cells_match_direct_inference() {
        let kb = reference_kb();
        let opts = InferenceOptions::default();
        let fixed = PatientInputs::new().with("a3", 2.1);
        let g = surface_grid(&kb, "d2", "a2", "a5", Some(&fixed), 5, &opts).unwrap();
        for (j, &yv) in g.ys.iter().enumerate() {
            for (i, &xv) in g.xs.iter().enumerate() {
                let inputs = fixed.clone().with("a2", xv).with("a5", yv);
                let direct = infer_phase(&kb, 1, &inputs, &opts).unwrap();
                let a = direct.assessment("d2").unwrap();
                assert_eq!(g.cells[j][i], (!a.no_evidence).then_some(a.crisp_chance));
            }
        }
    }

    #[test]
    fn invalid_requests() {
        let kb = reference_kb();
        let opts = InferenceOptions::default();
        assert!(matches!(
            surface_grid(&kb, "d1", "a1", "a1", None, 3, &opts),
            Err(InferenceError::InvalidAxes(_))
        ));
        assert_eq!(
            surface_grid(&kb, "d9", "a1", "a2", None, 3, &opts),
            Err(InferenceError::UnknownDisease("d9".into()))
        );
        assert_eq!(
            surface_grid(&kb, "d1", "a1", "a2", None, 1, &opts),
            Err(InferenceError::InvalidResolution(1))
        );
    }
}
