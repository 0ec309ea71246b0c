//! JSON documents for instances and finite-element inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::lp::RowSense;
use crate::model::{inequality_to_equality, BbpInstance, BilinearForm, BilinearRow, FeInput};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FormDoc {
    #[serde(rename = "qTriplets", default)]
    pub q: Vec<(usize, usize, f64)>,
    #[serde(rename = "aLin", default)]
    pub a: Vec<(usize, f64)>,
    #[serde(rename = "bLin", default)]
    pub b: Vec<(usize, f64)>,
    #[serde(rename = "const", default)]
    pub constant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowDoc {
    pub sense: RowSense,
    #[serde(flatten)]
    pub form: FormDoc,
    #[serde(default)]
    pub elastic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub n1: usize,
    pub n2: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default)]
    pub objective: FormDoc,
    #[serde(default)]
    pub rows: Vec<RowDoc>,
}

impl From<&BilinearForm> for FormDoc {
    fn from(f: &BilinearForm) -> Self {
        FormDoc { q: f.q.clone(), a: f.a.clone(), b: f.b.clone(), constant: f.constant }
    }
}

impl From<&FormDoc> for BilinearForm {
    fn from(f: &FormDoc) -> Self {
        BilinearForm { q: f.q.clone(), a: f.a.clone(), b: f.b.clone(), constant: f.constant }
    }
}

impl InstanceDoc {
    pub fn from_instance(inst: &BbpInstance) -> Self {
        InstanceDoc {
            n1: inst.n1,
            n2: inst.n2,
            lower: inst.lower.clone(),
            upper: inst.upper.clone(),
            objective: (&inst.objective).into(),
            rows: inst
                .rows
                .iter()
                .map(|r| RowDoc { sense: RowSense::Eq, form: (&r.form).into(), elastic: r.elastic })
                .collect(),
        }
    }

    /// Build the equality-only instance, appending one slack y-variable per
    /// inequality row after the declared y-variables.
    pub fn into_instance(&self) -> Result<BbpInstance> {
        let mut inst = BbpInstance {
            n1: self.n1,
            n2: self.n2,
            objective: (&self.objective).into(),
            rows: Vec::with_capacity(self.rows.len()),
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        };
        let diags = inst.validate();
        if let Some(d) = diags.first() {
            return Err(Error::InvalidInstance(d.to_string()));
        }
        let xb: Vec<Interval> = (0..self.n1).map(|i| inst.x_interval(i)).collect();
        let yb: Vec<Interval> = (0..self.n2).map(|j| inst.y_interval(j)).collect();
        let mut slacks = Vec::new();
        for (k, row) in self.rows.iter().enumerate() {
            let form: BilinearForm = (&row.form).into();
            let probe = BbpInstance { rows: vec![BilinearRow { form: form.clone(), elastic: false }], ..inst.clone() };
            if let Some(d) = probe.validate().first() {
                return Err(Error::InvalidInstance(format!("row {k}: {}", d.message)));
            }
            let slack = self.n2 + slacks.len();
            let (eq, bounds) = inequality_to_equality(&form, row.sense, &xb, &yb, slack, k)?;
            if let Some(b) = bounds {
                slacks.push(b);
            }
            inst.rows.push(BilinearRow { form: eq, elastic: row.elastic });
        }
        for s in slacks {
            inst.n2 += 1;
            inst.lower.push(s.lo);
            inst.upper.push(s.hi);
        }
        Ok(inst)
    }
}

pub fn parse_instance(text: &str) -> Result<BbpInstance> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.into_instance()
}

pub fn write_instance(inst: &BbpInstance) -> String {
    serde_json::to_string_pretty(&InstanceDoc::from_instance(inst)).expect("instance serializes")
}

pub fn parse_fe(text: &str) -> Result<FeInput> {
    let fe: FeInput = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    fe.check()?;
    Ok(fe)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_VAR: &str = r#"{
        "n1": 1, "n2": 1,
        "lower": [0, 0], "upper": [1, 1],
        "objective": {"aLin": [[0, 1]], "bLin": [[0, 1]]},
        "rows": [{"sense": "=", "qTriplets": [[0, 0, 1]], "const": -0.25}]
    }"#;

    #[test]
    fn parses_two_variable_example() {
        let inst = parse_instance(TWO_VAR).unwrap();
        assert_eq!(inst.rows.len(), 1);
        assert_eq!(inst.rows[0].form.q, vec![(0, 0, 1.0)]);
        assert!(!inst.rows[0].elastic);
        assert_eq!(inst.objective.eval(&[0.5], &[0.5]), 1.0);
    }

    #[test]
    fn round_trips() {
        let inst = parse_instance(TWO_VAR).unwrap();
        assert_eq!(parse_instance(&write_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn inequality_adds_slack() {
        let text = r#"{"n1": 1, "n2": 1, "lower": [0, 0], "upper": [1, 1],
            "rows": [{"sense": "<=", "qTriplets": [[0, 0, 1]], "const": -0.5}]}"#;
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.n2, 2);
        assert_eq!((inst.lower[2], inst.upper[2]), (0.0, 0.5));
        assert_eq!(inst.rows[0].form.b, vec![(1, 1.0)]);
    }

    #[test]
    fn bad_index_is_an_error() {
        let text = r#"{"n1": 1, "n2": 1, "lower": [0, 0], "upper": [1, 1],
            "rows": [{"sense": "=", "qTriplets": [[1, 0, 1]]}]}"#;
        assert!(matches!(parse_instance(text), Err(Error::InvalidInstance(_))));
    }
}
