//! Partial types: sets of one-free-variable formulas whose solution sets
//! form a filter, i.e. have no empty finite intersection.

use thiserror::Error;

use crate::logic::Formula;
use crate::model::{solution_set, EvalError, Model};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("formula must have exactly one free variable, found {found:?}")]
    WrongFreeVariables { found: Vec<String> },
    #[error("formulas must share one type variable; found both `{first}` and `{second}`")]
    MixedTypeVariables { first: String, second: String },
    #[error("element literal {element} used but not among the parameters {params:?}")]
    ParamNotDeclared { element: usize, params: Vec<usize> },
    #[error("not a partial type: formulas {indices:?} have empty intersection")]
    NotAPartialType { indices: Vec<usize> },
    #[error("map is not an embedding: {0}")]
    NotAnEmbedding(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A candidate partial type over a model: formulas in one free variable with
/// parameters substituted as element literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialType {
    pub var: String,
    pub params: Vec<usize>,
    pub formulas: Vec<Formula>,
}

/// Outcome of checking the filter condition on the solution sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeCheck {
    pub is_partial_type: bool,
    /// Elements satisfying every formula (the realization set).
    pub realizations: Vec<usize>,
    /// When not a partial type: a minimal subfamily with empty intersection.
    pub empty_core: Option<Vec<usize>>,
}

/// Checks whether the formulas' solution sets form a filter base: every
/// finite intersection nonempty, which over a finite model reduces to the
/// full intersection being nonempty.
pub fn check_partial_type(
    model: &Model,
    params: &[usize],
    formulas: &[Formula],
) -> Result<TypeCheck, TypeError> {
    let var = type_variable(formulas)?;
    let param_set: std::collections::BTreeSet<usize> = params.iter().copied().collect();
    for f in formulas {
        for e in f.element_literals() {
            if !param_set.contains(&e) {
                return Err(TypeError::ParamNotDeclared {
                    element: e,
                    params: params.to_vec(),
                });
            }
        }
    }

    let sets: Vec<Vec<bool>> = formulas
        .iter()
        .map(|f| membership_vector(model, f, &var))
        .collect::<Result<_, _>>()?;

    let n = model.size();
    let mut intersection = vec![true; n];
    for s in &sets {
        for (acc, &b) in intersection.iter_mut().zip(s) {
            *acc &= b;
        }
    }
    let realizations: Vec<usize> = (0..n).filter(|&e| intersection[e]).collect();
    if !realizations.is_empty() {
        return Ok(TypeCheck {
            is_partial_type: true,
            realizations,
            empty_core: None,
        });
    }

    // Greedily shrink to a minimal subfamily that still has empty meet.
    let mut core: Vec<usize> = (0..formulas.len()).collect();
    let empty_meet = |indices: &[usize]| -> bool {
        (0..n).all(|e| indices.iter().any(|&i| !sets[i][e]))
    };
    let mut i = 0;
    while i < core.len() {
        let mut trial = core.clone();
        trial.remove(i);
        if empty_meet(&trial) {
            core = trial;
        } else {
            i += 1;
        }
    }
    Ok(TypeCheck {
        is_partial_type: false,
        realizations: Vec::new(),
        empty_core: Some(core),
    })
}

/// The realization set of a valid partial type; errors when the formulas do
/// not form one.
pub fn realizations(model: &Model, p: &PartialType) -> Result<Vec<usize>, TypeError> {
    let check = check_partial_type(model, &p.params, &p.formulas)?;
    if !check.is_partial_type {
        return Err(TypeError::NotAPartialType {
            indices: check.empty_core.unwrap_or_default(),
        });
    }
    Ok(check.realizations)
}

/// The shared free variable of the formulas; defaults to `x` for the empty
/// list (whose intersection is the whole domain).
fn type_variable(formulas: &[Formula]) -> Result<String, TypeError> {
    let mut var: Option<String> = None;
    for f in formulas {
        let free: Vec<String> = f.free_variables().into_iter().collect();
        if free.len() != 1 {
            return Err(TypeError::WrongFreeVariables { found: free });
        }
        match &var {
            None => var = Some(free[0].clone()),
            Some(v) if *v != free[0] => {
                return Err(TypeError::MixedTypeVariables {
                    first: v.clone(),
                    second: free[0].clone(),
                })
            }
            _ => {}
        }
    }
    Ok(var.unwrap_or_else(|| "x".to_string()))
}

fn membership_vector(model: &Model, f: &Formula, var: &str) -> Result<Vec<bool>, TypeError> {
    let set = solution_set(model, f, &[var])?;
    let mut out = vec![false; model.size()];
    for t in &set.tuples {
        out[t[0]] = true;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    #[test]
    fn interval_type_realized_by_midpoint() {
        let m = Model::chain(5);
        let fs = vec![
            parse_formula("1 < x", m.signature()).unwrap(),
            parse_formula("x < 3", m.signature()).unwrap(),
        ];
        let check = check_partial_type(&m, &[1, 3], &fs).unwrap();
        assert!(check.is_partial_type);
        assert_eq!(check.realizations, vec![2]);
    }

    #[test]
    fn contradictory_cut_is_not_a_partial_type() {
        let m = Model::chain(5);
        let fs = vec![
            parse_formula("x < 1", m.signature()).unwrap(),
            parse_formula("3 < x", m.signature()).unwrap(),
        ];
        let check = check_partial_type(&m, &[1, 3], &fs).unwrap();
        assert!(!check.is_partial_type);
        assert_eq!(check.empty_core, Some(vec![0, 1]));
    }

    #[test]
    fn tautology_realized_by_everything() {
        let m = Model::chain(4);
        let fs = vec![parse_formula("x = x", m.signature()).unwrap()];
        let check = check_partial_type(&m, &[], &fs).unwrap();
        assert!(check.is_partial_type);
        assert_eq!(check.realizations, vec![0, 1, 2, 3]);
    }

    #[test]
    fn named_element_type_is_a_point() {
        let m = Model::chain(4);
        let p = PartialType {
            var: "x".into(),
            params: vec![2],
            formulas: vec![parse_formula("x = 2", m.signature()).unwrap()],
        };
        assert_eq!(realizations(&m, &p).unwrap(), vec![2]);
    }

    #[test]
    fn empty_formula_list_realized_by_whole_domain() {
        let m = Model::chain(3);
        let p = PartialType {
            var: "x".into(),
            params: vec![],
            formulas: vec![],
        };
        assert_eq!(realizations(&m, &p).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn invalid_partial_type_rejected_by_realizations() {
        let m = Model::chain(3);
        let p = PartialType {
            var: "x".into(),
            params: vec![0],
            formulas: vec![parse_formula("x < 0", m.signature()).unwrap()],
        };
        assert!(matches!(
            realizations(&m, &p),
            Err(TypeError::NotAPartialType { .. })
        ));
    }

    #[test]
    fn sentences_rejected() {
        let m = Model::chain(3);
        let fs = vec![parse_formula("exists x. x < 1", m.signature()).unwrap()];
        assert!(matches!(
            check_partial_type(&m, &[1], &fs),
            Err(TypeError::WrongFreeVariables { .. })
        ));
    }

    #[test]
    fn two_free_variables_rejected() {
        let m = Model::chain(3);
        let fs = vec![parse_formula("x < y", m.signature()).unwrap()];
        assert!(matches!(
            check_partial_type(&m, &[], &fs),
            Err(TypeError::WrongFreeVariables { .. })
        ));
    }

    #[test]
    fn undeclared_parameter_rejected() {
        let m = Model::chain(3);
        let fs = vec![parse_formula("x < 2", m.signature()).unwrap()];
        assert!(matches!(
            check_partial_type(&m, &[], &fs),
            Err(TypeError::ParamNotDeclared { element: 2, .. })
        ));
    }

    #[test]
    fn minimal_core_omits_redundant_formulas() {
        let m = Model::chain(5);
        let fs = vec![
            parse_formula("x = x", m.signature()).unwrap(),
            parse_formula("x < 1", m.signature()).unwrap(),
            parse_formula("3 < x", m.signature()).unwrap(),
        ];
        let check = check_partial_type(&m, &[1, 3], &fs).unwrap();
        assert_eq!(check.empty_core, Some(vec![1, 2]));
    }
}
