//! Variable interning: names mapped to dense indices.
//!
//! State variables occupy indices `0..n_state`; parameter variables
//! (constant along the flow) follow. Exponent vectors of polynomials are
//! fixed-length over this table.

use super::SymbolicError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarSet {
    names: Vec<String>,
    n_state: usize,
}

impl VarSet {
    /// Builds a table with the given state and parameter names.
    /// Names must be pairwise distinct.
    pub fn new<S: Into<String>>(state: Vec<S>, params: Vec<S>) -> Result<Self, SymbolicError> {
        let mut names: Vec<String> = state.into_iter().map(Into::into).collect();
        let n_state = names.len();
        names.extend(params.into_iter().map(Into::into));
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                if names[i] == names[j] {
                    return Err(SymbolicError::UnknownVariable(format!(
                        "duplicate variable `{}`",
                        names[i]
                    )));
                }
            }
        }
        Ok(VarSet { names, n_state })
    }

    /// State-only table, convenient in tests.
    pub fn states<S: Into<String>>(state: Vec<S>) -> Self {
        Self::new(state, Vec::new()).expect("distinct names")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn n_state(&self) -> usize {
        self.n_state
    }

    pub fn n_params(&self) -> usize {
        self.names.len() - self.n_state
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn is_state(&self, idx: usize) -> bool {
        idx < self.n_state
    }

    pub fn is_param(&self, idx: usize) -> bool {
        idx >= self.n_state
    }

    /// Indices of all state variables.
    pub fn state_indices(&self) -> impl Iterator<Item = usize> {
        0..self.n_state
    }

    /// Indices of all parameter variables.
    pub fn param_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.n_state..self.names.len()
    }

    /// Table with parameters removed (after substitution).
    pub fn without_params(&self) -> VarSet {
        VarSet {
            names: self.names[..self.n_state].to_vec(),
            n_state: self.n_state,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_and_param_indices_are_disjoint() {
        let vs = VarSet::new(vec!["x1", "x2"], vec!["a"]).unwrap();
        assert_eq!(vs.n_state(), 2);
        assert_eq!(vs.n_params(), 1);
        assert!(vs.is_state(0) && vs.is_state(1) && vs.is_param(2));
        assert_eq!(vs.index_of("a"), Some(2));
        assert_eq!(vs.index_of("b"), None);
    }

    #[test]
    fn duplicate_names_rejected() {
        assert!(VarSet::new(vec!["x", "x"], Vec::new()).is_err());
        assert!(VarSet::new(vec!["x"], vec!["x"]).is_err());
    }
}
