//! Table factors over discrete variables.
//!
//! Variables are identified by their declaration index in the network.
//! Values are stored row-major with the first scope variable varying slowest.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FactorError {
    #[error("scope and cardinality lists differ in length ({scope} vs {cards})")]
    ShapeMismatch { scope: usize, cards: usize },
    #[error("factor needs {expected} values, got {got}")]
    WrongSize { expected: usize, got: usize },
    #[error("negative or non-finite factor value {0}")]
    BadValue(f64),
    #[error("variable {0} appears twice in the scope")]
    DuplicateVariable(usize),
    #[error("variable {0} not in factor scope")]
    NotInScope(usize),
    #[error("state {state} out of range for variable {var} (cardinality {card})")]
    StateOutOfRange { var: usize, state: usize, card: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    scope: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

/// Walks every assignment of `cards` in row-major order and tracks one flat
/// offset per table, each advanced by that table's per-position stride.
struct Odometer<const K: usize> {
    cards: Vec<usize>,
    strides: [Vec<usize>; K],
    digits: Vec<usize>,
    offsets: [usize; K],
}

impl<const K: usize> Odometer<K> {
    fn new(cards: Vec<usize>, strides: [Vec<usize>; K]) -> Self {
        let n = cards.len();
        Odometer {
            cards,
            strides,
            digits: vec![0; n],
            offsets: [0; K],
        }
    }

    fn advance(&mut self) {
        for pos in (0..self.cards.len()).rev() {
            self.digits[pos] += 1;
            for k in 0..K {
                self.offsets[k] += self.strides[k][pos];
            }
            if self.digits[pos] < self.cards[pos] {
                return;
            }
            for k in 0..K {
                self.offsets[k] -= self.strides[k][pos] * self.cards[pos];
            }
            self.digits[pos] = 0;
        }
    }
}

impl Factor {
    pub fn new(scope: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Result<Self, FactorError> {
        if scope.len() != cards.len() {
            return Err(FactorError::ShapeMismatch {
                scope: scope.len(),
                cards: cards.len(),
            });
        }
        for (i, v) in scope.iter().enumerate() {
            if scope[..i].contains(v) {
                return Err(FactorError::DuplicateVariable(*v));
            }
        }
        let expected: usize = cards.iter().product();
        if values.len() != expected {
            return Err(FactorError::WrongSize {
                expected,
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(FactorError::BadValue(*bad));
        }
        Ok(Factor { scope, cards, values })
    }

    pub fn scalar(value: f64) -> Self {
        Factor {
            scope: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    /// The all-ones factor, identity for [`Factor::product`].
    pub fn ones(scope: Vec<usize>, cards: Vec<usize>) -> Self {
        let size = cards.iter().product();
        Factor {
            scope,
            cards,
            values: vec![1.0; size],
        }
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn contains(&self, var: usize) -> bool {
        self.scope.contains(&var)
    }

    fn position(&self, var: usize) -> Result<usize, FactorError> {
        self.scope
            .iter()
            .position(|&v| v == var)
            .ok_or(FactorError::NotInScope(var))
    }

    /// Value at an assignment given in scope order.
    pub fn value_at(&self, assignment: &[usize]) -> f64 {
        let idx = assignment
            .iter()
            .zip(strides(&self.cards))
            .map(|(a, s)| a * s)
            .sum::<usize>();
        self.values[idx]
    }

    /// Pointwise product. The result scope is this factor's scope followed by
    /// the other factor's variables not already present.
    ///
    /// Shared variables must have equal cardinality in both factors.
    pub fn product(&self, other: &Factor) -> Factor {
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        for (v, c) in other.scope.iter().zip(&other.cards) {
            match scope.iter().position(|x| x == v) {
                Some(p) => assert_eq!(cards[p], *c, "cardinality mismatch for variable {v}"),
                None => {
                    scope.push(*v);
                    cards.push(*c);
                }
            }
        }

        let project = |f: &Factor| -> Vec<usize> {
            let fs = strides(&f.cards);
            scope
                .iter()
                .map(|v| f.scope.iter().position(|x| x == v).map_or(0, |p| fs[p]))
                .collect()
        };
        let (sa, sb) = (project(self), project(other));

        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut odo = Odometer::new(cards.clone(), [sa, sb]);
        for _ in 0..size {
            values.push(self.values[odo.offsets[0]] * other.values[odo.offsets[1]]);
            odo.advance();
        }
        Factor { scope, cards, values }
    }

    /// Sums `var` out of the factor.
    pub fn marginalize(&self, var: usize) -> Result<Factor, FactorError> {
        let pos = self.position(var)?;
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(pos);
        cards.remove(pos);

        let mut out_strides = strides(&cards);
        out_strides.insert(pos, 0);
        let mut values = vec![0.0; cards.iter().product()];
        let mut odo = Odometer::new(self.cards.clone(), [out_strides]);
        for v in &self.values {
            values[odo.offsets[0]] += v;
            odo.advance();
        }
        Ok(Factor { scope, cards, values })
    }

    /// Keeps only entries consistent with `var = state` and drops `var`.
    pub fn restrict(&self, var: usize, state: usize) -> Result<Factor, FactorError> {
        let pos = self.position(var)?;
        let card = self.cards[pos];
        if state >= card {
            return Err(FactorError::StateOutOfRange { var, state, card });
        }
        let mut in_strides = strides(&self.cards);
        let base = state * in_strides.remove(pos);
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(pos);
        cards.remove(pos);

        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut odo = Odometer::new(cards.clone(), [in_strides]);
        for _ in 0..size {
            values.push(self.values[base + odo.offsets[0]]);
            odo.advance();
        }
        Ok(Factor { scope, cards, values })
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}
