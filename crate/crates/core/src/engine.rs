//! Online coefficient evaluator for systems of q-difference equations.
//!
//! Each expression node caches the coefficients of its series in the grading
//! variable `t` and extends them on demand, in order. A solution series asks
//! its defining expression for coefficient `n`; if that request comes back to
//! the same coefficient before it is known, the system is not contractive.

use thiserror::Error;

use crate::ring::{Ring, RingError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("equation is not contractive: coefficient {index} of unknown {unknown} depends on itself")]
    NonContractive { unknown: usize, index: usize },
    #[error("denominator has vanishing constant term")]
    SingularDenominator,
    #[error("ring arithmetic failed at coefficient {index}: {source}")]
    Ring { index: usize, source: RingError },
}

pub type NodeId = usize;

#[derive(Clone, Debug)]
enum Node<E> {
    Unknown(usize),
    /// Coefficient `n` is multiplied by `q^{t·n}` and `a^w` by `q^{a·w}`.
    Shift {
        child: NodeId,
        t: u64,
        a: i64,
    },
    Mono {
        deg: usize,
        coef: E,
    },
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Div(NodeId, NodeId),
    Neg(NodeId),
}

pub struct Engine<R: Ring> {
    ring: R,
    nodes: Vec<Node<R::E>>,
    val: Vec<usize>,
    cache: Vec<Vec<R::E>>,
    roots: Vec<Option<NodeId>>,
    unknown_nodes: Vec<NodeId>,
    unknown_val: Vec<usize>,
    busy: Vec<bool>,
}

const NO_VAL: usize = usize::MAX / 4;

impl<R: Ring> Engine<R> {
    pub fn new(ring: R) -> Self {
        Engine {
            ring,
            nodes: Vec::new(),
            val: Vec::new(),
            cache: Vec::new(),
            roots: Vec::new(),
            unknown_nodes: Vec::new(),
            unknown_val: Vec::new(),
            busy: Vec::new(),
        }
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    fn push(&mut self, node: Node<R::E>, val: usize) -> NodeId {
        self.nodes.push(node);
        self.val.push(val.min(NO_VAL));
        self.cache.push(Vec::new());
        self.nodes.len() - 1
    }

    /// Declares a solution series whose coefficients vanish below `valuation`.
    pub fn unknown(&mut self, valuation: usize) -> (usize, NodeId) {
        let idx = self.roots.len();
        let id = self.push(Node::Unknown(idx), valuation);
        self.roots.push(None);
        self.unknown_nodes.push(id);
        self.unknown_val.push(valuation);
        self.busy.push(false);
        (idx, id)
    }

    pub fn set_root(&mut self, unknown: usize, root: NodeId) {
        self.roots[unknown] = Some(root);
    }

    pub fn unknown_node(&self, unknown: usize) -> NodeId {
        self.unknown_nodes[unknown]
    }

    pub fn mono(&mut self, deg: usize, coef: R::E) -> NodeId {
        let v = if self.ring.is_zero(&coef) { NO_VAL } else { deg };
        self.push(Node::Mono { deg, coef }, v)
    }

    pub fn shift(&mut self, child: NodeId, t: u64, a: i64) -> NodeId {
        if t == 0 && a == 0 {
            return child;
        }
        let v = self.val[child];
        self.push(Node::Shift { child, t, a }, v)
    }

    pub fn add(&mut self, x: NodeId, y: NodeId) -> NodeId {
        let v = self.val[x].min(self.val[y]);
        self.push(Node::Add(x, y), v)
    }

    pub fn sub(&mut self, x: NodeId, y: NodeId) -> NodeId {
        let v = self.val[x].min(self.val[y]);
        self.push(Node::Sub(x, y), v)
    }

    pub fn neg(&mut self, x: NodeId) -> NodeId {
        let v = self.val[x];
        self.push(Node::Neg(x), v)
    }

    pub fn mul(&mut self, x: NodeId, y: NodeId) -> NodeId {
        let v = self.val[x].saturating_add(self.val[y]);
        self.push(Node::Mul(x, y), v)
    }

    /// Quotient; the denominator must have a nonzero constant term.
    pub fn div(&mut self, x: NodeId, y: NodeId) -> Result<NodeId, EngineError> {
        if self.val[y] > 0 {
            return Err(EngineError::SingularDenominator);
        }
        let v = self.val[x];
        Ok(self.push(Node::Div(x, y), v))
    }

    /// Coefficient `n` of node `id`.
    pub fn coeff(&mut self, id: NodeId, n: usize) -> Result<R::E, EngineError> {
        self.ensure(id, n)?;
        Ok(self.cache[id][n].clone())
    }

    fn get(&mut self, id: NodeId, n: usize) -> Result<R::E, EngineError> {
        if n < self.val[id] {
            return Ok(self.ring.zero());
        }
        self.ensure(id, n)?;
        Ok(self.cache[id][n].clone())
    }

    fn ensure(&mut self, id: NodeId, n: usize) -> Result<(), EngineError> {
        while self.cache[id].len() <= n {
            let idx = self.cache[id].len();
            let v = self.compute(id, idx)?;
            self.cache[id].push(v);
        }
        Ok(())
    }

    fn ring_err(index: usize) -> impl Fn(RingError) -> EngineError {
        move |source| EngineError::Ring { index, source }
    }

    fn compute(&mut self, id: NodeId, n: usize) -> Result<R::E, EngineError> {
        if n < self.val[id] {
            return Ok(self.ring.zero());
        }
        let node = self.nodes[id].clone();
        match node {
            Node::Unknown(u) => {
                if self.busy[u] {
                    return Err(EngineError::NonContractive { unknown: u, index: n });
                }
                let root = self.roots[u].expect("unknown without defining equation");
                self.busy[u] = true;
                let r = self.get(root, n);
                self.busy[u] = false;
                r
            }
            Node::Shift { child, t, a } => {
                let c = self.get(child, n)?;
                self.ring.scale(&c, t * n as u64, a).map_err(Self::ring_err(n))
            }
            Node::Mono { deg, coef } => Ok(if n == deg { coef } else { self.ring.zero() }),
            Node::Add(x, y) => {
                let a = self.get(x, n)?;
                let b = self.get(y, n)?;
                Ok(self.ring.add(&a, &b))
            }
            Node::Sub(x, y) => {
                let a = self.get(x, n)?;
                let b = self.get(y, n)?;
                Ok(self.ring.sub(&a, &b))
            }
            Node::Neg(x) => {
                let a = self.get(x, n)?;
                Ok(self.ring.neg(&a))
            }
            Node::Mul(x, y) => {
                let (vx, vy) = (self.val[x], self.val[y]);
                let mut acc = self.ring.zero();
                if n < vx + vy {
                    return Ok(acc);
                }
                for i in vx..=(n - vy) {
                    let a = self.get(x, i)?;
                    if self.ring.is_zero(&a) {
                        continue;
                    }
                    let b = self.get(y, n - i)?;
                    if self.ring.is_zero(&b) {
                        continue;
                    }
                    acc = self.ring.add(&acc, &self.ring.mul(&a, &b));
                }
                Ok(acc)
            }
            Node::Div(x, y) => {
                let vc = self.val[id];
                let mut acc = self.get(x, n)?;
                for i in 1..=(n - vc) {
                    let b = self.get(y, i)?;
                    if self.ring.is_zero(&b) {
                        continue;
                    }
                    let c = self.cache[id][n - i].clone();
                    acc = self.ring.sub(&acc, &self.ring.mul(&b, &c));
                }
                let b0 = self.get(y, 0)?;
                if self.ring.is_zero(&b0) {
                    return Err(EngineError::SingularDenominator);
                }
                if self.ring.is_one(&b0) {
                    return Ok(acc);
                }
                self.ring.div(&acc, &b0).map_err(Self::ring_err(n))
            }
        }
    }

    /// Coefficients `0..=order` of unknown `u`.
    pub fn solve(&mut self, u: usize, order: usize) -> Result<Vec<R::E>, EngineError> {
        let id = self.unknown_nodes[u];
        self.ensure(id, order)?;
        Ok(self.cache[id][..=order].to_vec())
    }

    pub fn unknown_valuation(&self, u: usize) -> usize {
        self.unknown_val[u]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::NumRing;

    #[test]
    fn geometric_series() {
        // P = t + t·P  →  P = t/(1−t)
        let mut e = Engine::new(NumRing { q: 0.5 });
        let (u, p) = e.unknown(1);
        let t = e.mono(1, 1.0);
        let tp = e.mul(t, p);
        let root = e.add(t, tp);
        e.set_root(u, root);
        let c = e.solve(u, 5).unwrap();
        assert_eq!(c, vec![0.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn self_reference_is_rejected() {
        // P = t + P has no contractive fixed point
        let mut e = Engine::new(NumRing { q: 0.5 });
        let (u, p) = e.unknown(1);
        let t = e.mono(1, 1.0);
        let root = e.add(t, p);
        e.set_root(u, root);
        assert!(matches!(e.solve(u, 3), Err(EngineError::NonContractive { .. })));
    }

    #[test]
    fn division_by_series() {
        // P = t/(1 − P)  gives Catalan numbers
        let mut e = Engine::new(NumRing { q: 1.0 });
        let (u, p) = e.unknown(1);
        let t = e.mono(1, 1.0);
        let one = e.mono(0, 1.0);
        let d = e.sub(one, p);
        let root = e.div(t, d).unwrap();
        e.set_root(u, root);
        let c = e.solve(u, 6).unwrap();
        assert_eq!(c, vec![0.0, 1.0, 1.0, 2.0, 5.0, 14.0, 42.0]);
    }
}
