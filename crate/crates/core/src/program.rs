//! Multivariate polynomial programs `phi: F_q^U -> F_q^V`.
//!
//! A program is a small expression DAG over named input tensors. Nodes only
//! refer to earlier nodes, so construction order is a topological order.
//! Constants are stored as signed integers and mapped into whichever field
//! the program is evaluated over.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::field::{FieldElement, PrimeModulus};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProgramError {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape { op: &'static str, left: Shape, right: Shape },
    #[error("expected {expected} input values, got {got}")]
    InputLength { expected: usize, got: usize },
    #[error("input tensor {index} has {got} entries, expected {expected}")]
    TensorLength { index: usize, expected: usize, got: usize },
    #[error("expected {expected} input tensors, got {got}")]
    TensorCount { expected: usize, got: usize },
    #[error("actual degree {actual} exceeds declared degree {declared}")]
    DegreeExceeded { actual: usize, declared: usize },
    #[error("unknown node id {0}")]
    UnknownNode(usize),
    #[error("input values belong to a different field than requested")]
    ModulusMismatch,
    #[error("cannot parse program description {0:?}")]
    Parse(String),
}

/// `rows x cols`; column vectors have `cols == 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shape {
    pub rows: usize,
    pub cols: usize,
}

impl Shape {
    pub const SCALAR: Shape = Shape { rows: 1, cols: 1 };

    pub fn len(self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }

    pub fn vector(n: usize) -> Shape {
        Shape { rows: n, cols: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Input(usize),
    Constant(Vec<i64>),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    /// Scalar (1x1) left operand broadcast over the right operand.
    Mul(NodeId, NodeId),
    ScalarMul(i64, NodeId),
    MatVec(NodeId, NodeId),
    ElemMul(NodeId, NodeId),
    ElemCube(NodeId),
    TransposeMatVec(NodeId, NodeId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputSlot {
    pub name: String,
    pub shape: Shape,
    pub offset: usize,
}

#[derive(Debug, Clone)]
pub struct ProgramBuilder {
    name: String,
    inputs: Vec<InputSlot>,
    nodes: Vec<Node>,
    shapes: Vec<Shape>,
    degrees: Vec<usize>,
}

impl ProgramBuilder {
    pub fn new(name: &str) -> Self {
        ProgramBuilder {
            name: name.to_owned(),
            inputs: Vec::new(),
            nodes: Vec::new(),
            shapes: Vec::new(),
            degrees: Vec::new(),
        }
    }

    fn push(&mut self, node: Node, shape: Shape, degree: usize) -> NodeId {
        self.nodes.push(node);
        self.shapes.push(shape);
        self.degrees.push(degree);
        NodeId(self.nodes.len() - 1)
    }

    fn shape(&self, id: NodeId) -> Result<Shape, ProgramError> {
        self.shapes.get(id.0).copied().ok_or(ProgramError::UnknownNode(id.0))
    }

    fn degree(&self, id: NodeId) -> usize {
        self.degrees[id.0]
    }

    pub fn input(&mut self, name: &str, rows: usize, cols: usize) -> NodeId {
        let shape = Shape { rows, cols };
        let offset = self.inputs.last().map_or(0, |s| s.offset + s.shape.len());
        self.inputs.push(InputSlot { name: name.to_owned(), shape, offset });
        self.push(Node::Input(self.inputs.len() - 1), shape, 1)
    }

    pub fn constant(&mut self, shape: Shape, values: Vec<i64>) -> Result<NodeId, ProgramError> {
        if values.len() != shape.len() {
            return Err(ProgramError::Shape { op: "constant", left: shape, right: Shape::vector(values.len()) });
        }
        Ok(self.push(Node::Constant(values), shape, 0))
    }

    fn same_shape(&self, op: &'static str, a: NodeId, b: NodeId) -> Result<Shape, ProgramError> {
        let (sa, sb) = (self.shape(a)?, self.shape(b)?);
        if sa != sb {
            return Err(ProgramError::Shape { op, left: sa, right: sb });
        }
        Ok(sa)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, ProgramError> {
        let s = self.same_shape("add", a, b)?;
        let d = self.degree(a).max(self.degree(b));
        Ok(self.push(Node::Add(a, b), s, d))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, ProgramError> {
        let s = self.same_shape("sub", a, b)?;
        let d = self.degree(a).max(self.degree(b));
        Ok(self.push(Node::Sub(a, b), s, d))
    }

    pub fn mul(&mut self, scalar: NodeId, b: NodeId) -> Result<NodeId, ProgramError> {
        let (sa, sb) = (self.shape(scalar)?, self.shape(b)?);
        if sa != Shape::SCALAR {
            return Err(ProgramError::Shape { op: "mul", left: sa, right: sb });
        }
        let d = self.degree(scalar) + self.degree(b);
        Ok(self.push(Node::Mul(scalar, b), sb, d))
    }

    pub fn scalar_mul(&mut self, c: i64, a: NodeId) -> Result<NodeId, ProgramError> {
        let s = self.shape(a)?;
        let d = self.degree(a);
        Ok(self.push(Node::ScalarMul(c, a), s, d))
    }

    pub fn elem_mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, ProgramError> {
        let s = self.same_shape("elem_mul", a, b)?;
        let d = self.degree(a) + self.degree(b);
        Ok(self.push(Node::ElemMul(a, b), s, d))
    }

    pub fn elem_cube(&mut self, a: NodeId) -> Result<NodeId, ProgramError> {
        let s = self.shape(a)?;
        let d = 3 * self.degree(a);
        Ok(self.push(Node::ElemCube(a), s, d))
    }

    pub fn matvec(&mut self, m: NodeId, v: NodeId) -> Result<NodeId, ProgramError> {
        let (sm, sv) = (self.shape(m)?, self.shape(v)?);
        if sv.cols != 1 || sm.cols != sv.rows {
            return Err(ProgramError::Shape { op: "matvec", left: sm, right: sv });
        }
        let d = self.degree(m) + self.degree(v);
        Ok(self.push(Node::MatVec(m, v), Shape::vector(sm.rows), d))
    }

    pub fn transpose_matvec(&mut self, m: NodeId, v: NodeId) -> Result<NodeId, ProgramError> {
        let (sm, sv) = (self.shape(m)?, self.shape(v)?);
        if sv.cols != 1 || sm.rows != sv.rows {
            return Err(ProgramError::Shape { op: "transpose_matvec", left: sm, right: sv });
        }
        let d = self.degree(m) + self.degree(v);
        Ok(self.push(Node::TransposeMatVec(m, v), Shape::vector(sm.cols), d))
    }

    /// Finishes the program; fails if the structural degree of `output`
    /// exceeds `declared_degree`.
    pub fn build(self, output: NodeId, declared_degree: usize) -> Result<PolyProgram, ProgramError> {
        self.shape(output)?;
        let actual = self.degree(output);
        if actual > declared_degree {
            return Err(ProgramError::DegreeExceeded { actual, declared: declared_degree });
        }
        Ok(PolyProgram {
            name: self.name,
            inputs: self.inputs,
            nodes: self.nodes,
            shapes: self.shapes,
            degrees: self.degrees,
            output,
            declared_degree,
        })
    }
}

/// An immutable polynomial program with a declared total degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyProgram {
    name: String,
    inputs: Vec<InputSlot>,
    nodes: Vec<Node>,
    shapes: Vec<Shape>,
    degrees: Vec<usize>,
    output: NodeId,
    declared_degree: usize,
}

/// A flat assignment of the `U` input coordinates, tensors concatenated in
/// declaration order, each tensor row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProgramInput {
    values: Vec<FieldElement>,
}

impl ProgramInput {
    pub fn from_flat(program: &PolyProgram, values: Vec<FieldElement>) -> Result<Self, ProgramError> {
        if values.len() != program.input_len() {
            return Err(ProgramError::InputLength { expected: program.input_len(), got: values.len() });
        }
        Ok(ProgramInput { values })
    }

    pub fn values(&self) -> &[FieldElement] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<FieldElement> {
        self.values
    }
}

impl PolyProgram {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &[InputSlot] {
        &self.inputs
    }

    /// `U`: total number of input field elements.
    pub fn input_len(&self) -> usize {
        self.inputs.last().map_or(0, |s| s.offset + s.shape.len())
    }

    /// `V`: number of output field elements.
    pub fn output_len(&self) -> usize {
        self.shapes[self.output.0].len()
    }

    /// `D` as declared; the value threshold formulas use.
    pub fn declared_degree(&self) -> usize {
        self.declared_degree
    }

    /// Structural total degree of the output, `<= declared_degree()`.
    pub fn degree(&self) -> usize {
        self.degrees[self.output.0]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Builds a [`ProgramInput`] from one value list per declared tensor.
    pub fn input_from_tensors(&self, tensors: &[Vec<FieldElement>]) -> Result<ProgramInput, ProgramError> {
        if tensors.len() != self.inputs.len() {
            return Err(ProgramError::TensorCount { expected: self.inputs.len(), got: tensors.len() });
        }
        let mut values = Vec::with_capacity(self.input_len());
        for (index, (slot, t)) in self.inputs.iter().zip(tensors).enumerate() {
            if t.len() != slot.shape.len() {
                return Err(ProgramError::TensorLength { index, expected: slot.shape.len(), got: t.len() });
            }
            values.extend_from_slice(t);
        }
        Ok(ProgramInput { values })
    }

    /// Exact evaluation over the field the input values live in.
    pub fn eval(&self, input: &ProgramInput) -> Result<Vec<FieldElement>, ProgramError> {
        let Some(first) = input.values.first() else {
            return Err(ProgramError::InputLength { expected: self.input_len(), got: 0 });
        };
        self.eval_over(first.modulus(), &input.values)
    }

    /// Evaluation over `F_q` of a flat slice of `U` values. Needed for
    /// programs without inputs, whose field cannot be inferred.
    pub fn eval_over(&self, q: PrimeModulus, values: &[FieldElement]) -> Result<Vec<FieldElement>, ProgramError> {
        if values.len() != self.input_len() {
            return Err(ProgramError::InputLength { expected: self.input_len(), got: values.len() });
        }
        if values.iter().any(|v| v.modulus() != q) {
            return Err(ProgramError::ModulusMismatch);
        }
        Ok(self.eval_in(q, values))
    }

    /// Evaluation on a raw slice already known to have length `U` and
    /// modulus `q`.
    fn eval_in(&self, q: PrimeModulus, input: &[FieldElement]) -> Vec<FieldElement> {
        let mut vals: Vec<Vec<FieldElement>> = Vec::with_capacity(self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            let shape = self.shapes[i];
            let v = match node {
                Node::Input(slot) => {
                    let s = &self.inputs[*slot];
                    input[s.offset..s.offset + s.shape.len()].to_vec()
                }
                Node::Constant(c) => c.iter().map(|&c| q.from_i64(c)).collect(),
                Node::Add(a, b) => zip_with(&vals[a.0], &vals[b.0], |x, y| x + y),
                Node::Sub(a, b) => zip_with(&vals[a.0], &vals[b.0], |x, y| x - y),
                Node::ElemMul(a, b) => zip_with(&vals[a.0], &vals[b.0], |x, y| x * y),
                Node::Mul(a, b) => {
                    let s = vals[a.0][0];
                    vals[b.0].iter().map(|&x| s * x).collect()
                }
                Node::ScalarMul(c, a) => {
                    let c = q.from_i64(*c);
                    vals[a.0].iter().map(|&x| c * x).collect()
                }
                Node::ElemCube(a) => vals[a.0].iter().map(|&x| x * x * x).collect(),
                Node::MatVec(m, v) => {
                    let cols = self.shapes[m.0].cols;
                    let (mv, vv) = (&vals[m.0], &vals[v.0]);
                    (0..shape.rows)
                        .map(|r| {
                            mv[r * cols..(r + 1) * cols].iter().zip(vv).fold(q.zero(), |acc, (&a, &b)| acc + a * b)
                        })
                        .collect()
                }
                Node::TransposeMatVec(m, v) => {
                    let ms = self.shapes[m.0];
                    let (mv, vv) = (&vals[m.0], &vals[v.0]);
                    let mut out = vec![q.zero(); ms.cols];
                    for r in 0..ms.rows {
                        let s = vv[r];
                        if s.is_zero() {
                            continue;
                        }
                        for (o, &a) in out.iter_mut().zip(&mv[r * ms.cols..(r + 1) * ms.cols]) {
                            *o += a * s;
                        }
                    }
                    out
                }
            };
            vals.push(v);
        }
        vals.swap_remove(self.output.0)
    }
}

fn zip_with(
    a: &[FieldElement],
    b: &[FieldElement],
    f: impl Fn(FieldElement, FieldElement) -> FieldElement,
) -> Vec<FieldElement> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

/// `phi(X) = X^2` on a single field element.
pub fn builtin_square_map() -> PolyProgram {
    let mut b = ProgramBuilder::new("square_map");
    let x = b.input("X", 1, 1);
    let sq = b.elem_mul(x, x).expect("same shape");
    b.build(sq, 2).expect("degree 2")
}

/// Perceptron gradient `X^T (X w)^3 - X^T ((X w) o y)` for an `s x d` batch.
/// Inputs are `X` (`s x d`), `y` (`s`) and `w` (`d`), in that order.
pub fn builtin_perceptron_gradient(rows: usize, features: usize) -> PolyProgram {
    assert!(rows >= 1 && features >= 1, "empty perceptron shape");
    let mut b = ProgramBuilder::new("perceptron_gradient");
    let x = b.input("X", rows, features);
    let y = b.input("y", rows, 1);
    let w = b.input("w", features, 1);
    let build = |b: &mut ProgramBuilder| -> Result<NodeId, ProgramError> {
        let xw = b.matvec(x, w)?;
        let cube = b.elem_cube(xw)?;
        let first = b.transpose_matvec(x, cube)?;
        let masked = b.elem_mul(xw, y)?;
        let second = b.transpose_matvec(x, masked)?;
        b.sub(first, second)
    };
    let out = build(&mut b).expect("shapes are consistent");
    b.build(out, 7).expect("degree 7")
}

/// Parses `square_map` or `perceptron_gradient(s=3,d=2)`.
pub fn parse_program(desc: &str) -> Result<PolyProgram, ProgramError> {
    let err = || ProgramError::Parse(desc.to_owned());
    let desc_t = desc.trim();
    let (name, args) = match desc_t.find('(') {
        Some(open) => {
            let close = desc_t.rfind(')').filter(|&c| c == desc_t.len() - 1).ok_or_else(err)?;
            (desc_t[..open].trim(), &desc_t[open + 1..close])
        }
        None => (desc_t, ""),
    };
    let mut kv: Vec<(&str, usize)> = Vec::new();
    for part in args.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(err)?;
        let v: usize = v.trim().parse().map_err(|_| err())?;
        kv.push((k.trim(), v));
    }
    let get = |key: &str| kv.iter().find(|(k, _)| *k == key).map(|&(_, v)| v);
    match name {
        "square_map" if kv.is_empty() => Ok(builtin_square_map()),
        "perceptron_gradient" => {
            let (s, d) = (get("s").ok_or_else(err)?, get("d").ok_or_else(err)?);
            if kv.len() != 2 || s == 0 || d == 0 {
                return Err(err());
            }
            Ok(builtin_perceptron_gradient(s, d))
        }
        _ => Err(ProgramError::Parse(format!("unknown program {desc:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{lagrange_interpolate, EvalSet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(v: u64) -> PrimeModulus {
        PrimeModulus::new(v).unwrap()
    }

    #[test]
    fn square_map_examples() {
        let f = q(17);
        let p = builtin_square_map();
        assert_eq!((p.input_len(), p.output_len(), p.degree()), (1, 1, 2));
        let eval = |x: u64| p.eval(&ProgramInput::from_flat(&p, vec![f.elem(x)]).unwrap()).unwrap()[0];
        assert_eq!(eval(3).value(), 9);
        assert_eq!(eval(0).value(), 0);
        assert_eq!(eval(2).value(), 4);
        assert_eq!(eval(16).value(), 1);
    }

    #[test]
    fn square_map_matches_pow() {
        let f = q((1 << 27) - 39);
        let p = builtin_square_map();
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..100 {
            let x = f.random(&mut rng);
            let y = p.eval(&ProgramInput::from_flat(&p, vec![x]).unwrap()).unwrap();
            assert_eq!(y, [x.pow(2)]);
        }
    }

    #[test]
    fn shape_errors() {
        let p = builtin_square_map();
        let f = q(17);
        assert_eq!(
            ProgramInput::from_flat(&p, vec![f.one(), f.one()]),
            Err(ProgramError::InputLength { expected: 1, got: 2 })
        );
        let mut b = ProgramBuilder::new("bad");
        let x = b.input("X", 2, 3);
        let w = b.input("w", 2, 1);
        assert!(matches!(b.matvec(x, w), Err(ProgramError::Shape { op: "matvec", .. })));
        assert!(b.transpose_matvec(x, w).is_ok());
        assert!(b.mul(x, w).is_err());
    }

    #[test]
    fn degree_bookkeeping() {
        assert_eq!(builtin_perceptron_gradient(3, 2).degree(), 7);
        let mut b = ProgramBuilder::new("const");
        let c = b.constant(Shape::vector(2), vec![5, -1]).unwrap();
        let p = b.build(c, 0).unwrap();
        assert_eq!(p.degree(), 0);
        assert_eq!(p.input_len(), 0);

        let mut b = ProgramBuilder::new("cube");
        let x = b.input("x", 1, 1);
        let c = b.elem_cube(x).unwrap();
        assert_eq!(b.build(c, 2), Err(ProgramError::DegreeExceeded { actual: 3, declared: 2 }));

        let mut b = ProgramBuilder::new("mixed");
        let x = b.input("x", 1, 1);
        let y = b.input("y", 3, 1);
        let sq = b.elem_mul(x, x).unwrap();
        let scaled = b.mul(sq, y).unwrap();
        let lin = b.scalar_mul(4, y).unwrap();
        let out = b.add(scaled, lin).unwrap();
        assert_eq!(b.build(out, 5).unwrap().degree(), 3);
    }

    /// Straight-line reference for `X^T (Xw)^3 - X^T (Xw o y)` on integers.
    fn gradient_oracle(x: &[Vec<i64>], y: &[i64], w: &[i64], f: PrimeModulus) -> Vec<FieldElement> {
        let d = w.len();
        let mut out = vec![0i128; d];
        for (row, &label) in x.iter().zip(y) {
            let z: i128 = row.iter().zip(w).map(|(&a, &b)| a as i128 * b as i128).sum();
            let qm = f.value() as i128;
            let z = z.rem_euclid(qm);
            let coef = ((z * z % qm) * z % qm - z * label as i128 % qm).rem_euclid(qm);
            for j in 0..d {
                out[j] = (out[j] + row[j] as i128 * coef).rem_euclid(qm);
            }
        }
        out.into_iter().map(|v| f.elem(v as u64)).collect()
    }

    #[test]
    fn perceptron_examples() {
        let f = q(1_000_000_007);
        let p = builtin_perceptron_gradient(1, 1);
        let one = vec![f.one()];
        let inp = p.input_from_tensors(&[one.clone(), one.clone(), one]).unwrap();
        assert_eq!(p.eval(&inp).unwrap(), [f.zero()]);

        let p = builtin_perceptron_gradient(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let x: Vec<_> = (0..6).map(|_| f.random(&mut rng)).collect();
        let y: Vec<_> = (0..3).map(|_| f.random(&mut rng)).collect();
        let inp = p.input_from_tensors(&[x, y, vec![f.zero(); 2]]).unwrap();
        assert_eq!(p.eval(&inp).unwrap(), [f.zero(); 2]);
    }

    #[test]
    fn perceptron_matches_integer_oracle() {
        use rand::Rng;
        let f = q((1 << 27) - 39);
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..50 {
            let (s, d) = (3, 2);
            let x: Vec<Vec<i64>> = (0..s).map(|_| (0..d).map(|_| rng.random_range(-50..50)).collect()).collect();
            let y: Vec<i64> = (0..s).map(|_| rng.random_range(0..2)).collect();
            let w: Vec<i64> = (0..d).map(|_| rng.random_range(-50..50)).collect();
            let p = builtin_perceptron_gradient(s, d);
            let enc = |v: &[i64]| v.iter().map(|&a| f.from_i64(a)).collect::<Vec<_>>();
            let flat_x: Vec<i64> = x.iter().flatten().copied().collect();
            let inp = p.input_from_tensors(&[enc(&flat_x), enc(&y), enc(&w)]).unwrap();
            assert_eq!(p.eval(&inp).unwrap(), gradient_oracle(&x, &y, &w, f));
        }
    }

    #[test]
    fn additive_program_is_linear() {
        let f = q(97);
        let mut b = ProgramBuilder::new("sum");
        let a = b.input("a", 2, 2);
        let c = b.input("c", 2, 2);
        let s = b.add(a, c).unwrap();
        let t = b.sub(s, c).unwrap();
        let out = b.add(s, t).unwrap();
        let p = b.build(out, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let u: Vec<_> = (0..8).map(|_| f.random(&mut rng)).collect();
            let v: Vec<_> = (0..8).map(|_| f.random(&mut rng)).collect();
            let w: Vec<_> = u.iter().zip(&v).map(|(&a, &b)| a + b).collect();
            let e = |x: Vec<FieldElement>| p.eval(&ProgramInput::from_flat(&p, x).unwrap()).unwrap();
            let lhs = e(w);
            let rhs: Vec<_> = e(u).into_iter().zip(e(v)).map(|(a, b)| a + b).collect();
            assert_eq!(lhs, rhs);
        }
    }

    /// `t -> phi(t x)` is a polynomial of degree <= D: interpolate from D+1
    /// samples and confirm an extra sample lies on it.
    #[test]
    fn degree_soundness_probe() {
        let f = q(1_000_000_007);
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for p in [builtin_square_map(), builtin_perceptron_gradient(2, 3)] {
            let x: Vec<_> = (0..p.input_len()).map(|_| f.random(&mut rng)).collect();
            let d = p.declared_degree();
            let sample = |t: u64| {
                let t = f.elem(t);
                let scaled = x.iter().map(|&v| v * t).collect();
                p.eval(&ProgramInput::from_flat(&p, scaled).unwrap()).unwrap()
            };
            for coord in 0..p.output_len() {
                let pts = (1..=(d as u64 + 1)).map(|t| (f.elem(t), sample(t)[coord])).collect();
                let fit = lagrange_interpolate(&EvalSet::new(pts).unwrap()).unwrap();
                assert!(fit.degree().is_none_or(|deg| deg <= d));
                let extra = d as u64 + 5;
                assert_eq!(fit.eval(f.elem(extra)), sample(extra)[coord]);
            }
        }
    }

    #[test]
    fn parse_descriptions() {
        assert_eq!(parse_program("square_map").unwrap(), builtin_square_map());
        let p = parse_program(" perceptron_gradient( s=3, d=2 ) ").unwrap();
        assert_eq!(p, builtin_perceptron_gradient(3, 2));
        assert_eq!(p.input_len(), 3 * 2 + 3 + 2);
        for bad in [
            "",
            "cube",
            "perceptron_gradient(s=3)",
            "perceptron_gradient(s=0,d=1)",
            "square_map(x=1)",
            "perceptron_gradient(s=1,d=1",
        ] {
            assert!(parse_program(bad).is_err(), "{bad}");
        }
    }
}
