//! Polynomial terms as DAGs, with a hash-consing builder and an S-expression
//! syntax (`(add x (neg y))`, integers for constants, `let` for sharing).

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use hashbrown::HashMap;

use crate::algebra::{tuple_index, FiniteAlgebra};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Var(usize),
    Const(usize),
    /// Operation index into the algebra's operation list, and child node ids.
    Apply(usize, Vec<usize>),
}

/// A term DAG. Children always precede their parents, so evaluating nodes in
/// order is a valid bottom-up pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermDag {
    nodes: Vec<Node>,
    root: usize,
}

impl TermDag {
    pub fn var(i: usize) -> Self {
        TermDag {
            nodes: vec![Node::Var(i)],
            root: 0,
        }
    }

    pub fn constant(a: usize) -> Self {
        TermDag {
            nodes: vec![Node::Const(a)],
            root: 0,
        }
    }

    /// Builds a DAG from raw nodes; children must precede parents.
    pub fn from_nodes(nodes: Vec<Node>, root: usize) -> Result<Self> {
        if root >= nodes.len() {
            return Err(Error::Parse("root out of range".into()));
        }
        for (i, node) in nodes.iter().enumerate() {
            if let Node::Apply(_, children) = node {
                if children.iter().any(|&c| c >= i) {
                    return Err(Error::Parse(format!(
                        "node {i} is not topologically ordered"
                    )));
                }
            }
        }
        Ok(TermDag { nodes, root })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Number of distinct nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_var(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Var(i) => Some(*i),
                _ => None,
            })
            .max()
    }

    /// Checks operation indices, arities, constants and variable bounds.
    pub fn validate(&self, alg: &FiniteAlgebra, arity: usize) -> Result<()> {
        for node in &self.nodes {
            match node {
                Node::Var(i) if *i >= arity => return Err(Error::MissingArgument(*i)),
                Node::Const(a) if *a >= alg.size() => return Err(Error::ElementOutOfRange(*a)),
                Node::Apply(op, children) => {
                    let Some(operation) = alg.operations().get(*op) else {
                        return Err(Error::UnknownOperation(format!("#{op}")));
                    };
                    if operation.arity() != children.len() {
                        return Err(Error::ArityMismatch {
                            op: operation.name().to_string(),
                            expected: operation.arity(),
                            found: children.len(),
                        });
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Evaluates the term at one point.
    pub fn eval(&self, alg: &FiniteAlgebra, args: &[usize]) -> Result<usize> {
        self.validate(alg, args.len())?;
        if let Some(&bad) = args.iter().find(|&&a| a >= alg.size()) {
            return Err(Error::ElementOutOfRange(bad));
        }
        let mut values = Vec::with_capacity(self.nodes.len());
        let mut scratch = Vec::new();
        for node in &self.nodes {
            let v = match node {
                Node::Var(i) => args[*i],
                Node::Const(a) => *a,
                Node::Apply(op, children) => {
                    scratch.clear();
                    scratch.extend(children.iter().map(|&c| values[c]));
                    alg.apply(*op, &scratch)
                }
            };
            values.push(v);
        }
        Ok(values[self.root])
    }

    /// The full table of the induced `arity`-ary function, row-major.
    pub fn table(&self, alg: &FiniteAlgebra, arity: usize) -> Result<Vec<u8>> {
        self.validate(alg, arity)?;
        let n = alg.size();
        let width = crate::algebra::checked_power(n, arity).ok_or(Error::InvalidSize(n))?;
        let mut tables: Vec<Vec<u8>> = Vec::with_capacity(self.nodes.len());
        let mut args = Vec::new();
        for node in &self.nodes {
            let t = match node {
                Node::Var(i) => {
                    let stride = n.pow((arity - 1 - i) as u32);
                    (0..width).map(|t| ((t / stride) % n) as u8).collect()
                }
                Node::Const(a) => vec![*a as u8; width],
                Node::Apply(op, children) => {
                    let table = alg.operation(*op).table();
                    (0..width)
                        .map(|t| {
                            args.clear();
                            args.extend(children.iter().map(|&c| tables[c][t] as usize));
                            table[tuple_index(n, &args)]
                        })
                        .collect()
                }
            };
            tables.push(t);
        }
        Ok(tables.swap_remove(self.root))
    }

    /// Replaces variable `i` by `args[i]`.
    pub fn substitute(&self, args: &[TermDag]) -> TermDag {
        let mut builder = TermBuilder::new();
        let roots: Vec<usize> = args.iter().map(|a| builder.import(a, None)).collect();
        let root = builder.import(self, Some(&roots));
        builder.extract(root)
    }

    /// Rewrites every constant through `f`.
    pub fn map_constants(&self, f: impl Fn(usize) -> usize) -> TermDag {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match n {
                Node::Const(a) => Node::Const(f(*a)),
                other => other.clone(),
            })
            .collect();
        let mut builder = TermBuilder::new();
        let root = builder.import(
            &TermDag {
                nodes,
                root: self.root,
            },
            None,
        );
        builder.extract(root)
    }

    /// Conventional variable names for a given arity.
    pub fn variable_names(arity: usize) -> Vec<String> {
        if arity <= 3 {
            ["x", "y", "z"][..arity]
                .iter()
                .map(|s| s.to_string())
                .collect()
        } else {
            (0..arity).map(|i| format!("x{i}")).collect()
        }
    }

    /// Renders as an S-expression. Shared compound subterms are bound with
    /// `let` so the output stays linear in the DAG size.
    pub fn render(&self, alg: &FiniteAlgebra, arity: usize) -> String {
        let names = Self::variable_names(arity.max(self.max_var().map_or(0, |v| v + 1)));
        let mut refs = vec![0usize; self.nodes.len()];
        let mut reachable = vec![false; self.nodes.len()];
        reachable[self.root] = true;
        for i in (0..self.nodes.len()).rev() {
            if !reachable[i] {
                continue;
            }
            if let Node::Apply(_, children) = &self.nodes[i] {
                for &c in children {
                    refs[c] += 1;
                    reachable[c] = true;
                }
            }
        }
        let shared: Vec<bool> = (0..self.nodes.len())
            .map(|i| {
                reachable[i]
                    && i != self.root
                    && refs[i] > 1
                    && matches!(self.nodes[i], Node::Apply(..))
            })
            .collect();
        let mut binding = vec![None; self.nodes.len()];
        let mut bindings = Vec::new();
        for i in 0..self.nodes.len() {
            if shared[i] {
                let name = format!("t{}", bindings.len());
                bindings.push((name.clone(), self.render_node(alg, &names, &binding, i)));
                binding[i] = Some(name);
            }
        }
        let body = self.render_node(alg, &names, &binding, self.root);
        if bindings.is_empty() {
            return body;
        }
        let mut out = String::from("(let (");
        for (k, (name, expr)) in bindings.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            let _ = write!(out, "({name} {expr})");
        }
        let _ = write!(out, ") {body})");
        out
    }

    fn render_node(
        &self,
        alg: &FiniteAlgebra,
        names: &[String],
        binding: &[Option<String>],
        node: usize,
    ) -> String {
        match &self.nodes[node] {
            Node::Var(i) => names[*i].clone(),
            Node::Const(a) => a.to_string(),
            Node::Apply(op, children) => {
                let mut out = format!("({}", alg.operation(*op).name());
                for &c in children {
                    out.push(' ');
                    match &binding[c] {
                        Some(name) => out.push_str(name),
                        None => out.push_str(&self.render_node(alg, names, binding, c)),
                    }
                }
                out.push(')');
                out
            }
        }
    }

    /// Parses an S-expression. `vars` names the variables in index order.
    pub fn parse(src: &str, alg: &FiniteAlgebra, vars: &[&str]) -> Result<TermDag> {
        let tokens = tokenize(src);
        let mut parser = Parser {
            tokens: &tokens,
            pos: 0,
            alg,
            vars,
            scopes: Vec::new(),
            builder: TermBuilder::new(),
        };
        let root = parser.expr()?;
        if parser.pos != tokens.len() {
            return Err(Error::Parse("trailing input".into()));
        }
        let dag = parser.builder.extract(root);
        dag.validate(alg, vars.len())?;
        Ok(dag)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn tokenize(src: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => {
                tokens.push(Token::Open);
                i += 1;
            }
            b')' => {
                tokens.push(Token::Close);
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len()
                    && !matches!(bytes[i], b'(' | b')')
                    && !bytes[i].is_ascii_whitespace()
                {
                    i += 1;
                }
                tokens.push(Token::Atom(&src[start..i]));
            }
        }
    }
    tokens
}

struct Parser<'a, 'b> {
    tokens: &'b [Token<'a>],
    pos: usize,
    alg: &'b FiniteAlgebra,
    vars: &'b [&'b str],
    scopes: Vec<(&'a str, usize)>,
    builder: TermBuilder,
}

impl<'a> Parser<'a, '_> {
    fn next(&mut self) -> Result<Token<'a>> {
        let t = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Parse("unexpected end of input".into()))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect_close(&mut self) -> Result<()> {
        match self.next()? {
            Token::Close => Ok(()),
            _ => Err(Error::Parse("expected `)`".into())),
        }
    }

    fn expr(&mut self) -> Result<usize> {
        match self.next()? {
            Token::Close => Err(Error::Parse("unexpected `)`".into())),
            Token::Atom(a) => self.atom(a),
            Token::Open => {
                let head = match self.next()? {
                    Token::Atom(h) => h,
                    _ => return Err(Error::Parse("expected an operation name".into())),
                };
                if head == "let" {
                    return self.let_form();
                }
                let op = self
                    .alg
                    .op_index(head)
                    .ok_or_else(|| Error::UnknownOperation(head.to_string()))?;
                let mut children = Vec::new();
                while self.tokens.get(self.pos) != Some(&Token::Close) {
                    children.push(self.expr()?);
                }
                self.pos += 1;
                let arity = self.alg.operation(op).arity();
                if arity != children.len() {
                    return Err(Error::ArityMismatch {
                        op: head.to_string(),
                        expected: arity,
                        found: children.len(),
                    });
                }
                Ok(self.builder.apply(op, children))
            }
        }
    }

    fn let_form(&mut self) -> Result<usize> {
        if self.next()? != Token::Open {
            return Err(Error::Parse("expected binding list".into()));
        }
        let depth = self.scopes.len();
        while self.tokens.get(self.pos) == Some(&Token::Open) {
            self.pos += 1;
            let name = match self.next()? {
                Token::Atom(n) => n,
                _ => return Err(Error::Parse("expected binding name".into())),
            };
            let value = self.expr()?;
            self.expect_close()?;
            self.scopes.push((name, value));
        }
        self.expect_close()?;
        let body = self.expr()?;
        self.expect_close()?;
        self.scopes.truncate(depth);
        Ok(body)
    }

    fn atom(&mut self, a: &str) -> Result<usize> {
        if let Some(&(_, id)) = self.scopes.iter().rev().find(|(name, _)| *name == a) {
            return Ok(id);
        }
        if let Some(i) = self.vars.iter().position(|v| *v == a) {
            return Ok(self.builder.var(i));
        }
        if let Ok(c) = a.parse::<usize>() {
            if c >= self.alg.size() {
                return Err(Error::ElementOutOfRange(c));
            }
            return Ok(self.builder.constant(c));
        }
        match self.alg.op_index(a) {
            Some(op) if self.alg.operation(op).arity() == 0 => {
                Ok(self.builder.apply(op, Vec::new()))
            }
            _ => Err(Error::Parse(format!("unknown symbol `{a}`"))),
        }
    }
}

/// Hash-consing arena shared by many terms.
#[derive(Clone, Debug, Default)]
pub struct TermBuilder {
    nodes: Vec<Node>,
    index: HashMap<Node, usize>,
}

impl TermBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn intern(&mut self, node: Node) -> usize {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(node.clone());
        self.index.insert(node, id);
        id
    }

    pub fn var(&mut self, i: usize) -> usize {
        self.intern(Node::Var(i))
    }

    pub fn constant(&mut self, a: usize) -> usize {
        self.intern(Node::Const(a))
    }

    pub fn apply(&mut self, op: usize, children: Vec<usize>) -> usize {
        self.intern(Node::Apply(op, children))
    }

    /// Copies `term` into the arena. With `subst`, variable `i` becomes node
    /// `subst[i]`.
    pub fn import(&mut self, term: &TermDag, subst: Option<&[usize]>) -> usize {
        let mut ids = Vec::with_capacity(term.nodes.len());
        for node in &term.nodes {
            let id = match node {
                Node::Var(i) => match subst {
                    Some(s) => s[*i],
                    None => self.var(*i),
                },
                Node::Const(a) => self.constant(*a),
                Node::Apply(op, children) => {
                    let children = children.iter().map(|&c| ids[c]).collect();
                    self.apply(*op, children)
                }
            };
            ids.push(id);
        }
        ids[term.root]
    }

    /// The sub-DAG reachable from `root`, renumbered densely.
    pub fn extract(&self, root: usize) -> TermDag {
        let mut reachable = vec![false; root + 1];
        reachable[root] = true;
        for i in (0..=root).rev() {
            if reachable[i] {
                if let Node::Apply(_, children) = &self.nodes[i] {
                    for &c in children {
                        reachable[c] = true;
                    }
                }
            }
        }
        let mut new_id = vec![usize::MAX; root + 1];
        let mut nodes = Vec::new();
        for i in 0..=root {
            if reachable[i] {
                new_id[i] = nodes.len();
                nodes.push(match &self.nodes[i] {
                    Node::Apply(op, children) => {
                        Node::Apply(*op, children.iter().map(|&c| new_id[c]).collect())
                    }
                    other => other.clone(),
                });
            }
        }
        TermDag {
            root: new_id[root],
            nodes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn eval_examples() {
        let z4 = corpus::cyclic(4);
        let add = z4.op_index("add").unwrap();
        let t = TermDag::from_nodes(
            vec![Node::Var(0), Node::Const(1), Node::Apply(add, vec![0, 1])],
            2,
        )
        .unwrap();
        assert_eq!(t.eval(&z4, &[2]).unwrap(), 3);
        assert_eq!(TermDag::var(0).eval(&z4, &[3]).unwrap(), 3);
        let d = TermDag::parse("(add x (add (neg y) z))", &z4, &["x", "y", "z"]).unwrap();
        assert_eq!(d.eval(&z4, &[1, 2, 3]).unwrap(), 2);
    }

    #[test]
    fn eval_errors() {
        let z4 = corpus::cyclic(4);
        let t = TermDag::from_nodes(vec![Node::Var(0), Node::Apply(9, vec![0])], 1).unwrap();
        assert!(matches!(t.eval(&z4, &[0]), Err(Error::UnknownOperation(_))));
        let add = z4.op_index("add").unwrap();
        let t = TermDag::from_nodes(vec![Node::Var(0), Node::Apply(add, vec![0])], 1).unwrap();
        assert!(matches!(
            t.eval(&z4, &[0]),
            Err(Error::ArityMismatch { .. })
        ));
        assert_eq!(
            TermDag::var(1).eval(&z4, &[0]),
            Err(Error::MissingArgument(1))
        );
        assert!(matches!(
            TermDag::parse("(mul x)", &z4, &["x"]),
            Err(Error::UnknownOperation(_))
        ));
        assert!(TermDag::parse("(add x", &z4, &["x"]).is_err());
    }

    #[test]
    fn table_matches_pointwise_eval() {
        let s3 = corpus::symmetric3();
        let t = TermDag::parse("(mul (inv x) (mul y 3))", &s3, &["x", "y"]).unwrap();
        let table = t.table(&s3, 2).unwrap();
        for x in 0..6 {
            for y in 0..6 {
                assert_eq!(table[x * 6 + y] as usize, t.eval(&s3, &[x, y]).unwrap());
            }
        }
    }

    #[test]
    fn render_round_trips_with_sharing() {
        let z4 = corpus::cyclic(4);
        let src = "(let ((t0 (add x 1)) (t1 (add t0 t0))) (add t1 t1))";
        let t = TermDag::parse(src, &z4, &["x"]).unwrap();
        assert_eq!(t.len(), 5);
        let rendered = t.render(&z4, 1);
        assert_eq!(rendered, src);
        let back = TermDag::parse(&rendered, &z4, &["x"]).unwrap();
        assert_eq!(back.table(&z4, 1).unwrap(), t.table(&z4, 1).unwrap());
        assert_eq!(
            TermDag::parse("(neg (add x y))", &z4, &["x", "y"])
                .unwrap()
                .render(&z4, 2),
            "(neg (add x y))"
        );
    }

    #[test]
    fn substitute_and_map_constants() {
        let z4 = corpus::cyclic(4);
        let d = TermDag::parse("(add x (add (neg y) z))", &z4, &["x", "y", "z"]).unwrap();
        let composed = d.substitute(&[TermDag::var(0), TermDag::constant(1), TermDag::var(0)]);
        assert_eq!(composed.table(&z4, 1).unwrap(), [3, 1, 3, 1]);
        let shifted = TermDag::parse("(add x 1)", &z4, &["x"])
            .unwrap()
            .map_constants(|c| c + 1);
        assert_eq!(shifted.table(&z4, 1).unwrap(), [2, 3, 0, 1]);
    }

    #[test]
    fn builder_shares_nodes() {
        let mut b = TermBuilder::new();
        let x = b.var(0);
        let one = b.constant(1);
        let s1 = b.apply(0, vec![x, one]);
        let s2 = b.apply(0, vec![x, one]);
        assert_eq!(s1, s2);
        assert_eq!(b.len(), 3);
    }
}
