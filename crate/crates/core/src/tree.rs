//! Process trees: an ordered node table over the four control-flow operators,
//! activity leaves and silent (`tau`) leaves.
//!
//! Nodes are numbered in depth-first pre-order, so the subtree of a node `v`
//! always occupies the contiguous index range `v..end(v)`. Every module that
//! works on a subtree (the aligner, the splitters) relies on that layout and
//! addresses nodes of the *original* tree, which keeps alignments produced for
//! subtrees directly composable.
//!
//! The textual format is
//!
//! ```text
//! tree := leaf | op '(' tree (',' tree)+ ')'
//! op   := '->' | 'X' | '+' | '*'          (also '→', '×', '∧', '⟳')
//! leaf := 'tau' | identifier | quoted-string
//! ```
//!
//! Height counts edges on the longest root-to-leaf path; a single leaf has
//! height 0.

use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

/// Symbol used for "no move" in alignments; never a valid activity name.
pub const SKIP: &str = ">>";
/// Name of the silent label.
pub const TAU: &str = "tau";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("loop at offset {pos} has {found} children, expected exactly 2")]
    LoopArity { pos: usize, found: usize },
    #[error("operator at offset {pos} has {found} child, expected at least 2")]
    OperatorArity { pos: usize, found: usize },
    #[error("'{0}' is reserved and cannot be used as an activity name")]
    ReservedLabel(String),
    #[error("unknown node index {0}")]
    UnknownNode(usize),
    #[error("line {line}: {error}")]
    Line { line: usize, error: Box<TreeError> },
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operator {
    Sequence,
    Choice,
    Parallel,
    Loop,
}

impl Operator {
    pub fn symbol(self) -> &'static str {
        match self {
            Operator::Sequence => "->",
            Operator::Choice => "X",
            Operator::Parallel => "+",
            Operator::Loop => "*",
        }
    }

    pub const ALL: [Operator; 4] = [Operator::Sequence, Operator::Choice, Operator::Parallel, Operator::Loop];
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Label {
    Operator(Operator),
    Activity(String),
    Tau,
}

impl Label {
    pub fn activity(&self) -> Option<&str> {
        match self {
            Label::Activity(a) => Some(a),
            _ => None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self, Label::Operator(_))
    }
}

/// Index of a node in pre-order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Owned recursive form of a tree, used for building and rewriting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeNode {
    Activity(String),
    Tau,
    Operator(Operator, Vec<TreeNode>),
}

impl TreeNode {
    pub fn activity(name: impl Into<String>) -> Self {
        TreeNode::Activity(name.into())
    }

    pub fn op(op: Operator, children: Vec<TreeNode>) -> Self {
        TreeNode::Operator(op, children)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Node {
    label: Label,
    children: Vec<NodeId>,
    parent: Option<NodeId>,
    end: usize,
    height: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessTree {
    nodes: Vec<Node>,
}

impl ProcessTree {
    /// Builds a tree from its recursive form, checking arities and labels.
    pub fn from_node(root: TreeNode) -> Result<Self, TreeError> {
        check_node(&root)?;
        let mut nodes = Vec::new();
        flatten(root, None, &mut nodes);
        Ok(ProcessTree { nodes })
    }

    pub fn leaf(name: impl Into<String>) -> Result<Self, TreeError> {
        Self::from_node(TreeNode::Activity(name.into()))
    }

    pub fn parse(text: &str) -> Result<Self, TreeError> {
        let mut parser = Parser::new(text);
        let root = parser.tree()?;
        parser.skip_ws();
        if parser.pos < text.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Self::from_node(root)
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.0 < self.nodes.len()
    }

    pub fn label(&self, v: NodeId) -> &Label {
        &self.nodes[v.0].label
    }

    pub fn operator(&self, v: NodeId) -> Option<Operator> {
        match self.nodes[v.0].label {
            Label::Operator(op) => Some(op),
            _ => None,
        }
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.nodes[v.0].children
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.nodes[v.0].parent
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.nodes[v.0].children.is_empty()
    }

    /// Pre-order index range covered by the subtree of `v`.
    pub fn range(&self, v: NodeId) -> Range<usize> {
        v.0..self.nodes[v.0].end
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn height(&self) -> usize {
        self.nodes[0].height
    }

    pub fn height_of(&self, v: NodeId) -> usize {
        self.nodes[v.0].height
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        self.node_ids().filter(|&v| self.is_leaf(v)).collect()
    }

    /// Leaves of the subtree rooted at `v`, in pre-order.
    pub fn leaves_of(&self, v: NodeId) -> Vec<NodeId> {
        self.range(v).map(NodeId).filter(|&u| self.is_leaf(u)).collect()
    }

    pub fn is_binary(&self) -> bool {
        self.nodes
            .iter()
            .all(|n| n.children.is_empty() || n.children.len() == 2)
    }

    pub fn is_ancestor_or_self(&self, ancestor: NodeId, v: NodeId) -> bool {
        self.range(ancestor).contains(&v.0)
    }

    /// The tree rooted at `v`, renumbered from 0.
    pub fn subtree(&self, v: NodeId) -> Result<ProcessTree, TreeError> {
        if !self.contains(v) {
            return Err(TreeError::UnknownNode(v.0));
        }
        let offset = v.0;
        let nodes = self
            .range(v)
            .map(|i| {
                let n = &self.nodes[i];
                Node {
                    label: n.label.clone(),
                    children: n.children.iter().map(|c| NodeId(c.0 - offset)).collect(),
                    parent: if i == offset {
                        None
                    } else {
                        n.parent.map(|p| NodeId(p.0 - offset))
                    },
                    end: n.end - offset,
                    height: n.height,
                }
            })
            .collect();
        Ok(ProcessTree { nodes })
    }

    pub fn to_node(&self, v: NodeId) -> TreeNode {
        match &self.nodes[v.0].label {
            Label::Activity(a) => TreeNode::Activity(a.clone()),
            Label::Tau => TreeNode::Tau,
            Label::Operator(op) => TreeNode::Operator(*op, self.children(v).iter().map(|&c| self.to_node(c)).collect()),
        }
    }

    /// Language-equivalent tree in which every operator has exactly two
    /// children. N-ary sequence, choice and parallel nodes fold left-deep:
    /// `op(c1, c2, c3)` becomes `op(op(c1, c2), c3)`.
    pub fn binarize(&self) -> ProcessTree {
        fn go(node: TreeNode) -> TreeNode {
            match node {
                TreeNode::Operator(op, children) => {
                    let mut iter = children.into_iter().map(go);
                    let first = iter.next().expect("operator without children");
                    iter.fold(first, |acc, c| TreeNode::Operator(op, vec![acc, c]))
                }
                leaf => leaf,
            }
        }
        ProcessTree::from_node(go(self.to_node(self.root()))).expect("binarization keeps a valid tree valid")
    }

    /// Activity labels of all leaves in pre-order (duplicates kept).
    pub fn activity_labels(&self) -> Vec<&str> {
        self.nodes.iter().filter_map(|n| n.label.activity()).collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_node(self.root(), &mut out);
        out
    }

    fn render_node(&self, v: NodeId, out: &mut String) {
        match self.label(v) {
            Label::Tau => out.push_str(TAU),
            Label::Activity(a) => out.push_str(&render_activity(a)),
            Label::Operator(op) => {
                out.push_str(op.symbol());
                out.push('(');
                for (i, &c) in self.children(v).iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    self.render_node(c, out);
                }
                out.push(')');
            }
        }
    }
}

impl fmt::Display for ProcessTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl FromStr for ProcessTree {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProcessTree::parse(s)
    }
}

/// Parses one tree per non-empty line; lines starting with `#` are comments.
pub fn parse_trees(text: &str) -> Result<Vec<ProcessTree>, TreeError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| {
            ProcessTree::parse(l).map_err(|e| TreeError::Line {
                line: i + 1,
                error: Box::new(e),
            })
        })
        .collect()
}

pub fn load_trees(path: impl AsRef<Path>) -> Result<Vec<ProcessTree>, TreeError> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| TreeError::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_trees(&text)
}

pub fn is_reserved(name: &str) -> bool {
    name == SKIP || name == TAU || name == "τ"
}

fn check_node(node: &TreeNode) -> Result<(), TreeError> {
    match node {
        TreeNode::Tau => Ok(()),
        TreeNode::Activity(a) if is_reserved(a) => Err(TreeError::ReservedLabel(a.clone())),
        TreeNode::Activity(_) => Ok(()),
        TreeNode::Operator(op, children) => {
            if *op == Operator::Loop && children.len() != 2 {
                return Err(TreeError::LoopArity {
                    pos: 0,
                    found: children.len(),
                });
            }
            if children.len() < 2 {
                return Err(TreeError::OperatorArity {
                    pos: 0,
                    found: children.len(),
                });
            }
            children.iter().try_for_each(check_node)
        }
    }
}

fn flatten(node: TreeNode, parent: Option<NodeId>, nodes: &mut Vec<Node>) -> NodeId {
    let id = NodeId(nodes.len());
    let (label, children) = match node {
        TreeNode::Activity(a) => (Label::Activity(a), Vec::new()),
        TreeNode::Tau => (Label::Tau, Vec::new()),
        TreeNode::Operator(op, children) => (Label::Operator(op), children),
    };
    nodes.push(Node {
        label,
        children: Vec::new(),
        parent,
        end: 0,
        height: 0,
    });
    let mut ids = Vec::with_capacity(children.len());
    let mut height = 0;
    for c in children {
        let cid = flatten(c, Some(id), nodes);
        height = height.max(nodes[cid.0].height + 1);
        ids.push(cid);
    }
    let end = nodes.len();
    let n = &mut nodes[id.0];
    n.children = ids;
    n.end = end;
    n.height = height;
    id
}

fn is_ident_start(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':')
}

fn render_activity(a: &str) -> String {
    let mut chars = a.chars();
    let plain =
        chars.next().is_some_and(is_ident_start) && a.chars().all(is_ident_char) && a != "X" && !a.contains("->");
    if plain {
        a.to_string()
    } else {
        let escaped = a.replace('\\', "\\\\").replace('"', "\\\"");
        format!("\"{escaped}\"")
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { text, pos: 0 }
    }

    fn error(&self, msg: impl Into<String>) -> TreeError {
        TreeError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn followed_by_paren(&self, after: usize) -> bool {
        self.text[after..].trim_start().starts_with('(')
    }

    fn operator_token(&self) -> Option<(Operator, usize)> {
        const TOKENS: [(&str, Operator); 9] = [
            ("->", Operator::Sequence),
            ("→", Operator::Sequence),
            ("X", Operator::Choice),
            ("×", Operator::Choice),
            ("+", Operator::Parallel),
            ("∧", Operator::Parallel),
            ("*", Operator::Loop),
            ("⟳", Operator::Loop),
            ("↺", Operator::Loop),
        ];
        let rest = self.rest();
        TOKENS
            .iter()
            .find(|(tok, _)| rest.starts_with(tok) && self.followed_by_paren(self.pos + tok.len()))
            .map(|&(tok, op)| (op, tok.len()))
    }

    fn tree(&mut self) -> Result<TreeNode, TreeError> {
        self.skip_ws();
        let start = self.pos;
        if let Some((op, len)) = self.operator_token() {
            self.pos += len;
            self.skip_ws();
            self.pos += 1; // '('
            let mut children = vec![self.tree()?];
            loop {
                self.skip_ws();
                match self.peek() {
                    Some(',') => {
                        self.pos += 1;
                        children.push(self.tree()?);
                    }
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    Some(c) => return Err(self.error(format!("expected ',' or ')', found '{c}'"))),
                    None => return Err(self.error("unexpected end of input, expected ')'")),
                }
            }
            if op == Operator::Loop && children.len() != 2 {
                return Err(TreeError::LoopArity {
                    pos: start,
                    found: children.len(),
                });
            }
            if children.len() < 2 {
                return Err(TreeError::OperatorArity {
                    pos: start,
                    found: children.len(),
                });
            }
            return Ok(TreeNode::Operator(op, children));
        }
        match self.peek() {
            Some(q @ ('"' | '\'')) => {
                self.pos += 1;
                let name = self.quoted(q)?;
                if is_reserved(&name) {
                    return Err(TreeError::ReservedLabel(name));
                }
                Ok(TreeNode::Activity(name))
            }
            Some(c) if is_ident_start(c) => {
                let len = self
                    .rest()
                    .char_indices()
                    .find(|&(i, c)| !is_ident_char(c) || self.rest()[i..].starts_with("->"))
                    .map_or(self.rest().len(), |(i, _)| i);
                let word = &self.rest()[..len];
                self.pos += len;
                match word {
                    "tau" | "τ" => Ok(TreeNode::Tau),
                    w => Ok(TreeNode::Activity(w.to_string())),
                }
            }
            Some(c) => Err(self.error(format!("unexpected character '{c}'"))),
            None => Err(self.error("unexpected end of input, expected a tree")),
        }
    }

    fn quoted(&mut self, quote: char) -> Result<String, TreeError> {
        let mut out = String::new();
        let mut escaped = false;
        while let Some(c) = self.peek() {
            self.pos += c.len_utf8();
            if escaped {
                out.push(c);
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == quote {
                return Ok(out);
            } else {
                out.push(c);
            }
        }
        Err(self.error("unterminated quoted string"))
    }
}
