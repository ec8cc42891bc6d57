use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

macro_rules! node_types {
    ($($name:ident),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum NodeType { $($name),* }

        impl NodeType {
            pub const ALL: &'static [NodeType] = &[$(NodeType::$name),*];

            pub fn as_str(self) -> &'static str {
                match self { $(NodeType::$name => stringify!($name)),* }
            }
        }

        impl FromStr for NodeType {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $(stringify!($name) => Ok(NodeType::$name),)*
                    _ => Err(format!("unknown node type `{s}`")),
                }
            }
        }
    };
}

node_types! {
    ClassDeclaration,
    FieldDeclaration,
    MethodDeclaration,
    Parameter,
    Block,
    IfStatement,
    WhileStatement,
    ReturnStatement,
    ExpressionStatement,
    LocalDeclaration,
    Assignment,
    BinaryExpression,
    UnaryExpression,
    ConditionalExpression,
    MethodCall,
    FieldAccess,
    Identifier,
    Literal,
    Operator,
    TypeName,
}

impl fmt::Display for NodeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A syntax tree node. Leaves carry a token; inner nodes never do.
///
/// Child layouts:
/// - `MethodDeclaration`: return `TypeName`, name `Identifier`, `Parameter`*, optional `Block`
/// - `MethodCall`: callee (`Identifier` or `FieldAccess`), then arguments
/// - `BinaryExpression`: lhs, `Operator`, rhs
/// - `UnaryExpression`: `Operator`, operand
/// - `IfStatement`: condition, then-branch, optional else-branch
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AstNode {
    pub node_type: NodeType,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<AstNode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token: Option<String>,
}

impl AstNode {
    pub fn leaf(node_type: NodeType, token: impl Into<String>) -> Self {
        AstNode {
            node_type,
            children: Vec::new(),
            token: Some(token.into()),
        }
    }

    pub fn inner(node_type: NodeType, children: Vec<AstNode>) -> Self {
        AstNode {
            node_type,
            children,
            token: None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn token(&self) -> &str {
        self.token.as_deref().unwrap_or("")
    }

    /// Leaf tokens in left-to-right order.
    pub fn leaf_tokens(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit(&mut |n| {
            if n.is_leaf() {
                out.push(n.token());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a AstNode)) {
        f(self);
        for c in &self.children {
            c.visit(f);
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(AstNode::node_count).sum::<usize>()
    }

    /// Checks that tokens sit exactly on leaves.
    pub fn well_formed(&self) -> bool {
        self.is_leaf() == self.token.is_some() && self.children.iter().all(AstNode::well_formed)
    }
}
