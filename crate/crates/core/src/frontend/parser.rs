//! Recursive-descent parser for the Java-like subset.
//!
//! ```text
//! file      := ("package" qualified ";")? class*
//! class     := modifier* "class" IDENT "{" member* "}"
//! member    := modifier* type IDENT ( "(" params ")" (block | ";") | ("=" expr)? ";" )
//! stmt      := block | if | while | return | local | expr ";"
//! expr      := ternary ("=" expr)?
//! ternary   := binary ("?" expr ":" ternary)?
//! binary    := precedence climbing over || && == != < > <= >= + - * / %
//! unary     := ("-" | "!") unary | postfix
//! postfix   := primary ("." IDENT | "(" args ")")*
//! ```

use super::ast::{AstNode, NodeType};
use super::lexer::{tokenize, Tok, Token};
use crate::error::{Error, Result};

const MODIFIERS: &[&str] = &[
    "public",
    "private",
    "protected",
    "static",
    "final",
    "abstract",
    "synchronized",
    "native",
];
const KEYWORDS: &[&str] = &["class", "if", "else", "while", "return", "package"];

#[derive(Debug, Clone)]
pub struct ParsedFile {
    pub package: Option<String>,
    pub classes: Vec<AstNode>,
}

pub fn parse_file(path: &str, src: &str) -> Result<ParsedFile> {
    let tokens = tokenize(src).map_err(|e| Error::Syntax {
        path: path.to_string(),
        line: e.line,
        col: e.col,
        expected: e.message,
    })?;
    let mut p = Parser {
        path,
        tokens,
        pos: 0,
    };
    p.file()
}

/// Parses a single method declaration outside any class.
pub fn parse_method(path: &str, src: &str) -> Result<AstNode> {
    let tokens = tokenize(src).map_err(|e| Error::Syntax {
        path: path.to_string(),
        line: e.line,
        col: e.col,
        expected: e.message,
    })?;
    let mut p = Parser {
        path,
        tokens,
        pos: 0,
    };
    let member = p.member()?;
    if member.node_type != NodeType::MethodDeclaration {
        return Err(p.error("method declaration"));
    }
    p.expect_eof()?;
    Ok(member)
}

struct Parser<'a> {
    path: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

fn binary_precedence(op: &str) -> Option<u8> {
    Some(match op {
        "||" => 1,
        "&&" => 2,
        "==" | "!=" => 3,
        "<" | ">" | "<=" | ">=" => 4,
        "+" | "-" => 5,
        "*" | "/" | "%" => 6,
        _ => return None,
    })
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let idx = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> Error {
        let t = &self.tokens[self.pos];
        Error::Syntax {
            path: self.path.to_string(),
            line: t.line,
            col: t.col,
            expected: expected.to_string(),
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == w)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.error(&format!("`{p}`")))
        }
    }

    fn expect_word(&mut self, w: &str) -> Result<()> {
        if self.is_word(w) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("`{w}`")))
        }
    }

    fn expect_eof(&self) -> Result<()> {
        if matches!(self.peek(), Tok::Eof) {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.error("identifier")),
        }
    }

    fn file(&mut self) -> Result<ParsedFile> {
        let mut package = None;
        if self.is_word("package") {
            self.bump();
            let mut name = self.ident()?;
            while self.eat_punct(".") {
                name.push('.');
                name.push_str(&self.ident()?);
            }
            self.expect_punct(";")?;
            package = Some(name);
        }
        let mut classes = Vec::new();
        while !matches!(self.peek(), Tok::Eof) {
            self.skip_modifiers();
            classes.push(self.class()?);
        }
        Ok(ParsedFile { package, classes })
    }

    fn skip_modifiers(&mut self) {
        while matches!(self.peek(), Tok::Ident(s) if MODIFIERS.contains(&s.as_str())) {
            self.bump();
        }
    }

    fn class(&mut self) -> Result<AstNode> {
        self.expect_word("class")?;
        let name = self.ident()?;
        self.expect_punct("{")?;
        let mut children = vec![AstNode::leaf(NodeType::Identifier, name)];
        while !self.eat_punct("}") {
            if matches!(self.peek(), Tok::Eof) {
                return Err(self.error("`}`"));
            }
            children.push(self.member()?);
        }
        Ok(AstNode::inner(NodeType::ClassDeclaration, children))
    }

    fn type_name(&mut self) -> Result<String> {
        let mut name = self.ident()?;
        while self.is_punct("[") && matches!(self.peek_at(1), Tok::Punct("]")) {
            self.bump();
            self.bump();
            name.push_str("[]");
        }
        Ok(name)
    }

    fn member(&mut self) -> Result<AstNode> {
        self.skip_modifiers();
        let ty = AstNode::leaf(NodeType::TypeName, self.type_name()?);
        let name = AstNode::leaf(NodeType::Identifier, self.ident()?);
        if self.eat_punct("(") {
            let mut children = vec![ty, name];
            if !self.eat_punct(")") {
                loop {
                    self.skip_modifiers();
                    let pty = AstNode::leaf(NodeType::TypeName, self.type_name()?);
                    let pname = AstNode::leaf(NodeType::Identifier, self.ident()?);
                    children.push(AstNode::inner(NodeType::Parameter, vec![pty, pname]));
                    if self.eat_punct(")") {
                        break;
                    }
                    self.expect_punct(",")?;
                }
            }
            if !self.eat_punct(";") {
                children.push(self.block()?);
            }
            Ok(AstNode::inner(NodeType::MethodDeclaration, children))
        } else {
            let mut children = vec![ty, name];
            if self.eat_punct("=") {
                children.push(self.expr()?);
            }
            self.expect_punct(";")?;
            Ok(AstNode::inner(NodeType::FieldDeclaration, children))
        }
    }

    fn block(&mut self) -> Result<AstNode> {
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.eat_punct("}") {
            if matches!(self.peek(), Tok::Eof) {
                return Err(self.error("`}`"));
            }
            stmts.push(self.stmt()?);
        }
        if stmts.is_empty() {
            return Ok(AstNode::leaf(NodeType::Block, "{}"));
        }
        Ok(AstNode::inner(NodeType::Block, stmts))
    }

    fn looks_like_local(&self) -> bool {
        let Tok::Ident(first) = self.peek() else {
            return false;
        };
        if KEYWORDS.contains(&first.as_str()) || first == "this" {
            return false;
        }
        let mut k = 1;
        while matches!(self.peek_at(k), Tok::Punct("[")) && matches!(self.peek_at(k + 1), Tok::Punct("]")) {
            k += 2;
        }
        matches!(self.peek_at(k), Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()))
    }

    fn stmt(&mut self) -> Result<AstNode> {
        if self.is_punct("{") {
            return self.block();
        }
        if self.is_word("if") {
            self.bump();
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let mut children = vec![cond, self.stmt()?];
            if self.is_word("else") {
                self.bump();
                children.push(self.stmt()?);
            }
            return Ok(AstNode::inner(NodeType::IfStatement, children));
        }
        if self.is_word("while") {
            self.bump();
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let body = self.stmt()?;
            return Ok(AstNode::inner(NodeType::WhileStatement, vec![cond, body]));
        }
        if self.is_word("return") {
            self.bump();
            if self.eat_punct(";") {
                return Ok(AstNode::leaf(NodeType::ReturnStatement, "return"));
            }
            let value = self.expr()?;
            self.expect_punct(";")?;
            return Ok(AstNode::inner(NodeType::ReturnStatement, vec![value]));
        }
        if self.looks_like_local() {
            let ty = AstNode::leaf(NodeType::TypeName, self.type_name()?);
            let name = AstNode::leaf(NodeType::Identifier, self.ident()?);
            let mut children = vec![ty, name];
            if self.eat_punct("=") {
                children.push(self.expr()?);
            }
            self.expect_punct(";")?;
            return Ok(AstNode::inner(NodeType::LocalDeclaration, children));
        }
        let e = self.expr()?;
        self.expect_punct(";")?;
        Ok(AstNode::inner(NodeType::ExpressionStatement, vec![e]))
    }

    fn expr(&mut self) -> Result<AstNode> {
        let lhs = self.ternary()?;
        if self.is_punct("=") {
            if !matches!(lhs.node_type, NodeType::Identifier | NodeType::FieldAccess) {
                return Err(self.error("assignable expression before `=`"));
            }
            self.bump();
            let rhs = self.expr()?;
            return Ok(AstNode::inner(NodeType::Assignment, vec![lhs, rhs]));
        }
        Ok(lhs)
    }

    fn ternary(&mut self) -> Result<AstNode> {
        let cond = self.binary(1)?;
        if self.eat_punct("?") {
            let then = self.expr()?;
            self.expect_punct(":")?;
            let otherwise = self.ternary()?;
            return Ok(AstNode::inner(
                NodeType::ConditionalExpression,
                vec![cond, then, otherwise],
            ));
        }
        Ok(cond)
    }

    fn binary(&mut self, min_prec: u8) -> Result<AstNode> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Punct(p) => *p,
                _ => break,
            };
            let Some(prec) = binary_precedence(op) else { break };
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            lhs = AstNode::inner(
                NodeType::BinaryExpression,
                vec![lhs, AstNode::leaf(NodeType::Operator, op), rhs],
            );
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<AstNode> {
        if self.is_punct("-") {
            if let Tok::Number(n) = self.peek_at(1) {
                let lit = format!("-{n}");
                self.bump();
                self.bump();
                return self.postfix(AstNode::leaf(NodeType::Literal, lit));
            }
        }
        for op in ["-", "!"] {
            if self.eat_punct(op) {
                let operand = self.unary()?;
                return Ok(AstNode::inner(
                    NodeType::UnaryExpression,
                    vec![AstNode::leaf(NodeType::Operator, op), operand],
                ));
            }
        }
        let primary = self.primary()?;
        self.postfix(primary)
    }

    fn primary(&mut self) -> Result<AstNode> {
        match self.peek().clone() {
            Tok::Number(n) | Tok::Str(n) | Tok::Char(n) => {
                self.bump();
                Ok(AstNode::leaf(NodeType::Literal, n))
            }
            Tok::Ident(s) if s == "true" || s == "false" || s == "null" => {
                self.bump();
                Ok(AstNode::leaf(NodeType::Literal, s))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(_) => Ok(AstNode::leaf(NodeType::Identifier, self.ident()?)),
            _ => Err(self.error("expression")),
        }
    }

    fn postfix(&mut self, mut e: AstNode) -> Result<AstNode> {
        loop {
            if self.eat_punct(".") {
                let name = AstNode::leaf(NodeType::Identifier, self.ident()?);
                e = AstNode::inner(NodeType::FieldAccess, vec![e, name]);
            } else if self.is_punct("(") {
                if !matches!(e.node_type, NodeType::Identifier | NodeType::FieldAccess) {
                    return Err(self.error("callable expression before `(`"));
                }
                self.bump();
                let mut children = vec![e];
                if !self.eat_punct(")") {
                    loop {
                        children.push(self.expr()?);
                        if self.eat_punct(")") {
                            break;
                        }
                        self.expect_punct(",")?;
                    }
                }
                e = AstNode::inner(NodeType::MethodCall, children);
            } else {
                return Ok(e);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn method(src: &str) -> AstNode {
        parse_method("t.java", src).unwrap()
    }

    #[test]
    fn ternary_over_comparison() {
        let m = method("int f(int a, int b) { return b > 0 ? a : -1; }");
        let body = m.children.last().unwrap();
        let ret = &body.children[0];
        assert_eq!(ret.node_type, NodeType::ReturnStatement);
        let cond = &ret.children[0];
        assert_eq!(cond.node_type, NodeType::ConditionalExpression);
        assert_eq!(cond.children[0].node_type, NodeType::BinaryExpression);
        assert_eq!(cond.children[2].token(), "-1");
        assert_eq!(m.leaf_tokens(), vec!["int", "f", "int", "a", "int", "b", "b", ">", "0", "a", "-1"]);
    }

    #[test]
    fn precedence_and_calls() {
        let m = method("void g() { x = a + b * c; this.h(1, y.z); }");
        let stmts = &m.children[2].children;
        let assign = &stmts[0].children[0];
        assert_eq!(assign.node_type, NodeType::Assignment);
        let sum = &assign.children[1];
        assert_eq!(sum.children[1].token(), "+");
        assert_eq!(sum.children[2].node_type, NodeType::BinaryExpression);
        let call = &stmts[1].children[0];
        assert_eq!(call.node_type, NodeType::MethodCall);
        assert_eq!(call.children[0].node_type, NodeType::FieldAccess);
        assert_eq!(call.children.len(), 3);
    }

    #[test]
    fn locals_and_control_flow() {
        let m = method("void w(int[] xs) { int[] ys = xs; while (i < n) { if (!ok) return; else i = i - 1; } }");
        let stmts = &m.children[3].children;
        assert_eq!(stmts[0].node_type, NodeType::LocalDeclaration);
        assert_eq!(stmts[0].children[0].token(), "int[]");
        assert_eq!(stmts[1].node_type, NodeType::WhileStatement);
        assert!(m.well_formed());
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_file("x.java", "class A {\n  int f( { }\n}").unwrap_err();
        match err {
            Error::Syntax { line, col, .. } => assert_eq!((line, col), (2, 10)),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn package_and_fields() {
        let f = parse_file("a.java", "package a.b; public class C { private int n = 3; abstract void f(); }").unwrap();
        assert_eq!(f.package.as_deref(), Some("a.b"));
        let c = &f.classes[0];
        assert_eq!(c.children[1].node_type, NodeType::FieldDeclaration);
        assert_eq!(c.children[2].children.len(), 2);
    }

    #[test]
    fn rejects_assignment_to_call() {
        assert!(parse_method("t", "void f() { g() = 1; }").is_err());
    }
}
