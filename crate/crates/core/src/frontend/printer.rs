//! Source rendering for subset ASTs. Compound sub-expressions are always
//! parenthesized, so printing then re-parsing yields the same tree.

use super::ast::{AstNode, NodeType};

pub fn print_class(class: &AstNode) -> String {
    let mut out = String::new();
    let name = class.children.first().map(AstNode::token).unwrap_or("");
    out.push_str(&format!("class {name} {{\n"));
    for member in class.children.iter().skip(1) {
        print_member(member, 1, &mut out);
    }
    out.push_str("}\n");
    out
}

pub fn print_method(method: &AstNode) -> String {
    let mut out = String::new();
    print_member(method, 0, &mut out);
    out
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn print_member(m: &AstNode, level: usize, out: &mut String) {
    indent(level, out);
    let ty = m.children[0].token();
    let name = m.children[1].token();
    match m.node_type {
        NodeType::FieldDeclaration => {
            out.push_str(&format!("{ty} {name}"));
            if let Some(init) = m.children.get(2) {
                out.push_str(" = ");
                out.push_str(&expr(init));
            }
            out.push_str(";\n");
        }
        _ => {
            let params: Vec<String> = m.children[2..]
                .iter()
                .filter(|c| c.node_type == NodeType::Parameter)
                .map(|p| format!("{} {}", p.children[0].token(), p.children[1].token()))
                .collect();
            out.push_str(&format!("{ty} {name}({})", params.join(", ")));
            match m.children.last().filter(|c| c.node_type == NodeType::Block) {
                Some(body) => {
                    out.push(' ');
                    print_block(body, level, out);
                    out.push('\n');
                }
                None => out.push_str(";\n"),
            }
        }
    }
}

fn print_block(b: &AstNode, level: usize, out: &mut String) {
    out.push_str("{\n");
    for s in &b.children {
        print_stmt(s, level + 1, out);
    }
    indent(level, out);
    out.push('}');
}

fn print_stmt(s: &AstNode, level: usize, out: &mut String) {
    if s.node_type == NodeType::Block {
        indent(level, out);
        print_block(s, level, out);
        out.push('\n');
        return;
    }
    indent(level, out);
    match s.node_type {
        NodeType::IfStatement => {
            out.push_str(&format!("if ({}) ", expr(&s.children[0])));
            print_branch(&s.children[1], level, out);
            if let Some(e) = s.children.get(2) {
                indent(level, out);
                out.push_str("else ");
                print_branch(e, level, out);
            }
        }
        NodeType::WhileStatement => {
            out.push_str(&format!("while ({}) ", expr(&s.children[0])));
            print_branch(&s.children[1], level, out);
        }
        NodeType::ReturnStatement => match s.children.first() {
            Some(v) => out.push_str(&format!("return {};\n", expr(v))),
            None => out.push_str("return;\n"),
        },
        NodeType::LocalDeclaration => {
            out.push_str(&format!("{} {}", s.children[0].token(), s.children[1].token()));
            if let Some(init) = s.children.get(2) {
                out.push_str(&format!(" = {}", expr(init)));
            }
            out.push_str(";\n");
        }
        _ => out.push_str(&format!("{};\n", expr(&s.children[0]))),
    }
}

fn print_branch(s: &AstNode, level: usize, out: &mut String) {
    if s.node_type == NodeType::Block {
        print_block(s, level, out);
        out.push('\n');
    } else {
        out.push('\n');
        print_stmt(s, level + 1, out);
    }
}

fn operand(e: &AstNode) -> String {
    match e.node_type {
        NodeType::Identifier | NodeType::Literal | NodeType::FieldAccess | NodeType::MethodCall => expr(e),
        _ => format!("({})", expr(e)),
    }
}

pub fn expr(e: &AstNode) -> String {
    match e.node_type {
        NodeType::Identifier | NodeType::Literal => e.token().to_string(),
        NodeType::FieldAccess => format!("{}.{}", operand(&e.children[0]), e.children[1].token()),
        NodeType::MethodCall => {
            let args: Vec<String> = e.children[1..].iter().map(expr).collect();
            format!("{}({})", operand(&e.children[0]), args.join(", "))
        }
        NodeType::BinaryExpression => format!(
            "{} {} {}",
            operand(&e.children[0]),
            e.children[1].token(),
            operand(&e.children[2])
        ),
        NodeType::UnaryExpression => match e.children[1].node_type {
            // `-(1)` must not collapse into the literal `-1`
            NodeType::Literal => format!("{}({})", e.children[0].token(), expr(&e.children[1])),
            _ => format!("{}{}", e.children[0].token(), operand(&e.children[1])),
        },
        NodeType::ConditionalExpression => format!(
            "{} ? {} : {}",
            operand(&e.children[0]),
            operand(&e.children[1]),
            operand(&e.children[2])
        ),
        NodeType::Assignment => format!("{} = {}", operand(&e.children[0]), expr(&e.children[1])),
        other => format!("/* {other} */"),
    }
}
