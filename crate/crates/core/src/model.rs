//! Identifiers and records shared by every stage.
//!
//! Identifiers are strings at the boundary (`project::package.Class::sig`);
//! stages that do math assign dense per-corpus indices internally.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SEP: &str = "::";

fn check_component(what: &'static str, value: &str) -> Result<()> {
    if value.is_empty() {
        return Err(Error::EmptyComponent(what));
    }
    if value.contains(SEP) {
        return Err(Error::ComponentContainsSeparator(value.to_string()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProjectId(String);

impl ProjectId {
    pub fn new(name: &str) -> Result<Self> {
        check_component("project", name)?;
        Ok(ProjectId(name.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// `project::package.Class`
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ClassId(String);

impl ClassId {
    pub fn new(project: &ProjectId, class_path: &str) -> Result<Self> {
        check_component("class", class_path)?;
        Ok(ClassId(format!("{}{SEP}{class_path}", project.0)))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let (project, class_path) = s
            .split_once(SEP)
            .ok_or_else(|| Error::MalformedId(s.to_string()))?;
        ClassId::new(&ProjectId::new(project)?, class_path)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn project(&self) -> ProjectId {
        ProjectId(self.0.split_once(SEP).unwrap().0.to_string())
    }

    pub fn class_path(&self) -> &str {
        self.0.split_once(SEP).unwrap().1
    }

    /// Last dotted segment of the class path.
    pub fn simple_name(&self) -> &str {
        let path = self.class_path();
        path.rsplit('.').next().unwrap_or(path)
    }
}

impl TryFrom<String> for ClassId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        ClassId::parse(&s)
    }
}

impl From<ClassId> for String {
    fn from(id: ClassId) -> String {
        id.0
    }
}

/// `project::package.Class::signature`
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MethodId(String);

impl MethodId {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(SEP).collect();
        if parts.len() != 3 {
            return Err(Error::MalformedId(s.to_string()));
        }
        make_method_id(&ProjectId::new(parts[0])?, parts[1], parts[2])
    }

    /// Splits into `(project, class_path, signature)`.
    pub fn components(&self) -> (&str, &str, &str) {
        let mut it = self.0.splitn(3, SEP);
        (it.next().unwrap(), it.next().unwrap(), it.next().unwrap())
    }

    pub fn class(&self) -> ClassId {
        let (project, class_path, _) = self.components();
        ClassId(format!("{project}{SEP}{class_path}"))
    }

    pub fn signature(&self) -> &str {
        self.components().2
    }

    /// Method name: the signature up to its parameter list.
    pub fn name(&self) -> &str {
        let sig = self.signature();
        sig.split('(').next().unwrap_or(sig)
    }

    /// The same signature placed in another class.
    pub fn relocated(&self, class: &ClassId) -> MethodId {
        MethodId(format!("{}{SEP}{}", class.0, self.signature()))
    }
}

impl TryFrom<String> for MethodId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        MethodId::parse(&s)
    }
}

impl From<MethodId> for String {
    fn from(id: MethodId) -> String {
        id.0
    }
}

macro_rules! display_as_str {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    )*};
}
display_as_str!(ProjectId, ClassId, MethodId);

pub fn make_method_id(project: &ProjectId, class_path: &str, signature: &str) -> Result<MethodId> {
    check_component("class", class_path)?;
    check_component("signature", signature)?;
    Ok(MethodId(format!("{}{SEP}{class_path}{SEP}{signature}", project.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub id: MethodId,
    pub owner: ClassId,
    pub name: String,
    pub param_types: Vec<String>,
    pub body_present: bool,
}

impl MethodRecord {
    pub fn new(id: MethodId, name: &str, param_types: Vec<String>, body_present: bool) -> Result<Self> {
        if name.is_empty() {
            return Err(Error::EmptyComponent("method name"));
        }
        Ok(MethodRecord {
            owner: id.class(),
            id,
            name: name.to_string(),
            param_types,
            body_present,
        })
    }

    pub fn arity(&self) -> usize {
        self.param_types.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub id: ClassId,
    pub project: ProjectId,
    pub methods: BTreeSet<MethodId>,
}

impl ClassRecord {
    pub fn new(id: ClassId) -> Self {
        ClassRecord {
            project: id.project(),
            id,
            methods: BTreeSet::new(),
        }
    }
}

/// One labeled refactoring: `method` sits in `source_class` and belongs in
/// `target_class`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MoveMethodTriple {
    pub method: MethodId,
    #[serde(rename = "source")]
    pub source_class: ClassId,
    #[serde(rename = "target")]
    pub target_class: ClassId,
}

impl MoveMethodTriple {
    pub fn new(method: MethodId, target_class: ClassId) -> Result<Self> {
        let source_class = method.class();
        if source_class == target_class {
            return Err(Error::InvalidParameter(format!(
                "move of `{method}` has identical source and target"
            )));
        }
        Ok(MoveMethodTriple {
            method,
            source_class,
            target_class,
        })
    }

    /// Re-checks the invariants after deserialization.
    pub fn validate(&self) -> Result<()> {
        if self.source_class == self.target_class || self.method.class() != self.source_class {
            return Err(Error::InvalidParameter(format!(
                "inconsistent triple for `{}`",
                self.method
            )));
        }
        Ok(())
    }
}

/// A fixed-length real vector. Entries are always finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("zero-length embedding".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite embedding entry {bad}")));
        }
        Ok(EmbeddingVector(values))
    }

    pub fn zeros(dim: usize) -> Self {
        EmbeddingVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Graph embeddings are expected to be much smaller than the graph.
/// Returns false when `dim > nodes / 2` on a graph with at least four nodes.
pub fn dim_ratio_ok(dim: usize, nodes: usize) -> bool {
    nodes < 4 || dim * 2 <= nodes
}
