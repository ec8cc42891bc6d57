//! Min-max normalizes hand-written code and graph vectors, fuses them and
//! prints method and class rows for two weightings.
//!
//! cargo run --example hybrid_space

use std::collections::BTreeMap;

use rmove::frontend::parse_source;
use rmove::fusion::{FusionNormalizers, HybridSpace};
use rmove::model::{EmbeddingVector, MethodId, ProjectId};

fn vectors(rows: &[(&str, [f64; 2])]) -> rmove::Result<BTreeMap<MethodId, EmbeddingVector>> {
    rows.iter().map(|(m, v)| Ok((MethodId::parse(m)?, EmbeddingVector::new(v.to_vec())?))).collect()
}

fn main() -> rmove::Result<()> {
    let files = [
        ("A.java".to_string(), "class A { void m1() {} void m2() {} }".to_string()),
        ("B.java".to_string(), "class B { void m3() {} }".to_string()),
    ];
    let corpus = parse_source(&ProjectId::new("p")?, &files)?;
    let code = vectors(&[("p::A::m1()", [0.0, 10.0]), ("p::A::m2()", [2.0, 20.0]), ("p::B::m3()", [4.0, 30.0])])?;
    let graph = vectors(&[("p::A::m1()", [1.0, -1.0]), ("p::A::m2()", [3.0, 1.0]), ("p::B::m3()", [5.0, -1.0])])?;
    let norms = FusionNormalizers::fit(&code, &graph)?;
    for alpha in [0.5, 0.8] {
        let space = HybridSpace::build(&corpus, &code, &graph, &norms, alpha)?;
        println!("alpha {alpha}");
        for h in space.methods.values().chain(space.classes.values()) {
            println!("  {:<12} {:?}", h.id, h.values);
        }
    }
    Ok(())
}
