//! Parses a small Java file, prints its call graph and the path contexts
//! of one method.
//!
//! cargo run --example parse_and_mine

use rmove::config::Config;
use rmove::depgraph::build_mdg;
use rmove::frontend::parse_source;
use rmove::model::ProjectId;
use rmove::paths::{mine_corpus, PathLimits};
use rmove::rng::seeded_rng;

const SOURCE: &str = r#"
class Account {
    int balance;
    int fee(int amount) { return amount > 100 ? amount / 100 : 1; }
    void withdraw(int amount) { balance = balance - amount - fee(amount); audit(amount); }
    void audit(int amount) { fee(amount); }
}
"#;

fn main() -> rmove::Result<()> {
    let corpus = parse_source(&ProjectId::new("bank")?, &[("Account.java".into(), SOURCE.into())])?;
    let st = corpus.stats();
    println!("{} classes, {} methods, {} call sites", st.classes, st.methods, st.calls);

    let mdg = build_mdg(&corpus);
    for &(a, b) in &mdg.edges {
        println!("  {} -> {}", mdg.nodes[a].name(), mdg.nodes[b].name());
    }

    let pathsets = mine_corpus(&corpus, &PathLimits::from_config(&Config::default()), &seeded_rng(0))?;
    let fee = pathsets.iter().find(|s| s.method.name() == "fee").expect("fee is mined");
    println!("{} contexts in fee:", fee.contexts.len());
    for c in fee.contexts.iter().take(8) {
        println!("  {c}");
    }
    Ok(())
}
