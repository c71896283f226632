use crate::belief::{Fluent, Modality, Rml, MAX_DEPTH};

use super::CompileError;

/// Every RML over `fluents` with at most `depth` operators drawn from `agents`.
///
/// Order: chain length first; chains compare lexicographically over the
/// alphabet `B_a1, ¬B_a1, B_a2, ...`; then fluent order; then positive before
/// negated base. The result has `Σ_{k≤d} (2n)^k · 2|F|` entries.
pub fn enumerate_rmls(fluents: &[Fluent], agents: &[String], depth: usize) -> Result<Vec<Rml>, CompileError> {
    if depth > MAX_DEPTH {
        return Err(CompileError::DepthTooLarge(depth));
    }
    let alphabet: Vec<Modality> = agents
        .iter()
        .flat_map(|a| [Modality::believes(a.clone()), Modality::doubts(a.clone())])
        .collect();

    let mut out = Vec::with_capacity(enumerated_count(fluents.len(), agents.len(), depth));
    let mut chains: Vec<Vec<Modality>> = vec![Vec::new()];
    for k in 0..=depth {
        if k > 0 {
            chains = chains
                .iter()
                .flat_map(|c| {
                    alphabet.iter().map(move |m| {
                        let mut next = c.clone();
                        next.push(m.clone());
                        next
                    })
                })
                .collect();
        }
        for chain in &chains {
            for f in fluents {
                for negated in [false, true] {
                    out.push(Rml {
                        chain: chain.clone(),
                        fluent: f.clone(),
                        negated,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Closed form of the enumeration size.
pub fn enumerated_count(fluents: usize, agents: usize, depth: usize) -> usize {
    (0..=depth).map(|k| (2 * agents).pow(k as u32) * 2 * fluents).sum()
}
