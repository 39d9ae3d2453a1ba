//! The divergence classifier: joins have linear divergence, CFS non-joins
//! quadratic, graphs without four-cycles give hyperbolic groups (exponential
//! divergence), and everything else has divergence at least cubic, with no
//! upper bound decided here.

use thiserror::Error;

use crate::graph::{
    enumerate_four_cycles, is_cfs, is_join, validate, CfsWitness, DefiningGraph, JoinParts,
    ValidationReport,
};
use crate::words::{complement_loop_word, Word, WordError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("graph fails the standing hypotheses")]
    InvalidGraph(ValidationReport),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Divergence class with its witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DivergenceClass {
    /// The graph is a join; witness is the bipartition.
    Linear { parts: JoinParts },
    /// CFS and not a join; witness is a full-support component of the
    /// four-cycle graph.
    Quadratic { witness: CfsWitness },
    /// Neither CFS nor four-cycle-free: divergence is at least cubic, and
    /// the exact degree is not decided.  Witness is a bi-infinite geodesic
    /// label whose divergence grows at least cubically.
    AtLeastCubic { witness_word: Word },
    /// No embedded four-cycles: the group is hyperbolic.
    Exponential,
}

impl DivergenceClass {
    pub fn tag(&self) -> &'static str {
        match self {
            DivergenceClass::Linear { .. } => "Linear",
            DivergenceClass::Quadratic { .. } => "Quadratic",
            DivergenceClass::AtLeastCubic { .. } => "AtLeastCubic",
            DivergenceClass::Exponential => "Exponential",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub class: DivergenceClass,
    pub notes: Vec<String>,
}

impl Classification {
    /// Machine-readable `key: value` block plus notes.
    pub fn render(&self, g: &DefiningGraph) -> String {
        let mut out = String::new();
        out.push_str(&format!("class: {}\n", self.class.tag()));
        match &self.class {
            DivergenceClass::Linear { parts } => {
                out.push_str("witness: join-bipartition\n");
                let name = |vs: &[crate::graph::Gen]| {
                    vs.iter()
                        .map(|&v| g.vertex_name(v))
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                out.push_str(&format!("part-1: {}\n", name(&parts.left)));
                out.push_str(&format!("part-2: {}\n", name(&parts.right)));
            }
            DivergenceClass::Quadratic { witness } => {
                out.push_str("witness: cfs-component\n");
                out.push_str(&format!("component-size: {}\n", witness.component.len()));
                for (i, c) in witness.component.iter().enumerate() {
                    out.push_str(&format!("cycle-{i}: {}\n", c.render(g)));
                }
                out.push_str(&format!(
                    "support: {}\n",
                    witness
                        .support
                        .iter()
                        .map(|&v| g.vertex_name(v))
                        .collect::<Vec<_>>()
                        .join(" ")
                ));
            }
            DivergenceClass::AtLeastCubic { witness_word } => {
                out.push_str("witness: geodesic-word\n");
                out.push_str(&format!("word: {}\n", witness_word.render(g)));
            }
            DivergenceClass::Exponential => {
                out.push_str("witness: no-four-cycles\n");
            }
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

/// Decides the divergence class of a valid defining graph.
pub fn classify(g: &DefiningGraph) -> Result<Classification, ClassifyError> {
    let report = validate(g);
    if !report.is_valid {
        return Err(ClassifyError::InvalidGraph(report));
    }
    let mut notes = Vec::new();
    let class = if let Some(parts) = is_join(g) {
        DivergenceClass::Linear { parts }
    } else if let Some(witness) = is_cfs(g) {
        DivergenceClass::Quadratic { witness }
    } else if enumerate_four_cycles(g).is_empty() {
        DivergenceClass::Exponential
    } else {
        let witness_word = complement_loop_word(g)?;
        notes.push(
            "divergence is at least cubic; the exact degree is not determined by this criterion"
                .to_string(),
        );
        DivergenceClass::AtLeastCubic { witness_word }
    };
    if let Some(d) = g.family_degree() {
        notes.push(format!(
            "generated as gamma_d({d}): divergence polynomial of degree {d}"
        ));
    }
    Ok(Classification { class, notes })
}
