//! Whole-program analysis: classification, structural checks and
//! transformation of every definition.

use std::collections::BTreeMap;

use crate::ast::Program;
use crate::guard::{check_structural, classify_function, Classification, StructuralVerdict, Verdict};
use crate::transform::{transform_classified, TransformArtifacts, TransformError};

#[derive(Clone, Debug)]
pub struct Analysis {
    pub classifications: BTreeMap<String, Classification>,
    pub structural: BTreeMap<String, StructuralVerdict>,
    /// Present for every non-rejected definition.
    pub artifacts: BTreeMap<String, Result<TransformArtifacts, TransformError>>,
}

impl Analysis {
    pub fn verdict(&self, fun: &str) -> Option<Verdict> {
        self.classifications.get(fun).map(|c| c.verdict)
    }

    pub fn artifacts(&self, fun: &str) -> Option<&TransformArtifacts> {
        self.artifacts.get(fun).and_then(|r| r.as_ref().ok())
    }

    /// Definitions evaluated through their inductive component by default.
    pub fn uses_pre(&self, fun: &str) -> bool {
        self.verdict(fun) == Some(Verdict::TransformableUnguarded) && self.artifacts(fun).is_some()
    }
}

pub fn analyze(prog: &Program) -> Analysis {
    let mut classifications = BTreeMap::new();
    let mut artifacts = BTreeMap::new();
    for f in prog.funs() {
        let cls = classify_function(f);
        if !cls.verdict.is_rejected() {
            artifacts.insert(f.name.clone(), transform_classified(prog, f, &cls));
        }
        classifications.insert(f.name.clone(), cls);
    }
    let structural = prog.recs().map(|r| (r.name.clone(), check_structural(r))).collect();
    Analysis { classifications, structural, artifacts }
}
