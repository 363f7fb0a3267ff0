//! extract → clean1 → clean2 → privatize → clean3 → shadowing → audit, with
//! every intermediate array validated before the next stage consumes it.

use broomlab_core::shadow::{self, Privatization, ShadowStrategy, Shadowing, StrongTripleAudit};
use broomlab_core::structures::{self, Params};
use broomlab_core::template::{self, AuditReport, PassRecord, TemplateArray};
use broomlab_core::{Error as CoreError, Graph, Limits, VertexSet};
use serde::Serialize;

use crate::error::Result;
use crate::report::Tagged;

/// Summary of one intermediate array.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stage {
    pub stage: String,
    pub cleanliness: template::Cleanliness,
    pub templates: usize,
    pub h_sizes: Vec<usize>,
    pub u: VertexSet,
    pub declared_holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record: Option<PassRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrivatizationSummary {
    pub privatization: Privatization,
    pub dropped: VertexSet,
    pub chi_u_before: Option<usize>,
    pub chi_rest_after: Option<usize>,
    pub within_claim: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub leftover: VertexSet,
    pub leftover_core_free: Tagged<bool>,
    pub stages: Vec<Stage>,
    pub privatization: PrivatizationSummary,
    pub shadowing: Shadowing,
    /// Audit of the 1-cleaned array, where the index-counting lemmas apply.
    pub audit_clean1: AuditReport,
    /// Audit of the final 3-cleaned array, with `Π` supplied.
    pub audit_final: AuditReport,
    pub strong_triples: StrongTripleAudit,
    pub array: TemplateArray,
}

impl Trace {
    pub fn stage(&self, name: &str) -> Option<&Stage> {
        self.stages.iter().find(|s| s.stage == name)
    }

    /// Number of lemma violations across all audits.
    pub fn violation_count(&self) -> usize {
        self.audit_clean1.violation_count() + self.audit_final.violation_count() + self.strong_triples.report.violation_count()
    }
}

fn checked(g: &Graph, stage: &str, t: &TemplateArray, record: Option<PassRecord>) -> Result<Stage> {
    let violations = t.violations(g);
    if let Some(v) = violations.first() {
        return Err(CoreError::Precondition(format!("{stage}: {v}")).into());
    }
    if !template::holds(g, t, t.cleanliness) {
        return Err(CoreError::Precondition(format!("{stage}: declared {:?} predicate fails", t.cleanliness)).into());
    }
    Ok(Stage {
        stage: stage.into(),
        cleanliness: t.cleanliness,
        templates: t.n(),
        h_sizes: t.sequence.iter().map(|x| x.h.len()).collect(),
        u: t.u.clone(),
        declared_holds: true,
        record,
    })
}

pub fn run_pipeline(g: &Graph, p: &Params, limits: &Limits) -> Result<Trace> {
    p.check_cleaning_side()?;
    let mut stages = Vec::new();

    let (t, leftover) = template::extract_template_array(g, p, limits)?;
    stages.push(checked(g, "extract", &t, None)?);
    let leftover_core_free =
        Tagged::from_solver(structures::find_core_in(g, &leftover, p.zeta, p.beta, limits).map(|c| c.is_none()))?;

    let c1 = template::clean1(g, &t, limits)?;
    stages.push(checked(g, "clean1", &c1.array, Some(c1.record))?);
    let audit_clean1 = template::bound_audit(g, &c1.array, None, limits)?;

    let c2 = template::clean2(g, &c1.array, limits)?;
    stages.push(checked(g, "clean2", &c2.array, Some(c2.record))?);

    let pr = shadow::privatize(g, &c2.array, limits)?;
    stages.push(checked(g, "privatize", &pr.array, None)?);
    if let Some(v) = pr.privatization.violations(g, &pr.array).into_iter().next() {
        return Err(CoreError::Precondition(format!("privatize: {v}")).into());
    }

    let c3 = template::clean3(g, &pr.array, limits)?;
    stages.push(checked(g, "clean3", &c3.array, Some(c3.record))?);
    let array = c3.array;

    let shadowing = shadow::build_shadowing(g, &array, ShadowStrategy::LeastIndex, &array.u);
    if let Some(v) = shadowing.violations(g, &array).into_iter().next() {
        return Err(CoreError::Precondition(format!("shadowing: {v}")).into());
    }
    // each vertex of Π has one H-neighbour and ε ≥ 3, so clean3 keeps Π
    let privatization = &pr.privatization;
    let audit_final = template::bound_audit(g, &array, Some(&privatization.pi), limits)?;
    let strong_triples = shadow::strong_triple_audit(g, &array, &shadowing, privatization)?;
    if let Some(v) = privatization.violations(g, &array).into_iter().next() {
        return Err(CoreError::Precondition(format!("clean3: {v}")).into());
    }

    Ok(Trace {
        leftover,
        leftover_core_free,
        stages,
        privatization: PrivatizationSummary {
            privatization: pr.privatization,
            dropped: pr.dropped,
            chi_u_before: pr.chi_u_before,
            chi_rest_after: pr.chi_rest_after,
            within_claim: pr.within_claim,
        },
        shadowing,
        audit_clean1,
        audit_final,
        strong_triples,
        array,
    })
}
