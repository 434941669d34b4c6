use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PipelinePhase {
    InitialAttempts,
    LemmaSelection,
    Salvage,
    MainSketch,
    LemmaLoop,
    Assembly,
    Fallback,
    Solved,
    Exhausted,
}

impl PipelinePhase {
    pub fn can_transition_to(self, next: PipelinePhase) -> bool {
        use PipelinePhase::*;
        matches!(
            (self, next),
            (InitialAttempts, Solved | LemmaSelection | Exhausted)
                | (LemmaSelection, Salvage | Fallback)
                | (Salvage, MainSketch)
                | (MainSketch, LemmaLoop | Fallback | Exhausted)
                | (LemmaLoop, Assembly | Exhausted)
                | (Assembly, Solved | LemmaLoop)
                | (Fallback, Solved | Exhausted)
        )
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, PipelinePhase::Solved | PipelinePhase::Exhausted)
    }
}

/// True when `trace` starts at `InitialAttempts`, follows only legal
/// transitions and ends in a terminal phase.
pub fn is_legal_trace(trace: &[PipelinePhase]) -> bool {
    trace.first() == Some(&PipelinePhase::InitialAttempts)
        && trace.last().is_some_and(|p| p.is_terminal())
        && trace.windows(2).all(|w| w[0].can_transition_to(w[1]))
}
