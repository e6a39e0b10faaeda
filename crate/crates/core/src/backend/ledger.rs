use std::collections::BTreeMap;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use super::Completion;

/// One triple of usage counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub api_calls: u64,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl Usage {
    pub fn total_tokens(&self) -> u64 {
        self.prompt_tokens + self.completion_tokens
    }

    /// Componentwise `self >= other`.
    pub fn dominates(&self, other: &Usage) -> bool {
        self.api_calls >= other.api_calls
            && self.prompt_tokens >= other.prompt_tokens
            && self.completion_tokens >= other.completion_tokens
    }
}

impl AddAssign for Usage {
    fn add_assign(&mut self, rhs: Usage) {
        self.api_calls += rhs.api_calls;
        self.prompt_tokens += rhs.prompt_tokens;
        self.completion_tokens += rhs.completion_tokens;
    }
}

/// API call and token accounting, kept both in total and per stage label.
///
/// Counters only ever grow. Totals are maintained alongside the per-stage map
/// and always equal its componentwise sum.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageLedger {
    pub api_calls: u64,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub per_stage: BTreeMap<String, Usage>,
}

impl UsageLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one successful call under `stage`.
    pub fn record(&mut self, stage: &str, completion: &Completion) {
        let usage = Usage {
            api_calls: 1,
            prompt_tokens: completion.prompt_tokens,
            completion_tokens: completion.completion_tokens,
        };
        self.add(stage, usage);
    }

    fn add(&mut self, stage: &str, usage: Usage) {
        self.api_calls += usage.api_calls;
        self.prompt_tokens += usage.prompt_tokens;
        self.completion_tokens += usage.completion_tokens;
        *self.per_stage.entry(stage.to_string()).or_default() += usage;
    }

    pub fn merge(&mut self, other: &UsageLedger) {
        for (stage, usage) in &other.per_stage {
            self.add(stage, *usage);
        }
    }

    pub fn snapshot(&self) -> UsageLedger {
        self.clone()
    }

    pub fn totals(&self) -> Usage {
        Usage {
            api_calls: self.api_calls,
            prompt_tokens: self.prompt_tokens,
            completion_tokens: self.completion_tokens,
        }
    }

    pub fn total_tokens(&self) -> u64 {
        self.prompt_tokens + self.completion_tokens
    }

    pub fn stage(&self, stage: &str) -> Usage {
        self.per_stage.get(stage).copied().unwrap_or_default()
    }

    /// Totals equal the sum over per-stage entries.
    pub fn is_conserved(&self) -> bool {
        let mut sum = Usage::default();
        for u in self.per_stage.values() {
            sum += *u;
        }
        sum == self.totals()
    }

    /// True when every counter here, total and per stage, is at least the one in `earlier`.
    pub fn dominates(&self, earlier: &UsageLedger) -> bool {
        self.totals().dominates(&earlier.totals())
            && earlier
                .per_stage
                .iter()
                .all(|(k, u)| self.stage(k).dominates(u))
    }
}
