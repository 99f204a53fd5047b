use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MethodTag {
    Naive,
    SubsetsPool,
    Marginal,
}

impl MethodTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodTag::Naive => "Naive",
            MethodTag::SubsetsPool => "SubsetsPool",
            MethodTag::Marginal => "Marginal",
        }
    }
}

impl std::fmt::Display for MethodTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of one hypothesis test.
///
/// For bootstrap-calibrated tests `reject == statistic > critical_value`;
/// for the naive test `statistic` is the signed `T` and the rule is
/// `|T| > critical_value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    pub method_tag: MethodTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_subset_t: Option<Vec<f64>>,
}
