use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Popularity,
    Permanence,
    User,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Count,
    Days,
    Revisions,
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    Raw,
    DatasetNormalized,
    PerArticleAverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventScope {
    AllEvents,
    StartEnd,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FeatureDescriptor {
    pub id: &'static str,
    pub family: Family,
    pub unit: Unit,
    pub normalization: Normalization,
    pub scope: EventScope,
}

const fn f(
    id: &'static str,
    family: Family,
    unit: Unit,
    normalization: Normalization,
    scope: EventScope,
) -> FeatureDescriptor {
    FeatureDescriptor { id, family, unit, normalization, scope }
}

use EventScope::*;
use Family::*;
use Normalization::*;
use Unit::*;

macro_rules! user_scope {
    ($scope:expr, $a:literal, $r:literal) => {
        [
            f(concat!("u_", $a), User, Count, Raw, $scope),
            f(concat!("u_", $r), User, Count, Raw, $scope),
            f(concat!("r_", $a), User, Count, Raw, $scope),
            f(concat!("r_", $r), User, Count, Raw, $scope),
            f(concat!("u_", $a, "_norm"), User, Ratio, DatasetNormalized, $scope),
            f(concat!("u_", $r, "_norm"), User, Ratio, DatasetNormalized, $scope),
            f(concat!("r_", $a, "_norm"), User, Ratio, DatasetNormalized, $scope),
            f(concat!("r_", $r, "_norm"), User, Ratio, DatasetNormalized, $scope),
            f(concat!("mean_u_", $a), User, Count, PerArticleAverage, $scope),
            f(concat!("mean_u_", $r), User, Count, PerArticleAverage, $scope),
            f(concat!("mean_r_", $a), User, Count, PerArticleAverage, $scope),
            f(concat!("mean_r_", $r), User, Count, PerArticleAverage, $scope),
            f(concat!("ratio_r_", $a), User, Ratio, Raw, $scope),
            f(concat!("ratio_r_", $r), User, Ratio, Raw, $scope),
            f(concat!("proba_r_", $a), User, Ratio, Raw, $scope),
            f(concat!("proba_r_", $r), User, Ratio, Raw, $scope),
        ]
    };
}

const POPULARITY: [FeatureDescriptor; 4] = [
    f("n_articles", Popularity, Count, Raw, NotApplicable),
    f("n_articles_norm", Popularity, Ratio, DatasetNormalized, NotApplicable),
    f("curr_n_articles", Popularity, Count, Raw, NotApplicable),
    f("curr_n_articles_norm", Popularity, Ratio, DatasetNormalized, NotApplicable),
];

const PERMANENCE: [FeatureDescriptor; 14] = [
    f("sum_perm_days", Permanence, Days, Raw, NotApplicable),
    f("sum_perm_revs", Permanence, Revisions, Raw, NotApplicable),
    f("sum_curr_perm_days", Permanence, Days, Raw, NotApplicable),
    f("sum_curr_perm_revs", Permanence, Revisions, Raw, NotApplicable),
    f("sum_perm_days_norm", Permanence, Ratio, DatasetNormalized, NotApplicable),
    f("sum_perm_revs_norm", Permanence, Ratio, DatasetNormalized, NotApplicable),
    f("mean_perm_days", Permanence, Days, PerArticleAverage, NotApplicable),
    f("mean_perm_revs", Permanence, Revisions, PerArticleAverage, NotApplicable),
    f("mean_self_perm_days", Permanence, Ratio, PerArticleAverage, NotApplicable),
    f("mean_self_perm_revs", Permanence, Ratio, PerArticleAverage, NotApplicable),
    f("sum_age_days", Permanence, Days, Raw, NotApplicable),
    f("sum_age_revs", Permanence, Revisions, Raw, NotApplicable),
    f("mean_age_days", Permanence, Days, PerArticleAverage, NotApplicable),
    f("mean_age_revs", Permanence, Revisions, PerArticleAverage, NotApplicable),
];

const USER_ALL: [FeatureDescriptor; 16] = user_scope!(AllEvents, "add", "rem");
const USER_START_END: [FeatureDescriptor; 16] = user_scope!(StartEnd, "start", "end");

pub const CATALOG_LEN: usize = 50;

/// Column order of every feature matrix built from a corpus.
pub fn catalog() -> &'static [FeatureDescriptor; CATALOG_LEN] {
    static CATALOG: std::sync::OnceLock<[FeatureDescriptor; CATALOG_LEN]> = std::sync::OnceLock::new();
    CATALOG.get_or_init(|| {
        let all: Vec<FeatureDescriptor> = POPULARITY
            .iter()
            .chain(&PERMANENCE)
            .chain(&USER_ALL)
            .chain(&USER_START_END)
            .copied()
            .collect();
        all.try_into().expect("catalog has 50 entries")
    })
}

pub fn catalog_ids() -> Vec<String> {
    catalog().iter().map(|d| d.id.to_string()).collect()
}

pub fn descriptor(id: &str) -> Option<&'static FeatureDescriptor> {
    catalog().iter().find(|d| d.id == id)
}

/// Short digest of an ordered column list.
pub fn fingerprint<S: AsRef<str>>(ids: &[S]) -> String {
    let mut h = Sha256::new();
    for id in ids {
        h.update(id.as_ref().as_bytes());
        h.update(b"\n");
    }
    hex::encode(&h.finalize()[..8])
}
