//! Finite concept classes, budget functions and the budgeted version space.
//!
//! A class is stored as a dense table `hypothesis -> instance -> label`,
//! except for the experts class whose instances are prediction profiles
//! produced on demand.

mod experts;
mod transcript;
mod version_space;

use serde::{Deserialize, Serialize};

pub use experts::{expert_state_of, expert_version_space, ExpertGameState};
pub use transcript::{
    contradicts, inconsistency_counts, is_realizable_under, min_inconsistency, FeedbackRecord, Op,
    Transcript,
};
pub use version_space::{BudgetFunction, BudgetedVersionSpace, StateKey};

use crate::dist::Label;
use crate::error::{Error, Result};

/// Default cap on the number of hypotheses a constructor will enumerate.
pub const DEFAULT_CLASS_CAP: usize = 1_000_000;

/// An instance presented to the learner.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Instance {
    /// A point `0..domain_size` of a tabulated class.
    Point(usize),
    /// A prediction profile for the experts class: entry `i` is expert `i`'s label.
    Profile(Vec<Label>),
}

impl std::fmt::Display for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Instance::Point(i) => write!(f, "x{i}"),
            Instance::Profile(p) => write!(f, "{p:?}"),
        }
    }
}

/// Which constructor produced a class. Learners and adversaries that only
/// make sense on one family check this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassKind {
    Table,
    Constant,
    Hdk { d: usize, k: usize },
    Experts,
}

/// A finite hypothesis class over a finite label set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptClass {
    kind: ClassKind,
    label_count: usize,
    hypotheses: usize,
    /// `None` for the experts class.
    domain_size: Option<usize>,
    /// Row-major `hypotheses x domain_size`; empty for experts.
    table: Vec<Label>,
    names: Option<Vec<String>>,
}

impl ConceptClass {
    /// Builds a class from an explicit table (`table[h][x]` is `h(x)`).
    pub fn from_table(
        label_count: usize,
        table: Vec<Vec<Label>>,
        names: Option<Vec<String>>,
    ) -> Result<Self> {
        if label_count < 2 {
            return Err(Error::InvalidClass(format!(
                "need at least 2 labels, got {label_count}"
            )));
        }
        if table.is_empty() {
            return Err(Error::InvalidClass("class has no hypotheses".into()));
        }
        let domain = table[0].len();
        if domain == 0 {
            return Err(Error::InvalidClass("empty domain".into()));
        }
        let mut flat = Vec::with_capacity(table.len() * domain);
        for (h, row) in table.iter().enumerate() {
            if row.len() != domain {
                return Err(Error::InvalidClass(format!(
                    "hypothesis {h} has {} entries, expected {domain}",
                    row.len()
                )));
            }
            for &y in row {
                if y >= label_count {
                    return Err(Error::LabelOutOfRange {
                        label: y,
                        count: label_count,
                    });
                }
            }
            flat.extend_from_slice(row);
        }
        if let Some(n) = &names {
            if n.len() != table.len() {
                return Err(Error::InvalidClass("names do not match hypotheses".into()));
            }
        }
        Ok(ConceptClass {
            kind: ClassKind::Table,
            label_count,
            hypotheses: table.len(),
            domain_size: Some(domain),
            table: flat,
            names,
        })
    }

    /// The projection class U_{n,k}: expert `i` maps a profile to its `i`-th entry.
    pub fn experts(n: usize, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidClass(format!("need k >= 2, got {k}")));
        }
        if n < k {
            return Err(Error::InvalidClass(format!(
                "experts class needs n >= k, got n = {n}, k = {k}"
            )));
        }
        Ok(Self::experts_unchecked(n, k))
    }

    /// Experts class without the `n >= k` requirement. Used internally when a
    /// construction legitimately produces fewer experts than labels.
    pub(crate) fn experts_unchecked(n: usize, k: usize) -> Self {
        ConceptClass {
            kind: ClassKind::Experts,
            label_count: k,
            hypotheses: n,
            domain_size: None,
            table: Vec::new(),
            names: None,
        }
    }

    /// All constant functions over `domain_size` points and `k` labels.
    /// Hypothesis `y` maps every instance to `y`.
    pub fn constant(k: usize, domain_size: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidClass(format!("need k >= 2, got {k}")));
        }
        if domain_size == 0 {
            return Err(Error::InvalidClass("empty domain".into()));
        }
        let table = (0..k).map(|y| vec![y; domain_size]).collect();
        let names = (0..k).map(|y| format!("const{y}")).collect();
        let mut c = Self::from_table(k, table, Some(names))?;
        c.kind = ClassKind::Constant;
        Ok(c)
    }

    /// The class H(d,k) over `d*k` points with labels `0..=k`.
    ///
    /// Each hypothesis is a pair `(y, X')` with `y` in `1..=k` and `|X'| <= d`;
    /// it maps points in `X'` to `0` and every other point to `y`.
    pub fn hdk(d: usize, k: usize, cap: usize) -> Result<Self> {
        if d < 1 || k < 2 {
            return Err(Error::InvalidClass(format!(
                "H(d,k) needs d >= 1 and k >= 2, got d = {d}, k = {k}"
            )));
        }
        let domain = d * k;
        let per_label: u128 = (0..=d).map(|j| binomial(domain as u128, j as u128)).sum();
        let size = per_label * k as u128;
        if size > cap as u128 {
            return Err(Error::ClassSizeCap { size, cap });
        }
        let mut table = Vec::with_capacity(size as usize);
        let mut names = Vec::with_capacity(size as usize);
        for y in 1..=k {
            for j in 0..=d {
                for subset in combinations(domain, j) {
                    let mut row = vec![y; domain];
                    for &x in &subset {
                        row[x] = 0;
                    }
                    table.push(row);
                    names.push(format!("y={y},X'={subset:?}"));
                }
            }
        }
        let mut c = Self::from_table(k + 1, table, Some(names))?;
        c.kind = ClassKind::Hdk { d, k };
        Ok(c)
    }

    pub fn kind(&self) -> ClassKind {
        self.kind
    }

    pub fn is_experts(&self) -> bool {
        matches!(self.kind, ClassKind::Experts)
    }

    /// Size of the label set.
    pub fn label_count(&self) -> usize {
        self.label_count
    }

    pub fn hypothesis_count(&self) -> usize {
        self.hypotheses
    }

    /// Number of points, or `None` for the experts class.
    pub fn domain_size(&self) -> Option<usize> {
        self.domain_size
    }

    pub fn name(&self, h: usize) -> String {
        match &self.names {
            Some(n) => n[h].clone(),
            None => format!("h{h}"),
        }
    }

    /// Checks that `x` is a valid instance of this class.
    pub fn check_instance(&self, x: &Instance) -> Result<()> {
        match (x, self.domain_size) {
            (Instance::Point(i), Some(dom)) if *i < dom => Ok(()),
            (Instance::Profile(p), None) if p.len() == self.hypotheses => {
                match p.iter().find(|&&y| y >= self.label_count) {
                    Some(&y) => Err(Error::LabelOutOfRange {
                        label: y,
                        count: self.label_count,
                    }),
                    None => Ok(()),
                }
            }
            _ => Err(Error::InstanceOutOfDomain(x.to_string())),
        }
    }

    pub fn check_label(&self, y: Label) -> Result<()> {
        if y < self.label_count {
            Ok(())
        } else {
            Err(Error::LabelOutOfRange {
                label: y,
                count: self.label_count,
            })
        }
    }

    /// `h(x)`. The instance must have passed [`check_instance`](Self::check_instance).
    #[inline]
    pub fn predict(&self, h: usize, x: &Instance) -> Label {
        match x {
            Instance::Point(i) => self.table[h * self.domain_size.unwrap_or(0) + i],
            Instance::Profile(p) => p[h],
        }
    }

    /// Enumerates the points of a tabulated class. Empty for experts.
    pub fn points(&self) -> impl Iterator<Item = Instance> {
        (0..self.domain_size.unwrap_or(0)).map(Instance::Point)
    }
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// All `j`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, j: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(j);
    fn rec(start: usize, n: usize, j: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == j {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, j, cur, out);
            cur.pop();
        }
    }
    rec(0, n, j, &mut cur, &mut out);
    out
}
