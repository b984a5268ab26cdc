//! Measurement plans and the test pose.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{Configuration, KinematicModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub q: Configuration,
    pub multiplicity: u32,
}

/// A multiset of measurement configurations (a design of experiments).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    entries: Vec<PlanEntry>,
}

impl Plan {
    pub fn new(entries: Vec<PlanEntry>) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| Error::input("a plan needs at least one configuration"))?;
        let n = first.q.len();
        for e in &entries {
            if e.q.len() != n {
                return Err(Error::Dimension {
                    what: "plan configuration",
                    expected: n,
                    actual: e.q.len(),
                });
            }
            if e.multiplicity == 0 {
                return Err(Error::input("plan multiplicities must be positive"));
            }
            if e.q.iter().any(|v| !v.is_finite()) {
                return Err(Error::input("plan contains non-finite joint values"));
            }
        }
        Ok(Self { entries })
    }

    /// Plan with every configuration measured once.
    pub fn from_configurations(configs: Vec<Configuration>) -> Result<Self> {
        Self::new(
            configs
                .into_iter()
                .map(|q| PlanEntry { q, multiplicity: 1 })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[PlanEntry] {
        &self.entries
    }

    pub fn n_joints(&self) -> usize {
        self.entries[0].q.len()
    }

    /// Total number of measurements, counting multiplicity.
    pub fn total_measurements(&self) -> u64 {
        self.entries.iter().map(|e| u64::from(e.multiplicity)).sum()
    }

    /// Every configuration, repeated according to its multiplicity.
    pub fn expanded(&self) -> impl Iterator<Item = &Configuration> {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat_n(&e.q, e.multiplicity as usize))
    }

    /// Checks joint count and joint limits against `model`.
    pub fn check_against(&self, model: &KinematicModel) -> Result<()> {
        if self.n_joints() != model.n_joints() {
            return Err(Error::Dimension {
                what: "plan joint count",
                expected: model.n_joints(),
                actual: self.n_joints(),
            });
        }
        for (i, e) in self.entries.iter().enumerate() {
            if !model.within_limits(&e.q) {
                return Err(Error::input(format!(
                    "plan configuration {i} violates joint limits"
                )));
            }
        }
        Ok(())
    }

    /// Greatest common divisor of the multiplicities: the largest `k` for
    /// which this plan is some other plan replicated `k` times.
    pub fn replication_factor(&self) -> u32 {
        fn gcd(a: u32, b: u32) -> u32 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        self.entries.iter().fold(0, |g, e| gcd(g, e.multiplicity))
    }

    /// The plan with every multiplicity divided by [`Self::replication_factor`].
    pub fn unreplicated(&self) -> Self {
        let g = self.replication_factor().max(1);
        Self {
            entries: self
                .entries
                .iter()
                .map(|e| PlanEntry {
                    q: e.q.clone(),
                    multiplicity: e.multiplicity / g,
                })
                .collect(),
        }
    }

    /// Multiplies every multiplicity by `k`.
    pub fn replicate(&self, k: u32) -> Result<Self> {
        if k < 1 {
            return Err(Error::input("replication factor must be at least 1"));
        }
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let multiplicity = e
                    .multiplicity
                    .checked_mul(k)
                    .ok_or_else(|| Error::input("replicated multiplicity overflows"))?;
                Ok(PlanEntry {
                    q: e.q.clone(),
                    multiplicity,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { entries })
    }
}

/// The configuration at which post-calibration accuracy is scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestPose {
    pub q0: Configuration,
}

impl TestPose {
    pub fn new(q0: Configuration) -> Self {
        Self { q0 }
    }
}

/// Reads a plan CSV: header `q_1,...,q_n,multiplicity`, radians.
pub fn read_plan_csv(text: &str, source_name: &str) -> Result<Plan> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(source_name, 1, "header", e.to_string()))?
        .clone();
    let n = headers.len();
    if n < 2 || &headers[n - 1] != "multiplicity" {
        return Err(Error::parse(
            source_name,
            1,
            "header",
            "expected q_1,...,q_n,multiplicity",
        ));
    }
    for (j, h) in headers.iter().take(n - 1).enumerate() {
        if h != format!("q_{}", j + 1) {
            return Err(Error::parse(
                source_name,
                1,
                h,
                format!("expected column q_{}", j + 1),
            ));
        }
    }
    let mut entries = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(source_name, line, "record", e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let mut q = Vec::with_capacity(n - 1);
        for (j, tok) in rec.iter().take(n - 1).enumerate() {
            let v: f64 = tok.parse().map_err(|_| {
                Error::parse(
                    source_name,
                    line,
                    headers[j].to_string(),
                    format!("`{tok}` is not a number"),
                )
            })?;
            q.push(v);
        }
        let mult: u32 = rec[n - 1].parse().map_err(|_| {
            Error::parse(
                source_name,
                line,
                "multiplicity",
                format!("`{}` is not a positive integer", &rec[n - 1]),
            )
        })?;
        entries.push(PlanEntry {
            q,
            multiplicity: mult,
        });
    }
    Plan::new(entries).map_err(|e| match e {
        Error::Input(msg) => Error::parse(source_name, 0, "plan", msg),
        other => other,
    })
}

/// Writes a plan CSV. Values use the shortest round-trip `f64` representation.
pub fn write_plan_csv(plan: &Plan) -> String {
    let mut out = String::new();
    let n = plan.n_joints();
    let header: Vec<String> = (1..=n).map(|j| format!("q_{j}")).collect();
    out.push_str(&header.join(","));
    out.push_str(",multiplicity\n");
    for e in plan.entries() {
        let row: Vec<String> = e.q.iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push_str(&format!(",{}\n", e.multiplicity));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn replication_multiplies_counts() {
        let p = Plan::from_configurations(vec![vec![0.0, 1.0], vec![0.0, -1.0]]).unwrap();
        assert_eq!(p.replicate(1).unwrap(), p);
        let r = p.replicate(3).unwrap();
        assert_eq!(r.total_measurements(), 6);
        assert!(r.entries().iter().all(|e| e.multiplicity == 3));
        assert!(p.replicate(0).is_err());
        assert_eq!(r.expanded().count(), 6);
        assert_eq!(r.replication_factor(), 3);
        assert_eq!(r.unreplicated(), p);
        let mixed = Plan::new(vec![
            PlanEntry {
                q: vec![0.0, 1.0],
                multiplicity: 4,
            },
            PlanEntry {
                q: vec![0.0, 2.0],
                multiplicity: 6,
            },
        ])
        .unwrap();
        assert_eq!(mixed.replication_factor(), 2);
        assert_eq!(mixed.unreplicated().total_measurements(), 5);
    }

    #[test]
    fn rejects_bad_plans() {
        assert!(Plan::new(vec![]).is_err());
        assert!(Plan::new(vec![PlanEntry {
            q: vec![0.0],
            multiplicity: 0
        }])
        .is_err());
        assert!(Plan::from_configurations(vec![vec![0.0], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn csv_diagnostics() {
        let err = read_plan_csv("q_1,q_2,multiplicity\n0.1,abc,1\n", "plan.csv").unwrap_err();
        match err {
            Error::Parse { line, field, .. } => {
                assert_eq!(line, 2);
                assert_eq!(field, "q_2");
            }
            other => panic!("{other:?}"),
        }
        assert!(read_plan_csv("a,b\n1,2\n", "plan.csv").is_err());
        assert!(read_plan_csv("q_1,multiplicity\n0.5,0\n", "plan.csv").is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip(rows in proptest::collection::vec((proptest::collection::vec(-10.0f64..10.0, 3), 1u32..9), 1..8)) {
            let plan = Plan::new(rows.into_iter().map(|(q, multiplicity)| PlanEntry { q, multiplicity }).collect()).unwrap();
            let back = read_plan_csv(&write_plan_csv(&plan), "prop").unwrap();
            prop_assert_eq!(back, plan);
        }
    }
}
