use std::io::{self, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

/// One line of the report stream.
#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub suite: String,
    pub case: String,
    pub status: Status,
    pub residual_valuation: Option<f64>,
    pub wall_ms: f64,
    pub informational: bool,
    pub detail: Value,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub holds: bool,
    pub residual: Option<f64>,
    pub detail: Value,
}

impl Outcome {
    pub fn new(holds: bool, residual: Option<f64>, detail: impl Serialize) -> Self {
        Self {
            holds,
            residual,
            detail: serde_json::to_value(detail).unwrap_or(Value::Null),
        }
    }
}

type Job = Box<dyn Fn() -> padic_expo::Result<Outcome> + Send + Sync>;

pub struct Case {
    pub suite: String,
    pub name: String,
    pub informational: bool,
    run: Job,
}

impl Case {
    pub fn new(
        suite: &str,
        name: impl Into<String>,
        run: impl Fn() -> padic_expo::Result<Outcome> + Send + Sync + 'static,
    ) -> Self {
        Self {
            suite: suite.to_string(),
            name: name.into(),
            informational: false,
            run: Box::new(run),
        }
    }

    pub fn informational(mut self) -> Self {
        self.informational = true;
        self
    }

    fn execute(&self) -> Record {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(|| (self.run)()));
        let (status, residual, detail) = match result {
            Ok(Ok(o)) => (
                if o.holds { Status::Pass } else { Status::Fail },
                o.residual,
                o.detail,
            ),
            Ok(Err(e)) => (Status::Error, None, Value::String(e.to_string())),
            Err(panic) => {
                let msg = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                (Status::Error, None, Value::String(msg))
            }
        };
        Record {
            suite: self.suite.clone(),
            case: self.name.clone(),
            status,
            residual_valuation: residual,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            informational: self.informational,
            detail,
        }
    }
}

/// Runs cases on the rayon pool; records come back in case order.
pub fn run_cases(cases: &[Case]) -> Vec<Record> {
    cases.par_iter().map(Case::execute).collect()
}

pub fn write_records<W: Write>(mut out: W, records: &[Record]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// 0 when every non-informational record passed, 1 otherwise.
pub fn exit_code(records: &[Record]) -> i32 {
    let failed = records
        .iter()
        .any(|r| !r.informational && r.status != Status::Pass);
    i32::from(failed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_exit_code() {
        let cases: Vec<Case> = (0..20)
            .map(|i| Case::new("t", format!("c{i}"), move || Ok(Outcome::new(i != 7, None, i))))
            .collect();
        let recs = run_cases(&cases);
        let names: Vec<_> = recs.iter().map(|r| r.case.clone()).collect();
        let expect: Vec<_> = (0..20).map(|i| format!("c{i}")).collect();
        assert_eq!(names, expect);
        assert_eq!(exit_code(&recs), 1);
        assert_eq!(exit_code(&recs[..7]), 0);
    }

    #[test]
    fn informational_failures_do_not_count() {
        let cases = vec![
            Case::new("t", "a", || Ok(Outcome::new(true, Some(3.0), ()))),
            Case::new("t", "b", || Ok(Outcome::new(false, None, ()))).informational(),
            Case::new("t", "c", || panic!("boom")).informational(),
        ];
        let recs = run_cases(&cases);
        assert_eq!(recs[2].status, Status::Error);
        assert_eq!(exit_code(&recs), 0);
        let mut buf = Vec::new();
        write_records(&mut buf, &recs).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    }
}
