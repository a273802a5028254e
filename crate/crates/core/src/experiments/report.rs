use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;
use crate::expectation::{SumEstimate, Verdict};

/// One named check inside a suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub values: BTreeMap<String, f64>,
    pub std_errors: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            values: BTreeMap::new(),
            std_errors: BTreeMap::new(),
            verdict: None,
            passed: true,
            note: None,
        }
    }

    pub fn value(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.to_owned(), v);
        self
    }

    pub fn estimate(mut self, key: &str, e: &SumEstimate) -> Self {
        self.values.insert(key.to_owned(), e.value);
        self.std_errors.insert(key.to_owned(), e.std_error);
        self
    }

    pub fn with_error(mut self, key: &str, v: f64, se: f64) -> Self {
        self.values.insert(key.to_owned(), v);
        self.std_errors.insert(key.to_owned(), se);
        self
    }

    pub fn verdict(mut self, v: Verdict) -> Self {
        self.passed &= v.consistent;
        self.verdict = Some(v);
        self
    }

    pub fn passed(mut self, ok: bool) -> Self {
        self.passed &= ok;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Names the check, its values and the combined standard error.
    pub fn describe(&self) -> String {
        let values: Vec<String> = self
            .values
            .iter()
            .map(|(k, v)| match self.std_errors.get(k) {
                Some(se) => format!("{k} = {v} ± {se}"),
                None => format!("{k} = {v}"),
            })
            .collect();
        let mut out = format!(
            "{} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            values.join(", ")
        );
        if let Some(v) = &self.verdict {
            out.push_str(&format!(
                " (gap {}, combined std error {}, z {})",
                v.gap, v.combined_error, v.z
            ));
        }
        if let Some(n) = &self.note {
            out.push_str(&format!(" [{n}]"));
        }
        out
    }
}

/// Result of one suite. Serializes with sorted keys and no timestamps, so a
/// rerun with the same config is byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub version: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub config: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
}

impl SuiteReport {
    pub fn new(suite: &str, config: Value, checks: Vec<Check>) -> Self {
        Self {
            suite: suite.to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            passed: checks.iter().all(|c| c.passed),
            checks,
            config,
            data: None,
        }
    }

    pub fn with_data(mut self, data: impl Serialize) -> Result<Self> {
        self.data = Some(serde_json::to_value(data)?);
        Ok(self)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Pretty JSON with keys sorted at every level.
    pub fn to_json(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        let mut s = serde_json::to_string_pretty(&value)?;
        s.push('\n');
        Ok(s)
    }

    /// RFC 4180 rows `check,quantity,value,std_error`, one per check value.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["check", "quantity", "value", "std_error", "passed"])?;
        for c in &self.checks {
            for (k, v) in &c.values {
                let se = c.std_errors.get(k).map(|s| s.to_string()).unwrap_or_default();
                w.write_record([
                    c.name.as_str(),
                    k.as_str(),
                    &v.to_string(),
                    &se,
                    if c.passed { "true" } else { "false" },
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expectation::compare_values;

    fn report() -> SuiteReport {
        let ok = Check::new("b").value("z", 1.0).value("a", 0.1);
        let bad = Check::new("a")
            .with_error("left", 1.0, 0.01)
            .with_error("right", 2.0, 0.01)
            .verdict(compare_values(1.0, 0.01, 2.0, 0.01, 3.0));
        SuiteReport::new("demo", serde_json::json!({"y": 1, "x": 2}), vec![ok, bad])
    }

    #[test]
    fn overall_pass_is_conjunction() {
        let r = report();
        assert!(!r.passed);
        assert_eq!(r.failures().count(), 1);
        let msg = r.failures().next().unwrap().describe();
        assert!(
            msg.contains("left = 1 ± 0.01") && msg.contains("combined std error"),
            "{msg}"
        );
    }

    #[test]
    fn json_keys_sorted() {
        let s = report().to_json().unwrap();
        let x = s.find("\"x\"").unwrap();
        let y = s.find("\"y\"").unwrap();
        assert!(x < y);
        assert!(s.find("\"checks\"").unwrap() < s.find("\"config\"").unwrap());
        assert_eq!(s, report().to_json().unwrap());
    }

    #[test]
    fn csv_matches_json_numerics() {
        let r = report();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let mut rd = csv::Reader::from_reader(&buf[..]);
        let json: Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        let mut rows = 0;
        for rec in rd.records() {
            let rec = rec.unwrap();
            let check = json["checks"]
                .as_array()
                .unwrap()
                .iter()
                .find(|c| c["name"] == rec[0])
                .unwrap();
            let v: f64 = rec[2].parse().unwrap();
            assert_eq!(check["values"][&rec[1]].as_f64().unwrap(), v);
            rows += 1;
        }
        assert_eq!(rows, 4);
    }
}
