//! Pass/fail bookkeeping for the acceptance run: each criterion prints one
//! verdict line followed by its individual checks.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

/// Individual checks and notes gathered while evaluating one criterion.
#[derive(Debug, Default)]
pub struct Checks {
    items: Vec<(String, bool)>,
    notes: Vec<String>,
}

impl Checks {
    pub fn check(&mut self, label: impl Into<String>, ok: bool) -> bool {
        self.items.push((label.into(), ok));
        ok
    }

    /// Informational line that does not affect the verdict.
    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn passed(&self) -> bool {
        !self.items.is_empty() && self.items.iter().all(|(_, ok)| *ok)
    }
}

#[derive(Debug, Default)]
pub struct Suite {
    verdicts: Vec<(u32, bool)>,
}

impl Suite {
    pub fn new() -> Self {
        Self::default()
    }

    /// Runs one criterion. A panic inside `body` counts as a failure, and the
    /// elapsed time is checked against `budget`.
    pub fn run(&mut self, id: u32, title: &str, budget: Duration, body: impl FnOnce(&mut Checks)) {
        let mut checks = Checks::default();
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| body(&mut checks)));
        let elapsed = start.elapsed();
        if let Err(panic) = outcome {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            checks.check(format!("completed without panicking ({msg})"), false);
        }
        checks.check(
            format!("runtime {:.2} s within {:.0} s", elapsed.as_secs_f64(), budget.as_secs_f64()),
            elapsed <= budget,
        );
        let ok = checks.passed();
        println!("criterion {id} [{}] {title}", if ok { "PASS" } else { "FAIL" });
        for (label, good) in &checks.items {
            println!("    {} {label}", if *good { "ok  " } else { "FAIL" });
        }
        for n in &checks.notes {
            println!("    note {n}");
        }
        self.verdicts.push((id, ok));
    }

    /// Prints the tally and returns whether every criterion passed.
    pub fn finish(&self) -> bool {
        let failed: Vec<String> = self
            .verdicts
            .iter()
            .filter(|(_, ok)| !ok)
            .map(|(id, _)| id.to_string())
            .collect();
        println!(
            "acceptance: {} of {} criteria passed{}",
            self.verdicts.len() - failed.len(),
            self.verdicts.len(),
            if failed.is_empty() {
                String::new()
            } else {
                format!("; failed: {}", failed.join(", "))
            }
        );
        failed.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_or_failing_checks_do_not_pass() {
        let mut c = Checks::default();
        assert!(!c.passed());
        c.check("a", true);
        assert!(c.passed());
        c.check("b", false);
        assert!(!c.passed());
    }

    #[test]
    fn panics_become_failures() {
        let mut s = Suite::new();
        s.run(1, "boom", Duration::from_secs(5), |_| panic!("nope"));
        s.run(2, "fine", Duration::from_secs(5), |c| {
            c.check("x", true);
        });
        assert_eq!(s.verdicts, vec![(1, false), (2, true)]);
        assert!(!s.finish());
    }
}
