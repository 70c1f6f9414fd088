//! Line-keyed analysis reports.
//!
//! A report renders as `key: value` lines: the command echo first, then the
//! body in insertion order, then the verdict. Rendering is deterministic;
//! timing is kept out of the body.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    Conditional,
    InputError,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Yes => 0,
            Verdict::No => 1,
            Verdict::Conditional => 2,
            Verdict::InputError => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Conditional => "conditional",
            Verdict::InputError => "error",
        }
    }

    /// A definitive answer, downgraded to `Conditional` when tainted.
    pub fn of(holds: bool, conditional: bool) -> Verdict {
        match (holds, conditional) {
            (_, true) => Verdict::Conditional,
            (true, false) => Verdict::Yes,
            (false, false) => Verdict::No,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub command: String,
    pub lines: Vec<(String, String)>,
    pub artifacts: Vec<Artifact>,
    pub verdict: Verdict,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Report {
        Report { command: command.into(), lines: Vec::new(), artifacts: Vec::new(), verdict: Verdict::Yes }
    }

    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        let v = value.to_string().replace('\n', " ");
        self.lines.push((key.to_string(), v));
        self
    }

    /// Records an artifact file; the body names it under `artifact`.
    pub fn artifact(&mut self, name: &str, contents: String) -> &mut Self {
        self.push("artifact", name);
        self.artifacts.push(Artifact { name: name.to_string(), contents });
        self
    }

    pub fn error(command: impl Into<String>, msg: impl ToString) -> Report {
        let mut r = Report::new(command);
        r.push("error", msg);
        r.verdict = Verdict::InputError;
        r
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_all(&self, key: &str) -> Vec<&str> {
        self.lines.iter().filter(|(k, _)| k == key).map(|(_, v)| v.as_str()).collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command);
        for (k, v) in &self.lines {
            let _ = writeln!(out, "{k}: {v}");
        }
        let _ = writeln!(out, "verdict: {}", self.verdict.name());
        out
    }

    /// Writes the artifacts and `report.txt` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for a in &self.artifacts {
            let p = dir.join(&a.name);
            std::fs::write(&p, &a.contents)?;
            paths.push(p);
        }
        let p = dir.join("report.txt");
        std::fs::write(&p, self.render())?;
        paths.push(p);
        Ok(paths)
    }
}

/// Parses a rendered report back into `(key, value)` lines.
pub fn parse_report(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once(": ").map(|(k, v)| (k.to_string(), v.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Verdict::of(true, false).exit_code(), 0);
        assert_eq!(Verdict::of(false, false).exit_code(), 1);
        assert_eq!(Verdict::of(true, true).exit_code(), 2);
        assert_eq!(Verdict::of(false, true).exit_code(), 2);
        assert_eq!(Report::error("x", "bad").verdict.exit_code(), 3);
    }

    #[test]
    fn render_is_line_keyed() {
        let mut r = Report::new("analyze decisive");
        r.push("belief", "B01 f").push("belief", "B12 t").artifact("s.strat", "memory 1\n".into());
        r.verdict = Verdict::No;
        let text = r.render();
        assert_eq!(text, "command: analyze decisive\nbelief: B01 f\nbelief: B12 t\nartifact: s.strat\nverdict: no\n");
        let lines = parse_report(&text);
        assert_eq!(lines.len(), 5);
        assert_eq!(r.get_all("belief"), vec!["B01 f", "B12 t"]);
        assert_eq!(r.render(), text);
    }

    #[test]
    fn writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = Report::new("c");
        r.artifact("a.txt", "hello\n".into());
        let paths = r.write_dir(dir.path()).unwrap();
        assert_eq!(paths.len(), 2);
        assert_eq!(std::fs::read_to_string(dir.path().join("a.txt")).unwrap(), "hello\n");
    }
}
