use crate::config::ExperimentConfig;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// FNV-1a, used to name runs after their configuration.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Run id from the command and the settings that affect results.
pub fn run_id(command: &str, config: &ExperimentConfig) -> String {
    let mut c = config.clone();
    c.threads = None;
    c.out = PathBuf::new();
    let text = format!("{command}\n{}", serde_json::to_string(&c).unwrap_or_default());
    format!("{:016x}", fnv1a(text.as_bytes()))
}

fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

/// Output directory, file naming and the manifest of one run. Every file is
/// named `<command>-<id>.<what>` and the manifest is `<command>-<id>.manifest.json`.
pub struct Run {
    pub command: String,
    pub config: ExperimentConfig,
    pub dir: PathBuf,
    pub id: String,
    artifacts: Vec<String>,
    start: Instant,
}

impl Run {
    pub fn new(command: &str, config: &ExperimentConfig) -> std::io::Result<Self> {
        std::fs::create_dir_all(&config.out)?;
        Ok(Run {
            command: command.into(),
            config: config.clone(),
            dir: config.out.clone(),
            id: run_id(command, config),
            artifacts: Vec::new(),
            start: Instant::now(),
        })
    }

    fn stem(&self) -> String {
        format!("{}-{}", self.command, self.id)
    }

    pub fn manifest_name(&self) -> String {
        format!("{}.manifest.json", self.stem())
    }

    pub fn path(&self, what: &str) -> PathBuf {
        self.dir.join(format!("{}.{what}", self.stem()))
    }

    pub fn write_text(&mut self, what: &str, text: &str) -> std::io::Result<PathBuf> {
        let p = self.path(what);
        std::fs::write(&p, text)?;
        self.artifacts.push(file_name(&p));
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&mut self, what: &str, value: &T) -> std::io::Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
        text.push('\n');
        self.write_text(what, &text)
    }

    /// Writes the manifest and returns its path.
    pub fn finish(self, summary: Value) -> std::io::Result<PathBuf> {
        let manifest = json!({
            "command": self.command,
            "run_id": self.id,
            "config": self.config,
            "git_describe": git_describe(),
            "wall_time_secs": self.start.elapsed().as_secs_f64(),
            "artifacts": self.artifacts,
            "summary": summary,
        });
        let p = self.dir.join(self.manifest_name());
        std::fs::write(&p, serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)? + "\n")?;
        Ok(p)
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_ignores_threads_and_output() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig { threads: Some(3), out: "elsewhere".into(), ..Default::default() };
        let c = ExperimentConfig { seed: 2, ..Default::default() };
        assert_eq!(run_id("scan-point", &a), run_id("scan-point", &b));
        assert_ne!(run_id("scan-point", &a), run_id("scan-point", &c));
        assert_ne!(run_id("scan-point", &a), run_id("scan-box", &a));
    }
}
