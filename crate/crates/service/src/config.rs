use std::net::SocketAddr;
use std::path::PathBuf;

use crate::ServiceError;

pub const DEFAULT_HOST: &str = "127.0.0.1";
pub const DEFAULT_PORT: u16 = 8420;
pub const DEFAULT_MAX_SESSIONS: usize = 1024;

pub const ENV_KB: &str = "LATFUZZ_KB";
pub const ENV_JOURNAL: &str = "LATFUZZ_JOURNAL";
pub const ENV_MAX_SESSIONS: &str = "LATFUZZ_MAX_SESSIONS";
pub const ENV_HOST: &str = "LATFUZZ_HOST";
pub const ENV_PORT: &str = "LATFUZZ_PORT";
pub const ENV_UI_DIR: &str = "LATFUZZ_UI_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub host: String,
    pub port: u16,
    /// Knowledge base source or compiled artifact.
    pub kb_path: Option<PathBuf>,
    /// Append-only session journal, replayed at startup.
    pub journal: Option<PathBuf>,
    pub max_sessions: usize,
    /// Built UI bundle served under `/`.
    pub ui_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            host: DEFAULT_HOST.to_owned(),
            port: DEFAULT_PORT,
            kb_path: None,
            journal: None,
            max_sessions: DEFAULT_MAX_SESSIONS,
            ui_dir: None,
        }
    }
}

impl ServiceConfig {
    /// Defaults overridden by the process environment.
    pub fn from_env() -> Result<Self, ServiceError> {
        Self::default().with_overrides(|key| std::env::var(key).ok())
    }

    /// Apply `LATFUZZ_*` overrides looked up through `var`.
    pub fn with_overrides(
        mut self,
        var: impl Fn(&str) -> Option<String>,
    ) -> Result<Self, ServiceError> {
        let var = |key: &str| var(key).filter(|v| !v.is_empty());
        if let Some(host) = var(ENV_HOST) {
            self.host = host;
        }
        if let Some(port) = var(ENV_PORT) {
            self.port = port
                .parse()
                .map_err(|_| ServiceError::Config(format!("{ENV_PORT}: invalid port `{port}`")))?;
        }
        if let Some(path) = var(ENV_KB) {
            self.kb_path = Some(path.into());
        }
        if let Some(path) = var(ENV_JOURNAL) {
            self.journal = Some(path.into());
        }
        if let Some(max) = var(ENV_MAX_SESSIONS) {
            self.max_sessions = match max.parse() {
                Ok(n) if n > 0 => n,
                _ => {
                    return Err(ServiceError::Config(format!(
                        "{ENV_MAX_SESSIONS}: expected a positive integer, got `{max}`"
                    )))
                }
            };
        }
        if let Some(path) = var(ENV_UI_DIR) {
            self.ui_dir = Some(path.into());
        }
        Ok(self)
    }

    pub fn socket_addr(&self) -> Result<SocketAddr, ServiceError> {
        let text = if self.host.contains(':') {
            format!("[{}]:{}", self.host, self.port)
        } else {
            format!("{}:{}", self.host, self.port)
        };
        text.parse()
            .map_err(|_| ServiceError::Config(format!("invalid listen address `{text}`")))
    }
}
