use std::fmt;

/// A manifest problem, pinned to a field and, when it can be found, a line.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &str, message: impl Into<String>) -> Self {
        Self {
            line: None,
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn from_toml(e: &toml::de::Error, source: &str) -> Self {
        let Some(span) = e.span() else {
            return Self::new("manifest", e.message());
        };
        let line = source[..span.start.min(source.len())].matches('\n').count() + 1;
        let mut section = String::new();
        for l in source.lines().take(line) {
            if let Some(h) = header(l) {
                section = h.0.to_string();
            }
        }
        let text = source.lines().nth(line - 1).unwrap_or("");
        let field = match (header(text), text.split_once('=')) {
            (Some((h, _)), _) => h.to_string(),
            (None, Some((key, _))) if !section.is_empty() => format!("{section}.{}", key.trim()),
            (None, Some((key, _))) => key.trim().to_string(),
            _ => section,
        };
        Self {
            line: Some(line),
            field: if field.is_empty() { "manifest".into() } else { field },
            message: e.message().to_string(),
        }
    }

    pub(crate) fn from_model(e: fdcmac::Error) -> Self {
        match e {
            fdcmac::Error::InvalidConfig { field, reason } => Self::new(field, reason),
            other => Self::new("manifest", other.to_string()),
        }
    }

    /// Fills in the line of `field` from the manifest text if it is unknown.
    pub fn locate(mut self, source: &str) -> Self {
        if self.line.is_none() {
            self.line = find_line(source, &self.field);
        }
        self
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: `{}`: {}", self.field, self.message),
            None => write!(f, "`{}`: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Section name of a `[table]` or `[[array]]` header line, and whether it is an array.
fn header(line: &str) -> Option<(&str, bool)> {
    let t = line.trim();
    if let Some(inner) = t.strip_prefix("[[").and_then(|r| r.split_once("]]")) {
        return Some((inner.0.trim(), true));
    }
    t.strip_prefix('[').and_then(|r| r.split_once(']')).map(|(h, _)| (h.trim(), false))
}

/// Line of `section.key`, `section[i].key` or `section`, also matching `key_db`.
fn find_line(source: &str, field: &str) -> Option<usize> {
    let (path, key) = match field.rsplit_once('.') {
        Some((p, k)) => (p, Some(k)),
        None => (field, None),
    };
    let (section, index) = match path.split_once('[') {
        Some((s, rest)) => (s, rest.trim_end_matches(']').parse::<usize>().ok()),
        None => (path, None),
    };
    let key = key.map(|k| k.trim_end_matches("_db"));

    let mut seen = 0usize;
    let mut in_target = false;
    let mut header_line = None;
    for (i, l) in source.lines().enumerate() {
        if let Some((h, array)) = header(l) {
            in_target = h == section && (!array || index.is_none_or(|want| {
                seen += 1;
                seen == want + 1
            }));
            if in_target && header_line.is_none() {
                header_line = Some(i + 1);
            }
            continue;
        }
        let Some(k) = key else { continue };
        if !in_target {
            continue;
        }
        if let Some((lhs, _)) = l.split_once('=') {
            let lhs = lhs.trim();
            if lhs == k || lhs.strip_suffix("_db") == Some(k) {
                return Some(i + 1);
            }
        }
    }
    header_line
}

/// Failure of a whole run, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Io { path: String, source: std::io::Error },
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "invalid manifest: {e}"),
            CliError::Io { path, source } => write!(f, "{path}: {source}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}
