//! UTC instants. Every timestamp is parsed as RFC 3339 and normalized to UTC
//! before comparison; formatting always uses the `Z` suffix.

use chrono::{DateTime, SecondsFormat, Utc};

pub type Instant = DateTime<Utc>;

pub fn parse_instant(text: &str) -> Result<Instant, chrono::ParseError> {
    DateTime::parse_from_rfc3339(text).map(|t| t.with_timezone(&Utc))
}

pub fn format_instant(t: Instant) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Placeholder instant for records whose time is not stored in the file.
pub fn epoch() -> Instant {
    DateTime::<Utc>::UNIX_EPOCH
}
