//! DNS-name syntax used for party identities.

/// Longest accepted domain, in bytes.
pub const MAX_DOMAIN_LEN: usize = 253;

/// Longest accepted `app_id`, in characters.
pub const MAX_APP_ID_LEN: usize = 128;

/// Lowercase dot-separated labels of `[a-z0-9-]`, at most 253 bytes.
pub fn is_valid_domain(domain: &str) -> bool {
    !domain.is_empty()
        && domain.len() <= MAX_DOMAIN_LEN
        && domain.split('.').all(|label| {
            !label.is_empty()
                && label
                    .bytes()
                    .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
        })
}

/// Non-empty, at most 128 printable ASCII characters.
pub fn is_valid_app_id(app_id: &str) -> bool {
    !app_id.is_empty()
        && app_id.chars().count() <= MAX_APP_ID_LEN
        && app_id.chars().all(|c| c.is_ascii_graphic() || c == ' ')
}
