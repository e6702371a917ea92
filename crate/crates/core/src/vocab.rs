//! Closed vocabularies used by policy documents and preference profiles.
//!
//! Every enum here has a fixed wire spelling. Unknown spellings are rejected
//! at parse time with an "unknown vocabulary" error that names the token.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// Prefix carried by every vocabulary error message; the document parser
/// keys its error classification off it.
pub(crate) const UNKNOWN_VOCABULARY: &str = "unknown vocabulary";

/// Error returned when a token is outside its closed vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown vocabulary `{token}` for {vocabulary}")]
pub struct UnknownToken {
    pub vocabulary: &'static str,
    pub token: String,
}

macro_rules! vocabulary {
    (
        $(#[$meta:meta])*
        $name:ident ($label:literal) {
            $( $variant:ident => $wire:literal ),+ $(,)?
        }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum $name {
            $( $variant ),+
        }

        // Ordered by wire spelling, so sets serialize in canonical order.
        impl Ord for $name {
            fn cmp(&self, other: &Self) -> std::cmp::Ordering {
                self.as_str().cmp(other.as_str())
            }
        }

        impl PartialOrd for $name {
            fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
                Some(self.cmp(other))
            }
        }

        impl $name {
            pub const ALL: &'static [$name] = &[ $( $name::$variant ),+ ];

            pub const fn as_str(self) -> &'static str {
                match self {
                    $( $name::$variant => $wire ),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = UnknownToken;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $( $wire => Ok($name::$variant), )+
                    other => Err(UnknownToken { vocabulary: $label, token: other.to_string() }),
                }
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                struct TokenVisitor;

                impl<'de> Visitor<'de> for TokenVisitor {
                    type Value = $name;

                    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                        write!(f, "a {} token", $label)
                    }

                    fn visit_str<E: de::Error>(self, v: &str) -> Result<$name, E> {
                        v.parse().map_err(|e: UnknownToken| {
                            E::custom(format!("{UNKNOWN_VOCABULARY} `{}` for {}", e.token, e.vocabulary))
                        })
                    }
                }

                deserializer.deserialize_str(TokenVisitor)
            }
        }
    };
}

vocabulary! {
    /// Kind of personal data a practice or flow concerns.
    DataCategory("data category") {
        Location => "location",
        Contacts => "contacts",
        DeviceIdentifier => "device-identifier",
        Usage => "usage",
        InAppBehavior => "in-app-behavior",
        Messages => "messages",
        Media => "media",
        Calendar => "calendar",
        Financial => "financial",
        Health => "health",
    }
}

vocabulary! {
    /// What collected data is used for.
    Purpose("purpose") {
        CoreFunction => "core-function",
        Analytics => "analytics",
        Advertising => "advertising",
        Personalization => "personalization",
        LegalCompliance => "legal-compliance",
        Research => "research",
    }
}

vocabulary! {
    /// How often data is collected.
    Frequency("frequency") {
        Once => "once",
        PerSession => "per-session",
        OnEvent => "on-event",
        Continuous => "continuous",
    }
}

vocabulary! {
    /// Where collected data is kept.
    Storage("storage") {
        OnDevice => "on-device",
        FirstPartyServer => "first-party-server",
        ThirdPartyServer => "third-party-server",
    }
}

vocabulary! {
    /// How stored data is tied back to the person.
    Linkage("linkage") {
        Named => "named",
        DeviceIdentifier => "device-identifier",
        HashedIdentifier => "hashed-identifier",
        AnonymousAggregate => "anonymous-aggregate",
    }
}

vocabulary! {
    /// Protections applied to stored or transmitted data.
    Security("security") {
        EncryptedAtRest => "encrypted-at-rest",
        EncryptedInTransit => "encrypted-in-transit",
        AccessControlled => "access-controlled",
    }
}

vocabulary! {
    /// Direction of a declared sharing flow, seen from the declaring party.
    Direction("flow direction") {
        Outbound => "outbound",
        Inbound => "inbound",
    }
}

vocabulary! {
    /// Whether a referenced partner publishes a policy of its own.
    PartyKind("party kind") {
        Mrpp => "mrpp",
        BareDomain => "bare-domain",
    }
}
