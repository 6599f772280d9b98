use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

macro_rules! capabilities {
    ($( $variant:ident => $token:literal ),* $(,)?) => {
        /// A visibility or functionality switch that a Role turns on or off.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum Capability {
            $(
                #[serde(rename = $token)]
                $variant,
            )*
        }

        impl Capability {
            pub const ALL: &'static [Capability] = &[$(Capability::$variant),*];

            pub fn token(self) -> &'static str {
                match self {
                    $(Capability::$variant => $token,)*
                }
            }
        }

        impl FromStr for Capability {
            type Err = UnknownCapability;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($token => Ok(Capability::$variant),)*
                    other => Err(UnknownCapability(other.to_string())),
                }
            }
        }
    };
}

capabilities! {
    SendText => "send-text",
    SendTtsLive => "send-tts-live",
    SendImage => "send-image",
    SendAudio => "send-audio",
    SendAssociation => "send-association",
    SendFraction => "send-fraction",
    SendOsc => "send-osc",
    SendAlgorithm => "send-algorithm",
    ReceiveText => "receive-text",
    ReceiveTtsLive => "receive-tts-live",
    ReceiveImage => "receive-image",
    ReceiveAudio => "receive-audio",
    ReceiveInterface => "receive-interface",
    ReceiveOsc => "receive-osc",
    ShowMenu => "show-menu",
    ShowTitle => "show-title",
    RoleList => "role-list",
    PerformerList => "performer-list",
    PerformerActivityLog => "performer-activity-log",
    GlobalActivityLog => "global-activity-log",
    ChangeRole => "change-role",
    ChangeInterface => "change-interface",
    ChangeFunctionality => "change-functionality",
    TestFunctionality => "test-functionality",
}

impl fmt::Display for Capability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown capability flag `{0}`")]
pub struct UnknownCapability(pub String);

/// The set of flags switched on for a Role or performer.
///
/// Serializes as a sorted list of kebab-case tokens.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CapabilitySet(BTreeSet<Capability>);

impl CapabilitySet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        Capability::ALL.iter().copied().collect()
    }

    pub fn has(&self, cap: Capability) -> bool {
        self.0.contains(&cap)
    }

    pub fn set(&mut self, cap: Capability) {
        self.0.insert(cap);
    }

    pub fn unset(&mut self, cap: Capability) {
        self.0.remove(&cap);
    }

    pub fn iter(&self) -> impl Iterator<Item = Capability> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Every known flag mapped to whether it is switched on. Clients render
    /// their controls from this map.
    pub fn flag_map(&self) -> BTreeMap<String, bool> {
        Capability::ALL
            .iter()
            .map(|c| (c.token().to_string(), self.has(*c)))
            .collect()
    }

    pub fn from_flag_map(map: &BTreeMap<String, bool>) -> Result<Self, UnknownCapability> {
        let mut set = Self::empty();
        for (token, on) in map {
            let cap: Capability = token.parse()?;
            if *on {
                set.set(cap);
            }
        }
        Ok(set)
    }
}

impl FromIterator<Capability> for CapabilitySet {
    fn from_iter<I: IntoIterator<Item = Capability>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl<const N: usize> From<[Capability; N]> for CapabilitySet {
    fn from(caps: [Capability; N]) -> Self {
        caps.into_iter().collect()
    }
}
