use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::domain::{Day, PlayerId};
use crate::error::{Error, Result};

/// The five interaction layers of the platform.
///
/// Edge direction per layer: AC speaker -> room owner, DM sender -> receiver,
/// Comment commenter -> board owner, Follow follower -> followed,
/// Like reactor -> receiver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Layer {
    Ac = 0,
    Dm = 1,
    Comment = 2,
    Follow = 3,
    Like = 4,
}

/// All layers in canonical order.
pub const LAYERS: [Layer; 5] = [
    Layer::Ac,
    Layer::Dm,
    Layer::Comment,
    Layer::Follow,
    Layer::Like,
];

impl Layer {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Layer {
        LAYERS[i]
    }

    /// Layers in which violations can occur (the two chat functions).
    pub fn supports_violation(self) -> bool {
        matches!(self, Layer::Ac | Layer::Dm)
    }

    pub fn name(self) -> &'static str {
        match self {
            Layer::Ac => "AC",
            Layer::Dm => "DM",
            Layer::Comment => "Comment",
            Layer::Follow => "Follow",
            Layer::Like => "Like",
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Layer {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "AC" => Ok(Layer::Ac),
            "DM" => Ok(Layer::Dm),
            "Comment" => Ok(Layer::Comment),
            "Follow" => Ok(Layer::Follow),
            "Like" => Ok(Layer::Like),
            other => Err(format!("unknown layer `{other}`")),
        }
    }
}

/// Avatar gender as set on the avatar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gender {
    Female,
    Male,
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gender::Female => f.write_str("female"),
            Gender::Male => f.write_str("male"),
        }
    }
}

/// One platform account with its observable metadata and the latent traits
/// that only the generator knows.
#[derive(Clone, Debug)]
pub struct PlayerRecord {
    pub player_id: PlayerId,
    pub avatar_gender: Gender,
    /// Avatar age in years.
    pub avatar_age: u32,
    /// Install day index; at or before day 0.
    pub install_day: i32,
    /// Already penalized by the administrator.
    pub penalized: bool,
    /// Latent: tendency to commit grooming-related violations, in [0,1].
    pub predator_propensity: f64,
    /// Latent: tendency to be targeted and to reciprocate, in [0,1].
    pub victim_susceptibility: f64,
    /// Latent: how strongly warnings change behavior, in [0,1].
    pub responsiveness: f64,
    /// Latent: probability of logging in on a given day, in [0,1].
    pub login_prob: f64,
    /// Latent: multiplier on daily activity volume.
    pub activity_mult: f64,
    /// Latent: share of activity placed in the night band, in [0,1].
    pub night_share: f64,
}

impl PlayerRecord {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.predator_propensity)
            || !unit(self.victim_susceptibility)
            || !unit(self.responsiveness)
            || !unit(self.login_prob)
            || !unit(self.night_share)
        {
            return Err(Error::Domain(format!(
                "player {} has a latent trait outside [0,1]",
                self.player_id
            )));
        }
        Ok(())
    }
}

/// One timestamped directed social action.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InteractionEvent {
    pub day: Day,
    /// Hour of day, 0–23.
    pub hour: u8,
    pub layer: Layer,
    pub actor: PlayerId,
    pub target: PlayerId,
    /// Moderator-flagged grooming-related violation by actor against target.
    pub violation: bool,
}

impl InteractionEvent {
    pub fn validate(&self) -> Result<()> {
        if self.actor == self.target {
            return Err(Error::Domain("event actor equals target".into()));
        }
        if self.hour > 23 {
            return Err(Error::Domain(format!("event hour {} out of range", self.hour)));
        }
        if self.violation && !self.layer.supports_violation() {
            return Err(Error::Domain(format!(
                "violation flagged on {} layer; only AC and DM carry violations",
                self.layer
            )));
        }
        Ok(())
    }

    /// Line format: `day,hour,layer,actor,target,violation`.
    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.day,
            self.hour,
            self.layer,
            self.actor,
            self.target,
            u8::from(self.violation)
        )
    }
}

/// Parses one event-log line; field order is fixed.
pub fn parse_event_line(line: &str, path: &str, lineno: usize) -> Result<InteractionEvent> {
    let err = |message: String| Error::Parse {
        path: path.to_string(),
        line: lineno,
        message,
    };
    let mut fields = line.split(',');
    let mut next = |name: &str| {
        fields
            .next()
            .ok_or_else(|| err(format!("missing field `{name}`")))
    };
    let day: Day = next("day")?
        .parse()
        .map_err(|e| err(format!("bad day: {e}")))?;
    let hour: u8 = next("hour")?
        .parse()
        .map_err(|e| err(format!("bad hour: {e}")))?;
    let layer: Layer = next("layer")?.parse().map_err(err)?;
    let actor: PlayerId = next("actor")?
        .parse()
        .map_err(|e| err(format!("bad actor: {e}")))?;
    let target: PlayerId = next("target")?
        .parse()
        .map_err(|e| err(format!("bad target: {e}")))?;
    let violation = match next("violation")? {
        "0" => false,
        "1" => true,
        other => return Err(err(format!("bad violation flag `{other}`"))),
    };
    if fields.next().is_some() {
        return Err(err("trailing fields".into()));
    }
    let ev = InteractionEvent {
        day,
        hour,
        layer,
        actor,
        target,
        violation,
    };
    ev.validate()
        .map_err(|e| err(e.to_string()))?;
    Ok(ev)
}

/// Writes events in the line format, one per line, in the given order.
pub fn write_event_log<W: Write>(mut w: W, events: &[InteractionEvent]) -> Result<()> {
    for ev in events {
        writeln!(w, "{}", ev.to_line())?;
    }
    Ok(())
}

/// Reads an event log, skipping `#` header/comment lines.
pub fn read_event_log<R: BufRead>(r: R, path: &str) -> Result<Vec<InteractionEvent>> {
    let mut events = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        events.push(parse_event_line(&line, path, i + 1)?);
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_round_trip() {
        let ev = InteractionEvent {
            day: 12,
            hour: 22,
            layer: Layer::Dm,
            actor: 401,
            target: 773,
            violation: true,
        };
        let line = ev.to_line();
        assert_eq!(line, "12,22,DM,401,773,1");
        assert_eq!(parse_event_line(&line, "t", 1).unwrap(), ev);
    }

    #[test]
    fn unknown_layer_is_an_error() {
        let err = parse_event_line("1,2,Room,3,4,0", "t", 1).unwrap_err();
        assert!(err.to_string().contains("unknown layer"));
    }

    #[test]
    fn violation_restricted_to_chat_layers() {
        assert!(parse_event_line("1,2,Like,3,4,1", "t", 1).is_err());
        assert!(parse_event_line("1,2,AC,3,4,1", "t", 1).is_ok());
    }

    #[test]
    fn self_loop_rejected() {
        assert!(parse_event_line("1,2,DM,3,3,0", "t", 1).is_err());
    }
}
