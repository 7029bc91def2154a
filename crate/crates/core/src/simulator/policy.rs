use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which Newsfeed entry a user re-posts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    Random,
    Newest,
    /// Highest current global re-post count.
    MostPopular,
    /// Lowest current global re-post count.
    LeastPopular,
}

/// Which entry a new arrival pushes out of a full list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Eviction {
    Random,
    /// New entries go on top, the oldest leaves.
    Fifo,
    /// Newsfeed entries leave after a fixed lifetime; Newsfeeds are unbounded
    /// and Walls fall back to FIFO.
    Ttl(f64),
}

/// Inter-arrival law of each user's posting and re-posting streams. All
/// variants keep the mean at `1 / rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arrivals {
    Poisson,
    /// Two-phase hyper-exponential with balanced means and the given squared
    /// coefficient of variation.
    HyperExponential { cv2: f64 },
    Deterministic,
}

pub const DEFAULT_HYPER_CV2: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub selection: Selection,
    pub eviction: Eviction,
    pub arrivals: Arrivals,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            selection: Selection::Random,
            eviction: Eviction::Random,
            arrivals: Arrivals::Poisson,
        }
    }
}

impl PolicyConfig {
    pub fn new(selection: Selection, eviction: Eviction) -> Self {
        PolicyConfig {
            selection,
            eviction,
            arrivals: Arrivals::Poisson,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Eviction::Ttl(t) = self.eviction {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::invalid("ttl eviction needs a positive finite lifetime"));
            }
        }
        if let Arrivals::HyperExponential { cv2 } = self.arrivals {
            if !(cv2 > 1.0 && cv2.is_finite()) {
                return Err(Error::invalid("hyper-exponential arrivals need cv2 > 1"));
            }
        }
        Ok(())
    }
}

impl Arrivals {
    /// Time to the next firing of a stream with the given rate.
    pub(crate) fn sample<R: Rng + ?Sized>(&self, rate: f64, rng: &mut R) -> f64 {
        match *self {
            Arrivals::Poisson => Exp::new(rate).expect("positive rate").sample(rng),
            Arrivals::HyperExponential { cv2 } => {
                let p1 = 0.5 * (1.0 + ((cv2 - 1.0) / (cv2 + 1.0)).sqrt());
                let phase = if rng.random::<f64>() < p1 { p1 } else { 1.0 - p1 };
                let phase_rate = 2.0 * phase * rate;
                Exp::new(phase_rate).expect("positive rate").sample(rng)
            }
            Arrivals::Deterministic => 1.0 / rate,
        }
    }

    /// First firing time. Deterministic streams start at a uniform phase so
    /// that equal-rate users do not fire in lockstep.
    pub(crate) fn first<R: Rng + ?Sized>(&self, rate: f64, rng: &mut R) -> f64 {
        match self {
            Arrivals::Deterministic => rng.random::<f64>() / rate,
            _ => self.sample(rate, rng),
        }
    }
}

impl FromStr for Selection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Selection::Random),
            "newest" => Ok(Selection::Newest),
            "most_popular" | "most-popular" => Ok(Selection::MostPopular),
            "least_popular" | "least-popular" => Ok(Selection::LeastPopular),
            _ => Err(Error::invalid(format!("unknown selection policy '{s}'"))),
        }
    }
}

impl FromStr for Eviction {
    type Err = Error;
    /// `random`, `fifo`, or `ttl:<lifetime>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Eviction::Random),
            "fifo" | "fifo_oldest" => Ok(Eviction::Fifo),
            _ => match s.strip_prefix("ttl:") {
                Some(t) => t
                    .parse::<f64>()
                    .map(Eviction::Ttl)
                    .map_err(|_| Error::invalid(format!("bad ttl lifetime in '{s}'"))),
                None => Err(Error::invalid(format!("unknown eviction policy '{s}'"))),
            },
        }
    }
}

impl FromStr for Arrivals {
    type Err = Error;
    /// `poisson`, `deterministic`, `hyperexp` or `hyperexp:<cv2>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poisson" => Ok(Arrivals::Poisson),
            "deterministic" => Ok(Arrivals::Deterministic),
            "hyperexp" | "hyperexponential" => Ok(Arrivals::HyperExponential {
                cv2: DEFAULT_HYPER_CV2,
            }),
            _ => match s.strip_prefix("hyperexp:") {
                Some(c) => c
                    .parse::<f64>()
                    .map(|cv2| Arrivals::HyperExponential { cv2 })
                    .map_err(|_| Error::invalid(format!("bad cv2 in '{s}'"))),
                None => Err(Error::invalid(format!("unknown arrival process '{s}'"))),
            },
        }
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Selection::Random => "random",
            Selection::Newest => "newest",
            Selection::MostPopular => "most_popular",
            Selection::LeastPopular => "least_popular",
        })
    }
}

impl fmt::Display for Eviction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eviction::Random => f.write_str("random"),
            Eviction::Fifo => f.write_str("fifo"),
            Eviction::Ttl(t) => write!(f, "ttl:{t}"),
        }
    }
}
