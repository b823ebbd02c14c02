//! Small hand-built instances used by tests, examples and the CLI.

use crate::network::{AgentId, AuctionInstance, Profile};

/// Buyers of the seven-buyer tree
/// `s -> a, s -> b, b -> c, c -> d, c -> e, e -> f, f -> g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SevenBuyer {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl SevenBuyer {
    pub const ALL: [SevenBuyer; 7] = [
        SevenBuyer::A,
        SevenBuyer::B,
        SevenBuyer::C,
        SevenBuyer::D,
        SevenBuyer::E,
        SevenBuyer::F,
        SevenBuyer::G,
    ];

    pub fn id(self) -> AgentId {
        AgentId(self as usize)
    }

    pub fn name(self) -> char {
        (b'a' + self as u8) as char
    }

    pub fn from_id(id: AgentId) -> Option<SevenBuyer> {
        SevenBuyer::ALL.get(id.0).copied()
    }
}

fn seven_buyer(values: [f64; 7], m: usize) -> AuctionInstance {
    use SevenBuyer::*;
    let edges: [&[SevenBuyer]; 7] = [&[], &[C], &[D, E], &[], &[F], &[G], &[]];
    let profiles = values
        .iter()
        .zip(edges)
        .map(|(&v, out)| Profile::new(v, out.iter().map(|b| b.id())))
        .collect();
    AuctionInstance::new(m, [A.id(), B.id()], profiles).expect("fixture is valid")
}

/// Values a=3, b=1, c=1, d=4, e=3.5, f=7, g=3.5.
pub fn seven_buyer_tree(m: usize) -> AuctionInstance {
    seven_buyer([3.0, 1.0, 1.0, 4.0, 3.5, 7.0, 3.5], m)
}

/// Integer values a=3, b=1, c=1, d=6, e=4, f=7, g=5.
pub fn seven_buyer_tree_integer(m: usize) -> AuctionInstance {
    seven_buyer([3.0, 1.0, 1.0, 6.0, 4.0, 7.0, 5.0], m)
}

/// Agent ids of [`weak_efficiency_chain`].
#[derive(Debug, Clone)]
pub struct ChainIds {
    /// `i_1 ..= i_{m+1}`.
    pub spine: Vec<AgentId>,
    /// `j_1 ..= j_{m-1}`, `j_k` hanging off `i_k`.
    pub pendants: Vec<AgentId>,
}

/// Spine `s -> i_1 -> ... -> i_{m+1}` with a pendant `j_k` below each of the
/// first `m-1` spine nodes. Values: `n` for `i_1 .. i_{m-1}`, `n^2 - tau` for
/// the pendants, `n^2` for `i_m` and `n^3` for `i_{m+1}`.
///
/// MUDAN with degree priority spends `m-1` items on the cheap spine and sells
/// the last one to `i_m`, which hides `i_{m+1}` behind it.
pub fn weak_efficiency_chain(n: f64, m: usize, tau: f64) -> (AuctionInstance, ChainIds) {
    assert!(m >= 1);
    let spine: Vec<AgentId> = (0..=m).map(AgentId).collect();
    let pendants: Vec<AgentId> = (0..m - 1).map(|k| AgentId(m + 1 + k)).collect();
    let mut profiles = Vec::with_capacity(spine.len() + pendants.len());
    for k in 0..=m {
        let value = if k + 1 < m {
            n
        } else if k + 1 == m {
            n * n
        } else {
            n * n * n
        };
        let mut out = Vec::new();
        if k < m {
            out.push(spine[k + 1]);
        }
        if k + 1 < m {
            out.push(pendants[k]);
        }
        profiles.push(Profile::new(value, out));
    }
    for _ in &pendants {
        profiles.push(Profile::new(n * n - tau, []));
    }
    let inst = AuctionInstance::new(m, [spine[0]], profiles).expect("fixture is valid");
    (inst, ChainIds { spine, pendants })
}
