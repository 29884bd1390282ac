//! Worked topologies used across tests, the acceptance suite and the docs.
//!
//! Specifications are written with 1-based message and alliance numbers;
//! matrices were expanded by hand so tests can compare them against
//! `derive_topology`.

use crate::model::{
    parse_topology, Alliance, AllianceSpec, GeneralizedAlliance, GeneralizedAllianceSpec,
    TopologyMatrix,
};

/// Builds a plain spec from `alliances[i] = [(partner, messages), ...]`, all 1-based.
pub fn plain_spec(k: usize, alliances: &[&[(usize, &[usize])]]) -> AllianceSpec {
    let alliances = alliances
        .iter()
        .map(|subs| {
            subs.iter().fold(Alliance::default(), |a, (partner, msgs)| {
                a.with_sub(partner - 1, msgs.iter().map(|m| m - 1))
            })
        })
        .collect();
    AllianceSpec::new(k, alliances).expect("fixture spec is well formed")
}

/// Builds a generalized spec from `alliances[i] = [(interferers, messages), ...]`, all 1-based.
pub fn generalized_spec(
    k: usize,
    alliances: &[&[(&[usize], &[usize])]],
) -> GeneralizedAllianceSpec {
    let alliances = alliances
        .iter()
        .map(|subs| {
            subs.iter()
                .fold(GeneralizedAlliance::default(), |a, (ints, msgs)| {
                    a.with_sub(ints.iter().map(|j| j - 1), msgs.iter().map(|m| m - 1))
                })
        })
        .collect();
    GeneralizedAllianceSpec::new(k, alliances).expect("fixture spec is well formed")
}

fn grid(text: &str) -> TopologyMatrix {
    parse_topology(text).expect("fixture grid is valid")
}

/// Two alliances {W1,W2} and {W3,W4}, mutually hostile.
pub fn paired4_spec() -> AllianceSpec {
    plain_spec(4, &[&[(2, &[1, 2])], &[(1, &[3, 4])]])
}

pub fn paired4_matrix() -> TopologyMatrix {
    grid("1011\n0111\n1110\n1101")
}

/// Two alliances {W1,W2,W3} and {W4}, mutually hostile.
pub fn lopsided4_spec() -> AllianceSpec {
    plain_spec(4, &[&[(2, &[1, 2, 3])], &[(1, &[4])]])
}

pub fn lopsided4_matrix() -> TopologyMatrix {
    grid("1001\n0101\n0011\n1111")
}

/// Three alliances of two messages, one message per sub-alliance.
pub fn ring6_spec() -> AllianceSpec {
    plain_spec(
        6,
        &[
            &[(2, &[1]), (3, &[2])],
            &[(1, &[3]), (3, &[4])],
            &[(1, &[5]), (2, &[6])],
        ],
    )
}

pub fn ring6_matrix() -> TopologyMatrix {
    grid("101100\n010011\n111000\n000111\n110010\n001101")
}

/// Cyclic three-user construction A1,2 = {W1}, A2,3 = {W2}, A3,1 = {W3}.
pub fn cyclic3_spec() -> AllianceSpec {
    plain_spec(3, &[&[(2, &[1])], &[(3, &[2])], &[(1, &[3])]])
}

pub fn cyclic3_matrix() -> TopologyMatrix {
    grid("110\n011\n101")
}

/// Eight users, four tentative alliances without internal conflict:
/// {W1,W3,W7}, {W2,W4}, {W5,W6}, {W8}; receiver 8 misses transmitter 7,
/// W4 is uninterfered and the second and third alliances are not hostile.
pub fn unlinked8() -> TopologyMatrix {
    grid(
        "11010000\n01000001\n00100001\n00010000\n\
         10101010\n00000101\n00001110\n10100001",
    )
}

/// `unlinked8` after merging {W2,W4} with {W5,W6}.
pub fn unlinked8_merged() -> TopologyMatrix {
    grid(
        "11011100\n01000001\n00100001\n10110010\n\
         10101010\n00000101\n01011110\n10100011",
    )
}

/// `unlinked8` after making {W5,W6} hostile to W4.
pub fn unlinked8_linked() -> TopologyMatrix {
    grid(
        "11010000\n01000001\n00100001\n00011100\n\
         10101010\n00000101\n00001110\n10100011",
    )
}

/// Six users with alignment sets {W1,W2,W3}, {W4,W5}, {W6}; receiver 5
/// hears transmitter 4, an internal conflict.
pub fn conflict6() -> TopologyMatrix {
    grid("100001\n010001\n001001\n111100\n000110\n000111")
}

/// Nine users, alliances {W1..W4}, {W5,W6,W7}, {W8,W9}; an MTM.
pub fn mtm9() -> TopologyMatrix {
    grid(
        "100011100\n010011100\n001000011\n000100011\n111110000\n\
         111101000\n000000111\n111100010\n000011101",
    )
}

/// `mtm9` with receiver 6 also hearing {W8,W9}.
pub fn split9() -> TopologyMatrix {
    grid(
        "100011100\n010011100\n001000011\n000100011\n111110000\n\
         111101011\n000000111\n111100010\n000011101",
    )
}

/// Five users; W1 and W3 align through receiver 4 but sit at indices 1 and 3.
pub fn scattered5() -> TopologyMatrix {
    grid("10000\n01010\n00100\n10110\n00001")
}

/// Seven users in four alliances, every interferer set of size two.
pub fn thirds7_spec() -> GeneralizedAllianceSpec {
    generalized_spec(
        7,
        &[
            &[(&[2, 3], &[1]), (&[3, 4], &[2])],
            &[(&[1, 4], &[3]), (&[1, 3], &[4])],
            &[(&[1, 2], &[5]), (&[2, 4], &[6])],
            &[(&[1, 2], &[7])],
        ],
    )
}

pub fn thirds7_matrix() -> TopologyMatrix {
    grid("1011110\n0100111\n1110001\n1101110\n1111100\n0011011\n1111001")
}

/// Same alliances as `thirds7_spec`, but W2, W4, W6, W7 hear a single alliance.
pub fn sparse7_spec() -> GeneralizedAllianceSpec {
    generalized_spec(
        7,
        &[
            &[(&[2, 3], &[1]), (&[4], &[2])],
            &[(&[1, 4], &[3]), (&[3], &[4])],
            &[(&[1, 2], &[5]), (&[4], &[6])],
            &[(&[1], &[7])],
        ],
    )
}

pub fn sparse7_matrix() -> TopologyMatrix {
    grid("1011110\n0100001\n1110001\n0001110\n1111100\n0000011\n1100001")
}
