//! Small helpers for `u64` message sets. Bit `i` stands for message `i` (0-based).

#[inline]
pub(crate) fn bit(i: usize) -> u64 {
    1u64 << i
}

#[inline]
pub(crate) fn full(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// Iterates the members of a set in ascending order.
pub(crate) fn members(mut set: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if set == 0 {
            None
        } else {
            let i = set.trailing_zeros() as usize;
            set &= set - 1;
            Some(i)
        }
    })
}

#[inline]
pub(crate) fn lowest(set: u64) -> usize {
    set.trailing_zeros() as usize
}

pub(crate) fn from_members<I: IntoIterator<Item = usize>>(it: I) -> u64 {
    it.into_iter().fold(0, |acc, i| acc | bit(i))
}

/// Formats a set as `{W1, W3}` with 1-based message names.
pub(crate) fn show(set: u64) -> String {
    let names: Vec<String> = members(set).map(|i| format!("W{}", i + 1)).collect();
    format!("{{{}}}", names.join(", "))
}

/// Serializes a 0-based index as its 1-based number.
pub(crate) fn ser_index<S: serde::Serializer>(i: &usize, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(*i as u64 + 1)
}

pub(crate) fn ser_indices<S: serde::Serializer>(v: &[usize], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|i| i + 1))
}

pub(crate) fn ser_index_sets<S: serde::Serializer>(
    v: &[Vec<usize>],
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|set| set.iter().map(|i| i + 1).collect::<Vec<_>>()))
}

pub(crate) fn ser_pairs<S: serde::Serializer>(
    v: &[(usize, usize)],
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|&(a, b)| [a + 1, b + 1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn members_ascending() {
        assert_eq!(members(0b10110).collect::<Vec<_>>(), vec![1, 2, 4]);
        assert_eq!(from_members([4, 1, 2]), 0b10110);
        assert_eq!(full(3), 0b111);
        assert_eq!(full(64), u64::MAX);
        assert_eq!(show(0b101), "{W1, W3}");
    }
}
