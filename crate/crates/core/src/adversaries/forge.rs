use crate::bits::BitString;
use crate::netsim::{AdversaryAction, LaneId};

/// Actions that make a silent lane read exactly `word` from `start` on: a
/// set-idle for the first bit, then one persistent flip per alternation.
/// Only works if the lane is really silent for the whole slot.
pub fn forge_actions(lane: LaneId, start: u64, word: &BitString) -> Vec<AdversaryAction> {
    let mut out = Vec::with_capacity(word.alternations() + 1);
    if word.is_empty() {
        return out;
    }
    out.push(AdversaryAction::set_idle(start, lane, word.get(0)));
    for i in 1..word.len() {
        if word.get(i) != word.get(i - 1) {
            out.push(AdversaryAction::flip(start + i as u64, lane));
        }
    }
    out
}

/// Evenly spaced persistent flips that push a silent slot of `len` bits
/// above the silence threshold.
pub fn jam_silence_actions(lane: LaneId, start: u64, len: usize) -> Vec<AdversaryAction> {
    let count = (len / 3 + 1).min(len.saturating_sub(1));
    (0..count)
        .map(|j| AdversaryAction::flip(start + 1 + (j * (len - 1) / count) as u64, lane))
        .collect()
}

/// Cost of [`forge_actions`], counting the set-idle as paid.
pub(crate) fn forge_cost(word: &BitString) -> u64 {
    word.alternations() as u64 + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::is_silence;

    fn replay(initial: bool, len: usize, start: u64, actions: &[AdversaryAction]) -> BitString {
        use crate::netsim::ActionKind;
        let mut bit = initial;
        let mut out = BitString::new();
        for i in 0..len as u64 {
            for a in actions.iter().filter(|a| a.time == start + i) {
                match a.kind {
                    ActionKind::Flip => bit = !bit,
                    ActionKind::SetIdle(b) => bit = b,
                }
            }
            out.push(bit);
        }
        out
    }

    #[test]
    fn forged_word_reads_back() {
        let w = BitString::parse("0011101000110").unwrap();
        assert_eq!(replay(true, w.len(), 40, &forge_actions(3, 40, &w)), w);
        assert_eq!(forge_actions(3, 40, &w).len() as u64, forge_cost(&w));
    }

    #[test]
    fn jamming_breaks_silence() {
        for len in [95, 300, 5348] {
            let a = jam_silence_actions(0, 1, len);
            let heard = replay(false, len, 1, &a);
            assert!(!is_silence(&heard), "len {len}");
            assert!(a.len() <= len / 3 + 1);
        }
    }
}
