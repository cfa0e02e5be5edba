use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::Session;
use crate::error::{Error, Result};

/// One leave-one-participant-out split. Session lists index into the
/// slice passed to [`split_loocv`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub test_participant: String,
    pub train_participants: Vec<String>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// One fold per participant (sorted by id), holding that participant out.
pub fn split_loocv(sessions: &[Session]) -> Result<Vec<Fold>> {
    let mut by_participant: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in sessions.iter().enumerate() {
        by_participant.entry(&s.participant_id).or_default().push(i);
    }
    if by_participant.len() < 2 {
        return Err(Error::TooFewParticipants(by_participant.len()));
    }
    let ids: Vec<&str> = by_participant.keys().copied().collect();
    Ok(ids
        .iter()
        .map(|&held| {
            let train_participants: Vec<String> =
                ids.iter().filter(|&&p| p != held).map(|&p| String::from(p)).collect();
            let train = by_participant
                .iter()
                .filter(|(p, _)| **p != held)
                .flat_map(|(_, idx)| idx.iter().copied())
                .collect::<Vec<_>>();
            let mut train = train;
            train.sort_unstable();
            Fold {
                test_participant: String::from(held),
                train_participants,
                train,
                test: by_participant[held].clone(),
            }
        })
        .collect())
}
