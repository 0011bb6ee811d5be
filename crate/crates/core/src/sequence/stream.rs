use super::ids::{IdLayout, SpecialIds};
use crate::error::{Error, Result};

/// Generation cap: 50 audio tokens per text token plus 32.
pub fn default_max_len(text_len: usize) -> usize {
    50 * text_len + 32
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamOutcome {
    /// Audio ids, `[EA]` excluded.
    pub ids: Vec<u32>,
    /// `max_len` was reached before `[EA]`.
    pub truncated: bool,
}

/// Pulls ids from `generator` until it yields `[EA]` or `max_len` audio ids
/// have been collected. The generator sees the ids emitted so far.
pub fn stream_until_eos<G>(
    mut generator: G,
    specials: &SpecialIds,
    layout: &IdLayout,
    max_len: usize,
) -> Result<StreamOutcome>
where
    G: FnMut(&[u32]) -> u32,
{
    if max_len == 0 {
        return Err(Error::Config("max_len must be at least 1".into()));
    }
    let mut ids = Vec::new();
    while ids.len() < max_len {
        let id = generator(&ids);
        if id == specials.ea {
            return Ok(StreamOutcome {
                ids,
                truncated: false,
            });
        }
        if !layout.is_audio(id) || specials.contains(id) {
            return Err(Error::Protocol {
                step: ids.len(),
                id,
            });
        }
        ids.push(id);
    }
    Ok(StreamOutcome {
        ids,
        truncated: true,
    })
}
