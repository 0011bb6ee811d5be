use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenizer::Specials;

/// Frame delimiters in the unified id stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialIds {
    pub bt: u32,
    pub et: u32,
    pub ba: u32,
    pub ea: u32,
}

impl SpecialIds {
    pub fn new(bt: u32, et: u32, ba: u32, ea: u32) -> Result<Self> {
        let ids = [bt, et, ba, ea];
        for i in 0..4 {
            if ids[i + 1..].contains(&ids[i]) {
                return Err(Error::Config(format!("special id {} is used twice", ids[i])));
            }
        }
        Ok(Self { bt, et, ba, ea })
    }

    pub fn from_vocab(specials: &Specials) -> Self {
        Self {
            bt: specials.bt,
            et: specials.et,
            ba: specials.ba,
            ea: specials.ea,
        }
    }

    pub fn contains(&self, id: u32) -> bool {
        [self.bt, self.et, self.ba, self.ea].contains(&id)
    }

    pub fn name(&self, id: u32) -> Option<&'static str> {
        match id {
            x if x == self.bt => Some("[BT]"),
            x if x == self.et => Some("[ET]"),
            x if x == self.ba => Some("[BA]"),
            x if x == self.ea => Some("[EA]"),
            _ => None,
        }
    }
}

impl Default for SpecialIds {
    fn default() -> Self {
        Self::from_vocab(&Specials::LEADING)
    }
}

/// Text ids occupy `[0, text_vocab)`; audio code `c` is id `text_vocab + c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdLayout {
    pub text_vocab: u32,
    pub audio_codes: u32,
}

impl IdLayout {
    pub fn new(text_vocab: u32, audio_codes: u32) -> Result<Self> {
        if text_vocab.checked_add(audio_codes).is_none() || audio_codes == 0 {
            return Err(Error::Config(format!(
                "bad id layout: {text_vocab} text ids + {audio_codes} audio codes"
            )));
        }
        Ok(Self {
            text_vocab,
            audio_codes,
        })
    }

    pub fn total(&self) -> u32 {
        self.text_vocab + self.audio_codes
    }

    pub fn audio_id(&self, code: u32) -> Result<u32> {
        if code >= self.audio_codes {
            return Err(Error::OutOfRange {
                position: 0,
                id: u64::from(code),
                limit: u64::from(self.audio_codes),
            });
        }
        Ok(self.text_vocab + code)
    }

    pub fn audio_code(&self, id: u32) -> Option<u32> {
        self.is_audio(id).then(|| id - self.text_vocab)
    }

    pub fn is_audio(&self, id: u32) -> bool {
        id >= self.text_vocab && id < self.total()
    }

    pub fn is_text(&self, id: u32) -> bool {
        id < self.text_vocab
    }
}
