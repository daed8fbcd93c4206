use crate::corpus::{BpeModel, SentencePair, Vocab};
use crate::error::Result;
use sha2::{Digest, Sha256};

/// BPE segmentation plus per-side vocabularies.
#[derive(Debug, Clone)]
pub struct SubwordEncoder {
    pub source_bpe: BpeModel,
    pub target_bpe: BpeModel,
    pub source_vocab: Vocab,
    pub target_vocab: Vocab,
}

impl SubwordEncoder {
    /// Learns BPE (jointly over both sides when `joint`, else per side) and
    /// separate vocabularies.
    pub fn fit(pairs: &[SentencePair], num_merges: usize, vocab_size: usize, joint: bool) -> Result<Self> {
        let sources: Vec<&[String]> = pairs.iter().map(|p| p.source.as_slice()).collect();
        let targets: Vec<&[String]> = pairs.iter().map(|p| p.reference.as_slice()).collect();
        let (source_bpe, target_bpe) = if joint {
            let both: Vec<&[String]> = sources.iter().chain(&targets).copied().collect();
            let bpe = BpeModel::learn(&both, num_merges)?;
            (bpe.clone(), bpe)
        } else {
            (
                BpeModel::learn(&sources, num_merges)?,
                BpeModel::learn(&targets, num_merges)?,
            )
        };
        let seg_src: Vec<Vec<String>> = sources.iter().map(|s| source_bpe.apply(s)).collect();
        let seg_tgt: Vec<Vec<String>> = targets.iter().map(|s| target_bpe.apply(s)).collect();
        Ok(SubwordEncoder {
            source_vocab: Vocab::build(&seg_src, vocab_size)?,
            target_vocab: Vocab::build(&seg_tgt, vocab_size)?,
            source_bpe,
            target_bpe,
        })
    }

    pub fn encode_source(&self, tokens: &[String]) -> Vec<u32> {
        self.source_vocab.encode(&self.source_bpe.apply(tokens))
    }

    pub fn encode_target(&self, tokens: &[String]) -> Vec<u32> {
        self.target_vocab.encode(&self.target_bpe.apply(tokens))
    }

    /// SHA-256 digests of the serialized BPE models and vocabularies, in
    /// the order source BPE, target BPE, source vocab, target vocab.
    pub fn digests(&self) -> [String; 4] {
        fn digest(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> String {
            let mut buf = Vec::new();
            write(&mut buf).expect("writing to memory");
            hex::encode(Sha256::digest(&buf))
        }
        [
            digest(|b| self.source_bpe.write_to(b)),
            digest(|b| self.target_bpe.write_to(b)),
            digest(|b| self.source_vocab.write_to(b)),
            digest(|b| self.target_vocab.write_to(b)),
        ]
    }
}
