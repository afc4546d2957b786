//! Presence-bit booleanization of text with a unigram+bigram vocabulary.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};
use crate::machine::BitSample;

/// Distinct unigrams and bigrams of a document. Tokens are lowercase
/// alphanumeric runs; bigrams join adjacent tokens with a space.
pub fn tokenize_terms(doc: &str) -> BTreeSet<String> {
    let lower = doc.to_lowercase();
    let tokens: Vec<&str> = lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .collect();
    let mut terms: BTreeSet<String> = tokens.iter().map(|t| t.to_string()).collect();
    terms.extend(tokens.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    terms
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextVocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl TextVocabulary {
    /// Top `max_features` terms by document frequency, ties broken
    /// lexicographically.
    pub fn fit<S: AsRef<str>>(documents: &[S], max_features: usize) -> Result<Self> {
        if documents.is_empty() {
            return Err(Error::EmptyInput("text corpus"));
        }
        let mut df: HashMap<String, usize> = HashMap::new();
        for doc in documents {
            for term in tokenize_terms(doc.as_ref()) {
                *df.entry(term).or_default() += 1;
            }
        }
        let mut ranked: Vec<(String, usize)> = df.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(max_features);
        if ranked.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let terms: Vec<String> = ranked.into_iter().map(|(t, _)| t).collect();
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(Self { terms, index })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn transform(&self, doc: &str) -> BitSample {
        let mut bits = BitSample::zeros(self.terms.len());
        for term in tokenize_terms(doc) {
            if let Some(&j) = self.index.get(&term) {
                bits.set(j, true);
            }
        }
        bits
    }
}

/// Fits the vocabulary on the training documents only and encodes both splits.
pub fn booleanize_text<S: AsRef<str>>(
    name: &str,
    (train_docs, train_y): (&[S], &[usize]),
    (test_docs, test_y): (&[S], &[usize]),
    max_features: usize,
) -> Result<Dataset> {
    let vocab = TextVocabulary::fit(train_docs, max_features)?;
    let encode = |docs: &[S]| docs.iter().map(|d| vocab.transform(d.as_ref())).collect::<Vec<_>>();
    let n_classes = train_y
        .iter()
        .chain(test_y)
        .map(|&y| y + 1)
        .max()
        .unwrap_or(0)
        .max(2);
    Dataset::new(
        name,
        (encode(train_docs), train_y.to_vec()),
        (encode(test_docs), test_y.to_vec()),
        vocab.len(),
        n_classes,
    )
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    Ok(fs::read_to_string(path)?.lines().map(str::to_owned).collect())
}

fn read_labels(path: &Path) -> Result<Vec<usize>> {
    read_lines(path)?
        .iter()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.trim()
                .parse::<usize>()
                .map_err(|_| Error::Corrupt(format!("bad label {l:?} in {}", path.display())))
        })
        .collect()
}

/// Loads `train.txt`/`train_labels.txt` and `test.txt`/`test_labels.txt`,
/// one document or label per line.
pub fn load_text_dir(name: &str, dir: impl AsRef<Path>, max_features: usize) -> Result<Dataset> {
    let dir = dir.as_ref();
    let split = |docs: &str, labels: &str| -> Result<(Vec<String>, Vec<usize>)> {
        let mut d = read_lines(&dir.join(docs))?;
        let l = read_labels(&dir.join(labels))?;
        if d.len() > l.len() && d[l.len()..].iter().all(|s| s.trim().is_empty()) {
            d.truncate(l.len());
        }
        if d.len() != l.len() {
            return Err(Error::CountMismatch {
                images: d.len(),
                labels: l.len(),
            });
        }
        Ok((d, l))
    };
    let (train_docs, train_y) = split("train.txt", "train_labels.txt")?;
    let (test_docs, test_y) = split("test.txt", "test_labels.txt")?;
    booleanize_text(
        name,
        (&train_docs, &train_y),
        (&test_docs, &test_y),
        max_features,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_vocabulary_by_hand() {
        // df: movie 2; bad, bad movie, good, good movie 1 each
        let docs = ["good movie", "bad movie"];
        let vocab = TextVocabulary::fit(&docs, 4).unwrap();
        assert_eq!(vocab.terms(), ["movie", "bad", "bad movie", "good"]);
        assert_eq!(vocab.transform("good movie").to_bools(), vec![true, false, false, true]);
        assert_eq!(vocab.transform("bad movie").to_bools(), vec![true, true, true, false]);
    }

    #[test]
    fn width_capped_by_vocabulary() {
        let ds = booleanize_text(
            "t",
            (&["good movie", "bad movie"], &[1, 0]),
            (&["unseen words here"], &[1]),
            100,
        )
        .unwrap();
        assert_eq!(ds.n_features, 5);
        assert_eq!(ds.test_x[0].len(), 5);
        assert_eq!(ds.test_x[0].count_ones(), 0);
    }

    #[test]
    fn tokenizer_lowercases_and_splits() {
        let terms = tokenize_terms("Great, GREAT film!");
        let expected: BTreeSet<String> = ["great", "film", "great great", "great film"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(terms, expected);
    }

    #[test]
    fn empty_corpus_errors() {
        assert!(matches!(
            TextVocabulary::fit(&["!!!", "  "], 10),
            Err(Error::EmptyVocabulary)
        ));
        let none: [&str; 0] = [];
        assert!(TextVocabulary::fit(&none, 10).is_err());
    }

    #[test]
    fn directory_loader() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path();
        fs::write(p.join("train.txt"), "a fine film\na dull film\n").unwrap();
        fs::write(p.join("train_labels.txt"), "1\n0\n").unwrap();
        fs::write(p.join("test.txt"), "fine\n").unwrap();
        fs::write(p.join("test_labels.txt"), "1\n").unwrap();
        let ds = load_text_dir("toy", p, 3).unwrap();
        assert_eq!((ds.train_x.len(), ds.test_x.len(), ds.n_features), (2, 1, 3));
        fs::write(p.join("test_labels.txt"), "1\n0\n").unwrap();
        assert!(matches!(load_text_dir("toy", p, 3), Err(Error::CountMismatch { .. })));
    }
}
