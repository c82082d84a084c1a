#pragma once

#include <string>
#include <vector>

#include "fcnv/task_models.hpp"
#include "fcnv/tensor.hpp"

namespace fcnv {

struct NwpDataset {
  std::vector<std::string> vocab;                    // id -> word
  int unk_id = 0;
  std::vector<std::vector<int>> lines;               // token ids per sentence
  std::vector<std::vector<std::string>> word_lines;  // raw words (keystroke metric)
};

struct IntentSlotSample {
  IntentSlotInput input;
  std::vector<std::string> tokens;  // raw words
  int intent = -1;
  std::vector<int> slots;           // per token
};

struct IntentSlotDataset {
  std::vector<std::string> intents;    // label id -> name
  std::vector<std::string> slot_tags;  // tag id -> name
  std::vector<std::string> gaz_tags;   // gazetteer feature id -> name
  std::vector<IntentSlotSample> samples;
  int char_vocab() const;
};

struct DocSample {
  std::vector<int> bytes;  // 0..255
  int label = 0;           // 0|1
};

struct DocClassDataset {
  std::vector<DocSample> docs;
};

// Fixed character inventory for the char-CNN; id 0 is reserved for characters
// outside it, printable id = 1 + position. Shared by loaders and generators so
// train/eval encode identically.
extern const std::string kCharAlphabet;
std::vector<int> encode_chars(const std::string& word);

// --- file loaders -----------------------------------------------------------
// Corpus: one sentence per line, whitespace-separated tokens. Vocab file: one
// token per line; it must contain "<unk>", whose index becomes unk_id; OOV
// corpus tokens map to it. Empty files load as empty datasets.
NwpDataset load_nwp_corpus(const std::string& corpus_path, const std::string& vocab_path);

// Blocks separated by blank lines. Each block: first line "#intent <label>",
// then one line per token with exactly three TAB-separated columns:
//   token <TAB> gazetteer-tags (comma-joined, or "-" for none) <TAB> slot-tag
// Label/tag tables are built in order of first appearance.
IntentSlotDataset load_intent_slot(const std::string& path);

// One document per line: "<label 0|1>\t<text>"; text is ingested as raw bytes.
DocClassDataset load_doc_class(const std::string& path);

// --- synthetic generators ----------------------------------------------------
// Order-2 Markov chain over 200 words (10 groups x 20 members): the first two
// tokens are uniform over the vocabulary, afterwards the group is a fixed
// deterministic function of the previous two groups and the member is uniform.
// Per-token entropy is therefore (2 ln 200 + (L-2) ln 20) / L for lines of
// length L.
NwpDataset synth_nwp(Rng& rng, int n_lines, int line_len);
double synth_nwp_entropy(int line_len);

// Template grammar: 8 intents, 6 slot tags, gazetteer hints attached to slot
// tokens with probability 0.8 (plus occasional distractors; 0-2 features per
// token).
IntentSlotDataset synth_intent_slot(Rng& rng, int n_utterances);

// Two disjoint keyword sets over shared filler text; the label is decidable
// from keyword presence alone, so the task is linearly separable.
DocClassDataset synth_doc_class(Rng& rng, int n_docs);

// Laplace-smoothed unigram baseline: probabilities from `train` counts,
// perplexity scored on `test`.
double unigram_ppl(const NwpDataset& train, const NwpDataset& test);

}  // namespace fcnv
