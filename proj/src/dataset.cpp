#include "fcnv/dataset.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "fcnv/errors.hpp"

namespace fcnv {

const std::string kCharAlphabet = "abcdefghijklmnopqrstuvwxyz0123456789'-";

std::vector<int> encode_chars(const std::string& word) {
  std::vector<int> ids;
  ids.reserve(word.size());
  for (char ch : word) {
    const auto pos = kCharAlphabet.find(ch);
    ids.push_back(pos == std::string::npos ? 0 : static_cast<int>(pos) + 1);
  }
  return ids;
}

int IntentSlotDataset::char_vocab() const {
  return static_cast<int>(kCharAlphabet.size()) + 1;
}

namespace {

std::string rstrip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
  return s;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_on(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

[[noreturn]] void malformed(const std::string& path, int line_no, const std::string& why) {
  throw DataError(path + ":" + std::to_string(line_no) + ": " + why);
}

// Interns `name` into `table`, returning its id.
int intern(std::vector<std::string>& table, const std::string& name) {
  for (std::size_t i = 0; i < table.size(); ++i)
    if (table[i] == name) return static_cast<int>(i);
  table.push_back(name);
  return static_cast<int>(table.size()) - 1;
}

}  // namespace

NwpDataset load_nwp_corpus(const std::string& corpus_path, const std::string& vocab_path) {
  NwpDataset ds;
  {
    std::ifstream in = open_or_throw(vocab_path);
    std::string line;
    int line_no = 0;
    std::unordered_map<std::string, int> seen;
    while (std::getline(in, line)) {
      ++line_no;
      line = rstrip(line);
      if (line.empty()) malformed(vocab_path, line_no, "empty vocab entry");
      if (!seen.emplace(line, line_no).second)
        malformed(vocab_path, line_no, "duplicate vocab entry \"" + line + "\"");
      ds.vocab.push_back(line);
    }
  }

  int unk = -1;
  for (std::size_t i = 0; i < ds.vocab.size(); ++i)
    if (ds.vocab[i] == "<unk>") unk = static_cast<int>(i);

  std::unordered_map<std::string, int> to_id;
  for (std::size_t i = 0; i < ds.vocab.size(); ++i)
    to_id.emplace(ds.vocab[i], static_cast<int>(i));

  std::ifstream in = open_or_throw(corpus_path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto words = split_ws(rstrip(line));
    if (words.empty()) continue;
    if (ds.vocab.empty()) malformed(corpus_path, line_no, "corpus has tokens but vocab file is empty");
    std::vector<int> ids;
    ids.reserve(words.size());
    for (const auto& w : words) {
      auto it = to_id.find(w);
      if (it != to_id.end()) {
        ids.push_back(it->second);
      } else {
        if (unk < 0)
          malformed(corpus_path, line_no,
                    "out-of-vocabulary token \"" + w + "\" but " + vocab_path +
                        " has no <unk> entry");
        ids.push_back(unk);
      }
    }
    ds.lines.push_back(std::move(ids));
    ds.word_lines.push_back(words);
  }
  ds.unk_id = unk < 0 ? 0 : unk;
  return ds;
}

IntentSlotDataset load_intent_slot(const std::string& path) {
  IntentSlotDataset ds;
  std::ifstream in = open_or_throw(path);
  std::string line;
  int line_no = 0;
  bool in_block = false;
  IntentSlotSample cur;
  int block_header_line = 0;

  auto flush = [&] {
    if (!in_block) return;
    if (cur.tokens.empty())
      malformed(path, block_header_line, "utterance with no token lines");
    ds.samples.push_back(std::move(cur));
    cur = IntentSlotSample{};
    in_block = false;
  };

  while (std::getline(in, line)) {
    ++line_no;
    line = rstrip(line);
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.rfind("#intent", 0) == 0) {
      if (in_block) malformed(path, line_no, "\"#intent\" inside an utterance block");
      if (line.size() < 9 || line[7] != ' ')
        malformed(path, line_no, "expected \"#intent <label>\"");
      const std::string label = line.substr(8);
      if (label.empty() || label.find_first_of(" \t") != std::string::npos)
        malformed(path, line_no, "intent label must be a single token");
      cur.intent = intern(ds.intents, label);
      block_header_line = line_no;
      in_block = true;
      continue;
    }
    if (!in_block) malformed(path, line_no, "token line before any \"#intent\" header");
    const auto cols = split_on(line, '\t');
    if (cols.size() != 3)
      malformed(path, line_no,
                "expected 3 tab-separated columns, got " + std::to_string(cols.size()));
    const std::string& token = cols[0];
    if (token.empty()) malformed(path, line_no, "empty token");
    if (cols[2].empty()) malformed(path, line_no, "empty slot tag");

    std::vector<int> gaz;
    if (cols[1] != "-") {
      for (const auto& tag : split_on(cols[1], ',')) {
        if (tag.empty()) malformed(path, line_no, "empty gazetteer tag");
        gaz.push_back(intern(ds.gaz_tags, tag));
      }
    }
    cur.tokens.push_back(token);
    cur.input.word_chars.push_back(encode_chars(token));
    cur.input.gazetteer.push_back(std::move(gaz));
    cur.slots.push_back(intern(ds.slot_tags, cols[2]));
  }
  flush();
  return ds;
}

DocClassDataset load_doc_class(const std::string& path) {
  DocClassDataset ds;
  std::ifstream in = open_or_throw(path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = rstrip(line);
    if (line.empty()) continue;
    if (line.size() < 2 || (line[0] != '0' && line[0] != '1') || line[1] != '\t')
      malformed(path, line_no, "expected \"<label 0|1><TAB><text>\"");
    DocSample doc;
    doc.label = line[0] - '0';
    doc.bytes.reserve(line.size() - 2);
    for (std::size_t i = 2; i < line.size(); ++i)
      doc.bytes.push_back(static_cast<unsigned char>(line[i]));
    ds.docs.push_back(std::move(doc));
  }
  return ds;
}

// --- synthetic generators ----------------------------------------------------

namespace {

constexpr int kSynthGroups = 10;
constexpr int kSynthMembers = 20;
constexpr int kSynthVocab = kSynthGroups * kSynthMembers;

const std::array<const char*, 20> kSyllables = {
    "ba", "be", "bi", "bo", "bu", "da", "de", "di", "do", "du",
    "ka", "ke", "ki", "ko", "ku", "ma", "me", "mi", "mo", "mu"};

std::string synth_word(int id) {
  const int g = id / kSynthMembers, m = id % kSynthMembers;
  return std::string(kSyllables[g]) + kSyllables[m] + kSyllables[(g + m) % 20];
}

}  // namespace

NwpDataset synth_nwp(Rng& rng, int n_lines, int line_len) {
  if (n_lines <= 0) throw ConfigError("synth_nwp: n_lines must be positive");
  if (line_len < 2) throw ConfigError("synth_nwp: line_len must be >= 2");
  NwpDataset ds;
  ds.vocab.reserve(kSynthVocab);
  for (int i = 0; i < kSynthVocab; ++i) ds.vocab.push_back(synth_word(i));
  ds.unk_id = 0;  // the generator never emits OOV tokens
  ds.lines.reserve(n_lines);
  ds.word_lines.reserve(n_lines);
  for (int l = 0; l < n_lines; ++l) {
    std::vector<int> ids(line_len);
    ids[0] = static_cast<int>(rng.next_below(kSynthVocab));
    ids[1] = static_cast<int>(rng.next_below(kSynthVocab));
    for (int i = 2; i < line_len; ++i) {
      // Group is a fixed permutation-style function of the two previous
      // groups, which keeps the stationary distribution uniform.
      const int g = (ids[i - 2] / kSynthMembers + ids[i - 1] / kSynthMembers + 1) % kSynthGroups;
      ids[i] = g * kSynthMembers + static_cast<int>(rng.next_below(kSynthMembers));
    }
    std::vector<std::string> words;
    words.reserve(ids.size());
    for (int id : ids) words.push_back(ds.vocab[id]);
    ds.lines.push_back(std::move(ids));
    ds.word_lines.push_back(std::move(words));
  }
  return ds;
}

double synth_nwp_entropy(int line_len) {
  if (line_len < 2) throw ConfigError("synth_nwp_entropy: line_len must be >= 2");
  return (2.0 * std::log(static_cast<double>(kSynthVocab)) +
          (line_len - 2) * std::log(static_cast<double>(kSynthMembers))) /
         line_len;
}

namespace {

struct SlotLexicon {
  const char* gaz;
  const char* slot;
  std::vector<const char*> words;
};

// Lexicon index k maps to slot tag k+1 and gazetteer tag k.
const std::array<SlotLexicon, 5>& lexicons() {
  static const std::array<SlotLexicon, 5> lex = {{
      {"TIME", "B-time", {"seven", "noon", "midnight", "nine", "dawn"}},
      {"PERSON", "B-contact", {"alice", "bob", "carol", "dave"}},
      {"SONG", "B-song", {"thunder", "sunrise", "echoes", "horizon"}},
      {"CITY", "B-city", {"paris", "oslo", "lima", "cairo"}},
      {"DUR", "B-duration", {"five", "ten", "twenty", "sixty"}},
  }};
  return lex;
}

struct Template {
  int intent;
  std::vector<const char*> words;  // nullptr marks a slot position
  std::vector<int> slot_kind;      // -1 literal, else lexicon index
};

const std::vector<Template>& templates() {
  static const std::vector<Template> t = {
      {0, {"set", "an", "alarm", "at", nullptr}, {-1, -1, -1, -1, 0}},
      {0, {"wake", "me", "at", nullptr}, {-1, -1, -1, 0}},
      {1, {"cancel", "the", "alarm"}, {-1, -1, -1}},
      {1, {"remove", "alarm", "at", nullptr}, {-1, -1, -1, 0}},
      {2, {"play", nullptr}, {-1, 2}},
      {2, {"put", "on", nullptr, "now"}, {-1, -1, 2, -1}},
      {3, {"stop", "the", "music"}, {-1, -1, -1}},
      {3, {"pause", "playback"}, {-1, -1}},
      {4, {"call", nullptr}, {-1, 1}},
      {4, {"ring", nullptr, "please"}, {-1, 1, -1}},
      {5, {"text", nullptr, "hello"}, {-1, 1, -1}},
      {5, {"message", nullptr}, {-1, 1}},
      {6, {"weather", "in", nullptr}, {-1, -1, 3}},
      {6, {"forecast", "for", nullptr, "today"}, {-1, -1, 3, -1}},
      {7, {"start", "a", "timer", "for", nullptr}, {-1, -1, -1, -1, 4}},
      {7, {"countdown", nullptr, "minutes"}, {-1, 4, -1}},
  };
  return t;
}

}  // namespace

IntentSlotDataset synth_intent_slot(Rng& rng, int n_utterances) {
  if (n_utterances <= 0) throw ConfigError("synth_intent_slot: n_utterances must be positive");
  IntentSlotDataset ds;
  ds.intents = {"set_alarm", "cancel_alarm", "play_music", "stop_music",
                "call_contact", "send_text", "weather_query", "timer_start"};
  ds.slot_tags = {"O"};
  for (const auto& lex : lexicons()) ds.slot_tags.push_back(lex.slot);
  for (const auto& lex : lexicons()) ds.gaz_tags.push_back(lex.gaz);
  ds.gaz_tags.push_back("NUM");  // distractor-only tag
  const int n_gaz = static_cast<int>(ds.gaz_tags.size());

  const auto& tpls = templates();
  ds.samples.reserve(n_utterances);
  for (int u = 0; u < n_utterances; ++u) {
    const Template& tpl = tpls[rng.next_below(tpls.size())];
    IntentSlotSample s;
    s.intent = tpl.intent;
    for (std::size_t i = 0; i < tpl.words.size(); ++i) {
      const int kind = tpl.slot_kind[i];
      std::string word;
      std::vector<int> gaz;
      if (kind < 0) {
        word = tpl.words[i];
        s.slots.push_back(0);  // O
        if (rng.next_double() < 0.1) gaz.push_back(static_cast<int>(rng.next_below(n_gaz)));
      } else {
        const auto& lex = lexicons()[kind];
        word = lex.words[rng.next_below(lex.words.size())];
        s.slots.push_back(kind + 1);
        if (rng.next_double() < 0.8) gaz.push_back(kind);
        if (rng.next_double() < 0.15) gaz.push_back(static_cast<int>(rng.next_below(n_gaz)));
      }
      s.tokens.push_back(word);
      s.input.word_chars.push_back(encode_chars(word));
      s.input.gazetteer.push_back(std::move(gaz));
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

DocClassDataset synth_doc_class(Rng& rng, int n_docs) {
  if (n_docs <= 0) throw ConfigError("synth_doc_class: n_docs must be positive");
  static const std::array<const char*, 6> kPos = {"superb", "delight", "vivid",
                                                  "crisp", "gentle", "bright"};
  static const std::array<const char*, 6> kNeg = {"broken", "dull", "leak",
                                                  "rust", "crack", "noisy"};
  static const std::array<const char*, 10> kFiller = {
      "the", "a", "it", "was", "and", "of", "thing", "part", "one", "day"};

  DocClassDataset ds;
  ds.docs.reserve(n_docs);
  for (int d = 0; d < n_docs; ++d) {
    DocSample doc;
    doc.label = static_cast<int>(rng.next_below(2));
    const int n_words = 8 + static_cast<int>(rng.next_below(7));
    const int n_kw = 2 + static_cast<int>(rng.next_below(3));
    std::vector<std::string> words(n_words);
    for (auto& w : words) w = kFiller[rng.next_below(kFiller.size())];
    for (int k = 0; k < n_kw; ++k) {
      int pos = static_cast<int>(rng.next_below(n_words));
      const char* kw = doc.label == 1 ? kPos[rng.next_below(kPos.size())]
                                      : kNeg[rng.next_below(kNeg.size())];
      words[pos] = kw;
    }
    std::string text;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) text.push_back(' ');
      text += words[i];
    }
    doc.bytes.reserve(text.size());
    for (char ch : text) doc.bytes.push_back(static_cast<unsigned char>(ch));
    ds.docs.push_back(std::move(doc));
  }
  return ds;
}

double unigram_ppl(const NwpDataset& train, const NwpDataset& test) {
  if (train.vocab.size() != test.vocab.size())
    throw DataError("unigram_ppl: train/test vocab sizes differ");
  const int v = static_cast<int>(train.vocab.size());
  if (v == 0) throw DataError("unigram_ppl: empty vocab");
  std::vector<std::uint64_t> counts(v, 0);
  std::uint64_t total = 0;
  for (const auto& line : train.lines)
    for (int id : line) {
      ++counts[id];
      ++total;
    }
  double ce = 0.0;
  std::uint64_t n = 0;
  for (const auto& line : test.lines)
    for (int id : line) {
      const double p = (static_cast<double>(counts[id]) + 1.0) /
                       (static_cast<double>(total) + v);
      ce -= std::log(p);
      ++n;
    }
  if (n == 0) throw DataError("unigram_ppl: no test tokens");
  return std::exp(ce / static_cast<double>(n));
}

}  // namespace fcnv
