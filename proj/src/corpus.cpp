#include "itm/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "itm/error.hpp"

namespace itm {

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
  index_.reserve(words_.size());
  for (WordId i = 0; i < words_.size(); ++i) {
    if (words_[i].empty()) throw ValidationError("empty token at vocabulary position " + std::to_string(i));
    if (!index_.emplace(words_[i], i).second)
      throw ValidationError("duplicate vocabulary token '" + words_[i] + "'");
  }
}

std::optional<WordId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Document::length() const noexcept {
  std::uint64_t n = 0;
  for (const auto& wc : counts) n += wc.count;
  return n;
}

Corpus::Corpus(Vocabulary vocabulary, std::vector<Document> documents,
               std::vector<std::string> label_names)
    : vocabulary_(std::move(vocabulary)),
      documents_(std::move(documents)),
      label_names_(std::move(label_names)) {
  if (documents_.empty()) throw ValidationError("corpus has no documents");
  const auto V = vocabulary_.size();
  for (std::size_t d = 0; d < documents_.size(); ++d) {
    const auto& doc = documents_[d];
    for (std::size_t j = 0; j < doc.counts.size(); ++j) {
      const auto& wc = doc.counts[j];
      if (wc.word >= V)
        throw ValidationError("document " + std::to_string(d) + " references word " +
                              std::to_string(wc.word) + " outside vocabulary of size " + std::to_string(V));
      if (wc.count == 0) throw ValidationError("document " + std::to_string(d) + " has a zero count");
      if (j > 0 && doc.counts[j - 1].word >= wc.word)
        throw ValidationError("document " + std::to_string(d) + " counts not sorted by word");
    }
    if (doc.label && *doc.label >= label_names_.size())
      throw ValidationError("document " + std::to_string(d) + " has an unknown label");
  }
}

bool Corpus::labeled() const noexcept {
  return !label_names_.empty() &&
         std::all_of(documents_.begin(), documents_.end(), [](const Document& d) { return d.label.has_value(); });
}

std::vector<std::size_t> Corpus::document_frequency() const {
  std::vector<std::size_t> df(vocab_size(), 0);
  for (const auto& doc : documents_)
    for (const auto& wc : doc.counts) ++df[wc.word];
  return df;
}

std::vector<std::uint64_t> Corpus::word_frequency() const {
  std::vector<std::uint64_t> tf(vocab_size(), 0);
  for (const auto& doc : documents_)
    for (const auto& wc : doc.counts) tf[wc.word] += wc.count;
  return tf;
}

std::uint64_t Corpus::total_tokens() const {
  std::uint64_t n = 0;
  for (const auto& doc : documents_) n += doc.length();
  return n;
}

namespace {

struct Fnv1a {
  std::uint64_t h = 1469598103934665603ULL;
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  }
  void str(std::string_view s) {
    bytes(s.data(), s.size());
    bytes("\n", 1);
  }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }
};

}  // namespace

std::uint64_t Corpus::content_hash() const {
  Fnv1a f;
  f.u64(vocabulary_.size());
  for (const auto& w : vocabulary_.words()) f.str(w);
  f.u64(documents_.size());
  for (const auto& doc : documents_) {
    f.u64(doc.counts.size());
    for (const auto& wc : doc.counts) {
      f.u64(wc.word);
      f.u64(wc.count);
    }
    f.u64(doc.label ? *doc.label + 1 : 0);
  }
  for (const auto& l : label_names_) f.str(l);
  return f.h;
}

bool Corpus::operator==(const Corpus& other) const {
  return vocabulary_ == other.vocabulary_ && documents_ == other.documents_ &&
         label_names_ == other.label_names_;
}

CorpusFormat parse_corpus_format(std::string_view tag) {
  if (tag == "triplets") return CorpusFormat::triplets;
  if (tag == "uci") return CorpusFormat::uci;
  throw ValidationError("unknown corpus format '" + std::string(tag) + "' (expected triplets or uci)");
}

CorpusPaths CorpusPaths::in_directory(const std::filesystem::path& dir) {
  CorpusPaths p{dir / "corpus.txt", dir / "vocab.txt", std::nullopt};
  if (std::filesystem::exists(dir / "labels.txt")) p.labels = dir / "labels.txt";
  return p;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return in;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Parses whitespace-separated unsigned integers; false on any junk.
bool parse_uints(std::string_view line, std::uint64_t* out, std::size_t n) {
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) return false;
    auto [ptr, ec] = std::from_chars(line.data() + pos, line.data() + line.size(), out[i]);
    if (ec != std::errc()) return false;
    pos = static_cast<std::size_t>(ptr - line.data());
    if (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') return false;
  }
  return trim(line.substr(pos)).empty();
}

Vocabulary read_vocabulary(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::string> words;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto tok = trim(line);
    if (tok.empty()) throw ParseError("empty vocabulary entry in " + path.string(), lineno);
    words.emplace_back(tok);
  }
  try {
    return Vocabulary(std::move(words));
  } catch (const ValidationError& e) {
    throw ParseError(std::string(e.what()) + " in " + path.string(), 0);
  }
}

}  // namespace

Corpus load_corpus(const CorpusPaths& paths, CorpusFormat format) {
  Vocabulary vocab = read_vocabulary(paths.vocab);
  const std::uint64_t V = vocab.size();

  auto in = open_input(paths.counts);
  std::string line;
  std::size_t lineno = 0;
  std::uint64_t declared_docs = 0;
  if (format == CorpusFormat::uci) {
    std::uint64_t header[3];
    for (int h = 0; h < 3; ++h) {
      if (!std::getline(in, line)) throw ParseError("truncated UCI header", lineno + 1);
      ++lineno;
      if (!parse_uints(trim(line), &header[h], 1)) throw ParseError("malformed UCI header line", lineno);
    }
    declared_docs = header[0];
    if (header[1] != V)
      throw ValidationError("UCI header declares W=" + std::to_string(header[1]) + " but vocabulary has " +
                            std::to_string(V) + " words");
  }

  std::map<std::uint64_t, std::map<WordId, std::uint32_t>> rows;
  std::uint64_t max_doc = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = trim(line);
    if (body.empty()) continue;
    std::uint64_t f[3];
    if (!parse_uints(body, f, 3)) throw ParseError("expected 'docID wordID count'", lineno);
    if (f[0] == 0) throw ValidationError("docID must be >= 1 (line " + std::to_string(lineno) + ")");
    if (f[1] == 0 || f[1] > V)
      throw ValidationError("wordID " + std::to_string(f[1]) + " out of range 1.." + std::to_string(V) +
                            " (line " + std::to_string(lineno) + ")");
    if (f[2] == 0) throw ValidationError("count must be >= 1 (line " + std::to_string(lineno) + ")");
    if (f[2] > UINT32_MAX) throw ValidationError("count too large (line " + std::to_string(lineno) + ")");
    if (declared_docs && f[0] > declared_docs)
      throw ValidationError("docID exceeds declared document count (line " + std::to_string(lineno) + ")");
    auto& c = rows[f[0]][f[1] - 1];
    if (static_cast<std::uint64_t>(c) + f[2] > UINT32_MAX)
      throw ValidationError("count overflow (line " + std::to_string(lineno) + ")");
    c += static_cast<std::uint32_t>(f[2]);
    max_doc = std::max(max_doc, f[0]);
  }

  std::vector<std::string> raw_labels;
  if (paths.labels) {
    auto lin = open_input(*paths.labels);
    while (std::getline(lin, line)) raw_labels.emplace_back(trim(line));
  }

  std::uint64_t num_docs = std::max<std::uint64_t>(declared_docs ? declared_docs : max_doc, raw_labels.size());
  if (num_docs == 0) throw ValidationError("corpus " + paths.counts.string() + " has no documents");
  if (paths.labels && raw_labels.size() != num_docs)
    throw ValidationError("labels file has " + std::to_string(raw_labels.size()) + " lines but corpus has " +
                          std::to_string(num_docs) + " documents");

  std::vector<Document> docs(num_docs);
  for (auto& [doc_id, counts] : rows) {
    auto& d = docs[doc_id - 1];
    d.counts.reserve(counts.size());
    for (auto [w, c] : counts) d.counts.push_back({w, c});
  }

  std::vector<std::string> label_names;
  if (!raw_labels.empty()) {
    std::set<std::string> distinct;
    for (const auto& l : raw_labels)
      if (!l.empty()) distinct.insert(l);
    label_names.assign(distinct.begin(), distinct.end());
    for (std::size_t d = 0; d < num_docs; ++d) {
      if (raw_labels[d].empty()) continue;
      docs[d].label = static_cast<std::size_t>(
          std::lower_bound(label_names.begin(), label_names.end(), raw_labels[d]) - label_names.begin());
    }
  }
  return Corpus(std::move(vocab), std::move(docs), std::move(label_names));
}

void write_corpus(const Corpus& corpus, const CorpusPaths& paths, CorpusFormat format) {
  const auto& docs = corpus.documents();
  const bool has_labels = !corpus.label_names().empty();
  if (format == CorpusFormat::triplets && !has_labels && docs.back().counts.empty())
    throw ValidationError("trailing empty document cannot be written in triplet format");

  std::ofstream out(paths.counts);
  if (!out) throw Error("cannot write " + paths.counts.string());
  if (format == CorpusFormat::uci) {
    std::size_t nnz = 0;
    for (const auto& d : docs) nnz += d.counts.size();
    out << docs.size() << '\n' << corpus.vocab_size() << '\n' << nnz << '\n';
  }
  for (std::size_t d = 0; d < docs.size(); ++d)
    for (const auto& wc : docs[d].counts) out << d + 1 << ' ' << wc.word + 1 << ' ' << wc.count << '\n';

  std::ofstream vout(paths.vocab);
  if (!vout) throw Error("cannot write " + paths.vocab.string());
  for (const auto& w : corpus.vocabulary().words()) vout << w << '\n';

  if (has_labels) {
    if (!paths.labels) throw ValidationError("labeled corpus written without a labels path");
    std::ofstream lout(*paths.labels);
    if (!lout) throw Error("cannot write " + paths.labels->string());
    for (const auto& d : docs) lout << (d.label ? corpus.label_names()[*d.label] : std::string()) << '\n';
  }
}

Corpus prune_vocabulary(const Corpus& corpus, const std::set<std::string, std::less<>>& stopwords,
                        std::size_t min_doc_freq) {
  if (min_doc_freq < 1) throw ValidationError("min_doc_freq must be >= 1");
  const auto df = corpus.document_frequency();
  const auto& vocab = corpus.vocabulary();

  constexpr auto kDropped = static_cast<WordId>(-1);
  std::vector<WordId> remap(vocab.size(), kDropped);
  std::vector<std::string> kept;
  for (WordId w = 0; w < vocab.size(); ++w) {
    if (df[w] < min_doc_freq || stopwords.count(vocab.word(w))) continue;
    remap[w] = kept.size();
    kept.push_back(vocab.word(w));
  }
  if (kept.empty()) throw ValidationError("pruning removed the entire vocabulary");

  std::vector<Document> docs;
  docs.reserve(corpus.num_documents());
  for (const auto& doc : corpus.documents()) {
    Document out;
    out.label = doc.label;
    for (const auto& wc : doc.counts)
      if (remap[wc.word] != kDropped) out.counts.push_back({remap[wc.word], wc.count});
    if (!out.counts.empty()) docs.push_back(std::move(out));
  }
  if (docs.empty()) throw ValidationError("pruning left no non-empty documents");
  return Corpus(Vocabulary(std::move(kept)), std::move(docs), corpus.label_names());
}

const std::set<std::string, std::less<>>& default_english_stopwords() {
  static const std::set<std::string, std::less<>> words = {
      "a",       "about",   "above",  "after",   "again",   "against", "all",     "am",      "an",
      "and",     "any",     "are",    "as",      "at",      "be",      "because", "been",    "before",
      "being",   "below",   "between", "both",   "but",     "by",      "can",     "could",   "did",
      "do",      "does",    "doing",  "down",    "during",  "each",    "few",     "for",     "from",
      "further", "had",     "has",    "have",    "having",  "he",      "her",     "here",    "hers",
      "herself", "him",     "himself", "his",    "how",     "i",       "if",      "in",      "into",
      "is",      "it",      "its",    "itself",  "just",    "me",      "more",    "most",    "my",
      "myself",  "no",      "nor",    "not",     "now",     "of",      "off",     "on",      "once",
      "only",    "or",      "other",  "our",     "ours",    "ourselves", "out",   "over",    "own",
      "same",    "she",     "should", "so",      "some",    "such",    "than",    "that",    "the",
      "their",   "theirs",  "them",   "themselves", "then", "there",   "these",   "they",    "this",
      "those",   "through", "to",     "too",     "under",   "until",   "up",      "very",    "was",
      "we",      "were",    "what",   "when",    "where",   "which",   "while",   "who",     "whom",
      "why",     "will",    "with",   "would",   "you",     "your",    "yours",   "yourself",
      "yourselves"};
  return words;
}

std::set<std::string, std::less<>> load_stopwords(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::set<std::string, std::less<>> words;
  std::string line;
  while (std::getline(in, line)) {
    auto tok = trim(line);
    if (!tok.empty() && tok.front() != '#') words.emplace(tok);
  }
  return words;
}

}  // namespace itm
