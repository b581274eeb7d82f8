#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace itm {

using WordId = std::size_t;

/// Ordered list of distinct tokens with its inverse index.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> words);

  std::size_t size() const noexcept { return words_.size(); }
  const std::string& word(WordId id) const { return words_.at(id); }
  const std::vector<std::string>& words() const noexcept { return words_; }
  std::optional<WordId> find(std::string_view token) const;

  bool operator==(const Vocabulary& other) const { return words_ == other.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> index_;
};

struct WordCount {
  WordId word;
  std::uint32_t count;
  bool operator==(const WordCount&) const = default;
};

/// Sparse bag of words, sorted by word id, every count >= 1.
struct Document {
  std::vector<WordCount> counts;
  std::optional<std::size_t> label;  // index into Corpus::label_names()

  std::uint64_t length() const noexcept;
  bool operator==(const Document&) const = default;
};

class Corpus {
 public:
  Corpus(Vocabulary vocabulary, std::vector<Document> documents,
         std::vector<std::string> label_names = {});

  const Vocabulary& vocabulary() const noexcept { return vocabulary_; }
  const std::vector<Document>& documents() const noexcept { return documents_; }
  const std::vector<std::string>& label_names() const noexcept { return label_names_; }
  std::size_t num_documents() const noexcept { return documents_.size(); }
  std::size_t vocab_size() const noexcept { return vocabulary_.size(); }
  bool labeled() const noexcept;

  /// Number of documents containing each word.
  std::vector<std::size_t> document_frequency() const;
  /// Total token occurrences of each word.
  std::vector<std::uint64_t> word_frequency() const;
  std::uint64_t total_tokens() const;

  /// FNV-1a over the canonical triplet serialization; used as a cache key.
  std::uint64_t content_hash() const;

  bool operator==(const Corpus& other) const;

 private:
  Vocabulary vocabulary_;
  std::vector<Document> documents_;
  std::vector<std::string> label_names_;
};

enum class CorpusFormat {
  triplets,  // "docID wordID count" per line, 1-based, no header
  uci,       // UCI bag-of-words: D, W, NNZ header lines followed by triplets
};

CorpusFormat parse_corpus_format(std::string_view tag);

struct CorpusPaths {
  std::filesystem::path counts;
  std::filesystem::path vocab;
  std::optional<std::filesystem::path> labels;

  /// corpus.txt / vocab.txt / labels.txt (labels only if present) inside `dir`.
  static CorpusPaths in_directory(const std::filesystem::path& dir);
};

Corpus load_corpus(const CorpusPaths& paths, CorpusFormat format = CorpusFormat::triplets);

/// Writes counts, vocabulary and (for labeled corpora) labels. Empty documents
/// survive as docID gaps; a trailing empty document of an unlabeled corpus has
/// no triplet representation and is rejected.
void write_corpus(const Corpus& corpus, const CorpusPaths& paths,
                  CorpusFormat format = CorpusFormat::triplets);

constexpr std::size_t kDefaultMinDocFreq = 10;

/// Drops stopwords and words found in fewer than `min_doc_freq` documents,
/// reindexes the survivors in their original order, and drops documents that
/// end up empty.
Corpus prune_vocabulary(const Corpus& corpus, const std::set<std::string, std::less<>>& stopwords,
                        std::size_t min_doc_freq = kDefaultMinDocFreq);

/// Built-in English stop-word list. Pruning results depend on the list used.
const std::set<std::string, std::less<>>& default_english_stopwords();
std::set<std::string, std::less<>> load_stopwords(const std::filesystem::path& path);

}  // namespace itm
