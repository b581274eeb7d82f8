#include "itm/cooccur.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "itm/error.hpp"
#include "itm/kernels.hpp"

namespace itm {

CooccurrenceStats finalize_cooccurrence(RowMatrix Q) {
  CooccurrenceStats s;
  const auto V = Q.rows();
  s.word_marginal = Q.rowwise().sum();
  s.Qbar.resize(V, V);
  s.degenerate.assign(static_cast<std::size_t>(V), false);
  for (Eigen::Index i = 0; i < V; ++i) {
    const double m = s.word_marginal[i];
    if (m > 0.0) {
      s.Qbar.row(i) = Q.row(i) / m;
    } else {
      s.Qbar.row(i).setConstant(1.0 / static_cast<double>(V));
      s.degenerate[static_cast<std::size_t>(i)] = true;
    }
  }
  s.Q = std::move(Q);
  return s;
}

CooccurrenceStats build_cooccurrence(const Corpus& corpus) {
  auto pairs = kernels::parallel::accumulate_pairs(corpus);
  if (pairs.documents_used == 0) throw ValidationError("no document has at least 2 tokens");
  pairs.sums /= static_cast<double>(pairs.documents_used);
  auto stats = finalize_cooccurrence(std::move(pairs.sums));
  stats.documents_used = pairs.documents_used;
  stats.documents_skipped = corpus.num_documents() - pairs.documents_used;
  return stats;
}

CooccurrenceStats analytic_cooccurrence(const Matrix& A, const Matrix& R) {
  if (R.rows() != R.cols()) throw ValidationError("R must be square");
  if (A.cols() != R.rows())
    throw ValidationError("shape mismatch: A has " + std::to_string(A.cols()) + " topics, R is " +
                          std::to_string(R.rows()) + "x" + std::to_string(R.cols()));
  constexpr double kTol = 1e-8;
  if ((A.array() < 0.0).any()) throw ValidationError("A has negative entries");
  for (Eigen::Index k = 0; k < A.cols(); ++k)
    if (std::abs(A.col(k).sum() - 1.0) > kTol) throw ValidationError("column " + std::to_string(k) + " of A not stochastic");
  if ((R.array() < 0.0).any()) throw ValidationError("R has negative entries");
  if ((R - R.transpose()).cwiseAbs().maxCoeff() > kTol)
    throw ValidationError("R is not symmetric");
  if (std::abs(R.sum() - 1.0) > kTol) throw ValidationError("R does not sum to 1");

  RowMatrix Q = A * R * A.transpose();
  // Symmetrize exactly; the triple product can differ by rounding across the diagonal.
  Q = 0.5 * (Q + Q.transpose()).eval();
  return finalize_cooccurrence(std::move(Q));
}

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void write_q_cache(const RowMatrix& Q, const std::filesystem::path& path) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write cache " + tmp);
    out.write(kQCacheMagic, sizeof kQCacheMagic);
    put_u64(out, static_cast<std::uint64_t>(Q.rows()));
    for (Eigen::Index i = 0; i < Q.rows(); ++i)
      for (Eigen::Index j = 0; j < Q.cols(); ++j) put_u64(out, std::bit_cast<std::uint64_t>(Q(i, j)));
    if (!out) throw Error("short write to cache " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

RowMatrix read_q_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open cache " + path.string(), 0);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kQCacheMagic, 8) != 0) throw ParseError("bad cache magic in " + path.string(), 0);
  const auto V = get_u64(in);
  if (!in) throw ParseError("truncated cache header in " + path.string(), 0);
  const auto size = std::filesystem::file_size(path);
  if (size != 16 + V * V * 8) throw ParseError("cache size does not match V=" + std::to_string(V), 0);
  RowMatrix Q(static_cast<Eigen::Index>(V), static_cast<Eigen::Index>(V));
  for (Eigen::Index i = 0; i < Q.rows(); ++i)
    for (Eigen::Index j = 0; j < Q.cols(); ++j) Q(i, j) = std::bit_cast<double>(get_u64(in));
  if (!in) throw ParseError("truncated cache body in " + path.string(), 0);
  return Q;
}

CooccurrenceStats cached_cooccurrence(const Corpus& corpus, const std::filesystem::path& cache_dir) {
  std::ostringstream name;
  name << std::hex << corpus.content_hash() << ".qbin";
  const auto path = cache_dir / name.str();
  if (std::filesystem::exists(path)) {
    auto Q = read_q_cache(path);
    if (static_cast<std::size_t>(Q.rows()) == corpus.vocab_size()) {
      auto stats = finalize_cooccurrence(std::move(Q));
      std::size_t used = 0;
      for (const auto& d : corpus.documents()) used += d.length() >= 2;
      stats.documents_used = used;
      stats.documents_skipped = corpus.num_documents() - used;
      return stats;
    }
  }
  auto stats = build_cooccurrence(corpus);
  std::filesystem::create_directories(cache_dir);
  write_q_cache(stats.Q, path);
  return stats;
}

}  // namespace itm
