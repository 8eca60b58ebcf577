#ifndef PARAFORGE_EMBEDDING_HPP
#define PARAFORGE_EMBEDDING_HPP

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>

namespace paraforge {

// Static token embeddings. Immutable after load; a missing token is reported
// as a miss (nullptr), never as a zero vector.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(Eigen::Index dim) : dim_(dim) {}

  // Word2vec-style text format: optional first line "<count> <dim>", then one
  // token followed by `dim` decimal floats per line. UTF-8.
  static EmbeddingTable load(const std::filesystem::path& file);

  void insert(std::string token, Eigen::VectorXd vec);

  const Eigen::VectorXd* find(std::string_view token) const {
    auto it = map_.find(std::string(token));
    return it == map_.end() ? nullptr : &it->second;
  }

  Eigen::Index dim() const { return dim_; }
  std::size_t size() const { return map_.size(); }

  // FNV-1a over the source bytes for file-loaded tables; recorded in trained
  // models so a model is never applied with the wrong embeddings.
  const std::string& digest() const { return digest_; }
  void set_digest(std::string digest) { digest_ = std::move(digest); }

 private:
  Eigen::Index dim_ = 0;
  std::unordered_map<std::string, Eigen::VectorXd> map_;
  std::string digest_;
};

// Cosine similarity clipped to [0, 1]; zero vectors score 0.
double cosine_clipped(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// FNV-1a 64-bit, hex encoded.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace paraforge

#endif
