#include "paraforge/embedding.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "paraforge/errors.hpp"

namespace paraforge {

namespace {

bool looks_like_header(const std::string& line) {
  std::istringstream in(line);
  long long count = 0, dim = 0;
  std::string extra;
  if (!(in >> count >> dim)) return false;
  if (in >> extra) return false;
  return count > 0 && dim > 0;
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void EmbeddingTable::insert(std::string token, Eigen::VectorXd vec) {
  if (dim_ == 0) dim_ = vec.size();
  if (vec.size() != dim_) {
    throw ValidationError("embedding dimension mismatch for token '" + token +
                          "': expected " + std::to_string(dim_) + ", got " +
                          std::to_string(vec.size()));
  }
  map_[std::move(token)] = std::move(vec);
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("cannot open embedding file: " + file.string());
  std::ostringstream raw;
  raw << in.rdbuf();
  const std::string content = raw.str();

  EmbeddingTable table;
  table.digest_ = fnv1a_hex(content);

  std::istringstream lines(content);
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (first && looks_like_header(line)) {
      first = false;
      continue;
    }
    first = false;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> values;
    double v;
    while (fields >> v) values.push_back(v);
    if (values.empty()) {
      throw ValidationError(file.string() + ":" + std::to_string(lineno) +
                            ": no vector components for token '" + token + "'");
    }
    Eigen::VectorXd vec = Eigen::Map<Eigen::VectorXd>(values.data(),
                                                      static_cast<Eigen::Index>(values.size()));
    if (table.dim_ != 0 && vec.size() != table.dim_) {
      throw ValidationError(file.string() + ":" + std::to_string(lineno) +
                            ": dimension mismatch (expected " +
                            std::to_string(table.dim_) + ", got " +
                            std::to_string(vec.size()) + ")");
    }
    table.insert(std::move(token), std::move(vec));
  }
  if (table.size() == 0) {
    throw ValidationError("embedding file holds no vectors: " + file.string());
  }
  return table;
}

double cosine_clipped(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  const double cos = a.dot(b) / (na * nb);
  if (cos <= 0.0) return 0.0;
  return cos >= 1.0 ? 1.0 : cos;
}

}  // namespace paraforge
