#include "textgcn/embedding.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "textgcn/error.hpp"

namespace textgcn {

EmbeddingTable EmbeddingTable::from_rows(Matrix vectors,
                                         std::vector<std::string> keys) {
  if (vectors.rows != keys.size())
    throw std::logic_error("EmbeddingTable: key/row count mismatch");
  EmbeddingTable t;
  t.vectors = std::move(vectors);
  t.keys = std::move(keys);
  t.key_map.reserve(t.keys.size());
  for (std::size_t i = 0; i < t.keys.size(); ++i) {
    if (!t.key_map.emplace(t.keys[i], i).second)
      throw std::logic_error("EmbeddingTable: duplicate key " + t.keys[i]);
  }
  return t;
}

void save_word2vec_text(const EmbeddingTable& table,
                        const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot open for writing: " + path.string());
  os << table.size() << ' ' << table.dim() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < table.size(); ++i) {
    os << table.keys[i];
    for (double v : table.vectors.row(i)) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      os << ' ' << buf;
    }
    os << '\n';
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

EmbeddingTable load_word2vec_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw UsageError("cannot open embedding file: " + path.string());
  std::size_t count = 0, dim = 0;
  std::string header;
  if (!std::getline(is, header))
    throw UsageError("empty embedding file: " + path.string());
  {
    std::istringstream hs(header);
    if (!(hs >> count >> dim) || dim == 0)
      throw UsageError("bad word2vec header in " + path.string());
  }
  Matrix vectors(count, dim);
  std::vector<std::string> keys;
  keys.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string key;
    if (!(is >> key))
      throw UsageError("truncated embedding file: " + path.string());
    keys.push_back(key);
    for (std::size_t d = 0; d < dim; ++d) {
      if (!(is >> vectors(i, d)))
        throw UsageError("truncated vector for key " + key + " in " +
                         path.string());
    }
  }
  return EmbeddingTable::from_rows(std::move(vectors), std::move(keys));
}

std::string sentence_key(std::size_t sentence_id) {
  return "#" + std::to_string(sentence_id);
}

}  // namespace textgcn
